//! Binary tape images.
//!
//! Layout, all integers little-endian `u64`, floats little-endian IEEE 754 binary64:
//!
//! ```text
//! "ADTAPE01"
//! n_independents m_dependents n_slots n_records n_recorded_values
//! independents[n_independents]  dependents[m_dependents]
//! records[n_records] = { opcode: u8, result, arg1, arg2, constant: f64 }
//! recorded_values[n_recorded_values]: f64
//! ```
//!
//! Unused argument and constant fields are written as zero.

use std::io::{Read, Write};
use std::path::Path;

use admodes_core::tape::{Record, Tape};
use admodes_core::{ElementaryOp, OpKind};

use crate::error::{AppError, Result};

pub const MAGIC: &[u8; 8] = b"ADTAPE01";
const RECORD_BYTES: usize = 1 + 3 * 8 + 8;

/// Counts stored in a tape header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TapeHeader {
    pub n_independents: u64,
    pub m_dependents: u64,
    pub n_slots: u64,
    pub n_records: u64,
    pub n_recorded_values: u64,
}

pub fn encode(tape: &Tape) -> Vec<u8> {
    let records = tape.records();
    let mut out = Vec::with_capacity(
        MAGIC.len()
            + 8 * (5 + tape.n_independents() + tape.m_dependents() + tape.n_slots())
            + RECORD_BYTES * records.len(),
    );
    out.extend_from_slice(MAGIC);
    for count in [
        tape.n_independents(),
        tape.m_dependents(),
        tape.n_slots(),
        records.len(),
        tape.recorded_values().len(),
    ] {
        out.extend_from_slice(&(count as u64).to_le_bytes());
    }
    for &s in tape.independents().iter().chain(tape.dependents()) {
        out.extend_from_slice(&(s as u64).to_le_bytes());
    }
    for r in records {
        out.push(r.op.kind.code());
        let arity = r.op.arity();
        let arg = |k: usize| if k < arity { r.args[k] as u64 } else { 0 };
        let constant = if r.op.kind.has_constant() {
            r.op.constant
        } else {
            0.0
        };
        out.extend_from_slice(&(r.result as u64).to_le_bytes());
        out.extend_from_slice(&arg(0).to_le_bytes());
        out.extend_from_slice(&arg(1).to_le_bytes());
        out.extend_from_slice(&constant.to_le_bytes());
    }
    for v in tape.recorded_values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(AppError::format(format!(
                "truncated tape while reading {what}"
            )));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn slot(&mut self, what: &str) -> Result<usize> {
        usize::try_from(self.u64(what)?)
            .map_err(|_| AppError::format(format!("{what} does not fit in usize")))
    }

    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }
}

pub fn read_header(bytes: &[u8]) -> Result<TapeHeader> {
    let mut c = Cursor { buf: bytes, pos: 0 };
    header(&mut c)
}

fn header(c: &mut Cursor<'_>) -> Result<TapeHeader> {
    if c.take(MAGIC.len(), "magic")? != MAGIC {
        return Err(AppError::format("bad magic bytes"));
    }
    Ok(TapeHeader {
        n_independents: c.u64("header")?,
        m_dependents: c.u64("header")?,
        n_slots: c.u64("header")?,
        n_records: c.u64("header")?,
        n_recorded_values: c.u64("header")?,
    })
}

pub fn decode(bytes: &[u8]) -> Result<Tape> {
    let mut c = Cursor { buf: bytes, pos: 0 };
    let h = header(&mut c)?;
    // reject counts the remaining bytes cannot hold before allocating
    let needed = (h.n_independents as u128 + h.m_dependents as u128 + h.n_recorded_values as u128)
        * 8
        + h.n_records as u128 * RECORD_BYTES as u128;
    if needed > c.remaining() as u128 {
        return Err(AppError::format(
            "truncated tape: body shorter than header counts",
        ));
    }
    if needed < c.remaining() as u128 {
        return Err(AppError::format("trailing bytes after tape body"));
    }
    let independents = (0..h.n_independents)
        .map(|_| c.slot("independents"))
        .collect::<Result<Vec<_>>>()?;
    let dependents = (0..h.m_dependents)
        .map(|_| c.slot("dependents"))
        .collect::<Result<Vec<_>>>()?;
    let mut records = Vec::with_capacity(h.n_records as usize);
    for _ in 0..h.n_records {
        let code = c.take(1, "opcode")?[0];
        let kind = OpKind::from_code(code)
            .ok_or_else(|| AppError::format(format!("unknown opcode {code}")))?;
        let result = c.slot("record")?;
        let a1 = c.slot("record")?;
        let a2 = c.slot("record")?;
        let constant = c.f64("record")?;
        let op = if kind.has_constant() {
            ElementaryOp::with_constant(kind, constant)
        } else {
            ElementaryOp::new(kind)
        };
        records.push(Record {
            op,
            result,
            args: [a1, a2],
        });
    }
    let values = (0..h.n_recorded_values)
        .map(|_| c.f64("recorded values"))
        .collect::<Result<Vec<_>>>()?;
    let n_slots =
        usize::try_from(h.n_slots).map_err(|_| AppError::format("slot count too large"))?;
    Tape::from_parts(0, n_slots, independents, dependents, records, values).map_err(|e| match e {
        admodes_core::Error::InvalidTape(msg) => AppError::format(msg),
        admodes_core::Error::EmptyTrace(what) => AppError::format(format!("tape has no {what}")),
        other => AppError::Engine(other),
    })
}

pub fn save_tape<W: Write>(tape: &Tape, mut w: W) -> Result<()> {
    w.write_all(&encode(tape))?;
    w.flush()?;
    Ok(())
}

/// Reads a tape image; the returned tape has tag 0.
pub fn load_tape<R: Read>(mut r: R) -> Result<Tape> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    decode(&buf)
}

pub fn save_tape_file(tape: &Tape, path: &Path) -> Result<()> {
    save_tape(tape, std::io::BufWriter::new(std::fs::File::create(path)?))
}

pub fn load_tape_file(path: &Path) -> Result<Tape> {
    decode(&std::fs::read(path)?)
}

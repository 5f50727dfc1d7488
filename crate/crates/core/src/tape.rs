//! Operation tapes and the drivers that replay them.
//!
//! Recording happens between [`TapeRegistry::begin_trace`] and
//! [`TapeRegistry::end_trace`]: independents are marked on the session, the
//! function body runs over [`TracingScalar`]s, every elementary operation is
//! appended to the tape, and the outputs are marked as dependents. The
//! finished [`Tape`] is immutable straight-line code; it can be replayed at
//! new points forward ([`TapeEvaluator::zos_forward`],
//! [`TapeEvaluator::fov_forward`]) and reverse ([`TapeEvaluator::fov_reverse`]).
//!
//! Control flow is not re-recorded. A tape is only valid at other points if
//! the recorded function's branches do not depend on its inputs.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::rc::Rc;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;

use crate::active::{check_input_len, eval_checked, Active, VectorFunction};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::op::{apply_elementary, local_partial, ElementaryOp, OpKind};
use crate::sparse::{BitPattern, SparsityPattern};

/// One taped operation. Argument slots beyond the op's arity are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Record {
    pub op: ElementaryOp,
    pub result: usize,
    pub args: [usize; 2],
}

impl Record {
    pub fn arg_slots(&self) -> &[usize] {
        &self.args[..self.op.arity()]
    }
}

/// A finalized operation trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Tape {
    tag: u32,
    n_slots: usize,
    independents: Vec<usize>,
    dependents: Vec<usize>,
    records: Vec<Record>,
    recorded_values: Vec<f64>,
}

impl Tape {
    /// Assembles a tape from raw parts, checking single assignment and slot bounds.
    pub fn from_parts(
        tag: u32,
        n_slots: usize,
        independents: Vec<usize>,
        dependents: Vec<usize>,
        records: Vec<Record>,
        recorded_values: Vec<f64>,
    ) -> Result<Tape> {
        if independents.is_empty() {
            return Err(Error::EmptyTrace("independents"));
        }
        if dependents.is_empty() {
            return Err(Error::EmptyTrace("dependents"));
        }
        if recorded_values.len() != n_slots {
            return Err(Error::InvalidTape(
                "recorded value count differs from slot count",
            ));
        }
        let mut assigned = vec![false; n_slots];
        for &s in &independents {
            if s >= n_slots {
                return Err(Error::InvalidTape("independent slot out of range"));
            }
            if assigned[s] {
                return Err(Error::InvalidTape("duplicate independent"));
            }
            assigned[s] = true;
        }
        for r in &records {
            if r.result >= n_slots {
                return Err(Error::InvalidTape("result slot out of range"));
            }
            if r.arg_slots().iter().any(|&a| a >= n_slots || !assigned[a]) {
                return Err(Error::InvalidTape("argument slot read before assignment"));
            }
            if assigned[r.result] {
                return Err(Error::InvalidTape("slot assigned twice"));
            }
            assigned[r.result] = true;
        }
        if assigned.iter().any(|a| !a) {
            return Err(Error::InvalidTape("unassigned slot"));
        }
        let mut seen = BTreeSet::new();
        for &s in &dependents {
            if s >= n_slots {
                return Err(Error::InvalidTape("dependent slot out of range"));
            }
            if !seen.insert(s) {
                return Err(Error::InvalidTape("duplicate dependent"));
            }
        }
        Ok(Tape {
            tag,
            n_slots,
            independents,
            dependents,
            records,
            recorded_values,
        })
    }

    pub fn tag(&self) -> u32 {
        self.tag
    }

    pub fn n_slots(&self) -> usize {
        self.n_slots
    }

    pub fn n_independents(&self) -> usize {
        self.independents.len()
    }

    pub fn m_dependents(&self) -> usize {
        self.dependents.len()
    }

    pub fn independents(&self) -> &[usize] {
        &self.independents
    }

    pub fn dependents(&self) -> &[usize] {
        &self.dependents
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    /// Slot values at the point the tape was recorded.
    pub fn recorded_values(&self) -> &[f64] {
        &self.recorded_values
    }

    pub fn recorded_point(&self) -> Vec<f64> {
        self.independents
            .iter()
            .map(|&s| self.recorded_values[s])
            .collect()
    }

    pub fn recorded_dependents(&self) -> Vec<f64> {
        self.dependents
            .iter()
            .map(|&s| self.recorded_values[s])
            .collect()
    }

    pub(crate) fn with_tag(mut self, tag: u32) -> Tape {
        self.tag = tag;
        self
    }
}

#[derive(Debug)]
struct Builder {
    tag: u32,
    open: bool,
    values: Vec<f64>,
    records: Vec<Record>,
    independents: Vec<usize>,
    dependents: Vec<usize>,
}

impl Builder {
    fn push(&mut self, op: ElementaryOp, args: [usize; 2], value: f64) -> usize {
        let result = self.values.len();
        self.values.push(value);
        self.records.push(Record { op, result, args });
        result
    }
}

/// An open active section recording into a tape.
#[derive(Debug, Clone)]
pub struct TraceSession {
    inner: Rc<RefCell<Builder>>,
}

impl TraceSession {
    /// Opens a session that is not tracked by any registry.
    pub fn open(tag: u32) -> TraceSession {
        TraceSession {
            inner: Rc::new(RefCell::new(Builder {
                tag,
                open: true,
                values: Vec::new(),
                records: Vec::new(),
                independents: Vec::new(),
                dependents: Vec::new(),
            })),
        }
    }

    pub fn tag(&self) -> u32 {
        self.inner.borrow().tag
    }

    pub fn is_open(&self) -> bool {
        self.inner.borrow().open
    }

    pub fn n_records(&self) -> usize {
        self.inner.borrow().records.len()
    }

    /// Allocates a slot for a new independent holding `value`.
    pub fn mark_independent(&self, value: f64) -> Result<TracingScalar> {
        let mut b = self.inner.borrow_mut();
        if !b.open {
            return Err(Error::SessionClosed);
        }
        let slot = b.values.len();
        b.values.push(value);
        b.independents.push(slot);
        Ok(TracingScalar {
            slot,
            value,
            session: Rc::clone(&self.inner),
        })
    }

    /// Marks `y` as the next dependent and returns its value.
    pub fn mark_dependent(&self, y: &TracingScalar) -> Result<f64> {
        if !Rc::ptr_eq(&self.inner, &y.session) {
            return Err(Error::ForeignScalar);
        }
        let mut b = self.inner.borrow_mut();
        if !b.open {
            return Err(Error::SessionClosed);
        }
        let slot = if b.dependents.contains(&y.slot) {
            // same slot twice: copy it so dependents stay distinct
            let op = ElementaryOp::with_constant(OpKind::AddConst, 0.0);
            let v = apply_elementary(op, &[y.value])?;
            b.push(op, [y.slot, 0], v)
        } else {
            y.slot
        };
        b.dependents.push(slot);
        Ok(y.value)
    }

    /// Ends the active section. The session is closed even on error.
    pub fn finish(&self) -> Result<Tape> {
        let mut b = self.inner.borrow_mut();
        if !b.open {
            return Err(Error::SessionClosed);
        }
        b.open = false;
        let n_slots = b.values.len();
        Tape::from_parts(
            b.tag,
            n_slots,
            core::mem::take(&mut b.independents),
            core::mem::take(&mut b.dependents),
            core::mem::take(&mut b.records),
            core::mem::take(&mut b.values),
        )
    }
}

/// Active scalar bound to a slot of an open trace session.
#[derive(Debug, Clone)]
pub struct TracingScalar {
    slot: usize,
    value: f64,
    session: Rc<RefCell<Builder>>,
}

impl TracingScalar {
    pub fn slot(&self) -> usize {
        self.slot
    }

    fn record(&self, op: ElementaryOp, args: [usize; 2], value: f64) -> Result<Self> {
        let mut b = self.session.borrow_mut();
        if !b.open {
            return Err(Error::SessionClosed);
        }
        let slot = b.push(op, args, value);
        Ok(TracingScalar {
            slot,
            value,
            session: Rc::clone(&self.session),
        })
    }
}

impl Active for TracingScalar {
    fn value(&self) -> f64 {
        self.value
    }

    fn constant(&self, c: f64) -> Result<Self> {
        self.record(ElementaryOp::with_constant(OpKind::Const, c), [0, 0], c)
    }

    fn unary(&self, op: ElementaryOp) -> Result<Self> {
        let v = apply_elementary(op, &[self.value])?;
        self.record(op, [self.slot, 0], v)
    }

    fn binary(&self, op: ElementaryOp, rhs: &Self) -> Result<Self> {
        if !Rc::ptr_eq(&self.session, &rhs.session) {
            return Err(Error::ForeignScalar);
        }
        let v = apply_elementary(op, &[self.value, rhs.value])?;
        self.record(op, [self.slot, rhs.slot], v)
    }
}

/// Finished tapes keyed by tag, plus the tags with an open session.
#[derive(Debug, Default)]
pub struct TapeRegistry {
    tapes: BTreeMap<u32, Tape>,
    open: BTreeSet<u32>,
}

impl TapeRegistry {
    pub fn new() -> Self {
        TapeRegistry::default()
    }

    pub fn begin_trace(&mut self, tag: u32) -> Result<TraceSession> {
        if !self.open.insert(tag) {
            return Err(Error::SessionAlreadyOpen(tag));
        }
        Ok(TraceSession::open(tag))
    }

    /// Finalizes the session and registers its tape, replacing any tape with the same tag.
    pub fn end_trace(&mut self, session: &TraceSession) -> Result<&Tape> {
        let tag = session.tag();
        if !self.open.contains(&tag) || !session.is_open() {
            return Err(Error::SessionClosed);
        }
        self.open.remove(&tag);
        let tape = session.finish()?;
        self.tapes.insert(tag, tape);
        Ok(&self.tapes[&tag])
    }

    /// Records `f` at `x` with every argument marked independent.
    pub fn record<F: VectorFunction>(&mut self, tag: u32, f: &F, x: &[f64]) -> Result<&Tape> {
        let session = self.begin_trace(tag)?;
        let outcome = trace_into(&session, f, x);
        if let Err(e) = outcome {
            self.open.remove(&tag);
            let _ = session.finish();
            return Err(e);
        }
        self.end_trace(&session)
    }

    /// Registers an existing tape (e.g. one loaded from disk) under `tag`.
    pub fn insert(&mut self, tag: u32, tape: Tape) -> Option<Tape> {
        self.tapes.insert(tag, tape.with_tag(tag))
    }

    pub fn get(&self, tag: u32) -> Result<&Tape> {
        self.tapes.get(&tag).ok_or(Error::UnknownTag(tag))
    }

    pub fn remove(&mut self, tag: u32) -> Option<Tape> {
        self.tapes.remove(&tag)
    }

    pub fn tags(&self) -> impl Iterator<Item = u32> + '_ {
        self.tapes.keys().copied()
    }

    pub fn is_open(&self, tag: u32) -> bool {
        self.open.contains(&tag)
    }
}

fn trace_into<F: VectorFunction>(session: &TraceSession, f: &F, x: &[f64]) -> Result<()> {
    check_input_len(f, x.len())?;
    let inputs = x
        .iter()
        .map(|&v| session.mark_independent(v))
        .collect::<Result<Vec<_>>>()?;
    for y in eval_checked(f, &inputs)? {
        session.mark_dependent(&y)?;
    }
    Ok(())
}

/// Records `f` at `x` outside any registry.
pub fn record<F: VectorFunction>(tag: u32, f: &F, x: &[f64]) -> Result<Tape> {
    let session = TraceSession::open(tag);
    let outcome = trace_into(&session, f, x);
    let tape = session.finish();
    outcome?;
    tape
}

fn partials(op: ElementaryOp, values: &[f64], args: &[usize]) -> Result<[f64; 2]> {
    let mut a = [0.0; 2];
    for (k, &s) in args.iter().enumerate() {
        a[k] = values[s];
    }
    let a = &a[..args.len()];
    let mut d = [0.0; 2];
    for k in 0..args.len() {
        d[k] = local_partial(op, a, k)?;
    }
    Ok(d)
}

/// Per-call replay workspace for one tape.
///
/// Slot values kept by a forward sweep live here, not on the tape, so
/// several evaluators can replay the same tape concurrently.
#[derive(Debug)]
pub struct TapeEvaluator<'t> {
    tape: &'t Tape,
    values: Option<Vec<f64>>,
    visits: usize,
}

impl<'t> TapeEvaluator<'t> {
    pub fn new(tape: &'t Tape) -> Self {
        TapeEvaluator {
            tape,
            values: None,
            visits: 0,
        }
    }

    /// Total number of records processed by all sweeps so far.
    pub fn records_visited(&self) -> usize {
        self.visits
    }

    pub fn is_prepared(&self) -> bool {
        self.values.is_some()
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.tape.n_independents() {
            return Err(Error::DimensionMismatch {
                what: "independents",
                expected: self.tape.n_independents(),
                got: x.len(),
            });
        }
        Ok(())
    }

    fn sweep_values(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        let tape = self.tape;
        let mut v = vec![0.0; tape.n_slots];
        for (&s, &xi) in tape.independents.iter().zip(x) {
            v[s] = xi;
        }
        for r in &tape.records {
            let val = match r.op.arity() {
                0 => apply_elementary(r.op, &[])?,
                1 => apply_elementary(r.op, &[v[r.args[0]]])?,
                _ => apply_elementary(r.op, &[v[r.args[0]], v[r.args[1]]])?,
            };
            v[r.result] = val;
        }
        self.visits += tape.records.len();
        Ok(v)
    }

    fn outputs(&self, v: &[f64]) -> Vec<f64> {
        self.tape.dependents.iter().map(|&s| v[s]).collect()
    }

    /// Zero-order replay at `x`. With `keep`, slot values are retained for a reverse sweep.
    pub fn zos_forward(&mut self, x: &[f64], keep: bool) -> Result<Vec<f64>> {
        self.check_point(x)?;
        self.values = None;
        let v = self.sweep_values(x)?;
        let y = self.outputs(&v);
        if keep {
            self.values = Some(v);
        }
        Ok(y)
    }

    /// First-order vector forward sweep: `(F(x), F'(x) * seed)`. Always keeps values.
    pub fn fov_forward(&mut self, x: &[f64], seed: &Matrix) -> Result<(Vec<f64>, Matrix)> {
        self.check_point(x)?;
        if seed.rows() != x.len() {
            return Err(Error::DimensionMismatch {
                what: "seed rows",
                expected: x.len(),
                got: seed.rows(),
            });
        }
        self.values = None;
        let tape = self.tape;
        let p = seed.cols();
        let mut v = vec![0.0; tape.n_slots];
        let mut dot = vec![0.0; tape.n_slots * p];
        for (j, (&s, &xi)) in tape.independents.iter().zip(x).enumerate() {
            v[s] = xi;
            dot[s * p..(s + 1) * p].copy_from_slice(seed.row(j));
        }
        for r in &tape.records {
            let args = r.arg_slots();
            let vals: [f64; 2] = [v[r.args[0]], v[r.args[1]]];
            v[r.result] = apply_elementary(r.op, &vals[..args.len()])?;
            let d = partials(r.op, &v, args)?;
            let out = r.result * p;
            for k in 0..p {
                let mut acc = 0.0;
                for (a, &s) in args.iter().enumerate() {
                    acc += d[a] * dot[s * p + k];
                }
                dot[out + k] = acc;
            }
        }
        self.visits += tape.records.len();
        let y = self.outputs(&v);
        let mut jac = Matrix::zeros(tape.m_dependents(), p);
        for (i, &s) in tape.dependents.iter().enumerate() {
            jac.row_mut(i).copy_from_slice(&dot[s * p..(s + 1) * p]);
        }
        self.values = Some(v);
        Ok((y, jac))
    }

    /// First-order vector reverse sweep: `weights * F'(x)` for `weights` of shape `q x m`.
    ///
    /// Needs the slot values of a preceding `zos_forward(.., true)` or `fov_forward`.
    pub fn fov_reverse(&mut self, weights: &Matrix) -> Result<Matrix> {
        let tape = self.tape;
        let v = self.values.as_ref().ok_or(Error::ReverseNotPrepared)?;
        if weights.cols() != tape.m_dependents() {
            return Err(Error::DimensionMismatch {
                what: "weight columns",
                expected: tape.m_dependents(),
                got: weights.cols(),
            });
        }
        let q = weights.rows();
        let mut bar = vec![0.0; tape.n_slots * q];
        for (i, &s) in tape.dependents.iter().enumerate() {
            for r in 0..q {
                bar[s * q + r] += weights[(r, i)];
            }
        }
        for rec in tape.records.iter().rev() {
            let args = rec.arg_slots();
            if args.is_empty() {
                continue;
            }
            let out = rec.result * q;
            if bar[out..out + q].iter().all(|&b| b == 0.0) {
                continue;
            }
            let d = partials(rec.op, v, args)?;
            for (a, &s) in args.iter().enumerate() {
                for r in 0..q {
                    let b = bar[out + r];
                    bar[s * q + r] += d[a] * b;
                }
            }
        }
        // records with zero adjoint are still visited once
        self.visits += tape.records.len();
        let mut z = Matrix::zeros(q, tape.n_independents());
        for (j, &s) in tape.independents.iter().enumerate() {
            for r in 0..q {
                z[(r, j)] = bar[s * q + r];
            }
        }
        Ok(z)
    }
}

/// Jacobian by forward sweep with the identity seed.
pub fn jacobian_forward(tape: &Tape, x: &[f64]) -> Result<Matrix> {
    let seed = Matrix::identity(tape.n_independents());
    TapeEvaluator::new(tape)
        .fov_forward(x, &seed)
        .map(|(_, j)| j)
}

/// Jacobian by one value-keeping replay and a reverse sweep with identity weights.
pub fn jacobian_reverse(tape: &Tape, x: &[f64]) -> Result<Matrix> {
    let mut ev = TapeEvaluator::new(tape);
    ev.zos_forward(x, true)?;
    ev.fov_reverse(&Matrix::identity(tape.m_dependents()))
}

/// Full Jacobian; forward when `n <= m`, reverse otherwise.
pub fn jacobian(tape: &Tape, x: &[f64]) -> Result<Matrix> {
    if tape.n_independents() <= tape.m_dependents() {
        jacobian_forward(tape, x)
    } else {
        jacobian_reverse(tape, x)
    }
}

/// Gradient of a scalar-valued tape by a single reverse sweep.
pub fn gradient(tape: &Tape, x: &[f64]) -> Result<Vec<f64>> {
    if tape.m_dependents() != 1 {
        return Err(Error::NotScalarValued(tape.m_dependents()));
    }
    vec_jac(tape, x, &[1.0])
}

/// `F'(x) * v`.
pub fn jac_vec(tape: &Tape, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != tape.n_independents() {
        return Err(Error::DimensionMismatch {
            what: "tangent length",
            expected: tape.n_independents(),
            got: v.len(),
        });
    }
    let seed = Matrix::from_row_major(v.len(), 1, v.to_vec())?;
    let (_, y) = TapeEvaluator::new(tape).fov_forward(x, &seed)?;
    Ok(y.column(0))
}

/// `u^T * F'(x)`.
pub fn vec_jac(tape: &Tape, x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
    if u.len() != tape.m_dependents() {
        return Err(Error::DimensionMismatch {
            what: "weight length",
            expected: tape.m_dependents(),
            got: u.len(),
        });
    }
    let mut ev = TapeEvaluator::new(tape);
    ev.zos_forward(x, true)?;
    let w = Matrix::from_row_major(1, u.len(), u.to_vec())?;
    Ok(ev.fov_reverse(&w)?.row(0).to_vec())
}

/// Structural Jacobian pattern of the taped function by forward bit propagation.
pub fn jac_pat(tape: &Tape) -> SparsityPattern {
    let n = tape.n_independents();
    let mut bits: Vec<Option<BitPattern>> = vec![None; tape.n_slots];
    for (j, &s) in tape.independents.iter().enumerate() {
        bits[s] = BitPattern::single(n, j + 1).ok();
    }
    let empty = BitPattern::empty(n);
    for r in &tape.records {
        let p = match r.arg_slots() {
            [] => empty.clone(),
            [a] => bits[*a].clone().unwrap_or_else(|| empty.clone()),
            [a, b] => {
                let pa = bits[*a].as_ref().unwrap_or(&empty);
                let pb = bits[*b].as_ref().unwrap_or(&empty);
                pa.union(pb)
            }
            _ => unreachable!("arity is at most 2"),
        };
        bits[r.result] = Some(p);
    }
    let rows = tape
        .dependents
        .iter()
        .map(|&s| bits[s].as_ref().map_or_else(Vec::new, BitPattern::indices))
        .collect();
    SparsityPattern::new(n, rows).expect("bit indices are sorted and in range")
}

#[cfg(test)]
mod tests {
    use super::*;

    struct SumSquares;

    impl VectorFunction for SumSquares {
        fn n_independents(&self) -> usize {
            3
        }
        fn m_dependents(&self) -> usize {
            1
        }
        fn eval<S: Active>(&self, x: &[S]) -> Result<Vec<S>> {
            let mut acc = x[0].mul(&x[0])?;
            for xi in &x[1..] {
                acc = acc.add(&xi.mul(xi)?)?;
            }
            Ok(vec![acc])
        }
    }

    struct Identity(usize);

    impl VectorFunction for Identity {
        fn n_independents(&self) -> usize {
            self.0
        }
        fn m_dependents(&self) -> usize {
            self.0
        }
        fn eval<S: Active>(&self, x: &[S]) -> Result<Vec<S>> {
            Ok(x.to_vec())
        }
    }

    struct Wide;

    impl VectorFunction for Wide {
        fn n_independents(&self) -> usize {
            4
        }
        fn m_dependents(&self) -> usize {
            2
        }
        fn eval<S: Active>(&self, x: &[S]) -> Result<Vec<S>> {
            let a = x[0].mul(&x[1])?.sin()?.add(&x[3].exp()?)?;
            let b = x[2]
                .div(&x[0].add_const(3.0)?)?
                .mul_const(2.0)?
                .sub(&x[1].cos()?)?;
            Ok(vec![a, b])
        }
    }

    #[test]
    fn begin_trace_twice_fails() {
        let mut reg = TapeRegistry::new();
        let s = reg.begin_trace(1).unwrap();
        assert_eq!(s.n_records(), 0);
        assert!(matches!(
            reg.begin_trace(1),
            Err(Error::SessionAlreadyOpen(1))
        ));
        assert!(reg.begin_trace(2).is_ok());
    }

    #[test]
    fn empty_traces_are_rejected() {
        let mut reg = TapeRegistry::new();
        let s = reg.begin_trace(1).unwrap();
        assert_eq!(reg.end_trace(&s), Err(Error::EmptyTrace("independents")));
        let s = reg.begin_trace(1).unwrap();
        s.mark_independent(2.0).unwrap();
        assert_eq!(reg.end_trace(&s), Err(Error::EmptyTrace("dependents")));
        assert!(!reg.is_open(1));
    }

    #[test]
    fn closed_sessions_reject_use() {
        let mut reg = TapeRegistry::new();
        let s = reg.begin_trace(3).unwrap();
        let x = s.mark_independent(2.0).unwrap();
        let y = x.exp().unwrap();
        s.mark_dependent(&y).unwrap();
        reg.end_trace(&s).unwrap();
        assert!(matches!(s.mark_independent(1.0), Err(Error::SessionClosed)));
        assert!(matches!(x.sin(), Err(Error::SessionClosed)));
        assert!(matches!(s.mark_dependent(&y), Err(Error::SessionClosed)));
        assert!(matches!(reg.end_trace(&s), Err(Error::SessionClosed)));
    }

    #[test]
    fn foreign_scalars_are_rejected() {
        let mut reg = TapeRegistry::new();
        let a = reg.begin_trace(1).unwrap();
        let b = reg.begin_trace(2).unwrap();
        let xa = a.mark_independent(1.0).unwrap();
        let xb = b.mark_independent(2.0).unwrap();
        assert!(matches!(a.mark_dependent(&xb), Err(Error::ForeignScalar)));
        assert!(matches!(xa.add(&xb), Err(Error::ForeignScalar)));
    }

    #[test]
    fn independent_as_dependent_gives_identity_row() {
        let mut reg = TapeRegistry::new();
        let s = reg.begin_trace(1).unwrap();
        let x0 = s.mark_independent(1.5).unwrap();
        let x1 = s.mark_independent(-2.0).unwrap();
        assert_eq!(s.mark_dependent(&x0).unwrap(), 1.5);
        let y = x0.mul(&x1).unwrap();
        s.mark_dependent(&y).unwrap();
        // the same scalar twice stays two distinct dependents
        s.mark_dependent(&y).unwrap();
        let tape = reg.end_trace(&s).unwrap().clone();
        assert_eq!(tape.dependents()[0], tape.independents()[0]);
        let j = jacobian(&tape, &[1.5, -2.0]).unwrap();
        assert_eq!(j.row(0), &[1.0, 0.0]);
        assert_eq!(j.row(1), &[-2.0, 1.5]);
        assert_eq!(j.row(2), &[-2.0, 1.5]);
    }

    #[test]
    fn retaping_replaces() {
        let mut reg = TapeRegistry::new();
        reg.record(1, &Identity(2), &[1.0, 2.0]).unwrap();
        reg.record(1, &Identity(3), &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(reg.get(1).unwrap().n_independents(), 3);
        assert_eq!(reg.tags().collect::<Vec<_>>(), vec![1]);
        assert!(matches!(reg.get(9), Err(Error::UnknownTag(9))));
    }

    #[test]
    fn replay_at_taping_point_is_exact() {
        let x = [0.7, -1.2, 2.5, 0.1];
        let tape = record(1, &Wide, &x).unwrap();
        let y = TapeEvaluator::new(&tape).zos_forward(&x, false).unwrap();
        assert_eq!(y, tape.recorded_dependents());
        assert_eq!(tape.recorded_point(), x.to_vec());
    }

    #[test]
    fn reverse_needs_a_kept_forward_sweep() {
        let tape = record(1, &Wide, &[0.7, -1.2, 2.5, 0.1]).unwrap();
        let mut ev = TapeEvaluator::new(&tape);
        assert_eq!(
            ev.fov_reverse(&Matrix::identity(2)),
            Err(Error::ReverseNotPrepared)
        );
        ev.zos_forward(&[1.0, 1.0, 1.0, 1.0], false).unwrap();
        assert_eq!(
            ev.fov_reverse(&Matrix::identity(2)),
            Err(Error::ReverseNotPrepared)
        );
        ev.zos_forward(&[1.0, 1.0, 1.0, 1.0], true).unwrap();
        assert!(ev.fov_reverse(&Matrix::identity(2)).is_ok());
        assert!(matches!(
            ev.fov_reverse(&Matrix::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn gradient_of_sum_of_squares() {
        let tape = record(1, &SumSquares, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(
            gradient(&tape, &[1.0, 2.0, 3.0]).unwrap(),
            vec![2.0, 4.0, 6.0]
        );
        let wide = record(1, &Wide, &[0.7, -1.2, 2.5, 0.1]).unwrap();
        assert_eq!(gradient(&wide, &[0.0; 4]), Err(Error::NotScalarValued(2)));
    }

    #[test]
    fn identity_jacobian() {
        let tape = record(1, &Identity(3), &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(
            jacobian(&tape, &[4.0, 5.0, 6.0]).unwrap(),
            Matrix::identity(3)
        );
    }

    #[test]
    fn zero_seeds_and_weights() {
        let x = [0.7, -1.2, 2.5, 0.1];
        let tape = record(1, &Wide, &x).unwrap();
        assert_eq!(jac_vec(&tape, &x, &[0.0; 4]).unwrap(), vec![0.0; 2]);
        assert_eq!(vec_jac(&tape, &x, &[0.0; 2]).unwrap(), vec![0.0; 4]);
        let mut ev = TapeEvaluator::new(&tape);
        let (_, y) = ev.fov_forward(&x, &Matrix::zeros(4, 3)).unwrap();
        assert!(y.as_slice().iter().all(|&v| v == 0.0));
        assert!(ev
            .fov_reverse(&Matrix::zeros(2, 2))
            .unwrap()
            .as_slice()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn forward_and_reverse_agree() {
        let x = [0.7, -1.2, 2.5, 0.1];
        let tape = record(1, &Wide, &x).unwrap();
        let at = [0.3, 0.9, -1.0, 0.5];
        let jf = jacobian_forward(&tape, &at).unwrap();
        let jr = jacobian_reverse(&tape, &at).unwrap();
        let dense = crate::dense::dense_jacobian(&Wide, &at).unwrap();
        for k in 0..jf.as_slice().len() {
            let (a, b, c) = (jf.as_slice()[k], jr.as_slice()[k], dense.as_slice()[k]);
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            assert!((a - c).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn reverse_visits_each_record_once() {
        for n in [1usize, 5, 40] {
            let tape = record(1, &SumSquaresN(n), &vec![1.0; n]).unwrap();
            let mut ev = TapeEvaluator::new(&tape);
            ev.zos_forward(&vec![2.0; n], true).unwrap();
            let before = ev.records_visited();
            ev.fov_reverse(&Matrix::identity(1)).unwrap();
            assert_eq!(ev.records_visited() - before, tape.records().len());
        }
    }

    struct SumSquaresN(usize);

    impl VectorFunction for SumSquaresN {
        fn n_independents(&self) -> usize {
            self.0
        }
        fn m_dependents(&self) -> usize {
            1
        }
        fn eval<S: Active>(&self, x: &[S]) -> Result<Vec<S>> {
            let mut acc = x[0].mul(&x[0])?;
            for xi in &x[1..] {
                acc = acc.add(&xi.mul(xi)?)?;
            }
            Ok(vec![acc])
        }
    }

    #[test]
    fn tape_pattern() {
        let tape = record(1, &Wide, &[0.7, -1.2, 2.5, 0.1]).unwrap();
        let p = jac_pat(&tape);
        assert_eq!(p.rows(), &[vec![1, 2, 4], vec![1, 2, 3]]);
    }

    #[test]
    fn from_parts_rejects_malformed() {
        let rec = |op, result, a, b| Record {
            op: ElementaryOp::new(op),
            result,
            args: [a, b],
        };
        // reads slot 2 before it is assigned
        let bad = Tape::from_parts(
            0,
            3,
            vec![0],
            vec![2],
            vec![rec(OpKind::Add, 1, 0, 2), rec(OpKind::Exp, 2, 0, 0)],
            vec![0.0; 3],
        );
        assert!(matches!(bad, Err(Error::InvalidTape(_))));
        let twice = Tape::from_parts(
            0,
            2,
            vec![0],
            vec![1],
            vec![rec(OpKind::Exp, 1, 0, 0), rec(OpKind::Sin, 1, 0, 0)],
            vec![0.0; 2],
        );
        assert!(matches!(twice, Err(Error::InvalidTape(_))));
        let ok = Tape::from_parts(
            0,
            2,
            vec![0],
            vec![1],
            vec![rec(OpKind::Exp, 1, 0, 0)],
            vec![0.0, 1.0],
        );
        assert!(ok.is_ok());
    }

    #[test]
    fn domain_error_at_new_point() {
        struct Root;
        impl VectorFunction for Root {
            fn n_independents(&self) -> usize {
                1
            }
            fn m_dependents(&self) -> usize {
                1
            }
            fn eval<S: Active>(&self, x: &[S]) -> Result<Vec<S>> {
                Ok(vec![x[0].ln()?])
            }
        }
        let tape = record(1, &Root, &[2.0]).unwrap();
        let err = TapeEvaluator::new(&tape).zos_forward(&[-1.0], true);
        assert!(matches!(err, Err(Error::Domain { op: "log", .. })));
        assert!(matches!(
            TapeEvaluator::new(&tape).zos_forward(&[1.0, 2.0], true),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}

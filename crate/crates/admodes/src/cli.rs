//! Command-line harness over the Bratu residual.
//!
//! [`run`] does all the work and returns the exit code with the report, so it
//! can be tested without spawning a process.

use std::fmt::Write as _;
use std::path::PathBuf;

use admodes_core::bratu::{BratuProblem, FIXTURE_S, FIXTURE_STATE, FIXTURE_T};
use admodes_core::compression::{cpr_jacobian, densify};
use admodes_core::dense::dense_jacobian;
use admodes_core::fd::{fd_jacobian, FdConfig};
use admodes_core::sparse::{pattern_jacobian, sparse_jacobian};
use admodes_core::tape::{self, Tape};
use admodes_core::Matrix;
use clap::{Parser, ValueEnum};
use serde_json::json;

use crate::error::{AppError, Result};
use crate::render;
use crate::state::load_state;
use crate::tape_file::{load_tape_file, save_tape_file};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_BAD_ARGS: i32 = 2;
pub const EXIT_EVAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// Largest AD-vs-AD relative deviation verify accepts.
pub const AD_TOLERANCE: f64 = 1e-10;
/// Largest AD-vs-finite-difference absolute deviation verify accepts.
pub const FD_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Dense,
    Compressed,
    Sparse,
    Pattern,
    Reverse,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

/// Jacobians of the Bratu residual in several AD modes.
#[derive(Debug, Parser)]
#[command(name = "admodes", version)]
pub struct Args {
    #[arg(long, value_enum, default_value = "dense")]
    pub mode: Mode,
    /// Interior grid points; defaults to 7, or the length of --state.
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, default_value_t = FIXTURE_S)]
    pub s: f64,
    #[arg(long, default_value_t = FIXTURE_T)]
    pub t: f64,
    /// State file with one value per line.
    #[arg(long, value_name = "FILE")]
    pub state: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Use a saved tape instead of recording one (reverse and verify).
    #[arg(long, value_name = "FILE")]
    pub tape: Option<PathBuf>,
    /// Write the recorded tape here.
    #[arg(long, value_name = "FILE")]
    pub save_tape: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateSource {
    /// The 7-point reference state, or zeros for any other `dim`.
    Fixture,
    File(PathBuf),
    Values(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliRequest {
    pub mode: Mode,
    pub dim: Option<usize>,
    pub s: f64,
    pub t: f64,
    pub state: StateSource,
    pub format: Format,
    pub tape: Option<PathBuf>,
    pub save_tape: Option<PathBuf>,
}

impl CliRequest {
    /// Fixture problem, given mode, text output.
    pub fn new(mode: Mode) -> Self {
        CliRequest {
            mode,
            dim: None,
            s: FIXTURE_S,
            t: FIXTURE_T,
            state: StateSource::Fixture,
            format: Format::Text,
            tape: None,
            save_tape: None,
        }
    }
}

impl From<Args> for CliRequest {
    fn from(a: Args) -> Self {
        CliRequest {
            mode: a.mode,
            dim: a.dim,
            s: a.s,
            t: a.t,
            state: a.state.map_or(StateSource::Fixture, StateSource::File),
            format: a.format,
            tape: a.tape,
            save_tape: a.save_tape,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn exit_code(e: &AppError) -> i32 {
    match e {
        AppError::Args(_) => EXIT_BAD_ARGS,
        AppError::Engine(_) => EXIT_EVAL,
        AppError::Io(_) | AppError::Format(_) => EXIT_IO,
    }
}

pub fn run(req: &CliRequest) -> Outcome {
    match execute(req) {
        Ok((code, stdout)) => Outcome {
            code,
            stdout,
            stderr: String::new(),
        },
        Err(e) => Outcome {
            code: exit_code(&e),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

struct Setup {
    problem: BratuProblem,
    state: Vec<f64>,
    point: Vec<f64>,
}

fn setup(req: &CliRequest) -> Result<Setup> {
    let state = match &req.state {
        StateSource::Fixture => {
            let dim = req.dim.unwrap_or(FIXTURE_STATE.len());
            if dim == FIXTURE_STATE.len() {
                FIXTURE_STATE.to_vec()
            } else {
                vec![0.0; dim]
            }
        }
        StateSource::File(p) => load_state(p)?,
        StateSource::Values(v) => v.clone(),
    };
    if let Some(dim) = req.dim {
        if dim != state.len() {
            return Err(AppError::Args(format!(
                "--dim {dim} does not match a state of length {}",
                state.len()
            )));
        }
    }
    if state.len() < 2 {
        return Err(AppError::Args("dim must be at least 2".into()));
    }
    if !req.s.is_finite() || !req.t.is_finite() || state.iter().any(|v| !v.is_finite()) {
        return Err(AppError::Args("s, t and the state must be finite".into()));
    }
    let problem = BratuProblem::new(state.len(), req.s, req.t)?;
    let point = problem.point_with_params(&state);
    Ok(Setup {
        problem,
        state,
        point,
    })
}

fn obtain_tape(req: &CliRequest, su: &Setup) -> Result<Tape> {
    let tape = match &req.tape {
        Some(path) => {
            let t = load_tape_file(path)?;
            let (n, m) = (su.point.len(), su.problem.dim());
            if t.n_independents() != n || t.m_dependents() != m {
                return Err(AppError::Args(format!(
                    "tape is {}x{}, problem needs {m}x{n}",
                    t.m_dependents(),
                    t.n_independents()
                )));
            }
            t
        }
        None => tape::record(1, &su.problem.function(true), &su.point)?,
    };
    Ok(tape)
}

fn matrix_out(m: &Matrix, mode: &str, fmt: Format) -> String {
    match fmt {
        Format::Text => render::matrix_text(m),
        Format::Csv => render::matrix_csv(m),
        Format::Json => {
            let mut v = render::matrix_json(m);
            v["mode"] = json!(mode);
            v.to_string() + "\n"
        }
    }
}

fn execute(req: &CliRequest) -> Result<(i32, String)> {
    let su = setup(req)?;
    let with_params = su.problem.function(true);
    let mut tape_cache = None;
    if let Some(path) = &req.save_tape {
        let t = obtain_tape(req, &su)?;
        save_tape_file(&t, path)?;
        tape_cache = Some(t);
    }
    let mut get_tape = || -> Result<Tape> {
        match tape_cache.take() {
            Some(t) => Ok(t),
            None => obtain_tape(req, &su),
        }
    };
    let out = match req.mode {
        Mode::Dense => matrix_out(
            &dense_jacobian(&with_params, &su.point)?,
            "dense",
            req.format,
        ),
        Mode::Reverse => {
            let t = get_tape()?;
            let jac = reverse_rows(&t, &su.point)?;
            matrix_out(&jac, "reverse", req.format)
        }
        Mode::Sparse => {
            let f = su.problem.function(false);
            let active: Vec<usize> = (1..=su.state.len()).collect();
            let rows = sparse_jacobian(&f, &su.state, &active)?;
            match req.format {
                Format::Text => render::sparse_text(&rows),
                Format::Csv => render::sparse_csv(&rows),
                Format::Json => {
                    let mut v = render::sparse_json(&rows, su.state.len());
                    v["mode"] = json!("sparse");
                    v.to_string() + "\n"
                }
            }
        }
        Mode::Pattern => {
            let p = pattern_jacobian(&with_params, &su.point, su.point.len())?;
            match req.format {
                Format::Text => render::pattern_text(&p),
                Format::Csv => render::pattern_csv(&p),
                Format::Json => {
                    let mut v = render::pattern_json(&p);
                    v["mode"] = json!("pattern");
                    v.to_string() + "\n"
                }
            }
        }
        Mode::Compressed => compressed_report(&su, req.format)?,
        Mode::Verify => {
            let t = get_tape()?;
            return verify_report(&su, &t, req.format);
        }
    };
    Ok((EXIT_OK, out))
}

/// Jacobian accumulated one row at a time, `e_i^T F'(x)` per reverse sweep.
pub fn reverse_rows(t: &Tape, x: &[f64]) -> Result<Matrix> {
    let m = t.m_dependents();
    let mut rows = Vec::with_capacity(m);
    let mut e = vec![0.0; m];
    for i in 0..m {
        e[i] = 1.0;
        rows.push(tape::vec_jac(t, x, &e)?);
        e[i] = 0.0;
    }
    Ok(Matrix::from_rows(&rows)?)
}

fn compressed_report(su: &Setup, fmt: Format) -> Result<String> {
    let f = su.problem.function(true);
    let (cj, rows) = cpr_jacobian(&f, &su.point)?;
    let n_colors = cj.coloring.n_colors();
    let max_degree = cj.graph.max_degree();
    Ok(match fmt {
        Format::Text => {
            let mut s = String::new();
            writeln!(s, "colors: {n_colors} (max degree {max_degree})").unwrap();
            let colors: Vec<String> = cj.coloring.colors().iter().map(|c| c.to_string()).collect();
            writeln!(s, "coloring: {}", colors.join(" ")).unwrap();
            s += "seed:\n";
            s += &render::seed_text(&cj.seed);
            s += "compressed:\n";
            s += &render::matrix_text(&cj.values);
            s += "reconstructed:\n";
            s += &render::sparse_text(&rows);
            s
        }
        Format::Csv => {
            let mut s = String::from("# seed\n");
            s += &render::matrix_csv(&cj.seed);
            s += "# compressed\n";
            s += &render::matrix_csv(&cj.values);
            s += "# reconstructed\n";
            s += &render::sparse_csv(&rows);
            s
        }
        Format::Json => {
            let v = json!({
                "mode": "compressed",
                "colors": n_colors,
                "max_degree": max_degree,
                "coloring": cj.coloring.colors(),
                "seed": render::matrix_json(&cj.seed),
                "compressed": render::matrix_json(&cj.values),
                "reconstructed": render::sparse_json(&rows, su.point.len()),
            });
            v.to_string() + "\n"
        }
    })
}

/// Deviation scaled by `max(1, |a|, |b|)`.
pub fn relative_deviation(a: &Matrix, b: &Matrix) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(1.0))
        .fold(0.0, f64::max)
}

fn state_block(m: &Matrix, n: usize) -> Matrix {
    let rows: Vec<Vec<f64>> = (0..m.rows()).map(|i| m.row(i)[..n].to_vec()).collect();
    Matrix::from_rows(&rows).expect("rows share a width")
}

/// The five AD Jacobians used by verify, labelled. The sparse one covers only
/// the state columns.
pub fn all_mode_jacobians(
    problem: &BratuProblem,
    t: &Tape,
    point: &[f64],
) -> Result<Vec<(&'static str, Matrix)>> {
    let f = problem.function(true);
    let n = problem.dim();
    let dense = dense_jacobian(&f, point)?;
    let (_, rows) = cpr_jacobian(&f, point)?;
    let compressed = densify(&rows, point.len());
    let active: Vec<usize> = (1..=n).collect();
    let sparse_rows = sparse_jacobian(&problem.function(false), &point[..n], &active)?;
    let sparse = densify(&sparse_rows, n);
    let fwd = tape::jacobian_forward(t, point)?;
    let rev = tape::jacobian_reverse(t, point)?;
    Ok(vec![
        ("dense", dense),
        ("compressed", compressed),
        ("sparse", sparse),
        ("tape-forward", fwd),
        ("tape-reverse", rev),
    ])
}

fn verify_report(su: &Setup, t: &Tape, fmt: Format) -> Result<(i32, String)> {
    let n = su.problem.dim();
    let modes = all_mode_jacobians(&su.problem, t, &su.point)?;
    let fd = fd_jacobian(&su.problem.function(true), &su.point, &FdConfig::default())?;
    let mut pairs = Vec::new();
    for a in 0..modes.len() {
        for b in a + 1..modes.len() {
            let (na, ja) = &modes[a];
            let (nb, jb) = &modes[b];
            let d = if ja.cols() == jb.cols() {
                relative_deviation(ja, jb)
            } else {
                relative_deviation(&state_block(ja, n), &state_block(jb, n))
            };
            pairs.push((format!("{na} vs {nb}"), d));
        }
    }
    let mut fd_devs = Vec::new();
    for (name, j) in &modes {
        let reference = if j.cols() == fd.cols() {
            fd.clone()
        } else {
            state_block(&fd, n)
        };
        fd_devs.push((format!("{name} vs fd"), j.max_abs_diff(&reference)));
    }
    let max_ad = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
    let max_fd = fd_devs.iter().map(|p| p.1).fold(0.0, f64::max);
    let ok = max_ad <= AD_TOLERANCE && max_fd <= FD_TOLERANCE;
    let out = match fmt {
        Format::Text => {
            let mut s = String::new();
            for (name, d) in pairs.iter().chain(&fd_devs) {
                writeln!(s, "{name:<30} {d:.3e}").unwrap();
            }
            writeln!(
                s,
                "max AD vs AD relative deviation {max_ad:.3e} (limit {AD_TOLERANCE:e})"
            )
            .unwrap();
            writeln!(
                s,
                "max AD vs FD absolute deviation {max_fd:.3e} (limit {FD_TOLERANCE:e})"
            )
            .unwrap();
            writeln!(s, "{}", if ok { "verify: ok" } else { "verify: FAILED" }).unwrap();
            s
        }
        Format::Csv => {
            let mut s = String::from("pair,deviation\n");
            for (name, d) in pairs.iter().chain(&fd_devs) {
                writeln!(s, "{name},{d:.16e}").unwrap();
            }
            s
        }
        Format::Json => {
            let v = json!({
                "mode": "verify",
                "ok": ok,
                "max_ad_deviation": max_ad,
                "max_fd_deviation": max_fd,
                "pairs": pairs.iter().chain(&fd_devs).map(|(k, d)| json!({"pair": k, "deviation": d})).collect::<Vec<_>>(),
            });
            v.to_string() + "\n"
        }
    };
    Ok((if ok { EXIT_OK } else { EXIT_VERIFY_FAILED }, out))
}

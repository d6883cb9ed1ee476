use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use gramian_rk::adi_ref::{self, AdiError, AdiState};
use gramian_rk::linalg::{self, CMat, RMat, C64};
use gramian_rk::lyapunov::{self, GramianState, LyapunovError, SolverConfig, StepRecord};
use gramian_rk::operator::{CsrMatrix, DenseOperator, Operator, OperatorError};
use gramian_rk::shifts::{self, ShiftError, ShiftSet};
use gramian_rk::sylvester::{self, SylvesterError, SylvesterShiftPair, SylvesterState};
use gramian_rk::tableau::{ButcherTableau, TableauError};
use gramian_rk::{oracle, SparseOperator};
use log::{info, warn};
use serde::Serialize;
use thiserror::Error;

use crate::mmio::{self, MmError, MmMatrix};
use crate::{Command, LyapArgs, Method, ShiftArgs, ShiftSpec, SolverArgs, SylvArgs, VerifyArgs};

/// Largest order for which `verify` runs the Kronecker-sized dense solve.
const ORACLE_MAX_N: usize = 64;
/// Largest order converted to dense for exact eigenvalue shifts.
const EIG_MAX_N: usize = 2000;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Matrix(#[from] MmError),
    #[error("{path}: {msg}")]
    Input { path: String, msg: String },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Shift(#[from] ShiftError),
    #[error(transparent)]
    Lyapunov(#[from] LyapunovError),
    #[error(transparent)]
    Adi(#[from] AdiError),
    #[error(transparent)]
    Sylvester(#[from] SylvesterError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Converged,
    NotConverged,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Converged => 0,
            Outcome::NotConverged => 2,
        }
    }
}

pub fn run(command: Command) -> Result<Outcome, CliError> {
    match command {
        Command::SolveLyap(args) => solve_lyap(args),
        Command::SolveSylv(args) => solve_sylv(args),
        Command::Verify(args) => verify(args).map(|_| Outcome::Converged),
        Command::Shifts(args) => shifts_cmd(args).map(|_| Outcome::Converged),
    }
}

fn input_err(path: &Path, msg: impl Into<String>) -> CliError {
    CliError::Input { path: path.display().to_string(), msg: msg.into() }
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

/// A real square matrix as an operator, sparse or dense by file format.
struct SystemMatrix {
    op: Box<dyn Operator>,
    source: MmMatrix,
}

impl SystemMatrix {
    fn load(path: &Path) -> Result<Self, CliError> {
        let source = mmio::read_matrix_market(path)?;
        let (rows, cols) = source.shape();
        if rows != cols {
            return Err(input_err(path, format!("matrix must be square, got {rows}x{cols}")));
        }
        if source.is_complex() {
            return Err(input_err(path, "complex system matrices are not supported"));
        }
        let op: Box<dyn Operator> = match &source {
            MmMatrix::Coordinate { entries, .. } => {
                let t: Vec<(usize, usize, f64)> = entries.iter().map(|&(i, j, v)| (i, j, v.re)).collect();
                Box::new(SparseOperator::new(CsrMatrix::from_triplets(rows, &t)))
            }
            MmMatrix::Array { data, .. } => Box::new(DenseOperator::new(linalg::real_part(data))?),
        };
        Ok(Self { op, source })
    }

    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn dense(&self) -> RMat {
        linalg::real_part(&self.source.to_dense())
    }

    fn negated(&self) -> Result<Box<dyn Operator>, CliError> {
        Ok(match &self.source {
            MmMatrix::Coordinate { entries, .. } => {
                let t: Vec<(usize, usize, f64)> = entries.iter().map(|&(i, j, v)| (i, j, -v.re)).collect();
                Box::new(SparseOperator::new(CsrMatrix::from_triplets(self.dim(), &t)))
            }
            MmMatrix::Array { .. } => Box::new(DenseOperator::new(-self.dense())?),
        })
    }
}

/// Dense real right-hand side block with `rows` rows.
fn load_block(path: &Path, rows: usize) -> Result<CMat, CliError> {
    let m = mmio::read_matrix_market(path)?;
    if m.is_complex() {
        return Err(input_err(path, "right-hand side must be real"));
    }
    if m.shape().0 != rows {
        return Err(input_err(path, format!("expected {rows} rows, found {}", m.shape().0)));
    }
    Ok(m.to_dense())
}

fn parse_numbers(path: &Path, line_no: usize, line: &str) -> Result<Vec<f64>, CliError> {
    line.split(|ch: char| ch.is_whitespace() || ch == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| input_err(path, format!("line {line_no}: bad number '{t}'"))))
        .collect()
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#') && !l.starts_with('%'))
}

/// One shift per line: "re im" or "re".
pub fn read_shift_file(path: &Path) -> Result<Vec<C64>, CliError> {
    let text = read_text(path)?;
    data_lines(&text)
        .map(|(no, l)| match parse_numbers(path, no, l)?.as_slice() {
            [re] => Ok(C64::new(*re, 0.0)),
            [re, im] => Ok(C64::new(*re, *im)),
            other => Err(input_err(path, format!("line {no}: expected 're im', found {} fields", other.len()))),
        })
        .collect()
}

/// One pair per line: "re(μ̂) im(μ̂) re(μ̆) im(μ̆)".
pub fn read_pair_file(path: &Path) -> Result<Vec<SylvesterShiftPair>, CliError> {
    let text = read_text(path)?;
    data_lines(&text)
        .map(|(no, l)| match parse_numbers(path, no, l)?.as_slice() {
            [a, b, c, d] => Ok(SylvesterShiftPair::new(C64::new(*a, *b), C64::new(*c, *d))),
            other => Err(input_err(path, format!("line {no}: expected 4 numbers, found {}", other.len()))),
        })
        .collect()
}

/// Tableaus separated by lines holding only `---`.
pub fn read_tableau_file(path: &Path) -> Result<Vec<ButcherTableau>, CliError> {
    let text = read_text(path)?;
    let mut out = Vec::new();
    let mut chunk = String::new();
    let mut first_line = 1;
    let flush = |chunk: &str, first_line: usize, out: &mut Vec<ButcherTableau>| -> Result<(), CliError> {
        if chunk.lines().all(|l| l.trim().is_empty() || l.trim().starts_with('#')) {
            return Ok(());
        }
        let t = ButcherTableau::from_text(chunk).map_err(|e| match e {
            TableauError::Parse { line, msg } => input_err(path, format!("line {}: {msg}", line + first_line - 1)),
            other => input_err(path, other.to_string()),
        })?;
        out.push(t);
        Ok(())
    };
    for (i, line) in text.lines().enumerate() {
        if line.trim() == "---" {
            flush(&chunk, first_line, &mut out)?;
            chunk.clear();
            first_line = i + 2;
        } else {
            chunk.push_str(line);
            chunk.push('\n');
        }
    }
    flush(&chunk, first_line, &mut out)?;
    if out.is_empty() {
        return Err(input_err(path, "no tableau found"));
    }
    Ok(out)
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn thread_cap() -> usize {
    let avail = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    match std::env::var("GRAMIAN_RK_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => n,
            _ => {
                warn!("ignoring GRAMIAN_RK_THREADS={v:?}");
                avail
            }
        },
        Err(_) => avail,
    }
}

/// Factorizes distinct `(σ, τ, transpose)` combinations on up to `GRAMIAN_RK_THREADS`
/// threads so that the sequential iteration finds them cached.
fn prefactor(op: &dyn Operator, keys: &[(C64, C64, bool)]) -> Result<(), CliError> {
    let mut distinct: Vec<(C64, C64, bool)> = Vec::new();
    for k in keys {
        if !distinct.iter().any(|d| d == k) {
            distinct.push(*k);
        }
    }
    distinct.truncate(128);
    let threads = thread_cap().min(distinct.len());
    if threads <= 1 {
        return Ok(());
    }
    info!("prefactorizing {} shifted systems on {threads} threads", distinct.len());
    let chunk = distinct.len().div_ceil(threads);
    std::thread::scope(|s| {
        let handles: Vec<_> = distinct
            .chunks(chunk)
            .map(|part| s.spawn(move || part.iter().try_for_each(|&(sg, tau, tr)| op.prefactor(sg, tau, tr))))
            .collect();
        handles.into_iter().try_for_each(|h| h.join().expect("prefactorization thread panicked"))
    })?;
    Ok(())
}

fn lyapunov_shifts(spec: &ShiftSpec, a: &SystemMatrix, arnoldi: usize) -> Result<ShiftSet, CliError> {
    match spec {
        ShiftSpec::Auto(n) => Ok(shifts::heuristic_shifts(a.op.as_ref(), arnoldi, *n)?),
        ShiftSpec::Eig(n) => {
            if a.dim() > EIG_MAX_N {
                return Err(CliError::Config(format!(
                    "eig shifts need a dense eigensolve; n = {} > {EIG_MAX_N}",
                    a.dim()
                )));
            }
            Ok(shifts::eig_shifts(&a.dense(), *n)?)
        }
        ShiftSpec::File(p) => Ok(ShiftSet::user(read_shift_file(p)?)),
    }
}

#[derive(Debug, Serialize)]
struct Report {
    command: &'static str,
    method: &'static str,
    n: usize,
    rhs_columns: usize,
    shift_source: String,
    shifts: Vec<[f64; 2]>,
    steps: usize,
    converged: bool,
    final_residual: f64,
    tol: f64,
    factor_columns: usize,
    realify: bool,
    wall_time_s: f64,
}

fn prefix_path(prefix: &str, suffix: &str) -> PathBuf {
    PathBuf::from(format!("{prefix}{suffix}"))
}

fn residual_csv(rows: impl Iterator<Item = (C64, f64)>) -> String {
    let mut s = String::from("step,shift_re,shift_im,residual\n");
    for (j, (mu, r)) in rows.enumerate() {
        s.push_str(&format!("{},{},{},{}\n", j + 1, fmt_f64(mu.re), fmt_f64(mu.im), fmt_f64(r)));
    }
    s
}

fn write_report(prefix: &str, report: &Report) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    write_text(&prefix_path(prefix, "_report.json"), &(json + "\n"))
}

fn config(solver: &SolverArgs, realify: bool) -> SolverConfig {
    SolverConfig { tol: solver.tol, max_steps: solver.max_steps, realify, ..Default::default() }
}

fn solve_lyap(args: LyapArgs) -> Result<Outcome, CliError> {
    let start = Instant::now();
    // Parse every input before any solve.
    let a = SystemMatrix::load(&args.a)?;
    let b = load_block(&args.b, a.dim())?;
    let schedule = args.tableau_file.as_deref().map(read_tableau_file).transpose()?;
    if schedule.is_some() && args.method == Method::Adi {
        return Err(CliError::Config("--tableau-file cannot be combined with --method adi".into()));
    }
    if schedule.is_some() && args.realify {
        return Err(CliError::Config("--realify applies to shift sequences, not tableau schedules".into()));
    }
    if let Some(ShiftSpec::File(p)) = &args.shifts {
        read_shift_file(p)?;
    }
    let cfg = config(&args.solver, args.realify);
    cfg.validate()?;
    let prefix = args.solver.out.as_str();
    let op = a.op.as_ref();

    let (set, source) = match (&schedule, &args.shifts) {
        (Some(_), _) => (ShiftSet::user(Vec::new()), "tableau-file".to_string()),
        (None, Some(spec)) => {
            let set = lyapunov_shifts(spec, &a, args.solver.arnoldi)?;
            let source = format!("{:?}", set.source);
            if set.arnoldi_breakdown {
                warn!("Arnoldi broke down early; fewer Ritz values were available");
            }
            (set, source)
        }
        (None, None) => return Err(CliError::Config("either --shifts or --tableau-file is required".into())),
    };
    info!("{} shifts ({source}), proper = {}", set.len(), set.proper);

    let (outcome, z, h, csv, steps) = match (args.method, &schedule) {
        (Method::Adi, _) => {
            let alphas = set.adi_shifts();
            let keys: Vec<_> = alphas.iter().map(|&al| (al, C64::new(1.0, 0.0), false)).collect();
            prefactor(op, &keys)?;
            let (state, outcome) = match adi_ref::solve_lyapunov_adi(op, &b, &alphas, &cfg) {
                Ok(s) => (s, Outcome::Converged),
                Err(AdiError::NotConverged(s)) => (*s, Outcome::NotConverged),
                Err(e) => return Err(e.into()),
            };
            let AdiState { w, z, shift_log, residual_history, w0_norm_sq } = state;
            let norm = if w0_norm_sq > 0.0 { w0_norm_sq } else { 1.0 };
            let csv = residual_csv(shift_log.iter().copied().zip(residual_history.iter().map(|r| r / norm)));
            (outcome, z, w, csv, shift_log.len())
        }
        (Method::Rk, sched) => {
            let result = match sched {
                Some(tabs) => {
                    let full: Vec<ButcherTableau> = tabs.iter().cycle().take(cfg.max_steps).cloned().collect();
                    let keys: Vec<_> = full
                        .iter()
                        .flat_map(|t| (0..t.stages()).map(move |i| (C64::new(1.0, 0.0), -t.lambda()[(i, i)], false)))
                        .collect();
                    prefactor(op, &keys)?;
                    lyapunov::solve_lyapunov_sstage(op, &b, &full, &cfg)
                }
                None => {
                    let keys: Vec<_> = set.values.iter().map(|&mu| (C64::new(1.0, 0.0), -mu, false)).collect();
                    prefactor(op, &keys)?;
                    lyapunov::solve_lyapunov_shifts(op, &b, &set.values, &cfg)
                }
            };
            let (state, outcome) = match result {
                Ok(s) => (s, Outcome::Converged),
                Err(LyapunovError::NotConverged(s)) => (*s, Outcome::NotConverged),
                Err(e) => return Err(e.into()),
            };
            let GramianState { z, h, shift_log, residual_history, h0_norm_sq, step_index, .. } = state;
            let norm = if h0_norm_sq > 0.0 { h0_norm_sq } else { 1.0 };
            let csv =
                residual_csv(shift_log.iter().map(StepRecord::shift).zip(residual_history.iter().map(|r| r / norm)));
            (outcome, z, h, csv, step_index)
        }
    };

    let complex_out = !args.realify;
    mmio::write_dense(&prefix_path(prefix, "_Z.mtx"), &z, complex_out)?;
    mmio::write_dense(&prefix_path(prefix, "_h.mtx"), &h, complex_out)?;
    write_text(&prefix_path(prefix, "_residual.csv"), &csv)?;
    let h0 = linalg::spectral_norm(&b).powi(2);
    let final_residual = if h0 > 0.0 { linalg::spectral_norm(&h).powi(2) / h0 } else { 0.0 };
    let report = Report {
        command: "solve-lyap",
        method: match args.method {
            Method::Rk => "rk",
            Method::Adi => "adi",
        },
        n: a.dim(),
        rhs_columns: b.ncols(),
        shift_source: source,
        shifts: set.values.iter().map(|m| [m.re, m.im]).collect(),
        steps,
        converged: outcome == Outcome::Converged,
        final_residual,
        tol: cfg.tol,
        factor_columns: z.ncols(),
        realify: args.realify,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    write_report(prefix, &report)?;
    if outcome == Outcome::NotConverged {
        eprintln!("not converged: relative residual {final_residual:.3e} > tol {:.3e} after {steps} steps", cfg.tol);
    } else {
        info!("converged in {steps} steps, relative residual {final_residual:.3e}");
    }
    Ok(outcome)
}

fn sylvester_pairs(
    spec: &ShiftSpec,
    a: &SystemMatrix,
    b: &SystemMatrix,
    arnoldi: usize,
) -> Result<Vec<SylvesterShiftPair>, CliError> {
    match spec {
        ShiftSpec::File(p) => read_pair_file(p),
        ShiftSpec::Eig(n) => {
            if a.dim().max(b.dim()) > EIG_MAX_N {
                return Err(CliError::Config(format!("eig shifts need dense eigensolves; order > {EIG_MAX_N}")));
            }
            let la = linalg::eigenvalues_real(&a.dense());
            let lb = linalg::eigenvalues_real(&b.dense());
            let k = (*n).min(la.len()).min(lb.len());
            Ok(la.iter().zip(&lb).take(k).map(|(x, y)| SylvesterShiftPair::exact(*x, *y)).collect())
        }
        ShiftSpec::Auto(n) => {
            // μ̆ = −1/conj(λ_A) from A, μ̂ = 1/conj(λ_B) from −B.
            let breve = shifts::heuristic_shifts(a.op.as_ref(), arnoldi, *n)
                .map_err(|e| CliError::Config(format!("shifts from A (A must be stable): {e}")))?;
            let neg_b = b.negated()?;
            let hat = shifts::heuristic_shifts(neg_b.as_ref(), arnoldi, *n)
                .map_err(|e| CliError::Config(format!("shifts from -B (B must be anti-stable): {e}")))?;
            Ok(hat.values.iter().zip(&breve.values).map(|(h, br)| SylvesterShiftPair::new(*h, *br)).collect())
        }
    }
}

fn solve_sylv(args: SylvArgs) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let a = SystemMatrix::load(&args.a)?;
    let b = SystemMatrix::load(&args.b)?;
    let f = load_block(&args.f, a.dim())?;
    let g = load_block(&args.g, b.dim())?;
    if f.ncols() != g.ncols() {
        return Err(CliError::Config(format!("F has {} columns but G has {}", f.ncols(), g.ncols())));
    }
    let cfg = config(&args.solver, false);
    cfg.validate()?;
    let pairs = sylvester_pairs(&args.shifts, &a, &b, args.solver.arnoldi)?;
    let prefix = args.solver.out.as_str();
    let one = C64::new(1.0, 0.0);
    prefactor(a.op.as_ref(), &pairs.iter().map(|p| (one, -p.mu_hat, false)).collect::<Vec<_>>())?;
    prefactor(b.op.as_ref(), &pairs.iter().map(|p| (one, p.mu_breve, true)).collect::<Vec<_>>())?;

    let (state, outcome) = match sylvester::solve_sylvester(a.op.as_ref(), b.op.as_ref(), &f, &g, &pairs, &cfg) {
        Ok(s) => (s, Outcome::Converged),
        Err(SylvesterError::NotConverged(s)) => (*s, Outcome::NotConverged),
        Err(e) => return Err(e.into()),
    };
    let SylvesterState { z_hat, z_breve, gamma, residual_history, rhs_norm, shift_log, step_index, .. } = &state;
    mmio::write_dense(&prefix_path(prefix, "_Z.mtx"), z_hat, true)?;
    mmio::write_dense(&prefix_path(prefix, "_Zbreve.mtx"), z_breve, true)?;
    let mut gtxt = String::new();
    for g in gamma {
        gtxt.push_str(&format!("{} {}\n", fmt_f64(g.re), fmt_f64(g.im)));
    }
    write_text(&prefix_path(prefix, "_Gamma.txt"), &gtxt)?;
    let norm = if *rhs_norm > 0.0 { *rhs_norm } else { 1.0 };
    let csv = residual_csv(shift_log.iter().map(|p| p.mu_hat).zip(residual_history.iter().map(|r| r / norm)));
    write_text(&prefix_path(prefix, "_residual.csv"), &csv)?;
    let report = Report {
        command: "solve-sylv",
        method: "rk",
        n: a.dim(),
        rhs_columns: f.ncols(),
        shift_source: format!("{:?}", args.shifts).split('(').next().unwrap_or("").to_lowercase(),
        shifts: pairs.iter().map(|p| [p.mu_hat.re, p.mu_hat.im]).collect(),
        steps: *step_index,
        converged: outcome == Outcome::Converged,
        final_residual: state.relative_residual(),
        tol: cfg.tol,
        factor_columns: z_hat.ncols(),
        realify: false,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    write_report(prefix, &report)?;
    if outcome == Outcome::NotConverged {
        eprintln!("not converged: relative residual {:.3e} after {step_index} steps", state.relative_residual());
    }
    Ok(outcome)
}

fn verify(args: VerifyArgs) -> Result<(), CliError> {
    let a = SystemMatrix::load(&args.a)?;
    let n = a.dim();
    let b = load_block(&args.b, n)?;
    let z = load_block_any(&args.z, n)?;
    let h = args.h.as_deref().map(|p| load_block_any(p, n)).transpose()?;
    let op = a.op.as_ref();
    let zero = CMat::zeros(n, 0);
    let full = lyapunov::residual_defect(op, &z, &zero, &b);
    let rhs = linalg::frobenius(&(&b * b.adjoint()));
    println!("residual_frobenius {}", fmt_f64(full));
    println!("relative_residual {}", fmt_f64(if rhs > 0.0 { full / rhs } else { full }));
    if let Some(h) = h {
        println!("residual_defect {}", fmt_f64(lyapunov::residual_defect(op, &z, &h, &b)));
    }
    if n <= ORACLE_MAX_N {
        let sol =
            oracle::dense_lyapunov(&a.dense(), &linalg::real_part(&b)).map_err(|e| CliError::Config(e.to_string()))?;
        let p = linalg::gram(&z, n);
        let err = linalg::frobenius(&(&p - &sol.matrix)) / linalg::frobenius(&sol.matrix).max(f64::MIN_POSITIVE);
        println!("oracle_relative_error {}", fmt_f64(err));
    } else {
        println!("oracle_relative_error skipped (n = {n} > {ORACLE_MAX_N})");
    }
    Ok(())
}

/// Dense block that may be complex (solver output).
fn load_block_any(path: &Path, rows: usize) -> Result<CMat, CliError> {
    let m = mmio::read_matrix_market(path)?;
    if m.shape().0 != rows {
        return Err(input_err(path, format!("expected {rows} rows, found {}", m.shape().0)));
    }
    Ok(m.to_dense())
}

fn shifts_cmd(args: ShiftArgs) -> Result<(), CliError> {
    let a = SystemMatrix::load(&args.a)?;
    let set = lyapunov_shifts(&args.shifts, &a, args.arnoldi)?;
    let mut text = String::new();
    for m in &set.values {
        text.push_str(&format!("{} {}\n", fmt_f64(m.re), fmt_f64(m.im)));
    }
    print!("{text}");
    eprintln!("{} shifts, proper = {}, source = {:?}", set.len(), set.proper, set.source);
    if set.arnoldi_breakdown {
        eprintln!("warning: Arnoldi broke down early");
    }
    if let Some(out) = &args.out {
        write_text(out, &text)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_spec_parsing() {
        assert_eq!("auto:20".parse::<ShiftSpec>().unwrap(), ShiftSpec::Auto(20));
        assert_eq!("eig:3".parse::<ShiftSpec>().unwrap(), ShiftSpec::Eig(3));
        assert_eq!("file:s.txt".parse::<ShiftSpec>().unwrap(), ShiftSpec::File("s.txt".into()));
        assert!("auto:x".parse::<ShiftSpec>().is_err());
        assert!("bogus".parse::<ShiftSpec>().is_err());
    }

    #[test]
    fn residual_csv_format() {
        let csv = residual_csv([(C64::new(1.0, -2.0), 0.5)].into_iter());
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("step,shift_re,shift_im,residual"));
        assert!(lines.next().unwrap().starts_with("1,1.0000000000000000e0,-2.0000000000000000e0,"));
    }
}

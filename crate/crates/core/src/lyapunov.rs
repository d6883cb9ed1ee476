//! Low-rank Lyapunov solvers for `A P + P Aᵀ + B Bᵀ = 0`.
//!
//! Each step advances the pair `(P_j, h_j)` with a Runge-Kutta tableau applied to
//! `P' = h hᴴ`, `h' = A h`, keeping `P_j = Z_j Z_jᴴ` in factored form. For tableaus
//! that satisfy the residual-preservation condition the iterates obey
//!
//! ```text
//! A P_j + P_j Aᵀ + B Bᵀ = h_j h_jᴴ,
//! ```
//!
//! so `‖h_j‖₂²` is the exact spectral norm of the residual. Stages of lower-triangular
//! tableaus are computed as `s` sequential shifted solves.

use log::debug;
use thiserror::Error;

use crate::linalg::{self, CMat, RMat, C64};
use crate::operator::{Operator, OperatorError};
use crate::tableau::{self, ButcherTableau};

#[derive(Debug, Error)]
pub enum LyapunovError {
    #[error("step {step}: tableau rejected: {reason}")]
    TableauRejected { step: usize, reason: String },
    #[error("step {step}: shifted solve failed: {source}")]
    StageSolveFailed {
        step: usize,
        #[source]
        source: OperatorError,
    },
    #[error("not converged after {} steps (relative residual {:.3e})", .0.step_index, .0.relative_residual())]
    NotConverged(Box<GramianState>),
    #[error("shift {0} is real and cannot form a conjugate pair")]
    RealShiftNotPairable(C64),
    #[error("shift {0} has non-positive real part")]
    NonPositiveRealPart(C64),
    #[error("shift set is not proper: {shift} at position {index} has no adjacent conjugate")]
    ImproperShiftSet { index: usize, shift: C64 },
    #[error("realified step needs real iterates")]
    ComplexState,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: operator is {expected}x{expected}, right-hand side has {found} rows")]
    DimensionMismatch { expected: usize, found: usize },
}

impl LyapunovError {
    /// The partial state carried by [`LyapunovError::NotConverged`].
    pub fn into_partial(self) -> Result<GramianState, LyapunovError> {
        match self {
            LyapunovError::NotConverged(state) => Ok(*state),
            other => Err(other),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Stop once `‖h_j‖² / ‖h_0‖² ≤ tol`.
    pub tol: f64,
    pub max_steps: usize,
    /// Step sizes `ω_j`; missing entries default to 1.
    pub step_sizes: Vec<f64>,
    /// Replace conjugate shift pairs with one real double step.
    pub realify: bool,
    /// Relative tolerance on the residual-preservation defect.
    pub defect_check_tol: f64,
    /// Accept non-conforming tableaus and record the correction terms they introduce.
    pub diagnostic: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_steps: 500,
            step_sizes: Vec::new(),
            realify: false,
            defect_check_tol: 1e-12,
            diagnostic: false,
        }
    }
}

impl SolverConfig {
    pub fn step_size(&self, j: usize) -> f64 {
        self.step_sizes.get(j).copied().unwrap_or(1.0)
    }

    pub fn validate(&self) -> Result<(), LyapunovError> {
        if !(self.tol > 0.0) {
            return Err(LyapunovError::InvalidConfig(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_steps == 0 {
            return Err(LyapunovError::InvalidConfig("max_steps must be positive".into()));
        }
        if let Some(w) = self.step_sizes.iter().find(|w| !(**w > 0.0)) {
            return Err(LyapunovError::InvalidConfig(format!("step sizes must be positive, got {w}")));
        }
        Ok(())
    }
}

/// What an accepted step applied.
#[derive(Debug, Clone, PartialEq)]
pub enum StepRecord {
    OneStage(C64),
    /// Realified double step for `{μ, conj μ}`.
    RealPair(C64),
    Tableau {
        omega: f64,
        spectrum: Vec<C64>,
    },
}

impl StepRecord {
    /// Representative shift for reporting: the one-stage or pair shift, or the first
    /// eigenvalue of a multi-stage tableau.
    pub fn shift(&self) -> C64 {
        match self {
            StepRecord::OneStage(mu) | StepRecord::RealPair(mu) => *mu,
            StepRecord::Tableau { spectrum, .. } => spectrum.first().copied().unwrap_or_default(),
        }
    }
}

/// `K_j` of one step and the defect matrix of its (scaled) tableau.
#[derive(Debug, Clone)]
pub struct CorrectionTerm {
    /// Stage blocks `[K_1, …, K_s]`, each `n × m`.
    pub k: CMat,
    pub defect: CMat,
}

#[derive(Debug, Clone)]
pub struct GramianState {
    pub step_index: usize,
    /// Low-rank factor, `P_j = Z Zᴴ`.
    pub z: CMat,
    /// Residual factor `h_j`, `n × m`.
    pub h: CMat,
    pub h0_norm_sq: f64,
    pub shift_log: Vec<StepRecord>,
    /// `‖h_j‖₂²` after each accepted step.
    pub residual_history: Vec<f64>,
    /// Filled in diagnostic mode only.
    pub corrections: Vec<CorrectionTerm>,
    pub converged: bool,
}

impl GramianState {
    pub fn new(b: &CMat) -> Self {
        Self {
            step_index: 0,
            z: CMat::zeros(b.nrows(), 0),
            h: b.clone(),
            h0_norm_sq: residual_norm_of(b),
            shift_log: Vec::new(),
            residual_history: Vec::new(),
            corrections: Vec::new(),
            converged: false,
        }
    }

    pub fn from_real(b: &RMat) -> Self {
        Self::new(&linalg::to_complex(b))
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn rhs_cols(&self) -> usize {
        self.h.ncols()
    }

    /// `‖h_j‖² / ‖h_0‖²`, zero for a zero right-hand side.
    pub fn relative_residual(&self) -> f64 {
        if self.h0_norm_sq == 0.0 {
            0.0
        } else {
            residual_norm(self) / self.h0_norm_sq
        }
    }

    /// True when `Z` and `h` have no imaginary parts at all.
    pub fn is_real(&self) -> bool {
        linalg::max_imag(&self.z) == 0.0 && linalg::max_imag(&self.h) == 0.0
    }

    /// Dense `Z Zᴴ`.
    pub fn gramian(&self) -> CMat {
        linalg::gram(&self.z, self.dim())
    }

    /// `Σ_i K_i · defect_i · K_iᴴ` over the recorded steps.
    pub fn correction_term(&self) -> CMat {
        let n = self.dim();
        let m = self.rhs_cols();
        let mut acc = CMat::zeros(n, n);
        for c in &self.corrections {
            let s = c.defect.nrows();
            for i in 0..s {
                let ki = c.k.columns(i * m, m);
                for l in 0..s {
                    let d = c.defect[(i, l)];
                    if d == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let kl = c.k.columns(l * m, m);
                    acc += (ki * kl.adjoint()).map(|x| x * d);
                }
            }
        }
        acc
    }

    fn record(&mut self, entry: StepRecord) {
        self.step_index += 1;
        self.shift_log.push(entry);
        self.residual_history.push(residual_norm(self));
    }
}

fn residual_norm_of(h: &CMat) -> f64 {
    let s = linalg::spectral_norm(h);
    s * s
}

/// `‖h_j h_jᴴ‖₂ = ‖h_j‖₂²`, without forming an `n × n` matrix.
pub fn residual_norm(state: &GramianState) -> f64 {
    residual_norm_of(&state.h)
}

/// `‖A Z Zᴴ + Z Zᴴ Aᵀ + B Bᵀ − h hᴴ‖_F`, formed densely.
pub fn residual_defect(op: &dyn Operator, z: &CMat, h: &CMat, b: &CMat) -> f64 {
    frobenius_residual(op, z, h, b, None)
}

/// Same as [`residual_defect`] with an extra term subtracted: the correction of a
/// non-conforming schedule.
pub fn residual_defect_with_correction(op: &dyn Operator, state: &GramianState, b: &CMat) -> f64 {
    frobenius_residual(op, &state.z, &state.h, b, Some(&state.correction_term()))
}

fn frobenius_residual(op: &dyn Operator, z: &CMat, h: &CMat, b: &CMat, extra: Option<&CMat>) -> f64 {
    let n = op.dim();
    let mut r = b * b.adjoint() - h * h.adjoint();
    if z.ncols() > 0 {
        let az = op.apply(z);
        // Z Zᴴ Aᵀ = Z (A Z)ᴴ for real A.
        let t = &az * z.adjoint();
        r += &t + t.adjoint();
    }
    if let Some(c) = extra {
        r -= c;
    }
    debug_assert_eq!(r.nrows(), n);
    linalg::frobenius(&r)
}

fn check_dims(op: &dyn Operator, state: &GramianState) -> Result<(), LyapunovError> {
    if state.dim() != op.dim() {
        return Err(LyapunovError::DimensionMismatch { expected: op.dim(), found: state.dim() });
    }
    Ok(())
}

/// One step with the one-stage tableau `Λ = μ`, `β = 2 Re μ`.
///
/// Equivalent to one ADI step with `α = −1/μ` at the level of `Z Zᴴ`.
pub fn step_one_stage(op: &dyn Operator, state: &mut GramianState, mu: C64) -> Result<(), LyapunovError> {
    check_dims(op, state)?;
    if !(mu.re > 0.0) {
        return Err(LyapunovError::NonPositiveRealPart(mu));
    }
    let step = state.step_index + 1;
    let ah = op.apply(&state.h);
    let k = op.shifted_solve(mu, &ah).map_err(|source| LyapunovError::StageSolveFailed { step, source })?;
    if linalg::frobenius(&k) == 0.0 {
        state.converged = true;
        return Ok(());
    }
    let stage = &state.h + k.map(|x| x * mu);
    let w = 2.0 * mu.re;
    state.z = linalg::hcat(&state.z, &stage.map(|x| x * w.sqrt()));
    state.h += k.map(|x| x * w);
    state.record(StepRecord::OneStage(mu));
    debug!("step {step}: mu = {mu}, |h|^2 = {:.3e}", state.residual_history[step - 1]);
    Ok(())
}

/// One step with a lower-triangular tableau of step size `omega`.
///
/// Unless `diagnostic` is set, the tableau must have `β > 0` and satisfy the
/// residual-preservation condition within `defect_tol` (relative).
pub fn step_tableau(
    op: &dyn Operator,
    state: &mut GramianState,
    tableau: &ButcherTableau,
    omega: f64,
    defect_tol: f64,
    diagnostic: bool,
) -> Result<(), LyapunovError> {
    check_dims(op, state)?;
    let step = state.step_index + 1;
    let reject = |reason: String| LyapunovError::TableauRejected { step, reason };
    if !(omega > 0.0) {
        return Err(reject(format!("step size {omega} is not positive")));
    }
    if !tableau.is_lower_triangular() {
        return Err(reject("Λ is not lower triangular; coupled stage systems are not supported".into()));
    }
    let beta = tableau.positive_real_beta().ok_or_else(|| reject("β must be real and strictly positive".into()))?;
    if !diagnostic && !tableau::satisfies_residual_condition(tableau, defect_tol) {
        let d = tableau::check_residual_condition(tableau).frobenius_norm;
        return Err(reject(format!("residual-preservation defect {d:.3e} exceeds tolerance")));
    }

    let t = tableau.scaled(omega);
    let s = t.stages();
    let (n, m) = (state.dim(), state.rhs_cols());
    let lam = t.lambda();
    let mut k_all = CMat::zeros(n, s * m);
    let mut stages = CMat::zeros(n, s * m);
    for i in 0..s {
        let mut r = state.h.clone();
        for l in 0..i {
            let c = lam[(i, l)];
            if c != C64::new(0.0, 0.0) {
                r += k_all.columns(l * m, m).map(|x| x * c);
            }
        }
        let rhs = op.apply(&r);
        let ki =
            op.shifted_solve(lam[(i, i)], &rhs).map_err(|source| LyapunovError::StageSolveFailed { step, source })?;
        let hi = &r + ki.map(|x| x * lam[(i, i)]);
        k_all.columns_mut(i * m, m).copy_from(&ki);
        stages.columns_mut(i * m, m).copy_from(&hi);
    }
    if linalg::frobenius(&k_all) == 0.0 {
        state.converged = true;
        return Ok(());
    }
    for (i, b) in beta.iter().enumerate() {
        let w = omega * b;
        stages.columns_mut(i * m, m).iter_mut().for_each(|x| *x *= w.sqrt());
        state.h += k_all.columns(i * m, m).map(|x| x * w);
    }
    state.z = linalg::hcat(&state.z, &stages);
    if diagnostic {
        state.corrections.push(CorrectionTerm { k: k_all, defect: tableau::check_residual_condition(&t).defect });
    }
    state.record(StepRecord::Tableau { omega, spectrum: tableau.spectrum() });
    Ok(())
}

/// Realified double step for the conjugate pair `{μ, conj μ}`.
///
/// One complex solve `(I − μA)(v₁ + i v₂) = h` replaces two complex one-stage steps;
/// the appended columns `√(2 Re μ) [v₁, v₂] L` and the new `h` are real.
pub fn step_real_double(op: &dyn Operator, state: &mut GramianState, mu: C64) -> Result<(), LyapunovError> {
    check_dims(op, state)?;
    if mu.im == 0.0 {
        return Err(LyapunovError::RealShiftNotPairable(mu));
    }
    if !(mu.re > 0.0) {
        return Err(LyapunovError::NonPositiveRealPart(mu));
    }
    if linalg::max_imag(&state.h) != 0.0 {
        return Err(LyapunovError::ComplexState);
    }
    let step = state.step_index + 1;
    let pair = tableau::real_pair_transform(mu).expect("validated shift");
    let v = op.shifted_solve(mu, &state.h).map_err(|source| LyapunovError::StageSolveFailed { step, source })?;
    let (v1, v2) = (linalg::real_part(&v), linalg::imag_part(&v));
    let l = &pair.l_factor;
    let scale = (2.0 * mu.re).sqrt();
    let col1 = (&v1 * l[(0, 0)] + &v2 * l[(1, 0)]) * scale;
    let col2 = &v2 * (l[(1, 1)] * scale);
    let m = state.rhs_cols();
    let mut block = RMat::zeros(state.dim(), 2 * m);
    block.columns_mut(0, m).copy_from(&col1);
    block.columns_mut(m, m).copy_from(&col2);
    // K = A v = (v − h) / μ for the first member of the pair.
    let k = (&v - &state.h).map(|x| x / mu);
    let z = mu.re / mu.im;
    let h_next = linalg::real_part(&state.h) + (linalg::real_part(&k) + linalg::imag_part(&k) * z) * (4.0 * mu.re);
    state.z = linalg::hcat(&state.z, &linalg::to_complex(&block));
    state.h = linalg::to_complex(&h_next);
    state.record(StepRecord::RealPair(mu));
    Ok(())
}

fn check_rhs(op: &dyn Operator, b: &CMat) -> Result<(), LyapunovError> {
    if b.nrows() != op.dim() {
        return Err(LyapunovError::DimensionMismatch { expected: op.dim(), found: b.nrows() });
    }
    Ok(())
}

fn finish(state: GramianState, cfg: &SolverConfig) -> Result<GramianState, LyapunovError> {
    if state.converged || state.relative_residual() <= cfg.tol {
        Ok(GramianState { converged: true, ..state })
    } else {
        Err(LyapunovError::NotConverged(Box::new(state)))
    }
}

/// Runs a schedule of tableaus (one per step) until the relative residual drops
/// below `cfg.tol`, the schedule ends, or `cfg.max_steps` steps were taken.
pub fn solve_lyapunov_sstage(
    op: &dyn Operator,
    b: &CMat,
    schedule: &[ButcherTableau],
    cfg: &SolverConfig,
) -> Result<GramianState, LyapunovError> {
    cfg.validate()?;
    check_rhs(op, b)?;
    let mut state = GramianState::new(b);
    for (j, t) in schedule.iter().take(cfg.max_steps).enumerate() {
        if state.converged || state.relative_residual() <= cfg.tol {
            break;
        }
        step_tableau(op, &mut state, t, cfg.step_size(j), cfg.defect_check_tol, cfg.diagnostic)?;
    }
    finish(state, cfg)
}

/// Checks that conjugate pairs are adjacent and returns the step plan: `(shift, paired)`.
pub fn pair_plan(shifts: &[C64]) -> Result<Vec<(C64, bool)>, LyapunovError> {
    let mut plan = Vec::with_capacity(shifts.len());
    let mut i = 0;
    while i < shifts.len() {
        let mu = shifts[i];
        if mu.im == 0.0 {
            plan.push((mu, false));
            i += 1;
            continue;
        }
        match shifts.get(i + 1) {
            Some(next) if *next == mu.conj() => {
                plan.push((mu, true));
                i += 2;
            }
            _ => return Err(LyapunovError::ImproperShiftSet { index: i, shift: mu }),
        }
    }
    Ok(plan)
}

/// One-stage iteration over a shift sequence (the ADI-equivalent method).
///
/// With `cfg.realify`, the shifts must form a proper set with conjugates adjacent; each
/// pair is processed by [`step_real_double`] and the result stays real for real `B`.
pub fn solve_lyapunov_shifts(
    op: &dyn Operator,
    b: &CMat,
    shifts: &[C64],
    cfg: &SolverConfig,
) -> Result<GramianState, LyapunovError> {
    cfg.validate()?;
    check_rhs(op, b)?;
    if let Some(mu) = shifts.iter().find(|m| !(m.re > 0.0)) {
        return Err(LyapunovError::NonPositiveRealPart(*mu));
    }
    let plan = if cfg.realify { pair_plan(shifts)? } else { shifts.iter().map(|m| (*m, false)).collect() };
    let mut state = GramianState::new(b);
    for (mu, paired) in plan.into_iter().take(cfg.max_steps) {
        if state.converged || state.relative_residual() <= cfg.tol {
            break;
        }
        if paired {
            step_real_double(op, &mut state, mu)?;
        } else {
            step_one_stage(op, &mut state, mu)?;
        }
    }
    finish(state, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, real_column};
    use crate::operator::DenseOperator;
    use crate::problems;
    use crate::tableau::make_one_stage;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn r(x: f64) -> C64 {
        c(x, 0.0)
    }

    fn scalar_op(a: f64) -> DenseOperator {
        DenseOperator::new(RMat::from_element(1, 1, a)).unwrap()
    }

    #[test]
    fn scalar_hand_recurrence() {
        // K = −√2/2, ℋ = √2/2, Z = 1, h₁ = 0.
        let op = scalar_op(-1.0);
        let b = real_column(&[2f64.sqrt()]);
        let mut st = GramianState::new(&b);
        step_one_stage(&op, &mut st, r(1.0)).unwrap();
        assert!((st.z[(0, 0)] - r(1.0)).norm() < 1e-15);
        assert!(st.h[(0, 0)].norm() < 1e-15);
        assert_eq!(st.residual_history.len(), 1);
    }

    #[test]
    fn scalar_via_sstage_solver() {
        let op = scalar_op(-1.0);
        let b = real_column(&[2f64.sqrt()]);
        let st = solve_lyapunov_sstage(&op, &b, &[make_one_stage(r(1.0))], &SolverConfig::default()).unwrap();
        assert!(st.converged);
        assert!((st.gramian()[(0, 0)] - r(1.0)).norm() < 1e-15);
    }

    #[test]
    fn diagonal_exact_shifts_terminate() {
        let op = DenseOperator::new(RMat::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, -2.0]))).unwrap();
        let b = real_column(&[1.0, 1.0]);
        let sched = [make_one_stage(r(1.0)), make_one_stage(r(0.5))];
        let st = solve_lyapunov_sstage(&op, &b, &sched, &SolverConfig { tol: 1e-30, ..Default::default() }).unwrap();
        assert!(st.h.norm() < 1e-15);
        let p = st.gramian();
        let want = [[0.5, 1.0 / 3.0], [1.0 / 3.0, 0.25]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((p[(i, j)] - r(want[i][j])).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn empty_schedule_is_not_converged() {
        let op = scalar_op(-3.0);
        let b = real_column(&[2.0]);
        let err = solve_lyapunov_sstage(&op, &b, &[], &SolverConfig::default()).unwrap_err();
        let st = err.into_partial().unwrap();
        assert_eq!(st.z.ncols(), 0);
        assert_eq!(st.h, b);
        assert_eq!(residual_norm(&st), 4.0);
        assert_eq!(residual_defect(&op, &st.z, &st.h, &b), 0.0);
    }

    #[test]
    fn residual_norm_values() {
        let mut st = GramianState::new(&real_column(&[3.0, 4.0]));
        assert_eq!(residual_norm(&st), 25.0);
        st.h = CMat::zeros(2, 1);
        assert_eq!(residual_norm(&st), 0.0);
    }

    #[test]
    fn real_shift_keeps_real_iterates() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let op = DenseOperator::new(problems::random_stable(7, &mut rng)).unwrap();
        let mut st = GramianState::from_real(&problems::random_real(7, 2, &mut rng));
        step_one_stage(&op, &mut st, r(0.8)).unwrap();
        assert!(st.is_real());
        assert_eq!(st.z.ncols(), 2);
    }

    #[test]
    fn rejects_non_conforming_and_coupled_tableaus() {
        let op = scalar_op(-1.0);
        let b = real_column(&[1.0]);
        let be = ButcherTableau::from_parts(CMat::from_element(1, 1, r(1.0)), vec![r(1.0)]).unwrap();
        let err = solve_lyapunov_sstage(&op, &b, std::slice::from_ref(&be), &SolverConfig::default()).unwrap_err();
        assert!(matches!(err, LyapunovError::TableauRejected { step: 1, .. }));
        let diag = SolverConfig { diagnostic: true, ..Default::default() };
        assert!(matches!(solve_lyapunov_sstage(&op, &b, &[be], &diag), Err(LyapunovError::NotConverged(_))));
        let gl2 = tableau::gauss_legendre(2).unwrap();
        let err = solve_lyapunov_sstage(&op, &b, &[gl2], &SolverConfig::default()).unwrap_err();
        assert!(matches!(err, LyapunovError::TableauRejected { .. }));
        let cplx = ButcherTableau::from_parts(CMat::from_element(1, 1, c(1.0, 1.0)), vec![c(2.0, 0.1)]).unwrap();
        assert!(matches!(solve_lyapunov_sstage(&op, &b, &[cplx], &diag), Err(LyapunovError::TableauRejected { .. })));
    }

    #[test]
    fn improper_realify_set_names_the_shift() {
        let op = scalar_op(-1.0);
        let b = real_column(&[1.0]);
        let cfg = SolverConfig { realify: true, ..Default::default() };
        let err = solve_lyapunov_shifts(&op, &b, &[r(1.0), c(1.0, 2.0), r(3.0)], &cfg).unwrap_err();
        match err {
            LyapunovError::ImproperShiftSet { index, shift } => {
                assert_eq!(index, 1);
                assert_eq!(shift, c(1.0, 2.0));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(pair_plan(&[c(1.0, 2.0), c(1.0, -2.0), r(2.0)]).is_ok());
    }

    #[test]
    fn real_double_rejects_real_shift() {
        let op = scalar_op(-1.0);
        let mut st = GramianState::new(&real_column(&[1.0]));
        assert!(matches!(step_real_double(&op, &mut st, r(1.0)), Err(LyapunovError::RealShiftNotPairable(_))));
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig { tol: 0.0, ..Default::default() }.validate().is_err());
        assert!(SolverConfig { step_sizes: vec![1.0, -1.0], ..Default::default() }.validate().is_err());
        assert!(SolverConfig::default().validate().is_ok());
    }

    #[test]
    fn column_growth_per_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let op = DenseOperator::new(problems::random_stable(8, &mut rng)).unwrap();
        let b = linalg::to_complex(&problems::random_real(8, 2, &mut rng));
        let dirk = tableau::make_dirk_lyapunov(&[c(1.0, 1.0), r(0.5), c(0.2, -3.0)]).unwrap();
        let sched = vec![make_one_stage(r(1.0)), dirk];
        let cfg = SolverConfig { tol: 1e-300, ..Default::default() };
        let st = solve_lyapunov_sstage(&op, &b, &sched, &cfg).unwrap_err().into_partial().unwrap();
        assert_eq!(st.z.ncols(), 2 * (1 + 3));
        assert_eq!(st.residual_history.len(), 2);
        let scale = op.frobenius_norm() * linalg::frobenius(&st.gramian()) + b.norm_squared();
        assert!(residual_defect(&op, &st.z, &st.h, &b) <= 1e-10 * scale);
    }
}

//! Residual-based low-rank ADI iteration.
//!
//! `V = (A + αI)⁻¹ W`, `W ← W − 2 Re(α) V`, `Z ← [Z, √(−2 Re α) V]` with `α ∈ ℂ₋`.
//! The residual satisfies `A Z Zᴴ + Z Zᴴ Aᵀ + B Bᵀ = W Wᴴ`. With `α = −1/μ` the
//! products `Z Zᴴ` coincide with those of the one-stage Runge-Kutta iteration.

use thiserror::Error;

use crate::linalg::{self, CMat, RMat, C64};
use crate::lyapunov::SolverConfig;
use crate::operator::{Operator, OperatorError};

#[derive(Debug, Error)]
pub enum AdiError {
    #[error("step {step}: shifted solve failed: {source}")]
    StageSolveFailed {
        step: usize,
        #[source]
        source: OperatorError,
    },
    #[error("ADI shift {0} must have negative real part")]
    NonNegativeRealPart(C64),
    #[error("shift {0} is real and cannot form a conjugate pair")]
    RealShiftNotPairable(C64),
    #[error("shift set is not proper: {shift} at position {index} has no adjacent conjugate")]
    ImproperShiftSet { index: usize, shift: C64 },
    #[error("realified step needs a real residual factor")]
    ComplexState,
    #[error("dimension mismatch: operator is {expected}x{expected}, right-hand side has {found} rows")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("not converged after {} steps", .0.shift_log.len())]
    NotConverged(Box<AdiState>),
}

#[derive(Debug, Clone)]
pub struct AdiState {
    pub w: CMat,
    pub z: CMat,
    /// One entry per accepted step; a realified double step logs `α` once.
    pub shift_log: Vec<C64>,
    pub residual_history: Vec<f64>,
    pub w0_norm_sq: f64,
}

fn sq_norm(w: &CMat) -> f64 {
    let s = linalg::spectral_norm(w);
    s * s
}

impl AdiState {
    pub fn new(b: &CMat) -> Self {
        Self {
            w: b.clone(),
            z: CMat::zeros(b.nrows(), 0),
            shift_log: Vec::new(),
            residual_history: Vec::new(),
            w0_norm_sq: sq_norm(b),
        }
    }

    pub fn from_real(b: &RMat) -> Self {
        Self::new(&linalg::to_complex(b))
    }

    pub fn gramian(&self) -> CMat {
        linalg::gram(&self.z, self.w.nrows())
    }

    /// `‖W‖₂² / ‖W₀‖₂²`.
    pub fn relative_residual(&self) -> f64 {
        if self.w0_norm_sq == 0.0 {
            0.0
        } else {
            sq_norm(&self.w) / self.w0_norm_sq
        }
    }

    fn record(&mut self, alpha: C64) {
        self.shift_log.push(alpha);
        self.residual_history.push(sq_norm(&self.w));
    }
}

fn check(op: &dyn Operator, state: &AdiState, alpha: C64) -> Result<(), AdiError> {
    if state.w.nrows() != op.dim() {
        return Err(AdiError::DimensionMismatch { expected: op.dim(), found: state.w.nrows() });
    }
    if !(alpha.re < 0.0) {
        return Err(AdiError::NonNegativeRealPart(alpha));
    }
    Ok(())
}

pub fn adi_step(op: &dyn Operator, state: &mut AdiState, alpha: C64) -> Result<(), AdiError> {
    check(op, state, alpha)?;
    let step = state.shift_log.len() + 1;
    let v = op.pencil_solve(alpha, &state.w).map_err(|source| AdiError::StageSolveFailed { step, source })?;
    state.w -= v.map(|x| x * (2.0 * alpha.re));
    state.z = linalg::hcat(&state.z, &v.map(|x| x * (-2.0 * alpha.re).sqrt()));
    state.record(alpha);
    Ok(())
}

/// Both members of `{α, conj α}` in real arithmetic; appends `2m` real columns.
pub fn adi_real_double_step(op: &dyn Operator, state: &mut AdiState, alpha: C64) -> Result<(), AdiError> {
    check(op, state, alpha)?;
    if alpha.im == 0.0 {
        return Err(AdiError::RealShiftNotPairable(alpha));
    }
    if linalg::max_imag(&state.w) != 0.0 {
        return Err(AdiError::ComplexState);
    }
    let step = state.shift_log.len() + 1;
    let v = op.pencil_solve(alpha, &state.w).map_err(|source| AdiError::StageSolveFailed { step, source })?;
    let (vr, vi) = (linalg::real_part(&v), linalg::imag_part(&v));
    let delta = alpha.re / alpha.im;
    let combo = &vr + &vi * delta;
    let scale = (-2.0 * alpha.re).sqrt() * 2f64.sqrt();
    let m = v.ncols();
    let mut block = RMat::zeros(v.nrows(), 2 * m);
    block.columns_mut(0, m).copy_from(&(&combo * scale));
    block.columns_mut(m, m).copy_from(&(&vi * (scale * (delta * delta + 1.0).sqrt())));
    let w = linalg::real_part(&state.w) - combo * (4.0 * alpha.re);
    state.w = linalg::to_complex(&w);
    state.z = linalg::hcat(&state.z, &linalg::to_complex(&block));
    state.record(alpha);
    Ok(())
}

/// Runs ADI over `alphas`; with `cfg.realify` conjugate pairs must be adjacent and
/// are merged into real double steps.
pub fn solve_lyapunov_adi(
    op: &dyn Operator,
    b: &CMat,
    alphas: &[C64],
    cfg: &SolverConfig,
) -> Result<AdiState, AdiError> {
    if b.nrows() != op.dim() {
        return Err(AdiError::DimensionMismatch { expected: op.dim(), found: b.nrows() });
    }
    let mut state = AdiState::new(b);
    let mut i = 0;
    let mut steps = 0;
    while i < alphas.len() && steps < cfg.max_steps {
        if state.relative_residual() <= cfg.tol {
            break;
        }
        let alpha = alphas[i];
        if cfg.realify && alpha.im != 0.0 {
            if alphas.get(i + 1) != Some(&alpha.conj()) {
                return Err(AdiError::ImproperShiftSet { index: i, shift: alpha });
            }
            adi_real_double_step(op, &mut state, alpha)?;
            i += 2;
        } else {
            adi_step(op, &mut state, alpha)?;
            i += 1;
        }
        steps += 1;
    }
    if state.relative_residual() <= cfg.tol {
        Ok(state)
    } else {
        Err(AdiError::NotConverged(Box::new(state)))
    }
}

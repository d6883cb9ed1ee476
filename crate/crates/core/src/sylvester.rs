//! One-stage low-rank iteration for `A Y − Y B = F Gᵀ`.
//!
//! The approximation is kept as `Y_j = Ẑ_j Γ_j Z̆_jᴴ` with a diagonal `Γ_j`, and the
//! residual stays factored: `A Y_j − Y_j B − F Gᵀ = ĥ_j h̆_jᴴ`. A right-hand side
//! with `r` columns uses the same shift pair for every column and adds `r` columns to
//! each factor per step; `Γ` repeats the step weight `r` times.

use thiserror::Error;

use crate::linalg::{self, CMat, RMat, C64};
use crate::lyapunov::{self, SolverConfig};
use crate::operator::{Operator, OperatorError};

#[derive(Debug, Error)]
pub enum SylvesterError {
    #[error("step {step}: {side} stage solve failed: {source}")]
    StageSolveFailed {
        step: usize,
        side: &'static str,
        #[source]
        source: OperatorError,
    },
    #[error("not converged after {} steps (relative residual {:.3e})", .0.step_index, .0.relative_residual())]
    NotConverged(Box<SylvesterState>),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Lyapunov(#[from] lyapunov::LyapunovError),
}

impl SylvesterError {
    pub fn into_partial(self) -> Result<SylvesterState, SylvesterError> {
        match self {
            SylvesterError::NotConverged(state) => Ok(*state),
            other => Err(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SylvesterShiftPair {
    pub mu_hat: C64,
    pub mu_breve: C64,
}

impl SylvesterShiftPair {
    pub fn new(mu_hat: C64, mu_breve: C64) -> Self {
        Self { mu_hat, mu_breve }
    }

    /// Step weight `μ̂ + conj μ̆`.
    pub fn weight(&self) -> C64 {
        self.mu_hat + self.mu_breve.conj()
    }

    /// Pairs that annihilate the given eigenvalues: `μ̂ = 1/conj λ_B`, `μ̆ = −1/conj λ_A`.
    pub fn exact(lambda_a: C64, lambda_b: C64) -> Self {
        Self { mu_hat: lambda_b.conj().inv(), mu_breve: -lambda_a.conj().inv() }
    }

    /// Factor applied to an eigencomponent of `A` in `ĥ`: `(1 + z conj μ̆) / (1 − z μ̂)`.
    pub fn hat_stability(&self, z: C64) -> C64 {
        let one = C64::new(1.0, 0.0);
        (one + z * self.mu_breve.conj()) / (one - z * self.mu_hat)
    }

    /// Factor applied to an eigencomponent of `Bᵀ` in `h̆`: `(1 − z conj μ̂) / (1 + z μ̆)`.
    pub fn breve_stability(&self, z: C64) -> C64 {
        let one = C64::new(1.0, 0.0);
        (one - z * self.mu_hat.conj()) / (one + z * self.mu_breve)
    }
}

/// `|∏_j R̂_j(λ)|` for every `λ`: the accumulated damping of `ĥ` along each eigenvector.
pub fn hat_stability_moduli(pairs: &[SylvesterShiftPair], eigenvalues: &[C64]) -> Vec<f64> {
    eigenvalues
        .iter()
        .map(|&z| pairs.iter().fold(C64::new(1.0, 0.0), |acc, p| acc * p.hat_stability(z)).norm())
        .collect()
}

#[derive(Debug, Clone)]
pub struct SylvesterState {
    pub step_index: usize,
    pub z_hat: CMat,
    pub z_breve: CMat,
    /// Diagonal of `Γ`.
    pub gamma: Vec<C64>,
    pub h_hat: CMat,
    pub h_breve: CMat,
    /// Spectral norm of `ĥ_j h̆_jᴴ` after each step.
    pub residual_history: Vec<f64>,
    pub rhs_norm: f64,
    pub shift_log: Vec<SylvesterShiftPair>,
}

impl SylvesterState {
    /// `ĥ₀ = F`, `h̆₀ = −G`.
    pub fn new(f: &CMat, g: &CMat) -> Self {
        let h_breve = -g;
        let mut st = Self {
            step_index: 0,
            z_hat: CMat::zeros(f.nrows(), 0),
            z_breve: CMat::zeros(g.nrows(), 0),
            gamma: Vec::new(),
            h_hat: f.clone(),
            h_breve,
            residual_history: Vec::new(),
            rhs_norm: 0.0,
            shift_log: Vec::new(),
        };
        st.rhs_norm = sylvester_residual_norm(&st);
        st
    }

    /// Dense `Ẑ Γ Z̆ᴴ`.
    pub fn solution(&self) -> CMat {
        let (n, m) = (self.z_hat.nrows(), self.z_breve.nrows());
        if self.gamma.is_empty() {
            return CMat::zeros(n, m);
        }
        let mut zg = self.z_hat.clone();
        for (k, g) in self.gamma.iter().enumerate() {
            zg.column_mut(k).iter_mut().for_each(|x| *x *= g);
        }
        zg * self.z_breve.adjoint()
    }

    pub fn relative_residual(&self) -> f64 {
        if self.rhs_norm == 0.0 {
            0.0
        } else {
            sylvester_residual_norm(self) / self.rhs_norm
        }
    }
}

/// `‖ĥ h̆ᴴ‖₂` without forming the `n × m` product.
pub fn sylvester_residual_norm(state: &SylvesterState) -> f64 {
    let (h, k) = (&state.h_hat, &state.h_breve);
    if h.ncols() <= 1 {
        return linalg::frobenius(h) * linalg::frobenius(k);
    }
    let rh = triangular_factor(h);
    let rk = triangular_factor(k);
    linalg::spectral_norm(&(rh * rk.adjoint()))
}

/// `R` with `X = Q R`, `Q` having orthonormal columns; `Xᴴ X = Rᴴ R`.
fn triangular_factor(x: &CMat) -> CMat {
    if x.nrows() >= x.ncols() {
        x.clone().qr().r()
    } else {
        x.clone()
    }
}

/// `‖A Y − Y B − F Gᵀ − ĥ h̆ᴴ‖_F` with `Y` formed densely.
pub fn sylvester_residual_defect(
    a: &dyn Operator,
    b: &dyn Operator,
    state: &SylvesterState,
    f: &CMat,
    g: &CMat,
) -> f64 {
    let y = state.solution();
    // Y B = (Bᵀ Yᵀ)ᵀ.
    let yb = b.apply_transpose(&y.transpose()).transpose();
    let r = a.apply(&y) - yb - f * g.transpose() - &state.h_hat * state.h_breve.adjoint();
    linalg::frobenius(&r)
}

/// One step with the pair `(μ̂, μ̆)`.
pub fn sylvester_step(
    a: &dyn Operator,
    b: &dyn Operator,
    state: &mut SylvesterState,
    pair: SylvesterShiftPair,
) -> Result<(), SylvesterError> {
    let step = state.step_index + 1;
    let hat = |st: &SylvesterState| {
        a.shifted_solve(pair.mu_hat, &a.apply(&st.h_hat)).map_err(|source| SylvesterError::StageSolveFailed {
            step,
            side: "A",
            source,
        })
    };
    let breve = |st: &SylvesterState| {
        let rhs = -b.apply_transpose(&st.h_breve);
        b.transpose_shifted_solve(-pair.mu_breve, &rhs).map_err(|source| SylvesterError::StageSolveFailed {
            step,
            side: "B",
            source,
        })
    };
    let (k_hat, k_breve) = solve_pair(state, hat, breve)?;

    let r = state.h_hat.ncols();
    let stage_hat = &state.h_hat + k_hat.map(|x| x * pair.mu_hat);
    let stage_breve = &state.h_breve + k_breve.map(|x| x * pair.mu_breve);
    let w = pair.weight();
    state.h_hat += k_hat.map(|x| x * w);
    state.h_breve += k_breve.map(|x| x * w.conj());
    state.z_hat = linalg::hcat(&state.z_hat, &stage_hat);
    state.z_breve = linalg::hcat(&state.z_breve, &stage_breve);
    state.gamma.extend(std::iter::repeat_n(w, r));
    state.step_index = step;
    state.shift_log.push(pair);
    state.residual_history.push(sylvester_residual_norm(state));
    Ok(())
}

type StageResult = Result<CMat, SylvesterError>;

/// Both stage solves; on native targets large problems run them on two threads.
fn solve_pair(
    state: &SylvesterState,
    hat: impl Fn(&SylvesterState) -> StageResult + Send + Sync,
    breve: impl Fn(&SylvesterState) -> StageResult + Send + Sync,
) -> Result<(CMat, CMat), SylvesterError> {
    #[cfg(not(target_arch = "wasm32"))]
    if state.h_hat.nrows() + state.h_breve.nrows() >= 512 {
        return std::thread::scope(|s| {
            let other = s.spawn(|| breve(state));
            let kh = hat(state)?;
            let kb = other.join().expect("stage solve panicked")?;
            Ok((kh, kb))
        });
    }
    Ok((hat(state)?, breve(state)?))
}

/// Runs the shift pairs until `‖ĥ h̆ᴴ‖₂ / ‖F Gᵀ‖₂ ≤ cfg.tol` or the list ends.
pub fn solve_sylvester(
    a: &dyn Operator,
    b: &dyn Operator,
    f: &CMat,
    g: &CMat,
    shifts: &[SylvesterShiftPair],
    cfg: &SolverConfig,
) -> Result<SylvesterState, SylvesterError> {
    cfg.validate()?;
    if f.nrows() != a.dim() || g.nrows() != b.dim() || f.ncols() != g.ncols() {
        return Err(SylvesterError::DimensionMismatch(format!(
            "A is {0}x{0}, B is {1}x{1}, F is {2}x{3}, G is {4}x{5}",
            a.dim(),
            b.dim(),
            f.nrows(),
            f.ncols(),
            g.nrows(),
            g.ncols()
        )));
    }
    let mut state = SylvesterState::new(f, g);
    for pair in shifts.iter().take(cfg.max_steps) {
        if state.relative_residual() <= cfg.tol {
            break;
        }
        sylvester_step(a, b, &mut state, *pair)?;
    }
    if state.relative_residual() <= cfg.tol {
        Ok(state)
    } else {
        Err(SylvesterError::NotConverged(Box::new(state)))
    }
}

/// `−Aᵀ` as an operator, sharing the factorizations of `A`.
pub struct NegTranspose<'a>(pub &'a dyn Operator);

impl Operator for NegTranspose<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn apply(&self, x: &CMat) -> CMat {
        -self.0.apply_transpose(x)
    }

    fn apply_transpose(&self, x: &CMat) -> CMat {
        -self.0.apply(x)
    }

    fn solve_combination(&self, sigma: C64, tau: C64, transpose: bool, rhs: &CMat) -> Result<CMat, OperatorError> {
        self.0.solve_combination(sigma, -tau, !transpose, rhs)
    }

    fn frobenius_norm(&self) -> f64 {
        self.0.frobenius_norm()
    }

    fn to_dense(&self) -> Option<RMat> {
        self.0.to_dense().map(|a| -a.transpose())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionReport {
    /// Largest `|Im Γ_j|`.
    pub gamma_max_imag: f64,
    /// `‖Ẑ Γ Z̆ᴴ − Z Zᴴ‖_F / ‖Z Zᴴ‖_F` against the one-stage Lyapunov iteration.
    pub relative_deviation: f64,
    pub steps: usize,
}

/// Solves `A P + P Aᵀ + b bᵀ = 0` twice: as a Sylvester equation with `B = −Aᵀ`,
/// `F = −b`, `G = b`, `μ̂ = μ̆ = μ`, and with the one-stage Lyapunov iteration.
pub fn lyapunov_reduction_check(a: &dyn Operator, b: &CMat, shifts: &[C64]) -> Result<ReductionReport, SylvesterError> {
    let cfg = SolverConfig { tol: f64::MIN_POSITIVE, max_steps: shifts.len().max(1), ..Default::default() };
    let neg = NegTranspose(a);
    let pairs: Vec<_> = shifts.iter().map(|&mu| SylvesterShiftPair::new(mu, mu)).collect();
    let syl = match solve_sylvester(a, &neg, &-b, b, &pairs, &cfg) {
        Ok(s) => s,
        Err(e) => e.into_partial()?,
    };
    let lyap = match lyapunov::solve_lyapunov_shifts(a, b, shifts, &cfg) {
        Ok(s) => s,
        Err(e) => e.into_partial()?,
    };
    let p = lyap.gramian();
    let dev = linalg::frobenius(&(syl.solution() - &p));
    let scale = linalg::frobenius(&p);
    Ok(ReductionReport {
        gamma_max_imag: syl.gamma.iter().fold(0.0_f64, |m, g| m.max(g.im.abs())),
        relative_deviation: if scale > 0.0 { dev / scale } else { dev },
        steps: syl.step_index,
    })
}

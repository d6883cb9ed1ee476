//! Dense reference computations for verification at small scale.
//!
//! Everything here forms Kronecker-sized systems or full eigendecompositions and is
//! only meant for matrices with a few dozen rows.

use thiserror::Error;

use crate::linalg::{self, CMat, RMat, C64};
use crate::tableau::{self, ButcherTableau};

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("Kronecker system is singular (spectra overlap)")]
    SingularKroneckerSystem,
    #[error("coupled stage system is singular")]
    SingularStageSystem,
    #[error("eigenvector basis is ill-conditioned (cond = {0:.3e})")]
    IllConditionedEigenbasis(f64),
    #[error("integration diverged at step {step}; reduce the step size")]
    StepSizeTooLarge { step: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

#[derive(Debug, Clone)]
pub struct DenseSolution {
    pub matrix: CMat,
    /// Frobenius norm of the defect of the defining equation.
    pub residual: f64,
}

/// `K` and `ℋ` of one Runge-Kutta step, stage `i` in column block `i`.
#[derive(Debug, Clone)]
pub struct StageWorkspace {
    pub k: CMat,
    pub h: CMat,
}

/// Column-stacking `vec`.
pub fn vec(x: &CMat) -> CMat {
    CMat::from_column_slice(x.len(), 1, x.as_slice())
}

/// Inverse of [`vec`] for an `rows × cols` matrix.
pub fn unvec(v: &CMat, rows: usize, cols: usize) -> CMat {
    CMat::from_column_slice(rows, cols, v.as_slice())
}

pub fn kron(x: &CMat, y: &CMat) -> CMat {
    x.kronecker(y)
}

/// Perfect shuffle for factors of size `r` and `p`: row `k` of `P M` is row `perm[k]`
/// of `M`, and `P (X ⊗ Y) Pᵀ = Y ⊗ X` for `X` of order `r`, `Y` of order `p`.
pub fn perfect_shuffle(r: usize, p: usize) -> Vec<usize> {
    let mut perm = Vec::with_capacity(r * p);
    for iy in 0..p {
        for ix in 0..r {
            perm.push(ix * p + iy);
        }
    }
    perm
}

pub fn permutation_matrix(perm: &[usize]) -> RMat {
    let n = perm.len();
    let mut m = RMat::zeros(n, n);
    for (k, &j) in perm.iter().enumerate() {
        m[(k, j)] = 1.0;
    }
    m
}

/// LU solve that refuses numerically singular systems.
fn guarded_solve(m: CMat, rhs: &CMat) -> Option<CMat> {
    let n = m.nrows();
    let lu = m.lu();
    let u = lu.u();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    for i in 0..n {
        lo = lo.min(u[(i, i)].norm());
        hi = hi.max(u[(i, i)].norm());
    }
    if n > 0 && !(lo > hi * f64::EPSILON * 16.0 * n as f64) {
        return None;
    }
    lu.solve(rhs)
}

/// Solves `A P + P Aᵀ + B Bᵀ = 0` through `(I ⊗ A + A ⊗ I) vec P = −vec(B Bᵀ)`.
pub fn dense_lyapunov(a: &RMat, b: &RMat) -> Result<DenseSolution, OracleError> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(OracleError::DimensionMismatch(format!("A {:?}, B {:?}", a.shape(), b.shape())));
    }
    let ac = linalg::to_complex(a);
    let id = CMat::identity(n, n);
    let sys = kron(&id, &ac) + kron(&ac, &id);
    let bb = linalg::to_complex(&(b * b.transpose()));
    let x = guarded_solve(sys, &-vec(&bb)).ok_or(OracleError::SingularKroneckerSystem)?;
    let p = unvec(&x, n, n);
    let p = (&p + p.transpose()).map(|z| z * 0.5);
    let residual = linalg::frobenius(&(&ac * &p + &p * ac.transpose() + bb));
    Ok(DenseSolution { matrix: p, residual })
}

/// Solves `A Y − Y B = F Gᵀ` through `(I ⊗ A − Bᵀ ⊗ I) vec Y = vec(F Gᵀ)`.
pub fn dense_sylvester(a: &CMat, b: &CMat, f: &CMat, g: &CMat) -> Result<DenseSolution, OracleError> {
    let (n, m) = (a.nrows(), b.nrows());
    if a.ncols() != n || b.ncols() != m || f.nrows() != n || g.nrows() != m || f.ncols() != g.ncols() {
        return Err(OracleError::DimensionMismatch(format!(
            "A {:?}, B {:?}, F {:?}, G {:?}",
            a.shape(),
            b.shape(),
            f.shape(),
            g.shape()
        )));
    }
    let sys = kron(&CMat::identity(m, m), a) - kron(&b.transpose(), &CMat::identity(n, n));
    let fg = f * g.transpose();
    let x = guarded_solve(sys, &vec(&fg)).ok_or(OracleError::SingularKroneckerSystem)?;
    let y = unvec(&x, n, m);
    let residual = linalg::frobenius(&(a * &y - &y * b - fg));
    Ok(DenseSolution { matrix: y, residual })
}

/// Solves the full coupled stage system `(I − ω(Λ ⊗ A)) vec K = 𝟙 ⊗ (A h)` and returns
/// `K` with `ℋ = [h, …, h] + ω K Λᵀ`.
pub fn coupled_stage_solve(
    a: &RMat,
    h: &CMat,
    tableau: &ButcherTableau,
    omega: f64,
) -> Result<StageWorkspace, OracleError> {
    let n = a.nrows();
    if h.nrows() != n || h.ncols() != 1 {
        return Err(OracleError::DimensionMismatch(format!("A {:?}, h {:?}", a.shape(), h.shape())));
    }
    let s = tableau.stages();
    let ac = linalg::to_complex(a);
    let lam = tableau.lambda().map(|x| x * omega);
    let sys = CMat::identity(n * s, n * s) - kron(&lam, &ac);
    let ah = &ac * h;
    let mut rhs = CMat::zeros(n * s, 1);
    for i in 0..s {
        rhs.view_mut((i * n, 0), (n, 1)).copy_from(&ah);
    }
    let x = guarded_solve(sys, &rhs).ok_or(OracleError::SingularStageSystem)?;
    let k = unvec(&x, n, s);
    let mut hs = CMat::zeros(n, s);
    for i in 0..s {
        hs.set_column(i, &h.column(0));
    }
    hs += &k * lam.transpose();
    Ok(StageWorkspace { k, h: hs })
}

/// Largest eigenvector condition number accepted by [`multiplicative_update_matrix`].
pub const EIGENBASIS_COND_LIMIT: f64 = 1e8;

/// `M = V diag(R(λ_i)) V⁻¹` with `R` the stability function of `tableau`, so that one
/// step maps `h ↦ M h`.
pub fn multiplicative_update_matrix(a: &RMat, tableau: &ButcherTableau) -> Result<CMat, OracleError> {
    let (vals, v) = linalg::eig(&linalg::to_complex(a));
    let cond = linalg::cond_2(&v);
    if !(cond <= EIGENBASIS_COND_LIMIT) {
        return Err(OracleError::IllConditionedEigenbasis(cond));
    }
    let r = vals
        .iter()
        .map(|&l| tableau::stability_function(tableau, l).map_err(|_| OracleError::SingularStageSystem))
        .collect::<Result<Vec<C64>, _>>()?;
    let v_inv = v.clone().try_inverse().ok_or(OracleError::IllConditionedEigenbasis(f64::INFINITY))?;
    let mut vd = v;
    for (k, rk) in r.iter().enumerate() {
        vd.column_mut(k).iter_mut().for_each(|x| *x *= rk);
    }
    Ok(vd * v_inv)
}

/// Kronecker form of the update: `M = I + (βᵀ ⊗ I)(I − Λ ⊗ A)⁻¹(𝟙 ⊗ A)`.
pub fn multiplicative_update_kron(a: &RMat, tableau: &ButcherTableau) -> Result<CMat, OracleError> {
    let n = a.nrows();
    let s = tableau.stages();
    let ac = linalg::to_complex(a);
    let sys = CMat::identity(n * s, n * s) - kron(tableau.lambda(), &ac);
    let ones = CMat::from_element(s, 1, C64::new(1.0, 0.0));
    let x = guarded_solve(sys, &kron(&ones, &ac)).ok_or(OracleError::SingularStageSystem)?;
    let beta = CMat::from_row_slice(1, s, tableau.beta());
    Ok(CMat::identity(n, n) + kron(&beta, &CMat::identity(n, n)) * x)
}

/// Classical fourth-order integration of `P' = h hᵀ`, `h' = A h` from `P = 0`, `h = b`.
pub fn integrate_gramian(a: &RMat, b: &RMat, t_end: f64, steps: usize) -> Result<(RMat, RMat), OracleError> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(OracleError::DimensionMismatch(format!("A {:?}, b {:?}", a.shape(), b.shape())));
    }
    let mut p = RMat::zeros(n, n);
    let mut h = b.clone();
    if t_end == 0.0 || steps == 0 {
        return Ok((p, h));
    }
    let dt = t_end / steps as f64;
    let limit = 1e6 * linalg::frobenius_real(b).max(f64::MIN_POSITIVE);
    let rhs = |h: &RMat| (h * h.transpose(), a * h);
    for step in 1..=steps {
        let (p1, h1) = rhs(&h);
        let (p2, h2) = rhs(&(&h + &h1 * (dt / 2.0)));
        let (p3, h3) = rhs(&(&h + &h2 * (dt / 2.0)));
        let (p4, h4) = rhs(&(&h + &h3 * dt));
        p += (p1 + p2 * 2.0 + p3 * 2.0 + p4) * (dt / 6.0);
        h += (h1 + h2 * 2.0 + h3 * 2.0 + h4) * (dt / 6.0);
        let hn = linalg::frobenius_real(&h);
        if !hn.is_finite() || hn > limit {
            return Err(OracleError::StepSizeTooLarge { step });
        }
    }
    Ok((p, h))
}

//! Butcher tableaus and the algebra the solvers need from them.
//!
//! A tableau `(Λ, β, γ)` preserves the rank-one Lyapunov residual exactly when
//!
//! ```text
//! diag(β) conj(Λ) + Λᵀ diag(β) − β βᵀ = 0.
//! ```
//!
//! [`check_residual_condition`] returns the left-hand side as a matrix so callers can
//! quantify the correction term a non-conforming tableau introduces. The abscissae
//! `γ` are carried along for completeness; the Gramian system is autonomous so they
//! never enter a computation.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::linalg::{self, frobenius, CMat, RMat, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TableauError {
    #[error("shift {index} = {value} has non-positive real part")]
    NonPositiveRealPart { index: usize, value: C64 },
    #[error("Gauss-Legendre tableaus are available for s = 1 and s = 2, not s = {0}")]
    UnsupportedStageCount(usize),
    #[error("I - zΛ is singular at z = {0}")]
    SingularStabilityDenominator(C64),
    #[error("shift {0} is real and cannot form a conjugate pair")]
    RealShiftNotPairable(C64),
    #[error("inconsistent tableau dimensions: {0}")]
    DimensionMismatch(String),
    #[error("tableau text, line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Butcher tableau with complex `Λ` and `β`, real `γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau {
    lambda: CMat,
    beta: Vec<C64>,
    gamma: Vec<f64>,
}

impl ButcherTableau {
    pub fn new(lambda: CMat, beta: Vec<C64>, gamma: Vec<f64>) -> Result<Self, TableauError> {
        let s = lambda.nrows();
        if s == 0 || lambda.ncols() != s {
            return Err(TableauError::DimensionMismatch(format!("Λ is {}x{}", lambda.nrows(), lambda.ncols())));
        }
        if beta.len() != s || gamma.len() != s {
            return Err(TableauError::DimensionMismatch(format!(
                "s = {s} but |β| = {}, |γ| = {}",
                beta.len(),
                gamma.len()
            )));
        }
        Ok(Self { lambda, beta, gamma })
    }

    /// Tableau with `γ = 0`.
    pub fn from_parts(lambda: CMat, beta: Vec<C64>) -> Result<Self, TableauError> {
        let s = beta.len();
        Self::new(lambda, beta, vec![0.0; s])
    }

    pub fn stages(&self) -> usize {
        self.beta.len()
    }

    pub fn lambda(&self) -> &CMat {
        &self.lambda
    }

    pub fn beta(&self) -> &[C64] {
        &self.beta
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    /// The tableau `(ωΛ, ωβ)` used for a step of size `ω`.
    pub fn scaled(&self, omega: f64) -> Self {
        let w = C64::new(omega, 0.0);
        Self {
            lambda: self.lambda.map(|z| z * w),
            beta: self.beta.iter().map(|b| b * w).collect(),
            gamma: self.gamma.clone(),
        }
    }

    pub fn is_lower_triangular(&self) -> bool {
        let s = self.stages();
        (0..s).all(|i| ((i + 1)..s).all(|j| self.lambda[(i, j)] == C64::new(0.0, 0.0)))
    }

    /// `Some(β)` as real numbers when every entry is real and strictly positive.
    pub fn positive_real_beta(&self) -> Option<Vec<f64>> {
        self.beta.iter().map(|b| (b.im == 0.0 && b.re > 0.0).then_some(b.re)).collect()
    }

    /// Eigenvalues of `Λ`; the diagonal for triangular tableaus.
    pub fn spectrum(&self) -> Vec<C64> {
        if self.is_lower_triangular() {
            (0..self.stages()).map(|i| self.lambda[(i, i)]).collect()
        } else {
            linalg::eig(&self.lambda).0
        }
    }

    /// Plain-text form: `s`, then `s` rows of `Λ`, then `β`, then `γ`.
    pub fn to_text(&self) -> String {
        let s = self.stages();
        let mut out = format!("{s}\n");
        for i in 0..s {
            let row: Vec<String> = (0..s).map(|j| format_complex(self.lambda[(i, j)])).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        let beta: Vec<String> = self.beta.iter().map(|b| format_complex(*b)).collect();
        let _ = writeln!(out, "{}", beta.join(" "));
        let gamma: Vec<String> = self.gamma.iter().map(|g| format!("{g:?}")).collect();
        let _ = writeln!(out, "{}", gamma.join(" "));
        out
    }

    pub fn from_text(text: &str) -> Result<Self, TableauError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (line, first) = lines.next().ok_or(TableauError::Parse { line: 1, msg: "empty input".into() })?;
        let s: usize = first
            .parse()
            .map_err(|_| TableauError::Parse { line, msg: format!("expected stage count, found {first:?}") })?;
        if s == 0 {
            return Err(TableauError::Parse { line, msg: "stage count must be positive".into() });
        }
        let mut row_of = |what: &str| -> Result<Vec<C64>, TableauError> {
            let (line, l) = lines.next().ok_or(TableauError::Parse { line: 0, msg: format!("missing {what}") })?;
            let vals = l
                .split_whitespace()
                .map(|t| parse_complex(t).ok_or(TableauError::Parse { line, msg: format!("bad number {t:?}") }))
                .collect::<Result<Vec<_>, _>>()?;
            if vals.len() != s {
                return Err(TableauError::Parse {
                    line,
                    msg: format!("{what} has {} entries, expected {s}", vals.len()),
                });
            }
            Ok(vals)
        };
        let mut lambda = CMat::zeros(s, s);
        for i in 0..s {
            for (j, v) in row_of("Λ row")?.into_iter().enumerate() {
                lambda[(i, j)] = v;
            }
        }
        let beta = row_of("β")?;
        let gamma_c = row_of("γ")?;
        let mut gamma = Vec::with_capacity(s);
        for g in gamma_c {
            if g.im != 0.0 {
                return Err(TableauError::Parse { line: 0, msg: "γ must be real".into() });
            }
            gamma.push(g.re);
        }
        Self::new(lambda, beta, gamma)
    }
}

/// `a+bi` token with round-trip precision.
pub fn format_complex(z: C64) -> String {
    if z.im == 0.0 && z.im.is_sign_positive() {
        format!("{:?}", z.re)
    } else {
        let sign = if z.im.is_sign_negative() { '-' } else { '+' };
        format!("{:?}{}{:?}i", z.re, sign, z.im.abs())
    }
}

/// Parses `a`, `a+bi`, `a-bi`, `bi`, `i`, `-i`.
pub fn parse_complex(tok: &str) -> Option<C64> {
    let tok = tok.trim();
    let Some(body) = tok.strip_suffix(['i', 'j']) else {
        return tok.parse::<f64>().ok().map(|x| C64::new(x, 0.0));
    };
    // Split at the last sign that does not belong to an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |s: &str| -> Option<f64> {
        match s {
            "" | "+" => Some(1.0),
            "-" => Some(-1.0),
            _ => s.parse().ok(),
        }
    };
    match split {
        Some(k) => Some(C64::new(body[..k].parse().ok()?, imag(&body[k..])?)),
        None => Some(C64::new(0.0, imag(body)?)),
    }
}

/// Left-hand side of the residual-preservation condition and its Frobenius norm.
#[derive(Debug, Clone, PartialEq)]
pub struct TableauDefect {
    pub defect: CMat,
    pub frobenius_norm: f64,
}

impl TableauDefect {
    fn from_matrix(defect: CMat) -> Self {
        let frobenius_norm = frobenius(&defect);
        Self { defect, frobenius_norm }
    }

    pub fn is_within(&self, tol: f64) -> bool {
        self.frobenius_norm <= tol
    }
}

/// `diag(β) conj(Λ) + Λᵀ diag(β) − β βᵀ`.
pub fn check_residual_condition(t: &ButcherTableau) -> TableauDefect {
    let s = t.stages();
    let l = t.lambda();
    let b = t.beta();
    let d = CMat::from_fn(s, s, |i, j| b[i] * l[(i, j)].conj() + l[(j, i)] * b[j] - b[i] * b[j]);
    TableauDefect::from_matrix(d)
}

/// Residual condition scaled to the tableau size: `‖defect‖_F ≤ rel_tol·(1 + ‖β‖²)`.
pub fn satisfies_residual_condition(t: &ButcherTableau, rel_tol: f64) -> bool {
    let b2: f64 = t.beta().iter().map(|b| b.norm_sqr()).sum();
    check_residual_condition(t).frobenius_norm <= rel_tol * (1.0 + b2)
}

/// Sylvester analogue: `diag(β) conj(Λ̆) + Λ̂ᵀ diag(β) − β βᵀ`.
pub fn check_residual_condition_sylvester(
    lambda_hat: &CMat,
    lambda_breve: &CMat,
    beta: &[C64],
) -> Result<TableauDefect, TableauError> {
    let s = beta.len();
    if lambda_hat.shape() != (s, s) || lambda_breve.shape() != (s, s) {
        return Err(TableauError::DimensionMismatch(format!(
            "Λ̂ {:?}, Λ̆ {:?}, |β| = {s}",
            lambda_hat.shape(),
            lambda_breve.shape()
        )));
    }
    let d = CMat::from_fn(s, s, |i, j| {
        beta[i] * lambda_breve[(i, j)].conj() + lambda_hat[(j, i)] * beta[j] - beta[i] * beta[j]
    });
    Ok(TableauDefect::from_matrix(d))
}

/// `Λ = [μ]`, `β = [2 Re μ]`.
pub fn make_one_stage(mu: C64) -> ButcherTableau {
    ButcherTableau { lambda: CMat::from_element(1, 1, mu), beta: vec![C64::new(2.0 * mu.re, 0.0)], gamma: vec![0.0] }
}

/// Lower-triangular residual-preserving DIRK tableau with diagonal `μ_1..μ_s`.
pub fn make_dirk_lyapunov(mus: &[C64]) -> Result<ButcherTableau, TableauError> {
    if mus.is_empty() {
        return Err(TableauError::DimensionMismatch("no shifts".into()));
    }
    for (index, mu) in mus.iter().enumerate() {
        if !(mu.re > 0.0) {
            return Err(TableauError::NonPositiveRealPart { index, value: *mu });
        }
    }
    let s = mus.len();
    let lambda = CMat::from_fn(s, s, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => mus[i],
        std::cmp::Ordering::Greater => C64::new(2.0 * mus[j].re, 0.0),
        std::cmp::Ordering::Less => C64::new(0.0, 0.0),
    });
    let beta = mus.iter().map(|m| C64::new(2.0 * m.re, 0.0)).collect();
    ButcherTableau::from_parts(lambda, beta)
}

/// One DIRK step equivalent to consecutive one-stage steps with `μ_1..μ_s`.
pub fn merge_one_stage_steps(mus: &[C64]) -> Result<ButcherTableau, TableauError> {
    make_dirk_lyapunov(mus)
}

/// Gauss-Legendre collocation with one or two stages.
pub fn gauss_legendre(s: usize) -> Result<ButcherTableau, TableauError> {
    let r = |x: f64| C64::new(x, 0.0);
    match s {
        1 => ButcherTableau::new(CMat::from_element(1, 1, r(0.5)), vec![r(1.0)], vec![0.5]),
        2 => {
            let d = 3f64.sqrt() / 6.0;
            let lambda = CMat::from_row_slice(2, 2, &[r(0.25), r(0.25 - d), r(0.25 + d), r(0.25)]);
            ButcherTableau::new(lambda, vec![r(0.5), r(0.5)], vec![0.5 - d, 0.5 + d])
        }
        _ => Err(TableauError::UnsupportedStageCount(s)),
    }
}

/// `R(z) = 1 + z βᵀ (I − zΛ)⁻¹ 𝟙`.
pub fn stability_function(t: &ButcherTableau, z: C64) -> Result<C64, TableauError> {
    let s = t.stages();
    let m = CMat::identity(s, s) - t.lambda().map(|l| l * z);
    let ones = CMat::from_element(s, 1, C64::new(1.0, 0.0));
    let lu = m.lu();
    let x = lu.solve(&ones).ok_or(TableauError::SingularStabilityDenominator(z))?;
    let scale = 1.0 + z.norm() * frobenius(t.lambda());
    if x.iter().any(|v| !v.is_finite()) || lu.determinant().norm() < 1e-14 * scale.powi(s as i32) {
        return Err(TableauError::SingularStabilityDenominator(z));
    }
    let bx: C64 = t.beta().iter().zip(x.iter()).map(|(b, v)| b * v).sum();
    Ok(C64::new(1.0, 0.0) + z * bx)
}

/// Product form `∏ (1 + conj(μ_i) z) / (1 − μ_i z)` shared by all residual-preserving
/// tableaus with spectrum `{μ_i}`.
pub fn stability_function_from_spectrum(mus: &[C64], z: C64) -> C64 {
    let one = C64::new(1.0, 0.0);
    mus.iter().fold(one, |acc, mu| acc * (one + mu.conj() * z) / (one - mu * z))
}

/// What is known about `σ(A)` when checking stage solvability.
#[derive(Debug, Clone)]
pub enum SpectrumBound {
    /// `σ(A) ⊂ ℂ₋`, no eigenvalues available.
    Stable,
    /// Explicit eigenvalues.
    Eigenvalues(Vec<C64>),
}

/// Whether the stage system `I − ω(Λ⊗A)` is nonsingular, i.e. `μ_p ≠ 1/(ω λ_q)`.
///
/// With only stability known, any tableau eigenvalue with nonnegative real part is safe
/// since `1/(ωλ)` lies strictly in `ℂ₋`. Other spectra cannot be decided and return false.
pub fn check_solvability(t: &ButcherTableau, omega: f64, bound: &SpectrumBound) -> bool {
    let mus = t.spectrum();
    match bound {
        SpectrumBound::Stable => mus.iter().all(|m| m.re >= 0.0),
        SpectrumBound::Eigenvalues(lams) => mus.iter().all(|mu| {
            lams.iter().all(|lam| {
                let d = C64::new(1.0, 0.0) - mu * lam * omega;
                d.norm() > 1e-12 * (1.0 + (mu * lam * omega).norm())
            })
        }),
    }
}

/// Real 2x2 data replacing a conjugate pair of one-stage steps.
#[derive(Debug, Clone, PartialEq)]
pub struct RealPairTransform {
    pub mu: C64,
    /// Real tableau matrix with eigenvalues `{μ, conj μ}`.
    pub lambda_breve: RMat,
    pub beta_breve: [f64; 2],
    /// Lower-triangular factor combining real and imaginary parts of a stage solve.
    pub l_factor: RMat,
    /// Similarity `S = Q Lᵀ` taking `Λ̆` to the rotation form `[[Re μ, −Im μ], [Im μ, Re μ]]`.
    pub s_factor: RMat,
}

impl RealPairTransform {
    pub fn tableau(&self) -> ButcherTableau {
        let lambda = linalg::to_complex(&self.lambda_breve);
        let beta = self.beta_breve.iter().map(|b| C64::new(*b, 0.0)).collect();
        ButcherTableau::from_parts(lambda, beta).expect("2x2 tableau")
    }

    /// `S⁻¹ Λ̆ S`.
    pub fn lambda_hat(&self) -> RMat {
        let s_inv = self.s_factor.clone().try_inverse().expect("S is nonsingular");
        &s_inv * &self.lambda_breve * &self.s_factor
    }

    /// Weights `w` with `[h, h] S⁻ᵀ = h wᵀ`; always `[1, 0]`.
    pub fn rhs_weights(&self) -> [f64; 2] {
        let st_inv = self.s_factor.transpose().try_inverse().expect("S is nonsingular");
        let w = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]) * st_inv;
        [w[(0, 0)], w[(0, 1)]]
    }

    pub fn q_factor() -> RMat {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        RMat::from_row_slice(2, 2, &[r, r, r, -r])
    }
}

pub fn real_pair_transform(mu: C64) -> Result<RealPairTransform, TableauError> {
    if mu.im == 0.0 {
        return Err(TableauError::RealShiftNotPairable(mu));
    }
    if !(mu.re > 0.0) {
        return Err(TableauError::NonPositiveRealPart { index: 0, value: mu });
    }
    let re = mu.re;
    let phi = mu.im.signum();
    let abs = mu.norm();
    let lambda_breve = RMat::from_row_slice(2, 2, &[re, re + phi * abs, re - phi * abs, re]);
    let z = re / mu.im;
    let rt2 = std::f64::consts::SQRT_2;
    let w = (z * z + 1.0).sqrt();
    let l_factor = RMat::from_row_slice(2, 2, &[rt2, 0.0, rt2 * z, rt2 * w]);
    let s_factor = RealPairTransform::q_factor() * l_factor.transpose();
    Ok(RealPairTransform { mu, lambda_breve, beta_breve: [2.0 * re, 2.0 * re], l_factor, s_factor })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn r(x: f64) -> C64 {
        c(x, 0.0)
    }

    #[test]
    fn one_stage_tableaus() {
        let t = make_one_stage(r(0.5));
        assert_eq!(t.lambda()[(0, 0)], r(0.5));
        assert_eq!(t.beta(), &[r(1.0)]);
        let t = make_one_stage(c(1.0, 1.0));
        assert_eq!(t.lambda()[(0, 0)], c(1.0, 1.0));
        assert_eq!(t.beta(), &[r(2.0)]);
        assert_eq!(make_one_stage(r(1.0)).beta(), &[r(2.0)]);
        assert_eq!(t.gamma(), &[0.0]);
    }

    #[test]
    fn dirk_pattern() {
        let t = make_dirk_lyapunov(&[r(1.0), r(0.5)]).unwrap();
        let want = CMat::from_row_slice(2, 2, &[r(1.0), r(0.0), r(2.0), r(0.5)]);
        assert_eq!(t.lambda(), &want);
        assert_eq!(t.beta(), &[r(2.0), r(1.0)]);

        let t = make_dirk_lyapunov(&[c(1.0, 1.0), c(1.0, -1.0)]).unwrap();
        let want = CMat::from_row_slice(2, 2, &[c(1.0, 1.0), r(0.0), r(2.0), c(1.0, -1.0)]);
        assert_eq!(t.lambda(), &want);
        assert_eq!(t.beta(), &[r(2.0), r(2.0)]);
        assert!(check_residual_condition(&t).frobenius_norm <= 1e-14);
    }

    #[test]
    fn dirk_rejects_left_half_plane() {
        let err = make_dirk_lyapunov(&[r(1.0), c(-0.5, 1.0)]).unwrap_err();
        assert_eq!(err, TableauError::NonPositiveRealPart { index: 1, value: c(-0.5, 1.0) });
        assert!(make_dirk_lyapunov(&[c(0.0, 1.0)]).is_err());
    }

    #[test]
    fn gauss_legendre_tableaus() {
        let t1 = gauss_legendre(1).unwrap();
        assert_eq!(t1.lambda()[(0, 0)], r(0.5));
        assert_eq!(t1.beta(), &[r(1.0)]);
        let t2 = gauss_legendre(2).unwrap();
        let d = 3f64.sqrt() / 6.0;
        assert_eq!(t2.lambda()[(0, 1)], r(0.25 - d));
        assert_eq!(t2.lambda()[(1, 0)], r(0.25 + d));
        assert!(check_residual_condition(&t2).frobenius_norm <= 1e-15);
        assert_eq!(gauss_legendre(3).unwrap_err(), TableauError::UnsupportedStageCount(3));
    }

    #[test]
    fn residual_condition_values() {
        assert_eq!(check_residual_condition(&make_one_stage(c(1.0, 1.0))).defect[(0, 0)], r(0.0));
        let be = ButcherTableau::from_parts(CMat::from_element(1, 1, r(1.0)), vec![r(1.0)]).unwrap();
        let d = check_residual_condition(&be);
        assert_eq!(d.defect[(0, 0)], r(1.0));
        assert_eq!(d.frobenius_norm, 1.0);
    }

    #[test]
    fn defect_is_hermitian_for_real_beta() {
        let lambda = CMat::from_row_slice(2, 2, &[c(1.0, 2.0), c(0.3, -1.0), c(-0.7, 0.5), c(2.0, 0.1)]);
        let t = ButcherTableau::from_parts(lambda, vec![r(0.7), r(1.9)]).unwrap();
        let d = check_residual_condition(&t).defect;
        assert!((d.clone() - d.adjoint()).norm() < 1e-15);
    }

    #[test]
    fn sylvester_condition_values() {
        let one = |x: C64| CMat::from_element(1, 1, x);
        let d = check_residual_condition_sylvester(&one(r(0.5)), &one(r(1.0)), &[r(1.5)]).unwrap();
        assert_eq!(d.defect[(0, 0)], r(0.0));
        let d = check_residual_condition_sylvester(&one(r(1.0)), &one(r(1.0)), &[r(1.0)]).unwrap();
        assert_eq!(d.defect[(0, 0)], r(1.0));
        assert!(check_residual_condition_sylvester(&one(r(1.0)), &CMat::zeros(2, 2), &[r(1.0)]).is_err());
    }

    #[test]
    fn stability_function_values() {
        let mid = gauss_legendre(1).unwrap();
        assert_eq!(stability_function(&mid, r(0.0)).unwrap(), r(1.0));
        assert!(stability_function(&mid, r(-2.0)).unwrap().norm() < 1e-15);
        let t = make_one_stage(c(1.0, 1.0));
        let v = stability_function(&t, r(-1.0)).unwrap();
        assert!((v - c(0.2, 0.4)).norm() < 1e-15);
        assert!(matches!(stability_function(&mid, r(2.0)), Err(TableauError::SingularStabilityDenominator(_))));
    }

    #[test]
    fn merge_single_shift_is_one_stage() {
        let mu = c(0.3, -2.0);
        assert_eq!(merge_one_stage_steps(&[mu]).unwrap(), make_one_stage(mu));
    }

    #[test]
    fn real_pair_for_one_plus_i() {
        let t = real_pair_transform(c(1.0, 1.0)).unwrap();
        let s2 = 2f64.sqrt();
        let want = RMat::from_row_slice(2, 2, &[1.0, 1.0 + s2, 1.0 - s2, 1.0]);
        assert!((&t.lambda_breve - want).norm() < 1e-15);
        assert_eq!(t.beta_breve, [2.0, 2.0]);
        assert!(check_residual_condition(&t.tableau()).frobenius_norm < 1e-15);
        let mut ev = linalg::eigenvalues_real(&t.lambda_breve);
        ev.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert!((ev[0] - c(1.0, -1.0)).norm() < 1e-12 && (ev[1] - c(1.0, 1.0)).norm() < 1e-12);
        let w = t.rhs_weights();
        assert!((w[0] - 1.0).abs() < 1e-15 && w[1].abs() < 1e-15);
    }

    #[test]
    fn real_pair_rejects_real_shift() {
        assert_eq!(real_pair_transform(r(2.0)).unwrap_err(), TableauError::RealShiftNotPairable(r(2.0)));
    }

    #[test]
    fn solvability() {
        let be = ButcherTableau::from_parts(CMat::from_element(1, 1, r(-1.0)), vec![r(1.0)]).unwrap();
        assert!(!check_solvability(&be, 1.0, &SpectrumBound::Eigenvalues(vec![r(-1.0)])));
        assert!(check_solvability(&be, 1.0, &SpectrumBound::Eigenvalues(vec![r(-2.0)])));
        let dirk = make_dirk_lyapunov(&[c(1.0, 3.0), r(0.1)]).unwrap();
        assert!(check_solvability(&dirk, 1.0, &SpectrumBound::Stable));
        assert!(check_solvability(&gauss_legendre(2).unwrap(), 1.0, &SpectrumBound::Stable));
    }

    #[test]
    fn complex_tokens() {
        for (tok, want) in [
            ("1", r(1.0)),
            ("-2.5e-3", r(-2.5e-3)),
            ("1+2i", c(1.0, 2.0)),
            ("1-2i", c(1.0, -2.0)),
            ("-1e-3+2.5e+1i", c(-1e-3, 25.0)),
            ("2i", c(0.0, 2.0)),
            ("-i", c(0.0, -1.0)),
        ] {
            assert_eq!(parse_complex(tok), Some(want), "{tok}");
        }
        assert_eq!(parse_complex("abc"), None);
        for z in [c(0.1, -0.0), c(-1.0 / 3.0, 1e-300), r(7.0)] {
            assert_eq!(parse_complex(&format_complex(z)), Some(z));
        }
    }

    #[test]
    fn text_form_round_trip() {
        let t = make_dirk_lyapunov(&[c(1.0, 1.0), r(0.25), c(3.0, -0.5)]).unwrap();
        let back = ButcherTableau::from_text(&t.to_text()).unwrap();
        assert_eq!(back, t);
        let g = gauss_legendre(2).unwrap();
        assert_eq!(ButcherTableau::from_text(&g.to_text()).unwrap(), g);
    }

    #[test]
    fn text_form_errors_name_the_line() {
        let err = ButcherTableau::from_text("2\n1 0\n2 x\n1 1\n0 0\n").unwrap_err();
        assert_eq!(err, TableauError::Parse { line: 3, msg: "bad number \"x\"".into() });
        assert!(matches!(ButcherTableau::from_text("1\n1 2\n1\n0\n"), Err(TableauError::Parse { line: 2, .. })));
    }
}

//! Browser bindings for three demo operations: stability-function fields, residual
//! histories on a model problem, and tableau checks.

use gramian_rk::adi_ref::{self, AdiError};
use gramian_rk::lyapunov::{self, LyapunovError};
use gramian_rk::problems::laplacian_1d;
use gramian_rk::shifts::heuristic_shifts;
use gramian_rk::tableau::{check_residual_condition, stability_function_from_spectrum};
use gramian_rk::{ButcherTableau, CMat, SolverConfig, SparseOperator, C64};
use wasm_bindgen::prelude::*;

fn js(msg: impl std::fmt::Display) -> JsError {
    JsError::new(&msg.to_string())
}

fn pairs(flat: &[f64]) -> Result<Vec<C64>, String> {
    if !flat.len().is_multiple_of(2) {
        return Err("shifts must be given as re, im pairs".into());
    }
    Ok(flat.chunks(2).map(|c| C64::new(c[0], c[1])).collect())
}

fn split(values: &[C64]) -> (Vec<f64>, Vec<f64>) {
    values.iter().map(|z| (z.re, z.im)).unzip()
}

/// `log10 |R(z)|` of the product-form stability function on a `width × height` grid,
/// row-major from the top (largest imaginary part).
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn stability_field(
    shifts: &[f64],
    re_min: f64,
    re_max: f64,
    im_min: f64,
    im_max: f64,
    width: usize,
    height: usize,
) -> Result<Vec<f64>, JsError> {
    field(shifts, [re_min, re_max, im_min, im_max], width, height).map_err(js)
}

fn field(
    shifts: &[f64],
    [re_min, re_max, im_min, im_max]: [f64; 4],
    width: usize,
    height: usize,
) -> Result<Vec<f64>, String> {
    let mus = pairs(shifts)?;
    let step = |lo: f64, hi: f64, k: usize, count: usize| {
        if count <= 1 {
            lo
        } else {
            lo + (hi - lo) * k as f64 / (count - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(width * height);
    for row in 0..height {
        let im = step(im_max, im_min, row, height);
        for col in 0..width {
            let z = C64::new(step(re_min, re_max, col, width), im);
            out.push(stability_function_from_spectrum(&mus, z).norm().log10());
        }
    }
    Ok(out)
}

/// Solver run on the 1D Laplacian.
#[wasm_bindgen]
pub struct DemoRun {
    residuals: Vec<f64>,
    shifts_re: Vec<f64>,
    shifts_im: Vec<f64>,
    converged: bool,
    rank: usize,
}

#[wasm_bindgen]
impl DemoRun {
    /// Relative residual `‖h‖²/‖h₀‖²` after each step.
    #[wasm_bindgen(getter)]
    pub fn residuals(&self) -> Vec<f64> {
        self.residuals.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn shifts_re(&self) -> Vec<f64> {
        self.shifts_re.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn shifts_im(&self) -> Vec<f64> {
        self.shifts_im.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn converged(&self) -> bool {
        self.converged
    }

    /// Columns in the computed factor.
    #[wasm_bindgen(getter)]
    pub fn rank(&self) -> usize {
        self.rank
    }
}

/// Solves `A P + P Aᵀ + b bᵀ = 0` for the `n`-point Laplacian with `count` heuristic shifts.
/// `method` is `"rk"` or `"adi"`.
#[wasm_bindgen]
pub fn laplacian_run(n: usize, count: usize, method: &str, realify: bool, tol: f64) -> Result<DemoRun, JsError> {
    run(n, count, method, realify, tol).map_err(js)
}

fn run(n: usize, count: usize, method: &str, realify: bool, tol: f64) -> Result<DemoRun, String> {
    if !(2..=4000).contains(&n) {
        return Err("n must lie in 2..=4000".into());
    }
    let op = SparseOperator::new(laplacian_1d(n));
    let set = heuristic_shifts(&op, 20.min(n), count).map_err(|e| e.to_string())?;
    let b = CMat::from_fn(n, 1, |i, _| C64::new(((i + 1) as f64 / (n + 1) as f64).sin() + 0.5, 0.0));
    let cfg = SolverConfig { tol, max_steps: set.len(), realify, ..Default::default() };
    let (shifts_re, shifts_im) = split(&set.values);
    let (residuals, converged, rank) = match method {
        "rk" => {
            let (state, converged) = match lyapunov::solve_lyapunov_shifts(&op, &b, &set.values, &cfg) {
                Ok(s) => (s, true),
                Err(LyapunovError::NotConverged(s)) => (*s, false),
                Err(e) => return Err(e.to_string()),
            };
            let h0 = state.h0_norm_sq.max(f64::MIN_POSITIVE);
            (state.residual_history.iter().map(|r| r / h0).collect(), converged, state.z.ncols())
        }
        "adi" => {
            let (state, converged) = match adi_ref::solve_lyapunov_adi(&op, &b, &set.adi_shifts(), &cfg) {
                Ok(s) => (s, true),
                Err(AdiError::NotConverged(s)) => (*s, false),
                Err(e) => return Err(e.to_string()),
            };
            let w0 = state.w0_norm_sq.max(f64::MIN_POSITIVE);
            (state.residual_history.iter().map(|r| r / w0).collect(), converged, state.z.ncols())
        }
        other => return Err(format!("unknown method '{other}'")),
    };
    Ok(DemoRun { residuals, shifts_re, shifts_im, converged, rank })
}

/// Result of checking a tableau against the residual-preservation condition.
#[wasm_bindgen]
pub struct TableauCheck {
    stages: usize,
    defect_norm: f64,
    spectrum_re: Vec<f64>,
    spectrum_im: Vec<f64>,
}

#[wasm_bindgen]
impl TableauCheck {
    #[wasm_bindgen(getter)]
    pub fn stages(&self) -> usize {
        self.stages
    }

    /// Frobenius norm of `diag(β) conj(Λ) + Λᵀ diag(β) − β βᵀ`.
    #[wasm_bindgen(getter)]
    pub fn defect_norm(&self) -> f64 {
        self.defect_norm
    }

    #[wasm_bindgen(getter)]
    pub fn spectrum_re(&self) -> Vec<f64> {
        self.spectrum_re.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn spectrum_im(&self) -> Vec<f64> {
        self.spectrum_im.clone()
    }
}

/// Parses the plain-text tableau form and checks it.
#[wasm_bindgen]
pub fn check_tableau(text: &str) -> Result<TableauCheck, JsError> {
    check(text).map_err(js)
}

fn check(text: &str) -> Result<TableauCheck, String> {
    let t = ButcherTableau::from_text(text).map_err(|e| e.to_string())?;
    let (spectrum_re, spectrum_im) = split(&t.spectrum());
    Ok(TableauCheck {
        stages: t.stages(),
        defect_norm: check_residual_condition(&t).frobenius_norm,
        spectrum_re,
        spectrum_im,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use gramian_rk::tableau::{gauss_legendre, make_dirk_lyapunov};
    use gramian_rk::CMat as M;

    #[test]
    fn field_is_unimodular_on_the_imaginary_axis() {
        let f = field(&[2.0, 1.0, 0.5, 0.0], [0.0, 0.0, -3.0, 3.0], 1, 7).unwrap();
        assert!(f.iter().all(|v| v.abs() < 1e-12));
        let left = field(&[2.0, 1.0], [-5.0, -0.1, -1.0, 1.0], 4, 3).unwrap();
        assert!(left.iter().all(|v| *v < 0.0));
    }

    #[test]
    fn odd_shift_array_is_rejected() {
        assert!(pairs(&[1.0]).is_err());
    }

    #[test]
    fn laplacian_runs_agree() {
        let rk = run(60, 16, "rk", false, 1e-12).unwrap();
        let adi = run(60, 16, "adi", false, 1e-12).unwrap();
        assert_eq!(rk.residuals.len(), adi.residuals.len());
        for (a, b) in rk.residuals.iter().zip(&adi.residuals) {
            assert!((a - b).abs() <= 1e-8 * a.max(1e-14), "{a} vs {b}");
        }
        let real = run(60, 16, "rk", true, 1e-12).unwrap();
        assert!((real.residuals.last().unwrap() - rk.residuals.last().unwrap()).abs() < 1e-10);
    }

    #[test]
    fn tableau_check_separates_conforming_tableaus() {
        let dirk = make_dirk_lyapunov(&[C64::new(1.0, 2.0), C64::new(0.5, 0.0)]).unwrap();
        let ok = check(&dirk.to_text()).unwrap();
        assert_eq!(ok.stages(), 2);
        assert!(ok.defect_norm() < 1e-14);
        let gl = check(&gauss_legendre(2).unwrap().to_text()).unwrap();
        assert!(gl.defect_norm() < 1e-14);
        let off =
            ButcherTableau::from_parts(M::from_element(1, 1, C64::new(1.0, 0.0)), vec![C64::new(1.0, 0.0)]).unwrap();
        assert!((check(&off.to_text()).unwrap().defect_norm() - 1.0).abs() < 1e-14);
        assert!(check("2\n1 0\n").is_err());
    }
}

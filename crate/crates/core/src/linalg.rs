//! Small dense helpers shared by the solvers and the oracles.

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64 as C64;

/// Dense complex matrix.
pub type CMat = DMatrix<C64>;
/// Dense real matrix.
pub type RMat = DMatrix<f64>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn to_complex(a: &RMat) -> CMat {
    a.map(|x| C64::new(x, 0.0))
}

pub fn real_part(a: &CMat) -> RMat {
    a.map(|z| z.re)
}

pub fn imag_part(a: &CMat) -> RMat {
    a.map(|z| z.im)
}

/// Largest absolute imaginary part.
pub fn max_imag(a: &CMat) -> f64 {
    a.iter().fold(0.0_f64, |m, z| m.max(z.im.abs()))
}

pub fn frobenius(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frobenius_real(a: &RMat) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Spectral norm (largest singular value). Returns 0 for empty matrices.
pub fn spectral_norm(a: &CMat) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    if a.ncols() == 1 {
        return frobenius(a);
    }
    // The Gram matrix of the narrow side keeps the decomposition small.
    let gram = if a.ncols() <= a.nrows() { a.adjoint() * a } else { a * a.adjoint() };
    let ev = gram.symmetric_eigenvalues();
    ev.iter().fold(0.0_f64, |m, x| m.max(*x)).max(0.0).sqrt()
}

/// `[a, b]`, tolerating an empty left operand.
pub fn hcat(a: &CMat, b: &CMat) -> CMat {
    if a.ncols() == 0 {
        return b.clone();
    }
    assert_eq!(a.nrows(), b.nrows(), "row mismatch in hcat");
    let mut out = CMat::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

/// `Z Zᴴ`.
pub fn gram(z: &CMat, n: usize) -> CMat {
    if z.ncols() == 0 {
        return CMat::zeros(n, n);
    }
    z * z.adjoint()
}

/// Eigenvalues and right eigenvectors of a complex matrix via the complex Schur form.
///
/// Eigenvectors are normalized to unit 2-norm. Defective or nearly defective matrices
/// yield ill-conditioned eigenvector matrices; callers check `cond_2` when it matters.
pub fn eig(a: &CMat) -> (Vec<C64>, CMat) {
    let n = a.nrows();
    let (q, t) = a.clone().schur().unpack();
    let vals: Vec<C64> = (0..n).map(|k| t[(k, k)]).collect();
    let scale = frobenius(a).max(f64::MIN_POSITIVE);
    let mut y = CMat::zeros(n, n);
    for k in 0..n {
        y[(k, k)] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = C64::new(0.0, 0.0);
            for l in (i + 1)..=k {
                s += t[(i, l)] * y[(l, k)];
            }
            let mut d = t[(i, i)] - t[(k, k)];
            if d.norm() < 1e-14 * scale {
                d = C64::new(1e-14 * scale, 0.0);
            }
            y[(i, k)] = -s / d;
        }
    }
    let mut v = q * y;
    for mut col in v.column_iter_mut() {
        let nrm = col.norm();
        if nrm > 0.0 {
            col /= C64::new(nrm, 0.0);
        }
    }
    (vals, v)
}

/// Eigenvalues of a real matrix. Conjugate pairs come out as exact conjugates.
pub fn eigenvalues_real(a: &RMat) -> Vec<C64> {
    a.complex_eigenvalues().iter().copied().collect()
}

/// 2-norm condition number, `inf` for singular matrices.
pub fn cond_2(a: &CMat) -> f64 {
    let sv = a.clone().svd(false, false).singular_values;
    let max = sv.iter().fold(0.0_f64, |m, x| m.max(*x));
    let min = sv.iter().fold(f64::INFINITY, |m, x| m.min(*x));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn column(v: &[C64]) -> CMat {
    CMat::from_column_slice(v.len(), 1, v)
}

pub fn real_column(v: &[f64]) -> CMat {
    CMat::from_iterator(v.len(), 1, v.iter().map(|x| C64::new(*x, 0.0)))
}

pub fn dvec_to_cmat(v: &DVector<f64>) -> CMat {
    real_column(v.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_norm_of_rank_one_block() {
        let h = real_column(&[3.0, 4.0]);
        assert!((spectral_norm(&h) - 5.0).abs() < 1e-14);
        let wide = CMat::from_row_slice(1, 2, &[c(3.0, 0.0), c(0.0, 4.0)]);
        assert!((spectral_norm(&wide) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn eig_recovers_triangular_spectrum() {
        let a = CMat::from_row_slice(
            3,
            3,
            &[
                c(-1.0, 0.0),
                c(2.0, 0.0),
                c(0.0, 1.0),
                c(0.0, 0.0),
                c(-2.0, 1.0),
                c(1.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(-3.0, 0.0),
            ],
        );
        let (vals, vecs) = eig(&a);
        for (k, lam) in vals.iter().enumerate() {
            let v = vecs.column(k).into_owned();
            let r = &a * &v - &v * *lam;
            assert!(r.norm() < 1e-12, "eigpair {k} residual {}", r.norm());
        }
        let mut re: Vec<f64> = vals.iter().map(|z| z.re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((re[0] + 3.0).abs() < 1e-12 && (re[2] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn hcat_with_empty_left() {
        let e = CMat::zeros(2, 0);
        let b = real_column(&[1.0, 2.0]);
        assert_eq!(hcat(&e, &b), b);
        assert_eq!(hcat(&b, &b).ncols(), 2);
    }
}

//! Generators for the matrices used in tests, benchmarks and the demo.

use rand::Rng;

use crate::linalg::{self, CMat, RMat, C64};
use crate::operator::CsrMatrix;

pub fn random_real<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> RMat {
    RMat::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn random_complex<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// Random dense matrix shifted by `−(α + 1) I`, where `α` is its spectral abscissa.
pub fn random_stable<R: Rng>(n: usize, rng: &mut R) -> RMat {
    let mut a = random_real(n, n, rng) / (n as f64).sqrt();
    let abscissa = linalg::eigenvalues_real(&a).iter().fold(f64::NEG_INFINITY, |m, z| m.max(z.re));
    for i in 0..n {
        a[(i, i)] -= abscissa + 1.0;
    }
    a
}

/// Random orthogonal matrix from the QR factorization of a random square matrix.
pub fn random_orthogonal<R: Rng>(n: usize, rng: &mut R) -> RMat {
    random_real(n, n, rng).qr().q()
}

/// Normal matrix `Q D Qᵀ` with `D` block diagonal: `n / 2 / 2` rotation blocks
/// `[[a, −b], [b, a]]` and real diagonal entries for the rest. Every eigenvalue
/// has real part in `[lo, hi]`; pass negative bounds for a stable matrix and
/// positive ones for an anti-stable matrix. Returns the matrix and its eigenvalues.
pub fn random_normal<R: Rng>(n: usize, lo: f64, hi: f64, rng: &mut R) -> (RMat, Vec<C64>) {
    let mut d = RMat::zeros(n, n);
    let mut eig = Vec::with_capacity(n);
    let pairs = n / 4;
    let mut i = 0;
    for _ in 0..pairs {
        let a = rng.gen_range(lo..hi);
        let b = rng.gen_range(0.2..2.0);
        d[(i, i)] = a;
        d[(i, i + 1)] = -b;
        d[(i + 1, i)] = b;
        d[(i + 1, i + 1)] = a;
        eig.push(C64::new(a, b));
        eig.push(C64::new(a, -b));
        i += 2;
    }
    while i < n {
        let a = rng.gen_range(lo..hi);
        d[(i, i)] = a;
        eig.push(C64::new(a, 0.0));
        i += 1;
    }
    let q = random_orthogonal(n, rng);
    (&q * d * q.transpose(), eig)
}

/// Finite-difference 1D diffusion operator `(n+1)² · tridiag(1, −2, 1)`.
pub fn laplacian_1d(n: usize) -> CsrMatrix {
    let h2 = ((n + 1) * (n + 1)) as f64;
    let mut t = Vec::with_capacity(3 * n);
    for i in 0..n {
        t.push((i, i, -2.0 * h2));
        if i + 1 < n {
            t.push((i, i + 1, h2));
            t.push((i + 1, i, h2));
        }
    }
    CsrMatrix::from_triplets(n, &t)
}

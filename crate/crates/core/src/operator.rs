//! Access to the system matrix: products and shifted solves.
//!
//! Every solve the iterations need has the form `(σ I + τ A) X = C` (or with `Aᵀ`),
//! so implementors provide [`Operator::solve_combination`] and get the named
//! variants for free. Factorizations are cached per `(σ, τ, transpose)` so repeated
//! shifts cost one factorization. Operators are `Sync`; distinct shifts may be
//! factorized from several threads at once.

use std::sync::{Arc, Mutex};

use nalgebra::{Dyn, LU};
use thiserror::Error;

use crate::linalg::{self, CMat, RMat, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("({sigma})·I + ({tau})·A is numerically singular")]
    Singular { sigma: C64, tau: C64 },
    #[error("dimension mismatch: operator is {expected}x{expected}, block has {found} rows")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
}

pub trait Operator: Send + Sync {
    fn dim(&self) -> usize;

    /// `A X`.
    fn apply(&self, x: &CMat) -> CMat;

    /// `Aᵀ X` (plain transpose; `A` is real).
    fn apply_transpose(&self, x: &CMat) -> CMat;

    /// Solves `(σ I + τ A) X = C`, or `(σ I + τ Aᵀ) X = C` when `transpose` is set.
    fn solve_combination(&self, sigma: C64, tau: C64, transpose: bool, rhs: &CMat) -> Result<CMat, OperatorError>;

    fn frobenius_norm(&self) -> f64;

    /// Dense copy, if the implementation is willing to produce one.
    fn to_dense(&self) -> Option<RMat> {
        None
    }

    /// `(I − μA) X = C`.
    fn shifted_solve(&self, mu: C64, rhs: &CMat) -> Result<CMat, OperatorError> {
        self.solve_combination(one(), -mu, false, rhs)
    }

    /// `(I − μAᵀ) X = C`.
    fn transpose_shifted_solve(&self, mu: C64, rhs: &CMat) -> Result<CMat, OperatorError> {
        self.solve_combination(one(), -mu, true, rhs)
    }

    /// `(A + αI) X = C`, the native ADI form.
    fn pencil_solve(&self, alpha: C64, rhs: &CMat) -> Result<CMat, OperatorError> {
        self.solve_combination(alpha, one(), false, rhs)
    }

    /// `A X = C`.
    fn solve(&self, rhs: &CMat) -> Result<CMat, OperatorError> {
        self.solve_combination(C64::new(0.0, 0.0), one(), false, rhs)
    }

    /// Factorizes `(σ, τ, transpose)` ahead of time without solving.
    fn prefactor(&self, sigma: C64, tau: C64, transpose: bool) -> Result<(), OperatorError> {
        let probe = CMat::zeros(self.dim(), 0);
        self.solve_combination(sigma, tau, transpose, &probe).map(|_| ())
    }
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

#[derive(Debug, Clone, Copy)]
struct FactorKey {
    sigma: C64,
    tau: C64,
    transpose: bool,
}

impl FactorKey {
    fn matches(&self, other: &FactorKey) -> bool {
        let close = |a: C64, b: C64| (a - b).norm() <= 1e-14 * a.norm().max(b.norm()).max(1.0);
        self.transpose == other.transpose && close(self.sigma, other.sigma) && close(self.tau, other.tau)
    }
}

const CACHE_CAPACITY: usize = 128;

/// Small FIFO cache of factorizations.
struct FactorCache<F> {
    entries: Mutex<Vec<(FactorKey, Arc<F>)>>,
}

impl<F> FactorCache<F> {
    fn new() -> Self {
        Self { entries: Mutex::new(Vec::new()) }
    }

    fn get_or_insert<E>(&self, key: FactorKey, make: impl FnOnce() -> Result<F, E>) -> Result<Arc<F>, E> {
        if let Some(f) = self.lookup(&key) {
            return Ok(f);
        }
        // Factorize outside the lock so distinct shifts proceed in parallel.
        let f = Arc::new(make()?);
        let mut entries = self.entries.lock().expect("factor cache poisoned");
        if let Some((_, existing)) = entries.iter().find(|(k, _)| k.matches(&key)) {
            return Ok(existing.clone());
        }
        if entries.len() == CACHE_CAPACITY {
            entries.remove(0);
        }
        entries.push((key, f.clone()));
        Ok(f)
    }

    fn lookup(&self, key: &FactorKey) -> Option<Arc<F>> {
        let entries = self.entries.lock().expect("factor cache poisoned");
        entries.iter().find(|(k, _)| k.matches(key)).map(|(_, f)| f.clone())
    }

    fn len(&self) -> usize {
        self.entries.lock().expect("factor cache poisoned").len()
    }
}

fn check_rows(n: usize, rhs: &CMat) -> Result<(), OperatorError> {
    if rhs.nrows() != n {
        return Err(OperatorError::DimensionMismatch { expected: n, found: rhs.nrows() });
    }
    Ok(())
}

/// LU of a dense complex matrix together with a singularity verdict.
fn dense_lu(m: CMat, sigma: C64, tau: C64) -> Result<LU<C64, Dyn, Dyn>, OperatorError> {
    let n = m.nrows();
    let lu = m.lu();
    let u = lu.u();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    for i in 0..n {
        let d = u[(i, i)].norm();
        lo = lo.min(d);
        hi = hi.max(d);
    }
    if n > 0 && !(lo > hi * f64::EPSILON * n as f64) {
        return Err(OperatorError::Singular { sigma, tau });
    }
    Ok(lu)
}

/// Dense real matrix.
pub struct DenseOperator {
    a: RMat,
    a_c: CMat,
    cache: FactorCache<LU<C64, Dyn, Dyn>>,
}

impl std::fmt::Debug for DenseOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DenseOperator").field("n", &self.a.nrows()).finish()
    }
}

impl DenseOperator {
    pub fn new(a: RMat) -> Result<Self, OperatorError> {
        if a.nrows() != a.ncols() {
            return Err(OperatorError::NotSquare(a.nrows(), a.ncols()));
        }
        let a_c = linalg::to_complex(&a);
        Ok(Self { a, a_c, cache: FactorCache::new() })
    }

    pub fn matrix(&self) -> &RMat {
        &self.a
    }

    /// Number of cached factorizations.
    pub fn cached_factorizations(&self) -> usize {
        self.cache.len()
    }
}

impl Operator for DenseOperator {
    fn dim(&self) -> usize {
        self.a.nrows()
    }

    fn apply(&self, x: &CMat) -> CMat {
        &self.a_c * x
    }

    fn apply_transpose(&self, x: &CMat) -> CMat {
        self.a_c.transpose() * x
    }

    fn solve_combination(&self, sigma: C64, tau: C64, transpose: bool, rhs: &CMat) -> Result<CMat, OperatorError> {
        let n = self.dim();
        check_rows(n, rhs)?;
        let key = FactorKey { sigma, tau, transpose };
        let lu = self.cache.get_or_insert(key, || {
            let base = if transpose { self.a_c.transpose() } else { self.a_c.clone() };
            let m = base.map(|x| x * tau) + CMat::identity(n, n).map(|x| x * sigma);
            dense_lu(m, sigma, tau)
        })?;
        if rhs.ncols() == 0 {
            return Ok(rhs.clone());
        }
        lu.solve(rhs).ok_or(OperatorError::Singular { sigma, tau })
    }

    fn frobenius_norm(&self) -> f64 {
        linalg::frobenius_real(&self.a)
    }

    fn to_dense(&self) -> Option<RMat> {
        Some(self.a.clone())
    }
}

/// Compressed sparse row storage of a real square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by_key(|a| (a.0, a.1));
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::with_capacity(sorted.len());
        let mut vals: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in sorted {
            assert!(i < n && j < n, "triplet ({i}, {j}) outside {n}x{n}");
            if last == Some((i, j)) {
                *vals.last_mut().expect("duplicate follows an entry") += v;
                continue;
            }
            cols.push(j);
            vals.push(v);
            row_ptr[i + 1] += 1;
            last = Some((i, j));
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn from_dense(a: &RMat) -> Self {
        let mut t = Vec::new();
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                if a[(i, j)] != 0.0 {
                    t.push((i, j, a[(i, j)]));
                }
            }
        }
        Self::from_triplets(a.nrows(), &t)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n)
            .flat_map(move |i| (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.cols[k], self.vals[k])))
    }

    pub fn to_dense(&self) -> RMat {
        let mut a = RMat::zeros(self.n, self.n);
        for (i, j, v) in self.triplets() {
            a[(i, j)] += v;
        }
        a
    }

    /// Lower and upper bandwidth.
    pub fn bandwidths(&self) -> (usize, usize) {
        self.triplets().fold(
            (0, 0),
            |(kl, ku), (i, j, _)| {
                if i > j {
                    (kl.max(i - j), ku)
                } else {
                    (kl, ku.max(j - i))
                }
            },
        )
    }

    fn mul(&self, x: &CMat, transpose: bool) -> CMat {
        let mut y = CMat::zeros(self.n, x.ncols());
        for (i, j, v) in self.triplets() {
            let (r, s) = if transpose { (j, i) } else { (i, j) };
            for c in 0..x.ncols() {
                y[(r, c)] += x[(s, c)] * v;
            }
        }
        y
    }
}

/// Banded LU with partial pivoting.
///
/// Row `i` stores columns `i − kl ..= i + kl + ku`; pivoting only ever moves rows
/// within `kl` of each other, so each active row can hold the fill.
struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<C64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    fn slot(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    fn get(&self, i: usize, j: usize) -> C64 {
        self.data[self.slot(i, j)]
    }

    fn factor(
        n: usize,
        kl: usize,
        ku: usize,
        entries: impl Iterator<Item = (usize, usize, C64)>,
        sigma: C64,
        tau: C64,
    ) -> Result<Self, OperatorError> {
        let width = 2 * kl + ku + 1;
        let mut lu = Self { n, kl, ku, width, data: vec![C64::new(0.0, 0.0); n * width], pivots: vec![0; n] };
        for (i, j, v) in entries {
            let s = lu.slot(i, j);
            lu.data[s] += v;
        }
        let scale = lu.data.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
        let upper = kl + ku;
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let p = (k..=last_row)
                .max_by(|&a, &b| lu.get(a, k).norm().partial_cmp(&lu.get(b, k).norm()).expect("finite entries"))
                .expect("non-empty pivot range");
            if !(lu.get(p, k).norm() > scale * f64::EPSILON * n as f64) {
                return Err(OperatorError::Singular { sigma, tau });
            }
            lu.pivots[k] = p;
            let last_col = (k + upper).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let (a, b) = (lu.slot(k, j), lu.slot(p, j));
                    lu.data.swap(a, b);
                }
            }
            let pivot = lu.get(k, k);
            for i in (k + 1)..=last_row {
                let si = lu.slot(i, k);
                let m = lu.data[si] / pivot;
                lu.data[si] = m;
                if m == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in (k + 1)..=last_col {
                    let u = lu.get(k, j);
                    let s = lu.slot(i, j);
                    lu.data[s] -= m * u;
                }
            }
        }
        Ok(lu)
    }

    fn solve(&self, rhs: &CMat) -> CMat {
        let n = self.n;
        let mut x = rhs.clone();
        for c in 0..x.ncols() {
            for k in 0..n {
                let p = self.pivots[k];
                if p != k {
                    x.swap((k, c), (p, c));
                }
                let xk = x[(k, c)];
                for i in (k + 1)..=(k + self.kl).min(n - 1) {
                    x[(i, c)] -= self.get(i, k) * xk;
                }
            }
            for k in (0..n).rev() {
                let mut s = x[(k, c)];
                for j in (k + 1)..=(k + self.kl + self.ku).min(n - 1) {
                    s -= self.get(k, j) * x[(j, c)];
                }
                x[(k, c)] = s / self.get(k, k);
            }
        }
        x
    }
}

enum SparseFactor {
    Banded(BandedLu),
    Dense(LU<C64, Dyn, Dyn>),
}

/// Sparse real matrix. Shifted solves use a banded LU when the bandwidth is small
/// relative to `n`, and a dense LU otherwise.
pub struct SparseOperator {
    csr: CsrMatrix,
    csr_t: CsrMatrix,
    cache: FactorCache<SparseFactor>,
}

impl std::fmt::Debug for SparseOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SparseOperator").field("n", &self.csr.n).field("nnz", &self.csr.nnz()).finish()
    }
}

impl SparseOperator {
    pub fn new(csr: CsrMatrix) -> Self {
        let t: Vec<(usize, usize, f64)> = csr.triplets().map(|(i, j, v)| (j, i, v)).collect();
        let csr_t = CsrMatrix::from_triplets(csr.n, &t);
        Self { csr, csr_t, cache: FactorCache::new() }
    }

    pub fn csr(&self) -> &CsrMatrix {
        &self.csr
    }

    pub fn cached_factorizations(&self) -> usize {
        self.cache.len()
    }

    fn factorize(&self, sigma: C64, tau: C64, transpose: bool) -> Result<SparseFactor, OperatorError> {
        let n = self.csr.n;
        let m = if transpose { &self.csr_t } else { &self.csr };
        let (kl, ku) = m.bandwidths();
        let entries = m.triplets().map(move |(i, j, v)| (i, j, tau * v)).chain((0..n).map(move |i| (i, i, sigma)));
        if 4 * (2 * kl + ku + 1) <= n {
            BandedLu::factor(n, kl, ku, entries, sigma, tau).map(SparseFactor::Banded)
        } else {
            let mut d = CMat::zeros(n, n);
            for (i, j, v) in entries {
                d[(i, j)] += v;
            }
            dense_lu(d, sigma, tau).map(SparseFactor::Dense)
        }
    }
}

impl Operator for SparseOperator {
    fn dim(&self) -> usize {
        self.csr.n
    }

    fn apply(&self, x: &CMat) -> CMat {
        self.csr.mul(x, false)
    }

    fn apply_transpose(&self, x: &CMat) -> CMat {
        self.csr.mul(x, true)
    }

    fn solve_combination(&self, sigma: C64, tau: C64, transpose: bool, rhs: &CMat) -> Result<CMat, OperatorError> {
        check_rows(self.csr.n, rhs)?;
        let key = FactorKey { sigma, tau, transpose };
        let f = self.cache.get_or_insert(key, || self.factorize(sigma, tau, transpose))?;
        if rhs.ncols() == 0 {
            return Ok(rhs.clone());
        }
        match &*f {
            SparseFactor::Banded(lu) => Ok(lu.solve(rhs)),
            SparseFactor::Dense(lu) => lu.solve(rhs).ok_or(OperatorError::Singular { sigma, tau }),
        }
    }

    fn frobenius_norm(&self) -> f64 {
        self.csr.vals.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn to_dense(&self) -> Option<RMat> {
        Some(self.csr.to_dense())
    }
}

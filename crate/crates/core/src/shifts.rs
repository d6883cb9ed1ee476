//! Shift parameters for the one-stage iterations.
//!
//! Shifts `μ ∈ ℂ₊` relate to eigenvalues through `μ = −1/conj(λ)`, which places a zero
//! of the stability function `(1 + conj(μ) z)/(1 − μ z)` at `z = λ`.

use std::cmp::Ordering;

use log::debug;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::linalg::{self, CMat, RMat, C64};
use crate::operator::{Operator, OperatorError};

#[derive(Debug, Error)]
pub enum ShiftError {
    #[error("matrix is not stable: eigenvalue {0} has nonnegative real part")]
    UnstableMatrix(C64),
    #[error("no stable Ritz values found")]
    NoCandidates,
    #[error("solve with A failed: {0}")]
    Solve(#[from] OperatorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftSource {
    ExactEigen,
    Heuristic,
    User,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftSet {
    pub values: Vec<C64>,
    pub proper: bool,
    pub source: ShiftSource,
    /// An Arnoldi run stopped early on an invariant subspace.
    pub arnoldi_breakdown: bool,
}

impl ShiftSet {
    pub fn user(values: Vec<C64>) -> Self {
        let proper = is_proper(&values);
        Self { values, proper, source: ShiftSource::User, arnoldi_breakdown: false }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// ADI shifts `α = −1/μ`.
    pub fn adi_shifts(&self) -> Vec<C64> {
        self.values.iter().map(|m| -m.inv()).collect()
    }
}

/// Every non-real value has its conjugate immediately before or after it, pairs do
/// not overlap.
pub fn is_proper(values: &[C64]) -> bool {
    let mut i = 0;
    while i < values.len() {
        if values[i].im == 0.0 {
            i += 1;
        } else if values.get(i + 1) == Some(&values[i].conj()) {
            i += 2;
        } else {
            return false;
        }
    }
    true
}

pub fn shift_for_eigenvalue(lambda: C64) -> C64 {
    -lambda.conj().inv()
}

fn order_key(a: &C64, b: &C64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.abs().total_cmp(&b.im.abs()))
}

/// Completes conjugates and orders the result deterministically: ascending real part,
/// then ascending `|Im|`, with the `Im > 0` member of each pair first.
pub fn make_proper(values: &[C64]) -> ShiftSet {
    let mut reals: Vec<C64> = Vec::new();
    // (upper member, count of Im>0, count of Im<0)
    let mut groups: Vec<(C64, usize, usize)> = Vec::new();
    for &v in values {
        if v.im == 0.0 {
            reals.push(C64::new(v.re, 0.0));
            continue;
        }
        let upper = C64::new(v.re, v.im.abs());
        let idx = match groups.iter().position(|(u, _, _)| *u == upper) {
            Some(i) => i,
            None => {
                groups.push((upper, 0, 0));
                groups.len() - 1
            }
        };
        if v.im > 0.0 {
            groups[idx].1 += 1;
        } else {
            groups[idx].2 += 1;
        }
    }
    // Units: a real value or a conjugate pair, keyed by the upper member.
    let mut units: Vec<(C64, bool)> = reals.into_iter().map(|r| (r, false)).collect();
    for (u, pos, neg) in groups {
        for _ in 0..pos.max(neg) {
            units.push((u, true));
        }
    }
    units.sort_by(|a, b| order_key(&a.0, &b.0));
    let mut out = Vec::with_capacity(2 * units.len());
    for (u, pair) in units {
        out.push(u);
        if pair {
            out.push(u.conj());
        }
    }
    ShiftSet { values: out, proper: true, source: ShiftSource::User, arnoldi_breakdown: false }
}

/// `μ_j = −1/conj(λ_j)` for `count` eigenvalues of a stable `A`, in proper order.
///
/// When `count` is smaller than `n`, eigenvalues are taken in the proper order of their
/// shifts; a cut through a conjugate pair leaves the set improper.
pub fn eig_shifts(a: &RMat, count: usize) -> Result<ShiftSet, ShiftError> {
    let eig = linalg::eigenvalues_real(a);
    if let Some(l) = eig.iter().find(|l| !(l.re < 0.0)) {
        return Err(ShiftError::UnstableMatrix(*l));
    }
    let mus: Vec<C64> = eig.iter().map(|&l| shift_for_eigenvalue(l)).collect();
    let mut set = make_proper(&snap_pairs(&mus));
    set.values.truncate(count);
    set.proper = is_proper(&set.values);
    set.source = ShiftSource::ExactEigen;
    Ok(set)
}

/// Makes numerically conjugate values exactly conjugate so that pairing is reliable.
fn snap_pairs(values: &[C64]) -> Vec<C64> {
    let mut out = values.to_vec();
    let mut used = vec![false; out.len()];
    for i in 0..out.len() {
        if used[i] || out[i].im == 0.0 {
            continue;
        }
        let target = out[i].conj();
        let best = (i + 1..out.len())
            .filter(|&j| !used[j] && out[j].im * out[i].im < 0.0)
            .min_by(|&p, &q| (out[p] - target).norm().total_cmp(&(out[q] - target).norm()));
        if let Some(j) = best {
            if (out[j] - target).norm() <= 1e-10 * out[i].norm() {
                out[j] = target;
                used[i] = true;
                used[j] = true;
            }
        }
    }
    out
}

/// Ritz values from `k` Arnoldi steps with the map `apply`, and whether it broke down.
pub fn arnoldi_ritz(
    n: usize,
    k: usize,
    start: &CMat,
    mut apply: impl FnMut(&CMat) -> Result<CMat, OperatorError>,
) -> Result<(Vec<C64>, bool), OperatorError> {
    let k = k.min(n);
    if k == 0 {
        return Ok((Vec::new(), false));
    }
    let mut v = CMat::zeros(n, k + 1);
    let mut h = CMat::zeros(k + 1, k);
    let nrm = linalg::frobenius(start);
    v.set_column(0, &(start.column(0) / C64::new(nrm, 0.0)));
    let mut steps = k;
    let mut breakdown = false;
    for j in 0..k {
        let mut w = apply(&v.columns(j, 1).into_owned())?;
        let wnorm0 = linalg::frobenius(&w);
        for _ in 0..2 {
            for i in 0..=j {
                let vi = v.column(i);
                let coef = vi.dotc(&w.column(0));
                h[(i, j)] += coef;
                w.column_mut(0).axpy(-coef, &vi, C64::new(1.0, 0.0));
            }
        }
        let beta = linalg::frobenius(&w);
        h[(j + 1, j)] = C64::new(beta, 0.0);
        if beta <= 1e-12 * wnorm0.max(f64::MIN_POSITIVE) {
            steps = j + 1;
            breakdown = j + 1 < k;
            break;
        }
        v.set_column(j + 1, &(w.column(0) / C64::new(beta, 0.0)));
    }
    let hk = h.view((0, 0), (steps, steps)).into_owned();
    let (vals, _) = linalg::eig(&hk);
    Ok((vals, breakdown))
}

/// `∏ |1 + conj(μ) λ| / |1 − μ λ|`.
fn rational_modulus(mus: &[C64], lambda: C64) -> f64 {
    let one = C64::new(1.0, 0.0);
    mus.iter().map(|mu| ((one + mu.conj() * lambda) / (one - mu * lambda)).norm()).product()
}

/// Candidate (a conjugate pair for complex values) minimizing the largest sampled value
/// of the product after it is added; ties go to the smallest `|μ|`.
fn min_max_candidate(candidates: &[C64], sample: &[C64], current: &[f64], room: usize) -> Option<C64> {
    let mut best: Option<(f64, C64)> = None;
    for &mu in candidates {
        let set: &[C64] = if mu.im != 0.0 { &[mu, mu.conj()] } else { &[mu] };
        if set.len() > room {
            continue;
        }
        let worst = sample.iter().zip(current).map(|(l, f)| f * rational_modulus(set, *l)).fold(0.0_f64, f64::max);
        // Candidates are sorted by |μ|, so strict improvement keeps the smallest on ties.
        if best.is_none_or(|(w, _)| worst < w) {
            best = Some((worst, mu));
        }
    }
    best.map(|(_, mu)| mu)
}

/// Greedy heuristic: Ritz values of `A` and `A⁻¹` (`k_arnoldi` each) form the sample
/// set and, through `μ = −1/conj(λ)`, the candidate set. The first shift minimizes the
/// largest sampled value of `∏ |1 + conj(μ) λ| / |1 − μ λ|`; every further shift is the
/// candidate of the sampled point where the product is currently largest. Complex
/// candidates enter as conjugate pairs. Once all sampled points are annihilated the
/// chosen shifts are reused in order.
pub fn heuristic_shifts(op: &dyn Operator, k_arnoldi: usize, count: usize) -> Result<ShiftSet, ShiftError> {
    let n = op.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e_ed0f_5417);
    let start = CMat::from_fn(n, 1, |_, _| C64::new(rng.gen_range(-1.0..1.0), 0.0));
    let (ritz_a, br_a) = arnoldi_ritz(n, k_arnoldi, &start, |x| Ok(op.apply(x)))?;
    let (ritz_inv, br_inv) = arnoldi_ritz(n, k_arnoldi, &start, |x| op.solve(x))?;
    let mut sample: Vec<C64> = ritz_a;
    sample.extend(ritz_inv.iter().filter(|t| t.norm() > 0.0).map(|t| t.inv()));
    sample.retain(|l| l.re < 0.0 && l.is_finite());
    if sample.is_empty() {
        return Err(ShiftError::NoCandidates);
    }
    // Ritz values of a real matrix come in conjugate pairs up to roundoff.
    for l in sample.iter_mut() {
        if l.im.abs() <= 1e-10 * l.norm() {
            l.im = 0.0;
        }
    }
    let candidate_of = |l: &C64| {
        let mu = shift_for_eigenvalue(*l);
        C64::new(mu.re, mu.im.abs())
    };
    let mut candidates: Vec<C64> = Vec::new();
    for l in &sample {
        let mu = candidate_of(l);
        if !candidates.iter().any(|c| (c - mu).norm() <= 1e-12 * mu.norm()) {
            candidates.push(mu);
        }
    }
    candidates.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let members = |mu: C64| if mu.im != 0.0 { vec![mu, mu.conj()] } else { vec![mu] };

    let mut chosen: Vec<C64> = Vec::with_capacity(count);
    let mut current: Vec<f64> = vec![1.0; sample.len()];
    let mut cycle = 0;
    while chosen.len() < count {
        let room = count - chosen.len();
        // Worst sampled point of the current product; its own shift removes it.
        let worst_point = sample.iter().zip(&current).filter(|(_, f)| **f > 0.0).max_by(|(la, fa), (lb, fb)| {
            fa.total_cmp(fb).then(candidate_of(lb).norm().total_cmp(&candidate_of(la).norm()))
        });
        let mu = match worst_point {
            Some((l, _)) if !chosen.is_empty() && (candidate_of(l).im == 0.0 || room >= 2) => candidate_of(l),
            Some(_) => match min_max_candidate(&candidates, &sample, &current, room) {
                Some(mu) => mu,
                None => break,
            },
            // Every sampled point is annihilated: reuse the shifts chosen so far.
            None => {
                let mu = loop {
                    let v = chosen[cycle % chosen.len()];
                    cycle += 1;
                    if v.im >= 0.0 {
                        break v;
                    }
                };
                if mu.im != 0.0 && room < 2 {
                    match candidates.iter().find(|c| c.im == 0.0) {
                        Some(r) => *r,
                        None => break,
                    }
                } else {
                    mu
                }
            }
        };
        let set = members(mu);
        for (f, l) in current.iter_mut().zip(&sample) {
            *f *= rational_modulus(&set, *l);
        }
        debug!("heuristic shift {mu}");
        chosen.extend(set);
    }
    Ok(ShiftSet {
        proper: is_proper(&chosen),
        values: chosen,
        source: ShiftSource::Heuristic,
        arnoldi_breakdown: br_a || br_inv,
    })
}

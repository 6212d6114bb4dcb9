//! The majorization preorder on real vectors and numerical probes of
//! Schur-convexity.
//!
//! `u` majorizes `v` (`u ≽ v`) when, after sorting both in descending order,
//! every prefix sum of `u` is at least the matching prefix sum of `v` and the
//! totals agree. This is the usual direction: the more spread-out vector
//! majorizes, and the constant vector with the same total is majorized by
//! everything.

use rand::Rng;

use crate::error::{ensure_finite, Error, Result};
use crate::numeric::{compensated_sum, CompensatedSum};

const PREFIX_SLACK: f64 = 1e-12;
const TOTAL_SLACK: f64 = 1e-9;
const SCHUR_SLACK: f64 = 1e-7;
const SYMMETRY_SLACK: f64 = 1e-10;

/// Finite, non-empty real vector with a cached descending rearrangement.
#[derive(Debug, Clone, PartialEq)]
pub struct RealVector {
    values: Vec<f64>,
    sorted_desc: Vec<f64>,
}

impl RealVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Usage("vector must have at least one entry".into()));
        }
        for (i, &v) in values.iter().enumerate() {
            ensure_finite(&format!("entry {i}"), v)?;
        }
        let mut sorted_desc = values.clone();
        sorted_desc.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { values, sorted_desc })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sorted_desc(&self) -> &[f64] {
        &self.sorted_desc
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total(&self) -> f64 {
        compensated_sum(self.values.iter().copied())
    }

    /// The constant vector with the same total.
    pub fn mean_vector(&self) -> Self {
        let m = self.total() / self.len() as f64;
        Self::new(vec![m; self.len()]).expect("mean of finite entries is finite")
    }

    fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }
}

impl TryFrom<Vec<f64>> for RealVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

/// Why a majorization check came out the way it did.
#[derive(Debug, Clone, PartialEq)]
pub enum MajorizationCheck {
    Majorizes,
    TotalsDiffer {
        total_u: f64,
        total_v: f64,
    },
    /// The `k`-th prefix sum of `u` (1-based) falls short of that of `v`.
    PrefixFails {
        k: usize,
        prefix_u: f64,
        prefix_v: f64,
    },
}

impl MajorizationCheck {
    pub fn holds(&self) -> bool {
        matches!(self, MajorizationCheck::Majorizes)
    }
}

/// Diagnostic form of [`majorizes`].
pub fn majorization_check(u: &RealVector, v: &RealVector) -> Result<MajorizationCheck> {
    if u.len() != v.len() {
        return Err(Error::Usage(format!("vectors must have equal length, got {} and {}", u.len(), v.len())));
    }
    let scale = 1.0 + u.max_abs().max(v.max_abs());
    let (total_u, total_v) = (u.total(), v.total());
    if (total_u - total_v).abs() > TOTAL_SLACK * scale * u.len() as f64 {
        return Ok(MajorizationCheck::TotalsDiffer { total_u, total_v });
    }
    let mut pu = CompensatedSum::new();
    let mut pv = CompensatedSum::new();
    for (k, (&a, &b)) in u.sorted_desc.iter().zip(&v.sorted_desc).enumerate().take(u.len() - 1) {
        pu.add(a);
        pv.add(b);
        if pu.value() < pv.value() - PREFIX_SLACK * scale * (k + 1) as f64 {
            return Ok(MajorizationCheck::PrefixFails { k: k + 1, prefix_u: pu.value(), prefix_v: pv.value() });
        }
    }
    Ok(MajorizationCheck::Majorizes)
}

/// `u ≽ v` in the majorization order.
pub fn majorizes(u: &RealVector, v: &RealVector) -> Result<bool> {
    Ok(majorization_check(u, v)?.holds())
}

/// A pair `(u, v)` with `u ≽ v`, `u ≠ v` and equal totals.
///
/// `v` is drawn uniformly from `range`; `u` is obtained from `v` by between
/// one and `n` transfers, each moving `δ` from a coordinate to another one
/// that is at least as large. `δ` is uniform on `(0, spread·gap]`, with `gap`
/// the room left before either coordinate would leave `range`.
pub fn random_majorization_pair<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    spread: f64,
    range: (f64, f64),
) -> Result<(RealVector, RealVector)> {
    if n < 2 {
        return Err(Error::Usage(format!("need at least two coordinates, got {n}")));
    }
    if !(spread > 0.0 && spread <= 1.0) {
        return Err(Error::Domain(format!("spread must lie in (0, 1], got {spread}")));
    }
    let (lo, hi) = range;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Domain(format!("invalid range [{lo}, {hi}]")));
    }
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(lo..hi)).collect();
        let mut u = v.clone();
        let transfers = rng.random_range(1..=n);
        let mut done = 0;
        let mut attempts = 0;
        while done < transfers && attempts < 64 * n {
            attempts += 1;
            let i = rng.random_range(0..n);
            let j = rng.random_range(0..n);
            if i == j {
                continue;
            }
            // Recipient is the larger coordinate.
            let (r, d) = if u[i] >= u[j] { (i, j) } else { (j, i) };
            let gap = (hi - u[r]).min(u[d] - lo);
            if gap <= 0.0 {
                continue;
            }
            let delta = spread * gap * (1.0 - rng.random::<f64>());
            u[r] += delta;
            u[d] -= delta;
            done += 1;
        }
        if done == 0 || u == v {
            continue;
        }
        return Ok((RealVector::new(u)?, RealVector::new(v)?));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchurMode {
    Convex,
    Concave,
}

/// Outcome of Marshall's criterion at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurReport {
    pub holds: bool,
    /// Most adverse value of `±(z_i − z_j)(∂_i f − ∂_j f)` over all pairs.
    pub worst: f64,
    pub worst_pair: Option<(usize, usize)>,
    pub slack: f64,
}

/// Marshall's criterion with central-difference partials.
///
/// `f` must be symmetric; this is spot-checked by swapping the largest and
/// smallest coordinates, and an asymmetric `f` is a usage error.
pub fn schur_report<F: Fn(&[f64]) -> f64>(f: F, z: &RealVector, mode: SchurMode) -> Result<SchurReport> {
    let point = z.values();
    let n = point.len();
    let f0 = f(point);
    if !f0.is_finite() {
        return Err(Error::Numeric(format!("f is not finite at the probe point: {f0}")));
    }
    let argmax = (0..n).max_by(|&a, &b| point[a].total_cmp(&point[b])).unwrap_or(0);
    let argmin = (0..n).min_by(|&a, &b| point[a].total_cmp(&point[b])).unwrap_or(0);
    if argmax != argmin {
        let mut swapped = point.to_vec();
        swapped.swap(argmax, argmin);
        let fs = f(&swapped);
        if !fs.is_finite() {
            return Err(Error::Numeric(format!("f is not finite at a transposed point: {fs}")));
        }
        if (fs - f0).abs() > SYMMETRY_SLACK * f0.abs().max(1.0) {
            return Err(Error::Usage(format!("f is not symmetric: f(z) = {f0}, f(swapped z) = {fs}")));
        }
    }
    let mut grad = Vec::with_capacity(n);
    let mut probe = point.to_vec();
    for i in 0..n {
        let h = 1e-6 * point[i].abs().max(1.0);
        probe[i] = point[i] + h;
        let up = f(&probe);
        probe[i] = point[i] - h;
        let down = f(&probe);
        probe[i] = point[i];
        if !(up.is_finite() && down.is_finite()) {
            return Err(Error::Numeric(format!("f is not finite near coordinate {i}")));
        }
        grad.push((up - down) / (2.0 * h));
    }
    let sign = match mode {
        SchurMode::Convex => 1.0,
        SchurMode::Concave => -1.0,
    };
    let slack = SCHUR_SLACK * f0.abs().max(1.0);
    let mut worst = f64::INFINITY;
    let mut worst_pair = None;
    for i in 0..n {
        for j in (i + 1)..n {
            let value = sign * (point[i] - point[j]) * (grad[i] - grad[j]);
            if value < worst {
                worst = value;
                worst_pair = Some((i, j));
            }
        }
    }
    if n == 1 {
        worst = 0.0;
    }
    Ok(SchurReport { holds: worst >= -slack, worst, worst_pair, slack })
}

pub fn schur_test<F: Fn(&[f64]) -> f64>(f: F, z: &RealVector, mode: SchurMode) -> Result<bool> {
    Ok(schur_report(f, z, mode)?.holds)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhiLemmaReport {
    pub convex: bool,
    pub decreasing: bool,
    /// Smallest normalised second difference over interior points.
    pub min_second_difference: f64,
    /// Largest first difference.
    pub max_first_difference: f64,
}

/// Checks convexity and monotone decrease of `φ(t) = t/(eᵗ − 1)` on a grid.
///
/// On non-uniform grids the second difference at `t_i` is
/// `(h₁φ_{i+1} + h₂φ_{i−1} − (h₁+h₂)φ_i) / ((h₁+h₂)/2)`, which reduces to
/// `φ_{i+1} − 2φ_i + φ_{i−1}` for equal spacing.
pub fn check_lemma_phi(t_grid: &[f64]) -> Result<PhiLemmaReport> {
    if t_grid.len() < 3 {
        return Err(Error::Usage("need at least three grid points".into()));
    }
    if t_grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Usage("grid must be positive and strictly increasing".into()));
    }
    let values: Vec<f64> = t_grid.iter().map(|&t| crate::gumbel::phi_raw(t)).collect();
    let max_first_difference = values.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let mut min_second_difference = f64::INFINITY;
    for i in 1..t_grid.len() - 1 {
        let h1 = t_grid[i] - t_grid[i - 1];
        let h2 = t_grid[i + 1] - t_grid[i];
        let d2 = (h1 * values[i + 1] + h2 * values[i - 1] - (h1 + h2) * values[i]) / (0.5 * (h1 + h2));
        min_second_difference = min_second_difference.min(d2);
    }
    Ok(PhiLemmaReport {
        convex: min_second_difference >= -1e-9,
        decreasing: max_first_difference <= 1e-12,
        min_second_difference,
        max_first_difference,
    })
}

/// For `u ≽ v` and convex `γ`, checks `Σγ(u_i) ≥ Σγ(v_i)` up to `1e−9·scale`.
pub fn check_lemma_sum_convex<G: Fn(f64) -> f64>(gamma: G, u: &RealVector, v: &RealVector) -> Result<bool> {
    match majorization_check(u, v)? {
        MajorizationCheck::Majorizes => {}
        other => {
            return Err(Error::Usage(format!("u must majorize v: {other:?}")));
        }
    }
    let hu = compensated_sum(u.values().iter().map(|&x| gamma(x)));
    let hv = compensated_sum(v.values().iter().map(|&x| gamma(x)));
    if !(hu.is_finite() && hv.is_finite()) {
        return Err(Error::Numeric("gamma produced a non-finite value".into()));
    }
    let scale = hu.abs().max(hv.abs()).max(1.0);
    Ok(hu >= hv - 1e-9 * scale)
}

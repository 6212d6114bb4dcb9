//! Lifetime algebra of series (`X_{1:n}`, the minimum) and parallel
//! (`X_{n:n}`, the maximum) systems of independent `Gum(μ_i, σ)` components.
//!
//! With a shared scale the parallel system is again Gumbel: writing
//! `S(x) = Σ e^{−(x−μ_i)/σ}`, `F = e^{−S}` and `r̃ = S/σ`. `ln S` is kept in
//! log-sum-exp form with the x-independent part precomputed, so every
//! parallel quantity costs one exponential. Series quantities are sums over
//! components of `ln F̄_i` and of `φ(e^{−z_i})`.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_open_unit, Error, Result};
use crate::gumbel::{log_phi_raw, phi_raw, std_log_cdf, std_log_density, std_log_survival, GumbelParams};
use crate::numeric::{bisect, compensated_sum, log1mexp, log_sum_exp, CompensatedSum};

pub const DEFAULT_MAX_COMPONENTS: usize = 64;
pub const DEFAULT_TAIL_MASS: f64 = 1e-8;
pub const MIN_GRID_POINTS: usize = 33;

/// A continuous lifetime law evaluated at finite abscissae.
///
/// Methods take `x` as given; callers validate finiteness. The log forms are
/// primary and never underflow before the true value does.
pub trait Lifetime {
    fn log_cdf(&self, x: f64) -> f64;
    fn log_survival(&self, x: f64) -> f64;
    fn log_pdf(&self, x: f64) -> f64;

    fn cdf(&self, x: f64) -> f64 {
        self.log_cdf(x).exp()
    }
    fn survival(&self, x: f64) -> f64 {
        self.log_survival(x).exp()
    }
    fn pdf(&self, x: f64) -> f64 {
        self.log_pdf(x).exp()
    }
    fn hazard(&self, x: f64) -> f64 {
        (self.log_pdf(x) - self.log_survival(x)).exp()
    }
    fn reversed_hazard(&self, x: f64) -> f64 {
        (self.log_pdf(x) - self.log_cdf(x)).exp()
    }

    /// The `x` with `F(x) = prob`.
    fn quantile(&self, prob: f64) -> Result<f64>;

    /// The `x` with `F̄(x) = tail`; exact for tails far below `f64::EPSILON`.
    fn upper_quantile(&self, tail: f64) -> Result<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Series,
    Parallel,
}

impl std::fmt::Display for Topology {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Topology::Series => f.write_str("series"),
            Topology::Parallel => f.write_str("parallel"),
        }
    }
}

/// `n` independent Gumbel components sharing one scale.
///
/// Locations are stored in canonical (descending) order, so every value is
/// a function of the multiset of locations only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemModel {
    topology: Topology,
    mus: Vec<f64>,
    sigma: f64,
    /// `ln Σ exp((μ_i − μ_max)/σ)`.
    #[serde(skip)]
    log_weight: f64,
}

impl SystemModel {
    pub fn new(topology: Topology, mus: Vec<f64>, sigma: f64) -> Result<Self> {
        Self::with_max_components(topology, mus, sigma, DEFAULT_MAX_COMPONENTS)
    }

    pub fn with_max_components(
        topology: Topology,
        mut mus: Vec<f64>,
        sigma: f64,
        max_components: usize,
    ) -> Result<Self> {
        if mus.is_empty() {
            return Err(Error::Usage("a system needs at least one component".into()));
        }
        if mus.len() > max_components {
            return Err(Error::Usage(format!("{} components exceed the limit of {max_components}", mus.len())));
        }
        for (i, &mu) in mus.iter().enumerate() {
            ensure_finite(&format!("mu[{i}]"), mu)?;
        }
        ensure_finite("sigma", sigma)?;
        if sigma <= 0.0 {
            return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
        }
        mus.sort_by(|a, b| b.total_cmp(a));
        let lead = mus[0];
        let log_weight = compensated_sum(mus.iter().map(|&m| ((m - lead) / sigma).exp())).ln();
        Ok(Self { topology, mus, sigma, log_weight })
    }

    pub fn series(mus: Vec<f64>, sigma: f64) -> Result<Self> {
        Self::new(Topology::Series, mus, sigma)
    }

    pub fn parallel(mus: Vec<f64>, sigma: f64) -> Result<Self> {
        Self::new(Topology::Parallel, mus, sigma)
    }

    /// Builds a system from per-component parameters; mixed scales are rejected.
    pub fn from_components(topology: Topology, components: &[GumbelParams]) -> Result<Self> {
        let sigma =
            components.first().ok_or_else(|| Error::Usage("a system needs at least one component".into()))?.sigma();
        if let Some(c) = components.iter().find(|c| c.sigma() != sigma) {
            return Err(Error::Usage(format!("components must share one scale: found {} and {sigma}", c.sigma())));
        }
        Self::new(topology, components.iter().map(|c| c.mu()).collect(), sigma)
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    /// Locations in descending order.
    pub fn mus(&self) -> &[f64] {
        &self.mus
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn n(&self) -> usize {
        self.mus.len()
    }

    pub fn components(&self) -> Vec<GumbelParams> {
        self.mus.iter().map(|&m| GumbelParams::new(m, self.sigma).expect("validated at construction")).collect()
    }

    /// Same system with every location moved by `c`.
    pub fn shifted(&self, c: f64) -> Result<Self> {
        Self::new(self.topology, self.mus.iter().map(|m| m + c).collect(), self.sigma)
    }

    pub fn with_topology(&self, topology: Topology) -> Self {
        Self { topology, ..self.clone() }
    }

    /// `ln Σ e^{−(x−μ_i)/σ}`.
    #[inline]
    fn log_intensity(&self, x: f64) -> f64 {
        (self.mus[0] - x) / self.sigma + self.log_weight
    }

    fn series_log_survival(&self, x: f64) -> f64 {
        let mut acc = CompensatedSum::new();
        for &m in &self.mus {
            acc.add(std_log_survival((x - m) / self.sigma));
        }
        acc.value()
    }

    fn series_hazard_raw(&self, x: f64) -> f64 {
        let mut acc = CompensatedSum::new();
        for &m in &self.mus {
            acc.add(phi_raw((-(x - m) / self.sigma).exp()));
        }
        acc.value() / self.sigma
    }

    fn series_log_hazard(&self, x: f64) -> f64 {
        let h = self.series_hazard_raw(x);
        if h > 1e-280 {
            return h.ln();
        }
        // Deep lower tail: every φ(t_i) ≈ t_i e^{−t_i} has underflowed.
        let terms: Vec<f64> = self.mus.iter().map(|&m| log_phi_raw((-(x - m) / self.sigma).exp())).collect();
        log_sum_exp(&terms) - self.sigma.ln()
    }

    fn solve_quantile(&self, log_target: f64, upper: bool) -> Result<f64> {
        // reached(x) is monotone in x: false below the answer, true above it.
        let reached = |x: f64| {
            if upper {
                self.log_survival(x) <= log_target
            } else {
                self.log_cdf(x) >= log_target
            }
        };
        let target = log_target.exp();
        let component = |m: f64| {
            let g = GumbelParams::new(m, self.sigma).expect("validated at construction");
            if upper {
                g.upper_quantile(target.clamp(f64::MIN_POSITIVE, 0.5))
            } else {
                g.quantile(target.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON))
            }
        };
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &m in &self.mus {
            let q = component(m)?;
            lo = lo.min(q);
            hi = hi.max(q);
        }
        let mut step = (hi - lo).max(self.sigma);
        let mut expansions = 0;
        while reached(lo) || !reached(hi) {
            if reached(lo) {
                lo -= step;
            }
            if !reached(hi) {
                hi += step;
            }
            step *= 2.0;
            expansions += 1;
            if expansions > 200 || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Numeric("failed to bracket the quantile".into()));
            }
        }
        Ok(bisect(reached, lo, hi, 1e-13))
    }
}

impl Lifetime for SystemModel {
    fn log_cdf(&self, x: f64) -> f64 {
        match self.topology {
            Topology::Parallel => std_log_cdf(-self.log_intensity(x)),
            Topology::Series => {
                let log_sf = self.series_log_survival(x);
                if log_sf > -1e-15 {
                    // F = Σ F_i to within a relative 1e−15, and stays
                    // representable after every F_i underflows.
                    let terms: Vec<f64> = self.mus.iter().map(|&m| std_log_cdf((x - m) / self.sigma)).collect();
                    log_sum_exp(&terms)
                } else {
                    log1mexp(-log_sf)
                }
            }
        }
    }

    fn log_survival(&self, x: f64) -> f64 {
        match self.topology {
            Topology::Parallel => std_log_survival(-self.log_intensity(x)),
            Topology::Series => self.series_log_survival(x),
        }
    }

    fn log_pdf(&self, x: f64) -> f64 {
        match self.topology {
            Topology::Parallel => std_log_density(-self.log_intensity(x)) - self.sigma.ln(),
            Topology::Series => self.series_log_hazard(x) + self.series_log_survival(x),
        }
    }

    fn hazard(&self, x: f64) -> f64 {
        match self.topology {
            Topology::Parallel => phi_raw(self.log_intensity(x).exp()) / self.sigma,
            Topology::Series => self.series_hazard_raw(x),
        }
    }

    fn reversed_hazard(&self, x: f64) -> f64 {
        match self.topology {
            Topology::Parallel => self.log_intensity(x).exp() / self.sigma,
            Topology::Series => (self.log_pdf(x) - self.log_cdf(x)).exp(),
        }
    }

    fn quantile(&self, prob: f64) -> Result<f64> {
        ensure_open_unit("prob", prob)?;
        if prob <= 0.5 {
            self.solve_quantile(prob.ln(), false)
        } else {
            self.solve_quantile((1.0 - prob).ln(), true)
        }
    }

    fn upper_quantile(&self, tail: f64) -> Result<f64> {
        ensure_open_unit("tail", tail)?;
        self.solve_quantile(tail.ln(), true)
    }
}

fn require(s: &SystemModel, topology: Topology, op: &str) -> Result<()> {
    if s.topology == topology {
        Ok(())
    } else {
        Err(Error::Usage(format!("{op} needs a {topology} system, got {}", s.topology)))
    }
}

/// `F_{X_{n:n}}(x) = exp(−Σ e^{−(x−μ_i)/σ})`.
pub fn parallel_cdf(s: &SystemModel, x: f64) -> Result<f64> {
    require(s, Topology::Parallel, "parallel_cdf")?;
    system_cdf(s, x)
}

/// `f_{X_{n:n}}(x) = (F(x)/σ) Σ e^{−(x−μ_i)/σ}`.
pub fn parallel_pdf(s: &SystemModel, x: f64) -> Result<f64> {
    require(s, Topology::Parallel, "parallel_pdf")?;
    system_pdf(s, x)
}

/// `r̃_{X_{n:n}}(x) = (1/σ) Σ e^{−(x−μ_i)/σ}`.
pub fn parallel_reversed_hazard(s: &SystemModel, x: f64) -> Result<f64> {
    require(s, Topology::Parallel, "parallel_reversed_hazard")?;
    system_reversed_hazard(s, x)
}

/// `F̄_{X_{1:n}}(x) = Π (1 − exp(−e^{−(x−μ_i)/σ}))`.
pub fn series_survival(s: &SystemModel, x: f64) -> Result<f64> {
    require(s, Topology::Series, "series_survival")?;
    system_survival(s, x)
}

/// `r_{X_{1:n}}(x) = (1/σ) Σ φ(e^{−(x−μ_i)/σ})`.
pub fn series_hazard(s: &SystemModel, x: f64) -> Result<f64> {
    require(s, Topology::Series, "series_hazard")?;
    system_hazard(s, x)
}

/// `φ(t) = t/(eᵗ − 1)` on `t ≥ 0`, continuously extended by `φ(0) = 1`.
pub fn phi(t: f64) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::Domain(format!("phi needs t >= 0, got {t}")));
    }
    Ok(phi_raw(t))
}

pub fn system_cdf(s: &SystemModel, x: f64) -> Result<f64> {
    ensure_finite("x", x)?;
    Ok(s.cdf(x))
}

pub fn system_pdf(s: &SystemModel, x: f64) -> Result<f64> {
    ensure_finite("x", x)?;
    Ok(s.pdf(x))
}

pub fn system_survival(s: &SystemModel, x: f64) -> Result<f64> {
    ensure_finite("x", x)?;
    Ok(s.survival(x))
}

pub fn system_hazard(s: &SystemModel, x: f64) -> Result<f64> {
    ensure_finite("x", x)?;
    Ok(s.hazard(x))
}

pub fn system_reversed_hazard(s: &SystemModel, x: f64) -> Result<f64> {
    ensure_finite("x", x)?;
    Ok(s.reversed_hazard(x))
}

/// Quantile by bracket expansion from the pooled component quantiles and
/// bisection down to a relative width of `1e−13`.
pub fn system_quantile(s: &SystemModel, prob: f64) -> Result<f64> {
    s.quantile(prob)
}

/// Sorted, strictly increasing evaluation abscissae.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalGrid {
    points: Vec<f64>,
    lo_prob: f64,
    hi_prob: f64,
}

impl EvalGrid {
    /// Wraps explicit points; they must be finite and strictly increasing.
    pub fn from_points(points: Vec<f64>, lo_prob: f64, hi_prob: f64) -> Result<Self> {
        if points.len() < MIN_GRID_POINTS {
            return Err(Error::Usage(format!("a grid needs at least {MIN_GRID_POINTS} points, got {}", points.len())));
        }
        if points.iter().any(|p| !p.is_finite()) || points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Usage("grid points must be finite and strictly increasing".into()));
        }
        Ok(Self { points, lo_prob, hi_prob })
    }

    /// `count` equally spaced points on `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64, count: usize, lo_prob: f64, hi_prob: f64) -> Result<Self> {
        if count < MIN_GRID_POINTS {
            return Err(Error::Usage(format!("a grid needs at least {MIN_GRID_POINTS} points, got {count}")));
        }
        let step = (hi - lo) / (count - 1) as f64;
        let points = (0..count).map(|i| if i + 1 == count { hi } else { lo + step * i as f64 }).collect();
        Self::from_points(points, lo_prob, hi_prob)
    }

    /// Probability grid on `[tail, 1 − tail]`, geometric toward both ends and
    /// symmetric about one half.
    pub fn probabilities(count: usize, tail: f64) -> Result<Self> {
        if !(tail > 0.0 && tail < 0.5) {
            return Err(Error::Domain(format!("tail must lie in (0, 0.5), got {tail}")));
        }
        if count < MIN_GRID_POINTS {
            return Err(Error::Usage(format!("a grid needs at least {MIN_GRID_POINTS} points, got {count}")));
        }
        let ratio = 0.5 / tail;
        let points = (0..count)
            .map(|i| {
                let s = i as f64 / (count - 1) as f64;
                if s <= 0.5 {
                    tail * ratio.powf(2.0 * s)
                } else {
                    1.0 - tail * ratio.powf(2.0 * (1.0 - s))
                }
            })
            .collect();
        Self::from_points(points, tail, 1.0 - tail)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn count(&self) -> usize {
        self.points.len()
    }

    pub fn lo_prob(&self) -> f64 {
        self.lo_prob
    }

    pub fn hi_prob(&self) -> f64 {
        self.hi_prob
    }
}

/// Grid spanning both systems between their `1e−8` and `1 − 1e−8` quantiles.
pub fn make_grid(a: &SystemModel, b: &SystemModel, count: usize) -> Result<EvalGrid> {
    make_grid_with(a, b, count, DEFAULT_TAIL_MASS)
}

pub fn make_grid_with(a: &SystemModel, b: &SystemModel, count: usize, tail: f64) -> Result<EvalGrid> {
    if !(tail > 0.0 && tail < 0.5) {
        return Err(Error::Domain(format!("tail must lie in (0, 0.5), got {tail}")));
    }
    let lo = a.quantile(tail)?.min(b.quantile(tail)?);
    let hi = a.upper_quantile(tail)?.max(b.upper_quantile(tail)?);
    EvalGrid::uniform(lo, hi, count, tail, 1.0 - tail)
}

/// Conditioning times for residual-entropy comparisons: from the lower
/// `tail` quantile of either system up to the smaller of the two upper
/// `tail` quantiles, so both laws keep at least `tail` of their mass.
pub fn make_time_grid(a: &SystemModel, b: &SystemModel, count: usize, tail: f64) -> Result<EvalGrid> {
    if !(tail > 0.0 && tail < 0.5) {
        return Err(Error::Domain(format!("tail must lie in (0, 0.5), got {tail}")));
    }
    let lo = a.quantile(tail)?.min(b.quantile(tail)?);
    let hi = a.upper_quantile(tail)?.min(b.upper_quantile(tail)?);
    if hi <= lo {
        return Err(Error::Usage("the two systems leave no common conditioning window".into()));
    }
    EvalGrid::uniform(lo, hi, count, tail, 1.0 - tail)
}

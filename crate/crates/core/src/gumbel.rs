//! Closed-form primitives for one Gumbel (maximum, type I) variable
//! `F(x) = exp(−exp(−(x − μ)/σ))`.
//!
//! Everything is evaluated on the standardised abscissa `z = (x − μ)/σ`.
//! Tail-sensitive values go through their logarithms so neither tail
//! underflows before the true value does.

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_open_unit, Error, Result};
use crate::numeric::log1mexp;

/// Below this argument `φ(t) = t/(eᵗ − 1)` is evaluated by its series.
pub(crate) const PHI_SERIES_CUTOFF: f64 = 1e-5;

/// `ln F` of the standard law.
#[inline]
pub(crate) fn std_log_cdf(z: f64) -> f64 {
    -(-z).exp()
}

/// `ln F̄` of the standard law.
#[inline]
pub(crate) fn std_log_survival(z: f64) -> f64 {
    if z > 700.0 {
        // exp(-z) is subnormal or zero; ln(1 - e^{-t}) = ln t - t/2 + O(t²).
        -z - 0.5 * (-z).exp()
    } else {
        log1mexp((-z).exp())
    }
}

/// `ln f + ln σ` of the standard law.
#[inline]
pub(crate) fn std_log_density(z: f64) -> f64 {
    -z - (-z).exp()
}

/// `φ(t) = t/(eᵗ − 1)` for `t ≥ 0` with `φ(0) = 1`.
#[inline]
pub(crate) fn phi_raw(t: f64) -> f64 {
    if t < PHI_SERIES_CUTOFF {
        1.0 - t / 2.0 + t * t / 12.0
    } else if t.is_infinite() {
        0.0
    } else {
        t * (-t).exp() / -(-t).exp_m1()
    }
}

/// `ln φ(t)`.
#[inline]
pub(crate) fn log_phi_raw(t: f64) -> f64 {
    if t < PHI_SERIES_CUTOFF {
        (-t / 2.0 + t * t / 12.0).ln_1p()
    } else if t.is_infinite() {
        f64::NEG_INFINITY
    } else {
        t.ln() - t - log1mexp(t)
    }
}

/// Location/scale pair of a single component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GumbelParams {
    mu: f64,
    sigma: f64,
}

impl GumbelParams {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        ensure_finite("mu", mu)?;
        ensure_finite("sigma", sigma)?;
        if sigma <= 0.0 {
            return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Self { mu, sigma })
    }

    pub fn standard() -> Self {
        Self { mu: 0.0, sigma: 1.0 }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    fn z(&self, x: f64) -> Result<f64> {
        ensure_finite("x", x)?;
        Ok((x - self.mu) / self.sigma)
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        Ok(std_log_cdf(self.z(x)?).exp())
    }

    pub fn log_cdf(&self, x: f64) -> Result<f64> {
        Ok(std_log_cdf(self.z(x)?))
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        Ok(self.log_pdf(x)?.exp())
    }

    pub fn log_pdf(&self, x: f64) -> Result<f64> {
        Ok(std_log_density(self.z(x)?) - self.sigma.ln())
    }

    /// `1 − F(x)`, computed as `−expm1(−e^{−z})`.
    pub fn survival(&self, x: f64) -> Result<f64> {
        let z = self.z(x)?;
        Ok(-(-(-z).exp()).exp_m1())
    }

    pub fn log_survival(&self, x: f64) -> Result<f64> {
        Ok(std_log_survival(self.z(x)?))
    }

    /// `f/F̄`, which simplifies to `φ(e^{−z})/σ`.
    pub fn hazard(&self, x: f64) -> Result<f64> {
        Ok(phi_raw((-self.z(x)?).exp()) / self.sigma)
    }

    /// `f/F`, which simplifies to `e^{−z}/σ`.
    pub fn reversed_hazard(&self, x: f64) -> Result<f64> {
        Ok((-self.z(x)?).exp() / self.sigma)
    }

    /// `Q(u) = μ − σ ln(−ln u)`.
    pub fn quantile(&self, prob: f64) -> Result<f64> {
        ensure_open_unit("prob", prob)?;
        Ok(self.mu - self.sigma * (-prob.ln()).ln())
    }

    /// Quantile of the upper tail: the `x` with `F̄(x) = tail`.
    pub fn upper_quantile(&self, tail: f64) -> Result<f64> {
        ensure_open_unit("tail", tail)?;
        // -ln(1 - tail) without cancellation.
        Ok(self.mu - self.sigma * (-(-tail).ln_1p()).ln())
    }

    /// Inverse-transform sampling: each draw consumes exactly one uniform.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::Domain("sample size must be at least 1".into()));
        }
        Ok((0..n)
            .map(|_| {
                let u: f64 = rng.sample(Open01);
                self.mu - self.sigma * (-u.ln()).ln()
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::E;

    const EINV: f64 = 0.367_879_441_171_442_3;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn cdf_examples() {
        let std = GumbelParams::standard();
        assert!((std.cdf(0.0).unwrap() - EINV).abs() < 1e-15);
        assert_eq!(std.cdf(1e3).unwrap(), 1.0);
        let p = GumbelParams::new(2.0, 0.5).unwrap();
        assert!((p.cdf(2.0).unwrap() - EINV).abs() < 1e-15);
    }

    #[test]
    fn pdf_examples() {
        let std = GumbelParams::standard();
        assert!((std.pdf(0.0).unwrap() - EINV).abs() < 1e-15);
        let wide = GumbelParams::new(0.0, 2.0).unwrap();
        assert!((wide.pdf(0.0).unwrap() - EINV / 2.0).abs() < 1e-15);
    }

    #[test]
    fn pdf_normalises() {
        let std = GumbelParams::standard();
        let q = crate::numeric::integrate(|x| std.pdf(x).unwrap(), -10.0, 60.0, 1e-13, 0.0, 16, 500).unwrap();
        assert!((q.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hazard_family_examples() {
        let std = GumbelParams::standard();
        assert!((std.reversed_hazard(0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((std.hazard(0.0).unwrap() - 0.581_976_706_869_326_4).abs() < 1e-13);
        assert!((std.survival(0.0).unwrap() - (1.0 - EINV)).abs() < 1e-15);
    }

    #[test]
    fn quantile_examples() {
        let std = GumbelParams::standard();
        assert!(std.quantile(EINV).unwrap().abs() < 1e-15);
        let shifted = GumbelParams::new(3.0, 1.0).unwrap();
        assert!((shifted.quantile(EINV).unwrap() - 3.0).abs() < 1e-15);
        assert!((std.quantile((-E).exp()).unwrap() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn invalid_inputs_are_domain_errors() {
        let std = GumbelParams::standard();
        assert!(matches!(std.cdf(f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(std.pdf(f64::INFINITY), Err(Error::Domain(_))));
        assert!(matches!(std.hazard(f64::NEG_INFINITY), Err(Error::Domain(_))));
        for u in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(std.quantile(u), Err(Error::Domain(_))));
        }
        assert!(GumbelParams::new(0.0, 0.0).is_err());
        assert!(GumbelParams::new(0.0, -1.0).is_err());
        assert!(GumbelParams::new(f64::NAN, 1.0).is_err());
        let mut rng = crate::rng::stream(1, "t", 0);
        assert!(matches!(std.sample(&mut rng, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn tails_do_not_underflow_early() {
        let std = GumbelParams::standard();
        // ln F(-5) = -e^5 is representable although F itself is ~1e-65.
        assert!((std.log_cdf(-5.0).unwrap() + 5f64.exp()).abs() < 1e-12);
        // F̄(800) is below f64 range; its log is not.
        assert!((std.log_survival(800.0).unwrap() + 800.0).abs() < 1e-12);
        assert!(std.survival(40.0).unwrap() > 0.0);
        assert!(rel(std.survival(40.0).unwrap(), (-40f64).exp()) < 1e-12);
        assert!((std.hazard(800.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(std.hazard(-800.0).unwrap(), 0.0);
    }

    #[test]
    fn roundtrip_on_geometric_grid() {
        let std = GumbelParams::standard();
        let mut u = 1e-10;
        while u < 0.5 {
            for p in [u, 1.0 - u] {
                let back = std.cdf(std.quantile(p).unwrap()).unwrap();
                assert!((back - p).abs() < 1e-12, "u={p}");
            }
            u *= 1.5;
        }
    }

    #[test]
    fn same_seed_same_sample() {
        let p = GumbelParams::new(1.0, 2.0).unwrap();
        let a = p.sample(&mut crate::rng::stream(42, "g", 0), 100).unwrap();
        let b = p.sample(&mut crate::rng::stream(42, "g", 0), 100).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn phi_kernels_agree_with_direct_form() {
        for t in [1e-9f64, 1e-6, 9.99e-6, 1e-5, 1e-3, 0.5, 1.0, 10.0, 200.0] {
            let direct = t / t.exp_m1();
            assert!(rel(phi_raw(t), direct) < 1e-12, "t={t}");
            assert!((log_phi_raw(t) - direct.ln()).abs() < 1e-12, "t={t}");
        }
        assert_eq!(phi_raw(0.0), 1.0);
        assert_eq!(phi_raw(f64::INFINITY), 0.0);
        assert_eq!(phi_raw(1e4), 0.0);
    }

    proptest! {
        #[test]
        fn density_factorisations(mu in -5.0f64..5.0, sigma in 0.2f64..4.0, x in -20.0f64..40.0) {
            let p = GumbelParams::new(mu, sigma).unwrap();
            let f = p.pdf(x).unwrap();
            let via_hazard = p.hazard(x).unwrap() * p.survival(x).unwrap();
            let via_rh = p.reversed_hazard(x).unwrap() * p.cdf(x).unwrap();
            if f > 1e-300 && p.survival(x).unwrap() > 1e-300 && p.cdf(x).unwrap() > 1e-300 {
                prop_assert!(rel(via_hazard, f) < 1e-12);
                prop_assert!(rel(via_rh, f) < 1e-12);
            }
            prop_assert!((0.0..=1.0).contains(&p.cdf(x).unwrap()));
            prop_assert!(p.hazard(x).unwrap() >= 0.0 && p.reversed_hazard(x).unwrap() >= 0.0);
        }

        #[test]
        fn location_scale_is_exact(mu in -5.0f64..5.0, sigma in 0.2f64..4.0, z in -6.0f64..30.0) {
            let p = GumbelParams::new(mu, sigma).unwrap();
            let x = mu + sigma * z;
            let z_back = (x - mu) / sigma;
            prop_assert_eq!(p.cdf(x).unwrap(), GumbelParams::standard().cdf(z_back).unwrap());
        }

        #[test]
        fn cdf_strictly_increasing(x in -3.0f64..20.0, dx in 1e-3f64..1.0) {
            let std = GumbelParams::standard();
            prop_assert!(std.cdf(x + dx).unwrap() > std.cdf(x).unwrap());
        }
    }
}

//! Differential entropy of a lifetime law and the residual entropy
//! `H(f, t)` of `X − t` given `X > t`, by adaptive quadrature.
//!
//! Gumbel-based lifetimes live on the whole real line, so integrals run over
//! the full support, truncated where the remaining tail mass drops below
//! `tail_mass_cutoff`, and `t` may be any real number. Two algebraically
//! equivalent forms of `H(f, t)` are integrated independently:
//!
//! * hazard form: `1 − (1/F̄(t)) ∫_t^∞ f ln r`
//! * density form: `ln F̄(t) − (1/F̄(t)) ∫_t^∞ f ln f`
//!
//! Their difference is a built-in accuracy check.

use serde::Serialize;

use crate::error::{ensure_finite, Error, Result};
use crate::numeric::integrate;
use crate::systems::Lifetime;

const INITIAL_PANELS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub tail_mass_cutoff: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-13, tail_mass_cutoff: 1e-12, max_subdivisions: 2000 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Usage(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("rel_tol", self.rel_tol)?;
        positive("abs_tol", self.abs_tol)?;
        positive("tail_mass_cutoff", self.tail_mass_cutoff)?;
        if self.rel_tol >= 1e-4 {
            return Err(Error::Usage(format!("rel_tol must be below 1e-4, got {}", self.rel_tol)));
        }
        if self.tail_mass_cutoff >= 0.5 {
            return Err(Error::Usage("tail_mass_cutoff must be below 0.5".into()));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::Usage("max_subdivisions must be positive".into()));
        }
        Ok(())
    }
}

/// An entropy in nats with its numerical error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyValue {
    pub value: f64,
    pub error_estimate: f64,
    pub converged: bool,
}

/// Both forms of the residual entropy at one conditioning time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualEntropyForms {
    pub t: f64,
    pub survival_at_t: f64,
    pub hazard_form: f64,
    pub density_form: f64,
    pub hazard_form_error: f64,
    pub density_form_error: f64,
    pub converged: bool,
}

impl ResidualEntropyForms {
    pub fn discrepancy(&self) -> f64 {
        (self.hazard_form - self.density_form).abs()
    }
}

/// `f ln f` with the `0 · ln 0 = 0` convention.
#[inline]
fn f_log_f(log_f: f64) -> f64 {
    if log_f == f64::NEG_INFINITY {
        0.0
    } else {
        log_f.exp() * log_f
    }
}

/// `H(f) = −∫ f ln f` over `[Q(c), Q(1 − c)]`.
pub fn shannon_entropy<L: Lifetime + ?Sized>(s: &L, q: &QuadratureSpec) -> Result<EntropyValue> {
    q.validate()?;
    let lo = s.quantile(q.tail_mass_cutoff)?;
    let hi = s.upper_quantile(q.tail_mass_cutoff)?;
    let quad = integrate(|x| -f_log_f(s.log_pdf(x)), lo, hi, q.rel_tol, q.abs_tol, INITIAL_PANELS, q.max_subdivisions)?;
    Ok(EntropyValue { value: quad.value, error_estimate: quad.error, converged: quad.converged })
}

/// Both integral forms of `H(f, t)`.
///
/// The upper limit is where the conditional law has `tail_mass_cutoff` mass
/// left, so truncation error does not grow as `t` moves into the tail.
pub fn residual_entropy_forms<L: Lifetime + ?Sized>(s: &L, t: f64, q: &QuadratureSpec) -> Result<ResidualEntropyForms> {
    q.validate()?;
    ensure_finite("t", t)?;
    let log_sf_t = s.log_survival(t);
    let survival_at_t = log_sf_t.exp();
    if survival_at_t.is_nan() || survival_at_t <= q.tail_mass_cutoff {
        return Err(Error::Domain(format!(
            "t = {t} is too deep in the upper tail: survival {survival_at_t:e} <= cutoff {:e}; \
             use a t with survival above the cutoff",
            q.tail_mass_cutoff
        )));
    }
    let upper = s.upper_quantile(q.tail_mass_cutoff * survival_at_t)?;
    if upper <= t {
        return Err(Error::Numeric(format!("empty integration window above t = {t}")));
    }
    let density =
        integrate(|x| f_log_f(s.log_pdf(x)), t, upper, q.rel_tol, q.abs_tol, INITIAL_PANELS, q.max_subdivisions)?;
    let hazard = integrate(
        |x| {
            let lp = s.log_pdf(x);
            if lp == f64::NEG_INFINITY {
                0.0
            } else {
                lp.exp() * (lp - s.log_survival(x))
            }
        },
        t,
        upper,
        q.rel_tol,
        q.abs_tol,
        INITIAL_PANELS,
        q.max_subdivisions,
    )?;
    let hazard_form = 1.0 - hazard.value / survival_at_t;
    let density_form = log_sf_t - density.value / survival_at_t;
    if !(hazard_form.is_finite() && density_form.is_finite()) {
        return Err(Error::Numeric(format!("residual entropy at t = {t} is not finite")));
    }
    let agree = (hazard_form - density_form).abs() <= 10.0 * q.rel_tol * hazard_form.abs().max(1.0);
    Ok(ResidualEntropyForms {
        t,
        survival_at_t,
        hazard_form,
        density_form,
        hazard_form_error: hazard.error / survival_at_t,
        density_form_error: density.error / survival_at_t,
        converged: hazard.converged && density.converged && agree,
    })
}

/// `H(f, t)`, reported from the hazard form; the error estimate covers both
/// quadratures and the disagreement between the two forms.
pub fn residual_entropy<L: Lifetime + ?Sized>(s: &L, t: f64, q: &QuadratureSpec) -> Result<EntropyValue> {
    let forms = residual_entropy_forms(s, t, q)?;
    Ok(EntropyValue {
        value: forms.hazard_form,
        error_estimate: forms.hazard_form_error.max(forms.density_form_error).max(forms.discrepancy()),
        converged: forms.converged,
    })
}

/// Residual entropy at every point of `t_grid`; a failing point does not
/// stop the others.
pub fn entropy_curve<L: Lifetime + ?Sized>(s: &L, t_grid: &[f64], q: &QuadratureSpec) -> Vec<Result<EntropyValue>> {
    t_grid.iter().map(|&t| residual_entropy(s, t, q)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::log1mexp;
    use crate::systems::{SystemModel, Topology};
    use crate::EULER_GAMMA;

    /// Constant-hazard law on `[0, ∞)`.
    struct Exponential {
        rate: f64,
    }

    impl Lifetime for Exponential {
        fn log_cdf(&self, x: f64) -> f64 {
            if x <= 0.0 {
                f64::NEG_INFINITY
            } else {
                log1mexp(self.rate * x)
            }
        }
        fn log_survival(&self, x: f64) -> f64 {
            if x <= 0.0 {
                0.0
            } else {
                -self.rate * x
            }
        }
        fn log_pdf(&self, x: f64) -> f64 {
            if x < 0.0 {
                f64::NEG_INFINITY
            } else {
                self.rate.ln() - self.rate * x
            }
        }
        fn quantile(&self, prob: f64) -> Result<f64> {
            Ok(-(-prob).ln_1p() / self.rate)
        }
        fn upper_quantile(&self, tail: f64) -> Result<f64> {
            Ok(-tail.ln() / self.rate)
        }
    }

    fn std_system() -> SystemModel {
        SystemModel::series(vec![0.0], 1.0).unwrap()
    }

    #[test]
    fn shannon_entropy_of_single_gumbel() {
        let q = QuadratureSpec::default();
        let h = shannon_entropy(&std_system(), &q).unwrap();
        assert!(h.converged);
        assert!((h.value - (1.0 + EULER_GAMMA)).abs() < 1e-9, "{h:?}");
        let wide = SystemModel::parallel(vec![0.0], 2.0).unwrap();
        let hw = shannon_entropy(&wide, &q).unwrap();
        assert!((hw.value - (h.value + 2f64.ln())).abs() < 1e-9);
        let moved = SystemModel::series(vec![5.0], 1.0).unwrap();
        assert!((shannon_entropy(&moved, &q).unwrap().value - h.value).abs() < 1e-9);
    }

    #[test]
    fn residual_entropy_at_lower_edge_is_shannon_entropy() {
        let q = QuadratureSpec::default();
        for s in [std_system(), SystemModel::series(vec![1.0, -0.5, 0.2], 0.7).unwrap()] {
            let t = s.quantile(q.tail_mass_cutoff).unwrap();
            let h = residual_entropy(&s, t, &q).unwrap();
            let full = shannon_entropy(&s, &q).unwrap();
            assert!((h.value - full.value).abs() < 1e-8);
        }
    }

    #[test]
    fn memoryless_law_has_flat_residual_entropy() {
        let q = QuadratureSpec::default();
        let e = Exponential { rate: 2.5 };
        let curve = entropy_curve(&e, &[0.0, 0.3, 1.0, 4.0], &q);
        for h in curve {
            let h = h.unwrap();
            assert!((h.value - (1.0 - 2.5f64.ln())).abs() < 1e-9, "{h:?}");
        }
    }

    #[test]
    fn forms_agree_at_series_median() {
        let q = QuadratureSpec::default();
        let s = SystemModel::series(vec![1.0, 1.0], 1.0).unwrap();
        let t = s.quantile(0.5).unwrap();
        let f = residual_entropy_forms(&s, t, &q).unwrap();
        assert!(f.converged);
        assert!(f.discrepancy() < 1e-9, "{f:?}");
    }

    #[test]
    fn deep_tail_is_a_domain_error() {
        let q = QuadratureSpec::default();
        let s = std_system();
        let t = s.upper_quantile(1e-13).unwrap();
        assert!(matches!(residual_entropy(&s, t, &q), Err(Error::Domain(_))));
        let curve = entropy_curve(&s, &[0.0, t, 1.0], &q);
        assert!(curve[0].is_ok() && curve[1].is_err() && curve[2].is_ok());
    }

    #[test]
    fn invalid_quadrature_specs_are_rejected() {
        let s = std_system();
        let bad = [
            QuadratureSpec { rel_tol: 1e-3, ..Default::default() },
            QuadratureSpec { abs_tol: 0.0, ..Default::default() },
            QuadratureSpec { tail_mass_cutoff: -1.0, ..Default::default() },
            QuadratureSpec { max_subdivisions: 0, ..Default::default() },
        ];
        for q in bad {
            assert!(matches!(shannon_entropy(&s, &q), Err(Error::Usage(_))));
        }
    }

    #[test]
    fn location_shift_moves_the_curve() {
        let q = QuadratureSpec::default();
        let s = SystemModel::new(Topology::Parallel, vec![0.4, -1.0, 2.0], 0.8).unwrap();
        let c = 1.75;
        let moved = s.shifted(c).unwrap();
        for t in [-1.0, 0.5, 2.0, 4.0] {
            let a = residual_entropy(&moved, t + c, &q).unwrap().value;
            let b = residual_entropy(&s, t, &q).unwrap().value;
            assert!((a - b).abs() < 1e-8, "t={t}: {a} vs {b}");
        }
    }

    #[test]
    fn tightening_tolerance_stays_within_estimate() {
        let loose = QuadratureSpec { rel_tol: 1e-6, ..Default::default() };
        let tight = QuadratureSpec { rel_tol: 5e-7, ..Default::default() };
        let s = SystemModel::series(vec![2.0, 0.0, -1.0], 0.5).unwrap();
        for t in [-1.5, 0.0, 1.0] {
            let a = residual_entropy(&s, t, &loose).unwrap();
            let b = residual_entropy(&s, t, &tight).unwrap();
            assert!((a.value - b.value).abs() <= a.error_estimate.max(1e-15), "t={t}: {a:?} {b:?}");
        }
    }
}

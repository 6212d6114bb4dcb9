//! Monte Carlo counterparts of the analytic quantities, used to cross-check
//! the closed forms.
//!
//! Each system draws its components from labeled substreams: component `i`
//! of the system labeled `L` uses the stream `("component", i)` of the seed
//! derived from `(seed, L)`.

use serde::Serialize;

use crate::error::{ensure_open_unit, Error, Result};
use crate::rng::{child_seed, stream};
use crate::systems::{EvalGrid, Lifetime, SystemModel, Topology};
use rand::Rng;

pub const CONTRADICTION_SES: f64 = 4.0;
pub const BOOTSTRAP_RESAMPLES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl McEstimate {
    /// `(value − target) / std_error`, or 0 when both are exactly equal.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = self.value - target;
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }
}

fn require_samples(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::Domain("sample size must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// `n` lifetimes of the system from its default stream.
pub fn sample_system(s: &SystemModel, seed: u64, n: usize) -> Result<Vec<f64>> {
    sample_system_labeled(s, seed, "system", n)
}

/// `n` lifetimes drawn from the substream family labeled `label`.
pub fn sample_system_labeled(s: &SystemModel, seed: u64, label: &str, n: usize) -> Result<Vec<f64>> {
    require_samples(n)?;
    let system_seed = child_seed(seed, label, 0);
    let mut out: Option<Vec<f64>> = None;
    for (i, c) in s.components().iter().enumerate() {
        let draws = c.sample(&mut stream(system_seed, "component", i as u64), n)?;
        out = Some(match out {
            None => draws,
            Some(mut acc) => {
                for (a, d) in acc.iter_mut().zip(draws) {
                    *a = match s.topology() {
                        Topology::Series => a.min(d),
                        Topology::Parallel => a.max(d),
                    };
                }
                acc
            }
        });
    }
    Ok(out.expect("systems have at least one component"))
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn ecdf(sorted: &[f64], x: f64) -> f64 {
    sorted.partition_point(|&v| v <= x) as f64 / sorted.len() as f64
}

/// Empirical `F(x)` at each point with binomial standard errors.
pub fn empirical_cdf(s: &SystemModel, seed: u64, n: usize, points: &[f64]) -> Result<Vec<McEstimate>> {
    let draws = sorted(sample_system(s, seed, n)?);
    Ok(points
        .iter()
        .map(|&x| {
            let p = ecdf(&draws, x);
            McEstimate { value: p, std_error: (p * (1.0 - p) / n as f64).sqrt(), n_samples: n, seed }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DominancePoint {
    pub x: f64,
    /// Empirical `F_a(x) − F_b(x)`.
    pub estimate: McEstimate,
    /// Exact `F_a(x) − F_b(x)`.
    pub analytic: f64,
    pub contradiction: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CdfDominance {
    pub points: Vec<DominancePoint>,
    pub contradictions: usize,
}

/// Estimates `F_a − F_b` on the grid from independent samples of both
/// systems and flags points where the estimate has the wrong sign relative
/// to the exact difference by more than four standard errors.
pub fn empirical_cdf_dominance(
    a: &SystemModel,
    b: &SystemModel,
    seed: u64,
    n: usize,
    grid: &EvalGrid,
) -> Result<CdfDominance> {
    let da = sorted(sample_system_labeled(a, seed, "a", n)?);
    let db = sorted(sample_system_labeled(b, seed, "b", n)?);
    let points: Vec<DominancePoint> = grid
        .points()
        .iter()
        .map(|&x| {
            let (pa, pb) = (ecdf(&da, x), ecdf(&db, x));
            let se = ((pa * (1.0 - pa) + pb * (1.0 - pb)) / n as f64).sqrt();
            let value = pa - pb;
            let analytic = a.cdf(x) - b.cdf(x);
            let limit = CONTRADICTION_SES * se;
            let contradiction = (analytic >= 0.0 && value < -limit) || (analytic <= 0.0 && value > limit);
            DominancePoint {
                x,
                estimate: McEstimate { value, std_error: se, n_samples: n, seed },
                analytic,
                contradiction,
            }
        })
        .collect();
    let contradictions = points.iter().filter(|p| p.contradiction).count();
    Ok(CdfDominance { points, contradictions })
}

/// Inverse empirical cdf: the `⌈p·n⌉`-th order statistic.
fn order_statistic(sorted: &[f64], p: f64) -> f64 {
    let k = ((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[k - 1]
}

fn spread(sorted: &[f64], alpha: f64, beta: f64) -> f64 {
    order_statistic(sorted, beta) - order_statistic(sorted, alpha)
}

/// Estimate of `[Q_b(β) − Q_b(α)] − [Q_a(β) − Q_a(α)]` with a bootstrap
/// standard error over 200 resamples.
pub fn empirical_quantile_spread(
    a: &SystemModel,
    b: &SystemModel,
    seed: u64,
    n: usize,
    alpha: f64,
    beta: f64,
) -> Result<McEstimate> {
    ensure_open_unit("alpha", alpha)?;
    ensure_open_unit("beta", beta)?;
    if alpha >= beta {
        return Err(Error::Domain(format!("need alpha < beta, got {alpha} and {beta}")));
    }
    let da = sorted(sample_system_labeled(a, seed, "a", n)?);
    let db = sorted(sample_system_labeled(b, seed, "b", n)?);
    let value = spread(&db, alpha, beta) - spread(&da, alpha, beta);
    let mut buf = vec![0.0; n];
    let mut resample = |data: &[f64], rng: &mut crate::rng::StreamRng| {
        for slot in buf.iter_mut() {
            *slot = data[rng.random_range(0..n)];
        }
        buf.sort_by(f64::total_cmp);
        spread(&buf, alpha, beta)
    };
    let mut reps = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    for r in 0..BOOTSTRAP_RESAMPLES {
        let mut rng = stream(seed, "bootstrap", r as u64);
        let sb = resample(&db, &mut rng);
        let sa = resample(&da, &mut rng);
        reps.push(sb - sa);
    }
    let mean = reps.iter().sum::<f64>() / reps.len() as f64;
    let var = reps.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (reps.len() - 1) as f64;
    Ok(McEstimate { value, std_error: var.sqrt(), n_samples: n, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::QuadratureSpec;
    use crate::numeric::integrate;
    use crate::systems::make_grid;

    fn ser(mus: &[f64], sigma: f64) -> SystemModel {
        SystemModel::series(mus.to_vec(), sigma).unwrap()
    }

    fn par(mus: &[f64], sigma: f64) -> SystemModel {
        SystemModel::parallel(mus.to_vec(), sigma).unwrap()
    }

    #[test]
    fn single_component_passes_ks_test() {
        let s = ser(&[0.7], 1.3);
        let n = 1_000_000;
        let draws = sorted(sample_system(&s, 11, n).unwrap());
        // Independent oracle: the Gumbel cdf written out directly.
        let cdf = |x: f64| (-(-(x - 0.7) / 1.3).exp()).exp();
        let mut d = 0.0f64;
        for (i, &x) in draws.iter().enumerate() {
            let f = cdf(x);
            d = d.max((f - i as f64 / n as f64).abs()).max(((i + 1) as f64 / n as f64 - f).abs());
        }
        assert!(d <= 1.628 / (n as f64).sqrt(), "D = {d}");
    }

    #[test]
    fn closed_form_probabilities_within_three_ses() {
        let n = 1_000_000;
        let p = empirical_cdf(&par(&[0.0, 0.0], 1.0), 3, n, &[0.0]).unwrap()[0];
        assert!(p.z_score((-2f64).exp()).abs() < 3.0, "{p:?}");
        let s = empirical_cdf(&ser(&[0.0, 0.0], 1.0), 4, n, &[0.0]).unwrap()[0];
        let survival = (1.0 - (-1f64).exp()).powi(2);
        assert!(s.z_score(1.0 - survival).abs() < 3.0, "{s:?}");
    }

    #[test]
    fn sample_mean_matches_quadrature() {
        let s = ser(&[1.0, -0.5, 0.3], 0.8);
        let n = 400_000;
        let draws = sample_system(&s, 9, n).unwrap();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let sd = (draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        let q = QuadratureSpec::default();
        let lo = s.quantile(1e-14).unwrap();
        let hi = s.upper_quantile(1e-14).unwrap();
        let exact = integrate(|x| x * s.pdf(x), lo, hi, 1e-12, 1e-14, 16, q.max_subdivisions).unwrap();
        assert!(((mean - exact.value) / (sd / (n as f64).sqrt())).abs() < 4.0);
    }

    #[test]
    fn draws_are_deterministic_and_stream_separated() {
        let s = par(&[0.0, 1.0], 1.0);
        assert_eq!(sample_system(&s, 5, 100).unwrap(), sample_system(&s, 5, 100).unwrap());
        assert_ne!(sample_system(&s, 5, 100).unwrap(), sample_system(&s, 6, 100).unwrap());
        // Adding a component that can never win leaves every draw in place.
        let extended = par(&[0.0, 1.0, -200.0], 1.0);
        assert_eq!(sample_system(&s, 5, 1000).unwrap(), sample_system(&extended, 5, 1000).unwrap());
        assert!(sample_system(&s, 5, 0).is_err());
    }

    #[test]
    fn identical_systems_show_no_dominance() {
        let s = ser(&[0.5, -0.5], 1.0);
        let grid = make_grid(&s, &s, 257).unwrap();
        let mut exceed3 = 0;
        let mut total = 0;
        for seed in 0..20 {
            let dom = empirical_cdf_dominance(&s, &s, seed, 20_000, &grid).unwrap();
            assert!(dom.points.iter().all(|p| p.analytic == 0.0));
            let within4 = dom.points.iter().filter(|p| p.estimate.z_score(0.0).abs() <= 4.0).count();
            assert!(within4 as f64 >= 0.99 * dom.points.len() as f64);
            exceed3 += dom.points.iter().filter(|p| p.estimate.z_score(0.0).abs() > 3.0).count();
            total += dom.points.len();
        }
        assert!(exceed3 as f64 <= 0.02 * total as f64, "{exceed3} of {total}");
    }

    #[test]
    fn majorized_series_pair_has_no_contradictions() {
        let a = ser(&[2.0, 0.0], 1.0);
        let b = ser(&[1.0, 1.0], 1.0);
        let dom = empirical_cdf_dominance(&a, &b, 21, 1_000_000, &make_grid(&a, &b, 513).unwrap()).unwrap();
        assert_eq!(dom.contradictions, 0);
        assert!(dom.points.iter().all(|p| p.analytic >= -1e-12));
    }

    #[test]
    fn standard_errors_shrink_with_root_n() {
        let a = ser(&[1.0, 0.0], 1.0);
        let b = ser(&[0.5, 0.5], 1.0);
        let x = [0.2];
        let se = |n| empirical_cdf(&a, 8, n, &x).unwrap()[0].std_error;
        let ratio = se(50_000) / se(200_000);
        assert!((1.8..=2.2).contains(&ratio), "{ratio}");
        let spread_se = |n| empirical_quantile_spread(&a, &b, 8, n, 0.25, 0.75).unwrap().std_error;
        let ratio = spread_se(5_000) / spread_se(20_000);
        assert!((1.8..=2.2).contains(&ratio), "{ratio}");
    }

    #[test]
    fn quantile_spread_matches_closed_form() {
        let a = ser(&[2.0, 0.0], 1.0);
        let b = ser(&[1.0, 1.0], 1.0);
        let est = empirical_quantile_spread(&a, &b, 13, 50_000, 0.25, 0.75).unwrap();
        let exact = |s: &SystemModel| s.quantile(0.75).unwrap() - s.quantile(0.25).unwrap();
        assert!(est.z_score(exact(&b) - exact(&a)).abs() < 4.0, "{est:?}");
        let same = empirical_quantile_spread(&a, &a, 13, 50_000, 0.25, 0.75).unwrap();
        assert!(same.z_score(0.0).abs() < 4.0);
        assert!(empirical_quantile_spread(&a, &b, 1, 100, 0.75, 0.25).is_err());
        assert!(empirical_quantile_spread(&a, &b, 1, 100, 0.0, 0.25).is_err());
    }
}

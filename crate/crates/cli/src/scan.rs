//! Randomized sweeps over pairs of systems that satisfy a hypothesis
//! (componentwise location dominance or majorization), checking the order
//! each hypothesis is claimed to imply, plus an unconstrained exploration
//! mode that audits the implications between orders.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use gumbel_order::entropy::QuadratureSpec;
use gumbel_order::majorization::random_majorization_pair;
use gumbel_order::numeric::compensated_sum;
use gumbel_order::orders::{check_relation, implication_audit, AuditGrids, ConsistencyViolation, GridConfig};
use gumbel_order::rng::{stream, StreamRng};
use gumbel_order::{Direction, OrderVerdict, Outcome, Relation, SystemModel, Topology};
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::report::{num, to_json, verdict_json};
use crate::{Failure, EXIT_FAILS, EXIT_INCONCLUSIVE, EXIT_OK};

/// Largest location increment in the componentwise-dominance mode.
pub const MAX_OFFSET: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanMode {
    DominanceLr,
    MajorizedRh,
    MajorizedHr,
    MajorizedDispLu,
    Free,
}

impl FromStr for ScanMode {
    type Err = Failure;

    fn from_str(s: &str) -> Result<Self, Failure> {
        match s.to_ascii_lowercase().replace(['-', '_', '.'], "").as_str() {
            "dominancelr" | "theorem31" => Ok(ScanMode::DominanceLr),
            "majorizedrh" | "theorem32" => Ok(ScanMode::MajorizedRh),
            "majorizedhr" | "theorem34" => Ok(ScanMode::MajorizedHr),
            "majorizeddisplu" | "theorem36" => Ok(ScanMode::MajorizedDispLu),
            "free" | "freescan" => Ok(ScanMode::Free),
            _ => Err(Failure::usage(format!(
                "unknown scan mode {s:?}; expected dominance-lr, majorized-rh, majorized-hr, \
                 majorized-disp-lu or free (theorem31, theorem32, theorem34, theorem36 are aliases)"
            ))),
        }
    }
}

impl ScanMode {
    /// The relations and directions each hypothesis is claimed to imply.
    pub fn claims(self) -> &'static [(Relation, Direction)] {
        match self {
            ScanMode::DominanceLr => &[(Relation::Lr, Direction::FirstGreater)],
            ScanMode::MajorizedRh => &[(Relation::Rh, Direction::FirstGreater)],
            ScanMode::MajorizedHr => &[(Relation::Hr, Direction::FirstSmaller)],
            ScanMode::MajorizedDispLu => {
                &[(Relation::Disp, Direction::FirstSmaller), (Relation::Lu, Direction::FirstSmaller)]
            }
            ScanMode::Free => &[],
        }
    }

    fn topology(self) -> Option<Topology> {
        match self {
            ScanMode::DominanceLr | ScanMode::MajorizedRh => Some(Topology::Parallel),
            ScanMode::MajorizedHr | ScanMode::MajorizedDispLu => Some(Topology::Series),
            ScanMode::Free => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanSpec {
    pub mode: ScanMode,
    pub trials: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub mu_range: (f64, f64),
    pub sigma_set: Vec<f64>,
    pub seed: u64,
    pub allow_degenerate: bool,
    /// Relations audited in free mode.
    pub relations: Vec<Relation>,
    /// Fixed topology for free mode; random per trial when absent.
    pub topology: Option<Topology>,
}

impl ScanSpec {
    pub fn new(mode: ScanMode, trials: usize, n: (usize, usize), seed: u64) -> Self {
        Self {
            mode,
            trials,
            n_min: n.0,
            n_max: n.1,
            mu_range: (-3.0, 3.0),
            sigma_set: vec![0.5, 1.0, 2.0],
            seed,
            allow_degenerate: false,
            relations: vec![Relation::Lr, Relation::Hr, Relation::Rh, Relation::St],
            topology: None,
        }
    }

    pub fn validate(&self) -> Result<(), Failure> {
        if self.trials == 0 {
            return Err(Failure::usage("trials must be at least 1"));
        }
        let min_n = if self.mode == ScanMode::DominanceLr || self.mode == ScanMode::Free { 1 } else { 2 };
        if self.n_min < min_n || self.n_max < self.n_min {
            return Err(Failure::usage(format!(
                "component counts must satisfy {min_n} <= min <= max, got {}..{}",
                self.n_min, self.n_max
            )));
        }
        let (lo, hi) = self.mu_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Failure::usage(format!("mu range must be finite with lo < hi, got [{lo}, {hi}]")));
        }
        if self.sigma_set.is_empty() || self.sigma_set.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Failure::usage("sigma set must be a nonempty list of positive numbers"));
        }
        if self.mode == ScanMode::Free && self.relations.is_empty() {
            return Err(Failure::usage("free mode needs at least one relation"));
        }
        Ok(())
    }
}

/// Parses `"3"` or an inclusive range `"2..5"`.
pub fn parse_count_range(s: &str) -> Result<(usize, usize), Failure> {
    let bad = || Failure::usage(format!("expected a count or a range like 2..5, got {s:?}"));
    match s.split_once("..") {
        Some((a, b)) => {
            let b = b.strip_prefix('=').unwrap_or(b);
            Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
        }
        None => {
            let n = s.trim().parse().map_err(|_| bad())?;
            Ok((n, n))
        }
    }
}

/// Parses a comma-separated list of floats.
pub fn parse_float_list(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| Failure::usage(format!("not a number: {t:?}")))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub index: usize,
    pub a: SystemModel,
    pub b: SystemModel,
    pub verdicts: Vec<OrderVerdict>,
    /// Majorized-rh mode: whether the verdict matches the sign of the
    /// difference of exponential sums.
    pub closed_form_agrees: Option<bool>,
    pub violations: Vec<ConsistencyViolation>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub spec: ScanSpec,
    pub grid: GridConfig,
    pub quadrature: QuadratureSpec,
    pub trials: Vec<TrialRecord>,
}

impl ScanReport {
    pub fn passes(&self) -> usize {
        self.trials.iter().filter(|t| t.passed).count()
    }

    pub fn failing(&self) -> impl Iterator<Item = &TrialRecord> {
        self.trials.iter().filter(|t| !t.passed)
    }

    fn claim_outcomes(&self, outcome: Outcome) -> usize {
        self.trials.iter().filter(|t| t.verdicts.iter().any(|v| v.outcome == outcome)).count()
    }

    /// 0 when every trial passed; otherwise 1 if any claim failed outright
    /// or the audit found a violation, else 2.
    pub fn exit_code(&self) -> i32 {
        if self.failing().next().is_none() {
            return EXIT_OK;
        }
        let hard = self.trials.iter().any(|t| {
            !t.violations.is_empty()
                || t.closed_form_agrees == Some(false)
                || (self.spec.mode != ScanMode::Free && t.verdicts.iter().any(OrderVerdict::fails))
        });
        if hard {
            EXIT_FAILS
        } else {
            EXIT_INCONCLUSIVE
        }
    }

    /// Smallest margin per relation and direction, over all trials.
    pub fn min_margins(&self) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        for v in self.trials.iter().flat_map(|t| &t.verdicts) {
            let key = format!("{}:{}", v.relation, v.direction);
            let e = out.entry(key).or_insert(f64::INFINITY);
            *e = f64::min(*e, v.margin);
        }
        out
    }

    /// Outcome counts per relation and direction.
    pub fn tally(&self) -> BTreeMap<String, [usize; 3]> {
        let mut out = BTreeMap::new();
        for v in self.trials.iter().flat_map(|t| &t.verdicts) {
            let e = out.entry(format!("{}:{}", v.relation, v.direction)).or_insert([0; 3]);
            e[match v.outcome {
                Outcome::Holds => 0,
                Outcome::Fails => 1,
                Outcome::Inconclusive => 2,
            }] += 1;
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let failing: Vec<Value> = self
            .failing()
            .map(|t| {
                json!({
                    "index": t.index,
                    "system_a": to_json(&t.a),
                    "system_b": to_json(&t.b),
                    "verdicts": t.verdicts.iter().map(verdict_json).collect::<Vec<_>>(),
                    "closed_form_agrees": t.closed_form_agrees,
                    "violations": to_json(&t.violations),
                })
            })
            .collect();
        let margins: serde_json::Map<String, Value> =
            self.min_margins().into_iter().map(|(k, v)| (k, num(v))).collect();
        let tally: serde_json::Map<String, Value> = self
            .tally()
            .into_iter()
            .map(|(k, [h, f, i])| (k, json!({"holds": h, "fails": f, "inconclusive": i})))
            .collect();
        json!({
            "command": "scan",
            "config": {
                "scan": to_json(&self.spec),
                "grid": to_json(&self.grid),
                "quadrature": to_json(&self.quadrature),
            },
            "summary": {
                "trials": self.trials.len(),
                "passes": self.passes(),
                "failures": self.trials.len() - self.passes(),
                "claims_failed": self.claim_outcomes(Outcome::Fails),
                "claims_inconclusive": self.claim_outcomes(Outcome::Inconclusive),
                "audit_violations": self.trials.iter().map(|t| t.violations.len()).sum::<usize>(),
                "min_margins": margins,
                "outcomes": tally,
            },
            "failing_trials": failing,
            "exit_code": self.exit_code(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "scan mode={:?} trials={} passes={} failures={}",
            self.spec.mode,
            self.trials.len(),
            self.passes(),
            self.trials.len() - self.passes()
        );
        let _ = writeln!(out, "{:<20}{:>8}{:>8}{:>14}{:>26}", "order", "holds", "fails", "inconclusive", "min margin");
        let margins = self.min_margins();
        for (key, [h, f, i]) in self.tally() {
            let _ = writeln!(out, "{key:<20}{h:>8}{f:>8}{i:>14}{:>26.9e}", margins[&key]);
        }
        let violations: usize = self.trials.iter().map(|t| t.violations.len()).sum();
        if self.spec.mode == ScanMode::Free {
            let _ = writeln!(out, "implication audit violations: {violations}");
        }
        for t in self.failing().take(10) {
            let _ =
                writeln!(out, "failing trial {}: a={:?} b={:?} sigma={}", t.index, t.a.mus(), t.b.mus(), t.a.sigma());
            for v in &t.verdicts {
                if !v.holds() {
                    let _ = writeln!(
                        out,
                        "    {}:{} {} margin={:.9e} witness_x={}",
                        v.relation,
                        v.direction,
                        v.outcome,
                        v.margin,
                        v.witness.map_or_else(|| "-".into(), |w| format!("{:.9e}", w.x))
                    );
                }
            }
        }
        out
    }
}

fn draw_mus(rng: &mut StreamRng, n: usize, (lo, hi): (f64, f64)) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

fn draw_pair(spec: &ScanSpec, rng: &mut StreamRng) -> Result<(SystemModel, SystemModel), Failure> {
    let n = rng.random_range(spec.n_min..=spec.n_max);
    let sigma = spec.sigma_set[rng.random_range(0..spec.sigma_set.len())];
    let build = |topology, mus: Vec<f64>| SystemModel::new(topology, mus, sigma).map_err(Failure::from);
    match spec.mode {
        ScanMode::DominanceLr => {
            let base = draw_mus(rng, n, spec.mu_range);
            let degenerate = spec.allow_degenerate && rng.random_bool(0.5);
            let raised =
                base.iter().map(|m| if degenerate { *m } else { m + rng.random_range(0.0..MAX_OFFSET) }).collect();
            Ok((build(Topology::Parallel, raised)?, build(Topology::Parallel, base)?))
        }
        ScanMode::MajorizedRh | ScanMode::MajorizedHr | ScanMode::MajorizedDispLu => {
            let spread = 1.0 - rng.random::<f64>();
            let (u, v) = random_majorization_pair(rng, n, spread, spec.mu_range)?;
            let topology = spec.mode.topology().expect("theorem modes fix the topology");
            Ok((build(topology, u.values().to_vec())?, build(topology, v.values().to_vec())?))
        }
        ScanMode::Free => {
            let topology =
                spec.topology.unwrap_or(if rng.random_bool(0.5) { Topology::Series } else { Topology::Parallel });
            let a = draw_mus(rng, n, spec.mu_range);
            let b = draw_mus(rng, n, spec.mu_range);
            Ok((build(topology, a)?, build(topology, b)?))
        }
    }
}

fn exp_sum(s: &SystemModel) -> f64 {
    compensated_sum(s.mus().iter().map(|m| (m / s.sigma()).exp()))
}

/// Runs a single trial on a given pair.
pub fn run_trial(
    spec: &ScanSpec,
    index: usize,
    a: SystemModel,
    b: SystemModel,
    grid: &GridConfig,
    q: &QuadratureSpec,
) -> Result<TrialRecord, Failure> {
    let grids = AuditGrids::for_pair(&a, &b, grid)?;
    if spec.mode == ScanMode::Free {
        let audit = implication_audit(&a, &b, &grids, q, &spec.relations)?;
        let passed = audit.is_consistent();
        return Ok(TrialRecord {
            index,
            a,
            b,
            verdicts: audit.verdicts,
            closed_form_agrees: None,
            violations: audit.violations,
            passed,
        });
    }
    let verdicts = spec
        .mode
        .claims()
        .iter()
        .map(|&(r, d)| check_relation(r, d, &a, &b, &grids, q))
        .collect::<Result<Vec<_>, _>>()?;
    let mut passed = verdicts.iter().all(|v| v.holds() && (v.relation != Relation::Lr || v.margin >= -1e-9));
    let closed_form_agrees = (spec.mode == ScanMode::MajorizedRh).then(|| {
        let dominant = exp_sum(&a) >= exp_sum(&b);
        verdicts[0].holds() == dominant
    });
    if closed_form_agrees == Some(false) {
        passed = false;
    }
    Ok(TrialRecord { index, a, b, verdicts, closed_form_agrees, violations: Vec::new(), passed })
}

pub fn run_scan(spec: &ScanSpec, grid: &GridConfig, q: &QuadratureSpec) -> Result<ScanReport, Failure> {
    spec.validate()?;
    let mut trials = Vec::with_capacity(spec.trials);
    for index in 0..spec.trials {
        let mut rng = stream(spec.seed, "trial", index as u64);
        let (a, b) = draw_pair(spec, &mut rng)?;
        trials.push(run_trial(spec, index, a, b, grid, q)?);
    }
    Ok(ScanReport { spec: spec.clone(), grid: *grid, quadrature: *q, trials })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid() -> GridConfig {
        GridConfig { x_points: 257, p_points: 129, t_points: 33, ..GridConfig::default() }
    }

    #[test]
    fn parses_arguments() {
        assert_eq!(parse_count_range("3").unwrap(), (3, 3));
        assert_eq!(parse_count_range("2..5").unwrap(), (2, 5));
        assert_eq!(parse_count_range("2..=5").unwrap(), (2, 5));
        assert!(parse_count_range("two").is_err());
        assert_eq!(parse_float_list("0.5, 1,2").unwrap(), vec![0.5, 1.0, 2.0]);
        assert_eq!("majorized-hr".parse::<ScanMode>().unwrap(), ScanMode::MajorizedHr);
        assert!("theorem99".parse::<ScanMode>().is_err());
    }

    #[test]
    fn dominance_with_degenerate_draws_passes() {
        let mut spec = ScanSpec::new(ScanMode::DominanceLr, 40, (2, 4), 3);
        spec.allow_degenerate = true;
        let report = run_scan(&spec, &small_grid(), &QuadratureSpec::default()).unwrap();
        assert_eq!(report.passes(), 40);
        assert_eq!(report.exit_code(), EXIT_OK);
        let degenerate = report.trials.iter().filter(|t| t.a == t.b).count();
        assert!(degenerate > 0);
    }

    #[test]
    fn majorized_parallel_pairs_hold_rh() {
        let spec = ScanSpec::new(ScanMode::MajorizedRh, 40, (2, 5), 4);
        let report = run_scan(&spec, &small_grid(), &QuadratureSpec::default()).unwrap();
        assert_eq!(report.passes(), 40);
        assert!(report.trials.iter().all(|t| t.closed_form_agrees == Some(true)));
    }

    #[test]
    fn scans_are_deterministic() {
        let spec = ScanSpec::new(ScanMode::Free, 5, (2, 3), 8);
        let q = QuadratureSpec::default();
        let one = run_scan(&spec, &small_grid(), &q).unwrap();
        let two = run_scan(&spec, &small_grid(), &q).unwrap();
        assert_eq!(one, two);
        assert_eq!(one.to_json(), two.to_json());
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let q = QuadratureSpec::default();
        let mut spec = ScanSpec::new(ScanMode::MajorizedHr, 0, (3, 3), 1);
        assert!(run_scan(&spec, &small_grid(), &q).is_err());
        spec.trials = 1;
        spec.n_min = 1;
        spec.n_max = 1;
        assert!(run_scan(&spec, &small_grid(), &q).is_err());
        spec.n_min = 3;
        spec.n_max = 3;
        spec.mu_range = (1.0, -1.0);
        assert!(run_scan(&spec, &small_grid(), &q).is_err());
    }
}

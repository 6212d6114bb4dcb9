//! Runners for the `check`, `scan`, `entropy` and `simulate` commands.

use std::fmt::Write as _;

use gumbel_order::entropy::{residual_entropy_forms, shannon_entropy, QuadratureSpec};
use gumbel_order::orders::{
    check_relation_both, check_st, AuditGrids, GridConfig, LR_STEP_SLACK, MAX_SKIPPED_FRACTION, RATE_REL_SLACK,
    SPREAD_REL_SLACK, ST_ABS_SLACK,
};
use gumbel_order::simulate::{empirical_cdf_dominance, empirical_quantile_spread, CONTRADICTION_SES};
use gumbel_order::systems::{make_grid_with, make_time_grid};
use gumbel_order::{Direction, Lifetime, OrderVerdict, Outcome, SystemModel, EULER_GAMMA};
use serde_json::{json, Value};

use crate::report::{num, to_json, verdict_json, verdict_table};
use crate::scan::{run_scan, ScanSpec};
use crate::spec::{resolve_grid, resolve_quadrature, CheckSpec, Overrides, ResolvedPair};
use crate::{Failure, Output, EXIT_FAILS, EXIT_INCONCLUSIVE, EXIT_OK};

pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_SIM_GRID_POINTS: usize = 257;

/// 1 if anything fails, otherwise 2 if anything is inconclusive, otherwise 0.
pub fn verdict_exit_code(verdicts: &[OrderVerdict]) -> i32 {
    if verdicts.iter().any(|v| v.outcome == Outcome::Fails) {
        EXIT_FAILS
    } else if verdicts.iter().any(|v| v.outcome == Outcome::Inconclusive) {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    }
}

fn tolerances_json() -> Value {
    json!({
        "lr_step_slack": num(LR_STEP_SLACK),
        "rate_rel_slack": num(RATE_REL_SLACK),
        "st_abs_slack": num(ST_ABS_SLACK),
        "spread_rel_slack": num(SPREAD_REL_SLACK),
        "max_skipped_fraction": num(MAX_SKIPPED_FRACTION),
    })
}

fn grids_json(grids: &AuditGrids) -> Value {
    let ends = |g: &gumbel_order::EvalGrid| {
        let p = g.points();
        json!({"count": p.len(), "lo": num(p[0]), "hi": num(p[p.len() - 1])})
    };
    json!({"x": ends(&grids.x), "p": ends(&grids.p), "t": ends(&grids.t)})
}

fn pair_config(r: &ResolvedPair, grids: &AuditGrids) -> Value {
    json!({
        "system_a": to_json(&r.a),
        "system_b": to_json(&r.b),
        "requests": r.requests.iter().map(|(rel, dir)| format!("{rel}:{dir}")).collect::<Vec<_>>(),
        "grid": to_json(&r.grid),
        "grid_ranges": grids_json(grids),
        "quadrature": to_json(&r.quadrature),
        "tolerances": tolerances_json(),
        "seed": r.seed,
    })
}

pub fn run_check(spec_text: &str, overrides: &Overrides) -> Result<Output, Failure> {
    let spec = CheckSpec::parse(spec_text)?;
    let r = ResolvedPair::from_spec(&spec, overrides, true)?;
    let grids = AuditGrids::for_pair(&r.a, &r.b, &r.grid)?;
    let mut verdicts = Vec::with_capacity(r.requests.len());
    for &(relation, direction) in &r.requests {
        let [greater, smaller] = check_relation_both(relation, &r.a, &r.b, &grids, &r.quadrature)?;
        verdicts.push(if direction == Direction::FirstGreater { greater } else { smaller });
    }
    let code = verdict_exit_code(&verdicts);
    let mut text = String::new();
    let _ = writeln!(text, "system_a: {} mus={:?} sigma={}", r.a.topology(), r.a.mus(), r.a.sigma());
    let _ = writeln!(text, "system_b: {} mus={:?} sigma={}", r.b.topology(), r.b.mus(), r.b.sigma());
    text.push_str(&verdict_table(&verdicts));
    let json = json!({
        "command": "check",
        "config": pair_config(&r, &grids),
        "verdicts": verdicts.iter().map(verdict_json).collect::<Vec<_>>(),
        "exit_code": code,
    });
    Ok(Output { code, text, json })
}

pub fn run_scan_command(spec: &ScanSpec, overrides: &Overrides) -> Result<Output, Failure> {
    let (grid, q) = resolved_defaults(overrides)?;
    let report = run_scan(spec, &grid, &q)?;
    Ok(Output { code: report.exit_code(), text: report.to_text(), json: report.to_json() })
}

fn entropy_section(s: &SystemModel, ts: &[f64], q: &QuadratureSpec, text: &mut String) -> (Value, bool) {
    let mut clean = true;
    let shannon = match shannon_entropy(s, q) {
        Ok(h) => {
            clean &= h.converged;
            let _ = writeln!(
                text,
                "  shannon entropy {:.15e} (error {:.3e}, converged {})",
                h.value, h.error_estimate, h.converged
            );
            to_json(&h)
        }
        Err(e) => {
            clean = false;
            let _ = writeln!(text, "  shannon entropy: {e}");
            json!({"error": e.to_string()})
        }
    };
    let reference = (s.n() == 1).then(|| num(s.sigma().ln() + 1.0 + EULER_GAMMA));
    let _ = writeln!(text, "  {:>24}  {:>24}  {:>24}  {:>10}  converged", "t", "hazard form", "density form", "gap");
    let mut curve = Vec::with_capacity(ts.len());
    for &t in ts {
        match residual_entropy_forms(s, t, q) {
            Ok(f) => {
                clean &= f.converged;
                let _ = writeln!(
                    text,
                    "  {:>24.15e}  {:>24.15e}  {:>24.15e}  {:>10.2e}  {}",
                    t,
                    f.hazard_form,
                    f.density_form,
                    f.discrepancy(),
                    f.converged
                );
                curve.push(json!({
                    "t": num(t),
                    "value": num(f.hazard_form),
                    "density_form": num(f.density_form),
                    "discrepancy": num(f.discrepancy()),
                    "survival_at_t": num(f.survival_at_t),
                    "error_estimate": num(f.hazard_form_error.max(f.density_form_error)),
                    "converged": f.converged,
                }));
            }
            Err(e) => {
                clean = false;
                let _ = writeln!(text, "  {t:>24.15e}  error: {e}");
                curve.push(json!({"t": num(t), "error": e.to_string()}));
            }
        }
    }
    let json = json!({
        "system": to_json(s),
        "shannon": shannon,
        "single_component_reference": reference,
        "residual": curve,
    });
    (json, clean)
}

/// Shannon entropy and the residual entropy curve of `system_a` (and of
/// `system_b` when present) over the conditioning-time grid.
pub fn run_entropy(spec_text: &str, overrides: &Overrides) -> Result<Output, Failure> {
    let spec = CheckSpec::parse(spec_text)?;
    let a = spec.system_a.build("system_a")?;
    let b = spec.system_b.as_ref().map(|s| s.build("system_b")).transpose()?;
    let grid = resolve_grid(&spec.grid, overrides)?;
    let q = resolve_quadrature(&spec.quadrature, overrides)?;
    let partner = b.as_ref().unwrap_or(&a);
    let t_grid = make_time_grid(&a, partner, grid.t_points, grid.t_tail)?;
    let mut text = String::new();
    let mut sections = Vec::new();
    let mut clean = true;
    for (name, s) in [("system_a", Some(&a)), ("system_b", b.as_ref())] {
        let Some(s) = s else { continue };
        let _ = writeln!(text, "{name}: {} mus={:?} sigma={}", s.topology(), s.mus(), s.sigma());
        let (section, ok) = entropy_section(s, t_grid.points(), &q, &mut text);
        clean &= ok;
        sections.push(json!({"name": name, "report": section}));
    }
    let code = if clean { EXIT_OK } else { EXIT_INCONCLUSIVE };
    let json = json!({
        "command": "entropy",
        "config": {
            "grid": to_json(&grid),
            "t_grid": {"count": t_grid.count(), "lo": num(t_grid.points()[0]), "hi": num(t_grid.points()[t_grid.count() - 1])},
            "quadrature": to_json(&q),
        },
        "systems": sections,
        "exit_code": code,
    });
    Ok(Output { code, text, json })
}

/// Monte Carlo cross-check of the usual stochastic order and the
/// interquantile spread for a pair of systems.
pub fn run_simulate(spec_text: &str, overrides: &Overrides) -> Result<Output, Failure> {
    let spec = CheckSpec::parse(spec_text)?;
    let r = ResolvedPair::from_spec(&spec, overrides, false)?;
    let samples = spec.simulate.samples.unwrap_or(DEFAULT_SAMPLES);
    let points = overrides.grid_points.or(spec.simulate.grid_points).unwrap_or(DEFAULT_SIM_GRID_POINTS);
    let alpha = spec.simulate.alpha.unwrap_or(0.25);
    let beta = spec.simulate.beta.unwrap_or(0.75);
    if samples == 0 {
        return Err(Failure::usage("simulate.samples must be at least 1"));
    }
    let grid = make_grid_with(&r.a, &r.b, points, r.grid.tail_mass)?;
    let dominance = empirical_cdf_dominance(&r.a, &r.b, r.seed, samples, &grid)?;
    let spread = empirical_quantile_spread(&r.a, &r.b, r.seed, samples, alpha, beta)?;
    let exact_spread = |s: &SystemModel| -> Result<f64, Failure> { Ok(s.quantile(beta)? - s.quantile(alpha)?) };
    let analytic_spread = exact_spread(&r.b)? - exact_spread(&r.a)?;
    let spread_z = spread.z_score(analytic_spread);
    let st = [Direction::FirstGreater, Direction::FirstSmaller]
        .map(|d| check_st(&r.a, &r.b, &grid, d))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let max_z = dominance
        .points
        .iter()
        .filter(|p| p.estimate.std_error > 0.0)
        .map(|p| p.estimate.z_score(p.analytic).abs())
        .fold(0.0, f64::max);
    let spread_ok = spread_z.abs() <= CONTRADICTION_SES;
    let code = if dominance.contradictions == 0 && spread_ok { EXIT_OK } else { EXIT_FAILS };

    let mut text = String::new();
    let _ = writeln!(text, "samples per system: {samples}, seed: {}, grid points: {}", r.seed, grid.count());
    let _ = writeln!(text, "cdf dominance contradictions (> {CONTRADICTION_SES} SE): {}", dominance.contradictions);
    let _ = writeln!(text, "largest |z| of F_a - F_b against the exact difference: {max_z:.3}");
    let _ = writeln!(
        text,
        "spread difference Q({beta}) - Q({alpha}), b minus a: {:.9e} +/- {:.3e} (exact {:.9e}, z = {spread_z:.3})",
        spread.value, spread.std_error, analytic_spread
    );
    text.push_str(&verdict_table(&st));
    let flagged: Vec<Value> = dominance
        .points
        .iter()
        .filter(|p| p.contradiction)
        .map(|p| {
            json!({
                "x": num(p.x),
                "estimate": num(p.estimate.value),
                "std_error": num(p.estimate.std_error),
                "analytic": num(p.analytic),
            })
        })
        .collect();
    let json = json!({
        "command": "simulate",
        "config": {
            "system_a": to_json(&r.a),
            "system_b": to_json(&r.b),
            "seed": r.seed,
            "samples": samples,
            "grid": {"count": grid.count(), "lo": num(grid.points()[0]), "hi": num(grid.points()[grid.count() - 1]), "tail_mass": num(r.grid.tail_mass)},
            "alpha": num(alpha),
            "beta": num(beta),
            "contradiction_ses": num(CONTRADICTION_SES),
        },
        "cdf_dominance": {
            "contradictions": dominance.contradictions,
            "max_abs_z": num(max_z),
            "flagged_points": flagged,
        },
        "quantile_spread": {
            "estimate": to_json(&spread),
            "analytic": num(analytic_spread),
            "z": num(spread_z),
        },
        "analytic_st": st.iter().map(verdict_json).collect::<Vec<_>>(),
        "exit_code": code,
    });
    Ok(Output { code, text, json })
}

/// Default grid and quadrature settings after overrides, for scans.
pub fn resolved_defaults(overrides: &Overrides) -> Result<(GridConfig, QuadratureSpec), Failure> {
    Ok((resolve_grid(&Default::default(), overrides)?, resolve_quadrature(&Default::default(), overrides)?))
}

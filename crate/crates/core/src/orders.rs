//! Grid-based verdicts for the stochastic orders between two systems.
//!
//! A grid can never prove a statement about every `x`, so `Holds` means
//! that no violation beyond tolerance was found on the audit grid. `Fails`
//! always carries a witness. `Inconclusive` means the numerics could not
//! support either answer.
//!
//! Direction convention: `FirstSmaller` asks whether `a ≤ b` in the
//! relation, `FirstGreater` whether `a ≥ b`.
//!
//! | relation | `X ≤ Y` means |
//! |---|---|
//! | `lr` | `ln f_Y − ln f_X` nondecreasing |
//! | `rh` | `r̃_X ≤ r̃_Y` |
//! | `hr` | `r_X ≥ r_Y` |
//! | `st` | `F_X ≥ F_Y` |
//! | `disp` | `f_Y(Q_Y(p)) ≤ f_X(Q_X(p))` |
//! | `lu` | `H(f_X, t) ≤ H(f_Y, t)` |
//!
//! The `hr` and `rh` checks also cover the line beyond the grid: the
//! integrated rate difference over the unseen tail equals a log-ratio of
//! survival (resp. distribution) functions at the grid edge, which must
//! have the right sign.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::entropy::{entropy_curve, QuadratureSpec};
use crate::error::{Error, Result};
use crate::systems::{make_grid_with, make_time_grid, EvalGrid, Lifetime, SystemModel};

pub const DEFAULT_X_POINTS: usize = 2049;
pub const DEFAULT_P_POINTS: usize = 513;
pub const DEFAULT_T_POINTS: usize = 64;
pub const DEFAULT_T_TAIL: f64 = 1e-3;

pub const LR_STEP_SLACK: f64 = 1e-9;
pub const RATE_REL_SLACK: f64 = 1e-10;
pub const ST_ABS_SLACK: f64 = 1e-12;
pub const SPREAD_REL_SLACK: f64 = 1e-9;
pub const MAX_SKIPPED_FRACTION: f64 = 0.2;
pub const TAIL_ABS_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Lr,
    Hr,
    Rh,
    St,
    Disp,
    Lu,
}

impl Relation {
    pub const ALL: [Relation; 6] =
        [Relation::Lr, Relation::Hr, Relation::Rh, Relation::St, Relation::Disp, Relation::Lu];

    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Lr => "lr",
            Relation::Hr => "hr",
            Relation::Rh => "rh",
            Relation::St => "st",
            Relation::Disp => "disp",
            Relation::Lu => "lu",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Relation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Relation::ALL
            .into_iter()
            .find(|r| r.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Usage(format!("unknown relation {s:?}; expected one of lr, hr, rh, st, disp, lu")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    FirstGreater,
    FirstSmaller,
}

impl Direction {
    pub fn reversed(self) -> Self {
        match self {
            Direction::FirstGreater => Direction::FirstSmaller,
            Direction::FirstSmaller => Direction::FirstGreater,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::FirstGreater => "first_greater",
            Direction::FirstSmaller => "first_smaller",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "first_greater" | "greater" | "ge" => Ok(Direction::FirstGreater),
            "first_smaller" | "smaller" | "le" => Ok(Direction::FirstSmaller),
            other => Err(Error::Usage(format!("unknown direction {other:?}; expected first_greater or first_smaller"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Holds,
    Fails,
    Inconclusive,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Holds => "holds",
            Outcome::Fails => "fails",
            Outcome::Inconclusive => "inconclusive",
        })
    }
}

/// The grid point that broke the inequality `lhs ≥ rhs`.
///
/// For `lr` the two sides are consecutive values of the log ratio, for
/// `disp` the abscissa is a probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub x: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderVerdict {
    pub relation: Relation,
    pub direction: Direction,
    pub outcome: Outcome,
    pub witness: Option<Witness>,
    /// Smallest `lhs − rhs` seen; negative values inside tolerance are absorbed.
    pub margin: f64,
    pub points_checked: usize,
    pub note: Option<String>,
}

impl OrderVerdict {
    pub fn holds(&self) -> bool {
        self.outcome == Outcome::Holds
    }

    pub fn fails(&self) -> bool {
        self.outcome == Outcome::Fails
    }
}

/// Grid sizes and tail cutoffs for a full comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridConfig {
    pub x_points: usize,
    pub p_points: usize,
    pub t_points: usize,
    pub tail_mass: f64,
    pub t_tail: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            x_points: DEFAULT_X_POINTS,
            p_points: DEFAULT_P_POINTS,
            t_points: DEFAULT_T_POINTS,
            tail_mass: crate::systems::DEFAULT_TAIL_MASS,
            t_tail: DEFAULT_T_TAIL,
        }
    }
}

/// The abscissa, probability and conditioning-time grids for one pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditGrids {
    pub x: EvalGrid,
    pub p: EvalGrid,
    pub t: EvalGrid,
}

impl AuditGrids {
    pub fn for_pair(a: &SystemModel, b: &SystemModel, config: &GridConfig) -> Result<Self> {
        Ok(Self {
            x: make_grid_with(a, b, config.x_points, config.tail_mass)?,
            p: EvalGrid::probabilities(config.p_points, config.tail_mass)?,
            t: make_time_grid(a, b, config.t_points, config.t_tail)?,
        })
    }
}

fn require_comparable(a: &SystemModel, b: &SystemModel) -> Result<()> {
    if a.sigma() != b.sigma() {
        return Err(Error::Usage(format!("systems must share sigma, got {} and {}", a.sigma(), b.sigma())));
    }
    if a.topology() != b.topology() {
        return Err(Error::Usage(format!("systems must share topology, got {} and {}", a.topology(), b.topology())));
    }
    Ok(())
}

/// Values at each abscissa such that `X ≤ Y` reads `lhs ≥ rhs`.
///
/// `tail` is an optional extra condition of the same shape covering the
/// part of the line outside the grid.
struct Pointwise {
    xs: Vec<f64>,
    lhs: Vec<f64>,
    rhs: Vec<f64>,
    tail: Option<Witness>,
}

#[derive(Clone, Copy)]
enum Slack {
    Absolute(f64),
    /// Relative to `max(1, |lhs|, |rhs|)`.
    Floored(f64),
    /// Relative to `max(|lhs|, |rhs|)`.
    Relative(f64),
}

impl Slack {
    fn at(self, lhs: f64, rhs: f64) -> f64 {
        match self {
            Slack::Absolute(s) => s,
            Slack::Floored(s) => s * lhs.abs().max(rhs.abs()).max(1.0),
            Slack::Relative(s) => s * lhs.abs().max(rhs.abs()),
        }
    }
}

fn inconclusive(relation: Relation, direction: Direction, margin: f64, points: usize, note: String) -> OrderVerdict {
    OrderVerdict {
        relation,
        direction,
        outcome: Outcome::Inconclusive,
        witness: None,
        margin: if margin.is_finite() { margin } else { 0.0 },
        points_checked: points,
        note: Some(note),
    }
}

fn too_many_skipped(skipped: usize, total: usize) -> bool {
    total == 0 || skipped as f64 > MAX_SKIPPED_FRACTION * total as f64
}

fn pointwise_verdict(relation: Relation, direction: Direction, data: &Pointwise, slack: Slack) -> OrderVerdict {
    let (lhs, rhs) = match direction {
        Direction::FirstSmaller => (&data.lhs, &data.rhs),
        Direction::FirstGreater => (&data.rhs, &data.lhs),
    };
    let mut margin = f64::INFINITY;
    let mut worst: Option<(f64, Witness)> = None;
    let mut checked = 0;
    for ((&x, &l), &r) in data.xs.iter().zip(lhs).zip(rhs) {
        if !(l.is_finite() && r.is_finite()) {
            continue;
        }
        checked += 1;
        let gap = l - r;
        margin = margin.min(gap);
        let excess = gap + slack.at(l, r);
        if excess < 0.0 && worst.is_none_or(|(e, _)| excess < e) {
            worst = Some((excess, Witness { x, lhs: l, rhs: r }));
        }
    }
    let skipped = data.xs.len() - checked;
    if too_many_skipped(skipped, data.xs.len()) {
        return inconclusive(
            relation,
            direction,
            margin,
            checked,
            format!("{skipped} of {} grid values were not representable", data.xs.len()),
        );
    }
    let mut note = (skipped > 0).then(|| format!("{skipped} unrepresentable grid values skipped"));
    if let Some(t) = data.tail {
        let (l, r) = match direction {
            Direction::FirstSmaller => (t.lhs, t.rhs),
            Direction::FirstGreater => (t.rhs, t.lhs),
        };
        let gap = l - r;
        if gap.is_finite() {
            margin = margin.min(gap);
            if gap < -TAIL_ABS_SLACK && worst.is_none() {
                worst = Some((gap, Witness { x: t.x, lhs: l, rhs: r }));
                note = Some(format!("violated beyond the grid: log ratio at its edge x = {} is {gap:e}", t.x));
            }
        }
    }
    OrderVerdict {
        relation,
        direction,
        outcome: if worst.is_some() { Outcome::Fails } else { Outcome::Holds },
        witness: worst.map(|(_, w)| w),
        margin,
        points_checked: checked,
        note,
    }
}

/// Nondecreasing-sequence check over consecutive representable values.
fn monotone_verdict(
    relation: Relation,
    direction: Direction,
    xs: &[f64],
    values: &[f64],
    step_slack: f64,
    tails: &[Witness],
) -> OrderVerdict {
    let mut margin = f64::INFINITY;
    let mut first: Option<Witness> = None;
    let mut prev: Option<f64> = None;
    let mut checked = 0;
    for (&x, &g) in xs.iter().zip(values) {
        if !g.is_finite() {
            continue;
        }
        checked += 1;
        if let Some(p) = prev {
            let step = g - p;
            margin = margin.min(step);
            if step < -step_slack && first.is_none() {
                first = Some(Witness { x, lhs: g, rhs: p });
            }
        }
        prev = Some(g);
    }
    let skipped = xs.len() - checked;
    if too_many_skipped(skipped, xs.len()) || checked < 2 {
        return inconclusive(
            relation,
            direction,
            margin,
            checked,
            format!("{skipped} of {} grid values were not representable", xs.len()),
        );
    }
    let mut note = (skipped > 0).then(|| format!("{skipped} unrepresentable grid values skipped"));
    for t in tails {
        let gap = t.lhs - t.rhs;
        if !gap.is_finite() {
            continue;
        }
        margin = margin.min(gap);
        if gap < -Slack::Floored(step_slack).at(t.lhs, t.rhs) && first.is_none() {
            first = Some(*t);
            note = Some(format!("violated beyond the grid: edge condition at x = {} misses by {gap:e}", t.x));
        }
    }
    OrderVerdict {
        relation,
        direction,
        outcome: if first.is_some() { Outcome::Fails } else { Outcome::Holds },
        witness: first,
        margin,
        points_checked: checked,
        note,
    }
}

fn lr_profile(a: &SystemModel, b: &SystemModel, grid: &EvalGrid) -> Vec<f64> {
    grid.points().iter().map(|&x| b.log_pdf(x) - a.log_pdf(x)).collect()
}

// If g = ln f_Y − ln f_X is nondecreasing beyond the upper edge then
// ln F̄_Y − ln F̄_X ≥ g there, and below the lower edge ln F_Y − ln F_X ≤ g.
// Both are checked so that an unseen tail violation is not missed.
fn lr_edges(x: &SystemModel, y: &SystemModel, lo: f64, hi: f64) -> [Witness; 2] {
    [
        Witness { x: lo, lhs: y.log_pdf(lo) - x.log_pdf(lo), rhs: y.log_cdf(lo) - x.log_cdf(lo) },
        Witness { x: hi, lhs: y.log_survival(hi) - x.log_survival(hi), rhs: y.log_pdf(hi) - x.log_pdf(hi) },
    ]
}

fn lr_pair(a: &SystemModel, b: &SystemModel, grid: &EvalGrid) -> [OrderVerdict; 2] {
    let g = lr_profile(a, b, grid);
    let neg: Vec<f64> = g.iter().map(|v| -v).collect();
    let xs = grid.points();
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    [
        monotone_verdict(Relation::Lr, Direction::FirstGreater, xs, &neg, LR_STEP_SLACK, &lr_edges(b, a, lo, hi)),
        monotone_verdict(Relation::Lr, Direction::FirstSmaller, xs, &g, LR_STEP_SLACK, &lr_edges(a, b, lo, hi)),
    ]
}

fn pick(pair: [OrderVerdict; 2], direction: Direction) -> OrderVerdict {
    let [greater, smaller] = pair;
    match direction {
        Direction::FirstGreater => greater,
        Direction::FirstSmaller => smaller,
    }
}

fn pointwise_pair(relation: Relation, data: &Pointwise, slack: Slack) -> [OrderVerdict; 2] {
    [
        pointwise_verdict(relation, Direction::FirstGreater, data, slack),
        pointwise_verdict(relation, Direction::FirstSmaller, data, slack),
    ]
}

fn sample_pointwise<F: Fn(f64) -> (f64, f64)>(grid: &[f64], f: F) -> Pointwise {
    let mut data = Pointwise {
        xs: grid.to_vec(),
        lhs: Vec::with_capacity(grid.len()),
        rhs: Vec::with_capacity(grid.len()),
        tail: None,
    };
    for &x in grid {
        let (l, r) = f(x);
        data.lhs.push(l);
        data.rhs.push(r);
    }
    data
}

// Above the grid, ∫ (r̃_Y − r̃_X) = ln F_X − ln F_Y at the upper edge, so a
// reversed-hazard violation in the unseen tail shows up there.
fn rh_pair(a: &SystemModel, b: &SystemModel, grid: &EvalGrid) -> [OrderVerdict; 2] {
    let mut data = sample_pointwise(grid.points(), |x| (b.reversed_hazard(x), a.reversed_hazard(x)));
    let hi = *grid.points().last().expect("grids are nonempty");
    data.tail = Some(Witness { x: hi, lhs: a.log_cdf(hi), rhs: b.log_cdf(hi) });
    pointwise_pair(Relation::Rh, &data, Slack::Floored(RATE_REL_SLACK))
}

// Below the grid, ∫ (r_X − r_Y) = ln F̄_Y − ln F̄_X at the lower edge.
fn hr_pair(a: &SystemModel, b: &SystemModel, grid: &EvalGrid) -> [OrderVerdict; 2] {
    let mut data = sample_pointwise(grid.points(), |x| (a.hazard(x), b.hazard(x)));
    let lo = grid.points()[0];
    data.tail = Some(Witness { x: lo, lhs: b.log_survival(lo), rhs: a.log_survival(lo) });
    pointwise_pair(Relation::Hr, &data, Slack::Floored(RATE_REL_SLACK))
}

fn st_pair(a: &SystemModel, b: &SystemModel, grid: &EvalGrid) -> [OrderVerdict; 2] {
    let data = sample_pointwise(grid.points(), |x| (a.cdf(x), b.cdf(x)));
    pointwise_pair(Relation::St, &data, Slack::Absolute(ST_ABS_SLACK))
}

fn disp_pair(a: &SystemModel, b: &SystemModel, p_grid: &EvalGrid) -> Result<[OrderVerdict; 2]> {
    let ps = p_grid.points();
    if ps.iter().any(|&p| !(p > 0.0 && p < 1.0)) {
        return Err(Error::Domain("probability grid must lie inside (0, 1)".into()));
    }
    let mut qa = Vec::with_capacity(ps.len());
    let mut qb = Vec::with_capacity(ps.len());
    for &p in ps {
        qa.push(a.quantile(p)?);
        qb.push(b.quantile(p)?);
    }
    let density = Pointwise {
        xs: ps.to_vec(),
        lhs: qa.iter().map(|&q| a.pdf(q)).collect(),
        rhs: qb.iter().map(|&q| b.pdf(q)).collect(),
        tail: None,
    };
    let spread: Vec<f64> = qb.iter().zip(&qa).map(|(y, x)| y - x).collect();
    let scale: Vec<f64> = qa.iter().zip(&qb).map(|(x, y)| x.abs().max(y.abs()).max(1.0)).collect();
    let combine = |direction: Direction| {
        let by_density = pointwise_verdict(Relation::Disp, direction, &density, Slack::Relative(RATE_REL_SLACK));
        let sign = if direction == Direction::FirstSmaller { 1.0 } else { -1.0 };
        let spread_fails = spread_violation(&spread, &scale, sign);
        match (by_density.outcome, spread_fails) {
            (Outcome::Inconclusive, _) => by_density,
            (Outcome::Holds, None) => by_density,
            (Outcome::Fails, Some(_)) => by_density,
            (Outcome::Holds, Some(k)) => inconclusive(
                Relation::Disp,
                direction,
                by_density.margin,
                by_density.points_checked,
                format!("density criterion holds but quantile spread decreases at p = {}", ps[k]),
            ),
            (Outcome::Fails, None) => inconclusive(
                Relation::Disp,
                direction,
                by_density.margin,
                by_density.points_checked,
                format!(
                    "density criterion fails at p = {} but quantile spreads are consistent",
                    by_density.witness.map_or(f64::NAN, |w| w.x)
                ),
            ),
        }
    };
    Ok([combine(Direction::FirstGreater), combine(Direction::FirstSmaller)])
}

/// Index where `sign·spread` drops below its running maximum beyond tolerance.
fn spread_violation(spread: &[f64], scale: &[f64], sign: f64) -> Option<usize> {
    let mut running = f64::NEG_INFINITY;
    for (k, (&d, &s)) in spread.iter().zip(scale).enumerate() {
        let d = sign * d;
        if d < running - SPREAD_REL_SLACK * s {
            return Some(k);
        }
        running = running.max(d);
    }
    None
}

fn lu_pair(a: &SystemModel, b: &SystemModel, t_grid: &EvalGrid, q: &QuadratureSpec) -> Result<[OrderVerdict; 2]> {
    q.validate()?;
    let ts = t_grid.points();
    let ha = entropy_curve(a, ts, q);
    let hb = entropy_curve(b, ts, q);
    let mut data = Pointwise { xs: ts.to_vec(), lhs: Vec::new(), rhs: Vec::new(), tail: None };
    let mut trouble = Vec::new();
    for ((&t, ea), eb) in ts.iter().zip(ha).zip(hb) {
        match (ea, eb) {
            (Ok(ea), Ok(eb)) => {
                if !(ea.converged && eb.converged) {
                    trouble.push(format!("quadrature did not converge at t = {t}"));
                }
                data.lhs.push(eb.value);
                data.rhs.push(ea.value);
            }
            (Err(e), _) | (_, Err(e)) => {
                trouble.push(format!("t = {t}: {e}"));
                data.lhs.push(f64::NAN);
                data.rhs.push(f64::NAN);
            }
        }
    }
    let slack = Slack::Floored(2.0 * q.rel_tol);
    let verdicts = pointwise_pair(Relation::Lu, &data, slack);
    if trouble.is_empty() {
        return Ok(verdicts);
    }
    let note = format!("{} problem point(s); first: {}", trouble.len(), trouble[0]);
    Ok(verdicts.map(|v| inconclusive(Relation::Lu, v.direction, v.margin, v.points_checked, note.clone())))
}

/// Likelihood-ratio order on the abscissa grid, using log-density differences.
pub fn check_lr(a: &SystemModel, b: &SystemModel, grid: &EvalGrid, direction: Direction) -> Result<OrderVerdict> {
    require_comparable(a, b)?;
    Ok(pick(lr_pair(a, b, grid), direction))
}

pub fn check_rh(a: &SystemModel, b: &SystemModel, grid: &EvalGrid, direction: Direction) -> Result<OrderVerdict> {
    require_comparable(a, b)?;
    Ok(pick(rh_pair(a, b, grid), direction))
}

pub fn check_hr(a: &SystemModel, b: &SystemModel, grid: &EvalGrid, direction: Direction) -> Result<OrderVerdict> {
    require_comparable(a, b)?;
    Ok(pick(hr_pair(a, b, grid), direction))
}

pub fn check_st(a: &SystemModel, b: &SystemModel, grid: &EvalGrid, direction: Direction) -> Result<OrderVerdict> {
    require_comparable(a, b)?;
    Ok(pick(st_pair(a, b, grid), direction))
}

/// Dispersive order by the density-at-quantile criterion, cross-checked
/// against monotonicity of the quantile difference; disagreement between
/// the two is reported as `Inconclusive`.
pub fn check_disp(a: &SystemModel, b: &SystemModel, p_grid: &EvalGrid, direction: Direction) -> Result<OrderVerdict> {
    require_comparable(a, b)?;
    Ok(pick(disp_pair(a, b, p_grid)?, direction))
}

/// Less-uncertainty order over conditioning times; any quadrature trouble
/// makes the verdict `Inconclusive`.
pub fn check_lu(
    a: &SystemModel,
    b: &SystemModel,
    t_grid: &EvalGrid,
    q: &QuadratureSpec,
    direction: Direction,
) -> Result<OrderVerdict> {
    require_comparable(a, b)?;
    Ok(pick(lu_pair(a, b, t_grid, q)?, direction))
}

/// Both directions of one relation from a single evaluation, as
/// `[FirstGreater, FirstSmaller]`.
pub fn check_relation_both(
    relation: Relation,
    a: &SystemModel,
    b: &SystemModel,
    grids: &AuditGrids,
    q: &QuadratureSpec,
) -> Result<[OrderVerdict; 2]> {
    require_comparable(a, b)?;
    match relation {
        Relation::Lr => Ok(lr_pair(a, b, &grids.x)),
        Relation::Rh => Ok(rh_pair(a, b, &grids.x)),
        Relation::Hr => Ok(hr_pair(a, b, &grids.x)),
        Relation::St => Ok(st_pair(a, b, &grids.x)),
        Relation::Disp => disp_pair(a, b, &grids.p),
        Relation::Lu => lu_pair(a, b, &grids.t, q),
    }
}

pub fn check_relation(
    relation: Relation,
    direction: Direction,
    a: &SystemModel,
    b: &SystemModel,
    grids: &AuditGrids,
    q: &QuadratureSpec,
) -> Result<OrderVerdict> {
    Ok(pick(check_relation_both(relation, a, b, grids, q)?, direction))
}

fn monotone_within<F: Fn(f64) -> f64>(f: F, grid: &EvalGrid, sign: f64) -> bool {
    let values: Vec<f64> = grid.points().iter().map(|&x| f(x)).filter(|v| v.is_finite()).collect();
    values.windows(2).all(|w| sign * (w[1] - w[0]) <= RATE_REL_SLACK * w[0].abs().max(w[1].abs()).max(1.0))
}

/// Hazard nonincreasing in `x` across the grid.
pub fn is_dhr<L: Lifetime + ?Sized>(s: &L, grid: &EvalGrid) -> bool {
    monotone_within(|x| s.hazard(x), grid, 1.0)
}

/// Reversed hazard nondecreasing in `x` across the grid.
pub fn is_irhr<L: Lifetime + ?Sized>(s: &L, grid: &EvalGrid) -> bool {
    monotone_within(|x| s.reversed_hazard(x), grid, -1.0)
}

/// An upstream `Holds` next to a downstream `Fails` in the same direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyViolation {
    pub direction: Direction,
    pub upstream: Relation,
    pub downstream: Relation,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub verdicts: Vec<OrderVerdict>,
    pub dhr_a: bool,
    pub dhr_b: bool,
    pub violations: Vec<ConsistencyViolation>,
}

impl AuditReport {
    pub fn verdict(&self, relation: Relation, direction: Direction) -> Option<&OrderVerdict> {
        self.verdicts.iter().find(|v| v.relation == relation && v.direction == direction)
    }

    pub fn is_consistent(&self) -> bool {
        self.violations.is_empty()
    }
}

const CHAIN: [(Relation, Relation); 4] = [
    (Relation::Lr, Relation::Hr),
    (Relation::Lr, Relation::Rh),
    (Relation::Hr, Relation::St),
    (Relation::Rh, Relation::St),
];

const UNDER_DHR: [(Relation, Relation); 2] = [(Relation::Hr, Relation::Disp), (Relation::Hr, Relation::Lu)];

/// Runs `relations` in both directions and reports every implication that
/// the verdicts contradict. Implications through `disp` and `lu` are only
/// asserted when one of the systems is DHR on the grid.
pub fn implication_audit(
    a: &SystemModel,
    b: &SystemModel,
    grids: &AuditGrids,
    q: &QuadratureSpec,
    relations: &[Relation],
) -> Result<AuditReport> {
    require_comparable(a, b)?;
    let mut verdicts = Vec::with_capacity(2 * relations.len());
    for &r in relations {
        verdicts.extend(check_relation_both(r, a, b, grids, q)?);
    }
    let dhr_a = is_dhr(a, &grids.x);
    let dhr_b = is_dhr(b, &grids.x);
    let mut report = AuditReport { verdicts, dhr_a, dhr_b, violations: Vec::new() };
    let rules = CHAIN.iter().chain(if dhr_a || dhr_b { &UNDER_DHR[..] } else { &[] });
    for &(up, down) in rules {
        for direction in [Direction::FirstGreater, Direction::FirstSmaller] {
            if let (Some(u), Some(d)) = (report.verdict(up, direction), report.verdict(down, direction)) {
                if u.holds() && d.fails() {
                    report.violations.push(ConsistencyViolation {
                        direction,
                        upstream: up,
                        downstream: down,
                        witness: d.witness,
                    });
                }
            }
        }
    }
    Ok(report)
}

//! TOML spec files and their resolution into library types.

use gumbel_order::entropy::QuadratureSpec;
use gumbel_order::orders::GridConfig;
use gumbel_order::{Direction, Relation, SystemModel, Topology};
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub topology: Topology,
    pub mus: Vec<f64>,
    pub sigma: f64,
}

impl SystemSpec {
    pub fn build(&self, name: &str) -> Result<SystemModel, Failure> {
        SystemModel::new(self.topology, self.mus.clone(), self.sigma)
            .map_err(|e| Failure::usage(format!("{name}: {e}")))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_points: Option<usize>,
    pub p_points: Option<usize>,
    pub t_points: Option<usize>,
    pub tail_mass: Option<f64>,
    pub t_tail: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureOverrides {
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub tail_mass_cutoff: Option<f64>,
    pub max_subdivisions: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSpec {
    pub samples: Option<usize>,
    pub grid_points: Option<usize>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
}

/// Everything a spec file may contain; each command reads what it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub system_a: SystemSpec,
    pub system_b: Option<SystemSpec>,
    #[serde(default)]
    pub relations: Vec<String>,
    pub direction: Option<String>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub quadrature: QuadratureOverrides,
    #[serde(default)]
    pub simulate: SimulateSpec,
}

impl CheckSpec {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        toml::from_str(text).map_err(|e| Failure::usage(format!("malformed spec file: {e}")))
    }
}

/// Command-line overrides, applied after the spec file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub grid_points: Option<usize>,
    pub tail_cutoff: Option<f64>,
    pub tol: Option<f64>,
}

pub fn resolve_grid(spec: &GridSpec, overrides: &Overrides) -> Result<GridConfig, Failure> {
    let d = GridConfig::default();
    let grid = GridConfig {
        x_points: overrides.grid_points.or(spec.x_points).unwrap_or(d.x_points),
        p_points: spec.p_points.unwrap_or(d.p_points),
        t_points: spec.t_points.unwrap_or(d.t_points),
        tail_mass: overrides.tail_cutoff.or(spec.tail_mass).unwrap_or(d.tail_mass),
        t_tail: spec.t_tail.unwrap_or(d.t_tail),
    };
    for (name, v) in [("tail_mass", grid.tail_mass), ("t_tail", grid.t_tail)] {
        if !(v > 0.0 && v < 0.5) {
            return Err(Failure::usage(format!("grid.{name} must lie in (0, 0.5), got {v}")));
        }
    }
    Ok(grid)
}

pub fn resolve_quadrature(spec: &QuadratureOverrides, overrides: &Overrides) -> Result<QuadratureSpec, Failure> {
    let d = QuadratureSpec::default();
    let q = QuadratureSpec {
        rel_tol: overrides.tol.or(spec.rel_tol).unwrap_or(d.rel_tol),
        abs_tol: spec.abs_tol.unwrap_or(d.abs_tol),
        tail_mass_cutoff: spec.tail_mass_cutoff.unwrap_or(d.tail_mass_cutoff),
        max_subdivisions: spec.max_subdivisions.unwrap_or(d.max_subdivisions),
    };
    q.validate().map_err(|e| Failure::usage(format!("quadrature: {e}")))?;
    Ok(q)
}

/// Parses `"hr"`, `"hr:first_greater"` or `"hr:smaller"`.
pub fn parse_request(tag: &str, default: Direction) -> Result<(Relation, Direction), Failure> {
    let (rel, dir) = match tag.split_once(':') {
        Some((r, d)) => (r, Some(d)),
        None => (tag, None),
    };
    let relation: Relation = rel.parse().map_err(|e| Failure::usage(format!("relations: {e}")))?;
    let direction = match dir {
        Some(d) => d.parse().map_err(|e| Failure::usage(format!("relations: {e}")))?,
        None => default,
    };
    Ok((relation, direction))
}

/// A spec resolved for a two-system command.
#[derive(Debug, Clone)]
pub struct ResolvedPair {
    pub a: SystemModel,
    pub b: SystemModel,
    pub requests: Vec<(Relation, Direction)>,
    pub grid: GridConfig,
    pub quadrature: QuadratureSpec,
    pub seed: u64,
}

impl ResolvedPair {
    pub fn from_spec(spec: &CheckSpec, overrides: &Overrides, need_relations: bool) -> Result<Self, Failure> {
        let a = spec.system_a.build("system_a")?;
        let b = spec.system_b.as_ref().ok_or_else(|| Failure::usage("missing [system_b] table"))?.build("system_b")?;
        if a.sigma() != b.sigma() {
            return Err(Failure::usage(format!(
                "system_a and system_b must share sigma, got {} and {}",
                a.sigma(),
                b.sigma()
            )));
        }
        if a.topology() != b.topology() {
            return Err(Failure::usage(format!(
                "system_a and system_b must share topology, got {} and {}",
                a.topology(),
                b.topology()
            )));
        }
        let default = match &spec.direction {
            Some(d) => d.parse().map_err(|e| Failure::usage(format!("direction: {e}")))?,
            None => Direction::FirstSmaller,
        };
        let requests = spec.relations.iter().map(|t| parse_request(t, default)).collect::<Result<Vec<_>, _>>()?;
        if need_relations && requests.is_empty() {
            return Err(Failure::usage("relations must list at least one relation"));
        }
        Ok(Self {
            a,
            b,
            requests,
            grid: resolve_grid(&spec.grid, overrides)?,
            quadrature: resolve_quadrature(&spec.quadrature, overrides)?,
            seed: spec.seed.unwrap_or(0),
        })
    }
}

//! Problem descriptions: a JSON schema, a resolver into core objects, and
//! the built-in example.
//!
//! Coordinates and matrix entries accept either a JSON number or an exact
//! fraction written as a string, so a config can say `"-1/3"` instead of a
//! rounded decimal.

use std::path::PathBuf;

use serde::Deserialize;

use proxima_core::{CyclicMap, MapRule, Point, Region, Space};

/// The built-in twin-segment problem: two vertical segments two apart, each
/// mapped onto the other with its height flipped and shrunk.
pub const EXAMPLE_JSON: &str = r#"{
  "space": { "dim": 2, "p": 2 },
  "regions": {
    "omega": { "kind": "segment", "start": [-1, "-1/2"], "end": [-1, "1/2"] },
    "delta": { "kind": "segment", "start": [1, "-1/2"], "end": [1, "1/2"] }
  },
  "map": {
    "omega_rule": { "kind": "affine", "matrix": [[1, 0], [0, "-1/2"]], "offset": [2, 0] },
    "delta_rule": { "kind": "affine", "matrix": [[1, 0], [0, "-1/3"]], "offset": [-2, 0] }
  },
  "options": {
    "density": 11,
    "depth": 32,
    "eta": 0.95,
    "seeds": [[-1, "-1/2"]],
    "dist_density": 101
  }
}"#;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ConfigNumber {
    Number(f64),
    Fraction(String),
}

impl ConfigNumber {
    pub fn resolve(&self) -> Result<f64, String> {
        match self {
            ConfigNumber::Number(x) => Ok(*x),
            ConfigNumber::Fraction(s) => {
                let (num, den) = s.split_once('/').ok_or_else(|| {
                    format!("bad number {s:?}: expected a JSON number or an \"a/b\" fraction")
                })?;
                let a: i64 = num
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad numerator in fraction {s:?}"))?;
                let b: i64 = den
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad denominator in fraction {s:?}"))?;
                if b == 0 {
                    return Err(format!("zero denominator in fraction {s:?}"));
                }
                Ok(a as f64 / b as f64)
            }
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub space: SpaceCfg,
    pub regions: RegionsCfg,
    pub map: MapCfg,
    #[serde(default)]
    pub options: OptionsCfg,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceCfg {
    pub dim: usize,
    #[serde(default = "default_p")]
    pub p: ConfigNumber,
}

fn default_p() -> ConfigNumber {
    ConfigNumber::Number(2.0)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionsCfg {
    pub omega: RegionCfg,
    pub delta: RegionCfg,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionCfg {
    Finite { points: Vec<Vec<ConfigNumber>> },
    Segment { start: Vec<ConfigNumber>, end: Vec<ConfigNumber> },
    Box { lower: Vec<ConfigNumber>, upper: Vec<ConfigNumber> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapCfg {
    pub omega_rule: RuleCfg,
    pub delta_rule: RuleCfg,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RuleCfg {
    Affine {
        matrix: Vec<Vec<ConfigNumber>>,
        offset: Vec<ConfigNumber>,
    },
    Table {
        pairs: Vec<TablePairCfg>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TablePairCfg {
    pub from: Vec<ConfigNumber>,
    pub to: Vec<ConfigNumber>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptionsCfg {
    pub density: Option<usize>,
    pub depth: Option<usize>,
    pub eta: Option<f64>,
    pub seeds: Option<Vec<Vec<ConfigNumber>>>,
    pub max_iter: Option<usize>,
    pub dist_density: Option<usize>,
    pub trace_path: Option<String>,
    pub tolerances: Option<TolerancesCfg>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TolerancesCfg {
    pub gap_tol: f64,
    pub pair_tol: f64,
    pub membership_tol: f64,
}

impl Default for TolerancesCfg {
    fn default() -> Self {
        TolerancesCfg {
            gap_tol: 1e-9,
            pair_tol: 1e-9,
            membership_tol: 1e-9,
        }
    }
}

/// A fully resolved problem: core objects plus the option values every
/// subcommand draws its defaults from.
pub struct Problem {
    pub name: String,
    pub map: CyclicMap,
    pub density: usize,
    pub depth: usize,
    pub eta: Option<f64>,
    pub seeds: Vec<Point>,
    pub max_iter: usize,
    pub dist_density: usize,
    pub trace_path: Option<PathBuf>,
    pub gap_tol: f64,
    pub pair_tol: f64,
}

fn resolve_coords(raw: &[ConfigNumber]) -> Result<Vec<f64>, String> {
    raw.iter().map(|c| c.resolve()).collect()
}

fn resolve_point(space: Space, raw: &[ConfigNumber]) -> Result<Point, String> {
    Point::new(space, resolve_coords(raw)?).map_err(|e| e.to_string())
}

fn resolve_region(space: Space, cfg: &RegionCfg, membership_tol: f64) -> Result<Region, String> {
    let region = match cfg {
        RegionCfg::Finite { points } => {
            let members = points
                .iter()
                .map(|p| resolve_point(space, p))
                .collect::<Result<Vec<_>, _>>()?;
            Region::finite(members)
        }
        RegionCfg::Segment { start, end } => {
            Region::segment(resolve_point(space, start)?, resolve_point(space, end)?)
        }
        RegionCfg::Box { lower, upper } => {
            Region::box_region(resolve_point(space, lower)?, resolve_point(space, upper)?)
        }
    };
    region
        .and_then(|r| r.with_membership_tol(membership_tol))
        .map_err(|e| e.to_string())
}

fn resolve_rule(space: Space, cfg: &RuleCfg) -> Result<MapRule, String> {
    match cfg {
        RuleCfg::Affine { matrix, offset } => Ok(MapRule::Affine {
            matrix: matrix
                .iter()
                .map(|row| resolve_coords(row))
                .collect::<Result<Vec<_>, _>>()?,
            offset: resolve_coords(offset)?,
        }),
        RuleCfg::Table { pairs } => Ok(MapRule::Table(
            pairs
                .iter()
                .map(|pair| {
                    Ok((
                        resolve_point(space, &pair.from)?,
                        resolve_point(space, &pair.to)?,
                    ))
                })
                .collect::<Result<Vec<_>, String>>()?,
        )),
    }
}

pub fn build_problem(cfg: &ConfigFile, name: String) -> Result<Problem, String> {
    let p = cfg.space.p.resolve()?;
    let space = Space::new(cfg.space.dim, p).map_err(|e| e.to_string())?;
    let tols = cfg.options.tolerances.clone().unwrap_or_default();
    let omega = resolve_region(space, &cfg.regions.omega, tols.membership_tol)?;
    let delta = resolve_region(space, &cfg.regions.delta, tols.membership_tol)?;
    let omega_rule = resolve_rule(space, &cfg.map.omega_rule)?;
    let delta_rule = resolve_rule(space, &cfg.map.delta_rule)?;
    let map = CyclicMap::new(omega, delta, omega_rule, delta_rule).map_err(|e| e.to_string())?;

    let seeds = match &cfg.options.seeds {
        Some(raw) => raw
            .iter()
            .map(|s| resolve_point(space, s))
            .collect::<Result<Vec<_>, _>>()?,
        None => map.omega().sample(2, 0).map_err(|e| e.to_string())?,
    };
    if seeds.is_empty() {
        return Err("options.seeds must not be empty".into());
    }

    Ok(Problem {
        name,
        map,
        density: cfg.options.density.unwrap_or(11),
        depth: cfg.options.depth.unwrap_or(32),
        eta: cfg.options.eta,
        seeds,
        max_iter: cfg.options.max_iter.unwrap_or(10_000),
        dist_density: cfg.options.dist_density.unwrap_or(101),
        trace_path: cfg.options.trace_path.as_ref().map(PathBuf::from),
        gap_tol: tols.gap_tol,
        pair_tol: tols.pair_tol,
    })
}

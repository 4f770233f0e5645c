//! Scenario files: a versioned JSON description of a metric, quadrature
//! controls and the checks to run on it.

use std::collections::BTreeMap;
use std::sync::Arc;

use lcf_core::collar::{
    CollarFamily, CollarMetric, ExprCollar, FermiCollar, FermiOptions, FlatAmbientCollar, ProductReference,
};
use lcf_core::expr::Expr;
use lcf_core::metric::{ConformalFlat, MetricSource};
use lcf_core::scenarios;
use lcf_core::series::CharKind;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checks::CheckName;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("malformed scenario: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema version {0}, expected {SCHEMA_VERSION}")]
    Schema(u32),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

fn default_depth() -> f64 {
    1.0
}

/// How the metric is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MetricSpec {
    /// `dt² + h(t, x)` on `[0, depth] × T^{n−1}`; `h` is row-major, or drawn
    /// from the scenario seed when `random_degree` is set.
    SlabExpr {
        #[serde(default = "default_depth")]
        depth: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        h: Option<Vec<String>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        random_degree: Option<i64>,
    },
    /// `e^{2f} δ`, with collar checks run in Fermi coordinates of `{t = 0}`.
    ConformalFlat {
        #[serde(default = "default_depth")]
        depth: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        f: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        random_degree: Option<i64>,
    },
    /// Hypersurface in flat space given by its `n` ambient coordinates in
    /// the chart variables `x1..`, or an ellipsoid by its axes.
    FlatAmbientSurface {
        depth: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        surface: Option<Vec<String>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        interior: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ellipsoid_axes: Option<Vec<f64>>,
    },
    /// `dt² + φ(t, x)² f_ij dx^i dx^j`.
    Warped {
        #[serde(default = "default_depth")]
        depth: f64,
        warp: String,
        fibre: Vec<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    /// Periodic trapezoid points per `x` axis.
    pub x_points: usize,
    /// Gauss–Legendre nodes in `t` (per panel for Stokes).
    pub t_nodes: usize,
    /// Gauss–Legendre nodes in `s`; `n + 1` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_nodes: Option<usize>,
    /// Metric jet order for the pointwise checks.
    pub jet_order: usize,
    /// Sample points per pointwise check.
    pub points: usize,
    /// Sampled `s` values per point.
    pub s_values: usize,
}

impl Default for Grids {
    fn default() -> Self {
        Grids {
            x_points: 7,
            t_nodes: 24,
            s_nodes: None,
            jet_order: 3,
            points: 20,
            s_values: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema: u32,
    pub name: String,
    pub dim: usize,
    #[serde(default)]
    pub seed: u64,
    pub metric: MetricSpec,
    #[serde(default = "default_kind")]
    pub char_kind: CharKind,
    #[serde(default)]
    pub grids: Grids,
    /// Plateau interval `(a, b)` of the product reference; `(T/4, T/2)` when
    /// absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plateau: Option<[f64; 2]>,
    #[serde(default)]
    pub checks: Vec<CheckName>,
    #[serde(default)]
    pub tolerances: BTreeMap<CheckName, f64>,
    /// Checks whose "error" status is anticipated, such as a refused
    /// hypothesis.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expected_errors: Vec<CheckName>,
}

fn default_kind() -> CharKind {
    CharKind::Signature
}

/// Where the pointwise checks sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Chart {
    /// `[0, T] × [0, 2π)^{n−1}`.
    Slab,
    /// Hyperspherical chart of a closed hypersurface.
    Sphere,
}

/// A scenario resolved into geometric objects.
pub struct Scenario {
    pub config: ScenarioConfig,
    pub metric: Arc<dyn MetricSource>,
    pub collar: Arc<dyn CollarFamily>,
    pub reference: Arc<ProductReference>,
    pub chart: Chart,
    /// The metric is `2π`-periodic in `x` on a slab with two boundary
    /// components, so bulk integrals are available.
    pub periodic_slab: bool,
}

fn parse_exprs(items: &[String], what: &str) -> Result<Vec<Expr>, ConfigError> {
    items
        .iter()
        .map(|s| Expr::parse(s).map_err(|e| ConfigError::Invalid(format!("{what} `{s}`: {e}"))))
        .collect()
}

fn invalid(e: impl std::fmt::Display) -> ConfigError {
    ConfigError::Invalid(e.to_string())
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let raw: serde_json::Value = serde_json::from_str(text)?;
        let schema = raw.get("schema").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
        if schema != SCHEMA_VERSION {
            return Err(ConfigError::Schema(schema));
        }
        let cfg: ScenarioConfig = serde_json::from_value(raw)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &str) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.dim != 4 && self.dim != 8 {
            return Err(invalid(format!("dimension must be 4 or 8, got {}", self.dim)));
        }
        let g = &self.grids;
        if g.x_points == 0 || g.t_nodes == 0 || g.points == 0 || g.s_values == 0 || g.s_nodes == Some(0) {
            return Err(invalid("grid sizes must be positive"));
        }
        for (name, tol) in &self.tolerances {
            if !(*tol >= 0.0) {
                return Err(invalid(format!("tolerance for {name} must be non-negative")));
            }
        }
        Ok(())
    }

    pub fn tolerance(&self, check: CheckName) -> f64 {
        self.tolerances.get(&check).copied().unwrap_or(check.default_tolerance())
    }

    pub fn s_nodes(&self) -> usize {
        self.grids
            .s_nodes
            .unwrap_or_else(|| lcf_core::transgression::default_s_nodes(self.dim))
    }

    /// Builds the metric objects; expressions are parsed here.
    pub fn build(&self) -> Result<Scenario, ConfigError> {
        self.validate()?;
        let n = self.dim;
        let m = n - 1;
        let (collar, metric, chart, periodic_slab): (Arc<dyn CollarFamily>, Arc<dyn MetricSource>, Chart, bool) =
            match &self.metric {
                MetricSpec::SlabExpr { depth, h, random_degree } => {
                    let c = match (h, random_degree) {
                        (Some(h), None) => {
                            if h.len() != m * m {
                                return Err(invalid(format!("h needs {} entries, got {}", m * m, h.len())));
                            }
                            ExprCollar::new(n, *depth, parse_exprs(h, "h entry")?).map_err(invalid)?
                        }
                        (None, Some(d)) => {
                            if *depth != 1.0 {
                                return Err(invalid("random slabs have depth 1"));
                            }
                            scenarios::random_trig_slab(self.seed, n, *d).map_err(invalid)?
                        }
                        _ => return Err(invalid("slab-expr needs exactly one of `h` and `random_degree`")),
                    };
                    let c: Arc<dyn CollarFamily> = Arc::new(c);
                    (c.clone(), Arc::new(CollarMetric::new(c)), Chart::Slab, true)
                }
                MetricSpec::Warped { depth, warp, fibre } => {
                    if fibre.len() != m * m {
                        return Err(invalid(format!("fibre needs {} entries, got {}", m * m, fibre.len())));
                    }
                    let w = Expr::parse(warp).map_err(|e| invalid(format!("warp `{warp}`: {e}")))?;
                    let w2 = Expr::Pow(Box::new(w), 2.0);
                    let h = parse_exprs(fibre, "fibre entry")?
                        .into_iter()
                        .map(|f| Expr::Binary(lcf_core::expr::BinOp::Mul, Box::new(w2.clone()), Box::new(f)))
                        .collect();
                    let c: Arc<dyn CollarFamily> = Arc::new(ExprCollar::new(n, *depth, h).map_err(invalid)?);
                    (c.clone(), Arc::new(CollarMetric::new(c)), Chart::Slab, true)
                }
                MetricSpec::ConformalFlat { depth, f, random_degree } => {
                    let factor = match (f, random_degree) {
                        (Some(f), None) => Expr::parse(f).map_err(|e| invalid(format!("f `{f}`: {e}")))?,
                        (None, Some(d)) => scenarios::random_conformal_factor(self.seed, n, *d).map_err(invalid)?,
                        _ => return Err(invalid("conformal-flat needs exactly one of `f` and `random_degree`")),
                    };
                    let g: Arc<dyn MetricSource> = Arc::new(ConformalFlat::new(n, factor).map_err(invalid)?);
                    let c: Arc<dyn CollarFamily> =
                        Arc::new(FermiCollar::new(g.clone(), 0.0, *depth, FermiOptions::default()));
                    (c, g, Chart::Slab, true)
                }
                MetricSpec::FlatAmbientSurface {
                    depth,
                    surface,
                    interior,
                    ellipsoid_axes,
                } => {
                    let c = match (surface, ellipsoid_axes) {
                        (None, Some(axes)) => {
                            if axes.len() != n {
                                return Err(invalid(format!("ellipsoid needs {n} axes")));
                            }
                            FlatAmbientCollar::ellipsoid(axes, *depth).map_err(invalid)?
                        }
                        (Some(s), None) => {
                            let inside = interior.clone().unwrap_or_else(|| vec![0.0; n]);
                            FlatAmbientCollar::new(parse_exprs(s, "surface coordinate")?, inside, *depth)
                                .map_err(invalid)?
                        }
                        _ => {
                            return Err(invalid(
                                "flat-ambient-surface needs exactly one of `surface` and `ellipsoid_axes`",
                            ))
                        }
                    };
                    if c.dim() != n {
                        return Err(invalid(format!("surface has {} coordinates, expected {n}", c.dim())));
                    }
                    let c: Arc<dyn CollarFamily> = Arc::new(c);
                    (c.clone(), Arc::new(CollarMetric::new(c)), Chart::Sphere, false)
                }
            };
        if collar.dim() != n || metric.dim() != n {
            return Err(invalid("metric dimension does not match `dim`"));
        }
        let mirrored = periodic_slab && !matches!(self.metric, MetricSpec::ConformalFlat { .. });
        let reference = match self.plateau {
            Some([a, b]) => ProductReference::new(collar.clone(), a, b, mirrored),
            None => ProductReference::with_defaults(collar.clone(), mirrored),
        }
        .map_err(invalid)?;
        Ok(Scenario {
            config: self.clone(),
            metric,
            collar,
            reference: Arc::new(reference),
            chart,
            periodic_slab,
        })
    }
}

impl Scenario {
    pub fn depth(&self) -> f64 {
        self.collar.depth()
    }

    /// Seeded sample points on `{t = 0}`.
    pub fn boundary_points(&self, salt: u64) -> Vec<Vec<f64>> {
        let seed = mix(self.config.seed, salt);
        let count = self.config.grids.points;
        match self.chart {
            Chart::Slab => {
                let mut pts = scenarios::slab_points(seed, self.config.dim, count, 0.0, 1.0);
                for p in &mut pts {
                    p[0] = 0.0;
                }
                pts
            }
            Chart::Sphere => scenarios::sphere_chart_points(seed, self.config.dim, count),
        }
    }

    /// Seeded sample points inside the collar.
    pub fn interior_points(&self, salt: u64) -> Vec<Vec<f64>> {
        let seed = mix(self.config.seed, salt);
        let count = self.config.grids.points;
        match self.chart {
            Chart::Slab => scenarios::slab_points(seed, self.config.dim, count, 0.0, self.depth()),
            Chart::Sphere => {
                let mut pts = scenarios::sphere_chart_points(seed, self.config.dim, count);
                let ts = scenarios::slab_points(mix(seed, 1), 1, count, 0.0, 0.5 * self.depth());
                for (p, t) in pts.iter_mut().zip(ts) {
                    p[0] = t[0];
                }
                pts
            }
        }
    }
}

/// SplitMix64 step, deriving independent per-check seeds from one seed.
pub fn mix(seed: u64, salt: u64) -> u64 {
    let mut z = seed.wrapping_add(salt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

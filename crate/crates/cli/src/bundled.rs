//! Scenarios shipped with the binary, addressed as `bundled:<name>`.

use std::collections::BTreeMap;

use lcf_core::scenarios::{ELLIPSOID_AXES, ELLIPSOID_DEPTH};
use lcf_core::series::CharKind;

use crate::checks::CheckName::{self, *};
use crate::config::{Grids, MetricSpec, ScenarioConfig, SCHEMA_VERSION};

pub struct Bundled {
    pub name: &'static str,
    pub summary: &'static str,
    build: fn() -> ScenarioConfig,
}

impl Bundled {
    pub fn config(&self) -> ScenarioConfig {
        (self.build)()
    }
}

fn base(name: &str, dim: usize, seed: u64, metric: MetricSpec, checks: &[CheckName]) -> ScenarioConfig {
    ScenarioConfig {
        schema: SCHEMA_VERSION,
        name: name.to_string(),
        dim,
        seed,
        metric,
        char_kind: CharKind::Signature,
        grids: Grids::default(),
        plateau: None,
        checks: checks.to_vec(),
        tolerances: BTreeMap::new(),
        expected_errors: Vec::new(),
    }
}

fn ellipsoid_metric(axes: Vec<f64>) -> MetricSpec {
    MetricSpec::FlatAmbientSurface {
        depth: ELLIPSOID_DEPTH,
        surface: None,
        interior: None,
        ellipsoid_axes: Some(axes),
    }
}

const BOUNDARY_CHECKS: [CheckName; 9] = [T2d, Tetab, ThetaCubed, Coma, Dnat, R04d, Lemma3v0, BoundaryVanishing, WeylVanishing];

pub const BUNDLED: &[Bundled] = &[
    Bundled {
        name: "ellipsoid-flat-ambient",
        summary: "non-umbilic ellipsoid (1, 1.3, 1.7, 1) in flat R^4, all boundary identities",
        build: || base("ellipsoid-flat-ambient", 4, 1, ellipsoid_metric(ELLIPSOID_AXES.to_vec()), &BOUNDARY_CHECKS),
    },
    Bundled {
        name: "ellipsoid-flat-ambient-dirac",
        summary: "the same ellipsoid with the Dirac series",
        build: || {
            let mut c = base(
                "ellipsoid-flat-ambient-dirac",
                4,
                1,
                ellipsoid_metric(ELLIPSOID_AXES.to_vec()),
                &[BoundaryVanishing, CharCoefficient],
            );
            c.char_kind = CharKind::Dirac;
            c
        },
    },
    Bundled {
        name: "round-sphere",
        summary: "umbilic unit sphere S^3 in flat R^4",
        build: || base("round-sphere", 4, 2, ellipsoid_metric(vec![1.0; 4]), &BOUNDARY_CHECKS),
    },
    Bundled {
        name: "ellipsoid-8d",
        summary: "ellipsoid in flat R^8, where four distinct boundary indices exist",
        build: || {
            let mut c = base(
                "ellipsoid-8d",
                8,
                3,
                ellipsoid_metric(vec![1.0, 1.2, 1.4, 1.6, 1.1, 1.3, 1.5, 1.0]),
                &[R04d, Dnat, ThetaCubed],
            );
            c.grids.points = 4;
            c
        },
    },
    Bundled {
        name: "random-slab-seed-42",
        summary: "random trigonometric slab metric of degree 2 on [0,1] x T^3",
        build: || {
            base(
                "random-slab-seed-42",
                4,
                42,
                MetricSpec::SlabExpr {
                    depth: 1.0,
                    h: None,
                    random_degree: Some(2),
                },
                &[Bianchi, PointwiseTransgression, Stokes],
            )
        },
    },
    Bundled {
        name: "generic-slab-boundary",
        summary: "random slab where boundary vanishing must refuse the non-conformally-flat metric",
        build: || {
            let mut c = base(
                "generic-slab-boundary",
                4,
                42,
                MetricSpec::SlabExpr {
                    depth: 1.0,
                    h: None,
                    random_degree: Some(2),
                },
                &[BoundaryVanishing, Tetab, T2d, ThetaCubed, Coma],
            );
            c.grids.points = 5;
            c.expected_errors = vec![BoundaryVanishing];
            c
        },
    },
    Bundled {
        name: "lcf-slab",
        summary: "conformally flat slab e^{2f} delta with random trigonometric f",
        build: || {
            let mut c = base(
                "lcf-slab",
                4,
                7,
                MetricSpec::ConformalFlat {
                    depth: 1.0,
                    f: None,
                    random_degree: Some(2),
                },
                &[WeylVanishing, Lemma3v0, CharCoefficient, Obstruction],
            );
            c.grids.x_points = 5;
            c.grids.t_nodes = 8;
            c
        },
    },
];

pub fn find(name: &str) -> Option<&'static Bundled> {
    BUNDLED.iter().find(|b| b.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_configs_validate_and_build() {
        for b in BUNDLED {
            let c = b.config();
            assert_eq!(c.name, b.name);
            c.validate().unwrap();
            let text = serde_json::to_string(&c).unwrap();
            assert_eq!(ScenarioConfig::from_json(&text).unwrap(), c);
            c.build().unwrap();
        }
    }
}

//! The named verification pipelines a scenario can request.

use std::fmt;
use std::str::FromStr;

use lcf_core::collar::{self, BoundaryFrame, CheckValue, CollarError, CollarPoint};
use lcf_core::curvature::CurvaturePoint;
use lcf_core::form::{masks_of_degree, EndForm};
use lcf_core::obstruction::{eta_mod2_from_char_integral, ObstructionError};
use lcf_core::series::{CharKind, CharSeries};
use lcf_core::transgression::{
    self, boundary_vanishing_check, char_form, stokes_verify, weyl_max, SlabGrid, TransgressionError,
    WEYL_HYPOTHESIS_TOL,
};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{mix, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CheckName {
    #[serde(rename = "weyl-vanishing")]
    WeylVanishing,
    #[serde(rename = "tetab")]
    Tetab,
    #[serde(rename = "t2d")]
    T2d,
    #[serde(rename = "theta-cubed")]
    ThetaCubed,
    #[serde(rename = "coma")]
    Coma,
    #[serde(rename = "dnat")]
    Dnat,
    #[serde(rename = "r04d")]
    R04d,
    #[serde(rename = "lemma-3v0")]
    Lemma3v0,
    #[serde(rename = "bianchi")]
    Bianchi,
    #[serde(rename = "pointwise-transgression")]
    PointwiseTransgression,
    #[serde(rename = "boundary-vanishing")]
    BoundaryVanishing,
    #[serde(rename = "stokes")]
    Stokes,
    #[serde(rename = "char-coefficient")]
    CharCoefficient,
    #[serde(rename = "obstruction")]
    Obstruction,
}

pub const ALL_CHECKS: [CheckName; 14] = [
    CheckName::WeylVanishing,
    CheckName::Tetab,
    CheckName::T2d,
    CheckName::ThetaCubed,
    CheckName::Coma,
    CheckName::Dnat,
    CheckName::R04d,
    CheckName::Lemma3v0,
    CheckName::Bianchi,
    CheckName::PointwiseTransgression,
    CheckName::BoundaryVanishing,
    CheckName::Stokes,
    CheckName::CharCoefficient,
    CheckName::Obstruction,
];

impl CheckName {
    pub fn name(self) -> &'static str {
        match self {
            CheckName::WeylVanishing => "weyl-vanishing",
            CheckName::Tetab => "tetab",
            CheckName::T2d => "t2d",
            CheckName::ThetaCubed => "theta-cubed",
            CheckName::Coma => "coma",
            CheckName::Dnat => "dnat",
            CheckName::R04d => "r04d",
            CheckName::Lemma3v0 => "lemma-3v0",
            CheckName::Bianchi => "bianchi",
            CheckName::PointwiseTransgression => "pointwise-transgression",
            CheckName::BoundaryVanishing => "boundary-vanishing",
            CheckName::Stokes => "stokes",
            CheckName::CharCoefficient => "char-coefficient",
            CheckName::Obstruction => "obstruction",
        }
    }

    pub fn default_tolerance(self) -> f64 {
        match self {
            CheckName::WeylVanishing => 1e-8,
            CheckName::Tetab | CheckName::T2d | CheckName::ThetaCubed => 1e-9,
            CheckName::Coma => 1e-8,
            CheckName::Dnat | CheckName::R04d | CheckName::Lemma3v0 => 1e-7,
            CheckName::Bianchi | CheckName::PointwiseTransgression | CheckName::BoundaryVanishing => 1e-8,
            CheckName::Stokes => 1e-6,
            CheckName::CharCoefficient => 1e-10,
            CheckName::Obstruction => 1e-9,
        }
    }

    /// Statement verified by the check, with the quantity reported.
    pub fn describe(self) -> &'static str {
        match self {
            CheckName::WeylVanishing => {
                "Weyl tensor of the scenario metric at seeded points. Conformally flat \
                 metrics e^{2f} delta have vanishing Weyl tensor; the residual is the largest \
                 |W_abcd| found."
            }
            CheckName::Tetab => {
                "Second fundamental form structure of theta = nabla^1 - nabla^0 on {t = 0}: \
                 theta(U)V = II(U,V) d_t, theta(U) d_t = -W(U), theta(d_t) = -W, and the pullback \
                 i*theta = sum_i lambda_i S^i (x) [S^i (x) d_t - dt (x) S_i] in the Weingarten eigenframe."
            }
            CheckName::T2d => {
                "Pullback of theta^2 to the boundary: \
                 i*theta^2 = sum_{i<j} lambda_i lambda_j S^i ^ S^j (x) [S^i (x) S_j - S^j (x) S_i]."
            }
            CheckName::ThetaCubed => "Pullback of theta^3 to the boundary vanishes identically.",
            CheckName::Coma => {
                "Codazzi-Mainardi: <d^{nabla^0}theta(S_i,S_j)S_h, d_t> = <R^1(S_i,S_j)S_h, d_t>, \
                 and the tangential part <d^{nabla^0}theta(S_i,S_j)S_h, S_l> = 0 on the boundary."
            }
            CheckName::Dnat => {
                "Where the Weyl tensor vanishes, i*d^{nabla^0}theta has only the blocks \
                 S^a ^ S^b (x) [R^1_{abb nu}(S^b (x) d_t - dt (x) S_b) + R^1_{aba nu}(S^a (x) d_t - dt (x) S_a)]."
            }
            CheckName::R04d => {
                "Where the Weyl tensor vanishes, <R^0(S_i,S_j)S_h, S_l> = 0 for four distinct \
                 indices. Also checks R^1 = R^0 + d^{nabla^0}theta + theta^2 over all jet coefficients."
            }
            CheckName::Lemma3v0 => {
                "Where the Weyl tensor vanishes, <R^1(U1,U2)U3, U4> = 0 for mutually orthogonal \
                 U1..U4, sampled by Gram-Schmidt on seeded random vectors."
            }
            CheckName::Bianchi => {
                "Second Bianchi identity for the interpolating connections: \
                 d^{nabla^s}R^s = 0 with R^s = R^0 + s d^{nabla^0}theta + s^2 theta^2, at seeded points and s values."
            }
            CheckName::PointwiseTransgression => {
                "tr Q(R^1) - tr Q(R^0) = d int_0^1 tr(theta Q'(R^s)) ds and \
                 e^{tr Q(R^1)} - e^{tr Q(R^0)} = d int_0^1 tr(theta Q'(R^s)) e^{tr Q(R^s)} ds, \
                 both sides as jets of forms."
            }
            CheckName::BoundaryVanishing => {
                "At boundary points where the Weyl tensor vanishes, the pullback \
                 i* tr(theta Q(R^s)) and the full integrand i*[tr(theta Q'(R^s)) e^{tr Q(R^s)}] vanish \
                 for every s. Refused (status error) where the Weyl tensor does not vanish."
            }
            CheckName::Stokes => {
                "Stokes formula on the slab [0,T] x T^{n-1}: \
                 int_X e^{tr Q(R^1)} - e^{tr Q(R^0)} = int_0^1 int_{dX} tr(theta Q'(R^s)) e^{tr Q(R^s)}, \
                 the boundary oriented with sign -1 at t = 0 and +1 at t = T. The residual is the larger \
                 of |bulk - boundary| and the change under doubling the t-nodes."
            }
            CheckName::CharCoefficient => {
                "Leading coefficient of Q(x) = 1/2 log P(x/2 pi i): -1/(24 pi^2) for the signature \
                 series and 1/(192 pi^2) for the Dirac series, compared exactly; the degree-4 part of \
                 the characteristic form on a random curvature equals that coefficient times tr(R ^ R)."
            }
            CheckName::Obstruction => {
                "Twice the integral of the top-degree characteristic form over the slab, reduced mod 2. \
                 For conformally flat metrics the integrand vanishes pointwise, so the eta contribution \
                 is an even integer; the residual is the larger of the max |integrand| and the distance \
                 of 2 * integral to 2Z."
            }
        }
    }
}

impl fmt::Display for CheckName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckName {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ALL_CHECKS
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown check `{s}`"))
    }
}

/// Why a check produced no residual.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckFailure {
    pub message: String,
    pub evidence: Value,
}

impl CheckFailure {
    fn new(message: impl Into<String>) -> Self {
        CheckFailure {
            message: message.into(),
            evidence: Value::Null,
        }
    }
}

impl From<CollarError> for CheckFailure {
    fn from(e: CollarError) -> Self {
        CheckFailure::new(e.to_string())
    }
}

impl From<TransgressionError> for CheckFailure {
    fn from(e: TransgressionError) -> Self {
        match &e {
            TransgressionError::HypothesisViolated { point, weyl, tol } => CheckFailure {
                message: e.to_string(),
                evidence: json!({ "hypothesis": "weyl-vanishing", "point": point, "weyl": weyl, "tol": tol }),
            },
            _ => CheckFailure::new(e.to_string()),
        }
    }
}

impl From<ObstructionError> for CheckFailure {
    fn from(e: ObstructionError) -> Self {
        match e {
            ObstructionError::Transgression(t) => t.into(),
            e => CheckFailure::new(e.to_string()),
        }
    }
}

/// A residual with supporting data.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub residual: f64,
    pub evidence: Value,
}

type Outcome = Result<Measurement, CheckFailure>;

fn from_value(v: CheckValue, point: &[f64]) -> Measurement {
    Measurement {
        residual: v.residual,
        evidence: json!({ "worst_point": point, "worst": v.worst }),
    }
}

/// Parallel map over points, then an in-order reduction to the worst one.
fn worst_over<F>(points: &[Vec<f64>], f: F) -> Outcome
where
    F: Fn(&[f64]) -> Outcome + Sync,
{
    let results: Vec<Outcome> = points.par_iter().map(|p| f(p)).collect();
    let mut best: Option<Measurement> = None;
    for r in results {
        let m = r?;
        let worse = match &best {
            None => true,
            Some(b) => m.residual > b.residual || (m.residual.is_nan() && !b.residual.is_nan()),
        };
        if worse {
            best = Some(m);
        }
    }
    let mut m = best.unwrap_or(Measurement {
        residual: 0.0,
        evidence: Value::Null,
    });
    if let Value::Object(map) = &mut m.evidence {
        map.insert("points".into(), json!(points.len()));
    }
    Ok(m)
}

fn require_weyl_vanishing(curv: &CurvaturePoint<f64>, point: &[f64]) -> Result<(), CheckFailure> {
    let weyl = weyl_max(curv);
    if weyl <= WEYL_HYPOTHESIS_TOL {
        Ok(())
    } else {
        Err(TransgressionError::HypothesisViolated {
            point: point.to_vec(),
            weyl,
            tol: WEYL_HYPOTHESIS_TOL,
        }
        .into())
    }
}

fn collar_point(sc: &Scenario, point: &[f64], order: usize) -> Result<CollarPoint, CheckFailure> {
    Ok(CollarPoint::from_family(
        sc.collar.clone(),
        sc.reference.clone(),
        point,
        order,
    )?)
}

fn frame_check(
    sc: &Scenario,
    salt: u64,
    needs_weyl: bool,
    f: impl Fn(&CollarPoint, &BoundaryFrame) -> CheckValue + Sync,
) -> Outcome {
    let pts = sc.boundary_points(salt);
    worst_over(&pts, |p| {
        let cp = collar_point(sc, p, 2)?;
        if needs_weyl {
            require_weyl_vanishing(&cp.curv1.values(), p)?;
        }
        let frame = BoundaryFrame::new(&*sc.collar, p)?;
        let mut m = from_value(f(&cp, &frame), p);
        let (ortho, eig) = frame.residuals();
        m.evidence["frame_orthonormality"] = json!(ortho);
        m.evidence["frame_eigen"] = json!(eig);
        m.evidence["lambda"] = json!(frame.lambda);
        Ok(m)
    })
}

fn s_samples(seed: u64, count: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.gen_range(0.0..1.0)).collect()
}

fn series(sc: &Scenario) -> Result<CharSeries, CheckFailure> {
    CharSeries::build(sc.config.char_kind, sc.config.dim).map_err(|e| CheckFailure::new(e.to_string()))
}

/// Exact leading coefficient of `Q` in units of `x²/π²`.
pub fn expected_leading(kind: CharKind) -> BigRational {
    let (num, den) = match kind {
        CharKind::Signature => (-1, 24),
        CharKind::Dirac => (1, 192),
    };
    BigRational::new(num.into(), den.into())
}

pub fn run_check(check: CheckName, sc: &Scenario) -> Outcome {
    let cfg = &sc.config;
    let salt = check as u64 + 1;
    match check {
        CheckName::WeylVanishing => {
            let pts = sc.interior_points(salt);
            worst_over(&pts, |p| {
                let curv = CurvaturePoint::values_at(&*sc.metric, p).map_err(|e| CheckFailure::new(e.to_string()))?;
                Ok(Measurement {
                    residual: weyl_max(&curv),
                    evidence: json!({ "worst_point": p }),
                })
            })
        }
        CheckName::Tetab => frame_check(sc, salt, false, |cp, fr| {
            collar::check_tetab(cp, fr).merge(collar::check_ect(cp, fr))
        }),
        CheckName::T2d => frame_check(sc, salt, false, collar::check_t2d),
        CheckName::ThetaCubed => frame_check(sc, salt, false, collar::check_theta_cubed),
        CheckName::Coma => frame_check(sc, salt, false, |cp, fr| {
            collar::check_coma(cp, fr).merge(collar::check_dnt0(cp, fr))
        }),
        CheckName::Dnat => frame_check(sc, salt, true, collar::check_dnat),
        CheckName::R04d => frame_check(sc, salt, true, |cp, fr| {
            collar::check_r04d(cp, fr).merge(collar::check_master(cp))
        }),
        CheckName::Lemma3v0 => {
            let pts = sc.boundary_points(salt);
            let seed = mix(cfg.seed, salt);
            worst_over(&pts, |p| {
                let curv = CurvaturePoint::values_at(&*sc.metric, p).map_err(|e| CheckFailure::new(e.to_string()))?;
                require_weyl_vanishing(&curv, p)?;
                let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, p[1].to_bits()));
                Ok(from_value(collar::check_lemma_3v0(&curv, &mut rng, 20), p))
            })
        }
        CheckName::Bianchi => {
            let pts = sc.interior_points(salt);
            let svals = s_samples(mix(cfg.seed, salt + 100), cfg.grids.s_values);
            worst_over(&pts, |p| {
                let cp = collar_point(sc, p, cfg.grids.jet_order)?;
                let mut worst = (0.0f64, f64::NAN);
                for &s in &svals {
                    let r = transgression::bianchi_residual(&cp, s)?;
                    if r > worst.0 || worst.1.is_nan() {
                        worst = (r.max(worst.0), s);
                    }
                }
                Ok(Measurement {
                    residual: worst.0,
                    evidence: json!({ "worst_point": p, "worst_s": worst.1 }),
                })
            })
        }
        CheckName::PointwiseTransgression => {
            let q = series(sc)?;
            let pts = sc.interior_points(salt);
            let nodes = cfg.s_nodes();
            worst_over(&pts, |p| {
                let cp = collar_point(sc, p, cfg.grids.jet_order)?;
                let r = transgression::pointwise_transgression_check(&cp, &q, nodes)?;
                Ok(Measurement {
                    residual: r.plain.max(r.exponential),
                    evidence: json!({ "worst_point": p, "plain": r.plain, "exponential": r.exponential }),
                })
            })
        }
        CheckName::BoundaryVanishing => {
            let q = series(sc)?;
            let pts = sc.boundary_points(salt);
            let svals = s_samples(mix(cfg.seed, salt + 100), cfg.grids.s_values);
            worst_over(&pts, |p| {
                let cp = collar_point(sc, p, 2)?;
                let r = boundary_vanishing_check(&cp, &q, &svals)?;
                Ok(Measurement {
                    residual: r.residual,
                    evidence: json!({
                        "worst_point": p,
                        "worst_s": r.worst_s,
                        "even_monomials": r.even_monomials,
                        "weyl": r.weyl,
                    }),
                })
            })
        }
        CheckName::Stokes => {
            if !sc.reference.is_mirrored() {
                return Err(CheckFailure::new(
                    "stokes needs a slab scenario (slab-expr or warped) with two boundary components",
                ));
            }
            let q = series(sc)?;
            let grid = SlabGrid {
                x_points: cfg.grids.x_points,
                t_nodes: cfg.grids.t_nodes,
                s_nodes: cfg.s_nodes(),
            };
            let r = stokes_verify(sc.collar.clone(), sc.reference.clone(), &q, grid)?;
            Ok(Measurement {
                residual: r.residual.max(r.t_doubling_delta),
                evidence: serde_json::to_value(r).unwrap_or(Value::Null),
            })
        }
        CheckName::CharCoefficient => {
            let q = series(sc)?;
            let want = expected_leading(cfg.char_kind);
            let got = q.rational_coefficients().first().cloned();
            let exact = got.as_ref() == Some(&want);
            let n = cfg.dim;
            let mut rng = ChaCha8Rng::seed_from_u64(mix(cfg.seed, salt));
            let mut r = EndForm::<f64>::zero(n, &());
            for mask in masks_of_degree(n, 2) {
                for row in 0..n {
                    for col in 0..n {
                        r.set(mask, row, col, rng.gen_range(-1.0..1.0));
                    }
                }
            }
            let c = char_form(&q, &r).map_err(|e| CheckFailure::new(e.to_string()))?;
            let lead = rational_to_f64(&want) / std::f64::consts::PI.powi(2);
            let tr = r.mul(&r).trace();
            let mut diff: f64 = 0.0;
            for mask in masks_of_degree(n, 4) {
                diff = diff.max((c.get(mask) - lead * tr.get(mask)).abs());
            }
            Ok(Measurement {
                residual: if exact { diff } else { f64::INFINITY },
                evidence: json!({
                    "series": q.describe(),
                    "leading_expected": want.to_string(),
                    "leading_found": got.map(|g| g.to_string()),
                    "degree4_mismatch": diff,
                }),
            })
        }
        CheckName::Obstruction => {
            if !sc.periodic_slab {
                return Err(ObstructionError::Domain(
                    "a collar of a hypersurface in flat space has no closed bulk region to integrate over".into(),
                )
                .into());
            }
            let q = series(sc)?;
            let r = eta_mod2_from_char_integral(&*sc.metric, &q, sc.depth(), cfg.grids.x_points, cfg.grids.t_nodes)?;
            Ok(Measurement {
                residual: r.max_integrand.max(r.distance_to_even),
                evidence: serde_json::to_value(r).unwrap_or(Value::Null),
            })
        }
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

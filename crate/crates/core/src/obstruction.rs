//! Eta values, the mod-2 obstruction verdict and the characteristic integral
//! that feeds it.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Rational64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::MetricSource;
use crate::quadrature::{neumaier_sum, GaussLegendre};
use crate::series::{CharKind, CharSeries};
use crate::transgression::{char_density, torus_grid, TransgressionError};

/// Normalization of the cotangent defect sum, fixed by `η(L(3,1)) = −1/3`:
/// `(1/3) Σ_{j=1,2} cot²(πj/3) = 2/9`, so `c = (−1/3) / (2/9) = −3/2`.
pub const LENS_CALIBRATION: f64 = -1.5;

/// Denominator bound for recognizing rationals from floats.
pub const MAX_DENOMINATOR: i64 = 1_000_000;

/// Acceptance window for rational recognition.
pub const RECOGNITION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObstructionError {
    #[error("gcd({p}, {q}) = {gcd}; lens spaces need coprime parameters")]
    NotCoprime { p: i64, q: i64, gcd: i64 },
    #[error("lens spaces need p >= 2, got {0}")]
    BadOrder(i64),
    #[error("char integral needs a slab [0, T] x T^(n-1) with T > 0 and n divisible by 4: {0}")]
    Domain(String),
    #[error(transparent)]
    Transgression(#[from] TransgressionError),
    #[error("eta record line {line}: {message}")]
    Record { line: usize, message: String },
}

/// An eta value, exact when recognized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EtaValue {
    Rational { num: i64, den: i64 },
    Unrecognized { value: f64 },
}

impl EtaValue {
    pub fn rational(r: Rational64) -> Self {
        EtaValue::Rational {
            num: *r.numer(),
            den: *r.denom(),
        }
    }

    pub fn as_f64(&self) -> f64 {
        match *self {
            EtaValue::Rational { num, den } => num as f64 / den as f64,
            EtaValue::Unrecognized { value } => value,
        }
    }

    pub fn as_rational(&self) -> Option<Rational64> {
        match *self {
            EtaValue::Rational { num, den } => Some(Rational64::new(num, den)),
            EtaValue::Unrecognized { .. } => None,
        }
    }
}

impl fmt::Display for EtaValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            EtaValue::Rational { num, den: 1 } => write!(f, "{num}"),
            EtaValue::Rational { num, den } => write!(f, "{num}/{den}"),
            EtaValue::Unrecognized { value } => write!(f, "{value} (unrecognized)"),
        }
    }
}

/// Best rational approximation with denominator `≤ max_den` by continued
/// fractions, accepted only within `tol`.
pub fn recognize_rational(x: f64, max_den: i64, tol: f64) -> Option<Rational64> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            break;
        }
        let a = a as i64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (x - h1 as f64 / k1 as f64).abs() <= tol * 1e-3 {
            break;
        }
        let frac = r - a as f64;
        if frac.abs() < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    if k1 == 0 {
        return None;
    }
    let cand = Rational64::new(h1, k1);
    ((x - h1 as f64 / k1 as f64).abs() <= tol).then_some(cand)
}

/// `c · (1/p) Σ_{j=1}^{p−1} cot(πj/p) cot(πjq/p)` with the calibrated `c`.
pub fn lens_eta_float(p: i64, q: i64) -> Result<f64, ObstructionError> {
    if p < 2 {
        return Err(ObstructionError::BadOrder(p));
    }
    let gcd = p.gcd(&q);
    if gcd != 1 {
        return Err(ObstructionError::NotCoprime { p, q, gcd });
    }
    let pi = std::f64::consts::PI;
    let cot = |x: f64| x.cos() / x.sin();
    let terms = (1..p).map(|j| {
        let jq = (j * q).rem_euclid(p);
        cot(pi * j as f64 / p as f64) * cot(pi * jq as f64 / p as f64)
    });
    Ok(LENS_CALIBRATION * neumaier_sum(terms) / p as f64)
}

/// Eta invariant of the odd signature operator on `L(p, q)` (calibrated
/// convention), recognized as a rational.
pub fn lens_eta_signature(p: i64, q: i64) -> Result<EtaValue, ObstructionError> {
    let v = lens_eta_float(p, q)?;
    Ok(match recognize_rational(v, MAX_DENOMINATOR, RECOGNITION_TOL) {
        Some(r) => EtaValue::rational(r),
        None => EtaValue::Unrecognized { value: v },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Value quoted from the literature; immutable.
    PublishedTable,
    CotangentFormula,
    CharIntegral,
    /// Supplied by the user.
    Imported,
}

/// A labelled eta value. JSON form:
/// `{"label", "kind", "eta_num", "eta_den", "provenance"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EtaRecord {
    pub label: String,
    pub kind: CharKind,
    pub eta_num: i64,
    pub eta_den: i64,
    pub provenance: Provenance,
}

impl EtaRecord {
    pub fn eta(&self) -> Rational64 {
        Rational64::new(self.eta_num, self.eta_den)
    }
}

/// Holonomy orders of the orientable flat 3-manifolds `G_2, .., G_5`.
pub const BIEBERBACH_HOLONOMY: [(u32, i64); 4] = [(2, 2), (3, 3), (4, 4), (5, 6)];

/// Dirac eta invariants mod 2 of `G_2, .., G_5`: `−2/k` for holonomy order `k`.
pub fn bieberbach_dirac_table() -> Vec<EtaRecord> {
    BIEBERBACH_HOLONOMY
        .iter()
        .map(|&(j, k)| {
            let r = Rational64::new(-2, k);
            EtaRecord {
                label: format!("G{j}"),
                kind: CharKind::Dirac,
                eta_num: *r.numer(),
                eta_den: *r.denom(),
                provenance: Provenance::PublishedTable,
            }
        })
        .collect()
}

pub fn lens_record(p: i64, q: i64) -> Result<EtaRecord, ObstructionError> {
    let r = lens_eta_signature(p, q)?.as_rational().ok_or_else(|| ObstructionError::Record {
        line: 0,
        message: format!("eta of L({p},{q}) was not recognized as a rational"),
    })?;
    Ok(EtaRecord {
        label: format!("L({p},{q})"),
        kind: CharKind::Signature,
        eta_num: *r.numer(),
        eta_den: *r.denom(),
        provenance: Provenance::CotangentFormula,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// Not an even integer: no compact oriented LCF manifold bounds it.
    Obstructed,
    Consistent,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Obstructed => "obstructed",
            Verdict::Consistent => "consistent",
        })
    }
}

/// Distance from `x` to the nearest even integer.
pub fn distance_to_even(x: f64) -> f64 {
    (x - 2.0 * (x / 2.0).round()).abs()
}

/// Exact distance to `2Z` for rationals.
pub fn rational_distance_to_even(x: Rational64) -> Rational64 {
    let two = Rational64::from_integer(2);
    let k = (x / two).round();
    let d = x - two * k;
    if d < Rational64::from_integer(0) {
        -d
    } else {
        d
    }
}

/// Verdict for the total eta of all boundary components.
pub fn check_bounds_lcf(eta: Rational64, tol: f64) -> Verdict {
    let d = rational_distance_to_even(eta);
    if (*d.numer() as f64 / *d.denom() as f64) > tol {
        Verdict::Obstructed
    } else {
        Verdict::Consistent
    }
}

pub fn check_bounds_lcf_sum(etas: &[Rational64], tol: f64) -> Verdict {
    check_bounds_lcf(etas.iter().copied().sum(), tol)
}

pub fn check_bounds_lcf_float(eta: f64, tol: f64) -> Verdict {
    if distance_to_even(eta) > tol {
        Verdict::Obstructed
    } else {
        Verdict::Consistent
    }
}

pub fn write_records(out: &mut impl Write, records: &[EtaRecord]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut *out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_records(input: impl BufRead) -> Result<Vec<EtaRecord>, ObstructionError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| ObstructionError::Record {
            line: i + 1,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let r: EtaRecord = serde_json::from_str(&line).map_err(|e| ObstructionError::Record {
            line: i + 1,
            message: e.to_string(),
        })?;
        if r.eta_den == 0 {
            return Err(ObstructionError::Record {
                line: i + 1,
                message: "zero denominator".into(),
            });
        }
        out.push(r);
    }
    Ok(out)
}

impl FromStr for EtaRecord {
    type Err = ObstructionError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        serde_json::from_str(s).map_err(|e| ObstructionError::Record {
            line: 1,
            message: e.to_string(),
        })
    }
}

/// `2 ∫_X exp(tr Q(R))` over a slab, reduced mod 2.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharIntegral {
    pub integral: f64,
    /// `2 · integral` reduced to `[0, 2)`.
    pub eta_mod2: f64,
    pub distance_to_even: f64,
    /// Largest `|top-degree integrand|` over all quadrature points.
    pub max_integrand: f64,
    /// `|I(2 t_nodes) − I(t_nodes)|`.
    pub error_estimate: f64,
}

/// Integrates the top-degree characteristic form of `g` over
/// `[0, depth] × [0, 2π)^{n−1}`; `g` must be `2π`-periodic in the `x`.
pub fn eta_mod2_from_char_integral(
    g: &dyn MetricSource,
    q: &CharSeries,
    depth: f64,
    x_points: usize,
    t_nodes: usize,
) -> Result<CharIntegral, ObstructionError> {
    let n = g.dim();
    if !(depth > 0.0) || n != q.dim() || x_points == 0 || t_nodes == 0 {
        return Err(ObstructionError::Domain(format!(
            "depth {depth}, metric dimension {n}, series dimension {}, {x_points} x-points, {t_nodes} t-nodes",
            q.dim()
        )));
    }
    let qc = q.q_coeffs();
    let rules = [
        GaussLegendre::new(t_nodes, 0.0, depth),
        GaussLegendre::new(2 * t_nodes, 0.0, depth),
    ];
    let (pts, wx) = torus_grid(n, x_points);
    let per_x: Vec<Result<([f64; 2], f64), TransgressionError>> = pts
        .par_iter()
        .map(|p| {
            let mut sums = [0.0; 2];
            let mut peak: f64 = 0.0;
            for (k, rule) in rules.iter().enumerate() {
                let mut vals = Vec::with_capacity(rule.len());
                for (t, w) in rule.nodes.iter().zip(&rule.weights) {
                    let mut pt = p.clone();
                    pt[0] = *t;
                    let v = char_density(g, &qc, &pt)?;
                    peak = peak.max(v.abs());
                    vals.push(w * v);
                }
                sums[k] = neumaier_sum(vals);
            }
            Ok((sums, peak))
        })
        .collect();
    let per_x: Vec<([f64; 2], f64)> = per_x.into_iter().collect::<Result<_, _>>()?;
    let coarse = wx * neumaier_sum(per_x.iter().map(|v| v.0[0]));
    let fine = wx * neumaier_sum(per_x.iter().map(|v| v.0[1]));
    let max_integrand = per_x.iter().fold(0.0f64, |m, v| m.max(v.1));
    let eta = 2.0 * fine;
    // rem_euclid rounds tiny negative values up to exactly 2
    let residue = eta.rem_euclid(2.0);
    Ok(CharIntegral {
        integral: fine,
        eta_mod2: if residue >= 2.0 { 0.0 } else { residue },
        distance_to_even: distance_to_even(eta),
        max_integrand,
        error_estimate: (fine - coarse).abs(),
    })
}

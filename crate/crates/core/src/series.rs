//! Characteristic series `Q(x) = ½ log P(x / 2πi)` with exact rational
//! coefficients.
//!
//! `P` is even, so `Q(x) = Σ_m q̃_m x^{2m} / π^{2m}` with `q̃_m` rational once
//! `(2πi)^{2m} = (−1)^m (2π)^{2m}` is substituted.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CharKind {
    /// `P(x) = x / tanh x`.
    Signature,
    /// `P(x) = (x/2) / sinh(x/2)`.
    Dirac,
}

impl CharKind {
    pub fn name(self) -> &'static str {
        match self {
            CharKind::Signature => "signature",
            CharKind::Dirac => "dirac",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "signature" => Some(CharKind::Signature),
            "dirac" => Some(CharKind::Dirac),
            _ => None,
        }
    }
}

impl fmt::Display for CharKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("characteristic series need a dimension divisible by 4, got {0}")]
    BadDimension(usize),
    #[error("unknown characteristic series {0:?} (expected signature or dirac)")]
    UnknownKind(String),
    #[error("series leading term check failed for {kind}: got {got}")]
    LeadingTerm { kind: CharKind, got: String },
}

/// Truncated `Q` for one ambient dimension `n = 4k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharSeries {
    kind: CharKind,
    dim: usize,
    /// `q̃_m` for `m = 1..=k`; `q̃_0 = 0` since `P(0) = 1`.
    rational: Vec<BigRational>,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `Σ_{m ≤ k} a_m y^m` stored densely.
type RSeries = Vec<BigRational>;

fn series_mul(a: &RSeries, b: &RSeries, k: usize) -> RSeries {
    let mut out = vec![BigRational::zero(); k + 1];
    for (i, x) in a.iter().enumerate().take(k + 1) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(k + 1 - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// `1 / a` for `a_0 ≠ 0`.
fn series_recip(a: &RSeries, k: usize) -> RSeries {
    let mut out = vec![BigRational::zero(); k + 1];
    out[0] = a[0].recip();
    for m in 1..=k {
        let mut s = BigRational::zero();
        for j in 1..=m.min(a.len() - 1) {
            s += &a[j] * &out[m - j];
        }
        out[m] = -s * &out[0];
    }
    out
}

/// `log a` for `a_0 = 1`, via `log(1 + u) = Σ (−1)^{j+1} u^j / j`.
fn series_log(a: &RSeries, k: usize) -> RSeries {
    let mut u = a.clone();
    u.resize(k + 1, BigRational::zero());
    u[0] = BigRational::zero();
    let mut out = vec![BigRational::zero(); k + 1];
    let mut power = u.clone();
    for j in 1..=k {
        let c = rat(if j % 2 == 1 { 1 } else { -1 }, j as i64);
        for (o, p) in out.iter_mut().zip(&power) {
            *o += &c * p;
        }
        power = series_mul(&power, &u, k);
    }
    out
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// `P` as a series in `y = x²`, truncated at `y^k`.
fn p_series(kind: CharKind, k: usize) -> RSeries {
    // sinh(x)/x = Σ y^m/(2m+1)!, cosh x = Σ y^m/(2m)!
    let sinhc: RSeries = (0..=k)
        .map(|m| BigRational::new(BigInt::one(), factorial(2 * m + 1)))
        .collect();
    match kind {
        CharKind::Signature => {
            let cosh: RSeries = (0..=k)
                .map(|m| BigRational::new(BigInt::one(), factorial(2 * m)))
                .collect();
            series_mul(&cosh, &series_recip(&sinhc, k), k)
        }
        CharKind::Dirac => {
            // y → y/4
            let scaled: RSeries = sinhc
                .iter()
                .enumerate()
                .map(|(m, c)| c / BigRational::from_integer(BigInt::from(4).pow(m as u32)))
                .collect();
            series_recip(&scaled, k)
        }
    }
}

impl CharSeries {
    pub fn build(kind: CharKind, dim: usize) -> Result<Self, SeriesError> {
        if dim == 0 || dim % 4 != 0 {
            return Err(SeriesError::BadDimension(dim));
        }
        let k = dim / 4;
        let log_p = series_log(&p_series(kind, k), k);
        // x → x/(2πi): y^m → (−1)^m y^m / (4^m π^{2m}); then halve
        let rational: Vec<BigRational> = (1..=k)
            .map(|m| {
                let sign = if m % 2 == 1 { -1 } else { 1 };
                let den = BigInt::from(2) * BigInt::from(4).pow(m as u32);
                &log_p[m] * BigRational::new(BigInt::from(sign), den)
            })
            .collect();
        let want = match kind {
            CharKind::Signature => rat(-1, 24),
            CharKind::Dirac => rat(1, 192),
        };
        if rational[0] != want {
            return Err(SeriesError::LeadingTerm {
                kind,
                got: rational[0].to_string(),
            });
        }
        Ok(CharSeries {
            kind,
            dim,
            rational,
        })
    }

    pub fn kind(&self) -> CharKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `q̃_m` for `m = 1..=n/4`: the coefficient of `x^{2m} / π^{2m}`.
    pub fn rational_coefficients(&self) -> &[BigRational] {
        &self.rational
    }

    /// Float coefficients of `Q` indexed by the power of `x`.
    pub fn q_coeffs(&self) -> Vec<f64> {
        let mut out = vec![0.0; 2 * self.rational.len() + 1];
        for (i, q) in self.rational.iter().enumerate() {
            let m = i + 1;
            out[2 * m] = to_f64(q) / std::f64::consts::PI.powi(2 * m as i32);
        }
        out
    }

    /// Float coefficients of `Q′` indexed by the power of `x`.
    pub fn q_prime_coeffs(&self) -> Vec<f64> {
        let q = self.q_coeffs();
        (1..q.len()).map(|p| p as f64 * q[p]).collect()
    }

    /// Human-readable form such as `-1/24 x^2/π^2`.
    pub fn describe(&self) -> String {
        self.rational
            .iter()
            .enumerate()
            .map(|(i, q)| {
                let m = i + 1;
                let pi = if m == 1 { "π^2".to_string() } else { format!("π^{}", 2 * m) };
                format!("{q} x^{}/{pi}", 2 * m)
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

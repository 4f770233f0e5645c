//! Seeded metric families used by the checks, the test suites and the CLI.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::collar::{CollarError, CollarFamily, ExprCollar, FlatAmbientCollar, ProductReference};
use crate::expr::Expr;
use crate::metric::{ConformalFlat, MetricError};

/// Axes of the ellipsoid `x²/a² + y²/b² + z²/c² + w² = 1` in flat 4-space.
pub const ELLIPSOID_AXES: [f64; 4] = [1.0, 1.3, 1.7, 1.0];

/// Collar depth used for the ellipsoid; well inside the focal distance
/// `min_j 1/λ_j ≥ 1/1.7`.
pub const ELLIPSOID_DEPTH: f64 = 0.3;

fn num(v: f64) -> String {
    if v < 0.0 {
        format!("(-{:.15})", -v)
    } else {
        format!("{v:.15}")
    }
}

/// Random wave vector in `Z^m` with `Σ |k_i| ≤ degree`, not all zero.
fn wave_vector(rng: &mut impl Rng, m: usize, degree: i64) -> Vec<i64> {
    loop {
        let k: Vec<i64> = (0..m).map(|_| rng.gen_range(-degree..=degree)).collect();
        let total: i64 = k.iter().map(|v| v.abs()).sum();
        if total > 0 && total <= degree {
            return k;
        }
    }
}

fn phase_expr(k: &[i64]) -> String {
    let terms: Vec<String> = k
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(i, &c)| format!("{}*x{}", num(c as f64), i + 1))
        .collect();
    terms.join(" + ")
}

/// A trigonometric polynomial of the given degree in `x1..x_m`, with
/// coefficients polynomial of degree ≤ 2 in `t`.
fn random_trig(rng: &mut impl Rng, m: usize, degree: i64, modes: usize, amplitude: f64, with_t: bool) -> String {
    let mut parts = Vec::with_capacity(modes);
    for _ in 0..modes {
        let k = wave_vector(rng, m, degree);
        let func = if rng.gen_bool(0.5) { "cos" } else { "sin" };
        let a = amplitude * rng.gen_range(-1.0..1.0);
        let time = if with_t {
            let c1 = rng.gen_range(-1.0..1.0);
            let c2 = rng.gen_range(-1.0..1.0);
            format!(" * ({} + {}*t + {}*t^2)", num(0.5), num(c1), num(c2))
        } else {
            String::new()
        };
        parts.push(format!("{}*{func}({}){time}", num(a), phase_expr(&k)));
    }
    parts.join(" + ")
}

/// Block metric `dt² + h(t, x)` on `[0, 1] × T^{n−1}` with
/// `h = δ + (trigonometric polynomial of degree `degree` in x)`. Entries are
/// perturbed by at most `0.24` in total, so `h` stays diagonally dominant.
pub fn random_trig_slab(seed: u64, dim: usize, degree: i64) -> Result<ExprCollar, CollarError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = dim - 1;
    let modes = 3;
    let amplitude = 0.04 / (m as f64 - 1.0).max(1.0);
    let mut h = vec![Expr::Const(0.0); m * m];
    for r in 0..m {
        for c in r..m {
            let pert = random_trig(&mut rng, m, degree, modes, amplitude, true);
            let s = if r == c { format!("1 + {pert}") } else { pert };
            h[r * m + c] = Expr::parse(&s).map_err(|e| CollarError::Invalid(e.to_string()))?;
        }
    }
    ExprCollar::new(dim, 1.0, h)
}

/// Conformally flat metric `e^{2f} δ` with `f` a random trigonometric
/// polynomial in `x` whose coefficients depend on `t`.
pub fn random_conformal_factor(seed: u64, dim: usize, degree: i64) -> Result<Expr, MetricError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = random_trig(&mut rng, dim - 1, degree, 4, 0.15, true);
    Expr::parse(&s).map_err(|e| MetricError::Invalid(e.to_string()))
}

pub fn lcf_slab(seed: u64, dim: usize, degree: i64) -> Result<ConformalFlat, MetricError> {
    ConformalFlat::new(dim, random_conformal_factor(seed, dim, degree)?)
}

pub fn ellipsoid() -> FlatAmbientCollar {
    FlatAmbientCollar::ellipsoid(&ELLIPSOID_AXES, ELLIPSOID_DEPTH).expect("fixed ellipsoid is valid")
}

/// Unit round sphere `S³ ⊂ R⁴`.
pub fn round_sphere() -> FlatAmbientCollar {
    FlatAmbientCollar::ellipsoid(&[1.0; 4], ELLIPSOID_DEPTH).expect("round sphere is valid")
}

/// Chart points of the hyperspherical parameterization, away from the
/// coordinate singularities at `x1, .., x_{n−2} ∈ {0, π}`.
pub fn sphere_chart_points(seed: u64, dim: usize, count: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut p = vec![0.0; dim];
            for (k, v) in p.iter_mut().enumerate().skip(1) {
                *v = if k + 1 < dim {
                    rng.gen_range(0.3..std::f64::consts::PI - 0.3)
                } else {
                    rng.gen_range(0.0..2.0 * std::f64::consts::PI)
                };
            }
            p
        })
        .collect()
}

/// Uniform points of `[t_lo, t_hi] × [0, 2π)^{n−1}`.
pub fn slab_points(seed: u64, dim: usize, count: usize, t_lo: f64, t_hi: f64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut p = vec![rng.gen_range(t_lo..t_hi)];
            p.extend((1..dim).map(|_| rng.gen_range(0.0..2.0 * std::f64::consts::PI)));
            p
        })
        .collect()
}

/// Collar family together with its product reference.
pub fn with_reference(
    family: Arc<dyn CollarFamily>,
    mirrored: bool,
) -> Result<(Arc<dyn CollarFamily>, Arc<dyn CollarFamily>), CollarError> {
    let r: Arc<dyn CollarFamily> = Arc::new(ProductReference::with_defaults(family.clone(), mirrored)?);
    Ok((family, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::JetEnv;
    use crate::metric::metric_jets;

    #[test]
    fn slab_is_reproducible_and_positive() {
        let a = random_trig_slab(42, 4, 2).unwrap();
        let b = random_trig_slab(42, 4, 2).unwrap();
        let sa: Vec<String> = a.components().iter().map(|e| e.to_string()).collect();
        let sb: Vec<String> = b.components().iter().map(|e| e.to_string()).collect();
        assert_eq!(sa, sb);
        let g = crate::collar::CollarMetric::new(Arc::new(a));
        for p in slab_points(1, 4, 20, 0.0, 1.0) {
            metric_jets(&g, &p, 0).unwrap();
        }
    }

    #[test]
    fn slab_is_periodic() {
        let a = random_trig_slab(7, 4, 2).unwrap();
        let two_pi = 2.0 * std::f64::consts::PI;
        for e in a.components() {
            let env0 = JetEnv::coordinates(&[0.4, 0.1, 0.2, 0.3], 0);
            let env1 = JetEnv::coordinates(&[0.4, 0.1 + two_pi, 0.2, 0.3 - two_pi], 0);
            let d = e.eval_jet(&env0).unwrap().constant_term() - e.eval_jet(&env1).unwrap().constant_term();
            assert!(d.abs() < 1e-12);
        }
    }
}

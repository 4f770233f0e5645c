//! Collar geometry near a boundary `{t = 0}`.
//!
//! A collar family is a metric `dt² + h(t, x)` in geodesic normal form, with
//! `∂_t` the unit inner normal. From it we build the product reference metric
//! `g₀`, the difference tensor `θ = ∇¹ − ∇⁰`, the curvature family `R^s` and
//! the boundary eigenframe of the Weingarten operator.

mod checks;
mod fermi;
mod flat_ambient;
mod geometry;

use std::sync::Arc;

use thiserror::Error;

use crate::curvature::CurvatureError;
use crate::expr::{EvalError, Expr, JetEnv};
use crate::form::FormError;
use crate::jet::{plateau, Jet, JetError};
use crate::metric::{MetricError, MetricSource};
use crate::scalar::Scalar;

pub use checks::{
    check_coma, check_dnat, check_dnt0, check_ect, check_lemma_3v0, check_master, check_r04d,
    check_t2d, check_tetab, check_theta_cubed, CheckValue,
};
pub use fermi::{FermiCollar, FermiOptions, FermiReport};
pub use flat_ambient::FlatAmbientCollar;
pub use geometry::{weingarten, BoundaryFrame, CollarPoint};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CollarError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("plateau parameters must satisfy 0 < a < b <= {limit}, got a = {a}, b = {b}")]
    BadPlateau { a: f64, b: f64, limit: f64 },
    #[error("collar metric degenerates at t = {t} (focal point or invalid chart)")]
    Degenerate { t: f64 },
    #[error("geodesic integration failed: {0}")]
    Integration(String),
    #[error("{0}")]
    Invalid(String),
}

/// A metric `dt² + h(t, x)` near `{t = 0}`.
pub trait CollarFamily: Send + Sync {
    /// Total dimension `n`; `h` is `(n−1) × (n−1)`.
    fn dim(&self) -> usize;

    /// Collar depth `T`.
    fn depth(&self) -> f64;

    /// Row-major components of `h` as jets in all `n` variables at `point`.
    fn h_jets(&self, point: &[f64], order: usize) -> Result<Vec<Jet>, CollarError>;
}

/// The full metric of a collar family, `g_tt = 1`, `g_ti = 0`.
pub struct CollarMetric(pub Arc<dyn CollarFamily>);

impl CollarMetric {
    pub fn new(family: Arc<dyn CollarFamily>) -> Self {
        CollarMetric(family)
    }
}

/// Assembles `dt² ⊕ h` from tangential jets.
pub fn block_metric(n: usize, h: &[Jet]) -> Vec<Jet> {
    let m = n - 1;
    let zero = Jet::zero_in(h[0].layout());
    let mut g = vec![zero; n * n];
    g[0] = Jet::constant_in(h[0].layout(), 1.0);
    for r in 0..m {
        for c in 0..m {
            g[(r + 1) * n + c + 1] = h[r * m + c].clone();
        }
    }
    g
}

impl MetricSource for CollarMetric {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn raw_jets(&self, point: &[f64], order: usize) -> Result<Vec<Jet>, MetricError> {
        let h = self
            .0
            .h_jets(point, order)
            .map_err(|e| MetricError::Invalid(e.to_string()))?;
        Ok(block_metric(self.dim(), &h))
    }
}

/// Collar with `h` given by expressions in `t, x1, ..`.
#[derive(Debug, Clone)]
pub struct ExprCollar {
    dim: usize,
    depth: f64,
    h: Vec<Expr>,
}

impl ExprCollar {
    /// `h` is row-major `(n−1) × (n−1)`; the lower triangle mirrors the upper.
    pub fn new(dim: usize, depth: f64, h: Vec<Expr>) -> Result<Self, CollarError> {
        let m = dim - 1;
        if h.len() != m * m {
            return Err(CollarError::Invalid(format!(
                "expected {} tangential components, got {}",
                m * m,
                h.len()
            )));
        }
        if !(depth > 0.0) {
            return Err(CollarError::Invalid(format!("collar depth must be positive, got {depth}")));
        }
        let mut h = h;
        for r in 0..m {
            for c in 0..r {
                h[r * m + c] = h[c * m + r].clone();
            }
        }
        for e in &h {
            e.validate_dimension(dim)?;
        }
        Ok(ExprCollar { dim, depth, h })
    }

    pub fn components(&self) -> &[Expr] {
        &self.h
    }
}

impl CollarFamily for ExprCollar {
    fn dim(&self) -> usize {
        self.dim
    }

    fn depth(&self) -> f64 {
        self.depth
    }

    fn h_jets(&self, point: &[f64], order: usize) -> Result<Vec<Jet>, CollarError> {
        let env = JetEnv::coordinates(point, order);
        let m = self.dim - 1;
        let mut out: Vec<Jet> = Vec::with_capacity(m * m);
        for r in 0..m {
            for c in 0..m {
                if c < r {
                    out.push(out[c * m + r].clone());
                } else {
                    out.push(self.h[r * m + c].eval_jet(&env)?);
                }
            }
        }
        Ok(out)
    }
}

/// Product reference `g₀ = dt² + h₀` with
/// `h₀ = p(t) h(0, x) + (1 − p(t)) h(t, x)` for the plateau `p` on `[a, b]`.
/// When mirrored, the same construction is applied at `t = T`:
/// `h₀ = p(t) h(0) + p(T−t) h(T) + (1 − p(t) − p(T−t)) h(t)`.
pub struct ProductReference {
    inner: Arc<dyn CollarFamily>,
    a: f64,
    b: f64,
    mirrored: bool,
}

impl ProductReference {
    pub fn new(inner: Arc<dyn CollarFamily>, a: f64, b: f64, mirrored: bool) -> Result<Self, CollarError> {
        let t = inner.depth();
        let limit = if mirrored { t / 2.0 } else { t };
        if !(0.0 < a && a < b && b <= limit) {
            return Err(CollarError::BadPlateau { a, b, limit });
        }
        Ok(ProductReference {
            inner,
            a,
            b,
            mirrored,
        })
    }

    /// Default plateau `(a, b) = (T/4, T/2)`.
    pub fn with_defaults(inner: Arc<dyn CollarFamily>, mirrored: bool) -> Result<Self, CollarError> {
        let t = inner.depth();
        Self::new(inner, t / 4.0, t / 2.0, mirrored)
    }

    pub fn plateau_interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn is_mirrored(&self) -> bool {
        self.mirrored
    }

    /// Breakpoints of `[0, T]` at the ends of each plateau transition, with
    /// every transition split into `subpanels` equal pieces. The reference
    /// metric is analytic between consecutive breakpoints.
    pub fn t_breakpoints(&self, subpanels: usize) -> Vec<f64> {
        let depth = self.depth();
        let sub = subpanels.max(1);
        let split = |lo: f64, hi: f64| -> Vec<f64> {
            (0..=sub).map(|k| lo + (hi - lo) * k as f64 / sub as f64).collect()
        };
        let mut out = vec![0.0];
        out.extend(split(self.a, self.b));
        if self.mirrored {
            out.extend(split(depth - self.b, depth - self.a));
        }
        out.push(depth);
        out.dedup();
        out
    }

    /// `h` at `(t0, x)` viewed as a function of `x` alone.
    fn frozen(&self, point: &[f64], t0: f64, order: usize) -> Result<Vec<Jet>, CollarError> {
        let mut p = point.to_vec();
        p[0] = t0;
        Ok(self
            .inner
            .h_jets(&p, order)?
            .iter()
            .map(|j| j.freeze_var(0))
            .collect())
    }
}

impl CollarFamily for ProductReference {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn depth(&self) -> f64 {
        self.inner.depth()
    }

    fn h_jets(&self, point: &[f64], order: usize) -> Result<Vec<Jet>, CollarError> {
        let n = self.dim();
        let depth = self.depth();
        let t = Jet::variable(n, order, 0, point[0]);
        let one = Jet::constant_in(t.layout(), 1.0);
        // plateau jets are exact constants off the transitions; skip the
        // terms they annihilate
        let parts = [
            (0.0, plateau(&t, self.a, self.b)),
            (
                depth,
                if self.mirrored {
                    plateau(&(t.scale(-1.0) + depth), self.a, self.b)
                } else {
                    Jet::zero_in(t.layout())
                },
            ),
        ];
        let mut rest = one;
        let mut out: Option<Vec<Jet>> = None;
        for (t0, p) in &parts {
            if p.is_exact_zero() {
                continue;
            }
            let frozen = self.frozen(point, *t0, order)?;
            let term: Vec<Jet> = frozen.iter().map(|c| c * p).collect();
            out = Some(match out {
                None => term,
                Some(acc) => acc.iter().zip(&term).map(|(a, b)| a + b).collect(),
            });
            rest = rest - p;
        }
        if !rest.is_exact_zero() {
            let h = self.inner.h_jets(point, order)?;
            let term: Vec<Jet> = h.iter().map(|c| c * &rest).collect();
            out = Some(match out {
                None => term,
                Some(acc) => acc.iter().zip(&term).map(|(a, b)| a + b).collect(),
            });
        }
        Ok(out.expect("plateau weights sum to one"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slab() -> Arc<dyn CollarFamily> {
        let m = 3;
        let mut h = vec![Expr::Const(0.0); m * m];
        h[0] = Expr::parse("1 + 0.1*t*cos(x1)").unwrap();
        h[4] = Expr::parse("1 + 0.05*t^2").unwrap();
        h[8] = Expr::parse("exp(0.2*t*sin(x2 + x3))").unwrap();
        h[1] = Expr::parse("0.02*t*sin(x3)").unwrap();
        Arc::new(ExprCollar::new(4, 1.0, h).unwrap())
    }

    #[test]
    fn reference_is_product_near_boundary() {
        let c = slab();
        let r = ProductReference::with_defaults(c.clone(), false).unwrap();
        let h0 = r.h_jets(&[0.0, 0.3, 0.2, 0.1], 2).unwrap();
        let h = c.h_jets(&[0.0, 0.3, 0.2, 0.1], 2).unwrap();
        for (a, b) in h0.iter().zip(&h) {
            assert!((a.constant_term() - b.constant_term()).abs() < 1e-15);
            assert_eq!(a.partial(0).unwrap().max_abs_coeff(), 0.0);
        }
    }

    #[test]
    fn reference_matches_metric_past_plateau() {
        let c = slab();
        let r = ProductReference::with_defaults(c.clone(), false).unwrap();
        let p = [0.7, 0.3, 0.2, 0.1];
        let h0 = r.h_jets(&p, 2).unwrap();
        let h = c.h_jets(&p, 2).unwrap();
        for (a, b) in h0.iter().zip(&h) {
            assert!((a.clone() - b.clone()).max_abs_coeff() < 1e-15);
        }
    }

    #[test]
    fn mirrored_reference_near_both_ends() {
        let c = slab();
        let r = ProductReference::with_defaults(c.clone(), true).unwrap();
        let near_top = [0.99, 0.3, 0.2, 0.1];
        let top = [1.0, 0.3, 0.2, 0.1];
        let h0 = r.h_jets(&near_top, 1).unwrap();
        let ht = c.h_jets(&top, 1).unwrap();
        for (a, b) in h0.iter().zip(&ht) {
            assert!((a.constant_term() - b.constant_term()).abs() < 1e-15);
        }
    }

    #[test]
    fn plateau_ordering_is_checked() {
        assert!(matches!(
            ProductReference::new(slab(), 0.5, 0.25, false),
            Err(CollarError::BadPlateau { .. })
        ));
    }

    #[test]
    fn t_independent_collar_is_its_own_reference() {
        let h = vec![
            Expr::parse("2 + cos(x1)").unwrap(),
            Expr::Const(0.0),
            Expr::Const(0.0),
            Expr::Const(1.0),
        ];
        let c: Arc<dyn CollarFamily> = Arc::new(ExprCollar::new(3, 1.0, h).unwrap());
        let r = ProductReference::with_defaults(c.clone(), false).unwrap();
        for t in [0.1, 0.3, 0.6] {
            let p = [t, 0.4, 0.2];
            for (a, b) in r.h_jets(&p, 2).unwrap().iter().zip(&c.h_jets(&p, 2).unwrap()) {
                assert!((a.clone() - b.clone()).max_abs_coeff() < 1e-15);
            }
        }
    }
}

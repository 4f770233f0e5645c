//! Metric fields: sources of symmetric metric jets at chart points.

use std::sync::Arc;

use thiserror::Error;

use crate::expr::{coordinate_name, EvalError, Expr, JetEnv, ParseError};
use crate::jet::Jet;
use crate::linalg::min_sym_eigenvalue;

pub const POSITIVITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("metric component ({row}, {col}): {source}")]
    Parse {
        row: usize,
        col: usize,
        source: ParseError,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("metric is not positive definite at {point:?} (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { point: Vec<f64>, min_eigenvalue: f64 },
    #[error("expected a point of dimension {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("{0}")]
    Invalid(String),
}

/// Anything that produces metric jets at chart points.
pub trait MetricSource: Send + Sync {
    fn dim(&self) -> usize;

    /// Row-major `n × n` metric components as jets in all `n` coordinates,
    /// expanded at `point` to the given order. Positive definiteness is not
    /// checked here; see [`metric_jets`].
    fn raw_jets(&self, point: &[f64], order: usize) -> Result<Vec<Jet>, MetricError>;
}

/// Metric jets with dimension and positive-definiteness checks.
pub fn metric_jets(
    source: &dyn MetricSource,
    point: &[f64],
    order: usize,
) -> Result<Vec<Jet>, MetricError> {
    let n = source.dim();
    if point.len() != n {
        return Err(MetricError::DimMismatch {
            expected: n,
            got: point.len(),
        });
    }
    let g = source.raw_jets(point, order)?;
    let values: Vec<f64> = g.iter().map(|j| j.constant_term()).collect();
    let min = min_sym_eigenvalue(n, &values);
    if !(min > POSITIVITY_TOL) {
        return Err(MetricError::NotPositiveDefinite {
            point: point.to_vec(),
            min_eigenvalue: min,
        });
    }
    Ok(g)
}

/// Metric given componentwise by expressions in `t, x1, ..`.
#[derive(Debug, Clone)]
pub struct ExprMetric {
    dim: usize,
    components: Vec<Expr>,
}

impl ExprMetric {
    /// `components` is row-major; only the upper triangle is read and the
    /// lower one is mirrored from it.
    pub fn new(dim: usize, components: Vec<Expr>) -> Result<Self, MetricError> {
        if components.len() != dim * dim {
            return Err(MetricError::Invalid(format!(
                "expected {} components, got {}",
                dim * dim,
                components.len()
            )));
        }
        let mut sym = components;
        for r in 0..dim {
            for c in 0..r {
                sym[r * dim + c] = sym[c * dim + r].clone();
            }
        }
        for e in &sym {
            e.validate_dimension(dim)?;
        }
        Ok(ExprMetric {
            dim,
            components: sym,
        })
    }

    pub fn parse(dim: usize, rows: &[Vec<String>]) -> Result<Self, MetricError> {
        let mut comps = Vec::with_capacity(dim * dim);
        if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
            return Err(MetricError::Invalid(format!(
                "metric must be a {dim}x{dim} array of expressions"
            )));
        }
        for (r, row) in rows.iter().enumerate() {
            for (c, text) in row.iter().enumerate() {
                let e = Expr::parse(text).map_err(|source| MetricError::Parse {
                    row: r,
                    col: c,
                    source,
                })?;
                comps.push(e);
            }
        }
        Self::new(dim, comps)
    }

    /// Block metric `dt² + h(t, x)` from the `(n-1)²` components of `h`.
    pub fn block(dim: usize, h: Vec<Expr>) -> Result<Self, MetricError> {
        let m = dim - 1;
        if h.len() != m * m {
            return Err(MetricError::Invalid(format!(
                "expected {} tangential components, got {}",
                m * m,
                h.len()
            )));
        }
        let mut comps = vec![Expr::Const(0.0); dim * dim];
        comps[0] = Expr::Const(1.0);
        for r in 0..m {
            for c in 0..m {
                comps[(r + 1) * dim + c + 1] = h[r * m + c].clone();
            }
        }
        Self::new(dim, comps)
    }

    /// Warped product `dt² + φ(t, x)² f_ij dx^i dx^j`.
    pub fn warped(dim: usize, warp: &Expr, fibre: Vec<Expr>) -> Result<Self, MetricError> {
        let w2 = Expr::Pow(Box::new(warp.clone()), 2.0);
        let h = fibre
            .into_iter()
            .map(|f| {
                Expr::Binary(crate::expr::BinOp::Mul, Box::new(w2.clone()), Box::new(f))
            })
            .collect();
        Self::block(dim, h)
    }

    pub fn component(&self, row: usize, col: usize) -> &Expr {
        &self.components[row * self.dim + col]
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }
}

impl MetricSource for ExprMetric {
    fn dim(&self) -> usize {
        self.dim
    }

    fn raw_jets(&self, point: &[f64], order: usize) -> Result<Vec<Jet>, MetricError> {
        let env = JetEnv::coordinates(point, order);
        let n = self.dim;
        let mut out: Vec<Jet> = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                if c < r {
                    out.push(out[c * n + r].clone());
                } else {
                    out.push(self.components[r * n + c].eval_jet(&env)?);
                }
            }
        }
        Ok(out)
    }
}

/// Conformally flat metric `e^{2f} δ`.
#[derive(Debug, Clone)]
pub struct ConformalFlat {
    dim: usize,
    f: Expr,
}

impl ConformalFlat {
    pub fn new(dim: usize, f: Expr) -> Result<Self, MetricError> {
        f.validate_dimension(dim)?;
        Ok(ConformalFlat { dim, f })
    }

    pub fn factor(&self) -> &Expr {
        &self.f
    }

    /// `f` as a jet at `point`.
    pub fn factor_jet(&self, point: &[f64], order: usize) -> Result<Jet, MetricError> {
        Ok(self.f.eval_jet(&JetEnv::coordinates(point, order))?)
    }
}

impl MetricSource for ConformalFlat {
    fn dim(&self) -> usize {
        self.dim
    }

    fn raw_jets(&self, point: &[f64], order: usize) -> Result<Vec<Jet>, MetricError> {
        let n = self.dim;
        let e2f = self.factor_jet(point, order)?.scale(2.0).exp();
        let zero = Jet::zero_in(e2f.layout());
        Ok((0..n * n)
            .map(|e| if e / n == e % n { e2f.clone() } else { zero.clone() })
            .collect())
    }
}

/// The metric of a source seen through an affine chart change
/// `y = offset + A x`; used for overlapping-chart sanity checks.
pub struct AffineChart {
    pub inner: Arc<dyn MetricSource>,
    pub offset: Vec<f64>,
    /// Row-major `n × n` Jacobian `∂y/∂x`.
    pub linear: Vec<f64>,
}

impl MetricSource for AffineChart {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn raw_jets(&self, point: &[f64], order: usize) -> Result<Vec<Jet>, MetricError> {
        let n = self.dim();
        let a = &self.linear;
        let y: Vec<f64> = (0..n)
            .map(|i| self.offset[i] + (0..n).map(|j| a[i * n + j] * point[j]).sum::<f64>())
            .collect();
        let gy = self.inner.raw_jets(&y, order)?;
        // y - y0 as jets in x
        let x = Jet::coordinates(point, order);
        let shifts: Vec<Jet> = (0..n)
            .map(|i| {
                let mut s = Jet::zero_in(x[0].layout());
                for j in 0..n {
                    s = s + (x[j].clone() - point[j]) * a[i * n + j];
                }
                s
            })
            .collect();
        let gy: Vec<Jet> = gy.iter().map(|c| c.compose_vars(&shifts)).collect();
        let mut out = Vec::with_capacity(n * n);
        for p in 0..n {
            for q in 0..n {
                let mut s = Jet::zero_in(x[0].layout());
                for i in 0..n {
                    for j in 0..n {
                        let w = a[i * n + p] * a[j * n + q];
                        if w != 0.0 {
                            s = s + &gy[i * n + j] * w;
                        }
                    }
                }
                out.push(s);
            }
        }
        Ok(out)
    }
}

/// Names `t, x1, ..` for a dimension, in coordinate order.
pub fn coordinate_names(dim: usize) -> Vec<String> {
    (0..dim).map(coordinate_name).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expr_metric_is_symmetrized() {
        let rows = vec![
            vec!["1".to_string(), "t".to_string()],
            vec!["ignored".to_string(), "2".to_string()],
        ];
        let g = ExprMetric::parse(2, &rows).unwrap();
        let j = g.raw_jets(&[0.1, 0.0], 1).unwrap();
        assert_eq!(j[1].constant_term(), 0.1);
        assert_eq!(j[2].constant_term(), 0.1);
    }

    #[test]
    fn positivity_is_checked() {
        let rows = vec![
            vec!["1".to_string(), "0".to_string()],
            vec!["0".to_string(), "t".to_string()],
        ];
        let g = ExprMetric::parse(2, &rows).unwrap();
        assert!(metric_jets(&g, &[0.5, 0.0], 1).is_ok());
        assert!(matches!(
            metric_jets(&g, &[-0.5, 0.0], 1),
            Err(MetricError::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn unknown_coordinate_rejected() {
        let f = Expr::parse("x5").unwrap();
        assert!(ConformalFlat::new(4, f).is_err());
    }
}

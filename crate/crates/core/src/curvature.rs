//! Levi-Civita connection and curvature at a point.
//!
//! Conventions: `R(X,Y) = [∇_X, ∇_Y] − ∇_[X,Y]`, so
//! `R^l_{ijk} = ∂_iΓ^l_{jk} − ∂_jΓ^l_{ik} + Γ^l_{im}Γ^m_{jk} − Γ^l_{jm}Γ^m_{ik}`
//! and `Riemann4(i,j,k,l) = ⟨R(e_i,e_j)e_k, e_l⟩`. Indices are flattened
//! row-major: `gamma[(k*n + i)*n + j] = Γ^k_{ij}`,
//! `riemann_up[((l*n + i)*n + j)*n + k] = R^l_{ijk}`.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::form::{mask_of, EndForm};
use crate::jet::{Jet, JetError};
use crate::linalg::invert;
use crate::metric::{metric_jets, MetricError, MetricSource};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurvatureError {
    #[error("metric jets of order {have} are too short; at least {need} needed")]
    InsufficientOrder { need: usize, have: usize },
    #[error("metric is singular at the evaluation point")]
    Singular,
    #[error("the Schouten tensor needs dimension at least 3, got {0}")]
    DimTooSmall(usize),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Curvature data of a metric at one point.
#[derive(Debug, Clone)]
pub struct CurvaturePoint<S: Scalar> {
    pub dim: usize,
    pub g: Vec<S>,
    pub ginv: Vec<S>,
    pub gamma: Vec<S>,
    pub riemann_up: Vec<S>,
    pub riemann4: Vec<S>,
    pub ricci: Vec<S>,
    pub scal: S,
    pub schouten: Vec<S>,
    pub weyl4: Vec<S>,
}

#[inline]
pub fn idx3(n: usize, a: usize, b: usize, c: usize) -> usize {
    (a * n + b) * n + c
}

#[inline]
pub fn idx4(n: usize, a: usize, b: usize, c: usize, d: usize) -> usize {
    ((a * n + b) * n + c) * n + d
}

/// Inverse metric (same order as `g`) and Christoffel symbols (one order
/// less).
pub fn christoffel(n: usize, g: &[Jet]) -> Result<(Vec<Jet>, Vec<Jet>), CurvatureError> {
    let order = g[0].order();
    if order < 1 {
        return Err(CurvatureError::InsufficientOrder { need: 1, have: order });
    }
    let ginv = invert(n, g).ok_or(CurvatureError::Singular)?;
    let ginv_low: Vec<Jet> = ginv.iter().map(|j| j.truncate(order - 1)).collect();
    // dg[(a*n + i)*n + j] = ∂_a g_ij
    let mut dg = Vec::with_capacity(n * n * n);
    for a in 0..n {
        for e in 0..n * n {
            dg.push(g[e].partial(a)?);
        }
    }
    let layout = dg[0].layout().clone();
    // Γ_{lij} = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
    let mut lower = vec![Jet::zero_in(&layout); n * n * n];
    for l in 0..n {
        for i in 0..n {
            for j in i..n {
                let v = (&dg[idx3(n, i, j, l)] + &dg[idx3(n, j, i, l)] - &dg[idx3(n, l, i, j)])
                    .scale(0.5);
                lower[idx3(n, l, j, i)] = v.clone();
                lower[idx3(n, l, i, j)] = v;
            }
        }
    }
    let mut gamma = vec![Jet::zero_in(&layout); n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let mut s = Jet::zero_in(&layout);
                for l in 0..n {
                    s.add_product(&ginv_low[k * n + l], &lower[idx3(n, l, i, j)]);
                }
                gamma[idx3(n, k, j, i)] = s.clone();
                gamma[idx3(n, k, i, j)] = s;
            }
        }
    }
    Ok((ginv, gamma))
}

/// `R^l_{ijk}` from Christoffel jets; one order is consumed.
pub fn riemann_from_gamma(n: usize, gamma: &[Jet]) -> Result<Vec<Jet>, CurvatureError> {
    let order = gamma[0].order();
    if order < 1 {
        return Err(CurvatureError::InsufficientOrder {
            need: 2,
            have: order + 1,
        });
    }
    let mut dgamma = Vec::with_capacity(n * gamma.len());
    for a in 0..n {
        for c in gamma {
            dgamma.push(c.partial(a)?);
        }
    }
    let gl: Vec<Jet> = gamma.iter().map(|j| j.truncate(order - 1)).collect();
    let layout = gl[0].layout().clone();
    let n3 = n * n * n;
    let mut r = vec![Jet::zero_in(&layout); n * n3];
    for l in 0..n {
        for i in 0..n {
            for j in (i + 1)..n {
                for k in 0..n {
                    let mut s = &dgamma[i * n3 + idx3(n, l, j, k)] - &dgamma[j * n3 + idx3(n, l, i, k)];
                    for m in 0..n {
                        s.add_product(&gl[idx3(n, l, i, m)], &gl[idx3(n, m, j, k)]);
                        let p = &gl[idx3(n, l, j, m)] * &gl[idx3(n, m, i, k)];
                        s.add_scaled(-1.0, &p);
                    }
                    r[idx4(n, l, j, i, k)] = -&s;
                    r[idx4(n, l, i, j, k)] = s;
                }
            }
        }
    }
    Ok(r)
}

/// `(A ⊘ B)(1,2,3,4) = A₁₄B₂₃ + A₂₃B₁₄ − A₁₃B₂₄ − A₂₄B₁₃`.
pub fn kulkarni_nomizu<S: Scalar>(n: usize, a: &[S], b: &[S]) -> Vec<S> {
    let ctx = a[0].ctx();
    let mut out = vec![S::zero(&ctx); n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let o = &mut out[idx4(n, i, j, k, l)];
                    o.add_product(&a[i * n + l], &b[j * n + k]);
                    o.add_product(&a[j * n + k], &b[i * n + l]);
                    let p = a[i * n + k].mul_ref(&b[j * n + l]);
                    o.add_scaled(-1.0, &p);
                    let p = a[j * n + l].mul_ref(&b[i * n + k]);
                    o.add_scaled(-1.0, &p);
                }
            }
        }
    }
    out
}

/// `(1/(n−2)) (Ric − scal/(2(n−1)) g)`.
pub fn schouten<S: Scalar>(n: usize, g: &[S], ricci: &[S], scal: &S) -> Result<Vec<S>, CurvatureError> {
    if n < 3 {
        return Err(CurvatureError::DimTooSmall(n));
    }
    let c = 1.0 / (n as f64 - 2.0);
    let k = scal.scale(1.0 / (2.0 * (n as f64 - 1.0)));
    Ok((0..n * n)
        .map(|e| ricci[e].sub_ref(&g[e].mul_ref(&k)).scale(c))
        .collect())
}

impl CurvaturePoint<Jet> {
    /// Full pipeline from metric jets of order `r ≥ 2`; the stored tensors
    /// have order `r − 2`.
    pub fn from_metric_jets(n: usize, g: &[Jet]) -> Result<Self, CurvatureError> {
        let order = g[0].order();
        if order < 2 {
            return Err(CurvatureError::InsufficientOrder { need: 2, have: order });
        }
        let (ginv, gamma) = christoffel(n, g)?;
        Self::from_christoffel(n, g, &ginv, &gamma)
    }

    /// Pipeline from precomputed Christoffel symbols (order `r − 1` for a
    /// metric of order `r`).
    pub fn from_christoffel(
        n: usize,
        g: &[Jet],
        ginv: &[Jet],
        gamma: &[Jet],
    ) -> Result<Self, CurvatureError> {
        let order = g[0].order();
        if order < 2 {
            return Err(CurvatureError::InsufficientOrder { need: 2, have: order });
        }
        let riemann_up = riemann_from_gamma(n, gamma)?;
        let lo = order - 2;
        let g2: Vec<Jet> = g.iter().map(|j| j.truncate(lo)).collect();
        let ginv2: Vec<Jet> = ginv.iter().map(|j| j.truncate(lo)).collect();
        let gamma2: Vec<Jet> = gamma.iter().map(|j| j.truncate(lo)).collect();
        Ok(Self::assemble(n, g2, ginv2, gamma2, riemann_up))
    }

    pub fn at(source: &dyn MetricSource, point: &[f64], order: usize) -> Result<Self, CurvatureError> {
        let g = metric_jets(source, point, order)?;
        Self::from_metric_jets(source.dim(), &g)
    }

    /// Base-point values.
    pub fn values(&self) -> CurvaturePoint<f64> {
        let v = |xs: &[Jet]| xs.iter().map(|j| j.constant_term()).collect::<Vec<f64>>();
        CurvaturePoint {
            dim: self.dim,
            g: v(&self.g),
            ginv: v(&self.ginv),
            gamma: v(&self.gamma),
            riemann_up: v(&self.riemann_up),
            riemann4: v(&self.riemann4),
            ricci: v(&self.ricci),
            scal: self.scal.constant_term(),
            schouten: v(&self.schouten),
            weyl4: v(&self.weyl4),
        }
    }
}

impl CurvaturePoint<f64> {
    /// Base-point curvature from metric jets of order `r ≥ 2`. Same result
    /// as `from_metric_jets(..).values()`, with the quadratic Riemann terms
    /// formed in plain floats.
    pub fn values_from_metric_jets(n: usize, g: &[Jet]) -> Result<Self, CurvatureError> {
        let order = g[0].order();
        if order < 2 {
            return Err(CurvatureError::InsufficientOrder { need: 2, have: order });
        }
        let (ginv, gamma) = christoffel(n, g)?;
        let gv: Vec<f64> = gamma.iter().map(|j| j.constant_term()).collect();
        let n3 = n * n * n;
        let mut r = vec![0.0; n * n3];
        for l in 0..n {
            for i in 0..n {
                for j in (i + 1)..n {
                    for k in 0..n {
                        let mut s = gamma[idx3(n, l, j, k)].first_derivative(i)
                            - gamma[idx3(n, l, i, k)].first_derivative(j);
                        for m in 0..n {
                            s += gv[idx3(n, l, i, m)] * gv[idx3(n, m, j, k)]
                                - gv[idx3(n, l, j, m)] * gv[idx3(n, m, i, k)];
                        }
                        r[idx4(n, l, j, i, k)] = -s;
                        r[idx4(n, l, i, j, k)] = s;
                    }
                }
            }
        }
        let v = |xs: &[Jet]| xs.iter().map(|j| j.constant_term()).collect::<Vec<f64>>();
        Ok(Self::assemble(n, v(g), v(&ginv), gv, r))
    }

    pub fn values_at(source: &dyn MetricSource, point: &[f64]) -> Result<Self, CurvatureError> {
        let g = metric_jets(source, point, 2)?;
        Self::values_from_metric_jets(source.dim(), &g)
    }
}

impl<S: Scalar> CurvaturePoint<S> {
    fn assemble(n: usize, g: Vec<S>, ginv: Vec<S>, gamma: Vec<S>, riemann_up: Vec<S>) -> Self {
        let ctx = g[0].ctx();
        let mut riemann4 = vec![S::zero(&ctx); n * n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let o = &mut riemann4[idx4(n, i, j, k, l)];
                        for m in 0..n {
                            o.add_product(&g[l * n + m], &riemann_up[idx4(n, m, i, j, k)]);
                        }
                    }
                }
            }
        }
        let mut ricci = vec![S::zero(&ctx); n * n];
        for j in 0..n {
            for k in 0..n {
                for i in 0..n {
                    ricci[j * n + k].add_assign_ref(&riemann_up[idx4(n, i, i, j, k)]);
                }
            }
        }
        let mut scal = S::zero(&ctx);
        for e in 0..n * n {
            scal.add_product(&ginv[e], &ricci[e]);
        }
        let (schouten, weyl4) = if n >= 3 {
            let sch = schouten(n, &g, &ricci, &scal).expect("n >= 3");
            let kn = kulkarni_nomizu(n, &sch, &g);
            let w = riemann4.iter().zip(&kn).map(|(r, k)| r.sub_ref(k)).collect();
            (sch, w)
        } else {
            (vec![S::zero(&ctx); n * n], vec![S::zero(&ctx); n * n * n * n])
        };
        CurvaturePoint {
            dim: n,
            g,
            ginv,
            gamma,
            riemann_up,
            riemann4,
            ricci,
            scal,
            schouten,
            weyl4,
        }
    }

    /// Curvature as a 2-form valued endomorphism: mask `{i, j}` (i < j)
    /// holds the matrix `[l][k] = R^l_{ijk}`.
    pub fn riemann_end(&self) -> EndForm<S> {
        let n = self.dim;
        let ctx = self.g[0].ctx();
        let mut e = EndForm::zero(n, &ctx);
        for i in 0..n {
            for j in (i + 1)..n {
                let mask = mask_of(&[i, j]);
                for l in 0..n {
                    for k in 0..n {
                        e.set(mask, l, k, self.riemann_up[idx4(n, l, i, j, k)].clone());
                    }
                }
            }
        }
        e
    }

    /// Connection 1-form: mask `{a}` holds `[k][j] = Γ^k_{aj}`.
    pub fn connection_form(&self) -> EndForm<S> {
        connection_form(self.dim, &self.gamma)
    }
}

pub fn connection_form<S: Scalar>(n: usize, gamma: &[S]) -> EndForm<S> {
    let ctx = gamma[0].ctx();
    let mut e = EndForm::zero(n, &ctx);
    for a in 0..n {
        for k in 0..n {
            for j in 0..n {
                e.set(1 << a, k, j, gamma[idx3(n, k, a, j)].clone());
            }
        }
    }
    e
}

/// `⟨F(e_i,e_j)e_k, e_l⟩` for a 2-form valued endomorphism `F`.
pub fn lower_end(n: usize, f: &EndForm<f64>, g: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (mask, sign) = if i < j {
                (mask_of(&[i, j]), 1.0)
            } else {
                (mask_of(&[j, i]), -1.0)
            };
            for k in 0..n {
                for l in 0..n {
                    let mut s = 0.0;
                    for m in 0..n {
                        s += g[l * n + m] * f.entry(mask, m, k);
                    }
                    out[idx4(n, i, j, k, l)] = sign * s;
                }
            }
        }
    }
    out
}

/// Contracts a (0,4) tensor against four vectors.
pub fn contract4(n: usize, t: &[f64], u: [&[f64]; 4]) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let ij = u[0][i] * u[1][j];
            if ij == 0.0 {
                continue;
            }
            for k in 0..n {
                for l in 0..n {
                    s += t[idx4(n, i, j, k, l)] * ij * u[2][k] * u[3][l];
                }
            }
        }
    }
    s
}

impl CurvaturePoint<f64> {
    /// `|T|²` with all indices raised by `g`, for a (0,4) tensor.
    pub fn norm4(&self, t: &[f64]) -> f64 {
        let n = self.dim;
        let gi = DMatrix::from_row_slice(n, n, &self.ginv);
        // raise each index in turn
        let mut up = t.to_vec();
        for slot in 0..4 {
            let mut next = vec![0.0; up.len()];
            for e in 0..up.len() {
                let mut idx = [e / (n * n * n), (e / (n * n)) % n, (e / n) % n, e % n];
                let orig = idx[slot];
                let mut s = 0.0;
                for m in 0..n {
                    idx[slot] = m;
                    s += gi[(orig, m)] * up[idx4(n, idx[0], idx[1], idx[2], idx[3])];
                }
                next[e] = s;
            }
            up = next;
        }
        t.iter().zip(&up).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt()
    }

    pub fn weyl_norm(&self) -> f64 {
        self.norm4(&self.weyl4)
    }

    pub fn sectional(&self, u: &[f64], v: &[f64]) -> f64 {
        let n = self.dim;
        let gn = |a: &[f64], b: &[f64]| -> f64 {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += self.g[i * n + j] * a[i] * b[j];
                }
            }
            s
        };
        let num = contract4(n, &self.riemann4, [u, v, v, u]);
        let den = gn(u, u) * gn(v, v) - gn(u, v).powi(2);
        num / den
    }

    /// Largest deviation from the algebraic curvature symmetries and first
    /// Bianchi identity.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.dim;
        let r = &self.riemann4;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let x = r[idx4(n, i, j, k, l)];
                        worst = worst
                            .max((x + r[idx4(n, j, i, k, l)]).abs())
                            .max((x + r[idx4(n, i, j, l, k)]).abs())
                            .max((x - r[idx4(n, k, l, i, j)]).abs())
                            .max(
                                (x + r[idx4(n, i, k, l, j)] + r[idx4(n, i, l, j, k)]).abs(),
                            );
                    }
                }
            }
        }
        worst
    }

    /// Largest `g`-trace of the Weyl tensor over its first and last slots.
    pub fn weyl_trace_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for k in 0..n {
                let mut s = 0.0;
                for i in 0..n {
                    for l in 0..n {
                        s += self.ginv[i * n + l] * self.weyl4[idx4(n, i, j, k, l)];
                    }
                }
                worst = worst.max(s.abs());
            }
        }
        worst
    }
}

/// Gram-Schmidt under `g` (row-major); input vectors must be independent.
pub fn gram_schmidt(n: usize, g: &[f64], vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let dot = |a: &[f64], b: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += g[i * n + j] * a[i] * b[j];
            }
        }
        s
    };
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        // two passes for stability
        for _ in 0..2 {
            for e in &out {
                let c = dot(&w, e);
                for i in 0..n {
                    w[i] -= c * e[i];
                }
            }
        }
        let norm = dot(&w, &w).sqrt();
        out.push(w.iter().map(|x| x / norm).collect());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::metric::{ConformalFlat, ExprMetric};

    fn metric(dim: usize, diag: &[&str]) -> ExprMetric {
        let mut comps = vec![Expr::Const(0.0); dim * dim];
        for (i, d) in diag.iter().enumerate() {
            comps[i * dim + i] = Expr::parse(d).unwrap();
        }
        ExprMetric::new(dim, comps).unwrap()
    }

    #[test]
    fn float_fast_path_matches_jet_pipeline() {
        let g = ConformalFlat::new(4, Expr::parse("0.3*sin(t + 2*x2) + 0.1*cos(x1)*x3").unwrap()).unwrap();
        let p = [0.2, -0.5, 0.9, 0.4];
        let slow = CurvaturePoint::at(&g, &p, 2).unwrap().values();
        let fast = CurvaturePoint::values_at(&g, &p).unwrap();
        for (a, b) in slow.riemann4.iter().zip(&fast.riemann4) {
            assert!((a - b).abs() < 1e-14);
        }
        for (a, b) in slow.weyl4.iter().zip(&fast.weyl4) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!((slow.scal - fast.scal).abs() < 1e-13);
    }

    #[test]
    fn euclidean_is_flat() {
        let g = metric(4, &["1", "1", "1", "1"]);
        let c = CurvaturePoint::at(&g, &[0.1, 0.2, 0.3, 0.4], 3).unwrap().values();
        assert!(c.gamma.iter().all(|&x| x == 0.0));
        assert!(c.riemann4.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn polar_plane() {
        // coordinates (r, θ): g = dr² + r² dθ²
        let g = metric(2, &["1", "t^2"]);
        let c = CurvaturePoint::at(&g, &[1.5, 0.3], 2).unwrap().values();
        let n = 2;
        assert!((c.gamma[idx3(n, 0, 1, 1)] + 1.5).abs() < 1e-14);
        assert!((c.gamma[idx3(n, 1, 0, 1)] - 1.0 / 1.5).abs() < 1e-14);
        assert!(c.riemann4.iter().all(|x| x.abs() < 1e-13));
    }

    #[test]
    fn hyperbolic_space() {
        let g = metric(4, &["1", "exp(2*t)", "exp(2*t)", "exp(2*t)"]);
        let c = CurvaturePoint::at(&g, &[0.3, 0.1, -0.4, 0.8], 3).unwrap().values();
        assert!((c.scal + 12.0).abs() < 1e-12);
        for e in 0..16 {
            assert!((c.ricci[e] + 3.0 * c.g[e]).abs() < 1e-12);
            assert!((c.schouten[e] + 0.5 * c.g[e]).abs() < 1e-12);
        }
        let e0 = [1.0, 0.0, 0.0, 0.0];
        let e2 = [0.0, 0.0, 1.0, 0.0];
        assert!((c.sectional(&e0, &e2) + 1.0).abs() < 1e-12);
        assert!(c.weyl_norm() < 1e-12);
        assert!(c.symmetry_residual() < 1e-12);
    }

    #[test]
    fn conformal_christoffel_closed_form() {
        let f = Expr::parse("sin(t)*x1 + x2^2").unwrap();
        let g = ConformalFlat::new(3, f.clone()).unwrap();
        let p = [0.4, -0.7, 0.25];
        let c = CurvaturePoint::at(&g, &p, 2).unwrap().values();
        let fj = g.factor_jet(&p, 1).unwrap();
        let df: Vec<f64> = (0..3).map(|i| fj.partial(i).unwrap().constant_term()).collect();
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let want = d(k, i) * df[j] + d(k, j) * df[i] - d(i, j) * df[k];
                    assert!((c.gamma[idx3(3, k, i, j)] - want).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn end_and_tensor_agree() {
        let g = metric(3, &["1 + t^2", "exp(x1)", "2 + sin(x2)*t"]);
        let c = CurvaturePoint::at(&g, &[0.2, 0.5, 0.9], 3).unwrap().values();
        let lowered = lower_end(3, &c.riemann_end(), &c.g);
        for (a, b) in lowered.iter().zip(&c.riemann4) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn kn_of_identities() {
        let id: Vec<f64> = (0..16).map(|e| if e / 4 == e % 4 { 1.0 } else { 0.0 }).collect();
        let kn = kulkarni_nomizu(4, &id, &id);
        // (U, V, V, U) with U = e0, V = e1
        assert_eq!(kn[idx4(4, 0, 1, 1, 0)], 2.0);
        assert_eq!(kn[idx4(4, 0, 1, 2, 3)], 0.0);
    }

    #[test]
    fn schouten_needs_three_dims() {
        assert_eq!(
            schouten(2, &[1.0; 4], &[0.0; 4], &0.0).unwrap_err(),
            CurvatureError::DimTooSmall(2)
        );
    }
}

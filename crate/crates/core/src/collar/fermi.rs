use std::sync::Arc;

use serde::Serialize;

use super::{CollarError, CollarFamily};
use crate::curvature::{christoffel, idx3};
use crate::jet::Jet;
use crate::linalg::invert;
use crate::metric::{metric_jets, MetricSource};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FermiOptions {
    /// RK4 steps over `[0, t]` before refinement.
    pub steps: usize,
    /// Required agreement between `steps` and `2 steps`.
    pub richardson_tol: f64,
    /// Largest accepted deviation from `g(∂_t, ∂_t) = 1`, `g(∂_t, ∂_i) = 0`.
    pub gauge_tol: f64,
    /// Number of step doublings attempted before giving up.
    pub max_refinements: usize,
}

impl Default for FermiOptions {
    fn default() -> Self {
        FermiOptions {
            steps: 64,
            richardson_tol: 1e-8,
            gauge_tol: 1e-7,
            max_refinements: 3,
        }
    }
}

/// Diagnostics of one collar evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FermiReport {
    pub steps: usize,
    pub richardson_delta: f64,
    pub gauge_residual: f64,
}

/// Geodesic normal collar of the level set `{y_0 = level}` of a metric,
/// obtained by integrating unit-speed normal geodesics. All `x`-derivatives
/// of the flow are carried as jets through the integrator, so the variational
/// equations are solved alongside the geodesics.
pub struct FermiCollar {
    metric: Arc<dyn MetricSource>,
    level: f64,
    depth: f64,
    options: FermiOptions,
}

type State = (Vec<Jet>, Vec<Jet>);

impl FermiCollar {
    pub fn new(metric: Arc<dyn MetricSource>, level: f64, depth: f64, options: FermiOptions) -> Self {
        FermiCollar {
            metric,
            level,
            depth,
            options,
        }
    }

    fn dim_(&self) -> usize {
        self.metric.dim()
    }

    /// Metric components at the jet position `y`, by Taylor substitution.
    fn metric_at(&self, y: &[Jet], order: usize) -> Result<Vec<Jet>, CollarError> {
        let base: Vec<f64> = y.iter().map(|c| c.constant_term()).collect();
        let g = metric_jets(&*self.metric, &base, order)?;
        let shifts: Vec<Jet> = y.iter().zip(&base).map(|(c, b)| c.clone() - *b).collect();
        Ok(g.iter().map(|c| c.compose_vars(&shifts)).collect())
    }

    /// Geodesic acceleration `−Γ(y)(v, v)`.
    fn acceleration(&self, y: &[Jet], v: &[Jet]) -> Result<Vec<Jet>, CollarError> {
        let n = self.dim_();
        let order = y[0].order();
        let base: Vec<f64> = y.iter().map(|c| c.constant_term()).collect();
        let g = metric_jets(&*self.metric, &base, order + 1)?;
        let (_, gamma) = christoffel(n, &g)?;
        let shifts: Vec<Jet> = y.iter().zip(&base).map(|(c, b)| c.clone() - *b).collect();
        let layout = y[0].layout().clone();
        let mut vv = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                vv.push(&v[i] * &v[j]);
            }
        }
        let mut acc = vec![Jet::zero_in(&layout); n];
        for (k, a) in acc.iter_mut().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    let c = &gamma[idx3(n, k, i, j)];
                    if c.max_abs_coeff() == 0.0 {
                        continue;
                    }
                    let gk = c.compose_vars(&shifts);
                    a.add_product_neg(&gk, &vv[i * n + j]);
                }
            }
        }
        Ok(acc)
    }

    /// Start of the normal geodesic through `(level, x)`, jets of the given
    /// order in all `n` variables (constant in `t`).
    fn initial(&self, x: &[f64], order: usize) -> Result<State, CollarError> {
        let n = self.dim_();
        let mut base = x.to_vec();
        base[0] = self.level;
        let mut y = Jet::coordinates(&base, order);
        y[0] = Jet::constant_in(y[0].layout(), self.level);
        let g: Vec<Jet> = metric_jets(&*self.metric, &base, order)?
            .iter()
            .map(|c| c.freeze_var(0))
            .collect();
        let ginv = invert(n, &g).ok_or(CollarError::Degenerate { t: 0.0 })?;
        let inv_norm = ginv[0].sqrt()?.recip()?;
        let v: Vec<Jet> = (0..n).map(|a| &ginv[a * n] * &inv_norm).collect();
        Ok((y, v))
    }

    fn rk4(&self, start: &State, t: f64, steps: usize) -> Result<State, CollarError> {
        let (mut y, mut v) = start.clone();
        if t == 0.0 {
            return Ok((y, v));
        }
        let h = t / steps as f64;
        let axpy = |a: &[Jet], k: f64, b: &[Jet]| -> Vec<Jet> {
            a.iter().zip(b).map(|(p, q)| p + &q.scale(k)).collect()
        };
        for _ in 0..steps {
            let k1y = v.clone();
            let k1v = self.acceleration(&y, &v)?;
            let y2 = axpy(&y, h / 2.0, &k1y);
            let v2 = axpy(&v, h / 2.0, &k1v);
            let k2v = self.acceleration(&y2, &v2)?;
            let k2y = v2;
            let y3 = axpy(&y, h / 2.0, &k2y);
            let v3 = axpy(&v, h / 2.0, &k2v);
            let k3v = self.acceleration(&y3, &v3)?;
            let k3y = v3;
            let y4 = axpy(&y, h, &k3y);
            let v4 = axpy(&v, h, &k3v);
            let k4v = self.acceleration(&y4, &v4)?;
            let k4y = v4;
            for i in 0..y.len() {
                let dy = &(&k1y[i] + &k2y[i].scale(2.0)) + &(&k3y[i].scale(2.0) + &k4y[i]);
                y[i] = &y[i] + &dy.scale(h / 6.0);
                let dv = &(&k1v[i] + &k2v[i].scale(2.0)) + &(&k3v[i].scale(2.0) + &k4v[i]);
                v[i] = &v[i] + &dv.scale(h / 6.0);
            }
        }
        Ok((y, v))
    }

    /// Adds the `t`-dependence around the current time by Picard iteration
    /// of the geodesic equation in the `t` jet variable.
    fn expand_in_t(&self, state: &State) -> Result<State, CollarError> {
        let (y0, v0) = state;
        let order = y0[0].order();
        let mut y = y0.clone();
        let mut v = v0.clone();
        for _ in 0..=order {
            let acc = self.acceleration(&y, &v)?;
            let ny: Vec<Jet> = y0.iter().zip(&v).map(|(a, b)| a + &b.integrate(0)).collect();
            let nv: Vec<Jet> = v0.iter().zip(&acc).map(|(a, b)| a + &b.integrate(0)).collect();
            y = ny;
            v = nv;
        }
        Ok((y, v))
    }

    fn induced(&self, state: &State, order: usize) -> Result<(Vec<Jet>, f64), CollarError> {
        let n = self.dim_();
        let m = n - 1;
        let (y, v) = state;
        let g = self.metric_at(y, order)?;
        let mut dy: Vec<Vec<Jet>> = Vec::with_capacity(n);
        for i in 0..n {
            dy.push(y.iter().map(|c| c.partial(i)).collect::<Result<_, _>>()?);
        }
        let g_lo: Vec<Jet> = g.iter().map(|c| c.truncate(order - 1)).collect();
        let pair = |a: &[Jet], b: &[Jet]| -> Jet {
            let mut s = Jet::zero_in(a[0].layout());
            for p in 0..n {
                for q in 0..n {
                    s.add_product_of3(&g_lo[p * n + q], &a[p], &b[q]);
                }
            }
            s
        };
        let mut h: Vec<Jet> = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                if j < i {
                    h.push(h[j * m + i].clone());
                } else {
                    h.push(pair(&dy[i + 1], &dy[j + 1]));
                }
            }
        }
        // gauge: ∂_t y should stay unit and normal to the x-directions
        let vals: Vec<f64> = g.iter().map(|c| c.constant_term()).collect();
        let vv: Vec<f64> = v.iter().map(|c| c.constant_term()).collect();
        let mut gauge: f64 = 0.0;
        for i in 0..n {
            let col: Vec<f64> = if i == 0 {
                vv.clone()
            } else {
                dy[i].iter().map(|c| c.constant_term()).collect()
            };
            let mut s = 0.0;
            for p in 0..n {
                for q in 0..n {
                    s += vals[p * n + q] * vv[p] * col[q];
                }
            }
            let target = if i == 0 { 1.0 } else { 0.0 };
            gauge = gauge.max((s - target).abs());
        }
        Ok((h, gauge))
    }

    fn evaluate(&self, point: &[f64], order: usize, steps: usize) -> Result<(Vec<Jet>, f64), CollarError> {
        let state0 = self.initial(point, order + 1)?;
        let state = self.rk4(&state0, point[0], steps)?;
        let state = self.expand_in_t(&state)?;
        self.induced(&state, order + 1)
    }

    /// `h` jets together with integration diagnostics.
    pub fn h_jets_with_report(
        &self,
        point: &[f64],
        order: usize,
    ) -> Result<(Vec<Jet>, FermiReport), CollarError> {
        let opts = self.options;
        let mut steps = opts.steps.max(1);
        if point[0] == 0.0 {
            let (h, gauge) = self.evaluate(point, order, steps)?;
            return Ok((
                h,
                FermiReport {
                    steps: 0,
                    richardson_delta: 0.0,
                    gauge_residual: gauge,
                },
            ));
        }
        let (mut coarse, _) = self.evaluate(point, order, steps)?;
        for _ in 0..=opts.max_refinements {
            let (fine, gauge) = self.evaluate(point, order, 2 * steps)?;
            let delta = coarse
                .iter()
                .zip(&fine)
                .map(|(a, b)| (a.clone() - b.clone()).max_abs_coeff())
                .fold(0.0, f64::max);
            if delta < opts.richardson_tol && gauge < opts.gauge_tol {
                return Ok((
                    fine,
                    FermiReport {
                        steps: 2 * steps,
                        richardson_delta: delta,
                        gauge_residual: gauge,
                    },
                ));
            }
            coarse = fine;
            steps *= 2;
        }
        Err(CollarError::Integration(format!(
            "no convergence at {point:?} after {} steps",
            steps
        )))
    }
}

impl CollarFamily for FermiCollar {
    fn dim(&self) -> usize {
        self.dim_()
    }

    fn depth(&self) -> f64 {
        self.depth
    }

    fn h_jets(&self, point: &[f64], order: usize) -> Result<Vec<Jet>, CollarError> {
        Ok(self.h_jets_with_report(point, order)?.0)
    }
}

trait JetAccumulate {
    fn add_product_neg(&mut self, a: &Jet, b: &Jet);
    fn add_product_of3(&mut self, a: &Jet, b: &Jet, c: &Jet);
}

impl JetAccumulate for Jet {
    fn add_product_neg(&mut self, a: &Jet, b: &Jet) {
        let p = a * b;
        *self = &*self - &p;
    }

    fn add_product_of3(&mut self, a: &Jet, b: &Jet, c: &Jet) {
        let p = &(a * b) * c;
        *self = &*self + &p;
    }
}

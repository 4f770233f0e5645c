use std::sync::Arc;

use nalgebra::DMatrix;

use super::{CollarError, CollarFamily, CollarMetric};
use crate::curvature::{christoffel, connection_form, idx3, CurvaturePoint};
use crate::form::{EndForm, SPoly};
use crate::jet::Jet;
use crate::linalg::generalized_symmetric_eigen;
use crate::metric::{metric_jets, MetricSource};

/// Weingarten operator `W = h⁻¹ II` and second fundamental form
/// `II = −½ ∂_t h` at a point of `{t = t0}`, in tangential coordinates.
pub fn weingarten(
    family: &dyn CollarFamily,
    point: &[f64],
) -> Result<(DMatrix<f64>, DMatrix<f64>), CollarError> {
    let (h, ii) = h_and_ii(family, point)?;
    let hinv = h
        .clone()
        .try_inverse()
        .ok_or(CollarError::Degenerate { t: point[0] })?;
    Ok((hinv * &ii, ii))
}

fn h_and_ii(family: &dyn CollarFamily, point: &[f64]) -> Result<(DMatrix<f64>, DMatrix<f64>), CollarError> {
    let m = family.dim() - 1;
    let hj = family.h_jets(point, 1)?;
    let h = DMatrix::from_fn(m, m, |r, c| hj[r * m + c].constant_term());
    let mut ii = DMatrix::zeros(m, m);
    for r in 0..m {
        for c in 0..m {
            ii[(r, c)] = -0.5 * hj[r * m + c].partial(0)?.constant_term();
        }
    }
    let ii = (&ii + ii.transpose()) * 0.5;
    Ok((h, ii))
}

/// `h`-orthonormal eigenframe of the Weingarten operator at a boundary
/// point. `frame` has the coordinates of `∂_t, S_1, .., S_{n−1}` as columns.
#[derive(Debug, Clone)]
pub struct BoundaryFrame {
    pub point: Vec<f64>,
    pub h: DMatrix<f64>,
    pub ii: DMatrix<f64>,
    pub w: DMatrix<f64>,
    pub lambda: Vec<f64>,
    pub frame: Vec<Vec<f64>>,
    pub frame_inv: Vec<Vec<f64>>,
}

impl BoundaryFrame {
    pub fn new(family: &dyn CollarFamily, point: &[f64]) -> Result<Self, CollarError> {
        let n = family.dim();
        let m = n - 1;
        let (h, ii) = h_and_ii(family, point)?;
        let (lambda, v) =
            generalized_symmetric_eigen(&ii, &h).ok_or(CollarError::Degenerate { t: point[0] })?;
        let hinv = h
            .clone()
            .try_inverse()
            .ok_or(CollarError::Degenerate { t: point[0] })?;
        let w = &hinv * &ii;
        // Vᵀ h V = I, so V⁻¹ = Vᵀ h
        let vinv = v.transpose() * &h;
        let mut frame = vec![vec![0.0; n]; n];
        let mut frame_inv = vec![vec![0.0; n]; n];
        frame[0][0] = 1.0;
        frame_inv[0][0] = 1.0;
        for r in 0..m {
            for c in 0..m {
                frame[r + 1][c + 1] = v[(r, c)];
                frame_inv[r + 1][c + 1] = vinv[(r, c)];
            }
        }
        Ok(BoundaryFrame {
            point: point.to_vec(),
            h,
            ii,
            w,
            lambda,
            frame,
            frame_inv,
        })
    }

    /// Base-point values of an endomorphism-valued form, in this frame.
    pub fn express(&self, a: &EndForm<Jet>) -> EndForm<f64> {
        a.values().in_frame(&self.frame, &self.frame_inv)
    }

    /// Orthonormality and eigen-equation residuals.
    pub fn residuals(&self) -> (f64, f64) {
        let m = self.lambda.len();
        let v = DMatrix::from_fn(m, m, |r, c| self.frame[r + 1][c + 1]);
        let ortho = (v.transpose() * &self.h * &v - DMatrix::identity(m, m)).abs().max();
        let mut eig: f64 = 0.0;
        for j in 0..m {
            let col = v.column(j);
            let r = &self.w * col - col * self.lambda[j];
            eig = eig.max(r.abs().max());
        }
        (ortho, eig)
    }
}

/// Everything the collar identities need at one point: curvature of `g`
/// and `g₀`, `θ`, `d^∇⁰θ` and `θ²`.
///
/// With a metric jet order `r`, `θ` has order `r − 1` and the curvature
/// terms order `r − 2`.
pub struct CollarPoint {
    pub dim: usize,
    pub point: Vec<f64>,
    pub curv1: CurvaturePoint<Jet>,
    pub curv0: CurvaturePoint<Jet>,
    pub theta: EndForm<Jet>,
    pub d_theta: EndForm<Jet>,
    pub theta_sq: EndForm<Jet>,
    pub r0: EndForm<Jet>,
    pub r1: EndForm<Jet>,
    /// Connection 1-form of `g₀` (order `r − 1`).
    pub omega0: EndForm<Jet>,
}

impl CollarPoint {
    pub fn new(
        g: &dyn MetricSource,
        g0: &dyn MetricSource,
        point: &[f64],
        order: usize,
    ) -> Result<Self, CollarError> {
        let n = g.dim();
        if order < 2 {
            return Err(CollarError::Invalid(format!(
                "collar identities need metric jets of order >= 2, got {order}"
            )));
        }
        let j1 = metric_jets(g, point, order)?;
        let j0 = metric_jets(g0, point, order)?;
        let (ginv1, gamma1) = christoffel(n, &j1)?;
        let (ginv0, gamma0) = christoffel(n, &j0)?;
        let theta = theta_form(n, &gamma1, &gamma0);
        let omega0 = connection_form(n, &gamma0);
        let d_theta = d_nabla_theta(&theta, &omega0)?;
        let lo = order - 2;
        let theta_sq = theta.mul(&theta).truncate(lo);
        let curv1 = CurvaturePoint::from_christoffel(n, &j1, &ginv1, &gamma1)?;
        let curv0 = CurvaturePoint::from_christoffel(n, &j0, &ginv0, &gamma0)?;
        let r0 = curv0.riemann_end();
        let r1 = curv1.riemann_end();
        Ok(CollarPoint {
            dim: n,
            point: point.to_vec(),
            curv1,
            curv0,
            theta,
            d_theta,
            theta_sq,
            r0,
            r1,
            omega0,
        })
    }

    /// Convenience constructor from a family and its product reference.
    pub fn from_family(
        family: Arc<dyn CollarFamily>,
        reference: Arc<dyn CollarFamily>,
        point: &[f64],
        order: usize,
    ) -> Result<Self, CollarError> {
        Self::new(
            &CollarMetric::new(family),
            &CollarMetric::new(reference),
            point,
            order,
        )
    }

    /// `R^s = R⁰ + s d^∇⁰θ + s² θ²`.
    pub fn curvature_family(&self) -> SPoly<EndForm<Jet>> {
        SPoly::new(vec![self.r0.clone(), self.d_theta.clone(), self.theta_sq.clone()])
    }

    /// `θ` truncated to the order of the curvature terms.
    pub fn theta_low(&self) -> EndForm<Jet> {
        let lo = self.r0.ctx().order();
        self.theta.truncate(lo)
    }
}

/// `θ(e_a) = Γ¹_a − Γ⁰_a` as a 1-form valued endomorphism.
pub fn theta_form(n: usize, gamma1: &[Jet], gamma0: &[Jet]) -> EndForm<Jet> {
    let diff: Vec<Jet> = gamma1.iter().zip(gamma0).map(|(a, b)| a - b).collect();
    let mut e = EndForm::zero(n, diff[0].layout());
    for a in 0..n {
        for k in 0..n {
            for j in 0..n {
                e.set(1 << a, k, j, diff[idx3(n, k, a, j)].clone());
            }
        }
    }
    e
}

/// Exterior covariant derivative of an endomorphism-valued 1-form:
/// `d^∇A = dA + ω∧A + A∧ω`.
pub fn d_nabla_theta(a: &EndForm<Jet>, omega: &EndForm<Jet>) -> Result<EndForm<Jet>, CollarError> {
    let da = a.d()?;
    let lo = da.ctx().order();
    let a_lo = a.truncate(lo);
    let w_lo = omega.truncate(lo);
    let mut out = da;
    out.add_assign(1.0, &w_lo.mul(&a_lo));
    out.add_assign(1.0, &a_lo.mul(&w_lo));
    Ok(out)
}

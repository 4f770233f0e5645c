//! Characteristic forms, transgression forms and the checks built on them.
//!
//! For `∇^s = ∇⁰ + sθ` with curvature `R^s` and a polynomial `Q`,
//! `tr Q(R¹) − tr Q(R⁰) = d ∫₀¹ tr(θ Q′(R^s)) ds` and
//! `e^{tr Q(R¹)} − e^{tr Q(R⁰)} = d ∫₀¹ tr(θ Q′(R^s)) e^{tr Q(R^s)} ds`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::collar::{CollarError, CollarFamily, CollarMetric, CollarPoint, ProductReference};
use crate::curvature::{CurvatureError, CurvaturePoint};
use crate::form::{poly_apply, series_apply, series_apply_poly, Algebra, EndForm, Form, FormError, SPoly};
use crate::jet::Jet;
use crate::metric::MetricSource;
use crate::quadrature::{neumaier_sum, periodic_trapezoid, GaussLegendre};
use crate::scalar::Scalar;
use crate::series::CharSeries;

/// Largest Weyl component accepted at a boundary point as "Weyl-flat".
pub const WEYL_HYPOTHESIS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransgressionError {
    #[error(transparent)]
    Collar(#[from] CollarError),
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error("hypothesis violated: Weyl tensor {weyl:.3e} exceeds {tol:.0e} at {point:?}")]
    HypothesisViolated { point: Vec<f64>, weyl: f64, tol: f64 },
    #[error("metric jets of order {have} are too short; this check needs {need}")]
    InsufficientOrder { need: usize, have: usize },
    #[error("{nodes} Gauss nodes cannot integrate an s-polynomial of degree {degree} exactly")]
    TooFewNodes { nodes: usize, degree: usize },
    #[error("t-quadrature did not converge: doubling the nodes moved the result by {delta:.3e}")]
    NotConverged { delta: f64 },
    #[error("{0}")]
    Invalid(String),
}

/// `Σ_k a^k / k!` for an s-polynomial of forms without degree-0 part.
pub fn exp_poly<S: Scalar>(a: &SPoly<Form<S>>) -> SPoly<Form<S>> {
    let proto = &a.coeffs()[0];
    let n = proto.dim();
    let mut coeffs = vec![1.0];
    for k in 1..=n / 2 {
        coeffs.push(coeffs[k - 1] / k as f64);
    }
    let one = SPoly::constant(Form::one(n, proto.ctx()));
    poly_apply(&coeffs, a, &one)
}

pub fn trace_poly<S: Scalar>(a: &SPoly<EndForm<S>>) -> SPoly<Form<S>> {
    a.map(|c| c.trace())
}

/// `exp(tr Q(R))`.
pub fn char_form<S: Scalar>(q: &CharSeries, r: &EndForm<S>) -> Result<Form<S>, FormError> {
    char_form_with(&q.q_coeffs(), r)
}

pub fn char_form_with<S: Scalar>(q: &[f64], r: &EndForm<S>) -> Result<Form<S>, FormError> {
    series_apply(q, r)?.trace().exp_even()
}

/// `tr(θ Q′(R^s))` as a polynomial in `s`, for `Q′` given by its coefficients.
pub fn plain_integrand<S: Scalar>(
    q_prime: &[f64],
    theta: &EndForm<S>,
    rs: &SPoly<EndForm<S>>,
) -> Result<SPoly<Form<S>>, FormError> {
    if let Some(&p) = theta.degrees_present().iter().find(|&&p| p != 1) {
        return Err(FormError::WrongDegree { expected: 1, found: p });
    }
    let qp = series_apply_poly(q_prime, rs)?;
    Ok(trace_poly(&SPoly::constant(theta.clone()).mul(&qp)))
}

/// `tr(θ Q′(R^s)) e^{tr Q(R^s)}` as a polynomial in `s`.
pub fn transgression_integrand_with<S: Scalar>(
    q: &[f64],
    q_prime: &[f64],
    theta: &EndForm<S>,
    rs: &SPoly<EndForm<S>>,
) -> Result<SPoly<Form<S>>, FormError> {
    let plain = plain_integrand(q_prime, theta, rs)?;
    let e = exp_poly(&trace_poly(&series_apply_poly(q, rs)?));
    Ok(plain.mul(&e))
}

pub fn transgression_integrand<S: Scalar>(
    q: &CharSeries,
    theta: &EndForm<S>,
    rs: &SPoly<EndForm<S>>,
) -> Result<SPoly<Form<S>>, FormError> {
    transgression_integrand_with(&q.q_coeffs(), &q.q_prime_coeffs(), theta, rs)
}

/// Gauss–Legendre integral over `s ∈ [0, 1]`; refuses rules that are not
/// exact for the polynomial at hand.
pub fn s_integrate<T: Algebra>(p: &SPoly<T>, nodes: usize) -> Result<T, TransgressionError> {
    let degree = p.degree();
    if nodes == 0 || 2 * nodes < degree + 1 {
        return Err(TransgressionError::TooFewNodes { nodes, degree });
    }
    let rule = GaussLegendre::new(nodes, 0.0, 1.0);
    let mut acc = p.coeffs()[0].zero_like();
    for (s, w) in rule.nodes.iter().zip(&rule.weights) {
        acc = acc.add(&p.eval(*s).scale(*w));
    }
    Ok(acc)
}

/// Default number of `s` nodes for dimension `n`: exact up to s-degree
/// `2n + 1`, comfortably above the s-degree `≤ n` of any integrand here.
pub fn default_s_nodes(n: usize) -> usize {
    n + 1
}

/// Residuals of the two transgression identities at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointwiseResidual {
    pub plain: f64,
    pub exponential: f64,
}

fn form_max(a: &Form<Jet>) -> f64 {
    a.coeffs().iter().fold(0.0, |m, c| m.max(c.max_abs_coeff()))
}

/// Both sides of both identities with jet-valued forms; `d` is taken through
/// jet partials. Needs metric jets of order at least 3.
pub fn pointwise_transgression_with(
    cp: &CollarPoint,
    q: &[f64],
    q_prime: &[f64],
    s_nodes: usize,
) -> Result<PointwiseResidual, TransgressionError> {
    let lo = cp.r0.ctx().order();
    if lo < 1 {
        return Err(TransgressionError::InsufficientOrder { need: 3, have: lo + 2 });
    }
    let rs = cp.curvature_family();
    let theta = cp.theta_low();

    let tq1 = series_apply(q, &cp.r1)?.trace();
    let tq0 = series_apply(q, &cp.r0)?.trace();
    let lhs_plain = tq1.try_sub(&tq0)?.truncate(lo - 1);
    let plain = s_integrate(&plain_integrand(q_prime, &theta, &rs)?, s_nodes)?;
    let rhs_plain = plain.d()?;

    let lhs_exp = tq1.exp_even()?.try_sub(&tq0.exp_even()?)?.truncate(lo - 1);
    let full = s_integrate(&transgression_integrand_with(q, q_prime, &theta, &rs)?, s_nodes)?;
    let rhs_exp = full.d()?;

    Ok(PointwiseResidual {
        plain: form_max(&lhs_plain.try_sub(&rhs_plain)?),
        exponential: form_max(&lhs_exp.try_sub(&rhs_exp)?),
    })
}

pub fn pointwise_transgression_check(
    cp: &CollarPoint,
    q: &CharSeries,
    s_nodes: usize,
) -> Result<PointwiseResidual, TransgressionError> {
    pointwise_transgression_with(cp, &q.q_coeffs(), &q.q_prime_coeffs(), s_nodes)
}

/// `d^{∇^s} R^s = dR^s + ω^s R^s − R^s ω^s` with `ω^s = ω⁰ + sθ`, over all
/// jet coefficients. Needs metric jets of order at least 3.
pub fn bianchi_residual(cp: &CollarPoint, s: f64) -> Result<f64, TransgressionError> {
    let lo = cp.r0.ctx().order();
    if lo < 1 {
        return Err(TransgressionError::InsufficientOrder { need: 3, have: lo + 2 });
    }
    let rs = cp.curvature_family().eval(s);
    let mut omega = cp.omega0.clone();
    omega.add_assign(s, &cp.theta);
    let w = omega.truncate(lo - 1);
    let r = rs.truncate(lo - 1);
    let mut b = rs.d()?;
    b.add_assign(1.0, &w.mul(&r));
    b.add_assign(-1.0, &r.mul(&w));
    Ok(b.max_abs())
}

/// Outcome of the boundary vanishing check at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryVanishing {
    /// Largest coefficient of `ι* tr(θ Q(R^s))`, of every monomial
    /// `ι* tr(θ (R^s)^l)` and of the full pulled-back integrand.
    pub residual: f64,
    /// Same, restricted to even `l`.
    pub even_monomials: f64,
    pub weyl: f64,
    pub worst_s: f64,
}

/// Largest Weyl component of `g` at the point.
pub fn weyl_max(curv: &CurvaturePoint<f64>) -> f64 {
    curv.weyl4.iter().fold(0.0, |m, w| m.max(w.abs()))
}

/// Vanishing of the pulled-back transgression integrand at a boundary
/// point, for every `s` sample. Refuses points where the Weyl tensor of `g`
/// does not vanish.
pub fn boundary_vanishing_check(
    cp: &CollarPoint,
    q: &CharSeries,
    s_values: &[f64],
) -> Result<BoundaryVanishing, TransgressionError> {
    let n = cp.dim;
    let weyl = weyl_max(&cp.curv1.values());
    if !(weyl <= WEYL_HYPOTHESIS_TOL) {
        return Err(TransgressionError::HypothesisViolated {
            point: cp.point.clone(),
            weyl,
            tol: WEYL_HYPOTHESIS_TOL,
        });
    }
    let th = cp.theta.values().pullback_boundary();
    let family = SPoly::new(vec![cp.r0.values(), cp.d_theta.values(), cp.theta_sq.values()]);
    let qc = q.q_coeffs();
    let qp = q.q_prime_coeffs();
    let mut out = BoundaryVanishing {
        residual: 0.0,
        even_monomials: 0.0,
        weyl,
        worst_s: f64::NAN,
    };
    for &s in s_values {
        let rs = family.eval(s).pullback_boundary();
        let mut worst = th.mul(&series_apply(&qc, &rs)?).trace().max_abs();
        let mut power = EndForm::identity(n, &());
        for l in 0..n / 2 {
            if l > 0 {
                power = power.mul(&rs);
            }
            let v = th.mul(&power).trace().max_abs();
            if l % 2 == 0 {
                out.even_monomials = out.even_monomials.max(v);
            }
            worst = worst.max(v);
        }
        let integrand = transgression_integrand_with(&qc, &qp, &th, &SPoly::constant(rs))?;
        worst = worst.max(integrand.coeffs()[0].max_abs());
        if worst > out.residual || out.worst_s.is_nan() {
            out.residual = out.residual.max(worst);
            out.worst_s = s;
        }
    }
    Ok(out)
}

/// Quadrature controls for the slab `[0, T] × T^{n−1}`, `x ∈ [0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlabGrid {
    pub x_points: usize,
    pub t_nodes: usize,
    pub s_nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StokesResult {
    pub bulk: f64,
    pub boundary: f64,
    pub residual: f64,
    /// `|bulk(2 t_nodes) − bulk(t_nodes)|`.
    pub t_doubling_delta: f64,
    pub boundary_t0: f64,
    pub boundary_t1: f64,
}

/// Points of the periodic x-grid, each prefixed by a placeholder `t`.
pub fn torus_grid(n: usize, x_points: usize) -> (Vec<Vec<f64>>, f64) {
    let (nodes, w) = periodic_trapezoid(x_points);
    let m = n - 1;
    let total = x_points.pow(m as u32);
    let mut pts = Vec::with_capacity(total);
    for idx in 0..total {
        let mut p = vec![0.0; n];
        let mut r = idx;
        for k in (1..n).rev() {
            p[k] = nodes[r % x_points];
            r /= x_points;
        }
        pts.push(p);
    }
    (pts, w.powi(m as i32))
}

fn top_mask(n: usize) -> u32 {
    (1u32 << n) - 1
}

/// Top-degree coefficient of `exp(tr Q(R))` for the metric at `point`.
pub fn char_density(g: &dyn MetricSource, q: &[f64], point: &[f64]) -> Result<f64, TransgressionError> {
    let curv = CurvaturePoint::values_at(g, point)?;
    let c = char_form_with(q, &curv.riemann_end())?;
    Ok(*c.get(top_mask(g.dim())))
}

/// `∫` over the slab of the top-degree part of `exp(tr Q(R))`, for each
/// t-rule, sharing the x-grid. Parallel over x, reduced in grid order.
pub fn slab_integrals(
    g: &dyn MetricSource,
    q: &[f64],
    x_points: usize,
    t_rules: &[GaussLegendre],
) -> Result<Vec<f64>, TransgressionError> {
    let n = g.dim();
    let (pts, wx) = torus_grid(n, x_points);
    let per_x: Vec<Result<Vec<f64>, TransgressionError>> = pts
        .par_iter()
        .map(|p| {
            let mut out = Vec::with_capacity(t_rules.len());
            for rule in t_rules {
                let mut vals = Vec::with_capacity(rule.len());
                for (t, w) in rule.nodes.iter().zip(&rule.weights) {
                    let mut pt = p.clone();
                    pt[0] = *t;
                    vals.push(w * char_density(g, q, &pt)?);
                }
                out.push(neumaier_sum(vals));
            }
            Ok(out)
        })
        .collect();
    let per_x: Vec<Vec<f64>> = per_x.into_iter().collect::<Result<_, _>>()?;
    Ok((0..t_rules.len())
        .map(|k| wx * neumaier_sum(per_x.iter().map(|v| v[k])))
        .collect())
}

/// The pulled-back, s-integrated transgression integrand at a point of
/// `{t = t0}`, degree `n − 1` coefficient.
pub fn boundary_density(
    g: &dyn MetricSource,
    g0: &dyn MetricSource,
    q: &CharSeries,
    point: &[f64],
    s_nodes: usize,
) -> Result<f64, TransgressionError> {
    let n = g.dim();
    let cp = CollarPoint::new(g, g0, point, 2)?;
    let th = cp.theta.values();
    let family = SPoly::new(vec![cp.r0.values(), cp.d_theta.values(), cp.theta_sq.values()]);
    let integrand = transgression_integrand(q, &th, &family)?;
    let pulled = integrand.map(|f| f.pullback_boundary());
    let v = s_integrate(&pulled, s_nodes)?;
    Ok(*v.get(top_mask(n) & !1))
}

/// Sub-panels per plateau transition in the t-rule.
pub const PLATEAU_SUBPANELS: usize = 2;

/// `∫_X e^{tr Q(R¹)} − e^{tr Q(R⁰)}` against the oriented boundary integral
/// `∫₀¹ ∫_∂X tr(θ Q′(R^s)) e^{tr Q(R^s)}` on a slab with a mirrored product
/// reference. `{t = 0}` carries sign −1 (inner normal `∂_t`), `{t = T}` +1.
///
/// The t-rule is composite Gauss–Legendre with `t_nodes` points per panel,
/// panels breaking at the plateau transitions where `g₀` is only smooth.
pub fn stokes_verify(
    family: Arc<dyn CollarFamily>,
    reference: Arc<ProductReference>,
    q: &CharSeries,
    grid: SlabGrid,
) -> Result<StokesResult, TransgressionError> {
    let n = family.dim();
    if n != q.dim() {
        return Err(TransgressionError::Invalid(format!(
            "series built for dimension {}, metric has dimension {n}",
            q.dim()
        )));
    }
    if !reference.is_mirrored() {
        return Err(TransgressionError::Invalid(
            "a slab needs a product reference at both ends".into(),
        ));
    }
    let depth = family.depth();
    let breaks = reference.t_breakpoints(PLATEAU_SUBPANELS);
    let g = CollarMetric::new(family);
    let g0 = CollarMetric::new(reference);
    let qc = q.q_coeffs();
    let rules = [
        GaussLegendre::composite(grid.t_nodes, &breaks),
        GaussLegendre::composite(2 * grid.t_nodes, &breaks),
    ];
    let b1 = slab_integrals(&g, &qc, grid.x_points, &rules)?;
    let b0 = slab_integrals(&g0, &qc, grid.x_points, &rules)?;
    let bulk = b1[0] - b0[0];
    let bulk_fine = b1[1] - b0[1];

    let (pts, wx) = torus_grid(n, grid.x_points);
    let ends: Vec<Result<(f64, f64), TransgressionError>> = pts
        .par_iter()
        .map(|p| {
            let mut lo = p.clone();
            lo[0] = 0.0;
            let mut hi = p.clone();
            hi[0] = depth;
            Ok((
                boundary_density(&g, &g0, q, &lo, grid.s_nodes)?,
                boundary_density(&g, &g0, q, &hi, grid.s_nodes)?,
            ))
        })
        .collect();
    let ends: Vec<(f64, f64)> = ends.into_iter().collect::<Result<_, _>>()?;
    let boundary_t0 = wx * neumaier_sum(ends.iter().map(|e| e.0));
    let boundary_t1 = wx * neumaier_sum(ends.iter().map(|e| e.1));
    let boundary = boundary_t1 - boundary_t0;
    Ok(StokesResult {
        bulk,
        boundary,
        residual: (bulk - boundary).abs(),
        t_doubling_delta: (bulk_fine - bulk).abs(),
        boundary_t0,
        boundary_t1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collar::{ExprCollar, FlatAmbientCollar};
    use crate::expr::Expr;
    use crate::form::mask_of;
    use crate::series::CharKind;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_end2(n: usize, rng: &mut impl Rng) -> EndForm<f64> {
        let mut e = EndForm::zero(n, &());
        for i in 0..n {
            for j in (i + 1)..n {
                for r in 0..n {
                    for c in 0..n {
                        e.set(mask_of(&[i, j]), r, c, rng.gen_range(-1.0..1.0));
                    }
                }
            }
        }
        e
    }

    #[test]
    fn char_form_degree_four_is_trace_of_square() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let r = random_end2(4, &mut rng);
        let q = CharSeries::build(CharKind::Signature, 4).unwrap();
        let c = char_form(&q, &r).unwrap();
        let want = r.mul(&r).trace().scale(-1.0 / (24.0 * std::f64::consts::PI.powi(2)));
        assert_eq!(*c.get(0), 1.0);
        assert!((c.get(0b1111) - want.get(0b1111)).abs() < 1e-14);
    }

    #[test]
    fn flat_curvature_gives_unit_char_form() {
        let q = CharSeries::build(CharKind::Dirac, 8).unwrap();
        let c = char_form(&q, &EndForm::<f64>::zero(8, &())).unwrap();
        assert_eq!(c.coeffs(), Form::<f64>::one(8, &()).coeffs());
    }

    #[test]
    fn s_integration_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let coeffs: Vec<Form<f64>> = (0..7)
            .map(|_| {
                let mut f = Form::zero(3, &());
                f.set(0b011, rng.gen_range(-1.0..1.0));
                f
            })
            .collect();
        let p = SPoly::new(coeffs);
        let got = s_integrate(&p, 4).unwrap();
        let want = p.integrate_unit();
        assert!((got.get(0b011) - want.get(0b011)).abs() < 1e-13);
        assert!(matches!(s_integrate(&p, 3), Err(TransgressionError::TooFewNodes { .. })));
    }

    #[test]
    fn quadratic_plain_integrand_is_twice_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut th = EndForm::zero(4, &());
        for a in 0..4 {
            for r in 0..4 {
                for c in 0..4 {
                    th.set(1 << a, r, c, rng.gen_range(-1.0..1.0));
                }
            }
        }
        let rs = SPoly::new(vec![random_end2(4, &mut rng), random_end2(4, &mut rng)]);
        let p = plain_integrand(&[0.0, 2.0], &th, &rs).unwrap();
        for s in [0.0, 0.3, 1.0] {
            let want = th.mul(&rs.eval(s)).trace().scale(2.0);
            let got = p.eval(s);
            for m in 0..16u32 {
                assert!((got.get(m) - want.get(m)).abs() < 1e-13);
            }
        }
    }

    fn slab() -> Arc<dyn CollarFamily> {
        let h = [
            "1 + 0.1*t*cos(x1) + 0.05*t^2*sin(x2)",
            "0.03*t*sin(x3)",
            "0.02*cos(x1 + x2)*t",
            "1 + 0.08*sin(x3)*t",
            "0",
            "exp(0.1*t*cos(x2))",
        ];
        let e = |s: &str| Expr::parse(s).unwrap();
        let comps = vec![
            e(h[0]), e(h[1]), e(h[2]),
            Expr::Const(0.0), e(h[3]), e(h[4]),
            Expr::Const(0.0), Expr::Const(0.0), e(h[5]),
        ];
        Arc::new(ExprCollar::new(4, 1.0, comps).unwrap())
    }

    #[test]
    fn transgression_and_bianchi_hold_pointwise() {
        let c = slab();
        let r: Arc<dyn CollarFamily> = Arc::new(ProductReference::with_defaults(c.clone(), true).unwrap());
        let q = CharSeries::build(CharKind::Signature, 4).unwrap();
        for t in [0.1, 0.3, 0.45] {
            let cp = CollarPoint::from_family(c.clone(), r.clone(), &[t, 0.3, 1.2, -0.4], 3).unwrap();
            let res = pointwise_transgression_check(&cp, &q, 5).unwrap();
            assert!(res.plain < 1e-12 && res.exponential < 1e-12, "{res:?}");
            let quad = pointwise_transgression_with(&cp, &[0.0, 0.0, 1.0], &[0.0, 2.0], 5).unwrap();
            assert!(quad.plain < 1e-10, "{quad:?}");
            for s in [0.0, 0.5, 1.0] {
                assert!(bianchi_residual(&cp, s).unwrap() < 1e-10);
            }
        }
    }

    #[test]
    fn pointwise_check_needs_third_order_jets() {
        let c = slab();
        let r: Arc<dyn CollarFamily> = Arc::new(ProductReference::with_defaults(c.clone(), true).unwrap());
        let q = CharSeries::build(CharKind::Signature, 4).unwrap();
        let cp = CollarPoint::from_family(c, r, &[0.2, 0.0, 0.0, 0.0], 2).unwrap();
        assert!(matches!(
            pointwise_transgression_check(&cp, &q, 5),
            Err(TransgressionError::InsufficientOrder { need: 3, .. })
        ));
    }

    #[test]
    fn ellipsoid_boundary_integrand_vanishes() {
        let e: Arc<dyn CollarFamily> =
            Arc::new(FlatAmbientCollar::ellipsoid(&[1.0, 1.3, 1.7, 1.0], 0.3).unwrap());
        let r: Arc<dyn CollarFamily> = Arc::new(ProductReference::with_defaults(e.clone(), false).unwrap());
        let cp = CollarPoint::from_family(e, r, &[0.0, 0.8, 1.1, 2.3], 2).unwrap();
        for kind in [CharKind::Signature, CharKind::Dirac] {
            let q = CharSeries::build(kind, 4).unwrap();
            let v = boundary_vanishing_check(&cp, &q, &[0.0, 0.25, 0.5, 0.75, 1.0]).unwrap();
            assert!(v.residual < 1e-10, "{v:?}");
        }
    }

    #[test]
    fn generic_slab_violates_hypothesis() {
        let c = slab();
        let r: Arc<dyn CollarFamily> = Arc::new(ProductReference::with_defaults(c.clone(), true).unwrap());
        let cp = CollarPoint::from_family(c, r, &[0.0, 0.3, 0.2, 0.1], 2).unwrap();
        let q = CharSeries::build(CharKind::Signature, 4).unwrap();
        assert!(matches!(
            boundary_vanishing_check(&cp, &q, &[0.5]),
            Err(TransgressionError::HypothesisViolated { .. })
        ));
    }

    #[test]
    fn product_slab_has_no_transgression() {
        let h = vec![
            Expr::parse("2 + cos(x1)").unwrap(),
            Expr::Const(0.0),
            Expr::Const(0.0),
            Expr::Const(0.0),
            Expr::parse("1 + 0.1*sin(x2)").unwrap(),
            Expr::Const(0.0),
            Expr::Const(0.0),
            Expr::Const(0.0),
            Expr::Const(1.0),
        ];
        let c: Arc<dyn CollarFamily> = Arc::new(ExprCollar::new(4, 1.0, h).unwrap());
        let r = Arc::new(ProductReference::with_defaults(c.clone(), true).unwrap());
        let q = CharSeries::build(CharKind::Signature, 4).unwrap();
        let grid = SlabGrid {
            x_points: 3,
            t_nodes: 2,
            s_nodes: 5,
        };
        let s = stokes_verify(c, r, &q, grid).unwrap();
        assert_eq!(s.bulk, 0.0);
        assert_eq!(s.boundary, 0.0);
    }
}

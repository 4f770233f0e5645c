//! Boundary identities evaluated in the Weingarten eigenframe.
//!
//! In frame matrices, `[S^i ⊗ ∂_t]` is the entry at row 0, column `i`,
//! `[dt ⊗ S_i]` the entry at row `i`, column 0, and `[S^i ⊗ S_j]` the entry
//! at row `j`, column `i`.

use rand::Rng;
use serde::Serialize;

use super::{BoundaryFrame, CollarPoint};
use crate::curvature::{contract4, gram_schmidt, CurvaturePoint};
use crate::form::{mask_of, EndForm};

/// A residual together with where it was attained.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckValue {
    pub residual: f64,
    pub worst: String,
}

impl CheckValue {
    pub fn zero() -> Self {
        CheckValue {
            residual: 0.0,
            worst: String::new(),
        }
    }

    fn observe(&mut self, value: f64, at: impl FnOnce() -> String) {
        let v = value.abs();
        if v > self.residual || (v.is_nan() && !self.residual.is_nan()) {
            self.residual = v;
            self.worst = at();
        }
    }

    pub fn merge(mut self, other: CheckValue) -> CheckValue {
        if other.residual > self.residual || other.residual.is_nan() {
            self = other;
        }
        self
    }
}

fn compare(
    actual: &EndForm<f64>,
    expected: &EndForm<f64>,
    masks: impl Iterator<Item = u32>,
    label: &str,
) -> CheckValue {
    let n = actual.dim();
    let mut out = CheckValue::zero();
    for mask in masks {
        for r in 0..n {
            for c in 0..n {
                let d = actual.entry(mask, r, c) - expected.entry(mask, r, c);
                out.observe(d, || format!("{label}: mask {mask:b}, entry ({r}, {c})"));
            }
        }
    }
    out
}

fn tangential_masks(n: usize, p: usize) -> impl Iterator<Item = u32> {
    crate::form::masks_of_degree(n, p)
        .into_iter()
        .filter(|m| m & 1 == 0)
}

/// `λ_i (E_{0,i} − E_{i,0})` on each `S^i`, the expected pulled-back `θ`.
fn expected_theta(frame: &BoundaryFrame, with_normal: bool) -> EndForm<f64> {
    let n = frame.lambda.len() + 1;
    let mut e = EndForm::zero(n, &());
    for i in 1..n {
        let l = frame.lambda[i - 1];
        e.set(1 << i, 0, i, l);
        e.set(1 << i, i, 0, -l);
        if with_normal {
            e.set(1, i, i, -l);
        }
    }
    e
}

/// `θ(U)V = II(U,V)∂_t`, `θ(U)∂_t = −W(U)`, `θ(∂_t) = −W`.
pub fn check_tetab(cp: &CollarPoint, frame: &BoundaryFrame) -> CheckValue {
    let th = frame.express(&cp.theta);
    let n = cp.dim;
    let masks = (0..n).map(|i| 1u32 << i);
    compare(&th, &expected_theta(frame, true), masks, "theta")
}

/// Pulled-back `θ` equals `Σ λ_i S^i ⊗ [S^i⊗∂_t − dt⊗S_i]`.
pub fn check_ect(cp: &CollarPoint, frame: &BoundaryFrame) -> CheckValue {
    let th = frame.express(&cp.theta).pullback_boundary();
    let n = cp.dim;
    compare(&th, &expected_theta(frame, false), 0..(1u32 << n), "pullback theta")
}

/// Pulled-back `θ²` equals `Σ_{i<j} λ_iλ_j S^i∧S^j ⊗ [S^i⊗S_j − S^j⊗S_i]`.
pub fn check_t2d(cp: &CollarPoint, frame: &BoundaryFrame) -> CheckValue {
    let th = frame.express(&cp.theta).pullback_boundary();
    let sq = th.mul(&th);
    let n = cp.dim;
    let mut want = EndForm::zero(n, &());
    for i in 1..n {
        for j in (i + 1)..n {
            let l = frame.lambda[i - 1] * frame.lambda[j - 1];
            let m = mask_of(&[i, j]);
            want.set(m, j, i, l);
            want.set(m, i, j, -l);
        }
    }
    let mut out = compare(&sq, &want, 0..(1u32 << n), "theta^2 from pullback");
    // the pullback of the ambient θ² must agree as well
    let full = frame.express(&cp.theta_sq).pullback_boundary();
    out = out.merge(compare(&full, &want, 0..(1u32 << n), "pullback of theta^2"));
    out
}

/// `ι*θ³ = 0`.
pub fn check_theta_cubed(cp: &CollarPoint, frame: &BoundaryFrame) -> CheckValue {
    let th = frame.express(&cp.theta);
    let cube = th.mul(&th).mul(&th).pullback_boundary();
    let n = cp.dim;
    compare(&cube, &EndForm::zero(n, &()), 0..(1u32 << n), "pullback of theta^3")
}

/// `⟨d^∇⁰θ(S_i,S_j)S_h, ∂_t⟩ = ⟨R¹(S_i,S_j)S_h, ∂_t⟩`.
pub fn check_coma(cp: &CollarPoint, frame: &BoundaryFrame) -> CheckValue {
    let dt = frame.express(&cp.d_theta);
    let r1 = frame.express(&cp.r1);
    let n = cp.dim;
    let mut out = CheckValue::zero();
    for m in tangential_masks(n, 2) {
        for h in 1..n {
            let d = dt.entry(m, 0, h) - r1.entry(m, 0, h);
            out.observe(d, || format!("mask {m:b}, S_{h}"));
        }
    }
    out
}

/// `⟨d^∇⁰θ(S_i,S_j)S_h, S_l⟩ = 0`.
pub fn check_dnt0(cp: &CollarPoint, frame: &BoundaryFrame) -> CheckValue {
    let dt = frame.express(&cp.d_theta);
    let n = cp.dim;
    let mut out = CheckValue::zero();
    for m in tangential_masks(n, 2) {
        for l in 1..n {
            for h in 1..n {
                out.observe(dt.entry(m, l, h), || format!("mask {m:b}, S_{h} -> S_{l}"));
            }
        }
    }
    out
}

/// Pulled-back `d^∇⁰θ` has only the blocks
/// `S^a∧S^b ⊗ [R¹_{abbν}(S^b⊗∂_t − dt⊗S_b) + R¹_{abaν}(S^a⊗∂_t − dt⊗S_a)]`.
pub fn check_dnat(cp: &CollarPoint, frame: &BoundaryFrame) -> CheckValue {
    let dt = frame.express(&cp.d_theta).pullback_boundary();
    let r1 = frame.express(&cp.r1);
    let n = cp.dim;
    let mut want = EndForm::zero(n, &());
    for a in 1..n {
        for b in (a + 1)..n {
            let m = mask_of(&[a, b]);
            // R¹_{abhν} = ⟨R¹(S_a,S_b)S_h, ∂_t⟩ is the row-0 entry
            let rb = r1.entry(m, 0, b);
            let ra = r1.entry(m, 0, a);
            want.set(m, 0, b, rb);
            want.set(m, b, 0, -rb);
            want.set(m, 0, a, ra);
            want.set(m, a, 0, -ra);
        }
    }
    compare(&dt, &want, 0..(1u32 << n), "pullback d theta")
}

/// `⟨R⁰(S_i,S_j)S_h, S_l⟩ = 0` for four distinct tangential indices.
/// Vacuous below dimension 5.
pub fn check_r04d(cp: &CollarPoint, frame: &BoundaryFrame) -> CheckValue {
    let r0 = frame.express(&cp.r0);
    let n = cp.dim;
    let mut out = CheckValue::zero();
    for i in 1..n {
        for j in (i + 1)..n {
            let m = mask_of(&[i, j]);
            for h in 1..n {
                for l in 1..n {
                    if h == i || h == j || l == i || l == j || h == l {
                        continue;
                    }
                    out.observe(r0.entry(m, l, h), || format!("(i,j,h,l) = ({i},{j},{h},{l})"));
                }
            }
        }
    }
    out
}

/// `R⁰ + d^∇⁰θ + θ² − R¹` over all jet coefficients.
pub fn check_master(cp: &CollarPoint) -> CheckValue {
    let mut sum = cp.r0.clone();
    sum.add_assign(1.0, &cp.d_theta);
    sum.add_assign(1.0, &cp.theta_sq);
    sum.add_assign(-1.0, &cp.r1);
    let n = cp.dim;
    let mut out = CheckValue::zero();
    for m in sum.masks() {
        for r in 0..n {
            for c in 0..n {
                let v = sum.entry(m, r, c).max_abs_coeff();
                out.observe(v, || format!("mask {m:b}, entry ({r}, {c})"));
            }
        }
    }
    out
}

/// `⟨R(U₁,U₂)U₃, U₄⟩` for random mutually `g`-orthogonal quadruples.
pub fn check_lemma_3v0(curv: &CurvaturePoint<f64>, rng: &mut impl Rng, samples: usize) -> CheckValue {
    let n = curv.dim;
    let mut out = CheckValue::zero();
    if n < 4 {
        return out;
    }
    for s in 0..samples {
        let raw: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let u = gram_schmidt(n, &curv.g, &raw);
        let v = contract4(n, &curv.riemann4, [&u[0], &u[1], &u[2], &u[3]]);
        out.observe(v, || format!("sample {s}"));
    }
    out
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::collar::{CollarFamily, ExprCollar, FlatAmbientCollar, ProductReference};
    use crate::expr::Expr;

    fn run_all(family: Arc<dyn CollarFamily>, point: &[f64]) -> Vec<(&'static str, f64)> {
        let reference: Arc<dyn CollarFamily> =
            Arc::new(ProductReference::with_defaults(family.clone(), false).unwrap());
        let cp = CollarPoint::from_family(family.clone(), reference, point, 2).unwrap();
        let frame = BoundaryFrame::new(&*family, point).unwrap();
        let (ortho, eig) = frame.residuals();
        assert!(ortho < 1e-10 && eig < 1e-9);
        vec![
            ("tetab", check_tetab(&cp, &frame).residual),
            ("ect", check_ect(&cp, &frame).residual),
            ("t2d", check_t2d(&cp, &frame).residual),
            ("theta3", check_theta_cubed(&cp, &frame).residual),
            ("coma", check_coma(&cp, &frame).residual),
            ("dnt0", check_dnt0(&cp, &frame).residual),
            ("dnat", check_dnat(&cp, &frame).residual),
            ("r04d", check_r04d(&cp, &frame).residual),
            ("master", check_master(&cp).residual),
        ]
    }

    #[test]
    fn ellipsoid_satisfies_boundary_identities() {
        let e: Arc<dyn CollarFamily> =
            Arc::new(FlatAmbientCollar::ellipsoid(&[1.0, 1.3, 1.7, 1.0], 0.3).unwrap());
        for (name, r) in run_all(e, &[0.0, 0.9, 1.2, 0.4]) {
            assert!(r < 1e-8, "{name}: {r}");
        }
    }

    #[test]
    fn shrinking_collar_identities_and_umbilicity() {
        let h = ["exp(-2*t)*(2 + sin(x1))", "0", "0", "exp(-2*t)*(1 + 0.3*cos(x2))"]
            .iter()
            .map(|s| Expr::parse(s).unwrap())
            .collect();
        let c: Arc<dyn CollarFamily> = Arc::new(ExprCollar::new(3, 1.0, h).unwrap());
        let p = [0.0, 0.4, -0.7];
        let frame = BoundaryFrame::new(&*c, &p).unwrap();
        for l in &frame.lambda {
            assert!((l - 1.0).abs() < 1e-12);
        }
        for (name, r) in run_all(c, &p) {
            assert!(r < 1e-9, "{name}: {r}");
        }
    }

    #[test]
    fn orthogonal_quadruples_vanish_on_flat_space() {
        let g = crate::metric::ConformalFlat::new(4, Expr::Const(0.0)).unwrap();
        let curv = CurvaturePoint::at(&g, &[0.1, 0.2, 0.3, 0.4], 2).unwrap().values();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(check_lemma_3v0(&curv, &mut rng, 20).residual < 1e-14);
    }
}

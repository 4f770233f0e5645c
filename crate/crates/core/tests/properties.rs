//! Property tests for the algebraic invariants.

use std::sync::Arc;

use lcf_core::collar::{CollarFamily, CollarPoint, ProductReference};
use lcf_core::expr::{BinOp, Expr, Func, JetEnv};
use lcf_core::form::{masks_of_degree, EndForm, Form};
use lcf_core::jet::Jet;
use lcf_core::obstruction::{check_bounds_lcf, lens_eta_signature};
use lcf_core::scenarios;
use num_integer::Integer;
use num_rational::Rational64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn end_form(n: usize, p: usize, seed: u64) -> EndForm<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut e = EndForm::zero(n, &());
    for mask in masks_of_degree(n, p) {
        for r in 0..n {
            for c in 0..n {
                e.set(mask, r, c, rng.gen_range(-1.0..1.0));
            }
        }
    }
    e
}

fn even_form(n: usize, seed: u64) -> Form<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = Form::zero(n, &());
    for p in (0..=n).step_by(2) {
        for mask in masks_of_degree(n, p) {
            f.set(mask, rng.gen_range(-0.5..0.5));
        }
    }
    f
}

fn jet(seed: u64, unit: bool) -> Jet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = Jet::zero(3, 4).coeffs().len();
    let mut c: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
    if unit {
        c[0] = 1.5;
    }
    Jet::from_coeffs(3, 4, c)
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0u32..50).prop_map(|v| Expr::Const(v as f64)),
        (0u32..100_000).prop_map(|v| Expr::Const(v as f64 / 1000.0)),
        Just(Expr::Pi),
        prop::sample::select(vec!["t", "x1", "x2", "x3"]).prop_map(|s| Expr::Var(s.to_string())),
    ];
    leaf.prop_recursive(4, 32, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            (
                prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div]),
                inner.clone(),
                inner.clone()
            )
                .prop_map(|(op, a, b)| Expr::Binary(op, Box::new(a), Box::new(b))),
            (inner.clone(), prop::sample::select(vec![2.0, 3.0, 0.5, -2.0]))
                .prop_map(|(a, k)| Expr::Pow(Box::new(a), k)),
            (prop::sample::select(Func::ALL.to_vec()), prop::collection::vec(inner, 3)).prop_map(|(f, args)| {
                Expr::Call(f, args.into_iter().take(f.arity()).collect())
            }),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn graded_trace_identity(p in 0usize..=4, q in 0usize..=4, seed in any::<u64>()) {
        let a = end_form(4, p, seed);
        let b = end_form(4, q, seed ^ 0x5555);
        let sign = if (p * q) % 2 == 0 { 1.0 } else { -1.0 };
        let d = a.mul(&b).trace().try_sub(&b.mul(&a).trace().scale(sign)).unwrap();
        prop_assert!(d.max_abs() < 1e-12);
    }

    #[test]
    fn jet_ring_axioms(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()) {
        let (a, b, c) = (jet(s1, false), jet(s2, false), jet(s3, false));
        let d = |x: Jet, y: Jet| x.try_sub(&y).unwrap().max_abs_coeff();
        let ab = a.try_mul(&b).unwrap();
        prop_assert!(d(ab.clone(), b.try_mul(&a).unwrap()) < 1e-12);
        prop_assert!(d(ab.try_mul(&c).unwrap(), a.try_mul(&b.try_mul(&c).unwrap()).unwrap()) < 1e-12);
        let lhs = a.try_mul(&b.try_add(&c).unwrap()).unwrap();
        let rhs = ab.try_add(&a.try_mul(&c).unwrap()).unwrap();
        prop_assert!(d(lhs, rhs) < 1e-12);
    }

    #[test]
    fn jet_reciprocal(s in any::<u64>()) {
        let a = jet(s, true);
        let one = a.try_mul(&a.recip().unwrap()).unwrap();
        prop_assert!(one.try_sub(&Jet::constant(3, 4, 1.0)).unwrap().max_abs_coeff() < 1e-12);
    }

    #[test]
    fn parser_round_trip(e in arb_expr()) {
        let text = e.to_string();
        let back = Expr::parse(&text).unwrap();
        prop_assert_eq!(&back, &e);
        // evaluation agrees wherever it is defined
        let env = JetEnv::coordinates(&[0.3, 0.7, 1.1, 2.3], 1);
        if let (Ok(x), Ok(y)) = (e.eval_jet(&env), back.eval_jet(&env)) {
            let same = x.coeffs().iter().zip(y.coeffs()).all(|(a, b)| a == b || (a.is_nan() && b.is_nan()));
            prop_assert!(same);
        }
    }

    #[test]
    fn exp_of_sum_is_product(s1 in any::<u64>(), s2 in any::<u64>()) {
        let a = even_form(4, s1);
        let b = even_form(4, s2);
        let lhs = a.try_add(&b).unwrap().exp_even().unwrap();
        let rhs = a.exp_even().unwrap().wedge(&b.exp_even().unwrap());
        prop_assert!(lhs.try_sub(&rhs).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn verdict_is_two_periodic(num in -200i64..200, den in 1i64..40, m in -5i64..5) {
        let e = Rational64::new(num, den);
        let shifted = e + Rational64::from_integer(2 * m);
        prop_assert_eq!(check_bounds_lcf(e, 1e-9), check_bounds_lcf(shifted, 1e-9));
    }

    #[test]
    fn lens_antisymmetry(p in 2i64..=50, q in 1i64..50) {
        prop_assume!(q < p && p.gcd(&q) == 1);
        let a = lens_eta_signature(p, q).unwrap().as_rational().unwrap();
        let b = lens_eta_signature(p, p - q).unwrap().as_rational().unwrap();
        prop_assert_eq!(a + b, Rational64::from_integer(0));
    }
}

fn even_monomial_traces(family: Arc<dyn CollarFamily>, point: &[f64], s: f64) -> f64 {
    let r: Arc<dyn CollarFamily> = Arc::new(ProductReference::with_defaults(family.clone(), false).unwrap());
    let cp = CollarPoint::from_family(family, r, point, 2).unwrap();
    let n = cp.dim;
    let th = cp.theta.values().pullback_boundary();
    let mut rs = cp.r0.values();
    rs.add_assign(s, &cp.d_theta.values());
    rs.add_assign(s * s, &cp.theta_sq.values());
    let rs = rs.pullback_boundary();
    let mut power = EndForm::identity(n, &());
    let mut worst: f64 = 0.0;
    for l in 0..n / 2 + 1 {
        if l > 0 {
            power = power.mul(&rs);
        }
        if l % 2 == 0 {
            worst = worst.max(th.mul(&power).trace().max_abs());
        }
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn even_monomials_vanish_on_generic_collars(seed in 0u64..1000, s in 0.0f64..1.0) {
        let slab: Arc<dyn CollarFamily> = Arc::new(scenarios::random_trig_slab(seed, 4, 2).unwrap());
        let mut p = scenarios::slab_points(seed, 4, 1, 0.0, 1.0).remove(0);
        p[0] = 0.0;
        prop_assert!(even_monomial_traces(slab, &p, s) < 1e-10);
        let e: Arc<dyn CollarFamily> = Arc::new(scenarios::ellipsoid());
        let q = scenarios::sphere_chart_points(seed, 4, 1).remove(0);
        prop_assert!(even_monomial_traces(e, &q, s) < 1e-10);
    }
}

//! Stokes balance beyond the acceptance configuration.

use std::sync::Arc;
use std::time::Instant;

use lcf_core::collar::{CollarFamily, ExprCollar, ProductReference};
use lcf_core::expr::Expr;
use lcf_core::scenarios;
use lcf_core::series::{CharKind, CharSeries};
use lcf_core::transgression::{stokes_verify, SlabGrid, TransgressionError};

const GRID: SlabGrid = SlabGrid {
    x_points: 5,
    t_nodes: 12,
    s_nodes: 5,
};

fn slab() -> Arc<dyn CollarFamily> {
    Arc::new(scenarios::random_trig_slab(5, 4, 1).unwrap())
}

#[test]
fn residual_does_not_depend_on_the_plateau() {
    let q = CharSeries::build(CharKind::Signature, 4).unwrap();
    let fam = slab();
    let start = Instant::now();
    let mut residuals = Vec::new();
    for (a, b) in [(0.25, 0.5), (0.1, 0.35)] {
        let r = Arc::new(ProductReference::new(fam.clone(), a, b, true).unwrap());
        let res = stokes_verify(fam.clone(), r, &q, GRID).unwrap();
        eprintln!("plateau ({a}, {b}): bulk {:e} boundary {:e} residual {:e}", res.bulk, res.boundary, res.residual);
        assert!(res.residual < 1e-6, "{res:?}");
        residuals.push(res.residual);
    }
    assert!((residuals[0] - residuals[1]).abs() < 2e-6);
    eprintln!("two plateaus in {:.1} s", start.elapsed().as_secs_f64());
}

#[test]
fn dirac_series_balances() {
    let q = CharSeries::build(CharKind::Dirac, 4).unwrap();
    let fam = slab();
    let r = Arc::new(ProductReference::with_defaults(fam.clone(), true).unwrap());
    let res = stokes_verify(fam, r, &q, GRID).unwrap();
    assert!(res.residual < 1e-6, "{res:?}");
}

#[test]
fn t_independent_slab_has_nothing_to_balance() {
    let h = ["2 + sin(x1)", "0", "0", "0", "1 + 0.5*cos(x2 + x3)", "0", "0", "0", "1"]
        .iter()
        .map(|s| Expr::parse(s).unwrap())
        .collect();
    let fam: Arc<dyn CollarFamily> = Arc::new(ExprCollar::new(4, 1.0, h).unwrap());
    let r = Arc::new(ProductReference::with_defaults(fam.clone(), true).unwrap());
    let q = CharSeries::build(CharKind::Signature, 4).unwrap();
    let grid = SlabGrid {
        x_points: 3,
        t_nodes: 4,
        s_nodes: 5,
    };
    let res = stokes_verify(fam, r, &q, grid).unwrap();
    assert!(res.bulk.abs() < 1e-14 && res.boundary.abs() < 1e-14, "{res:?}");
}

#[test]
fn one_sided_reference_is_refused() {
    let fam = slab();
    let r = Arc::new(ProductReference::with_defaults(fam.clone(), false).unwrap());
    let q = CharSeries::build(CharKind::Signature, 4).unwrap();
    assert!(matches!(stokes_verify(fam, r, &q, GRID), Err(TransgressionError::Invalid(_))));
}

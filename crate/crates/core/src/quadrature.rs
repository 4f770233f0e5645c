//! Gauss–Legendre and periodic trapezoid rules, plus compensated summation.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// `count` points, exact for polynomials of degree `< 2 count`.
    pub fn new(count: usize, a: f64, b: f64) -> Self {
        assert!(count > 0, "Gauss–Legendre rule needs at least one node");
        let (x, w) = legendre_unit(count);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        GaussLegendre {
            nodes: x.iter().map(|t| mid + half * t).collect(),
            weights: w.iter().map(|v| v * half).collect(),
        }
    }

    /// Composite rule with `count` points on each panel between consecutive
    /// breakpoints.
    pub fn composite(count: usize, breaks: &[f64]) -> Self {
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for w in breaks.windows(2) {
            if w[1] > w[0] {
                let g = GaussLegendre::new(count, w[0], w[1]);
                nodes.extend(g.nodes);
                weights.extend(g.weights);
            }
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let mut s = NeumaierSum::default();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s.add(w * f(*x));
        }
        s.total()
    }
}

/// Nodes and weights on `[−1, 1]` by Newton iteration on `P_n`.
fn legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = weight;
        w[n - 1 - i] = weight;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Equispaced nodes `2πj/m` with weight `2π/m`: exact on `[0, 2π)` for
/// trigonometric polynomials of degree `< m`.
pub fn periodic_trapezoid(m: usize) -> (Vec<f64>, f64) {
    let h = 2.0 * PI / m as f64;
    ((0..m).map(|j| j as f64 * h).collect(), h)
}

/// Neumaier's improved Kahan summation. Reports depend only on the order of
/// the terms, so reductions are done sequentially after a parallel map.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut s = NeumaierSum::default();
    for v in values {
        s.add(v);
    }
    s.total()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_exactness() {
        for n in 1..12 {
            let g = GaussLegendre::new(n, 0.0, 1.0);
            for p in 0..(2 * n) {
                let got = g.integrate(|x| x.powi(p as i32));
                assert!((got - 1.0 / (p as f64 + 1.0)).abs() < 1e-14, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn five_point_rule_matches_table() {
        let g = GaussLegendre::new(5, -1.0, 1.0);
        let x = (5.0 - 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0;
        assert!((g.nodes[3] - x).abs() < 1e-15);
        assert!((g.weights[2] - 128.0 / 225.0).abs() < 1e-15);
    }

    #[test]
    fn composite_rule_covers_panels() {
        let g = GaussLegendre::composite(3, &[0.0, 0.25, 0.5, 1.0]);
        assert_eq!(g.len(), 9);
        assert!((g.integrate(|x| x.exp()) - (1f64.exp() - 1.0)).abs() < 1e-8);
    }

    #[test]
    fn trapezoid_is_exact_for_low_trig_degree() {
        let (x, w) = periodic_trapezoid(7);
        let s: f64 = x.iter().map(|t| (3.0 * t).cos().powi(2) + (2.0 * t).sin()).sum::<f64>() * w;
        assert!((s - PI).abs() < 1e-13);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(neumaier_sum(v), 2.0);
    }
}

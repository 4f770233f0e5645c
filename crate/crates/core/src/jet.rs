//! Truncated multivariate Taylor expansions ("jets").
//!
//! A [`Jet`] in `m` variables of order `r` stores the Taylor-normalized
//! coefficients `∂^α f / α!` at a base point for every multi-index with
//! `|α| ≤ r`. Multi-indices are enumerated in graded lexicographic order, so
//! the layout of order `r - 1` is a prefix of the layout of order `r` and
//! truncation is a slice.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("jet shape mismatch: ({0}, {1}) vs ({2}, {3})")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("division by a jet with zero constant term")]
    ZeroDivisor,
    #[error("function `{func}` undefined at base point value {value}")]
    Domain { func: &'static str, value: f64 },
    #[error("no derivative information in an order-0 jet")]
    NoDerivative,
    #[error("variable index {0} out of range for {1} variables")]
    VarOutOfRange(usize, usize),
}

/// Index tables for one `(num_vars, order)` pair. Shared through [`Arc`].
#[derive(Debug)]
pub struct JetLayout {
    num_vars: usize,
    order: usize,
    indices: Vec<Vec<u8>>,
    degrees: Vec<usize>,
    lookup: HashMap<Vec<u8>, usize>,
    /// `(i, j, k)` with `α_i + α_j = α_k`.
    products: Vec<(u32, u32, u32)>,
    /// `offsets[d + 1]` is the number of multi-indices of degree `<= d`.
    offsets: Vec<usize>,
}

impl PartialEq for JetLayout {
    fn eq(&self, other: &Self) -> bool {
        self.num_vars == other.num_vars && self.order == other.order
    }
}

impl JetLayout {
    fn build(num_vars: usize, order: usize) -> Self {
        let mut indices = Vec::new();
        let mut degrees = Vec::new();
        let mut offsets = vec![0];
        for d in 0..=order {
            let mut current = vec![0u8; num_vars];
            push_degree(&mut indices, &mut current, 0, d);
            degrees.resize(indices.len(), d);
            offsets.push(indices.len());
        }
        let lookup: HashMap<Vec<u8>, usize> = indices
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();
        let mut products = Vec::new();
        let mut sum = vec![0u8; num_vars];
        for (i, a) in indices.iter().enumerate() {
            for (j, b) in indices.iter().enumerate() {
                if degrees[i] + degrees[j] > order {
                    // degrees are sorted, nothing further in this row fits
                    break;
                }
                for v in 0..num_vars {
                    sum[v] = a[v] + b[v];
                }
                products.push((i as u32, j as u32, lookup[&sum] as u32));
            }
        }
        JetLayout {
            num_vars,
            order,
            indices,
            degrees,
            lookup,
            products,
            offsets,
        }
    }

    pub fn get(num_vars: usize, order: usize) -> Arc<JetLayout> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetLayout>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("jet layout cache poisoned");
        guard
            .entry((num_vars, order))
            .or_insert_with(|| Arc::new(JetLayout::build(num_vars, order)))
            .clone()
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Multi-indices in storage order.
    pub fn multi_indices(&self) -> &[Vec<u8>] {
        &self.indices
    }

    pub fn index_of(&self, alpha: &[u8]) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }

    /// Number of coefficients of total degree `<= d`.
    /// Total degree of the `i`-th multi-index.
    pub fn degree(&self, i: usize) -> usize {
        self.degrees[i]
    }

    pub fn len_up_to(&self, d: usize) -> usize {
        self.offsets[d.min(self.order) + 1]
    }
}

fn push_degree(out: &mut Vec<Vec<u8>>, current: &mut [u8], var: usize, remaining: usize) {
    if var + 1 == current.len() {
        current[var] = remaining as u8;
        out.push(current.to_vec());
        current[var] = 0;
        return;
    }
    for k in (0..=remaining).rev() {
        current[var] = k as u8;
        push_degree(out, current, var + 1, remaining - k);
    }
    current[var] = 0;
}

/// Truncated Taylor expansion of a scalar function at a point.
#[derive(Clone)]
pub struct Jet {
    layout: Arc<JetLayout>,
    coeffs: Vec<f64>,
}

/// Binary jet operations, as a tag for [`Jet::arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Elementary functions available to [`Jet::compose`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Elementary {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
    /// Real power with a constant exponent.
    Pow(f64),
}

impl Jet {
    pub fn zero(num_vars: usize, order: usize) -> Jet {
        Jet::zero_in(&JetLayout::get(num_vars, order))
    }

    pub fn zero_in(layout: &Arc<JetLayout>) -> Jet {
        Jet {
            layout: layout.clone(),
            coeffs: vec![0.0; layout.len()],
        }
    }

    pub fn constant(num_vars: usize, order: usize, value: f64) -> Jet {
        Jet::constant_in(&JetLayout::get(num_vars, order), value)
    }

    pub fn constant_in(layout: &Arc<JetLayout>, value: f64) -> Jet {
        let mut j = Jet::zero_in(layout);
        j.coeffs[0] = value;
        j
    }

    /// The jet of the coordinate function `x_var` at a point where it equals `value`.
    pub fn variable(num_vars: usize, order: usize, var: usize, value: f64) -> Jet {
        assert!(var < num_vars, "variable {var} out of range");
        let layout = JetLayout::get(num_vars, order);
        let mut j = Jet::constant_in(&layout, value);
        if order >= 1 {
            let mut alpha = vec![0u8; num_vars];
            alpha[var] = 1;
            let idx = layout.index_of(&alpha).expect("first-order index");
            j.coeffs[idx] = 1.0;
        }
        j
    }

    /// Coordinate jets of all variables at `point`.
    pub fn coordinates(point: &[f64], order: usize) -> Vec<Jet> {
        (0..point.len())
            .map(|v| Jet::variable(point.len(), order, v, point[v]))
            .collect()
    }

    /// Builds a jet from coefficients in storage order.
    pub fn from_coeffs(num_vars: usize, order: usize, coeffs: Vec<f64>) -> Jet {
        let layout = JetLayout::get(num_vars, order);
        assert_eq!(coeffs.len(), layout.len(), "coefficient count");
        Jet { layout, coeffs }
    }

    pub fn layout(&self) -> &Arc<JetLayout> {
        &self.layout
    }

    pub fn num_vars(&self) -> usize {
        self.layout.num_vars
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// `∂_var` at the base point; zero for constants.
    pub fn first_derivative(&self, var: usize) -> f64 {
        // degree-one monomials follow the constant term in variable order
        if self.order() == 0 {
            0.0
        } else {
            self.coeffs[1 + var]
        }
    }

    /// Taylor coefficient for a multi-index; zero beyond the stored order.
    pub fn coeff(&self, alpha: &[u8]) -> f64 {
        self.layout
            .index_of(alpha)
            .map(|i| self.coeffs[i])
            .unwrap_or(0.0)
    }

    /// Raw partial derivative `∂^α f` at the base point.
    pub fn derivative(&self, alpha: &[u8]) -> f64 {
        let fact: f64 = alpha
            .iter()
            .map(|&a| (1..=a as u64).product::<u64>() as f64)
            .product();
        self.coeff(alpha) * fact
    }

    pub fn constant_term(&self) -> f64 {
        self.coeffs[0]
    }

    fn same_shape(&self, other: &Jet) -> Result<(), JetError> {
        if Arc::ptr_eq(&self.layout, &other.layout)
            || (self.num_vars() == other.num_vars() && self.order() == other.order())
        {
            Ok(())
        } else {
            Err(JetError::ShapeMismatch(
                self.num_vars(),
                self.order(),
                other.num_vars(),
                other.order(),
            ))
        }
    }

    /// Checked binary arithmetic.
    pub fn arith(&self, other: &Jet, op: ArithOp) -> Result<Jet, JetError> {
        self.same_shape(other)?;
        Ok(match op {
            ArithOp::Add => self.add_unchecked(other),
            ArithOp::Sub => self.sub_unchecked(other),
            ArithOp::Mul => self.mul_unchecked(other),
            ArithOp::Div => self.mul_unchecked(&other.recip()?),
        })
    }

    pub fn try_add(&self, other: &Jet) -> Result<Jet, JetError> {
        self.arith(other, ArithOp::Add)
    }

    pub fn try_sub(&self, other: &Jet) -> Result<Jet, JetError> {
        self.arith(other, ArithOp::Sub)
    }

    pub fn try_mul(&self, other: &Jet) -> Result<Jet, JetError> {
        self.arith(other, ArithOp::Mul)
    }

    pub fn try_div(&self, other: &Jet) -> Result<Jet, JetError> {
        self.arith(other, ArithOp::Div)
    }

    fn add_unchecked(&self, other: &Jet) -> Jet {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Jet {
            layout: self.layout.clone(),
            coeffs,
        }
    }

    fn sub_unchecked(&self, other: &Jet) -> Jet {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Jet {
            layout: self.layout.clone(),
            coeffs,
        }
    }

    fn mul_unchecked(&self, other: &Jet) -> Jet {
        let mut out = vec![0.0; self.coeffs.len()];
        mul_into(&self.layout, &self.coeffs, &other.coeffs, &mut out);
        Jet {
            layout: self.layout.clone(),
            coeffs: out,
        }
    }

    pub fn scale(&self, k: f64) -> Jet {
        Jet {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    pub fn recip(&self) -> Result<Jet, JetError> {
        let a0 = self.coeffs[0];
        if a0 == 0.0 {
            return Err(JetError::ZeroDivisor);
        }
        // d^k/du^k (a0 + u)^-1 / k! = (-1)^k a0^-(k+1)
        let series: Vec<f64> = (0..=self.order())
            .map(|k| (-1f64).powi(k as i32) * a0.powi(-(k as i32) - 1))
            .collect();
        Ok(self.apply_series(&series))
    }

    /// Evaluates `Σ_k series[k] (a - a0)^k` by Horner's rule.
    pub fn apply_series(&self, series: &[f64]) -> Jet {
        let mut u = self.clone();
        u.coeffs[0] = 0.0;
        let mut result = Jet::constant_in(&self.layout, *series.last().unwrap_or(&0.0));
        for &c in series.iter().rev().skip(1) {
            result = result.mul_unchecked(&u);
            result.coeffs[0] += c;
        }
        result
    }

    /// `f ∘ self` for an elementary function `f`.
    pub fn compose(&self, f: Elementary) -> Result<Jet, JetError> {
        let a0 = self.coeffs[0];
        let r = self.order();
        let series: Vec<f64> = match f {
            Elementary::Exp => {
                let e = a0.exp();
                let mut fact = 1.0;
                (0..=r)
                    .map(|k| {
                        if k > 0 {
                            fact *= k as f64;
                        }
                        e / fact
                    })
                    .collect()
            }
            Elementary::Log => {
                if a0 <= 0.0 {
                    return Err(JetError::Domain {
                        func: "log",
                        value: a0,
                    });
                }
                (0..=r)
                    .map(|k| {
                        if k == 0 {
                            a0.ln()
                        } else {
                            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                            sign / (k as f64 * a0.powi(k as i32))
                        }
                    })
                    .collect()
            }
            Elementary::Sin | Elementary::Cos => {
                let (s, c) = a0.sin_cos();
                let cycle = if f == Elementary::Sin {
                    [s, c, -s, -c]
                } else {
                    [c, -s, -c, s]
                };
                let mut fact = 1.0;
                (0..=r)
                    .map(|k| {
                        if k > 0 {
                            fact *= k as f64;
                        }
                        cycle[k % 4] / fact
                    })
                    .collect()
            }
            Elementary::Sqrt => {
                if a0 <= 0.0 {
                    return Err(JetError::Domain {
                        func: "sqrt",
                        value: a0,
                    });
                }
                binomial_series(a0, 0.5, r)
            }
            Elementary::Pow(c) => {
                if c >= 0.0 && c.fract() == 0.0 && c < 64.0 {
                    return Ok(self.powi(c as u32));
                }
                if c.fract() == 0.0 {
                    if a0 == 0.0 {
                        return Err(JetError::Domain {
                            func: "pow",
                            value: a0,
                        });
                    }
                } else if a0 <= 0.0 {
                    return Err(JetError::Domain {
                        func: "pow",
                        value: a0,
                    });
                }
                binomial_series(a0, c, r)
            }
        };
        Ok(self.apply_series(&series))
    }

    pub fn exp(&self) -> Jet {
        self.compose(Elementary::Exp).expect("exp is total")
    }

    pub fn ln(&self) -> Result<Jet, JetError> {
        self.compose(Elementary::Log)
    }

    pub fn sin(&self) -> Jet {
        self.compose(Elementary::Sin).expect("sin is total")
    }

    pub fn cos(&self) -> Jet {
        self.compose(Elementary::Cos).expect("cos is total")
    }

    pub fn sqrt(&self) -> Result<Jet, JetError> {
        self.compose(Elementary::Sqrt)
    }

    pub fn powi(&self, mut n: u32) -> Jet {
        let mut base = self.clone();
        let mut acc = Jet::constant_in(&self.layout, 1.0);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul_unchecked(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul_unchecked(&base);
            }
        }
        acc
    }

    /// Jet of `∂f/∂x_var`, one order lower.
    pub fn partial(&self, var: usize) -> Result<Jet, JetError> {
        let m = self.num_vars();
        if var >= m {
            return Err(JetError::VarOutOfRange(var, m));
        }
        let r = self.order();
        if r == 0 {
            return Err(JetError::NoDerivative);
        }
        let out_layout = JetLayout::get(m, r - 1);
        let mut coeffs = vec![0.0; out_layout.len()];
        let mut shifted = vec![0u8; m];
        for (k, alpha) in out_layout.indices.iter().enumerate() {
            shifted.copy_from_slice(alpha);
            shifted[var] += 1;
            let src = self.layout.lookup[&shifted];
            coeffs[k] = (alpha[var] as f64 + 1.0) * self.coeffs[src];
        }
        Ok(Jet {
            layout: out_layout,
            coeffs,
        })
    }

    /// Antiderivative in `x_var` vanishing on `x_var = base`, truncated to the same order.
    pub fn integrate(&self, var: usize) -> Jet {
        let m = self.num_vars();
        assert!(var < m, "variable {var} out of range");
        let mut out = Jet::zero_in(&self.layout);
        let mut shifted = vec![0u8; m];
        let top = self.layout.len_up_to(self.order().saturating_sub(1));
        if self.order() == 0 {
            return out;
        }
        for k in 0..top {
            let alpha = &self.layout.indices[k];
            shifted.copy_from_slice(alpha);
            shifted[var] += 1;
            let dst = self.layout.lookup[&shifted];
            out.coeffs[dst] = self.coeffs[k] / (alpha[var] as f64 + 1.0);
        }
        out
    }

    /// Restriction to a lower order.
    pub fn truncate(&self, order: usize) -> Jet {
        assert!(order <= self.order(), "cannot raise jet order by truncation");
        if order == self.order() {
            return self.clone();
        }
        let layout = JetLayout::get(self.num_vars(), order);
        let coeffs = self.coeffs[..layout.len()].to_vec();
        Jet { layout, coeffs }
    }

    /// Raises the order by padding with zero coefficients. Only meaningful when
    /// the function is known to be a polynomial of degree `<= self.order()`.
    pub fn pad(&self, order: usize) -> Jet {
        assert!(order >= self.order());
        let layout = JetLayout::get(self.num_vars(), order);
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(layout.len(), 0.0);
        Jet { layout, coeffs }
    }

    /// Drops every term that depends on `x_var`: the jet of `(.., x_var = base, ..) ↦ f`.
    pub fn freeze_var(&self, var: usize) -> Jet {
        let mut out = self.clone();
        for (k, alpha) in self.layout.indices.iter().enumerate() {
            if alpha[var] != 0 {
                out.coeffs[k] = 0.0;
            }
        }
        out
    }

    /// Substitutes `x_i - base_i ↦ shifts[i]`, where each shift is a jet
    /// with zero constant term in a common target layout.
    pub fn compose_vars(&self, shifts: &[Jet]) -> Jet {
        assert_eq!(shifts.len(), self.num_vars(), "one shift per variable");
        let target = shifts[0].layout.clone();
        let monomials = Monomials::new(shifts);
        let mut out = Jet::zero_in(&target);
        for (k, c) in self.coeffs.iter().enumerate() {
            if *c == 0.0 {
                continue;
            }
            let mono = monomials.get(&self.layout.indices[k]);
            for (o, m) in out.coeffs.iter_mut().zip(&mono.coeffs) {
                *o += c * m;
            }
        }
        out
    }

    /// Evaluates the Taylor polynomial at a displacement from the base point.
    pub fn eval_polynomial(&self, displacement: &[f64]) -> f64 {
        self.layout
            .indices
            .iter()
            .zip(&self.coeffs)
            .map(|(alpha, c)| {
                c * alpha
                    .iter()
                    .zip(displacement)
                    .map(|(&a, d)| d.powi(a as i32))
                    .product::<f64>()
            })
            .sum()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// Cache of products of shift jets keyed by multi-index.
pub struct Monomials<'a> {
    shifts: &'a [Jet],
    cache: std::cell::RefCell<HashMap<Vec<u8>, Jet>>,
}

impl<'a> Monomials<'a> {
    pub fn new(shifts: &'a [Jet]) -> Self {
        Monomials {
            shifts,
            cache: std::cell::RefCell::new(HashMap::new()),
        }
    }

    pub fn get(&self, alpha: &[u8]) -> Jet {
        if let Some(j) = self.cache.borrow().get(alpha) {
            return j.clone();
        }
        let layout = &self.shifts[0].layout;
        let result = match alpha.iter().position(|&a| a > 0) {
            None => Jet::constant_in(layout, 1.0),
            Some(v) => {
                let mut lower = alpha.to_vec();
                lower[v] -= 1;
                self.get(&lower).mul_unchecked(&self.shifts[v])
            }
        };
        self.cache
            .borrow_mut()
            .insert(alpha.to_vec(), result.clone());
        result
    }
}

fn binomial_series(a0: f64, c: f64, r: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(r + 1);
    let mut binom = 1.0;
    for k in 0..=r {
        if k > 0 {
            binom *= (c - (k as f64 - 1.0)) / k as f64;
        }
        out.push(binom * a0.powf(c - k as f64));
    }
    out
}

fn mul_into(layout: &JetLayout, a: &[f64], b: &[f64], out: &mut [f64]) {
    for &(i, j, k) in &layout.products {
        out[k as usize] += a[i as usize] * b[j as usize];
    }
}

/// Smooth cutoff: `1` for `u <= a`, `0` for `u >= b`, built from `exp(-1/u)`.
pub fn plateau(u: &Jet, a: f64, b: f64) -> Jet {
    let bump = |v: Jet| -> Jet {
        if v.constant_term() > 0.0 {
            v.recip().expect("positive").scale(-1.0).exp()
        } else {
            Jet::zero_in(&v.layout)
        }
    };
    let left = bump(u.scale(-1.0) + b);
    let right = bump(u.clone() - a);
    if right.is_exact_zero() {
        return Jet::constant_in(&u.layout, 1.0);
    }
    if left.is_exact_zero() {
        return left;
    }
    let denom = &left + &right;
    left.mul_unchecked(&denom.recip().expect("bump sum is positive on R"))
}

/// Scalar plateau, matching [`plateau`] on constant jets.
pub fn plateau_value(u: f64, a: f64, b: f64) -> f64 {
    let bump = |v: f64| if v > 0.0 { (-1.0 / v).exp() } else { 0.0 };
    let l = bump(b - u);
    l / (l + bump(u - a))
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet(m={}, r={}, {:?})", self.num_vars(), self.order(), self.coeffs)
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Jet) -> bool {
        self.num_vars() == other.num_vars()
            && self.order() == other.order()
            && self.coeffs == other.coeffs
    }
}

impl Serialize for Jet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Jet", 3)?;
        s.serialize_field("num_vars", &self.num_vars())?;
        s.serialize_field("order", &self.order())?;
        s.serialize_field("coeffs", &self.coeffs)?;
        s.end()
    }
}

// Operator overloads panic on shape mismatch; use `Jet::arith` for a checked variant.
macro_rules! jet_binop {
    ($trait:ident, $method:ident, $op:expr) => {
        impl $trait<&Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                self.arith(rhs, $op).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                (&self).$method(rhs)
            }
        }
    };
}

jet_binop!(Add, add, ArithOp::Add);
jet_binop!(Sub, sub, ArithOp::Sub);
jet_binop!(Mul, mul, ArithOp::Mul);
jet_binop!(Div, div, ArithOp::Div);

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.coeffs[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.coeffs[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Scalar for Jet {
    type Ctx = Arc<JetLayout>;

    fn ctx(&self) -> Arc<JetLayout> {
        self.layout.clone()
    }
    fn zero(ctx: &Arc<JetLayout>) -> Self {
        Jet::zero_in(ctx)
    }
    fn constant(ctx: &Arc<JetLayout>, value: f64) -> Self {
        Jet::constant_in(ctx, value)
    }
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn scale(&self, k: f64) -> Self {
        Jet::scale(self, k)
    }
    fn add_assign_ref(&mut self, other: &Self) {
        debug_assert_eq!(self.coeffs.len(), other.coeffs.len());
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
    }
    fn add_scaled(&mut self, k: f64, other: &Self) {
        debug_assert_eq!(self.coeffs.len(), other.coeffs.len());
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += k * b;
        }
    }
    fn add_product(&mut self, a: &Self, b: &Self) {
        assert_eq!(a.coeffs.len(), b.coeffs.len(), "jet shape mismatch");
        assert_eq!(self.coeffs.len(), a.coeffs.len(), "jet shape mismatch");
        mul_into(&self.layout, &a.coeffs, &b.coeffs, &mut self.coeffs);
    }
    fn try_recip(&self) -> Option<Self> {
        self.recip().ok()
    }
    fn exp_ref(&self) -> Self {
        self.exp()
    }
    fn value(&self) -> f64 {
        self.coeffs[0]
    }
    fn max_abs(&self) -> f64 {
        self.max_abs_coeff()
    }
    fn is_exact_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }
}

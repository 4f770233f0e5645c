//! Scalar abstraction shared by plain reals and jets.
//!
//! Forms, endomorphism-valued forms and the curvature pipeline are generic
//! over [`Scalar`], so pointwise checks (plain `f64`) and exterior-derivative
//! checks ([`crate::jet::Jet`]) run through one code path.

use std::fmt::Debug;

pub trait Scalar: Clone + Debug + Send + Sync + 'static {
    /// Shape information needed to build new values (unit for `f64`,
    /// the jet layout for jets).
    type Ctx: Clone + PartialEq + Debug + Send + Sync;

    fn ctx(&self) -> Self::Ctx;
    fn zero(ctx: &Self::Ctx) -> Self;
    fn constant(ctx: &Self::Ctx, value: f64) -> Self;

    fn add_ref(&self, other: &Self) -> Self;
    fn sub_ref(&self, other: &Self) -> Self;
    fn mul_ref(&self, other: &Self) -> Self;
    fn scale(&self, k: f64) -> Self;
    fn neg_ref(&self) -> Self {
        self.scale(-1.0)
    }

    fn add_assign_ref(&mut self, other: &Self);
    /// `self += k * other`
    fn add_scaled(&mut self, k: f64, other: &Self);
    /// `self += a * b`
    fn add_product(&mut self, a: &Self, b: &Self);

    /// Multiplicative inverse, `None` when the value is zero.
    fn try_recip(&self) -> Option<Self>;

    /// Exponential; always defined.
    fn exp_ref(&self) -> Self;

    /// Constant term (the value at the base point).
    fn value(&self) -> f64;
    /// Largest absolute coefficient.
    fn max_abs(&self) -> f64;
    /// True when every stored coefficient is exactly zero.
    fn is_exact_zero(&self) -> bool;
}

impl Scalar for f64 {
    type Ctx = ();

    fn ctx(&self) {}
    fn zero(_: &()) -> Self {
        0.0
    }
    fn constant(_: &(), value: f64) -> Self {
        value
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
        self * k
    }
    fn add_assign_ref(&mut self, other: &Self) {
        *self += other;
    }
    fn add_scaled(&mut self, k: f64, other: &Self) {
        *self += k * other;
    }
    fn add_product(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    fn try_recip(&self) -> Option<Self> {
        if *self == 0.0 {
            None
        } else {
            Some(1.0 / self)
        }
    }
    fn exp_ref(&self) -> Self {
        self.exp()
    }
    fn value(&self) -> f64 {
        *self
    }
    fn max_abs(&self) -> f64 {
        self.abs()
    }
    fn is_exact_zero(&self) -> bool {
        *self == 0.0
    }
}

//! Differential forms and endomorphism-valued forms at a point.
//!
//! Components are indexed by bitmasks: bit `i` set means `dx^i` is a factor,
//! coordinate 0 being `t`. A mask lists its covectors in increasing order,
//! so antisymmetry is structural. Mixed degrees live side by side in one
//! value, which is what inhomogeneous objects such as `exp(tr Q(R))` need.

use std::fmt;

use thiserror::Error;

use crate::jet::{Jet, JetError};
use crate::scalar::Scalar;

pub const MAX_DIM: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("dimension {0} is outside 1..={MAX_DIM}")]
    BadDim(usize),
    #[error("odd-degree component in an argument that must be even")]
    OddDegree,
    #[error("expected a form of degree {expected}, found degree {found}")]
    WrongDegree { expected: usize, found: usize },
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// Sign of `dx^a ∧ dx^b` relative to `dx^{a|b}`; zero when the masks overlap.
pub fn wedge_sign(a: u32, b: u32) -> f64 {
    if a & b != 0 {
        return 0.0;
    }
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        swaps += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn degree(mask: u32) -> usize {
    mask.count_ones() as usize
}

/// Increasing index list of a mask.
pub fn mask_indices(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask & (1 << i) != 0).collect()
}

pub fn mask_of(indices: &[usize]) -> u32 {
    indices.iter().fold(0, |m, &i| m | (1 << i))
}

/// All masks of degree `p` in dimension `n`, in increasing numeric order.
pub fn masks_of_degree(n: usize, p: usize) -> Vec<u32> {
    (0u32..(1 << n)).filter(|&m| degree(m) == p).collect()
}

fn check_dim(n: usize) -> Result<(), FormError> {
    if n == 0 || n > MAX_DIM {
        Err(FormError::BadDim(n))
    } else {
        Ok(())
    }
}

/// Scalar-valued form, possibly of mixed degree.
#[derive(Clone)]
pub struct Form<S: Scalar> {
    dim: usize,
    ctx: S::Ctx,
    coeffs: Vec<S>,
}

impl<S: Scalar> Form<S> {
    pub fn zero(dim: usize, ctx: &S::Ctx) -> Self {
        check_dim(dim).unwrap_or_else(|e| panic!("{e}"));
        Form {
            dim,
            ctx: ctx.clone(),
            coeffs: vec![S::zero(ctx); 1 << dim],
        }
    }

    pub fn one(dim: usize, ctx: &S::Ctx) -> Self {
        let mut f = Self::zero(dim, ctx);
        f.coeffs[0] = S::constant(ctx, 1.0);
        f
    }

    pub fn try_zero(dim: usize, ctx: &S::Ctx) -> Result<Self, FormError> {
        check_dim(dim)?;
        Ok(Self::zero(dim, ctx))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ctx(&self) -> &S::Ctx {
        &self.ctx
    }

    pub fn get(&self, mask: u32) -> &S {
        &self.coeffs[mask as usize]
    }

    pub fn set(&mut self, mask: u32, value: S) {
        self.coeffs[mask as usize] = value;
    }

    pub fn add_to(&mut self, mask: u32, k: f64, value: &S) {
        self.coeffs[mask as usize].add_scaled(k, value);
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    /// Keeps only the degree-`p` part.
    pub fn degree_part(&self, p: usize) -> Self {
        let mut out = Self::zero(self.dim, &self.ctx);
        for m in masks_of_degree(self.dim, p) {
            out.coeffs[m as usize] = self.coeffs[m as usize].clone();
        }
        out
    }

    /// Degrees with some nonzero coefficient.
    pub fn degrees_present(&self) -> Vec<usize> {
        let mut seen = vec![false; self.dim + 1];
        for (m, c) in self.coeffs.iter().enumerate() {
            if !c.is_exact_zero() {
                seen[degree(m as u32)] = true;
            }
        }
        (0..=self.dim).filter(|&p| seen[p]).collect()
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, FormError> {
        self.same_dim(other)?;
        Ok(self.zip(other, |a, b| a.add_ref(b)))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, FormError> {
        self.same_dim(other)?;
        Ok(self.zip(other, |a, b| a.sub_ref(b)))
    }

    pub fn scale(&self, k: f64) -> Self {
        Form {
            dim: self.dim,
            ctx: self.ctx.clone(),
            coeffs: self.coeffs.iter().map(|c| c.scale(k)).collect(),
        }
    }

    /// Multiplies every coefficient by a scalar.
    pub fn scale_by(&self, k: &S) -> Self {
        Form {
            dim: self.dim,
            ctx: self.ctx.clone(),
            coeffs: self.coeffs.iter().map(|c| c.mul_ref(k)).collect(),
        }
    }

    pub fn try_wedge(&self, other: &Self) -> Result<Self, FormError> {
        self.same_dim(other)?;
        let mut out = Self::zero(self.dim, &self.ctx);
        for (a, ca) in self.coeffs.iter().enumerate() {
            if ca.is_exact_zero() {
                continue;
            }
            for (b, cb) in other.coeffs.iter().enumerate() {
                if a & b != 0 || cb.is_exact_zero() {
                    continue;
                }
                let sign = wedge_sign(a as u32, b as u32);
                let prod = ca.mul_ref(cb);
                out.coeffs[a | b].add_scaled(sign, &prod);
            }
        }
        Ok(out)
    }

    pub fn wedge(&self, other: &Self) -> Self {
        self.try_wedge(other).unwrap_or_else(|e| panic!("{e}"))
    }

    /// `exp(a) = Σ a^k / k!` for a form of even degrees only.
    pub fn exp_even(&self) -> Result<Self, FormError> {
        for p in self.degrees_present() {
            if p % 2 == 1 {
                return Err(FormError::OddDegree);
            }
        }
        let base = self.coeffs[0].exp_ref();
        let mut nil = self.clone();
        nil.coeffs[0] = S::zero(&self.ctx);
        let mut out = Self::one(self.dim, &self.ctx);
        let mut power = Self::one(self.dim, &self.ctx);
        for k in 1..=self.dim / 2 {
            power = power.wedge(&nil).scale(1.0 / k as f64);
            if power.is_exact_zero() {
                break;
            }
            out = out.zip(&power, |a, b| a.add_ref(b));
        }
        Ok(out.scale_by(&base))
    }

    pub fn is_exact_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_exact_zero())
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.max_abs()).fold(0.0, f64::max)
    }

    /// Drops every component containing `dt` (pullback to `t = const`).
    pub fn pullback_boundary(&self) -> Self {
        let mut out = self.clone();
        for (m, c) in out.coeffs.iter_mut().enumerate() {
            if m & 1 != 0 {
                *c = S::zero(&self.ctx);
            }
        }
        out
    }

    /// Coefficients expressed in a new coframe: the component on the frame
    /// vectors `J` is `Σ_I α_I det(E[I, J])`, where column `j` of `frame`
    /// holds the coordinates of the `j`-th frame vector.
    pub fn in_frame(&self, frame: &[Vec<f64>]) -> Self {
        let mut out = Self::zero(self.dim, &self.ctx);
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_exact_zero() {
                continue;
            }
            for j in 0..(1u32 << self.dim) {
                if degree(j) != degree(i as u32) {
                    continue;
                }
                let w = minor(frame, i as u32, j);
                if w != 0.0 {
                    out.coeffs[j as usize].add_scaled(w, c);
                }
            }
        }
        out
    }

    pub fn map_scalars<T: Scalar>(&self, ctx: &T::Ctx, f: impl Fn(&S) -> T) -> Form<T> {
        Form {
            dim: self.dim,
            ctx: ctx.clone(),
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    fn same_dim(&self, other: &Self) -> Result<(), FormError> {
        if self.dim != other.dim {
            Err(FormError::DimMismatch(self.dim, other.dim))
        } else {
            Ok(())
        }
    }

    fn zip(&self, other: &Self, f: impl Fn(&S, &S) -> S) -> Self {
        Form {
            dim: self.dim,
            ctx: self.ctx.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }
}

impl<S: Scalar> fmt::Debug for Form<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_exact_zero() {
                m.entry(&format_args!("{:0w$b}", i, w = self.dim), c);
            }
        }
        m.finish()
    }
}

/// Determinant of the square submatrix of `frame` with rows `rows` and
/// columns `cols` (both bitmasks of equal popcount).
pub fn minor(frame: &[Vec<f64>], rows: u32, cols: u32) -> f64 {
    let r = mask_indices(rows);
    let c = mask_indices(cols);
    let k = r.len();
    if k == 0 {
        return 1.0;
    }
    let mut a: Vec<Vec<f64>> = r
        .iter()
        .map(|&ri| c.iter().map(|&cj| frame[ri][cj]).collect())
        .collect();
    let mut det = 1.0;
    for col in 0..k {
        let piv = (col..k)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        if a[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= a[col][col];
        for row in col + 1..k {
            let f = a[row][col] / a[col][col];
            for j in col..k {
                a[row][j] -= f * a[col][j];
            }
        }
    }
    det
}

impl Form<Jet> {
    /// Exterior derivative. The result has jet order one less than `self`.
    pub fn d(&self) -> Result<Form<Jet>, FormError> {
        let proto = self.coeffs[0].partial(0)?;
        let ctx = proto.layout().clone();
        let mut out = Form::<Jet>::zero(self.dim, &ctx);
        for (m, c) in self.coeffs.iter().enumerate() {
            if c.is_exact_zero() {
                continue;
            }
            for i in 0..self.dim {
                if m & (1 << i) != 0 {
                    continue;
                }
                // moving dx^i past the lower covectors of the mask
                let sign = wedge_sign(1 << i, m as u32);
                out.coeffs[m | (1 << i)].add_scaled(sign, &c.partial(i)?);
            }
        }
        Ok(out)
    }

    pub fn truncate(&self, order: usize) -> Form<Jet> {
        let coeffs: Vec<Jet> = self.coeffs.iter().map(|c| c.truncate(order)).collect();
        Form {
            dim: self.dim,
            ctx: coeffs[0].layout().clone(),
            coeffs,
        }
    }

    /// Values at the base point.
    pub fn values(&self) -> Form<f64> {
        self.map_scalars(&(), |c| c.constant_term())
    }
}

/// Endomorphism-valued form: one `dim × dim` matrix per mask, row-major,
/// `B[row][col]` being the `row`-component of `B(e_col)`. Absent blocks are
/// zero.
#[derive(Clone)]
pub struct EndForm<S: Scalar> {
    dim: usize,
    ctx: S::Ctx,
    blocks: Vec<Vec<S>>,
}

impl<S: Scalar> EndForm<S> {
    pub fn zero(dim: usize, ctx: &S::Ctx) -> Self {
        check_dim(dim).unwrap_or_else(|e| panic!("{e}"));
        EndForm {
            dim,
            ctx: ctx.clone(),
            blocks: vec![Vec::new(); 1 << dim],
        }
    }

    /// Degree-0 identity endomorphism.
    pub fn identity(dim: usize, ctx: &S::Ctx) -> Self {
        let mut e = Self::zero(dim, ctx);
        for i in 0..dim {
            e.set(0, i, i, S::constant(ctx, 1.0));
        }
        e
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ctx(&self) -> &S::Ctx {
        &self.ctx
    }

    pub fn block(&self, mask: u32) -> Option<&[S]> {
        let b = &self.blocks[mask as usize];
        if b.is_empty() {
            None
        } else {
            Some(b)
        }
    }

    fn block_mut(&mut self, mask: u32) -> &mut Vec<S> {
        let n = self.dim;
        let b = &mut self.blocks[mask as usize];
        if b.is_empty() {
            *b = vec![S::zero(&self.ctx); n * n];
        }
        b
    }

    pub fn entry(&self, mask: u32, row: usize, col: usize) -> S {
        match self.block(mask) {
            Some(b) => b[row * self.dim + col].clone(),
            None => S::zero(&self.ctx),
        }
    }

    pub fn set(&mut self, mask: u32, row: usize, col: usize, value: S) {
        let n = self.dim;
        self.block_mut(mask)[row * n + col] = value;
    }

    pub fn add_entry(&mut self, mask: u32, row: usize, col: usize, k: f64, value: &S) {
        let n = self.dim;
        self.block_mut(mask)[row * n + col].add_scaled(k, value);
    }

    /// Masks with a stored block.
    pub fn masks(&self) -> impl Iterator<Item = u32> + '_ {
        self.blocks
            .iter()
            .enumerate()
            .filter(|(_, b)| !b.is_empty())
            .map(|(m, _)| m as u32)
    }

    pub fn degree_part(&self, p: usize) -> Self {
        let mut out = Self::zero(self.dim, &self.ctx);
        for m in self.masks() {
            if degree(m) == p {
                out.blocks[m as usize] = self.blocks[m as usize].clone();
            }
        }
        out
    }

    pub fn degrees_present(&self) -> Vec<usize> {
        let mut seen = vec![false; self.dim + 1];
        for m in self.masks() {
            if self.blocks[m as usize].iter().any(|c| !c.is_exact_zero()) {
                seen[degree(m)] = true;
            }
        }
        (0..=self.dim).filter(|&p| seen[p]).collect()
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, FormError> {
        self.same_dim(other)?;
        let mut out = self.clone();
        out.add_assign(1.0, other);
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, FormError> {
        self.same_dim(other)?;
        let mut out = self.clone();
        out.add_assign(-1.0, other);
        Ok(out)
    }

    /// `self += k * other`
    pub fn add_assign(&mut self, k: f64, other: &Self) {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        for m in 0..other.blocks.len() {
            if other.blocks[m].is_empty() {
                continue;
            }
            if self.blocks[m].is_empty() {
                self.blocks[m] = other.blocks[m].iter().map(|c| c.scale(k)).collect();
            } else {
                for (a, b) in self.blocks[m].iter_mut().zip(&other.blocks[m]) {
                    a.add_scaled(k, b);
                }
            }
        }
    }

    pub fn scale(&self, k: f64) -> Self {
        EndForm {
            dim: self.dim,
            ctx: self.ctx.clone(),
            blocks: self
                .blocks
                .iter()
                .map(|b| b.iter().map(|c| c.scale(k)).collect())
                .collect(),
        }
    }

    /// Product `ω⊗B · ω'⊗B' = (ω∧ω') ⊗ BB'`, extended bilinearly.
    pub fn try_mul(&self, other: &Self) -> Result<Self, FormError> {
        self.same_dim(other)?;
        let n = self.dim;
        let mut out = Self::zero(n, &self.ctx);
        for a in self.masks() {
            let ba = &self.blocks[a as usize];
            for b in other.masks() {
                if a & b != 0 {
                    continue;
                }
                let sign = wedge_sign(a, b);
                let bb = &other.blocks[b as usize];
                let prod = matmul(n, ba, bb, &self.ctx);
                let target = out.block_mut(a | b);
                for (t, p) in target.iter_mut().zip(&prod) {
                    t.add_scaled(sign, p);
                }
            }
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.try_mul(other).unwrap_or_else(|e| panic!("{e}"))
    }

    /// Coefficient-wise matrix trace.
    pub fn trace(&self) -> Form<S> {
        let n = self.dim;
        let mut out = Form::zero(n, &self.ctx);
        for m in self.masks() {
            let b = &self.blocks[m as usize];
            let mut t = S::zero(&self.ctx);
            for i in 0..n {
                t.add_assign_ref(&b[i * n + i]);
            }
            out.set(m, t);
        }
        out
    }

    /// Transposes the endomorphism part.
    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zero(n, &self.ctx);
        for m in self.masks() {
            let b = &self.blocks[m as usize];
            let t = out.block_mut(m);
            for r in 0..n {
                for c in 0..n {
                    t[c * n + r] = b[r * n + c].clone();
                }
            }
        }
        out
    }

    /// Drops every component whose form part contains `dt`; the matrix part
    /// is kept in full.
    pub fn pullback_boundary(&self) -> Self {
        let mut out = self.clone();
        for (m, b) in out.blocks.iter_mut().enumerate() {
            if m & 1 != 0 {
                b.clear();
            }
        }
        out
    }

    /// Re-expresses both slots in the frame whose `j`-th vector has
    /// coordinates `frame[.][j]`: the form part through minors, the
    /// endomorphism part as `E⁻¹ B E`.
    pub fn in_frame(&self, frame: &[Vec<f64>], frame_inv: &[Vec<f64>]) -> Self {
        let n = self.dim;
        let mut out = Self::zero(n, &self.ctx);
        for i in self.masks() {
            let b = &self.blocks[i as usize];
            // conjugate once per source mask
            let mut conj = vec![S::zero(&self.ctx); n * n];
            let mut be = vec![S::zero(&self.ctx); n * n];
            for r in 0..n {
                for c in 0..n {
                    for k in 0..n {
                        if frame[k][c] != 0.0 {
                            be[r * n + c].add_scaled(frame[k][c], &b[r * n + k]);
                        }
                    }
                }
            }
            for r in 0..n {
                for c in 0..n {
                    for k in 0..n {
                        if frame_inv[r][k] != 0.0 {
                            conj[r * n + c].add_scaled(frame_inv[r][k], &be[k * n + c]);
                        }
                    }
                }
            }
            for j in 0..(1u32 << n) {
                if degree(j) != degree(i) {
                    continue;
                }
                let w = minor(frame, i, j);
                if w == 0.0 {
                    continue;
                }
                let t = out.block_mut(j);
                for (a, c) in t.iter_mut().zip(&conj) {
                    a.add_scaled(w, c);
                }
            }
        }
        out
    }

    pub fn map_scalars<T: Scalar>(&self, ctx: &T::Ctx, f: impl Fn(&S) -> T) -> EndForm<T> {
        EndForm {
            dim: self.dim,
            ctx: ctx.clone(),
            blocks: self
                .blocks
                .iter()
                .map(|b| b.iter().map(&f).collect())
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| b.iter())
            .map(|c| c.max_abs())
            .fold(0.0, f64::max)
    }

    pub fn is_exact_zero(&self) -> bool {
        self.blocks.iter().flatten().all(|c| c.is_exact_zero())
    }

    fn same_dim(&self, other: &Self) -> Result<(), FormError> {
        if self.dim != other.dim {
            Err(FormError::DimMismatch(self.dim, other.dim))
        } else {
            Ok(())
        }
    }
}

impl<S: Scalar> fmt::Debug for EndForm<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for mask in self.masks() {
            m.entry(
                &format_args!("{:0w$b}", mask, w = self.dim),
                &self.blocks[mask as usize],
            );
        }
        m.finish()
    }
}

fn matmul<S: Scalar>(n: usize, a: &[S], b: &[S], ctx: &S::Ctx) -> Vec<S> {
    let mut out = vec![S::zero(ctx); n * n];
    for r in 0..n {
        for k in 0..n {
            let ark = &a[r * n + k];
            if ark.is_exact_zero() {
                continue;
            }
            for c in 0..n {
                out[r * n + c].add_product(ark, &b[k * n + c]);
            }
        }
    }
    out
}

impl EndForm<Jet> {
    /// Component-wise exterior derivative (order drops by one).
    pub fn d(&self) -> Result<EndForm<Jet>, FormError> {
        let n = self.dim;
        let proto = Jet::zero_in(&self.ctx).partial(0)?;
        let ctx = proto.layout().clone();
        let mut out = EndForm::<Jet>::zero(n, &ctx);
        for m in self.masks() {
            let b = &self.blocks[m as usize];
            for i in 0..n {
                if m & (1 << i) != 0 {
                    continue;
                }
                let sign = wedge_sign(1 << i, m);
                for e in 0..n * n {
                    if b[e].is_exact_zero() {
                        continue;
                    }
                    let p = b[e].partial(i)?;
                    out.add_entry(m | (1 << i), e / n, e % n, sign, &p);
                }
            }
        }
        Ok(out)
    }

    pub fn truncate(&self, order: usize) -> EndForm<Jet> {
        let layout = Jet::zero_in(&self.ctx).truncate(order).layout().clone();
        EndForm {
            dim: self.dim,
            ctx: layout,
            blocks: self
                .blocks
                .iter()
                .map(|b| b.iter().map(|c| c.truncate(order)).collect())
                .collect(),
        }
    }

    pub fn values(&self) -> EndForm<f64> {
        self.map_scalars(&(), |c| c.constant_term())
    }
}

/// Ring operations shared by forms, endomorphism-valued forms and
/// polynomials over them.
pub trait Algebra: Clone {
    fn zero_like(&self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn scale(&self, k: f64) -> Self;
    fn is_exact_zero(&self) -> bool;
}

impl<S: Scalar> Algebra for Form<S> {
    fn zero_like(&self) -> Self {
        Form::zero(self.dim, &self.ctx)
    }
    fn add(&self, other: &Self) -> Self {
        self.try_add(other).unwrap_or_else(|e| panic!("{e}"))
    }
    fn mul(&self, other: &Self) -> Self {
        self.wedge(other)
    }
    fn scale(&self, k: f64) -> Self {
        Form::scale(self, k)
    }
    fn is_exact_zero(&self) -> bool {
        Form::is_exact_zero(self)
    }
}

impl<S: Scalar> Algebra for EndForm<S> {
    fn zero_like(&self) -> Self {
        EndForm::zero(self.dim, &self.ctx)
    }
    fn add(&self, other: &Self) -> Self {
        self.try_add(other).unwrap_or_else(|e| panic!("{e}"))
    }
    fn mul(&self, other: &Self) -> Self {
        EndForm::mul(self, other)
    }
    fn scale(&self, k: f64) -> Self {
        EndForm::scale(self, k)
    }
    fn is_exact_zero(&self) -> bool {
        EndForm::is_exact_zero(self)
    }
}

/// Polynomial `Σ c_k s^k` with coefficients in an [`Algebra`].
#[derive(Clone, Debug)]
pub struct SPoly<T> {
    coeffs: Vec<T>,
}

impl<T: Algebra> SPoly<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty(), "an s-polynomial needs at least one coefficient");
        SPoly { coeffs }
    }

    pub fn constant(c: T) -> Self {
        SPoly { coeffs: vec![c] }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Highest power with a nonzero coefficient (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        (0..self.coeffs.len())
            .rev()
            .find(|&k| !self.coeffs[k].is_exact_zero())
            .unwrap_or(0)
    }

    pub fn eval(&self, s: f64) -> T {
        let mut acc = self.coeffs[self.coeffs.len() - 1].clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc = acc.scale(s).add(c);
        }
        acc
    }

    /// `∫_0^1 p(s) ds`, exact from the coefficients.
    pub fn integrate_unit(&self) -> T {
        let mut acc = self.coeffs[0].zero_like();
        for (k, c) in self.coeffs.iter().enumerate() {
            acc = acc.add(&c.scale(1.0 / (k + 1) as f64));
        }
        acc
    }

    pub fn map<U: Algebra>(&self, f: impl Fn(&T) -> U) -> SPoly<U> {
        SPoly {
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    fn trimmed(mut self) -> Self {
        while self.coeffs.len() > 1 && self.coeffs.last().unwrap().is_exact_zero() {
            self.coeffs.pop();
        }
        self
    }
}

impl<T: Algebra> Algebra for SPoly<T> {
    fn zero_like(&self) -> Self {
        SPoly::constant(self.coeffs[0].zero_like())
    }
    fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let zero = self.coeffs[0].zero_like();
        let coeffs = (0..len)
            .map(|k| {
                let a = self.coeffs.get(k).unwrap_or(&zero);
                let b = other.coeffs.get(k).unwrap_or(&zero);
                a.add(b)
            })
            .collect();
        SPoly { coeffs }.trimmed()
    }
    fn mul(&self, other: &Self) -> Self {
        let zero = self.coeffs[0].zero_like();
        let mut coeffs = vec![zero; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_exact_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_exact_zero() {
                    continue;
                }
                coeffs[i + j] = coeffs[i + j].add(&a.mul(b));
            }
        }
        SPoly { coeffs }.trimmed()
    }
    fn scale(&self, k: f64) -> Self {
        self.map(|c| c.scale(k))
    }
    fn is_exact_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_exact_zero())
    }
}

/// `Σ_m coeffs[m] x^m` with `x^0 = one`. Stops early once the powers of
/// `x` vanish, which happens after the form degree exceeds the dimension.
pub fn poly_apply<T: Algebra>(coeffs: &[f64], x: &T, one: &T) -> T {
    let mut acc = one.zero_like();
    let mut power = one.clone();
    for (m, &c) in coeffs.iter().enumerate() {
        if m > 0 {
            power = power.mul(x);
            if power.is_exact_zero() {
                break;
            }
        }
        if c != 0.0 {
            acc = acc.add(&power.scale(c));
        }
    }
    acc
}

/// Applies a polynomial to a curvature-like endomorphism-valued form.
pub fn series_apply<S: Scalar>(coeffs: &[f64], r: &EndForm<S>) -> Result<EndForm<S>, FormError> {
    if r.degrees_present().iter().any(|p| p % 2 == 1) {
        return Err(FormError::OddDegree);
    }
    Ok(poly_apply(coeffs, r, &EndForm::identity(r.dim, &r.ctx)))
}

/// [`series_apply`] over an s-polynomial of curvature forms.
pub fn series_apply_poly<S: Scalar>(
    coeffs: &[f64],
    r: &SPoly<EndForm<S>>,
) -> Result<SPoly<EndForm<S>>, FormError> {
    for c in r.coeffs() {
        if c.degrees_present().iter().any(|p| p % 2 == 1) {
            return Err(FormError::OddDegree);
        }
    }
    let proto = &r.coeffs()[0];
    let one = SPoly::constant(EndForm::identity(proto.dim, &proto.ctx));
    Ok(poly_apply(coeffs, r, &one))
}

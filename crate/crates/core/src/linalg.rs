//! Small dense matrices over [`Scalar`], row-major `n × n` slices.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::scalar::Scalar;

/// Gauss-Jordan inverse with partial pivoting on the base-point values.
/// Returns `None` for a singular matrix.
pub fn invert<S: Scalar>(n: usize, a: &[S]) -> Option<Vec<S>> {
    let ctx = a[0].ctx();
    let mut m: Vec<S> = a.to_vec();
    let mut inv: Vec<S> = (0..n * n)
        .map(|e| S::constant(&ctx, if e / n == e % n { 1.0 } else { 0.0 }))
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| {
            m[x * n + col]
                .value()
                .abs()
                .total_cmp(&m[y * n + col].value().abs())
        })?;
        if m[piv * n + col].value() == 0.0 {
            return None;
        }
        if piv != col {
            for j in 0..n {
                m.swap(piv * n + j, col * n + j);
                inv.swap(piv * n + j, col * n + j);
            }
        }
        let r = m[col * n + col].try_recip()?;
        for j in 0..n {
            m[col * n + j] = m[col * n + j].mul_ref(&r);
            inv[col * n + j] = inv[col * n + j].mul_ref(&r);
        }
        for row in 0..n {
            if row == col || m[row * n + col].is_exact_zero() {
                continue;
            }
            let f = m[row * n + col].clone();
            for j in 0..n {
                let mv = f.mul_ref(&m[col * n + j]);
                m[row * n + j] = m[row * n + j].sub_ref(&mv);
                let iv = f.mul_ref(&inv[col * n + j]);
                inv[row * n + j] = inv[row * n + j].sub_ref(&iv);
            }
        }
    }
    Some(inv)
}

/// Determinant by elimination with partial pivoting on base-point values.
pub fn determinant<S: Scalar>(n: usize, a: &[S]) -> S {
    let ctx = a[0].ctx();
    let mut m = a.to_vec();
    let mut det = S::constant(&ctx, 1.0);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| {
                m[x * n + col]
                    .value()
                    .abs()
                    .total_cmp(&m[y * n + col].value().abs())
            })
            .expect("non-empty range");
        if piv != col {
            for j in 0..n {
                m.swap(piv * n + j, col * n + j);
            }
            det = det.neg_ref();
        }
        det = det.mul_ref(&m[col * n + col]);
        let Some(r) = m[col * n + col].try_recip() else {
            return S::zero(&ctx);
        };
        for row in col + 1..n {
            if m[row * n + col].is_exact_zero() {
                continue;
            }
            let f = m[row * n + col].mul_ref(&r);
            for j in col..n {
                let v = f.mul_ref(&m[col * n + j]);
                m[row * n + j] = m[row * n + j].sub_ref(&v);
            }
        }
    }
    det
}

pub fn matmul<S: Scalar>(n: usize, a: &[S], b: &[S]) -> Vec<S> {
    let ctx = a[0].ctx();
    let mut out = vec![S::zero(&ctx); n * n];
    for r in 0..n {
        for k in 0..n {
            for c in 0..n {
                out[r * n + c].add_product(&a[r * n + k], &b[k * n + c]);
            }
        }
    }
    out
}

pub fn to_dmatrix(n: usize, a: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(n, n, a)
}

/// Smallest eigenvalue of the symmetric part of `a`.
pub fn min_sym_eigenvalue(n: usize, a: &[f64]) -> f64 {
    let m = to_dmatrix(n, a);
    let sym = (&m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues.min()
}

/// Solves `A v = λ B v` for symmetric `A` and positive-definite `B`.
/// Eigenvalues ascend; eigenvectors are the columns of the returned matrix,
/// normalized so that `Vᵀ B V = I`.
pub fn generalized_symmetric_eigen(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
) -> Option<(Vec<f64>, DMatrix<f64>)> {
    let chol = b.clone().cholesky()?;
    let l = chol.l();
    let linv = l.clone().try_inverse()?;
    let c = &linv * a * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let y = DMatrix::from_fn(a.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    Some((values, linv.transpose() * y))
}

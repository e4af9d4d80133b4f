//! Small dense-vector helpers on complex coefficient vectors.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C = Complex64;

pub const ZERO: C = C::new(0.0, 0.0);
pub const ONE: C = C::new(1.0, 0.0);

/// `<a, b> = sum a_i conj(b_i)`, linear in the first slot.
pub fn inner(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

pub fn norm(a: &[C]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(a: &[C]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn axpy(alpha: C, x: &[C], y: &mut [C]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sub(a: &[C], b: &[C]) -> Vec<C> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(alpha: C, a: &[C]) -> Vec<C> {
    a.iter().map(|x| alpha * x).collect()
}

pub fn unit(dim: usize, i: usize) -> Vec<C> {
    let mut v = vec![ZERO; dim];
    v[i] = ONE;
    v
}

pub fn dist(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// Modified Gram-Schmidt with one reorthogonalisation pass. Candidates whose
/// residual falls below `tol` times their original norm are dropped, so the
/// output spans the same space with no rank-deficient columns. The returned
/// indices name the candidate each output column came from.
pub fn orthonormalize(candidates: &[Vec<C>], tol: f64) -> (Vec<Vec<C>>, Vec<usize>) {
    let mut basis: Vec<Vec<C>> = Vec::new();
    let mut origin = Vec::new();
    for (k, cand) in candidates.iter().enumerate() {
        let n0 = norm(cand);
        if n0 == 0.0 {
            continue;
        }
        let mut v = cand.clone();
        for _ in 0..2 {
            for q in &basis {
                let c = inner(&v, q);
                axpy(-c, q, &mut v);
            }
        }
        let n1 = norm(&v);
        if n1 <= tol * n0 {
            continue;
        }
        basis.push(scale(C::new(1.0 / n1, 0.0), &v));
        origin.push(k);
    }
    (basis, origin)
}

pub fn to_dvector(v: &[C]) -> DVector<C> {
    DVector::from_column_slice(v)
}

/// Columns as a dense matrix.
pub fn columns_to_matrix(dim: usize, cols: &[Vec<C>]) -> DMatrix<C> {
    DMatrix::from_fn(dim, cols.len(), |i, j| cols[j][i])
}

/// Principal-branch integer power that also accepts negative exponents.
pub fn powi(z: C, n: i64) -> C {
    if n >= 0 {
        z.powu(n as u32)
    } else {
        z.inv().powu((-n) as u32)
    }
}

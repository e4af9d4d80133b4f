//! Finite matrix realizations of weighted composition operators, their
//! adjoints, iterates, Gram diagonals and Cauchy duals.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{Image, SelfMapSystem};
use crate::linalg::{norm, C, ZERO};

/// A finite matrix in a labelled basis.
///
/// `col_exact[j]` records that the column `T e_j` agrees with the operator on
/// the full space; `row_exact[i]` records the same for `T* e_i`. The valid core
/// is the set where both hold.
#[derive(Clone, Debug)]
pub struct TruncatedOperator {
    basis: Vec<String>,
    cols: Vec<Vec<(usize, C)>>,
    col_exact: Vec<bool>,
    row_exact: Vec<bool>,
}

/// Result of applying an operator, with a flag raised when the input touched
/// a column that is not exact.
#[derive(Clone, Debug)]
pub struct Applied {
    pub vector: Vec<C>,
    pub degraded: bool,
}

impl TruncatedOperator {
    pub fn from_columns(
        basis: Vec<String>,
        cols: Vec<Vec<(usize, C)>>,
        col_exact: Vec<bool>,
        row_exact: Vec<bool>,
    ) -> Self {
        let n = basis.len();
        assert!(cols.len() == n && col_exact.len() == n && row_exact.len() == n);
        Self { basis, cols, col_exact, row_exact }
    }

    /// Every entry exact: a genuinely finite-dimensional operator.
    pub fn from_dense(basis: Vec<String>, m: &DMatrix<C>) -> Self {
        let n = basis.len();
        assert_eq!((m.nrows(), m.ncols()), (n, n));
        let cols = (0..n)
            .map(|j| (0..n).filter(|&i| m[(i, j)] != ZERO).map(|i| (i, m[(i, j)])).collect())
            .collect();
        Self::from_columns(basis, cols, vec![true; n], vec![true; n])
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[String] {
        &self.basis
    }

    pub fn column(&self, j: usize) -> &[(usize, C)] {
        &self.cols[j]
    }

    pub fn col_exact(&self) -> &[bool] {
        &self.col_exact
    }

    pub fn row_exact(&self) -> &[bool] {
        &self.row_exact
    }

    pub fn valid_core(&self) -> Vec<bool> {
        self.col_exact.iter().zip(&self.row_exact).map(|(a, b)| *a && *b).collect()
    }

    pub fn entry(&self, i: usize, j: usize) -> C {
        self.cols[j].iter().find(|(r, _)| *r == i).map_or(ZERO, |(_, v)| *v)
    }

    pub fn to_dense(&self) -> DMatrix<C> {
        let n = self.dim();
        let mut m = DMatrix::from_element(n, n, ZERO);
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, v) in col {
                m[(i, j)] += v;
            }
        }
        m
    }

    /// Conjugate transpose; column and row exactness swap roles.
    pub fn adjoint(&self) -> Self {
        let n = self.dim();
        let mut cols = vec![Vec::new(); n];
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, v) in col {
                cols[i].push((j, v.conj()));
            }
        }
        Self {
            basis: self.basis.clone(),
            cols,
            col_exact: self.row_exact.clone(),
            row_exact: self.col_exact.clone(),
        }
    }

    pub fn apply(&self, x: &[C]) -> Applied {
        let mut out = vec![ZERO; self.dim()];
        let mut degraded = false;
        for (j, &xj) in x.iter().enumerate() {
            if xj == ZERO {
                continue;
            }
            degraded |= !self.col_exact[j];
            for &(i, v) in &self.cols[j] {
                out[i] += v * xj;
            }
        }
        Applied { vector: out, degraded }
    }

    pub fn power_apply(&self, n: usize, x: &[C]) -> Applied {
        let mut cur = Applied { vector: x.to_vec(), degraded: false };
        for _ in 0..n {
            let next = self.apply(&cur.vector);
            cur = Applied { vector: next.vector, degraded: cur.degraded || next.degraded };
        }
        cur
    }

    /// Columns have pairwise disjoint supports, so `T*T` is diagonal.
    pub fn has_disjoint_columns(&self) -> bool {
        let mut owner = vec![usize::MAX; self.dim()];
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, v) in col {
                if v == ZERO {
                    continue;
                }
                if owner[i] != usize::MAX && owner[i] != j {
                    return false;
                }
                owner[i] = j;
            }
        }
        true
    }

    fn column_mass(&self, j: usize) -> f64 {
        self.cols[j].iter().map(|(_, v)| v.norm_sqr()).sum()
    }
}

/// `C_{phi,w}` on the window: column `x` is `sum_{y in phi^-1(x)} w(y) e_y`.
pub fn composition_operator(system: &SelfMapSystem) -> TruncatedOperator {
    let n = system.len();
    let cols = (0..n)
        .map(|x| system.preimages(x).iter().map(|&y| (y, system.weight(y))).collect())
        .collect();
    let col_exact = (0..n).map(|x| system.preimages_complete(x)).collect();
    let row_exact = (0..n).map(|x| system.image_known(x)).collect();
    TruncatedOperator::from_columns(system.labels().to_vec(), cols, col_exact, row_exact)
}

/// Closed form of `C*^n e_x`: the vertex reached and the conjugated weight product.
/// `None` when the orbit leaves the window; `Some((None, _))` when it passes a root.
pub fn adjoint_power_closed_form(system: &SelfMapSystem, x: usize, n: usize) -> Option<(Option<usize>, C)> {
    let mut y = x;
    let mut coef = C::new(1.0, 0.0);
    for _ in 0..n {
        coef *= system.weight(y).conj();
        match system.image(y) {
            Image::Vertex(z) => y = z,
            Image::Root => return Some((None, ZERO)),
            Image::Beyond => return None,
        }
    }
    Some((Some(y), coef))
}

/// Closed form of `C^n e_x` as `(y, w(y) w(phi(y)) ... w(phi^(n-1)(y)))` over
/// `y in phi^-n(x)`. `None` when some preimage layer is incomplete.
pub fn power_closed_form(system: &SelfMapSystem, x: usize, n: usize) -> Option<Vec<(usize, C)>> {
    let mut layer = vec![(x, C::new(1.0, 0.0))];
    for _ in 0..n {
        let mut next = Vec::new();
        for (y, c) in layer {
            if system.is_open(y) {
                return None;
            }
            for &z in system.preimages(y) {
                next.push((z, c * system.weight(z)));
            }
        }
        layer = next;
    }
    Some(layer)
}

#[derive(Clone, Debug)]
pub struct GramDiagonal {
    /// `sum_{y in phi^-1(x)} |w(y)|^2` at each vertex.
    pub values: Vec<f64>,
    /// Preimages of the vertex were not all materialized.
    pub degraded: Vec<bool>,
    /// Largest off-diagonal modulus of `T*T` among core vertices.
    pub offdiag_residual: f64,
}

pub fn gram_diagonal(system: &SelfMapSystem) -> GramDiagonal {
    let t = composition_operator(system);
    let core = t.valid_core();
    let values = (0..system.len()).map(|x| system.preimage_mass(x)).collect();
    let degraded = (0..system.len()).map(|x| system.is_open(x)).collect();
    GramDiagonal { values, degraded, offdiag_residual: gram_offdiagonal(&t, &core) }
}

/// `max |(T*T)_{ij}|` over `i != j` with both indices in `mask`.
pub fn gram_offdiagonal(t: &TruncatedOperator, mask: &[bool]) -> f64 {
    let mut rows: Vec<Vec<(usize, C)>> = vec![Vec::new(); t.dim()];
    for j in 0..t.dim() {
        for &(i, v) in t.column(j) {
            rows[i].push((j, v));
        }
    }
    let mut worst = 0.0f64;
    let mut acc = std::collections::HashMap::new();
    for row in &rows {
        for &(a, va) in row {
            for &(b, vb) in row {
                if a != b && mask[a] && mask[b] {
                    *acc.entry((a, b)).or_insert(ZERO) += va.conj() * vb;
                }
            }
        }
    }
    for v in acc.values() {
        worst = worst.max(v.norm());
    }
    worst
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LowerBoundMethod {
    GramDiagonal,
    SmallestSingularValue,
}

#[derive(Clone, Copy, Debug)]
pub struct LeftInvertibility {
    pub invertible: bool,
    pub lower_bound: f64,
    pub method: LowerBoundMethod,
}

/// Core-level left-invertibility certificate.
pub fn is_left_invertible(t: &TruncatedOperator, tol: f64) -> LeftInvertibility {
    let core: Vec<usize> = (0..t.dim()).filter(|&j| t.col_exact()[j]).collect();
    if t.has_disjoint_columns() {
        let bound = core.iter().map(|&j| t.column_mass(j)).fold(f64::INFINITY, f64::min);
        let bound = if core.is_empty() { 0.0 } else { bound };
        return LeftInvertibility { invertible: bound >= tol, lower_bound: bound, method: LowerBoundMethod::GramDiagonal };
    }
    let dense = t.to_dense();
    let sub = DMatrix::from_fn(t.dim(), core.len(), |i, k| dense[(i, core[k])]);
    let sv = sub.singular_values();
    let bound = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let bound = if core.is_empty() { 0.0 } else { bound };
    LeftInvertibility { invertible: bound >= tol, lower_bound: bound, method: LowerBoundMethod::SmallestSingularValue }
}

fn dual_row_exact(t: &TruncatedOperator) -> Vec<bool> {
    let mut row_exact = t.row_exact().to_vec();
    for j in 0..t.dim() {
        if !t.col_exact()[j] {
            for &(i, _) in t.column(j) {
                row_exact[i] = false;
            }
        }
    }
    row_exact
}

/// `T' = T (T*T)^-1`. Uses columnwise scaling when `T*T` is diagonal and the
/// dense path otherwise.
pub fn cauchy_dual_direct(t: &TruncatedOperator) -> Result<TruncatedOperator> {
    if !t.has_disjoint_columns() {
        return cauchy_dual_dense(t);
    }
    let mut cols = Vec::with_capacity(t.dim());
    for j in 0..t.dim() {
        let mass = t.column_mass(j);
        if mass == 0.0 {
            if t.col_exact()[j] {
                return Err(Error::SingularDual { vertex: t.basis()[j].clone() });
            }
            cols.push(Vec::new());
            continue;
        }
        cols.push(t.column(j).iter().map(|&(i, v)| (i, v / mass)).collect());
    }
    Ok(TruncatedOperator::from_columns(
        t.basis().to_vec(),
        cols,
        t.col_exact().to_vec(),
        dual_row_exact(t),
    ))
}

/// `T' = T (T*T)^-1` through a dense LU inverse of the Gram matrix. Zero
/// columns outside the exact set are left at zero.
pub fn cauchy_dual_dense(t: &TruncatedOperator) -> Result<TruncatedOperator> {
    let n = t.dim();
    let dense = t.to_dense();
    let gram = dense.adjoint() * &dense;
    let keep: Vec<usize> = (0..n)
        .filter(|&j| t.col_exact()[j] || gram[(j, j)].norm() > 0.0)
        .collect();
    let sub = DMatrix::from_fn(keep.len(), keep.len(), |a, b| gram[(keep[a], keep[b])]);
    let inv = sub.clone().try_inverse().ok_or_else(|| {
        let worst = (0..keep.len())
            .min_by(|&a, &b| sub[(a, a)].norm().total_cmp(&sub[(b, b)].norm()))
            .map_or(0, |a| keep[a]);
        Error::SingularDual { vertex: t.basis()[worst].clone() }
    })?;
    let mut full_inv = DMatrix::from_element(n, n, ZERO);
    for (a, &i) in keep.iter().enumerate() {
        for (b, &j) in keep.iter().enumerate() {
            full_inv[(i, j)] = inv[(a, b)];
        }
    }
    let prod = dense * full_inv;
    let cols = (0..n)
        .map(|j| (0..n).filter(|&i| prod[(i, j)] != ZERO).map(|i| (i, prod[(i, j)])).collect())
        .collect();
    Ok(TruncatedOperator::from_columns(t.basis().to_vec(), cols, t.col_exact().to_vec(), dual_row_exact(t)))
}

/// Cauchy dual weights `w'(x) = w(x) / sum_{y in phi^-1(phi(x))} |w(y)|^2`.
///
/// A root, or a vertex whose image lies beyond the window, is treated as the
/// only preimage of its image.
pub fn cauchy_dual_weights(system: &SelfMapSystem) -> Result<SelfMapSystem> {
    let mut out = Vec::with_capacity(system.len());
    for x in 0..system.len() {
        let s = match system.image(x) {
            Image::Vertex(p) => system.preimage_mass(p),
            Image::Root | Image::Beyond => system.weight(x).norm_sqr(),
        };
        if s == 0.0 {
            match system.image(x) {
                Image::Vertex(p) if system.preimages_complete(p) => {
                    return Err(Error::SingularDual { vertex: system.label(p).to_string() });
                }
                _ => out.push(ZERO),
            }
            continue;
        }
        out.push(system.weight(x) / s);
    }
    Ok(system.with_weights(out))
}

#[derive(Clone, Debug)]
pub struct SpectralEstimate {
    pub value: f64,
    pub iterations: usize,
    /// Estimate after each iteration that still had exact data.
    pub history: Vec<f64>,
}

/// Gelfand-type estimate `max_k ||T^n e_k||^(1/n)` over core basis vectors,
/// iterating until `iters` or until every iterate has left the exact region.
pub fn spectral_radius_estimate(t: &TruncatedOperator, iters: usize) -> SpectralEstimate {
    let core = t.valid_core();
    let mut vecs: Vec<Option<Vec<C>>> = (0..t.dim())
        .map(|k| core[k].then(|| crate::linalg::unit(t.dim(), k)))
        .collect();
    let mut history = Vec::new();
    for n in 1..=iters {
        let mut best: Option<f64> = None;
        for slot in vecs.iter_mut() {
            let Some(v) = slot.as_ref() else { continue };
            let next = t.apply(v);
            if next.degraded {
                *slot = None;
                continue;
            }
            let r = norm(&next.vector).powf(1.0 / n as f64);
            best = Some(best.map_or(r, |b: f64| b.max(r)));
            *slot = Some(next.vector);
        }
        match best {
            Some(b) => history.push(b),
            None => break,
        }
    }
    SpectralEstimate { value: history.last().copied().unwrap_or(0.0), iterations: history.len(), history }
}

/// `T` together with its Cauchy dual and both adjoints.
#[derive(Clone, Debug)]
pub struct OperatorPair {
    pub t: TruncatedOperator,
    pub t_adj: TruncatedOperator,
    pub dual: TruncatedOperator,
    pub dual_adj: TruncatedOperator,
}

impl OperatorPair {
    pub fn new(t: TruncatedOperator) -> Result<Self> {
        let dual = cauchy_dual_direct(&t)?;
        Ok(Self { t_adj: t.adjoint(), dual_adj: dual.adjoint(), t, dual })
    }

    pub fn from_system(system: &SelfMapSystem) -> Result<Self> {
        Self::new(composition_operator(system))
    }

    /// `(T', T)`: the pair whose model is the dual model, since `(T')' = T`.
    pub fn swapped(&self) -> Self {
        Self {
            t: self.dual.clone(),
            t_adj: self.dual_adj.clone(),
            dual: self.t.clone(),
            dual_adj: self.t_adj.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.t.dim()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{unit, ONE};

    fn weighted_chain(w: &[f64]) -> SelfMapSystem {
        let n = w.len();
        let labels = (0..n).map(|i| i.to_string()).collect();
        let phi = (0..n).map(|i| if i == 0 { Image::Root } else { Image::Vertex(i - 1) }).collect();
        let mut open = vec![false; n];
        open[n - 1] = true;
        SelfMapSystem::new(labels, phi, w.iter().map(|&x| C::new(x, 0.0)).collect(), open).unwrap()
    }

    #[test]
    fn shift_column_is_next_weight() {
        let s = weighted_chain(&[0.5, 2.0, 3.0, 4.0]);
        let t = composition_operator(&s);
        let v = t.apply(&unit(4, 1));
        assert_eq!(v.vector[2], C::new(3.0, 0.0));
        assert!(!v.degraded);
        assert!(t.apply(&unit(4, 3)).degraded);
    }

    #[test]
    fn zero_weights_give_zero_matrix() {
        let s = weighted_chain(&[0.0; 5]);
        let t = composition_operator(&s);
        assert!(t.to_dense().iter().all(|v| *v == ZERO));
        let li = is_left_invertible(&t, 1e-12);
        assert_eq!(li.lower_bound, 0.0);
        assert!(!li.invertible);
    }

    #[test]
    fn adjoint_power_matches_closed_form() {
        let s = weighted_chain(&[1.0, 2.0, 3.0, 5.0, 7.0]);
        let ta = composition_operator(&s).adjoint();
        let got = ta.power_apply(3, &unit(5, 4));
        let (y, c) = adjoint_power_closed_form(&s, 4, 3).unwrap();
        assert_eq!(y, Some(1));
        assert!((got.vector[1] - c).norm() < 1e-14);
        assert!((c - C::new(105.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn power_zero_is_identity() {
        let s = weighted_chain(&[1.0, 2.0, 3.0]);
        let t = composition_operator(&s);
        let x = vec![ONE, C::new(2.0, 1.0), ZERO];
        assert_eq!(t.power_apply(0, &x).vector, x);
    }

    #[test]
    fn isometry_is_self_dual() {
        let s = weighted_chain(&[1.0; 6]);
        let t = composition_operator(&s);
        let d = cauchy_dual_direct(&t).unwrap();
        for j in 0..5 {
            assert_eq!(t.column(j), d.column(j));
        }
    }

    #[test]
    fn diagonal_dual_is_inverse() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C::new(2.0, 0.0),
            C::new(0.5, 0.0),
            C::new(4.0, 0.0),
        ]));
        let t = TruncatedOperator::from_dense(vec!["a".into(), "b".into(), "c".into()], &m);
        let d = cauchy_dual_dense(&t).unwrap().to_dense();
        for i in 0..3 {
            assert!((d[(i, i)] - m[(i, i)].inv()).norm() < 1e-14);
        }
    }

    #[test]
    fn singular_gram_names_vertex() {
        let s = SelfMapSystem::from_named(&[("a", None, ONE), ("b", Some("a"), ZERO)]).unwrap();
        let err = cauchy_dual_direct(&composition_operator(&s)).unwrap_err();
        assert!(matches!(err, Error::SingularDual { ref vertex } if vertex == "a"));
    }

    #[test]
    fn jordan_block_has_zero_radius() {
        let n = 6;
        let m = DMatrix::from_fn(n, n, |i, j| if i == j + 1 { ONE } else { ZERO });
        let t = TruncatedOperator::from_dense((0..n).map(|i| i.to_string()).collect(), &m);
        assert_eq!(spectral_radius_estimate(&t, 20).value, 0.0);
        let id = TruncatedOperator::from_dense((0..n).map(|i| i.to_string()).collect(), &DMatrix::identity(n, n));
        assert!((spectral_radius_estimate(&id, 20).value - 1.0).abs() < 1e-15);
    }
}

//! Wandering subspace, Laurent model coefficients, annulus radii, the
//! multiplication and left-inverse operators, and reproducing kernels.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{descendants, gen_band, Image, LevelFunction, OrbitAnchor, OrbitDecomposition, SelfMapSystem, TruncationWindow};
use crate::linalg::{inner, norm, orthonormalize, powi, sub, unit, C, ZERO};
use crate::operators::{Applied, OperatorPair};

/// Rank threshold used when deduplicating spanning vectors.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "vertex", rename_all = "snake_case")]
pub enum FrameSource {
    /// `e_x` for `x` at level one.
    Generator(usize),
    /// Orthogonal complement of the weights on the preimages of this vertex.
    Kernel(usize),
    /// `e_Omega` for the generalized root.
    GeneralizedRoot(usize),
    /// `e_x` for a vertex with no image.
    RootVertex(usize),
}

/// Orthonormal basis of the wandering subspace inside the window.
#[derive(Clone, Debug)]
pub struct WanderingFrame {
    pub columns: Vec<Vec<C>>,
    pub provenance: Vec<FrameSource>,
}

impl WanderingFrame {
    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    /// Coordinates `Q* v`.
    pub fn coords(&self, v: &[C]) -> Vec<C> {
        self.columns.iter().map(|q| inner(v, q)).collect()
    }

    /// `Q c`.
    pub fn embed(&self, c: &[C]) -> Vec<C> {
        let n = self.columns.first().map_or(0, Vec::len);
        let mut out = vec![ZERO; n];
        for (q, ci) in self.columns.iter().zip(c) {
            crate::linalg::axpy(*ci, q, &mut out);
        }
        out
    }

    pub fn orthonormality_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.columns.iter().enumerate() {
            for (j, b) in self.columns.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((inner(a, b) - target).norm());
            }
        }
        worst
    }
}

/// Basis of `{v on phi^-1(p) : sum conj(w(y)) v_y = 0}`, the part of `ker C*`
/// living on the preimages of `p`.
fn sibling_kernel(system: &SelfMapSystem, p: usize) -> Vec<Vec<C>> {
    let group = system.preimages(p);
    let dim = system.len();
    let u: Vec<C> = group.iter().map(|&y| system.weight(y)).collect();
    let uu: f64 = u.iter().map(|v| v.norm_sqr()).sum();
    let mut local = Vec::new();
    for k in 0..group.len() {
        let mut v = unit(group.len(), k);
        if uu > 0.0 {
            let c = u[k].conj() / uu;
            for (vi, ui) in v.iter_mut().zip(&u) {
                *vi -= c * ui;
            }
        }
        if norm(&v) > RANK_TOL {
            local.push(v);
        }
    }
    let (basis, _) = orthonormalize(&local, RANK_TOL);
    basis
        .into_iter()
        .map(|b| {
            let mut full = vec![ZERO; dim];
            for (k, &y) in group.iter().enumerate() {
                full[y] = b[k];
            }
            full
        })
        .collect()
}

/// Wandering subspace: on an orbit with a cycle, the span of `e_x` over level
/// one together with the kernels of the adjoints of `C` restricted to each
/// `des(x)`; on an acyclic orbit, `e_Omega` together with `ker C*`. Only
/// preimage sets fully inside the window contribute kernel vectors.
pub fn wandering_subspace(
    system: &SelfMapSystem,
    decomp: &OrbitDecomposition,
    levels: &LevelFunction,
) -> Result<WanderingFrame> {
    let n = system.len();
    let mut cands = Vec::new();
    let mut tags = Vec::new();
    let level_one = gen_band(levels, 1, 1);
    for (oid, orbit) in decomp.orbits.iter().enumerate() {
        match levels.anchors[oid] {
            OrbitAnchor::Cycle { .. } => {
                for &x in level_one.iter().filter(|&&x| decomp.orbit_of[x] == oid) {
                    cands.push(unit(n, x));
                    tags.push(FrameSource::Generator(x));
                    for p in descendants(system, x).vertices {
                        if system.preimages_complete(p) {
                            for v in sibling_kernel(system, p) {
                                cands.push(v);
                                tags.push(FrameSource::Kernel(p));
                            }
                        }
                    }
                }
            }
            OrbitAnchor::Acyclic { omega, .. } => {
                cands.push(unit(n, omega.vertex));
                tags.push(FrameSource::GeneralizedRoot(omega.vertex));
                for &p in &orbit.members {
                    if system.image(p) == Image::Root {
                        cands.push(unit(n, p));
                        tags.push(FrameSource::RootVertex(p));
                    }
                    if system.preimages_complete(p) {
                        for v in sibling_kernel(system, p) {
                            cands.push(v);
                            tags.push(FrameSource::Kernel(p));
                        }
                    }
                }
            }
        }
    }
    let (columns, origin) = orthonormalize(&cands, RANK_TOL);
    if columns.is_empty() {
        return Err(Error::Structural("wandering subspace is empty".into()));
    }
    let provenance = origin.into_iter().map(|k| tags[k]).collect();
    Ok(WanderingFrame { columns, provenance })
}

/// `max |<u, T^n v>|` and `max |<u, T'^n v>|` over frame columns and
/// `1 <= n <= depth`, skipping iterates that left the exact region.
pub fn spade_residual(pair: &OperatorPair, frame: &WanderingFrame, depth: usize) -> f64 {
    let mut worst = 0.0f64;
    for op in [&pair.t, &pair.dual] {
        for v in &frame.columns {
            let mut cur = v.clone();
            for _ in 0..depth {
                let next = op.apply(&cur);
                if next.degraded {
                    break;
                }
                cur = next.vector;
                for u in &frame.columns {
                    worst = worst.max(inner(&cur, u).norm());
                }
            }
        }
    }
    worst
}

/// Distance of each basis vector from the span of `{A^n E, B^n E : n <= depth}`.
fn span_residuals(
    first: &crate::operators::TruncatedOperator,
    second: &crate::operators::TruncatedOperator,
    frame: &WanderingFrame,
    depth: usize,
) -> Vec<f64> {
    let mut vecs = Vec::new();
    for op in [first, second] {
        for v in &frame.columns {
            let mut cur = v.clone();
            vecs.push(cur.clone());
            for _ in 0..depth {
                let next = op.apply(&cur);
                if next.degraded {
                    break;
                }
                cur = next.vector;
                vecs.push(cur.clone());
            }
        }
    }
    let (basis, _) = orthonormalize(&vecs, RANK_TOL);
    (0..first.dim())
        .map(|k| {
            let mut r = unit(first.dim(), k);
            for b in &basis {
                let c = b[k].conj();
                crate::linalg::axpy(-c, b, &mut r);
            }
            norm(&r)
        })
        .collect()
}

/// Per-vertex exhaustion residuals for `[E]_{T', T*}` and `[E]_{T, T'*}`.
#[derive(Clone, Debug)]
pub struct SpanReport {
    pub dual_side: Vec<f64>,
    pub primal_side: Vec<f64>,
}

pub fn club_residuals(pair: &OperatorPair, frame: &WanderingFrame, depth: usize) -> SpanReport {
    SpanReport {
        dual_side: span_residuals(&pair.dual, &pair.t_adj, frame, depth),
        primal_side: span_residuals(&pair.t, &pair.dual_adj, frame, depth),
    }
}

/// Truncated Laurent series `sum f(n) z^n` with coefficients in frame coordinates.
#[derive(Clone, Debug)]
pub struct LaurentModel {
    pub degree_min: i64,
    pub degree_max: i64,
    pub coefficients: Vec<Vec<C>>,
    pub degraded: Vec<bool>,
    /// The vector whose model this is, when known.
    pub source: Option<Vec<C>>,
}

impl LaurentModel {
    pub fn zeros(degree_min: i64, degree_max: i64, dim: usize) -> Self {
        let len = (degree_max - degree_min + 1) as usize;
        Self {
            degree_min,
            degree_max,
            coefficients: vec![vec![ZERO; dim]; len],
            degraded: vec![false; len],
            source: None,
        }
    }

    fn slot(&self, n: i64) -> Option<usize> {
        (self.degree_min..=self.degree_max).contains(&n).then(|| (n - self.degree_min) as usize)
    }

    pub fn coeff(&self, n: i64) -> Option<&[C]> {
        self.slot(n).map(|k| self.coefficients[k].as_slice())
    }

    pub fn is_degraded(&self, n: i64) -> bool {
        self.slot(n).is_none_or(|k| self.degraded[k])
    }

    pub fn any_degraded(&self) -> bool {
        self.degraded.iter().any(|&d| d)
    }

    pub fn degrees(&self) -> std::ops::RangeInclusive<i64> {
        self.degree_min..=self.degree_max
    }

    pub fn dim(&self) -> usize {
        self.coefficients.first().map_or(0, Vec::len)
    }

    /// `sum f(n) z^n` over the window.
    pub fn value_at(&self, z: C) -> Vec<C> {
        let mut out = vec![ZERO; self.dim()];
        for (k, c) in self.coefficients.iter().enumerate() {
            if c.iter().all(|v| *v == ZERO) {
                continue;
            }
            let p = powi(z, self.degree_min + k as i64);
            for (o, ci) in out.iter_mut().zip(c) {
                *o += p * ci;
            }
        }
        out
    }

    /// Largest coefficient-wise distance over degrees exact in both models,
    /// and the largest coefficient norm seen.
    pub fn compare(&self, other: &LaurentModel) -> (f64, f64) {
        let lo = self.degree_min.max(other.degree_min);
        let hi = self.degree_max.min(other.degree_max);
        let mut diff = 0.0f64;
        let mut scale = 0.0f64;
        for n in lo..=hi {
            if self.is_degraded(n) || other.is_degraded(n) {
                continue;
            }
            let (a, b) = (self.coeff(n).unwrap(), other.coeff(n).unwrap());
            diff = diff.max(norm(&sub(a, b)));
            scale = scale.max(norm(a)).max(norm(b));
        }
        (diff, scale)
    }
}

/// `f(n) = P_E T'*^n x` for `n >= 0` and `P_E T^(-n) x` for `n < 0`.
pub fn model_coefficients(
    pair: &OperatorPair,
    frame: &WanderingFrame,
    x: &[C],
    window: &TruncationWindow,
) -> LaurentModel {
    let mut model = LaurentModel::zeros(window.degree_min, window.degree_max, frame.dim());
    let mut fill = |n: i64, v: &Applied| {
        let k = (n - window.degree_min) as usize;
        model.coefficients[k] = frame.coords(&v.vector);
        model.degraded[k] = v.degraded;
    };
    let mut cur = Applied { vector: x.to_vec(), degraded: false };
    fill(0, &cur);
    for n in 1..=window.degree_max {
        let next = pair.dual_adj.apply(&cur.vector);
        cur = Applied { vector: next.vector, degraded: cur.degraded || next.degraded };
        fill(n, &cur);
    }
    let mut cur = Applied { vector: x.to_vec(), degraded: false };
    for n in 1..=(-window.degree_min) {
        let next = pair.t.apply(&cur.vector);
        cur = Applied { vector: next.vector, degraded: cur.degraded || next.degraded };
        fill(-n, &cur);
    }
    model.source = Some(x.to_vec());
    model
}

#[derive(Clone, Debug)]
pub struct Evaluation {
    pub value: Vec<C>,
    /// Geometric estimate of the omitted tails; infinite outside the annulus.
    pub tail_bound: f64,
    pub outside_annulus: bool,
}

/// Evaluate the truncated series at `z` with a tail estimate from the radii.
pub fn evaluate_model(model: &LaurentModel, z: C, radii: Option<&RadiiReport>) -> Evaluation {
    let value = model.value_at(z);
    let r = z.norm();
    let (lo, hi) = radii
        .map(|rr| (rr.r_minus.unwrap_or(0.0), rr.r_plus.unwrap_or(f64::INFINITY)))
        .unwrap_or((0.0, f64::INFINITY));
    let outside = !(r > lo && r < hi);
    let tail_bound = if outside {
        f64::INFINITY
    } else {
        let top = model.coeff(model.degree_max).map_or(0.0, norm) * r.powi(model.degree_max as i32);
        let bottom = model.coeff(model.degree_min).map_or(0.0, norm) * r.powi(model.degree_min as i32);
        let q = r / hi;
        let p = lo / r;
        top * q / (1.0 - q) + if model.degree_min < 0 { bottom * p / (1.0 - p) } else { 0.0 }
    };
    Evaluation { value, tail_bound, outside_annulus: outside }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadiiMethod {
    ClosedForm,
    RootTest,
}

/// Inner and outer radii of the model annulus and of the dual-model annulus.
/// `None` means no data; an infinite outer radius serializes as `null`.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RadiiReport {
    pub r_minus: Option<f64>,
    pub r_plus: Option<f64>,
    pub r_minus_prime: Option<f64>,
    pub r_plus_prime: Option<f64>,
    pub method: RadiiMethod,
    pub annulus_empty: Option<bool>,
    pub dual_annulus_empty: Option<bool>,
    /// Degrees `[from, to]` over which the root test took its extremum.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trailing_window: Option<(usize, usize)>,
}

impl RadiiReport {
    pub fn new(rm: f64, rp: f64, rmp: f64, rpp: f64, method: RadiiMethod) -> Self {
        let mut r = Self {
            r_minus: Some(rm),
            r_plus: Some(rp),
            r_minus_prime: Some(rmp),
            r_plus_prime: Some(rpp),
            method,
            annulus_empty: None,
            dual_annulus_empty: None,
            trailing_window: None,
        };
        r.refresh_flags();
        r
    }

    fn refresh_flags(&mut self) {
        let empty = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(a), Some(b)) => Some(a >= b),
            _ => None,
        };
        self.annulus_empty = empty(self.r_minus, self.r_plus);
        self.dual_annulus_empty = empty(self.r_minus_prime, self.r_plus_prime);
    }

    /// Radii of the system with every weight multiplied by `t`.
    pub fn scaled(&self, t: f64) -> Self {
        let t = t.abs();
        let mut r = self.clone();
        r.r_minus = self.r_minus.map(|v| v * t);
        r.r_plus = self.r_plus.map(|v| v * t);
        r.r_minus_prime = self.r_minus_prime.map(|v| v / t);
        r.r_plus_prime = self.r_plus_prime.map(|v| v / t);
        r.refresh_flags();
        r
    }
}

/// `||A^n|_E||` for `n = 1..` while the iterates stay exact.
fn block_norms(op: &crate::operators::TruncatedOperator, frame: &WanderingFrame, depth: usize) -> Vec<f64> {
    let mut cur: Vec<Vec<C>> = frame.columns.clone();
    let mut out = Vec::new();
    for _ in 0..depth {
        let mut worst = 0.0f64;
        let mut next_all = Vec::with_capacity(cur.len());
        for v in &cur {
            let next = op.apply(v);
            if next.degraded {
                return out;
            }
            worst = worst.max(norm(&next.vector));
            next_all.push(next.vector);
        }
        out.push(worst);
        cur = next_all;
    }
    out
}

/// Index range of the trailing quarter of `len` entries, 1-based degrees.
fn trailing(len: usize) -> (usize, usize) {
    let from = (len - len / 4).max(1);
    (from.min(len), len)
}

/// `limsup a_n^(1/n)` estimated as the maximum over the trailing quarter.
fn inner_radius(seq: &[f64]) -> Option<f64> {
    if seq.is_empty() {
        return None;
    }
    let (from, to) = trailing(seq.len());
    Some((from..=to).map(|n| seq[n - 1].powf(1.0 / n as f64)).fold(0.0, f64::max))
}

/// `liminf a_n^(-1/n)` estimated as the minimum over the trailing quarter.
fn outer_radius(seq: &[f64]) -> Option<f64> {
    if seq.is_empty() {
        return None;
    }
    let (from, to) = trailing(seq.len());
    Some(
        (from..=to)
            .filter(|&n| seq[n - 1] > 0.0)
            .map(|n| seq[n - 1].powf(-1.0 / n as f64))
            .fold(f64::INFINITY, f64::min),
    )
}

/// Root-test radii from the block norms `||P_E T^n||`, `||P_E T'*^n||` and
/// their dual counterparts, computed as norms of adjoint iterates on `E`.
pub fn radii_estimate(pair: &OperatorPair, frame: &WanderingFrame, depth: usize) -> RadiiReport {
    let plus = block_norms(&pair.dual, frame, depth);
    let minus = block_norms(&pair.t_adj, frame, depth);
    let plus_prime = block_norms(&pair.t, frame, depth);
    let minus_prime = block_norms(&pair.dual_adj, frame, depth);
    let mut report = RadiiReport {
        r_minus: inner_radius(&minus),
        r_plus: outer_radius(&plus),
        r_minus_prime: inner_radius(&minus_prime),
        r_plus_prime: outer_radius(&plus_prime),
        method: RadiiMethod::RootTest,
        annulus_empty: None,
        dual_annulus_empty: None,
        trailing_window: Some(trailing(plus.len().max(minus.len()).max(1))),
    };
    report.refresh_flags();
    report
}

/// Root-test radii of a single model from its coefficient norms.
pub fn radii_from_model(model: &LaurentModel) -> (Option<f64>, Option<f64>) {
    let pos: Vec<f64> = (1..=model.degree_max)
        .take_while(|&n| !model.is_degraded(n))
        .map(|n| norm(model.coeff(n).unwrap()))
        .collect();
    let neg: Vec<f64> = (1..=-model.degree_min)
        .take_while(|&n| !model.is_degraded(-n))
        .map(|n| norm(model.coeff(-n).unwrap()))
        .collect();
    (inner_radius(&neg), outer_radius(&pos))
}

/// `M_z`: `f(n) -> f(n-1)` on the same window; the lowest degree is unknown.
pub fn multiplication_shift(model: &LaurentModel) -> LaurentModel {
    let mut out = LaurentModel::zeros(model.degree_min, model.degree_max, model.dim());
    out.degraded[0] = true;
    for k in 1..model.coefficients.len() {
        out.coefficients[k] = model.coefficients[k - 1].clone();
        out.degraded[k] = model.degraded[k - 1];
    }
    out
}

/// `L = U T'* U*`, realized on the source vector.
pub fn left_inverse_l(pair: &OperatorPair, frame: &WanderingFrame, model: &LaurentModel) -> Result<LaurentModel> {
    let x = model
        .source
        .as_ref()
        .ok_or_else(|| Error::Capability("left inverse needs the model's source vector".into()))?;
    let y = pair.dual_adj.apply(x);
    let window = TruncationWindow { vertex_radius: 0, degree_min: model.degree_min, degree_max: model.degree_max };
    let mut out = model_coefficients(pair, frame, &y.vector, &window);
    if y.degraded {
        out.degraded.iter_mut().for_each(|d| *d = true);
    }
    Ok(out)
}

/// `(Lf)(z) = (f(z) - (P_N f)(z)) / z` with `N` the kernel of `M_z*`, i.e.
/// `U ker T*`; the projection is `x - T T'* x` on the source vector.
pub fn left_inverse_l_display(pair: &OperatorPair, frame: &WanderingFrame, model: &LaurentModel) -> Result<LaurentModel> {
    let x = model
        .source
        .as_ref()
        .ok_or_else(|| Error::Capability("left inverse needs the model's source vector".into()))?;
    let back = pair.dual_adj.apply(x);
    let onto_range = pair.t.apply(&back.vector);
    let p_n = sub(x, &onto_range.vector);
    let window = TruncationWindow { vertex_radius: 0, degree_min: model.degree_min, degree_max: model.degree_max };
    let pn_model = model_coefficients(pair, frame, &p_n, &window);
    let mut out = LaurentModel::zeros(model.degree_min, model.degree_max, model.dim());
    let last = model.coefficients.len() - 1;
    for k in 0..last {
        out.coefficients[k] = sub(&model.coefficients[k + 1], &pn_model.coefficients[k + 1]);
        out.degraded[k] = model.degraded[k + 1] || pn_model.degraded[k + 1] || back.degraded || onto_range.degraded;
    }
    out.degraded[last] = true;
    Ok(out)
}

/// `U* kappa(., lambda) e = sum conj(lambda)^n T'^n e + sum conj(lambda)^(-n) T*^n e`
/// over the degree window: the vector representing evaluation at `lambda`.
pub fn kernel_vector(pair: &OperatorPair, frame: &WanderingFrame, window: &TruncationWindow, lambda: C, e: &[C]) -> Applied {
    let base = frame.embed(e);
    let lc = lambda.conj();
    let mut acc = vec![ZERO; base.len()];
    let mut degraded = false;
    let mut cur = base.clone();
    crate::linalg::axpy(C::new(1.0, 0.0), &cur, &mut acc);
    for n in 1..=window.degree_max {
        let next = pair.dual.apply(&cur);
        degraded |= next.degraded;
        cur = next.vector;
        crate::linalg::axpy(powi(lc, n), &cur, &mut acc);
    }
    let mut cur = base;
    for n in 1..=(-window.degree_min) {
        let next = pair.t_adj.apply(&cur);
        degraded |= next.degraded;
        cur = next.vector;
        if cur.iter().all(|c| *c == ZERO) {
            break;
        }
        crate::linalg::axpy(powi(lc, -n), &cur, &mut acc);
    }
    Applied { vector: acc, degraded }
}

#[derive(Clone, Debug)]
pub struct KernelMatrix {
    pub matrix: DMatrix<C>,
    pub degraded: bool,
    pub outside_annulus: bool,
}

/// `kappa(z, lambda)` on `E` in frame coordinates, truncated to the degree window.
pub fn reproducing_kernel(
    pair: &OperatorPair,
    frame: &WanderingFrame,
    window: &TruncationWindow,
    z: C,
    lambda: C,
    radii: Option<&RadiiReport>,
) -> KernelMatrix {
    let d = frame.dim();
    let mut matrix = DMatrix::from_element(d, d, ZERO);
    let mut degraded = false;
    for j in 0..d {
        let k = kernel_vector(pair, frame, window, lambda, &unit(d, j));
        let m = model_coefficients(pair, frame, &k.vector, window);
        degraded |= k.degraded || m.any_degraded();
        let col = m.value_at(z);
        for i in 0..d {
            matrix[(i, j)] = col[i];
        }
    }
    let outside = radii.is_some_and(|r| {
        let lo = r.r_minus.unwrap_or(0.0);
        let hi = r.r_plus.unwrap_or(f64::INFINITY);
        [z, lambda].iter().any(|p| !(p.norm() > lo && p.norm() < hi))
    });
    KernelMatrix { matrix, degraded, outside_annulus: outside }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{instantiate, FamilySpec};
    use crate::graph::{decompose_orbits, level_function};

    struct Setup {
        system: SelfMapSystem,
        pair: OperatorPair,
        frame: WanderingFrame,
    }

    fn setup(spec: &FamilySpec, radius: usize) -> Setup {
        let system = instantiate(spec, radius).unwrap();
        let decomp = decompose_orbits(&system);
        let levels = level_function(&system, &decomp).unwrap();
        let frame = wandering_subspace(&system, &decomp, &levels).unwrap();
        let pair = OperatorPair::from_system(&system).unwrap();
        Setup { system, pair, frame }
    }

    #[test]
    fn cycle_tail_frame_is_single_tail_vertex() {
        let s = setup(&FamilySpec::cycle_tail(1, 0.5, vec![0.25]), 12);
        assert_eq!(s.frame.dim(), 1);
        let k = s.system.index_of("(0,0)").unwrap();
        assert!((s.frame.columns[0][k].norm() - 1.0).abs() < 1e-15);
        assert_eq!(s.frame.provenance[0], FrameSource::Generator(k));
    }

    #[test]
    fn unilateral_frame_is_e0() {
        let s = setup(&FamilySpec::hardy(), 10);
        assert_eq!(s.frame.dim(), 1);
        assert_eq!(s.frame.columns[0][0], C::new(1.0, 0.0));
    }

    #[test]
    fn bilateral_frame_is_anchor_only() {
        let s = setup(&FamilySpec::BilateralShift { weight: 1.0 }, 6);
        assert_eq!(s.frame.dim(), 1);
        let anchor = s.system.index_of("-6").unwrap();
        assert_eq!(s.frame.provenance[0], FrameSource::GeneralizedRoot(anchor));
    }

    #[test]
    fn tree_frame_has_kernel_direction() {
        let spec = FamilySpec::DirectedTree { branches: 2, spine: 0.7, branch_weights: vec![1.1, 1.4], second_depth: Some(2) };
        let s = setup(&spec, 10);
        assert_eq!(s.frame.dim(), 3);
        assert!(s.frame.orthonormality_residual() < 1e-12);
        assert!(spade_residual(&s.pair, &s.frame, 20) < 1e-12);
    }

    #[test]
    fn element_of_e_has_constant_model() {
        let s = setup(&FamilySpec::bergman(), 30);
        let w = TruncationWindow::symmetric(30, 8);
        let m = model_coefficients(&s.pair, &s.frame, &s.frame.columns[0], &w);
        for n in m.degrees() {
            let expect = if n == 0 { 1.0 } else { 0.0 };
            assert!((norm(m.coeff(n).unwrap()) - expect).abs() < 1e-14, "degree {n}");
        }
    }

    #[test]
    fn hardy_polynomial_value() {
        let s = setup(&FamilySpec::hardy(), 20);
        let w = TruncationWindow::symmetric(20, 5);
        let mut x = vec![ZERO; s.system.len()];
        x[0] = C::new(1.0, 0.0);
        x[1] = C::new(1.0, 0.0);
        let m = model_coefficients(&s.pair, &s.frame, &x, &w);
        let v = evaluate_model(&m, C::new(0.5, 0.0), None);
        assert!((v.value[0] - C::new(1.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn isometry_power_model() {
        let s = setup(&FamilySpec::hardy(), 20);
        let w = TruncationWindow::symmetric(20, 6);
        let x = s.pair.t.power_apply(3, &s.frame.columns[0]).vector;
        let m = model_coefficients(&s.pair, &s.frame, &x, &w);
        for n in m.degrees() {
            let expect = if n == 3 { 1.0 } else { 0.0 };
            assert!((norm(m.coeff(n).unwrap()) - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn l_after_mz_is_identity() {
        let s = setup(&FamilySpec::bergman(), 40);
        let w = TruncationWindow::symmetric(40, 10);
        let mut x = vec![ZERO; s.system.len()];
        for (k, c) in x.iter_mut().enumerate().take(6) {
            *c = C::new(1.0 / (k + 1) as f64, k as f64 * 0.1);
        }
        let f = model_coefficients(&s.pair, &s.frame, &x, &w);
        let tx = s.pair.t.apply(&x).vector;
        let mzf = model_coefficients(&s.pair, &s.frame, &tx, &w);
        let (d, _) = multiplication_shift(&f).compare(&mzf);
        assert!(d < 1e-14);
        let back = left_inverse_l(&s.pair, &s.frame, &mzf).unwrap();
        let (d2, _) = back.compare(&f);
        assert!(d2 < 1e-14);
    }

    #[test]
    fn hardy_kernel_at_origin_is_one() {
        let s = setup(&FamilySpec::hardy(), 20);
        let w = TruncationWindow::symmetric(20, 8);
        let k = reproducing_kernel(&s.pair, &s.frame, &w, ZERO, ZERO, None);
        assert!((k.matrix[(0, 0)] - C::new(1.0, 0.0)).norm() < 1e-15);
        let z = C::new(0.3, 0.2);
        let k2 = reproducing_kernel(&s.pair, &s.frame, &w, z, z, None);
        let exact = 1.0 / (1.0 - z.norm_sqr());
        assert!((k2.matrix[(0, 0)].re - exact).abs() < 1e-4);
    }

    #[test]
    fn bilateral_annulus_is_empty() {
        let r = crate::catalog::expected_radii(&FamilySpec::BilateralShift { weight: 1.0 }).unwrap();
        assert_eq!(r.annulus_empty, Some(true));
    }
}

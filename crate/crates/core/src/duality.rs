//! Dual model, the operator-valued function `Psi`, the Cauchy pairing, the
//! duality sum, circle-integral reconstruction and the symmetry and
//! intertwining checks between a model and its dual.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{decompose_orbits, level_function, Image, LevelFunction, OrbitDecomposition, SelfMapSystem, TruncationWindow};
use crate::linalg::{axpy, dist, inner, norm, powi, unit, C, ONE, ZERO};
use crate::model::{
    club_residuals, evaluate_model, left_inverse_l, left_inverse_l_display, model_coefficients, multiplication_shift,
    radii_estimate, spade_residual, wandering_subspace, LaurentModel, RadiiReport, WanderingFrame,
};
use crate::operators::{Applied, OperatorPair, TruncatedOperator};

/// Slack allowed on root-test radii when judging the annulus hypotheses.
pub const ROOT_TEST_SLACK: f64 = 0.05;

#[derive(Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FlagValues {
    pub inner_below_one: bool,
    pub dual_contains_one: bool,
}

/// `r- < 1` and `r'- <= 1 <= r'+`, judged from every available radii source.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct HypothesisFlags {
    pub inner_below_one: bool,
    pub dual_contains_one: bool,
    pub closed_form: Option<FlagValues>,
    pub root_test: FlagValues,
    pub discrepancies: Vec<String>,
}

impl HypothesisFlags {
    pub fn hold(&self) -> bool {
        self.inner_below_one && self.dual_contains_one
    }
}

fn judge(r: &RadiiReport, slack: f64) -> FlagValues {
    let below = |v: Option<f64>, strict: bool| v.is_some_and(|v| if strict { v < 1.0 + slack } else { v <= 1.0 + slack });
    FlagValues {
        inner_below_one: below(r.r_minus, true),
        dual_contains_one: below(r.r_minus_prime, false) && r.r_plus_prime.is_some_and(|v| 1.0 - slack <= v),
    }
}

fn describe(name: &str, r: &RadiiReport, f: FlagValues, out: &mut Vec<String>) {
    let show = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.6}"));
    if !f.inner_below_one {
        out.push(format!("{name}: r- = {} is not below 1", show(r.r_minus)));
    }
    if !f.dual_contains_one {
        out.push(format!(
            "{name}: dual annulus [{}, {}] does not contain 1",
            show(r.r_minus_prime),
            show(r.r_plus_prime)
        ));
    }
}

pub fn hypothesis_flags(closed_form: Option<&RadiiReport>, root_test: &RadiiReport) -> HypothesisFlags {
    let cf = closed_form.map(|r| judge(r, 0.0));
    let rt = judge(root_test, ROOT_TEST_SLACK);
    let mut discrepancies = Vec::new();
    if let (Some(r), Some(f)) = (closed_form, cf) {
        describe("closed form", r, f, &mut discrepancies);
        let pairs = [
            ("r-", r.r_minus, root_test.r_minus),
            ("r+", r.r_plus, root_test.r_plus),
            ("r'-", r.r_minus_prime, root_test.r_minus_prime),
            ("r'+", r.r_plus_prime, root_test.r_plus_prime),
        ];
        for (label, a, b) in pairs {
            if let (Some(a), Some(b)) = (a, b) {
                if !radii_agree(a, b, ROOT_TEST_SLACK) {
                    discrepancies.push(format!("{label}: closed form {a:.6} vs root test {b:.6}"));
                }
            }
        }
    }
    describe("root test", root_test, rt, &mut discrepancies);
    HypothesisFlags {
        inner_below_one: rt.inner_below_one && cf.is_none_or(|f| f.inner_below_one),
        dual_contains_one: rt.dual_contains_one && cf.is_none_or(|f| f.dual_contains_one),
        closed_form: cf,
        root_test: rt,
        discrepancies,
    }
}

/// Relative agreement of two radii; zeros and infinities only match themselves.
pub fn radii_agree(a: f64, b: f64, rel: f64) -> bool {
    if a == b {
        return true;
    }
    if !a.is_finite() || !b.is_finite() || a == 0.0 {
        return false;
    }
    ((a - b) / a).abs() <= rel
}

/// Iterates `A^n q_j`, `n = 0..=depth`, of each frame column under one operator.
#[derive(Clone, Debug)]
struct FramePowers {
    /// `powers[n][j]`
    powers: Vec<Vec<Applied>>,
}

impl FramePowers {
    fn new(op: &TruncatedOperator, frame: &WanderingFrame, depth: usize) -> Self {
        let mut powers = Vec::with_capacity(depth + 1);
        let base: Vec<Applied> = frame.columns.iter().map(|q| Applied { vector: q.clone(), degraded: false }).collect();
        powers.push(base);
        for n in 0..depth {
            let next = powers[n]
                .iter()
                .map(|a| {
                    let b = op.apply(&a.vector);
                    Applied { vector: b.vector, degraded: a.degraded || b.degraded }
                })
                .collect();
            powers.push(next);
        }
        Self { powers }
    }

    fn get(&self, n: usize, j: usize) -> &Applied {
        &self.powers[n][j]
    }
}

/// `A^n x` for `n = 0..=depth`.
fn orbit_of(op: &TruncatedOperator, x: &[C], depth: usize) -> Vec<Applied> {
    let mut out = vec![Applied { vector: x.to_vec(), degraded: false }];
    for n in 0..depth {
        let b = op.apply(&out[n].vector);
        let degraded = out[n].degraded || b.degraded;
        out.push(Applied { vector: b.vector, degraded });
    }
    out
}

/// Operator pair, its swap, the shared wandering frame, radii and hypothesis flags.
#[derive(Clone, Debug)]
pub struct DualPairSetup {
    pub system: SelfMapSystem,
    pub decomposition: OrbitDecomposition,
    pub levels: LevelFunction,
    pub pair: OperatorPair,
    /// `(T', T)`: the dual model is the model of this pair.
    pub dual_pair: OperatorPair,
    pub frame: WanderingFrame,
    pub window: TruncationWindow,
    pub radii: RadiiReport,
    pub closed_form: Option<RadiiReport>,
    pub flags: HypothesisFlags,
    dual_adj_powers: FramePowers,
    t_powers: FramePowers,
}

impl DualPairSetup {
    pub fn new(system: SelfMapSystem, window: TruncationWindow, closed_form: Option<RadiiReport>) -> Result<Self> {
        let decomposition = decompose_orbits(&system);
        let levels = level_function(&system, &decomposition)?;
        let frame = wandering_subspace(&system, &decomposition, &levels)?;
        let pair = OperatorPair::from_system(&system)?;
        let dual_pair = pair.swapped();
        let depth = window.degree_max.max(-window.degree_min).max(1) as usize;
        let radii = radii_estimate(&pair, &frame, depth);
        let flags = hypothesis_flags(closed_form.as_ref(), &radii);
        let dual_adj_powers = FramePowers::new(&pair.dual_adj, &frame, depth);
        let t_powers = FramePowers::new(&pair.t, &frame, depth);
        Ok(Self {
            system,
            decomposition,
            levels,
            pair,
            dual_pair,
            frame,
            window,
            radii,
            closed_form,
            flags,
            dual_adj_powers,
            t_powers,
        })
    }

    pub fn depth(&self) -> usize {
        self.window.degree_max.max(-self.window.degree_min).max(1) as usize
    }

    pub fn dim(&self) -> usize {
        self.system.len()
    }

    pub fn model(&self, x: &[C]) -> LaurentModel {
        model_coefficients(&self.pair, &self.frame, x, &self.window)
    }

    pub fn dual_model(&self, x: &[C]) -> LaurentModel {
        dual_model_coefficients(self, x, &self.window)
    }

    /// The radii of the dual model read as the radii of the swapped setup.
    pub fn dual_radii(&self) -> RadiiReport {
        let r = &self.radii;
        let mut d = RadiiReport::new(0.0, 0.0, 0.0, 0.0, r.method);
        d.r_minus = r.r_minus_prime;
        d.r_plus = r.r_plus_prime;
        d.r_minus_prime = r.r_minus;
        d.r_plus_prime = r.r_plus;
        d.annulus_empty = r.dual_annulus_empty;
        d.dual_annulus_empty = r.annulus_empty;
        d
    }
}

/// `g(n) = P_E T*^n x` for `n >= 0` and `P_E T'^(-n) x` for `n < 0`.
pub fn dual_model_coefficients(setup: &DualPairSetup, x: &[C], window: &TruncationWindow) -> LaurentModel {
    model_coefficients(&setup.dual_pair, &setup.frame, x, window)
}

/// `sum_{n=1}^{N-} lambda^-n B^n e + sum_{n=0}^{N+} lambda^n A^n e` where the
/// model of `A^n e` is `M_z^n e` and the model of `B^n e` is `L^n e`.
pub fn psi_vector(pair: &OperatorPair, frame: &WanderingFrame, window: &TruncationWindow, lambda: C, e: &[C]) -> Applied {
    let base = frame.embed(e);
    let mut acc = vec![ZERO; base.len()];
    let mut degraded = false;
    let mut cur = base.clone();
    axpy(ONE, &cur, &mut acc);
    for n in 1..=window.degree_max {
        let next = pair.t.apply(&cur);
        degraded |= next.degraded;
        cur = next.vector;
        axpy(powi(lambda, n), &cur, &mut acc);
    }
    let mut cur = base;
    for n in 1..=(-window.degree_min) {
        let next = pair.dual_adj.apply(&cur);
        degraded |= next.degraded;
        cur = next.vector;
        if cur.iter().all(|c| *c == ZERO) {
            break;
        }
        axpy(powi(lambda, -n), &cur, &mut acc);
    }
    Applied { vector: acc, degraded }
}

#[derive(Clone, Debug)]
pub struct PsiValue {
    pub model: LaurentModel,
    pub vector: Vec<C>,
    pub degraded: bool,
    /// `|lambda|` lies outside the dual annulus, so the series may diverge.
    pub divergence_warning: bool,
}

fn outside(r: Option<f64>, lo: Option<f64>, hi: Option<f64>) -> bool {
    let r = r.unwrap_or(0.0);
    !(r > lo.unwrap_or(0.0) && r < hi.unwrap_or(f64::INFINITY))
}

/// `Psi(lambda) e = sum lambda^-n L^n e + sum lambda^n M_z^n e`.
pub fn psi_apply(setup: &DualPairSetup, lambda: C, e: &[C], window: &TruncationWindow) -> PsiValue {
    let v = psi_vector(&setup.pair, &setup.frame, window, lambda, e);
    let model = model_coefficients(&setup.pair, &setup.frame, &v.vector, window);
    PsiValue {
        degraded: v.degraded || model.any_degraded(),
        divergence_warning: outside(Some(lambda.norm()), setup.radii.r_minus_prime, setup.radii.r_plus_prime),
        model,
        vector: v.vector,
    }
}

/// `Psi'` of the swapped setup, landing in the dual model space.
pub fn psi_prime_apply(setup: &DualPairSetup, z: C, e: &[C], window: &TruncationWindow) -> PsiValue {
    let v = psi_vector(&setup.dual_pair, &setup.frame, window, z, e);
    let model = model_coefficients(&setup.dual_pair, &setup.frame, &v.vector, window);
    PsiValue {
        degraded: v.degraded || model.any_degraded(),
        divergence_warning: outside(Some(z.norm()), setup.radii.r_minus, setup.radii.r_plus),
        model,
        vector: v.vector,
    }
}

/// `sum_n <f(n), g(n)>` over the common degree window.
pub fn cauchy_pairing(f: &LaurentModel, g: &LaurentModel) -> C {
    let lo = f.degree_min.max(g.degree_min);
    let hi = f.degree_max.min(g.degree_max);
    (lo..=hi).map(|n| inner(f.coeff(n).unwrap(), g.coeff(n).unwrap())).sum()
}

#[derive(Clone, Debug)]
pub struct DualitySum {
    pub vector: Vec<C>,
    /// `||partial sum - x||` after each `N = 0..=depth`.
    pub history: Vec<f64>,
    /// First `N` at which a contributing term left the exact region.
    pub degraded_from: Option<usize>,
}

impl DualitySum {
    pub fn residual(&self) -> f64 {
        *self.history.last().unwrap()
    }
}

/// `sum_{n=1}^N rho^-2n T'*^n P_E T^n x + sum_{n=0}^N rho^2n T^n P_E T'*^n x`;
/// `rho = 1` gives the duality sum.
pub fn weighted_duality_sum(setup: &DualPairSetup, x: &[C], depth: usize, rho: f64) -> DualitySum {
    let depth = depth.min(setup.depth());
    let t_orbit = orbit_of(&setup.pair.t, x, depth);
    let back_orbit = orbit_of(&setup.pair.dual_adj, x, depth);
    let mut acc = vec![ZERO; x.len()];
    let mut history = Vec::with_capacity(depth + 1);
    let mut degraded_from = None;
    for n in 0..=depth {
        let mut bad = false;
        let up = rho.powi(2 * n as i32);
        for (j, q) in setup.frame.columns.iter().enumerate() {
            let c = inner(&back_orbit[n].vector, q);
            let term = setup.t_powers.get(n, j);
            if c != ZERO {
                bad |= back_orbit[n].degraded || term.degraded;
                axpy(c * up, &term.vector, &mut acc);
            }
            if n >= 1 {
                let c = inner(&t_orbit[n].vector, q);
                let term = setup.dual_adj_powers.get(n, j);
                if c != ZERO || t_orbit[n].degraded {
                    bad |= t_orbit[n].degraded || term.degraded;
                    axpy(c / up, &term.vector, &mut acc);
                }
            }
        }
        if bad && degraded_from.is_none() {
            degraded_from = Some(n);
        }
        history.push(dist(&acc, x));
    }
    DualitySum { vector: acc, history, degraded_from }
}

pub fn duality_sum(setup: &DualPairSetup, x: &[C], depth: usize) -> DualitySum {
    weighted_duality_sum(setup, x, depth, 1.0)
}

/// `s(v) = sum |w(y)|^2` over the siblings `y` of `v`, including `v`.
fn sibling_mass(system: &SelfMapSystem, v: usize) -> f64 {
    match system.image(v) {
        Image::Vertex(p) => system.preimage_mass(p),
        _ => system.weight(v).norm_sqr(),
    }
}

/// `h(m) = prod_{k=m}^{tau-1} |w(phi^k x)|^2 / s(phi^k x)`, `h(tau) = 1`.
pub fn cycle_h(system: &SelfMapSystem, cycle_from_x: &[usize]) -> Vec<f64> {
    let tau = cycle_from_x.len();
    let mut h = vec![1.0; tau + 1];
    for m in (0..tau).rev() {
        let v = cycle_from_x[m];
        h[m] = h[m + 1] * system.weight(v).norm_sqr() / sibling_mass(system, v);
    }
    h
}

/// The cycle through `x`, listed as `x, phi(x), phi^2(x), ...`.
fn cycle_through(system: &SelfMapSystem, decomp: &OrbitDecomposition, x: usize) -> Result<Vec<usize>> {
    let orbit = &decomp.orbits[decomp.orbit_of[x]];
    let cycle = orbit
        .cycle
        .as_ref()
        .ok_or_else(|| Error::Input(format!("vertex {} lies on an acyclic orbit", system.label(x))))?;
    if !cycle.contains(&x) {
        return Err(Error::Input(format!("vertex {} is not on the cycle", system.label(x))));
    }
    let mut out = vec![x];
    let mut v = x;
    for _ in 1..cycle.len() {
        v = system.iterate(v, 1).expect("cycle vertices have images");
        out.push(v);
    }
    Ok(out)
}

/// Band-`m` share of `e_x` in the duality sum for a cycle vertex `x`:
/// `(h(m+1) - h(m)) / (1 - h(0))`.
pub fn cycle_closed_form(system: &SelfMapSystem, decomp: &OrbitDecomposition, x: usize, m: usize) -> Result<f64> {
    let cyc = cycle_through(system, decomp, x)?;
    if m >= cyc.len() {
        return Err(Error::Input(format!("band {m} exceeds the cycle length {}", cyc.len())));
    }
    let h = cycle_h(system, &cyc);
    if h[0] >= 1.0 {
        return Err(Error::Divergence(format!("h(0) = {} is not below 1", h[0])));
    }
    Ok((h[m + 1] - h[m]) / (1.0 - h[0]))
}

/// `sum_{n=1}^N <T'*^n P_m T^n e_x, e_x>` with `P_m` the coordinate projection onto
/// the siblings of `phi^m(x)` other than itself.
pub fn cycle_band_brute_force(
    system: &SelfMapSystem,
    decomp: &OrbitDecomposition,
    pair: &OperatorPair,
    x: usize,
    m: usize,
    terms: usize,
) -> Result<f64> {
    let cyc = cycle_through(system, decomp, x)?;
    let tau = cyc.len();
    if m >= tau {
        return Err(Error::Input(format!("band {m} exceeds the cycle length {tau}")));
    }
    let parent = cyc[(m + 1) % tau];
    let mask: Vec<usize> = system.preimages(parent).iter().copied().filter(|&y| y != cyc[m]).collect();
    let ex = unit(system.len(), x);
    let mut up = ex.clone();
    let mut total = 0.0;
    for n in 1..=terms {
        let a = pair.t.apply(&up);
        if a.degraded {
            return Err(Error::Input(format!("window too small for {terms} terms")));
        }
        up = a.vector;
        let mut proj = vec![ZERO; up.len()];
        for &y in &mask {
            proj[y] = up[y];
        }
        let back = pair.dual_adj.power_apply(n, &proj);
        total += back.vector[x].re;
    }
    Ok(total)
}

#[derive(Clone, Debug)]
pub struct CircleReconstruction {
    /// Trapezoidal average of the integrand, as a vector of the space.
    pub quadrature: Vec<C>,
    pub model: LaurentModel,
    /// The `rho`-weighted coefficient sum it should equal.
    pub weighted_sum: Vec<C>,
    pub agreement: f64,
    pub residual: f64,
    /// Size of the integrand on the circle summed over the operator powers; the
    /// floating-point floor of `agreement` and `residual` is proportional to it.
    pub scale: f64,
    pub degraded: bool,
}

impl CircleReconstruction {
    pub fn relative_residual(&self) -> f64 {
        self.residual / self.scale.max(f64::MIN_POSITIVE)
    }

    pub fn relative_agreement(&self) -> f64 {
        self.agreement / self.scale.max(f64::MIN_POSITIVE)
    }
}

/// Average of `Psi(conj(lambda)) f(lambda)` over `Q` nodes of `|lambda| = r`.
///
/// The node average of `conj(lambda)^k f(lambda)` is taken first and the powers
/// of `T` and `T'*` are applied afterwards; this is the same finite sum, ordered
/// so that growing operator powers never multiply cancelling terms.
pub fn circle_reconstruction(setup: &DualPairSetup, f: &LaurentModel, r: f64, points: usize) -> Result<CircleReconstruction> {
    let span = (f.degree_max - f.degree_min) as usize;
    if points <= 2 * span {
        return Err(Error::Aliasing { points, span });
    }
    let x = f
        .source
        .as_ref()
        .ok_or_else(|| Error::Capability("reconstruction needs the model's source vector".into()))?;
    let up = f.degree_max.max(0) as usize;
    let down = (-f.degree_min).max(0) as usize;
    if up.max(down) > setup.depth() {
        return Err(Error::Input("model window exceeds the setup window".into()));
    }
    let d = setup.frame.dim();
    let mut plus = vec![vec![ZERO; d]; up + 1];
    let mut minus = vec![vec![ZERO; d]; down + 1];
    let weight = C::new(1.0 / points as f64, 0.0);
    let mut node_size = 0.0;
    for q in 0..points {
        let t = 2.0 * PI * q as f64 / points as f64;
        let lambda = C::from_polar(r, t);
        let fl = f.value_at(lambda);
        node_size += norm(&fl) / points as f64;
        let lc = lambda.conj();
        for (k, a) in plus.iter_mut().enumerate() {
            axpy(weight * powi(lc, k as i64), &fl, a);
        }
        for (k, a) in minus.iter_mut().enumerate().skip(1) {
            axpy(weight * powi(lc, -(k as i64)), &fl, a);
        }
    }
    let mut acc = vec![ZERO; x.len()];
    let mut degraded = f.any_degraded();
    let mut scale = norm(x);
    for (k, a) in plus.iter().enumerate() {
        for (j, c) in a.iter().enumerate() {
            let term = setup.t_powers.get(k, j);
            degraded |= term.degraded && *c != ZERO;
            scale += node_size * r.powi(k as i32) * norm(&term.vector);
            axpy(*c, &term.vector, &mut acc);
        }
    }
    for (k, a) in minus.iter().enumerate().skip(1) {
        for (j, c) in a.iter().enumerate() {
            let term = setup.dual_adj_powers.get(k, j);
            degraded |= term.degraded && *c != ZERO;
            scale += node_size * r.powi(-(k as i32)) * norm(&term.vector);
            axpy(*c, &term.vector, &mut acc);
        }
    }
    let ws = weighted_duality_sum(setup, x, up.max(down), r);
    let window = TruncationWindow { vertex_radius: 0, degree_min: f.degree_min, degree_max: f.degree_max };
    let model = model_coefficients(&setup.pair, &setup.frame, &acc, &window);
    Ok(CircleReconstruction {
        agreement: dist(&acc, &ws.vector),
        residual: dist(&acc, x),
        scale,
        quadrature: acc,
        model,
        weighted_sum: ws.vector,
        degraded,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct CirclePairing {
    pub value: C,
    /// Size of the integrand on the circle summed over the coefficients of `g`.
    pub scale: f64,
}

/// Quadrature of `<f(lambda), g(lambda)>` over `|lambda| = r`, accumulated
/// against each coefficient of `g` so that large dual coefficients are not
/// summed before the node average.
pub fn circle_pairing(f: &LaurentModel, g: &LaurentModel, r: f64, points: usize) -> Result<CirclePairing> {
    let span = (f.degree_max - f.degree_min).max(g.degree_max - g.degree_min) as usize;
    if points <= 2 * span {
        return Err(Error::Aliasing { points, span });
    }
    let mut averaged = vec![vec![ZERO; f.dim()]; g.coefficients.len()];
    let weight = C::new(1.0 / points as f64, 0.0);
    let mut node_size = 0.0;
    for q in 0..points {
        let t = 2.0 * PI * q as f64 / points as f64;
        let lambda = C::from_polar(r, t);
        let fl = f.value_at(lambda);
        node_size += norm(&fl) / points as f64;
        for (k, a) in averaged.iter_mut().enumerate() {
            let n = g.degree_min + k as i64;
            axpy(weight * powi(lambda.conj(), n), &fl, a);
        }
    }
    let value = averaged.iter().zip(&g.coefficients).map(|(a, c)| inner(a, c)).sum();
    let scale = g
        .coefficients
        .iter()
        .enumerate()
        .map(|(k, c)| node_size * r.powi((g.degree_min + k as i64) as i32) * norm(c))
        .sum();
    Ok(CirclePairing { value, scale })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SweepRow {
    pub r: f64,
    pub residual: f64,
}

/// Reconstruction residual `||weighted sum - x||` for each `r`.
pub fn r_sweep(setup: &DualPairSetup, f: &LaurentModel, radii: &[f64]) -> Result<Vec<SweepRow>> {
    let x = f
        .source
        .as_ref()
        .ok_or_else(|| Error::Capability("sweep needs the model's source vector".into()))?;
    let depth = f.degree_max.max(-f.degree_min) as usize;
    Ok(radii
        .iter()
        .map(|&r| SweepRow { r, residual: weighted_duality_sum(setup, x, depth, r).residual() })
        .collect())
}

/// Default sweep: from above when `r+ > 1`, otherwise from below.
pub fn default_sweep(setup: &DualPairSetup) -> Vec<f64> {
    let above = setup.radii.r_plus.is_none_or(|r| r > 1.0);
    let steps = [0.05, 0.02, 0.01, 0.0];
    steps.iter().map(|s| if above { 1.0 + s } else { 1.0 - s }).collect()
}

#[derive(Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SymmetryResult {
    pub left: C,
    pub right: C,
    pub residual: f64,
    pub relative: f64,
    pub degraded: bool,
    pub divergence_warning: bool,
}

/// `<(Psi'(conj z) e1)(lambda), e2>` against `<e1, (Psi(conj lambda) e2)(z)>`.
pub fn symmetry_check(setup: &DualPairSetup, z: C, lambda: C, e1: &[C], e2: &[C], window: &TruncationWindow) -> SymmetryResult {
    let lp = psi_prime_apply(setup, z.conj(), e1, window);
    let rp = psi_apply(setup, lambda.conj(), e2, window);
    let dual_radii = setup.dual_radii();
    let lv = evaluate_model(&lp.model, lambda, Some(&dual_radii));
    let rv = evaluate_model(&rp.model, z, Some(&setup.radii));
    let left = inner(&lv.value, e2);
    let right = inner(e1, &rv.value);
    let residual = (left - right).norm();
    let scale = left.norm().max(right.norm()).max(f64::MIN_POSITIVE);
    SymmetryResult {
        left,
        right,
        residual,
        relative: residual / scale,
        degraded: lp.degraded || rp.degraded,
        divergence_warning: lp.divergence_warning || rp.divergence_warning || lv.outside_annulus || rv.outside_annulus,
    }
}

/// Relative coefficient residuals for one intertwining relation pair.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct IntertwiningResiduals {
    /// Model of the forward operator against `M_z`.
    pub shift: f64,
    /// Model of the backward operator against `L` from the display formula.
    pub left_inverse: f64,
}

fn relative((d, s): (f64, f64)) -> f64 {
    if s == 0.0 {
        d
    } else {
        d / s
    }
}

fn intertwining_for(pair: &OperatorPair, frame: &WanderingFrame, window: &TruncationWindow, x: &[C]) -> Result<IntertwiningResiduals> {
    let f = model_coefficients(pair, frame, x, window);
    let tx = pair.t.apply(x);
    let mut ft = model_coefficients(pair, frame, &tx.vector, window);
    if tx.degraded {
        ft.degraded.iter_mut().for_each(|d| *d = true);
    }
    let shift = relative(multiplication_shift(&f).compare(&ft));
    let conj = left_inverse_l(pair, frame, &f)?;
    let display = left_inverse_l_display(pair, frame, &f)?;
    let left_inverse = relative(conj.compare(&display));
    Ok(IntertwiningResiduals { shift, left_inverse })
}

/// Dual model of `T'x` against `M_z` of the dual model of `x`, and dual model of
/// `T*x` against `L` of the dual model; worst over the given vectors.
pub fn intertwining_check(setup: &DualPairSetup, xs: &[Vec<C>], window: &TruncationWindow) -> Result<IntertwiningResiduals> {
    worst_intertwining(&setup.dual_pair, &setup.frame, xs, window)
}

/// The same relations for the primal model: `T` against `M_z`, `T'*` against `L`.
pub fn primal_intertwining_check(setup: &DualPairSetup, xs: &[Vec<C>], window: &TruncationWindow) -> Result<IntertwiningResiduals> {
    worst_intertwining(&setup.pair, &setup.frame, xs, window)
}

fn worst_intertwining(pair: &OperatorPair, frame: &WanderingFrame, xs: &[Vec<C>], window: &TruncationWindow) -> Result<IntertwiningResiduals> {
    let mut out = IntertwiningResiduals { shift: 0.0, left_inverse: 0.0 };
    for x in xs {
        let r = intertwining_for(pair, frame, window, x)?;
        out.shift = out.shift.max(r.shift);
        out.left_inverse = out.left_inverse.max(r.left_inverse);
    }
    Ok(out)
}

/// Basis vectors within a quarter of the degree window of level zero whose
/// models, dual models and duality sums stay exact.
pub fn shrunk_core(setup: &DualPairSetup, limit: usize) -> Vec<usize> {
    let depth = setup.depth();
    let reach = (depth / 4).max(1) as i64;
    let mut core: Vec<usize> = (0..setup.dim())
        .filter(|&v| setup.levels.get(v).abs() <= reach)
        .filter(|&v| {
            let e = unit(setup.dim(), v);
            !setup.model(&e).any_degraded()
                && !setup.dual_model(&e).any_degraded()
                && duality_sum(setup, &e, depth).degraded_from.is_none()
        })
        .collect();
    if core.len() > limit && limit > 0 {
        let step = core.len() as f64 / limit as f64;
        core = (0..limit).map(|k| core[(k as f64 * step) as usize]).collect();
    }
    core
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Residuals {
    /// Reconstruction error relative to the summed term magnitudes.
    pub residual_i: f64,
    pub residual_i_absolute: f64,
    pub residual_ii: f64,
    pub residual_ii_absolute: f64,
    pub residual_iii: f64,
    pub residual_iv: f64,
    pub quadrature_agreement: f64,
    pub symmetry: f64,
    pub symmetry_relative: f64,
    pub intertwining: [f64; 2],
    pub primal_intertwining: [f64; 2],
    pub orthonormality: f64,
    pub wandering_orthogonality: f64,
    pub span_exhaustion: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct WindowInfo {
    pub vertex_radius: usize,
    pub degree_min: i64,
    pub degree_max: i64,
    pub dimension: usize,
    pub frame_dimension: usize,
    pub test_vectors: usize,
    pub quadrature_points: usize,
    pub symmetry_points: [[f64; 2]; 2],
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DualityReport {
    pub residuals: Residuals,
    pub window: WindowInfo,
    pub hypothesis_flags: HypothesisFlags,
    pub radii: RadiiReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form_radii: Option<RadiiReport>,
    pub r_sweep: Vec<(f64, f64)>,
}

#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    pub structural: f64,
    pub duality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { structural: 1e-10, duality: 1e-8 }
    }
}

impl DualityReport {
    pub fn structural_residuals(&self) -> [f64; 3] {
        let r = &self.residuals;
        [r.orthonormality, r.wandering_orthogonality, r.span_exhaustion]
    }

    pub fn duality_residuals(&self) -> Vec<f64> {
        let r = &self.residuals;
        let mut v = vec![
            r.residual_i,
            r.residual_ii,
            r.residual_iii,
            r.residual_iv,
            r.quadrature_agreement,
            r.symmetry_relative,
        ];
        v.extend(r.intertwining);
        v.extend(r.primal_intertwining);
        v
    }

    /// Every residual strictly below its tolerance.
    pub fn residuals_pass(&self, tol: &Tolerances) -> bool {
        self.structural_residuals().iter().all(|&r| r < tol.structural)
            && self.duality_residuals().iter().all(|&r| r < tol.duality)
    }

    /// 0 when everything passes, 1 on a residual failure, 3 when only the
    /// annulus hypotheses fail.
    pub fn exit_code(&self, tol: &Tolerances) -> i32 {
        if !self.residuals_pass(tol) {
            1
        } else if !self.hypothesis_flags.hold() {
            3
        } else {
            0
        }
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub quad_points: Option<usize>,
    pub sweep: Option<Vec<f64>>,
    pub test_vectors: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { quad_points: None, sweep: None, test_vectors: 24 }
    }
}

/// Sample points inside the primal and dual annuli where the symmetry series
/// are absolutely convergent.
fn symmetry_points(setup: &DualPairSetup) -> (C, C) {
    let lo = setup.radii.r_minus.unwrap_or(0.0);
    let hi = setup.radii.r_plus.unwrap_or(f64::INFINITY).min(4.0 * lo.max(0.25));
    let z_mod = if hi.is_finite() && hi > lo { (lo + hi) / 2.0 } else { lo.max(0.1) * 1.2 };
    let lo_p = setup.radii.r_minus_prime.unwrap_or(0.0);
    let hi_p = setup.radii.r_plus_prime.unwrap_or(f64::INFINITY);
    let mut l_mod = if hi_p.is_finite() && hi_p > lo_p { (lo_p + hi_p) / 2.0 } else { lo_p.max(0.1) * 1.2 };
    if l_mod * z_mod >= 0.9 {
        l_mod = 0.8 / z_mod;
    }
    (C::from_polar(z_mod, 0.3), C::from_polar(l_mod, -0.7))
}

/// Run every identity check on the shrunk core and collect the report.
pub fn verify(setup: &DualPairSetup, opts: &VerifyOptions) -> Result<DualityReport> {
    let core = shrunk_core(setup, opts.test_vectors);
    if core.is_empty() {
        return Err(Error::Input("the truncation leaves no vertex whose series stay exact; enlarge the vertex radius".into()));
    }
    let n = setup.dim();
    let depth = setup.depth();
    let window = setup.window;
    let span = window.degree_span();
    let points = opts.quad_points.unwrap_or(4 * span.max(1) + 4);
    let basis: Vec<Vec<C>> = core.iter().map(|&v| unit(n, v)).collect();
    let models: Vec<LaurentModel> = basis.iter().map(|x| setup.model(x)).collect();
    let dual_models: Vec<LaurentModel> = basis.iter().map(|x| setup.dual_model(x)).collect();

    let mut res_iv = 0.0f64;
    for x in &basis {
        res_iv = res_iv.max(duality_sum(setup, x, depth).residual());
    }

    let mut res_iii = 0.0f64;
    for (i, f) in models.iter().enumerate() {
        for (j, g) in dual_models.iter().enumerate() {
            let expect = if i == j { ONE } else { ZERO };
            res_iii = res_iii.max((cauchy_pairing(f, g) - expect).norm());
        }
    }

    let mut res_i = 0.0f64;
    let mut res_i_abs = 0.0f64;
    let mut agreement = 0.0f64;
    let mut res_ii = 0.0f64;
    let mut res_ii_abs = 0.0f64;
    let probe: Vec<usize> = {
        let count = core.len().min(6);
        (0..count).map(|k| k * core.len() / count).collect()
    };
    for &k in &probe {
        let c = circle_reconstruction(setup, &models[k], 1.0, points)?;
        res_i = res_i.max(c.relative_residual());
        res_i_abs = res_i_abs.max(c.residual);
        agreement = agreement.max(c.relative_agreement());
        for &j in &probe {
            let expect = if k == j { ONE } else { ZERO };
            let p = circle_pairing(&models[k], &dual_models[j], 1.0, points)?;
            let err = (p.value - expect).norm();
            res_ii = res_ii.max(err / p.scale.max(1.0));
            res_ii_abs = res_ii_abs.max(err);
        }
    }

    let sweep = opts.sweep.clone().unwrap_or_else(|| default_sweep(setup));
    let mut rows = vec![0.0; sweep.len()];
    for f in probe.iter().map(|&k| &models[k]) {
        for (k, row) in r_sweep(setup, f, &sweep)?.into_iter().enumerate() {
            rows[k] = f64::max(rows[k], row.residual);
        }
    }

    let (z, lambda) = symmetry_points(setup);
    let d = setup.frame.dim();
    let mut sym = 0.0f64;
    let mut sym_rel = 0.0f64;
    for a in 0..d {
        for b in 0..d {
            let s = symmetry_check(setup, z, lambda, &unit(d, a), &unit(d, b), &window);
            sym = sym.max(s.residual);
            sym_rel = sym_rel.max(s.relative);
        }
    }

    let inter = intertwining_check(setup, &basis, &window)?;
    let primal = primal_intertwining_check(setup, &basis, &window)?;

    let club = club_residuals(&setup.pair, &setup.frame, depth);
    let span_exhaustion = core
        .iter()
        .map(|&v| club.dual_side[v].max(club.primal_side[v]))
        .fold(0.0, f64::max);

    Ok(DualityReport {
        residuals: Residuals {
            residual_i: res_i,
            residual_i_absolute: res_i_abs,
            residual_ii: res_ii,
            residual_ii_absolute: res_ii_abs,
            residual_iii: res_iii,
            residual_iv: res_iv,
            quadrature_agreement: agreement,
            symmetry: sym,
            symmetry_relative: sym_rel,
            intertwining: [inter.shift, inter.left_inverse],
            primal_intertwining: [primal.shift, primal.left_inverse],
            orthonormality: setup.frame.orthonormality_residual(),
            wandering_orthogonality: spade_residual(&setup.pair, &setup.frame, depth),
            span_exhaustion,
        },
        window: WindowInfo {
            vertex_radius: window.vertex_radius,
            degree_min: window.degree_min,
            degree_max: window.degree_max,
            dimension: n,
            frame_dimension: d,
            test_vectors: core.len(),
            quadrature_points: points,
            symmetry_points: [[z.re, z.im], [lambda.re, lambda.im]],
        },
        hypothesis_flags: setup.flags.clone(),
        radii: setup.radii.clone(),
        closed_form_radii: setup.closed_form.clone(),
        r_sweep: sweep.iter().copied().zip(rows).collect(),
    })
}

/// `<x, y>` recovered through the pairing of a model with a dual model.
pub fn pairing_matrix(setup: &DualPairSetup, vertices: &[usize]) -> Vec<Vec<C>> {
    let n = setup.dim();
    let models: Vec<LaurentModel> = vertices.iter().map(|&v| setup.model(&unit(n, v))).collect();
    let duals: Vec<LaurentModel> = vertices.iter().map(|&v| setup.dual_model(&unit(n, v))).collect();
    models.iter().map(|f| duals.iter().map(|g| cauchy_pairing(f, g)).collect()).collect()
}

/// Norm of a vector relative to the largest of the given scales.
pub fn relative_to(residual: f64, scale: &[C]) -> f64 {
    let s = norm(scale);
    if s == 0.0 {
        residual
    } else {
        residual / s
    }
}

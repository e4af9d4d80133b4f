//! Parametric families with known ground truth: weighted shifts, the
//! cycle-with-tail family and branching directed trees.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Image, SelfMapSystem};
use crate::linalg::C;
use crate::model::{RadiiMethod, RadiiReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftWeights {
    /// `w_n = 1`
    Hardy,
    /// `w_n = sqrt((n+1)/(n+2))`
    Bergman,
    /// `w_n = sqrt((n+2)/(n+1))`
    Dirichlet,
}

impl ShiftWeights {
    /// `w_n^2` as an exact fraction.
    pub fn square(self, n: u64) -> BigRational {
        let (p, q) = match self {
            ShiftWeights::Hardy => (1, 1),
            ShiftWeights::Bergman => (n + 1, n + 2),
            ShiftWeights::Dirichlet => (n + 2, n + 1),
        };
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    pub fn weight(self, n: u64) -> f64 {
        let n = n as f64;
        match self {
            ShiftWeights::Hardy => 1.0,
            ShiftWeights::Bergman => ((n + 1.0) / (n + 2.0)).sqrt(),
            ShiftWeights::Dirichlet => ((n + 2.0) / (n + 1.0)).sqrt(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilySpec {
    /// Vertices `0, 1, ...` with `phi(n) = n - 1` and `0` a root.
    UnilateralShift { weights: ShiftWeights },
    /// Vertices in `Z` with `phi(n) = n - 1` and constant weight.
    BilateralShift { weight: f64 },
    /// Cycle `0 -> m -> m-1 -> ... -> 0` with the tail `(0,i) -> (0,i-1)`, `(0,0) -> m`.
    CycleTail { m: usize, lambda: f64, lambdas: Vec<f64> },
    /// Rootless tree: a spine `u0 <- u1 <- ...` going up, `branches` descending
    /// chains hanging from `u0`, and optionally one more chain hanging from
    /// the vertex at depth `second_depth` of the first chain.
    DirectedTree {
        branches: usize,
        spine: f64,
        branch_weights: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        second_depth: Option<usize>,
    },
}

impl FamilySpec {
    pub fn hardy() -> Self {
        FamilySpec::UnilateralShift { weights: ShiftWeights::Hardy }
    }

    pub fn bergman() -> Self {
        FamilySpec::UnilateralShift { weights: ShiftWeights::Bergman }
    }

    pub fn dirichlet() -> Self {
        FamilySpec::UnilateralShift { weights: ShiftWeights::Dirichlet }
    }

    pub fn cycle_tail(m: usize, lambda: f64, lambdas: Vec<f64>) -> Self {
        FamilySpec::CycleTail { m, lambda, lambdas }
    }

    pub fn validate(&self) -> Result<()> {
        let unit_open = |v: f64| v > 0.0 && v < 1.0;
        match self {
            FamilySpec::UnilateralShift { .. } => Ok(()),
            FamilySpec::BilateralShift { weight } if weight.is_finite() => Ok(()),
            FamilySpec::BilateralShift { .. } => Err(Error::Input("bilateral weight must be finite".into())),
            FamilySpec::CycleTail { m, lambda, lambdas } => {
                if lambdas.len() != *m {
                    return Err(Error::Input(format!("cycle_tail needs {m} values in lambdas, got {}", lambdas.len())));
                }
                if !unit_open(*lambda) || !lambdas.iter().all(|&l| unit_open(l)) {
                    return Err(Error::Input("cycle_tail parameters must lie in (0,1)".into()));
                }
                Ok(())
            }
            FamilySpec::DirectedTree { branches, spine, branch_weights, .. } => {
                if *branches == 0 || branch_weights.len() != *branches {
                    return Err(Error::Input("directed_tree needs one weight per branch".into()));
                }
                if *spine == 0.0 || branch_weights.contains(&0.0) {
                    return Err(Error::Input("directed_tree weights must be nonzero".into()));
                }
                Ok(())
            }
        }
    }
}

pub fn tail_label(orbit: usize, i: usize) -> String {
    format!("({orbit},{i})")
}

struct Builder {
    labels: Vec<String>,
    targets: Vec<Target>,
    weight: Vec<C>,
    open: Vec<bool>,
}

enum Target {
    Label(String),
    Root,
    Beyond,
}

impl Builder {
    fn new() -> Self {
        Self { labels: Vec::new(), targets: Vec::new(), weight: Vec::new(), open: Vec::new() }
    }

    fn push(&mut self, label: String, target: Target, w: f64, open: bool) {
        self.labels.push(label);
        self.targets.push(target);
        self.weight.push(C::new(w, 0.0));
        self.open.push(open);
    }

    fn finish(self, spec: &FamilySpec) -> Result<SelfMapSystem> {
        let pos: std::collections::HashMap<&str, usize> =
            self.labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        let phi = self
            .targets
            .iter()
            .map(|t| match t {
                Target::Label(l) => Image::Vertex(pos[l.as_str()]),
                Target::Root => Image::Root,
                Target::Beyond => Image::Beyond,
            })
            .collect();
        Ok(SelfMapSystem::new(self.labels.clone(), phi, self.weight, self.open)?.with_family(spec.clone()))
    }
}

/// Materialize a family on the vertices with `|level| <= radius`.
pub fn instantiate(spec: &FamilySpec, radius: usize) -> Result<SelfMapSystem> {
    spec.validate()?;
    if radius == 0 {
        return Err(Error::Input("vertex radius must be positive".into()));
    }
    let mut b = Builder::new();
    match spec {
        FamilySpec::UnilateralShift { weights } => {
            for n in 0..radius {
                let target = if n == 0 { Target::Root } else { Target::Label((n - 1).to_string()) };
                b.push(n.to_string(), target, weights.weight(n as u64), n + 1 == radius);
            }
        }
        FamilySpec::BilateralShift { weight } => {
            let r = radius as i64;
            for n in -r..=r {
                let target = if n == -r { Target::Beyond } else { Target::Label((n - 1).to_string()) };
                b.push(n.to_string(), target, *weight, n == r);
            }
        }
        FamilySpec::CycleTail { m, lambda, lambdas } => {
            let m = *m;
            let prod: f64 = lambdas.iter().product();
            for i in 0..=m {
                let target = if i == 0 { m.to_string() } else { (i - 1).to_string() };
                let w = if i == 0 { 1.0 } else { lambdas[i - 1] };
                b.push(i.to_string(), Target::Label(target), w, false);
            }
            let w00 = (prod / lambda.powi(m as i32 + 1)).sqrt();
            for i in 0..radius {
                let target = if i == 0 { m.to_string() } else { tail_label(0, i - 1) };
                let w = if i == 0 { w00 } else { 1.0 / lambda };
                b.push(tail_label(0, i), Target::Label(target), w, i + 1 == radius);
            }
        }
        FamilySpec::DirectedTree { branches, spine, branch_weights, second_depth } => {
            for j in 0..radius {
                let target = if j + 1 == radius { Target::Beyond } else { Target::Label(format!("u{}", j + 1)) };
                b.push(format!("u{j}"), target, *spine, false);
            }
            // chain vertex (c,i) sits at level i + 2
            let len = radius.saturating_sub(1);
            for (c, &bw) in branch_weights.iter().enumerate().take(*branches) {
                for i in 0..len {
                    let target = if i == 0 { "u0".to_string() } else { tail_label(c + 1, i - 1) };
                    b.push(tail_label(c + 1, i), Target::Label(target), bw, i + 1 == len);
                }
            }
            if let Some(d) = *second_depth {
                if d + 1 >= len {
                    return Err(Error::Input("second_depth lies outside the window".into()));
                }
                let extra = *branches + 1;
                let len2 = len - d - 1;
                for i in 0..len2 {
                    let target = if i == 0 { tail_label(1, d) } else { tail_label(extra, i - 1) };
                    b.push(tail_label(extra, i), Target::Label(target), branch_weights[0], i + 1 == len2);
                }
            }
        }
    }
    b.finish(spec)
}

/// Closed-form radii of the model and dual-model annuli.
///
/// For `cycle_tail` the dual inner radius is the tabulated closed form; see
/// [`cycle_tail_dual_inner_radius`] for the value implied by the dual weights.
pub fn expected_radii(spec: &FamilySpec) -> Result<RadiiReport> {
    spec.validate()?;
    let (rm, rp, rmp, rpp) = match spec {
        FamilySpec::UnilateralShift { .. } => (0.0, 1.0, 0.0, 1.0),
        FamilySpec::BilateralShift { weight } => {
            let c = weight.abs();
            (c, c, 1.0 / c, 1.0 / c)
        }
        FamilySpec::CycleTail { m, lambda, lambdas } => {
            let p: f64 = lambdas.iter().product();
            let k = (*m + 1) as f64;
            let lk = lambda.powf(k);
            (p.powf(1.0 / k), 1.0 / lambda, lambda * (p / (lk + p)).powf(1.0 / k), *lambda)
        }
        FamilySpec::DirectedTree { .. } => {
            return Err(Error::Capability("no closed-form radii for directed_tree".into()))
        }
    };
    Ok(RadiiReport::new(rm, rp, rmp, rpp, RadiiMethod::ClosedForm))
}

/// Dual inner radius from the cycle product of the Cauchy dual weights:
/// `(prod_cycle |w'|)^(1/(m+1)) = lambda * (1 / (P (lambda^(m+1) + P)))^(1/(m+1))`.
pub fn cycle_tail_dual_inner_radius(spec: &FamilySpec) -> Result<f64> {
    match spec {
        FamilySpec::CycleTail { m, lambda, lambdas } => {
            let p: f64 = lambdas.iter().product();
            let k = (*m + 1) as f64;
            Ok(lambda * (1.0 / (p * (lambda.powf(k) + p))).powf(1.0 / k))
        }
        _ => Err(Error::Capability("dual inner radius closed form is specific to cycle_tail".into())),
    }
}

/// `Lambda = prod over the cycle of w`.
pub fn cycle_weight_product(system: &SelfMapSystem, cycle: &[usize]) -> C {
    cycle.iter().map(|&x| system.weight(x)).product()
}

/// Exact binary expansion of a finite double.
pub fn exact(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite parameter")
}

/// Squared weights of a family, exactly, in the vertex order of [`instantiate`].
pub fn exact_weight_squares(spec: &FamilySpec, radius: usize) -> Result<Vec<BigRational>> {
    let system = instantiate(spec, radius)?;
    let mut out = Vec::with_capacity(system.len());
    match spec {
        FamilySpec::UnilateralShift { weights } => {
            for n in 0..system.len() {
                out.push(weights.square(n as u64));
            }
        }
        FamilySpec::BilateralShift { weight } => {
            let w = exact(*weight);
            out.resize(system.len(), &w * &w);
        }
        FamilySpec::CycleTail { m, lambda, lambdas } => {
            let l = exact(*lambda);
            let ls: Vec<BigRational> = lambdas.iter().map(|&v| exact(v)).collect();
            let p: BigRational = ls.iter().fold(BigRational::one(), |a, b| a * b);
            out.push(BigRational::one());
            for li in &ls {
                out.push(li * li);
            }
            out.push(&p / pow(&l, *m + 1));
            let tail = BigRational::one() / (&l * &l);
            out.resize(system.len(), tail);
        }
        FamilySpec::DirectedTree { .. } => {
            for x in 0..system.len() {
                let w = exact(system.weight(x).re);
                out.push(&w * &w);
            }
        }
    }
    Ok(out)
}

fn pow(base: &BigRational, k: usize) -> BigRational {
    (0..k).fold(BigRational::one(), |a, _| a * base)
}

/// `w'(x)^2 = w(x)^2 / s(x)^2` with `s(x) = sum_{y in phi^-1(phi(x))} w(y)^2`,
/// evaluated exactly. Vertices without a materialized parent get `1 / w(x)^2`.
pub fn exact_dual_weight_squares(system: &SelfMapSystem, squares: &[BigRational]) -> Result<Vec<BigRational>> {
    let mut out = Vec::with_capacity(system.len());
    for x in 0..system.len() {
        let s: BigRational = match system.image(x) {
            Image::Vertex(p) => system.preimages(p).iter().map(|&y| squares[y].clone()).sum(),
            _ => squares[x].clone(),
        };
        if s.is_zero() {
            return Err(Error::SingularDual { vertex: system.label(x).to_string() });
        }
        out.push(&squares[x] / (&s * &s));
    }
    Ok(out)
}

/// The four-clause closed-form table of Cauchy dual weights for `cycle_tail`,
/// squared: `w'(0) = 1`, `w'(i) = 1/lambda_i`,
/// `w'((0,0)) = lambda^(m+1) / (lambda^(m+1) + P)`, `w'((0,i)) = lambda`.
pub fn tabulated_cycle_tail_dual_squares(spec: &FamilySpec, radius: usize) -> Result<Vec<(String, BigRational)>> {
    let FamilySpec::CycleTail { m, lambda, lambdas } = spec else {
        return Err(Error::Capability("the tabulated dual weights exist only for cycle_tail".into()));
    };
    let l = exact(*lambda);
    let ls: Vec<BigRational> = lambdas.iter().map(|&v| exact(v)).collect();
    let p: BigRational = ls.iter().fold(BigRational::one(), |a, b| a * b);
    let lk = pow(&l, *m + 1);
    let mut out = vec![("0".to_string(), BigRational::one())];
    for (i, li) in ls.iter().enumerate() {
        out.push(((i + 1).to_string(), BigRational::one() / (li * li)));
    }
    let w00 = &lk / (&lk + &p);
    out.push((tail_label(0, 0), &w00 * &w00));
    for i in 1..radius {
        out.push((tail_label(0, i), &l * &l));
    }
    Ok(out)
}

/// Random functional graph on `n` vertices, every preimage set complete.
/// With `rooted`, each vertex maps to an earlier vertex or is a root.
pub fn random_system<R: Rng>(rng: &mut R, n: usize, rooted: bool) -> SelfMapSystem {
    let labels: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let phi = (0..n)
        .map(|i| {
            if rooted {
                if i == 0 || rng.gen_bool(0.15) {
                    Image::Root
                } else {
                    Image::Vertex(rng.gen_range(0..i))
                }
            } else {
                Image::Vertex(rng.gen_range(0..n))
            }
        })
        .collect();
    let weight = (0..n)
        .map(|_| C::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
        .collect();
    SelfMapSystem::new(labels, phi, weight, vec![false; n]).expect("valid random system")
}

/// A cycle of length `tau` where every cycle vertex may carry extra leaves.
/// At least one leaf with nonzero weight is attached so that `h(0) < 1`.
pub fn random_cycle_system<R: Rng>(rng: &mut R, tau: usize, max_leaves: usize) -> SelfMapSystem {
    let mut labels = Vec::new();
    let mut phi = Vec::new();
    let mut weight = Vec::new();
    for k in 0..tau {
        labels.push(format!("c{k}"));
        phi.push(Image::Vertex((k + 1) % tau));
        weight.push(C::new(rng.gen_range(0.3..2.0), rng.gen_range(-1.0..1.0)));
    }
    let forced = rng.gen_range(0..tau);
    for k in 0..tau {
        let leaves = rng.gen_range(0..=max_leaves).max(usize::from(k == forced));
        for j in 0..leaves {
            labels.push(format!("l{k}_{j}"));
            phi.push(Image::Vertex((k + 1) % tau));
            weight.push(C::new(rng.gen_range(0.2..1.5), rng.gen_range(-1.0..1.0)));
        }
    }
    let n = labels.len();
    SelfMapSystem::new(labels, phi, weight, vec![false; n]).expect("valid cycle system")
}

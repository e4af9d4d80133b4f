//! Acceptance criteria 1-10. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

#![allow(clippy::needless_range_loop)]

use std::process::{Command, ExitCode};

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cauchy_dual::catalog::{
    exact_dual_weight_squares, exact_weight_squares, expected_radii, instantiate, tabulated_cycle_tail_dual_squares,
    random_cycle_system, random_system, FamilySpec,
};
use cauchy_dual::duality::{
    circle_reconstruction, cycle_band_brute_force, cycle_closed_form, cycle_h, default_sweep, duality_sum, r_sweep,
    radii_agree, shrunk_core, verify, DualPairSetup, VerifyOptions,
};
use cauchy_dual::graph::{decompose_orbits, Image, OrbitAnchor, SelfMapSystem, TruncationWindow};
use cauchy_dual::linalg::{inner, norm, unit, C, ZERO};
use cauchy_dual::model::kernel_vector;
use cauchy_dual::operators::{
    adjoint_power_closed_form, cauchy_dual_direct, cauchy_dual_weights, composition_operator, gram_diagonal,
    power_closed_form, OperatorPair,
};
use cauchy_dual::Error;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn catalog() -> Vec<(&'static str, FamilySpec)> {
    vec![
        ("hardy", FamilySpec::hardy()),
        ("bergman", FamilySpec::bergman()),
        ("dirichlet", FamilySpec::dirichlet()),
        ("bilateral_shift", FamilySpec::BilateralShift { weight: 1.5 }),
        ("cycle_tail", FamilySpec::cycle_tail(1, 0.5, vec![0.25])),
        ("cycle_tail_m2", FamilySpec::cycle_tail(2, 0.6, vec![0.3, 0.7])),
        (
            "directed_tree",
            FamilySpec::DirectedTree { branches: 2, spine: 0.7, branch_weights: vec![1.1, 1.4], second_depth: Some(2) },
        ),
    ]
}

fn setup(spec: &FamilySpec, depth: usize) -> cauchy_dual::Result<DualPairSetup> {
    let radius = 2 * depth + 10;
    let system = instantiate(spec, radius)?;
    DualPairSetup::new(system, TruncationWindow::symmetric(radius, depth), expected_radii(spec).ok())
}

// naive dense realization straight from the graph: M[y][phi(y)] = w(y)
struct Dense(Vec<Vec<C>>);

impl Dense {
    fn of(system: &SelfMapSystem) -> Self {
        let n = system.len();
        let mut m = vec![vec![ZERO; n]; n];
        for y in 0..n {
            if let Image::Vertex(p) = system.image(y) {
                m[y][p] = system.weight(y);
            }
        }
        Dense(m)
    }

    fn mul(&self, v: &[C]) -> Vec<C> {
        self.0.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    fn adj_mul(&self, v: &[C]) -> Vec<C> {
        let n = v.len();
        (0..n).map(|j| (0..n).map(|i| self.0[i][j].conj() * v[i]).sum()).collect()
    }
}

fn max_diff(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn sparse_to_vec(n: usize, entries: &[(usize, C)]) -> Vec<C> {
    let mut v = vec![ZERO; n];
    for &(i, c) in entries {
        v[i] += c;
    }
    v
}

/// Worst residual of the five composition identities over every basis vector.
fn composition_calculus(system: &SelfMapSystem) -> f64 {
    const MAX_POWER: usize = 5;
    let n = system.len();
    let t = composition_operator(system);
    let t_adj = t.adjoint();
    let dense = Dense::of(system);
    let gram = gram_diagonal(system);
    let mut worst = 0.0f64;
    for x in 0..n {
        let ex = unit(n, x);
        if system.image_known(x) {
            let mut expect = vec![ZERO; n];
            if let Image::Vertex(p) = system.image(x) {
                expect[p] = system.weight(x).conj();
            }
            let lib = t_adj.apply(&ex);
            worst = worst.max(max_diff(&lib.vector, &expect)).max(max_diff(&dense.adj_mul(&ex), &expect));
        }
        if system.preimages_complete(x) {
            let mut expect = vec![ZERO; n];
            for y in 0..n {
                if system.image(y) == Image::Vertex(x) {
                    expect[y] += system.weight(y);
                }
            }
            worst = worst.max(max_diff(&t.apply(&ex).vector, &expect)).max(max_diff(&dense.mul(&ex), &expect));
            let mut gram_expect = vec![ZERO; n];
            gram_expect[x] = C::new(system.preimage_mass(x), 0.0);
            worst = worst
                .max(max_diff(&t_adj.apply(&t.apply(&ex).vector).vector, &gram_expect))
                .max(max_diff(&dense.adj_mul(&dense.mul(&ex)), &gram_expect))
                .max((gram.values[x] - gram_expect[x].re).abs());
        }
        let mut naive_adj = ex.clone();
        let mut naive = ex.clone();
        for k in 1..=MAX_POWER {
            naive_adj = dense.adj_mul(&naive_adj);
            naive = dense.mul(&naive);
            if let Some((target, coef)) = adjoint_power_closed_form(system, x, k) {
                // conj(w(x) w(phi x) ... w(phi^(k-1) x)) e_{phi^k x}, zero past a root
                let mut expect = vec![ZERO; n];
                let mut y = x;
                let mut prod = C::new(1.0, 0.0);
                let mut alive = true;
                for _ in 0..k {
                    prod *= system.weight(y).conj();
                    match system.image(y) {
                        Image::Vertex(z) => y = z,
                        _ => {
                            alive = false;
                            break;
                        }
                    }
                }
                if alive {
                    expect[y] = prod;
                }
                let closed = target.map_or(vec![ZERO; n], |v| sparse_to_vec(n, &[(v, coef)]));
                let lib = t_adj.power_apply(k, &ex);
                worst = worst.max(max_diff(&closed, &expect)).max(max_diff(&naive_adj, &expect));
                if !lib.degraded {
                    worst = worst.max(max_diff(&lib.vector, &expect));
                }
            }
            if let Some(entries) = power_closed_form(system, x, k) {
                // sum over y in phi^-k(x) of w(y) w(phi y) ... w(phi^(k-1) y) e_y
                let mut expect = vec![ZERO; n];
                for y in 0..n {
                    if system.iterate(y, k) == Some(x) {
                        let mut prod = C::new(1.0, 0.0);
                        let mut z = y;
                        for _ in 0..k {
                            prod *= system.weight(z);
                            z = system.iterate(z, 1).unwrap();
                        }
                        expect[y] += prod;
                    }
                }
                let lib = t.power_apply(k, &ex);
                worst = worst
                    .max(max_diff(&sparse_to_vec(n, &entries), &expect))
                    .max(max_diff(&naive, &expect))
                    .max(max_diff(&lib.vector, &expect));
            }
        }
    }
    worst
}

fn criterion_1() -> Outcome {
    let mut worst = 0.0f64;
    let mut names = Vec::new();
    for (name, spec) in catalog() {
        let system = instantiate(&spec, 40).unwrap();
        worst = worst.max(composition_calculus(&system));
        names.push(name);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x1);
    for k in 0..10 {
        let system = random_system(&mut rng, 40, k % 2 == 0);
        worst = worst.max(composition_calculus(&system));
    }
    Outcome::new(worst <= 1e-12, format!("max residual {worst:.3e} over {} catalog systems and 10 random graphs", names.len()))
}

fn criterion_2() -> Outcome {
    let mut worst = 0.0f64;
    for (_, spec) in catalog() {
        let system = instantiate(&spec, 40).unwrap();
        let t = composition_operator(&system);
        let direct = cauchy_dual_direct(&t).unwrap();
        let via_weights = composition_operator(&cauchy_dual_weights(&system).unwrap());
        let core = t.valid_core();
        for j in (0..t.dim()).filter(|&j| core[j]) {
            for i in 0..t.dim() {
                worst = worst.max((direct.entry(i, j) - via_weights.entry(i, j)).norm());
            }
        }
    }
    let spec = FamilySpec::cycle_tail(1, 0.5, vec![0.25]);
    let radius = 12;
    let system = instantiate(&spec, radius).unwrap();
    let exact = exact_dual_weight_squares(&system, &exact_weight_squares(&spec, radius).unwrap()).unwrap();
    let tabulated = tabulated_cycle_tail_dual_squares(&spec, radius).unwrap();
    let mut mismatches = Vec::new();
    for (label, value) in &tabulated {
        let x = system.index_of(label).unwrap();
        if exact[x] != *value {
            mismatches.push(format!("w'({label})^2 = {} but the table gives {}", exact[x], value));
        }
    }
    let numeric = worst <= 1e-10;
    let table = mismatches.is_empty();
    let detail = format!(
        "direct vs weights {worst:.3e}; tabulated w' {}",
        if table { "matches exactly".to_string() } else { mismatches.join("; ") }
    );
    Outcome::new(numeric && table, detail)
}

fn criterion_3() -> Outcome {
    let radius = 120;
    let spec = FamilySpec::bergman();
    let system = instantiate(&spec, radius).unwrap();
    let dual = exact_dual_weight_squares(&system, &exact_weight_squares(&spec, radius).unwrap()).unwrap();
    let mut exact_ok = true;
    for (n, value) in dual.iter().enumerate() {
        let expect = BigRational::new((n as i64 + 2).into(), (n as i64 + 1).into());
        exact_ok &= *value == expect;
    }
    let numeric = cauchy_dual_weights(&system).unwrap();
    let mut float_gap = 0.0f64;
    for n in 0..system.len() {
        float_gap = float_gap.max((numeric.weight(n).re - ((n as f64 + 2.0) / (n as f64 + 1.0)).sqrt()).abs());
    }

    let depth = 40;
    let s = DualPairSetup::new(system, TruncationWindow::symmetric(radius, depth), None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x3);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let mut random_poly = || {
            let deg = rng.gen_range(0..=30);
            let mut v = vec![ZERO; s.dim()];
            for c in v.iter_mut().take(deg + 1) {
                *c = C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
            v
        };
        let (x, y) = (random_poly(), random_poly());
        let f = s.model(&x);
        let g = s.dual_model(&y);
        let poly = f.degrees().filter(|&n| !(0..=30).contains(&n)).all(|n| norm(f.coeff(n).unwrap()) == 0.0);
        let pairing = cauchy_dual::duality::cauchy_pairing(&f, &g);
        let err = (pairing - inner(&x, &y)).norm();
        worst = worst.max(if poly { err } else { f64::INFINITY });
    }
    Outcome::new(
        exact_ok && float_gap <= 1e-12 && worst <= 1e-10,
        format!("exact dual weights {}; float gap {float_gap:.3e}; pairing residual {worst:.3e} over 50 pairs", if exact_ok { "match" } else { "differ" }),
    )
}

fn criterion_4() -> Outcome {
    let spec = FamilySpec::cycle_tail(1, 0.5, vec![0.25]);
    let closed = expected_radii(&spec).unwrap();
    let reference = [0.5, 2.0, 0.5, 0.353_553_39];
    let closed_vals = [closed.r_minus, closed.r_plus, closed.r_plus_prime, closed.r_minus_prime];
    let closed_ok = closed_vals.iter().zip(reference).all(|(a, b)| a.is_some_and(|a| (a - b).abs() < 1e-8));
    let s = setup(&spec, 200).unwrap();
    let rt = &s.radii;
    let root_vals = [rt.r_minus, rt.r_plus, rt.r_plus_prime, rt.r_minus_prime];
    let names = ["r-", "r+", "r'+", "r'-"];
    let mut parts = Vec::new();
    let mut root_ok = true;
    for ((name, c), r) in names.iter().zip(closed_vals).zip(root_vals) {
        let ok = matches!((c, r), (Some(c), Some(r)) if radii_agree(c, r, 0.05));
        root_ok &= ok;
        parts.push(format!("{name} {:.6}/{}", c.unwrap_or(f64::NAN), r.map_or("n/a".into(), |v| format!("{v:.6}"))));
    }
    Outcome::new(
        closed_ok && root_ok,
        format!(
            "closed forms {} the reference values; closed/root-test at depth 200: {}",
            if closed_ok { "match" } else { "differ from" },
            parts.join(", ")
        ),
    )
}

fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn criterion_5() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    let depth = 60;
    for spec in [FamilySpec::cycle_tail(1, 0.5, vec![0.25]), FamilySpec::cycle_tail(2, 0.6, vec![0.3, 0.7])] {
        let s = setup(&spec, depth).unwrap();
        let cycle = s.decomposition.orbits[0].cycle.clone().unwrap();
        let tau = cycle.len();
        for &x in &cycle {
            let mut cyc = vec![x];
            for k in 1..tau {
                cyc.push(s.system.iterate(x, k).unwrap());
            }
            let h0 = cycle_h(&s.system, &cyc)[0];
            let ds = duality_sum(&s, &unit(s.dim(), x), depth);
            // one sample per revolution of the cycle, skipping the transient
            let pts: Vec<(f64, f64)> = (2..)
                .map(|k| k * tau)
                .take_while(|&n| n < ds.history.len())
                .filter(|&n| ds.history[n] > 1e-250)
                .map(|n| ((n / tau) as f64, ds.history[n].ln()))
                .collect();
            let slope = fit_slope(&pts);
            let ok = ds.degraded_from.is_none() && ((slope - h0.ln()) / h0.ln()).abs() <= 0.10;
            pass &= ok;
            notes.push(format!("{} slope {slope:.4} vs ln h(0) {:.4}", s.system.label(x), h0.ln()));
        }
    }
    let mut acyclic_checked = 0;
    for spec in [
        FamilySpec::hardy(),
        FamilySpec::bergman(),
        FamilySpec::dirichlet(),
        FamilySpec::DirectedTree { branches: 2, spine: 0.7, branch_weights: vec![1.1, 1.4], second_depth: Some(2) },
    ] {
        let s = setup(&spec, 30).unwrap();
        for v in shrunk_core(&s, 0) {
            let level = s.levels.get(v);
            if level > 0 {
                continue;
            }
            let ds = duality_sum(&s, &unit(s.dim(), v), s.depth());
            // the generalized root sits at level 1; a genuine root is its own anchor at level 0
            let offset = match s.levels.anchors[s.decomposition.orbit_of[v]] {
                OrbitAnchor::Acyclic { x_star: None, .. } => 0,
                _ => 1,
            };
            let hit = (offset - level) as usize;
            let first = ds.history.iter().position(|&r| r <= 1e-12);
            let ok = first == Some(hit);
            if !ok {
                notes.push(format!("{} level {level}: first hit {first:?}", s.system.label(v)));
            }
            pass &= ok;
            acyclic_checked += 1;
        }
    }
    notes.push(format!("{acyclic_checked} acyclic vertices first hit 1e-12 at N = -level + 1"));
    Outcome::new(pass, notes.join("; "))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6);
    let mut total_err = 0.0f64;
    let mut brute_err = 0.0f64;
    let mut systems = 0;
    while systems < 20 {
        let tau = rng.gen_range(1..=4);
        let system = random_cycle_system(&mut rng, tau, 3);
        let decomp = decompose_orbits(&system);
        let x = decomp.orbits[0].cycle.as_ref().unwrap()[0];
        let cyc: Vec<usize> = (0..tau).map(|k| system.iterate(x, k).unwrap()).collect();
        let h0 = cycle_h(&system, &cyc)[0];
        if h0.is_nan() || h0 >= 1.0 {
            continue;
        }
        systems += 1;
        let bands: Vec<f64> = (0..tau).map(|m| cycle_closed_form(&system, &decomp, x, m).unwrap()).collect();
        total_err = total_err.max((bands.iter().sum::<f64>() - 1.0).abs());
        // leaves have no preimages in a finite graph, so the dual is taken from the weight formula
        let t = composition_operator(&system);
        let dual = composition_operator(&cauchy_dual_weights(&system).unwrap());
        let pair = OperatorPair { t_adj: t.adjoint(), dual_adj: dual.adjoint(), t, dual };
        let terms = ((tau as f64) * (1e-14f64).ln() / h0.ln()).ceil().clamp(tau as f64, 3000.0) as usize;
        for (m, band) in bands.iter().enumerate() {
            let brute = cycle_band_brute_force(&system, &decomp, &pair, x, m, terms).unwrap();
            brute_err = brute_err.max((brute - band).abs());
        }
    }
    Outcome::new(
        total_err <= 1e-12 && brute_err <= 1e-10,
        format!("band total residual {total_err:.3e}, brute force residual {brute_err:.3e} over 20 systems"),
    )
}

fn criterion_7() -> Outcome {
    let mut agreement = 0.0f64;
    let mut aliasing_refused = true;
    let mut sweep_ok = true;
    let mut notes = Vec::new();
    for (name, spec) in [
        ("hardy", FamilySpec::hardy()),
        ("bergman", FamilySpec::bergman()),
        ("cycle_tail", FamilySpec::cycle_tail(1, 0.5, vec![0.25])),
        ("directed_tree", FamilySpec::DirectedTree { branches: 2, spine: 0.7, branch_weights: vec![1.1, 1.4], second_depth: None }),
    ] {
        let s = setup(&spec, 30).unwrap();
        let span = s.window.degree_span();
        for v in shrunk_core(&s, 4) {
            let f = s.model(&unit(s.dim(), v));
            aliasing_refused &= matches!(circle_reconstruction(&s, &f, 1.0, 2 * span), Err(Error::Aliasing { .. }));
            for points in [2 * span + 1, 2 * span + 7, 4 * span + 4] {
                for r in [0.9, 1.0, 1.1] {
                    let c = circle_reconstruction(&s, &f, r, points).unwrap();
                    agreement = agreement.max(c.relative_agreement());
                }
            }
            let floor = duality_sum(&s, f.source.as_ref().unwrap(), s.depth()).residual();
            let rows = r_sweep(&s, &f, &default_sweep(&s)).unwrap();
            let decreasing = rows.windows(2).all(|w| w[1].residual <= w[0].residual * (1.0 + 1e-12) + 1e-15);
            let last = rows.last().unwrap();
            let reaches = last.r == 1.0 && (last.residual - floor).abs() <= 1e-12 * floor.max(1.0);
            if !(decreasing && reaches) {
                notes.push(format!("{name} {} sweep {:?} floor {floor:.3e}", s.system.label(v), rows));
            }
            sweep_ok &= decreasing && reaches;
        }
    }
    notes.insert(0, format!("relative quadrature agreement {agreement:.3e}"));
    notes.push(format!("aliasing {}", if aliasing_refused { "refused" } else { "accepted" }));
    Outcome::new(agreement <= 1e-10 && aliasing_refused && sweep_ok, notes.join("; "))
}

/// Open interval where both the closed-form and the root-test annuli agree.
fn certified_annulus(s: &DualPairSetup) -> Option<(f64, f64)> {
    let mut lo = s.radii.r_minus?;
    let mut hi = s.radii.r_plus?;
    if let Some(c) = &s.closed_form {
        lo = lo.max(c.r_minus?);
        hi = hi.min(c.r_plus?);
    }
    (lo < hi).then_some((lo, hi))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x8);
    let mut worst = 0.0f64;
    let mut notes = Vec::new();
    let mut pass = true;
    for (name, spec) in catalog() {
        let s = match setup(&spec, 30) {
            Ok(s) => s,
            Err(e) => {
                notes.push(format!("{name}: {e}"));
                pass = false;
                continue;
            }
        };
        let core = shrunk_core(&s, 0);
        let Some((lo, hi)) = certified_annulus(&s).filter(|_| !core.is_empty()) else {
            notes.push(format!("{name}: no certified annulus"));
            continue;
        };
        let (a, b) = (lo + 0.2 * (hi - lo).min(2.0), lo + 0.8 * (hi - lo).min(2.0));
        let d = s.frame.dim();
        for _ in 0..20 {
            let mut x = vec![ZERO; s.dim()];
            for &v in &core {
                x[v] = C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
            let lambda = C::from_polar(rng.gen_range(a..b), rng.gen_range(0.0..std::f64::consts::TAU));
            let e: Vec<C> = (0..d).map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let f = s.model(&x);
            let lhs = inner(&f.value_at(lambda), &e);
            let k = kernel_vector(&s.pair, &s.frame, &s.window, lambda, &e);
            let rhs = inner(&x, &k.vector);
            worst = worst.max((lhs - rhs).norm());
        }
        notes.push(format!("{name} |lambda| in [{a:.3}, {b:.3}]"));
    }
    notes.insert(0, format!("max residual {worst:.3e}"));
    Outcome::new(pass && worst <= 1e-8, notes.join("; "))
}

fn criterion_9() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for (name, spec) in [
        ("bergman", FamilySpec::bergman()),
        ("dirichlet", FamilySpec::dirichlet()),
        ("cycle_tail", FamilySpec::cycle_tail(1, 0.5, vec![0.25])),
    ] {
        let s = setup(&spec, 80).unwrap();
        let r = verify(&s, &VerifyOptions::default()).unwrap().residuals;
        let worst = [r.symmetry_relative, r.intertwining[0], r.intertwining[1], r.primal_intertwining[0], r.primal_intertwining[1]]
            .into_iter()
            .fold(0.0, f64::max);
        pass &= worst <= 1e-8;
        notes.push(format!(
            "{name}: symmetry {:.3e} (absolute {:.3e}), intertwining {:.3e}/{:.3e}",
            r.symmetry_relative, r.symmetry, r.intertwining[0], r.intertwining[1]
        ));
    }
    Outcome::new(pass, notes.join("; "))
}

fn criterion_10() -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_cauchy-dual"))
        .args(["verify", "--family", "cycle_tail", "--params", "m=1,lambda=0.5,lambda1=0.25", "--deg-min", "-120", "--deg-max", "120"])
        .output()
        .expect("binary runs");
    let code = out.status.code();
    let stderr = String::from_utf8_lossy(&out.stderr);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap_or(serde_json::Value::Null);
    let rpp = report["radii"]["rPlusPrime"].as_f64();
    let closed_rpp = report["closedFormRadii"]["rPlusPrime"].as_f64();
    let printed = stderr.contains("does not contain 1");
    let pass = code == Some(3) && printed && closed_rpp.is_some_and(|v| v < 1.0);
    Outcome::new(
        pass,
        format!(
            "exit {:?}; closed-form r'+ = {:?}, root-test r'+ = {:?}; discrepancy {}",
            code,
            closed_rpp,
            rpp,
            if printed { "printed" } else { "missing" }
        ),
    )
}

fn main() -> ExitCode {
    // cargo passes harness flags such as --nocapture; only a filter selects criteria
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [Criterion; 10] = [
        ("composition calculus", criterion_1),
        ("cauchy dual equivalence", criterion_2),
        ("bergman and dirichlet", criterion_3),
        ("radii", criterion_4),
        ("duality sum", criterion_5),
        ("closed-form oracle", criterion_6),
        ("circle reconstruction", criterion_7),
        ("kernel reproducing property", criterion_8),
        ("symmetry and intertwining", criterion_9),
        ("hypothesis flags", criterion_10),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let id = format!("criterion_{}", k + 1);
        if !filter.is_empty() && !filter.iter().any(|f| id == *f || name.contains(f.as_str())) {
            continue;
        }
        let outcome = run();
        println!("{} {id} {name}: {}", if outcome.pass { "PASS" } else { "FAIL" }, outcome.detail);
        failed += usize::from(!outcome.pass);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

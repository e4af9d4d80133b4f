//! Selfmaps of countable sets on finite windows: orbits, cycles, the level
//! function, generalized roots, branching index and descendant sets.

use std::collections::{HashMap, VecDeque};

use crate::catalog::FamilySpec;
use crate::error::{Error, Result};
use crate::linalg::C;

/// Where a vertex is sent by the symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Image {
    Vertex(usize),
    /// The vertex has no image: a root of a rooted tree. `C* e_x = 0` there.
    Root,
    /// The image exists but was not materialized by the window.
    Beyond,
}

/// Vertex set, symbol and weight of a weighted composition operator,
/// materialized on a finite window.
#[derive(Clone, Debug)]
pub struct SelfMapSystem {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    phi: Vec<Image>,
    weight: Vec<C>,
    open: Vec<bool>,
    preimages: Vec<Vec<usize>>,
    family: Option<FamilySpec>,
}

impl SelfMapSystem {
    /// `open[x]` marks vertices whose preimage set was not fully materialized.
    pub fn new(labels: Vec<String>, phi: Vec<Image>, weight: Vec<C>, open: Vec<bool>) -> Result<Self> {
        let n = labels.len();
        if phi.len() != n || weight.len() != n || open.len() != n {
            return Err(Error::Input("label, symbol, weight and boundary lengths differ".into()));
        }
        let mut index = HashMap::with_capacity(n);
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::Input(format!("duplicate vertex label {l}")));
            }
        }
        let mut preimages = vec![Vec::new(); n];
        for (x, im) in phi.iter().enumerate() {
            if let Image::Vertex(y) = *im {
                if y >= n {
                    return Err(Error::Structural(format!("vertex {} maps outside the window", labels[x])));
                }
                preimages[y].push(x);
            }
        }
        for (x, w) in weight.iter().enumerate() {
            if !w.re.is_finite() || !w.im.is_finite() {
                return Err(Error::Input(format!("weight at {} is not finite", labels[x])));
            }
        }
        Ok(Self { labels, index, phi, weight, open, preimages, family: None })
    }

    /// Build from `(label, image label, weight)` triples with every preimage set complete.
    pub fn from_named(entries: &[(&str, Option<&str>, C)]) -> Result<Self> {
        let labels: Vec<String> = entries.iter().map(|e| e.0.to_string()).collect();
        let pos: HashMap<&str, usize> = entries.iter().enumerate().map(|(i, e)| (e.0, i)).collect();
        let mut phi = Vec::with_capacity(entries.len());
        for (label, target, _) in entries {
            phi.push(match target {
                None => Image::Root,
                Some(t) => Image::Vertex(*pos.get(t).ok_or_else(|| {
                    Error::Structural(format!("vertex {label} escapes the window through {t}"))
                })?),
            });
        }
        let weight = entries.iter().map(|e| e.2).collect();
        Self::new(labels, phi, weight, vec![false; entries.len()])
    }

    pub fn with_family(mut self, family: FamilySpec) -> Self {
        self.family = Some(family);
        self
    }

    pub fn family(&self) -> Option<&FamilySpec> {
        self.family.as_ref()
    }

    /// Same graph, new weights.
    pub fn with_weights(&self, weight: Vec<C>) -> Self {
        assert_eq!(weight.len(), self.len());
        Self { weight, ..self.clone() }
    }

    /// Multiply every weight by `t`.
    pub fn scaled(&self, t: f64) -> Self {
        self.with_weights(self.weight.iter().map(|w| w * t).collect())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, x: usize) -> &str {
        &self.labels[x]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn image(&self, x: usize) -> Image {
        self.phi[x]
    }

    pub fn weight(&self, x: usize) -> C {
        self.weight[x]
    }

    pub fn weights(&self) -> &[C] {
        &self.weight
    }

    pub fn preimages(&self, x: usize) -> &[usize] {
        &self.preimages[x]
    }

    /// Preimage set of `x` was not fully materialized.
    pub fn is_open(&self, x: usize) -> bool {
        self.open[x]
    }

    /// `C e_x` is exactly representable in the window.
    pub fn preimages_complete(&self, x: usize) -> bool {
        !self.open[x]
    }

    /// `C* e_x` is exactly representable in the window.
    pub fn image_known(&self, x: usize) -> bool {
        self.phi[x] != Image::Beyond
    }

    /// Vertices whose preimages or image leave the window.
    pub fn boundary(&self) -> Vec<usize> {
        (0..self.len()).filter(|&x| self.open[x] || self.phi[x] == Image::Beyond).collect()
    }

    /// `phi^(n)(x)` if it stays inside the window.
    pub fn iterate(&self, x: usize, n: usize) -> Option<usize> {
        let mut y = x;
        for _ in 0..n {
            match self.phi[y] {
                Image::Vertex(z) => y = z,
                _ => return None,
            }
        }
        Some(y)
    }

    /// `sum_{y in phi^-1(x)} |w(y)|^2`.
    pub fn preimage_mass(&self, x: usize) -> f64 {
        self.preimages[x].iter().map(|&y| self.weight[y].norm_sqr()).sum()
    }
}

/// Truncation parameters. The boundary itself is recorded on the system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TruncationWindow {
    pub vertex_radius: usize,
    pub degree_min: i64,
    pub degree_max: i64,
}

impl TruncationWindow {
    pub fn new(vertex_radius: usize, degree_min: i64, degree_max: i64) -> Result<Self> {
        if degree_min > 0 || degree_max < 0 {
            return Err(Error::Input(format!(
                "degree window [{degree_min}, {degree_max}] must contain 0"
            )));
        }
        Ok(Self { vertex_radius, degree_min, degree_max })
    }

    /// Symmetric degree window `[-depth, depth]`.
    pub fn symmetric(vertex_radius: usize, depth: usize) -> Self {
        Self { vertex_radius, degree_min: -(depth as i64), degree_max: depth as i64 }
    }

    pub fn degree_span(&self) -> usize {
        (self.degree_max - self.degree_min) as usize
    }
}

#[derive(Clone, Debug)]
pub struct Orbit {
    pub members: Vec<usize>,
    /// Cycle in iteration order `x, phi(x), ...` when present.
    pub cycle: Option<Vec<usize>>,
}

impl Orbit {
    pub fn tau(&self) -> Option<usize> {
        self.cycle.as_ref().map(Vec::len)
    }
}

#[derive(Clone, Debug)]
pub struct OrbitDecomposition {
    pub orbits: Vec<Orbit>,
    pub orbit_of: Vec<usize>,
}

impl OrbitDecomposition {
    pub fn on_cycle(&self, x: usize) -> bool {
        self.orbits[self.orbit_of[x]]
            .cycle
            .as_ref()
            .is_some_and(|c| c.contains(&x))
    }
}

/// Partition the window into orbits and find the cycle of each, if any.
pub fn decompose_orbits(system: &SelfMapSystem) -> OrbitDecomposition {
    let n = system.len();
    let mut orbit_of = vec![usize::MAX; n];
    let mut orbits = Vec::new();
    for start in 0..n {
        if orbit_of[start] != usize::MAX {
            continue;
        }
        let id = orbits.len();
        let mut members = Vec::new();
        let mut queue = VecDeque::from([start]);
        orbit_of[start] = id;
        while let Some(x) = queue.pop_front() {
            members.push(x);
            let image = match system.image(x) {
                Image::Vertex(y) => Some(y),
                _ => None,
            };
            for &y in image.iter().chain(system.preimages(x)) {
                if orbit_of[y] == usize::MAX {
                    orbit_of[y] = id;
                    queue.push_back(y);
                }
            }
        }
        members.sort_unstable();
        let cycle = find_cycle(system, members[0]);
        orbits.push(Orbit { members, cycle });
    }
    OrbitDecomposition { orbits, orbit_of }
}

fn find_cycle(system: &SelfMapSystem, start: usize) -> Option<Vec<usize>> {
    let mut seen: HashMap<usize, usize> = HashMap::new();
    let mut path = Vec::new();
    let mut x = start;
    loop {
        if let Some(&pos) = seen.get(&x) {
            return Some(path[pos..].to_vec());
        }
        seen.insert(x, path.len());
        path.push(x);
        match system.image(x) {
            Image::Vertex(y) => x = y,
            _ => return None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GeneralizedRoot {
    pub vertex: usize,
    /// No branch vertex was found, so the topmost window vertex was used.
    pub flagged: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrbitAnchor {
    Cycle { vertex: usize },
    /// `x_star` is `phi(omega)` when that vertex is materialized.
    Acyclic { omega: GeneralizedRoot, x_star: Option<usize> },
}

#[derive(Clone, Debug)]
pub struct LevelFunction {
    pub level: Vec<i64>,
    pub anchors: Vec<OrbitAnchor>,
}

impl LevelFunction {
    pub fn get(&self, x: usize) -> i64 {
        self.level[x]
    }
}

/// Topmost vertex of an acyclic orbit: the unique member without an image in the window.
fn orbit_sink(system: &SelfMapSystem, orbit: &Orbit) -> usize {
    orbit
        .members
        .iter()
        .copied()
        .find(|&x| !matches!(system.image(x), Image::Vertex(_)))
        .expect("acyclic orbit has a sink")
}

/// The branch vertex all of whose ancestors have exactly one child.
pub fn generalized_root(system: &SelfMapSystem, orbit: &Orbit) -> Result<GeneralizedRoot> {
    if orbit.cycle.is_some() {
        return Err(Error::Capability("generalized root requested on an orbit with a cycle".into()));
    }
    let branch: Vec<usize> = orbit
        .members
        .iter()
        .copied()
        .filter(|&x| system.preimages(x).len() >= 2)
        .collect();
    if branch.is_empty() {
        return Ok(GeneralizedRoot { vertex: orbit_sink(system, orbit), flagged: true });
    }
    let candidates: Vec<usize> = branch
        .into_iter()
        .filter(|&b| {
            let mut y = b;
            while let Image::Vertex(p) = system.image(y) {
                if system.is_open(p) || system.preimages(p).len() != 1 {
                    return false;
                }
                y = p;
            }
            true
        })
        .collect();
    match candidates.as_slice() {
        [omega] => Ok(GeneralizedRoot { vertex: *omega, flagged: false }),
        [] => Err(Error::Capability(
            "no branch vertex has single-child ancestors inside the window".into(),
        )),
        _ => Err(Error::Structural("several generalized roots in one orbit".into())),
    }
}

/// Level function: 0 on cycles, 1 at the generalized root of acyclic orbits,
/// and `level(phi(x)) = level(x) - 1` off cycles.
pub fn level_function(system: &SelfMapSystem, decomp: &OrbitDecomposition) -> Result<LevelFunction> {
    let mut level = vec![0i64; system.len()];
    let mut anchors = Vec::with_capacity(decomp.orbits.len());
    for orbit in &decomp.orbits {
        match &orbit.cycle {
            Some(cycle) => {
                let mut queue: VecDeque<usize> = cycle.iter().copied().collect();
                while let Some(x) = queue.pop_front() {
                    for &y in system.preimages(x) {
                        if !cycle.contains(&y) {
                            level[y] = level[x] + 1;
                            queue.push_back(y);
                        }
                    }
                }
                anchors.push(OrbitAnchor::Cycle { vertex: cycle[0] });
            }
            None => {
                let omega = generalized_root(system, orbit)?;
                let sink = orbit_sink(system, orbit);
                let mut depth = HashMap::from([(sink, 0i64)]);
                let mut queue = VecDeque::from([sink]);
                while let Some(x) = queue.pop_front() {
                    let d = depth[&x];
                    for &y in system.preimages(x) {
                        depth.insert(y, d + 1);
                        queue.push_back(y);
                    }
                }
                let offset = 1 - depth[&omega.vertex];
                for &x in &orbit.members {
                    level[x] = depth[&x] + offset;
                }
                let x_star = match system.image(omega.vertex) {
                    Image::Vertex(y) => Some(y),
                    _ => None,
                };
                anchors.push(OrbitAnchor::Acyclic { omega, x_star });
            }
        }
    }
    Ok(LevelFunction { level, anchors })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BranchingIndex {
    pub value: u64,
    /// No vertex with two or more preimages was found.
    pub empty: bool,
    /// Some boundary vertex may branch outside the window.
    pub possibly_unbounded: bool,
}

pub fn branching_index(system: &SelfMapSystem, levels: &LevelFunction) -> BranchingIndex {
    let branch: Vec<usize> = (0..system.len()).filter(|&x| system.preimages(x).len() >= 2).collect();
    BranchingIndex {
        value: branch.iter().map(|&x| levels.level[x].unsigned_abs()).max().unwrap_or(0),
        empty: branch.is_empty(),
        possibly_unbounded: (0..system.len()).any(|x| system.is_open(x)),
    }
}

/// `{x : m <= level(x) <= n}`, empty when `m > n`.
pub fn gen_band(levels: &LevelFunction, m: i64, n: i64) -> Vec<usize> {
    (0..levels.level.len())
        .filter(|&x| (m..=n).contains(&levels.level[x]))
        .collect()
}

#[derive(Clone, Debug)]
pub struct Descendants {
    pub vertices: Vec<usize>,
    /// False when the search touched a vertex with unmaterialized preimages.
    pub complete: bool,
}

/// `des(x) = union over n of phi^(-n)(x)`, intersected with the window.
pub fn descendants(system: &SelfMapSystem, x: usize) -> Descendants {
    let mut seen = vec![false; system.len()];
    let mut out = Vec::new();
    let mut complete = true;
    let mut queue = VecDeque::from([x]);
    seen[x] = true;
    while let Some(y) = queue.pop_front() {
        out.push(y);
        complete &= !system.is_open(y);
        for &z in system.preimages(y) {
            if !seen[z] {
                seen[z] = true;
                queue.push_back(z);
            }
        }
    }
    out.sort_unstable();
    Descendants { vertices: out, complete }
}

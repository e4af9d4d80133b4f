//! Graph spec JSON and the CSV tables written by the command-line tool.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::catalog::{instantiate, FamilySpec};
use crate::error::{Error, Result};
use crate::graph::{branching_index, decompose_orbits, level_function, Image, OrbitAnchor, SelfMapSystem};
use crate::linalg::C;
use crate::model::{KernelMatrix, LaurentModel};
use crate::operators::TruncatedOperator;

/// Graph spec file. Either an explicit vertex list or a `family` block.
///
/// A vertex absent from `phi`, or mapped to `null`, is a root. Vertices listed
/// in `beyond` map outside the file; vertices in `open` have preimages that
/// were not listed.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct GraphSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<String>>,
    #[serde(default)]
    pub phi: BTreeMap<String, Option<String>>,
    #[serde(default)]
    pub weights: BTreeMap<String, [f64; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub open: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub beyond: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilySpec>,
}

impl GraphSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Input(format!("graph spec: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Materialize the spec; `radius` applies to family blocks only.
    pub fn build(&self, radius: usize) -> Result<SelfMapSystem> {
        let Some(vertices) = &self.vertices else {
            let family = self
                .family
                .as_ref()
                .ok_or_else(|| Error::Input("graph spec has neither vertices nor a family".into()))?;
            return instantiate(family, radius);
        };
        let index: BTreeMap<&str, usize> = vertices.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        for key in self.phi.keys().chain(self.weights.keys()).chain(&self.open).chain(&self.beyond) {
            if !index.contains_key(key.as_str()) {
                return Err(Error::Input(format!("unknown vertex {key}")));
            }
        }
        let mut phi = Vec::with_capacity(vertices.len());
        for v in vertices {
            let image = if self.beyond.contains(v) {
                Image::Beyond
            } else {
                match self.phi.get(v).cloned().flatten() {
                    None => Image::Root,
                    Some(t) => Image::Vertex(*index.get(t.as_str()).ok_or_else(|| {
                        Error::Structural(format!("vertex {v} maps to {t}, which is not in the vertex list"))
                    })?),
                }
            };
            phi.push(image);
        }
        let weight = vertices
            .iter()
            .map(|v| self.weights.get(v).map_or(Ok(C::new(1.0, 0.0)), |w| Ok(C::new(w[0], w[1]))))
            .collect::<Result<Vec<C>>>()?;
        let open = vertices.iter().map(|v| self.open.contains(v)).collect();
        let system = SelfMapSystem::new(vertices.clone(), phi, weight, open)?;
        Ok(match &self.family {
            Some(f) => system.with_family(f.clone()),
            None => system,
        })
    }
}

/// Explicit spec listing every materialized vertex.
pub fn to_spec(system: &SelfMapSystem) -> GraphSpec {
    let mut spec = GraphSpec { vertices: Some(system.labels().to_vec()), ..Default::default() };
    for x in 0..system.len() {
        let label = system.label(x).to_string();
        match system.image(x) {
            Image::Vertex(y) => {
                spec.phi.insert(label.clone(), Some(system.label(y).to_string()));
            }
            Image::Root => {
                spec.phi.insert(label.clone(), None);
            }
            Image::Beyond => spec.beyond.push(label.clone()),
        }
        let w = system.weight(x);
        spec.weights.insert(label.clone(), [w.re, w.im]);
        if system.is_open(x) {
            spec.open.push(label);
        }
    }
    spec.family = system.family().cloned();
    spec
}

/// Normalized echo of a system together with its orbit structure.
pub fn normalized_json(system: &SelfMapSystem) -> Result<Value> {
    let decomp = decompose_orbits(system);
    let levels = level_function(system, &decomp)?;
    let branching = branching_index(system, &levels);
    let orbits: Vec<Value> = decomp
        .orbits
        .iter()
        .zip(&levels.anchors)
        .map(|(o, anchor)| {
            let labels = |v: &[usize]| v.iter().map(|&x| system.label(x).to_string()).collect::<Vec<_>>();
            let mut entry = json!({
                "members": labels(&o.members),
                "cycle": o.cycle.as_deref().map(labels),
            });
            match *anchor {
                OrbitAnchor::Cycle { vertex } => {
                    entry["anchor"] = json!(system.label(vertex));
                }
                OrbitAnchor::Acyclic { omega, x_star } => {
                    entry["generalizedRoot"] = json!(system.label(omega.vertex));
                    entry["generalizedRootFlagged"] = json!(omega.flagged);
                    entry["anchor"] = json!(x_star.map(|x| system.label(x).to_string()));
                }
            }
            entry
        })
        .collect();
    let level: BTreeMap<&str, i64> = (0..system.len()).map(|x| (system.label(x), levels.get(x))).collect();
    Ok(json!({
        "graph": to_spec(system),
        "orbits": orbits,
        "levels": level,
        "branchingIndex": {
            "value": branching.value,
            "empty": branching.empty,
            "possiblyUnbounded": branching.possibly_unbounded,
        },
    }))
}

/// Round-trip-safe rendering with 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().from_writer(out)
}

/// `(row, col, re, im)` for every stored entry.
pub fn write_triplets<W: Write>(op: &TruncatedOperator, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["row", "col", "re", "im"])?;
    for j in 0..op.dim() {
        for &(i, v) in op.column(j) {
            w.write_record([op.basis()[i].as_str(), op.basis()[j].as_str(), &num(v.re), &num(v.im)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Weights next to the Cauchy dual weights.
pub fn write_weight_table<W: Write>(system: &SelfMapSystem, dual: &SelfMapSystem, valid: &[bool], out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["vertex", "w_re", "w_im", "dual_re", "dual_im", "valid"])?;
    for (x, ok) in valid.iter().enumerate().take(system.len()) {
        let (a, b) = (system.weight(x), dual.weight(x));
        w.write_record([
            system.label(x),
            &num(a.re),
            &num(a.im),
            &num(b.re),
            &num(b.im),
            if *ok { "true" } else { "false" },
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `(source, n, component, re, im, exact)` rows for each model.
pub fn write_coefficients<W: Write>(models: &[(String, LaurentModel)], out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["source", "n", "component", "re", "im", "exact"])?;
    for (label, m) in models {
        for n in m.degrees() {
            for (k, c) in m.coeff(n).unwrap().iter().enumerate() {
                w.write_record([
                    label.as_str(),
                    &n.to_string(),
                    &k.to_string(),
                    &num(c.re),
                    &num(c.im),
                    if m.is_degraded(n) { "false" } else { "true" },
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// `(r, t, row, col, re, im)` over a polar mesh.
pub fn write_kernel_grid<W: Write>(grid: &[(f64, f64, KernelMatrix)], out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["r", "t", "row", "col", "re", "im"])?;
    for (r, t, k) in grid {
        for i in 0..k.matrix.nrows() {
            for j in 0..k.matrix.ncols() {
                let v = k.matrix[(i, j)];
                w.write_record([num(*r), num(*t), i.to_string(), j.to_string(), num(v.re), num(v.im)])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// `(x, y, re, im)` for the pairing of the model of `e_x` with the dual model of `e_y`.
pub fn write_pairing<W: Write>(labels: &[String], matrix: &[Vec<C>], out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["x", "y", "re", "im"])?;
    for (a, row) in labels.iter().zip(matrix) {
        for (b, v) in labels.iter().zip(row) {
            w.write_record([a.as_str(), b.as_str(), &num(v.re), &num(v.im)])?;
        }
    }
    w.flush()?;
    Ok(())
}

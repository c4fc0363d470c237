use std::collections::HashMap;
use std::fmt::Write;

use serde::Deserialize;
use serde_json::{json, Map, Value};
use thiserror::Error;

use super::{CubeId, LabelledPCSet};
use crate::proc::{self, ParseError};
use crate::syncalg::{is_identifier, Action};
use crate::FORMAT;

#[derive(Debug, Error)]
pub enum PcsetJsonError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format `{0}`")]
    Format(String),
    #[error("duplicate cube id {0}")]
    DuplicateId(u64),
    #[error("cube {cube} refers to unknown cube {face}")]
    UnknownFace { cube: u64, face: u64 },
    #[error("cube {0}: dim, labels and faces disagree")]
    Arity(u64),
    #[error("cube {0}: a face must have dimension one less")]
    FaceDimension(u64),
    #[error("bad action name `{0}`")]
    Action(String),
    #[error("decoration of {id}: {source}")]
    Decoration { id: String, source: ParseError },
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
}

#[derive(Deserialize)]
struct CubeJson {
    id: u64,
    dim: usize,
    #[serde(default)]
    labels: Vec<String>,
    #[serde(default)]
    faces: Vec<[u64; 2]>,
}

#[derive(Deserialize)]
struct PcsetJson {
    format: Option<String>,
    cubes: Vec<CubeJson>,
    initial: Option<u64>,
    #[serde(default)]
    decorations: HashMap<String, String>,
}

pub fn to_json(k: &LabelledPCSet) -> Value {
    let cubes: Vec<Value> = k
        .ids()
        .map(|c| {
            let cube = k.cube(c);
            json!({
                "id": c.0,
                "dim": cube.dim,
                "labels": cube.labels.iter().map(|a| a.as_str()).collect::<Vec<_>>(),
                "faces": cube.faces.iter().map(|[a, b]| [a.0, b.0]).collect::<Vec<_>>(),
            })
        })
        .collect();
    let mut decorations = Map::new();
    for (v, t) in k.decorations() {
        decorations.insert(v.0.to_string(), Value::String(proc::format(t)));
    }
    json!({
        "format": FORMAT,
        "census": k.census(),
        "cubes": cubes,
        "initial": k.initial().map(|v| v.0),
        "decorations": decorations,
    })
}

/// Reads the pcset JSON format. Cube ids in the file are arbitrary; cubes
/// are renumbered by dimension in file order. Structural invariants are not
/// checked here (use `validate`).
pub fn from_json(text: &str) -> Result<LabelledPCSet, PcsetJsonError> {
    from_json_with_ids(text).map(|(k, _)| k)
}

/// Like [`from_json`], also returning where each file id went.
pub fn from_json_with_ids(text: &str) -> Result<(LabelledPCSet, HashMap<u64, CubeId>), PcsetJsonError> {
    let doc: PcsetJson = serde_json::from_str(text)?;
    if let Some(f) = doc.format {
        if f != FORMAT {
            return Err(PcsetJsonError::Format(f));
        }
    }
    let mut dim_of: HashMap<u64, usize> = HashMap::new();
    for c in &doc.cubes {
        if dim_of.insert(c.id, c.dim).is_some() {
            return Err(PcsetJsonError::DuplicateId(c.id));
        }
        if c.labels.len() != c.dim || c.faces.len() != c.dim {
            return Err(PcsetJsonError::Arity(c.id));
        }
    }
    let mut order: Vec<&CubeJson> = doc.cubes.iter().collect();
    order.sort_by_key(|c| c.dim);
    let mut ids: HashMap<u64, CubeId> = HashMap::new();
    let mut k = LabelledPCSet::new();
    for c in order {
        let mut faces = Vec::with_capacity(c.dim);
        for pair in &c.faces {
            let mut mapped = [CubeId(0); 2];
            for (slot, f) in mapped.iter_mut().zip(pair) {
                match dim_of.get(f) {
                    None => return Err(PcsetJsonError::UnknownFace { cube: c.id, face: *f }),
                    Some(&d) if d + 1 != c.dim => return Err(PcsetJsonError::FaceDimension(c.id)),
                    _ => *slot = ids[f],
                }
            }
            faces.push(mapped);
        }
        let mut labels = Vec::with_capacity(c.dim);
        for l in &c.labels {
            if !is_identifier(l) {
                return Err(PcsetJsonError::Action(l.clone()));
            }
            labels.push(Action::new(l));
        }
        let id = if c.dim == 0 {
            k.add_vertex(None)
        } else {
            k.push_cube_unchecked(labels, faces)
        };
        ids.insert(c.id, id);
    }
    let vertex = |key: &str| -> Result<CubeId, PcsetJsonError> {
        key.parse::<u64>()
            .ok()
            .filter(|id| dim_of.get(id) == Some(&0))
            .map(|id| ids[&id])
            .ok_or_else(|| PcsetJsonError::UnknownVertex(key.to_string()))
    };
    if let Some(init) = doc.initial {
        k.set_initial(Some(vertex(&init.to_string())?));
    }
    let mut decorations: Vec<(&String, &String)> = doc.decorations.iter().collect();
    decorations.sort();
    for (key, text) in decorations {
        let v = vertex(key)?;
        let term = proc::parse_term(text).map_err(|source| PcsetJsonError::Decoration {
            id: key.clone(),
            source,
        })?;
        k.set_decoration(v, Some(term));
    }
    Ok((k, ids))
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// The 1-skeleton as a DOT digraph. `header` is written as a leading
/// comment (one line per line of input). Higher cubes appear as comments
/// listing their boundary edges.
pub fn to_dot(k: &LabelledPCSet, header: &str) -> String {
    let mut out = String::new();
    for line in header.lines() {
        let _ = writeln!(out, "// {line}");
    }
    out.push_str("digraph hda {\n");
    for &v in k.vertices() {
        let label = k.decoration(v).map(proc::format).unwrap_or_else(|| v.to_string());
        let shape = if k.initial() == Some(v) { ", shape=doublecircle" } else { "" };
        let _ = writeln!(out, "  n{} [label=\"{}\"{}];", v.0, escape(&label), shape);
    }
    for &e in k.edges() {
        let _ = writeln!(
            out,
            "  n{} -> n{} [label=\"{}\"];",
            k.source(e).0,
            k.target(e).0,
            escape(k.cube(e).labels[0].as_str())
        );
    }
    for d in 2..=k.dim().unwrap_or(0) {
        for &c in k.of_dim(d) {
            let cube = k.cube(c);
            let labels: Vec<&str> = cube.labels.iter().map(|a| a.as_str()).collect();
            let mut edges: Vec<usize> = Vec::new();
            collect_edges(k, c, &mut edges);
            let edges: Vec<String> = edges.iter().map(|e| format!("n{}->n{}", k.source(CubeId(*e)).0, k.target(CubeId(*e)).0)).collect();
            let _ = writeln!(out, "  // {d}-cube {} ({}): {}", c.0, labels.join(","), edges.join(" "));
        }
    }
    out.push_str("}\n");
    out
}

fn collect_edges(k: &LabelledPCSet, c: CubeId, out: &mut Vec<usize>) {
    let cube = k.cube(c);
    if cube.dim == 1 {
        if !out.contains(&c.0) {
            out.push(c.0);
        }
        return;
    }
    for pair in &cube.faces {
        for &f in pair {
            collect_edges(k, f, out);
        }
    }
}

//! Labelled precubical sets: cubes graded by dimension, face maps
//! `∂_i^α` (1-based `i`, `α ∈ {0,1}`), a label tuple per cube, an optional
//! initial vertex and process-term decorations on vertices.

mod io;
mod iso;

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::proc::ProcTerm;
use crate::syncalg::{Action, SyncAlgebra};

pub use io::{from_json, from_json_with_ids, to_dot, to_json, PcsetJsonError};
pub use iso::{find_isomorphism, iso_check, IsoMode, Isomorphism};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct CubeId(pub usize);

impl CubeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Debug for CubeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

impl fmt::Display for CubeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cube {
    pub dim: usize,
    /// `faces[i-1][α]` is `∂_i^α`.
    pub faces: Vec<[CubeId; 2]>,
    pub labels: Vec<Action>,
}

impl Cube {
    pub fn face(&self, i: usize, alpha: usize) -> CubeId {
        self.faces[i - 1][alpha]
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PcsetError {
    #[error("cube {0} does not exist")]
    Dangling(CubeId),
    #[error("face {face} of a {dim}-cube has dimension {found}")]
    DimensionMismatch { dim: usize, face: CubeId, found: usize },
    #[error("cubical relation ∂_{i}^{alpha}∂_{j}^{beta} = ∂_{}^{beta}∂_{i}^{alpha} fails", j - 1)]
    CubicalRelation { i: usize, j: usize, alpha: usize, beta: usize },
    #[error("labels of face ∂_{i}^{alpha} disagree with the cube's labels")]
    LabelCoherence { i: usize, alpha: usize },
    #[error("a {dim}-cube needs {dim} labels and {dim} face pairs")]
    Arity { dim: usize },
    #[error("action `{0}` cannot run asynchronously")]
    NotAsynchronous(Action),
    #[error("{0} is not a vertex")]
    NotAVertex(CubeId),
    #[error("identifying these vertices creates a directed cycle")]
    Cycle,
    #[error("resource guard exceeded: {what} reached {size} (limit {limit})")]
    Guard { what: &'static str, size: usize, limit: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ViolationKind {
    Dangling { face: CubeId },
    DimensionMismatch { face: CubeId },
    Arity,
    CubicalRelation { i: usize, j: usize, alpha: usize, beta: usize },
    LabelCoherence { i: usize, alpha: usize },
    UnknownAction { action: String },
    NotAsynchronous { action: String },
    InitialNotVertex,
    InitialHasIncoming,
    DecoratedNonVertex,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PcsetViolation {
    pub cube: CubeId,
    #[serde(flatten)]
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PcsetReport {
    pub violations: Vec<PcsetViolation>,
}

impl PcsetReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A labelled precubical set with vertex decorations. Cube ids index into
/// a single store; faces always point at lower-dimensional cubes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelledPCSet {
    cubes: Vec<Cube>,
    by_dim: Vec<Vec<CubeId>>,
    initial: Option<CubeId>,
    decorations: BTreeMap<CubeId, ProcTerm>,
}

impl LabelledPCSet {
    pub fn new() -> LabelledPCSet {
        LabelledPCSet::default()
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn cube(&self, id: CubeId) -> &Cube {
        &self.cubes[id.0]
    }

    pub fn get(&self, id: CubeId) -> Option<&Cube> {
        self.cubes.get(id.0)
    }

    pub fn ids(&self) -> impl Iterator<Item = CubeId> + '_ {
        (0..self.cubes.len()).map(CubeId)
    }

    /// Highest dimension present, `None` for the empty set.
    pub fn dim(&self) -> Option<usize> {
        self.by_dim.iter().rposition(|v| !v.is_empty())
    }

    pub fn of_dim(&self, d: usize) -> &[CubeId] {
        self.by_dim.get(d).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn vertices(&self) -> &[CubeId] {
        self.of_dim(0)
    }

    pub fn edges(&self) -> &[CubeId] {
        self.of_dim(1)
    }

    /// Number of cubes per dimension, trailing zeros trimmed.
    pub fn census(&self) -> Vec<usize> {
        let mut c: Vec<usize> = self.by_dim.iter().map(Vec::len).collect();
        while c.last() == Some(&0) {
            c.pop();
        }
        c
    }

    pub fn initial(&self) -> Option<CubeId> {
        self.initial
    }

    pub fn set_initial(&mut self, v: Option<CubeId>) {
        self.initial = v;
    }

    pub fn decoration(&self, v: CubeId) -> Option<&ProcTerm> {
        self.decorations.get(&v)
    }

    pub fn decorations(&self) -> &BTreeMap<CubeId, ProcTerm> {
        &self.decorations
    }

    pub fn set_decoration(&mut self, v: CubeId, term: Option<ProcTerm>) {
        match term {
            Some(t) => {
                self.decorations.insert(v, t);
            }
            None => {
                self.decorations.remove(&v);
            }
        }
    }

    /// Applies `f` to every decoration.
    pub fn map_decorations(&mut self, mut f: impl FnMut(&ProcTerm) -> ProcTerm) {
        for t in self.decorations.values_mut() {
            *t = f(t);
        }
    }

    pub fn add_vertex(&mut self, decoration: Option<ProcTerm>) -> CubeId {
        let id = self.push(Cube {
            dim: 0,
            faces: Vec::new(),
            labels: Vec::new(),
        });
        self.set_decoration(id, decoration);
        id
    }

    fn push(&mut self, cube: Cube) -> CubeId {
        let id = CubeId(self.cubes.len());
        if self.by_dim.len() <= cube.dim {
            self.by_dim.resize(cube.dim + 1, Vec::new());
        }
        self.by_dim[cube.dim].push(id);
        self.cubes.push(cube);
        id
    }

    /// Inserts a cube of dimension `labels.len()` after checking that its
    /// faces exist, have the right dimension, satisfy the cubical relations
    /// and carry coherent labels.
    pub fn add_cube(&mut self, labels: Vec<Action>, faces: Vec<[CubeId; 2]>) -> Result<CubeId, PcsetError> {
        let cube = Cube {
            dim: labels.len(),
            faces,
            labels,
        };
        if let Some((_, kind)) = self.check_cube(&cube).into_iter().next() {
            return Err(match kind {
                ViolationKind::Dangling { face } => PcsetError::Dangling(face),
                ViolationKind::DimensionMismatch { face } => PcsetError::DimensionMismatch {
                    dim: cube.dim,
                    face,
                    found: self.cube(face).dim,
                },
                ViolationKind::CubicalRelation { i, j, alpha, beta } => {
                    PcsetError::CubicalRelation { i, j, alpha, beta }
                }
                ViolationKind::LabelCoherence { i, alpha } => PcsetError::LabelCoherence { i, alpha },
                _ => PcsetError::Arity { dim: cube.dim },
            });
        }
        Ok(self.push(cube))
    }

    /// Inserts without any check. Used when loading files and for building
    /// deliberately broken fixtures; run [`validate`] afterwards.
    pub fn push_cube_unchecked(&mut self, labels: Vec<Action>, faces: Vec<[CubeId; 2]>) -> CubeId {
        self.push(Cube {
            dim: labels.len(),
            faces,
            labels,
        })
    }

    /// Inserts a cube whose faces are known to be consistent (internal
    /// constructions). Checked in debug builds.
    pub(crate) fn push_trusted(&mut self, labels: Vec<Action>, faces: Vec<[CubeId; 2]>) -> CubeId {
        let cube = Cube {
            dim: labels.len(),
            faces,
            labels,
        };
        debug_assert!(self.check_cube(&cube).is_empty(), "inconsistent cube {cube:?}");
        self.push(cube)
    }

    fn check_cube(&self, c: &Cube) -> Vec<(CubeId, ViolationKind)> {
        let me = CubeId(usize::MAX);
        let mut out = Vec::new();
        if c.faces.len() != c.dim || c.labels.len() != c.dim {
            out.push((me, ViolationKind::Arity));
            return out;
        }
        for pair in &c.faces {
            for &f in pair {
                match self.get(f) {
                    None => out.push((me, ViolationKind::Dangling { face: f })),
                    Some(fc) if fc.dim + 1 != c.dim => out.push((me, ViolationKind::DimensionMismatch { face: f })),
                    _ => {}
                }
            }
        }
        if !out.is_empty() {
            return out;
        }
        for i in 1..=c.dim {
            for alpha in 0..2 {
                let face = self.cube(c.face(i, alpha));
                let mut expected = c.labels.clone();
                expected.remove(i - 1);
                if face.labels != expected {
                    out.push((me, ViolationKind::LabelCoherence { i, alpha }));
                }
            }
        }
        for j in 2..=c.dim {
            for i in 1..j {
                for alpha in 0..2 {
                    for beta in 0..2 {
                        let lhs = self.cube(c.face(j, beta)).face(i, alpha);
                        let rhs = self.cube(c.face(i, alpha)).face(j - 1, beta);
                        if lhs != rhs {
                            out.push((me, ViolationKind::CubicalRelation { i, j, alpha, beta }));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn face(&self, c: CubeId, i: usize, alpha: usize) -> CubeId {
        self.cube(c).face(i, alpha)
    }

    /// `∂_1^0` of an edge.
    pub fn source(&self, e: CubeId) -> CubeId {
        self.face(e, 1, 0)
    }

    /// `∂_1^1` of an edge.
    pub fn target(&self, e: CubeId) -> CubeId {
        self.face(e, 1, 1)
    }

    /// Corner vertices of `c`, indexed by `ε` with bit `i-1` holding `ε_i`.
    pub fn vertex_map(&self, c: CubeId) -> Vec<CubeId> {
        let n = self.cube(c).dim;
        (0..1usize << n).map(|eps| self.corner(c, eps)).collect()
    }

    /// The vertex of `c` at `ε`, reached by peeling off the last coordinate
    /// first.
    pub fn corner(&self, c: CubeId, eps: usize) -> CubeId {
        let mut cur = c;
        for i in (1..=self.cube(c).dim).rev() {
            cur = self.face(cur, i, (eps >> (i - 1)) & 1);
        }
        cur
    }

    pub fn out_edges(&self) -> BTreeMap<CubeId, Vec<CubeId>> {
        let mut out: BTreeMap<CubeId, Vec<CubeId>> = BTreeMap::new();
        for &e in self.edges() {
            out.entry(self.source(e)).or_default().push(e);
        }
        out
    }

    /// Vertices in a topological order of the 1-skeleton, or `None` if it
    /// has a loop or a directed cycle.
    pub fn topological_order(&self) -> Option<Vec<CubeId>> {
        let mut indeg: HashMap<CubeId, usize> = self.vertices().iter().map(|&v| (v, 0)).collect();
        let out = self.out_edges();
        for &e in self.edges() {
            *indeg.get_mut(&self.target(e))? += 1;
        }
        let mut queue: VecDeque<CubeId> = self.vertices().iter().copied().filter(|v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(indeg.len());
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &e in out.get(&v).map(|v| v.as_slice()).unwrap_or(&[]) {
                let t = self.target(e);
                let d = indeg.get_mut(&t)?;
                *d -= 1;
                if *d == 0 {
                    queue.push_back(t);
                }
            }
        }
        (order.len() == indeg.len()).then_some(order)
    }

    /// Shortest-path depth from the initial vertex, for reachable vertices.
    pub fn depths(&self) -> BTreeMap<CubeId, usize> {
        let mut depth = BTreeMap::new();
        let Some(init) = self.initial else {
            return depth;
        };
        let out = self.out_edges();
        depth.insert(init, 0);
        let mut queue = VecDeque::from([init]);
        while let Some(v) = queue.pop_front() {
            let d = depth[&v];
            for &e in out.get(&v).map(|v| v.as_slice()).unwrap_or(&[]) {
                let t = self.target(e);
                if let std::collections::btree_map::Entry::Vacant(e) = depth.entry(t) {
                    e.insert(d + 1);
                    queue.push_back(t);
                }
            }
        }
        depth
    }

    /// The sub-pcset of cubes satisfying `keep`, which must be closed under
    /// faces. Returns the new set and the old→new id map.
    pub fn filter(&self, mut keep: impl FnMut(CubeId, &Cube) -> bool) -> (LabelledPCSet, Vec<Option<CubeId>>) {
        let mut map: Vec<Option<CubeId>> = vec![None; self.len()];
        let mut out = LabelledPCSet::new();
        for d in 0..self.by_dim.len() {
            for &c in &self.by_dim[d] {
                let cube = self.cube(c);
                if !keep(c, cube) {
                    continue;
                }
                let faces: Option<Vec<[CubeId; 2]>> = cube
                    .faces
                    .iter()
                    .map(|[a, b]| Some([map[a.0]?, map[b.0]?]))
                    .collect();
                let faces = faces.expect("kept cubes must be closed under faces");
                let id = out.push(Cube {
                    dim: cube.dim,
                    faces,
                    labels: cube.labels.clone(),
                });
                map[c.0] = Some(id);
                if let Some(t) = self.decorations.get(&c) {
                    out.decorations.insert(id, t.clone());
                }
            }
        }
        out.initial = self.initial.and_then(|v| map[v.0]);
        (out, map)
    }

    /// Appends a copy of `other`; returns the id offset applied to its
    /// cubes. The initial vertex of `self` is kept.
    pub fn append(&mut self, other: &LabelledPCSet) -> usize {
        let offset = self.len();
        for c in &other.cubes {
            self.push(Cube {
                dim: c.dim,
                faces: c.faces.iter().map(|[a, b]| [CubeId(a.0 + offset), CubeId(b.0 + offset)]).collect(),
                labels: c.labels.clone(),
            });
        }
        for (v, t) in &other.decorations {
            self.decorations.insert(CubeId(v.0 + offset), t.clone());
        }
        offset
    }

    /// Relabels every cube through `f` (used to rename actions).
    pub fn relabel(&mut self, mut f: impl FnMut(&Action) -> Action) {
        for c in &mut self.cubes {
            for l in &mut c.labels {
                *l = f(l);
            }
        }
    }
}

/// Checks every structural invariant: face references, dimensions, cubical
/// relations, label coherence, alphabet membership, asynchrony of the
/// labels of cubes of dimension ≥ 2, and the initial vertex.
///
/// Edges may carry labels that cannot run alone (synchronized diagonals and
/// prefixes of non-asynchronous actions); every higher cube must not.
pub fn validate(k: &LabelledPCSet, alg: &SyncAlgebra) -> PcsetReport {
    let mut report = PcsetReport::default();
    for c in k.ids() {
        let cube = k.cube(c);
        let structural = k.check_cube(cube);
        let broken = structural
            .iter()
            .any(|(_, v)| matches!(v, ViolationKind::Dangling { .. } | ViolationKind::DimensionMismatch { .. } | ViolationKind::Arity));
        report
            .violations
            .extend(structural.into_iter().map(|(_, kind)| PcsetViolation { cube: c, kind }));
        if broken {
            continue;
        }
        for a in &cube.labels {
            if !alg.contains(a) {
                report.violations.push(PcsetViolation {
                    cube: c,
                    kind: ViolationKind::UnknownAction { action: a.to_string() },
                });
            } else if cube.dim >= 2 && !alg.asynchronous(a) {
                report.violations.push(PcsetViolation {
                    cube: c,
                    kind: ViolationKind::NotAsynchronous { action: a.to_string() },
                });
            }
        }
    }
    if let Some(init) = k.initial() {
        match k.get(init) {
            Some(c) if c.dim == 0 => {
                let incoming = k
                    .edges()
                    .iter()
                    .any(|&e| k.cube(e).faces.first().map(|f| f[1]) == Some(init));
                if incoming {
                    report.violations.push(PcsetViolation {
                        cube: init,
                        kind: ViolationKind::InitialHasIncoming,
                    });
                }
            }
            _ => report.violations.push(PcsetViolation {
                cube: init,
                kind: ViolationKind::InitialNotVertex,
            }),
        }
    }
    for &v in k.decorations.keys() {
        if k.get(v).map(|c| c.dim) != Some(0) {
            report.violations.push(PcsetViolation {
                cube: v,
                kind: ViolationKind::DecoratedNonVertex,
            });
        }
    }
    report
}

/// A precubical set whose vertex set is identified with `{0,1}^width`.
/// Bit `i-1` of a coordinate word holds `ε_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    pub set: LabelledPCSet,
    pub width: usize,
    pub coords: BTreeMap<CubeId, u64>,
}

impl Grid {
    /// Vertex id for each coordinate word, if the coordinates form a
    /// bijection onto `{0,1}^width`.
    pub fn vertex_at(&self) -> Option<Vec<CubeId>> {
        if self.width >= 32 || self.coords.len() != self.set.vertices().len() {
            return None;
        }
        let mut at = vec![None; 1usize << self.width];
        for &v in self.set.vertices() {
            let w = *self.coords.get(&v)? as usize;
            if w >= at.len() || at[w].is_some() {
                return None;
            }
            at[w] = Some(v);
        }
        at.into_iter().collect()
    }
}

/// The labelled standard cube `□[n]`, one cube per face word over
/// `{0,1,*}^n`, with vertex coordinates. Vertex ids equal their
/// coordinate words.
pub fn standard_cube_grid(labels: &[Action], alg: &SyncAlgebra) -> Result<Grid, PcsetError> {
    for a in labels {
        if !alg.asynchronous(a) {
            return Err(PcsetError::NotAsynchronous(a.clone()));
        }
    }
    Ok(raw_standard_cube(labels))
}

pub(crate) fn raw_standard_cube(labels: &[Action]) -> Grid {
    let n = labels.len();
    let total = 3usize.pow(n as u32);
    // digit i of a word (base 3): 0, 1, or 2 for `*`
    let digits = |w: usize| -> Vec<usize> { (0..n).map(|i| (w / 3usize.pow(i as u32)) % 3).collect() };
    let mut by_stars: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for w in 0..total {
        let stars = digits(w).iter().filter(|&&d| d == 2).count();
        by_stars[stars].push(w);
    }
    let mut id_of: HashMap<usize, CubeId> = HashMap::new();
    let mut set = LabelledPCSet::new();
    let mut coords = BTreeMap::new();
    for (k, words) in by_stars.iter().enumerate() {
        for &w in words {
            let ds = digits(w);
            let stars: Vec<usize> = (0..n).filter(|&i| ds[i] == 2).collect();
            let id = if k == 0 {
                let v = set.add_vertex(None);
                let bits = ds.iter().enumerate().fold(0u64, |acc, (i, &d)| acc | ((d as u64) << i));
                coords.insert(v, bits);
                v
            } else {
                let faces = stars
                    .iter()
                    .map(|&s| {
                        let p = 3usize.pow(s as u32);
                        [id_of[&(w - 2 * p)], id_of[&(w - p)]]
                    })
                    .collect();
                let labels = stars.iter().map(|&s| labels[s].clone()).collect();
                set.push_trusted(labels, faces)
            };
            id_of.insert(w, id);
        }
    }
    set.initial = set.vertices().first().copied();
    Grid { set, width: n, coords }
}

/// The labelled standard cube `□[n]` with its bottom vertex as initial state.
pub fn standard_cube(labels: &[Action], alg: &SyncAlgebra) -> Result<LabelledPCSet, PcsetError> {
    Ok(standard_cube_grid(labels, alg)?.set)
}

/// Drops the cubes of top dimension: `∂□[n]` from `□[n]`, `∅` from `□[0]`.
pub fn boundary(k: &LabelledPCSet) -> LabelledPCSet {
    match k.dim() {
        None => LabelledPCSet::new(),
        Some(top) => k.filter(|_, c| c.dim < top).0,
    }
}

/// `K_{≤n}`.
pub fn skeleton(k: &LabelledPCSet, n: usize) -> LabelledPCSet {
    k.filter(|_, c| c.dim <= n).0
}

/// Disjoint union; the initial vertex of `a` is kept. Returns the id offset
/// of `b`'s cubes.
pub fn disjoint_union(a: &LabelledPCSet, b: &LabelledPCSet) -> (LabelledPCSet, usize) {
    let mut out = a.clone();
    let offset = out.append(b);
    (out, offset)
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

/// Identifies the given pairs of vertices (the quotient by the generated
/// equivalence). Higher cubes are kept as they are, with faces rewritten.
/// `decorate` receives the old members of each class and returns the
/// decoration of the merged vertex.
pub fn merge_vertices(
    k: &LabelledPCSet,
    pairs: &[(CubeId, CubeId)],
    mut decorate: impl FnMut(&[CubeId]) -> Option<ProcTerm>,
) -> Result<LabelledPCSet, PcsetError> {
    let mut uf = UnionFind::new(k.len());
    for &(a, b) in pairs {
        for v in [a, b] {
            match k.get(v) {
                Some(c) if c.dim == 0 => {}
                _ => return Err(PcsetError::NotAVertex(v)),
            }
        }
        uf.union(a.0, b.0);
    }
    let mut classes: BTreeMap<usize, Vec<CubeId>> = BTreeMap::new();
    for &v in k.vertices() {
        classes.entry(uf.find(v.0)).or_default().push(v);
    }
    let mut map: Vec<Option<CubeId>> = vec![None; k.len()];
    let mut out = LabelledPCSet::new();
    for &v in k.vertices() {
        let root = uf.find(v.0);
        if root == v.0 {
            let members = &classes[&root];
            let id = out.add_vertex(decorate(members));
            for m in members {
                map[m.0] = Some(id);
            }
        }
    }
    for d in 1..k.by_dim.len() {
        for &c in &k.by_dim[d] {
            let cube = k.cube(c);
            let faces = cube
                .faces
                .iter()
                .map(|[a, b]| [map[a.0].expect("face mapped"), map[b.0].expect("face mapped")])
                .collect();
            map[c.0] = Some(out.push(Cube {
                dim: d,
                faces,
                labels: cube.labels.clone(),
            }));
        }
    }
    out.initial = k.initial.and_then(|v| map[v.0]);
    if out.topological_order().is_none() {
        return Err(PcsetError::Cycle);
    }
    Ok(out)
}

/// Identifies cubes with equal labels and equal faces, bottom-up. Vertices
/// are never merged.
pub fn dedup_cubes(k: &LabelledPCSet) -> LabelledPCSet {
    let mut map: Vec<Option<CubeId>> = vec![None; k.len()];
    let mut seen: HashMap<(Vec<Action>, Vec<[CubeId; 2]>), CubeId> = HashMap::new();
    let mut out = LabelledPCSet::new();
    for &v in k.vertices() {
        map[v.0] = Some(out.add_vertex(k.decoration(v).cloned()));
    }
    for d in 1..k.by_dim.len() {
        for &c in &k.by_dim[d] {
            let cube = k.cube(c);
            let faces: Vec<[CubeId; 2]> = cube
                .faces
                .iter()
                .map(|[a, b]| [map[a.0].expect("face mapped"), map[b.0].expect("face mapped")])
                .collect();
            let key = (cube.labels.clone(), faces.clone());
            let id = *seen.entry(key).or_insert_with(|| {
                out.push(Cube {
                    dim: d,
                    faces,
                    labels: cube.labels.clone(),
                })
            });
            map[c.0] = Some(id);
        }
    }
    out.initial = k.initial.and_then(|v| map[v.0]);
    out
}

/// Merges vertices that carry equal decorations and have identical
/// futures (the same cubes, recursively, above them), then identifies the
/// resulting duplicate cubes. The 1-skeleton must be acyclic.
pub fn share_equal_futures(k: &LabelledPCSet) -> LabelledPCSet {
    let order = k.topological_order().expect("acyclic pcset");
    // cubes grouped by their bottom corner
    let mut based: HashMap<CubeId, Vec<CubeId>> = HashMap::new();
    for d in 1..k.by_dim.len() {
        for &c in &k.by_dim[d] {
            based.entry(k.corner(c, 0)).or_default().push(c);
        }
    }
    #[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
    enum Key {
        Base,
        Class(usize),
        Cube(Vec<Action>, Vec<[Key; 2]>),
    }
    let mut class: HashMap<CubeId, usize> = HashMap::new();
    let mut interned: HashMap<(Option<ProcTerm>, Vec<Key>), usize> = HashMap::new();

    fn key_of(
        k: &LabelledPCSet,
        c: CubeId,
        base: CubeId,
        class: &HashMap<CubeId, usize>,
        memo: &mut HashMap<CubeId, Key>,
    ) -> Key {
        if let Some(key) = memo.get(&c) {
            return key.clone();
        }
        let cube = k.cube(c);
        let key = if cube.dim == 0 {
            if c == base {
                Key::Base
            } else {
                Key::Class(class[&c])
            }
        } else {
            let faces = cube
                .faces
                .iter()
                .map(|[a, b]| [key_of(k, *a, base, class, memo), key_of(k, *b, base, class, memo)])
                .collect();
            Key::Cube(cube.labels.clone(), faces)
        };
        memo.insert(c, key.clone());
        key
    }

    for &v in order.iter().rev() {
        let mut memo = HashMap::new();
        let mut keys: Vec<Key> = based
            .get(&v)
            .map(|cs| cs.iter().map(|&c| key_of(k, c, v, &class, &mut memo)).collect())
            .unwrap_or_default();
        keys.sort();
        keys.dedup();
        let next = interned.len();
        let id = *interned.entry((k.decoration(v).cloned(), keys)).or_insert(next);
        class.insert(v, id);
    }
    let mut first: HashMap<usize, CubeId> = HashMap::new();
    let mut pairs = Vec::new();
    for &v in k.vertices() {
        let rep = *first.entry(class[&v]).or_insert(v);
        if rep != v {
            pairs.push((rep, v));
        }
    }
    if pairs.is_empty() {
        return dedup_cubes(k);
    }
    let merged = merge_vertices(k, &pairs, |members| k.decoration(members[0]).cloned())
        .expect("merging equal futures keeps the 1-skeleton acyclic");
    dedup_cubes(&merged)
}

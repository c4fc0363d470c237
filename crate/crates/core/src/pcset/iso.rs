use std::collections::{BTreeMap, HashMap, VecDeque};

use super::{CubeId, LabelledPCSet, PcsetError};
use crate::syncalg::Action;

const STEP_BUDGET: usize = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsoMode {
    /// Faces and label tuples are preserved index by index.
    Strict,
    /// Each cube may permute its coordinates: `c ↦ c'` with a permutation
    /// `π` such that `φ(∂_i^α c) = ∂_{π(i)}^α c'` and the labels are
    /// permuted the same way. This is the notion under which `K ⊗ L` and
    /// `L ⊗ K` agree, since the tensor orders left coordinates first.
    UpToCoordinatePermutation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Isomorphism {
    /// Image of each cube of the source, indexed by cube id.
    pub map: Vec<CubeId>,
    /// Coordinate permutation used for each cube (identity when strict).
    pub permutations: Vec<Vec<usize>>,
}

impl Isomorphism {
    pub fn apply(&self, c: CubeId) -> CubeId {
        self.map[c.0]
    }
}

/// Strict labelled isomorphism preserving faces, labels and the initial
/// vertex. Decorations are ignored. Fails with a guard error when either
/// side has more than `guard` cubes.
pub fn iso_check(k: &LabelledPCSet, l: &LabelledPCSet, guard: usize) -> Result<Option<Isomorphism>, PcsetError> {
    find_isomorphism(k, l, IsoMode::Strict, guard)
}

pub fn find_isomorphism(
    k: &LabelledPCSet,
    l: &LabelledPCSet,
    mode: IsoMode,
    guard: usize,
) -> Result<Option<Isomorphism>, PcsetError> {
    if k.census() != l.census() || k.initial().is_some() != l.initial().is_some() {
        return Ok(None);
    }
    let size = k.len().max(l.len());
    if size > guard {
        return Err(PcsetError::Guard {
            what: "cubes",
            size,
            limit: guard,
        });
    }
    if label_multiset(k, mode) != label_multiset(l, mode) {
        return Ok(None);
    }
    Search::new(k, l, mode).run()
}

fn label_key(labels: &[Action], mode: IsoMode) -> Vec<Action> {
    let mut v = labels.to_vec();
    if mode == IsoMode::UpToCoordinatePermutation {
        v.sort();
    }
    v
}

fn label_multiset(k: &LabelledPCSet, mode: IsoMode) -> BTreeMap<Vec<Action>, usize> {
    let mut m = BTreeMap::new();
    for c in k.ids() {
        *m.entry(label_key(&k.cube(c).labels, mode)).or_insert(0) += 1;
    }
    m
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct VertexSig {
    initial: bool,
    outs: Vec<Action>,
    ins: Vec<Action>,
}

fn vertex_signatures(k: &LabelledPCSet) -> HashMap<CubeId, VertexSig> {
    let mut sig: HashMap<CubeId, VertexSig> = k
        .vertices()
        .iter()
        .map(|&v| {
            (
                v,
                VertexSig {
                    initial: k.initial() == Some(v),
                    outs: Vec::new(),
                    ins: Vec::new(),
                },
            )
        })
        .collect();
    for &e in k.edges() {
        let a = k.cube(e).labels[0].clone();
        sig.get_mut(&k.source(e)).expect("vertex").outs.push(a.clone());
        sig.get_mut(&k.target(e)).expect("vertex").ins.push(a);
    }
    for s in sig.values_mut() {
        s.outs.sort();
        s.ins.sort();
    }
    sig
}

/// Incident edges of each vertex as (outgoing?, label, other end).
fn incidence(k: &LabelledPCSet) -> HashMap<CubeId, Vec<(bool, Action, CubeId)>> {
    let mut inc: HashMap<CubeId, Vec<(bool, Action, CubeId)>> = HashMap::new();
    for &e in k.edges() {
        let a = k.cube(e).labels[0].clone();
        let (s, t) = (k.source(e), k.target(e));
        inc.entry(s).or_default().push((true, a.clone(), t));
        inc.entry(t).or_default().push((false, a, s));
    }
    inc
}

struct Search<'a> {
    k: &'a LabelledPCSet,
    l: &'a LabelledPCSet,
    mode: IsoMode,
    order: Vec<CubeId>,
    k_sig: HashMap<CubeId, VertexSig>,
    l_by_sig: HashMap<VertexSig, Vec<CubeId>>,
    k_inc: HashMap<CubeId, Vec<(bool, Action, CubeId)>>,
    l_inc: HashMap<CubeId, Vec<(bool, Action, CubeId)>>,
    l_index: HashMap<(usize, Vec<Action>, Vec<[CubeId; 2]>), Vec<CubeId>>,
    fwd: Vec<Option<CubeId>>,
    perm: Vec<Vec<usize>>,
    used: Vec<bool>,
}

impl<'a> Search<'a> {
    fn new(k: &'a LabelledPCSet, l: &'a LabelledPCSet, mode: IsoMode) -> Search<'a> {
        let k_sig = vertex_signatures(k);
        let mut l_by_sig: HashMap<VertexSig, Vec<CubeId>> = HashMap::new();
        for (v, s) in vertex_signatures(l) {
            l_by_sig.entry(s).or_default().push(v);
        }
        for vs in l_by_sig.values_mut() {
            vs.sort();
        }
        let mut l_index: HashMap<(usize, Vec<Action>, Vec<[CubeId; 2]>), Vec<CubeId>> = HashMap::new();
        for c in l.ids() {
            let cube = l.cube(c);
            if cube.dim == 0 {
                continue;
            }
            let key = Self::index_key(mode, cube.dim, &cube.labels, cube.faces.clone());
            l_index.entry(key).or_default().push(c);
        }
        Search {
            k,
            l,
            mode,
            order: Self::order(k),
            k_sig,
            l_by_sig,
            k_inc: incidence(k),
            l_inc: incidence(l),
            l_index,
            fwd: vec![None; k.len()],
            perm: vec![Vec::new(); k.len()],
            used: vec![false; l.len()],
        }
    }

    fn index_key(mode: IsoMode, dim: usize, labels: &[Action], mut faces: Vec<[CubeId; 2]>) -> (usize, Vec<Action>, Vec<[CubeId; 2]>) {
        if mode == IsoMode::UpToCoordinatePermutation {
            faces.sort();
        }
        (dim, label_key(labels, mode), faces)
    }

    /// Vertices in breadth-first order over the undirected 1-skeleton
    /// (initial component first), then higher cubes by dimension.
    fn order(k: &LabelledPCSet) -> Vec<CubeId> {
        let inc = incidence(k);
        let mut seen = vec![false; k.len()];
        let mut order = Vec::with_capacity(k.len());
        let starts = k.initial().into_iter().chain(k.vertices().iter().copied());
        for s in starts {
            if seen[s.0] {
                continue;
            }
            seen[s.0] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                order.push(v);
                for (_, _, w) in inc.get(&v).map(|v| v.as_slice()).unwrap_or(&[]) {
                    if !seen[w.0] {
                        seen[w.0] = true;
                        queue.push_back(*w);
                    }
                }
            }
        }
        for d in 1..=k.dim().unwrap_or(0) {
            order.extend_from_slice(k.of_dim(d));
        }
        order
    }

    fn neighbourhood(&self, inc: &HashMap<CubeId, Vec<(bool, Action, CubeId)>>, v: CubeId, image: impl Fn(CubeId) -> Option<CubeId>) -> Vec<(bool, Action, CubeId)> {
        let mut out: Vec<(bool, Action, CubeId)> = inc
            .get(&v)
            .map(|es| es.iter().filter_map(|(d, a, w)| image(*w).map(|iw| (*d, a.clone(), iw))).collect())
            .unwrap_or_default();
        out.sort();
        out
    }

    fn candidates(&self, c: CubeId) -> Vec<(CubeId, Vec<usize>)> {
        let cube = self.k.cube(c);
        if cube.dim == 0 {
            let Some(pool) = self.l_by_sig.get(&self.k_sig[&c]) else {
                return Vec::new();
            };
            let want = self.neighbourhood(&self.k_inc, c, |w| self.fwd[w.0]);
            return pool
                .iter()
                .filter(|u| !self.used[u.0])
                .filter(|&&u| {
                    let have = self.neighbourhood(&self.l_inc, u, |w| self.used[w.0].then_some(w));
                    have == want
                })
                .map(|&u| (u, Vec::new()))
                .collect();
        }
        let faces: Vec<[CubeId; 2]> = cube
            .faces
            .iter()
            .map(|[a, b]| [self.fwd[a.0].expect("faces first"), self.fwd[b.0].expect("faces first")])
            .collect();
        let key = Self::index_key(self.mode, cube.dim, &cube.labels, faces.clone());
        let Some(pool) = self.l_index.get(&key) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for &u in pool {
            if self.used[u.0] {
                continue;
            }
            match self.mode {
                IsoMode::Strict => out.push((u, (0..cube.dim).collect())),
                IsoMode::UpToCoordinatePermutation => {
                    for p in permutations_matching(&faces, &cube.labels, self.l.cube(u)) {
                        out.push((u, p));
                    }
                }
            }
        }
        out
    }

    fn run(mut self) -> Result<Option<Isomorphism>, PcsetError> {
        if let (Some(a), Some(b)) = (self.k.initial(), self.l.initial()) {
            if self.k_sig[&a] != vertex_signatures(self.l)[&b] {
                return Ok(None);
            }
        }
        let n = self.order.len();
        let mut stack: Vec<(Vec<(CubeId, Vec<usize>)>, usize)> = Vec::with_capacity(n);
        let mut steps = 0usize;
        let mut descend = true;
        loop {
            steps += 1;
            if steps > STEP_BUDGET {
                return Err(PcsetError::Guard {
                    what: "isomorphism search steps",
                    size: steps,
                    limit: STEP_BUDGET,
                });
            }
            if descend {
                if stack.len() == n {
                    let map = self.fwd.iter().map(|c| c.expect("total")).collect();
                    return Ok(Some(Isomorphism {
                        map,
                        permutations: self.perm,
                    }));
                }
                let c = self.order[stack.len()];
                stack.push((self.candidates(c), 0));
            }
            let depth = stack.len() - 1;
            let c = self.order[depth];
            if let Some(prev) = self.fwd[c.0].take() {
                self.used[prev.0] = false;
            }
            let (cands, next) = stack.last_mut().expect("nonempty");
            if *next < cands.len() {
                let (u, p) = cands[*next].clone();
                *next += 1;
                self.fwd[c.0] = Some(u);
                self.perm[c.0] = p;
                self.used[u.0] = true;
                descend = true;
            } else {
                stack.pop();
                if stack.is_empty() {
                    return Ok(None);
                }
                descend = false;
            }
        }
    }
}

/// Permutations `π` with `faces[i] = ∂_{π(i)} target` and
/// `labels[i] = target.labels[π(i)]`.
fn permutations_matching(faces: &[[CubeId; 2]], labels: &[Action], target: &super::Cube) -> Vec<Vec<usize>> {
    let n = faces.len();
    let options: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| target.faces[j] == faces[i] && target.labels[j] == labels[i])
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    let mut taken = vec![false; n];
    fn go(i: usize, options: &[Vec<usize>], cur: &mut Vec<usize>, taken: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if i == options.len() {
            out.push(cur.clone());
            return;
        }
        for &j in &options[i] {
            if !taken[j] {
                taken[j] = true;
                cur.push(j);
                go(i + 1, options, cur, taken, out);
                cur.pop();
                taken[j] = false;
            }
        }
    }
    go(0, &options, &mut cur, &mut taken, &mut out);
    out
}

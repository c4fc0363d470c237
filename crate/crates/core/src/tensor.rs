//! The synchronized product `×_σ` of 1-dimensional pcsets, non-twisted
//! shells, the directed coskeleton, and the synchronized tensor product
//! `⊗_σ` of labelled precubical sets.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::limits::Limits;
use crate::pcset::{skeleton, CubeId, Grid, LabelledPCSet};
use crate::proc::ProcTerm;
use crate::syncalg::{Action, SyncAlgebra};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TensorError {
    #[error("input must be at most 1-dimensional")]
    NotOneDimensional,
    #[error("vertex coordinates do not form {{0,1}}^m")]
    NotAGrid,
    #[error("action `{0}` cannot run asynchronously")]
    NotAsynchronous(Action),
    #[error("cube guard exceeded: {size} cubes (limit {limit})")]
    Guard { size: usize, limit: usize },
}

/// `K ×_σ L` for pcsets of dimension ≤ 1. Vertices are pairs `(u, v)` in
/// `u`-major order; edges are left moves, right moves and synchronized
/// diagonals, in that order.
pub fn product1(alg: &SyncAlgebra, k: &LabelledPCSet, l: &LabelledPCSet) -> Result<LabelledPCSet, TensorError> {
    if k.dim().unwrap_or(0) > 1 || l.dim().unwrap_or(0) > 1 {
        return Err(TensorError::NotOneDimensional);
    }
    let mut out = LabelledPCSet::new();
    let mut pair: HashMap<(CubeId, CubeId), CubeId> = HashMap::new();
    for &u in k.vertices() {
        for &v in l.vertices() {
            let id = out.add_vertex(par_decoration(k.decoration(u), l.decoration(v)));
            pair.insert((u, v), id);
        }
    }
    for &x in k.edges() {
        if alg.asynchronous(&k.cube(x).labels[0]) {
            for &v in l.vertices() {
                let faces = vec![[pair[&(k.source(x), v)], pair[&(k.target(x), v)]]];
                out.push_trusted(k.cube(x).labels.clone(), faces);
            }
        }
    }
    for &y in l.edges() {
        if alg.asynchronous(&l.cube(y).labels[0]) {
            for &u in k.vertices() {
                let faces = vec![[pair[&(u, l.source(y))], pair[&(u, l.target(y))]]];
                out.push_trusted(l.cube(y).labels.clone(), faces);
            }
        }
    }
    for &x in k.edges() {
        for &y in l.edges() {
            if let Some(c) = alg.sync_action(&k.cube(x).labels[0], &l.cube(y).labels[0]) {
                let faces = vec![[pair[&(k.source(x), l.source(y))], pair[&(k.target(x), l.target(y))]]];
                out.push_trusted(vec![c], faces);
            }
        }
    }
    if let (Some(a), Some(b)) = (k.initial(), l.initial()) {
        out.set_initial(Some(pair[&(a, b)]));
    }
    Ok(out)
}

/// `product1` on grids; the coordinates of `(u, v)` are those of `u`
/// followed by those of `v`.
pub fn product1_grid(alg: &SyncAlgebra, k: &Grid, l: &Grid) -> Result<Grid, TensorError> {
    let set = product1(alg, &k.set, &l.set)?;
    let mut coords = BTreeMap::new();
    let mut next = set.vertices().iter();
    for &u in k.set.vertices() {
        for &v in l.set.vertices() {
            let id = *next.next().expect("vertex");
            coords.insert(id, k.coords[&u] | (l.coords[&v] << k.width));
        }
    }
    Ok(Grid {
        set,
        width: k.width + l.width,
        coords,
    })
}

fn par_decoration(a: Option<&ProcTerm>, b: Option<&ProcTerm>) -> Option<ProcTerm> {
    Some(ProcTerm::par(a?.clone(), b?.clone()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Coord {
    Zero,
    One,
    /// `ε_{k+1}`.
    Var(usize),
}

/// A vertex map `{0,1}^n → {0,1}^m` sending each target coordinate to a
/// constant or to one source coordinate, with every source coordinate used
/// and first occurrences in increasing order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NonTwistedMap {
    pub source_dim: usize,
    pub coords: Vec<Coord>,
}

impl NonTwistedMap {
    pub fn new(source_dim: usize, coords: Vec<Coord>) -> Option<NonTwistedMap> {
        let mut next = 0;
        for c in &coords {
            if let Coord::Var(k) = *c {
                if k > next || k >= source_dim {
                    return None;
                }
                if k == next {
                    next += 1;
                }
            }
        }
        (next == source_dim).then_some(NonTwistedMap { source_dim, coords })
    }

    /// Recovers the map from its corner list, if it has this form.
    pub fn from_corners(corners: &[u64], width: usize) -> Option<NonTwistedMap> {
        let n = corners.len().trailing_zeros() as usize;
        if corners.len() != 1 << n {
            return None;
        }
        let mut coords = Vec::with_capacity(width);
        for j in 0..width {
            let bits: Vec<u64> = corners.iter().map(|w| (w >> j) & 1).collect();
            let c = if bits.iter().all(|&b| b == 0) {
                Coord::Zero
            } else if bits.iter().all(|&b| b == 1) {
                Coord::One
            } else {
                let k = (0..n).find(|&k| bits.iter().enumerate().all(|(eps, &b)| b == ((eps >> k) & 1) as u64))?;
                Coord::Var(k)
            };
            coords.push(c);
        }
        NonTwistedMap::new(n, coords)
    }

    pub fn vertex(&self, eps: usize) -> u64 {
        self.coords.iter().enumerate().fold(0, |w, (j, c)| {
            let bit = match *c {
                Coord::Zero => 0,
                Coord::One => 1,
                Coord::Var(k) => ((eps >> k) & 1) as u64,
            };
            w | (bit << j)
        })
    }

    pub fn corners(&self) -> Vec<u64> {
        (0..1usize << self.source_dim).map(|e| self.vertex(e)).collect()
    }

    /// The map restricted along `δ_{i+1}^α`.
    pub fn face(&self, i: usize, alpha: usize) -> NonTwistedMap {
        let coords = self
            .coords
            .iter()
            .map(|&c| match c {
                Coord::Var(k) if k == i => {
                    if alpha == 0 {
                        Coord::Zero
                    } else {
                        Coord::One
                    }
                }
                Coord::Var(k) if k > i => Coord::Var(k - 1),
                c => c,
            })
            .collect();
        NonTwistedMap {
            source_dim: self.source_dim - 1,
            coords,
        }
    }
}

/// A boundary `∂□[n+1] → K` together with its filling label tuple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shell {
    pub map: Option<NonTwistedMap>,
    /// `faces[i-1][α]`.
    pub faces: Vec<[CubeId; 2]>,
    pub labels: Vec<Action>,
}

fn grid_corners(g: &Grid, c: CubeId) -> Vec<u64> {
    g.set.vertex_map(c).into_iter().map(|v| g.coords[&v]).collect()
}

fn check_grid(g: &Grid) -> Result<(), TensorError> {
    g.vertex_at().map(|_| ()).ok_or(TensorError::NotAGrid)
}

/// All non-twisted `n`-shells of `filled` (a grid holding every cube of
/// dimension ≤ n) whose label tuple is asynchronous.
pub fn enumerate_shells(alg: &SyncAlgebra, filled: &Grid, n: usize) -> Result<Vec<Shell>, TensorError> {
    check_grid(filled)?;
    let set = &filled.set;
    let mut index: HashMap<Vec<u64>, Vec<CubeId>> = HashMap::new();
    let mut forms = Vec::new();
    for &c in set.of_dim(n) {
        let corners = grid_corners(filled, c);
        if let Some(f) = NonTwistedMap::from_corners(&corners, filled.width) {
            forms.push((c, f));
        }
        index.entry(corners).or_default().push(c);
    }
    let mut shells = Vec::new();
    for (bottom, form) in forms {
        // ε_{n+1} may only occupy zero coordinates after the first use of ε_n
        let start = if n == 0 {
            0
        } else {
            form.coords.iter().position(|&c| c == Coord::Var(n - 1)).expect("all vars used") + 1
        };
        let zeros: Vec<usize> = (start..filled.width).filter(|&j| form.coords[j] == Coord::Zero).collect();
        for mask in 1usize..(1 << zeros.len()) {
            let mut coords = form.coords.clone();
            for (b, &j) in zeros.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    coords[j] = Coord::Var(n);
                }
            }
            let g = NonTwistedMap::new(n + 1, coords).expect("non-twisted by construction");
            let mut options: Vec<Vec<CubeId>> = Vec::with_capacity(2 * n + 2);
            for i in 0..=n {
                for alpha in 0..2 {
                    if (i, alpha) == (n, 0) {
                        options.push(vec![bottom]);
                    } else {
                        options.push(index.get(&g.face(i, alpha).corners()).cloned().unwrap_or_default());
                    }
                }
            }
            if options.iter().any(Vec::is_empty) {
                continue;
            }
            let mut base = set.cube(bottom).labels.clone();
            base.push(Action::new("_"));
            fill_shells(alg, set, &options, n + 1, Some(base), &mut |faces, labels| {
                shells.push(Shell {
                    map: Some(g.clone()),
                    faces,
                    labels,
                })
            });
        }
    }
    Ok(shells)
}

/// Backtracks over face choices for an `(n)`-dimensional boundary, given
/// per-face candidate lists in `(i, α)` order. When `known` is given, all
/// but its last entry are fixed labels; the last one is read off `∂_1`.
fn fill_shells(
    alg: &SyncAlgebra,
    set: &LabelledPCSet,
    options: &[Vec<CubeId>],
    dim: usize,
    known: Option<Vec<Action>>,
    emit: &mut dyn FnMut(Vec<[CubeId; 2]>, Vec<Action>),
) {
    let mut labels: Vec<Option<Action>> = match known {
        Some(mut k) => {
            k.pop();
            k.into_iter().map(Some).chain(std::iter::once(None)).collect()
        }
        None => vec![None; dim],
    };
    let mut chosen: Vec<CubeId> = Vec::with_capacity(options.len());
    fn go(
        alg: &SyncAlgebra,
        set: &LabelledPCSet,
        options: &[Vec<CubeId>],
        dim: usize,
        labels: &mut Vec<Option<Action>>,
        chosen: &mut Vec<CubeId>,
        emit: &mut dyn FnMut(Vec<[CubeId; 2]>, Vec<Action>),
    ) {
        let pos = chosen.len();
        if pos == options.len() {
            let labels: Vec<Action> = labels.iter().map(|l| l.clone().expect("all labels fixed")).collect();
            if labels.iter().all(|a| alg.asynchronous(a)) {
                let faces = chosen.chunks(2).map(|p| [p[0], p[1]]).collect();
                emit(faces, labels);
            }
            return;
        }
        let (i, alpha) = (pos / 2, pos % 2);
        'cand: for &c in &options[pos] {
            let cl = &set.cube(c).labels;
            let saved = labels.clone();
            for (slot, a) in (0..dim).filter(|&s| s != i).zip(cl) {
                match &labels[slot] {
                    Some(b) if b != a => {
                        *labels = saved;
                        continue 'cand;
                    }
                    Some(_) => {}
                    None => labels[slot] = Some(a.clone()),
                }
            }
            for (prev, &d) in chosen.iter().enumerate() {
                let (pi, pa) = (prev / 2, prev % 2);
                if pi == i {
                    continue;
                }
                // pi < i: ∂_{pi+1}^{pa} c = ∂_{i}^{alpha} d
                let ok = dim < 2 || set.face(c, pi + 1, pa) == set.face(d, i, alpha);
                if !ok {
                    *labels = saved;
                    continue 'cand;
                }
            }
            chosen.push(c);
            go(alg, set, options, dim, labels, chosen, emit);
            chosen.pop();
            *labels = saved;
        }
    }
    go(alg, set, options, dim, &mut labels, &mut chosen, emit);
}

/// `COSK^σ(K)` for a 1-dimensional grid: repeatedly fills every non-twisted
/// shell with one cube.
pub fn cosk_dir(alg: &SyncAlgebra, k: &Grid) -> Result<Grid, TensorError> {
    if k.set.dim().unwrap_or(0) > 1 {
        return Err(TensorError::NotOneDimensional);
    }
    check_grid(k)?;
    let mut g = k.clone();
    for n in 1..k.width {
        let shells = enumerate_shells(alg, &g, n)?;
        if shells.is_empty() {
            break;
        }
        for s in shells {
            g.set.push_trusted(s.labels, s.faces);
        }
    }
    Ok(g)
}

/// The labelled coskeleton without the non-twisted restriction: fills every
/// shell whose labelling factors through an asynchronous tuple, up to
/// dimension `max_dim`. Only meant to exhibit that directedness matters.
pub fn cosk_undirected(alg: &SyncAlgebra, k: &LabelledPCSet, max_dim: usize) -> Result<LabelledPCSet, TensorError> {
    if k.dim().unwrap_or(0) > 1 {
        return Err(TensorError::NotOneDimensional);
    }
    let mut out = k.clone();
    for n in 1..max_dim {
        let cubes = out.of_dim(n).to_vec();
        let options = vec![cubes; 2 * n + 2];
        let mut found = Vec::new();
        fill_shells(alg, &out, &options, n + 1, None, &mut |faces, labels| found.push((faces, labels)));
        if found.is_empty() {
            break;
        }
        for (faces, labels) in found {
            out.push_trusted(labels, faces);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    /// In `C⁻`: fixed at 0.
    Minus,
    /// In `C⁺`: fixed at 1.
    Plus,
    /// In `A`: runs alone.
    Active,
    /// In `B`, synchronized with the given (0-based) coordinate.
    Paired(usize),
}

/// A cube of `□[p] ⊗_σ □[q]`: one slot per coordinate, left coordinates
/// `0..p` first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TensorCubeDescriptor {
    pub p: usize,
    pub q: usize,
    pub slots: Vec<Slot>,
}

impl TensorCubeDescriptor {
    /// Coordinates that become cube directions, ascending: `A` and the left
    /// half of `B`.
    pub fn directions(&self) -> Vec<usize> {
        (0..self.p + self.q)
            .filter(|&j| match self.slots[j] {
                Slot::Active => true,
                Slot::Paired(k) => j < k,
                _ => false,
            })
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.directions().len()
    }

    /// `(A, B, C⁻, C⁺)` as 1-based coordinate lists.
    pub fn partition(&self) -> (Vec<usize>, Vec<usize>, Vec<usize>, Vec<usize>) {
        let pick = |f: &dyn Fn(Slot) -> bool| (0..self.slots.len()).filter(|&j| f(self.slots[j])).map(|j| j + 1).collect();
        (
            pick(&|s| s == Slot::Active),
            pick(&|s| matches!(s, Slot::Paired(_))),
            pick(&|s| s == Slot::Minus),
            pick(&|s| s == Slot::Plus),
        )
    }

    /// The pairing `f` as 1-based `(i, f(i))`.
    pub fn pairing(&self) -> Vec<(usize, usize)> {
        (0..self.p)
            .filter_map(|j| match self.slots[j] {
                Slot::Paired(k) => Some((j + 1, k + 1)),
                _ => None,
            })
            .collect()
    }

    /// Labels along `directions()`, synchronizing paired coordinates.
    /// `None` if some pair does not synchronize.
    pub fn labels(&self, alg: &SyncAlgebra, coord_labels: &[Action]) -> Option<Vec<Action>> {
        self.directions()
            .into_iter()
            .map(|j| match self.slots[j] {
                Slot::Paired(k) => alg.sync_action(&coord_labels[j], &coord_labels[k]),
                _ => Some(coord_labels[j].clone()),
            })
            .collect()
    }

    pub fn vertex(&self, eps: usize) -> u64 {
        let dirs = self.directions();
        let mut w = 0u64;
        for (j, s) in self.slots.iter().enumerate() {
            let bit = match *s {
                Slot::Minus => 0,
                Slot::Plus => 1,
                Slot::Active => (eps >> dirs.iter().position(|&d| d == j).expect("direction")) & 1,
                Slot::Paired(k) => {
                    let d = j.min(k);
                    (eps >> dirs.iter().position(|&x| x == d).expect("direction")) & 1
                }
            };
            w |= (bit as u64) << j;
        }
        w
    }

    /// `∂_{k+1}^α`: the `k`-th direction (and its partner) is fixed at `α`.
    pub fn face(&self, k: usize, alpha: usize) -> TensorCubeDescriptor {
        let j = self.directions()[k];
        let fixed = if alpha == 0 { Slot::Minus } else { Slot::Plus };
        let mut slots = self.slots.clone();
        if let Slot::Paired(other) = slots[j] {
            slots[other] = fixed;
        }
        slots[j] = fixed;
        TensorCubeDescriptor { p: self.p, q: self.q, slots }
    }

    /// Admissible under `alg`: paired labels synchronize, lone labels are
    /// asynchronous, and every label of a cube of dimension ≥ 2 is.
    pub fn is_valid(&self, alg: &SyncAlgebra, coord_labels: &[Action]) -> bool {
        let Some(labels) = self.labels(alg, coord_labels) else {
            return false;
        };
        let dirs = self.directions();
        labels.iter().zip(&dirs).all(|(a, &j)| {
            (labels.len() < 2 && matches!(self.slots[j], Slot::Paired(_))) || alg.asynchronous(a)
        })
    }
}

/// Every slot assignment whose pairing is a partial matching between left
/// and right coordinates. `fixed` allows the `C±` slots.
fn all_descriptors(p: usize, q: usize, fixed: bool) -> Vec<TensorCubeDescriptor> {
    let mut out = Vec::new();
    let mut slots = vec![Slot::Minus; p + q];
    fn go(j: usize, p: usize, q: usize, fixed: bool, slots: &mut Vec<Slot>, out: &mut Vec<TensorCubeDescriptor>) {
        if j == p + q {
            out.push(TensorCubeDescriptor { p, q, slots: slots.clone() });
            return;
        }
        if j >= p {
            if let Some(l) = (0..p).find(|&l| slots[l] == Slot::Paired(j)) {
                slots[j] = Slot::Paired(l);
                go(j + 1, p, q, fixed, slots, out);
                return;
            }
        }
        let mut choices = vec![Slot::Active];
        if fixed {
            choices.insert(0, Slot::Plus);
            choices.insert(0, Slot::Minus);
        }
        if j < p {
            for k in p..p + q {
                if !slots[..j].contains(&Slot::Paired(k)) {
                    choices.push(Slot::Paired(k));
                }
            }
        }
        for c in choices {
            slots[j] = c;
            go(j + 1, p, q, fixed, slots, out);
        }
        slots[j] = Slot::Minus;
    }
    go(0, p, q, fixed, &mut slots, &mut out);
    out
}

/// `□[p] ⊗_σ □[q]` with its descriptors (indexed by cube id).
#[derive(Debug, Clone)]
pub struct CubeTensor {
    pub grid: Grid,
    pub descriptors: Vec<TensorCubeDescriptor>,
}

/// `□[p] ⊗_σ □[q]` enumerated directly from descriptors. Vertex ids equal
/// their coordinate words (left coordinates in the low bits).
pub fn cube_tensor(alg: &SyncAlgebra, left: &[Action], right: &[Action]) -> Result<CubeTensor, TensorError> {
    for a in left.iter().chain(right) {
        if !alg.asynchronous(a) {
            return Err(TensorError::NotAsynchronous(a.clone()));
        }
    }
    let (p, q) = (left.len(), right.len());
    let labels: Vec<Action> = left.iter().chain(right).cloned().collect();
    let mut descs: Vec<TensorCubeDescriptor> = all_descriptors(p, q, true)
        .into_iter()
        .filter(|d| d.is_valid(alg, &labels))
        .collect();
    descs.sort_by_key(|d| (d.dim(), if d.dim() == 0 { d.vertex(0) } else { 0 }));
    let mut set = LabelledPCSet::new();
    let mut coords = BTreeMap::new();
    let mut ids: HashMap<TensorCubeDescriptor, CubeId> = HashMap::new();
    for d in &descs {
        let id = if d.dim() == 0 {
            let v = set.add_vertex(None);
            coords.insert(v, d.vertex(0));
            v
        } else {
            let faces = (0..d.dim())
                .map(|k| [ids[&d.face(k, 0)], ids[&d.face(k, 1)]])
                .collect();
            set.push_trusted(d.labels(alg, &labels).expect("valid"), faces)
        };
        ids.insert(d.clone(), id);
    }
    set.set_initial(set.vertices().first().copied());
    Ok(CubeTensor {
        grid: Grid {
            set,
            width: p + q,
            coords,
        },
        descriptors: descs,
    })
}

/// `K ⊗_σ L` with, for each cube, the pair of cubes it comes from and its
/// interior descriptor in their tensor.
#[derive(Debug, Clone)]
pub struct TensorProduct {
    pub set: LabelledPCSet,
    pub provenance: Vec<(CubeId, CubeId, TensorCubeDescriptor)>,
}

fn interior_descriptors(alg: &SyncAlgebra, lx: &[Action], ly: &[Action]) -> Vec<TensorCubeDescriptor> {
    let labels: Vec<Action> = lx.iter().chain(ly).cloned().collect();
    all_descriptors(lx.len(), ly.len(), false)
        .into_iter()
        .filter(|d| d.is_valid(alg, &labels))
        .collect()
}

/// `K ⊗_σ L`, the colimit of `□[p] ⊗_σ □[q]` over all pairs of cubes.
/// Each cube is a pair `(x, y)` with a descriptor using every coordinate of
/// both; faces that fix coordinates are moved onto the faces of `x`, `y`.
pub fn tensor(alg: &SyncAlgebra, k: &LabelledPCSet, l: &LabelledPCSet, limits: &Limits) -> Result<TensorProduct, TensorError> {
    let mut cache: HashMap<(Vec<Action>, Vec<Action>), Vec<TensorCubeDescriptor>> = HashMap::new();
    let mut items: Vec<(usize, CubeId, CubeId, TensorCubeDescriptor)> = Vec::new();
    for x in k.ids() {
        for y in l.ids() {
            let key = (k.cube(x).labels.clone(), l.cube(y).labels.clone());
            let descs = cache.entry(key.clone()).or_insert_with(|| interior_descriptors(alg, &key.0, &key.1));
            if items.len() + descs.len() > limits.cubes {
                return Err(TensorError::Guard {
                    size: items.len() + descs.len(),
                    limit: limits.cubes,
                });
            }
            for d in descs.iter() {
                items.push((d.dim(), x, y, d.clone()));
            }
        }
    }
    items.sort_by_key(|item| item.0);
    let mut set = LabelledPCSet::new();
    let mut ids: HashMap<(CubeId, CubeId, Vec<Slot>), CubeId> = HashMap::new();
    let mut provenance = Vec::with_capacity(items.len());
    for (dim, x, y, d) in items {
        let id = if dim == 0 {
            set.add_vertex(par_decoration(k.decoration(x), l.decoration(y)))
        } else {
            let faces = (0..dim)
                .map(|i| {
                    let f = |alpha| {
                        let (fx, fy, fd) = normalize(k, l, x, y, &d.face(i, alpha));
                        ids[&(fx, fy, fd.slots)]
                    };
                    [f(0), f(1)]
                })
                .collect();
            let mut labels: Vec<Action> = k.cube(x).labels.clone();
            labels.extend(l.cube(y).labels.iter().cloned());
            set.push_trusted(d.labels(alg, &labels).expect("valid"), faces)
        };
        ids.insert((x, y, d.slots.clone()), id);
        provenance.push((x, y, d));
    }
    if let (Some(a), Some(b)) = (k.initial(), l.initial()) {
        set.set_initial(Some(ids[&(a, b, Vec::new())]));
    }
    Ok(TensorProduct { set, provenance })
}

/// Pushes fixed coordinates of `d` into faces of `x` and `y`.
fn normalize(
    k: &LabelledPCSet,
    l: &LabelledPCSet,
    mut x: CubeId,
    mut y: CubeId,
    d: &TensorCubeDescriptor,
) -> (CubeId, CubeId, TensorCubeDescriptor) {
    let fixed = |s: Slot| match s {
        Slot::Minus => Some(0),
        Slot::Plus => Some(1),
        _ => None,
    };
    for j in (0..d.p).rev() {
        if let Some(alpha) = fixed(d.slots[j]) {
            x = k.face(x, j + 1, alpha);
        }
    }
    for j in (0..d.q).rev() {
        if let Some(alpha) = fixed(d.slots[d.p + j]) {
            y = l.face(y, j + 1, alpha);
        }
    }
    let keep: Vec<usize> = (0..d.slots.len()).filter(|&j| fixed(d.slots[j]).is_none()).collect();
    let renumber: HashMap<usize, usize> = keep.iter().enumerate().map(|(new, &old)| (old, new)).collect();
    let slots = keep
        .iter()
        .map(|&j| match d.slots[j] {
            Slot::Paired(o) => Slot::Paired(renumber[&o]),
            s => s,
        })
        .collect();
    let p = keep.iter().filter(|&&j| j < d.p).count();
    (
        x,
        y,
        TensorCubeDescriptor {
            p,
            q: keep.len() - p,
            slots,
        },
    )
}

/// `K_{≤1}` as a grid, when the vertices of `K` carry coordinates.
pub fn skeleton_grid(g: &Grid) -> Grid {
    Grid {
        set: skeleton(&g.set, 1),
        width: g.width,
        coords: g.coords.clone(),
    }
}

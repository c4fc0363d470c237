//! Path categories of labelled precubical sets: the free category on the
//! 1-skeleton modulo the commutation relation of each 2-cube, and normal
//! forms in the trace monoid of an algebra.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::limits::Limits;
use crate::pcset::{CubeId, LabelledPCSet};
use crate::syncalg::{Action, SyncAlgebra};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FlowError {
    #[error("the 1-skeleton has a directed cycle")]
    Cyclic,
    #[error("path guard exceeded: more than {limit} paths")]
    Guard { limit: usize },
    #[error("trace words must be nonempty")]
    EmptyWord,
    #[error("action `{0}` is not in the alphabet")]
    UnknownAction(Action),
}

pub type Path = Vec<CubeId>;

#[derive(Debug, Clone)]
pub struct PathCategory {
    pub states: Vec<CubeId>,
    pub generators: Vec<CubeId>,
    /// One per 2-cube: `∂_1^0 c · ∂_2^1 c ~ ∂_2^0 c · ∂_1^1 c`.
    pub relations: Vec<(Path, Path)>,
    paths: Vec<Path>,
    ends: Vec<(CubeId, CubeId)>,
    class: Vec<usize>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let n = self.0[y];
            self.0[y] = r;
            y = n;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// The path data of `|K|_bad`: all directed paths, grouped into classes of
/// the congruence generated by the 2-cubes.
pub fn bad_realization(k: &LabelledPCSet, limits: &Limits) -> Result<PathCategory, FlowError> {
    let order = k.topological_order().ok_or(FlowError::Cyclic)?;
    let out = k.out_edges();
    let mut paths: Vec<Path> = Vec::new();
    // every path is `e · tail`; `cons` finds a path from that pair
    let mut tail: Vec<Option<usize>> = Vec::new();
    let mut cons: HashMap<(CubeId, Option<usize>), usize> = HashMap::new();
    // extend paths backwards from the sinks so that `from[v]` lists every
    // path starting at v
    let mut from: HashMap<CubeId, Vec<usize>> = HashMap::new();
    for &v in order.iter().rev() {
        let mut mine = Vec::new();
        for &e in out.get(&v).map(|v| v.as_slice()).unwrap_or(&[]) {
            let t = k.target(e);
            let rest = from.get(&t).map(|v| v.as_slice()).unwrap_or(&[]);
            for p in std::iter::once(None).chain(rest.iter().map(|&p| Some(p))) {
                if paths.len() >= limits.paths {
                    return Err(FlowError::Guard { limit: limits.paths });
                }
                let mut q = Vec::with_capacity(p.map_or(0, |p| paths[p].len()) + 1);
                q.push(e);
                if let Some(p) = p {
                    q.extend_from_slice(&paths[p]);
                }
                cons.insert((e, p), paths.len());
                mine.push(paths.len());
                tail.push(p);
                paths.push(q);
            }
        }
        from.insert(v, mine);
    }
    let ends: Vec<(CubeId, CubeId)> = paths
        .iter()
        .map(|p| (k.source(p[0]), k.target(*p.last().expect("nonempty"))))
        .collect();

    let relations: Vec<(Path, Path)> = k
        .of_dim(2)
        .iter()
        .map(|&c| {
            (
                vec![k.face(c, 1, 0), k.face(c, 2, 1)],
                vec![k.face(c, 2, 0), k.face(c, 1, 1)],
            )
        })
        .collect();
    let mut rewrites: HashMap<(CubeId, CubeId), Vec<(CubeId, CubeId)>> = HashMap::new();
    for (l, r) in &relations {
        rewrites.entry((l[0], l[1])).or_default().push((r[0], r[1]));
    }
    // Shortest paths first: by then the class of every tail is final, and
    // joining `e·t` with `e·rep(t)` plus rewriting at the head generates
    // the congruence.
    let mut uf = UnionFind((0..paths.len()).collect());
    let mut by_len: Vec<usize> = (0..paths.len()).collect();
    by_len.sort_by_key(|&i| paths[i].len());
    for id in by_len {
        let p = &paths[id];
        let Some(t) = tail[id] else { continue };
        let root = uf.find(t);
        if root != t {
            uf.union(id, cons[&(p[0], Some(root))]);
        }
        if let Some(rs) = rewrites.get(&(p[0], p[1])) {
            for &(r0, r1) in rs {
                let inner = cons[&(r1, tail[t])];
                uf.union(id, cons[&(r0, Some(inner))]);
            }
        }
    }
    let class = (0..paths.len()).map(|i| uf.find(i)).collect();
    Ok(PathCategory {
        states: k.vertices().to_vec(),
        generators: k.edges().to_vec(),
        relations,
        paths,
        ends,
        class,
    })
}

impl PathCategory {
    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn class_of(&self, path: &[CubeId]) -> Option<usize> {
        self.paths.iter().position(|p| p == path).map(|i| self.class[i])
    }

    /// Path ids grouped by class, for paths from `a` to `b`.
    pub fn classes(&self, a: CubeId, b: CubeId) -> BTreeMap<usize, Vec<usize>> {
        let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, &e) in self.ends.iter().enumerate() {
            if e == (a, b) {
                out.entry(self.class[i]).or_default().push(i);
            }
        }
        out
    }

    /// Every class as a list of path ids.
    pub fn all_classes(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..self.paths.len() {
            out.entry(self.class[i]).or_default().push(i);
        }
        out
    }

    pub fn path(&self, id: usize) -> &Path {
        &self.paths[id]
    }

    /// One path per class from `a` to `b` (the first one enumerated).
    pub fn representatives(&self, a: CubeId, b: CubeId) -> Vec<Path> {
        self.classes(a, b).values().map(|ids| self.paths[ids[0]].clone()).collect()
    }
}

pub fn path_class_counts(pc: &PathCategory, a: CubeId, b: CubeId) -> usize {
    pc.classes(a, b).len()
}

pub fn path_label(k: &LabelledPCSet, path: &[CubeId]) -> Vec<Action> {
    path.iter().map(|&e| k.cube(e).labels[0].clone()).collect()
}

/// Letters commute iff both can run asynchronously.
pub fn independent(alg: &SyncAlgebra, a: &Action, b: &Action) -> bool {
    alg.asynchronous(a) && alg.asynchronous(b)
}

/// The least word, in the order of the alphabet, among those obtained by
/// swapping adjacent independent letters.
pub fn trace_normal_form(alg: &SyncAlgebra, word: &[Action]) -> Result<Vec<Action>, FlowError> {
    if word.is_empty() {
        return Err(FlowError::EmptyWord);
    }
    let mut ranks = Vec::with_capacity(word.len());
    for a in word {
        ranks.push(alg.rank(a).ok_or_else(|| FlowError::UnknownAction(a.clone()))?);
    }
    let mut rest: Vec<(usize, Action)> = ranks.into_iter().zip(word.iter().cloned()).collect();
    let mut out = Vec::with_capacity(word.len());
    while !rest.is_empty() {
        let mut best: Option<usize> = None;
        for i in 0..rest.len() {
            let movable = rest[..i].iter().all(|(_, b)| independent(alg, &rest[i].1, b));
            if movable && best.is_none_or(|j| rest[i].0 < rest[j].0) {
                best = Some(i);
            }
            if !alg.asynchronous(&rest[i].1) {
                // nothing after a dependent letter can pass it
                break;
            }
        }
        let i = best.expect("the first letter is always movable");
        out.push(rest.remove(i).1);
    }
    Ok(out)
}

/// Pairs of congruent paths whose labels have different normal forms.
pub fn trace_conflicts(alg: &SyncAlgebra, k: &LabelledPCSet, pc: &PathCategory) -> Result<Vec<(Path, Path)>, FlowError> {
    let mut memo: HashMap<Vec<Action>, Vec<Action>> = HashMap::new();
    let mut nf = |p: &Path| -> Result<Vec<Action>, FlowError> {
        let word = path_label(k, p);
        if let Some(n) = memo.get(&word) {
            return Ok(n.clone());
        }
        let n = trace_normal_form(alg, &word)?;
        memo.insert(word, n.clone());
        Ok(n)
    };
    let mut conflicts = Vec::new();
    for ids in pc.all_classes().values() {
        let first = nf(pc.path(ids[0]))?;
        for &i in &ids[1..] {
            if nf(pc.path(i))? != first {
                conflicts.push((pc.path(ids[0]).clone(), pc.path(i).clone()));
            }
        }
    }
    Ok(conflicts)
}

#[cfg(test)]
mod tests {
    use std::collections::{BTreeSet, VecDeque};

    use super::*;
    use crate::pcset::{boundary, raw_standard_cube};
    use crate::syncalg::{ccs, close_alphabet, tcsp, trivial};
    use proptest::prelude::*;

    fn acts(names: &[&str]) -> Vec<Action> {
        names.iter().map(|s| Action::new(s)).collect()
    }

    fn bottom_top(k: &LabelledPCSet) -> (CubeId, CubeId) {
        let vs = k.vertices();
        (vs[0], *vs.last().unwrap())
    }

    fn count(k: &LabelledPCSet) -> usize {
        let pc = bad_realization(k, &Limits::default()).unwrap();
        let (a, b) = bottom_top(k);
        path_class_counts(&pc, a, b)
    }

    // every path's class by exhaustive rewriting at all positions
    fn naive_classes(pc: &PathCategory) -> Vec<BTreeSet<Path>> {
        let mut seen: BTreeSet<Path> = BTreeSet::new();
        let mut out = Vec::new();
        for p in pc.paths() {
            if seen.contains(p) {
                continue;
            }
            let mut class = BTreeSet::from([p.clone()]);
            let mut todo = VecDeque::from([p.clone()]);
            while let Some(q) = todo.pop_front() {
                for i in 0..q.len().saturating_sub(1) {
                    for (l, r) in &pc.relations {
                        for (from, to) in [(l, r), (r, l)] {
                            if q[i..i + 2] == from[..] {
                                let mut w = q.clone();
                                w[i..i + 2].copy_from_slice(to);
                                if class.insert(w.clone()) {
                                    todo.push_back(w);
                                }
                            }
                        }
                    }
                }
            }
            seen.extend(class.iter().cloned());
            out.push(class);
        }
        out
    }

    #[test]
    fn closure_matches_exhaustive_rewriting() {
        let alg = trivial(&acts(&["a", "b", "c"]));
        let mut shapes = vec![raw_standard_cube(&acts(&["a", "b", "c"])).set, boundary(&raw_standard_cube(&acts(&["a", "b", "c"])).set)];
        let t = crate::proc::parse("a.b.nil || (b.nil + c.a.nil) || rec x (c.x)", &alg).unwrap();
        shapes.push(crate::semantics::interp(&alg, &t, 4, &Limits::default()).unwrap().pcset);
        for k in shapes {
            let pc = bad_realization(&k, &Limits::default()).unwrap();
            let naive = naive_classes(&pc);
            assert_eq!(naive.len(), pc.all_classes().len());
            for class in naive {
                let ids: BTreeSet<usize> = class.iter().map(|p| pc.class_of(p).unwrap()).collect();
                assert_eq!(ids.len(), 1);
            }
        }
    }

    #[test]
    fn square_and_its_boundary() {
        let sq = raw_standard_cube(&acts(&["a", "b"])).set;
        assert_eq!(count(&sq), 1);
        assert_eq!(count(&boundary(&sq)), 2);
    }

    #[test]
    fn boundaries_of_higher_cubes_collapse() {
        for n in 3..=4 {
            let c = raw_standard_cube(&vec![Action::new("a"); n]).set;
            assert_eq!(count(&boundary(&c)), 1, "n = {n}");
            assert_eq!(count(&c), 1);
        }
    }

    #[test]
    fn cube_categories_are_posets() {
        for n in 0..=4 {
            let c = raw_standard_cube(&vec![Action::new("a"); n]).set;
            let pc = bad_realization(&c, &Limits::default()).unwrap();
            for &a in c.vertices() {
                for &b in c.vertices() {
                    assert!(path_class_counts(&pc, a, b) <= 1);
                }
            }
        }
    }

    #[test]
    fn labels_of_square_paths() {
        let alg = trivial(&acts(&["a", "b"]));
        let sq = raw_standard_cube(&acts(&["a", "b"])).set;
        let pc = bad_realization(&sq, &Limits::default()).unwrap();
        let (a, b) = bottom_top(&sq);
        let ids = &pc.classes(a, b)[&pc.class_of(pc.representatives(a, b)[0].as_slice()).unwrap()];
        let words: BTreeSet<Vec<Action>> = ids.iter().map(|&i| path_label(&sq, pc.path(i))).collect();
        assert_eq!(words, [acts(&["a", "b"]), acts(&["b", "a"])].into_iter().collect());
        assert!(trace_conflicts(&alg, &sq, &pc).unwrap().is_empty());
    }

    #[test]
    fn path_guard() {
        let c = raw_standard_cube(&acts(&["a", "b", "c"])).set;
        let lim = Limits { paths: 5, ..Limits::default() };
        assert_eq!(bad_realization(&c, &lim).unwrap_err(), FlowError::Guard { limit: 5 });
    }

    #[test]
    fn normal_forms() {
        let alg = ccs(&close_alphabet("ccs", &acts(&["a", "b"]))).unwrap();
        assert_eq!(trace_normal_form(&alg, &acts(&["b", "a"])).unwrap(), acts(&["a", "b"]));
        assert_eq!(trace_normal_form(&alg, &acts(&["a"])).unwrap(), acts(&["a"]));
        let t = tcsp(&acts(&["a", "b", "tau"])).unwrap();
        assert_eq!(trace_normal_form(&t, &acts(&["b", "a"])).unwrap(), acts(&["b", "a"]));
        assert_eq!(trace_normal_form(&t, &acts(&["b", "tau", "tau"])).unwrap(), acts(&["b", "tau", "tau"]));
        assert_eq!(trace_normal_form(&t, &[]), Err(FlowError::EmptyWord));
    }

    fn swap_closure(alg: &SyncAlgebra, w: &[Action]) -> BTreeSet<Vec<Action>> {
        let mut seen = BTreeSet::from([w.to_vec()]);
        let mut queue = VecDeque::from([w.to_vec()]);
        while let Some(u) = queue.pop_front() {
            for i in 0..u.len().saturating_sub(1) {
                if independent(alg, &u[i], &u[i + 1]) {
                    let mut v = u.clone();
                    v.swap(i, i + 1);
                    if seen.insert(v.clone()) {
                        queue.push_back(v);
                    }
                }
            }
        }
        seen
    }

    fn word_strategy() -> impl Strategy<Value = (usize, Vec<usize>)> {
        (0usize..2, prop::collection::vec(0usize..4, 1..=6))
    }

    proptest! {
        #[test]
        fn normal_form_is_least_in_swap_class((which, letters) in word_strategy()) {
            let alg = if which == 0 {
                ccs(&close_alphabet("ccs", &acts(&["a", "b"]))).unwrap()
            } else {
                tcsp(&acts(&["a", "b", "c", "tau"])).unwrap()
            };
            let alphabet = alg.alphabet().to_vec();
            let w: Vec<Action> = letters.iter().map(|&i| alphabet[i % alphabet.len()].clone()).collect();
            let class = swap_closure(&alg, &w);
            let least = class
                .iter()
                .min_by_key(|u| u.iter().map(|a| alg.rank(a).unwrap()).collect::<Vec<_>>())
                .unwrap()
                .clone();
            let nf = trace_normal_form(&alg, &w).unwrap();
            prop_assert_eq!(&nf, &least);
            prop_assert_eq!(trace_normal_form(&alg, &nf).unwrap(), nf.clone());
            for u in &class {
                prop_assert_eq!(trace_normal_form(&alg, u).unwrap(), nf.clone());
            }
        }
    }
}

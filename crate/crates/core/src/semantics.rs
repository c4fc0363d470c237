//! The cubical semantics of process terms and checks of its structural
//! properties.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::limits::Limits;
use crate::pcset::{self, find_isomorphism, share_equal_futures, CubeId, IsoMode, LabelledPCSet, PcsetError};
use crate::proc::{self, ProcTerm, Var};
use crate::sos::{self, build_lts, restriction_allows, SosError};
use crate::syncalg::{Action, SyncAlgebra};
use crate::tensor::{tensor, TensorError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SemError {
    #[error("term has a free variable `{0}`")]
    OpenTerm(Var),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Pcset(#[from] PcsetError),
    #[error(transparent)]
    Sos(#[from] SosError),
    #[error("cube guard exceeded: {size} cubes (limit {limit})")]
    Guard { size: usize, limit: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InterpMeta {
    pub depth_bound: usize,
    /// Every recursion reached a fixed point before the bound.
    pub stabilized: bool,
    /// Some recursion was cut off at the bound.
    pub truncated: bool,
    pub census: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Interpretation {
    pub pcset: LabelledPCSet,
    pub meta: InterpMeta,
}

struct Binding {
    var: Var,
    stage: LabelledPCSet,
    term: ProcTerm,
}

struct Interp<'a> {
    alg: &'a SyncAlgebra,
    depth: usize,
    limits: &'a Limits,
    truncated: bool,
}

/// Substitutes every bound variable by its closed recursive term,
/// innermost binding first.
fn close(env: &[Binding], t: &ProcTerm) -> ProcTerm {
    env.iter().rev().fold(t.clone(), |t, b| t.substitute(&b.var, &b.term))
}

impl Interp<'_> {
    fn guard(&self, k: &LabelledPCSet) -> Result<(), SemError> {
        if k.len() > self.limits.cubes {
            return Err(SemError::Guard {
                size: k.len(),
                limit: self.limits.cubes,
            });
        }
        Ok(())
    }

    fn go(&mut self, term: &ProcTerm, env: &mut Vec<Binding>) -> Result<LabelledPCSet, SemError> {
        let k = match term {
            ProcTerm::Nil => {
                let mut k = LabelledPCSet::new();
                let v = k.add_vertex(Some(ProcTerm::Nil));
                k.set_initial(Some(v));
                k
            }
            ProcTerm::Prefix(a, body) => {
                let rest = self.go(body, env)?;
                let mut k = LabelledPCSet::new();
                let v = k.add_vertex(Some(close(env, term)));
                let offset = k.append(&rest);
                let target = CubeId(rest.initial().expect("initial").0 + offset);
                k.add_cube(vec![a.clone()], vec![[v, target]])?;
                k.set_initial(Some(v));
                k
            }
            ProcTerm::Sum(l, r) => {
                let kl = self.go(l, env)?;
                let kr = self.go(r, env)?;
                let (union, offset) = pcset::disjoint_union(&kl, &kr);
                let a = kl.initial().expect("initial");
                let b = CubeId(kr.initial().expect("initial").0 + offset);
                let decoration = close(env, term);
                let merged = pcset::merge_vertices(&union, &[(a, b)], |members| {
                    if members.contains(&a) {
                        Some(decoration.clone())
                    } else {
                        union.decoration(members[0]).cloned()
                    }
                })?;
                share_equal_futures(&merged)
            }
            ProcTerm::Restrict(a, body) => {
                let inner = self.go(body, env)?;
                let (mut k, _) = inner.filter(|_, c| c.labels.iter().all(|mu| restriction_allows(self.alg, a, mu)));
                k.map_decorations(|d| ProcTerm::restrict(a.clone(), d.clone()));
                k
            }
            ProcTerm::Par(l, r) => {
                let kl = self.go(l, env)?;
                let kr = self.go(r, env)?;
                tensor(self.alg, &kl, &kr, self.limits)?.set
            }
            ProcTerm::Var(x) => match env.iter().rev().find(|b| &b.var == x) {
                Some(b) => b.stage.clone(),
                None => return Err(SemError::OpenTerm(x.clone())),
            },
            ProcTerm::Rec(x, body) => {
                let closed = close(env, term);
                let mut stage = LabelledPCSet::new();
                let v = stage.add_vertex(Some(closed.clone()));
                stage.set_initial(Some(v));
                let mut stable = false;
                for _ in 0..self.depth {
                    env.push(Binding {
                        var: x.clone(),
                        stage,
                        term: closed.clone(),
                    });
                    let next = self.go(body, env);
                    let previous = env.pop().expect("binding").stage;
                    let mut next = next?;
                    next.set_decoration(next.initial().expect("initial"), Some(closed.clone()));
                    let same = next.len() <= self.limits.iso_cubes
                        && matches!(
                            find_isomorphism(&next, &previous, IsoMode::Strict, self.limits.iso_cubes),
                            Ok(Some(_))
                        );
                    stage = next;
                    if same {
                        stable = true;
                        break;
                    }
                }
                if !stable {
                    self.truncated = true;
                }
                stage
            }
        };
        self.guard(&k)?;
        Ok(k)
    }
}

/// `⟦term⟧` with every recursion unfolded at most `depth_bound` times.
pub fn interp(alg: &SyncAlgebra, term: &ProcTerm, depth_bound: usize, limits: &Limits) -> Result<Interpretation, SemError> {
    if let Some(x) = term.free_vars().into_iter().next() {
        return Err(SemError::OpenTerm(x));
    }
    let mut it = Interp {
        alg,
        depth: depth_bound,
        limits,
        truncated: false,
    };
    let pcset = it.go(term, &mut Vec::new())?;
    let meta = InterpMeta {
        depth_bound,
        stabilized: !it.truncated,
        truncated: it.truncated,
        census: pcset.census(),
    };
    Ok(Interpretation { pcset, meta })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DoubleFilling {
    pub dim: usize,
    pub labels: Vec<String>,
    pub faces: Vec<[CubeId; 2]>,
    pub fillers: Vec<CubeId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ParadigmReport {
    pub shells_checked: usize,
    pub violations: Vec<DoubleFilling>,
}

impl ParadigmReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Groups cubes of dimension ≥ 1 by boundary and label tuple; a group with
/// more than one cube is a shell with several fillers.
pub fn verify_paradigm(k: &LabelledPCSet, _alg: &SyncAlgebra) -> ParadigmReport {
    let mut groups: BTreeMap<(usize, Vec<Action>, Vec<[CubeId; 2]>), Vec<CubeId>> = BTreeMap::new();
    for c in k.ids() {
        let cube = k.cube(c);
        if cube.dim >= 1 {
            groups
                .entry((cube.dim, cube.labels.clone(), cube.faces.clone()))
                .or_default()
                .push(c);
        }
    }
    let shells_checked = groups.len();
    let violations = groups
        .into_iter()
        .filter(|(_, fillers)| fillers.len() > 1)
        .map(|((dim, labels, faces), fillers)| DoubleFilling {
            dim,
            labels: labels.iter().map(|a| a.to_string()).collect(),
            faces,
            fillers,
        })
        .collect();
    ParadigmReport {
        shells_checked,
        violations,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepMismatch {
    pub vertex: CubeId,
    pub decoration: String,
    /// Transitions of the term with no matching edge.
    pub missing: Vec<(String, String)>,
    /// Edges with no matching transition.
    pub extra: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Restrict1Report {
    pub depth_bound: usize,
    pub vertices_checked: usize,
    pub mismatches: Vec<StepMismatch>,
    pub lts_states: usize,
    pub lts_transitions: usize,
    pub hda_states: usize,
    pub hda_transitions: usize,
    /// Outgoing edges sharing label and target decoration with a sibling
    /// edge into a different vertex, as in `rec x (a.x) || rec x (a.x)`.
    pub decoration_collisions: usize,
    /// The (decoration, depth) unfolding of the 1-skeleton equals the
    /// transition system of the term.
    pub global_match: bool,
}

impl Restrict1Report {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty() && self.global_match
    }
}

type Move = (Action, ProcTerm);

/// Compares the 1-skeleton of an interpretation with the operational
/// semantics: every vertex at depth below the bound has exactly the
/// outgoing (label, decoration) pairs its decoration can perform, and the
/// depth-keyed unfolding from the initial vertex is the transition system
/// of `term`. Edges with one label never join the same two vertices.
pub fn verify_restrict1(
    alg: &SyncAlgebra,
    term: &ProcTerm,
    k: &Interpretation,
    limits: &Limits,
) -> Result<Restrict1Report, SemError> {
    let set = &k.pcset;
    let d = k.meta.depth_bound;
    let out = set.out_edges();
    let edges_of = |v: CubeId| out.get(&v).map(|v| v.as_slice()).unwrap_or(&[]);
    let depths = set.depths();
    let mut mismatches = Vec::new();
    let mut collisions = 0;
    for (&v, &depth) in &depths {
        if depth >= d {
            continue;
        }
        let Some(dec) = set.decoration(v) else {
            mismatches.push(StepMismatch {
                vertex: v,
                decoration: String::new(),
                missing: Vec::new(),
                extra: Vec::new(),
            });
            continue;
        };
        let have: BTreeSet<Move> = edges_of(v)
            .iter()
            .filter_map(|&e| Some((set.cube(e).labels[0].clone(), set.decoration(set.target(e))?.clone())))
            .collect();
        let want: BTreeSet<Move> = sos::step(alg, dec)?.into_iter().map(|t| (t.label, t.target)).collect();
        let mut targets: BTreeSet<(Action, CubeId)> = BTreeSet::new();
        let doubled = edges_of(v).iter().any(|&e| !targets.insert((set.cube(e).labels[0].clone(), set.target(e))));
        collisions += edges_of(v).len() - have.len();
        if have != want || doubled {
            let show = |m: &Move| (m.0.to_string(), proc::format(&m.1));
            mismatches.push(StepMismatch {
                vertex: v,
                decoration: proc::format(dec),
                missing: want.difference(&have).map(show).collect(),
                extra: have.difference(&want).map(show).collect(),
            });
        }
    }

    let lts = build_lts(alg, term, d, limits)?;
    let lts_states: BTreeSet<(ProcTerm, usize)> = lts.states.iter().map(|s| (s.decoration.clone(), s.depth)).collect();
    let lts_edges: BTreeSet<(ProcTerm, usize, Action, ProcTerm)> = lts
        .transitions
        .iter()
        .map(|(s, a, t)| (lts.states[*s].decoration.clone(), lts.states[*s].depth, a.clone(), lts.states[*t].decoration.clone()))
        .collect();

    let mut hda_states: BTreeSet<(ProcTerm, usize)> = BTreeSet::new();
    let mut hda_edges: BTreeSet<(ProcTerm, usize, Action, ProcTerm)> = BTreeSet::new();
    let mut seen: HashMap<(CubeId, usize), ()> = HashMap::new();
    if let Some(init) = set.initial() {
        let mut queue = VecDeque::from([(init, 0usize)]);
        seen.insert((init, 0), ());
        while let Some((v, depth)) = queue.pop_front() {
            let dec = set.decoration(v).cloned().unwrap_or(ProcTerm::Nil);
            hda_states.insert((dec.clone(), depth));
            if depth >= d {
                continue;
            }
            for &e in edges_of(v) {
                let t = set.target(e);
                let tdec = set.decoration(t).cloned().unwrap_or(ProcTerm::Nil);
                hda_edges.insert((dec.clone(), depth, set.cube(e).labels[0].clone(), tdec));
                if seen.insert((t, depth + 1), ()).is_none() {
                    if seen.len() > limits.states {
                        return Err(SosError::Guard { limit: limits.states }.into());
                    }
                    queue.push_back((t, depth + 1));
                }
            }
        }
    }
    Ok(Restrict1Report {
        depth_bound: d,
        vertices_checked: depths.values().filter(|&&x| x < d).count(),
        mismatches,
        lts_states: lts_states.len(),
        lts_transitions: lts_edges.len(),
        hda_states: hda_states.len(),
        hda_transitions: hda_edges.len(),
        decoration_collisions: collisions,
        global_match: lts_states == hda_states && lts_edges == hda_edges,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum CheckOutcome {
    Pass,
    Fail { reason: String },
    NotApplicable { reason: String },
}

impl CheckOutcome {
    pub fn failed(&self) -> bool {
        matches!(self, CheckOutcome::Fail { .. })
    }
}

fn compare(
    alg: &SyncAlgebra,
    a: &ProcTerm,
    b: &ProcTerm,
    mode: IsoMode,
    depth: usize,
    limits: &Limits,
) -> Result<CheckOutcome, SemError> {
    let ka = interp(alg, a, depth, limits)?.pcset;
    let kb = interp(alg, b, depth, limits)?.pcset;
    Ok(match find_isomorphism(&ka, &kb, mode, limits.iso_cubes)? {
        Some(_) => CheckOutcome::Pass,
        None => CheckOutcome::Fail {
            reason: format!(
                "⟦{}⟧ (census {:?}) and ⟦{}⟧ (census {:?}) are not isomorphic",
                proc::format(a),
                ka.census(),
                proc::format(b),
                kb.census()
            ),
        },
    })
}

/// `⟦P || nil⟧ ≅ ⟦P⟧ ≅ ⟦nil || P⟧`.
pub fn check_unit(alg: &SyncAlgebra, term: &ProcTerm, depth: usize, limits: &Limits) -> Result<CheckOutcome, SemError> {
    let right = compare(alg, &ProcTerm::par(term.clone(), ProcTerm::Nil), term, IsoMode::Strict, depth, limits)?;
    if right.failed() {
        return Ok(right);
    }
    compare(alg, &ProcTerm::par(ProcTerm::Nil, term.clone()), term, IsoMode::Strict, depth, limits)
}

/// For `P || Q`: `⟦P || Q⟧ ≅ ⟦Q || P⟧`, up to the order of coordinates.
pub fn check_comm(alg: &SyncAlgebra, term: &ProcTerm, depth: usize, limits: &Limits) -> Result<CheckOutcome, SemError> {
    match term {
        ProcTerm::Par(l, r) => compare(
            alg,
            term,
            &ProcTerm::par((**r).clone(), (**l).clone()),
            IsoMode::UpToCoordinatePermutation,
            depth,
            limits,
        ),
        _ => Ok(CheckOutcome::NotApplicable {
            reason: "term is not a parallel composition".into(),
        }),
    }
}

/// For a term of shape `(P || Q) || R` or `P || (Q || R)`: both
/// bracketings have isomorphic semantics.
pub fn check_assoc(alg: &SyncAlgebra, term: &ProcTerm, depth: usize, limits: &Limits) -> Result<CheckOutcome, SemError> {
    let other = match term {
        ProcTerm::Par(l, r) => match (&**l, &**r) {
            (ProcTerm::Par(p, q), r) => Some(ProcTerm::par((**p).clone(), ProcTerm::par((**q).clone(), r.clone()))),
            (p, ProcTerm::Par(q, r)) => Some(ProcTerm::par(ProcTerm::par(p.clone(), (**q).clone()), (**r).clone())),
            _ => None,
        },
        _ => None,
    };
    match other {
        Some(o) => compare(alg, term, &o, IsoMode::Strict, depth, limits),
        None => Ok(CheckOutcome::NotApplicable {
            reason: "term is not a parallel composition of three components".into(),
        }),
    }
}

/// For `nu a (P)`: `⟦nu a (nu a (P))⟧ ≅ ⟦nu a (P)⟧`.
pub fn check_restrict_idempotent(alg: &SyncAlgebra, term: &ProcTerm, depth: usize, limits: &Limits) -> Result<CheckOutcome, SemError> {
    match term {
        ProcTerm::Restrict(a, _) => compare(alg, &ProcTerm::restrict(a.clone(), term.clone()), term, IsoMode::Strict, depth, limits),
        _ => Ok(CheckOutcome::NotApplicable {
            reason: "term is not a restriction".into(),
        }),
    }
}

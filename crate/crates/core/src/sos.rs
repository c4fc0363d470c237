//! Structural operational semantics and depth-bounded transition systems.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write;

use serde_json::{json, Value};
use thiserror::Error;

use crate::limits::Limits;
use crate::proc::{self, ProcTerm, Var};
use crate::syncalg::{Action, Label, SyncAlgebra};
use crate::FORMAT;

pub const DEFAULT_DEPTH: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SosError {
    #[error("term has a free variable `{0}`")]
    OpenTerm(Var),
    #[error("state guard exceeded: more than {limit} states")]
    Guard { limit: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub label: Action,
    pub target: ProcTerm,
}

/// All one-step transitions of a closed guarded term, sorted and without
/// duplicates. Interleaving moves of a parallel component are only allowed
/// for actions that can run asynchronously.
pub fn step(alg: &SyncAlgebra, term: &ProcTerm) -> Result<Vec<Transition>, SosError> {
    if let Some(x) = term.free_vars().into_iter().next() {
        return Err(SosError::OpenTerm(x));
    }
    let mut out = BTreeSet::new();
    step_into(alg, term, &mut out);
    Ok(out.into_iter().collect())
}

fn step_set(alg: &SyncAlgebra, term: &ProcTerm) -> BTreeSet<Transition> {
    let mut out = BTreeSet::new();
    step_into(alg, term, &mut out);
    out
}

fn step_into(alg: &SyncAlgebra, term: &ProcTerm, out: &mut BTreeSet<Transition>) {
    match term {
        ProcTerm::Nil | ProcTerm::Var(_) => {}
        ProcTerm::Prefix(a, body) => {
            out.insert(Transition {
                label: a.clone(),
                target: (**body).clone(),
            });
        }
        ProcTerm::Sum(l, r) => {
            step_into(alg, l, out);
            step_into(alg, r, out);
        }
        ProcTerm::Par(l, r) => {
            let left = step_set(alg, l);
            let right = step_set(alg, r);
            for t in &left {
                if alg.asynchronous(&t.label) {
                    out.insert(Transition {
                        label: t.label.clone(),
                        target: ProcTerm::par(t.target.clone(), (**r).clone()),
                    });
                }
            }
            for t in &right {
                if alg.asynchronous(&t.label) {
                    out.insert(Transition {
                        label: t.label.clone(),
                        target: ProcTerm::par((**l).clone(), t.target.clone()),
                    });
                }
            }
            for a in &left {
                for b in &right {
                    if let Some(c) = alg.sync_action(&a.label, &b.label) {
                        out.insert(Transition {
                            label: c,
                            target: ProcTerm::par(a.target.clone(), b.target.clone()),
                        });
                    }
                }
            }
        }
        ProcTerm::Restrict(a, body) => {
            for t in step_set(alg, body) {
                if restriction_allows(alg, a, &t.label) {
                    out.insert(Transition {
                        label: t.label,
                        target: ProcTerm::restrict(a.clone(), t.target),
                    });
                }
            }
        }
        ProcTerm::Rec(..) => {
            let unfolded = term.unfold().expect("rec unfolds");
            step_into(alg, &unfolded, out);
        }
    }
}

/// `μ` survives `ν a` iff `μ ≠ a` and `σ(μ, a) = ⊥`.
pub fn restriction_allows(alg: &SyncAlgebra, a: &Action, mu: &Action) -> bool {
    mu != a && alg.sync_actions(mu, a).is_none_or(|l| l == Label::Bot)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LtsState {
    pub decoration: ProcTerm,
    pub depth: usize,
}

/// A transition system unfolded breadth-first from a term. States are
/// identified by (term, depth), so it is graded by depth and acyclic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecoratedLts {
    pub states: Vec<LtsState>,
    pub initial: usize,
    /// `(source, label, target)`, sorted.
    pub transitions: Vec<(usize, Action, usize)>,
    pub depth_bound: usize,
    /// Some state at the depth bound still had transitions.
    pub truncated: bool,
}

impl DecoratedLts {
    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "format": FORMAT,
            "states": self.states.iter().enumerate().map(|(id, s)| json!({
                "id": id,
                "decoration": proc::format(&s.decoration),
                "depth": s.depth,
            })).collect::<Vec<_>>(),
            "initial": self.initial,
            "transitions": self.transitions.iter().map(|(s, a, t)| json!({
                "src": s,
                "label": a.as_str(),
                "dst": t,
            })).collect::<Vec<_>>(),
            "depth_bound": self.depth_bound,
            "truncated": self.truncated,
        })
    }

    pub fn to_dot(&self, header: &str) -> String {
        let mut out = String::new();
        for line in header.lines() {
            let _ = writeln!(out, "// {line}");
        }
        out.push_str("digraph lts {\n");
        for (id, s) in self.states.iter().enumerate() {
            let shape = if id == self.initial { ", shape=doublecircle" } else { "" };
            let label = proc::format(&s.decoration).replace('"', "\\\"");
            let _ = writeln!(out, "  s{id} [label=\"{label}\"{shape}];");
        }
        for (s, a, t) in &self.transitions {
            let _ = writeln!(out, "  s{s} -> s{t} [label=\"{a}\"];");
        }
        out.push_str("}\n");
        out
    }
}

pub fn build_lts(alg: &SyncAlgebra, term: &ProcTerm, depth_bound: usize, limits: &Limits) -> Result<DecoratedLts, SosError> {
    if let Some(x) = term.free_vars().into_iter().next() {
        return Err(SosError::OpenTerm(x));
    }
    let mut states = vec![LtsState {
        decoration: term.clone(),
        depth: 0,
    }];
    let mut index: HashMap<(ProcTerm, usize), usize> = HashMap::new();
    index.insert((term.clone(), 0), 0);
    let mut transitions = Vec::new();
    let mut layer = vec![0usize];
    let mut truncated = false;
    for depth in 0..=depth_bound {
        let mut next = Vec::new();
        for &s in &layer {
            let moves = step_set(alg, &states[s].decoration);
            if depth == depth_bound {
                truncated |= !moves.is_empty();
                continue;
            }
            for t in moves {
                let key = (t.target, depth + 1);
                let id = match index.get(&key) {
                    Some(&id) => id,
                    None => {
                        if states.len() >= limits.states {
                            return Err(SosError::Guard { limit: limits.states });
                        }
                        let id = states.len();
                        states.push(LtsState {
                            decoration: key.0.clone(),
                            depth: depth + 1,
                        });
                        index.insert(key, id);
                        next.push(id);
                        id
                    }
                };
                transitions.push((s, t.label, id));
            }
        }
        layer = next;
    }
    transitions.sort();
    transitions.dedup();
    Ok(DecoratedLts {
        states,
        initial: 0,
        transitions,
        depth_bound,
        truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proc::parse;
    use crate::syncalg::{ccs, tcsp, trivial};

    fn acts(names: &[&str]) -> Vec<Action> {
        names.iter().map(|s| Action::new(s)).collect()
    }

    fn moves(alg: &SyncAlgebra, text: &str) -> Vec<(String, String)> {
        let t = parse(text, alg).unwrap();
        step(alg, &t)
            .unwrap()
            .into_iter()
            .map(|t| (t.label.to_string(), proc::format(&t.target)))
            .collect()
    }

    fn pairs(v: &[(&str, &str)]) -> Vec<(String, String)> {
        let mut v: Vec<(String, String)> = v.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        v.sort();
        v
    }

    #[test]
    fn interleaving() {
        let alg = ccs(&acts(&["a", "coa", "b", "cob", "tau"])).unwrap();
        assert_eq!(
            moves(&alg, "a.nil || b.nil"),
            pairs(&[("a", "nil || b.nil"), ("b", "a.nil || nil")])
        );
    }

    #[test]
    fn communication() {
        let alg = ccs(&acts(&["a", "coa", "tau"])).unwrap();
        assert_eq!(
            moves(&alg, "a.nil || coa.nil"),
            pairs(&[("a", "nil || coa.nil"), ("coa", "a.nil || nil"), ("tau", "nil || nil")])
        );
    }

    #[test]
    fn recursion_steps_to_itself() {
        let alg = trivial(&acts(&["mu"]));
        assert_eq!(moves(&alg, "rec x (mu.x)"), pairs(&[("mu", "rec x (mu.x)")]));
    }

    #[test]
    fn restriction_filters_the_action_and_its_partners() {
        let alg = ccs(&acts(&["a", "coa", "b", "cob", "tau"])).unwrap();
        assert_eq!(moves(&alg, "nu a (a.nil || coa.nil)"), pairs(&[("tau", "nu a (nil || nil)")]));
        assert_eq!(moves(&alg, "nu a (b.nil)"), pairs(&[("b", "nu a (nil)")]));
    }

    #[test]
    fn tcsp_gates_interleaving() {
        let alg = tcsp(&acts(&["a", "b", "tau"])).unwrap();
        assert_eq!(moves(&alg, "a.nil || a.nil"), pairs(&[("a", "nil || nil")]));
        assert_eq!(moves(&alg, "a.nil || b.nil"), pairs(&[]));
        assert_eq!(
            moves(&alg, "tau.nil || b.nil"),
            pairs(&[("tau", "nil || b.nil")])
        );
        // a lone prefix is not a parallel move
        assert_eq!(moves(&alg, "a.nil"), pairs(&[("a", "nil")]));
    }

    #[test]
    fn open_terms_are_rejected() {
        let t = ProcTerm::prefix("a", ProcTerm::var("x"));
        let alg = trivial(&acts(&["a"]));
        assert_eq!(step(&alg, &t), Err(SosError::OpenTerm(Var::new("x"))));
    }

    #[test]
    fn diamond() {
        let alg = trivial(&acts(&["a", "b"]));
        let t = parse("a.b.nil + b.a.nil", &alg).unwrap();
        let lts = build_lts(&alg, &t, 2, &Limits::default()).unwrap();
        assert_eq!(lts.state_count(), 4);
        assert_eq!(lts.transitions.len(), 4);
        assert!(!lts.truncated);
        assert_eq!(proc::format(&lts.states[3].decoration), "nil");
    }

    #[test]
    fn recursion_unrolls_into_a_chain() {
        let alg = trivial(&acts(&["mu"]));
        let t = parse("rec x (mu.x)", &alg).unwrap();
        let lts = build_lts(&alg, &t, 3, &Limits::default()).unwrap();
        assert_eq!(lts.state_count(), 4);
        assert_eq!(lts.transitions, vec![(0, Action::new("mu"), 1), (1, Action::new("mu"), 2), (2, Action::new("mu"), 3)]);
        assert!(lts.states.iter().all(|s| s.decoration == t));
        assert!(lts.truncated);
    }

    #[test]
    fn nil_has_one_state() {
        let alg = trivial(&acts(&["a"]));
        let lts = build_lts(&alg, &ProcTerm::Nil, 5, &Limits::default()).unwrap();
        assert_eq!(lts.state_count(), 1);
        assert!(lts.transitions.is_empty());
    }

    #[test]
    fn state_guard() {
        let alg = trivial(&acts(&["a"]));
        let t = parse("rec x (a.x)", &alg).unwrap();
        let limits = Limits { states: 3, ..Limits::default() };
        assert_eq!(build_lts(&alg, &t, 10, &limits), Err(SosError::Guard { limit: 3 }));
    }

    #[test]
    fn exports() {
        let alg = trivial(&acts(&["a"]));
        let t = parse("a.nil", &alg).unwrap();
        let lts = build_lts(&alg, &t, 4, &Limits::default()).unwrap();
        let j = lts.to_json();
        assert_eq!(j["transitions"][0]["label"], "a");
        assert_eq!(j["states"][0]["decoration"], "a.nil");
        assert!(lts.to_dot("x").contains("s0 -> s1 [label=\"a\"];"));
    }
}

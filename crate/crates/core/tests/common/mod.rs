#![allow(dead_code)]

use std::collections::BTreeSet;

use hda_core::proc::ProcTerm;
use hda_core::syncalg::{ccs, trivial, Action, SyncAlgebra};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn acts(names: &[&str]) -> Vec<Action> {
    names.iter().map(|s| Action::new(s)).collect()
}

pub fn trivial_ab() -> SyncAlgebra {
    trivial(&acts(&["a", "b"]))
}

pub fn ccs_a() -> SyncAlgebra {
    ccs(&acts(&["a", "coa", "tau"])).unwrap()
}

pub fn syntax_depth(t: &ProcTerm) -> usize {
    match t {
        ProcTerm::Nil | ProcTerm::Var(_) => 1,
        ProcTerm::Prefix(_, p) | ProcTerm::Restrict(_, p) | ProcTerm::Rec(_, p) => 1 + syntax_depth(p),
        ProcTerm::Sum(l, r) | ProcTerm::Par(l, r) => 1 + syntax_depth(l).max(syntax_depth(r)),
    }
}

pub fn prefixes(t: &ProcTerm) -> usize {
    match t {
        ProcTerm::Nil | ProcTerm::Var(_) => 0,
        ProcTerm::Prefix(_, p) => 1 + prefixes(p),
        ProcTerm::Restrict(_, p) | ProcTerm::Rec(_, p) => prefixes(p),
        ProcTerm::Sum(l, r) | ProcTerm::Par(l, r) => prefixes(l) + prefixes(r),
    }
}

pub fn nils(t: &ProcTerm) -> usize {
    match t {
        ProcTerm::Nil => 1,
        ProcTerm::Var(_) => 0,
        ProcTerm::Prefix(_, p) | ProcTerm::Restrict(_, p) | ProcTerm::Rec(_, p) => nils(p),
        ProcTerm::Sum(l, r) | ProcTerm::Par(l, r) => nils(l) + nils(r),
    }
}

/// Every `rec x` binds an occurring `x`.
pub fn recursions_used(t: &ProcTerm) -> bool {
    match t {
        ProcTerm::Nil | ProcTerm::Var(_) => true,
        ProcTerm::Rec(x, p) => p.free_vars().contains(x) && recursions_used(p),
        ProcTerm::Prefix(_, p) | ProcTerm::Restrict(_, p) => recursions_used(p),
        ProcTerm::Sum(l, r) | ProcTerm::Par(l, r) => recursions_used(l) && recursions_used(r),
    }
}

/// Finite control: no recursion variable occurs free under a parallel
/// composition, so recursion never spawns new components.
pub fn finite_control(t: &ProcTerm) -> bool {
    match t {
        ProcTerm::Nil | ProcTerm::Var(_) => true,
        ProcTerm::Prefix(_, p) | ProcTerm::Restrict(_, p) | ProcTerm::Rec(_, p) => finite_control(p),
        ProcTerm::Sum(l, r) => finite_control(l) && finite_control(r),
        ProcTerm::Par(l, r) => l.is_closed() && r.is_closed() && finite_control(l) && finite_control(r),
    }
}

pub struct TermGen {
    rng: StdRng,
    actions: Vec<Action>,
    restrictable: Vec<Action>,
    allow_rec: bool,
}

impl TermGen {
    pub fn new(seed: u64, actions: &[&str], restrictable: &[&str], allow_rec: bool) -> TermGen {
        TermGen {
            rng: StdRng::seed_from_u64(seed),
            actions: acts(actions),
            restrictable: acts(restrictable),
            allow_rec,
        }
    }

    fn action(&mut self, pool: &[Action]) -> Action {
        pool[self.rng.gen_range(0..pool.len())].clone()
    }

    fn gen(&mut self, depth: usize, vars: &[(String, bool)]) -> ProcTerm {
        let usable: Vec<&String> = vars.iter().filter(|(_, g)| *g).map(|(v, _)| v).collect();
        if depth <= 1 {
            if !usable.is_empty() && self.rng.gen_bool(0.7) {
                return ProcTerm::var(usable[self.rng.gen_range(0..usable.len())]);
            }
            return ProcTerm::Nil;
        }
        match self.rng.gen_range(0..100) {
            0..=4 => ProcTerm::Nil,
            5..=14 if !usable.is_empty() => ProcTerm::var(usable[self.rng.gen_range(0..usable.len())]),
            5..=49 => {
                let a = self.action(&self.actions.clone());
                let guarded: Vec<(String, bool)> = vars.iter().map(|(v, _)| (v.clone(), true)).collect();
                ProcTerm::prefix(a, self.gen(depth - 1, &guarded))
            }
            50..=64 => ProcTerm::sum(self.gen(depth - 1, vars), self.gen(depth - 1, vars)),
            65..=79 => ProcTerm::par(self.gen(depth - 1, vars), self.gen(depth - 1, vars)),
            80..=86 if !self.restrictable.is_empty() => {
                let a = self.action(&self.restrictable.clone());
                ProcTerm::restrict(a, self.gen(depth - 1, vars))
            }
            _ if self.allow_rec && vars.len() < 2 => {
                let name = ["x", "y"][vars.len()].to_string();
                let mut inner = vars.to_vec();
                inner.push((name.clone(), false));
                ProcTerm::rec(&name, self.gen(depth - 1, &inner))
            }
            _ => ProcTerm::Nil,
        }
    }

    /// A fresh closed guarded term within the bounds.
    pub fn term(&mut self, max_size: usize, max_depth: usize, max_prefixes: usize) -> ProcTerm {
        loop {
            let depth = self.rng.gen_range(3.min(max_depth)..=max_depth);
            let t = self.gen(depth, &[]);
            if t.size() <= max_size
                && syntax_depth(&t) <= max_depth
                && prefixes(&t) <= max_prefixes
                && t.is_closed()
                && t.is_guarded()
                && finite_control(&t)
                && nils(&t) <= prefixes(&t)
                && recursions_used(&t)
            {
                return t;
            }
        }
    }

    /// A term with between one and `max_prefixes` action prefixes.
    pub fn operand(&mut self, max_size: usize, max_depth: usize, max_prefixes: usize) -> ProcTerm {
        loop {
            let t = self.term(max_size, max_depth, max_prefixes);
            if prefixes(&t) > 0 {
                return t;
            }
        }
    }

    /// `n` distinct terms, each with at least one action, spread evenly
    /// over the sizes `3..=max_size`.
    pub fn corpus(&mut self, n: usize, max_size: usize, max_depth: usize) -> Vec<ProcTerm> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        while out.len() < n {
            let min_size = 3 + out.len() % (max_size - 2);
            let t = self.term(max_size, max_depth, usize::MAX);
            if t.size() >= min_size && prefixes(&t) > 0 && seen.insert(t.clone()) {
                out.push(t);
            }
        }
        out
    }
}

/// The two fixed corpora: trivial over {a, b} and CCS over {a, coa, tau}.
pub fn corpora(per_algebra: usize) -> Vec<(SyncAlgebra, Vec<ProcTerm>)> {
    let triv = TermGen::new(0x5eed_0001, &["a", "b"], &["a", "b"], true).corpus(per_algebra, 12, 6);
    let ccs_terms = TermGen::new(0x5eed_0002, &["a", "coa", "tau"], &["a"], true).corpus(per_algebra, 12, 6);
    vec![(trivial_ab(), triv), (ccs_a(), ccs_terms)]
}

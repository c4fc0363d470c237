mod common;

use common::*;
use hda_core::limits::Limits;
use hda_core::pcset::{from_json, iso_check, to_json, validate};
use hda_core::proc::{self, parse, ProcTerm};
use hda_core::semantics::{check_assoc, check_comm, check_restrict_idempotent, check_unit, interp, CheckOutcome};
use hda_core::sos::build_lts;

const DEPTH: usize = 4;

fn pass(o: CheckOutcome, what: &str, t: &ProcTerm) {
    assert!(!o.failed(), "{what} for {}: {o:?}", proc::format(t));
}

#[test]
fn interpretations_are_valid_and_round_trip() {
    for (alg, terms) in corpora(60) {
        for t in &terms {
            let k = interp(&alg, t, DEPTH, &Limits::default()).unwrap().pcset;
            let report = validate(&k, &alg);
            assert!(report.is_ok(), "{}: {:?}", proc::format(t), report.violations);
            assert_eq!(k.decoration(k.initial().unwrap()), Some(t));
            let back = from_json(&to_json(&k).to_string()).unwrap();
            assert_eq!(back.census(), k.census());
            assert_eq!(back.decorations(), k.decorations());
            assert!(iso_check(&back, &k, 100_000).unwrap().is_some());
        }
    }
}

#[test]
fn formatted_corpus_terms_parse_back() {
    for (alg, terms) in corpora(60) {
        for t in &terms {
            assert_eq!(&parse(&proc::format(t), &alg).unwrap(), t);
        }
    }
}

#[test]
fn parallel_composition_laws_on_the_corpus() {
    let lim = Limits {
        iso_cubes: 200_000,
        ..Limits::default()
    };
    for (alg, terms) in corpora(40) {
        for pair in terms.chunks(2) {
            let [p, q] = pair else { continue };
            pass(check_unit(&alg, p, DEPTH, &lim).unwrap(), "unit", p);
            let pq = ProcTerm::par(p.clone(), q.clone());
            pass(check_comm(&alg, &pq, DEPTH, &lim).unwrap(), "comm", &pq);
        }
    }
    for (alg, mut gen) in [
        (trivial_ab(), TermGen::new(11, &["a", "b"], &["a"], true)),
        (ccs_a(), TermGen::new(12, &["a", "coa", "tau"], &["a"], true)),
    ] {
        for _ in 0..20 {
            let [p, q, r] = [0; 3].map(|_| gen.operand(8, 4, 3));
            let left = ProcTerm::par(ProcTerm::par(p.clone(), q.clone()), r.clone());
            let right = ProcTerm::par(p, ProcTerm::par(q, r));
            pass(check_assoc(&alg, &left, 3, &lim).unwrap(), "assoc", &left);
            pass(check_assoc(&alg, &right, 3, &lim).unwrap(), "assoc", &right);
        }
    }
}

#[test]
fn restriction_is_idempotent_on_the_corpus() {
    for (alg, terms) in corpora(60) {
        for t in &terms {
            for a in alg.alphabet().iter().take(2) {
                let r = ProcTerm::restrict(a.clone(), t.clone());
                pass(check_restrict_idempotent(&alg, &r, DEPTH, &Limits::default()).unwrap(), "restriction", &r);
            }
        }
    }
}

#[test]
fn transition_systems_are_graded_and_deterministic() {
    for (alg, terms) in corpora(60) {
        for t in &terms {
            let a = build_lts(&alg, t, DEPTH, &Limits::default()).unwrap();
            let b = build_lts(&alg, t, DEPTH, &Limits::default()).unwrap();
            assert_eq!(a.to_json(), b.to_json());
            assert_eq!(a.states[a.initial].depth, 0);
            for (s, _, d) in &a.transitions {
                assert_eq!(a.states[*d].depth, a.states[*s].depth + 1);
            }
        }
    }
}

#[test]
fn interpretation_is_deterministic() {
    let alg = ccs_a();
    for text in ["rec x (a.x + coa.tau.x) || a.nil", "nu a (a.nil || coa.nil) + tau.nil"] {
        let t = parse(text, &alg).unwrap();
        let a = to_json(&interp(&alg, &t, 5, &Limits::default()).unwrap().pcset);
        let b = to_json(&interp(&alg, &t, 5, &Limits::default()).unwrap().pcset);
        assert_eq!(a, b);
    }
}

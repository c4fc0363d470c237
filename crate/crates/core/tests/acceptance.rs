//! Acceptance criteria, one line of output per criterion. Runs without the
//! libtest harness so the summary is always printed.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use hda_core::flows::{bad_realization, path_class_counts, path_label, trace_conflicts, trace_normal_form};
use hda_core::homology::{integer_homology, open_interval_poset, order_complex};
use hda_core::limits::Limits;
use hda_core::pcset::{boundary, find_isomorphism, iso_check, skeleton, standard_cube, standard_cube_grid, IsoMode, LabelledPCSet};
use hda_core::proc::{self, parse, ProcTerm};
use hda_core::semantics::{interp, verify_paradigm, verify_restrict1};
use hda_core::syncalg::{trivial, Action, SyncAlgebra};
use hda_core::tensor::{cosk_dir, cosk_undirected, cube_tensor, product1, product1_grid, skeleton_grid, tensor};

const DEPTH: usize = 6;
const PATH_DEPTH: usize = 4;
const ISO: usize = 100_000;

fn lim() -> Limits {
    Limits::default()
}

fn sem(alg: &SyncAlgebra, t: &ProcTerm) -> LabelledPCSet {
    interp(alg, t, DEPTH, &lim()).unwrap_or_else(|e| panic!("{}: {e}", proc::format(t))).pcset
}

fn iso(a: &LabelledPCSet, b: &LabelledPCSet) -> bool {
    iso_check(a, b, ISO).unwrap().is_some()
}

fn c1_small_censuses() -> String {
    let t = trivial_ab();
    let diamond = sem(&t, &parse("a.b.nil + b.a.nil", &t).unwrap());
    assert_eq!(diamond.census(), vec![4, 4], "a.b.nil+b.a.nil");
    let square = sem(&t, &parse("a.nil || b.nil", &t).unwrap());
    assert_eq!(square.census(), vec![4, 4, 1], "a.nil||b.nil");
    let c = ccs_a();
    let hs = sem(&c, &parse("a.nil || coa.nil", &c).unwrap());
    assert_eq!(hs.census(), vec![4, 5, 1], "a.nil||coa.nil");
    let init = hs.initial().unwrap();
    let diag = hs.edges().iter().find(|&&e| hs.cube(e).labels == acts(&["tau"])).expect("a tau edge");
    assert_eq!(hs.source(*diag), init);
    let sq = hs.of_dim(2)[0];
    assert_eq!(hs.target(*diag), hs.corner(sq, 3), "tau joins the corners of the square");
    "censuses (4,4,0) (4,4,1) (4,5,1), tau diagonal".into()
}

fn c2_restrict1() -> String {
    let mut n = 0;
    for (alg, terms) in corpora(120) {
        for t in &terms {
            let k = interp(&alg, t, DEPTH, &lim()).unwrap();
            let r = verify_restrict1(&alg, t, &k, &lim()).unwrap();
            assert!(r.passed(), "{} under {}: {:?}", proc::format(t), alg.name(), r);
            n += 1;
        }
    }
    format!("{n} terms")
}

fn c3_paradigm() -> String {
    let mut n = 0;
    for (alg, terms) in corpora(120) {
        for t in &terms {
            let r = verify_paradigm(&sem(&alg, t), &alg);
            assert!(r.passed(), "{}: {:?}", proc::format(t), r.violations);
            n += 1;
        }
    }
    let alg = trivial_ab();
    let sq = standard_cube(&acts(&["a", "b"]), &alg).unwrap();
    let faces = sq.cube(sq.of_dim(2)[0]).faces.clone();
    let mut doubled = boundary(&sq);
    doubled.add_cube(acts(&["a", "b"]), faces.clone()).unwrap();
    doubled.add_cube(acts(&["a", "b"]), faces).unwrap();
    let r = verify_paradigm(&doubled, &alg);
    assert!(!r.passed(), "double-filled square must be rejected");
    assert_eq!(r.violations[0].fillers.len(), 2);
    format!("{n} terms pass, double-filled square rejected")
}

fn c4_cube_coskeleton() -> String {
    let alg = trivial(&acts(&["a", "b", "c", "d"]));
    for p in 2..=4 {
        let labels = &acts(&["a", "b", "c", "d"])[..p];
        let full = standard_cube_grid(labels, &alg).unwrap();
        let c = cosk_dir(&alg, &skeleton_grid(&full)).unwrap();
        assert!(iso(&c.set, &full.set), "p={p}");
    }
    "p = 2, 3, 4".into()
}

fn small_operand(gen: &mut TermGen, alg: &SyncAlgebra, max_prefixes: usize) -> LabelledPCSet {
    let t = gen.operand(8, 4, max_prefixes);
    sem(alg, &t)
}

fn c5_res1() -> String {
    let mut n = 0;
    for (alg, mut gen) in [
        (trivial_ab(), TermGen::new(0x5eed_0005, &["a", "b"], &[], false)),
        (ccs_a(), TermGen::new(0x5eed_0006, &["a", "coa", "tau"], &[], false)),
    ] {
        for _ in 0..50 {
            let k = small_operand(&mut gen, &alg, 3);
            let l = small_operand(&mut gen, &alg, 3);
            let t = tensor(&alg, &k, &l, &lim()).unwrap().set;
            let p = product1(&alg, &skeleton(&k, 1), &skeleton(&l, 1)).unwrap();
            assert!(iso(&skeleton(&t, 1), &p), "census {:?} vs {:?}", skeleton(&t, 1).census(), p.census());
            n += 1;
        }
    }
    format!("{n} operand pairs")
}

fn tuples(alphabet: &[Action], n: usize) -> Vec<Vec<Action>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|w| {
                alphabet.iter().map(move |a| {
                    let mut v = w.clone();
                    v.push(a.clone());
                    v
                })
            })
            .collect();
    }
    out
}

fn c6_cube_tensor() -> String {
    let mut n = 0;
    for alg in [trivial_ab(), ccs_a()] {
        let alphabet = alg.alphabet().to_vec();
        for total in 0..=5 {
            for p in 0..=total {
                for left in tuples(&alphabet, p) {
                    for right in tuples(&alphabet, total - p) {
                        let t = cube_tensor(&alg, &left, &right).unwrap();
                        let kl = standard_cube_grid(&left, &alg).unwrap();
                        let kr = standard_cube_grid(&right, &alg).unwrap();
                        let oracle = cosk_dir(&alg, &product1_grid(&alg, &skeleton_grid(&kl), &skeleton_grid(&kr)).unwrap()).unwrap();
                        assert!(iso(&t.grid.set, &oracle.set), "{} {left:?} {right:?}", alg.name());
                        n += 1;
                    }
                }
            }
        }
    }
    format!("{n} label tuples")
}

fn c7_monoidal() -> String {
    let mut n = 0;
    for (alg, mut gen) in [
        (trivial_ab(), TermGen::new(0x5eed_0007, &["a", "b"], &[], false)),
        (ccs_a(), TermGen::new(0x5eed_0008, &["a", "coa", "tau"], &[], false)),
    ] {
        let point = standard_cube(&[], &alg).unwrap();
        for _ in 0..25 {
            let k = small_operand(&mut gen, &alg, 3);
            let l = small_operand(&mut gen, &alg, 3);
            let m = small_operand(&mut gen, &alg, 3);
            let t = |x: &LabelledPCSet, y: &LabelledPCSet| tensor(&alg, x, y, &lim()).unwrap().set;
            assert!(iso(&t(&k, &point), &k), "right unit");
            assert!(iso(&t(&point, &k), &k), "left unit");
            let (kl, lk) = (t(&k, &l), t(&l, &k));
            assert!(
                find_isomorphism(&kl, &lk, IsoMode::UpToCoordinatePermutation, ISO).unwrap().is_some(),
                "commutativity {:?} {:?}",
                k.census(),
                l.census()
            );
            assert!(iso(&t(&kl, &m), &t(&k, &t(&l, &m))), "associativity");
            n += 1;
        }
    }
    format!("{n} triples")
}

fn c8_boundary_paths() -> String {
    let alg = trivial(&acts(&["a", "b", "c", "d"]));
    let mut counts = Vec::new();
    for n in 2..=4 {
        let full = standard_cube(&acts(&["a", "b", "c", "d"])[..n], &alg).unwrap();
        let bottom = full.vertices()[0];
        let top = *full.vertices().last().unwrap();
        let shell = boundary(&full);
        let bd = path_class_counts(&bad_realization(&shell, &lim()).unwrap(), bottom, top);
        let filled = path_class_counts(&bad_realization(&full, &lim()).unwrap(), bottom, top);
        assert_eq!(filled, 1);
        assert_eq!(bd, if n == 2 { 2 } else { 1 }, "n={n}");
        if n > 2 {
            assert_eq!(bd, filled);
        }
        counts.push(bd);
    }
    format!("class counts for n=2,3,4: {counts:?}")
}

fn c9_sphere_homology() -> String {
    for n in 3..=5 {
        let c = order_complex(&open_interval_poset(n).unwrap(), &lim()).unwrap();
        for g in integer_homology(&c) {
            if g.degree == n as isize - 2 {
                assert!(g.rank == 1 && g.torsion.is_empty(), "n={n}: {g}");
            } else {
                assert!(g.is_zero(), "n={n}: {g}");
            }
        }
    }
    "H~(n-2) = Z for n = 3, 4, 5".into()
}

fn c10_undirected() -> String {
    let alg = trivial_ab();
    let full = standard_cube_grid(&acts(&["a", "b"]), &alg).unwrap();
    let sk = skeleton_grid(&full);
    let dir = cosk_dir(&alg, &sk).unwrap().set.of_dim(2).len();
    let und = cosk_undirected(&alg, &sk.set, 2).unwrap().of_dim(2).len();
    assert!(und > dir, "{und} vs {dir}");
    format!("undirected {und} > directed {dir}")
}

fn c11_traces() -> String {
    let mut classes = 0;
    for (alg, terms) in corpora(120) {
        for t in &terms {
            // all directed paths are enumerated, so recursion is unfolded less deeply
            let k = interp(&alg, t, PATH_DEPTH, &lim()).unwrap().pcset;
            let pc = bad_realization(&k, &lim()).unwrap();
            let bad = trace_conflicts(&alg, &k, &pc).unwrap();
            assert!(bad.is_empty(), "{}: {:?}", proc::format(t), bad[0]);
            classes += pc.all_classes().len();
        }
    }
    let alg = trivial_ab();
    let k = sem(&alg, &parse("a.b.nil + b.a.nil", &alg).unwrap());
    let pc = bad_realization(&k, &lim()).unwrap();
    let init = k.initial().unwrap();
    let sink = *k.vertices().iter().find(|&&v| k.out_edges().get(&v).is_none_or(Vec::is_empty)).unwrap();
    let reps = pc.representatives(init, sink);
    assert_eq!(path_class_counts(&pc, init, sink), 2);
    let nfs: Vec<Vec<Action>> = reps.iter().map(|p| trace_normal_form(&alg, &path_label(&k, p)).unwrap()).collect();
    assert_eq!(nfs[0], nfs[1]);
    assert_ne!(path_label(&k, &reps[0]), path_label(&k, &reps[1]));
    format!("{classes} classes over the corpus; diamond: 2 classes, one trace")
}

type Criterion = (usize, &'static str, u64, fn() -> String);

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "small censuses", 1, c1_small_censuses),
        (2, "1-skeleton is the transition system", 60, c2_restrict1),
        (3, "paradigm", 60, c3_paradigm),
        (4, "directed coskeleton of cube skeletons", 5, c4_cube_coskeleton),
        (5, "1-skeleton of the tensor", 30, c5_res1),
        (6, "cube tensor vs coskeleton of product", 120, c6_cube_tensor),
        (7, "unit, commutativity, associativity", 120, c7_monoidal),
        (8, "path classes of cube boundaries", 30, c8_boundary_paths),
        (9, "homology of open intervals", 10, c9_sphere_homology),
        (10, "undirected coskeleton is strictly larger", 1, c10_undirected),
        (11, "trace invariance of path classes", 30, c11_traces),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (id, name, secs, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|x| x == &id.to_string()) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f));
        let took = start.elapsed();
        let limit = Duration::from_secs(secs);
        let line = match result {
            Ok(detail) if took <= limit => format!("PASS criterion {id:>2} {name}: {detail} [{took:.2?} / {secs}s]"),
            Ok(detail) => format!("FAIL criterion {id:>2} {name}: too slow, {detail} [{took:.2?} / {secs}s]"),
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                format!("FAIL criterion {id:>2} {name}: {msg} [{took:.2?}]")
            }
        };
        if line.starts_with("FAIL") {
            failed += 1;
        }
        println!("{line}");
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

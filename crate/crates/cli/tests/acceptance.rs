//! Shipping gate for the workspace. One test per release criterion; each
//! prints a single line naming the criterion and its wall time, and any
//! criterion with a stated time budget enforces it here. Everything is
//! exhaustive within the pinned caps; nothing samples.

use std::path::PathBuf;
use std::process::Command;
use std::rc::Rc;
use std::time::{Duration, Instant};

use opstrict_core::error::Error;
use opstrict_core::fixtures::{
    all_trees, discrete_z2_strict, free_binary_operad, indiscrete_weak, terminal_operad,
    z2_corrupted_weak, z2_strict_weak, z2_unary_operad,
};
use opstrict_core::operad::{validate_operad, OpId, TabulatedOperad};
use opstrict_core::strictify::{
    check_equivalence, check_strict, evaluation_map, factorize, strictify, unit_map,
};
use opstrict_core::theory::{
    check_strong_regularity, compile_operad, parse_presentation, RegularityReason,
};
use opstrict_core::tree::{enumerate_trees, eval_tree, graft, has_two_cell, Tree};
use opstrict_core::weak::{
    validate_p_transformation, validate_weak_p_category, validate_weak_p_functor, WeakPCategory,
};

const BUDGET_OPERAD_LAWS: Duration = Duration::from_secs(5);
const BUDGET_HOMOMORPHISM: Duration = Duration::from_secs(10);
const BUDGET_REGULARITY: Duration = Duration::from_secs(1);
const BUDGET_COMPILED_MONOID: Duration = Duration::from_secs(5);
const BUDGET_COHERENCE: Duration = Duration::from_secs(30);
const BUDGET_STRICTIFICATION: Duration = Duration::from_secs(60);
const BUDGET_ADJUNCTION: Duration = Duration::from_secs(60);

fn done(criterion: usize, name: &str, t0: Instant, budget: Option<Duration>) {
    let dt = t0.elapsed();
    if let Some(b) = budget {
        assert!(dt <= b, "criterion {criterion} ({name}) took {dt:?}, budget {b:?}");
    }
    println!("criterion {criterion:2} {name} PASS {dt:.2?}");
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

fn law_fixtures() -> [TabulatedOperad; 3] {
    [terminal_operad(4), z2_unary_operad(), free_binary_operad(4)]
}

#[test]
fn criterion_01_operad_laws_hold_exactly_on_the_fixtures() {
    let t0 = Instant::now();
    for p in law_fixtures() {
        let r = validate_operad(&p);
        assert!(r.passed(), "{}: {:#?}", p.name(), r.failures);
        assert!(!r.cap_limited, "{} should have a total in-cap table", p.name());
        for check in
            ["validate_operad.comp_total", "validate_operad.unit", "validate_operad.assoc"]
        {
            let line = r.lines.iter().find(|l| l.check == check).expect(check);
            assert!(line.instances > 0, "{}: {check} swept nothing", p.name());
            assert_eq!(line.failures, 0, "{}: {check}", p.name());
        }
    }
    done(1, "operad_laws", t0, Some(BUDGET_OPERAD_LAWS));
}

/// Every way of writing a tree of size <= 4 as an outer tree grafted with a
/// tuple of inner trees. Slot count and a shared size budget bound the walk.
fn for_each_graft_tuple(
    by_arity_size: &[Vec<Vec<Tree>>],
    slots: usize,
    size_budget: usize,
    acc: &mut Vec<Tree>,
    visit: &mut dyn FnMut(&[Tree]),
) {
    if slots == 0 {
        visit(acc);
        return;
    }
    for a in 0..by_arity_size.len() {
        for sz in 0..=size_budget.min(by_arity_size[a].len() - 1) {
            for t in &by_arity_size[a][sz] {
                acc.push(t.clone());
                for_each_graft_tuple(by_arity_size, slots - 1, size_budget - sz, acc, visit);
                acc.pop();
            }
        }
    }
}

#[test]
fn criterion_02_tree_evaluation_is_a_substitution_homomorphism() {
    let t0 = Instant::now();
    let mut checked = 0usize;
    for p in law_fixtures() {
        // trees indexed by arity then size, so tuples can be budget-pruned
        let mut by_arity_size: Vec<Vec<Vec<Tree>>> = Vec::new();
        for a in 0..=p.arity_cap() {
            let mut by_size: Vec<Vec<Tree>> = vec![Vec::new(); 5];
            for t in enumerate_trees(&p, a, 4).unwrap() {
                by_size[t.size()].push(t);
            }
            by_arity_size.push(by_size);
        }
        for s in all_trees(&p, 4) {
            let n = s.arity(&p);
            let head = eval_tree(&p, &s).unwrap();
            let budget = 4 - s.size();
            let mut acc = Vec::new();
            for_each_graft_tuple(&by_arity_size, n, budget, &mut acc, &mut |subs| {
                let g = graft(&p, &s, subs).unwrap();
                let lhs = eval_tree(&p, &g);
                let args: Vec<Result<OpId, Error>> =
                    subs.iter().map(|t| eval_tree(&p, t)).collect();
                let rhs = match args.iter().find(|r| r.is_err()) {
                    Some(e) => Err(e.as_ref().unwrap_err().clone()),
                    None => p.compose(head, &args.iter().map(|r| *r.as_ref().unwrap()).collect::<Vec<_>>()),
                };
                // the two sides must agree on definedness, and on the value
                // whenever defined
                match (lhs, rhs) {
                    (Ok(a), Ok(b)) => assert_eq!(a, b, "graft into {}", s.render(&p)),
                    (Err(_), Err(_)) => {}
                    (l, r) => panic!(
                        "definedness mismatch grafting into {}: {l:?} vs {r:?}",
                        s.render(&p)
                    ),
                }
                checked += 1;
            });
        }
    }
    assert!(checked > 1_000, "swept only {checked} graft instances");
    done(2, "evaluation_homomorphism", t0, Some(BUDGET_HOMOMORPHISM));
}

#[test]
fn criterion_03_regularity_verdicts_for_the_three_presentations() {
    let t0 = Instant::now();

    let monoid = parse_presentation(&fixture_text("monoid.theory")).unwrap();
    let r = check_strong_regularity(&monoid);
    assert!(r.regular, "{:#?}", r.violations);
    assert!(r.violations.is_empty());

    let commutative = parse_presentation(&fixture_text("commutative.theory")).unwrap();
    let r = check_strong_regularity(&commutative);
    assert!(!r.regular);
    assert_eq!(r.violations.len(), 1, "{:#?}", r.violations);
    assert_eq!(r.violations[0].equation, 3);
    assert_eq!(r.violations[0].reason, RegularityReason::OrderMismatch);

    let groups = parse_presentation(&fixture_text("groups.theory")).unwrap();
    let r = check_strong_regularity(&groups);
    assert!(!r.regular);
    let got: Vec<(usize, RegularityReason)> =
        r.violations.iter().map(|v| (v.equation, v.reason)).collect();
    assert_eq!(
        got,
        vec![
            (3, RegularityReason::RepeatedVariable),
            (3, RegularityReason::VariableSetMismatch),
            (4, RegularityReason::RepeatedVariable),
            (4, RegularityReason::VariableSetMismatch),
        ]
    );

    done(3, "regularity_verdicts", t0, Some(BUDGET_REGULARITY));
}

/// Independent oracle for the monoid universe: linear terms over
/// {mul/2, e/0} counted by direct enumeration, with classes decided by the
/// rewriting normal form (drop units, flatten), which for a monoid is the
/// variable sequence alone.
fn monoid_universe_oracle(arity_cap: usize, size_cap: usize) -> (usize, Vec<usize>) {
    #[derive(Clone)]
    enum T {
        Slot,
        E,
        Mul(Box<T>, Box<T>),
    }
    fn arity(t: &T) -> usize {
        match t {
            T::Slot => 1,
            T::E => 0,
            T::Mul(a, b) => arity(a) + arity(b),
        }
    }
    let mut by_size: Vec<Vec<T>> = vec![vec![T::Slot]];
    for s in 1..=size_cap {
        let mut level = Vec::new();
        if s == 1 {
            level.push(T::E);
        }
        for left in 0..s {
            for a in &by_size[left] {
                for b in &by_size[s - 1 - left] {
                    let t = T::Mul(Box::new(a.clone()), Box::new(b.clone()));
                    if arity(&t) <= arity_cap {
                        level.push(t);
                    }
                }
            }
        }
        by_size.push(level);
    }
    let terms: Vec<T> = by_size.into_iter().flatten().collect();
    // normal form of a linear ordered monoid term is x1..xn, so per arity
    // there is one class exactly when a term of that arity exists
    let class_count: Vec<usize> = (0..=arity_cap)
        .map(|n| {
            let forms: std::collections::BTreeSet<usize> =
                terms.iter().filter(|t| arity(t) == n).map(arity).collect();
            forms.len()
        })
        .collect();
    (terms.len(), class_count)
}

#[test]
fn criterion_04_compiled_monoid_matches_the_terminal_operad() {
    let t0 = Instant::now();
    let pres = parse_presentation(&fixture_text("monoid.theory")).unwrap();
    let (op, rep) = compile_operad(&pres, 3, 4).unwrap();

    assert_eq!(rep.classes_by_arity, vec![1, 1, 1, 1]);
    for n in 0..=3 {
        assert_eq!(op.elements_of_arity(n).len(), 1, "arity {n}");
    }

    let (oracle_terms, oracle_classes) = monoid_universe_oracle(3, 4);
    assert_eq!(oracle_terms, rep.universe_terms);
    assert_eq!(oracle_classes, rep.classes_by_arity);

    // with one element per arity the comparison with the terminal operad is
    // forced by arity; every defined entry must land on it, and the holes
    // must be exactly the reported ones
    let term = terminal_operad(3);
    let mut defined = 0usize;
    let mut cells = 0usize;
    for p in op.elements() {
        for args in op.argument_tuples(op.arity(p)) {
            cells += 1;
            let n: usize = args.iter().map(|&a| op.arity(a)).sum();
            match op.compose(p, &args) {
                Ok(q) => {
                    defined += 1;
                    assert_eq!(q, op.elements_of_arity(n)[0]);
                    let tp = term.elements_of_arity(op.arity(p))[0];
                    let targs: Vec<OpId> =
                        args.iter().map(|&a| term.elements_of_arity(op.arity(a))[0]).collect();
                    let tq = term.compose(tp, &targs).unwrap();
                    assert_eq!(term.arity(tq), n);
                }
                Err(Error::CapExceeded(_)) => {}
                Err(e) => panic!("unexpected composition failure: {e}"),
            }
        }
    }
    assert_eq!(cells - defined, rep.missing_comp_entries);

    done(4, "compiled_monoid", t0, Some(BUDGET_COMPILED_MONOID));
}

#[test]
fn criterion_05_ternary_trees_over_the_terminal_operad_are_one_class() {
    let t0 = Instant::now();
    let p = terminal_operad(3);
    let trees = enumerate_trees(&p, 3, 3).unwrap();
    assert!(trees.len() > 1, "enumeration too small to say anything");
    let value = eval_tree(&p, &trees[0]).unwrap();
    for t in &trees {
        assert_eq!(eval_tree(&p, t).unwrap(), value, "{}", t.render(&p));
    }
    for a in &trees {
        for b in &trees {
            assert!(has_two_cell(&p, a, b).unwrap(), "{} / {}", a.render(&p), b.render(&p));
        }
    }
    done(5, "single_two_cell_class", t0, None);
}

#[test]
fn criterion_06_path_independence_and_defect_localization() {
    let t0 = Instant::now();
    let op = terminal_operad(2);

    let w = indiscrete_weak(&["a", "b", "c"], &op);
    let r = validate_weak_p_category(&w, 3);
    assert!(r.passed(), "{:#?}", r.failures);
    let pi = r.lines.iter().find(|l| l.check == "path_independence").unwrap();
    assert!(pi.instances > 0);

    // one planted defect: gamma at the binary element over identities
    let wc = z2_corrupted_weak(&op);
    let rc = validate_weak_p_category(&wc, 3);
    assert!(!rc.passed());
    for f in &rc.failures {
        assert!(
            f.check == "unit_coherence" || f.check == "path_independence",
            "defect leaked into {}: {f:#?}",
            f.check
        );
        assert!(f.instance.contains("t2"), "failure does not name the broken cell: {f:#?}");
    }

    done(6, "coherence_validator", t0, Some(BUDGET_COHERENCE));
}

#[test]
fn criterion_07_strictification_is_an_adjoint_equivalence() {
    let t0 = Instant::now();
    let op = terminal_operad(2);
    let weak: Rc<WeakPCategory> = Rc::new(indiscrete_weak(&["a", "b", "c"], &op));
    let strict: Rc<WeakPCategory> = Rc::new(z2_strict_weak(&op));
    for w in [weak, strict] {
        let s = strictify(&w).unwrap();
        let cs = check_strict(&s);
        assert!(cs.passed(), "{}: {:#?}", w.cat().name(), cs.failures);
        assert!(!cs.cap_limited, "{}", w.cat().name());

        let f = Rc::new(evaluation_map(&s).unwrap());
        let fv = validate_weak_p_functor(&f);
        assert!(fv.passed(), "{}: {:#?}", w.cat().name(), fv.failures);

        let (eq, er) = check_equivalence(&s, &f).unwrap();
        assert!(er.passed(), "{}: {:#?}", w.cat().name(), er.failures);
        assert!(!er.cap_limited);
        for check in ["full_and_faithful", "essentially_surjective"] {
            let line = er.lines.iter().find(|l| l.check == check).expect(check);
            assert!(line.instances > 0, "{check} swept nothing");
            assert_eq!(line.failures, 0, "{check}");
        }

        // the transported pseudo-inverse and all four cell families stand on
        // their own, not just inside the equivalence report
        let bv = validate_weak_p_functor(&eq.backward);
        assert!(bv.passed(), "{:#?}", bv.failures);
        for t in
            [&eq.unit, &eq.counit, &eq.unit.inverse().unwrap(), &eq.counit.inverse().unwrap()]
        {
            let tv = validate_p_transformation(t);
            assert!(tv.passed(), "{:#?}", tv.failures);
        }
    }
    done(7, "strictification_suite", t0, Some(BUDGET_STRICTIFICATION));
}

#[test]
fn criterion_08_factorization_with_bounded_uniqueness() {
    let t0 = Instant::now();
    let op = terminal_operad(2);
    let fixtures: [Rc<WeakPCategory>; 2] =
        [Rc::new(z2_strict_weak(&op)), Rc::new(indiscrete_weak(&["a", "b"], &op))];
    for w in fixtures {
        let s = strictify(&w).unwrap();
        let u = Rc::new(unit_map(&s).unwrap());
        let uv = validate_weak_p_functor(&u);
        assert!(uv.passed(), "{}: {:#?}", w.cat().name(), uv.failures);

        // factoring the unit through its own strictification: the mediating
        // strict map must be found, shown unique within the bound, and equal
        // to the identity
        let (h, r) = factorize(&s, &u, 1_000_000).unwrap();
        assert!(r.passed(), "{}: {:#?}", w.cat().name(), r.failures);
        assert!(!r.cap_limited, "search should complete within the bound");
        for check in [
            "target_strict",
            "strict_action_objects",
            "strict_action_morphisms",
            "commutes_on_objects",
            "commutes_on_morphisms",
            "commutes_on_cells",
            "uniqueness",
        ] {
            let line = r.lines.iter().find(|l| l.check == check).expect(check);
            assert!(line.instances > 0, "{check} swept nothing");
            assert_eq!(line.failures, 0, "{check}");
        }
        assert_eq!(
            *h.underlying().as_ref(),
            opstrict_core::fincat::Functor::identity(s.category())
        );
    }
    done(8, "factorization_suite", t0, Some(BUDGET_ADJUNCTION));
}

#[test]
fn criterion_09_strict_input_produces_only_identity_cells() {
    let t0 = Instant::now();
    let op = terminal_operad(2);
    let fixtures: [Rc<WeakPCategory>; 2] =
        [Rc::new(z2_strict_weak(&op)), Rc::new(discrete_z2_strict(&op))];
    for w in fixtures {
        let a = w.cat().clone();
        for ((p, args), cell) in w.gammas() {
            for (_, m) in cell.components() {
                assert!(a.is_identity(m), "gamma[{p:?};{args:?}] is not an identity");
            }
        }
        for (_, m) in w.iota().components() {
            assert!(a.is_identity(m));
        }

        let s = strictify(&w).unwrap();
        let st = s.strict().clone();
        for (_, cell) in st.gammas() {
            for (_, m) in cell.components() {
                assert!(st.cat().is_identity(m));
            }
        }
        for (_, m) in st.iota().components() {
            assert!(st.cat().is_identity(m));
        }

        // evaluation lands in the source category, so its cells must be
        // literal identities there
        let f = Rc::new(evaluation_map(&s).unwrap());
        for p in st.operad().elements() {
            for (_, m) in f.psi(p).components() {
                assert!(a.is_identity(m), "{}: psi not an identity", a.name());
            }
        }

        // cells valued in the strictification connect distinct tagged
        // objects, so identity there means identity underlying arrow
        let u = unit_map(&s).unwrap();
        for p in w.operad().elements() {
            for (_, m) in u.psi(p).components() {
                assert!(a.is_identity(s.under(m)), "{}: unit psi not an identity", a.name());
            }
        }

        let (eq, er) = check_equivalence(&s, &f).unwrap();
        assert!(er.passed(), "{:#?}", er.failures);
        for (_, m) in eq.unit.nat.components() {
            assert!(a.is_identity(s.under(m)));
        }
        for (_, m) in eq.counit.nat.components() {
            assert!(a.is_identity(m));
        }
    }
    done(9, "strict_input_degeneracy", t0, None);
}

#[test]
fn criterion_10_cli_reports_are_byte_deterministic() {
    let t0 = Instant::now();
    let fx = |n: &str| fixture(n).into_os_string().into_string().unwrap();
    let commands: Vec<Vec<String>> = vec![
        vec!["compile-theory".into(), fx("monoid.theory")],
        vec!["validate".into(), fx("z2.wpc")],
        vec!["validate".into(), fx("z2.wpc"), "--format".into(), "json".into()],
        vec!["strictify".into(), fx("z2.wpc")],
        vec!["factorize".into(), fx("z2.wpc"), fx("z2_st.wpc"), fx("z2_unit.fun")],
        vec!["enumerate".into(), fx("terminal.operad"), "--arity".into(), "3".into()],
    ];
    for args in &commands {
        let run = || {
            Command::new(env!("CARGO_BIN_EXE_opstrict"))
                .args(args)
                .output()
                .expect("binary runs")
        };
        let first = run();
        let second = run();
        assert_eq!(first.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&first.stderr));
        assert_eq!(second.status.code(), Some(0), "{args:?}");
        assert!(!first.stdout.is_empty(), "{args:?} printed nothing");
        assert_eq!(first.stdout, second.stdout, "report differs across runs: {args:?}");
    }
    done(10, "cli_determinism", t0, None);
}

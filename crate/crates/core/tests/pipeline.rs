//! End-to-end run through the public API: validate a weak action, build
//! its strict model, verify the equivalence back to the source, factor
//! the unit through it, and re-ingest the emitted strict model.

use std::rc::Rc;

use opstrict_core::fixtures;
use opstrict_core::format::{parse_weak, print_weak};
use opstrict_core::strictify::{
    check_equivalence, check_strict, evaluation_map, factorize, strictify, unit_map,
};
use opstrict_core::weak::{validate_weak_p_category, validate_weak_p_functor};

#[test]
fn weak_action_to_strict_model_and_back() {
    let op = fixtures::terminal_operad(2);
    let w = Rc::new(fixtures::indiscrete_weak(&["a", "b"], &op));
    let v = validate_weak_p_category(&w, 3);
    assert!(v.passed(), "{:#?}", v.failures);

    let s = strictify(&w).unwrap();
    let r = check_strict(&s);
    assert!(r.passed(), "{:#?}", r.failures);
    assert!(!r.cap_limited);

    let f = Rc::new(evaluation_map(&s).unwrap());
    assert!(validate_weak_p_functor(&f).passed());
    let (_eq, r) = check_equivalence(&s, &f).unwrap();
    assert!(r.passed(), "{:#?}", r.failures);

    let fp = Rc::new(unit_map(&s).unwrap());
    let (h, r) = factorize(&s, &fp, 1_000_000).unwrap();
    assert!(r.passed(), "{:#?}", r.failures);
    assert!(validate_weak_p_functor(&h).passed());

    // the emitted strict model is a complete input in its own right
    let text = print_weak(s.strict());
    let back = Rc::new(parse_weak(&text).unwrap());
    assert!(validate_weak_p_category(&back, 3).passed());
    let s2 = strictify(&back).unwrap();
    assert!(check_strict(&s2).passed());
}

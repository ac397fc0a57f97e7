//! Ready-made example structures.
//!
//! Small operads and weak actions used throughout the test suites and handy
//! as starting points: the terminal operad (whose strict algebras are
//! monoid-like), a two-element unary operad, the free operad on one binary
//! label, indiscrete categories with arbitrary action tables, and a couple
//! of strict one-object actions.

use std::collections::BTreeMap;
use std::rc::Rc;

use crate::fincat::{FinCategory, Functor, MorId, ObjId};
use crate::operad::{OperadBuilder, TabulatedOperad};
use crate::tree::Tree;
use crate::weak::WeakPCategory;

/// The terminal operad truncated at `cap`: one element per arity.
pub fn terminal_operad(cap: usize) -> TabulatedOperad {
    terminal_operad_arities(&(0..=cap).collect::<Vec<_>>(), cap)
}

/// Terminal-style operad with elements only at the listed arities. The
/// composition table keeps every entry whose result arity is also listed.
/// `arities` must contain 1 (for the identity) unless 1 is not listed, in
/// which case this panics; fixtures always list it except when callers
/// include it implicitly.
pub fn terminal_operad_arities(arities: &[usize], cap: usize) -> TabulatedOperad {
    let mut listed = arities.to_vec();
    if !listed.contains(&1) {
        listed.push(1); // identity must exist
        listed.sort();
    }
    let mut b = OperadBuilder::new("terminal", cap);
    let mut ids = BTreeMap::new();
    for &a in &listed {
        ids.insert(a, b.element(format!("t{a}"), a).unwrap());
    }
    b.identity(ids[&1]).unwrap();
    // Entry for every argument tuple whose total arity is listed.
    let elems: Vec<(usize, crate::operad::OpId)> =
        listed.iter().map(|&a| (a, ids[&a])).collect();
    for &(n, p) in &elems {
        let mut tuple = vec![0usize; n];
        'next: loop {
            let args: Vec<_> = tuple.iter().map(|&i| elems[i].1).collect();
            let total: usize = tuple.iter().map(|&i| elems[i].0).sum();
            if total <= cap {
                if let Some(r) = ids.get(&total) {
                    b.composite(p, &args, *r).unwrap();
                }
            }
            let mut k = 0;
            loop {
                if k == n {
                    break 'next;
                }
                tuple[k] += 1;
                if tuple[k] < elems.len() {
                    break;
                }
                tuple[k] = 0;
                k += 1;
            }
        }
    }
    b.finish().unwrap()
}

/// Two unary elements composing as residues mod 2; `g0` is the identity.
pub fn z2_unary_operad() -> TabulatedOperad {
    let mut b = OperadBuilder::new("z2", 1);
    let g0 = b.element("g0", 1).unwrap();
    let g1 = b.element("g1", 1).unwrap();
    b.identity(g0).unwrap();
    b.composite(g0, &[g0], g0).unwrap();
    b.composite(g0, &[g1], g1).unwrap();
    b.composite(g1, &[g0], g1).unwrap();
    b.composite(g1, &[g1], g0).unwrap();
    b.finish().unwrap()
}

/// The free operad on one binary label, truncated at `cap`: elements are the
/// planar binary trees named `b{arity}_{index}`, composition is grafting.
pub fn free_binary_operad(cap: usize) -> TabulatedOperad {
    // Binary shapes by arity: shape trees with Leaf for slots.
    #[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
    enum Shape {
        Slot,
        Pair(Box<Shape>, Box<Shape>),
    }
    fn arity(s: &Shape) -> usize {
        match s {
            Shape::Slot => 1,
            Shape::Pair(l, r) => arity(l) + arity(r),
        }
    }
    fn shapes(n: usize) -> Vec<Shape> {
        if n == 1 {
            return vec![Shape::Slot];
        }
        let mut out = Vec::new();
        for left in 1..n {
            for l in shapes(left) {
                for r in shapes(n - left) {
                    out.push(Shape::Pair(Box::new(l.clone()), Box::new(r)));
                }
            }
        }
        out.sort();
        out
    }
    fn graft_shape(s: &Shape, subs: &mut std::slice::Iter<Shape>) -> Shape {
        match s {
            Shape::Slot => subs.next().unwrap().clone(),
            Shape::Pair(l, r) => Shape::Pair(
                Box::new(graft_shape(l, subs)),
                Box::new(graft_shape(r, subs)),
            ),
        }
    }

    let mut b = OperadBuilder::new("free_binary", cap);
    let mut by_shape = BTreeMap::new();
    let mut all: Vec<(Shape, crate::operad::OpId)> = Vec::new();
    for n in 1..=cap {
        for (i, s) in shapes(n).into_iter().enumerate() {
            let id = b.element(format!("b{n}_{i}"), n).unwrap();
            by_shape.insert(s.clone(), id);
            all.push((s, id));
        }
    }
    b.identity(by_shape[&Shape::Slot]).unwrap();
    let compositions = {
        let mut entries = Vec::new();
        for (s, p) in &all {
            let n = arity(s);
            let mut tuple = vec![0usize; n];
            'next: loop {
                let total: usize = tuple.iter().map(|&i| arity(&all[i].0)).sum();
                if total <= cap {
                    let subs: Vec<Shape> = tuple.iter().map(|&i| all[i].0.clone()).collect();
                    let grafted = graft_shape(s, &mut subs.iter());
                    let args: Vec<_> = tuple.iter().map(|&i| all[i].1).collect();
                    entries.push((*p, args, by_shape[&grafted]));
                }
                let mut k = 0;
                loop {
                    if k == n {
                        break 'next;
                    }
                    tuple[k] += 1;
                    if tuple[k] < all.len() {
                        break;
                    }
                    tuple[k] = 0;
                    k += 1;
                }
            }
        }
        entries
    };
    for (p, args, r) in compositions {
        b.composite(p, &args, r).unwrap();
    }
    b.finish().unwrap()
}

/// The indiscrete category on the given object names: exactly one morphism
/// between every ordered pair, named `{src}{dst}`.
pub fn indiscrete_category(objects: &[&str]) -> Rc<FinCategory> {
    let mut b = FinCategory::builder("indiscrete");
    for o in objects {
        b.object(o);
    }
    for s in objects {
        for d in objects {
            b.morphism(&format!("{s}{d}"), s, d);
        }
    }
    for o in objects {
        b.identity(o, &format!("{o}{o}"));
    }
    for a in objects {
        for m in objects {
            for z in objects {
                b.compose(&format!("{m}{z}"), &format!("{a}{m}"), &format!("{a}{z}"));
            }
        }
    }
    b.finish().unwrap()
}

/// Weak action of the terminal operad (cap from `operad`) on the indiscrete
/// category over `objects`. The object tables are arbitrary but fixed:
/// arity-n application lands on the object at `(sum of indices + n) mod k`,
/// and the arity-1 element acts by rotation, so the action of the unit
/// element is deliberately not the identity functor. All structure cells
/// are the unique morphisms, hence invertible and coherent.
pub fn indiscrete_weak(objects: &[&str], operad: &TabulatedOperad) -> WeakPCategory {
    let cat = indiscrete_category(objects);
    let k = objects.len();
    let mut action = BTreeMap::new();
    for p in operad.elements() {
        let n = operad.arity(p);
        let obj = move |tuple: &[ObjId]| -> ObjId {
            let s: usize = tuple.iter().map(|o| o.0 as usize).sum();
            ObjId(((s + n) % k) as u32)
        };
        action.insert(p, Rc::new(functor_on_indiscrete(&cat, n, obj)));
    }
    WeakPCategory::with_unique_cells(Rc::new(operad.clone()), cat, action).unwrap()
}

/// Build a total functor `indiscrete^n -> indiscrete` from an object map;
/// the morphism table is forced (unique morphisms).
fn functor_on_indiscrete(
    cat: &Rc<FinCategory>,
    n: usize,
    obj: impl Fn(&[ObjId]) -> ObjId,
) -> Functor {
    let mut obj_map = BTreeMap::new();
    let mut mor_map = BTreeMap::new();
    for tuple in cat.object_tuples(n) {
        obj_map.insert(tuple.clone(), obj(&tuple));
    }
    for tuple in cat.morphism_tuples(n) {
        let src: Vec<ObjId> = tuple.iter().map(|m| cat.src(*m)).collect();
        let dst: Vec<ObjId> = tuple.iter().map(|m| cat.dst(*m)).collect();
        let (s, d) = (obj(&src), obj(&dst));
        let m = cat
            .hom(s, d)
            .first()
            .copied()
            .expect("indiscrete homs are singletons");
        mor_map.insert(tuple, m);
    }
    Functor::new(vec![cat.clone(); n], cat.clone(), obj_map, mor_map).unwrap()
}

/// One object, two morphisms `e` (identity) and `s` with `s s = e`.
pub fn z2_category() -> Rc<FinCategory> {
    let mut b = FinCategory::builder("z2cat");
    b.object("o");
    b.morphism("e", "o", "o");
    b.morphism("s", "o", "o");
    b.identity("o", "e");
    b.compose("e", "e", "e");
    b.compose("e", "s", "s");
    b.compose("s", "e", "s");
    b.compose("s", "s", "e");
    b.finish().unwrap()
}

/// Strict action of the terminal operad on [`z2_category`]: arity-n
/// application multiplies the n morphisms. Every structure cell is an
/// identity (the defaults), so this value validates as strict.
pub fn z2_strict_weak(operad: &TabulatedOperad) -> WeakPCategory {
    let cat = z2_category();
    let o = ObjId(0);
    let mut action = BTreeMap::new();
    for p in operad.elements() {
        let n = operad.arity(p);
        let mut obj_map = BTreeMap::new();
        let mut mor_map = BTreeMap::new();
        for tuple in cat.object_tuples(n) {
            obj_map.insert(tuple, o);
        }
        for tuple in cat.morphism_tuples(n) {
            // product in Z/2: s iff an odd number of components are s
            let odd = tuple.iter().filter(|m| m.0 == 1).count() % 2 == 1;
            mor_map.insert(tuple, MorId(odd as u32));
        }
        action.insert(
            p,
            Rc::new(Functor::new(vec![cat.clone(); n], cat.clone(), obj_map, mor_map).unwrap()),
        );
    }
    WeakPCategory::strict(Rc::new(operad.clone()), cat, action).unwrap()
}

/// The discrete category on `a0, a1` with the mod-2 sum as strict action of
/// the terminal operad. Homs between distinct objects are empty, which makes
/// this the standard source of non-invertibility counterexamples.
pub fn discrete_z2_strict(operad: &TabulatedOperad) -> WeakPCategory {
    let mut b = FinCategory::builder("discrete_z2");
    b.object("a0");
    b.object("a1");
    b.morphism("id_a0", "a0", "a0");
    b.morphism("id_a1", "a1", "a1");
    b.identity("a0", "id_a0");
    b.identity("a1", "id_a1");
    b.compose("id_a0", "id_a0", "id_a0");
    b.compose("id_a1", "id_a1", "id_a1");
    let cat = b.finish().unwrap();

    let mut action = BTreeMap::new();
    for p in operad.elements() {
        let n = operad.arity(p);
        let mut obj_map = BTreeMap::new();
        let mut mor_map = BTreeMap::new();
        for tuple in cat.object_tuples(n) {
            let s: u32 = tuple.iter().map(|o| o.0).sum::<u32>() % 2;
            obj_map.insert(tuple, ObjId(s));
        }
        for tuple in cat.morphism_tuples(n) {
            let s: u32 = tuple.iter().map(|m| m.0).sum::<u32>() % 2;
            mor_map.insert(tuple, MorId(s));
        }
        action.insert(
            p,
            Rc::new(Functor::new(vec![cat.clone(); n], cat.clone(), obj_map, mor_map).unwrap()),
        );
    }
    WeakPCategory::strict(Rc::new(operad.clone()), cat, action).unwrap()
}

/// A non-coherent variant of [`z2_strict_weak`]: one structure cell is
/// replaced by the non-identity automorphism `s`. Validation must localize
/// the broken pasting.
pub fn z2_corrupted_weak(operad: &TabulatedOperad) -> WeakPCategory {
    let mut w = z2_strict_weak(operad);
    let t2 = operad
        .elements()
        .find(|p| operad.arity(*p) == 2)
        .expect("needs a binary element");
    let one = operad.identity();
    w.corrupt_gamma_component(t2, &[one, one], &[ObjId(0), ObjId(0)], MorId(1));
    w
}

/// Convenience: every tree of arity `<= arity_cap` and size `<= size_cap`.
pub fn all_trees(p: &TabulatedOperad, size_cap: usize) -> Vec<Tree> {
    let mut out = Vec::new();
    for a in 0..=p.arity_cap() {
        out.extend(crate::tree::enumerate_trees(p, a, size_cap).unwrap());
    }
    out
}

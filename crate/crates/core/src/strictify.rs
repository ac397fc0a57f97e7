//! Strictification of weak actions.
//!
//! From a weak action this module builds an equivalent strict one. Objects
//! of the strict model are formal applications `p[a_1...a_n]` of an operad
//! element to a tuple of source objects; morphisms between two such pairs
//! are the source morphisms between their evaluations; the operad acts on
//! the labels by table composition. The weak structure of the input does
//! not disappear: it is conjugated into the action on morphisms through
//! the canonical cells of one-level formal composites, and it resurfaces
//! in the comparison maps built alongside. Those maps are an equivalence
//! from the strict model back to the source ([`evaluation_map`] with
//! [`check_equivalence`]) and a universal map into the strict model
//! ([`unit_map`]) through which every weak map to a strict target factors
//! uniquely ([`factorize`]).

use std::collections::{BTreeMap, BTreeSet};
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::fincat::{
    check_category, check_functor, compose_functors, invert, is_iso, FinCategory, Functor, MorId,
    NatTransformation, ObjId,
};
use crate::operad::OpId;
use crate::report::{CheckReport, Sweep};
use crate::tree::Tree;
use crate::weak::{
    check_adjoint_equivalence, compose_weak_p_functors, delta, transport_along_equivalence,
    validate_p_transformation, validate_weak_p_functor, AdjointEquivalence, PTransformation,
    WeakPCategory, WeakPFunctor,
};

/// A formal application: an operad element together with as many objects
/// of the source category as its arity.
///
/// Distinct pairs can evaluate to the same object, so the pairs, not their
/// evaluations, are the objects of the strict model, and morphisms carry
/// their endpoint pairs instead of being identified with their underlying
/// arrows.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct StPair {
    pub p: OpId,
    pub objs: Vec<ObjId>,
}

/// A weak action together with its strict model and the bookkeeping that
/// connects the two: the pair behind every object, the source arrow behind
/// every morphism, and the canonical cell of every one-level composite.
pub struct StrictifiedCategory {
    source: Rc<WeakPCategory>,
    strict: Rc<WeakPCategory>,
    pairs: Vec<StPair>,
    /// Evaluation of each pair in the source category, in object order.
    evals: Vec<ObjId>,
    index: BTreeMap<(OpId, Vec<ObjId>), ObjId>,
    /// Underlying source arrow of each strict morphism, in morphism order.
    unders: Vec<MorId>,
    lifts: BTreeMap<(ObjId, ObjId, MorId), MorId>,
    /// Cell and inverse of each in-cap composition `q(p_1..p_n)`, keyed by
    /// `(q, p)`. Shared by the action on morphisms and the comparison maps.
    cells: BTreeMap<(OpId, Vec<OpId>), (NatTransformation, NatTransformation)>,
    /// True when a pair or a table entry was dropped because some source
    /// table had no value there.
    truncated: bool,
}

impl StrictifiedCategory {
    pub fn source(&self) -> &Rc<WeakPCategory> {
        &self.source
    }

    /// The strict model, as a weak action whose cells are all identities.
    pub fn strict(&self) -> &Rc<WeakPCategory> {
        &self.strict
    }

    pub fn category(&self) -> &Rc<FinCategory> {
        self.strict.cat()
    }

    pub fn pair(&self, o: ObjId) -> &StPair {
        &self.pairs[o.0 as usize]
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    pub fn find_pair(&self, p: OpId, objs: &[ObjId]) -> Option<ObjId> {
        self.index.get(&(p, objs.to_vec())).copied()
    }

    /// The source object a pair evaluates to.
    pub fn eval_pair(&self, o: ObjId) -> ObjId {
        self.evals[o.0 as usize]
    }

    /// The source arrow behind a strict morphism.
    pub fn under(&self, m: MorId) -> MorId {
        self.unders[m.0 as usize]
    }

    /// The strict morphism with the given endpoints lying over a source
    /// arrow, when that arrow connects the endpoint evaluations.
    pub fn lift(&self, src: ObjId, dst: ObjId, under: MorId) -> Option<MorId> {
        self.lifts.get(&(src, dst, under)).copied()
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }
}

/// Build the strict model of a weak action.
///
/// The input is expected to validate; nothing here re-checks coherence,
/// and the conjugation below trusts the canonical cells. Run
/// [`check_strict`] on the output for the exhaustive verification.
pub fn strictify(w: &Rc<WeakPCategory>) -> Result<StrictifiedCategory> {
    let operad = w.operad().clone();
    let a = w.cat().clone();
    let mut truncated = false;

    // Objects: every in-cap application with a defined evaluation.
    let mut pairs: Vec<StPair> = Vec::new();
    let mut evals: Vec<ObjId> = Vec::new();
    let mut index: BTreeMap<(OpId, Vec<ObjId>), ObjId> = BTreeMap::new();
    for p in operad.elements() {
        let h = w.action(p);
        for objs in a.object_tuples(operad.arity(p)) {
            match h.obj(&objs) {
                Some(e) => {
                    index.insert((p, objs.clone()), ObjId(pairs.len() as u32));
                    pairs.push(StPair { p, objs });
                    evals.push(e);
                }
                None => truncated = true,
            }
        }
    }

    // The category: one object per pair, one morphism per source arrow
    // between evaluations, composition and identities borrowed from the
    // source. Names stay single tokens so the result prints and re-reads.
    let pair_name = |i: usize| -> String {
        let StPair { p, objs } = &pairs[i];
        let parts: Vec<&str> = objs.iter().map(|o| a.object_name(*o)).collect();
        format!("{}[{}]", operad.op_name(*p), parts.join("."))
    };
    let mor_name =
        |u: MorId, i: usize, j: usize| format!("{}[{}.{}]", a.morphism_name(u), i, j);
    let mut b = FinCategory::builder(format!("st_{}", a.name()));
    for i in 0..pairs.len() {
        b.object(&pair_name(i));
    }
    let mut unders: Vec<MorId> = Vec::new();
    let mut lifts: BTreeMap<(ObjId, ObjId, MorId), MorId> = BTreeMap::new();
    for i in 0..pairs.len() {
        for j in 0..pairs.len() {
            for &u in a.hom(evals[i], evals[j]) {
                b.morphism(&mor_name(u, i, j), &pair_name(i), &pair_name(j));
                lifts.insert(
                    (ObjId(i as u32), ObjId(j as u32), u),
                    MorId(unders.len() as u32),
                );
                unders.push(u);
            }
        }
    }
    for i in 0..pairs.len() {
        b.identity(&pair_name(i), &mor_name(a.identity_of(evals[i]), i, i));
    }
    for i in 0..pairs.len() {
        for j in 0..pairs.len() {
            for &f in a.hom(evals[i], evals[j]) {
                for k in 0..pairs.len() {
                    for &g in a.hom(evals[j], evals[k]) {
                        let h = a.compose(g, f)?;
                        b.compose(&mor_name(g, j, k), &mor_name(f, i, j), &mor_name(h, i, k));
                    }
                }
            }
        }
    }
    let st_cat = b.finish()?;

    // Canonical cells of the one-level composites, with their inverses,
    // computed once and shared.
    let mut cells: BTreeMap<(OpId, Vec<OpId>), (NatTransformation, NatTransformation)> =
        BTreeMap::new();
    for q in operad.elements() {
        for args in operad.argument_tuples(operad.arity(q)) {
            if operad.compose(q, &args).is_err() {
                continue;
            }
            let tree = Tree::Node(q, args.iter().map(|p| Tree::corolla(*p, &operad)).collect());
            let cell = match delta(w, &tree) {
                Ok(c) => c,
                Err(_) => {
                    truncated = true;
                    continue;
                }
            };
            let inv = cell.inverse()?;
            cells.insert((q, args), (cell, inv));
        }
    }

    // Action tables. On objects the labels compose; on morphisms the source
    // action is conjugated by the cells: back along the source cell, across,
    // forward along the target cell.
    let mut st_action: BTreeMap<OpId, Rc<Functor>> = BTreeMap::new();
    for q in operad.elements() {
        let n = operad.arity(q);
        let mut obj_map: BTreeMap<Vec<ObjId>, ObjId> = BTreeMap::new();
        for tuple in st_cat.object_tuples(n) {
            let ps: Vec<OpId> = tuple.iter().map(|x| pairs[x.0 as usize].p).collect();
            let Ok(r) = operad.compose(q, &ps) else { continue };
            let flat: Vec<ObjId> = tuple
                .iter()
                .flat_map(|x| pairs[x.0 as usize].objs.iter().copied())
                .collect();
            match index.get(&(r, flat)) {
                Some(o) => {
                    obj_map.insert(tuple, *o);
                }
                None => truncated = true,
            }
        }
        let mut mor_map: BTreeMap<Vec<MorId>, MorId> = BTreeMap::new();
        for tuple in st_cat.morphism_tuples(n) {
            let srcs: Vec<ObjId> = tuple.iter().map(|m| st_cat.src(*m)).collect();
            let dsts: Vec<ObjId> = tuple.iter().map(|m| st_cat.dst(*m)).collect();
            let (Some(&sx), Some(&dx)) = (obj_map.get(&srcs), obj_map.get(&dsts)) else {
                continue;
            };
            let src_ps: Vec<OpId> = srcs.iter().map(|x| pairs[x.0 as usize].p).collect();
            let dst_ps: Vec<OpId> = dsts.iter().map(|x| pairs[x.0 as usize].p).collect();
            let (Some(src_cell), Some(dst_cell)) =
                (cells.get(&(q, src_ps)), cells.get(&(q, dst_ps)))
            else {
                continue;
            };
            let flat_src: Vec<ObjId> = srcs
                .iter()
                .flat_map(|x| pairs[x.0 as usize].objs.iter().copied())
                .collect();
            let flat_dst: Vec<ObjId> = dsts
                .iter()
                .flat_map(|x| pairs[x.0 as usize].objs.iter().copied())
                .collect();
            let Some(back) = src_cell.1.component(&flat_src) else {
                truncated = true;
                continue;
            };
            let Some(fwd) = dst_cell.0.component(&flat_dst) else {
                truncated = true;
                continue;
            };
            let us: Vec<MorId> = tuple.iter().map(|m| unders[m.0 as usize]).collect();
            let Some(acted) = w.action(q).mor(&us) else {
                truncated = true;
                continue;
            };
            let composite = a.compose(fwd, a.compose(acted, back)?)?;
            let lifted = lifts.get(&(sx, dx, composite)).copied().ok_or_else(|| {
                Error::InvalidInput(format!(
                    "conjugated arrow {} does not connect the endpoint evaluations",
                    a.morphism_name(composite)
                ))
            })?;
            mor_map.insert(tuple, lifted);
        }
        st_action.insert(
            q,
            Rc::new(Functor::new(
                vec![st_cat.clone(); n],
                st_cat.clone(),
                obj_map,
                mor_map,
            )?),
        );
    }

    let strict = Rc::new(WeakPCategory::strict(operad, st_cat, st_action)?);
    Ok(StrictifiedCategory {
        source: w.clone(),
        strict,
        pairs,
        evals,
        index,
        unders,
        lifts,
        cells,
        truncated,
    })
}

/// Exhaustive verification that the built action really is strict: the
/// category axioms, functoriality of every action table, the identity
/// element acting as the identity functor on the nose, associativity of
/// the action on every in-cap instance, and the hom-sets standing in
/// bijection with the source hom-sets between evaluations.
pub fn check_strict(s: &StrictifiedCategory) -> CheckReport {
    let operad = s.strict.operad().clone();
    let cat = s.category().clone();
    let a = s.source.cat().clone();
    let mut report = CheckReport::new(format!("check_strict({})", cat.name()));

    report.absorb("category", check_category(&cat));
    for (q, h) in s.strict.actions() {
        report.absorb(&format!("action[{}]", operad.op_name(q)), check_functor(h));
    }

    let mut skipped = false;
    {
        let h1 = s.strict.action(operad.identity());
        let mut unit = Sweep::new(&mut report, "unit_action");
        for x in cat.objects() {
            match h1.obj(&[x]) {
                None => skipped = true,
                Some(got) => unit.instance(got == x, || {
                    (
                        format!("object {}", cat.object_name(x)),
                        cat.object_name(x).into(),
                        cat.object_name(got).into(),
                    )
                }),
            }
        }
        for m in cat.morphisms() {
            match h1.mor(&[m]) {
                None => skipped = true,
                Some(got) => unit.instance(got == m, || {
                    (
                        format!("morphism {}", cat.morphism_name(m)),
                        cat.morphism_name(m).into(),
                        cat.morphism_name(got).into(),
                    )
                }),
            }
        }
        unit.finish();
    }

    {
        let mut assoc = Sweep::new(&mut report, "assoc_objects");
        for q in operad.elements() {
            for args in operad.argument_tuples(operad.arity(q)) {
                let Ok(r) = operad.compose(q, &args) else { continue };
                let arities: Vec<usize> = args.iter().map(|p| operad.arity(*p)).collect();
                let total: usize = arities.iter().sum();
                for flat in cat.object_tuples(total) {
                    let mut inner = Vec::with_capacity(args.len());
                    let mut at = 0;
                    let mut defined = true;
                    for (p, k) in args.iter().zip(&arities) {
                        match s.strict.action(*p).obj(&flat[at..at + k]) {
                            Some(o) => inner.push(o),
                            None => {
                                defined = false;
                                break;
                            }
                        }
                        at += k;
                    }
                    let nested = if defined { s.strict.action(q).obj(&inner) } else { None };
                    let direct = s.strict.action(r).obj(&flat);
                    match (nested, direct) {
                        (Some(x), Some(y)) => assoc.instance(x == y, || {
                            (
                                format!(
                                    "{} at {:?}",
                                    operad.render_composition(q, &args),
                                    flat.iter().map(|o| cat.object_name(*o)).collect::<Vec<_>>()
                                ),
                                cat.object_name(y).into(),
                                cat.object_name(x).into(),
                            )
                        }),
                        (None, None) => {}
                        _ => skipped = true,
                    }
                }
            }
        }
        assoc.finish();
    }

    {
        let mut assoc = Sweep::new(&mut report, "assoc_morphisms");
        for q in operad.elements() {
            for args in operad.argument_tuples(operad.arity(q)) {
                let Ok(r) = operad.compose(q, &args) else { continue };
                let arities: Vec<usize> = args.iter().map(|p| operad.arity(*p)).collect();
                let total: usize = arities.iter().sum();
                for flat in cat.morphism_tuples(total) {
                    let mut inner = Vec::with_capacity(args.len());
                    let mut at = 0;
                    let mut defined = true;
                    for (p, k) in args.iter().zip(&arities) {
                        match s.strict.action(*p).mor(&flat[at..at + k]) {
                            Some(m) => inner.push(m),
                            None => {
                                defined = false;
                                break;
                            }
                        }
                        at += k;
                    }
                    let nested = if defined { s.strict.action(q).mor(&inner) } else { None };
                    let direct = s.strict.action(r).mor(&flat);
                    match (nested, direct) {
                        (Some(x), Some(y)) => assoc.instance(x == y, || {
                            (
                                format!(
                                    "{} at {:?}",
                                    operad.render_composition(q, &args),
                                    flat.iter()
                                        .map(|m| cat.morphism_name(*m))
                                        .collect::<Vec<_>>()
                                ),
                                cat.morphism_name(y).into(),
                                cat.morphism_name(x).into(),
                            )
                        }),
                        (None, None) => {}
                        _ => skipped = true,
                    }
                }
            }
        }
        assoc.finish();
    }

    {
        let mut bij = Sweep::new(&mut report, "hom_bijection");
        for x in cat.objects() {
            for y in cat.objects() {
                let st_unders: Vec<MorId> = cat.hom(x, y).iter().map(|m| s.under(*m)).collect();
                let want = a.hom(s.eval_pair(x), s.eval_pair(y));
                let ok = st_unders.len() == want.len()
                    && st_unders.iter().collect::<BTreeSet<_>>()
                        == want.iter().collect::<BTreeSet<_>>();
                bij.instance(ok, || {
                    (
                        format!("hom({}, {})", cat.object_name(x), cat.object_name(y)),
                        format!("{} arrows, one per source arrow", want.len()),
                        format!("{} arrows", st_unders.len()),
                    )
                });
            }
        }
        bij.finish();
    }

    if skipped || s.truncated {
        report.cap_limited = true;
    }
    report
}

/// The evaluation map from the strict model back to the source: pairs go
/// to their evaluations, morphisms to their underlying arrows, and the
/// comparison cell at an argument tuple is the canonical cell of the
/// one-level composite the tuple spells.
pub fn evaluation_map(s: &StrictifiedCategory) -> Result<WeakPFunctor> {
    let operad = s.strict.operad().clone();
    let st_cat = s.category().clone();
    let a = s.source.cat().clone();

    let obj_map: BTreeMap<Vec<ObjId>, ObjId> =
        st_cat.objects().map(|x| (vec![x], s.eval_pair(x))).collect();
    let mor_map: BTreeMap<Vec<MorId>, MorId> =
        st_cat.morphisms().map(|m| (vec![m], s.under(m))).collect();
    let f = Functor::new(vec![st_cat.clone()], a, obj_map, mor_map)?;

    let mut overrides: BTreeMap<OpId, BTreeMap<Vec<ObjId>, MorId>> = BTreeMap::new();
    for q in operad.elements() {
        let mut table = BTreeMap::new();
        for tuple in st_cat.object_tuples(operad.arity(q)) {
            let ps: Vec<OpId> = tuple.iter().map(|x| s.pair(*x).p).collect();
            let Some((cell, _)) = s.cells.get(&(q, ps)) else { continue };
            let flat: Vec<ObjId> = tuple
                .iter()
                .flat_map(|x| s.pair(*x).objs.iter().copied())
                .collect();
            let Some(c) = cell.component(&flat) else { continue };
            table.insert(tuple, c);
        }
        overrides.insert(q, table);
    }
    WeakPFunctor::new(s.strict.clone(), s.source.clone(), f, &overrides)
}

// Underlying functor of the unit map: objects to their unit pair, arrows
// to the lifted image under the action of the operad identity.
fn unit_functor(s: &StrictifiedCategory) -> Result<Functor> {
    let one = s.strict.operad().identity();
    let a = s.source.cat().clone();
    let h1 = s.source.action(one).clone();

    let unit_pair = |o: ObjId| -> Result<ObjId> {
        s.find_pair(one, &[o])
            .ok_or_else(|| Error::CapExceeded(format!("no unit pair over {}", a.object_name(o))))
    };

    let mut obj_map = BTreeMap::new();
    for o in a.objects() {
        obj_map.insert(vec![o], unit_pair(o)?);
    }
    let mut mor_map = BTreeMap::new();
    for f in a.morphisms() {
        let im = h1.mor(&[f]).ok_or_else(|| {
            Error::CapExceeded(format!(
                "the unit action is undefined at {}",
                a.morphism_name(f)
            ))
        })?;
        let x = unit_pair(a.src(f))?;
        let y = unit_pair(a.dst(f))?;
        let m = s.lift(x, y, im).ok_or_else(|| {
            Error::InvalidInput(format!(
                "image of {} does not connect the unit pairs",
                a.morphism_name(f)
            ))
        })?;
        mor_map.insert(vec![f], m);
    }
    Functor::new(vec![a], s.category().clone(), obj_map, mor_map)
}

/// The unit of the construction: the weak map sending a source object to
/// its unit pair. Its comparison cell at an argument tuple is the lift of
/// the unit cell at the evaluation, going from the pair that spells the
/// application to the unit pair over its value.
pub fn unit_map(s: &StrictifiedCategory) -> Result<WeakPFunctor> {
    let operad = s.strict.operad().clone();
    let one = operad.identity();
    let a = s.source.cat().clone();
    let g = unit_functor(s)?;

    let mut overrides: BTreeMap<OpId, BTreeMap<Vec<ObjId>, MorId>> = BTreeMap::new();
    for q in operad.elements() {
        let mut table = BTreeMap::new();
        for tuple in a.object_tuples(operad.arity(q)) {
            let Some(v) = s.source.action(q).obj(&tuple) else { continue };
            let Some(x) = s.find_pair(q, &tuple) else { continue };
            let Some(y) = s.find_pair(one, &[v]) else { continue };
            let Some(c) = s.source.iota().component(&[v]) else { continue };
            let Some(m) = s.lift(x, y, c) else { continue };
            table.insert(tuple, m);
        }
        overrides.insert(q, table);
    }
    WeakPFunctor::new(s.source.clone(), s.strict.clone(), g, &overrides)
}

/// Verify that the evaluation map is an equivalence and package the
/// witnesses: fullness and faithfulness through the hom-bijection,
/// essential surjectivity through the invertible unit cell, and an
/// adjoint pseudo-inverse whose unit and counit come from that same cell,
/// transported into a weak map structure. The two comparison
/// transformations and their inverses are all validated.
pub fn check_equivalence(
    s: &StrictifiedCategory,
    forward: &Rc<WeakPFunctor>,
) -> Result<(AdjointEquivalence, CheckReport)> {
    if !Rc::ptr_eq(forward.source(), &s.strict) || !Rc::ptr_eq(forward.target(), &s.source) {
        return Err(Error::InvalidInput(
            "the forward map must go from this strict model to its source".into(),
        ));
    }
    let st_cat = s.category().clone();
    let a = s.source.cat().clone();
    let one = s.strict.operad().identity();
    let mut report = CheckReport::new(format!("check_equivalence({})", st_cat.name()));

    {
        let f = forward.underlying();
        let mut full = Sweep::new(&mut report, "full_and_faithful");
        for x in st_cat.objects() {
            for y in st_cat.objects() {
                let images: BTreeSet<MorId> =
                    st_cat.hom(x, y).iter().filter_map(|m| f.mor(&[*m])).collect();
                let want: BTreeSet<MorId> =
                    a.hom(s.eval_pair(x), s.eval_pair(y)).iter().copied().collect();
                let ok = images == want && images.len() == st_cat.hom(x, y).len();
                full.instance(ok, || {
                    (
                        format!("hom({}, {})", st_cat.object_name(x), st_cat.object_name(y)),
                        format!("a bijection onto {} source arrows", want.len()),
                        format!("{} of {} arrows hit", images.len(), st_cat.hom(x, y).len()),
                    )
                });
            }
        }
        full.finish();
    }

    {
        let mut surj = Sweep::new(&mut report, "essentially_surjective");
        for o in a.objects() {
            let witness = s
                .find_pair(one, &[o])
                .and_then(|_| s.source.iota().component(&[o]))
                .map(|c| is_iso(&a, c));
            surj.instance(witness == Some(true), || {
                (
                    format!("object {}", a.object_name(o)),
                    "an invertible unit cell into the evaluation of its unit pair".into(),
                    format!("{witness:?}"),
                )
            });
        }
        surj.finish();
    }

    // The canonical pseudo-inverse and the two comparison transformations.
    let g = unit_functor(s)?;
    let fu = forward.underlying().clone();
    let mut eta_map: BTreeMap<Vec<ObjId>, MorId> = BTreeMap::new();
    for x in st_cat.objects() {
        let e = s.eval_pair(x);
        let c = s
            .source
            .iota()
            .component(&[e])
            .ok_or_else(|| Error::CapExceeded(format!("no unit cell at {}", a.object_name(e))))?;
        let y = g.obj(&[e]).expect("unit pairs cover every object");
        let m = s.lift(x, y, c).ok_or_else(|| {
            Error::InvalidInput(format!("unit cell at {} does not lift", a.object_name(e)))
        })?;
        eta_map.insert(vec![x], m);
    }
    let mut eps_map: BTreeMap<Vec<ObjId>, MorId> = BTreeMap::new();
    for o in a.objects() {
        let c = s
            .source
            .iota()
            .component(&[o])
            .ok_or_else(|| Error::CapExceeded(format!("no unit cell at {}", a.object_name(o))))?;
        eps_map.insert(vec![o], invert(&a, c)?);
    }
    let eta = NatTransformation::new(
        Rc::new(Functor::identity(&st_cat)),
        Rc::new(compose_functors(&g, &[fu.as_ref()])?),
        eta_map.clone(),
    )?;
    let eps = NatTransformation::new(
        Rc::new(compose_functors(&fu, &[&g])?),
        Rc::new(Functor::identity(&a)),
        eps_map.clone(),
    )?;
    let backward = Rc::new(transport_along_equivalence(forward, g, &eta, &eps)?);

    let unit = PTransformation::new(
        Rc::new(WeakPFunctor::identity(&s.strict)),
        Rc::new(compose_weak_p_functors(backward.as_ref(), forward.as_ref())?),
        eta_map,
    )?;
    let counit = PTransformation::new(
        Rc::new(compose_weak_p_functors(forward.as_ref(), backward.as_ref())?),
        Rc::new(WeakPFunctor::identity(&s.source)),
        eps_map,
    )?;
    let eq = AdjointEquivalence { forward: forward.clone(), backward, unit, counit };

    report.absorb("adjoint", check_adjoint_equivalence(&eq));
    report.absorb("unit_inverse", validate_p_transformation(&eq.unit.inverse()?));
    report.absorb("counit_inverse", validate_p_transformation(&eq.counit.inverse()?));
    if s.truncated {
        report.cap_limited = true;
    }
    Ok((eq, report))
}

// Bounded enumeration of the strict maps out of the strict model that
// satisfy a fixed set of pinned arrow images. Objects are forced, so the
// search branches on arrows only, closing each partial assignment under
// composition and the two action tables before branching further.
struct FactorSearch<'a> {
    st: &'a FinCategory,
    b: &'a FinCategory,
    b_w: &'a WeakPCategory,
    h_obj: &'a [ObjId],
    comp: &'a [(usize, usize, usize)],
    action: &'a [(OpId, Vec<usize>, usize)],
    bound: usize,
    evaluations: usize,
    aborted: bool,
    solutions: Vec<Vec<MorId>>,
}

impl FactorSearch<'_> {
    fn assign(
        &mut self,
        a: &mut [Option<MorId>],
        slot: usize,
        v: MorId,
        trail: &mut Vec<usize>,
    ) -> bool {
        self.evaluations += 1;
        if self.evaluations > self.bound {
            self.aborted = true;
            return false;
        }
        let sx = self.h_obj[self.st.src(MorId(slot as u32)).0 as usize];
        let dx = self.h_obj[self.st.dst(MorId(slot as u32)).0 as usize];
        if self.b.src(v) != sx || self.b.dst(v) != dx {
            return false;
        }
        a[slot] = Some(v);
        trail.push(slot);
        true
    }

    // Close the assignment under the constraints. False means contradiction
    // or bound hit; the trail records what to undo either way.
    fn propagate(&mut self, a: &mut [Option<MorId>], trail: &mut Vec<usize>) -> bool {
        loop {
            let mut changed = false;
            for &(gs, fs, hs) in self.comp {
                let (Some(kg), Some(kf)) = (a[gs], a[fs]) else { continue };
                let Ok(c) = self.b.compose(kg, kf) else { return false };
                match a[hs] {
                    Some(kh) => {
                        if kh != c {
                            return false;
                        }
                    }
                    None => {
                        if !self.assign(a, hs, c, trail) {
                            return false;
                        }
                        changed = true;
                    }
                }
            }
            for (q, ins, out) in self.action {
                let imgs: Option<Vec<MorId>> = ins.iter().map(|i| a[*i]).collect();
                let Some(imgs) = imgs else { continue };
                let Some(applied) = self.b_w.action(*q).mor(&imgs) else { continue };
                match a[*out] {
                    Some(k) => {
                        if k != applied {
                            return false;
                        }
                    }
                    None => {
                        if !self.assign(a, *out, applied, trail) {
                            return false;
                        }
                        changed = true;
                    }
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn search(&mut self, a: &mut [Option<MorId>]) {
        if self.aborted || self.solutions.len() > 1 {
            return;
        }
        let mut trail = Vec::new();
        if self.propagate(a, &mut trail) {
            match a.iter().position(|v| v.is_none()) {
                None => self.solutions.push(a.iter().map(|v| v.unwrap()).collect()),
                Some(slot) => {
                    let sx = self.h_obj[self.st.src(MorId(slot as u32)).0 as usize];
                    let dx = self.h_obj[self.st.dst(MorId(slot as u32)).0 as usize];
                    for &cand in self.b.hom(sx, dx) {
                        let mut picked = Vec::new();
                        if !self.assign(a, slot, cand, &mut picked) {
                            if self.aborted {
                                break;
                            }
                            continue;
                        }
                        self.search(a);
                        for u in picked {
                            a[u] = None;
                        }
                        if self.aborted || self.solutions.len() > 1 {
                            break;
                        }
                    }
                }
            }
        }
        for u in trail {
            a[u] = None;
        }
    }
}

/// Factor a weak map with a strict target through the strict model.
///
/// The returned map is forced: on objects the target action applied to the
/// image tuple, on morphisms the image of the underlying arrow conjugated
/// by the comparison cells of `g`. The report verifies that the target is
/// strict, that the result is a strict map, that it commutes with the unit
/// map exactly (objects, morphisms and comparison cells), and uniqueness:
/// a depth-first enumeration of every strict map satisfying the same
/// commutation, cut off after `bound` candidate evaluations. A cut-off is
/// reported as a cap, not a failure; existence and commutation stand
/// regardless.
pub fn factorize(
    s: &StrictifiedCategory,
    g: &Rc<WeakPFunctor>,
    bound: usize,
) -> Result<(WeakPFunctor, CheckReport)> {
    if !Rc::ptr_eq(g.source(), &s.source) {
        return Err(Error::InvalidInput(
            "the weak map must start at the strictified source".into(),
        ));
    }
    let b_w = g.target().clone();
    let b = b_w.cat().clone();
    let a = s.source.cat().clone();
    let operad = s.strict.operad().clone();
    let st_cat = s.category().clone();
    let mut report = CheckReport::new(format!("factorize({} -> {})", st_cat.name(), b.name()));

    {
        let mut strictness = Sweep::new(&mut report, "target_strict");
        strictness.instance(b_w.iota().is_identity_cells(), || {
            (
                "unit cell".into(),
                "identity components".into(),
                "a non-identity component".into(),
            )
        });
        for (key, cell) in b_w.gammas() {
            strictness.instance(cell.is_identity_cells(), || {
                (
                    operad.render_composition(key.0, &key.1),
                    "identity components".into(),
                    "a non-identity component".into(),
                )
            });
        }
        strictness.finish();
    }

    let fprime = unit_map(s)?;
    let gm = g.underlying().clone();

    // Forced object clause: the target action applied to the image tuple.
    let mut h_obj: Vec<ObjId> = Vec::with_capacity(s.pair_count());
    for i in 0..s.pair_count() {
        let StPair { p, objs } = s.pair(ObjId(i as u32));
        let imgs: Option<Vec<ObjId>> = objs.iter().map(|o| gm.obj(&[*o])).collect();
        let target = imgs.and_then(|t| b_w.action(*p).obj(&t)).ok_or_else(|| {
            Error::CapExceeded(format!(
                "the target action has no value under {}",
                st_cat.object_name(ObjId(i as u32))
            ))
        })?;
        h_obj.push(target);
    }

    // Forced morphism clause: conjugate the image of the underlying arrow
    // by the comparison cells at the endpoint pairs.
    let mut mor_map: BTreeMap<Vec<MorId>, MorId> = BTreeMap::new();
    for m in st_cat.morphisms() {
        let x = st_cat.src(m);
        let y = st_cat.dst(m);
        let px = s.pair(x);
        let py = s.pair(y);
        let into = g.psi(px.p).component(&px.objs).ok_or_else(|| {
            Error::CapExceeded(format!("no comparison cell under {}", st_cat.object_name(x)))
        })?;
        let outof = invert(
            &b,
            g.psi(py.p).component(&py.objs).ok_or_else(|| {
                Error::CapExceeded(format!(
                    "no comparison cell under {}",
                    st_cat.object_name(y)
                ))
            })?,
        )?;
        let gu = gm.mor(&[s.under(m)]).ok_or_else(|| {
            Error::CapExceeded(format!(
                "the weak map is undefined at {}",
                a.morphism_name(s.under(m))
            ))
        })?;
        let hm = b.compose(outof, b.compose(gu, into)?)?;
        mor_map.insert(vec![m], hm);
    }
    let obj_map: BTreeMap<Vec<ObjId>, ObjId> =
        st_cat.objects().map(|x| (vec![x], h_obj[x.0 as usize])).collect();
    let hf = Functor::new(vec![st_cat.clone()], b.clone(), obj_map, mor_map)?;
    let h = WeakPFunctor::new(s.strict.clone(), b_w.clone(), hf, &BTreeMap::new())?;

    // Identity comparison cells make validation exactly the claim that the
    // map is strict.
    report.absorb("strict_map", validate_weak_p_functor(&h));

    // Strictness spelled out against the two action tables.
    let mut skipped = false;
    {
        let hu = h.underlying().clone();
        let mut strict_obj = Sweep::new(&mut report, "strict_action_objects");
        for q in operad.elements() {
            let hq_st = s.strict.action(q);
            let hq_b = b_w.action(q);
            for tuple in st_cat.object_tuples(operad.arity(q)) {
                let lhs = hq_st.obj(&tuple).and_then(|o| hu.obj(&[o]));
                let imgs: Option<Vec<ObjId>> = tuple.iter().map(|x| hu.obj(&[*x])).collect();
                let rhs = imgs.and_then(|t| hq_b.obj(&t));
                match (lhs, rhs) {
                    (Some(l), Some(r)) => strict_obj.instance(l == r, || {
                        (
                            format!(
                                "{} at {:?}",
                                operad.op_name(q),
                                tuple
                                    .iter()
                                    .map(|x| st_cat.object_name(*x))
                                    .collect::<Vec<_>>()
                            ),
                            b.object_name(r).into(),
                            b.object_name(l).into(),
                        )
                    }),
                    (None, None) => {}
                    _ => skipped = true,
                }
            }
        }
        strict_obj.finish();
        let mut strict_mor = Sweep::new(&mut report, "strict_action_morphisms");
        for q in operad.elements() {
            let hq_st = s.strict.action(q);
            let hq_b = b_w.action(q);
            for tuple in st_cat.morphism_tuples(operad.arity(q)) {
                let lhs = hq_st.mor(&tuple).and_then(|m| hu.mor(&[m]));
                let imgs: Option<Vec<MorId>> = tuple.iter().map(|m| hu.mor(&[*m])).collect();
                let rhs = imgs.and_then(|t| hq_b.mor(&t));
                match (lhs, rhs) {
                    (Some(l), Some(r)) => strict_mor.instance(l == r, || {
                        (
                            format!(
                                "{} at {:?}",
                                operad.op_name(q),
                                tuple
                                    .iter()
                                    .map(|m| st_cat.morphism_name(*m))
                                    .collect::<Vec<_>>()
                            ),
                            b.morphism_name(r).into(),
                            b.morphism_name(l).into(),
                        )
                    }),
                    (None, None) => {}
                    _ => skipped = true,
                }
            }
        }
        strict_mor.finish();
    }

    // Exact commutation with the unit map.
    {
        let hu = h.underlying().clone();
        let fu = fprime.underlying().clone();
        let mut objs = Sweep::new(&mut report, "commutes_on_objects");
        for o in a.objects() {
            let via = fu.obj(&[o]).and_then(|x| hu.obj(&[x]));
            let direct = gm.obj(&[o]);
            objs.instance(via.is_some() && via == direct, || {
                (
                    format!("object {}", a.object_name(o)),
                    format!("{direct:?}"),
                    format!("{via:?}"),
                )
            });
        }
        objs.finish();
        let mut mors = Sweep::new(&mut report, "commutes_on_morphisms");
        for f in a.morphisms() {
            let via = fu.mor(&[f]).and_then(|m| hu.mor(&[m]));
            let direct = gm.mor(&[f]);
            mors.instance(via.is_some() && via == direct, || {
                (
                    format!("morphism {}", a.morphism_name(f)),
                    format!("{direct:?}"),
                    format!("{via:?}"),
                )
            });
        }
        mors.finish();
        let mut cells = Sweep::new(&mut report, "commutes_on_cells");
        for q in operad.elements() {
            for (t, m) in fprime.psi(q).components() {
                let via = hu.mor(&[m]);
                let direct = g.psi(q).component(t);
                cells.instance(via.is_some() && via == direct, || {
                    (
                        format!(
                            "cell of {} at {:?}",
                            operad.op_name(q),
                            t.iter().map(|o| a.object_name(*o)).collect::<Vec<_>>()
                        ),
                        format!("{direct:?}"),
                        format!("{via:?}"),
                    )
                });
            }
        }
        cells.finish();
    }

    // Uniqueness by bounded enumeration. The object table is forced, so
    // the search branches on arrows only, seeded with everything the
    // commutation pins down.
    {
        let mut pins: BTreeMap<usize, MorId> = BTreeMap::new();
        let mut pin_conflict = false;
        let add_pin = |pins: &mut BTreeMap<usize, MorId>, conflict: &mut bool,
                           slot: MorId,
                           v: MorId| {
            if let Some(old) = pins.insert(slot.0 as usize, v) {
                if old != v {
                    *conflict = true;
                }
            }
        };
        for x in st_cat.objects() {
            add_pin(
                &mut pins,
                &mut pin_conflict,
                st_cat.identity_of(x),
                b.identity_of(h_obj[x.0 as usize]),
            );
        }
        let fu = fprime.underlying().clone();
        for f in a.morphisms() {
            match (fu.mor(&[f]), gm.mor(&[f])) {
                (Some(slot), Some(v)) => add_pin(&mut pins, &mut pin_conflict, slot, v),
                _ => skipped = true,
            }
        }
        for q in operad.elements() {
            for (t, slot) in fprime.psi(q).components() {
                match g.psi(q).component(t) {
                    Some(v) => add_pin(&mut pins, &mut pin_conflict, slot, v),
                    None => skipped = true,
                }
            }
        }

        let mut comp: Vec<(usize, usize, usize)> = Vec::new();
        for f in st_cat.morphisms() {
            for &gmor in st_cat.outgoing(st_cat.dst(f)) {
                let composite = st_cat.compose(gmor, f)?;
                comp.push((gmor.0 as usize, f.0 as usize, composite.0 as usize));
            }
        }
        let mut action: Vec<(OpId, Vec<usize>, usize)> = Vec::new();
        for q in operad.elements() {
            for (t, out) in s.strict.action(q).mor_entries() {
                action.push((q, t.iter().map(|m| m.0 as usize).collect(), out.0 as usize));
            }
        }

        let mut search = FactorSearch {
            st: &st_cat,
            b: &b,
            b_w: &b_w,
            h_obj: &h_obj,
            comp: &comp,
            action: &action,
            bound,
            evaluations: 0,
            aborted: false,
            solutions: Vec::new(),
        };
        if pin_conflict {
            report.line("uniqueness", 0, 1);
            report.fail(
                "uniqueness",
                "pinned arrows".into(),
                "consistent forced values".into(),
                "two different forced values for one arrow".into(),
            );
        } else {
            let mut assignment: Vec<Option<MorId>> = vec![None; st_cat.morphism_count()];
            let mut seed_trail = Vec::new();
            let mut feasible = true;
            for (&slot, &v) in &pins {
                if !search.assign(&mut assignment, slot, v, &mut seed_trail) {
                    feasible = false;
                    break;
                }
            }
            if feasible && !search.aborted {
                search.search(&mut assignment);
            }
            if search.aborted {
                report.line("uniqueness", search.evaluations, 0);
                report.cap_limited = true;
            } else {
                let found = if feasible { search.solutions.len() } else { 0 };
                report.line("uniqueness", search.evaluations, usize::from(found != 1));
                if found != 1 {
                    report.fail(
                        "uniqueness",
                        format!("{found} strict maps satisfy the factorization"),
                        "exactly one".into(),
                        found.to_string(),
                    );
                }
            }
        }
    }

    if skipped || s.truncated {
        report.cap_limited = true;
    }
    Ok((h, report))
}

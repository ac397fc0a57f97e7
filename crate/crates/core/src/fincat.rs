//! Finite categories, table-backed functors, natural transformations.
//!
//! Everything here is a finite table and every law is checked by sweeping
//! the whole table. Functors out of a power `A^n` are stored as maps keyed
//! by tuples; the power category itself is never built. Functor tables may
//! be partial: several constructions later in the crate act only on tuples
//! whose combined arity stays under an operad cap, and all checkers sweep
//! the defined part of a table.

use std::collections::BTreeMap;
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::report::{CheckReport, Sweep};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MorId(pub u32);

#[derive(Debug, Clone, PartialEq, Eq)]
struct MorInfo {
    name: String,
    src: ObjId,
    dst: ObjId,
}

/// A finite category: objects, morphisms, an identity per object, and a
/// composition table keyed `(g, f)` for `g` after `f`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinCategory {
    name: String,
    objects: Vec<String>,
    mors: Vec<MorInfo>,
    identity: Vec<MorId>,
    comp: BTreeMap<(MorId, MorId), MorId>,
    hom: BTreeMap<(ObjId, ObjId), Vec<MorId>>,
    outgoing: Vec<Vec<MorId>>,
}

impl FinCategory {
    pub fn builder(name: impl Into<String>) -> CategoryBuilder {
        CategoryBuilder {
            name: name.into(),
            objects: Vec::new(),
            mors: Vec::new(),
            identity: BTreeMap::new(),
            comp: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn objects(&self) -> impl Iterator<Item = ObjId> {
        (0..self.objects.len() as u32).map(ObjId)
    }

    pub fn morphisms(&self) -> impl Iterator<Item = MorId> {
        (0..self.mors.len() as u32).map(MorId)
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn morphism_count(&self) -> usize {
        self.mors.len()
    }

    pub fn object_name(&self, o: ObjId) -> &str {
        &self.objects[o.0 as usize]
    }

    pub fn morphism_name(&self, m: MorId) -> &str {
        &self.mors[m.0 as usize].name
    }

    pub fn lookup_object(&self, name: &str) -> Option<ObjId> {
        self.objects.iter().position(|o| o == name).map(|i| ObjId(i as u32))
    }

    pub fn lookup_morphism(&self, name: &str) -> Option<MorId> {
        self.mors.iter().position(|m| m.name == name).map(|i| MorId(i as u32))
    }

    pub fn src(&self, m: MorId) -> ObjId {
        self.mors[m.0 as usize].src
    }

    pub fn dst(&self, m: MorId) -> ObjId {
        self.mors[m.0 as usize].dst
    }

    pub fn identity_of(&self, o: ObjId) -> MorId {
        self.identity[o.0 as usize]
    }

    pub fn is_identity(&self, m: MorId) -> bool {
        self.identity[self.src(m).0 as usize] == m
    }

    pub fn hom(&self, s: ObjId, d: ObjId) -> &[MorId] {
        self.hom.get(&(s, d)).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn outgoing(&self, o: ObjId) -> &[MorId] {
        &self.outgoing[o.0 as usize]
    }

    /// `g` after `f`. Errors on non-composable endpoints or a missing entry.
    pub fn compose(&self, g: MorId, f: MorId) -> Result<MorId> {
        if self.dst(f) != self.src(g) {
            return Err(Error::ShapeMismatch(format!(
                "{} . {} not composable",
                self.morphism_name(g),
                self.morphism_name(f)
            )));
        }
        self.comp.get(&(g, f)).copied().ok_or_else(|| {
            Error::InvalidInput(format!(
                "no composite {} . {}",
                self.morphism_name(g),
                self.morphism_name(f)
            ))
        })
    }

    /// All n-tuples of objects, lexicographic.
    pub fn object_tuples(&self, n: usize) -> Vec<Vec<ObjId>> {
        product(self.objects.len(), n).into_iter()
            .map(|t| t.into_iter().map(|i| ObjId(i as u32)).collect())
            .collect()
    }

    /// All n-tuples of morphisms, lexicographic.
    pub fn morphism_tuples(&self, n: usize) -> Vec<Vec<MorId>> {
        product(self.mors.len(), n).into_iter()
            .map(|t| t.into_iter().map(|i| MorId(i as u32)).collect())
            .collect()
    }

    fn render_mor(&self, m: MorId) -> String {
        format!(
            "{}:{}->{}",
            self.morphism_name(m),
            self.object_name(self.src(m)),
            self.object_name(self.dst(m))
        )
    }
}

fn product(base: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if base == 0 && n > 0 {
        return out;
    }
    let mut cur = vec![0usize; n];
    loop {
        out.push(cur.clone());
        let mut k = n;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            cur[k] += 1;
            if cur[k] < base {
                break;
            }
            cur[k] = 0;
        }
    }
}

pub struct CategoryBuilder {
    name: String,
    objects: Vec<String>,
    mors: Vec<(String, String, String)>,
    identity: BTreeMap<String, String>,
    comp: Vec<(String, String, String)>,
}

impl CategoryBuilder {
    pub fn object(&mut self, name: &str) -> &mut Self {
        self.objects.push(name.to_string());
        self
    }

    pub fn morphism(&mut self, name: &str, src: &str, dst: &str) -> &mut Self {
        self.mors.push((name.to_string(), src.to_string(), dst.to_string()));
        self
    }

    pub fn identity(&mut self, obj: &str, mor: &str) -> &mut Self {
        self.identity.insert(obj.to_string(), mor.to_string());
        self
    }

    /// Record `g . f = h`.
    pub fn compose(&mut self, g: &str, f: &str, h: &str) -> &mut Self {
        self.comp.push((g.to_string(), f.to_string(), h.to_string()));
        self
    }

    pub fn finish(&mut self) -> Result<Rc<FinCategory>> {
        let mut objects = Vec::new();
        for o in &self.objects {
            if objects.contains(o) {
                return Err(Error::BadIdent(format!("duplicate object {o}")));
            }
            objects.push(o.clone());
        }
        let find_obj = |n: &str| {
            objects
                .iter()
                .position(|o| o == n)
                .map(|i| ObjId(i as u32))
                .ok_or_else(|| Error::BadIdent(format!("unknown object {n}")))
        };
        let mut mors: Vec<MorInfo> = Vec::new();
        for (name, s, d) in &self.mors {
            if mors.iter().any(|m| &m.name == name) {
                return Err(Error::BadIdent(format!("duplicate morphism {name}")));
            }
            mors.push(MorInfo { name: name.clone(), src: find_obj(s)?, dst: find_obj(d)? });
        }
        let find_mor = |n: &str| {
            mors.iter()
                .position(|m| m.name == n)
                .map(|i| MorId(i as u32))
                .ok_or_else(|| Error::BadIdent(format!("unknown morphism {n}")))
        };
        let mut identity = Vec::new();
        for (i, o) in objects.iter().enumerate() {
            let m = self
                .identity
                .get(o)
                .ok_or_else(|| Error::InvalidInput(format!("object {o} has no identity")))?;
            let m = find_mor(m)?;
            let info = &mors[m.0 as usize];
            if info.src != ObjId(i as u32) || info.dst != ObjId(i as u32) {
                return Err(Error::ShapeMismatch(format!(
                    "identity of {o} must be an endomorphism of {o}"
                )));
            }
            identity.push(m);
        }
        let mut comp = BTreeMap::new();
        for (g, f, h) in &self.comp {
            let (g, f, h) = (find_mor(g)?, find_mor(f)?, find_mor(h)?);
            let gi = &mors[g.0 as usize];
            let fi = &mors[f.0 as usize];
            let hi = &mors[h.0 as usize];
            if fi.dst != gi.src || hi.src != fi.src || hi.dst != gi.dst {
                return Err(Error::ShapeMismatch(format!(
                    "composite {} . {} = {} has inconsistent endpoints",
                    gi.name, fi.name, hi.name
                )));
            }
            comp.insert((g, f), h);
        }
        let mut hom: BTreeMap<(ObjId, ObjId), Vec<MorId>> = BTreeMap::new();
        let mut outgoing = vec![Vec::new(); objects.len()];
        for (i, m) in mors.iter().enumerate() {
            hom.entry((m.src, m.dst)).or_default().push(MorId(i as u32));
            outgoing[m.src.0 as usize].push(MorId(i as u32));
        }
        Ok(Rc::new(FinCategory {
            name: self.name.clone(),
            objects,
            mors,
            identity,
            comp,
            hom,
            outgoing,
        }))
    }
}

/// Sweep the category axioms: the composition table is total on composable
/// pairs with the right endpoints, identities are neutral, and composition
/// is associative on every composable triple.
pub fn check_category(cat: &FinCategory) -> CheckReport {
    let mut report = CheckReport::new(format!("check_category({})", cat.name()));

    let mut total = Sweep::new(&mut report, "check_category.comp_total");
    for f in cat.morphisms() {
        for &g in cat.outgoing(cat.dst(f)) {
            let got = cat.compose(g, f);
            let ok = matches!(got, Ok(h) if cat.src(h) == cat.src(f) && cat.dst(h) == cat.dst(g));
            total.instance(ok, || {
                (
                    format!("{} . {}", cat.render_mor(g), cat.render_mor(f)),
                    "entry with matching endpoints".into(),
                    format!("{got:?}"),
                )
            });
        }
    }
    total.finish();

    let mut unit = Sweep::new(&mut report, "check_category.identity");
    for f in cat.morphisms() {
        let l = cat.compose(cat.identity_of(cat.dst(f)), f);
        unit.instance(l == Ok(f), || {
            (format!("id . {}", cat.render_mor(f)), cat.morphism_name(f).into(), format!("{l:?}"))
        });
        let r = cat.compose(f, cat.identity_of(cat.src(f)));
        unit.instance(r == Ok(f), || {
            (format!("{} . id", cat.render_mor(f)), cat.morphism_name(f).into(), format!("{r:?}"))
        });
    }
    unit.finish();

    let mut assoc = Sweep::new(&mut report, "check_category.assoc");
    for f in cat.morphisms() {
        for &g in cat.outgoing(cat.dst(f)) {
            for &h in cat.outgoing(cat.dst(g)) {
                let lhs = cat.compose(g, f).and_then(|gf| cat.compose(h, gf));
                let rhs = cat.compose(h, g).and_then(|hg| cat.compose(hg, f));
                assoc.instance(lhs.is_ok() && lhs == rhs, || {
                    (
                        format!(
                            "{} . {} . {}",
                            cat.morphism_name(h),
                            cat.morphism_name(g),
                            cat.morphism_name(f)
                        ),
                        format!("{rhs:?}"),
                        format!("{lhs:?}"),
                    )
                });
            }
        }
    }
    assoc.finish();

    report
}

/// Search the (finite) reverse hom-set for a two-sided inverse.
pub fn invert(cat: &FinCategory, m: MorId) -> Result<MorId> {
    let (s, d) = (cat.src(m), cat.dst(m));
    for &g in cat.hom(d, s) {
        if cat.compose(g, m) == Ok(cat.identity_of(s)) && cat.compose(m, g) == Ok(cat.identity_of(d))
        {
            return Ok(g);
        }
    }
    Err(Error::NotInvertible(cat.render_mor(m)))
}

pub fn is_iso(cat: &FinCategory, m: MorId) -> bool {
    invert(cat, m).is_ok()
}

/// A functor from a product of finite categories into a finite category,
/// stored as (possibly partial) object and morphism tables keyed by tuples.
/// An empty `dom` is the empty product: one object (the empty tuple) and
/// one morphism.
#[derive(Debug, Clone)]
pub struct Functor {
    pub dom: Vec<Rc<FinCategory>>,
    pub cod: Rc<FinCategory>,
    obj_map: BTreeMap<Vec<ObjId>, ObjId>,
    mor_map: BTreeMap<Vec<MorId>, MorId>,
}

impl PartialEq for Functor {
    /// Same domain and codomain categories (by identity) and equal tables.
    fn eq(&self, other: &Self) -> bool {
        self.dom.len() == other.dom.len()
            && self.dom.iter().zip(&other.dom).all(|(a, b)| Rc::ptr_eq(a, b))
            && Rc::ptr_eq(&self.cod, &other.cod)
            && self.obj_map == other.obj_map
            && self.mor_map == other.mor_map
    }
}
impl Eq for Functor {}

impl Functor {
    pub fn new(
        dom: Vec<Rc<FinCategory>>,
        cod: Rc<FinCategory>,
        obj_map: BTreeMap<Vec<ObjId>, ObjId>,
        mor_map: BTreeMap<Vec<MorId>, MorId>,
    ) -> Result<Functor> {
        for t in obj_map.keys() {
            if t.len() != dom.len() {
                return Err(Error::ShapeMismatch(format!(
                    "object tuple of length {} in a functor of arity {}",
                    t.len(),
                    dom.len()
                )));
            }
        }
        for t in mor_map.keys() {
            if t.len() != dom.len() {
                return Err(Error::ShapeMismatch(format!(
                    "morphism tuple of length {} in a functor of arity {}",
                    t.len(),
                    dom.len()
                )));
            }
        }
        Ok(Functor { dom, cod, obj_map, mor_map })
    }

    pub fn identity(cat: &Rc<FinCategory>) -> Functor {
        let obj_map = cat.objects().map(|o| (vec![o], o)).collect();
        let mor_map = cat.morphisms().map(|m| (vec![m], m)).collect();
        Functor { dom: vec![cat.clone()], cod: cat.clone(), obj_map, mor_map }
    }

    pub fn arity(&self) -> usize {
        self.dom.len()
    }

    pub fn obj(&self, t: &[ObjId]) -> Option<ObjId> {
        self.obj_map.get(t).copied()
    }

    pub fn mor(&self, t: &[MorId]) -> Option<MorId> {
        self.mor_map.get(t).copied()
    }

    pub fn obj_entries(&self) -> impl Iterator<Item = (&Vec<ObjId>, ObjId)> {
        self.obj_map.iter().map(|(k, v)| (k, *v))
    }

    pub fn mor_entries(&self) -> impl Iterator<Item = (&Vec<MorId>, MorId)> {
        self.mor_map.iter().map(|(k, v)| (k, *v))
    }

    pub fn is_total(&self) -> bool {
        let objs: usize = self.dom.iter().map(|c| c.object_count()).product();
        let mors: usize = self.dom.iter().map(|c| c.morphism_count()).product();
        self.obj_map.len() == objs && self.mor_map.len() == mors
    }

    /// Source objects of a morphism tuple, componentwise.
    pub fn tuple_src(&self, t: &[MorId]) -> Vec<ObjId> {
        t.iter().zip(&self.dom).map(|(m, c)| c.src(*m)).collect()
    }

    pub fn tuple_dst(&self, t: &[MorId]) -> Vec<ObjId> {
        t.iter().zip(&self.dom).map(|(m, c)| c.dst(*m)).collect()
    }

    /// Identity tuple at an object tuple.
    pub fn tuple_id(&self, t: &[ObjId]) -> Vec<MorId> {
        t.iter().zip(&self.dom).map(|(o, c)| c.identity_of(*o)).collect()
    }
}

/// Compose `outer` with one functor per slot. The result's domain is the
/// concatenation of the inner domains; entries exist where every piece is
/// defined. Domain/codomain categories must line up by identity.
pub fn compose_functors(outer: &Functor, inners: &[&Functor]) -> Result<Functor> {
    if inners.len() != outer.arity() {
        return Err(Error::ShapeMismatch(format!(
            "composing arity-{} functor with {} inner functors",
            outer.arity(),
            inners.len()
        )));
    }
    for (slot, inner) in inners.iter().enumerate() {
        if !Rc::ptr_eq(&inner.cod, &outer.dom[slot]) {
            return Err(Error::ShapeMismatch(format!(
                "inner functor {slot} lands in the wrong category"
            )));
        }
    }
    let dom: Vec<Rc<FinCategory>> = inners.iter().flat_map(|f| f.dom.clone()).collect();

    let mut obj_map = BTreeMap::new();
    let inner_obj_keys: Vec<Vec<&Vec<ObjId>>> =
        inners.iter().map(|f| f.obj_map.keys().collect()).collect();
    for_each_choice(&inner_obj_keys, &mut |choice| {
        let mut mid = Vec::with_capacity(inners.len());
        for (inner, key) in inners.iter().zip(choice) {
            match inner.obj(key) {
                Some(o) => mid.push(o),
                None => return,
            }
        }
        if let Some(out) = outer.obj(&mid) {
            let flat: Vec<ObjId> = choice.iter().flat_map(|k| k.iter().copied()).collect();
            obj_map.insert(flat, out);
        }
    });

    let mut mor_map = BTreeMap::new();
    let inner_mor_keys: Vec<Vec<&Vec<MorId>>> =
        inners.iter().map(|f| f.mor_map.keys().collect()).collect();
    for_each_choice(&inner_mor_keys, &mut |choice| {
        let mut mid = Vec::with_capacity(inners.len());
        for (inner, key) in inners.iter().zip(choice) {
            match inner.mor(key) {
                Some(m) => mid.push(m),
                None => return,
            }
        }
        if let Some(out) = outer.mor(&mid) {
            let flat: Vec<MorId> = choice.iter().flat_map(|k| k.iter().copied()).collect();
            mor_map.insert(flat, out);
        }
    });

    Ok(Functor { dom, cod: outer.cod.clone(), obj_map, mor_map })
}

/// Visit the cartesian product of the given key lists.
fn for_each_choice<'a, K>(lists: &'a [Vec<&'a K>], visit: &mut impl FnMut(&[&'a K])) {
    fn rec<'a, K>(lists: &'a [Vec<&'a K>], acc: &mut Vec<&'a K>, visit: &mut impl FnMut(&[&'a K])) {
        match lists.split_first() {
            None => visit(acc),
            Some((first, rest)) => {
                for k in first {
                    acc.push(k);
                    rec(rest, acc, visit);
                    acc.pop();
                }
            }
        }
    }
    let mut acc = Vec::with_capacity(lists.len());
    rec(lists, &mut acc, visit);
}

/// Sweep functor laws on the defined part of the tables: morphism entries
/// have endpoints consistent with the object entries, identities go to
/// identities, and composition is preserved whenever source tuples compose
/// componentwise and both tuples are defined.
pub fn check_functor(f: &Functor) -> CheckReport {
    let mut report = CheckReport::new("check_functor");

    let mut endpoints = Sweep::new(&mut report, "check_functor.endpoints");
    for (t, m) in f.mor_entries() {
        let src = f.obj(&f.tuple_src(t));
        let dst = f.obj(&f.tuple_dst(t));
        let ok = src == Some(f.cod.src(m)) && dst == Some(f.cod.dst(m));
        endpoints.instance(ok, || {
            (
                format!("tuple {:?}", t.iter().map(|m| m.0).collect::<Vec<_>>()),
                "endpoints matching the object table".into(),
                format!("src {src:?} dst {dst:?} image {}", f.cod.morphism_name(m)),
            )
        });
    }
    endpoints.finish();

    let mut ids = Sweep::new(&mut report, "check_functor.identities");
    for (t, o) in f.obj_entries() {
        let got = f.mor(&f.tuple_id(t));
        ids.instance(got == Some(f.cod.identity_of(o)), || {
            (
                format!("id at {:?}", t.iter().map(|o| o.0).collect::<Vec<_>>()),
                f.cod.morphism_name(f.cod.identity_of(o)).into(),
                format!("{got:?}"),
            )
        });
    }
    ids.finish();

    let mut comp = Sweep::new(&mut report, "check_functor.composition");
    for (t, ft) in f.mor_entries() {
        // Extend t by every componentwise-composable tuple.
        let lists: Vec<Vec<MorId>> = t
            .iter()
            .zip(&f.dom)
            .map(|(m, c)| c.outgoing(c.dst(*m)).to_vec())
            .collect();
        let list_refs: Vec<Vec<&MorId>> = lists.iter().map(|l| l.iter().collect()).collect();
        for_each_choice(&list_refs, &mut |gchoice| {
            let g: Vec<MorId> = gchoice.iter().map(|m| **m).collect();
            let Some(fg) = f.mor(&g) else { return };
            let composite: Option<Vec<MorId>> = g
                .iter()
                .zip(t.iter())
                .zip(&f.dom)
                .map(|((g, t), c)| c.compose(*g, *t).ok())
                .collect();
            let Some(composite) = composite else { return };
            let Some(fcomposite) = f.mor(&composite) else { return };
            let direct = f.cod.compose(fg, ft);
            comp.instance(direct == Ok(fcomposite), || {
                (
                    format!(
                        "{:?} after {:?}",
                        g.iter().map(|m| m.0).collect::<Vec<_>>(),
                        t.iter().map(|m| m.0).collect::<Vec<_>>()
                    ),
                    f.cod.morphism_name(fcomposite).to_string(),
                    format!("{direct:?}"),
                )
            });
        });
    }
    comp.finish();

    report
}

/// A natural transformation between functors with the same shape, stored as
/// a component per object tuple (on the intersection of the defined domains).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NatTransformation {
    pub source: Rc<Functor>,
    pub target: Rc<Functor>,
    components: BTreeMap<Vec<ObjId>, MorId>,
}

impl NatTransformation {
    pub fn new(
        source: Rc<Functor>,
        target: Rc<Functor>,
        components: BTreeMap<Vec<ObjId>, MorId>,
    ) -> Result<NatTransformation> {
        if source.arity() != target.arity()
            || !Rc::ptr_eq(&source.cod, &target.cod)
            || !source
                .dom
                .iter()
                .zip(&target.dom)
                .all(|(a, b)| Rc::ptr_eq(a, b))
        {
            return Err(Error::ShapeMismatch(
                "transformation between functors of different shapes".into(),
            ));
        }
        Ok(NatTransformation { source, target, components })
    }

    /// Identity transformation on `f`.
    pub fn identity_on(f: Rc<Functor>) -> NatTransformation {
        let components = f
            .obj_entries()
            .map(|(t, o)| (t.clone(), f.cod.identity_of(o)))
            .collect();
        NatTransformation { source: f.clone(), target: f, components }
    }

    pub fn component(&self, t: &[ObjId]) -> Option<MorId> {
        self.components.get(t).copied()
    }

    pub fn components(&self) -> impl Iterator<Item = (&Vec<ObjId>, MorId)> {
        self.components.iter().map(|(k, v)| (k, *v))
    }

    pub fn cod(&self) -> &Rc<FinCategory> {
        &self.source.cod
    }

    /// Componentwise inverse; errors if any component has none.
    pub fn inverse(&self) -> Result<NatTransformation> {
        let mut components = BTreeMap::new();
        for (t, m) in self.components() {
            components.insert(t.clone(), invert(self.cod(), m)?);
        }
        Ok(NatTransformation {
            source: self.target.clone(),
            target: self.source.clone(),
            components,
        })
    }

    pub fn is_identity_cells(&self) -> bool {
        self.components().all(|(_, m)| self.cod().is_identity(m))
    }

    /// Overwrite one component. Deliberately unchecked: fixtures use this to
    /// plant defects the validators must find.
    pub(crate) fn set_component(&mut self, at: Vec<ObjId>, m: MorId) {
        self.components.insert(at, m);
    }
}

/// Vertical composite `second . first` (first, then second), componentwise.
pub fn vcomp(second: &NatTransformation, first: &NatTransformation) -> Result<NatTransformation> {
    if *first.target != *second.source {
        return Err(Error::ShapeMismatch(
            "vcomp endpoints do not meet: target of first != source of second".into(),
        ));
    }
    let mut components = BTreeMap::new();
    for (t, f) in first.components() {
        if let Some(s) = second.component(t) {
            components.insert(t.clone(), first.cod().compose(s, f)?);
        }
    }
    Ok(NatTransformation {
        source: first.source.clone(),
        target: second.target.clone(),
        components,
    })
}

/// Apply a functor to a tuple of transformations, one per slot:
/// the whiskering `f (tau_1, .., tau_n)` from `f (sources)` to `f (targets)`.
/// Components: `f`'s morphism table applied to the component tuple.
pub fn whisker(f: &Functor, taus: &[&NatTransformation]) -> Result<NatTransformation> {
    if taus.len() != f.arity() {
        return Err(Error::ShapeMismatch(format!(
            "whiskering arity-{} functor with {} transformations",
            f.arity(),
            taus.len()
        )));
    }
    let sources: Vec<&Functor> = taus.iter().map(|t| t.source.as_ref()).collect();
    let targets: Vec<&Functor> = taus.iter().map(|t| t.target.as_ref()).collect();
    let source = compose_functors(f, &sources)?;
    let target = compose_functors(f, &targets)?;

    let mut components = BTreeMap::new();
    let key_lists: Vec<Vec<&Vec<ObjId>>> = taus
        .iter()
        .map(|t| t.components.keys().collect())
        .collect();
    for_each_choice(&key_lists, &mut |choice| {
        let mut comps = Vec::with_capacity(taus.len());
        for (tau, key) in taus.iter().zip(choice) {
            match tau.component(key) {
                Some(c) => comps.push(c),
                None => return,
            }
        }
        if let Some(m) = f.mor(&comps) {
            let flat: Vec<ObjId> = choice.iter().flat_map(|k| k.iter().copied()).collect();
            components.insert(flat, m);
        }
    });

    Ok(NatTransformation { source: Rc::new(source), target: Rc::new(target), components })
}

/// Reindex a transformation along functors, one per slot: the whiskering
/// `tau (g_1, .., g_n)` with components `tau` at the images of `g_i`.
pub fn precompose(tau: &NatTransformation, gs: &[&Functor]) -> Result<NatTransformation> {
    let source = compose_functors(&tau.source, gs)?;
    let target = compose_functors(&tau.target, gs)?;
    let mut components = BTreeMap::new();
    let key_lists: Vec<Vec<&Vec<ObjId>>> = gs.iter().map(|g| g.obj_map.keys().collect()).collect();
    for_each_choice(&key_lists, &mut |choice| {
        let mut mid = Vec::with_capacity(gs.len());
        for (g, key) in gs.iter().zip(choice) {
            match g.obj(key) {
                Some(o) => mid.push(o),
                None => return,
            }
        }
        if let Some(c) = tau.component(&mid) {
            let flat: Vec<ObjId> = choice.iter().flat_map(|k| k.iter().copied()).collect();
            components.insert(flat, c);
        }
    });
    Ok(NatTransformation { source: Rc::new(source), target: Rc::new(target), components })
}

/// Sweep naturality and typing for `tau`: every component's endpoints match
/// the two functors, a component exists wherever both functors are defined,
/// and each defined morphism tuple's square commutes.
pub fn check_naturality(tau: &NatTransformation) -> CheckReport {
    let mut report = CheckReport::new("check_naturality");
    let f = &tau.source;
    let g = &tau.target;

    let mut typing = Sweep::new(&mut report, "check_naturality.components");
    for (t, fo) in f.obj_entries() {
        let Some(go) = g.obj(t) else { continue };
        let c = tau.component(t);
        let ok = matches!(c, Some(m) if f.cod.src(m) == fo && f.cod.dst(m) == go);
        typing.instance(ok, || {
            (
                format!("at {:?}", t.iter().map(|o| o.0).collect::<Vec<_>>()),
                format!(
                    "component {} -> {}",
                    f.cod.object_name(fo),
                    f.cod.object_name(go)
                ),
                match c {
                    Some(m) => f.cod.render_mor(m),
                    None => "missing".into(),
                },
            )
        });
    }
    typing.finish();

    let mut nat = Sweep::new(&mut report, "check_naturality.squares");
    for (t, fm) in f.mor_entries() {
        let Some(gm) = g.mor(t) else { continue };
        let src = f.tuple_src(t);
        let dst = f.tuple_dst(t);
        let (Some(cs), Some(cd)) = (tau.component(&src), tau.component(&dst)) else {
            continue; // typing sweep reported the hole
        };
        let lhs = f.cod.compose(gm, cs);
        let rhs = f.cod.compose(cd, fm);
        nat.instance(lhs.is_ok() && lhs == rhs, || {
            (
                format!("square at {:?}", t.iter().map(|m| m.0).collect::<Vec<_>>()),
                format!("{rhs:?}"),
                format!("{lhs:?}"),
            )
        });
    }
    nat.finish();

    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn indiscrete_category_checks() {
        let cat = fixtures::indiscrete_category(&["a", "b", "c"]);
        assert_eq!(cat.object_count(), 3);
        assert_eq!(cat.morphism_count(), 9);
        let r = check_category(&cat);
        assert!(r.passed(), "{:?}", r.failures);
    }

    #[test]
    fn corrupted_composite_is_localized() {
        let mut b = FinCategory::builder("bad");
        b.object("a").object("b");
        b.morphism("ia", "a", "a").morphism("ib", "b", "b").morphism("f", "a", "b");
        b.identity("a", "ia").identity("b", "ib");
        b.compose("ia", "ia", "ia").compose("ib", "ib", "ib");
        b.compose("f", "ia", "f").compose("ib", "f", "f");
        let cat = b.finish().unwrap();
        assert!(check_category(&cat).passed());

        // Now break the right identity law: f . ia = ... nothing, by
        // rebuilding without that entry.
        let mut b = FinCategory::builder("bad");
        b.object("a").object("b");
        b.morphism("ia", "a", "a").morphism("ib", "b", "b").morphism("f", "a", "b");
        b.identity("a", "ia").identity("b", "ib");
        b.compose("ia", "ia", "ia").compose("ib", "ib", "ib");
        b.compose("ib", "f", "f");
        let cat = b.finish().unwrap();
        let r = check_category(&cat);
        assert!(!r.passed());
        assert!(r.failures.iter().any(|f| f.instance.contains("f:a->b . ia")
            || f.instance.contains("f . ia")
            || f.instance.contains("f:a->b . id")
            || f.instance.contains(". id")));
    }

    #[test]
    fn iso_search() {
        let cat = fixtures::indiscrete_category(&["a", "b"]);
        for m in cat.morphisms() {
            assert!(is_iso(&cat, m), "{}", cat.morphism_name(m));
        }
        // Poset a <= b: the one non-endo morphism has no inverse.
        let mut b = FinCategory::builder("poset");
        b.object("a").object("b");
        b.morphism("ia", "a", "a").morphism("ib", "b", "b").morphism("le", "a", "b");
        b.identity("a", "ia").identity("b", "ib");
        b.compose("ia", "ia", "ia").compose("ib", "ib", "ib");
        b.compose("le", "ia", "le").compose("ib", "le", "le");
        let cat = b.finish().unwrap();
        assert!(check_category(&cat).passed());
        let le = cat.lookup_morphism("le").unwrap();
        assert!(!is_iso(&cat, le));
        assert!(matches!(invert(&cat, le), Err(Error::NotInvertible(_))));
        // An idempotent non-identity endomorphism is not invertible either.
        let mut b = FinCategory::builder("idem");
        b.object("a");
        b.morphism("ia", "a", "a").morphism("e", "a", "a");
        b.identity("a", "ia");
        b.compose("ia", "ia", "ia").compose("ia", "e", "e");
        b.compose("e", "ia", "e").compose("e", "e", "e");
        let cat = b.finish().unwrap();
        assert!(check_category(&cat).passed());
        assert!(!is_iso(&cat, cat.lookup_morphism("e").unwrap()));
    }

    #[test]
    fn identity_functor_and_transformation_pass() {
        let cat = fixtures::indiscrete_category(&["a", "b", "c"]);
        let f = Functor::identity(&cat);
        assert!(check_functor(&f).passed());
        assert!(f.is_total());
        let tau = NatTransformation::identity_on(Rc::new(f));
        assert!(check_naturality(&tau).passed());
        assert!(tau.is_identity_cells());
    }

    #[test]
    fn corrupted_functor_is_localized() {
        let cat = fixtures::z2_category();
        let id = Functor::identity(&cat);
        // Redirect s to e: breaks composition (s.s = e but e.e = e is fine;
        // identity preservation holds; s after s maps to e.e = e, while the
        // composite e maps to e: that still holds; instead break identities).
        let mut obj_map = BTreeMap::new();
        for (t, o) in id.obj_entries() {
            obj_map.insert(t.clone(), o);
        }
        let mut mor_map = BTreeMap::new();
        for (t, _) in id.mor_entries() {
            mor_map.insert(t.clone(), MorId(1)); // everything to s
        }
        let f = Functor::new(id.dom.clone(), cat.clone(), obj_map, mor_map).unwrap();
        let r = check_functor(&f);
        assert!(!r.passed());
        assert!(r.lines.iter().any(|l| l.check == "check_functor.identities" && l.failures > 0));
    }

    #[test]
    fn vcomp_laws_on_fixture() {
        // Parallel functors A -> A picked from the indiscrete fixture's
        // rotation table; every family of components is natural here, so
        // vcomp laws can be checked on arbitrary choices.
        let w = fixtures::indiscrete_weak(&["a", "b", "c"], &fixtures::terminal_operad(2));
        let cat = w.cat().clone();
        let h1 = w.action(w.operad().identity()).clone();
        let idf = Rc::new(Functor::identity(&cat));
        let iota = w.iota().clone();
        let id_tau = NatTransformation::identity_on(idf.clone());
        // identity laws
        let left = vcomp(&iota, &id_tau).unwrap();
        assert_eq!(left, iota);
        let right = vcomp(&NatTransformation::identity_on(h1.clone()), &iota).unwrap();
        assert_eq!(right, iota);
        // inverse laws
        let inv = iota.inverse().unwrap();
        let round = vcomp(&inv, &iota).unwrap();
        assert!(round.is_identity_cells());
        let round = vcomp(&iota, &inv).unwrap();
        assert!(round.is_identity_cells());
    }

    #[test]
    fn whisker_with_identities_is_identity() {
        let w = fixtures::indiscrete_weak(&["a", "b", "c"], &fixtures::terminal_operad(2));
        let p = w.operad();
        let t2 = p.lookup("t2").unwrap();
        let h2 = w.action(t2).clone();
        let h1 = w.action(p.identity()).clone();
        let id1 = NatTransformation::identity_on(h1.clone());
        let wh = whisker(&h2, &[&id1, &id1]).unwrap();
        assert!(wh.is_identity_cells());
        assert!(check_naturality(&wh).passed());
        // Reindexing an identity stays an identity.
        let re = precompose(&wh, &[&h1, &h1]).unwrap();
        assert!(re.is_identity_cells());
    }

    #[test]
    fn empty_product_functor() {
        let cat = fixtures::z2_category();
        let mut obj_map = BTreeMap::new();
        obj_map.insert(Vec::new(), ObjId(0));
        let mut mor_map = BTreeMap::new();
        mor_map.insert(Vec::new(), MorId(0));
        let f = Functor::new(vec![], cat, obj_map, mor_map).unwrap();
        assert!(check_functor(&f).passed());
        assert!(f.is_total());
    }
}

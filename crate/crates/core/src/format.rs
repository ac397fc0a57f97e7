//! Text formats for categories, weak actions and weak maps.
//!
//! All three formats are line based: `#` starts a comment, tokens are
//! whitespace separated, and round parentheses count as their own tokens
//! even when written flush against a name. Names are single tokens and
//! may contain any other punctuation, which keeps the generated names of
//! strictified models (`t2[a.b]`) intact.
//!
//! A weak action file carries its operad inline, so one file is a
//! complete input:
//!
//! ```text
//! operad terminal
//! arity_cap 2
//! elem t0 : 0
//! elem t1 : 1
//! elem t2 : 2
//! identity t1
//! comp t2 ( t1 t1 ) = t2
//!
//! category walk
//! obj a b
//! mor f : a -> b
//! id a = ida
//! comp f . ida = f
//!
//! act t2 : obj ( a b ) = a
//! act t2 : mor ( f f ) = ida
//! gamma t2 ( t1 t2 ) @ ( a a b ) = f
//! iota @ a = ida
//! ```
//!
//! The two `comp` forms never clash: an operad composite has `(` after
//! the head element, a categorical one has `.` after the first arrow.
//! Omitted `gamma` and `iota` lines mean identity components, so a strict
//! action prints without any and every printed file re-parses to the same
//! value. A weak map file is relative to two such files:
//!
//! ```text
//! obj a = x       # object clause
//! mor f = m       # arrow clause
//! psi t2 @ ( a b ) = m
//! ```
//!
//! with omitted `psi` components again defaulting to identities.

use std::collections::BTreeMap;
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::fincat::{FinCategory, Functor, MorId, ObjId};
use crate::operad::{parse_operad, tokens_of, OpId};
use crate::weak::{WeakPCategory, WeakPFunctor};

fn perr(line: usize, msg: String) -> Error {
    Error::Parse { line, col: 1, msg }
}

// Category statements with their source lines, gathered before building
// so that name errors point at the offending line.
#[derive(Default)]
struct CatDraft {
    name: Option<String>,
    objs: Vec<(String, usize)>,
    mors: Vec<(String, String, String, usize)>,
    ids: Vec<(String, String, usize)>,
    comps: Vec<(String, String, String, usize)>,
}

impl CatDraft {
    fn take(&mut self, toks: &[String], line: usize) -> Result<()> {
        match toks[0].as_str() {
            "category" if toks.len() == 2 => self.name = Some(toks[1].clone()),
            "obj" => {
                for t in &toks[1..] {
                    self.objs.push((t.clone(), line));
                }
            }
            "mor" if toks.len() == 6 && toks[2] == ":" && toks[4] == "->" => {
                self.mors
                    .push((toks[1].clone(), toks[3].clone(), toks[5].clone(), line));
            }
            "id" if toks.len() == 4 && toks[2] == "=" => {
                self.ids.push((toks[1].clone(), toks[3].clone(), line));
            }
            "comp" if toks.len() == 6 && toks[2] == "." && toks[4] == "=" => {
                self.comps
                    .push((toks[1].clone(), toks[3].clone(), toks[5].clone(), line));
            }
            other => return Err(perr(line, format!("malformed {other} line"))),
        }
        Ok(())
    }

    fn finish(self) -> Result<Rc<FinCategory>> {
        let mut b = FinCategory::builder(self.name.unwrap_or_else(|| "category".into()));
        let mut objs: Vec<&str> = Vec::new();
        let mut mors: Vec<&str> = Vec::new();
        for (o, line) in &self.objs {
            if objs.contains(&o.as_str()) {
                return Err(perr(*line, format!("duplicate object {o}")));
            }
            objs.push(o);
            b.object(o);
        }
        let known = |pool: &[&str], n: &str, what: &str, line: usize| -> Result<()> {
            if pool.contains(&n) {
                Ok(())
            } else {
                Err(perr(line, format!("unknown {what} {n}")))
            }
        };
        for (m, s, d, line) in &self.mors {
            if mors.contains(&m.as_str()) {
                return Err(perr(*line, format!("duplicate morphism {m}")));
            }
            known(&objs, s, "object", *line)?;
            known(&objs, d, "object", *line)?;
            mors.push(m);
            b.morphism(m, s, d);
        }
        for (o, m, line) in &self.ids {
            known(&objs, o, "object", *line)?;
            known(&mors, m, "morphism", *line)?;
            b.identity(o, m);
        }
        for (g, f, h, line) in &self.comps {
            known(&mors, g, "morphism", *line)?;
            known(&mors, f, "morphism", *line)?;
            known(&mors, h, "morphism", *line)?;
            b.compose(g, f, h);
        }
        b.finish()
    }
}

/// Parse a standalone `.cat` document.
pub fn parse_category(text: &str) -> Result<Rc<FinCategory>> {
    let mut draft = CatDraft::default();
    for (lineno, raw) in text.lines().enumerate() {
        let toks = tokens_of(raw);
        if toks.is_empty() {
            continue;
        }
        draft.take(&toks, lineno + 1)?;
    }
    draft.finish()
}

/// Canonical `.cat` text; also the category block of a weak action file.
pub fn print_category(cat: &FinCategory) -> String {
    let mut out = String::new();
    out.push_str(&format!("category {}\n", cat.name()));
    if cat.object_count() > 0 {
        let names: Vec<&str> = cat.objects().map(|o| cat.object_name(o)).collect();
        out.push_str(&format!("obj {}\n", names.join(" ")));
    }
    for m in cat.morphisms() {
        out.push_str(&format!(
            "mor {} : {} -> {}\n",
            cat.morphism_name(m),
            cat.object_name(cat.src(m)),
            cat.object_name(cat.dst(m))
        ));
    }
    for o in cat.objects() {
        out.push_str(&format!(
            "id {} = {}\n",
            cat.object_name(o),
            cat.morphism_name(cat.identity_of(o))
        ));
    }
    for g in cat.morphisms() {
        for f in cat.morphisms() {
            if cat.dst(f) != cat.src(g) {
                continue;
            }
            if let Ok(h) = cat.compose(g, f) {
                out.push_str(&format!(
                    "comp {} . {} = {}\n",
                    cat.morphism_name(g),
                    cat.morphism_name(f),
                    cat.morphism_name(h)
                ));
            }
        }
    }
    out
}

// `( a b ) = v` tail of act/gamma lines: the names inside the parens and
// the value after the equals sign.
fn paren_group<'a>(toks: &'a [String], at: usize, line: usize) -> Result<(Vec<&'a str>, usize)> {
    if toks.get(at).map(String::as_str) != Some("(") {
        return Err(perr(line, "expected (".into()));
    }
    let close = toks[at..]
        .iter()
        .position(|t| t == ")")
        .ok_or_else(|| perr(line, "missing )".into()))?
        + at;
    let names = toks[at + 1..close].iter().map(String::as_str).collect();
    Ok((names, close + 1))
}

struct ActLine {
    p: String,
    is_obj: bool,
    tuple: Vec<String>,
    value: String,
    line: usize,
}

struct GammaLine {
    p: String,
    args: Vec<String>,
    tuple: Vec<String>,
    value: String,
    line: usize,
}

/// Parse a `.wpc` document: an operad block, a category block, action
/// tables and optional coherence cells, in any line order.
pub fn parse_weak(text: &str) -> Result<WeakPCategory> {
    let mut operad_lines: Vec<(usize, &str)> = Vec::new();
    let mut draft = CatDraft::default();
    let mut acts: Vec<ActLine> = Vec::new();
    let mut gammas: Vec<GammaLine> = Vec::new();
    let mut iotas: Vec<(String, String, usize)> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let toks = tokens_of(raw);
        if toks.is_empty() {
            continue;
        }
        match toks[0].as_str() {
            "operad" | "arity_cap" | "elem" | "identity" => operad_lines.push((line, raw)),
            "comp" => {
                match toks.get(2).map(String::as_str) {
                    Some("(") => operad_lines.push((line, raw)),
                    Some(".") => draft.take(&toks, line)?,
                    _ => return Err(perr(line, "malformed comp line".into())),
                };
            }
            "category" | "obj" | "mor" | "id" => draft.take(&toks, line)?,
            "act" => {
                // act p : obj ( a b ) = c
                let kind = toks.get(3).map(String::as_str);
                if toks.len() < 7
                    || toks[2] != ":"
                    || (kind != Some("obj") && kind != Some("mor"))
                {
                    return Err(perr(line, "malformed act line".into()));
                }
                let (tuple, after) = paren_group(&toks, 4, line)?;
                if toks.len() != after + 2 || toks[after] != "=" {
                    return Err(perr(line, "malformed act line".into()));
                }
                acts.push(ActLine {
                    p: toks[1].clone(),
                    is_obj: kind == Some("obj"),
                    tuple: tuple.into_iter().map(String::from).collect(),
                    value: toks[after + 1].clone(),
                    line,
                });
            }
            "gamma" => {
                // gamma p ( p1 .. pn ) @ ( a .. ) = m
                if toks.len() < 9 {
                    return Err(perr(line, "malformed gamma line".into()));
                }
                let (args, after) = paren_group(&toks, 2, line)?;
                if toks.get(after).map(String::as_str) != Some("@") {
                    return Err(perr(line, "expected @ in gamma line".into()));
                }
                let (tuple, end) = paren_group(&toks, after + 1, line)?;
                if toks.len() != end + 2 || toks[end] != "=" {
                    return Err(perr(line, "malformed gamma line".into()));
                }
                gammas.push(GammaLine {
                    p: toks[1].clone(),
                    args: args.into_iter().map(String::from).collect(),
                    tuple: tuple.into_iter().map(String::from).collect(),
                    value: toks[end + 1].clone(),
                    line,
                });
            }
            "iota" if toks.len() == 5 && toks[1] == "@" && toks[3] == "=" => {
                iotas.push((toks[2].clone(), toks[4].clone(), line));
            }
            other => return Err(perr(line, format!("unrecognized line starting with {other}"))),
        }
    }

    // The operad block re-uses the standalone parser; its errors are
    // reported against this document's line numbers.
    let joined: String = operad_lines
        .iter()
        .map(|(_, raw)| *raw)
        .collect::<Vec<_>>()
        .join("\n");
    let operad = parse_operad(&joined).map_err(|e| match e {
        Error::Parse { line, msg, .. } => {
            let mapped = operad_lines.get(line - 1).map_or(1, |(l, _)| *l);
            perr(mapped, msg)
        }
        other => other,
    })?;
    let operad = Rc::new(operad);
    let cat = draft.finish()?;

    let lookup_op = |n: &str, line: usize| {
        operad
            .lookup(n)
            .ok_or_else(|| perr(line, format!("unknown operad element {n}")))
    };
    let lookup_obj = |n: &str, line: usize| {
        cat.lookup_object(n)
            .ok_or_else(|| perr(line, format!("unknown object {n}")))
    };
    let lookup_mor = |n: &str, line: usize| {
        cat.lookup_morphism(n)
            .ok_or_else(|| perr(line, format!("unknown morphism {n}")))
    };

    let mut obj_tables: BTreeMap<OpId, BTreeMap<Vec<ObjId>, ObjId>> = BTreeMap::new();
    let mut mor_tables: BTreeMap<OpId, BTreeMap<Vec<MorId>, MorId>> = BTreeMap::new();
    for a in &acts {
        let p = lookup_op(&a.p, a.line)?;
        if a.tuple.len() != operad.arity(p) {
            return Err(perr(
                a.line,
                format!(
                    "{} arguments for {} of arity {}",
                    a.tuple.len(),
                    a.p,
                    operad.arity(p)
                ),
            ));
        }
        if a.is_obj {
            let key: Vec<ObjId> = a
                .tuple
                .iter()
                .map(|n| lookup_obj(n, a.line))
                .collect::<Result<_>>()?;
            let v = lookup_obj(&a.value, a.line)?;
            if let Some(old) = obj_tables.entry(p).or_default().insert(key, v) {
                if old != v {
                    return Err(perr(a.line, "conflicting act entry".into()));
                }
            }
        } else {
            let key: Vec<MorId> = a
                .tuple
                .iter()
                .map(|n| lookup_mor(n, a.line))
                .collect::<Result<_>>()?;
            let v = lookup_mor(&a.value, a.line)?;
            if let Some(old) = mor_tables.entry(p).or_default().insert(key, v) {
                if old != v {
                    return Err(perr(a.line, "conflicting act entry".into()));
                }
            }
        }
    }
    let mut action: BTreeMap<OpId, Rc<Functor>> = BTreeMap::new();
    for p in operad.elements() {
        let f = Functor::new(
            vec![cat.clone(); operad.arity(p)],
            cat.clone(),
            obj_tables.remove(&p).unwrap_or_default(),
            mor_tables.remove(&p).unwrap_or_default(),
        )?;
        action.insert(p, Rc::new(f));
    }

    let mut gamma_over: BTreeMap<(OpId, Vec<OpId>), BTreeMap<Vec<ObjId>, MorId>> = BTreeMap::new();
    for g in &gammas {
        let p = lookup_op(&g.p, g.line)?;
        let args: Vec<OpId> = g
            .args
            .iter()
            .map(|n| lookup_op(n, g.line))
            .collect::<Result<_>>()?;
        let tuple: Vec<ObjId> = g
            .tuple
            .iter()
            .map(|n| lookup_obj(n, g.line))
            .collect::<Result<_>>()?;
        let v = lookup_mor(&g.value, g.line)?;
        if let Some(old) = gamma_over.entry((p, args)).or_default().insert(tuple, v) {
            if old != v {
                return Err(perr(g.line, "conflicting gamma entry".into()));
            }
        }
    }
    let mut iota_over: BTreeMap<Vec<ObjId>, MorId> = BTreeMap::new();
    for (o, m, line) in &iotas {
        let key = vec![lookup_obj(o, *line)?];
        let v = lookup_mor(m, *line)?;
        if let Some(old) = iota_over.insert(key, v) {
            if old != v {
                return Err(perr(*line, "conflicting iota entry".into()));
            }
        }
    }

    WeakPCategory::from_parts(operad, cat, action, &gamma_over, &iota_over)
}

/// Canonical `.wpc` text. Identity coherence components are omitted, so a
/// strict action prints with no `gamma` or `iota` lines at all, and
/// parsing the output reproduces the value.
pub fn print_weak(w: &WeakPCategory) -> String {
    let operad = w.operad();
    let cat = w.cat();
    let mut out = format!("{operad}");
    out.push('\n');
    out.push_str(&print_category(cat));
    out.push('\n');
    for (p, h) in w.actions() {
        let name = operad.op_name(p);
        for (t, o) in h.obj_entries() {
            let parts: Vec<&str> = t.iter().map(|x| cat.object_name(*x)).collect();
            out.push_str(&format!(
                "act {} : obj ( {} ) = {}\n",
                name,
                parts.join(" "),
                cat.object_name(o)
            ));
        }
        for (t, m) in h.mor_entries() {
            let parts: Vec<&str> = t.iter().map(|x| cat.morphism_name(*x)).collect();
            out.push_str(&format!(
                "act {} : mor ( {} ) = {}\n",
                name,
                parts.join(" "),
                cat.morphism_name(m)
            ));
        }
    }
    for ((p, args), cell) in w.gammas() {
        let args: Vec<&str> = args.iter().map(|q| operad.op_name(*q)).collect();
        for (t, m) in cell.components() {
            if cat.is_identity(m) {
                continue;
            }
            let parts: Vec<&str> = t.iter().map(|x| cat.object_name(*x)).collect();
            out.push_str(&format!(
                "gamma {} ( {} ) @ ( {} ) = {}\n",
                operad.op_name(*p),
                args.join(" "),
                parts.join(" "),
                cat.morphism_name(m)
            ));
        }
    }
    for (t, m) in w.iota().components() {
        if cat.is_identity(m) {
            continue;
        }
        out.push_str(&format!(
            "iota @ {} = {}\n",
            cat.object_name(t[0]),
            cat.morphism_name(m)
        ));
    }
    out
}

/// Parse a `.fun` document describing a weak map between two already
/// parsed actions over the same operad.
pub fn parse_functor(
    text: &str,
    source: &Rc<WeakPCategory>,
    target: &Rc<WeakPCategory>,
) -> Result<WeakPFunctor> {
    let operad = source.operad().clone();
    let a = source.cat().clone();
    let b = target.cat().clone();

    let mut obj_map: BTreeMap<Vec<ObjId>, ObjId> = BTreeMap::new();
    let mut mor_map: BTreeMap<Vec<MorId>, MorId> = BTreeMap::new();
    let mut psi: BTreeMap<OpId, BTreeMap<Vec<ObjId>, MorId>> = BTreeMap::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let toks = tokens_of(raw);
        if toks.is_empty() {
            continue;
        }
        let lookup = |n: &str, what: &str, found: Option<u32>| {
            found.ok_or_else(|| perr(line, format!("unknown {what} {n}")))
        };
        match toks[0].as_str() {
            "obj" if toks.len() == 4 && toks[2] == "=" => {
                let x = ObjId(lookup(&toks[1], "source object", a.lookup_object(&toks[1]).map(|o| o.0))?);
                let y = ObjId(lookup(&toks[3], "target object", b.lookup_object(&toks[3]).map(|o| o.0))?);
                if let Some(old) = obj_map.insert(vec![x], y) {
                    if old != y {
                        return Err(perr(line, "conflicting obj entry".into()));
                    }
                }
            }
            "mor" if toks.len() == 4 && toks[2] == "=" => {
                let x = MorId(lookup(&toks[1], "source morphism", a.lookup_morphism(&toks[1]).map(|m| m.0))?);
                let y = MorId(lookup(&toks[3], "target morphism", b.lookup_morphism(&toks[3]).map(|m| m.0))?);
                if let Some(old) = mor_map.insert(vec![x], y) {
                    if old != y {
                        return Err(perr(line, "conflicting mor entry".into()));
                    }
                }
            }
            "psi" => {
                // psi p @ ( a b ) = m
                if toks.len() < 7 || toks[2] != "@" {
                    return Err(perr(line, "malformed psi line".into()));
                }
                let p = operad
                    .lookup(&toks[1])
                    .ok_or_else(|| perr(line, format!("unknown operad element {}", toks[1])))?;
                let (tuple, after) = paren_group(&toks, 3, line)?;
                if toks.len() != after + 2 || toks[after] != "=" {
                    return Err(perr(line, "malformed psi line".into()));
                }
                let key: Vec<ObjId> = tuple
                    .iter()
                    .map(|n| {
                        a.lookup_object(n)
                            .ok_or_else(|| perr(line, format!("unknown object {n}")))
                    })
                    .collect::<Result<_>>()?;
                let v = b
                    .lookup_morphism(&toks[after + 1])
                    .ok_or_else(|| perr(line, format!("unknown morphism {}", toks[after + 1])))?;
                if let Some(old) = psi.entry(p).or_default().insert(key, v) {
                    if old != v {
                        return Err(perr(line, "conflicting psi entry".into()));
                    }
                }
            }
            other => return Err(perr(line, format!("unrecognized line starting with {other}"))),
        }
    }

    let g = Functor::new(vec![a], b, obj_map, mor_map)?;
    WeakPFunctor::new(source.clone(), target.clone(), g, &psi)
}

/// Canonical `.fun` text; identity comparison components are omitted.
pub fn print_functor(f: &WeakPFunctor) -> String {
    let a = f.source().cat().clone();
    let b = f.target().cat().clone();
    let operad = f.source().operad().clone();
    let mut out = String::new();
    for (t, o) in f.underlying().obj_entries() {
        out.push_str(&format!(
            "obj {} = {}\n",
            a.object_name(t[0]),
            b.object_name(o)
        ));
    }
    for (t, m) in f.underlying().mor_entries() {
        out.push_str(&format!(
            "mor {} = {}\n",
            a.morphism_name(t[0]),
            b.morphism_name(m)
        ));
    }
    for p in operad.elements() {
        for (t, m) in f.psi(p).components() {
            if b.is_identity(m) {
                continue;
            }
            let parts: Vec<&str> = t.iter().map(|x| a.object_name(*x)).collect();
            out.push_str(&format!(
                "psi {} @ ( {} ) = {}\n",
                operad.op_name(p),
                parts.join(" "),
                b.morphism_name(m)
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::check_category;
    use crate::fixtures;
    use crate::strictify::{strictify, unit_map};
    use crate::weak::{validate_weak_p_category, validate_weak_p_functor};

    #[test]
    fn category_round_trip() {
        let op = fixtures::terminal_operad(2);
        let w = fixtures::z2_strict_weak(&op);
        let text = print_category(w.cat());
        let parsed = parse_category(&text).unwrap();
        assert!(check_category(&parsed).passed());
        assert_eq!(print_category(&parsed), text);
        assert_eq!(parsed.name(), w.cat().name());
        assert_eq!(parsed.object_count(), w.cat().object_count());
        assert_eq!(parsed.morphism_count(), w.cat().morphism_count());
    }

    #[test]
    fn category_parse_errors_name_the_line() {
        let bad = "category c\nobj a\nmor f : a -> nowhere\n";
        match parse_category(bad) {
            Err(crate::error::Error::Parse { line, msg, .. }) => {
                assert_eq!(line, 3);
                assert!(msg.contains("nowhere"));
            }
            other => panic!("expected a parse error, got {other:?}"),
        }
        let dup = "category c\nobj a a\n";
        assert!(matches!(
            parse_category(dup),
            Err(crate::error::Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn strict_action_prints_without_cells_and_round_trips() {
        let op = fixtures::terminal_operad(2);
        let w = fixtures::z2_strict_weak(&op);
        let text = print_weak(&w);
        assert!(!text.contains("gamma"));
        assert!(!text.contains("iota"));
        let parsed = parse_weak(&text).unwrap();
        assert_eq!(print_weak(&parsed), text);
        assert!(validate_weak_p_category(&Rc::new(parsed), 3).passed());
    }

    #[test]
    fn weak_cells_survive_the_round_trip() {
        let op = fixtures::terminal_operad(2);
        let w = fixtures::indiscrete_weak(&["a", "b"], &op);
        let text = print_weak(&w);
        // the rotated unit forces explicit iota lines
        assert!(text.contains("iota @"));
        let parsed = parse_weak(&text).unwrap();
        assert_eq!(print_weak(&parsed), text);
        for ((p, args), cell) in w.gammas() {
            let other = parsed.gamma(*p, args).unwrap();
            for (t, m) in cell.components() {
                assert_eq!(other.component(t), Some(m));
            }
        }
        for (t, m) in w.iota().components() {
            assert_eq!(parsed.iota().component(t), Some(m));
        }
        assert!(validate_weak_p_category(&Rc::new(parsed), 3).passed());
    }

    #[test]
    fn strictified_output_reingests() {
        let op = fixtures::terminal_operad(2);
        let w = Rc::new(fixtures::z2_strict_weak(&op));
        let s = strictify(&w).unwrap();
        let text = print_weak(s.strict());
        // generated names carry brackets and dots and must survive
        assert!(text.contains("t2[o.o]"));
        let parsed = parse_weak(&text).unwrap();
        assert_eq!(print_weak(&parsed), text);
        let t2 = parsed.operad().lookup("t2").unwrap();
        let x = parsed.cat().lookup_object("t2[o.o]").unwrap();
        assert_eq!(
            parsed.action(t2).obj(&[x, x]),
            s.strict().action(t2).obj(&[x, x])
        );
        assert!(validate_weak_p_category(&Rc::new(parsed), 3).passed());
    }

    #[test]
    fn functor_round_trip() {
        let op = fixtures::terminal_operad(2);
        let w = Rc::new(fixtures::z2_strict_weak(&op));
        let s = strictify(&w).unwrap();
        let fp = unit_map(&s).unwrap();
        let text = print_functor(&fp);
        // comparison cells of the unit map connect distinct pairs, so
        // they are not identities and must be printed
        assert!(text.contains("psi"));
        let parsed = parse_functor(&text, &w, s.strict()).unwrap();
        assert_eq!(print_functor(&parsed), text);
        assert_eq!(parsed.underlying().as_ref(), fp.underlying().as_ref());
        for p in op.elements() {
            for (t, m) in fp.psi(p).components() {
                assert_eq!(parsed.psi(p).component(t), Some(m));
            }
        }
        assert!(validate_weak_p_functor(&parsed).passed());
    }

    #[test]
    fn functor_parse_errors_name_the_line() {
        let op = fixtures::terminal_operad(2);
        let w = Rc::new(fixtures::z2_strict_weak(&op));
        let s = strictify(&w).unwrap();
        let bad = "obj o = t1[o]\npsi t9 @ ( o o ) = e\n";
        match parse_functor(bad, &w, s.strict()) {
            Err(crate::error::Error::Parse { line, msg, .. }) => {
                assert_eq!(line, 2);
                assert!(msg.contains("t9"));
            }
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn nullary_entries_and_comment_lines_parse() {
        let text = "\
# a one object action over the terminal operad
operad terminal
arity_cap 2
elem t0 : 0
elem t1 : 1
elem t2 : 2
identity t1
comp t1 ( t1 ) = t1
comp t1 ( t0 ) = t0
comp t1 ( t2 ) = t2
comp t0 ( ) = t0
comp t2 ( t1 t1 ) = t2
comp t2 ( t0 t1 ) = t1
comp t2 ( t1 t0 ) = t1
comp t2 ( t0 t0 ) = t0

category point
obj x
mor idx : x -> x
id x = idx
comp idx . idx = idx

act t0 : obj ( ) = x   # flush parens also fine below
act t0 : mor () = idx
act t1 : obj (x) = x
act t1 : mor (idx) = idx
act t2 : obj ( x x ) = x
act t2 : mor ( idx idx ) = idx
";
        let parsed = parse_weak(text).unwrap();
        let t0 = parsed.operad().lookup("t0").unwrap();
        assert_eq!(parsed.action(t0).obj(&[]), parsed.cat().lookup_object("x"));
        assert!(validate_weak_p_category(&Rc::new(parsed), 3).passed());
    }

    #[test]
    fn operad_errors_keep_document_line_numbers() {
        let text = "category c\nobj a\nelem t0 : zero\n";
        match parse_weak(text) {
            Err(crate::error::Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected a parse error, got {other:?}"),
        }
    }
}

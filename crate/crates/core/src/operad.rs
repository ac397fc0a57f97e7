//! Finite tables for plain (planar) operads.
//!
//! A [`TabulatedOperad`] stores every element of every arity up to a cap,
//! one identity element of arity 1, and the full composition table on the
//! in-cap domain: `comp(p, [q1..qn])` is stored exactly when `n` is the
//! arity of `p` and the argument arities sum to at most the cap. Nothing is
//! computed on demand; the laws are checked by sweeping the tables.
//!
//! Composition is planar: arguments are slotted in order, there is no
//! symmetry action anywhere in this crate.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::report::{CheckReport, Sweep};

/// Handle for an operad element. Only meaningful with the operad it came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OpId(pub u32);

#[derive(Debug, Clone, PartialEq, Eq)]
struct OpInfo {
    name: String,
    arity: usize,
}

/// A plain operad given by finite tables, truncated at `arity_cap`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TabulatedOperad {
    name: String,
    arity_cap: usize,
    ops: Vec<OpInfo>,
    by_arity: Vec<Vec<OpId>>,
    identity: OpId,
    comp: BTreeMap<(OpId, Vec<OpId>), OpId>,
}

impl TabulatedOperad {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity_cap(&self) -> usize {
        self.arity_cap
    }

    pub fn identity(&self) -> OpId {
        self.identity
    }

    pub fn arity(&self, p: OpId) -> usize {
        self.ops[p.0 as usize].arity
    }

    pub fn op_name(&self, p: OpId) -> &str {
        &self.ops[p.0 as usize].name
    }

    pub fn lookup(&self, name: &str) -> Option<OpId> {
        self.ops
            .iter()
            .position(|o| o.name == name)
            .map(|i| OpId(i as u32))
    }

    /// All elements, in declaration order.
    pub fn elements(&self) -> impl Iterator<Item = OpId> + '_ {
        (0..self.ops.len()).map(|i| OpId(i as u32))
    }

    pub fn elements_of_arity(&self, n: usize) -> &[OpId] {
        self.by_arity.get(n).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    fn describe(&self, p: OpId) -> String {
        format!("{}:{}", self.op_name(p), self.arity(p))
    }

    /// Render a composition `p(q1,..,qn)` with element names.
    pub fn render_composition(&self, p: OpId, args: &[OpId]) -> String {
        let args: Vec<&str> = args.iter().map(|q| self.op_name(*q)).collect();
        format!("{}({})", self.op_name(p), args.join(","))
    }

    /// Planar composition `p (q1, .., qn)`.
    ///
    /// Errors with `ArityMismatch` when the argument count is not the arity
    /// of `p`, and with `CapExceeded` when the result arity would leave the
    /// cap or the table has no entry (a cap-limited compiled table).
    pub fn compose(&self, p: OpId, args: &[OpId]) -> Result<OpId> {
        if args.len() != self.arity(p) {
            return Err(Error::ArityMismatch(format!(
                "{} applied to {} arguments",
                self.describe(p),
                args.len()
            )));
        }
        let total: usize = args.iter().map(|q| self.arity(*q)).sum();
        if total > self.arity_cap {
            return Err(Error::CapExceeded(format!(
                "{} has arity {} > cap {}",
                self.render_composition(p, args),
                total,
                self.arity_cap
            )));
        }
        match self.comp.get(&(p, args.to_vec())) {
            Some(r) => Ok(*r),
            None => Err(Error::CapExceeded(format!(
                "no table entry for {} (cap-limited table)",
                self.render_composition(p, args)
            ))),
        }
    }

    /// Iterate all argument tuples for a given arity-`n` slot whose arities
    /// sum to at most the cap. Order is deterministic (element order, lexicographic).
    pub fn argument_tuples(&self, n: usize) -> Vec<Vec<OpId>> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(n);
        self.argument_tuples_rec(n, self.arity_cap, &mut cur, &mut out);
        out
    }

    fn argument_tuples_rec(
        &self,
        slots: usize,
        budget: usize,
        cur: &mut Vec<OpId>,
        out: &mut Vec<Vec<OpId>>,
    ) {
        if slots == 0 {
            out.push(cur.clone());
            return;
        }
        for q in self.elements() {
            let a = self.arity(q);
            if a <= budget {
                cur.push(q);
                self.argument_tuples_rec(slots - 1, budget - a, cur, out);
                cur.pop();
            }
        }
    }
}

/// Incremental construction of a [`TabulatedOperad`]. `finish` checks the
/// structural invariants (identifier uniqueness, arity bookkeeping); the
/// operad laws themselves are a separate sweep, [`validate_operad`].
pub struct OperadBuilder {
    name: String,
    arity_cap: usize,
    ops: Vec<OpInfo>,
    identity: Option<OpId>,
    comp: BTreeMap<(OpId, Vec<OpId>), OpId>,
}

impl OperadBuilder {
    pub fn new(name: impl Into<String>, arity_cap: usize) -> Self {
        OperadBuilder {
            name: name.into(),
            arity_cap,
            ops: Vec::new(),
            identity: None,
            comp: BTreeMap::new(),
        }
    }

    pub fn element(&mut self, name: impl Into<String>, arity: usize) -> Result<OpId> {
        let name = name.into();
        if arity > self.arity_cap {
            return Err(Error::CapExceeded(format!(
                "element {name} has arity {arity} > cap {}",
                self.arity_cap
            )));
        }
        if self.ops.iter().any(|o| o.name == name) {
            return Err(Error::BadIdent(format!("duplicate element {name}")));
        }
        self.ops.push(OpInfo { name, arity });
        Ok(OpId(self.ops.len() as u32 - 1))
    }

    pub fn identity(&mut self, p: OpId) -> Result<()> {
        if self.ops[p.0 as usize].arity != 1 {
            return Err(Error::ArityMismatch(format!(
                "identity {} must have arity 1",
                self.ops[p.0 as usize].name
            )));
        }
        self.identity = Some(p);
        Ok(())
    }

    pub fn composite(&mut self, p: OpId, args: &[OpId], result: OpId) -> Result<()> {
        let n = self.ops[p.0 as usize].arity;
        if args.len() != n {
            return Err(Error::ArityMismatch(format!(
                "composite for {} needs {} arguments, got {}",
                self.ops[p.0 as usize].name,
                n,
                args.len()
            )));
        }
        let total: usize = args.iter().map(|q| self.ops[q.0 as usize].arity).sum();
        if total > self.arity_cap {
            return Err(Error::CapExceeded(format!(
                "composite of {} has arity {total} > cap {}",
                self.ops[p.0 as usize].name,
                self.arity_cap
            )));
        }
        if self.ops[result.0 as usize].arity != total {
            return Err(Error::ArityMismatch(format!(
                "composite of {} has arity {total} but result {} has arity {}",
                self.ops[p.0 as usize].name,
                self.ops[result.0 as usize].name,
                self.ops[result.0 as usize].arity
            )));
        }
        self.comp.insert((p, args.to_vec()), result);
        Ok(())
    }

    pub fn finish(self) -> Result<TabulatedOperad> {
        let identity = self
            .identity
            .ok_or_else(|| Error::InvalidInput(format!("operad {}: no identity", self.name)))?;
        let mut by_arity = vec![Vec::new(); self.arity_cap + 1];
        for (i, o) in self.ops.iter().enumerate() {
            by_arity[o.arity].push(OpId(i as u32));
        }
        Ok(TabulatedOperad {
            name: self.name,
            arity_cap: self.arity_cap,
            ops: self.ops,
            by_arity,
            identity,
            comp: self.comp,
        })
    }
}

/// Sweep the operad laws on the whole in-cap domain:
///
/// * the table is total where the cap allows an entry, with the right arity;
/// * `1 (p) = p` and `p (1, .., 1) = p`;
/// * both nestings of a two-level composite agree.
pub fn validate_operad(p: &TabulatedOperad) -> CheckReport {
    let mut report = CheckReport::new(format!("validate_operad({})", p.name()));

    let mut total = Sweep::new(&mut report, "validate_operad.comp_total");
    for q in p.elements() {
        for args in p.argument_tuples(p.arity(q)) {
            let want: usize = args.iter().map(|a| p.arity(*a)).sum();
            let got = p.compose(q, &args);
            total.instance(matches!(got, Ok(r) if p.arity(r) == want), || {
                (
                    p.render_composition(q, &args),
                    format!("entry of arity {want}"),
                    match &got {
                        Ok(r) => format!("arity {}", p.arity(*r)),
                        Err(e) => e.to_string(),
                    },
                )
            });
        }
    }
    total.finish();

    let mut unit = Sweep::new(&mut report, "validate_operad.unit");
    let one = p.identity();
    for q in p.elements() {
        let left = p.compose(one, &[q]);
        unit.instance(left == Ok(q), || {
            (
                p.render_composition(one, &[q]),
                p.op_name(q).to_string(),
                format!("{left:?}"),
            )
        });
        let ones = vec![one; p.arity(q)];
        let right = p.compose(q, &ones);
        unit.instance(right == Ok(q), || {
            (
                p.render_composition(q, &ones),
                p.op_name(q).to_string(),
                format!("{right:?}"),
            )
        });
    }
    unit.finish();

    let mut assoc = Sweep::new(&mut report, "validate_operad.assoc");
    for q in p.elements() {
        for mid in p.argument_tuples(p.arity(q)) {
            let Ok(qm) = p.compose(q, &mid) else { continue };
            // Inner tuples fill the slots of the mid-level arguments; the
            // outer budget is the cap minus nothing (result arity is the sum).
            for inner in p.argument_tuples(p.arity(qm)) {
                // Split `inner` into blocks matching each mid argument.
                let mut blocks: Vec<Vec<OpId>> = Vec::with_capacity(mid.len());
                let mut at = 0;
                for m in &mid {
                    let k = p.arity(*m);
                    blocks.push(inner[at..at + k].to_vec());
                    at += k;
                }
                let lhs = p.compose(qm, &inner);
                let rhs = (|| {
                    let mut collapsed = Vec::with_capacity(mid.len());
                    for (m, b) in mid.iter().zip(&blocks) {
                        collapsed.push(p.compose(*m, b)?);
                    }
                    p.compose(q, &collapsed)
                })();
                assoc.instance(lhs.is_ok() && lhs == rhs, || {
                    (
                        format!(
                            "{} then {}",
                            p.render_composition(q, &mid),
                            p.render_composition(qm, &inner)
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

impl fmt::Display for TabulatedOperad {
    /// Canonical `.operad` text. `parse_operad` of the output reproduces the
    /// value exactly, and printing a parsed canonical file reproduces its bytes.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "operad {}", self.name)?;
        writeln!(f, "arity_cap {}", self.arity_cap)?;
        for o in &self.ops {
            writeln!(f, "elem {} : {}", o.name, o.arity)?;
        }
        writeln!(f, "identity {}", self.ops[self.identity.0 as usize].name)?;
        for ((p, args), r) in &self.comp {
            let args: Vec<&str> = args.iter().map(|q| self.op_name(*q)).collect();
            writeln!(
                f,
                "comp {} ( {} ) = {}",
                self.op_name(*p),
                args.join(" "),
                self.op_name(*r)
            )?;
        }
        Ok(())
    }
}

/// Parse the `.operad` text format.
///
/// Lines, `#` comments, whitespace-separated tokens:
///
/// ```text
/// operad terminal
/// arity_cap 4
/// elem t0 : 0
/// identity t1
/// comp t2 ( t1 t1 ) = t2
/// ```
pub fn parse_operad(text: &str) -> Result<TabulatedOperad> {
    let mut name: Option<String> = None;
    let mut cap: Option<usize> = None;
    let mut elems: Vec<(String, usize, usize)> = Vec::new(); // name, arity, line
    let mut identity: Option<(String, usize)> = None;
    let mut comps: Vec<(String, Vec<String>, String, usize)> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let toks = tokens_of(raw);
        if toks.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line, col: 1, msg };
        match toks[0].as_str() {
            "operad" if toks.len() == 2 => name = Some(toks[1].clone()),
            "arity_cap" if toks.len() == 2 => {
                cap = Some(
                    toks[1]
                        .parse()
                        .map_err(|_| err(format!("bad arity_cap {}", toks[1])))?,
                );
            }
            "elem" if toks.len() == 4 && toks[2] == ":" => {
                let a = toks[3]
                    .parse()
                    .map_err(|_| err(format!("bad arity {}", toks[3])))?;
                elems.push((toks[1].clone(), a, line));
            }
            "identity" if toks.len() == 2 => identity = Some((toks[1].clone(), line)),
            "comp" => {
                // comp p ( q1 .. qn ) = r
                if toks.len() < 6 || toks[2] != "(" {
                    return Err(err("malformed comp line".into()));
                }
                let close = toks
                    .iter()
                    .position(|t| t == ")")
                    .ok_or_else(|| err("missing ) in comp line".into()))?;
                if close + 3 != toks.len() || toks[close + 1] != "=" {
                    return Err(err("malformed comp line".into()));
                }
                comps.push((
                    toks[1].clone(),
                    toks[3..close].to_vec(),
                    toks[close + 2].clone(),
                    line,
                ));
            }
            other => return Err(err(format!("unrecognized line starting with {other}"))),
        }
    }

    let at = |line: usize, msg: String| Error::Parse { line, col: 1, msg };
    let cap = cap.ok_or_else(|| Error::Parse {
        line: 1,
        col: 1,
        msg: "missing arity_cap".into(),
    })?;
    let mut b = OperadBuilder::new(name.unwrap_or_else(|| "operad".into()), cap);
    for (n, a, line) in elems {
        b.element(n, a).map_err(|e| at(line, e.to_string()))?;
    }
    let resolve = |b: &OperadBuilder, n: &str, line: usize| {
        b.ops
            .iter()
            .position(|o| o.name == n)
            .map(|i| OpId(i as u32))
            .ok_or(Error::Parse {
                line,
                col: 1,
                msg: format!("unknown element {n}"),
            })
    };
    let (id_name, id_line) = identity.ok_or(Error::Parse {
        line: 1,
        col: 1,
        msg: "missing identity".into(),
    })?;
    let id = resolve(&b, &id_name, id_line)?;
    b.identity(id).map_err(|e| at(id_line, e.to_string()))?;
    for (pn, args, rn, line) in comps {
        let p = resolve(&b, &pn, line)?;
        let mut a = Vec::with_capacity(args.len());
        for q in &args {
            a.push(resolve(&b, q, line)?);
        }
        let r = resolve(&b, &rn, line)?;
        b.composite(p, &a, r).map_err(|e| at(line, e.to_string()))?;
    }
    b.finish()
}

/// Split a line into whitespace-separated tokens, stripping `#` comments and
/// splitting parentheses off even when written flush against a token.
pub(crate) fn tokens_of(raw: &str) -> Vec<String> {
    let line = match raw.find('#') {
        Some(i) => &raw[..i],
        None => raw,
    };
    let mut out = Vec::new();
    for word in line.split_whitespace() {
        let mut cur = String::new();
        for c in word.chars() {
            if c == '(' || c == ')' {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                out.push(c.to_string());
            } else {
                cur.push(c);
            }
        }
        if !cur.is_empty() {
            out.push(cur);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn terminal_composition_is_forced() {
        let p = fixtures::terminal_operad(4);
        let t = |n: usize| p.lookup(&format!("t{n}")).unwrap();
        assert_eq!(p.compose(t(2), &[t(2), t(1)]).unwrap(), t(3));
        assert_eq!(p.compose(t(2), &[t(0), t(0)]).unwrap(), t(0));
        for q in p.elements() {
            assert_eq!(p.compose(p.identity(), &[q]).unwrap(), q);
        }
    }

    #[test]
    fn cap_and_arity_errors() {
        let p = fixtures::terminal_operad(4);
        let t = |n: usize| p.lookup(&format!("t{n}")).unwrap();
        assert!(matches!(
            p.compose(t(2), &[t(2), t(3)]),
            Err(Error::CapExceeded(_))
        ));
        assert!(matches!(
            p.compose(t(2), &[t(1)]),
            Err(Error::ArityMismatch(_))
        ));
    }

    #[test]
    fn z2_unary_table() {
        let p = fixtures::z2_unary_operad();
        let g0 = p.lookup("g0").unwrap();
        let g1 = p.lookup("g1").unwrap();
        assert_eq!(p.compose(g1, &[g1]).unwrap(), g0);
        assert_eq!(p.compose(g1, &[g0]).unwrap(), g1);
        assert_eq!(p.identity(), g0);
    }

    #[test]
    fn laws_pass_on_fixtures() {
        for p in [
            fixtures::terminal_operad(4),
            fixtures::z2_unary_operad(),
            fixtures::free_binary_operad(4),
        ] {
            let r = validate_operad(&p);
            assert!(r.passed(), "{}: {:?}", p.name(), r.failures);
        }
    }

    #[test]
    fn corrupted_table_is_localized() {
        let mut p = fixtures::terminal_operad(3);
        let t = |n: usize| p.lookup(&format!("t{n}")).unwrap();
        assert!(validate_operad(&p).passed());
        // Break one entry: t2 (t0 t1) has arity 1 but now claims t2.
        p.comp.insert((t(2), vec![t(0), t(1)]), t(2));
        let r = validate_operad(&p);
        assert!(!r.passed());
        // Arity bookkeeping failure on the tampered entry is named.
        assert!(
            r.failures.iter().any(|f| f.instance.contains("t2(t0,t1)")),
            "{:?}",
            r.failures
        );
    }

    #[test]
    fn operad_text_round_trip() {
        for p in [
            fixtures::terminal_operad(4),
            fixtures::z2_unary_operad(),
            fixtures::free_binary_operad(4),
        ] {
            let text = p.to_string();
            let q = parse_operad(&text).unwrap();
            assert_eq!(p, q);
            assert_eq!(q.to_string(), text);
        }
    }

    #[test]
    fn parse_rejects_bad_input() {
        let base = "operad x\narity_cap 2\nelem a : 1\nidentity a\n";
        assert!(matches!(
            parse_operad("operad x\narity_cap 2\nelem a : 1\n"),
            Err(Error::Parse { msg, .. }) if msg.contains("identity")
        ));
        assert!(matches!(
            parse_operad(&format!("{base}elem a : 1\n")),
            Err(Error::Parse { msg, .. }) if msg.contains("duplicate")
        ));
        assert!(matches!(
            parse_operad(&format!("{base}comp a ( b ) = a\n")),
            Err(Error::Parse { line: 5, .. })
        ));
        assert!(matches!(
            parse_operad(&format!("{base}elem c : 3\n")),
            Err(Error::Parse { msg, .. }) if msg.contains("cap")
        ));
    }

    #[test]
    fn comments_and_flush_parens_parse() {
        let text = "operad x # a comment\narity_cap 1\nelem a : 1\nidentity a\ncomp a (a) = a\n";
        let p = parse_operad(text).unwrap();
        let a = p.lookup("a").unwrap();
        assert_eq!(p.compose(a, &[a]).unwrap(), a);
    }
}

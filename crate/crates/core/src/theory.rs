//! Equational presentations and their compilation to operad tables.
//!
//! A presentation declares operations with arities and equations between
//! linear terms. When every equation has the same variables in the same
//! order on both sides, each exactly once, the theory is given by a plain
//! operad: its elements are classes of linear terms under the equations.
//! That operad is computed here by congruence closure over the finite
//! universe of terms below an arity cap and a size cap. The closure is an
//! under-approximation whenever a needed intermediate term falls outside
//! the universe; the report says when that happened rather than pretending
//! the table is exact.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operad::{OpId, OperadBuilder, TabulatedOperad};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LinearTerm {
    Var(String),
    App(String, Vec<LinearTerm>),
}

impl fmt::Display for LinearTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinearTerm::Var(v) => write!(f, "{v}"),
            LinearTerm::App(op, args) => {
                write!(f, "{op}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Variables of one side, read left to right.
fn var_sequence(t: &LinearTerm, out: &mut Vec<String>) {
    match t {
        LinearTerm::Var(v) => out.push(v.clone()),
        LinearTerm::App(_, args) => {
            for a in args {
                var_sequence(a, out);
            }
        }
    }
}

fn pattern_size(t: &LinearTerm) -> usize {
    match t {
        LinearTerm::Var(_) => 0,
        LinearTerm::App(_, args) => 1 + args.iter().map(pattern_size).sum::<usize>(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    pub name: String,
    pub ops: Vec<(String, usize)>,
    pub equations: Vec<(LinearTerm, LinearTerm)>,
}

impl Presentation {
    pub fn arity_of(&self, op: &str) -> Option<usize> {
        self.ops.iter().find(|(n, _)| n == op).map(|(_, a)| *a)
    }
}

// ====== parser ======

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Nat(usize),
    Colon,
    Slash,
    Comma,
    LParen,
    RParen,
    Equals,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "{s}"),
            Tok::Nat(n) => write!(f, "{n}"),
            Tok::Colon => write!(f, ":"),
            Tok::Slash => write!(f, "/"),
            Tok::Comma => write!(f, ","),
            Tok::LParen => write!(f, "("),
            Tok::RParen => write!(f, ")"),
            Tok::Equals => write!(f, "="),
        }
    }
}

struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn tokenize(text: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    for (li, raw) in text.lines().enumerate() {
        let line = li + 1;
        let mut chars = raw.char_indices().peekable();
        while let Some(&(ci, c)) = chars.peek() {
            let col = ci + 1;
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                chars.next();
                continue;
            }
            let sym = match c {
                ':' => Some(Tok::Colon),
                '/' => Some(Tok::Slash),
                ',' => Some(Tok::Comma),
                '(' => Some(Tok::LParen),
                ')' => Some(Tok::RParen),
                '=' => Some(Tok::Equals),
                _ => None,
            };
            if let Some(tok) = sym {
                chars.next();
                out.push(Spanned { tok, line, col });
                continue;
            }
            if c.is_ascii_digit() {
                let mut n = String::new();
                while let Some(&(_, d)) = chars.peek() {
                    if d.is_ascii_digit() {
                        n.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                let n = n.parse().map_err(|_| Error::Parse {
                    line,
                    col,
                    msg: format!("number {n} out of range"),
                })?;
                out.push(Spanned { tok: Tok::Nat(n), line, col });
                continue;
            }
            if c.is_alphabetic() || c == '_' {
                let mut s = String::new();
                while let Some(&(_, d)) = chars.peek() {
                    if d.is_alphanumeric() || d == '_' || d == '\'' {
                        s.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push(Spanned { tok: Tok::Ident(s), line, col });
                continue;
            }
            return Err(Error::Parse { line, col, msg: format!("unexpected character {c:?}") });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.at)
            .or_else(|| self.toks.last())
            .map(|s| (s.line, s.col))
            .unwrap_or((1, 1))
    }

    fn err(&self, msg: String) -> Error {
        let (line, col) = self.here();
        Error::Parse { line, col, msg }
    }

    fn next(&mut self) -> Option<&Spanned> {
        let s = self.toks.get(self.at);
        if s.is_some() {
            self.at += 1;
        }
        s
    }

    fn expect(&mut self, want: &Tok) -> Result<()> {
        match self.peek() {
            Some(t) if t == want => {
                self.at += 1;
                Ok(())
            }
            Some(t) => Err(self.err(format!("expected {want}, found {t}"))),
            None => Err(self.err(format!("expected {want}, found end of input"))),
        }
    }

    fn expect_ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.at += 1;
                Ok(s)
            }
            Some(t) => Err(self.err(format!("expected an identifier, found {t}"))),
            None => Err(self.err("expected an identifier, found end of input".into())),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }
}

/// Parse the `.theory` format: an optional `theory <name>` header, an
/// `ops: id/arity, ..` declaration list, and an optional `eqs:` section of
/// `term = term` equations. Newlines count as whitespace and terms are
/// self-delimiting, so equations need no separator. A declared nullary
/// operation may be written bare (`e`) or applied (`e()`); any other bare
/// identifier is a variable and must start lowercase.
pub fn parse_presentation(text: &str) -> Result<Presentation> {
    let mut p = Parser { toks: tokenize(text)?, at: 0 };

    let name = if p.at_keyword("theory") {
        p.next();
        p.expect_ident()?
    } else {
        "theory".to_string()
    };

    if !p.at_keyword("ops") {
        return Err(p.err("expected ops:".into()));
    }
    p.next();
    p.expect(&Tok::Colon)?;

    let mut ops: Vec<(String, usize)> = Vec::new();
    while !p.at_keyword("eqs") && p.peek().is_some() {
        let op = p.expect_ident()?;
        if ops.iter().any(|(n, _)| *n == op) {
            return Err(p.err(format!("operation {op} declared twice")));
        }
        p.expect(&Tok::Slash)?;
        let arity = match p.next() {
            Some(Spanned { tok: Tok::Nat(n), .. }) => *n,
            _ => return Err(p.err(format!("expected an arity after {op}/"))),
        };
        ops.push((op, arity));
        if p.peek() == Some(&Tok::Comma) {
            p.next();
        } else {
            break;
        }
    }
    if ops.is_empty() {
        return Err(p.err("ops: declares no operations".into()));
    }

    let mut equations = Vec::new();
    if p.at_keyword("eqs") {
        p.next();
        p.expect(&Tok::Colon)?;
        while p.peek().is_some() {
            let lhs = parse_term(&mut p, &ops)?;
            p.expect(&Tok::Equals)?;
            let rhs = parse_term(&mut p, &ops)?;
            equations.push((lhs, rhs));
        }
    }
    if let Some(t) = p.peek() {
        return Err(p.err(format!("unexpected {t}")));
    }

    Ok(Presentation { name, ops, equations })
}

fn parse_term(p: &mut Parser, ops: &[(String, usize)]) -> Result<LinearTerm> {
    let (line, col) = p.here();
    let head = p.expect_ident()?;
    let declared = ops.iter().find(|(n, _)| *n == head).map(|(_, a)| *a);
    if p.peek() == Some(&Tok::LParen) {
        let Some(arity) = declared else {
            return Err(Error::Parse {
                line,
                col,
                msg: format!("{head} is applied to arguments but not declared in ops:"),
            });
        };
        p.next();
        let mut args = Vec::new();
        if p.peek() != Some(&Tok::RParen) {
            loop {
                args.push(parse_term(p, ops)?);
                if p.peek() == Some(&Tok::Comma) {
                    p.next();
                } else {
                    break;
                }
            }
        }
        p.expect(&Tok::RParen)?;
        if args.len() != arity {
            return Err(Error::Parse {
                line,
                col,
                msg: format!("{head} is declared /{arity} but applied to {} arguments", args.len()),
            });
        }
        return Ok(LinearTerm::App(head, args));
    }
    match declared {
        Some(0) => Ok(LinearTerm::App(head, Vec::new())),
        Some(a) => Err(Error::Parse {
            line,
            col,
            msg: format!("{head} is declared /{a} and needs arguments"),
        }),
        None => {
            if head.chars().next().is_some_and(|c| c.is_lowercase()) {
                Ok(LinearTerm::Var(head))
            } else {
                Err(Error::Parse {
                    line,
                    col,
                    msg: format!("variable {head} must start with a lowercase letter"),
                })
            }
        }
    }
}

// ====== strong regularity ======

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegularityReason {
    RepeatedVariable,
    VariableSetMismatch,
    OrderMismatch,
}

impl fmt::Display for RegularityReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegularityReason::RepeatedVariable => write!(f, "repeated variable"),
            RegularityReason::VariableSetMismatch => write!(f, "variable-set mismatch"),
            RegularityReason::OrderMismatch => write!(f, "order mismatch"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegularityViolation {
    /// Zero-based index into `Presentation::equations`.
    pub equation: usize,
    pub reason: RegularityReason,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegularityReport {
    pub regular: bool,
    pub violations: Vec<RegularityViolation>,
}

/// Purely syntactic check: each equation must read the same variable
/// sequence on both sides, with no variable repeated on a side. Every
/// applicable reason is reported per offending equation; order mismatch is
/// only meaningful once the sets agree and nothing repeats.
pub fn check_strong_regularity(p: &Presentation) -> RegularityReport {
    let mut violations = Vec::new();
    for (i, (lhs, rhs)) in p.equations.iter().enumerate() {
        let mut lv = Vec::new();
        let mut rv = Vec::new();
        var_sequence(lhs, &mut lv);
        var_sequence(rhs, &mut rv);

        let mut repeats = false;
        for (side, vars) in [("left", &lv), ("right", &rv)] {
            let mut seen = BTreeSet::new();
            for v in vars.iter() {
                if !seen.insert(v) {
                    repeats = true;
                    violations.push(RegularityViolation {
                        equation: i,
                        reason: RegularityReason::RepeatedVariable,
                        detail: format!("{v} occurs more than once on the {side} side"),
                    });
                    break;
                }
            }
        }

        let ls: BTreeSet<&String> = lv.iter().collect();
        let rs: BTreeSet<&String> = rv.iter().collect();
        if ls != rs {
            let only_l: Vec<&str> = ls.difference(&rs).map(|s| s.as_str()).collect();
            let only_r: Vec<&str> = rs.difference(&ls).map(|s| s.as_str()).collect();
            violations.push(RegularityViolation {
                equation: i,
                reason: RegularityReason::VariableSetMismatch,
                detail: format!(
                    "left-only variables [{}], right-only [{}]",
                    only_l.join(","),
                    only_r.join(",")
                ),
            });
        } else if !repeats && lv != rv {
            violations.push(RegularityViolation {
                equation: i,
                reason: RegularityReason::OrderMismatch,
                detail: format!("left reads ({}), right reads ({})", lv.join(","), rv.join(",")),
            });
        }
    }
    RegularityReport { regular: violations.is_empty(), violations }
}

// ====== congruence closure ======

/// A linear term with anonymous variable slots, the universe element for
/// closure. Slots stand for x1..xn read left to right, so these are exactly
/// the planar trees over the signature.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum STerm {
    Slot,
    App(usize, Vec<STerm>),
}

impl STerm {
    fn size(&self) -> usize {
        match self {
            STerm::Slot => 0,
            STerm::App(_, args) => 1 + args.iter().map(STerm::size).sum::<usize>(),
        }
    }

    fn arity(&self) -> usize {
        match self {
            STerm::Slot => 1,
            STerm::App(_, args) => args.iter().map(STerm::arity).sum(),
        }
    }

    /// Prefix walk with slots rendered as x: m(x, m(x, x)) is m_x_m_x_x.
    fn render(&self, ops: &[(String, usize)]) -> String {
        match self {
            STerm::Slot => "x".into(),
            STerm::App(op, args) => {
                let mut s = ops[*op].0.clone();
                for a in args {
                    s.push('_');
                    s.push_str(&a.render(ops));
                }
                s
            }
        }
    }

    /// Substitute `args` for the slots, left to right.
    fn graft(&self, args: &mut std::slice::Iter<STerm>) -> STerm {
        match self {
            STerm::Slot => args.next().expect("one argument per slot").clone(),
            STerm::App(op, children) => {
                STerm::App(*op, children.iter().map(|c| c.graft(args)).collect())
            }
        }
    }
}

/// All terms with arity at most `arity_cap` and size at most `size_cap`,
/// sorted by size then structure. A subterm never has larger arity or size
/// than its parent, so building level by level loses nothing.
fn enumerate_universe(ops: &[(String, usize)], arity_cap: usize, size_cap: usize) -> Vec<STerm> {
    fn child_tuples(
        by_size: &[Vec<STerm>],
        slots: usize,
        budget: usize,
        acc: &mut Vec<STerm>,
        out: &mut Vec<Vec<STerm>>,
    ) {
        if slots == 0 {
            if budget == 0 {
                out.push(acc.clone());
            }
            return;
        }
        for sz in 0..=budget.min(by_size.len() - 1) {
            for t in &by_size[sz] {
                acc.push(t.clone());
                child_tuples(by_size, slots - 1, budget - sz, acc, out);
                acc.pop();
            }
        }
    }

    let mut by_size: Vec<Vec<STerm>> = vec![vec![STerm::Slot]];
    for s in 1..=size_cap {
        let mut level = Vec::new();
        for (oi, (_, m)) in ops.iter().enumerate() {
            let mut tuples = Vec::new();
            child_tuples(&by_size, *m, s - 1, &mut Vec::new(), &mut tuples);
            for children in tuples {
                let t = STerm::App(oi, children);
                if t.arity() <= arity_cap {
                    level.push(t);
                }
            }
        }
        by_size.push(level);
    }
    let mut all: Vec<STerm> = by_size.into_iter().flatten().collect();
    all.sort_by(|a, b| a.size().cmp(&b.size()).then_with(|| a.cmp(b)));
    all
}

/// Union-find whose class root is always the least member index; since the
/// universe is sorted by (size, structure), the root is also the canonical
/// representative.
struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}

/// Visit every tuple of universe term indices with the given slot count,
/// total arity at most `arity_budget`, total size at most `size_budget`.
fn enumerate_tuples(
    sizes: &[usize],
    arities: &[usize],
    slots: usize,
    arity_budget: usize,
    size_budget: usize,
    acc: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    if slots == 0 {
        visit(acc);
        return;
    }
    for i in 0..sizes.len() {
        if sizes[i] <= size_budget && arities[i] <= arity_budget {
            acc.push(i);
            enumerate_tuples(
                sizes,
                arities,
                slots - 1,
                arity_budget - arities[i],
                size_budget - sizes[i],
                acc,
                visit,
            );
            acc.pop();
        }
    }
}

fn instantiate(
    t: &LinearTerm,
    bind: &BTreeMap<&str, &STerm>,
    op_index: &BTreeMap<&str, usize>,
) -> STerm {
    match t {
        LinearTerm::Var(v) => bind[v.as_str()].clone(),
        LinearTerm::App(op, args) => STerm::App(
            op_index[op.as_str()],
            args.iter().map(|a| instantiate(a, bind, op_index)).collect(),
        ),
    }
}

/// Finished closure over the capped universe. `root[i]` is the class of
/// `universe[i]`; roots are least members.
struct Closure {
    universe: Vec<STerm>,
    root: Vec<usize>,
    equation_instances: usize,
    blocked_instances: usize,
    congruence_rounds: usize,
}

fn close_universe(p: &Presentation, arity_cap: usize, size_cap: usize) -> Closure {
    let universe = enumerate_universe(&p.ops, arity_cap, size_cap);
    let index: BTreeMap<&STerm, usize> =
        universe.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let sizes: Vec<usize> = universe.iter().map(STerm::size).collect();
    let arities: Vec<usize> = universe.iter().map(STerm::arity).collect();
    let op_index: BTreeMap<&str, usize> =
        p.ops.iter().enumerate().map(|(i, (n, _))| (n.as_str(), i)).collect();
    let mut uf = UnionFind::new(universe.len());

    // Merge every equation instance whose two sides both fit. An instance
    // with exactly one side in the universe is a blocked merge; one with
    // neither side visible cannot even be stated at these caps.
    let mut equation_instances = 0usize;
    let mut blocked_instances = 0usize;
    for (lhs, rhs) in &p.equations {
        let mut vars = Vec::new();
        var_sequence(lhs, &mut vars);
        let min_size = pattern_size(lhs).min(pattern_size(rhs));
        if min_size > size_cap {
            continue;
        }
        enumerate_tuples(
            &sizes,
            &arities,
            vars.len(),
            arity_cap,
            size_cap - min_size,
            &mut Vec::new(),
            &mut |tuple| {
                let bind: BTreeMap<&str, &STerm> = vars
                    .iter()
                    .map(|v| v.as_str())
                    .zip(tuple.iter().map(|&i| &universe[i]))
                    .collect();
                let li = instantiate(lhs, &bind, &op_index);
                let ri = instantiate(rhs, &bind, &op_index);
                match (index.get(&li), index.get(&ri)) {
                    (Some(&a), Some(&b)) => {
                        equation_instances += 1;
                        uf.union(a, b);
                    }
                    (None, None) => {}
                    _ => blocked_instances += 1,
                }
            },
        );
    }

    // Close under contexts: same operation, classwise equal children.
    let children_of: Vec<Option<(usize, Vec<usize>)>> = universe
        .iter()
        .map(|t| match t {
            STerm::Slot => None,
            STerm::App(op, args) => Some((*op, args.iter().map(|a| index[a]).collect())),
        })
        .collect();
    let mut congruence_rounds = 0usize;
    loop {
        congruence_rounds += 1;
        let mut changed = false;
        let mut groups: BTreeMap<(usize, Vec<usize>), usize> = BTreeMap::new();
        for i in 0..universe.len() {
            let Some((op, children)) = &children_of[i] else { continue };
            let key: Vec<usize> = children.iter().map(|&c| uf.find(c)).collect();
            match groups.get(&(*op, key.clone())) {
                Some(&first) => changed |= uf.union(first, i),
                None => {
                    groups.insert((*op, key), i);
                }
            }
        }
        if !changed {
            break;
        }
    }

    let root: Vec<usize> = (0..universe.len()).map(|i| uf.find(i)).collect();
    Closure { universe, root, equation_instances, blocked_instances, congruence_rounds }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClosureReport {
    pub universe_terms: usize,
    /// Number of classes at each arity, index = arity.
    pub classes_by_arity: Vec<usize>,
    /// Equation instances merged (both sides inside the universe).
    pub equation_instances: usize,
    /// Instances with exactly one side inside the universe: merges blocked
    /// by a cap.
    pub blocked_instances: usize,
    pub congruence_rounds: usize,
    /// Composition entries omitted because no member substitution stayed
    /// inside the universe.
    pub missing_comp_entries: usize,
    /// True whenever a closure or table step was cut off by a cap; the
    /// compiled operad is then an approximation from below.
    pub cap_limited: bool,
}

/// Compile a strongly regular presentation to an operad table.
///
/// Elements of arity n are the term classes with n variables inside the
/// `(arity_cap, term_size_cap)` universe, named by their least member.
/// Composition substitutes class members, least first, and records the
/// first result that stays inside the universe; entries with no such
/// witness are omitted and counted in the report.
pub fn compile_operad(
    p: &Presentation,
    arity_cap: usize,
    term_size_cap: usize,
) -> Result<(TabulatedOperad, ClosureReport)> {
    let reg = check_strong_regularity(p);
    if !reg.regular {
        let msgs: Vec<String> = reg
            .violations
            .iter()
            .map(|v| format!("equation {}: {} ({})", v.equation + 1, v.reason, v.detail))
            .collect();
        return Err(Error::NotStronglyRegular(msgs.join("; ")));
    }
    if arity_cap < 1 {
        return Err(Error::CapExceeded("arity cap 0 leaves no room for the identity term".into()));
    }

    let closure = close_universe(p, arity_cap, term_size_cap);
    let universe = &closure.universe;
    let index: BTreeMap<&STerm, usize> =
        universe.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let sizes: Vec<usize> = universe.iter().map(STerm::size).collect();
    let arities: Vec<usize> = universe.iter().map(STerm::arity).collect();

    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &r) in closure.root.iter().enumerate() {
        members.entry(r).or_default().push(i);
    }
    let mut roots_in_order: Vec<usize> = members.keys().copied().collect();
    roots_in_order.sort_by_key(|&r| (arities[r], r));
    let mut classes_by_arity = vec![0usize; arity_cap + 1];
    for &r in &roots_in_order {
        classes_by_arity[arities[r]] += 1;
    }

    let mut b = OperadBuilder::new(p.name.clone(), arity_cap);
    let mut class_op: BTreeMap<usize, OpId> = BTreeMap::new();
    for &r in &roots_in_order {
        let id = b.element(universe[r].render(&p.ops), arities[r])?;
        class_op.insert(r, id);
    }
    let slot_class = closure.root[index[&STerm::Slot]];
    b.identity(class_op[&slot_class])?;

    let mut missing_comp_entries = 0usize;
    for &pr in &roots_in_order {
        let mut tuples = Vec::new();
        arg_tuples(&roots_in_order, &arities, arities[pr], arity_cap, &mut Vec::new(), &mut tuples);
        for tuple in tuples {
            match compose_in_universe(
                universe,
                &index,
                &sizes,
                &members,
                &closure.root,
                pr,
                &tuple,
                term_size_cap,
            ) {
                Some(result) => {
                    let args: Vec<OpId> = tuple.iter().map(|r| class_op[r]).collect();
                    b.composite(class_op[&pr], &args, class_op[&result])?;
                }
                None => missing_comp_entries += 1,
            }
        }
    }

    let operad = b.finish()?;
    let cap_limited = closure.blocked_instances > 0 || missing_comp_entries > 0;
    let report = ClosureReport {
        universe_terms: universe.len(),
        classes_by_arity,
        equation_instances: closure.equation_instances,
        blocked_instances: closure.blocked_instances,
        congruence_rounds: closure.congruence_rounds,
        missing_comp_entries,
        cap_limited,
    };
    Ok((operad, report))
}

/// Tuples of argument classes with total arity within the cap.
fn arg_tuples(
    roots: &[usize],
    arities: &[usize],
    slots: usize,
    budget: usize,
    acc: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if slots == 0 {
        out.push(acc.clone());
        return;
    }
    for &r in roots {
        if arities[r] <= budget {
            acc.push(r);
            arg_tuples(roots, arities, slots - 1, budget - arities[r], acc, out);
            acc.pop();
        }
    }
}

/// First in-universe substitution of members of the argument classes into a
/// member of the head class, scanning in canonical order. Any witness lands
/// in the same class, so the scan order only affects how soon one is found.
#[allow(clippy::too_many_arguments)]
fn compose_in_universe(
    universe: &[STerm],
    index: &BTreeMap<&STerm, usize>,
    sizes: &[usize],
    members: &BTreeMap<usize, Vec<usize>>,
    root: &[usize],
    head_root: usize,
    arg_roots: &[usize],
    size_cap: usize,
) -> Option<usize> {
    let min_arg_total: usize = arg_roots.iter().map(|r| sizes[*r]).sum();
    for &s in &members[&head_root] {
        if sizes[s] + min_arg_total > size_cap {
            continue;
        }
        let mut chosen: Vec<usize> = Vec::with_capacity(arg_roots.len());
        if pick_args(members, sizes, arg_roots, 0, size_cap - sizes[s], &mut chosen) {
            let parts: Vec<STerm> = chosen.iter().map(|&i| universe[i].clone()).collect();
            let composite = universe[s].graft(&mut parts.iter());
            return Some(root[index[&composite]]);
        }
    }
    None
}

fn pick_args(
    members: &BTreeMap<usize, Vec<usize>>,
    sizes: &[usize],
    arg_roots: &[usize],
    slot: usize,
    budget: usize,
    chosen: &mut Vec<usize>,
) -> bool {
    if slot == arg_roots.len() {
        return true;
    }
    let remaining_min: usize = arg_roots[slot + 1..].iter().map(|r| sizes[*r]).sum();
    for &m in &members[&arg_roots[slot]] {
        if sizes[m] + remaining_min > budget {
            continue;
        }
        chosen.push(m);
        if pick_args(members, sizes, arg_roots, slot + 1, budget - sizes[m], chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

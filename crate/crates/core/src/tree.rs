//! Planar labelled trees over an operad's elements.
//!
//! These are the 1-cells of the weakened structure built from an operad P:
//! a tree is either the bare leaf (the arity-1 unit, size 0) or a node
//! labelled with an element of P whose child count is that element's arity.
//! The arity of a tree is its number of leaves; its size is its number of
//! labelled nodes. Evaluation sends a tree to the element of P obtained by
//! composing its labels; two trees carry a (unique, invertible) 2-cell
//! between them exactly when they evaluate to the same element.

use std::fmt;

use crate::error::{Error, Result};
use crate::operad::{OpId, TabulatedOperad};

/// A planar tree labelled in an operad. `Ord` is structural: leaves sort
/// before nodes, nodes sort by label then children; enumeration sorts by
/// size first, so the order of [`enumerate_trees`] is canonical.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tree {
    Leaf,
    Node(OpId, Vec<Tree>),
}

impl Tree {
    /// Single-node tree: `p` applied to bare leaves.
    pub fn corolla(p: OpId, operad: &TabulatedOperad) -> Tree {
        Tree::Node(p, vec![Tree::Leaf; operad.arity(p)])
    }

    /// Number of leaves.
    pub fn arity(&self, operad: &TabulatedOperad) -> usize {
        match self {
            Tree::Leaf => 1,
            Tree::Node(_, children) => {
                if children.is_empty() {
                    // A 0-ary label has no leaves below it.
                    0
                } else {
                    children.iter().map(|c| c.arity(operad)).sum()
                }
            }
        }
    }

    /// Number of labelled nodes; leaves are free.
    pub fn size(&self) -> usize {
        match self {
            Tree::Leaf => 0,
            Tree::Node(_, children) => 1 + children.iter().map(Tree::size).sum::<usize>(),
        }
    }

    /// All node positions in pre-order; a position is a path of child indices.
    pub fn positions(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.positions_rec(&mut path, &mut out);
        out
    }

    fn positions_rec(&self, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(path.clone());
        if let Tree::Node(_, children) = self {
            for (i, c) in children.iter().enumerate() {
                path.push(i);
                c.positions_rec(path, out);
                path.pop();
            }
        }
    }

    pub fn subtree(&self, pos: &[usize]) -> &Tree {
        match pos.split_first() {
            None => self,
            Some((i, rest)) => match self {
                Tree::Node(_, children) => children[*i].subtree(rest),
                Tree::Leaf => panic!("position into a leaf"),
            },
        }
    }

    /// Replace the subtree at `pos`.
    pub fn replace(&self, pos: &[usize], with: &Tree) -> Tree {
        match pos.split_first() {
            None => with.clone(),
            Some((i, rest)) => match self {
                Tree::Node(p, children) => {
                    let mut children = children.clone();
                    children[*i] = children[*i].replace(rest, with);
                    Tree::Node(*p, children)
                }
                Tree::Leaf => panic!("position into a leaf"),
            },
        }
    }

    /// Render with `*` for leaves: `(t2 (t2 * *) *)`.
    pub fn render(&self, operad: &TabulatedOperad) -> String {
        match self {
            Tree::Leaf => "*".to_string(),
            Tree::Node(p, children) => {
                let mut s = format!("({}", operad.op_name(*p));
                for c in children {
                    s.push(' ');
                    s.push_str(&c.render(operad));
                }
                s.push(')');
                s
            }
        }
    }
}

impl fmt::Display for Tree {
    /// Label-free shape rendering; use [`Tree::render`] for named labels.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tree::Leaf => write!(f, "*"),
            Tree::Node(p, children) => {
                write!(f, "(#{}", p.0)?;
                for c in children {
                    write!(f, " {c}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Substitute `subs` into the leaves of `s`, left to right.
/// Requires exactly `arity(s)` substituents.
pub fn graft(operad: &TabulatedOperad, s: &Tree, subs: &[Tree]) -> Result<Tree> {
    if subs.len() != s.arity(operad) {
        return Err(Error::ArityMismatch(format!(
            "grafting {} trees into a tree of arity {}",
            subs.len(),
            s.arity(operad)
        )));
    }
    let mut iter = subs.iter();
    let out = graft_rec(s, &mut iter);
    debug_assert!(iter.next().is_none());
    Ok(out)
}

fn graft_rec<'a>(s: &Tree, subs: &mut impl Iterator<Item = &'a Tree>) -> Tree {
    match s {
        Tree::Leaf => subs.next().expect("arity checked").clone(),
        Tree::Node(p, children) => {
            Tree::Node(*p, children.iter().map(|c| graft_rec(c, subs)).collect())
        }
    }
}

/// Evaluate a tree to the operad element obtained by composing its labels.
/// The bare leaf evaluates to the identity. Every composite along the way
/// stays inside the cap when the tree's own arity does, so the only errors
/// are a tree of arity beyond the cap or a cap-limited table.
pub fn eval_tree(operad: &TabulatedOperad, s: &Tree) -> Result<OpId> {
    match s {
        Tree::Leaf => Ok(operad.identity()),
        Tree::Node(p, children) => {
            let args = children
                .iter()
                .map(|c| eval_tree(operad, c))
                .collect::<Result<Vec<_>>>()?;
            operad.compose(*p, &args)
        }
    }
}

/// All trees of the given arity with size at most `size_cap`, in canonical
/// order (size, then structural order). Requires `arity <= arity_cap`.
pub fn enumerate_trees(
    operad: &TabulatedOperad,
    arity: usize,
    size_cap: usize,
) -> Result<Vec<Tree>> {
    if arity > operad.arity_cap() {
        return Err(Error::CapExceeded(format!(
            "arity {arity} > cap {}",
            operad.arity_cap()
        )));
    }
    let mut out = Vec::new();
    for size in 0..=size_cap {
        let mut level = exact_size_trees(operad, arity, size);
        level.sort();
        out.extend(level);
    }
    Ok(out)
}

/// Trees with exactly `size` nodes and the given arity. Each tree is built
/// once (root label and child split determine it), so no deduplication step.
fn exact_size_trees(operad: &TabulatedOperad, arity: usize, size: usize) -> Vec<Tree> {
    if size == 0 {
        return if arity == 1 { vec![Tree::Leaf] } else { vec![] };
    }
    let mut out = Vec::new();
    for p in operad.elements() {
        let slots = operad.arity(p);
        let mut children = Vec::with_capacity(slots);
        split_children(
            operad,
            slots,
            arity,
            size - 1,
            &mut children,
            &mut |children| {
                out.push(Tree::Node(p, children.to_vec()));
            },
        );
    }
    out
}

/// Enumerate child lists: `slots` children left, arities summing to `arity`,
/// sizes summing to `size`.
fn split_children(
    operad: &TabulatedOperad,
    slots: usize,
    arity: usize,
    size: usize,
    acc: &mut Vec<Tree>,
    emit: &mut impl FnMut(&[Tree]),
) {
    if slots == 0 {
        if arity == 0 && size == 0 {
            emit(acc);
        }
        return;
    }
    for a in 0..=arity {
        for s in 0..=size {
            // Children of a smaller tree live inside the same cap window.
            for c in exact_size_trees(operad, a, s) {
                acc.push(c);
                split_children(operad, slots - 1, arity - a, size - s, acc, emit);
                acc.pop();
            }
        }
    }
}

/// Whether the (unique) invertible 2-cell `s -> t` exists: same arity and
/// equal evaluations. Trees of different arity never carry a cell.
pub fn has_two_cell(operad: &TabulatedOperad, s: &Tree, t: &Tree) -> Result<bool> {
    if s.arity(operad) != t.arity(operad) {
        return Ok(false);
    }
    Ok(eval_tree(operad, s)? == eval_tree(operad, t)?)
}

/// A witness that two trees evaluate to the same element. Construction is
/// the only way to get one, so a `TwoCell` value is always valid for the
/// operad it was built against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoCell {
    pub source: Tree,
    pub target: Tree,
}

impl TwoCell {
    pub fn new(operad: &TabulatedOperad, source: Tree, target: Tree) -> Result<TwoCell> {
        if !has_two_cell(operad, &source, &target)? {
            return Err(Error::NoTwoCell(format!(
                "{} and {} evaluate differently",
                source.render(operad),
                target.render(operad)
            )));
        }
        Ok(TwoCell { source, target })
    }

    pub fn inverse(self) -> TwoCell {
        TwoCell { source: self.target, target: self.source }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use std::collections::BTreeSet;

    // ====== oracles ======

    /// Catalan numbers, written directly from the recurrence.
    fn catalan(n: usize) -> usize {
        if n == 0 {
            return 1;
        }
        (0..n).map(|i| catalan(i) * catalan(n - 1 - i)).sum()
    }

    /// Independent enumeration: grow the set of all trees of size <= cap by
    /// wrapping every label around every child combination until nothing new
    /// appears, then filter by arity. Slower than the production path and
    /// shares no code with it.
    fn all_trees_fixpoint(p: &TabulatedOperad, arity: usize, size_cap: usize) -> BTreeSet<Tree> {
        let mut all: BTreeSet<Tree> = BTreeSet::new();
        all.insert(Tree::Leaf);
        loop {
            let mut grew = false;
            let snapshot: Vec<Tree> = all.iter().cloned().collect();
            for q in p.elements() {
                let n = p.arity(q);
                let mut idx = vec![0usize; n];
                'combos: loop {
                    let children: Vec<Tree> =
                        idx.iter().map(|i| snapshot[*i].clone()).collect();
                    let t = Tree::Node(q, children);
                    if t.size() <= size_cap && t.arity(p) <= p.arity_cap() && all.insert(t) {
                        grew = true;
                    }
                    // Odometer over child choices.
                    let mut k = 0;
                    loop {
                        if k == n {
                            break 'combos;
                        }
                        idx[k] += 1;
                        if idx[k] < snapshot.len() {
                            break;
                        }
                        idx[k] = 0;
                        k += 1;
                    }
                }
            }
            if !grew {
                break;
            }
        }
        all.into_iter().filter(|t| t.arity(p) == arity).collect()
    }

    // ====== enumerate_trees ======

    #[test]
    fn binary_associations_count() {
        let p = fixtures::free_binary_operad(4);
        let b2 = p.lookup("b2_0").unwrap();
        fn only_label(t: &Tree, label: OpId) -> bool {
            match t {
                Tree::Leaf => true,
                Tree::Node(q, c) => *q == label && c.iter().all(|s| only_label(s, label)),
            }
        }
        // Trees built from the binary label alone, with n leaves, are the
        // planar binary trees: counted by Catalan numbers. (The operad has
        // labels at other arities too, so filter by label.)
        for n in 2..=4 {
            let trees = enumerate_trees(&p, n, n - 1).unwrap();
            let pure: Vec<&Tree> = trees
                .iter()
                .filter(|t| t.size() == n - 1 && only_label(t, b2))
                .collect();
            assert_eq!(pure.len(), catalan(n - 1), "arity {n}");
        }
    }

    #[test]
    fn smallest_windows() {
        let p = fixtures::terminal_operad(4);
        assert_eq!(enumerate_trees(&p, 1, 0).unwrap(), vec![Tree::Leaf]);
        let only02 = fixtures::terminal_operad_arities(&[0, 2], 2);
        let t0 = only02.lookup("t0").unwrap();
        assert_eq!(
            enumerate_trees(&only02, 0, 1).unwrap(),
            vec![Tree::corolla(t0, &only02)]
        );
    }

    #[test]
    fn matches_fixpoint_oracle() {
        for p in [
            fixtures::terminal_operad(3),
            fixtures::z2_unary_operad(),
            fixtures::free_binary_operad(3),
        ] {
            for arity in 0..=p.arity_cap() {
                let got: BTreeSet<Tree> =
                    enumerate_trees(&p, arity, 3).unwrap().into_iter().collect();
                let want = all_trees_fixpoint(&p, arity, 3);
                assert_eq!(got, want, "{} arity {arity}", p.name());
            }
        }
    }

    #[test]
    fn enumeration_is_canonical_and_duplicate_free() {
        let p = fixtures::terminal_operad(4);
        for arity in 0..=4 {
            let a = enumerate_trees(&p, arity, 4).unwrap();
            let b = enumerate_trees(&p, arity, 4).unwrap();
            assert_eq!(a, b);
            let set: BTreeSet<&Tree> = a.iter().collect();
            assert_eq!(set.len(), a.len());
            for w in a.windows(2) {
                assert!(
                    (w[0].size(), &w[0]) < (w[1].size(), &w[1]),
                    "not sorted by (size, structure)"
                );
            }
        }
    }

    #[test]
    fn enumerate_rejects_out_of_cap_arity() {
        let p = fixtures::terminal_operad(2);
        assert!(matches!(
            enumerate_trees(&p, 3, 2),
            Err(Error::CapExceeded(_))
        ));
    }

    // ====== graft ======

    #[test]
    fn graft_hand_expansions() {
        let p = fixtures::free_binary_operad(4);
        let m = p.lookup("b2_0").unwrap();
        let mc = Tree::corolla(m, &p);
        // Leaf is a two-sided unit for grafting.
        assert_eq!(graft(&p, &Tree::Leaf, &[mc.clone()]).unwrap(), mc);
        assert_eq!(
            graft(&p, &mc, &[Tree::Leaf, Tree::Leaf]).unwrap(),
            mc
        );
        // m (m, leaf) fills the left slot: left-leaning arity-3 tree.
        let left = graft(&p, &mc, &[mc.clone(), Tree::Leaf]).unwrap();
        assert_eq!(
            left,
            Tree::Node(m, vec![Tree::Node(m, vec![Tree::Leaf, Tree::Leaf]), Tree::Leaf])
        );
        assert_eq!(left.arity(&p), 3);
        assert_eq!(left.size(), 2);
        assert!(matches!(
            graft(&p, &mc, &[Tree::Leaf]),
            Err(Error::ArityMismatch(_))
        ));
    }

    // ====== eval_tree ======

    #[test]
    fn eval_basics() {
        let p = fixtures::terminal_operad(4);
        assert_eq!(eval_tree(&p, &Tree::Leaf).unwrap(), p.identity());
        for q in p.elements() {
            assert_eq!(eval_tree(&p, &Tree::corolla(q, &p)).unwrap(), q);
        }
        // Over the terminal operad, evaluation only sees arity.
        let t3 = p.lookup("t3").unwrap();
        for s in enumerate_trees(&p, 3, 3).unwrap() {
            assert_eq!(eval_tree(&p, &s).unwrap(), t3);
        }
    }

    #[test]
    fn eval_is_a_graft_homomorphism() {
        // eval(graft(s, ts)) = compose(eval s, [eval ts]) across every small
        // instance over each fixture; the window keeps the whole grafted
        // tree inside size 3 here, size 4 in the acceptance sweep.
        for p in [
            fixtures::terminal_operad(3),
            fixtures::z2_unary_operad(),
            fixtures::free_binary_operad(3),
        ] {
            let size_cap = 3;
            let by_arity: Vec<Vec<Tree>> = (0..=p.arity_cap())
                .map(|a| enumerate_trees(&p, a, size_cap).unwrap())
                .collect();
            let mut checked = 0usize;
            for n in 0..=p.arity_cap() {
                for s in &by_arity[n] {
                    let budget = size_cap - s.size();
                    let mut tuple = Vec::new();
                    graft_tuples(&p, &by_arity, n, p.arity_cap(), budget, &mut tuple, &mut |subs| {
                        let grafted = graft(&p, s, subs).unwrap();
                        let lhs = eval_tree(&p, &grafted).unwrap();
                        let args: Vec<OpId> =
                            subs.iter().map(|t| eval_tree(&p, t).unwrap()).collect();
                        let rhs = p.compose(eval_tree(&p, s).unwrap(), &args).unwrap();
                        assert_eq!(lhs, rhs, "{} into {}", grafted.render(&p), s.render(&p));
                        checked += 1;
                    });
                }
            }
            assert!(checked > 0, "{}: empty sweep", p.name());
        }
    }

    /// Tuples of trees with given slot count, arity budget and size budget.
    pub(crate) fn graft_tuples(
        p: &TabulatedOperad,
        by_arity: &[Vec<Tree>],
        slots: usize,
        arity_budget: usize,
        size_budget: usize,
        acc: &mut Vec<Tree>,
        emit: &mut impl FnMut(&[Tree]),
    ) {
        if slots == 0 {
            emit(acc);
            return;
        }
        for a in 0..=arity_budget {
            for t in &by_arity[a] {
                if t.size() > size_budget {
                    continue;
                }
                acc.push(t.clone());
                graft_tuples(p, by_arity, slots - 1, arity_budget - a, size_budget - t.size(), acc, emit);
                acc.pop();
            }
        }
    }

    // ====== two-cells ======

    #[test]
    fn two_cells_on_terminal_are_arity_classes() {
        let p = fixtures::terminal_operad(4);
        let threes = enumerate_trees(&p, 3, 3).unwrap();
        for s in &threes {
            for t in &threes {
                assert!(has_two_cell(&p, s, t).unwrap());
            }
        }
        let twos = enumerate_trees(&p, 2, 3).unwrap();
        assert!(!has_two_cell(&p, &threes[0], &twos[0]).unwrap());
    }

    #[test]
    fn two_cell_is_an_equivalence_matching_eval() {
        let p = fixtures::z2_unary_operad();
        let trees = enumerate_trees(&p, 1, 4).unwrap();
        for s in &trees {
            assert!(has_two_cell(&p, s, s).unwrap());
            for t in &trees {
                let st = has_two_cell(&p, s, t).unwrap();
                assert_eq!(st, has_two_cell(&p, t, s).unwrap());
                assert_eq!(
                    st,
                    eval_tree(&p, s).unwrap() == eval_tree(&p, t).unwrap()
                );
            }
        }
        // Classes land on the two unary elements.
        let classes: BTreeSet<OpId> =
            trees.iter().map(|t| eval_tree(&p, t).unwrap()).collect();
        assert_eq!(classes.len(), 2);
    }

    #[test]
    fn two_cell_witness() {
        let p = fixtures::terminal_operad(4);
        let threes = enumerate_trees(&p, 3, 2).unwrap();
        let cell = TwoCell::new(&p, threes[0].clone(), threes[1].clone()).unwrap();
        let back = cell.clone().inverse();
        assert_eq!(back.source, threes[1]);
        let twos = enumerate_trees(&p, 2, 2).unwrap();
        assert!(matches!(
            TwoCell::new(&p, threes[0].clone(), twos[0].clone()),
            Err(Error::NoTwoCell(_))
        ));
    }
}

//! De Morgan formulas over leaf gates.
//!
//! A [`Formula`] is a binary AND/OR/NOT tree whose leaves name entries of a
//! gate table.  Size is the number of leaves; NOT nodes are free.  Variable
//! `x1` is the least significant bit of the integer encoding of an
//! assignment, so `truth_table` bit `i` is the value on the binary expansion
//! of `i`.

mod decompose;
mod parse;
mod random;

pub use decompose::{decompose, CompositionTree};
pub(crate) use decompose::decompose_node;
pub use parse::parse_formula;
pub use random::{random_formula, GateClass};

use thiserror::Error;

/// Index into the gate table of a [`Formula`].
pub type GateId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("syntax error at offset {offset}: {msg}")]
    Syntax { offset: usize, msg: String },
    #[error("unknown gate kind `{0}`")]
    UnknownGate(String),
    #[error("variable index {index} out of range for {nvars} variables")]
    VarOutOfRange { index: usize, nvars: usize },
    #[error("truth table requires n <= {max}, got n = {n}")]
    TooManyVars { n: usize, max: usize },
    #[error("gate arity mismatch: {0}")]
    Arity(String),
    #[error("decomposition threshold {t} outside 1..={size}")]
    BadThreshold { t: usize, size: usize },
}

/// A leaf gate: the class `G` of functions allowed at formula leaves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LeafGate {
    /// Parity of the masked input bits, flipped if `negated`.
    XorMask { mask: u64, negated: bool },
    /// `1` iff the weighted sum of inputs reaches the threshold.
    Ltf { weights: Vec<i64>, threshold: i64 },
    /// Output depends only on the Hamming weight: `spectrum[|x|]`.
    Sym { spectrum: Vec<bool> },
    /// Raw truth table, bit `i` = value on the expansion of `i` (n <= 24).
    Table { bits: Vec<bool> },
}

impl LeafGate {
    /// Single-variable projection (1-based index handled by the parser).
    pub fn var(index0: usize) -> Self {
        LeafGate::XorMask { mask: 1u64 << index0, negated: false }
    }

    pub fn eval(&self, x: u64, n: usize) -> bool {
        match self {
            LeafGate::XorMask { mask, negated } => {
                ((x & mask).count_ones() & 1 == 1) ^ negated
            }
            LeafGate::Ltf { weights, threshold } => {
                let mut sum: i64 = 0;
                for (i, w) in weights.iter().enumerate() {
                    if x >> i & 1 == 1 {
                        sum += w;
                    }
                }
                sum >= *threshold
            }
            LeafGate::Sym { spectrum } => spectrum[(x & mask_n(n)).count_ones() as usize],
            LeafGate::Table { bits } => bits[x as usize],
        }
    }

    /// Restrict the gate by fixing `fixed` variables (given as a mask over the
    /// original `n` indices) to the bits of `values`; the surviving variables
    /// are renumbered in increasing order of their original index.
    pub fn restrict(&self, n: usize, fixed: u64, values: u64) -> LeafGate {
        let kept: Vec<usize> = (0..n).filter(|i| fixed >> i & 1 == 0).collect();
        match self {
            LeafGate::XorMask { mask, negated } => {
                let fixed_parity = (mask & fixed & values).count_ones() & 1 == 1;
                let mut new_mask = 0u64;
                for (j, &i) in kept.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        new_mask |= 1 << j;
                    }
                }
                LeafGate::XorMask { mask: new_mask, negated: *negated ^ fixed_parity }
            }
            LeafGate::Ltf { weights, threshold } => {
                let mut t = *threshold;
                for (i, w) in weights.iter().enumerate() {
                    if fixed >> i & 1 == 1 && values >> i & 1 == 1 {
                        t -= w;
                    }
                }
                let new_weights = kept.iter().map(|&i| weights[i]).collect();
                LeafGate::Ltf { weights: new_weights, threshold: t }
            }
            LeafGate::Sym { spectrum } => {
                let w_fixed = (fixed & values & mask_n(n)).count_ones() as usize;
                let m = kept.len();
                let spectrum = (0..=m).map(|w| spectrum[w_fixed + w]).collect();
                LeafGate::Sym { spectrum }
            }
            LeafGate::Table { bits } => {
                let m = kept.len();
                let table = (0..1u64 << m)
                    .map(|y| {
                        let mut x = fixed & values;
                        for (j, &i) in kept.iter().enumerate() {
                            if y >> j & 1 == 1 {
                                x |= 1 << i;
                            }
                        }
                        bits[x as usize]
                    })
                    .collect();
                LeafGate::Table { bits: table }
            }
        }
    }

    /// Mask of variables the gate actually reads.
    pub fn support(&self, n: usize) -> u64 {
        match self {
            LeafGate::XorMask { mask, .. } => mask & mask_n(n),
            LeafGate::Ltf { weights, .. } => {
                let mut m = 0;
                for (i, w) in weights.iter().enumerate() {
                    if *w != 0 {
                        m |= 1 << i;
                    }
                }
                m
            }
            LeafGate::Sym { .. } | LeafGate::Table { .. } => mask_n(n),
        }
    }
}

pub fn mask_n(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Formula tree node, generic over the leaf payload so the same shape serves
/// gate leaves and decomposition placeholders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node<L> {
    And(Box<Node<L>>, Box<Node<L>>),
    Or(Box<Node<L>>, Box<Node<L>>),
    Not(Box<Node<L>>),
    Leaf(L),
}

impl<L> Node<L> {
    /// Number of leaf nodes (NOT gates do not count).
    pub fn size(&self) -> usize {
        match self {
            Node::And(a, b) | Node::Or(a, b) => a.size() + b.size(),
            Node::Not(c) => c.size(),
            Node::Leaf(_) => 1,
        }
    }

    pub fn leaves(&self) -> Vec<&L> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a L>) {
        match self {
            Node::And(a, b) | Node::Or(a, b) => {
                a.collect_leaves(out);
                b.collect_leaves(out);
            }
            Node::Not(c) => c.collect_leaves(out),
            Node::Leaf(l) => out.push(l),
        }
    }

    pub fn map_leaves<M>(&self, f: &mut impl FnMut(&L) -> Node<M>) -> Node<M> {
        match self {
            Node::And(a, b) => Node::And(Box::new(a.map_leaves(f)), Box::new(b.map_leaves(f))),
            Node::Or(a, b) => Node::Or(Box::new(a.map_leaves(f)), Box::new(b.map_leaves(f))),
            Node::Not(c) => Node::Not(Box::new(c.map_leaves(f))),
            Node::Leaf(l) => f(l),
        }
    }

    pub fn eval_with(&self, leaf: &impl Fn(&L) -> bool) -> bool {
        match self {
            Node::And(a, b) => a.eval_with(leaf) && b.eval_with(leaf),
            Node::Or(a, b) => a.eval_with(leaf) || b.eval_with(leaf),
            Node::Not(c) => !c.eval_with(leaf),
            Node::Leaf(l) => leaf(l),
        }
    }
}

/// Leaf payload of decomposition pieces: an original gate or a placeholder
/// standing for an earlier piece.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PieceLeaf {
    Gate(GateId),
    Placeholder(usize),
}

/// A de Morgan formula over a table of leaf gates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula {
    pub root: Node<GateId>,
    pub num_vars: usize,
    pub gates: Vec<LeafGate>,
}

impl Formula {
    pub fn new(root: Node<GateId>, num_vars: usize, gates: Vec<LeafGate>) -> Self {
        Formula { root, num_vars, gates }
    }

    /// Formula consisting of a single gate leaf.
    pub fn leaf(gate: LeafGate, num_vars: usize) -> Self {
        Formula { root: Node::Leaf(0), num_vars, gates: vec![gate] }
    }

    /// Number of leaves.
    pub fn size(&self) -> usize {
        self.root.size()
    }

    pub fn eval(&self, x: u64) -> bool {
        self.root.eval_with(&|&g: &GateId| self.gates[g].eval(x, self.num_vars))
    }

    /// Exhaustive truth table; bit `i` is the value on the expansion of `i`.
    pub fn truth_table(&self) -> Result<Vec<bool>, FormulaError> {
        const MAX: usize = 24;
        if self.num_vars > MAX {
            return Err(FormulaError::TooManyVars { n: self.num_vars, max: MAX });
        }
        Ok((0..1u64 << self.num_vars).map(|x| self.eval(x)).collect())
    }

    /// Union of the supports of all referenced gates.
    pub fn support(&self) -> u64 {
        let mut m = 0;
        for &g in self.root.leaves() {
            m |= self.gates[g].support(self.num_vars);
        }
        m
    }

    /// Render back to the s-expression grammar accepted by `parse_formula`.
    pub fn unparse(&self) -> String {
        fn rec(node: &Node<GateId>, f: &Formula, out: &mut String) {
            match node {
                Node::And(a, b) => {
                    out.push_str("(and ");
                    rec(a, f, out);
                    out.push(' ');
                    rec(b, f, out);
                    out.push(')');
                }
                Node::Or(a, b) => {
                    out.push_str("(or ");
                    rec(a, f, out);
                    out.push(' ');
                    rec(b, f, out);
                    out.push(')');
                }
                Node::Not(c) => {
                    out.push_str("(not ");
                    rec(c, f, out);
                    out.push(')');
                }
                Node::Leaf(g) => out.push_str(&unparse_gate(&f.gates[*g], f.num_vars)),
            }
        }
        let mut s = String::new();
        rec(&self.root, self, &mut s);
        s
    }
}

fn unparse_gate(gate: &LeafGate, n: usize) -> String {
    match gate {
        LeafGate::XorMask { mask, negated } => {
            let vars: Vec<String> =
                (0..n).filter(|i| mask >> i & 1 == 1).map(|i| (i + 1).to_string()).collect();
            if vars.len() == 1 && !negated {
                format!("(var {})", vars[0])
            } else {
                let kw = if *negated { "nxor" } else { "xor" };
                if vars.is_empty() {
                    format!("({kw})")
                } else {
                    format!("({kw} {})", vars.join(" "))
                }
            }
        }
        LeafGate::Ltf { weights, threshold } => {
            let ws: Vec<String> = weights.iter().map(|w| w.to_string()).collect();
            format!("(ltf ({}) {})", ws.join(" "), threshold)
        }
        LeafGate::Sym { spectrum } => {
            let bs: Vec<String> =
                spectrum.iter().map(|b| if *b { "1".into() } else { "0".to_string() }).collect();
            format!("(sym {})", bs.join(" "))
        }
        LeafGate::Table { bits } => {
            let mut nibbles = Vec::new();
            for chunk_start in (0..bits.len()).step_by(4) {
                let mut v = 0u8;
                for j in 0..4 {
                    if chunk_start + j < bits.len() && bits[chunk_start + j] {
                        v |= 1 << j;
                    }
                }
                nibbles.push(v);
            }
            // Hex digits most significant first.
            let s: String =
                nibbles.iter().rev().map(|v| char::from_digit(*v as u32, 16).unwrap()).collect();
            format!("(table {})", if s.is_empty() { "0".to_string() } else { s })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn and_of(g1: LeafGate, g2: LeafGate, n: usize) -> Formula {
        Formula::new(
            Node::And(Box::new(Node::Leaf(0)), Box::new(Node::Leaf(1))),
            n,
            vec![g1, g2],
        )
    }

    #[test]
    fn eval_and_on_ones() {
        let f = and_of(LeafGate::var(0), LeafGate::var(1), 2);
        assert!(f.eval(0b11));
        assert!(!f.eval(0b01));
    }

    #[test]
    fn eval_xor_mask_even_parity() {
        let g = LeafGate::XorMask { mask: 0b1111, negated: false };
        assert!(!g.eval(0b0101, 4));
        assert!(g.eval(0b0001, 4));
    }

    #[test]
    fn eval_or_not() {
        // OR(NOT(x1), x2) on (x1,x2) = (1,0) -> 0
        let f = Formula::new(
            Node::Or(
                Box::new(Node::Not(Box::new(Node::Leaf(0)))),
                Box::new(Node::Leaf(1)),
            ),
            2,
            vec![LeafGate::var(0), LeafGate::var(1)],
        );
        assert!(!f.eval(0b01));
        assert!(f.eval(0b00));
        assert!(f.eval(0b11));
    }

    #[test]
    fn truth_table_and() {
        let f = and_of(LeafGate::var(0), LeafGate::var(1), 2);
        assert_eq!(f.truth_table().unwrap(), vec![false, false, false, true]);
    }

    #[test]
    fn truth_table_xor() {
        let f = Formula::leaf(LeafGate::XorMask { mask: 0b11, negated: false }, 2);
        assert_eq!(f.truth_table().unwrap(), vec![false, true, true, false]);
    }

    #[test]
    fn truth_table_constant_zero_mask() {
        let f = Formula::leaf(LeafGate::XorMask { mask: 0, negated: false }, 2);
        assert_eq!(f.truth_table().unwrap(), vec![false; 4]);
    }

    #[test]
    fn truth_table_rejects_large_n() {
        let f = Formula::leaf(LeafGate::XorMask { mask: 0, negated: false }, 25);
        assert!(matches!(f.truth_table(), Err(FormulaError::TooManyVars { .. })));
    }

    #[test]
    fn ltf_eval_and_restrict() {
        let g = LeafGate::Ltf { weights: vec![3, -2, 1, 0], threshold: 1 };
        assert!(g.eval(0b0001, 4)); // 3 >= 1
        assert!(!g.eval(0b0010, 4)); // -2 < 1
        // Fix x1 = 1: threshold drops to -2, weights (-2, 1, 0).
        let r = g.restrict(4, 0b0001, 0b0001);
        assert_eq!(r, LeafGate::Ltf { weights: vec![-2, 1, 0], threshold: -2 });
        for y in 0..8u64 {
            let x = 1 | (y << 1);
            assert_eq!(g.eval(x, 4), r.eval(y, 3));
        }
    }

    #[test]
    fn sym_restrict_matches() {
        let spectrum = vec![false, true, true, false, true];
        let g = LeafGate::Sym { spectrum };
        let r = g.restrict(4, 0b0101, 0b0100);
        for y in 0..4u64 {
            let x = 0b0100 | ((y & 1) << 1) | ((y >> 1 & 1) << 3);
            assert_eq!(g.eval(x, 4), r.eval(y, 2));
        }
    }

    #[test]
    fn xor_restrict_folds_negation() {
        let g = LeafGate::XorMask { mask: 0b111, negated: false };
        let r = g.restrict(3, 0b001, 0b001);
        assert_eq!(r, LeafGate::XorMask { mask: 0b11, negated: true });
    }

    #[test]
    fn table_gate_roundtrip_restrict() {
        let bits: Vec<bool> = (0..16u64).map(|x| x.count_ones() % 3 == 1).collect();
        let g = LeafGate::Table { bits };
        let r = g.restrict(4, 0b1010, 0b0010);
        for y in 0..4u64 {
            let x = 0b0010 | (y & 1) | ((y >> 1 & 1) << 2);
            assert_eq!(g.eval(x, 4), r.eval(y, 2));
        }
    }
}

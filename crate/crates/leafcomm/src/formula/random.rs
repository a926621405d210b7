//! Random test-instance generation.
//!
//! Tree shapes are drawn uniformly over binary trees with `s` leaves
//! (Catalan-weighted splits), internal gates flip a fair coin between AND
//! and OR, and each edge carries a NOT with probability 1/8.

use num_bigint::BigUint;
use num_traits::Zero;
use rand::RngExt;
use rand_chacha::ChaCha12Rng;

use super::{Formula, LeafGate, Node};
use crate::rng::{stream_rng, Stream};

/// Which gate family leaves are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateClass {
    /// Single-variable projections (plain de Morgan formulas).
    Var,
    /// Random parity masks (non-empty) with random negation.
    Xor,
    /// Random integer-weight threshold gates.
    Ltf,
    /// Random symmetric spectra.
    Sym,
    /// Random truth tables (requires small n).
    Table,
}

/// Catalan numbers C_0.. up to `k` (number of binary trees with i+1 leaves).
fn catalans(k: usize) -> Vec<BigUint> {
    let mut c = vec![BigUint::from(1u32)];
    for n in 1..=k {
        let mut s = BigUint::zero();
        for i in 0..n {
            s += &c[i] * &c[n - 1 - i];
        }
        c.push(s);
    }
    c
}

fn shape(s: usize, cat: &[BigUint], rng: &mut ChaCha12Rng) -> Node<()> {
    if s == 1 {
        return Node::Leaf(());
    }
    // Choose the left subtree size i with probability C_{i-1} C_{s-i-1} / C_{s-1}.
    let total = &cat[s - 1];
    let bits = total.bits().max(1);
    let draw = loop {
        let mut v = BigUint::zero();
        for _ in 0..bits.div_ceil(32) {
            v = (v << 32) | BigUint::from(rng.random::<u32>());
        }
        let v = v % total;
        break v;
    };
    let mut acc = BigUint::zero();
    let mut left = 1;
    for i in 1..s {
        acc += &cat[i - 1] * &cat[s - i - 1];
        if draw < acc {
            left = i;
            break;
        }
    }
    let a = shape(left, cat, rng);
    let b = shape(s - left, cat, rng);
    if rng.random::<bool>() {
        Node::And(Box::new(a), Box::new(b))
    } else {
        Node::Or(Box::new(a), Box::new(b))
    }
}

fn sprinkle_nots(node: Node<()>, rng: &mut ChaCha12Rng) -> Node<()> {
    let inner = match node {
        Node::And(a, b) => {
            Node::And(Box::new(sprinkle_nots(*a, rng)), Box::new(sprinkle_nots(*b, rng)))
        }
        Node::Or(a, b) => {
            Node::Or(Box::new(sprinkle_nots(*a, rng)), Box::new(sprinkle_nots(*b, rng)))
        }
        Node::Not(c) => Node::Not(Box::new(sprinkle_nots(*c, rng))),
        Node::Leaf(()) => Node::Leaf(()),
    };
    if rng.random_range(0..8u8) == 0 {
        Node::Not(Box::new(inner))
    } else {
        inner
    }
}

fn random_gate(n: usize, class: GateClass, rng: &mut ChaCha12Rng) -> LeafGate {
    match class {
        GateClass::Var => LeafGate::var(rng.random_range(0..n)),
        GateClass::Xor => {
            let full = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
            let mask = loop {
                let m = rng.random::<u64>() & full;
                if m != 0 {
                    break m;
                }
            };
            LeafGate::XorMask { mask, negated: rng.random() }
        }
        GateClass::Ltf => {
            let weights = (0..n).map(|_| rng.random_range(-4..=4i64)).collect::<Vec<_>>();
            let bound: i64 = weights.iter().map(|w| w.abs()).sum();
            let threshold = rng.random_range(-bound..=bound + 1);
            LeafGate::Ltf { weights, threshold }
        }
        GateClass::Sym => {
            let spectrum = (0..=n).map(|_| rng.random()).collect();
            LeafGate::Sym { spectrum }
        }
        GateClass::Table => {
            assert!(n <= 16, "random table gates need small n");
            let bits = (0..1u64 << n).map(|_| rng.random()).collect();
            LeafGate::Table { bits }
        }
    }
}

/// Random formula with exactly `s` leaves; deterministic in `rng_seed`.
pub fn random_formula(n: usize, s: usize, gate_class: GateClass, rng_seed: u64) -> Formula {
    assert!(s >= 1, "formula size must be at least 1");
    let mut rng = stream_rng(rng_seed, Stream::FormulaGen);
    let cat = catalans(s.saturating_sub(1));
    let sh = sprinkle_nots(shape(s, &cat, &mut rng), &mut rng);
    let mut gates = Vec::with_capacity(s);
    let root = sh.map_leaves(&mut |_| {
        gates.push(random_gate(n, gate_class, &mut rng));
        Node::Leaf(gates.len() - 1)
    });
    Formula::new(root, n, gates)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_leaf_is_gate() {
        let f = random_formula(4, 1, GateClass::Xor, 7);
        assert_eq!(f.size(), 1);
        assert!(matches!(f.gates[0], LeafGate::XorMask { .. }));
    }

    #[test]
    fn deterministic_in_seed() {
        let a = random_formula(6, 9, GateClass::Xor, 3);
        let b = random_formula(6, 9, GateClass::Xor, 3);
        assert_eq!(a, b);
        let c = random_formula(6, 9, GateClass::Xor, 4);
        assert_ne!(a, c);
    }

    #[test]
    fn size_exact() {
        let f = random_formula(8, 16, GateClass::Xor, 1);
        assert_eq!(f.size(), 16);
        for s in [1, 2, 3, 5, 13, 40] {
            assert_eq!(random_formula(5, s, GateClass::Var, 9).size(), s);
        }
    }

    #[test]
    fn all_classes_evaluate() {
        for class in [GateClass::Var, GateClass::Xor, GateClass::Ltf, GateClass::Sym, GateClass::Table] {
            let f = random_formula(5, 6, class, 11);
            let _ = f.truth_table().unwrap();
        }
    }
}

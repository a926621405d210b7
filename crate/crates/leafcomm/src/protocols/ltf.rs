//! Randomized protocol for linear threshold gates.
//!
//! The parties reduce `Σ w_i x_i ≥ θ` to comparing two nonnegative m-bit
//! integers: Alice's shifted partial sum `u` and Bob's clamped requirement
//! `v`; the answer is `u ≥ v`.  They binary-search the longest common prefix
//! of `u` and `v` (most significant end first).  Each equality test hashes
//! the prefix with `c` shared random vectors; Alice sends her `c` fingerprint
//! bits and Bob answers whether they all match his.  A mismatch is detected
//! with certainty, a fake match survives with probability `2^{−c}` per test,
//! so `c = ⌈log2(steps/δ)⌉` keeps the total error below `δ`.  After the
//! search, the first differing bit decides the comparison.

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::{MessageFn, PNode, ProtocolError, ProtocolTree, RandomizedProtocol, Split};
use crate::formula::LeafGate;

struct Params {
    n: usize,
    left: usize,
    weights: Vec<i64>,
    threshold: i64,
    min_a: i64,
    range_a: i64,
    m: usize,
    steps: usize,
    c: usize,
}

impl Params {
    /// Alice's nonnegative comparand.
    fn u(&self, a: u64) -> u64 {
        let mut s: i64 = -self.min_a;
        for i in 0..self.left {
            if a >> i & 1 == 1 {
                s += self.weights[i];
            }
        }
        s as u64
    }

    /// Bob's nonnegative comparand, clamped into [0, range_a + 1].
    fn v(&self, b: u64) -> u64 {
        let mut sb: i64 = 0;
        for i in self.left..self.n {
            if b >> (i - self.left) & 1 == 1 {
                sb += self.weights[i];
            }
        }
        (self.threshold - sb - self.min_a).clamp(0, self.range_a + 1) as u64
    }
}

/// Randomized greater-than protocol for an LTF gate with error at most
/// `delta` on every input.
pub fn ltf_randomized_protocol(
    gate: &LeafGate,
    n: usize,
    delta: &BigRational,
) -> Result<RandomizedProtocol, ProtocolError> {
    let LeafGate::Ltf { weights, threshold } = gate else {
        return Err(ProtocolError::WrongGateKind);
    };
    if weights.len() != n {
        return Err(ProtocolError::BadParams(format!(
            "ltf gate has {} weights for n = {n}",
            weights.len()
        )));
    }
    if delta <= &BigRational::zero() || delta >= &BigRational::one() {
        return Err(ProtocolError::BadParams(format!("delta = {delta} outside (0, 1)")));
    }
    let split = Split::canonical_two_party(n);
    let left = split.share_bits(n, 0);
    let min_a: i64 = weights[..left].iter().map(|w| w.min(&0)).sum();
    let range_a: i64 = weights[..left].iter().map(|w| w.abs()).sum();
    // Comparands live in [0, range_a + 1]; m bits cover them.
    let m = (64 - (range_a as u64 + 1).leading_zeros() as usize).max(1);
    // Binary search over prefix cut positions 0..=m.
    let steps = (usize::BITS - m.leading_zeros()) as usize; // ceil(log2(m+1))
    let delta_f = delta.to_f64().unwrap_or(1e-9);
    let c = ((steps as f64 / delta_f).log2().ceil() as usize).max(1);
    let params = Arc::new(Params {
        n,
        left,
        weights: weights.clone(),
        threshold: *threshold,
        min_a,
        range_a,
        m,
        steps,
        c,
    });
    let randomness_bits = steps * c * m;
    let cost = steps * (c + 1) + 1;
    let p2 = Arc::clone(&params);
    let family = Arc::new(move |bits: &[bool]| build_tree(&p2, bits));
    Ok(RandomizedProtocol::new(n, split, randomness_bits, delta.clone(), cost, family))
}

/// Decode the shared random vectors: `steps × c` masks of `m` bits.
fn vectors(params: &Params, bits: &[bool]) -> Vec<Vec<u64>> {
    let mut out = Vec::with_capacity(params.steps);
    let mut idx = 0;
    for _ in 0..params.steps {
        let mut bank = Vec::with_capacity(params.c);
        for _ in 0..params.c {
            let mut v = 0u64;
            for j in 0..params.m {
                if bits[idx + j] {
                    v |= 1 << j;
                }
            }
            idx += params.m;
            bank.push(v);
        }
        out.push(bank);
    }
    out
}

fn parity(x: u64) -> bool {
    x.count_ones() & 1 == 1
}

fn build_tree(params: &Params, bits: &[bool]) -> ProtocolTree {
    let vecs = vectors(params, bits);
    let a_all: Vec<u64> = (0..1u64 << params.left).collect();
    let b_all: Vec<u64> = (0..1u64 << (params.n - params.left)).collect();
    let root = search_node(params, &vecs, 0, params.m, 0, &a_all, &b_all);
    let mut tree = ProtocolTree {
        n: params.n,
        split: Split::TwoParty { left: params.left },
        cost: 0,
        root,
    };
    tree.recompute_cost();
    tree
}

/// Binary-search state (lo, hi): prefixes at or above `hi` are known equal.
fn search_node(
    params: &Params,
    vecs: &[Vec<u64>],
    lo: usize,
    hi: usize,
    iter: usize,
    a_set: &[u64],
    b_set: &[u64],
) -> PNode {
    if lo == hi {
        if lo == 0 {
            // Comparands identical: u >= v holds.
            return PNode::Leaf { output: true };
        }
        // First differing bit: Alice reveals it and it decides the order.
        let p = lo - 1;
        let params2 = params_fn(params);
        let table =
            MessageFn::Func(Arc::new(move |a| params2.u(a) >> p & 1 == 1));
        let child = |bit: bool| -> Option<Box<PNode>> {
            if a_set.iter().any(|&a| (params.u(a) >> p & 1 == 1) == bit) {
                Some(Box::new(PNode::Leaf { output: bit }))
            } else {
                None
            }
        };
        return PNode::Node { owner: 0, message: table, zero: child(false), one: child(true) };
    }
    let mid = (lo + hi) / 2;
    fingerprint_node(params, vecs, lo, hi, mid, iter, 0, Vec::new(), a_set, b_set)
}

/// Alice's `c` fingerprint bits of the prefix `u >> mid`, sent one per node,
/// followed by Bob's match verdict.
#[allow(clippy::too_many_arguments)]
fn fingerprint_node(
    params: &Params,
    vecs: &[Vec<u64>],
    lo: usize,
    hi: usize,
    mid: usize,
    iter: usize,
    i: usize,
    sent: Vec<bool>,
    a_set: &[u64],
    b_set: &[u64],
) -> PNode {
    if i == params.c {
        // Bob: all fingerprints match?
        let params2 = params_fn(params);
        let bank: Vec<u64> = vecs[iter].clone();
        let sent2 = sent.clone();
        let table = MessageFn::Func(Arc::new(move |b| {
            let pv = params2.v(b) >> mid;
            bank.iter().zip(&sent2).all(|(r, s)| parity(pv & r) == *s)
        }));
        let (eq_b, ne_b): (Vec<u64>, Vec<u64>) = b_set.iter().partition(|&&b| {
            let pv = params.v(b) >> mid;
            vecs[iter].iter().zip(&sent).all(|(r, s)| parity(pv & r) == *s)
        });
        let child = |bit: bool, subset: Vec<u64>| -> Option<Box<PNode>> {
            if subset.is_empty() {
                return None;
            }
            let (nlo, nhi) = if bit { (lo, mid) } else { (mid + 1, hi) };
            Some(Box::new(search_node(params, vecs, nlo, nhi, iter + 1, a_set, &subset)))
        };
        return PNode::Node {
            owner: 1,
            message: table,
            zero: child(false, ne_b),
            one: child(true, eq_b),
        };
    }
    let r = vecs[iter][i];
    let params2 = params_fn(params);
    let table = MessageFn::Func(Arc::new(move |a| parity((params2.u(a) >> mid) & r)));
    let (ones, zeros): (Vec<u64>, Vec<u64>) =
        a_set.iter().partition(|&&a| parity((params.u(a) >> mid) & r));
    // Bob's set is untouched while Alice talks; her set splits on the bit.
    let child = |bit: bool, subset: Vec<u64>| -> Option<Box<PNode>> {
        if subset.is_empty() {
            return None;
        }
        let mut nsent = sent.clone();
        nsent.push(bit);
        Some(Box::new(fingerprint_node(
            params,
            vecs,
            lo,
            hi,
            mid,
            iter,
            i + 1,
            nsent,
            &subset,
            b_set,
        )))
    };
    PNode::Node { owner: 0, message: table, zero: child(false, zeros), one: child(true, ones) }
}

/// Cheap cloneable closure capture of the arithmetic parts of `Params`.
fn params_fn(p: &Params) -> Params {
    Params {
        n: p.n,
        left: p.left,
        weights: p.weights.clone(),
        threshold: p.threshold,
        min_a: p.min_a,
        range_a: p.range_a,
        m: p.m,
        steps: p.steps,
        c: p.c,
    }
}

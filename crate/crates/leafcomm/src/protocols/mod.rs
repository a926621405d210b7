//! Communication protocols as explicit trees.
//!
//! A [`ProtocolTree`] is a rooted binary tree: each internal node is owned by
//! a party and carries a message function over that party's share of the
//! input; leaves carry the output bit.  Root-to-leaf paths are transcripts,
//! and the inputs generating a transcript form a combinatorial rectangle.
//! Children that no input pair can reach are pruned (`None`), which is what
//! keeps trees for long protocols (e.g. fingerprint comparisons) small.

mod ltf;

pub use ltf::ltf_randomized_protocol;

use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use rand::RngExt;
use thiserror::Error;

use crate::formula::LeafGate;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("transcript does not label a path in the tree")]
    UnknownTranscript,
    #[error("gate kind does not match this protocol constructor")]
    WrongGateKind,
    #[error("{0}")]
    BadParams(String),
}

/// How the `n` input bits are divided among parties.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    /// Alice holds the first `left` bits, Bob the rest.
    TwoParty { left: usize },
    /// `k` contiguous blocks of `n/k` bits, number-in-hand.
    Nih { k: usize, block: usize },
}

impl Split {
    pub fn canonical_two_party(n: usize) -> Split {
        Split::TwoParty { left: n.div_ceil(2) }
    }

    pub fn parties(&self) -> usize {
        match self {
            Split::TwoParty { .. } => 2,
            Split::Nih { k, .. } => *k,
        }
    }

    /// Bit width of party `i`'s share.
    pub fn share_bits(&self, n: usize, i: usize) -> usize {
        match self {
            Split::TwoParty { left } => {
                if i == 0 {
                    *left
                } else {
                    n - left
                }
            }
            Split::Nih { block, .. } => *block,
        }
    }

    /// Extract party `i`'s share from a full input.
    pub fn share(&self, n: usize, x: u64, i: usize) -> u64 {
        match self {
            Split::TwoParty { left } => {
                if i == 0 {
                    x & low_mask(*left)
                } else {
                    x >> left & low_mask(n - left)
                }
            }
            Split::Nih { block, .. } => x >> (i * block) & low_mask(*block),
        }
    }

    /// Rebuild a full input from the per-party shares.
    pub fn assemble(&self, shares: &[u64]) -> u64 {
        match self {
            Split::TwoParty { left } => shares[0] | shares[1] << left,
            Split::Nih { block, .. } => {
                shares.iter().enumerate().fold(0, |acc, (i, s)| acc | s << (i * block))
            }
        }
    }
}

pub(crate) fn low_mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// Message function at an internal node: a materialized table over the
/// owner's share, or an opaque callable for evaluation-only protocols.
#[derive(Clone)]
pub enum MessageFn {
    Table(Arc<Vec<bool>>),
    Func(Arc<dyn Fn(u64) -> bool + Send + Sync>),
}

impl MessageFn {
    pub fn at(&self, share: u64) -> bool {
        match self {
            MessageFn::Table(t) => t[share as usize],
            MessageFn::Func(f) => f(share),
        }
    }

    fn table_from(bits: usize, f: impl Fn(u64) -> bool) -> MessageFn {
        MessageFn::Table(Arc::new((0..1u64 << bits).map(f).collect()))
    }
}

impl fmt::Debug for MessageFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MessageFn::Table(t) => write!(f, "Table[{} entries]", t.len()),
            MessageFn::Func(_) => write!(f, "Func(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub enum PNode {
    Leaf {
        output: bool,
    },
    Node {
        owner: usize,
        message: MessageFn,
        /// Children under message bit 0 / 1; `None` marks a branch no input
        /// pair can reach.
        zero: Option<Box<PNode>>,
        one: Option<Box<PNode>>,
    },
}

#[derive(Debug, Clone)]
pub struct ProtocolTree {
    pub n: usize,
    pub split: Split,
    /// Communication cost: the depth of the tree.
    pub cost: usize,
    pub root: PNode,
}

/// The inputs generating one transcript: a product of per-party sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rectangle {
    pub transcript: Vec<bool>,
    pub side_sets: Vec<Vec<u64>>,
    pub output: bool,
}

impl ProtocolTree {
    /// Cost-0 protocol outputting a constant.
    pub fn constant(n: usize, split: Split, output: bool) -> ProtocolTree {
        ProtocolTree { n, split, cost: 0, root: PNode::Leaf { output } }
    }

    /// Evaluate on a full input, returning output and transcript.
    pub fn run(&self, x: u64) -> (bool, Vec<bool>) {
        let mut node = &self.root;
        let mut transcript = Vec::new();
        loop {
            match node {
                PNode::Leaf { output } => return (*output, transcript),
                PNode::Node { owner, message, zero, one } => {
                    let share = self.split.share(self.n, x, *owner);
                    let bit = message.at(share);
                    transcript.push(bit);
                    let child = if bit { one } else { zero };
                    node = child
                        .as_ref()
                        .expect("reachability pruning removed a branch a real input follows")
                        .as_ref();
                }
            }
        }
    }

    pub fn eval(&self, x: u64) -> bool {
        self.run(x).0
    }

    fn depth(node: &PNode) -> usize {
        match node {
            PNode::Leaf { .. } => 0,
            PNode::Node { zero, one, .. } => {
                let z = zero.as_ref().map_or(0, |c| Self::depth(c));
                let o = one.as_ref().map_or(0, |c| Self::depth(c));
                1 + z.max(o)
            }
        }
    }

    pub fn recompute_cost(&mut self) {
        self.cost = Self::depth(&self.root);
    }
}

/// Cost-2 protocol for a parity mask: Alice announces the parity of her
/// masked bits, Bob folds in his own masked parity and the negation flag,
/// and the output is Bob's bit.
pub fn xor_protocol(gate: &LeafGate, n: usize) -> Result<ProtocolTree, ProtocolError> {
    let LeafGate::XorMask { mask, negated } = gate else {
        return Err(ProtocolError::WrongGateKind);
    };
    let split = Split::canonical_two_party(n);
    let left = split.share_bits(n, 0);
    let right = split.share_bits(n, 1);
    let mask_a = mask & low_mask(left);
    let mask_b = mask >> left & low_mask(right);
    let neg = *negated;
    let bob_node = |alice_bit: bool| -> Option<Box<PNode>> {
        let table = MessageFn::table_from(right, move |b| {
            ((b & mask_b).count_ones() & 1 == 1) ^ alice_bit ^ neg
        });
        Some(Box::new(PNode::Node {
            owner: 1,
            message: table,
            zero: Some(Box::new(PNode::Leaf { output: false })),
            one: Some(Box::new(PNode::Leaf { output: true })),
        }))
    };
    let root = PNode::Node {
        owner: 0,
        message: MessageFn::table_from(left, move |a| (a & mask_a).count_ones() & 1 == 1),
        zero: bob_node(false),
        one: bob_node(true),
    };
    Ok(ProtocolTree { n, split, cost: 2, root })
}

/// Number-in-hand protocol for a symmetric gate: each party announces its
/// block weight in `⌈log2(n/k + 1)⌉` bits (most significant first), and the
/// leaf reports the spectrum at the total.
pub fn sym_nih_protocol(
    gate: &LeafGate,
    k: usize,
    n: usize,
) -> Result<ProtocolTree, ProtocolError> {
    let LeafGate::Sym { spectrum } = gate else {
        return Err(ProtocolError::WrongGateKind);
    };
    if k == 0 || n % k != 0 {
        return Err(ProtocolError::BadParams(format!("k = {k} must divide n = {n}")));
    }
    let block = n / k;
    let w_bits = usize::BITS as usize - block.leading_zeros() as usize; // ceil(log2(block+1))

    fn build(
        party: usize,
        bit: usize,
        acc_weight: usize,
        prefix: u64,
        k: usize,
        block: usize,
        w_bits: usize,
        spectrum: &[bool],
    ) -> PNode {
        if party == k {
            return PNode::Leaf { output: spectrum[acc_weight] };
        }
        if bit == w_bits {
            return build(
                party + 1,
                0,
                acc_weight + prefix as usize,
                0,
                k,
                block,
                w_bits,
                spectrum,
            );
        }
        let shift = w_bits - 1 - bit;
        let message =
            MessageFn::table_from(block, move |share| share.count_ones() as u64 >> shift & 1 == 1);
        // A child is reachable iff some weight in 0..=block extends the prefix.
        let child = |b: u64| -> Option<Box<PNode>> {
            let p = prefix << 1 | b;
            let lo = (p << shift) as usize;
            if lo > block {
                return None;
            }
            Some(Box::new(build(party, bit + 1, acc_weight, p, k, block, w_bits, spectrum)))
        };
        PNode::Node { owner: party, message, zero: child(0), one: child(1) }
    }

    let root = build(0, 0, 0, 0, k, block, w_bits, spectrum);
    let mut tree = ProtocolTree { n, split: Split::Nih { k, block }, cost: k * w_bits, root };
    tree.recompute_cost();
    Ok(tree)
}

/// Fallback two-party protocol for an arbitrary gate: Alice announces her
/// whole share bit by bit, then Bob announces the gate value.
pub fn trivial_protocol(gate: &LeafGate, n: usize) -> ProtocolTree {
    let split = Split::canonical_two_party(n);
    let left = split.share_bits(n, 0);
    let right = split.share_bits(n, 1);

    fn build(
        bit: usize,
        prefix: u64,
        left: usize,
        right: usize,
        gate: &LeafGate,
        n: usize,
    ) -> PNode {
        if bit == left {
            let g = gate.clone();
            let table = MessageFn::table_from(right, move |b| g.eval(prefix | b << left, n));
            return PNode::Node {
                owner: 1,
                message: table,
                zero: Some(Box::new(PNode::Leaf { output: false })),
                one: Some(Box::new(PNode::Leaf { output: true })),
            };
        }
        let message = MessageFn::table_from(left, move |a| a >> bit & 1 == 1);
        PNode::Node {
            owner: 0,
            message,
            zero: Some(Box::new(build(bit + 1, prefix, left, right, gate, n))),
            one: Some(Box::new(build(bit + 1, prefix | 1 << bit, left, right, gate, n))),
        }
    }

    let root = build(0, 0, left, right, gate, n);
    ProtocolTree { n, split, cost: left + 1, root }
}

/// All transcripts and their rectangles, built by filtering each party's
/// possible shares against the path (nonempty rectangles only).
pub fn enumerate_leaves(p: &ProtocolTree) -> Vec<Rectangle> {
    let parties = p.split.parties();
    let sets: Vec<Vec<u64>> =
        (0..parties).map(|i| (0..1u64 << p.split.share_bits(p.n, i)).collect()).collect();
    let mut out = Vec::new();
    walk(&p.root, sets, Vec::new(), &mut out);
    out
}

fn walk(node: &PNode, sets: Vec<Vec<u64>>, transcript: Vec<bool>, out: &mut Vec<Rectangle>) {
    match node {
        PNode::Leaf { output } => {
            out.push(Rectangle { transcript, side_sets: sets, output: *output });
        }
        PNode::Node { owner, message, zero, one } => {
            let (yes, no): (Vec<u64>, Vec<u64>) =
                sets[*owner].iter().partition(|s| message.at(**s));
            for (bit, subset, child) in [(false, no, zero), (true, yes, one)] {
                if subset.is_empty() {
                    continue;
                }
                let Some(child) = child else { continue };
                let mut next = sets.clone();
                next[*owner] = subset;
                let mut t = transcript.clone();
                t.push(bit);
                walk(child, next, t, out);
            }
        }
    }
}

/// Is `share` consistent, on `side`, with the given transcript?  Simulates
/// the party's own messages along the path and checks them against it.
pub fn rectangle_membership(
    p: &ProtocolTree,
    side: usize,
    share: u64,
    transcript: &[bool],
) -> Result<bool, ProtocolError> {
    let mut node = &p.root;
    for &bit in transcript {
        match node {
            PNode::Leaf { .. } => return Err(ProtocolError::UnknownTranscript),
            PNode::Node { owner, message, zero, one } => {
                if *owner == side && message.at(share) != bit {
                    return Ok(false);
                }
                let child = if bit { one } else { zero };
                match child {
                    Some(c) => node = c,
                    None => return Err(ProtocolError::UnknownTranscript),
                }
            }
        }
    }
    Ok(true)
}

/// A randomized protocol: a family of deterministic trees indexed by a
/// shared random string, with a per-input error bound.
#[derive(Clone)]
pub struct RandomizedProtocol {
    pub n: usize,
    pub split: Split,
    pub randomness_bits: usize,
    pub error_bound: BigRational,
    /// Worst-case communication cost over the family.
    pub cost: usize,
    family: Arc<dyn Fn(&[bool]) -> ProtocolTree + Send + Sync>,
}

impl fmt::Debug for RandomizedProtocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "RandomizedProtocol(n={}, r={}, cost<={}, err<={})",
            self.n, self.randomness_bits, self.cost, self.error_bound
        )
    }
}

impl RandomizedProtocol {
    pub fn new(
        n: usize,
        split: Split,
        randomness_bits: usize,
        error_bound: BigRational,
        cost: usize,
        family: Arc<dyn Fn(&[bool]) -> ProtocolTree + Send + Sync>,
    ) -> Self {
        RandomizedProtocol { n, split, randomness_bits, error_bound, cost, family }
    }

    /// Wrap a deterministic protocol as a zero-randomness family.
    pub fn from_deterministic(tree: ProtocolTree) -> Self {
        let n = tree.n;
        let split = tree.split;
        let cost = tree.cost;
        RandomizedProtocol {
            n,
            split,
            randomness_bits: 0,
            error_bound: BigRational::default(),
            cost,
            family: Arc::new(move |_| tree.clone()),
        }
    }

    /// The fixed-randomness member of the family.
    pub fn sample_deterministic(&self, random_string: &[bool]) -> ProtocolTree {
        assert_eq!(
            random_string.len(),
            self.randomness_bits,
            "random string length must equal the protocol's randomness"
        );
        (self.family)(random_string)
    }

    pub fn sample_with_rng(&self, rng: &mut impl rand::Rng) -> ProtocolTree {
        let bits: Vec<bool> = (0..self.randomness_bits).map(|_| rng.random()).collect();
        (self.family)(&bits)
    }

    /// Exact acceptance probability on `x`, averaging over the whole family
    /// (requires few randomness bits).
    pub fn acceptance_probability(&self, x: u64) -> BigRational {
        assert!(self.randomness_bits <= 20, "exhaustive averaging needs r <= 20");
        let total = 1u64 << self.randomness_bits;
        let mut hits = 0u64;
        for r in 0..total {
            let bits: Vec<bool> = (0..self.randomness_bits).map(|i| r >> i & 1 == 1).collect();
            if (self.family)(&bits).eval(x) {
                hits += 1;
            }
        }
        BigRational::new(hits.into(), total.into())
    }
}

/// Repetition count that drives a 1/3-error protocol below `eps'` under
/// majority vote; the explicit constant feeds the #SAT term accounting.
pub fn majority_repetitions(eps_prime: &BigRational) -> usize {
    use num_traits::ToPrimitive;
    let e = eps_prime.to_f64().unwrap_or(1e-9).max(1e-300);
    let reps = (18.0 * (1.0 / e).ln()).ceil() as usize;
    reps.max(1) | 1 // odd
}

/// Random deterministic protocol of the given cost, for stress tests.
pub fn random_protocol(n: usize, cost: usize, seed: u64) -> ProtocolTree {
    use crate::rng::{stream_rng, Stream};
    let split = Split::canonical_two_party(n);

    fn build(depth: usize, n: usize, split: Split, rng: &mut impl rand::Rng) -> PNode {
        if depth == 0 {
            return PNode::Leaf { output: rng.random() };
        }
        let owner = rng.random_range(0..2usize);
        let bits = split.share_bits(n, owner);
        let table: Vec<bool> = (0..1u64 << bits).map(|_| rng.random()).collect();
        PNode::Node {
            owner,
            message: MessageFn::Table(Arc::new(table)),
            zero: Some(Box::new(build(depth - 1, n, split, rng))),
            one: Some(Box::new(build(depth - 1, n, split, rng))),
        }
    }

    let mut rng = stream_rng(seed, Stream::Custom(0xB00));
    let root = build(cost, n, split, &mut rng);
    ProtocolTree { n, split, cost, root }
}

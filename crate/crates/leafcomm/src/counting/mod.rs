//! Exact #SAT for formulas over protocol-equipped leaf gates.
//!
//! The fast path restricts a set `T` of variables (half from each side),
//! approximates the top formula over its leaf slots by a polynomial with
//! error `1/(3·2^{n'})`, factors each restricted leaf through its protocol's
//! 1-rectangles, and evaluates the resulting sum of rank-one terms as a
//! product of a (left half-inputs × terms) matrix with a (terms × right
//! half-inputs) matrix.  Entries of the product determine the restricted
//! counts after rounding to the nearest integer; the construction guarantees
//! the rounding gap stays below 1/3, and the deterministic path asserts it.

mod matrix;

pub use matrix::{matmul, MatmulBackend, RationalMatrix, StandardBackend};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use thiserror::Error;

use crate::formula::{Formula, FormulaError, LeafGate, Node};
use crate::polynomial::{build_approx, common_denominator, PolyError};
use crate::protocols::{
    enumerate_leaves, ltf_randomized_protocol, sym_nih_protocol, trivial_protocol, xor_protocol,
    ProtocolError, ProtocolTree, RandomizedProtocol, Rectangle,
};
use crate::rng::{task_rng, Stream};

#[derive(Debug, Error)]
pub enum CountError {
    #[error("brute force requires n <= {max}, got {n}")]
    TooManyVars { n: usize, max: usize },
    #[error("fast counting requires even n and even n' with 1 <= n' <= n-2 (n = {n}, n' = {nprime})")]
    BadRestriction { n: usize, nprime: usize },
    #[error("fast counting supports formulas of size <= {max}, got {s}")]
    TooLarge { s: usize, max: usize },
    #[error("term count {m} exceeds the configured cap {cap}")]
    TermCapExceeded { m: u128, cap: u128 },
    #[error("rounding gap exceeded 1/3 at restricted input {x}: Q' = {value}")]
    RoundingGap { x: u64, value: String },
    #[error("leaf {leaf} protocol disagrees with its gate on rectangle {transcript:?}")]
    NonMonochromatic { leaf: usize, transcript: Vec<bool> },
    #[error("deterministic #SAT needs deterministic leaf protocols (leaf {0} is randomized)")]
    NeedDeterministic(usize),
    #[error("matrix dimension mismatch: {lhs:?} x {rhs:?}")]
    DimensionMismatch { lhs: (usize, usize), rhs: (usize, usize) },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

/// How each leaf gate is realized as a communication protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeafProtocolSpec {
    /// Cost-2 two-party parity protocol (deterministic).
    Xor,
    /// Two-party (k = 2) number-in-hand weight announcement (deterministic).
    Sym,
    /// Alice ships her share, Bob announces the value (deterministic).
    Trivial,
    /// Randomized fingerprint comparison for threshold gates.
    LtfFingerprint,
}

impl LeafProtocolSpec {
    pub fn is_deterministic(&self) -> bool {
        !matches!(self, LeafProtocolSpec::LtfFingerprint)
    }

    fn natural_for(gate: &LeafGate) -> LeafProtocolSpec {
        match gate {
            LeafGate::XorMask { .. } => LeafProtocolSpec::Xor,
            LeafGate::Sym { .. } => LeafProtocolSpec::Sym,
            LeafGate::Ltf { .. } => LeafProtocolSpec::LtfFingerprint,
            LeafGate::Table { .. } => LeafProtocolSpec::Trivial,
        }
    }
}

/// A formula whose leaves carry communication protocols.
#[derive(Debug, Clone)]
pub struct LeafDevice {
    pub formula: Formula,
    /// Parallel to `formula.gates`.
    pub specs: Vec<LeafProtocolSpec>,
}

impl LeafDevice {
    /// Pick the natural protocol for every gate kind.
    pub fn new(formula: Formula) -> Self {
        let specs = formula.gates.iter().map(LeafProtocolSpec::natural_for).collect();
        LeafDevice { formula, specs }
    }

    pub fn with_specs(formula: Formula, specs: Vec<LeafProtocolSpec>) -> Self {
        assert_eq!(formula.gates.len(), specs.len());
        LeafDevice { formula, specs }
    }

    /// Deterministic protocol for gate `id` over `bits` variables (used on
    /// restricted gates; `bits = n` gives the unrestricted protocol).
    pub fn deterministic_protocol(
        &self,
        id: usize,
        gate: &LeafGate,
        bits: usize,
    ) -> Result<ProtocolTree, CountError> {
        match self.specs[id] {
            LeafProtocolSpec::Xor => Ok(xor_protocol(gate, bits)?),
            LeafProtocolSpec::Sym => Ok(sym_nih_protocol(gate, 2, bits)?),
            LeafProtocolSpec::Trivial => Ok(trivial_protocol(gate, bits)),
            LeafProtocolSpec::LtfFingerprint => Err(CountError::NeedDeterministic(id)),
        }
    }

    /// Randomized protocol for gate `id` with the requested error bound.
    pub fn randomized_protocol(
        &self,
        id: usize,
        gate: &LeafGate,
        bits: usize,
        delta: &BigRational,
    ) -> Result<RandomizedProtocol, CountError> {
        match self.specs[id] {
            LeafProtocolSpec::LtfFingerprint => Ok(ltf_randomized_protocol(gate, bits, delta)?),
            _ => Ok(RandomizedProtocol::from_deterministic(
                self.deterministic_protocol(id, gate, bits)?,
            )),
        }
    }

    /// Spot-check that every deterministic leaf protocol computes its gate.
    pub fn verify_protocols(&self) -> Result<(), CountError> {
        let n = self.formula.num_vars;
        assert!(n <= 16, "protocol verification is exhaustive");
        for (id, gate) in self.formula.gates.iter().enumerate() {
            if !self.specs[id].is_deterministic() {
                continue;
            }
            let p = self.deterministic_protocol(id, gate, n)?;
            for x in 0..1u64 << n {
                if p.eval(x) != gate.eval(x, n) {
                    return Err(CountError::NonMonochromatic { leaf: id, transcript: vec![] });
                }
            }
        }
        Ok(())
    }
}

/// Exact satisfying-assignment count by full enumeration.
pub fn count_sat_bruteforce(d: &LeafDevice) -> Result<u64, CountError> {
    const MAX: usize = 28;
    let n = d.formula.num_vars;
    if n > MAX {
        return Err(CountError::TooManyVars { n, max: MAX });
    }
    Ok((0..1u64 << n).filter(|&x| d.formula.eval(x)).count() as u64)
}

/// Restriction width from the running-time balance: `⌊n/(c·√s·log²s·D)⌋`,
/// floored at 1 and capped at `n − 2`; `log²(s)` is floored at 1 so tiny
/// formulas do not blow the denominator.
pub fn choose_nprime(n: usize, s: usize, cost: usize, c: f64) -> usize {
    let log2s = (s as f64).log2();
    let denom = c * (s as f64).sqrt() * (log2s * log2s).max(1.0) * cost.max(1) as f64;
    let raw = (n as f64 / denom).floor() as usize;
    raw.max(1).min(n.saturating_sub(2).max(1))
}

/// `choose_nprime` adjusted down to even parity so the half/half restriction
/// is realizable.
pub fn usable_nprime(n: usize, s: usize, cost: usize, c: f64) -> usize {
    let mut np = choose_nprime(n, s, cost, c);
    if np % 2 == 1 {
        np = if np + 1 <= n.saturating_sub(2) { np + 1 } else { np.saturating_sub(1).max(2) };
    }
    np.max(2)
}

#[derive(Debug, Clone)]
pub struct CountReport {
    pub count: u64,
    /// Term count of the expanded sum (the product formula Σ_z Σ_S Π|ones|).
    pub m_terms: u128,
    pub nprime: usize,
    /// Degree of the leaf-slot approximating polynomial.
    pub degree: usize,
    pub wall_ms: u128,
    pub backend: String,
}

#[derive(Debug, Clone)]
pub struct FastOptions {
    pub nprime: Option<usize>,
    /// Constant in the n' balance when `nprime` is not forced.
    pub c: f64,
    pub term_cap: u128,
}

impl Default for FastOptions {
    fn default() -> Self {
        FastOptions { nprime: None, c: 8.0, term_cap: 1 << 26 }
    }
}

const MAX_FAST_SIZE: usize = 16;

struct Restriction {
    /// Mask of the fixed variables.
    fixed_mask: u64,
    /// Fixed variable indices in increasing order.
    fixed_vars: Vec<usize>,
    /// Free bits per side.
    side_bits: usize,
}

impl Restriction {
    fn build(n: usize, nprime: usize) -> Self {
        let half = n / 2;
        let mut fixed_vars: Vec<usize> = (0..nprime / 2).collect();
        fixed_vars.extend((0..nprime / 2).map(|j| half + j));
        let fixed_mask = fixed_vars.iter().fold(0u64, |m, &v| m | 1 << v);
        Restriction { fixed_mask, fixed_vars, side_bits: (n - nprime) / 2 }
    }

    /// Values mask for the restricted assignment index `z`.
    fn values_of(&self, z: u64) -> u64 {
        let mut vals = 0u64;
        for (j, &v) in self.fixed_vars.iter().enumerate() {
            if z >> j & 1 == 1 {
                vals |= 1 << v;
            }
        }
        vals
    }
}

/// 1-rectangles of one restricted leaf protocol as side bitmaps.
struct LeafOnes {
    rects: Vec<(u128, u128)>,
}

fn one_rectangles(
    rects: &[Rectangle],
    side_bits: usize,
) -> Vec<(u128, u128)> {
    let _ = side_bits;
    rects
        .iter()
        .filter(|r| r.output)
        .map(|r| {
            let a = r.side_sets[0].iter().fold(0u128, |m, &v| m | 1 << v);
            let b = r.side_sets[1].iter().fold(0u128, |m, &v| m | 1 << v);
            (a, b)
        })
        .collect()
}

/// Deterministic #SAT through the restriction/polynomial/rectangle pipeline.
/// The result equals `count_sat_bruteforce` exactly.
pub fn count_sat_fast(d: &LeafDevice, opts: &FastOptions) -> Result<CountReport, CountError> {
    let start = std::time::Instant::now();
    let n = d.formula.num_vars;
    let s = d.formula.size();
    if s > MAX_FAST_SIZE {
        return Err(CountError::TooLarge { s, max: MAX_FAST_SIZE });
    }
    for (id, spec) in d.specs.iter().enumerate() {
        if !spec.is_deterministic() {
            return Err(CountError::NeedDeterministic(id));
        }
    }
    let max_leaf_cost = protocol_cost_bound(d)?;
    let nprime = opts.nprime.unwrap_or_else(|| usable_nprime(n, s, max_leaf_cost, opts.c));
    if n % 2 != 0 || nprime % 2 != 0 || nprime < 1 || nprime + 2 > n {
        return Err(CountError::BadRestriction { n, nprime });
    }

    // Approximating polynomial of the skeleton over its leaf slots, with
    // eps = 1/(3·2^{n'}); built once, shared by every restriction.
    let (skeleton, slots) = skeleton_formula(&d.formula);
    let eps = BigRational::new(BigInt::from(1), BigInt::from(3) << nprime);
    let report = build_approx(&skeleton, &eps)?;
    let poly = report.poly;
    let degree = report.degree;

    let restriction = Restriction::build(n, nprime);
    let rbits = n - nprime;

    // Per (z, leaf): the 1-rectangles of the restricted protocol.
    let mut leaf_ones: Vec<Vec<LeafOnes>> = Vec::with_capacity(1 << nprime);
    for z in 0..1u64 << nprime {
        let values = restriction.values_of(z);
        let mut per_leaf = Vec::with_capacity(slots.len());
        for &gate_id in &slots {
            let restricted =
                d.formula.gates[gate_id].restrict(n, restriction.fixed_mask, values);
            let tree = d.deterministic_protocol(gate_id, &restricted, rbits)?;
            let rects = enumerate_leaves(&tree);
            // Every rectangle must be monochromatic under the restricted gate.
            for r in &rects {
                for &a in &r.side_sets[0] {
                    for &b in &r.side_sets[1] {
                        let x = a | b << restriction.side_bits;
                        if restricted.eval(x, rbits) != r.output {
                            return Err(CountError::NonMonochromatic {
                                leaf: gate_id,
                                transcript: r.transcript.clone(),
                            });
                        }
                    }
                }
            }
            per_leaf.push(LeafOnes { rects: one_rectangles(&rects, restriction.side_bits) });
        }
        leaf_ones.push(per_leaf);
    }

    // Term accounting against the cap before expanding anything.
    let m_terms = term_count(&poly, &leaf_ones);
    if m_terms > opts.term_cap {
        return Err(CountError::TermCapExceeded { m: m_terms, cap: opts.term_cap });
    }

    // Stream the rank-one terms of A·B into the value table.
    let accum = accumulate_product(&poly, &leaf_ones, restriction.side_bits);
    let den = accum.den;
    let side = 1usize << restriction.side_bits;

    // Read off Q'(x), round, and verify the 1/3 gap.
    let third = BigRational::new(BigInt::from(1), BigInt::from(3));
    let mut total: u64 = 0;
    for a in 0..side {
        for b in 0..side {
            let q = BigRational::new(accum.cells[a * side + b].clone(), den.clone());
            let rounded = q.round();
            if (&q - &rounded).abs() > third {
                return Err(CountError::RoundingGap {
                    x: (a | b << restriction.side_bits) as u64,
                    value: q.to_string(),
                });
            }
            let v = rounded.to_integer().to_i64().unwrap_or(-1);
            if !(0..=1i64 << nprime).contains(&v) {
                return Err(CountError::RoundingGap {
                    x: (a | b << restriction.side_bits) as u64,
                    value: q.to_string(),
                });
            }
            total += v as u64;
        }
    }
    Ok(CountReport {
        count: total,
        m_terms,
        nprime,
        degree,
        wall_ms: start.elapsed().as_millis(),
        backend: "standard".into(),
    })
}

/// Worst leaf protocol cost on the unrestricted gates (for the n' balance).
fn protocol_cost_bound(d: &LeafDevice) -> Result<usize, CountError> {
    let n = d.formula.num_vars;
    let mut max_cost = 1;
    for (id, gate) in d.formula.gates.iter().enumerate() {
        let cost = match d.specs[id] {
            LeafProtocolSpec::Xor => 2,
            LeafProtocolSpec::Sym => sym_nih_protocol(gate, 2, n).map(|p| p.cost)?,
            LeafProtocolSpec::Trivial => n.div_ceil(2) + 1,
            LeafProtocolSpec::LtfFingerprint => {
                let delta = BigRational::new(1.into(), 3.into());
                ltf_randomized_protocol(gate, n, &delta).map(|p| p.cost)?
            }
        };
        max_cost = max_cost.max(cost);
    }
    Ok(max_cost)
}

/// Formula over fresh leaf-slot variables (slot i = i-th leaf occurrence),
/// plus the gate id behind each slot.
pub fn skeleton_formula(f: &Formula) -> (Formula, Vec<usize>) {
    let mut slots = Vec::new();
    let root = f.root.map_leaves(&mut |&g| {
        let slot = slots.len();
        slots.push(g);
        Node::Leaf(slot)
    });
    let s = slots.len();
    let gates = (0..s).map(LeafGate::var).collect();
    (Formula::new(root, s, gates), slots)
}

/// `Σ_z Σ_S Π_{i∈S} |ones_i(z)|`: the number of (z, S, transcript-vector)
/// terms in the expanded sum.
fn term_count(
    poly: &crate::polynomial::MultilinearPoly,
    leaf_ones: &[Vec<LeafOnes>],
) -> u128 {
    let mut m: u128 = 0;
    for per_leaf in leaf_ones {
        for (mask, _) in poly.terms() {
            let mut prod: u128 = 1;
            for i in 0..64 {
                if mask >> i & 1 == 1 {
                    prod = prod.saturating_mul(per_leaf[i as usize].rects.len() as u128);
                }
            }
            m = m.saturating_add(prod);
        }
    }
    m
}

struct Accumulated {
    cells: Vec<BigInt>,
    den: BigInt,
}

/// The product A·B of the term matrices, evaluated by streaming each term's
/// rank-one contribution into the (left × right) value table.
fn accumulate_product(
    poly: &crate::polynomial::MultilinearPoly,
    leaf_ones: &[Vec<LeafOnes>],
    side_bits: usize,
) -> Accumulated {
    let (nums, den) = common_denominator(poly);
    let side = 1usize << side_bits;
    let full: u128 = if side >= 128 { u128::MAX } else { (1u128 << side) - 1 };
    let mut cells = vec![BigInt::zero(); side * side];
    for per_leaf in leaf_ones {
        for (mask, num) in &nums {
            let leaves: Vec<usize> = (0..64).filter(|i| mask >> i & 1 == 1).collect();
            stream_terms(per_leaf, &leaves, 0, full, full, num, side_bits, &mut cells);
        }
    }
    Accumulated { cells, den }
}

#[allow(clippy::too_many_arguments)]
fn stream_terms(
    per_leaf: &[LeafOnes],
    leaves: &[usize],
    depth: usize,
    amask: u128,
    bmask: u128,
    coeff: &BigInt,
    side_bits: usize,
    cells: &mut [BigInt],
) {
    if depth == leaves.len() {
        let side = 1usize << side_bits;
        let mut a = amask;
        while a != 0 {
            let i = a.trailing_zeros() as usize;
            a &= a - 1;
            let mut b = bmask;
            while b != 0 {
                let j = b.trailing_zeros() as usize;
                b &= b - 1;
                cells[i * side + j] += coeff;
            }
        }
        return;
    }
    for &(ra, rb) in &per_leaf[leaves[depth]].rects {
        let na = amask & ra;
        if na == 0 {
            continue;
        }
        let nb = bmask & rb;
        if nb == 0 {
            continue;
        }
        stream_terms(per_leaf, leaves, depth + 1, na, nb, coeff, side_bits, cells);
    }
}

#[derive(Debug, Clone)]
pub struct RandomizedOptions {
    pub nprime: Option<usize>,
    pub c: f64,
    pub term_cap: u128,
    pub confidence: f64,
    pub seed: u64,
}

impl Default for RandomizedOptions {
    fn default() -> Self {
        RandomizedOptions { nprime: None, c: 8.0, term_cap: 1 << 26, confidence: 0.99, seed: 0 }
    }
}

/// Randomized #SAT: every leaf protocol's error is first driven below
/// `ε' ≤ 1/(3·s·2^{n'})` (tightened further so one pass is already correct
/// with the requested confidence), one deterministic protocol is sampled per
/// restricted leaf, the deterministic pipeline runs, and the whole
/// computation is repeated with a per-input majority vote.
pub fn count_sat_randomized(
    d: &LeafDevice,
    opts: &RandomizedOptions,
) -> Result<CountReport, CountError> {
    let start = std::time::Instant::now();
    let n = d.formula.num_vars;
    let s = d.formula.size();
    if s > MAX_FAST_SIZE {
        return Err(CountError::TooLarge { s, max: MAX_FAST_SIZE });
    }
    let max_leaf_cost = protocol_cost_bound(d)?;
    let nprime = opts.nprime.unwrap_or_else(|| usable_nprime(n, s, max_leaf_cost, opts.c));
    if n % 2 != 0 || nprime % 2 != 0 || nprime < 1 || nprime + 2 > n {
        return Err(CountError::BadRestriction { n, nprime });
    }

    let (skeleton, slots) = skeleton_formula(&d.formula);
    let eps = BigRational::new(BigInt::from(1), BigInt::from(3) << nprime);
    let report = build_approx(&skeleton, &eps)?;
    let poly = report.poly;
    let restriction = Restriction::build(n, nprime);
    let rbits = n - nprime;
    let side = 1usize << restriction.side_bits;

    // Spec bound on the per-leaf error, tightened so that a single pass is
    // wrong anywhere with probability at most (1 − confidence)/2.
    let fail_budget = BigRational::from_float((1.0 - opts.confidence) / 2.0)
        .unwrap_or_else(|| BigRational::new(1.into(), 200.into()));
    let spec_eps = BigRational::new(BigInt::from(1), BigInt::from(3 * s as i64) << nprime);
    let tight_eps = &fail_budget
        / BigRational::from(BigInt::from((s as i64) << (nprime + rbits)));
    let eps_prime = spec_eps.min(tight_eps);

    // Outer repetition with per-input majority.
    let reps = (2 * ((1.0 / (1.0 - opts.confidence)).log10().ceil() as usize) + 1).clamp(3, 9);
    let mut votes: Vec<Vec<i64>> = vec![Vec::new(); side * side];
    let mut m_terms_max: u128 = 0;
    let mut degree = report.degree;
    for rep in 0..reps {
        let mut leaf_ones: Vec<Vec<LeafOnes>> = Vec::with_capacity(1 << nprime);
        for z in 0..1u64 << nprime {
            let values = restriction.values_of(z);
            let mut per_leaf = Vec::with_capacity(slots.len());
            for (slot, &gate_id) in slots.iter().enumerate() {
                let restricted =
                    d.formula.gates[gate_id].restrict(n, restriction.fixed_mask, values);
                let rp = d.randomized_protocol(gate_id, &restricted, rbits, &eps_prime)?;
                let mut rng = task_rng(
                    opts.seed,
                    Stream::ProtocolSample,
                    (rep as u64) << 40 | z << 20 | slot as u64,
                );
                let tree = sample_or_reuse(&rp, &mut rng);
                let rects = enumerate_leaves(&tree);
                per_leaf.push(LeafOnes { rects: one_rectangles(&rects, restriction.side_bits) });
            }
            leaf_ones.push(per_leaf);
        }
        let m_terms = term_count(&poly, &leaf_ones);
        if m_terms > opts.term_cap {
            return Err(CountError::TermCapExceeded { m: m_terms, cap: opts.term_cap });
        }
        m_terms_max = m_terms_max.max(m_terms);
        degree = poly.degree();
        let accum = accumulate_product(&poly, &leaf_ones, restriction.side_bits);
        for (idx, cell) in accum.cells.iter().enumerate() {
            let q = BigRational::new(cell.clone(), accum.den.clone());
            let v = q.round().to_integer().to_i64().unwrap_or(0).clamp(0, 1 << nprime);
            votes[idx].push(v);
        }
    }

    let mut total: u64 = 0;
    for vote in &votes {
        total += majority_value(vote) as u64;
    }
    Ok(CountReport {
        count: total,
        m_terms: m_terms_max,
        nprime,
        degree,
        wall_ms: start.elapsed().as_millis(),
        backend: "standard".into(),
    })
}

fn sample_or_reuse(rp: &RandomizedProtocol, rng: &mut impl Rng) -> ProtocolTree {
    if rp.randomness_bits == 0 {
        rp.sample_deterministic(&[])
    } else {
        rp.sample_with_rng(rng)
    }
}

fn majority_value(votes: &[i64]) -> i64 {
    let mut counts: std::collections::HashMap<i64, usize> = std::collections::HashMap::new();
    for &v in votes {
        *counts.entry(v).or_insert(0) += 1;
    }
    counts
        .into_iter()
        .max_by_key(|&(v, c)| (c, std::cmp::Reverse(v)))
        .map(|(v, _)| v)
        .unwrap_or(0)
}

//! Approximating-polynomial pipeline: LP-certified base construction,
//! majority amplification, and shift/scale composition.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::lp::{chebyshev_feasible, Feasibility};
use super::transforms::{moebius_in_place, zeta_in_place};
use super::{
    big_ratio, ceil_sqrt, common_denominator, exact_multilinear, Basis, ErrorBudget,
    MultilinearPoly, PolyError,
};
use crate::formula::{decompose, Formula, Node, PieceLeaf};

/// Variable index where placeholder variables start in composed polynomials.
/// Input variables occupy bits `0..PLACEHOLDER_BASE`; placeholder `j` of a
/// decomposition is bit `PLACEHOLDER_BASE + j`.
pub const PLACEHOLDER_BASE: usize = 48;

const MAX_LP_VARS: usize = 16;

#[derive(Debug, Clone)]
pub struct ApproxResult {
    pub poly: MultilinearPoly,
    pub degree: usize,
    /// Exact sup-norm error certified during construction.
    pub achieved: BigRational,
}

/// Minimum-degree pointwise approximation of a truth table over `m`
/// variables (`table.len() == 2^m`).  Feasibility of each candidate degree
/// is decided by the Chebyshev LP; the returned polynomial is certified by
/// an exhaustive exact re-check.
pub fn approx_base_table(table: &[bool], eps: &BigRational) -> Result<ApproxResult, PolyError> {
    let len = table.len();
    if len == 0 || !len.is_power_of_two() {
        return Err(PolyError::NotPowerOfTwo(len));
    }
    let m = len.trailing_zeros() as usize;
    if m > MAX_LP_VARS {
        return Err(PolyError::TooManyVars { got: m, max: MAX_LP_VARS });
    }
    if eps < &BigRational::zero() {
        return Err(PolyError::NegativeEps(eps.to_string()));
    }
    let exact = exact_multilinear(table)?;
    let d_exact = exact.degree();
    if eps.is_zero() {
        return Ok(ApproxResult { degree: d_exact, poly: exact, achieved: BigRational::zero() });
    }
    // Binary search the least feasible degree in [0, d_exact]; d_exact is
    // always feasible via the exact polynomial.
    let mut lo = 0usize;
    let mut hi = d_exact;
    let mut best: Option<ApproxResult> = None;
    while lo < hi {
        let mid = (lo + hi) / 2;
        match feasible_at_degree(table, m, mid, eps) {
            Some(res) => {
                hi = mid;
                best = Some(res);
            }
            None => lo = mid + 1,
        }
    }
    if lo == d_exact {
        return Ok(ApproxResult { degree: d_exact, poly: exact, achieved: BigRational::zero() });
    }
    Ok(best.expect("binary search landed below d_exact, so some probe succeeded"))
}

fn feasible_at_degree(
    table: &[bool],
    m: usize,
    d: usize,
    eps: &BigRational,
) -> Option<ApproxResult> {
    let monomials: Vec<u64> =
        (0..1u64 << m).filter(|s| (s.count_ones() as usize) <= d).collect();
    match chebyshev_feasible(table, m, &monomials, eps) {
        Feasibility::Feasible { coeffs, achieved } => {
            let poly = MultilinearPoly::from_terms(
                Basis::ZeroOne,
                m,
                monomials.iter().copied().zip(coeffs),
            );
            let degree = poly.degree();
            Some(ApproxResult { poly, degree, achieved })
        }
        Feasibility::Infeasible => None,
    }
}

/// Minimum-degree approximation of a whole formula (its input variables are
/// compacted to the support, so `m` counts variables the formula reads).
pub fn approx_base(f: &Formula, eps: &BigRational) -> Result<ApproxResult, PolyError> {
    let support = f.support();
    let vars: Vec<usize> = (0..f.num_vars).filter(|i| support >> i & 1 == 1).collect();
    let m = vars.len();
    if m > MAX_LP_VARS {
        return Err(PolyError::TooManyVars { got: m, max: MAX_LP_VARS });
    }
    let table: Vec<bool> = (0..1u64 << m)
        .map(|compact| {
            let mut x = 0u64;
            for (j, &v) in vars.iter().enumerate() {
                if compact >> j & 1 == 1 {
                    x |= 1 << v;
                }
            }
            f.eval(x)
        })
        .collect();
    let res = approx_base_table(&table, eps)?;
    let mut map = [0usize; 64];
    for (j, &v) in vars.iter().enumerate() {
        map[j] = v;
    }
    Ok(ApproxResult {
        poly: res.poly.relabel_vars(&map, f.num_vars),
        degree: res.degree,
        achieved: res.achieved,
    })
}

/// Bare majority/Bernstein kernel `a(y) = Σ_{i > r/2} C(r,i) y^i (1−y)^{r−i}`.
pub fn bernstein_kernel_eval(r: usize, y: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    let one = BigRational::one();
    let ny = &one - y;
    for i in (r / 2 + 1)..=r {
        let c = BigRational::from(BigInt::from(binomial(r, i)));
        acc += c * pow_ratio(y, i) * pow_ratio(&ny, r - i);
    }
    acc
}

/// Univariate coefficients of the bare kernel (index = power of y).
pub fn bernstein_kernel_coeffs(r: usize) -> Vec<BigRational> {
    let mut coeffs = vec![BigRational::zero(); r + 1];
    for i in (r / 2 + 1)..=r {
        let ci = BigInt::from(binomial(r, i));
        // C(r,i) y^i (1-y)^{r-i} = C(r,i) Σ_j C(r-i,j) (-1)^j y^{i+j}
        for j in 0..=(r - i) {
            let mut c = BigRational::from(&ci * BigInt::from(binomial(r - i, j)));
            if j % 2 == 1 {
                c = -c;
            }
            coeffs[i + j] += c;
        }
    }
    coeffs
}

/// Wrong-side mass of an r-vote majority with per-vote success `1 − w`:
/// the amplifier's sup error at normalized input `w`.
pub fn majority_error_at(r: usize, w: &BigRational) -> BigRational {
    bernstein_kernel_eval(r, w)
}

fn binomial(n: usize, k: usize) -> num_bigint::BigUint {
    use num_bigint::BigUint;
    let mut acc = BigUint::one();
    for i in 0..k.min(n - k) {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

fn pow_ratio(x: &BigRational, k: usize) -> BigRational {
    let mut acc = BigRational::one();
    let mut base = x.clone();
    let mut k = k;
    while k > 0 {
        if k & 1 == 1 {
            acc *= &base;
        }
        base = &base * &base;
        k >>= 1;
    }
    acc
}

const AMPLIFY_ROUND_BITS: u32 = 30;
const AMPLIFY_MAX_R: usize = 801;

/// Smallest odd `r` whose amplifier error at the normalized boundary 2/5
/// clears `eps` with headroom for the dyadic output rounding.
fn pick_amplifier_r(eps: &BigRational) -> Result<usize, PolyError> {
    let margin = BigRational::new(BigInt::one(), BigInt::one() << (AMPLIFY_ROUND_BITS - 2));
    let target = eps - &margin;
    if target <= BigRational::zero() {
        return Err(PolyError::AmplifierRange { eps: eps.to_string(), max_r: AMPLIFY_MAX_R });
    }
    let boundary = big_ratio(2, 5);
    let mut r = 1usize;
    while majority_error_at(r, &boundary) > target {
        r += 2;
        if r > AMPLIFY_MAX_R {
            return Err(PolyError::AmplifierRange { eps: eps.to_string(), max_r: AMPLIFY_MAX_R });
        }
    }
    Ok(r)
}

/// Error amplification: compose a 1/3-approximator with the majority
/// amplifier.  The polynomial's values are first mapped through the affine
/// normalization `σ(y) = (3y+1)/5`, which sends the 1/3-approximator range
/// `[−1/3,1/3] ∪ [2/3,4/3]` onto `[0,2/5] ∪ [3/5,1]` where the Bernstein
/// kernel contracts; the bare kernel diverges on negative inputs.
/// Returns `p` unchanged when `eps ≥ 1/3`.
pub fn amplify(p: &MultilinearPoly, eps: &BigRational) -> Result<MultilinearPoly, PolyError> {
    amplify_with_r(p, eps, None)
}

pub(crate) fn amplify_with_r(
    p: &MultilinearPoly,
    eps: &BigRational,
    force_r: Option<usize>,
) -> Result<MultilinearPoly, PolyError> {
    if p.basis != Basis::ZeroOne {
        return Err(PolyError::BasisMismatch("amplify expects the zero_one basis".into()));
    }
    if eps >= &big_ratio(1, 3) {
        return Ok(p.clone());
    }
    let r = match force_r {
        Some(r) => r,
        None => pick_amplifier_r(eps)?,
    };
    let used = p.used_vars();
    let vars: Vec<usize> = (0..64).filter(|i| used >> i & 1 == 1).collect();
    let m = vars.len();
    if m > 20 {
        return Err(PolyError::TooManyVars { got: m, max: 20 });
    }
    // Compact, evaluate on the cube, push each value through the amplifier
    // in f64, round to dyadic rationals, and interpolate back.
    let mut inverse = [0usize; 64];
    let mut forward = [0usize; 64];
    for (j, &v) in vars.iter().enumerate() {
        inverse[v] = j;
        forward[j] = v;
    }
    let compact = p.relabel_vars(&inverse, m);
    let values = compact.values_on_cube(m);
    let scale = (1i64 << AMPLIFY_ROUND_BITS) as f64;
    let mut rounded: Vec<i64> = Vec::with_capacity(values.len());
    for v in &values {
        let w = (v * big_ratio(3, 5) + big_ratio(1, 5)).to_f64().unwrap_or(0.5);
        let a = binomial_tail_f64(r, w);
        rounded.push((a * scale).round() as i64);
    }
    moebius_in_place(&mut rounded, m);
    let denom = BigInt::one() << AMPLIFY_ROUND_BITS;
    let amplified = MultilinearPoly::from_terms(
        Basis::ZeroOne,
        p.n,
        rounded.iter().enumerate().filter(|(_, c)| **c != 0).map(|(mask, c)| {
            (mask as u64, BigRational::new(BigInt::from(*c), denom.clone()))
        }),
    );
    Ok(amplified.relabel_vars(&forward, p.n))
}

/// `Σ_{i > r/2} C(r,i) w^i (1−w)^{r−i}` in floating point.
fn binomial_tail_f64(r: usize, w: f64) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    if w >= 1.0 {
        return 1.0;
    }
    // Term recurrence upward from i = 0.
    let mut term = (1.0 - w).powi(r as i32);
    let ratio = w / (1.0 - w);
    let mut acc = 0.0;
    for i in 0..=r {
        if i > r / 2 {
            acc += term;
        }
        if i < r {
            term *= ratio * (r - i) as f64 / (i + 1) as f64;
        }
    }
    acc.clamp(0.0, 1.0)
}

/// Shift/scale composition: substitute each piece polynomial
/// `q_i = (Q_i + piece_eps)/(1 + 2·piece_eps)` into the top polynomial.
///
/// Variable convention: the top (and any piece) refers to piece `j` through
/// variable bit `PLACEHOLDER_BASE + j`; bits below `PLACEHOLDER_BASE` are
/// input variables.  Pieces may reference earlier pieces only.  Expansion is
/// exact rational throughout.
pub fn compose(
    top: &MultilinearPoly,
    pieces: &[MultilinearPoly],
    budget: &ErrorBudget,
) -> Result<MultilinearPoly, PolyError> {
    if top.basis != Basis::ZeroOne || pieces.iter().any(|p| p.basis != Basis::ZeroOne) {
        return Err(PolyError::BasisMismatch("compose expects zero_one polynomials".into()));
    }
    let available = pieces.len();
    let check_refs = |poly: &MultilinearPoly, limit: usize| -> Option<usize> {
        let used = poly.used_vars() >> PLACEHOLDER_BASE;
        (limit..64 - PLACEHOLDER_BASE).find(|j| used >> j & 1 == 1)
    };
    if let Some(j) = check_refs(top, available) {
        return Err(PolyError::PieceCountMismatch { referenced: j, available });
    }
    let pe = &budget.piece_eps;
    let shift_scale = |q: &MultilinearPoly| -> MultilinearPoly {
        if pe.is_zero() {
            return q.clone();
        }
        let denom = BigRational::one() + pe * big_ratio(2, 1);
        q.add_scalar(pe).scale(&denom.recip())
    };
    let mut substituted: Vec<MultilinearPoly> = Vec::with_capacity(available);
    for (i, piece) in pieces.iter().enumerate() {
        if let Some(j) = check_refs(piece, i) {
            return Err(PolyError::ForwardPlaceholder { piece: i, referenced: j });
        }
        let mut cur = piece.clone();
        // Replace references to earlier pieces (already shifted/scaled).
        for j in (0..i).rev() {
            let bit = PLACEHOLDER_BASE + j;
            if cur.used_vars() >> bit & 1 == 1 {
                cur = cur.substitute(bit, &substituted[j]);
            }
        }
        substituted.push(shift_scale(&cur));
    }
    let mut out = top.clone();
    for j in (0..available).rev() {
        let bit = PLACEHOLDER_BASE + j;
        if out.used_vars() >> bit & 1 == 1 {
            out = out.substitute(bit, &substituted[j]);
        }
    }
    debug_assert_eq!(out.used_vars() >> PLACEHOLDER_BASE, 0);
    Ok(out)
}

/// Exact sup-norm distance between a polynomial and a Boolean function on
/// the cube over `bits` variables.
pub(crate) fn max_pointwise_error(
    p: &MultilinearPoly,
    f: &dyn Fn(u64) -> bool,
    bits: usize,
) -> BigRational {
    let (nums, den) = common_denominator(p);
    let mut vals = vec![BigInt::zero(); 1 << bits];
    for (mask, num) in nums {
        vals[mask as usize] = num;
    }
    zeta_in_place(&mut vals, bits);
    let mut worst = BigInt::zero();
    for (x, v) in vals.iter().enumerate() {
        let target = if f(x as u64) { den.clone() } else { BigInt::zero() };
        let diff = (v - target).abs();
        if diff > worst {
            worst = diff;
        }
    }
    BigRational::new(worst, den)
}

#[derive(Debug, Clone)]
pub struct BuildReport {
    pub poly: MultilinearPoly,
    pub degree: usize,
    pub t: usize,
    pub num_pieces: usize,
    pub piece_degrees: Vec<usize>,
    pub top_degree: usize,
    /// Majority amplifier arity, when amplification was needed.
    pub amplifier_r: Option<usize>,
    /// Exact final error (only computed when the formula has ≤ 16 inputs).
    pub achieved: Option<BigRational>,
}

/// Full pipeline: decompose with `t = ⌈√s⌉`, approximate each piece to
/// `1/(20·P)` and the top to `1/20`, compose, then amplify until the target
/// is met.  When every stage happens to be exact the composition is returned
/// as is (amplifying an already-exact polynomial would only hurt it).
pub fn build_approx(f: &Formula, eps: &BigRational) -> Result<BuildReport, PolyError> {
    if eps <= &BigRational::zero() {
        return Err(PolyError::NegativeEps(eps.to_string()));
    }
    if f.num_vars > PLACEHOLDER_BASE {
        return Err(PolyError::TooManyVars { got: f.num_vars, max: PLACEHOLDER_BASE });
    }
    let s = f.size();
    let t = ceil_sqrt(s);
    let mut tree = decompose(f, t)?;
    // A pathological peel can leave a top with too many inputs for the LP;
    // peel the residue again with a smaller threshold until it fits.
    let mut t_top = t;
    while node_var_count(&tree.top, f) > MAX_LP_VARS && t_top > 1 {
        t_top = (t_top + 1) / 2;
        crate::formula::decompose_node(&mut tree.top, t_top, &mut tree.pieces);
    }
    let num_pieces = tree.pieces.len();
    let piece_budget = big_ratio(1, 20 * num_pieces.max(1) as i64);
    let top_budget = big_ratio(1, 20);

    let mut piece_polys = Vec::with_capacity(num_pieces);
    let mut piece_degrees = Vec::with_capacity(num_pieces);
    let mut worst_piece_err = BigRational::zero();
    for piece in &tree.pieces {
        let res = approx_piece_node(piece, f, &piece_budget)?;
        if res.achieved > worst_piece_err {
            worst_piece_err = res.achieved.clone();
        }
        piece_degrees.push(res.degree);
        piece_polys.push(res.poly);
    }
    let top_res = approx_piece_node(&tree.top, f, &top_budget)?;
    let budget = ErrorBudget::new(top_res.achieved.clone(), worst_piece_err, eps.clone())?;
    let composed = compose(&top_res.poly, &piece_polys, &budget)?;

    let verifiable = f.num_vars <= 16;
    let err_of = |p: &MultilinearPoly| max_pointwise_error(p, &|x| f.eval(x), f.num_vars);
    if verifiable {
        let composed_err = err_of(&composed);
        if &composed_err <= eps {
            return Ok(BuildReport {
                degree: composed.degree(),
                poly: composed,
                t,
                num_pieces,
                piece_degrees,
                top_degree: top_res.degree,
                amplifier_r: None,
                achieved: Some(composed_err),
            });
        }
        // Amplify, re-verify exactly, escalate r if the certificate misses.
        let mut r = pick_amplifier_r(eps)?;
        for _ in 0..12 {
            let amplified = amplify_with_r(&composed, eps, Some(r))?;
            let e = err_of(&amplified);
            if &e <= eps {
                return Ok(BuildReport {
                    degree: amplified.degree(),
                    poly: amplified,
                    t,
                    num_pieces,
                    piece_degrees,
                    top_degree: top_res.degree,
                    amplifier_r: Some(r),
                    achieved: Some(e),
                });
            }
            r += 2;
        }
        Err(PolyError::AmplifierRange { eps: eps.to_string(), max_r: AMPLIFY_MAX_R })
    } else {
        // No exhaustive verification possible; rely on the budget analysis.
        let amplified = amplify(&composed, eps)?;
        Ok(BuildReport {
            degree: amplified.degree(),
            poly: amplified,
            t,
            num_pieces,
            piece_degrees,
            top_degree: top_res.degree,
            amplifier_r: Some(pick_amplifier_r(eps)?),
            achieved: None,
        })
    }
}

fn node_vars(node: &Node<PieceLeaf>, f: &Formula) -> (u64, u64) {
    let mut xs = 0u64;
    let mut phs = 0u64;
    for leaf in node.leaves() {
        match leaf {
            PieceLeaf::Gate(g) => xs |= f.gates[*g].support(f.num_vars),
            PieceLeaf::Placeholder(j) => phs |= 1 << j,
        }
    }
    (xs, phs)
}

fn node_var_count(node: &Node<PieceLeaf>, f: &Formula) -> usize {
    let (xs, phs) = node_vars(node, f);
    (xs.count_ones() + phs.count_ones()) as usize
}

/// Approximate a piece (or top) node: inputs are its touched x-variables
/// plus its placeholder references, compacted for the LP and re-embedded as
/// global variables afterwards.
fn approx_piece_node(
    node: &Node<PieceLeaf>,
    f: &Formula,
    eps: &BigRational,
) -> Result<ApproxResult, PolyError> {
    let (xs, phs) = node_vars(node, f);
    let mut globals: Vec<usize> = (0..f.num_vars).filter(|i| xs >> i & 1 == 1).collect();
    globals.extend((0..16).filter(|j| phs >> j & 1 == 1).map(|j| PLACEHOLDER_BASE + j));
    let m = globals.len();
    if m > MAX_LP_VARS {
        return Err(PolyError::TooManyVars { got: m, max: MAX_LP_VARS });
    }
    let table: Vec<bool> = (0..1u64 << m)
        .map(|compact| {
            let mut x = 0u64;
            let mut ph = 0u64;
            for (j, &g) in globals.iter().enumerate() {
                if compact >> j & 1 == 1 {
                    if g >= PLACEHOLDER_BASE {
                        ph |= 1 << (g - PLACEHOLDER_BASE);
                    } else {
                        x |= 1 << g;
                    }
                }
            }
            node.eval_with(&|leaf| match leaf {
                PieceLeaf::Gate(gate) => f.gates[*gate].eval(x, f.num_vars),
                PieceLeaf::Placeholder(j) => ph >> j & 1 == 1,
            })
        })
        .collect();
    let res = approx_base_table(&table, eps)?;
    let mut map = [0usize; 64];
    for (j, &g) in globals.iter().enumerate() {
        map[j] = g;
    }
    Ok(ApproxResult {
        poly: res.poly.relabel_vars(&map, f.num_vars),
        degree: res.degree,
        achieved: res.achieved,
    })
}

//! Small-bias generator by powering over GF(2^l).
//!
//! The seed is a pair of field elements `(a, b)`; output bit `j` is the
//! GF(2) inner product `<a^{j+1}, b>`.  A nonempty parity of output bits
//! collapses to `<P(a), b>` for the polynomial `P(x) = Σ_{j∈T} x^{j+1}`, so
//! its bias equals the probability that `a` is a root of `P` — at most
//! `n/2^l`.  Root counting over the field makes every bias, and therefore
//! every fooling gap against parities and formulas of parities, exactly
//! computable without enumerating seeds.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;

use super::gf2::{roots_in_field, Gf2Field, Poly2};
use super::PrgError;
use crate::polynomial::transforms::walsh_hadamard_in_place;

/// Field bits needed so that `n/2^l <= delta`.
pub fn field_bits_for(n: u64, delta: &BigRational) -> Result<usize, PrgError> {
    // smallest l with 2^l >= n/delta
    let need = BigRational::from(BigInt::from(n)) / delta;
    let mut l = 0usize;
    let mut pow = BigRational::from(BigInt::from(1));
    let two = BigRational::from(BigInt::from(2));
    while pow < need {
        pow *= &two;
        l += 1;
        if l > 64 {
            return Err(PrgError::FieldTooLarge { bits: l });
        }
    }
    Ok(l.max(1))
}

/// Field bits from the reduction schedule `δ(s, ε) = 2^{−c·√s·log s·log(1/ε)}`:
/// `l = ⌈log2 n + c·√s·log2 s·log2(1/ε)⌉`.
pub fn schedule_field_bits(
    n: u64,
    s: u64,
    eps: &BigRational,
    c: f64,
) -> Result<usize, PrgError> {
    use num_traits::ToPrimitive;
    let log_n = (n as f64).log2();
    let log_s = (s as f64).log2().max(1.0);
    let log_inv_eps = (1.0 / eps.to_f64().unwrap_or(0.25)).log2().max(1.0);
    let l = (log_n + c * (s as f64).sqrt() * log_s * log_inv_eps).ceil() as usize;
    if l > 64 {
        return Err(PrgError::FieldTooLarge { bits: l });
    }
    Ok(l.max(1))
}

/// Expand a `2l`-bit seed (field elements `a`, `b`) into `n` bits.
pub fn small_bias_expand(seed: &[bool], n: usize, l: usize) -> Result<Vec<bool>, PrgError> {
    if l == 0 || l > 64 {
        return Err(PrgError::FieldTooLarge { bits: l });
    }
    if seed.len() != 2 * l {
        return Err(PrgError::SeedLength { expected: 2 * l, got: seed.len() });
    }
    let field = Gf2Field::new(l).unwrap();
    let mut a = 0u64;
    let mut b = 0u64;
    for i in 0..l {
        if seed[i] {
            a |= 1 << i;
        }
        if seed[l + i] {
            b |= 1 << i;
        }
    }
    let mut out = Vec::with_capacity(n);
    let mut p = a; // a^{j+1} as j advances
    for _ in 0..n {
        out.push((p & b).count_ones() % 2 == 1);
        p = field.mul(p, a);
    }
    Ok(out)
}

/// Exact bias of the parity `mask` (nonempty) over all seeds: the root count
/// of `P_T` in GF(2^l) divided by `2^l`.
pub fn exact_parity_bias(mask: u64, l: usize) -> BigRational {
    assert!(mask != 0, "bias of the empty parity is 1 by convention");
    let mut p = Poly2::zero();
    for j in 0..64 {
        if mask >> j & 1 == 1 {
            p.set_bit(j as usize + 1);
        }
    }
    let roots = roots_in_field(&p, l);
    BigRational::new(BigInt::from(roots), BigInt::one() << l)
}

use num_traits::One;

/// Exhaustive-bias oracle over the full seed space, for cross-checking the
/// root-count route at small l.
pub fn brute_parity_bias(mask: u64, n: usize, l: usize) -> BigRational {
    let seeds = 1u64 << (2 * l);
    let mut sum: i64 = 0;
    for s in 0..seeds {
        let bits: Vec<bool> = (0..2 * l).map(|i| s >> i & 1 == 1).collect();
        let out = small_bias_expand(&bits, n, l).unwrap();
        let parity =
            (0..n).filter(|&j| mask >> j & 1 == 1 && out[j]).count() % 2 == 1;
        sum += if parity { -1 } else { 1 };
    }
    BigRational::new(BigInt::from(sum.abs()), BigInt::from(seeds))
}

/// Exact fooling gap of the generator against an arbitrary function given by
/// its truth table: `|Pr[f(G(seed)) = 1] − Pr[f(U) = 1]|`, computed through
/// the Fourier expansion and per-parity exact biases.  The sign of each
/// parity's contribution is resolved exactly: conditioned on `P_T(a) = 0`
/// the parity of the output is 0, so the character expectation is `+bias`.
pub fn exact_gap_against_table(table: &[bool], l: usize) -> BigRational {
    let n = table.len().trailing_zeros() as usize;
    let mut fhat: Vec<i64> = table.iter().map(|&b| if b { -1 } else { 1 }).collect();
    walsh_hadamard_in_place(&mut fhat, n);
    // E[F(G)] − E[F(U)] = Σ_{T≠0} (fhat[T]/2^n) · bias_T
    let mut acc = BigRational::from(BigInt::from(0));
    for (t, w) in fhat.iter().enumerate().skip(1) {
        if *w == 0 {
            continue;
        }
        let bias = exact_parity_bias(t as u64, l);
        acc += BigRational::new(BigInt::from(*w), BigInt::one() << n) * bias;
    }
    // Acceptance-probability gap is half the ±1 expectation gap.
    (acc / BigRational::from(BigInt::from(2))).abs()
}

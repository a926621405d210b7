//! Generalized inner product, correlation measurement, best-parity search,
//! and the lower-bound calculators.
//!
//! Correlations are exact expectations in ±1 semantics under explicit
//! rational distributions; nothing in this module samples.  The calculators
//! evaluate closed-form expressions with all asymptotic constants set to 1,
//! using fixed-point `q16` logarithms and roots (documented below) so that
//! outputs are exact rationals that can be reproduced by hand.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::polynomial::transforms::walsh_hadamard_in_place;

#[derive(Debug, Error)]
pub enum HardnessError {
    #[error("k = {k} must divide n = {n}")]
    Divisibility { k: usize, n: usize },
    #[error("distribution malformed: {0}")]
    BadDistribution(String),
    #[error("exhaustive sweep requires n <= {max}, got {n}")]
    TooManyVars { n: usize, max: usize },
}

/// Generalized inner product: parity of coordinate-wise ANDs across `k`
/// contiguous blocks of `n/k` bits.
pub fn gip(k: usize, x: u64, n: usize) -> Result<bool, HardnessError> {
    if k == 0 || n % k != 0 {
        return Err(HardnessError::Divisibility { k, n });
    }
    let block = n / k;
    let mask = if block >= 64 { u64::MAX } else { (1u64 << block) - 1 };
    let mut conj = mask;
    for i in 0..k {
        conj &= x >> (i * block);
    }
    Ok(conj.count_ones() % 2 == 1)
}

/// Two-party inner product over the half split, coded independently of
/// `gip` as its cross-check oracle.
pub fn inner_product(x: u64, n: usize) -> bool {
    let half = n / 2;
    let mut acc = false;
    for j in 0..half {
        let a = x >> j & 1 == 1;
        let b = x >> (half + j) & 1 == 1;
        if a && b {
            acc = !acc;
        }
    }
    acc
}

/// Explicit distribution over the n-cube.
#[derive(Debug, Clone)]
pub enum Dist {
    Uniform,
    /// Rational weights indexed by assignment; must sum to one.
    Table(Vec<BigRational>),
}

impl Dist {
    pub fn validate(&self, n: usize) -> Result<(), HardnessError> {
        match self {
            Dist::Uniform => Ok(()),
            Dist::Table(w) => {
                if w.len() != 1 << n {
                    return Err(HardnessError::BadDistribution(format!(
                        "expected {} weights, got {}",
                        1 << n,
                        w.len()
                    )));
                }
                if w.iter().any(|v| v < &BigRational::zero()) {
                    return Err(HardnessError::BadDistribution("negative weight".into()));
                }
                let total: BigRational = w.iter().sum();
                if !total.is_one() {
                    return Err(HardnessError::BadDistribution(format!(
                        "weights sum to {total}, not 1"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn weight(&self, x: u64, n: usize) -> BigRational {
        match self {
            Dist::Uniform => BigRational::new(BigInt::one(), BigInt::one() << n),
            Dist::Table(w) => w[x as usize].clone(),
        }
    }
}

/// Exact correlation (±1 expectation) and agreement probability.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub correlation: BigRational,
    pub agreement: BigRational,
}

/// `E_{x~dist}[F(x)·G(x)]` in ±1 semantics, with `Pr[f = g]` alongside.
pub fn correlation(
    f: &dyn Fn(u64) -> bool,
    g: &dyn Fn(u64) -> bool,
    n: usize,
    dist: &Dist,
) -> Result<CorrelationReport, HardnessError> {
    if n > 20 {
        return Err(HardnessError::TooManyVars { n, max: 20 });
    }
    dist.validate(n)?;
    let mut agreement = BigRational::zero();
    for x in 0..1u64 << n {
        if f(x) == g(x) {
            agreement += dist.weight(x, n);
        }
    }
    let correlation = &agreement * BigRational::from(BigInt::from(2)) - BigRational::one();
    Ok(CorrelationReport { correlation, agreement })
}

/// A parity character with an optional sign flip.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignedParity {
    pub mask: u64,
    pub negated: bool,
}

impl SignedParity {
    pub fn eval(&self, x: u64) -> bool {
        ((x & self.mask).count_ones() % 2 == 1) ^ self.negated
    }
}

/// Argmax over all `2^{n+1}` signed parities of `E_dist[χ·F]`; ties break to
/// the smallest mask, then the positive sign.
pub fn best_parity_correlation(
    f: &dyn Fn(u64) -> bool,
    n: usize,
    dist: &Dist,
) -> Result<(SignedParity, BigRational), HardnessError> {
    if n > 20 {
        return Err(HardnessError::TooManyVars { n, max: 20 });
    }
    dist.validate(n)?;
    // c[mask] = Σ_x w_x F(x) (−1)^{<mask, x>} via a weighted WHT.
    let mut weighted: Vec<BigRational> = (0..1u64 << n)
        .map(|x| {
            let w = dist.weight(x, n);
            if f(x) {
                -w
            } else {
                w
            }
        })
        .collect();
    walsh_hadamard_in_place(&mut weighted, n);
    let mut best_mask = 0u64;
    let mut best_neg = false;
    let mut best = weighted[0].clone();
    for (mask, c) in weighted.iter().enumerate() {
        for negated in [false, true] {
            let corr = if negated { -c.clone() } else { c.clone() };
            if corr > best {
                best = corr;
                best_mask = mask as u64;
                best_neg = negated;
            }
        }
    }
    Ok((SignedParity { mask: best_mask, negated: best_neg }, best))
}

/// Brute-force twin of `best_parity_correlation`, kept as a mutation
/// tripwire: same extremum computed without the transform.
pub fn best_parity_correlation_naive(
    f: &dyn Fn(u64) -> bool,
    n: usize,
    dist: &Dist,
) -> Result<(SignedParity, BigRational), HardnessError> {
    if n > 16 {
        return Err(HardnessError::TooManyVars { n, max: 16 });
    }
    dist.validate(n)?;
    let mut best: Option<(SignedParity, BigRational)> = None;
    for mask in 0..1u64 << n {
        for negated in [false, true] {
            let chi = SignedParity { mask, negated };
            let mut corr = BigRational::zero();
            for x in 0..1u64 << n {
                let w = dist.weight(x, n);
                if chi.eval(x) == f(x) {
                    corr += w;
                } else {
                    corr -= w;
                }
            }
            let better = match &best {
                None => true,
                Some((_, b)) => &corr > b,
            };
            if better {
                best = Some((chi, corr));
            }
        }
    }
    Ok(best.unwrap())
}

/// Fixed-point logarithm: `round(log2(x) · 2^16) / 2^16` as an exact
/// rational.  This is the documented evaluation rule for every calculator,
/// chosen so outputs are exact, reproducible rationals; it is exact on
/// powers of two.
pub fn log2_q16(x: &BigRational) -> BigRational {
    let v = x.to_f64().expect("log2_q16 argument out of f64 range");
    assert!(v > 0.0, "log2_q16 needs a positive argument");
    let scaled = (v.log2() * 65536.0).round() as i64;
    BigRational::new(BigInt::from(scaled), BigInt::from(1i64 << 16))
}

/// Fixed-point square root under the same q16 rule.
pub fn sqrt_q16(x: &BigRational) -> BigRational {
    let v = x.to_f64().expect("sqrt_q16 argument out of f64 range");
    assert!(v >= 0.0);
    let scaled = (v.sqrt() * 65536.0).round() as i64;
    BigRational::new(BigInt::from(scaled), BigInt::from(1i64 << 16))
}

/// Fourth root under the q16 rule.
pub fn quarter_root_q16(x: &BigRational) -> BigRational {
    let v = x.to_f64().expect("quarter_root_q16 argument out of f64 range");
    assert!(v >= 0.0);
    let scaled = (v.powf(0.25) * 65536.0).round() as i64;
    BigRational::new(BigInt::from(scaled), BigInt::from(1i64 << 16))
}

pub(crate) fn ratio_u(a: u64) -> BigRational {
    BigRational::from(BigInt::from(a))
}

/// Size threshold below which a device cannot agree with GIP on more than a
/// `1/2 + eps` fraction: `n² / (k²·16^k·(R + log n)²·log²(1/eps))`, constant
/// 1, reported up to constants.
pub fn lb_size_bound(n: u64, k: u32, eps: &BigRational, r_cost: &BigRational) -> BigRational {
    let log_n = log2_q16(&ratio_u(n));
    let log_inv_eps = log2_q16(&eps.recip());
    let num = ratio_u(n * n);
    let den = ratio_u(k as u64 * k as u64)
        * BigRational::from(BigInt::from(16).pow(k))
        * pow2(&(r_cost + log_n))
        * pow2(&log_inv_eps);
    num / den
}

fn pow2(x: &BigRational) -> BigRational {
    x * x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn gip_direct_example() {
        // k=2, x = (1,0 | 1,1): (1∧1) ⊕ (0∧1) = 1.
        let x = 0b1101;
        assert!(gip(2, x, 4).unwrap());
        assert!(!gip(2, 0, 4).unwrap());
    }

    #[test]
    fn gip_rejects_bad_k() {
        assert!(gip(3, 0, 4).is_err());
    }

    #[test]
    fn gip_two_matches_inner_product() {
        for n in [4usize, 8, 12, 16] {
            for x in 0..1u64 << n {
                assert_eq!(gip(2, x, n).unwrap(), inner_product(x, n), "n={n} x={x:#b}");
            }
        }
    }

    #[test]
    fn correlation_identity_and_negation() {
        let f = |x: u64| x & 1 == 1;
        let rep = correlation(&f, &f, 4, &Dist::Uniform).unwrap();
        assert_eq!(rep.correlation, r(1, 1));
        assert_eq!(rep.agreement, r(1, 1));
        let g = |x: u64| x & 1 == 0;
        let rep = correlation(&f, &g, 4, &Dist::Uniform).unwrap();
        assert_eq!(rep.correlation, r(-1, 1));
    }

    #[test]
    fn correlation_relation_invariant() {
        let f = |x: u64| x.count_ones() % 3 == 0;
        let g = |x: u64| x & 0b10 != 0;
        let rep = correlation(&f, &g, 5, &Dist::Uniform).unwrap();
        assert_eq!(rep.correlation, &rep.agreement * r(2, 1) - r(1, 1));
    }

    #[test]
    fn malformed_distribution_rejected() {
        let w = vec![r(1, 2); 4]; // sums to 2
        assert!(correlation(&|_| true, &|_| false, 2, &Dist::Table(w)).is_err());
        let w = vec![r(1, 2), r(1, 2), r(1, 2), r(-1, 2)];
        assert!(correlation(&|_| true, &|_| false, 2, &Dist::Table(w)).is_err());
    }

    #[test]
    fn best_parity_finds_planted_parity() {
        let chi = SignedParity { mask: 0b1011, negated: true };
        let f = move |x: u64| chi.eval(x);
        let (found, corr) = best_parity_correlation(&f, 4, &Dist::Uniform).unwrap();
        assert_eq!(found, chi);
        assert_eq!(corr, r(1, 1));
    }

    #[test]
    fn best_parity_matches_naive_on_random_functions() {
        use rand::RngExt;
        let mut rng = crate::rng::stream_rng(17, crate::rng::Stream::Custom(7));
        for _ in 0..10 {
            let bits: Vec<bool> = (0..16).map(|_| rng.random()).collect();
            let f = move |x: u64| bits[x as usize];
            let a = best_parity_correlation(&f, 4, &Dist::Uniform).unwrap();
            let b = best_parity_correlation_naive(&f, 4, &Dist::Uniform).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn gip_best_parity_decreases() {
        // Best-parity correlation of GIP_n^2 strictly decreases over n in
        // {4, 8, 12}; the known value is 2^{-n/2} at these sizes.
        let mut prev: Option<BigRational> = None;
        for n in [4usize, 8, 12] {
            let f = move |x: u64| gip(2, x, n).unwrap();
            let (_, corr) = best_parity_correlation(&f, n, &Dist::Uniform).unwrap();
            assert_eq!(corr, r(1, 1 << (n / 2)), "n = {n}");
            if let Some(p) = prev {
                assert!(corr < p, "correlation must strictly decrease");
            }
            prev = Some(corr);
        }
    }

    #[test]
    fn lb_bound_arithmetic() {
        // k=2, R=1, eps=1/4, n=2^10: all logs land on integers, so the
        // q16 rule gives the exact closed-form value.
        let v = lb_size_bound(1024, 2, &r(1, 4), &r(1, 1));
        // n^2 / (4 · 256 · (1 + 10)^2 · 2^2) = 2^20 / (4 · 256 · 121 · 4)
        let expect = r(1 << 20, 4 * 256 * 121 * 4);
        assert_eq!(v, expect);
    }

    #[test]
    fn lb_bound_monotone_in_r() {
        let lo = lb_size_bound(256, 2, &r(1, 4), &r(1, 1));
        let hi = lb_size_bound(256, 2, &r(1, 4), &r(4, 1));
        assert!(hi < lo, "increasing R must decrease the bound");
    }

    #[test]
    fn lb_bound_grows_superlinearly_in_n() {
        let a = lb_size_bound(1 << 8, 2, &r(1, 4), &r(1, 1));
        let b = lb_size_bound(1 << 9, 2, &r(1, 4), &r(1, 1));
        assert!(b > a * r(2, 1), "doubling n should more than double the bound");
    }
}

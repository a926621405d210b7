//! Sparse multilinear polynomials with exact rational coefficients.
//!
//! These carry the approximating polynomials: terms map a variable subset
//! (bitmask) to a nonzero `BigRational` coefficient.  The `zero_one` basis
//! evaluates monomials as products of bits; the `plus_minus` basis treats a
//! set bit as the field value −1 (so a monomial is a parity character).

mod approx;
mod lp;
pub(crate) mod transforms;

pub use approx::{
    amplify, approx_base, approx_base_table, bernstein_kernel_coeffs, bernstein_kernel_eval,
    build_approx, compose, majority_error_at, ApproxResult, BuildReport, PLACEHOLDER_BASE,
};

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use transforms::{moebius_in_place, zeta_in_place};

#[derive(Debug, Error)]
pub enum PolyError {
    #[error("table length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("operation needs at most {max} variables, got {got}")]
    TooManyVars { got: usize, max: usize },
    #[error("approximation error bound must be nonnegative, got {0}")]
    NegativeEps(String),
    #[error("mixed or unsupported bases: {0}")]
    BasisMismatch(String),
    #[error("piece count mismatch: top references placeholder {referenced} but only {available} pieces given")]
    PieceCountMismatch { referenced: usize, available: usize },
    #[error("piece {piece} references placeholder {referenced} that is not defined earlier")]
    ForwardPlaceholder { piece: usize, referenced: usize },
    #[error("amplifier cannot reach error {eps} (needed r > {max_r})")]
    AmplifierRange { eps: String, max_r: usize },
    #[error("error budget out of range: {0}")]
    BadBudget(String),
    #[error("formula error: {0}")]
    Formula(#[from] crate::formula::FormulaError),
}

/// Monomial basis of a [`MultilinearPoly`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    ZeroOne,
    PlusMinus,
}

/// Sparse multilinear polynomial; no zero coefficients are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct MultilinearPoly {
    pub basis: Basis,
    pub n: usize,
    terms: BTreeMap<u64, BigRational>,
}

impl MultilinearPoly {
    pub fn zero(basis: Basis, n: usize) -> Self {
        MultilinearPoly { basis, n, terms: BTreeMap::new() }
    }

    pub fn constant(basis: Basis, n: usize, c: BigRational) -> Self {
        let mut p = Self::zero(basis, n);
        p.add_term(0, c);
        p
    }

    pub fn from_terms(
        basis: Basis,
        n: usize,
        it: impl IntoIterator<Item = (u64, BigRational)>,
    ) -> Self {
        let mut p = Self::zero(basis, n);
        for (mask, c) in it {
            p.add_term(mask, c);
        }
        p
    }

    /// Add `c` to the coefficient of `mask`, dropping it if it cancels.
    pub fn add_term(&mut self, mask: u64, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(mask).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&mask);
        }
    }

    pub fn coefficient(&self, mask: u64) -> BigRational {
        self.terms.get(&mask).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&u64, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Max popcount over stored subsets.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|m| m.count_ones() as usize).max().unwrap_or(0)
    }

    /// Sum of absolute coefficient values.
    pub fn l1_norm(&self) -> BigRational {
        let mut s = BigRational::zero();
        for c in self.terms.values() {
            s += c.abs();
        }
        s
    }

    pub fn max_coeff_abs(&self) -> BigRational {
        let mut best = BigRational::zero();
        for c in self.terms.values() {
            let a = c.abs();
            if a > best {
                best = a;
            }
        }
        best
    }

    /// Union of variable bits used by any term.
    pub fn used_vars(&self) -> u64 {
        self.terms.keys().fold(0, |acc, m| acc | m)
    }

    /// Exact value at a point.  In the `zero_one` basis `x` is the usual bit
    /// vector; in `plus_minus`, bit `i` set means the i-th input is −1.
    pub fn eval(&self, x: u64) -> BigRational {
        let mut acc = BigRational::zero();
        match self.basis {
            Basis::ZeroOne => {
                for (mask, c) in &self.terms {
                    if mask & x == *mask {
                        acc += c;
                    }
                }
            }
            Basis::PlusMinus => {
                for (mask, c) in &self.terms {
                    if (mask & x).count_ones() % 2 == 0 {
                        acc += c;
                    } else {
                        acc -= c;
                    }
                }
            }
        }
        acc
    }

    pub fn add(&self, other: &MultilinearPoly) -> MultilinearPoly {
        assert_eq!(self.basis, other.basis, "basis mismatch in add");
        let mut out = self.clone();
        out.n = self.n.max(other.n);
        for (mask, c) in &other.terms {
            out.add_term(*mask, c.clone());
        }
        out
    }

    pub fn scale(&self, k: &BigRational) -> MultilinearPoly {
        if k.is_zero() {
            return MultilinearPoly::zero(self.basis, self.n);
        }
        let terms = self.terms.iter().map(|(m, c)| (*m, c * k)).collect();
        MultilinearPoly { basis: self.basis, n: self.n, terms }
    }

    pub fn add_scalar(&self, k: &BigRational) -> MultilinearPoly {
        let mut out = self.clone();
        out.add_term(0, k.clone());
        out
    }

    /// Product with multilinear reduction.  Over the `zero_one` basis
    /// `x_i^2 = x_i` (masks union); over `plus_minus` `z_i^2 = 1` (masks
    /// symmetric-difference).  Both agree with the function product on the
    /// corresponding Boolean cube.
    pub fn mul(&self, other: &MultilinearPoly) -> MultilinearPoly {
        assert_eq!(self.basis, other.basis, "basis mismatch in mul");
        let mut acc: BTreeMap<u64, BigRational> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let mask = match self.basis {
                    Basis::ZeroOne => ma | mb,
                    Basis::PlusMinus => ma ^ mb,
                };
                let e = acc.entry(mask).or_insert_with(BigRational::zero);
                *e += ca * cb;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        MultilinearPoly { basis: self.basis, n: self.n.max(other.n), terms: acc }
    }

    /// Substitute the polynomial `q` for variable `var`: write
    /// `p = A·y_var + B` and return `A·q + B`.
    pub fn substitute(&self, var: usize, q: &MultilinearPoly) -> MultilinearPoly {
        assert_eq!(self.basis, Basis::ZeroOne, "substitution is a zero_one operation");
        let bit = 1u64 << var;
        let mut a = MultilinearPoly::zero(self.basis, self.n.max(q.n));
        let mut b = MultilinearPoly::zero(self.basis, self.n.max(q.n));
        for (mask, c) in &self.terms {
            if mask & bit != 0 {
                a.add_term(mask ^ bit, c.clone());
            } else {
                b.add_term(*mask, c.clone());
            }
        }
        if a.is_zero() {
            return b;
        }
        a.mul(q).add(&b)
    }

    /// Values on the whole cube over `bits` variables (zero_one basis).
    pub fn values_on_cube(&self, bits: usize) -> Vec<BigRational> {
        assert_eq!(self.basis, Basis::ZeroOne);
        assert!(self.used_vars() >> bits == 0, "polynomial uses variables beyond the cube");
        let mut vals = vec![BigRational::zero(); 1 << bits];
        for (mask, c) in &self.terms {
            vals[*mask as usize] = c.clone();
        }
        zeta_in_place(&mut vals, bits);
        vals
    }

    /// Rename variables: bit `i` of a mask becomes bit `map[i]`.
    pub fn relabel_vars(&self, map: &[usize], new_n: usize) -> MultilinearPoly {
        let terms = self
            .terms
            .iter()
            .map(|(mask, c)| {
                let mut out = 0u64;
                for i in 0..64 {
                    if mask >> i & 1 == 1 {
                        out |= 1 << map[i as usize];
                    }
                }
                (out, c.clone())
            })
            .collect();
        MultilinearPoly { basis: self.basis, n: new_n, terms }
    }
}

/// Exact shared-denominator view: `(numerators, denominator)` with
/// `coefficient(mask) = num/den`.
pub fn common_denominator(p: &MultilinearPoly) -> (Vec<(u64, BigInt)>, BigInt) {
    let mut den = BigInt::one();
    for c in p.terms.values() {
        let d = c.denom();
        let g = num_integer::Integer::gcd(&den, d);
        den = den / g * d;
    }
    let nums = p.terms.iter().map(|(m, c)| (*m, c.numer() * (&den / c.denom()))).collect();
    (nums, den)
}

/// Interpolate the exact multilinear polynomial of a truth table
/// (`zero_one` basis, Möbius inversion).
pub fn exact_multilinear(table: &[bool]) -> Result<MultilinearPoly, PolyError> {
    let len = table.len();
    if len == 0 || !len.is_power_of_two() {
        return Err(PolyError::NotPowerOfTwo(len));
    }
    let m = len.trailing_zeros() as usize;
    if m > 20 {
        return Err(PolyError::TooManyVars { got: m, max: 20 });
    }
    let mut a: Vec<i64> = table.iter().map(|&b| b as i64).collect();
    moebius_in_place(&mut a, m);
    Ok(MultilinearPoly::from_terms(
        Basis::ZeroOne,
        m,
        a.iter()
            .enumerate()
            .filter(|(_, c)| **c != 0)
            .map(|(mask, c)| (mask as u64, BigRational::from(BigInt::from(*c)))),
    ))
}

/// Exact evaluation as a standalone entry point.
pub fn eval_poly(p: &MultilinearPoly, x: u64) -> BigRational {
    p.eval(x)
}

/// Error budget for the composition pipeline.  Zero entries are allowed so
/// exact pieces degenerate the shift/scale into the identity.
#[derive(Debug, Clone)]
pub struct ErrorBudget {
    pub top_eps: BigRational,
    pub piece_eps: BigRational,
    pub final_eps: BigRational,
}

impl ErrorBudget {
    pub fn new(
        top_eps: BigRational,
        piece_eps: BigRational,
        final_eps: BigRational,
    ) -> Result<Self, PolyError> {
        for (name, v) in
            [("top_eps", &top_eps), ("piece_eps", &piece_eps), ("final_eps", &final_eps)]
        {
            if v < &BigRational::zero() || v >= &BigRational::one() {
                return Err(PolyError::BadBudget(format!("{name} = {v} outside [0, 1)")));
            }
        }
        Ok(ErrorBudget { top_eps, piece_eps, final_eps })
    }

    /// Defaults for `t` pieces: 1/20 for the top, 1/(20t) per piece, 1/3
    /// target for the composition.
    pub fn defaults(t: usize) -> Self {
        let r = |a: i64, b: i64| BigRational::new(BigInt::from(a), BigInt::from(b));
        ErrorBudget {
            top_eps: r(1, 20),
            piece_eps: r(1, 20 * t.max(1) as i64),
            final_eps: r(1, 3),
        }
    }
}

/// Change of basis by exact substitution (`z = 1 − 2y` one way,
/// `y = (1 − z)/2` the other).  The two representations agree as functions
/// under the bit correspondence 0 ↔ +1, 1 ↔ −1.
pub fn convert_basis(p: &MultilinearPoly) -> MultilinearPoly {
    let (target, a, b) = match p.basis {
        // z_i -> 1 - 2 y_i
        Basis::PlusMinus => {
            (Basis::ZeroOne, BigRational::one(), -BigRational::from(BigInt::from(2)))
        }
        // y_i -> (1 - z_i)/2
        Basis::ZeroOne => (
            Basis::PlusMinus,
            BigRational::new(BigInt::one(), BigInt::from(2)),
            BigRational::new(BigInt::from(-1), BigInt::from(2)),
        ),
    };
    let mut out = MultilinearPoly::zero(target, p.n);
    for (mask, c) in p.terms() {
        // Expand prod_{i in mask} (a + b v_i) term by term.
        let vars: Vec<u64> = (0..64).filter(|i| mask >> i & 1 == 1).map(|i| 1u64 << i).collect();
        let k = vars.len();
        for sub in 0..1u64 << k {
            let mut coeff = c.clone();
            let mut submask = 0u64;
            for (j, bit) in vars.iter().enumerate() {
                if sub >> j & 1 == 1 {
                    coeff *= &b;
                    submask |= bit;
                } else {
                    coeff *= &a;
                }
            }
            out.add_term(submask, coeff);
        }
    }
    if p.basis == Basis::PlusMinus {
        // Magnitude transfer bound: |q|_1 <= n^d · 2^d · 2^d · max |p̂(S)|.
        let d = p.degree() as u32;
        let n = p.n.max(1);
        let bound =
            BigRational::from(BigInt::from(n).pow(d) * BigInt::from(4).pow(d)) * p.max_coeff_abs();
        assert!(
            out.l1_norm() <= bound,
            "basis-conversion L1 bound violated: |q|_1 = {} > {}",
            out.l1_norm(),
            bound
        );
    }
    out
}

/// Serialization DTO for the polynomial dump format.
#[derive(Debug, Serialize, Deserialize)]
pub struct PolyDump {
    pub basis: Basis,
    pub n: usize,
    pub terms: Vec<PolyTermDump>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PolyTermDump {
    pub subset_mask: String,
    pub num: String,
    pub den: String,
}

impl MultilinearPoly {
    pub fn to_dump(&self) -> PolyDump {
        PolyDump {
            basis: self.basis,
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| PolyTermDump {
                    subset_mask: format!("{m:#x}"),
                    num: c.numer().to_string(),
                    den: c.denom().to_string(),
                })
                .collect(),
        }
    }

    pub fn from_dump(d: &PolyDump) -> Result<Self, String> {
        let mut p = MultilinearPoly::zero(d.basis, d.n);
        for t in &d.terms {
            let mask = u64::from_str_radix(t.subset_mask.trim_start_matches("0x"), 16)
                .map_err(|e| format!("bad mask {}: {e}", t.subset_mask))?;
            let num: BigInt = t.num.parse().map_err(|e| format!("bad numerator: {e}"))?;
            let den: BigInt = t.den.parse().map_err(|e| format!("bad denominator: {e}"))?;
            if den.is_zero() {
                return Err("zero denominator".into());
            }
            p.add_term(mask, BigRational::new(num, den));
        }
        Ok(p)
    }
}

pub(crate) fn big_ratio(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

pub(crate) fn ceil_sqrt(s: usize) -> usize {
    let mut t = (s as f64).sqrt() as usize;
    while t * t < s {
        t += 1;
    }
    while t > 1 && (t - 1) * (t - 1) >= s {
        t -= 1;
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i64, b: i64) -> BigRational {
        big_ratio(a, b)
    }

    #[test]
    fn exact_multilinear_examples() {
        // AND -> x1 x2
        let p = exact_multilinear(&[false, false, false, true]).unwrap();
        assert_eq!(p.num_terms(), 1);
        assert_eq!(p.coefficient(0b11), r(1, 1));
        // OR -> x1 + x2 - x1 x2
        let p = exact_multilinear(&[false, true, true, true]).unwrap();
        assert_eq!(p.coefficient(0b01), r(1, 1));
        assert_eq!(p.coefficient(0b10), r(1, 1));
        assert_eq!(p.coefficient(0b11), r(-1, 1));
        // XOR -> x1 + x2 - 2 x1 x2
        let p = exact_multilinear(&[false, true, true, false]).unwrap();
        assert_eq!(p.coefficient(0b11), r(-2, 1));
    }

    #[test]
    fn exact_multilinear_rejects_bad_length() {
        assert!(matches!(exact_multilinear(&[true; 3]), Err(PolyError::NotPowerOfTwo(3))));
    }

    #[test]
    fn eval_examples() {
        let p = exact_multilinear(&[false, false, false, true]).unwrap();
        assert_eq!(eval_poly(&p, 0b11), r(1, 1));
        let q = exact_multilinear(&[false, true, true, true]).unwrap();
        assert_eq!(eval_poly(&q, 0b00), r(0, 1));
    }

    #[test]
    fn convert_basis_example() {
        // p(z) = z1 z2 in plus_minus -> 1 - 2y1 - 2y2 + 4 y1 y2.
        let p = MultilinearPoly::from_terms(Basis::PlusMinus, 2, [(0b11u64, r(1, 1))]);
        let q = convert_basis(&p);
        assert_eq!(q.basis, Basis::ZeroOne);
        assert_eq!(q.coefficient(0), r(1, 1));
        assert_eq!(q.coefficient(0b01), r(-2, 1));
        assert_eq!(q.coefficient(0b10), r(-2, 1));
        assert_eq!(q.coefficient(0b11), r(4, 1));
    }

    #[test]
    fn convert_basis_constant_unchanged() {
        let p = MultilinearPoly::constant(Basis::PlusMinus, 3, r(5, 7));
        let q = convert_basis(&p);
        assert_eq!(q.num_terms(), 1);
        assert_eq!(q.coefficient(0), r(5, 7));
    }

    #[test]
    fn convert_basis_roundtrip_and_semantics() {
        // Random degree-3 polynomial on 6 vars.
        let mut p = MultilinearPoly::zero(Basis::PlusMinus, 6);
        let masks = [0b000111u64, 0b101000, 0b010010, 0b000001, 0];
        for (i, m) in masks.iter().enumerate() {
            p.add_term(*m, r(2 * i as i64 + 1, 3 + i as i64));
        }
        let q = convert_basis(&p);
        let back = convert_basis(&q);
        assert_eq!(p, back);
        // Function agreement under 0 <-> +1, 1 <-> -1.
        for x in 0..64u64 {
            assert_eq!(p.eval(x), q.eval(x), "value mismatch at {x:#b}");
        }
    }

    #[test]
    fn substitution_semantics() {
        // p = y2 * x0 + 1, substitute y2 := OR(x0, x1).
        let mut p = MultilinearPoly::zero(Basis::ZeroOne, 3);
        p.add_term(0b101, r(1, 1));
        p.add_term(0, r(1, 1));
        let or = MultilinearPoly::from_terms(
            Basis::ZeroOne,
            2,
            [(0b01u64, r(1, 1)), (0b10, r(1, 1)), (0b11, r(-1, 1))],
        );
        let s = p.substitute(2, &or);
        for x in 0..4u64 {
            let y2 = (x & 1 != 0) || (x & 2 != 0);
            let expect = r(((x & 1) * y2 as u64) as i64, 1) + r(1, 1);
            assert_eq!(s.eval(x), expect);
        }
    }

    #[test]
    fn values_on_cube_matches_eval() {
        let p = exact_multilinear(&[false, true, true, true, false, false, true, false]).unwrap();
        let vals = p.values_on_cube(3);
        for x in 0..8u64 {
            assert_eq!(vals[x as usize], p.eval(x));
        }
    }

    #[test]
    fn dump_roundtrip() {
        let p = MultilinearPoly::from_terms(
            Basis::ZeroOne,
            4,
            [(0b1010u64, r(-3, 7)), (0u64, r(22, 5))],
        );
        let d = p.to_dump();
        let json = serde_json::to_string(&d).unwrap();
        let d2: PolyDump = serde_json::from_str(&json).unwrap();
        let q = MultilinearPoly::from_dump(&d2).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn ceil_sqrt_small() {
        for (s, t) in [(1, 1), (2, 2), (4, 2), (5, 3), (9, 3), (10, 4), (16, 4), (36, 6), (37, 7)]
        {
            assert_eq!(ceil_sqrt(s), t, "s = {s}");
        }
    }
}

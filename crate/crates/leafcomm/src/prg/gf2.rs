//! Arithmetic over GF(2^l) and GF(2)[x] used by the small-bias generator.
//!
//! Field elements are bit vectors in a `u64` reduced by a fixed minimal-
//! weight irreducible polynomial per degree (verified irreducible by a unit
//! test).  Root counting for bias computation happens entirely in GF(2)[x]:
//! the number of roots of `P` in GF(2^l) is `deg gcd(P, x^(2^l) − x)`.

/// Low taps (polynomial minus the leading `x^l` term) of the fixed
/// irreducible polynomial for each field degree `l = index + 1`.
const IRREDUCIBLE_TAPS: [u64; 64] = [
    0x1, 0x3, 0x3, 0x3, 0x5, 0x3, 0x3, 0x1b,
    0x3, 0x9, 0x5, 0x9, 0x1b, 0x21, 0x3, 0x2b,
    0x9, 0x9, 0x27, 0x9, 0x5, 0x3, 0x21, 0x1b,
    0x9, 0x1b, 0x27, 0x3, 0x5, 0x3, 0x9, 0x8d,
    0x401, 0x81, 0x5, 0x201, 0x53, 0x63, 0x11, 0x39,
    0x9, 0x81, 0x59, 0x21, 0x1b, 0x3, 0x21, 0x2d,
    0x201, 0x1d, 0x4b, 0x9, 0x47, 0x201, 0x81, 0x95,
    0x11, 0x80001, 0x95, 0x3, 0x27, 0x20000001, 0x3, 0x1b,
];

/// The GF(2^l) field with its fixed modulus.
#[derive(Debug, Clone, Copy)]
pub struct Gf2Field {
    pub l: usize,
    taps: u64,
}

impl Gf2Field {
    pub fn new(l: usize) -> Option<Gf2Field> {
        if l == 0 || l > 64 {
            return None;
        }
        Some(Gf2Field { l, taps: IRREDUCIBLE_TAPS[l - 1] })
    }

    /// Carry-less multiply and reduce.
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        let mut acc0: u64 = 0; // low 64 bits
        let mut acc1: u64 = 0; // high bits
        for i in 0..self.l {
            if b >> i & 1 == 1 {
                if i == 0 {
                    acc0 ^= a;
                } else {
                    acc0 ^= a << i;
                    acc1 ^= a >> (64 - i);
                }
            }
        }
        // Reduce from the top: bit (l + k) folds onto taps << k.
        let l = self.l;
        for bit in (l..128).rev() {
            let set = if bit >= 64 { acc1 >> (bit - 64) & 1 == 1 } else { acc0 >> bit & 1 == 1 };
            if !set {
                continue;
            }
            let k = bit - l;
            // Clear the bit and xor taps << k.
            if bit >= 64 {
                acc1 ^= 1 << (bit - 64);
            } else {
                acc0 ^= 1 << bit;
            }
            // taps has degree < l <= bit, so taps << k spans bits [k, k + l).
            if k == 0 {
                acc0 ^= self.taps;
            } else if k < 64 {
                acc0 ^= self.taps << k;
                if k + l > 64 {
                    acc1 ^= self.taps >> (64 - k);
                }
            } else {
                acc1 ^= self.taps << (k - 64);
            }
        }
        debug_assert!(self.l == 64 || acc0 >> self.l == 0);
        acc0
    }

    /// Full modulus as a (possibly 65-bit) polynomial in GF(2)[x].
    #[cfg(test)]
    pub(crate) fn modulus(&self) -> Poly2 {
        let mut p = Poly2::from_u64(self.taps);
        p.set_bit(self.l);
        p
    }
}

/// Dense polynomial over GF(2), little-endian u64 limbs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly2 {
    limbs: Vec<u64>,
}

impl Poly2 {
    pub fn zero() -> Poly2 {
        Poly2 { limbs: vec![] }
    }

    pub fn from_u64(v: u64) -> Poly2 {
        let mut p = Poly2 { limbs: vec![v] };
        p.trim();
        p
    }

    pub fn x() -> Poly2 {
        Poly2::from_u64(2)
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.is_empty()
    }

    pub fn set_bit(&mut self, i: usize) {
        let limb = i / 64;
        if self.limbs.len() <= limb {
            self.limbs.resize(limb + 1, 0);
        }
        self.limbs[limb] ^= 1 << (i % 64);
        self.trim();
    }

    pub fn bit(&self, i: usize) -> bool {
        let limb = i / 64;
        limb < self.limbs.len() && self.limbs[limb] >> (i % 64) & 1 == 1
    }

    fn trim(&mut self) {
        while self.limbs.last() == Some(&0) {
            self.limbs.pop();
        }
    }

    /// Degree, or None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        let last = self.limbs.last()?;
        Some((self.limbs.len() - 1) * 64 + (63 - last.leading_zeros() as usize))
    }

    pub fn add_assign(&mut self, other: &Poly2) {
        if self.limbs.len() < other.limbs.len() {
            self.limbs.resize(other.limbs.len(), 0);
        }
        for (a, b) in self.limbs.iter_mut().zip(other.limbs.iter()) {
            *a ^= b;
        }
        self.trim();
    }

    pub fn shifted(&self, k: usize) -> Poly2 {
        if self.is_zero() {
            return Poly2::zero();
        }
        let limb_shift = k / 64;
        let bit_shift = k % 64;
        let mut limbs = vec![0u64; self.limbs.len() + limb_shift + 1];
        for (i, &v) in self.limbs.iter().enumerate() {
            limbs[i + limb_shift] |= v << bit_shift;
            if bit_shift > 0 {
                limbs[i + limb_shift + 1] |= v >> (64 - bit_shift);
            }
        }
        let mut p = Poly2 { limbs };
        p.trim();
        p
    }

    #[cfg(test)]
    pub(crate) fn mul(&self, other: &Poly2) -> Poly2 {
        let mut acc = Poly2::zero();
        for (i, &limb) in self.limbs.iter().enumerate() {
            for j in 0..64 {
                if limb >> j & 1 == 1 {
                    acc.add_assign(&other.shifted(i * 64 + j));
                }
            }
        }
        acc
    }

    /// Remainder of `self` divided by `m` (m nonzero).
    pub fn rem(&self, m: &Poly2) -> Poly2 {
        let md = m.degree().expect("division by zero polynomial");
        let mut r = self.clone();
        while let Some(rd) = r.degree() {
            if rd < md {
                break;
            }
            r.add_assign(&m.shifted(rd - md));
        }
        r
    }

    pub fn gcd(a: &Poly2, b: &Poly2) -> Poly2 {
        let mut a = a.clone();
        let mut b = b.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a
    }

    /// `self^2 mod m` (frobenius-friendly squaring: spread the bits).
    pub fn square_mod(&self, m: &Poly2) -> Poly2 {
        let mut sq = Poly2::zero();
        if let Some(d) = self.degree() {
            for i in 0..=d {
                if self.bit(i) {
                    sq.set_bit(2 * i);
                }
            }
        }
        sq.rem(m)
    }
}

/// Number of roots of `p` (over GF(2) coefficients) in GF(2^l):
/// `deg gcd(p, x^(2^l) − x)`.
pub fn roots_in_field(p: &Poly2, l: usize) -> usize {
    if p.is_zero() {
        return 1 << l.min(20);
    }
    // x^(2^l) mod p by repeated squaring of x.
    let mut frob = Poly2::x().rem(p);
    for _ in 0..l {
        frob = frob.square_mod(p);
    }
    // gcd(p, frob - x)
    let mut diff = frob;
    diff.add_assign(&Poly2::x());
    let g = Poly2::gcd(p, &diff);
    g.degree().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Irreducibility of every table entry, checked from scratch.
    #[test]
    fn table_entries_are_irreducible() {
        for l in 1..=64usize {
            let field = Gf2Field::new(l).unwrap();
            let m = field.modulus();
            // x^(2^l) == x mod m
            let mut frob = Poly2::x().rem(&m);
            for _ in 0..l {
                frob = frob.square_mod(&m);
            }
            assert_eq!(frob, Poly2::x().rem(&m), "frobenius fails for l = {l}");
            // gcd(x^(2^(l/q)) - x, m) == 1 for prime divisors q of l
            let mut n = l;
            let mut primes = vec![];
            let mut d = 2;
            while d * d <= n {
                while n % d == 0 {
                    primes.push(d);
                    n /= d;
                }
                d += 1;
            }
            if n > 1 {
                primes.push(n);
            }
            primes.dedup();
            for q in primes {
                let mut h = Poly2::x().rem(&m);
                for _ in 0..l / q {
                    h = h.square_mod(&m);
                }
                h.add_assign(&Poly2::x());
                let g = Poly2::gcd(&m, &h);
                assert_eq!(g.degree(), Some(0), "l = {l} shares a factor at q = {q}");
            }
        }
    }

    #[test]
    fn field_mul_matches_poly_mul() {
        for l in [3usize, 8, 13, 21] {
            let f = Gf2Field::new(l).unwrap();
            let m = f.modulus();
            let mask = if l == 64 { u64::MAX } else { (1 << l) - 1 };
            let mut seed = 0x12345678u64;
            for _ in 0..200 {
                seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
                let a = seed >> 7 & mask;
                let b = seed >> 31 & mask;
                let fast = f.mul(a, b);
                let slow = Poly2::from_u64(a).mul(&Poly2::from_u64(b)).rem(&m);
                let slow_v = slow.limbs.first().copied().unwrap_or(0);
                assert_eq!(fast, slow_v, "l={l} a={a:#x} b={b:#x}");
            }
        }
    }

    #[test]
    fn root_count_small_cases() {
        // x^2 + x = x(x+1) has roots {0, 1} in every field.
        let mut p = Poly2::from_u64(0b110);
        assert_eq!(roots_in_field(&p, 3), 2);
        // x^2 + x + 1 has no roots in GF(2) or GF(8), two in GF(4).
        p = Poly2::from_u64(0b111);
        assert_eq!(roots_in_field(&p, 1), 0);
        assert_eq!(roots_in_field(&p, 2), 2);
        assert_eq!(roots_in_field(&p, 3), 0);
        assert_eq!(roots_in_field(&p, 4), 2);
    }

    #[test]
    fn root_count_matches_enumeration() {
        // Brute-force over small fields.
        for l in [2usize, 3, 4, 5, 8] {
            let field = Gf2Field::new(l).unwrap();
            for taps in [0b10u64, 0b1010, 0b100110, 0b1000010] {
                let p = Poly2::from_u64(taps);
                if p.is_zero() {
                    continue;
                }
                let mut brute = 0usize;
                for a in 0..1u64 << l {
                    // Evaluate p at a by Horner over the field.
                    let d = p.degree().unwrap();
                    let mut acc = 0u64;
                    for i in (0..=d).rev() {
                        acc = field.mul(acc, a);
                        if p.bit(i) {
                            acc ^= 1;
                        }
                    }
                    if acc == 0 {
                        brute += 1;
                    }
                }
                assert_eq!(roots_in_field(&p, l), brute, "l={l} taps={taps:#b}");
            }
        }
    }
}

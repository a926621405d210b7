//! Subset-lattice transforms used throughout the polynomial machinery.
//!
//! All arrays are indexed by bitmask over `bits` variables.  `zeta` turns
//! coefficients into point values (`v[x] = Σ_{S ⊆ x} c[S]`), `moebius` is its
//! inverse, and `superset_sum` computes `h[U] = Σ_{x ⊇ U} a[x]`.

use std::ops::{AddAssign, SubAssign};

pub fn zeta_in_place<T: AddAssign + Clone>(a: &mut [T], bits: usize) {
    debug_assert_eq!(a.len(), 1 << bits);
    for i in 0..bits {
        let bit = 1usize << i;
        for mask in 0..a.len() {
            if mask & bit != 0 {
                let prev = a[mask ^ bit].clone();
                a[mask] += prev;
            }
        }
    }
}

pub fn moebius_in_place<T: SubAssign + Clone>(a: &mut [T], bits: usize) {
    debug_assert_eq!(a.len(), 1 << bits);
    for i in 0..bits {
        let bit = 1usize << i;
        for mask in 0..a.len() {
            if mask & bit != 0 {
                let prev = a[mask ^ bit].clone();
                a[mask] -= prev;
            }
        }
    }
}

pub fn superset_sum_in_place<T: AddAssign + Clone>(a: &mut [T], bits: usize) {
    debug_assert_eq!(a.len(), 1 << bits);
    for i in 0..bits {
        let bit = 1usize << i;
        for mask in 0..a.len() {
            if mask & bit == 0 {
                let upper = a[mask | bit].clone();
                a[mask] += upper;
            }
        }
    }
}

/// In-place Walsh–Hadamard transform: `out[S] = Σ_x (−1)^{|S∩x|} a[x]`.
pub fn walsh_hadamard_in_place<T>(a: &mut [T], bits: usize)
where
    T: AddAssign + SubAssign + Clone,
{
    debug_assert_eq!(a.len(), 1 << bits);
    for i in 0..bits {
        let bit = 1usize << i;
        for mask in 0..a.len() {
            if mask & bit == 0 {
                let x = a[mask].clone();
                let y = a[mask | bit].clone();
                let mut lo = x.clone();
                lo += y.clone();
                let mut hi = x;
                hi -= y;
                a[mask] = lo;
                a[mask | bit] = hi;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_moebius_roundtrip() {
        let orig: Vec<i64> = (0..16).map(|i| (i * 7 % 5) as i64 - 2).collect();
        let mut a = orig.clone();
        zeta_in_place(&mut a, 4);
        moebius_in_place(&mut a, 4);
        assert_eq!(a, orig);
    }

    #[test]
    fn superset_sum_brute() {
        let a: Vec<i64> = (0..8).map(|i| i as i64 + 1).collect();
        let mut h = a.clone();
        superset_sum_in_place(&mut h, 3);
        for u in 0..8usize {
            let expect: i64 =
                (0..8).filter(|x| x & u == u).map(|x| a[x]).sum();
            assert_eq!(h[u], expect);
        }
    }

    #[test]
    fn wht_brute() {
        let a: Vec<i64> = vec![1, -2, 3, 5, 0, 1, -1, 2];
        let mut w = a.clone();
        walsh_hadamard_in_place(&mut w, 3);
        for s in 0..8usize {
            let expect: i64 = (0..8)
                .map(|x| {
                    let sign = if (s & x).count_ones() % 2 == 0 { 1 } else { -1 };
                    sign * a[x]
                })
                .sum();
            assert_eq!(w[s], expect);
        }
    }
}

//! Exact rational matrices with a pluggable multiplication backend.
//!
//! The #SAT pipeline needs one product of a wide term matrix with its
//! transpose-shaped partner.  Correctness is what matters at this scale, so
//! the default backend is the standard product; a fast rectangular backend
//! can be slotted in through [`MatmulBackend`].

use num_rational::BigRational;
use num_traits::Zero;

use super::CountError;

#[derive(Debug, Clone, PartialEq)]
pub struct RationalMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<BigRational>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix { rows, cols, data: vec![BigRational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigRational::from_integer(1.into()));
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        RationalMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigRational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: &BigRational) {
        self.data[i * self.cols + j] += v;
    }
}

pub trait MatmulBackend {
    fn name(&self) -> &str;
    fn multiply(&self, a: &RationalMatrix, b: &RationalMatrix)
        -> Result<RationalMatrix, CountError>;
}

/// Standard exact product, looped for cache friendliness and skipping zero
/// entries (the term matrices are extremely sparse).
pub struct StandardBackend;

impl MatmulBackend for StandardBackend {
    fn name(&self) -> &str {
        "standard"
    }

    fn multiply(
        &self,
        a: &RationalMatrix,
        b: &RationalMatrix,
    ) -> Result<RationalMatrix, CountError> {
        if a.cols != b.rows {
            return Err(CountError::DimensionMismatch {
                lhs: (a.rows, a.cols),
                rhs: (b.rows, b.cols),
            });
        }
        let mut out = RationalMatrix::zeros(a.rows, b.cols);
        for i in 0..a.rows {
            for k in 0..a.cols {
                let aik = a.get(i, k);
                if aik.is_zero() {
                    continue;
                }
                for j in 0..b.cols {
                    let bkj = b.get(k, j);
                    if bkj.is_zero() {
                        continue;
                    }
                    let prod = aik * bkj;
                    out.add_to(i, j, &prod);
                }
            }
        }
        Ok(out)
    }
}

/// Multiply with the default backend.
pub fn matmul(a: &RationalMatrix, b: &RationalMatrix) -> Result<RationalMatrix, CountError> {
    StandardBackend.multiply(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn r(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    fn naive(a: &RationalMatrix, b: &RationalMatrix) -> RationalMatrix {
        let mut out = RationalMatrix::zeros(a.rows, b.cols);
        for i in 0..a.rows {
            for j in 0..b.cols {
                let mut acc = BigRational::zero();
                for k in 0..a.cols {
                    acc += a.get(i, k) * b.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    #[test]
    fn identity_is_neutral() {
        let m = RationalMatrix::from_rows(vec![
            vec![r(1, 2), r(-3, 1), r(0, 1)],
            vec![r(7, 5), r(2, 3), r(9, 4)],
        ]);
        let id = RationalMatrix::identity(2);
        assert_eq!(matmul(&id, &m).unwrap(), m);
    }

    #[test]
    fn ones_row_times_column() {
        let row = RationalMatrix::from_rows(vec![vec![r(1, 1); 5]]);
        let col = RationalMatrix::from_rows(vec![vec![r(1, 1)]; 5]);
        let out = matmul(&row, &col).unwrap();
        assert_eq!(out.get(0, 0), &r(5, 1));
    }

    #[test]
    fn random_matches_naive() {
        let mut seed = 12345u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 33) as i64 % 17) - 8
        };
        let a = RationalMatrix::from_rows(
            (0..8).map(|_| (0..3).map(|_| r(next(), 1 + next().abs())).collect()).collect(),
        );
        let b = RationalMatrix::from_rows(
            (0..3).map(|_| (0..8).map(|_| r(next(), 1 + next().abs())).collect()).collect(),
        );
        assert_eq!(matmul(&a, &b).unwrap(), naive(&a, &b));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let a = RationalMatrix::zeros(2, 3);
        let b = RationalMatrix::zeros(2, 3);
        assert!(matches!(matmul(&a, &b), Err(CountError::DimensionMismatch { .. })));
    }
}

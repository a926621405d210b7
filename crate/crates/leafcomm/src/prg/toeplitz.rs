//! Toeplitz universal hashing as a randomness extractor.
//!
//! A random Toeplitz matrix over GF(2) is a 2-universal hash family; by the
//! leftover hash lemma, hashing a `(m, κ)`-source down to `L` bits is
//! `2^{(L−κ)/2−1}`-close to uniform jointly with the seed, so extraction is
//! sound whenever `L ≤ κ − 2·log2(1/δ')`.  Since the hash output is shorter
//! than what the recursion upstream wants, the remaining bits are taken
//! straight from the (uniform, reusable) seed — a strong extractor keeps
//! its seed close to independent of the output.

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::PrgError;

/// Hash `input` (length m) down to `out_len` bits: `out[i] = Σ_j input[j] ·
/// seed[i + j]` over GF(2); the seed supplies the `m + out_len − 1` Toeplitz
/// diagonals.
pub fn toeplitz_hash(input: &[bool], seed: &[bool], out_len: usize) -> Vec<bool> {
    let m = input.len();
    assert!(seed.len() >= m + out_len.saturating_sub(1), "toeplitz seed too short");
    (0..out_len)
        .map(|i| {
            let mut acc = false;
            for (j, &x) in input.iter().enumerate() {
                if x && seed[i + j] {
                    acc = !acc;
                }
            }
            acc
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractorBackend {
    ToeplitzHash,
    /// Placeholder for an optimal-seed extractor; not constructed here.
    ExtensionPoint,
}

/// A `(κ, δ')`-extractor configuration from `m` bits to `out_len` bits.
#[derive(Debug, Clone)]
pub struct ExtractorConfig {
    pub input_len: usize,
    pub out_len: usize,
    pub kappa: usize,
    pub delta_prime: BigRational,
    pub backend: ExtractorBackend,
    /// Bits produced by the hash itself; the rest are seed pass-through.
    pub hash_len: usize,
    /// Total seed length.
    pub seed_len: usize,
}

impl ExtractorConfig {
    /// Configure a Toeplitz extraction.  The leftover hash lemma supports
    /// `hash_len = min(out_len, κ − 2·⌈log2(1/δ')⌉)`; the shortfall
    /// `out_len − hash_len` is covered by seed pass-through, which is why
    /// the implemented seed exceeds the optimal-extractor bound.
    pub fn toeplitz(
        input_len: usize,
        out_len: usize,
        kappa: usize,
        delta_prime: BigRational,
    ) -> Result<ExtractorConfig, PrgError> {
        let inv = delta_prime.recip().to_f64().unwrap_or(f64::INFINITY);
        if !(inv.is_finite() && inv >= 1.0) {
            return Err(PrgError::BadParams(format!("delta' = {delta_prime} out of range")));
        }
        let log_inv = inv.log2().ceil() as usize;
        let hash_len = out_len.min(kappa.saturating_sub(2 * log_inv));
        let toeplitz_seed = if hash_len == 0 { 0 } else { input_len + hash_len - 1 };
        let seed_len = toeplitz_seed + (out_len - hash_len);
        Ok(ExtractorConfig {
            input_len,
            out_len,
            kappa,
            delta_prime,
            backend: ExtractorBackend::ToeplitzHash,
            hash_len,
            seed_len,
        })
    }

    /// Seed margin missing for a genuine `hash_len ≥ wanted` extraction.
    pub fn kappa_shortfall(&self, wanted_hash_len: usize) -> usize {
        let inv = self.delta_prime.recip().to_f64().unwrap_or(f64::INFINITY);
        let log_inv = inv.log2().ceil() as usize;
        (wanted_hash_len + 2 * log_inv).saturating_sub(self.kappa)
    }

    pub fn extract(&self, input: &[bool], seed: &[bool]) -> Result<Vec<bool>, PrgError> {
        if input.len() != self.input_len {
            return Err(PrgError::SeedLength { expected: self.input_len, got: input.len() });
        }
        if seed.len() != self.seed_len {
            return Err(PrgError::SeedLength { expected: self.seed_len, got: seed.len() });
        }
        match self.backend {
            ExtractorBackend::ToeplitzHash => {
                let toeplitz_seed_len =
                    if self.hash_len == 0 { 0 } else { self.input_len + self.hash_len - 1 };
                let mut out = if self.hash_len > 0 {
                    toeplitz_hash(input, &seed[..toeplitz_seed_len], self.hash_len)
                } else {
                    Vec::new()
                };
                out.extend_from_slice(&seed[toeplitz_seed_len..]);
                debug_assert_eq!(out.len(), self.out_len);
                Ok(out)
            }
            ExtractorBackend::ExtensionPoint => Err(PrgError::BadParams(
                "extension-point extractor backend is not constructed".into(),
            )),
        }
    }
}

//! Extractor-based recursive generator for number-in-hand leaf gates.
//!
//! The recursion doubles the output per level: `G_0(a) = a` and
//! `G_i(a, z) = G_{i−1}(a) ∘ G_{i−1}(Ext_{i−1}(a, z))`, so `t = log2 k`
//! levels expand `n/k + Σ d_i` seed bits to `n` output bits.  Each level's
//! extractor is keyed by `κ_i = r_i − D′ − 2t − log2(1/δ)` and error
//! `δ' = δ/(3^t·2^{D'})`; the hybrid argument then bounds the fooling gap on
//! k-block product functions by `3^t·δ'`.

use num_rational::BigRational;
use num_traits::ToPrimitive;

use super::toeplitz::ExtractorConfig;
use super::PrgError;

#[derive(Debug, Clone)]
pub struct InwConfig {
    pub n: usize,
    pub k: usize,
    pub t: usize,
    /// Communication bound D' of the product functions the hybrid targets.
    pub dprime: usize,
    /// Target fooling error δ of the full generator.
    pub delta: BigRational,
    /// Per-level extraction error δ' = δ/(3^t · 2^{D'}).
    pub delta_prime: BigRational,
    /// Extractor at each level i = 0..t (input length r_i).
    pub levels: Vec<ExtractorConfig>,
    pub seed_len: usize,
}

/// Derive the level schedule for given toy parameters.
pub fn inw_config(
    n: usize,
    k: usize,
    dprime: usize,
    delta: BigRational,
) -> Result<InwConfig, PrgError> {
    if k < 2 || !k.is_power_of_two() || n % k != 0 {
        return Err(PrgError::BadParams(format!(
            "k = {k} must be a power of two dividing n = {n}"
        )));
    }
    let t = k.trailing_zeros() as usize;
    let three_t = 3u64.pow(t as u32);
    let delta_prime = &delta
        / BigRational::from(num_bigint::BigInt::from(three_t))
        / BigRational::from(num_bigint::BigInt::from(1u64 << dprime.min(40)));
    let log_inv_delta =
        (delta.recip().to_f64().unwrap_or(2.0)).log2().ceil().max(0.0) as usize;
    let mut levels = Vec::with_capacity(t);
    let mut r = n / k;
    let mut seed_len = n / k;
    for _ in 0..t {
        let kappa = r.saturating_sub(dprime + 2 * t + log_inv_delta);
        let ext = ExtractorConfig::toeplitz(r, r, kappa, delta_prime.clone())?;
        seed_len += ext.seed_len;
        r += ext.seed_len;
        levels.push(ext);
    }
    Ok(InwConfig { n, k, t, dprime, delta, delta_prime, levels, seed_len })
}

/// Expand a seed through the recursion.
pub fn inw_expand(seed: &[bool], cfg: &InwConfig) -> Result<Vec<bool>, PrgError> {
    if seed.len() != cfg.seed_len {
        return Err(PrgError::SeedLength { expected: cfg.seed_len, got: seed.len() });
    }
    expand_level(seed, cfg, cfg.t)
}

fn expand_level(seed: &[bool], cfg: &InwConfig, level: usize) -> Result<Vec<bool>, PrgError> {
    if level == 0 {
        return Ok(seed.to_vec());
    }
    let ext = &cfg.levels[level - 1];
    let (a, z) = seed.split_at(seed.len() - ext.seed_len);
    debug_assert_eq!(a.len(), ext.input_len);
    let mut left = expand_level(a, cfg, level - 1)?;
    let extracted = ext.extract(a, z)?;
    let right = expand_level(&extracted, cfg, level - 1)?;
    left.extend(right);
    Ok(left)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn ratio(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn one_level_structure() {
        // k = 2: output = a ∘ Ext_0(a, z).
        let cfg = inw_config(8, 2, 2, ratio(1, 2)).unwrap();
        assert_eq!(cfg.t, 1);
        assert_eq!(cfg.levels.len(), 1);
        let seed: Vec<bool> = (0..cfg.seed_len).map(|i| i % 3 == 0).collect();
        let out = inw_expand(&seed, &cfg).unwrap();
        assert_eq!(out.len(), 8);
        assert_eq!(&out[..4], &seed[..4], "first block is the raw seed block");
        let ext = cfg.levels[0].extract(&seed[..4], &seed[4..]).unwrap();
        assert_eq!(&out[4..], &ext[..]);
    }

    #[test]
    fn determinism() {
        let cfg = inw_config(8, 2, 2, ratio(1, 2)).unwrap();
        let seed: Vec<bool> = (0..cfg.seed_len).map(|i| i % 2 == 1).collect();
        assert_eq!(inw_expand(&seed, &cfg).unwrap(), inw_expand(&seed, &cfg).unwrap());
    }

    #[test]
    fn two_levels_output_length() {
        let cfg = inw_config(16, 4, 1, ratio(1, 2)).unwrap();
        assert_eq!(cfg.t, 2);
        let seed: Vec<bool> = (0..cfg.seed_len).map(|i| i % 5 == 0).collect();
        assert_eq!(inw_expand(&seed, &cfg).unwrap().len(), 16);
    }

    #[test]
    fn rejects_bad_k() {
        assert!(inw_config(8, 3, 1, ratio(1, 2)).is_err());
        assert!(inw_config(9, 2, 1, ratio(1, 2)).is_err());
    }
}

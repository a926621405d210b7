//! Hardness-based stretch generator from generalized inner product.
//!
//! The seed is `t` blocks of `m` bits.  The output interleaves the seed data
//! by party block and appends, per party block `i`, the GIP values of that
//! block's batch of seeds — one extra bit per seed, `t` extra bits total.
//!
//! Bit layout (pinned): for block `i ∈ [k]`, emit `x_1^{(i)} … x_t^{(i)}`
//! (each `m/k` bits), then the `t/k` bits `GIP(x_j)` for
//! `j ∈ ((i−1)·t/k, i·t/k]`, blocks in ascending order.

use super::PrgError;
use crate::hardness::gip;

/// Output length for the given parameters.
pub fn gip_stretch_out_len(m: usize, t: usize) -> usize {
    m * t + t
}

pub fn gip_stretch_expand(
    seed: &[bool],
    m: usize,
    t: usize,
    k: usize,
) -> Result<Vec<bool>, PrgError> {
    if k == 0 || m % k != 0 || t % k != 0 {
        return Err(PrgError::BadParams(format!("k = {k} must divide m = {m} and t = {t}")));
    }
    if seed.len() != m * t {
        return Err(PrgError::SeedLength { expected: m * t, got: seed.len() });
    }
    if m > 60 {
        return Err(PrgError::BadParams(format!("m = {m} exceeds the word-size bound")));
    }
    let block = m / k;
    let batch = t / k;
    // Seed block j as a word.
    let word = |j: usize| -> u64 {
        let mut w = 0u64;
        for b in 0..m {
            if seed[j * m + b] {
                w |= 1 << b;
            }
        }
        w
    };
    let mut out = Vec::with_capacity(m * t + t);
    for i in 0..k {
        for j in 0..t {
            for b in 0..block {
                out.push(seed[j * m + i * block + b]);
            }
        }
        for j in i * batch..(i + 1) * batch {
            let g = gip(k, word(j), m).map_err(|e| PrgError::BadParams(e.to_string()))?;
            out.push(g);
        }
    }
    debug_assert_eq!(out.len(), m * t + t);
    Ok(out)
}

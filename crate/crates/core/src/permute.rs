//! Non-identity segment permutations: exhaustive enumeration for small k,
//! uniform sampling (with replacement) for large k.
//!
//! Index convention, fixed once for the whole crate: applying a permutation
//! puts the input segment `mapping[i]` at output position `i`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest k for which exhaustive enumeration is offered (7! = 5040
/// permutations); beyond this, callers must sample.
pub const ENUMERATION_CEILING: usize = 7;

/// Algorithm identifier of the seedable generator used throughout, recorded
/// in run manifests so runs are replayable.
pub const GENERATOR_ID: &str = "chacha8";

#[derive(Debug, Error)]
pub enum PermuteError {
    #[error("no non-identity permutation exists for k = {k}; need k >= 2")]
    KTooSmall { k: usize },
    #[error("k = {k} exceeds the enumeration ceiling {ceiling}; use sampling instead")]
    AboveCeiling { k: usize, ceiling: usize },
    #[error("permutation over {k} indices applied to {got} segments")]
    LengthMismatch { k: usize, got: usize },
    #[error("mapping is not a bijection on [0, {k})")]
    NotABijection { k: usize },
    #[error("the identity permutation is not a valid shuffle")]
    IdentityForbidden,
    #[error("n_samples must be at least 1")]
    ZeroSamples,
}

/// A non-identity bijection on `[0, k)`, stored as the output-to-input index
/// mapping. Serializes as a plain integer array.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SegmentPermutation {
    mapping: Vec<usize>,
}

impl SegmentPermutation {
    pub fn from_mapping(mapping: Vec<usize>) -> Result<Self, PermuteError> {
        let k = mapping.len();
        if k < 2 {
            return Err(PermuteError::KTooSmall { k });
        }
        let mut seen = vec![false; k];
        for &i in &mapping {
            if i >= k || seen[i] {
                return Err(PermuteError::NotABijection { k });
            }
            seen[i] = true;
        }
        if mapping.iter().enumerate().all(|(i, &m)| i == m) {
            return Err(PermuteError::IdentityForbidden);
        }
        Ok(SegmentPermutation { mapping })
    }

    pub fn k(&self) -> usize {
        self.mapping.len()
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    /// Reorder `segments`: output position `i` holds `segments[mapping[i]]`.
    pub fn apply<T: Clone>(&self, segments: &[T]) -> Result<Vec<T>, PermuteError> {
        if segments.len() != self.k() {
            return Err(PermuteError::LengthMismatch {
                k: self.k(),
                got: segments.len(),
            });
        }
        Ok(self.mapping.iter().map(|&i| segments[i].clone()).collect())
    }

    /// The inverse mapping (may be the identity only if self were, which is
    /// excluded by construction).
    pub fn inverse(&self) -> SegmentPermutation {
        let mut inv = vec![0usize; self.k()];
        for (i, &m) in self.mapping.iter().enumerate() {
            inv[m] = i;
        }
        SegmentPermutation { mapping: inv }
    }
}

fn next_lexicographic(perm: &mut [usize]) -> bool {
    // Standard next-permutation step.
    if perm.len() < 2 {
        return false;
    }
    let mut i = perm.len() - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = perm.len() - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// All k! - 1 non-identity permutations of `[0, k)` in lexicographic order.
pub fn enumerate_nonidentity(k: usize) -> Result<Vec<SegmentPermutation>, PermuteError> {
    if k < 2 {
        return Err(PermuteError::KTooSmall { k });
    }
    if k > ENUMERATION_CEILING {
        return Err(PermuteError::AboveCeiling {
            k,
            ceiling: ENUMERATION_CEILING,
        });
    }
    let mut current: Vec<usize> = (0..k).collect();
    let mut out = Vec::new();
    while next_lexicographic(&mut current) {
        out.push(SegmentPermutation {
            mapping: current.clone(),
        });
    }
    Ok(out)
}

/// Draw `n_samples` permutations uniformly from the non-identity permutations
/// of `[0, k)`, with replacement, by rejecting the identity. Deterministic
/// given the seed.
pub fn sample_nonidentity(
    k: usize,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<SegmentPermutation>, PermuteError> {
    if k < 2 {
        return Err(PermuteError::KTooSmall { k });
    }
    if n_samples == 0 {
        return Err(PermuteError::ZeroSamples);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        out.push(sample_one(k, &mut rng));
    }
    Ok(out)
}

fn sample_one(k: usize, rng: &mut ChaCha8Rng) -> SegmentPermutation {
    loop {
        let mut mapping: Vec<usize> = (0..k).collect();
        // Fisher-Yates
        for i in (1..k).rev() {
            let j = rng.gen_range(0..=i);
            mapping.swap(i, j);
        }
        if !mapping.iter().enumerate().all(|(i, &m)| i == m) {
            return SegmentPermutation { mapping };
        }
    }
}

/// Stable per-index seed derivation (splitmix64 of a golden-ratio stride), so
/// fan-out work is reproducible regardless of scheduling.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(1)
        .wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable seed derivation from string keys (first 8 bytes of SHA-256), used
/// to give each (document, translator) pair its own recorded stream.
pub fn derive_seed_for_keys(base: u64, keys: &[&str]) -> u64 {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    for key in keys {
        hasher.update(key.as_bytes());
        hasher.update([0x1f]);
    }
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    base ^ u64::from_be_bytes(bytes)
}

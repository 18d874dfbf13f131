//! Named seed derivation.
//!
//! Every random stream in the pipeline is derived from one global seed plus a
//! path of labels and indices, so that a stream depends only on *what* it is
//! used for and never on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type PipelineRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a hash of a stream label.
pub fn label(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(base), |acc, &part| splitmix64(acc ^ splitmix64(part)))
}

pub fn stream(base: u64, name: &str, indices: &[u64]) -> PipelineRng {
    let mut path = Vec::with_capacity(indices.len() + 1);
    path.push(label(name));
    path.extend_from_slice(indices);
    PipelineRng::seed_from_u64(derive_seed(base, &path))
}

//! Reproducible random directions.
//!
//! Every draw is addressed by `(seed, stream)`: the stream index selects an
//! independent ChaCha stream, so results do not depend on how work is split
//! across threads.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::Vector;

/// Number of draws handled by one task in chunked Monte Carlo loops.
pub const CHUNK: usize = 4096;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform direction on `S^{n-1}`.
pub fn unit_vector<R: rand::Rng>(rng: &mut R, dim: usize) -> Vector {
    loop {
        let v: Vector = DVector::from_fn(dim, |_, _| StandardNormal.sample(rng));
        let norm = v.norm();
        if norm > 1e-12 {
            return v / norm;
        }
    }
}

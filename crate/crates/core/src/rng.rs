//! Counter-based random streams.
//!
//! Every sample is drawn from its own generator keyed by `(seed, stream, counter)`,
//! so a loop over samples produces the same values whether it runs serially or
//! split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{DenseMatrix, DenseSymMatrix};

/// Default seed for every sampling loop and random instance family.
pub const DEFAULT_SEED: u64 = 0xF1C75;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for sample `counter` of `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64, counter: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut state = splitmix64(seed) ^ splitmix64(stream.rotate_left(17) ^ 0xA5A5_5A5A);
    state ^= splitmix64(counter.wrapping_add(0x1234_5678));
    for chunk in key.chunks_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

pub fn gaussian_vector(rng: &mut impl rand::Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn gaussian_matrix(rng: &mut impl rand::Rng, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_raw(rows, cols, gaussian_vector(rng, rows * cols))
}

/// `GᵀG + n·I` with Gaussian `G`.
pub fn random_spd(rng: &mut impl rand::Rng, n: usize) -> DenseSymMatrix {
    let g = gaussian_matrix(rng, n, n);
    let mut m = g.transpose().matmul(&g).expect("square");
    for i in 0..n {
        m[(i, i)] += n as f64;
    }
    DenseSymMatrix::symmetrized(m)
}

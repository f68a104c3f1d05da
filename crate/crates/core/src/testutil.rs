//! Fixtures shared by unit tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ratings::SparseRatings;

/// The 5x5 toy mask (0-based): rows {0,2}, {1}, {0,3}, {2,4}, {1,3}.
/// Values are `5u + i` unless overridden.
pub fn toy() -> SparseRatings {
    toy_with(|u, i| (u * 5 + i) as f64)
}

pub const TOY_CELLS: [(usize, usize); 9] = [
    (0, 0),
    (0, 2),
    (1, 1),
    (2, 0),
    (2, 3),
    (3, 2),
    (3, 4),
    (4, 1),
    (4, 3),
];

pub fn toy_with(value: impl Fn(usize, usize) -> f64) -> SparseRatings {
    SparseRatings::from_triples(TOY_CELLS.iter().map(|&(u, i)| (u, i, value(u, i))), 5, 5)
        .unwrap()
}

/// Random matrix with each cell observed with probability `p`, values in [-3, 3).
pub fn random_ratings(n: usize, m: usize, p: f64, seed: u64) -> SparseRatings {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut triples = Vec::new();
    for u in 0..n {
        for i in 0..m {
            if rng.random::<f64>() < p {
                triples.push((u, i, rng.random_range(-3.0..3.0)));
            }
        }
    }
    SparseRatings::from_triples(triples, n, m).unwrap()
}

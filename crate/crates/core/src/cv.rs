//! Seeded k-fold partitioning of observed entries.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ratings::{Rating, SparseRatings};

/// Fold index for each of `len` entries: a seeded shuffle dealt round-robin,
/// so fold sizes differ by at most one.
pub fn fold_assignment(len: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..len).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut assign = vec![0; len];
    for (pos, &idx) in order.iter().enumerate() {
        assign[idx] = pos % folds;
    }
    assign
}

/// One train/held-out split of a rating matrix.
pub struct Fold {
    pub train: SparseRatings,
    pub held: Vec<Rating>,
}

pub fn k_folds(r: &SparseRatings, folds: usize, seed: u64) -> Result<Vec<Fold>> {
    if folds < 2 {
        return Err(Error::InvalidParameter("need at least 2 folds".into()));
    }
    if r.len() < folds {
        return Err(Error::TooFewObservations {
            needed: folds,
            got: r.len(),
        });
    }
    let assign = fold_assignment(r.len(), folds, seed);
    Ok((0..folds)
        .map(|f| {
            let mut train = Vec::with_capacity(r.len());
            let mut held = Vec::new();
            for (t, &a) in r.triples().iter().zip(&assign) {
                if a == f {
                    held.push(*t);
                } else {
                    train.push(*t);
                }
            }
            Fold {
                train: SparseRatings::from_triples(train, r.n_users(), r.n_items())
                    .expect("subset of valid ratings"),
                held,
            }
        })
        .collect())
}

//! Convergence of overlap distances toward latent distances as the matrix grows.

mod common;

use common::median;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rne_core::distance::{corrected_kernel_arg, overlap_sq_distance};
use rne_core::oracle::LatentOracle;
use rne_core::ratings::PairKind;
use rne_core::simulation::{generate_problem, mcar_mask};

fn random_pairs(n: usize, count: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
        if u != v {
            out.push((u, v));
        }
    }
    out
}

/// Median of `|d̃² − 2σ² − d*²|` for the complete noisy matrix.
fn complete_gap(n: usize, seeds: u64) -> f64 {
    let mut gaps = Vec::new();
    for seed in 0..seeds {
        let p = generate_problem(n, n, 3, 1.0, seed).unwrap();
        let o = LatentOracle::new(p.z0.clone(), p.z.clone(), 3).unwrap();
        for (u, v) in random_pairs(n, 100, seed + 100) {
            let d = o.distances(PairKind::UserPair, u, v);
            gaps.push((d.d_tilde.powi(2) - 2.0 * p.sigma_eps2 - d.d_star.powi(2)).abs());
        }
    }
    median(&mut gaps)
}

/// Median of `|d̂² − 2σ² − d²|` with the true noise variance, half observed.
fn observed_gap(n: usize, seeds: u64) -> f64 {
    let mut gaps = Vec::new();
    for seed in 0..seeds {
        let p = generate_problem(n, n, 3, 1.0, seed).unwrap();
        let r = p.ratings(&mcar_mask(n, n, 0.5, seed).unwrap()).unwrap();
        let o = LatentOracle::new(p.z0.clone(), p.z.clone(), 3).unwrap();
        for (u, v) in random_pairs(n, 100, seed + 200) {
            let Some(d) = overlap_sq_distance(&r, PairKind::UserPair, u, v).unwrap() else {
                continue;
            };
            let truth = o.distances(PairKind::UserPair, u, v).d.powi(2);
            gaps.push((d.sq_dist - 2.0 * p.sigma_eps2 - truth).abs());
        }
    }
    median(&mut gaps)
}

#[test]
fn noisy_row_distance_debiases_with_size() {
    let small = complete_gap(100, 3);
    let large = complete_gap(400, 3);
    assert!(large < small, "{large} !< {small}");
}

#[test]
fn observed_distance_debiases_with_size() {
    let small = observed_gap(100, 3);
    let large = observed_gap(400, 3);
    assert!(large < 0.75 * small, "{large} vs {small}");
}

#[test]
fn noiseless_corrected_arg_is_the_root_distance() {
    let p = generate_problem(50, 40, 2, 1.0, 1).unwrap();
    let cells: Vec<(usize, usize)> = (0..50).flat_map(|u| (0..40).map(move |i| (u, i))).collect();
    let all = rne_core::ratings::SparseRatings::from_triples(
        cells.iter().map(|&(u, i)| (u, i, p.z0[(u, i)])),
        50,
        40,
    )
    .unwrap();
    let o = LatentOracle::new(p.z0.clone(), p.z0.clone(), 2).unwrap();
    for (u, v) in random_pairs(50, 30, 3) {
        let d = overlap_sq_distance(&all, PairKind::UserPair, u, v).unwrap().unwrap();
        let arg = corrected_kernel_arg(d.sq_dist, 0.0);
        assert_eq!(arg, d.sq_dist.sqrt());
        let latent = o.distances(PairKind::UserPair, u, v).d;
        assert!((arg - latent).abs() <= 1e-9 * latent.max(1.0));
    }
}

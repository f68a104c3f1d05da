//! Synthetic low-rank problems, MCAR masking and cold-start splits.

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ratings::{Cell, Rating, SparseRatings};

// One ChaCha stream per purpose, so changing how one is consumed leaves the
// others untouched.
const STREAM_FACTORS: u64 = 0;
const STREAM_NOISE: u64 = 1;
const STREAM_MASK: u64 = 2;
const STREAM_COLD: u64 = 3;
const STREAM_SHUFFLE: u64 = 4;

pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// How `snr` sets the noise level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum NoiseCalibration {
    /// `σ² = signal / snr²`.
    #[default]
    VarianceRatio,
    /// `σ = signal / snr`: the signal variance is used as a noise standard
    /// deviation.
    SignalAsStdDev,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatentProblem {
    /// `n x k`.
    pub u: DMatrix<f64>,
    /// `m x k`.
    pub v: DMatrix<f64>,
    /// `U Vᵀ`.
    pub z0: DMatrix<f64>,
    /// `z0` plus noise.
    pub z: DMatrix<f64>,
    pub sigma_eps2: f64,
    pub signal: f64,
    pub snr: f64,
    pub calibration: NoiseCalibration,
    pub seed: u64,
}

impl LatentProblem {
    pub fn n_users(&self) -> usize {
        self.z.nrows()
    }

    pub fn n_items(&self) -> usize {
        self.z.ncols()
    }

    /// Noisy values on `cells` as a rating matrix.
    pub fn ratings(&self, cells: &[Cell]) -> Result<SparseRatings> {
        SparseRatings::from_triples(
            cells.iter().map(|&(u, i)| Rating::new(u, i, self.z[(u, i)])),
            self.n_users(),
            self.n_items(),
        )
    }
}

/// Sample variance of all entries, denominator `nm − 1`.
pub fn signal(z0: &DMatrix<f64>) -> f64 {
    let len = z0.len();
    if len < 2 {
        return 0.0;
    }
    let mean = z0.mean();
    z0.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (len - 1) as f64
}

pub fn generate_problem(n: usize, m: usize, k: usize, snr: f64, seed: u64) -> Result<LatentProblem> {
    generate_problem_with(n, m, k, snr, seed, NoiseCalibration::VarianceRatio)
}

/// Standard normal factors, `Z0 = U Vᵀ`, Gaussian noise scaled to `snr`.
pub fn generate_problem_with(
    n: usize,
    m: usize,
    k: usize,
    snr: f64,
    seed: u64,
    calibration: NoiseCalibration,
) -> Result<LatentProblem> {
    if n == 0 || m == 0 || k == 0 || k > n.min(m) {
        return Err(Error::InvalidShape(format!(
            "need 1 <= k <= min(n, m), got n={n} m={m} k={k}"
        )));
    }
    if !(snr > 0.0 && snr.is_finite()) {
        return Err(Error::InvalidParameter(format!("snr must be positive, got {snr}")));
    }
    let mut rng = rng_for(seed, STREAM_FACTORS);
    let u = DMatrix::<f64>::from_fn(n, k, |_, _| StandardNormal.sample(&mut rng));
    let v = DMatrix::<f64>::from_fn(m, k, |_, _| StandardNormal.sample(&mut rng));
    let z0 = &u * v.transpose();
    let signal = signal(&z0);
    let sigma_eps2 = match calibration {
        NoiseCalibration::VarianceRatio => signal / (snr * snr),
        NoiseCalibration::SignalAsStdDev => (signal / snr).powi(2),
    };
    let mut rng = rng_for(seed, STREAM_NOISE);
    let noise = Normal::new(0.0, sigma_eps2.sqrt()).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let z = DMatrix::from_fn(n, m, |a, b| z0[(a, b)] + noise.sample(&mut rng));
    Ok(LatentProblem {
        u,
        v,
        z0,
        z,
        sigma_eps2,
        signal,
        snr,
        calibration,
        seed,
    })
}

/// Each cell kept independently with probability `1 − p_miss`; row-major.
pub fn mcar_mask(n: usize, m: usize, p_miss: f64, seed: u64) -> Result<Vec<Cell>> {
    check_unit("p_miss", p_miss)?;
    let mut rng = rng_for(seed, STREAM_MASK);
    let p_obs = 1.0 - p_miss;
    let mut out = Vec::new();
    for u in 0..n {
        for i in 0..m {
            if rng.random::<f64>() < p_obs {
                out.push((u, i));
            }
        }
    }
    Ok(out)
}

fn check_unit(name: &str, p: f64) -> Result<()> {
    if (0.0..1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be in [0, 1), got {p}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub n_users: usize,
    pub n_items: usize,
    pub train: Vec<Cell>,
    pub test_cold: Vec<Cell>,
    pub test_warm: Vec<Cell>,
    pub cold_rows: Vec<usize>,
    pub cold_cols: Vec<usize>,
    pub p_miss: f64,
    pub phi: f64,
    pub train_frac: f64,
    pub seed: u64,
}

impl SplitPlan {
    pub fn n_observed(&self) -> usize {
        self.train.len() + self.test_cold.len() + self.test_warm.len()
    }

    /// Warm and cold test cells together, sorted.
    pub fn test_all(&self) -> Vec<Cell> {
        let mut all = self.test_warm.clone();
        all.extend_from_slice(&self.test_cold);
        all.sort_unstable();
        all
    }
}

pub const DEFAULT_TRAIN_FRAC: f64 = 0.75;

/// Mask with `p_miss`, then split the observed cells with a 75% train share.
pub fn split(problem: &LatentProblem, p_miss: f64, phi: f64, seed: u64) -> Result<SplitPlan> {
    split_with(problem, p_miss, phi, DEFAULT_TRAIN_FRAC, seed)
}

pub fn split_with(problem: &LatentProblem, p_miss: f64, phi: f64, train_frac: f64, seed: u64) -> Result<SplitPlan> {
    let observed = mcar_mask(problem.n_users(), problem.n_items(), p_miss, seed)?;
    let mut plan = split_observed(problem.n_users(), problem.n_items(), &observed, phi, train_frac, seed)?;
    plan.p_miss = p_miss;
    Ok(plan)
}

/// Cold-start aware split of an observed cell set.
///
/// `⌈φn⌉` rows and `⌈φm⌉` columns are drawn as cold and all their cells go to
/// the test set. The rest are shuffled so that train holds
/// `⌊train_frac · |observed|⌋` cells. Test cells whose row or column ends up
/// with no training entry are counted as cold.
pub fn split_observed(
    n: usize,
    m: usize,
    observed: &[Cell],
    phi: f64,
    train_frac: f64,
    seed: u64,
) -> Result<SplitPlan> {
    check_unit("phi", phi)?;
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train_frac must be in (0, 1), got {train_frac}"
        )));
    }
    let mut rng = rng_for(seed, STREAM_COLD);
    let n_cold_rows = ((phi * n as f64).ceil() as usize).min(n);
    let n_cold_cols = ((phi * m as f64).ceil() as usize).min(m);
    let mut cold_rows = sample(&mut rng, n, n_cold_rows).into_vec();
    let mut cold_cols = sample(&mut rng, m, n_cold_cols).into_vec();
    cold_rows.sort_unstable();
    cold_cols.sort_unstable();
    let mut row_cold = vec![false; n];
    let mut col_cold = vec![false; m];
    cold_rows.iter().for_each(|&u| row_cold[u] = true);
    cold_cols.iter().for_each(|&i| col_cold[i] = true);

    let mut cells = observed.to_vec();
    cells.sort_unstable();
    let (mut test_cold, mut rest): (Vec<Cell>, Vec<Cell>) =
        cells.into_iter().partition(|&(u, i)| row_cold[u] || col_cold[i]);
    let total = test_cold.len() + rest.len();
    let n_train = (train_frac * total as f64).floor() as usize;
    if test_cold.len() > total - n_train {
        return Err(Error::InfeasibleSplit {
            cold: test_cold.len(),
            budget: total - n_train,
        });
    }
    rest.shuffle(&mut rng_for(seed, STREAM_SHUFFLE));
    let mut test_warm = rest.split_off(n_train);
    let mut train = rest;
    train.sort_unstable();

    let mut row_seen = vec![false; n];
    let mut col_seen = vec![false; m];
    for &(u, i) in &train {
        row_seen[u] = true;
        col_seen[i] = true;
    }
    let (still_warm, unseen): (Vec<Cell>, Vec<Cell>) =
        test_warm.drain(..).partition(|&(u, i)| row_seen[u] && col_seen[i]);
    test_warm = still_warm;
    test_warm.sort_unstable();
    test_cold.extend(unseen);
    test_cold.sort_unstable();

    Ok(SplitPlan {
        n_users: n,
        n_items: m,
        train,
        test_cold,
        test_warm,
        cold_rows,
        cold_cols,
        p_miss: 0.0,
        phi,
        train_frac,
        seed,
    })
}

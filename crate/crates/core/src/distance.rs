//! Overlap-based distances between users and between items, and the noise
//! variance estimate used to debias them.
//!
//! For two users `u, v` the squared distance is the mean squared difference of
//! their ratings over co-rated items. Observation noise inflates it by roughly
//! `2σ²`, so the kernel argument is `sqrt(max(0, d̂² − 2σ̂²))`.

use serde::{Deserialize, Serialize};

use crate::baselines::soft_impute::{soft_impute, SoftImputeOptions};
use crate::error::{Error, Result};
use crate::ratings::{co_observed, PairKind, SparseRatings};

/// A squared distance together with the overlap it was averaged over.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairDistance {
    pub sq_dist: f64,
    pub overlap: usize,
}

/// Mean squared difference of two index lists over their common indices.
fn line_sq_distance(a: &[(usize, f64)], b: &[(usize, f64)]) -> Option<PairDistance> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for (_, x, y) in co_observed(a, b) {
        let d = x - y;
        sum += d * d;
        count += 1;
    }
    (count > 0).then(|| PairDistance {
        sq_dist: sum / count as f64,
        overlap: count,
    })
}

/// `d̂²` between two users or two items. `None` when they share no
/// observation.
pub fn overlap_sq_distance(
    r: &SparseRatings,
    kind: PairKind,
    a: usize,
    b: usize,
) -> Result<Option<PairDistance>> {
    Ok(line_sq_distance(r.line(kind, a)?, r.line(kind, b)?))
}

/// The rough complete fit used only to estimate the noise variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub enum FirstStep {
    /// `row_mean(u) + col_mean(i) − global_mean`.
    #[default]
    AdditiveMeans,
    SoftImpute { lambda: f64 },
}

/// First-step predictions for every observed cell, in `r.triples()` order.
pub fn first_step_estimate(r: &SparseRatings, method: FirstStep) -> Result<Vec<f64>> {
    if r.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    match method {
        FirstStep::AdditiveMeans => {
            let global = r.mean().expect("nonempty");
            let line_mean = |line: &[(usize, f64)]| {
                if line.is_empty() {
                    global
                } else {
                    line.iter().map(|&(_, a)| a).sum::<f64>() / line.len() as f64
                }
            };
            let row_means: Vec<f64> = (0..r.n_users()).map(|u| line_mean(r.row(u))).collect();
            let col_means: Vec<f64> = (0..r.n_items()).map(|i| line_mean(r.col(i))).collect();
            Ok(r.triples()
                .iter()
                .map(|t| row_means[t.user] + col_means[t.item] - global)
                .collect())
        }
        FirstStep::SoftImpute { lambda } => {
            let fit = match soft_impute(r, lambda, SoftImputeOptions::default()) {
                Ok(fit) => fit,
                Err(Error::NonConvergence { fit }) => *fit,
                Err(e) => return Err(e),
            };
            Ok(r.triples()
                .iter()
                .map(|t| fit.predict(t.user, t.item))
                .collect())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    pub sigma2_hat: f64,
    pub n_residuals: usize,
    pub first_step: FirstStep,
}

impl VarianceEstimate {
    /// A variance supplied from outside, e.g. a known noise level.
    pub fn known(sigma2: f64) -> Self {
        Self {
            sigma2_hat: sigma2,
            n_residuals: 0,
            first_step: FirstStep::AdditiveMeans,
        }
    }
}

/// Mean squared residual of the first-step fit over `Ω`.
pub fn estimate_noise_variance(
    r: &SparseRatings,
    zhat1: &[f64],
    first_step: FirstStep,
) -> Result<VarianceEstimate> {
    if r.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    if zhat1.len() != r.len() {
        return Err(Error::InvalidParameter(format!(
            "first-step predictions cover {} cells, matrix has {}",
            zhat1.len(),
            r.len()
        )));
    }
    let ss: f64 = r
        .triples()
        .iter()
        .zip(zhat1)
        .map(|(t, z)| (t.value - z).powi(2))
        .sum();
    Ok(VarianceEstimate {
        sigma2_hat: ss / r.len() as f64,
        n_residuals: r.len(),
        first_step,
    })
}

/// First step followed by the residual variance.
pub fn fit_noise_variance(r: &SparseRatings, first_step: FirstStep) -> Result<VarianceEstimate> {
    let zhat1 = first_step_estimate(r, first_step)?;
    estimate_noise_variance(r, &zhat1, first_step)
}

/// `sqrt(max(0, d̂² − 2σ̂²))`.
pub fn corrected_kernel_arg(sq_dist: f64, sigma2_hat: f64) -> f64 {
    (sq_dist - 2.0 * sigma2_hat).max(0.0).sqrt()
}

/// Read access to pairwise distances restricted to overlaps of at least `beta`.
///
/// A line paired with itself has distance zero and overlap equal to its
/// length, so it qualifies whenever it has at least `beta` observations.
pub trait PairDistances {
    fn beta(&self) -> usize;
    fn sigma2_hat(&self) -> f64;
    fn user_distance(&self, u: usize, v: usize) -> Option<PairDistance>;
    fn item_distance(&self, i: usize, j: usize) -> Option<PairDistance>;
}

fn self_distance(line: &[(usize, f64)], beta: usize) -> Option<PairDistance> {
    (line.len() >= beta && !line.is_empty()).then_some(PairDistance {
        sq_dist: 0.0,
        overlap: line.len(),
    })
}

/// Eagerly computed distances for every pair meeting `beta`.
#[derive(Debug, Clone)]
pub struct DistanceModel {
    // Adjacency lists sorted by partner id; both directions stored.
    user_adj: Vec<Vec<(usize, PairDistance)>>,
    item_adj: Vec<Vec<(usize, PairDistance)>>,
    user_len: Vec<usize>,
    item_len: Vec<usize>,
    pub variance: VarianceEstimate,
    pub beta: usize,
}

fn build_adjacency(lines: &[&[(usize, f64)]], beta: usize) -> Vec<Vec<(usize, PairDistance)>> {
    let n = lines.len();
    let upper = |a: usize| -> Vec<(usize, PairDistance)> {
        ((a + 1)..n)
            .filter_map(|b| {
                line_sq_distance(lines[a], lines[b])
                    .filter(|d| d.overlap >= beta)
                    .map(|d| (b, d))
            })
            .collect()
    };
    #[cfg(feature = "parallel")]
    let halves: Vec<Vec<(usize, PairDistance)>> = {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(upper).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let halves: Vec<Vec<(usize, PairDistance)>> = (0..n).map(upper).collect();

    let mut adj: Vec<Vec<(usize, PairDistance)>> = vec![Vec::new(); n];
    for (a, row) in halves.iter().enumerate() {
        for &(b, d) in row {
            adj[b].push((a, d));
        }
    }
    for (a, row) in halves.into_iter().enumerate() {
        adj[a].extend(row);
    }
    adj
}

/// All user pairs and item pairs with overlap `>= beta`.
pub fn build_distance_model(
    r: &SparseRatings,
    variance: VarianceEstimate,
    beta: usize,
) -> Result<DistanceModel> {
    if beta == 0 {
        return Err(Error::InvalidParameter("beta must be at least 1".into()));
    }
    let rows: Vec<&[(usize, f64)]> = (0..r.n_users()).map(|u| r.row(u)).collect();
    let cols: Vec<&[(usize, f64)]> = (0..r.n_items()).map(|i| r.col(i)).collect();
    Ok(DistanceModel {
        user_adj: build_adjacency(&rows, beta),
        item_adj: build_adjacency(&cols, beta),
        user_len: rows.iter().map(|l| l.len()).collect(),
        item_len: cols.iter().map(|l| l.len()).collect(),
        variance,
        beta,
    })
}

fn lookup(adj: &[(usize, PairDistance)], b: usize) -> Option<PairDistance> {
    adj.binary_search_by_key(&b, |&(k, _)| k)
        .ok()
        .map(|k| adj[k].1)
}

impl DistanceModel {
    /// Stored user pairs `(u, v, d)` with `u < v`.
    pub fn user_pairs(&self) -> impl Iterator<Item = (usize, usize, PairDistance)> + '_ {
        pairs(&self.user_adj)
    }

    /// Stored item pairs `(i, j, d)` with `i < j`.
    pub fn item_pairs(&self) -> impl Iterator<Item = (usize, usize, PairDistance)> + '_ {
        pairs(&self.item_adj)
    }

    /// Stored partners of user `u`, ascending.
    pub fn user_neighbors(&self, u: usize) -> &[(usize, PairDistance)] {
        &self.user_adj[u]
    }

    pub fn item_neighbors(&self, i: usize) -> &[(usize, PairDistance)] {
        &self.item_adj[i]
    }

    /// Sample standard deviation of corrected kernel arguments over stored
    /// pairs of one kind. `None` with fewer than two pairs.
    pub fn corrected_arg_sd(&self, kind: PairKind) -> Option<f64> {
        let s2 = self.variance.sigma2_hat;
        let args: Vec<f64> = match kind {
            PairKind::UserPair => self
                .user_pairs()
                .map(|(_, _, d)| corrected_kernel_arg(d.sq_dist, s2))
                .collect(),
            PairKind::ItemPair => self
                .item_pairs()
                .map(|(_, _, d)| corrected_kernel_arg(d.sq_dist, s2))
                .collect(),
        };
        sample_sd(&args)
    }
}

pub(crate) fn sample_sd(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    Some((ss / (xs.len() - 1) as f64).sqrt())
}

fn pairs(adj: &[Vec<(usize, PairDistance)>]) -> impl Iterator<Item = (usize, usize, PairDistance)> + '_ {
    adj.iter().enumerate().flat_map(|(a, row)| {
        row.iter()
            .filter(move |&&(b, _)| b > a)
            .map(move |&(b, d)| (a, b, d))
    })
}

impl PairDistances for DistanceModel {
    fn beta(&self) -> usize {
        self.beta
    }

    fn sigma2_hat(&self) -> f64 {
        self.variance.sigma2_hat
    }

    fn user_distance(&self, u: usize, v: usize) -> Option<PairDistance> {
        if u == v {
            let len = self.user_len[u];
            return (len >= self.beta && len > 0).then_some(PairDistance {
                sq_dist: 0.0,
                overlap: len,
            });
        }
        lookup(&self.user_adj[u], v)
    }

    fn item_distance(&self, i: usize, j: usize) -> Option<PairDistance> {
        if i == j {
            let len = self.item_len[i];
            return (len >= self.beta && len > 0).then_some(PairDistance {
                sq_dist: 0.0,
                overlap: len,
            });
        }
        lookup(&self.item_adj[i], j)
    }
}

/// Distances computed on demand from the ratings.
#[derive(Debug, Clone, Copy)]
pub struct LazyDistances<'a> {
    pub ratings: &'a SparseRatings,
    pub variance: VarianceEstimate,
    pub beta: usize,
}

impl PairDistances for LazyDistances<'_> {
    fn beta(&self) -> usize {
        self.beta
    }

    fn sigma2_hat(&self) -> f64 {
        self.variance.sigma2_hat
    }

    fn user_distance(&self, u: usize, v: usize) -> Option<PairDistance> {
        if u == v {
            return self_distance(self.ratings.row(u), self.beta);
        }
        line_sq_distance(self.ratings.row(u), self.ratings.row(v)).filter(|d| d.overlap >= self.beta)
    }

    fn item_distance(&self, i: usize, j: usize) -> Option<PairDistance> {
        if i == j {
            return self_distance(self.ratings.col(i), self.beta);
        }
        line_sq_distance(self.ratings.col(i), self.ratings.col(j)).filter(|d| d.overlap >= self.beta)
    }
}

//! Blind regression.
//!
//! Each triple `a(u,j), a(v,i), a(v,j)` gives the local estimate
//! `a(u,j) + a(v,i) − a(v,j)`, exact for additive structure. Estimates are
//! averaged with weights `exp(−λ · min(s²_uv, s²_ij))`, where `s²` is the
//! sample variance of paired differences over the overlap.

use serde::{Deserialize, Serialize};

use crate::cv::k_folds;
use crate::error::{Error, Result};
use crate::ratings::{co_observed, SparseRatings};

/// The default weight-parameter grid.
pub const DEFAULT_LAMBDA_GRID: [f64; 6] = [0.001, 0.01, 0.1, 1.0, 2.0, 3.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlindMember {
    pub v: usize,
    pub j: usize,
    /// `a(u,j) + a(v,i) − a(v,j)`.
    pub estimate: f64,
    pub s2_uv: f64,
    pub s2_ij: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlindRegSet {
    pub target: (usize, usize),
    /// Sorted by `(v, j)`.
    pub members: Vec<BlindMember>,
    pub beta: usize,
}

/// Sample variance (denominator `n − 1`) of differences over co-observed
/// entries, with the overlap size. Zero variance below two pairs.
pub fn diff_variance(a: &[(usize, f64)], b: &[(usize, f64)]) -> (f64, usize) {
    let diffs: Vec<f64> = co_observed(a, b).map(|(_, x, y)| x - y).collect();
    let n = diffs.len();
    if n < 2 {
        return (0.0, n);
    }
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let ss: f64 = diffs.iter().map(|d| (d - mean).powi(2)).sum();
    (ss / (n - 1) as f64, n)
}

pub fn blind_regression_set(r: &SparseRatings, u: usize, i: usize, beta: usize) -> Result<BlindRegSet> {
    r.check_cell(u, i)?;
    let row_u = r.row(u);
    let col_i = r.col(i);
    // Item side: s²_ij for every j rated by u, if |U_ij| qualifies.
    let item_side: Vec<(usize, f64, Option<f64>)> = row_u
        .iter()
        .filter(|&&(j, _)| j != i)
        .map(|&(j, a_uj)| {
            let (s2, n) = diff_variance(col_i, r.col(j));
            (j, a_uj, (n >= beta).then_some(s2))
        })
        .collect();
    let mut members = Vec::new();
    for &(v, a_vi) in col_i {
        if v == u {
            continue;
        }
        let row_v = r.row(v);
        let (s2_uv, n_uv) = diff_variance(row_u, row_v);
        if n_uv < beta {
            continue;
        }
        for (j, a_uj, a_vj) in co_observed(row_u, row_v) {
            if j == i {
                continue;
            }
            let k = item_side
                .binary_search_by_key(&j, |e| e.0)
                .expect("j rated by u");
            debug_assert_eq!(item_side[k].1, a_uj);
            if let Some(s2_ij) = item_side[k].2 {
                members.push(BlindMember {
                    v,
                    j,
                    estimate: a_uj + a_vi - a_vj,
                    s2_uv,
                    s2_ij,
                });
            }
        }
    }
    Ok(BlindRegSet {
        target: (u, i),
        members,
        beta,
    })
}

/// Weighted average over the set; `None` when the set is empty.
///
/// Exponents are shifted by their minimum before exponentiating, which
/// leaves the normalized weights unchanged but keeps them from underflowing.
pub fn predict_from_set(set: &BlindRegSet, lambda: f64) -> Option<f64> {
    if set.members.is_empty() {
        return None;
    }
    let expo: Vec<f64> = set
        .members
        .iter()
        .map(|m| lambda * m.s2_uv.min(m.s2_ij))
        .collect();
    let shift = expo.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut mass = 0.0;
    let mut weighted = 0.0;
    for (m, e) in set.members.iter().zip(&expo) {
        let w = (-(e - shift)).exp();
        mass += w;
        weighted += w * m.estimate;
    }
    Some(weighted / mass)
}

pub fn blind_regression_predict(
    r: &SparseRatings,
    u: usize,
    i: usize,
    lambda: f64,
    beta: usize,
) -> Result<Option<f64>> {
    check_lambda(lambda)?;
    Ok(predict_from_set(&blind_regression_set(r, u, i, beta)?, lambda))
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda >= 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlindLambdaSelection {
    pub best: f64,
    /// `(lambda, mean held-out RMSE)` in grid order.
    pub table: Vec<(f64, f64)>,
}

/// K-fold choice of `λ`; ties go to the smaller value.
pub fn select_blind_lambda(
    r: &SparseRatings,
    grid: &[f64],
    beta: usize,
    folds: usize,
    seed: u64,
) -> Result<BlindLambdaSelection> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    for &l in grid {
        check_lambda(l)?;
    }
    let splits = k_folds(r, folds, seed)?;
    let mut sum = vec![0.0; grid.len()];
    let mut used = vec![0usize; grid.len()];
    for fold in &splits {
        let sets = crate::par_map(&fold.held, |t| blind_regression_set(&fold.train, t.user, t.item, beta));
        let mut sse = vec![0.0; grid.len()];
        let mut n = vec![0usize; grid.len()];
        for (t, set) in fold.held.iter().zip(sets) {
            let set = set?;
            for (k, &l) in grid.iter().enumerate() {
                if let Some(p) = predict_from_set(&set, l) {
                    sse[k] += (p - t.value).powi(2);
                    n[k] += 1;
                }
            }
        }
        for k in 0..grid.len() {
            if n[k] > 0 {
                sum[k] += (sse[k] / n[k] as f64).sqrt();
                used[k] += 1;
            }
        }
    }
    let table: Vec<(f64, f64)> = grid
        .iter()
        .enumerate()
        .map(|(k, &l)| (l, if used[k] > 0 { sum[k] / used[k] as f64 } else { f64::INFINITY }))
        .collect();
    let best = table
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)))
        .expect("nonempty grid")
        .0;
    Ok(BlindLambdaSelection { best, table })
}

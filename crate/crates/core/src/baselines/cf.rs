//! Neighborhood collaborative filtering.
//!
//! User-based: average the ratings of item `i` given by users positively
//! correlated with `u`. Item-based is the same on the transposed matrix.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::ratings::{co_observed, SparseRatings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum CfAxis {
    #[default]
    User,
    Item,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum CfWeighting {
    /// Weight by the Pearson correlation itself.
    #[default]
    Correlation,
    /// Weight by `1 / (1 + rms difference)` over the co-ratings; the
    /// correlation filter still applies.
    Euclidean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CfOptions {
    pub min_corr: f64,
    pub weighting: CfWeighting,
}

impl Default for CfOptions {
    fn default() -> Self {
        Self {
            min_corr: 0.0,
            weighting: CfWeighting::Correlation,
        }
    }
}

/// Similarity of two lines over their co-observed entries, skipping index
/// `skip`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Similarity {
    pub corr: f64,
    pub rms_diff: f64,
    pub n_common: usize,
}

/// Pearson correlation over the co-observed entries of two lines other than
/// `skip`. `None` with fewer than two such entries or zero variance on
/// either side.
pub fn line_similarity(a: &[(usize, f64)], b: &[(usize, f64)], skip: usize) -> Option<Similarity> {
    let pairs: Vec<(f64, f64)> = co_observed(a, b)
        .filter(|&(t, _, _)| t != skip)
        .map(|(_, x, y)| (x, y))
        .collect();
    let n = pairs.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / nf;
    let (mut sxy, mut sxx, mut syy, mut sdd) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in &pairs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sdd += (x - y) * (x - y);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some(Similarity {
        corr: sxy / (sxx * syy).sqrt(),
        rms_diff: (sdd / nf).sqrt(),
        n_common: n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CfNeighbor {
    /// Neighbor user (or item, on the item axis).
    pub id: usize,
    pub rating: f64,
    pub weight: f64,
}

/// Neighbors used for target `(u, i)`, sorted by id.
pub fn cf_neighborhood(
    r: &SparseRatings,
    axis: CfAxis,
    u: usize,
    i: usize,
    opts: CfOptions,
) -> Result<Vec<CfNeighbor>> {
    r.check_cell(u, i)?;
    Ok(match axis {
        CfAxis::User => neighbors(r.row(u), r.col(i).iter().map(|&(v, a)| (r.row(v), v, a)), u, i, opts),
        CfAxis::Item => neighbors(r.col(i), r.row(u).iter().map(|&(j, a)| (r.col(j), j, a)), i, u, opts),
    })
}

/// `None` is an NA prediction.
pub fn cf_predict(r: &SparseRatings, axis: CfAxis, u: usize, i: usize, opts: CfOptions) -> Result<Option<f64>> {
    let nbrs = cf_neighborhood(r, axis, u, i, opts)?;
    let mass: f64 = nbrs.iter().map(|n| n.weight).sum();
    let weighted: f64 = nbrs.iter().map(|n| n.weight * n.rating).sum();
    Ok((mass > 0.0).then(|| weighted / mass))
}

fn neighbors<'a>(
    own: &[(usize, f64)],
    candidates: impl Iterator<Item = (&'a [(usize, f64)], usize, f64)>,
    own_id: usize,
    skip: usize,
    opts: CfOptions,
) -> Vec<CfNeighbor> {
    candidates
        .filter(|&(_, id, _)| id != own_id)
        .filter_map(|(line, id, rating)| {
            let s = line_similarity(own, line, skip)?;
            if !(s.corr > opts.min_corr && s.corr > 0.0) {
                return None;
            }
            let weight = match opts.weighting {
                CfWeighting::Correlation => s.corr,
                CfWeighting::Euclidean => 1.0 / (1.0 + s.rms_diff),
            };
            Some(CfNeighbor { id, rating, weight })
        })
        .collect()
}

//! Dense brute-force references for integration tests. Nothing here calls
//! into the library's neighbor, distance or estimator code.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rne_core::ratings::SparseRatings;

/// Row-major dense copy of a rating matrix.
pub struct Dense {
    pub n: usize,
    pub m: usize,
    pub a: Vec<Vec<Option<f64>>>,
}

impl Dense {
    pub fn from_sparse(r: &SparseRatings) -> Self {
        let (n, m) = (r.n_users(), r.n_items());
        let a = (0..n)
            .map(|u| (0..m).map(|i| r.get(u, i)).collect())
            .collect();
        Self { n, m, a }
    }

    pub fn user_overlap(&self, u: usize, v: usize) -> Vec<usize> {
        (0..self.m)
            .filter(|&j| self.a[u][j].is_some() && self.a[v][j].is_some())
            .collect()
    }

    pub fn item_overlap(&self, i: usize, j: usize) -> Vec<usize> {
        (0..self.n)
            .filter(|&v| self.a[v][i].is_some() && self.a[v][j].is_some())
            .collect()
    }

    pub fn user_sq_dist(&self, u: usize, v: usize) -> Option<f64> {
        let common = self.user_overlap(u, v);
        if common.is_empty() {
            return None;
        }
        let s: f64 = common
            .iter()
            .map(|&j| (self.a[u][j].unwrap() - self.a[v][j].unwrap()).powi(2))
            .sum();
        Some(s / common.len() as f64)
    }

    pub fn item_sq_dist(&self, i: usize, j: usize) -> Option<f64> {
        let common = self.item_overlap(i, j);
        if common.is_empty() {
            return None;
        }
        let s: f64 = common
            .iter()
            .map(|&v| (self.a[v][i].unwrap() - self.a[v][j].unwrap()).powi(2))
            .sum();
        Some(s / common.len() as f64)
    }

    /// Observed cells other than the target in a row or column overlapping
    /// the target's by at least `beta`, with the qualifying distances.
    pub fn radial(&self, u: usize, i: usize, beta: usize) -> Vec<RadialRef> {
        let mut out = Vec::new();
        for v in 0..self.n {
            for j in 0..self.m {
                let Some(rating) = self.a[v][j] else { continue };
                if (v, j) == (u, i) {
                    continue;
                }
                let row_ok = self.user_overlap(u, v).len() >= beta;
                let col_ok = self.item_overlap(i, j).len() >= beta;
                if row_ok || col_ok {
                    out.push(RadialRef {
                        cell: (v, j),
                        rating,
                        user_sq_dist: row_ok.then(|| self.user_sq_dist(u, v).unwrap()),
                        item_sq_dist: col_ok.then(|| self.item_sq_dist(i, j).unwrap()),
                    });
                }
            }
        }
        out
    }

    /// `(v, rating of (v, i), correlation)` for users positively correlated
    /// with `u` over at least two co-rated items other than `i`.
    pub fn user_cf(&self, u: usize, i: usize) -> Vec<(usize, f64, f64)> {
        let mut out = Vec::new();
        for v in 0..self.n {
            if v == u {
                continue;
            }
            let Some(rating) = self.a[v][i] else { continue };
            let pairs: Vec<(f64, f64)> = (0..self.m)
                .filter(|&j| j != i)
                .filter_map(|j| Some((self.a[u][j]?, self.a[v][j]?)))
                .collect();
            if let Some(c) = pearson(&pairs) {
                if c > 0.0 {
                    out.push((v, rating, c));
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Dense {
        Dense {
            n: self.m,
            m: self.n,
            a: (0..self.m)
                .map(|i| (0..self.n).map(|u| self.a[u][i]).collect())
                .collect(),
        }
    }

    /// `(v, j, estimate, s²_uv, s²_ij)` for every usable triple.
    pub fn blind_set(&self, u: usize, i: usize, beta: usize) -> Vec<(usize, usize, f64, f64, f64)> {
        let mut out = Vec::new();
        for v in 0..self.n {
            for j in 0..self.m {
                if v == u || j == i {
                    continue;
                }
                let (Some(a_uj), Some(a_vi), Some(a_vj)) = (self.a[u][j], self.a[v][i], self.a[v][j]) else {
                    continue;
                };
                let iu = self.user_overlap(u, v);
                let ui = self.item_overlap(i, j);
                if iu.len() < beta || ui.len() < beta {
                    continue;
                }
                let du: Vec<f64> = iu.iter().map(|&t| self.a[u][t].unwrap() - self.a[v][t].unwrap()).collect();
                let di: Vec<f64> = ui.iter().map(|&t| self.a[t][i].unwrap() - self.a[t][j].unwrap()).collect();
                out.push((v, j, a_uj + a_vi - a_vj, unbiased_var(&du), unbiased_var(&di)));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialRef {
    pub cell: (usize, usize),
    pub rating: f64,
    pub user_sq_dist: Option<f64>,
    pub item_sq_dist: Option<f64>,
}

pub fn pearson(pairs: &[(f64, f64)]) -> Option<f64> {
    if pairs.len() < 2 {
        return None;
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let vx: f64 = pairs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let vy: f64 = pairs.iter().map(|p| (p.1 - my).powi(2)).sum();
    (vx > 0.0 && vy > 0.0).then(|| cov / (vx.sqrt() * vy.sqrt()))
}

pub fn unbiased_var(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Gaussian product weight computed from squared distances.
pub fn gaussian_weight(user_sq: Option<f64>, item_sq: Option<f64>, s2: f64, h1: f64, h2: f64) -> f64 {
    let side = |sq: Option<f64>, h: f64| {
        sq.map_or(1.0, |d| {
            let x = (d - 2.0 * s2).max(0.0).sqrt() / h;
            (-x * x / 2.0).exp()
        })
    };
    side(user_sq, h1) * side(item_sq, h2)
}

/// Each cell observed with probability `p`, values uniform in `[-3, 3)`.
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

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300) || a == b
}

pub fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

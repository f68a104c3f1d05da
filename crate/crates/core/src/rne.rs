//! The radial neighborhood estimator.
//!
//! A Nadaraya-Watson average over the radial neighbor set with a product of
//! two Gaussian kernels, one on the corrected user distance and one on the
//! corrected item distance:
//!
//! ```text
//! z̃(u,i) = Σ w(v,j) a(v,j) / Σ w(v,j)
//! w(v,j) = k(sqrt(d̂²(u,v) − 2σ̂²) / h1) · k(sqrt(d̂²(i,j) − 2σ̂²) / h2)
//! ```
//!
//! A member reached only through its row (or only through its column) has one
//! distance; the missing side contributes a factor of one unless
//! [`OneSided::Drop`] is configured.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cv::k_folds;
use crate::distance::{
    build_distance_model, corrected_kernel_arg, fit_noise_variance, DistanceModel, FirstStep,
    PairDistances,
};
use crate::error::{Error, Result};
use crate::neighbors::{qualify, radial_neighbors, RadialNeighborSet};
use crate::par_map;
use crate::ratings::{Cell, PairKind, SparseRatings};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bandwidths {
    /// User-distance bandwidth.
    pub h1: f64,
    /// Item-distance bandwidth.
    pub h2: f64,
}

impl Bandwidths {
    pub fn new(h1: f64, h2: f64) -> Result<Self> {
        if h1 > 0.0 && h2 > 0.0 && h1.is_finite() && h2.is_finite() {
            Ok(Self { h1, h2 })
        } else {
            Err(Error::InvalidParameter(format!(
                "bandwidths must be positive and finite, got ({h1}, {h2})"
            )))
        }
    }

    fn lex_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.h1
            .total_cmp(&other.h1)
            .then(self.h2.total_cmp(&other.h2))
    }
}

/// What to do with members that have only one of the two distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum OneSided {
    #[default]
    Include,
    Drop,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RnePrediction {
    /// `None` is an NA prediction.
    pub value: Option<f64>,
    pub n_neighbors_used: usize,
    pub weight_mass: f64,
}

impl RnePrediction {
    fn from_sums(mass: f64, weighted: f64, count: usize) -> Self {
        let value = (count > 0 && mass > 0.0).then(|| weighted / mass);
        Self {
            value,
            n_neighbors_used: count,
            weight_mass: mass,
        }
    }
}

#[inline]
fn gauss(t: f64) -> f64 {
    (-0.5 * t * t).exp()
}

/// Product Gaussian weight; an absent argument contributes a factor of one.
pub fn kernel_weight(user_arg: Option<f64>, item_arg: Option<f64>, h: Bandwidths) -> Result<f64> {
    if user_arg.is_none() && item_arg.is_none() {
        return Err(Error::BothArgsNull);
    }
    let k1 = user_arg.map_or(1.0, |x| gauss(x / h.h1));
    let k2 = item_arg.map_or(1.0, |x| gauss(x / h.h2));
    Ok(k1 * k2)
}

/// Raw kernel weight of every member, `None` for members excluded by
/// `one_sided`.
pub fn neighbor_weights(
    sigma2_hat: f64,
    nbrs: &RadialNeighborSet,
    h: Bandwidths,
    one_sided: OneSided,
) -> Vec<Option<f64>> {
    nbrs.members
        .iter()
        .map(|m| {
            let user_arg = m.user_sq_dist.map(|d| corrected_kernel_arg(d, sigma2_hat));
            let item_arg = m.item_sq_dist.map(|d| corrected_kernel_arg(d, sigma2_hat));
            if one_sided == OneSided::Drop && (user_arg.is_none() || item_arg.is_none()) {
                return None;
            }
            kernel_weight(user_arg, item_arg, h).ok()
        })
        .collect()
}

/// Weighted average over an explicit neighbor set.
pub fn predict_entry<D: PairDistances + ?Sized>(
    dm: &D,
    nbrs: &RadialNeighborSet,
    h: Bandwidths,
    one_sided: OneSided,
) -> RnePrediction {
    let weights = neighbor_weights(dm.sigma2_hat(), nbrs, h, one_sided);
    let mut mass = 0.0;
    let mut weighted = 0.0;
    let mut count = 0;
    for (m, w) in nbrs.members.iter().zip(weights) {
        if let Some(w) = w {
            mass += w;
            weighted += w * m.rating;
            count += 1;
        }
    }
    RnePrediction::from_sums(mass, weighted, count)
}

/// How the bandwidth grid is built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GridSpec {
    /// Multipliers of the sample SD of corrected kernel arguments, crossed
    /// over `h1` and `h2`.
    Scaled(Vec<f64>),
    Explicit(Vec<Bandwidths>),
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Scaled(vec![0.25, 0.5, 1.0, 2.0, 4.0])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RneConfig {
    pub beta: usize,
    pub folds: usize,
    pub one_sided: OneSided,
    pub first_step: FirstStep,
    pub grid: GridSpec,
}

impl Default for RneConfig {
    fn default() -> Self {
        Self {
            beta: 1,
            folds: 5,
            one_sided: OneSided::Include,
            first_step: FirstStep::AdditiveMeans,
            grid: GridSpec::default(),
        }
    }
}

/// Distances and noise variance fitted on one rating matrix, ready to predict.
#[derive(Debug, Clone)]
pub struct RneModel<'a> {
    ratings: &'a SparseRatings,
    distances: DistanceModel,
    one_sided: OneSided,
}

impl<'a> RneModel<'a> {
    /// First step, noise variance, then all pairwise distances.
    pub fn fit(ratings: &'a SparseRatings, cfg: &RneConfig) -> Result<Self> {
        let variance = fit_noise_variance(ratings, cfg.first_step)?;
        let distances = build_distance_model(ratings, variance, cfg.beta)?;
        Ok(Self {
            ratings,
            distances,
            one_sided: cfg.one_sided,
        })
    }

    pub fn from_parts(ratings: &'a SparseRatings, distances: DistanceModel, one_sided: OneSided) -> Self {
        Self {
            ratings,
            distances,
            one_sided,
        }
    }

    pub fn ratings(&self) -> &SparseRatings {
        self.ratings
    }

    pub fn distances(&self) -> &DistanceModel {
        &self.distances
    }

    pub fn neighbors(&self, u: usize, i: usize) -> Result<RadialNeighborSet> {
        radial_neighbors(self.ratings, &self.distances, u, i)
    }

    /// The bandwidth grid this model's data implies under `spec`.
    pub fn grid(&self, spec: &GridSpec) -> Result<Vec<Bandwidths>> {
        let grid = match spec {
            GridSpec::Explicit(g) => g.clone(),
            GridSpec::Scaled(mults) => {
                let base = |kind| {
                    self.distances
                        .corrected_arg_sd(kind)
                        .filter(|&s| s > 0.0 && s.is_finite())
                        .unwrap_or(1.0)
                };
                let (b1, b2) = (base(PairKind::UserPair), base(PairKind::ItemPair));
                let mut g = Vec::with_capacity(mults.len() * mults.len());
                for &a in mults {
                    for &b in mults {
                        g.push(Bandwidths::new(a * b1, b * b2)?);
                    }
                }
                g
            }
        };
        if grid.is_empty() {
            return Err(Error::EmptyGrid);
        }
        Ok(grid)
    }

    pub fn predict(&self, u: usize, i: usize, h: Bandwidths) -> Result<RnePrediction> {
        Ok(self.predict_grid(u, i, &[h.h1], &[h.h2])?[0])
    }

    /// Predictions for every `(h1s[a], h2s[b])`, laid out as `a * h2s.len() + b`.
    ///
    /// One pass over the observed cells per target: the weight of a member
    /// factors into a row part and a column part, so per-row sums for each
    /// `h2` are combined with row factors for each `h1`.
    pub fn predict_grid(&self, u: usize, i: usize, h1s: &[f64], h2s: &[f64]) -> Result<Vec<RnePrediction>> {
        let r = self.ratings;
        r.check_cell(u, i)?;
        let s2 = self.distances.sigma2_hat();
        let q = qualify(r, &self.distances, u, i);
        let user_arg: Vec<Option<f64>> = q
            .rows
            .iter()
            .map(|d| d.map(|d| corrected_kernel_arg(d.sq_dist, s2)))
            .collect();
        let item_arg: Vec<Option<f64>> = q
            .cols
            .iter()
            .map(|d| d.map(|d| corrected_kernel_arg(d.sq_dist, s2)))
            .collect();

        let n = r.n_users();
        let m = r.n_items();
        let nb = h2s.len();
        let col_factor: Vec<f64> = h2s
            .iter()
            .flat_map(|&h2| item_arg.iter().map(move |x| x.map_or(1.0, |x| gauss(x / h2))))
            .collect();

        // Per row and h2: (mass, weighted sum) over all cells, and over cells
        // whose column qualifies.
        let mut all = vec![(0.0, 0.0); n * nb];
        let mut qual = vec![(0.0, 0.0); n * nb];
        let mut all_count = vec![0usize; n];
        let mut qual_count = vec![0usize; n];
        for v in 0..n {
            let row_needed = user_arg[v].is_some() || self.one_sided == OneSided::Include;
            if !row_needed && r.row(v).iter().all(|&(j, _)| item_arg[j].is_none()) {
                continue;
            }
            for &(j, a) in r.row(v) {
                if v == u && j == i {
                    continue;
                }
                let col_ok = item_arg[j].is_some();
                all_count[v] += 1;
                if col_ok {
                    qual_count[v] += 1;
                }
                for b in 0..nb {
                    let w = col_factor[b * m + j];
                    let cell = &mut all[v * nb + b];
                    cell.0 += w;
                    cell.1 += w * a;
                    if col_ok {
                        let cell = &mut qual[v * nb + b];
                        cell.0 += w;
                        cell.1 += w * a;
                    }
                }
            }
        }

        let mut out = Vec::with_capacity(h1s.len() * nb);
        for &h1 in h1s {
            let row_factor: Vec<Option<f64>> = user_arg.iter().map(|x| x.map(|x| gauss(x / h1))).collect();
            for b in 0..nb {
                let mut mass = 0.0;
                let mut weighted = 0.0;
                let mut count = 0;
                for v in 0..n {
                    let k = v * nb + b;
                    match (row_factor[v], self.one_sided) {
                        (Some(f), OneSided::Include) => {
                            mass += f * all[k].0;
                            weighted += f * all[k].1;
                            count += all_count[v];
                        }
                        (Some(f), OneSided::Drop) => {
                            mass += f * qual[k].0;
                            weighted += f * qual[k].1;
                            count += qual_count[v];
                        }
                        (None, OneSided::Include) => {
                            mass += qual[k].0;
                            weighted += qual[k].1;
                            count += qual_count[v];
                        }
                        (None, OneSided::Drop) => {}
                    }
                }
                out.push(RnePrediction::from_sums(mass, weighted, count));
            }
        }
        Ok(out)
    }
}

/// Fit once on `r` and predict every target at bandwidths `h`.
pub fn complete_matrix(
    r: &SparseRatings,
    targets: &[Cell],
    h: Bandwidths,
    cfg: &RneConfig,
) -> Result<BTreeMap<Cell, RnePrediction>> {
    for &(u, i) in targets {
        r.check_cell(u, i)?;
    }
    let model = RneModel::fit(r, cfg)?;
    let preds = par_map(targets, |&(u, i)| model.predict(u, i, h));
    targets
        .iter()
        .zip(preds)
        .map(|(&c, p)| p.map(|p| (c, p)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvEntry {
    pub bandwidths: Bandwidths,
    /// Mean over folds of the held-out RMSE on non-NA predictions; infinite
    /// when no fold produced a prediction.
    pub mean_rmse: f64,
    pub na_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthSelection {
    pub best: Bandwidths,
    /// One entry per grid point, in grid order.
    pub table: Vec<CvEntry>,
}

fn unique_sorted(xs: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = xs.collect();
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| a.to_bits() == b.to_bits());
    v
}

/// K-fold cross-validated choice of `(h1, h2)` over `grid`.
pub fn select_bandwidths(
    r: &SparseRatings,
    grid: &[Bandwidths],
    folds: usize,
    seed: u64,
    cfg: &RneConfig,
) -> Result<BandwidthSelection> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let splits = k_folds(r, folds, seed)?;
    let h1s = unique_sorted(grid.iter().map(|h| h.h1));
    let h2s = unique_sorted(grid.iter().map(|h| h.h2));
    let nb = h2s.len();
    let combos = h1s.len() * nb;

    // Per combo: sum of fold RMSEs, number of folds with a defined RMSE, NA count.
    let mut rmse_sum = vec![0.0; combos];
    let mut rmse_folds = vec![0usize; combos];
    let mut na = vec![0usize; combos];
    let mut held_total = 0usize;

    for fold in &splits {
        held_total += fold.held.len();
        if fold.train.is_empty() {
            na.iter_mut().for_each(|c| *c += fold.held.len());
            continue;
        }
        let model = RneModel::fit(&fold.train, cfg)?;
        let preds = par_map(&fold.held, |t| model.predict_grid(t.user, t.item, &h1s, &h2s));
        let mut sse = vec![0.0; combos];
        let mut scored = vec![0usize; combos];
        for (t, p) in fold.held.iter().zip(preds) {
            for (c, pred) in p?.iter().enumerate() {
                match pred.value {
                    Some(z) => {
                        sse[c] += (z - t.value).powi(2);
                        scored[c] += 1;
                    }
                    None => na[c] += 1,
                }
            }
        }
        for c in 0..combos {
            if scored[c] > 0 {
                rmse_sum[c] += (sse[c] / scored[c] as f64).sqrt();
                rmse_folds[c] += 1;
            }
        }
    }

    let position = |x: f64, xs: &[f64]| {
        xs.iter()
            .position(|y| y.to_bits() == x.to_bits())
            .expect("grid value indexed")
    };
    let table: Vec<CvEntry> = grid
        .iter()
        .map(|h| {
            let c = position(h.h1, &h1s) * nb + position(h.h2, &h2s);
            CvEntry {
                bandwidths: *h,
                mean_rmse: if rmse_folds[c] > 0 {
                    rmse_sum[c] / rmse_folds[c] as f64
                } else {
                    f64::INFINITY
                },
                na_rate: na[c] as f64 / held_total.max(1) as f64,
            }
        })
        .collect();
    let best = table
        .iter()
        .min_by(|a, b| {
            a.mean_rmse
                .total_cmp(&b.mean_rmse)
                .then(a.bandwidths.lex_cmp(&b.bandwidths))
        })
        .expect("nonempty grid")
        .bandwidths;
    Ok(BandwidthSelection { best, table })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::VarianceEstimate;
    use crate::testutil::{random_ratings, toy_with};
    use proptest::prelude::*;

    fn model_for(r: &SparseRatings, beta: usize) -> RneModel<'_> {
        RneModel::fit(
            r,
            &RneConfig {
                beta,
                ..RneConfig::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn kernel_weight_examples() {
        let h = Bandwidths::new(0.7, 2.0).unwrap();
        assert_eq!(kernel_weight(Some(0.0), Some(0.0), h).unwrap(), 1.0);
        let w = kernel_weight(Some(0.7), None, h).unwrap();
        assert!((w - (-0.5f64).exp()).abs() < 1e-15);
        assert!((w - 0.6065).abs() < 1e-4);
        assert!(matches!(kernel_weight(None, None, h), Err(Error::BothArgsNull)));
        assert!(Bandwidths::new(0.0, 1.0).is_err());
        assert!(Bandwidths::new(1.0, f64::INFINITY).is_err());
    }

    proptest! {
        #[test]
        fn kernel_weight_decreasing(x in 0.0..10.0f64, dx in 0.01..5.0f64, y in 0.0..10.0f64) {
            let h = Bandwidths::new(1.3, 0.8).unwrap();
            prop_assert!(kernel_weight(Some(x + dx), Some(y), h).unwrap() < kernel_weight(Some(x), Some(y), h).unwrap()
                || kernel_weight(Some(x), Some(y), h).unwrap() == 0.0);
            prop_assert!(kernel_weight(Some(y), Some(x + dx), h).unwrap() <= kernel_weight(Some(y), Some(x), h).unwrap());
        }
    }

    #[test]
    fn single_member_prediction() {
        let r = SparseRatings::from_triples([(0, 0, 1.0), (0, 1, 3.5)], 1, 2).unwrap();
        let m = model_for(&r, 1);
        let set = m.neighbors(0, 0).unwrap();
        assert_eq!(set.len(), 1);
        let p = predict_entry(m.distances(), &set, Bandwidths::new(1.0, 1.0).unwrap(), OneSided::Include);
        assert!((p.value.unwrap() - 3.5).abs() < 1e-12);
        assert_eq!(p.n_neighbors_used, 1);
    }

    #[test]
    fn equal_distances_give_plain_mean() {
        // Every member sits in the target's own row or column, so every
        // weight is exp(0) * (column or row factor of a zero distance).
        let r = SparseRatings::from_triples([(0, 1, 2.0), (0, 2, 6.0), (1, 0, 4.0)], 2, 3).unwrap();
        let dm = build_distance_model(&r, VarianceEstimate::known(0.0), 1).unwrap();
        let set = radial_neighbors(&r, &dm, 0, 0).unwrap();
        assert_eq!(set.len(), 3);
        let p = predict_entry(&dm, &set, Bandwidths::new(1.0, 1.0).unwrap(), OneSided::Include);
        assert!((p.value.unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn toy_target_matches_hand_weighted_sum() {
        // 1-based values: a11=2, a13=4, a22=1, a31=4, a34=3, a43=5, a45=2, a52=3, a54=1
        let vals = [
            ((0, 0), 2.0),
            ((0, 2), 4.0),
            ((1, 1), 1.0),
            ((2, 0), 4.0),
            ((2, 3), 3.0),
            ((3, 2), 5.0),
            ((3, 4), 2.0),
            ((4, 1), 3.0),
            ((4, 3), 1.0),
        ];
        let r = toy_with(|u, i| vals.iter().find(|(c, _)| *c == (u, i)).unwrap().1);
        let s2 = 0.25;
        let dm = build_distance_model(&r, VarianceEstimate::known(s2), 1).unwrap();
        let h = Bandwidths::new(1.5, 0.9).unwrap();
        let set = radial_neighbors(&r, &dm, 0, 3).unwrap();
        let p = predict_entry(&dm, &set, h, OneSided::Include);

        // Hand-evaluated distances for target (1,4):
        // users: d(1,1)=0, d(1,3)=(2-4)^2=4, d(1,4)=(4-5)^2=1; users 2,5 do not overlap.
        // items: d(4,4)=0, d(4,2)=(3-1)^2=4 via user 5, d(4,1)=(4-3)^2=1 via user 3.
        let k = |d2: f64, h: f64| {
            let x = (d2 - 2.0 * s2).max(0.0).sqrt() / h;
            (-0.5 * x * x).exp()
        };
        let ku = |d2: Option<f64>| d2.map_or(1.0, |d| k(d, 1.5));
        let ki = |d2: Option<f64>| d2.map_or(1.0, |d| k(d, 0.9));
        let user_d = [Some(0.0), None, Some(4.0), Some(1.0), None];
        let item_d = [Some(1.0), Some(4.0), None, Some(0.0), None];
        let mut num = 0.0;
        let mut den = 0.0;
        for &((v, j), a) in &vals {
            let w = ku(user_d[v]) * ki(item_d[j]);
            num += w * a;
            den += w;
        }
        let expect = num / den;
        assert!((p.value.unwrap() - expect).abs() <= 1e-12 * expect.abs());
        let fast = RneModel::from_parts(&r, dm.clone(), OneSided::Include).predict(0, 3, h).unwrap();
        assert!((fast.value.unwrap() - expect).abs() <= 1e-12 * expect.abs());
        assert_eq!(fast.n_neighbors_used, 9);
    }

    #[test]
    fn fast_path_matches_explicit_set() {
        for one_sided in [OneSided::Include, OneSided::Drop] {
            let r = random_ratings(15, 13, 0.3, 11);
            let cfg = RneConfig {
                one_sided,
                ..RneConfig::default()
            };
            let m = RneModel::fit(&r, &cfg).unwrap();
            let h1s = [0.3, 1.0, 2.5];
            let h2s = [0.5, 4.0];
            for u in 0..15 {
                for i in 0..13 {
                    let set = m.neighbors(u, i).unwrap();
                    let grid = m.predict_grid(u, i, &h1s, &h2s).unwrap();
                    for (a, &h1) in h1s.iter().enumerate() {
                        for (b, &h2) in h2s.iter().enumerate() {
                            let h = Bandwidths::new(h1, h2).unwrap();
                            let slow = predict_entry(m.distances(), &set, h, one_sided);
                            let fast = grid[a * h2s.len() + b];
                            assert_eq!(slow.n_neighbors_used, fast.n_neighbors_used);
                            match (slow.value, fast.value) {
                                (Some(x), Some(y)) => assert!((x - y).abs() <= 1e-10 * x.abs().max(1.0)),
                                (None, None) => {}
                                other => panic!("NA mismatch {other:?}"),
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn drop_mode_excludes_one_sided_members() {
        let r = toy_with(|u, i| (u + 2 * i) as f64);
        let dm = build_distance_model(&r, VarianceEstimate::known(0.0), 1).unwrap();
        let set = radial_neighbors(&r, &dm, 0, 3).unwrap();
        let h = Bandwidths::new(1.0, 1.0).unwrap();
        let both = set
            .members
            .iter()
            .filter(|m| m.user_sq_dist.is_some() && m.item_sq_dist.is_some())
            .count();
        assert_eq!(predict_entry(&dm, &set, h, OneSided::Drop).n_neighbors_used, both);
        assert_eq!(predict_entry(&dm, &set, h, OneSided::Include).n_neighbors_used, 9);
    }

    #[test]
    fn empty_set_is_na() {
        let r = SparseRatings::from_triples([(0, 0, 1.0)], 2, 2).unwrap();
        let m = model_for(&r, 1);
        let p = m.predict(1, 1, Bandwidths::new(1.0, 1.0).unwrap()).unwrap();
        assert_eq!(p.value, None);
        assert_eq!(p.weight_mass, 0.0);
    }

    #[test]
    fn complete_matrix_is_order_independent() {
        let r = random_ratings(12, 12, 0.4, 5);
        let h = Bandwidths::new(1.0, 1.0).unwrap();
        let cfg = RneConfig::default();
        let targets: Vec<Cell> = (0..12).flat_map(|u| (0..12).map(move |i| (u, i))).collect();
        let a = complete_matrix(&r, &targets, h, &cfg).unwrap();
        let mut rev = targets.clone();
        rev.reverse();
        let b = complete_matrix(&r, &rev, h, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(complete_matrix(&r, &[(12, 0)], h, &cfg).is_err());
        assert!(matches!(
            complete_matrix(&SparseRatings::empty(2, 2), &[(0, 0)], h, &cfg),
            Err(Error::EmptyMatrix)
        ));
    }

    #[test]
    fn complete_matrix_on_observed_cells() {
        let r = random_ratings(10, 10, 0.5, 6);
        let targets: Vec<Cell> = r.triples().iter().map(|t| t.cell()).collect();
        let preds = complete_matrix(&r, &targets, Bandwidths::new(1.0, 1.0).unwrap(), &RneConfig::default()).unwrap();
        for (c, p) in &preds {
            if p.n_neighbors_used > 0 {
                assert!(p.value.unwrap().is_finite(), "{c:?}");
            }
        }
    }

    #[test]
    fn single_point_grid_and_duplicates() {
        let r = random_ratings(12, 12, 0.5, 9);
        let cfg = RneConfig::default();
        let h = Bandwidths::new(0.8, 1.2).unwrap();
        let sel = select_bandwidths(&r, &[h], 5, 1, &cfg).unwrap();
        assert_eq!(sel.best, h);
        let sel = select_bandwidths(&r, &[h, h], 5, 1, &cfg).unwrap();
        assert_eq!(sel.table[0], sel.table[1]);
        assert!(matches!(select_bandwidths(&r, &[], 5, 1, &cfg), Err(Error::EmptyGrid)));
        let tiny = random_ratings(2, 2, 1.0, 1);
        assert!(matches!(
            select_bandwidths(&tiny, &[h], 5, 1, &cfg),
            Err(Error::TooFewObservations { .. })
        ));
    }

    #[test]
    fn ties_break_toward_smaller_bandwidths() {
        // A fully observed constant matrix predicts exactly at any bandwidth.
        let r = SparseRatings::from_triples(
            (0..6).flat_map(|u| (0..6).map(move |i| (u, i, 3.0))),
            6,
            6,
        )
        .unwrap();
        let grid: Vec<Bandwidths> = [(2.0, 1.0), (1.0, 3.0), (1.0, 2.0)]
            .iter()
            .map(|&(a, b)| Bandwidths::new(a, b).unwrap())
            .collect();
        let sel = select_bandwidths(&r, &grid, 3, 4, &RneConfig::default()).unwrap();
        assert_eq!(sel.best, Bandwidths::new(1.0, 2.0).unwrap());
    }

    #[test]
    fn default_grid_has_25_points() {
        let r = random_ratings(10, 10, 0.5, 2);
        let m = model_for(&r, 1);
        let g = m.grid(&GridSpec::default()).unwrap();
        assert_eq!(g.len(), 25);
        assert!(g.iter().all(|h| h.h1 > 0.0 && h.h2 > 0.0));
        assert!(matches!(m.grid(&GridSpec::Explicit(vec![])), Err(Error::EmptyGrid)));
    }
}

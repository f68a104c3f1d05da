//! Browser bindings: simulate a sparse low-rank matrix, then inspect radial
//! neighbor weights, complete the matrix at chosen bandwidths, and map the
//! cross-validation surface over the bandwidth grid.
//!
//! [`Explorer`] holds the logic and is usable natively; [`Demo`] wraps it for
//! JavaScript.

use rne_core::distance::{build_distance_model, fit_noise_variance, DistanceModel, FirstStep};
use rne_core::ratings::{PairKind, SparseRatings};
use rne_core::rne::{
    neighbor_weights, select_bandwidths, Bandwidths, GridSpec, OneSided, RneConfig, RneModel,
};
use rne_core::simulation::{generate_problem, mcar_mask, LatentProblem};
use rne_core::Result;
use wasm_bindgen::prelude::*;

const GRID_MULTIPLIERS: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

pub struct Explorer {
    problem: LatentProblem,
    train: SparseRatings,
    distances: DistanceModel,
    seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    /// Row-major; observed cells keep their rating, NA predictions are NaN.
    pub values: Vec<f64>,
    /// RMSE against the noiseless matrix over unobserved cells with a prediction.
    pub rmse_hidden: f64,
    pub na_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvSurface {
    /// `GRID_MULTIPLIERS.len()²` entries, row-major by the user-side multiplier.
    pub rmse: Vec<f64>,
    pub best: Bandwidths,
}

impl Explorer {
    pub fn new(n: usize, m: usize, k: usize, snr: f64, p_miss: f64, seed: u64) -> Result<Self> {
        let problem = generate_problem(n, m, k, snr, seed)?;
        let train = problem.ratings(&mcar_mask(n, m, p_miss, seed)?)?;
        let variance = fit_noise_variance(&train, FirstStep::AdditiveMeans)?;
        let distances = build_distance_model(&train, variance, 1)?;
        Ok(Self {
            problem,
            train,
            distances,
            seed,
        })
    }

    pub fn n_users(&self) -> usize {
        self.train.n_users()
    }

    pub fn n_items(&self) -> usize {
        self.train.n_items()
    }

    pub fn sigma2_hat(&self) -> f64 {
        self.distances.variance.sigma2_hat
    }

    fn model(&self) -> RneModel<'_> {
        RneModel::from_parts(&self.train, self.distances.clone(), OneSided::Include)
    }

    /// Spread of the corrected distances on each side; the grid is built on it.
    pub fn base_bandwidths(&self) -> (f64, f64) {
        let sd = |kind| {
            self.distances
                .corrected_arg_sd(kind)
                .filter(|s| *s > 0.0)
                .unwrap_or(1.0)
        };
        (sd(PairKind::UserPair), sd(PairKind::ItemPair))
    }

    /// 1 for observed cells, row-major.
    pub fn mask(&self) -> Vec<u8> {
        let m = self.n_items();
        let mut out = vec![0; self.n_users() * m];
        for t in self.train.triples() {
            out[t.user * m + t.item] = 1;
        }
        out
    }

    /// Normalized weight of every cell in the prediction of `(u, i)`; zero
    /// outside the radial set.
    pub fn neighbor_weights(&self, u: usize, i: usize, h: Bandwidths) -> Result<Vec<f64>> {
        let set = self.model().neighbors(u, i)?;
        let weights = neighbor_weights(self.sigma2_hat(), &set, h, OneSided::Include);
        let mass: f64 = weights.iter().flatten().sum();
        let m = self.n_items();
        let mut out = vec![0.0; self.n_users() * m];
        if mass > 0.0 {
            for (member, w) in set.members.iter().zip(weights) {
                out[member.user * m + member.item] = w.unwrap_or(0.0) / mass;
            }
        }
        Ok(out)
    }

    pub fn complete(&self, h: Bandwidths) -> Result<Completion> {
        let model = self.model();
        let (n, m) = (self.n_users(), self.n_items());
        let mut values = vec![f64::NAN; n * m];
        let (mut sse, mut scored, mut na) = (0.0, 0usize, 0usize);
        for u in 0..n {
            for i in 0..m {
                if let Some(a) = self.train.get(u, i) {
                    values[u * m + i] = a;
                    continue;
                }
                match model.predict(u, i, h)?.value {
                    Some(z) => {
                        values[u * m + i] = z;
                        sse += (z - self.problem.z0[(u, i)]).powi(2);
                        scored += 1;
                    }
                    None => na += 1,
                }
            }
        }
        let hidden = scored + na;
        Ok(Completion {
            values,
            rmse_hidden: if scored > 0 { (sse / scored as f64).sqrt() } else { f64::NAN },
            na_rate: if hidden > 0 { na as f64 / hidden as f64 } else { 0.0 },
        })
    }

    pub fn cv_surface(&self, folds: usize) -> Result<CvSurface> {
        let cfg = RneConfig {
            folds,
            grid: GridSpec::Scaled(GRID_MULTIPLIERS.to_vec()),
            ..RneConfig::default()
        };
        let grid = self.model().grid(&cfg.grid)?;
        let sel = select_bandwidths(&self.train, &grid, folds, self.seed, &cfg)?;
        Ok(CvSurface {
            rmse: sel.table.iter().map(|e| e.mean_rmse).collect(),
            best: sel.best,
        })
    }
}

fn js(e: rne_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub struct Demo {
    inner: Explorer,
}

#[wasm_bindgen]
pub struct CompletionView {
    values: Vec<f64>,
    pub rmse_hidden: f64,
    pub na_rate: f64,
}

#[wasm_bindgen]
impl CompletionView {
    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }
}

#[wasm_bindgen]
pub struct SurfaceView {
    rmse: Vec<f64>,
    pub best_h1: f64,
    pub best_h2: f64,
}

#[wasm_bindgen]
impl SurfaceView {
    pub fn rmse(&self) -> Vec<f64> {
        self.rmse.clone()
    }
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(n: usize, m: usize, k: usize, snr: f64, p_miss: f64, seed: u32) -> Result<Demo, JsError> {
        Explorer::new(n, m, k, snr, p_miss, seed as u64)
            .map(|inner| Demo { inner })
            .map_err(js)
    }

    #[wasm_bindgen(getter)]
    pub fn n_users(&self) -> usize {
        self.inner.n_users()
    }

    #[wasm_bindgen(getter)]
    pub fn n_items(&self) -> usize {
        self.inner.n_items()
    }

    #[wasm_bindgen(getter)]
    pub fn sigma2_hat(&self) -> f64 {
        self.inner.sigma2_hat()
    }

    /// `[h1, h2]` scale of the bandwidth grid.
    pub fn base_bandwidths(&self) -> Vec<f64> {
        let (a, b) = self.inner.base_bandwidths();
        vec![a, b]
    }

    pub fn multipliers(&self) -> Vec<f64> {
        GRID_MULTIPLIERS.to_vec()
    }

    pub fn mask(&self) -> Vec<u8> {
        self.inner.mask()
    }

    pub fn neighbor_weights(&self, u: usize, i: usize, h1: f64, h2: f64) -> Result<Vec<f64>, JsError> {
        let h = Bandwidths::new(h1, h2).map_err(js)?;
        self.inner.neighbor_weights(u, i, h).map_err(js)
    }

    pub fn complete(&self, h1: f64, h2: f64) -> Result<CompletionView, JsError> {
        let h = Bandwidths::new(h1, h2).map_err(js)?;
        let c = self.inner.complete(h).map_err(js)?;
        Ok(CompletionView {
            values: c.values,
            rmse_hidden: c.rmse_hidden,
            na_rate: c.na_rate,
        })
    }

    pub fn cv_surface(&self, folds: usize) -> Result<SurfaceView, JsError> {
        let s = self.inner.cv_surface(folds).map_err(js)?;
        Ok(SurfaceView {
            rmse: s.rmse,
            best_h1: s.best.h1,
            best_h2: s.best.h2,
        })
    }
}

//! Nuclear-norm regularized completion by iterated soft-thresholded SVD.
//!
//! Minimizes `½‖P_Ω(A) − P_Ω(Z)‖²_F + λ‖Z‖_*` with the fixed-point iteration
//! `Z ← S_λ(P_Ω(A) + P_Ω⊥(Z))` started from `Z = 0`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cv::k_folds;
use crate::error::{Error, Result};
use crate::ratings::SparseRatings;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoftImputeOptions {
    /// Stop when `‖Z_new − Z_old‖_F / max(‖Z_old‖_F, ‖Z_new‖_F)` drops to this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SoftImputeOptions {
    fn default() -> Self {
        Self {
            tol: 1e-5,
            max_iter: 200,
        }
    }
}

/// The default penalty grid, 0.1 to 4.1 in steps of 0.5.
pub fn default_lambda_grid() -> Vec<f64> {
    (0..9).map(|k| 0.1 + 0.5 * k as f64).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoftImputeFit {
    /// `n x r` left singular vectors.
    pub u: DMatrix<f64>,
    /// Thresholded singular values, descending and all positive.
    pub singulars: Vec<f64>,
    /// `m x r` right singular vectors.
    pub v: DMatrix<f64>,
    pub lambda: f64,
    pub iterations: usize,
    pub final_delta: f64,
    /// Objective value before the first iteration and after each one.
    pub objective_trace: Vec<f64>,
    pub converged: bool,
    row_seen: Vec<bool>,
    col_seen: Vec<bool>,
}

impl SoftImputeFit {
    pub fn rank(&self) -> usize {
        self.singulars.len()
    }

    /// Entry of the low-rank reconstruction.
    pub fn predict(&self, u: usize, i: usize) -> f64 {
        self.singulars
            .iter()
            .enumerate()
            .map(|(l, s)| self.u[(u, l)] * s * self.v[(i, l)])
            .sum()
    }

    /// `None` when the row or column had no training entry.
    pub fn predict_seen(&self, u: usize, i: usize) -> Option<f64> {
        (self.row_seen[u] && self.col_seen[i]).then(|| self.predict(u, i))
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut us = self.u.clone();
        for (l, s) in self.singulars.iter().enumerate() {
            us.column_mut(l).scale_mut(*s);
        }
        us * self.v.transpose()
    }
}

/// Thresholded SVD factors of a dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdedSvd {
    pub u: DMatrix<f64>,
    pub singulars: Vec<f64>,
    pub v: DMatrix<f64>,
}

impl ThresholdedSvd {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut us = self.u.clone();
        for (l, s) in self.singulars.iter().enumerate() {
            us.column_mut(l).scale_mut(*s);
        }
        us * self.v.transpose()
    }

    pub fn nuclear_norm(&self) -> f64 {
        self.singulars.iter().sum()
    }
}

/// Full SVD with singular values shrunk to `(c − λ)₊`; zero components dropped.
pub fn soft_threshold_svd(m: &DMatrix<f64>, lambda: f64) -> Result<ThresholdedSvd> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
    }
    let (nr, nc) = m.shape();
    if nr == 0 || nc == 0 {
        return Ok(ThresholdedSvd {
            u: DMatrix::zeros(nr, 0),
            singulars: vec![],
            v: DMatrix::zeros(nc, 0),
        });
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::SvdFailure);
    }
    let (u, s, v) = crate::svd::thin_svd(m)?;
    let keep = s.iter().take_while(|&&c| c - lambda > 0.0).count();
    let out_u = u.columns(0, keep).into_owned();
    let out_v = v.columns(0, keep).into_owned();
    let singulars = s[..keep].iter().map(|c| c - lambda).collect();
    Ok(ThresholdedSvd {
        u: out_u,
        singulars,
        v: out_v,
    })
}

pub fn nuclear_norm(m: &DMatrix<f64>) -> f64 {
    m.singular_values().iter().sum()
}

/// `½‖P_Ω(A) − P_Ω(Z)‖²_F + λ‖Z‖_*` given the nuclear norm of `Z`.
fn objective_with(r: &SparseRatings, z: &DMatrix<f64>, nuclear: f64, lambda: f64) -> f64 {
    let fit: f64 = r
        .triples()
        .iter()
        .map(|t| (t.value - z[(t.user, t.item)]).powi(2))
        .sum();
    0.5 * fit + lambda * nuclear
}

pub fn objective(r: &SparseRatings, z: &DMatrix<f64>, lambda: f64) -> f64 {
    objective_with(r, z, nuclear_norm(z), lambda)
}

fn seen(r: &SparseRatings) -> (Vec<bool>, Vec<bool>) {
    (
        (0..r.n_users()).map(|u| !r.row(u).is_empty()).collect(),
        (0..r.n_items()).map(|i| !r.col(i).is_empty()).collect(),
    )
}

/// Soft-impute from `Z = 0`.
///
/// On [`Error::NonConvergence`] the fit after `max_iter` iterations is
/// carried inside the error.
pub fn soft_impute(r: &SparseRatings, lambda: f64, opts: SoftImputeOptions) -> Result<SoftImputeFit> {
    let z0 = DMatrix::zeros(r.n_users(), r.n_items());
    soft_impute_from(r, lambda, opts, z0)
}

/// Soft-impute started from an arbitrary `Z`.
pub fn soft_impute_from(
    r: &SparseRatings,
    lambda: f64,
    opts: SoftImputeOptions,
    start: DMatrix<f64>,
) -> Result<SoftImputeFit> {
    if r.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
    }
    if start.shape() != (r.n_users(), r.n_items()) {
        return Err(Error::InvalidShape("warm start has the wrong shape".into()));
    }
    let mut z = start;
    let mut trace = vec![objective(r, &z, lambda)];
    let mut svd = ThresholdedSvd {
        u: DMatrix::zeros(r.n_users(), 0),
        singulars: vec![],
        v: DMatrix::zeros(r.n_items(), 0),
    };
    let mut delta = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        let mut filled = z.clone();
        for t in r.triples() {
            filled[(t.user, t.item)] = t.value;
        }
        svd = soft_threshold_svd(&filled, lambda)?;
        let z_new = svd.reconstruct();
        let change = (&z_new - &z).norm();
        let scale = z.norm().max(z_new.norm());
        delta = if scale > 0.0 { change / scale } else { 0.0 };
        z = z_new;
        iterations += 1;
        trace.push(objective_with(r, &z, svd.nuclear_norm(), lambda));
        if delta <= opts.tol {
            converged = true;
            break;
        }
    }
    if iterations == 0 {
        // max_iter == 0: report the start as the fit.
        svd = soft_threshold_svd(&z, 0.0)?;
    }
    let (row_seen, col_seen) = seen(r);
    let fit = SoftImputeFit {
        u: svd.u,
        singulars: svd.singulars,
        v: svd.v,
        lambda,
        iterations,
        final_delta: delta,
        objective_trace: trace,
        converged,
        row_seen,
        col_seen,
    };
    if converged {
        Ok(fit)
    } else {
        Err(Error::NonConvergence { fit: Box::new(fit) })
    }
}

/// Accept a fit that ran out of iterations.
pub fn accept_unconverged(res: Result<SoftImputeFit>) -> Result<SoftImputeFit> {
    match res {
        Err(Error::NonConvergence { fit }) => Ok(*fit),
        other => other,
    }
}

/// Fits along `lambdas` in descending order, each warm-started from the
/// previous solution. Returned in the order given.
pub fn soft_impute_path(
    r: &SparseRatings,
    lambdas: &[f64],
    opts: SoftImputeOptions,
) -> Result<Vec<SoftImputeFit>> {
    let mut order: Vec<usize> = (0..lambdas.len()).collect();
    order.sort_by(|&a, &b| lambdas[b].total_cmp(&lambdas[a]));
    let mut out: Vec<Option<SoftImputeFit>> = vec![None; lambdas.len()];
    let mut warm = DMatrix::zeros(r.n_users(), r.n_items());
    for k in order {
        let fit = accept_unconverged(soft_impute_from(r, lambdas[k], opts, warm))?;
        warm = fit.reconstruct();
        out[k] = Some(fit);
    }
    Ok(out.into_iter().map(|f| f.expect("every lambda fitted")).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSelection {
    pub best: f64,
    /// `(lambda, mean held-out RMSE)` in grid order.
    pub table: Vec<(f64, f64)>,
}

/// K-fold choice of `λ`; ties go to the larger penalty.
pub fn select_lambda(
    r: &SparseRatings,
    grid: &[f64],
    folds: usize,
    seed: u64,
    opts: SoftImputeOptions,
) -> Result<LambdaSelection> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let splits = k_folds(r, folds, seed)?;
    let mut sum = vec![0.0; grid.len()];
    let mut used = vec![0usize; grid.len()];
    for fold in &splits {
        if fold.train.is_empty() {
            continue;
        }
        let fits = soft_impute_path(&fold.train, grid, opts)?;
        for (k, fit) in fits.iter().enumerate() {
            let mut sse = 0.0;
            let mut n = 0usize;
            for t in &fold.held {
                if let Some(p) = fit.predict_seen(t.user, t.item) {
                    sse += (p - t.value).powi(2);
                    n += 1;
                }
            }
            if n > 0 {
                sum[k] += (sse / n as f64).sqrt();
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
        .min_by(|a, b| a.1.total_cmp(&b.1).then(b.0.total_cmp(&a.0)))
        .expect("nonempty grid")
        .0;
    Ok(LambdaSelection { best, table })
}

/// Dense matrix from factors chosen by the caller, for tests and examples.
pub fn from_svd(u: &DMatrix<f64>, s: &[f64], v: &DMatrix<f64>) -> DMatrix<f64> {
    u * DMatrix::from_diagonal(&DVector::from_column_slice(s)) * v.transpose()
}

//! Repetition driver: data, split, fit every method, score every stratum.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Method};
use super::ingest::{ingest_path, subsample, TripleFormat, ValueTransform};
use crate::baselines::blind::{blind_regression_set, predict_from_set, select_blind_lambda};
use crate::baselines::cf::{cf_predict, CfAxis, CfOptions};
use crate::baselines::soft_impute::{accept_unconverged, select_lambda, soft_impute, SoftImputeOptions};
use crate::error::{Error, Result};
use crate::metrics::{aggregate, evaluate, EvalReport, MeanSe, Stratum};
use crate::par_map;
use crate::ratings::{Cell, SparseRatings};
use crate::rne::{select_bandwidths, RneModel};
use crate::simulation::{generate_problem_with, split_observed, split_with, SplitPlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Rmse,
    StdTestError,
    NaProportion,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Rmse, Metric::StdTestError, Metric::NaProportion];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Rmse => "rmse",
            Metric::StdTestError => "std_test_error",
            Metric::NaProportion => "na_proportion",
        }
    }
}

/// One line of the results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub method: Method,
    pub stratum: Stratum,
    pub metric: Metric,
    pub mean: Option<f64>,
    pub se: Option<f64>,
    /// Repetitions in which the metric was defined.
    pub reps: usize,
    pub config_hash: String,
}

/// Tuned parameters of one method in one repetition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Tuned {
    Bandwidths { h1: f64, h2: f64 },
    Lambda(f64),
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    pub rep: usize,
    pub seed: u64,
    pub method: Method,
    pub tuned: Tuned,
    pub reports: Vec<EvalReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub rep: usize,
    pub method: Option<Method>,
    pub message: String,
    /// True for numeric failures (SVD, convergence), false for others.
    pub numeric: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config_hash: String,
    pub rows: Vec<ResultRow>,
    pub raw: Vec<RawRecord>,
    pub failures: Vec<Failure>,
}

impl ExperimentResult {
    pub fn row(&self, method: Method, stratum: Stratum, metric: Metric) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.stratum == stratum && r.metric == metric)
    }

    /// Mean of a metric, if present and defined.
    pub fn mean(&self, method: Method, stratum: Stratum, metric: Metric) -> Option<f64> {
        self.row(method, stratum, metric).and_then(|r| r.mean)
    }
}

/// Everything one repetition needs: training ratings and reference values
/// for each test cell.
pub struct RepData {
    pub train: SparseRatings,
    pub plan: SplitPlan,
    pub reference: BTreeMap<Cell, f64>,
    pub reference0: Option<BTreeMap<Cell, f64>>,
}

pub fn is_numeric(e: &Error) -> bool {
    matches!(e, Error::SvdFailure | Error::NonConvergence { .. })
}

fn rep_data_simulated(cfg: &ExperimentConfig, seed: u64) -> Result<RepData> {
    let (n, m, k) = cfg.dims();
    let problem = generate_problem_with(n, m, k, cfg.snr, seed, cfg.noise)?;
    let plan = split_with(&problem, cfg.p_miss, cfg.phi, cfg.train_frac, seed)?;
    let train = problem.ratings(&plan.train)?;
    let test = plan.test_all();
    Ok(RepData {
        train,
        reference: test.iter().map(|&c| (c, problem.z[c])).collect(),
        reference0: Some(test.iter().map(|&c| (c, problem.z0[c])).collect()),
        plan,
    })
}

fn rep_data_observed(cfg: &ExperimentConfig, data: &SparseRatings, seed: u64) -> Result<RepData> {
    let cells: Vec<Cell> = data.triples().iter().map(|t| t.cell()).collect();
    let plan = split_observed(data.n_users(), data.n_items(), &cells, cfg.phi, cfg.train_frac, seed)?;
    let train = data.filter({
        let keep: std::collections::HashSet<Cell> = plan.train.iter().copied().collect();
        move |t| keep.contains(&t.cell())
    });
    let reference = plan
        .test_all()
        .into_iter()
        .map(|c| (c, data.get(c.0, c.1).expect("test cell observed")))
        .collect();
    Ok(RepData {
        train,
        plan,
        reference,
        reference0: None,
    })
}

/// Ratings from the configured dataset, after transform and subsampling.
pub fn load_dataset(cfg: &ExperimentConfig) -> Result<SparseRatings> {
    let path = cfg
        .dataset
        .as_ref()
        .ok_or_else(|| Error::Config("no dataset configured".into()))?;
    let delimiter = match cfg.delimiter {
        Some(c) if c.is_ascii() => Some(c as u8),
        Some(c) => return Err(Error::Config(format!("delimiter {c:?} is not ASCII"))),
        None => None,
    };
    let format = TripleFormat {
        delimiter,
        header: cfg.header,
        user_col: cfg.user_col.clone(),
        item_col: cfg.item_col.clone(),
        value_col: cfg.value_col.clone(),
        transform: if cfg.log1p {
            ValueTransform::Log1p
        } else {
            ValueTransform::None
        },
    };
    let data = ingest_path(path, &format)?;
    if cfg.user_frac < 1.0 || cfg.item_frac < 1.0 {
        Ok(subsample(&data.ratings, cfg.user_frac, cfg.item_frac, cfg.seed)?.ratings)
    } else {
        Ok(data.ratings)
    }
}

/// Predictions of one method for `targets`, trained on `train`.
pub fn fit_predict(
    cfg: &ExperimentConfig,
    method: Method,
    train: &SparseRatings,
    targets: &[Cell],
    seed: u64,
) -> Result<(Tuned, Vec<Option<f64>>)> {
    match method {
        Method::Rne => {
            let rne_cfg = cfg.rne_config();
            let model = RneModel::fit(train, &rne_cfg)?;
            let grid = model.grid(&rne_cfg.grid)?;
            let best = select_bandwidths(train, &grid, cfg.folds, seed, &rne_cfg)?.best;
            let preds = par_map(targets, |&(u, i)| model.predict(u, i, best).map(|p| p.value));
            Ok((
                Tuned::Bandwidths {
                    h1: best.h1,
                    h2: best.h2,
                },
                preds.into_iter().collect::<Result<_>>()?,
            ))
        }
        Method::CfUser | Method::CfItem => {
            let axis = if method == Method::CfUser {
                CfAxis::User
            } else {
                CfAxis::Item
            };
            let opts = CfOptions {
                min_corr: cfg.min_corr,
                weighting: cfg.cf_weighting,
            };
            let preds = par_map(targets, |&(u, i)| cf_predict(train, axis, u, i, opts));
            Ok((Tuned::None, preds.into_iter().collect::<Result<_>>()?))
        }
        Method::Softimpute => {
            let opts = SoftImputeOptions {
                tol: cfg.softimpute_tol,
                max_iter: cfg.softimpute_max_iter,
            };
            let best = select_lambda(train, &cfg.lambda_grid, cfg.folds, seed, opts)?.best;
            let fit = accept_unconverged(soft_impute(train, best, opts))?;
            Ok((
                Tuned::Lambda(best),
                targets.iter().map(|&(u, i)| fit.predict_seen(u, i)).collect(),
            ))
        }
        Method::Blindreg => {
            let best = select_blind_lambda(train, &cfg.blind_lambda_grid, cfg.blind_beta, cfg.folds, seed)?.best;
            let preds = par_map(targets, |&(u, i)| {
                blind_regression_set(train, u, i, cfg.blind_beta).map(|s| predict_from_set(&s, best))
            });
            Ok((Tuned::Lambda(best), preds.into_iter().collect::<Result<_>>()?))
        }
    }
}

/// Score predictions on the warm, cold and combined strata.
pub fn score(data: &RepData, preds: &BTreeMap<Cell, Option<f64>>, na_fill: Option<f64>) -> Result<Vec<EvalReport>> {
    Stratum::ALL
        .iter()
        .map(|&s| {
            let cells: &[Cell] = match s {
                Stratum::Warm => &data.plan.test_warm,
                Stratum::Cold => &data.plan.test_cold,
                Stratum::All => &[],
            };
            let keep = |c: &Cell| s == Stratum::All || cells.binary_search(c).is_ok();
            let p: BTreeMap<Cell, Option<f64>> = preds.iter().filter(|e| keep(e.0)).map(|(c, v)| (*c, *v)).collect();
            let r: BTreeMap<Cell, f64> = data.reference.iter().filter(|e| keep(e.0)).map(|(c, v)| (*c, *v)).collect();
            let r0: Option<BTreeMap<Cell, f64>> = data
                .reference0
                .as_ref()
                .map(|r0| r0.iter().filter(|e| keep(e.0)).map(|(c, v)| (*c, *v)).collect());
            evaluate(&p, &r, r0.as_ref(), s, na_fill)
        })
        .collect()
}

struct RepOutcome {
    raw: Vec<RawRecord>,
    failures: Vec<Failure>,
}

fn run_rep(cfg: &ExperimentConfig, dataset: Option<&SparseRatings>, rep: usize) -> RepOutcome {
    let seed = cfg.seed.wrapping_add(rep as u64);
    let mut out = RepOutcome {
        raw: vec![],
        failures: vec![],
    };
    let data = match dataset {
        Some(d) => rep_data_observed(cfg, d, seed),
        None => rep_data_simulated(cfg, seed),
    };
    let data = match data {
        Ok(d) => d,
        Err(e) => {
            out.failures.push(Failure {
                rep,
                method: None,
                numeric: is_numeric(&e),
                message: e.to_string(),
            });
            return out;
        }
    };
    let targets: Vec<Cell> = data.reference.keys().copied().collect();
    let na_fill = if cfg.na_fallback { data.train.mean() } else { None };
    for &method in &cfg.methods {
        let result = fit_predict(cfg, method, &data.train, &targets, seed).and_then(|(tuned, preds)| {
            let map: BTreeMap<Cell, Option<f64>> = targets.iter().copied().zip(preds).collect();
            Ok((tuned, score(&data, &map, na_fill)?))
        });
        match result {
            Ok((tuned, reports)) => out.raw.push(RawRecord {
                rep,
                seed,
                method,
                tuned,
                reports,
            }),
            Err(e) => out.failures.push(Failure {
                rep,
                method: Some(method),
                numeric: is_numeric(&e),
                message: e.to_string(),
            }),
        }
    }
    out
}

/// Run every repetition and aggregate.
///
/// Repetition `r` uses seed `cfg.seed + r` for data generation, splitting and
/// tuning, so results do not depend on scheduling. A method that fails in a
/// repetition is recorded in `failures` and left out of that repetition's
/// aggregate.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let dataset = if cfg.is_simulation() {
        None
    } else {
        Some(load_dataset(cfg)?)
    };
    let reps: Vec<usize> = (0..cfg.reps).collect();
    let outcomes = par_map(&reps, |&rep| run_rep(cfg, dataset.as_ref(), rep));
    let mut raw = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        raw.extend(o.raw);
        failures.extend(o.failures);
    }
    let hash = cfg.hash();
    let mut rows = Vec::new();
    for &method in &cfg.methods {
        for (k, &stratum) in Stratum::ALL.iter().enumerate() {
            let reports: Vec<EvalReport> = raw
                .iter()
                .filter(|r| r.method == method)
                .map(|r| r.reports[k])
                .collect();
            let agg = if reports.is_empty() {
                None
            } else {
                Some(aggregate(&reports)?)
            };
            for metric in Metric::ALL {
                let value: Option<MeanSe> = agg.and_then(|a| match metric {
                    Metric::Rmse => a.rmse,
                    Metric::StdTestError => a.std_test_error,
                    Metric::NaProportion => a.na_proportion,
                });
                rows.push(ResultRow {
                    method,
                    stratum,
                    metric,
                    mean: value.map(|v| v.mean),
                    se: value.map(|v| v.se),
                    reps: value.map_or(0, |v| v.n),
                    config_hash: hash.clone(),
                });
            }
        }
    }
    Ok(ExperimentResult {
        config_hash: hash,
        rows,
        raw,
        failures,
    })
}

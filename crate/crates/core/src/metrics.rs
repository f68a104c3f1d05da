//! Held-out error measures per test stratum.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ratings::Cell;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stratum {
    Warm,
    Cold,
    All,
}

impl Stratum {
    pub const ALL: [Stratum; 3] = [Stratum::Warm, Stratum::Cold, Stratum::All];

    pub fn as_str(self) -> &'static str {
        match self {
            Stratum::Warm => "warm",
            Stratum::Cold => "cold",
            Stratum::All => "all",
        }
    }
}

impl fmt::Display for Stratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub stratum: Stratum,
    /// Over the cells entering the residual sum; `None` when there are none.
    pub rmse: Option<f64>,
    /// `‖Z0 − Ẑ‖² / ‖Z0‖²` over the same cells, when `Z0` is known.
    pub std_test_error: Option<f64>,
    /// `None` for an empty stratum.
    pub na_proportion: Option<f64>,
    pub n_scored: usize,
    pub n_na: usize,
    /// Number of residuals in the RMSE: `n_scored`, or every cell when NA
    /// predictions were filled.
    pub rmse_divisor: usize,
}

/// Scores `preds` against the noisy `reference` and, if given, the
/// noiseless `reference0`.
///
/// NA predictions are left out of both error measures unless `na_fill`
/// supplies a value for them; they are counted in `n_na` either way.
pub fn evaluate(
    preds: &BTreeMap<Cell, Option<f64>>,
    reference: &BTreeMap<Cell, f64>,
    reference0: Option<&BTreeMap<Cell, f64>>,
    stratum: Stratum,
    na_fill: Option<f64>,
) -> Result<EvalReport> {
    if !preds.keys().eq(reference.keys()) {
        return Err(Error::KeyMismatch);
    }
    if let Some(r0) = reference0 {
        if !preds.keys().eq(r0.keys()) {
            return Err(Error::KeyMismatch);
        }
    }
    let mut sse = 0.0;
    let mut err0 = 0.0;
    let mut norm0 = 0.0;
    let mut n_scored = 0;
    let mut n_na = 0;
    let mut divisor = 0;
    for (cell, pred) in preds {
        if pred.is_some() {
            n_scored += 1;
        } else {
            n_na += 1;
        }
        let Some(p) = pred.or(na_fill) else { continue };
        divisor += 1;
        sse += (p - reference[cell]).powi(2);
        if let Some(r0) = reference0 {
            let z0 = r0[cell];
            err0 += (z0 - p).powi(2);
            norm0 += z0 * z0;
        }
    }
    let total = n_scored + n_na;
    Ok(EvalReport {
        stratum,
        rmse: (divisor > 0).then(|| (sse / divisor as f64).sqrt()),
        std_test_error: (reference0.is_some() && divisor > 0 && norm0 > 0.0).then(|| err0 / norm0),
        na_proportion: (total > 0).then(|| n_na as f64 / total as f64),
        n_scored,
        n_na,
        rmse_divisor: divisor,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSe {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n)`; zero for a single value.
    pub se: f64,
    pub n: usize,
}

pub fn mean_se(values: &[f64]) -> Option<MeanSe> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let se = if n < 2 {
        0.0
    } else {
        let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    };
    Some(MeanSe { mean, se, n })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub stratum: Stratum,
    pub reps: usize,
    pub rmse: Option<MeanSe>,
    pub std_test_error: Option<MeanSe>,
    pub na_proportion: Option<MeanSe>,
}

/// Mean and standard error of each measure over the repetitions where it is
/// defined.
pub fn aggregate(reports: &[EvalReport]) -> Result<AggregateReport> {
    let first = reports.first().ok_or(Error::EmptyInput)?;
    if reports.iter().any(|r| r.stratum != first.stratum) {
        return Err(Error::InvalidParameter("reports mix strata".into()));
    }
    let pick = |f: fn(&EvalReport) -> Option<f64>| -> Option<MeanSe> {
        let vals: Vec<f64> = reports.iter().filter_map(f).collect();
        mean_se(&vals)
    };
    Ok(AggregateReport {
        stratum: first.stratum,
        reps: reports.len(),
        rmse: pick(|r| r.rmse),
        std_test_error: pick(|r| r.std_test_error),
        na_proportion: pick(|r| r.na_proportion),
    })
}

//! Result tables as CSV or JSON.

use std::io::Write;

use super::runner::{ExperimentResult, Tuned};
use crate::error::Result;

fn num(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

pub const CSV_HEADER: &str = "method,stratum,metric,mean,se,reps,config_hash";

/// One row per method, stratum and metric; undefined values print as `NA`.
/// Failures follow as `#` comment lines.
pub fn write_csv<W: Write>(res: &ExperimentResult, mut w: W) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in &res.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.method,
            r.stratum,
            r.metric.as_str(),
            num(r.mean),
            num(r.se),
            r.reps,
            r.config_hash
        )?;
    }
    for f in &res.failures {
        let method = f.method.map_or("-", |m| m.as_str());
        let message = f.message.replace(['\n', '\r'], " ");
        writeln!(w, "# failure rep={} method={} {}", f.rep, method, message)?;
    }
    Ok(())
}

#[derive(serde::Serialize)]
struct JsonRow<'a> {
    method: &'a str,
    stratum: &'a str,
    metric: &'a str,
    mean: Option<f64>,
    se: Option<f64>,
    reps: usize,
    config_hash: &'a str,
}

#[derive(serde::Serialize)]
struct JsonDoc<'a> {
    config_hash: &'a str,
    rows: Vec<JsonRow<'a>>,
    failures: &'a [super::runner::Failure],
}

/// `{config_hash, rows, failures}`; undefined values are `null`.
pub fn write_json<W: Write>(res: &ExperimentResult, mut w: W) -> Result<()> {
    let doc = JsonDoc {
        config_hash: &res.config_hash,
        rows: res
            .rows
            .iter()
            .map(|r| JsonRow {
                method: r.method.as_str(),
                stratum: r.stratum.as_str(),
                metric: r.metric.as_str(),
                mean: r.mean,
                se: r.se,
                reps: r.reps,
                config_hash: &r.config_hash,
            })
            .collect(),
        failures: &res.failures,
    };
    serde_json::to_writer_pretty(&mut w, &doc).map_err(std::io::Error::from)?;
    writeln!(w)?;
    Ok(())
}

pub const RAW_HEADER: &str = "rep,seed,method,tuned,stratum,rmse,std_test_error,na_proportion,n_scored,n_na";

/// Per-repetition reports, one line per method and stratum.
pub fn write_raw_csv<W: Write>(res: &ExperimentResult, mut w: W) -> Result<()> {
    writeln!(w, "{RAW_HEADER}")?;
    for rec in &res.raw {
        let tuned = match rec.tuned {
            Tuned::Bandwidths { h1, h2 } => format!("h1={h1};h2={h2}"),
            Tuned::Lambda(l) => format!("lambda={l}"),
            Tuned::None => "-".to_string(),
        };
        for r in &rec.reports {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                rec.rep,
                rec.seed,
                rec.method,
                tuned,
                r.stratum,
                num(r.rmse),
                num(r.std_test_error),
                num(r.na_proportion),
                r.n_scored,
                r.n_na
            )?;
        }
    }
    Ok(())
}

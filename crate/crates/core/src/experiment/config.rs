//! Experiment configuration as flat `key = value` pairs.
//!
//! The same keys are accepted from a config file and from command-line
//! overrides; dashes and underscores in keys are interchangeable.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baselines::blind::DEFAULT_LAMBDA_GRID;
use crate::baselines::cf::CfWeighting;
use crate::baselines::soft_impute::default_lambda_grid;
use crate::distance::FirstStep;
use crate::error::{Error, Result};
use crate::rne::{GridSpec, OneSided, RneConfig};
use crate::simulation::{NoiseCalibration, DEFAULT_TRAIN_FRAC};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rne,
    CfUser,
    CfItem,
    Softimpute,
    Blindreg,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Rne,
        Method::CfUser,
        Method::CfItem,
        Method::Softimpute,
        Method::Blindreg,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Rne => "rne",
            Method::CfUser => "cf_user",
            Method::CfItem => "cf_item",
            Method::Softimpute => "softimpute",
            Method::Blindreg => "blindreg",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// A column picked by 0-based index or by header name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnRef {
    Index(usize),
    Name(String),
}

impl FromStr for ColumnRef {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Config("empty column reference".into()));
        }
        Ok(s.parse().map(ColumnRef::Index).unwrap_or_else(|_| ColumnRef::Name(s.to_string())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub methods: Vec<Method>,

    // simulation
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub k: Option<usize>,
    pub snr: f64,
    pub noise: NoiseCalibration,
    pub p_miss: f64,

    // real data
    pub dataset: Option<PathBuf>,
    pub delimiter: Option<char>,
    pub header: Option<bool>,
    pub user_col: ColumnRef,
    pub item_col: ColumnRef,
    pub value_col: ColumnRef,
    pub log1p: bool,
    pub user_frac: f64,
    pub item_frac: f64,

    // protocol
    pub phi: f64,
    pub train_frac: f64,
    pub reps: usize,
    pub seed: u64,
    pub folds: usize,
    pub na_fallback: bool,

    // radial neighborhood estimator
    pub beta: usize,
    pub grid: Vec<f64>,
    pub one_sided: OneSided,
    pub first_step: FirstStep,

    // baselines
    pub lambda_grid: Vec<f64>,
    pub softimpute_tol: f64,
    pub softimpute_max_iter: usize,
    pub blind_lambda_grid: Vec<f64>,
    pub blind_beta: usize,
    pub cf_weighting: CfWeighting,
    pub min_corr: f64,

    // output; not part of the config hash
    pub out: Option<PathBuf>,
    pub raw_out: Option<PathBuf>,
    pub format: OutputFormat,
}

pub const DEFAULT_N: usize = 100;
pub const DEFAULT_M: usize = 100;
pub const DEFAULT_K: usize = 10;

impl Default for ExperimentConfig {
    fn default() -> Self {
        let rne = RneConfig::default();
        let GridSpec::Scaled(grid) = rne.grid else {
            unreachable!("default grid is scaled")
        };
        Self {
            methods: Method::ALL.to_vec(),
            n: None,
            m: None,
            k: None,
            snr: 1.0,
            noise: NoiseCalibration::VarianceRatio,
            p_miss: 0.9,
            dataset: None,
            delimiter: None,
            header: None,
            user_col: ColumnRef::Index(0),
            item_col: ColumnRef::Index(1),
            value_col: ColumnRef::Index(2),
            log1p: false,
            user_frac: 1.0,
            item_frac: 1.0,
            phi: 0.0,
            train_frac: DEFAULT_TRAIN_FRAC,
            reps: 20,
            seed: 1,
            folds: rne.folds,
            na_fallback: false,
            beta: rne.beta,
            grid,
            one_sided: rne.one_sided,
            first_step: rne.first_step,
            lambda_grid: default_lambda_grid(),
            softimpute_tol: 1e-5,
            softimpute_max_iter: 200,
            blind_lambda_grid: DEFAULT_LAMBDA_GRID.to_vec(),
            blind_beta: 2,
            cf_weighting: CfWeighting::Correlation,
            min_corr: 0.0,
            out: None,
            raw_out: None,
            format: OutputFormat::Csv,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    let out: Vec<f64> = v
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_num(key, s))
        .collect::<Result<_>>()?;
    if out.is_empty() {
        return Err(Error::Config(format!("{key}: empty list")));
    }
    Ok(out)
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected a boolean, got {v:?}"))),
    }
}

fn parse_delimiter(v: &str) -> Result<char> {
    match v {
        "\\t" | "tab" | "\t" => Ok('\t'),
        "comma" | "," => Ok(','),
        s if s.chars().count() == 1 => Ok(s.chars().next().expect("one char")),
        _ => Err(Error::Config(format!("delimiter: expected one character, got {v:?}"))),
    }
}

/// `means` or `softimpute:<lambda>`.
fn parse_first_step(v: &str) -> Result<FirstStep> {
    let v = v.trim();
    if v == "means" {
        return Ok(FirstStep::AdditiveMeans);
    }
    if let Some(l) = v.strip_prefix("softimpute:") {
        return Ok(FirstStep::SoftImpute {
            lambda: parse_num("first_step", l)?,
        });
    }
    Err(Error::Config(format!("first_step: expected means or softimpute:<lambda>, got {v:?}")))
}

impl ExperimentConfig {
    /// Set one key. Unknown keys are an error.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().trim_start_matches("--").replace('-', "_");
        let k = key.as_str();
        let v = value.trim();
        match k {
            "method" | "methods" => {
                self.methods = if v == "all" {
                    Method::ALL.to_vec()
                } else {
                    v.split(',').map(str::parse).collect::<Result<_>>()?
                };
                self.methods.sort();
                self.methods.dedup();
            }
            "n" => self.n = Some(parse_num(k, v)?),
            "m" => self.m = Some(parse_num(k, v)?),
            "k" => self.k = Some(parse_num(k, v)?),
            "snr" => self.snr = parse_num(k, v)?,
            "noise" => {
                self.noise = match v {
                    "variance_ratio" => NoiseCalibration::VarianceRatio,
                    "signal_as_sd" => NoiseCalibration::SignalAsStdDev,
                    _ => return Err(Error::Config(format!("noise: expected variance_ratio or signal_as_sd, got {v:?}"))),
                }
            }
            "p_miss" => self.p_miss = parse_num(k, v)?,
            "dataset" => self.dataset = Some(PathBuf::from(v)),
            "delimiter" => {
                self.delimiter = Some(if v.is_empty() && value.contains('\t') {
                    '\t'
                } else {
                    parse_delimiter(v)?
                })
            }
            "header" => self.header = Some(parse_bool(k, v)?),
            "user_col" => self.user_col = v.parse()?,
            "item_col" => self.item_col = v.parse()?,
            "value_col" => self.value_col = v.parse()?,
            "log1p" => self.log1p = parse_bool(k, v)?,
            "user_frac" => self.user_frac = parse_num(k, v)?,
            "item_frac" => self.item_frac = parse_num(k, v)?,
            "phi" => self.phi = parse_num(k, v)?,
            "train_frac" => self.train_frac = parse_num(k, v)?,
            "reps" => self.reps = parse_num(k, v)?,
            "seed" => self.seed = parse_num(k, v)?,
            "folds" => self.folds = parse_num(k, v)?,
            "na_fallback" => self.na_fallback = parse_bool(k, v)?,
            "beta" => self.beta = parse_num(k, v)?,
            "grid" => self.grid = parse_list(k, v)?,
            "one_sided" => {
                self.one_sided = match v {
                    "include" => OneSided::Include,
                    "drop" => OneSided::Drop,
                    _ => return Err(Error::Config(format!("one_sided: expected include or drop, got {v:?}"))),
                }
            }
            "first_step" => self.first_step = parse_first_step(v)?,
            "lambda_grid" => self.lambda_grid = parse_list(k, v)?,
            "softimpute_tol" => self.softimpute_tol = parse_num(k, v)?,
            "softimpute_max_iter" => self.softimpute_max_iter = parse_num(k, v)?,
            "blind_lambda_grid" => self.blind_lambda_grid = parse_list(k, v)?,
            "blind_beta" => self.blind_beta = parse_num(k, v)?,
            "cf_weighting" => {
                self.cf_weighting = match v {
                    "correlation" => CfWeighting::Correlation,
                    "euclidean" => CfWeighting::Euclidean,
                    _ => return Err(Error::Config(format!("cf_weighting: expected correlation or euclidean, got {v:?}"))),
                }
            }
            "min_corr" => self.min_corr = parse_num(k, v)?,
            "out" => self.out = Some(PathBuf::from(v)),
            "raw_out" => self.raw_out = Some(PathBuf::from(v)),
            "format" => {
                self.format = match v {
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    _ => return Err(Error::Config(format!("format: expected csv or json, got {v:?}"))),
                }
            }
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Apply a flat config file: one `key = value` per line, `#` comments.
    pub fn apply_file_contents(&mut self, text: &str) -> Result<()> {
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", no + 1)))?;
            self.set(k, v)
                .map_err(|e| Error::Config(format!("line {}: {e}", no + 1)))?;
        }
        Ok(())
    }

    pub fn from_file_contents(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_file_contents(text)?;
        Ok(cfg)
    }

    pub fn is_simulation(&self) -> bool {
        self.dataset.is_none()
    }

    /// `(n, m, k)` with defaults filled in.
    pub fn dims(&self) -> (usize, usize, usize) {
        (
            self.n.unwrap_or(DEFAULT_N),
            self.m.unwrap_or(DEFAULT_M),
            self.k.unwrap_or(DEFAULT_K),
        )
    }

    pub fn rne_config(&self) -> RneConfig {
        RneConfig {
            beta: self.beta,
            folds: self.folds,
            one_sided: self.one_sided,
            first_step: self.first_step,
            grid: GridSpec::Scaled(self.grid.clone()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.methods.is_empty() {
            return bad("no methods selected".into());
        }
        if self.reps < 1 {
            return bad("reps must be at least 1".into());
        }
        if self.dataset.is_some() && (self.n.is_some() || self.m.is_some() || self.k.is_some()) {
            return bad("give either simulation dimensions or a dataset, not both".into());
        }
        if self.is_simulation() {
            let (n, m, k) = self.dims();
            if n == 0 || m == 0 || k == 0 || k > n.min(m) {
                return bad(format!("need 1 <= k <= min(n, m), got n={n} m={m} k={k}"));
            }
            if !(self.snr > 0.0 && self.snr.is_finite()) {
                return bad(format!("snr must be positive, got {}", self.snr));
            }
        }
        for (name, p) in [("p_miss", self.p_miss), ("phi", self.phi)] {
            if !(0.0..1.0).contains(&p) {
                return bad(format!("{name} must be in [0, 1), got {p}"));
            }
        }
        if !(self.train_frac > 0.0 && self.train_frac < 1.0) {
            return bad(format!("train_frac must be in (0, 1), got {}", self.train_frac));
        }
        for (name, f) in [("user_frac", self.user_frac), ("item_frac", self.item_frac)] {
            if !(f > 0.0 && f <= 1.0) {
                return bad(format!("{name} must be in (0, 1], got {f}"));
            }
        }
        if self.folds < 2 {
            return bad("folds must be at least 2".into());
        }
        if self.beta < 1 || self.blind_beta < 1 {
            return bad("beta must be at least 1".into());
        }
        if self.grid.iter().any(|&g| !(g > 0.0 && g.is_finite())) {
            return bad("grid multipliers must be positive".into());
        }
        for (name, grid) in [("lambda_grid", &self.lambda_grid), ("blind_lambda_grid", &self.blind_lambda_grid)] {
            if grid.is_empty() || grid.iter().any(|&l| !(l >= 0.0 && l.is_finite())) {
                return bad(format!("{name} must be nonempty and nonnegative"));
            }
        }
        if self.grid.is_empty() {
            return bad("grid must be nonempty".into());
        }
        if !(self.softimpute_tol >= 0.0) || self.softimpute_max_iter == 0 {
            return bad("softimpute_tol must be >= 0 and softimpute_max_iter >= 1".into());
        }
        Ok(())
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form, with
    /// output settings cleared.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = None;
        c.raw_out = None;
        c.format = OutputFormat::Csv;
        let json = serde_json::to_string(&c).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

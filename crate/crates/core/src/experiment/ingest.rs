//! Delimited `(user, item, value)` files.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::config::ColumnRef;
use crate::error::{Error, Result};
use crate::ratings::{Rating, SparseRatings};
use crate::simulation::rng_for;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum ValueTransform {
    #[default]
    None,
    Log1p,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripleFormat {
    /// Guessed from the first line (tab if present, else comma) when unset.
    pub delimiter: Option<u8>,
    /// Detected when unset: a header is assumed if the value column of the
    /// first record does not parse as a number.
    pub header: Option<bool>,
    pub user_col: ColumnRef,
    pub item_col: ColumnRef,
    pub value_col: ColumnRef,
    pub transform: ValueTransform,
}

impl Default for TripleFormat {
    fn default() -> Self {
        Self {
            delimiter: None,
            header: None,
            user_col: ColumnRef::Index(0),
            item_col: ColumnRef::Index(1),
            value_col: ColumnRef::Index(2),
            transform: ValueTransform::None,
        }
    }
}

/// Ratings with the original id of every dense index.
#[derive(Debug, Clone, PartialEq)]
pub struct IngestedRatings {
    pub ratings: SparseRatings,
    /// Original user id per dense index, in order of first appearance.
    pub user_ids: Vec<String>,
    pub item_ids: Vec<String>,
}

fn resolve(col: &ColumnRef, header: Option<&csv::StringRecord>) -> Result<usize> {
    match (col, header) {
        (ColumnRef::Index(k), _) => Ok(*k),
        (ColumnRef::Name(name), Some(h)) => h
            .iter()
            .position(|c| c.trim() == name)
            .ok_or_else(|| Error::Parse {
                line: 1,
                message: format!("no column named {name:?}"),
            }),
        (ColumnRef::Name(name), None) => Err(Error::Config(format!(
            "column {name:?} given by name but the file has no header"
        ))),
    }
}

struct Indexer {
    ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl Indexer {
    fn new() -> Self {
        Self {
            ids: Vec::new(),
            index: HashMap::new(),
        }
    }

    fn get(&mut self, id: &str) -> usize {
        if let Some(&k) = self.index.get(id) {
            return k;
        }
        let k = self.ids.len();
        self.ids.push(id.to_string());
        self.index.insert(id.to_string(), k);
        k
    }
}

pub fn ingest_path(path: &Path, format: &TripleFormat) -> Result<IngestedRatings> {
    ingest_reader(std::fs::File::open(path)?, format)
}

/// Parse a triple file. Repeated `(user, item)` keys keep the last value.
pub fn ingest_reader<R: Read>(mut reader: R, format: &TripleFormat) -> Result<IngestedRatings> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    if text.trim().is_empty() {
        return Err(Error::EmptyFile);
    }
    let delimiter = format.delimiter.unwrap_or_else(|| {
        let first = text.lines().next().unwrap_or("");
        if first.contains('\t') {
            b'\t'
        } else {
            b','
        }
    });
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = rdr.records().peekable();

    let first = match records.peek() {
        Some(Ok(r)) => r.clone(),
        Some(Err(e)) => {
            return Err(Error::Parse {
                line: 1,
                message: e.to_string(),
            })
        }
        None => return Err(Error::EmptyFile),
    };
    let header = match format.header {
        Some(h) => h,
        None => {
            let probe = resolve(&format.value_col, Some(&first)).unwrap_or(usize::MAX);
            first.get(probe).is_none_or(|v| v.parse::<f64>().is_err())
        }
    };
    let header_rec = if header {
        records.next();
        Some(first)
    } else {
        None
    };
    let cu = resolve(&format.user_col, header_rec.as_ref())?;
    let ci = resolve(&format.item_col, header_rec.as_ref())?;
    let cv = resolve(&format.value_col, header_rec.as_ref())?;

    let mut users = Indexer::new();
    let mut items = Indexer::new();
    let mut values: HashMap<(usize, usize), f64> = HashMap::new();
    for rec in records {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let field = |c: usize, what: &str| {
            rec.get(c).filter(|s| !s.is_empty()).ok_or_else(|| Error::Parse {
                line,
                message: format!("missing {what} column {c}"),
            })
        };
        let u = field(cu, "user")?;
        let i = field(ci, "item")?;
        let raw = field(cv, "value")?;
        let mut value: f64 = raw.parse().map_err(|_| Error::Parse {
            line,
            message: format!("value {raw:?} is not a number"),
        })?;
        if format.transform == ValueTransform::Log1p {
            if value <= -1.0 {
                return Err(Error::Parse {
                    line,
                    message: format!("log1p undefined for {value}"),
                });
            }
            value = value.ln_1p();
        }
        if !value.is_finite() {
            return Err(Error::Parse {
                line,
                message: format!("value {raw:?} is not finite"),
            });
        }
        values.insert((users.get(u), items.get(i)), value);
    }
    if values.is_empty() {
        return Err(Error::EmptyFile);
    }
    let ratings = SparseRatings::from_triples(
        values.into_iter().map(|((u, i), v)| Rating::new(u, i, v)),
        users.ids.len(),
        items.ids.len(),
    )?;
    Ok(IngestedRatings {
        ratings,
        user_ids: users.ids,
        item_ids: items.ids,
    })
}

/// Writes `user,item,value` rows with original ids, sorted by dense index.
pub fn export<W: Write>(data: &IngestedRatings, mut w: W, delimiter: u8) -> Result<()> {
    let d = delimiter as char;
    for t in data.ratings.triples() {
        writeln!(w, "{}{d}{}{d}{}", data.user_ids[t.user], data.item_ids[t.item], t.value)?;
    }
    Ok(())
}

/// A uniformly drawn subset of users and items with the induced ratings.
#[derive(Debug, Clone, PartialEq)]
pub struct Subsample {
    pub ratings: SparseRatings,
    /// Original index of every kept user, ascending.
    pub users: Vec<usize>,
    pub items: Vec<usize>,
}

/// Keeps `⌈user_frac · n⌉` users and `⌈item_frac · m⌉` items, re-indexed
/// densely in their original order.
pub fn subsample(r: &SparseRatings, user_frac: f64, item_frac: f64, seed: u64) -> Result<Subsample> {
    for (name, f) in [("user_frac", user_frac), ("item_frac", item_frac)] {
        if !(f > 0.0 && f <= 1.0) {
            return Err(Error::InvalidParameter(format!("{name} must be in (0, 1], got {f}")));
        }
    }
    let mut rng = rng_for(seed, 5);
    let pick = |rng: &mut _, len: usize, frac: f64| {
        let keep = ((frac * len as f64).ceil() as usize).min(len);
        let mut v = sample(rng, len, keep).into_vec();
        v.sort_unstable();
        v
    };
    let users = pick(&mut rng, r.n_users(), user_frac);
    let items = pick(&mut rng, r.n_items(), item_frac);
    let mut user_map = vec![None; r.n_users()];
    let mut item_map = vec![None; r.n_items()];
    users.iter().enumerate().for_each(|(k, &u)| user_map[u] = Some(k));
    items.iter().enumerate().for_each(|(k, &i)| item_map[i] = Some(k));
    let kept: Vec<Rating> = r
        .triples()
        .iter()
        .filter_map(|t| Some(Rating::new(user_map[t.user]?, item_map[t.item]?, t.value)))
        .collect();
    if kept.is_empty() {
        return Err(Error::EmptyResult);
    }
    Ok(Subsample {
        ratings: SparseRatings::from_triples(kept, users.len(), items.len())?,
        users,
        items,
    })
}

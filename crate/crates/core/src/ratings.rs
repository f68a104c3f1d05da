//! Sparse storage for the observed rating matrix.
//!
//! Ratings are kept three ways: the triple list sorted by `(user, item)`, a
//! row index and a column index. Both indexes are sorted by the opposite id so
//! overlap queries are a linear merge and iteration order never depends on
//! hashing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A `(user, item)` coordinate.
pub type Cell = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rating {
    pub user: usize,
    pub item: usize,
    pub value: f64,
}

impl Rating {
    pub fn new(user: usize, item: usize, value: f64) -> Self {
        Self { user, item, value }
    }

    pub fn cell(&self) -> Cell {
        (self.user, self.item)
    }
}

impl From<(usize, usize, f64)> for Rating {
    fn from((user, item, value): (usize, usize, f64)) -> Self {
        Self { user, item, value }
    }
}

/// Which side of the matrix a pair of ids lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairKind {
    UserPair,
    ItemPair,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlapSet {
    pub kind: PairKind,
    pub ids: (usize, usize),
    /// Co-observed indices on the opposite axis, ascending.
    pub members: Vec<usize>,
}

impl OverlapSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// The observed part of an `n_users x n_items` rating matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRatings {
    n_users: usize,
    n_items: usize,
    triples: Vec<Rating>,
    rows: Vec<Vec<(usize, f64)>>,
    cols: Vec<Vec<(usize, f64)>>,
}

impl SparseRatings {
    pub fn from_triples<I, T>(triples: I, n_users: usize, n_items: usize) -> Result<Self>
    where
        I: IntoIterator<Item = T>,
        T: Into<Rating>,
    {
        let mut triples: Vec<Rating> = triples.into_iter().map(Into::into).collect();
        for t in &triples {
            if t.user >= n_users {
                return Err(Error::out_of_range("user", t.user, n_users));
            }
            if t.item >= n_items {
                return Err(Error::out_of_range("item", t.item, n_items));
            }
        }
        triples.sort_by_key(Rating::cell);
        if let Some(w) = triples.windows(2).find(|w| w[0].cell() == w[1].cell()) {
            return Err(Error::DuplicateEntry {
                user: w[0].user,
                item: w[0].item,
            });
        }

        let mut rows = vec![Vec::new(); n_users];
        let mut cols = vec![Vec::new(); n_items];
        // Sorted by (user, item), so each row fills in item order and each
        // column fills in user order.
        for t in &triples {
            rows[t.user].push((t.item, t.value));
            cols[t.item].push((t.user, t.value));
        }

        Ok(Self {
            n_users,
            n_items,
            triples,
            rows,
            cols,
        })
    }

    pub fn empty(n_users: usize, n_items: usize) -> Self {
        Self {
            n_users,
            n_items,
            triples: Vec::new(),
            rows: vec![Vec::new(); n_users],
            cols: vec![Vec::new(); n_items],
        }
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    /// Number of observed cells, `|Ω|`.
    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Observed fraction of the full grid.
    pub fn density(&self) -> f64 {
        let cells = self.n_users * self.n_items;
        if cells == 0 {
            0.0
        } else {
            self.len() as f64 / cells as f64
        }
    }

    pub fn triples(&self) -> &[Rating] {
        &self.triples
    }

    /// Observed `(item, rating)` pairs of one user, ascending by item.
    ///
    /// Panics when `u` is out of range; use [`items_of`](Self::items_of) for a
    /// checked query.
    pub fn row(&self, u: usize) -> &[(usize, f64)] {
        &self.rows[u]
    }

    /// Observed `(user, rating)` pairs of one item, ascending by user.
    pub fn col(&self, i: usize) -> &[(usize, f64)] {
        &self.cols[i]
    }

    pub fn items_of(&self, u: usize) -> Result<Vec<usize>> {
        self.check_user(u)?;
        Ok(self.rows[u].iter().map(|&(i, _)| i).collect())
    }

    pub fn users_of(&self, i: usize) -> Result<Vec<usize>> {
        self.check_item(i)?;
        Ok(self.cols[i].iter().map(|&(u, _)| u).collect())
    }

    pub fn get(&self, u: usize, i: usize) -> Option<f64> {
        let row = self.rows.get(u)?;
        row.binary_search_by_key(&i, |&(j, _)| j)
            .ok()
            .map(|k| row[k].1)
    }

    pub fn contains(&self, u: usize, i: usize) -> bool {
        self.get(u, i).is_some()
    }

    /// The index list of one user (`UserPair`) or one item (`ItemPair`).
    pub fn line(&self, kind: PairKind, id: usize) -> Result<&[(usize, f64)]> {
        match kind {
            PairKind::UserPair => {
                self.check_user(id)?;
                Ok(&self.rows[id])
            }
            PairKind::ItemPair => {
                self.check_item(id)?;
                Ok(&self.cols[id])
            }
        }
    }

    /// Co-observed indices of two users or two items. `a == b` returns the
    /// full index list.
    pub fn overlap(&self, kind: PairKind, a: usize, b: usize) -> Result<OverlapSet> {
        let la = self.line(kind, a)?;
        let lb = self.line(kind, b)?;
        Ok(OverlapSet {
            kind,
            ids: (a, b),
            members: co_observed(la, lb).map(|(t, _, _)| t).collect(),
        })
    }

    pub fn transpose(&self) -> Self {
        let mut triples: Vec<Rating> = self
            .triples
            .iter()
            .map(|t| Rating::new(t.item, t.user, t.value))
            .collect();
        triples.sort_by_key(Rating::cell);
        Self {
            n_users: self.n_items,
            n_items: self.n_users,
            triples,
            rows: self.cols.clone(),
            cols: self.rows.clone(),
        }
    }

    /// Keep the observations satisfying `keep`, same dimensions.
    pub fn filter<F>(&self, mut keep: F) -> Self
    where
        F: FnMut(&Rating) -> bool,
    {
        let kept: Vec<Rating> = self.triples.iter().copied().filter(|t| keep(t)).collect();
        Self::from_triples(kept, self.n_users, self.n_items)
            .expect("subset of valid ratings is valid")
    }

    /// Apply `f` to every rating value.
    pub fn map_values<F>(&self, f: F) -> Self
    where
        F: Fn(f64) -> f64,
    {
        let triples: Vec<Rating> = self
            .triples
            .iter()
            .map(|t| Rating::new(t.user, t.item, f(t.value)))
            .collect();
        Self::from_triples(triples, self.n_users, self.n_items)
            .expect("same keys as a valid matrix")
    }

    pub fn mean(&self) -> Option<f64> {
        if self.is_empty() {
            None
        } else {
            Some(self.triples.iter().map(|t| t.value).sum::<f64>() / self.len() as f64)
        }
    }

    pub(crate) fn check_user(&self, u: usize) -> Result<()> {
        if u < self.n_users {
            Ok(())
        } else {
            Err(Error::out_of_range("user", u, self.n_users))
        }
    }

    pub(crate) fn check_item(&self, i: usize) -> Result<()> {
        if i < self.n_items {
            Ok(())
        } else {
            Err(Error::out_of_range("item", i, self.n_items))
        }
    }

    pub(crate) fn check_cell(&self, u: usize, i: usize) -> Result<()> {
        self.check_user(u)?;
        self.check_item(i)
    }
}

/// Linear merge of two sorted index lists, yielding `(index, a_value, b_value)`
/// for every index present in both.
pub fn co_observed<'a>(a: &'a [(usize, f64)], b: &'a [(usize, f64)]) -> CoObserved<'a> {
    CoObserved { a, b, ia: 0, ib: 0 }
}

#[derive(Debug, Clone)]
pub struct CoObserved<'a> {
    a: &'a [(usize, f64)],
    b: &'a [(usize, f64)],
    ia: usize,
    ib: usize,
}

impl Iterator for CoObserved<'_> {
    type Item = (usize, f64, f64);

    fn next(&mut self) -> Option<Self::Item> {
        while self.ia < self.a.len() && self.ib < self.b.len() {
            let (ka, va) = self.a[self.ia];
            let (kb, vb) = self.b[self.ib];
            match ka.cmp(&kb) {
                std::cmp::Ordering::Less => self.ia += 1,
                std::cmp::Ordering::Greater => self.ib += 1,
                std::cmp::Ordering::Equal => {
                    self.ia += 1;
                    self.ib += 1;
                    return Some((ka, va, vb));
                }
            }
        }
        None
    }
}

//! Radial neighbor sets.
//!
//! For a target `(u, i)` the radial neighbors are every observed cell lying in
//! a row `v` with `|I_uv| >= β` or in a column `j` with `|U_ij| >= β`. The
//! target's own row and column qualify through their self-overlap. The target
//! cell itself is never a member.

use serde::{Deserialize, Serialize};

use crate::distance::{PairDistance, PairDistances};
use crate::error::{Error, Result};
use crate::ratings::{Cell, SparseRatings};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeighborMember {
    pub user: usize,
    pub item: usize,
    pub rating: f64,
    /// `d̂²(u, v)` when the row qualifies.
    pub user_sq_dist: Option<f64>,
    /// `d̂²(i, j)` when the column qualifies.
    pub item_sq_dist: Option<f64>,
}

impl NeighborMember {
    pub fn cell(&self) -> Cell {
        (self.user, self.item)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialNeighborSet {
    pub target: Cell,
    /// Sorted by `(user, item)`.
    pub members: Vec<NeighborMember>,
    pub beta: usize,
}

impl RadialNeighborSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Per-target qualification of every row and column.
pub(crate) struct Qualified {
    pub rows: Vec<Option<PairDistance>>,
    pub cols: Vec<Option<PairDistance>>,
}

pub(crate) fn qualify<D: PairDistances + ?Sized>(
    r: &SparseRatings,
    dm: &D,
    u: usize,
    i: usize,
) -> Qualified {
    Qualified {
        rows: (0..r.n_users()).map(|v| dm.user_distance(u, v)).collect(),
        cols: (0..r.n_items()).map(|j| dm.item_distance(i, j)).collect(),
    }
}

pub fn radial_neighbors<D: PairDistances + ?Sized>(
    r: &SparseRatings,
    dm: &D,
    u: usize,
    i: usize,
) -> Result<RadialNeighborSet> {
    r.check_cell(u, i)?;
    let q = qualify(r, dm, u, i);
    let members = r
        .triples()
        .iter()
        .filter(|t| t.cell() != (u, i))
        .filter_map(|t| {
            let user_sq_dist = q.rows[t.user].map(|d| d.sq_dist);
            let item_sq_dist = q.cols[t.item].map(|d| d.sq_dist);
            (user_sq_dist.is_some() || item_sq_dist.is_some()).then_some(NeighborMember {
                user: t.user,
                item: t.item,
                rating: t.value,
                user_sq_dist,
                item_sq_dist,
            })
        })
        .collect();
    Ok(RadialNeighborSet {
        target: (u, i),
        members,
        beta: dm.beta(),
    })
}

/// Size of the radial set without materializing it.
pub fn radial_neighbor_count<D: PairDistances + ?Sized>(
    r: &SparseRatings,
    dm: &D,
    u: usize,
    i: usize,
) -> Result<usize> {
    r.check_cell(u, i)?;
    let q = qualify(r, dm, u, i);
    Ok(r.triples()
        .iter()
        .filter(|t| t.cell() != (u, i))
        .filter(|t| q.rows[t.user].is_some() || q.cols[t.item].is_some())
        .count())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeighborCountStats {
    pub mean: f64,
    pub min: usize,
    pub max: usize,
    /// Observed fraction `|Ω| / (n·m)`.
    pub p_obs: f64,
    /// `mean / (n·m·p_obs²)`; zero when nothing is observed.
    pub mean_ratio: f64,
}

pub fn neighbor_count_stats<D: PairDistances + ?Sized>(
    r: &SparseRatings,
    dm: &D,
    sample: &[Cell],
) -> Result<NeighborCountStats> {
    if sample.is_empty() {
        return Err(Error::EmptyInput);
    }
    let counts = sample
        .iter()
        .map(|&(u, i)| radial_neighbor_count(r, dm, u, i))
        .collect::<Result<Vec<_>>>()?;
    let mean = counts.iter().sum::<usize>() as f64 / counts.len() as f64;
    let p_obs = r.density();
    let scale = (r.n_users() * r.n_items()) as f64 * p_obs * p_obs;
    Ok(NeighborCountStats {
        mean,
        min: *counts.iter().min().expect("nonempty"),
        max: *counts.iter().max().expect("nonempty"),
        p_obs,
        mean_ratio: if scale > 0.0 { mean / scale } else { 0.0 },
    })
}

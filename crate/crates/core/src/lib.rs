//! Matrix completion by radial neighborhood kernel smoothing.
//!
//! Distances between users (items) are estimated from their co-observed
//! ratings and debiased by a noise-variance estimate. Each missing entry is
//! predicted as a kernel-weighted average over every observed cell in a row
//! or column that overlaps the target's row or column.
//!
//! ```
//! use rne_core::ratings::SparseRatings;
//! use rne_core::rne::{Bandwidths, RneConfig, RneModel};
//!
//! let r = SparseRatings::from_triples(
//!     [(0, 0, 1.0), (0, 1, 2.0), (1, 0, 1.5), (1, 1, 2.5), (1, 2, 3.0)],
//!     2,
//!     3,
//! )
//! .unwrap();
//! let model = RneModel::fit(&r, &RneConfig::default()).unwrap();
//! let p = model.predict(0, 2, Bandwidths::new(1.0, 1.0).unwrap()).unwrap();
//! assert!(p.value.is_some());
//! ```

pub mod baselines;
pub mod cv;
pub mod distance;
pub mod error;
pub mod experiment;
pub mod neighbors;
pub mod oracle;
pub mod ratings;
pub mod metrics;
pub mod rne;
pub mod simulation;
mod svd;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};

/// Order-preserving map, parallel when the `parallel` feature is on.
pub(crate) fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

//! Ground-truth distances for validation against a known factorization.
//!
//! Only meaningful for simulated data where the complete noiseless matrix is
//! available.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::ratings::PairKind;

/// SVD scores of a complete matrix: `x_u = P_(u) Θ`, `y_i = Θ Q_iᵀ`.
#[derive(Debug, Clone)]
pub struct LatentOracle {
    pub z: DMatrix<f64>,
    pub a_full: DMatrix<f64>,
    /// `n x k`, row `u` is `x_u`.
    pub x: DMatrix<f64>,
    /// `k x m`, column `i` is `y_i`.
    pub y: DMatrix<f64>,
    /// Leading singular values, descending.
    pub singulars: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleDistances {
    /// Latent-score distance.
    pub d: f64,
    /// Distance between rows (columns) of the noiseless matrix.
    pub d_star: f64,
    /// Distance between rows (columns) of the complete noisy matrix.
    pub d_tilde: f64,
}

impl LatentOracle {
    /// Scores from the leading `rank` singular triplets of `z`.
    pub fn new(z: DMatrix<f64>, a_full: DMatrix<f64>, rank: usize) -> Result<Self> {
        if z.shape() != a_full.shape() {
            return Err(Error::InvalidShape("z and a_full differ in shape".into()));
        }
        let rank = rank.min(z.nrows().min(z.ncols()));
        let (p, s, q) = crate::svd::thin_svd(&z)?;
        let rank = rank.min(s.len());
        let mut x = p.columns(0, rank).into_owned();
        let mut y = q.columns(0, rank).transpose();
        for (l, &c) in s.iter().take(rank).enumerate() {
            x.column_mut(l).scale_mut(c);
            y.row_mut(l).scale_mut(c);
        }
        let singulars = s[..rank].to_vec();
        Ok(Self {
            z,
            a_full,
            x,
            y,
            singulars,
        })
    }

    /// `z_{u,i} = Σ_l x_{u,l} y_{l,i} / c_l`.
    pub fn g(&self, u: usize, i: usize) -> f64 {
        self.singulars
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0.0)
            .map(|(l, &c)| self.x[(u, l)] * self.y[(l, i)] / c)
            .sum()
    }

    pub fn distances(&self, kind: PairKind, a: usize, b: usize) -> OracleDistances {
        match kind {
            PairKind::UserPair => {
                let scale = (self.z.ncols() as f64).sqrt();
                OracleDistances {
                    d: (self.x.row(a) - self.x.row(b)).norm() / scale,
                    d_star: (self.z.row(a) - self.z.row(b)).norm() / scale,
                    d_tilde: (self.a_full.row(a) - self.a_full.row(b)).norm() / scale,
                }
            }
            PairKind::ItemPair => {
                let scale = (self.z.nrows() as f64).sqrt();
                OracleDistances {
                    d: (self.y.column(a) - self.y.column(b)).norm() / scale,
                    d_star: (self.z.column(a) - self.z.column(b)).norm() / scale,
                    d_tilde: (self.a_full.column(a) - self.a_full.column(b)).norm() / scale,
                }
            }
        }
    }
}

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Per-user mean rating over stored entries.
#[derive(Debug, Clone, PartialEq)]
pub struct UserStats {
    means: Vec<Option<f64>>,
    counts: Vec<usize>,
}

impl UserStats {
    /// `None` for users without ratings.
    pub fn mean(&self, user: usize) -> Option<f64> {
        self.means[user]
    }

    pub fn count(&self, user: usize) -> usize {
        self.counts[user]
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }
}

pub fn user_means(ratings: &CsrMatrix) -> UserStats {
    let mut means = Vec::with_capacity(ratings.rows());
    let mut counts = Vec::with_capacity(ratings.rows());
    for u in 0..ratings.rows() {
        let (_, vals) = ratings.row(u);
        counts.push(vals.len());
        means.push(if vals.is_empty() {
            None
        } else {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        });
    }
    UserStats { means, counts }
}

/// Where a rating exactly equal to the user's mean goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TiePolicy {
    #[default]
    Positive,
    Negative,
}

/// Ratings split into at-or-above-mean (positive) and below-mean (negative)
/// edges, each weighted by `2^(delta * |r - mean|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedSplit {
    pub positive: CsrMatrix,
    pub negative: CsrMatrix,
    pub delta: f64,
}

/// Edge weight for a centered rating.
pub fn reweigh(centered: f64, delta: f64) -> f64 {
    libm::exp2(delta * libm::fabs(centered))
}

pub fn split_and_reweigh(
    ratings: &CsrMatrix,
    stats: &UserStats,
    delta: f64,
    tie: TiePolicy,
) -> Result<SignedSplit> {
    if !delta.is_finite() || delta < 0.0 {
        return Err(Error::InvalidParameter(alloc::format!("delta must be a finite value >= 0, got {delta}")));
    }
    if stats.len() != ratings.rows() {
        return Err(Error::DimensionMismatch { what: "user stats", expected: ratings.rows(), found: stats.len() });
    }
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (u, m, r) in ratings.iter() {
        // A stored rating implies the user has a mean.
        let mean = stats.mean(u).unwrap();
        let centered = r - mean;
        let w = reweigh(centered, delta);
        let positive = match tie {
            TiePolicy::Positive => centered >= 0.0,
            TiePolicy::Negative => centered > 0.0,
        };
        if positive {
            pos.push((u, m, w));
        } else {
            neg.push((u, m, w));
        }
    }
    Ok(SignedSplit {
        positive: CsrMatrix::from_triplets(ratings.rows(), ratings.cols(), pos)?,
        negative: CsrMatrix::from_triplets(ratings.rows(), ratings.cols(), neg)?,
        delta,
    })
}

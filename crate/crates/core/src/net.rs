//! Online r-nets over a growing point set.
//!
//! A set of centers `C` is an r-net of `X` when every point of `X` lies within
//! `r` of some center (covering) and distinct centers are more than `r` apart
//! (packing). Feeding points one at a time through [`Net::increase`] keeps
//! that property for the set of points fed so far.

use thiserror::Error;

use crate::metric::{MetricSpace, PointId};
use crate::oracle::{mst_weight, OracleError};

#[derive(Debug, Clone, PartialEq)]
pub struct Net {
    centers: Vec<PointId>,
    radius: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetError {
    #[error("centers are not an r-net of the given set")]
    NotVerified,
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

impl Net {
    pub fn new(radius: f64) -> Self {
        assert!(radius >= 0.0, "net radius must be non-negative");
        Net {
            centers: Vec::new(),
            radius,
        }
    }

    pub fn with_centers(centers: Vec<PointId>, radius: f64) -> Self {
        Net {
            centers,
            ..Net::new(radius)
        }
    }

    pub fn centers(&self) -> &[PointId] {
        &self.centers
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Drops all centers and restarts from `{x}` with a new radius.
    pub fn reset(&mut self, x: PointId, radius: f64) {
        self.centers.clear();
        self.centers.push(x);
        self.radius = radius;
    }

    /// Index of the first center (in insertion order) within `r` of `x`.
    pub fn find_cover(&self, x: PointId, space: &MetricSpace) -> Option<usize> {
        self.centers
            .iter()
            .position(|&c| space.le(space.dist(x, c), self.radius))
    }

    /// Covers `x`, inserting it as a new center when no center is within `r`.
    /// Returns the index of the covering center and whether `x` was inserted.
    pub fn cover_or_insert(&mut self, x: PointId, space: &MetricSpace) -> (usize, bool) {
        match self.find_cover(x, space) {
            Some(i) => (i, false),
            None => {
                self.centers.push(x);
                (self.centers.len() - 1, true)
            }
        }
    }

    /// Adds `x` as a center iff no existing center is within distance `r`.
    pub fn increase(&mut self, x: PointId, space: &MetricSpace) -> bool {
        self.cover_or_insert(x, space).1
    }

    fn packs(&self, space: &MetricSpace) -> bool {
        self.centers.iter().enumerate().all(|(i, &c)| {
            self.centers[i + 1..]
                .iter()
                .all(|&c2| !space.le(space.dist(c, c2), self.radius))
        })
    }

    /// True iff the centers cover every point of `set` within `r` and are
    /// pairwise more than `r` apart.
    pub fn verify(&self, set: &[PointId], space: &MetricSpace) -> bool {
        set.iter().all(|&x| self.find_cover(x, space).is_some()) && self.packs(space)
    }

    /// `2 MST(set) - (|C| - 1) r`, which is non-negative for any r-net of `set`.
    pub fn size_slack(&self, set: &[PointId], space: &MetricSpace) -> Result<f64, NetError> {
        if !self.verify(set, space) {
            return Err(NetError::NotVerified);
        }
        let mst = mst_weight(space, set)?;
        Ok(2.0 * mst - (self.centers.len() as f64 - 1.0) * self.radius)
    }
}

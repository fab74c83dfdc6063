//! Online placers.
//!
//! A placer is created for an array of length `n` and then receives points one
//! at a time; each call returns a previously unused cell. Decisions depend only
//! on the points received so far.

mod fmb;
mod leftmost;
mod rfmb;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fmb::{block_lengths, fill_most_blocks, FillMostBlocks, FmbSummary};
pub use leftmost::{leftmost_baseline, Leftmost};
pub use rfmb::{recursively_fill_most_blocks, RecursiveFillMostBlocks};

use crate::array::ArrayError;
use crate::metric::{MetricError, MetricSpace, PointId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlacerError {
    #[error("placer accepts {capacity} points and has already placed them all")]
    Exhausted { capacity: usize },
    #[error("stream has {got} points, expected {expected}")]
    StreamLength { expected: usize, got: usize },
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Array(#[from] ArrayError),
}

/// A net reset inside one Fill-Most-Blocks pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResetEvent {
    /// Recursion level (0 for the outermost pass).
    pub level: usize,
    /// Number of points this pass had placed before the triggering point.
    pub step: usize,
    /// MST weight of the pass's received points, including the trigger.
    pub mst: f64,
    /// MST weight recorded at the previous reset of the same pass (0 at the first).
    pub previous_mst: f64,
    /// The new net radius.
    pub radius: f64,
}

impl ResetEvent {
    /// Whether the MST at least doubled since the previous reset, with
    /// relative slack `tol`.
    pub fn doubled(&self, tol: f64) -> bool {
        self.mst >= 2.0 * self.previous_mst * (1.0 - tol)
    }
}

pub trait OnlinePlacer {
    fn name(&self) -> &'static str;

    /// Number of points the placer accepts.
    fn capacity(&self) -> usize;

    /// Chooses the cell for `x`.
    fn next(&mut self, x: PointId, space: &MetricSpace) -> Result<usize, PlacerError>;

    fn resets(&self) -> Vec<ResetEvent> {
        Vec::new()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PlacerKind {
    #[serde(rename = "rfmb")]
    Rfmb,
    #[serde(rename = "fmb-half")]
    FmbHalf,
    #[serde(rename = "leftmost")]
    Leftmost,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown algorithm {0:?} (expected rfmb, fmb-half or leftmost)")]
pub struct UnknownPlacer(pub String);

impl PlacerKind {
    pub const ALL: [PlacerKind; 3] = [PlacerKind::Rfmb, PlacerKind::FmbHalf, PlacerKind::Leftmost];

    pub fn as_str(self) -> &'static str {
        match self {
            PlacerKind::Rfmb => "rfmb",
            PlacerKind::FmbHalf => "fmb-half",
            PlacerKind::Leftmost => "leftmost",
        }
    }

    pub fn build(self, n: usize) -> Box<dyn OnlinePlacer + Send> {
        match self {
            PlacerKind::Rfmb => Box::new(RecursiveFillMostBlocks::new(n)),
            PlacerKind::FmbHalf => Box::new(FillMostBlocks::new(n)),
            PlacerKind::Leftmost => Box::new(Leftmost::new(n)),
        }
    }
}

impl FromStr for PlacerKind {
    type Err = UnknownPlacer;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PlacerKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| UnknownPlacer(s.to_string()))
    }
}

impl fmt::Display for PlacerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn check_stream(
    space: &MetricSpace,
    stream: &[PointId],
    expected: usize,
) -> Result<(), PlacerError> {
    if stream.len() != expected {
        return Err(PlacerError::StreamLength {
            expected,
            got: stream.len(),
        });
    }
    for &x in stream {
        space.check(x)?;
    }
    Ok(())
}

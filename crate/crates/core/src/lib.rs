//! Online metric TSP.
//!
//! Points of a metric space arrive one at a time and must be written
//! immediately and irrevocably into empty cells of a length-n array; the cost
//! is the total distance between neighbouring cells. This crate provides the
//! O(√n)-competitive block-filling placer ([`placer::RecursiveFillMostBlocks`])
//! for arbitrary metrics, the offline oracles used to measure it, adversarial
//! and random workloads, and an experiment harness.

pub mod adversary;
pub mod array;
pub mod harness;
pub mod instance;
pub mod metric;
pub mod net;
pub mod oracle;
pub mod placer;
pub mod rng;

pub use array::{CellView, PlacementArray};
pub use metric::{MetricSpace, MetricSpaceSpec, PointId};
pub use oracle::TourBounds;
pub use placer::{OnlinePlacer, PlacerKind};

//! JSON instance files.
//!
//! ```json
//! { "kind": "euclidean", "dim": 2, "points": [[0, 0], [3, 4]], "stream": [1, 0] }
//! { "kind": "uniform", "points": ["a", "b", "a"] }
//! { "kind": "matrix", "matrix": [[0, 2], [2, 0]] }
//! ```
//!
//! `stream` is optional and defaults to point-table order. Uniform instances
//! may carry a `weights` array (see [`crate::metric`]). Generated instances add
//! a free-form `meta` object.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{MetricError, MetricSpace, MetricSpaceSpec, PointId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InstanceSpace {
    Euclidean {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
        points: Vec<Vec<f64>>,
    },
    Uniform {
        points: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
    Matrix {
        matrix: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        points: Option<Vec<usize>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    #[serde(flatten)]
    pub space: InstanceSpace,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stream: Option<Vec<PointId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// A loaded instance: the space plus the arrival order.
#[derive(Debug)]
pub struct Instance {
    pub space: MetricSpace,
    pub stream: Vec<PointId>,
    pub meta: Option<serde_json::Value>,
}

impl InstanceFile {
    pub fn from_space(
        space: &MetricSpace,
        stream: Option<Vec<PointId>>,
        meta: Option<serde_json::Value>,
    ) -> Self {
        let space = match space.to_spec() {
            MetricSpaceSpec::Euclidean { dim, points } => InstanceSpace::Euclidean {
                dim: Some(dim),
                points,
            },
            MetricSpaceSpec::Uniform { labels, weights } => InstanceSpace::Uniform {
                points: labels,
                weights,
            },
            MetricSpaceSpec::Matrix { matrix, rows, .. } => {
                let identity = rows
                    .as_ref()
                    .is_some_and(|r| r.iter().copied().eq(0..matrix.len()));
                InstanceSpace::Matrix {
                    matrix,
                    points: if identity { None } else { rows },
                }
            }
        };
        InstanceFile {
            space,
            stream,
            meta,
        }
    }

    pub fn to_spec(&self, validate_matrix: bool) -> MetricSpaceSpec {
        match &self.space {
            InstanceSpace::Euclidean { dim, points } => MetricSpaceSpec::Euclidean {
                dim: dim.unwrap_or_else(|| points.first().map_or(0, Vec::len)),
                points: points.clone(),
            },
            InstanceSpace::Uniform { points, weights } => MetricSpaceSpec::Uniform {
                labels: points.clone(),
                weights: weights.clone(),
            },
            InstanceSpace::Matrix { matrix, points } => MetricSpaceSpec::Matrix {
                matrix: matrix.clone(),
                rows: points.clone(),
                validate: validate_matrix,
            },
        }
    }

    /// Builds the space and checks every stream id against it.
    pub fn load(self, validate_matrix: bool) -> Result<Instance, InstanceError> {
        let space = MetricSpace::build(self.to_spec(validate_matrix))?;
        let stream = match self.stream {
            Some(s) => {
                for &p in &s {
                    space.check(p)?;
                }
                s
            }
            None => space.ids().collect(),
        };
        Ok(Instance {
            space,
            stream,
            meta: self.meta,
        })
    }

    pub fn parse(text: &str) -> Result<Self, InstanceError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self, InstanceError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serialization cannot fail")
    }
}

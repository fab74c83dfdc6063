//! Random metric spaces and streams for property suites.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::metric::{MetricSpace, MetricSpaceSpec, PointId};

/// Families of random spaces used by the verification suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// Unit-cube points, occasionally snapped to a coarse grid so that
    /// duplicates and ties occur.
    Euclidean {
        dim: usize,
    },
    Uniform,
    /// Shortest-path closure of random integer edge weights.
    Matrix,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Euclidean { dim: 1 },
        Family::Euclidean { dim: 2 },
        Family::Euclidean { dim: 3 },
        Family::Uniform,
        Family::Matrix,
    ];

    pub fn pick(rng: &mut impl Rng) -> Family {
        Family::ALL[rng.gen_range(0..Family::ALL.len())]
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Euclidean { dim } => write!(f, "euclidean:{dim}"),
            Family::Uniform => f.write_str("uniform"),
            Family::Matrix => f.write_str("matrix"),
        }
    }
}

/// A valid distance matrix: random weights in `1..=max_weight` closed under
/// shortest paths, so the triangle inequality holds exactly.
pub fn random_metric_matrix(k: usize, max_weight: u32, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0u64; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let w = u64::from(rng.gen_range(1..=max_weight));
            d[i][j] = w;
            d[j][i] = w;
        }
    }
    for m in 0..k {
        for i in 0..k {
            for j in 0..k {
                let via = d[i][m] + d[m][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d.into_iter()
        .map(|row| row.into_iter().map(|w| w as f64).collect())
        .collect()
}

/// A random space of `k ≥ 1` points from `family`.
pub fn random_space(family: Family, k: usize, rng: &mut impl Rng) -> MetricSpace {
    let spec = match family {
        Family::Euclidean { dim } => {
            let grid = rng.gen_bool(0.25);
            let coord = |rng: &mut _| {
                let x: f64 = Rng::gen(rng);
                if grid {
                    (x * 4.0).floor() / 4.0
                } else {
                    x
                }
            };
            MetricSpaceSpec::Euclidean {
                dim,
                points: (0..k)
                    .map(|_| (0..dim).map(|_| coord(rng)).collect())
                    .collect(),
            }
        }
        Family::Uniform => MetricSpaceSpec::Uniform {
            labels: (0..k).map(|i| format!("l{i}")).collect(),
            weights: None,
        },
        Family::Matrix => MetricSpaceSpec::Matrix {
            matrix: random_metric_matrix(k, 10, rng),
            rows: None,
            validate: false,
        },
    };
    MetricSpace::build(spec).expect("generated spaces are valid")
}

/// `len` points drawn with replacement from `space`.
pub fn random_ids(space: &MetricSpace, len: usize, rng: &mut impl Rng) -> Vec<PointId> {
    (0..len)
        .map(|_| PointId::from(rng.gen_range(0..space.len())))
        .collect()
}

/// A space from a random family with `len` arrivals drawn from it. The space
/// has between `len / 2` and `len` points (at least one), so repeats occur.
pub fn random_instance(len: usize, rng: &mut impl Rng) -> (Family, MetricSpace, Vec<PointId>) {
    let family = Family::pick(rng);
    let k = rng.gen_range(len.div_ceil(2)..=len).max(1);
    let space = random_space(family, k, rng);
    let ids = random_ids(&space, len, rng);
    (family, space, ids)
}

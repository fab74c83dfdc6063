//! Finite metric spaces with a memoizing distance oracle.
//!
//! Three kinds of space are supported:
//!
//! * `Euclidean(dim)`: points are coordinate vectors, distance is the L2 norm.
//! * `Uniform`: points carry opaque labels; distinct labels are at distance 1.
//!   An optional per-point weight `w` generalises this to
//!   `d(p, q) = max(w_p, w_q)` for distinct points, which is still a metric
//!   (an ultrametric) and lets a single far point sit at distance `D` from a
//!   uniform cluster without materialising a matrix.
//! * `Matrix`: points index rows of an explicit symmetric distance matrix.
//!
//! Several point ids may refer to equal point data; such ids are at distance 0
//! and collapse to a single canonical id for the offline oracles.

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative tolerance used when comparing Euclidean lengths against thresholds.
pub const REL_TOL: f64 = 1e-9;

/// Spaces with more points than this are never memoized; the triangular cache
/// would otherwise grow quadratically.
pub const MEMO_MAX_POINTS: usize = 2048;

/// Index of a point in a space's point table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointId(pub u32);

impl PointId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for PointId {
    fn from(i: usize) -> Self {
        PointId(u32::try_from(i).expect("point index exceeds u32"))
    }
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

/// The payload behind a [`PointId`].
#[derive(Debug, Clone, PartialEq)]
pub enum PointData {
    Coords(Vec<f64>),
    Label(String),
    Row(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum MetricKind {
    Euclidean { dim: usize },
    Uniform,
    Matrix,
}

/// Construction input for [`MetricSpace::build`].
#[derive(Debug, Clone, PartialEq)]
pub enum MetricSpaceSpec {
    Euclidean {
        dim: usize,
        points: Vec<Vec<f64>>,
    },
    Uniform {
        labels: Vec<String>,
        /// Optional per-point weights; `None` is the plain uniform metric.
        weights: Option<Vec<f64>>,
    },
    Matrix {
        matrix: Vec<Vec<f64>>,
        /// Row referenced by each point; `None` means one point per row.
        rows: Option<Vec<usize>>,
        /// Run the cubic triangle-inequality check before accepting.
        validate: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("point {index} has {got} coordinates, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("point {index} has a non-finite coordinate")]
    NonFiniteCoordinate { index: usize },
    #[error("matrix row {row} has length {len}, expected {expected}")]
    NotSquare {
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("matrix is asymmetric at ({i}, {j}): {a} != {b}")]
    Asymmetric { i: usize, j: usize, a: f64, b: f64 },
    #[error("matrix entry ({i}, {j}) = {value} is negative or not finite")]
    NegativeEntry { i: usize, j: usize, value: f64 },
    #[error("matrix diagonal entry {i} = {value} is nonzero")]
    NonzeroDiagonal { i: usize, value: f64 },
    #[error("matrix fails the metric axioms: {0}")]
    NotAMetric(ValidationReport),
    #[error("point {index} references row {row}, but the matrix has {size} rows")]
    RowOutOfRange {
        index: usize,
        row: usize,
        size: usize,
    },
    #[error("weights has length {got}, expected {expected}")]
    WeightCount { expected: usize, got: usize },
    #[error("weight {value} of point {index} must be positive and finite")]
    InvalidWeight { index: usize, value: f64 },
    #[error("label {label:?} is given inconsistent weights")]
    InconsistentWeight { label: String },
    #[error("too many points ({0}); point ids are 32-bit")]
    TooManyPoints(usize),
    #[error("unknown point id {id} (space has {len} points)")]
    UnknownPoint { id: PointId, len: usize },
}

/// One violated metric axiom, with its witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "axiom")]
pub enum Violation {
    NotSquare {
        row: usize,
        len: usize,
    },
    NonzeroDiagonal {
        i: usize,
        value: f64,
    },
    Negative {
        i: usize,
        j: usize,
        value: f64,
    },
    Asymmetric {
        i: usize,
        j: usize,
    },
    Triangle {
        i: usize,
        j: usize,
        k: usize,
        direct: f64,
        via: f64,
    },
}

/// Result of [`validate_matrix_metric`]; empty means the matrix is a metric.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.violations.first() {
            None => write!(f, "no violations"),
            Some(v) => write!(f, "{} violation(s), first: {:?}", self.violations.len(), v),
        }
    }
}

/// Checks every metric axiom of a square matrix and reports each violation.
///
/// Triangle checks are made for unordered pairs `i < k` through every other
/// `j`, with relative slack [`REL_TOL`] so that matrices computed in floating
/// point from genuine metrics are not rejected for rounding.
pub fn validate_matrix_metric(matrix: &[Vec<f64>]) -> ValidationReport {
    let m = matrix.len();
    let mut violations = Vec::new();
    for (row, r) in matrix.iter().enumerate() {
        if r.len() != m {
            violations.push(Violation::NotSquare { row, len: r.len() });
        }
    }
    if !violations.is_empty() {
        return ValidationReport { violations };
    }
    for i in 0..m {
        if matrix[i][i] != 0.0 {
            violations.push(Violation::NonzeroDiagonal {
                i,
                value: matrix[i][i],
            });
        }
        for j in 0..m {
            let v = matrix[i][j];
            if !(v >= 0.0) || !v.is_finite() {
                violations.push(Violation::Negative { i, j, value: v });
            }
            if i < j && matrix[i][j] != matrix[j][i] {
                violations.push(Violation::Asymmetric { i, j });
            }
        }
    }
    for i in 0..m {
        for k in (i + 1)..m {
            let direct = matrix[i][k];
            for j in 0..m {
                if j == i || j == k {
                    continue;
                }
                let via = matrix[i][j] + matrix[j][k];
                if direct > via * (1.0 + REL_TOL) {
                    violations.push(Violation::Triangle {
                        i,
                        j,
                        k,
                        direct,
                        via,
                    });
                }
            }
        }
    }
    ValidationReport { violations }
}

/// Euclidean distance between two coordinate slices of equal length.
#[inline]
pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Triangular distance cache keyed by unordered id pairs.
///
/// Entries store the bitwise complement of the distance bits so that a zeroed
/// cell means "absent". Inserts are idempotent: every writer stores the same
/// value for the same key.
struct DistanceCache {
    points: usize,
    cells: OnceLock<Box<[AtomicU64]>>,
}

impl DistanceCache {
    fn new(points: usize) -> Self {
        DistanceCache {
            points,
            cells: OnceLock::new(),
        }
    }

    #[inline]
    fn slot(lo: usize, hi: usize) -> usize {
        hi * (hi - 1) / 2 + lo
    }

    fn table(&self) -> &[AtomicU64] {
        self.cells.get_or_init(|| {
            let len = self.points * self.points.saturating_sub(1) / 2;
            (0..len).map(|_| AtomicU64::new(0)).collect()
        })
    }

    #[inline]
    fn get_or_insert(&self, lo: usize, hi: usize, compute: impl FnOnce() -> f64) -> f64 {
        let cell = &self.table()[Self::slot(lo, hi)];
        let raw = cell.load(Ordering::Relaxed);
        if raw != 0 {
            return f64::from_bits(!raw);
        }
        let d = compute();
        cell.store(!d.to_bits(), Ordering::Relaxed);
        d
    }
}

enum Repr {
    Euclidean {
        dim: usize,
        coords: Vec<f64>,
    },
    Uniform {
        label_of: Vec<u32>,
        labels: Vec<String>,
        weight_of_label: Option<Vec<f64>>,
    },
    Matrix {
        size: usize,
        entries: Vec<f64>,
        row_of: Vec<u32>,
    },
}

/// An immutable finite metric space. Shareable across threads.
pub struct MetricSpace {
    repr: Repr,
    /// Canonical (smallest) id with the same point data, per point.
    class_of: Vec<u32>,
    cache: Option<DistanceCache>,
}

impl fmt::Debug for MetricSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricSpace")
            .field("kind", &self.kind())
            .field("points", &self.len())
            .field("memoized", &self.cache.is_some())
            .finish()
    }
}

fn check_count(n: usize) -> Result<(), MetricError> {
    if n > u32::MAX as usize {
        return Err(MetricError::TooManyPoints(n));
    }
    Ok(())
}

impl MetricSpace {
    /// Builds a space, rejecting inconsistent point data and non-metric matrices.
    /// The space with no points.
    pub fn empty() -> Self {
        Self::build(MetricSpaceSpec::Uniform {
            labels: Vec::new(),
            weights: None,
        })
        .expect("the empty space is valid")
    }

    pub fn build(spec: MetricSpaceSpec) -> Result<Self, MetricError> {
        let (repr, class_of) = match spec {
            MetricSpaceSpec::Euclidean { dim, points } => {
                check_count(points.len())?;
                let mut coords = Vec::with_capacity(points.len() * dim);
                let mut class_of = Vec::with_capacity(points.len());
                let mut seen: HashMap<Vec<u64>, u32> = HashMap::new();
                for (index, p) in points.iter().enumerate() {
                    if p.len() != dim {
                        return Err(MetricError::DimensionMismatch {
                            index,
                            expected: dim,
                            got: p.len(),
                        });
                    }
                    if p.iter().any(|c| !c.is_finite()) {
                        return Err(MetricError::NonFiniteCoordinate { index });
                    }
                    // `+ 0.0` folds -0.0 into 0.0 so equal points share a key.
                    let key: Vec<u64> = p.iter().map(|c| (c + 0.0).to_bits()).collect();
                    let class = *seen.entry(key).or_insert(index as u32);
                    class_of.push(class);
                    coords.extend(p.iter().map(|c| c + 0.0));
                }
                (Repr::Euclidean { dim, coords }, class_of)
            }
            MetricSpaceSpec::Uniform { labels, weights } => {
                check_count(labels.len())?;
                if let Some(w) = &weights {
                    if w.len() != labels.len() {
                        return Err(MetricError::WeightCount {
                            expected: labels.len(),
                            got: w.len(),
                        });
                    }
                }
                let mut interned: HashMap<&str, u32> = HashMap::new();
                let mut distinct: Vec<String> = Vec::new();
                let mut label_of = Vec::with_capacity(labels.len());
                let mut class_of = Vec::with_capacity(labels.len());
                let mut first_of_label: Vec<u32> = Vec::new();
                let mut weight_of_label: Vec<f64> = Vec::new();
                for (index, label) in labels.iter().enumerate() {
                    let w = weights.as_ref().map(|w| w[index]);
                    if let Some(w) = w {
                        if !(w > 0.0) || !w.is_finite() {
                            return Err(MetricError::InvalidWeight { index, value: w });
                        }
                    }
                    let id = match interned.get(label.as_str()) {
                        Some(&id) => {
                            if let Some(w) = w {
                                if weight_of_label[id as usize] != w {
                                    return Err(MetricError::InconsistentWeight {
                                        label: label.clone(),
                                    });
                                }
                            }
                            id
                        }
                        None => {
                            let id = distinct.len() as u32;
                            interned.insert(label.as_str(), id);
                            distinct.push(label.clone());
                            first_of_label.push(index as u32);
                            weight_of_label.push(w.unwrap_or(1.0));
                            id
                        }
                    };
                    label_of.push(id);
                    class_of.push(first_of_label[id as usize]);
                }
                let weight_of_label = weights.map(|_| weight_of_label);
                (
                    Repr::Uniform {
                        label_of,
                        labels: distinct,
                        weight_of_label,
                    },
                    class_of,
                )
            }
            MetricSpaceSpec::Matrix {
                matrix,
                rows,
                validate,
            } => {
                let size = matrix.len();
                for (row, r) in matrix.iter().enumerate() {
                    if r.len() != size {
                        return Err(MetricError::NotSquare {
                            row,
                            len: r.len(),
                            expected: size,
                        });
                    }
                }
                for i in 0..size {
                    if matrix[i][i] != 0.0 {
                        return Err(MetricError::NonzeroDiagonal {
                            i,
                            value: matrix[i][i],
                        });
                    }
                    for j in 0..size {
                        let v = matrix[i][j];
                        if !(v >= 0.0) || !v.is_finite() {
                            return Err(MetricError::NegativeEntry { i, j, value: v });
                        }
                        if j > i && v != matrix[j][i] {
                            return Err(MetricError::Asymmetric {
                                i,
                                j,
                                a: v,
                                b: matrix[j][i],
                            });
                        }
                    }
                }
                if validate {
                    let report = validate_matrix_metric(&matrix);
                    if !report.is_valid() {
                        return Err(MetricError::NotAMetric(report));
                    }
                }
                let rows = rows.unwrap_or_else(|| (0..size).collect());
                check_count(rows.len())?;
                // Rows at distance 0 from an earlier row denote the same point.
                let mut row_class = vec![0usize; size];
                for i in 0..size {
                    row_class[i] = (0..i)
                        .find(|&j| matrix[i][j] == 0.0)
                        .map_or(i, |j| row_class[j]);
                }
                let mut first_of_row_class: HashMap<usize, u32> = HashMap::new();
                let mut row_of = Vec::with_capacity(rows.len());
                let mut class_of = Vec::with_capacity(rows.len());
                for (index, &row) in rows.iter().enumerate() {
                    if row >= size {
                        return Err(MetricError::RowOutOfRange { index, row, size });
                    }
                    row_of.push(row as u32);
                    class_of.push(
                        *first_of_row_class
                            .entry(row_class[row])
                            .or_insert(index as u32),
                    );
                }
                let entries = matrix.into_iter().flatten().collect();
                (
                    Repr::Matrix {
                        size,
                        entries,
                        row_of,
                    },
                    class_of,
                )
            }
        };
        let memo = matches!(repr, Repr::Euclidean { .. }) && class_of.len() <= MEMO_MAX_POINTS;
        let points = class_of.len();
        Ok(MetricSpace {
            repr,
            class_of,
            cache: memo.then(|| DistanceCache::new(points)),
        })
    }

    /// Turns the distance cache on or off. Results are identical either way.
    pub fn with_memo(mut self, enabled: bool) -> Self {
        self.cache =
            (enabled && self.len() <= MEMO_MAX_POINTS).then(|| DistanceCache::new(self.len()));
        self
    }

    pub fn is_memoized(&self) -> bool {
        self.cache.is_some()
    }

    pub fn len(&self) -> usize {
        self.class_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class_of.is_empty()
    }

    pub fn kind(&self) -> MetricKind {
        match &self.repr {
            Repr::Euclidean { dim, .. } => MetricKind::Euclidean { dim: *dim },
            Repr::Uniform { .. } => MetricKind::Uniform,
            Repr::Matrix { .. } => MetricKind::Matrix,
        }
    }

    pub fn ids(&self) -> impl Iterator<Item = PointId> {
        (0..self.len() as u32).map(PointId)
    }

    pub fn contains(&self, p: PointId) -> bool {
        p.index() < self.len()
    }

    pub fn check(&self, p: PointId) -> Result<(), MetricError> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(MetricError::UnknownPoint {
                id: p,
                len: self.len(),
            })
        }
    }

    pub fn point_data(&self, p: PointId) -> Result<PointData, MetricError> {
        self.check(p)?;
        let i = p.index();
        Ok(match &self.repr {
            Repr::Euclidean { dim, coords } => {
                PointData::Coords(coords[i * dim..(i + 1) * dim].to_vec())
            }
            Repr::Uniform {
                label_of, labels, ..
            } => PointData::Label(labels[label_of[i] as usize].clone()),
            Repr::Matrix { row_of, .. } => PointData::Row(row_of[i] as usize),
        })
    }

    /// Uniform-kind weight of a point (1 for the plain uniform metric).
    pub fn weight(&self, p: PointId) -> Option<f64> {
        match &self.repr {
            Repr::Uniform {
                label_of,
                weight_of_label,
                ..
            } => Some(
                weight_of_label
                    .as_ref()
                    .map_or(1.0, |w| w[label_of[p.index()] as usize]),
            ),
            _ => None,
        }
    }

    /// The smallest id carrying the same point data as `p`.
    #[inline]
    pub fn canonical(&self, p: PointId) -> PointId {
        PointId(self.class_of[p.index()])
    }

    /// Canonical representatives of the distinct points among `ids`, ascending.
    pub fn distinct(&self, ids: &[PointId]) -> Vec<PointId> {
        let mut reps: Vec<PointId> = ids.iter().map(|&p| self.canonical(p)).collect();
        reps.sort_unstable();
        reps.dedup();
        reps
    }

    /// Checked distance query.
    pub fn distance(&self, p: PointId, q: PointId) -> Result<f64, MetricError> {
        self.check(p)?;
        self.check(q)?;
        Ok(self.dist(p, q))
    }

    /// Distance between two ids known to be valid. Panics on unknown ids.
    #[inline]
    pub fn dist(&self, p: PointId, q: PointId) -> f64 {
        let (a, b) = (self.class_of[p.index()], self.class_of[q.index()]);
        if a == b {
            return 0.0;
        }
        let (lo, hi) = if p.0 < q.0 {
            (p.index(), q.index())
        } else {
            (q.index(), p.index())
        };
        match &self.cache {
            Some(cache) => cache.get_or_insert(lo, hi, || self.raw(lo, hi)),
            None => self.raw(lo, hi),
        }
    }

    #[inline]
    fn raw(&self, i: usize, j: usize) -> f64 {
        match &self.repr {
            Repr::Euclidean { dim, coords } => euclidean(
                &coords[i * dim..(i + 1) * dim],
                &coords[j * dim..(j + 1) * dim],
            ),
            Repr::Uniform {
                label_of,
                weight_of_label,
                ..
            } => {
                let (li, lj) = (label_of[i] as usize, label_of[j] as usize);
                if li == lj {
                    0.0
                } else {
                    weight_of_label.as_ref().map_or(1.0, |w| w[li].max(w[lj]))
                }
            }
            Repr::Matrix {
                size,
                entries,
                row_of,
            } => entries[row_of[i] as usize * size + row_of[j] as usize],
        }
    }

    /// Dimension and packed coordinates of a Euclidean space.
    pub(crate) fn euclidean_coords(&self) -> Option<(usize, &[f64])> {
        match &self.repr {
            Repr::Euclidean { dim, coords } => Some((*dim, coords)),
            _ => None,
        }
    }

    /// `a <= b`, with relative slack [`REL_TOL`] for Euclidean spaces and
    /// exact comparison otherwise.
    #[inline]
    pub fn le(&self, a: f64, b: f64) -> bool {
        match self.repr {
            Repr::Euclidean { .. } => a <= b + REL_TOL * a.abs().max(b.abs()),
            _ => a <= b,
        }
    }

    pub fn to_spec(&self) -> MetricSpaceSpec {
        match &self.repr {
            Repr::Euclidean { dim, coords } => MetricSpaceSpec::Euclidean {
                dim: *dim,
                points: if *dim == 0 {
                    vec![Vec::new(); self.len()]
                } else {
                    coords.chunks(*dim).map(<[f64]>::to_vec).collect()
                },
            },
            Repr::Uniform {
                label_of,
                labels,
                weight_of_label,
            } => MetricSpaceSpec::Uniform {
                labels: label_of
                    .iter()
                    .map(|&l| labels[l as usize].clone())
                    .collect(),
                weights: weight_of_label
                    .as_ref()
                    .map(|w| label_of.iter().map(|&l| w[l as usize]).collect()),
            },
            Repr::Matrix {
                size,
                entries,
                row_of,
            } => MetricSpaceSpec::Matrix {
                matrix: if *size == 0 {
                    Vec::new()
                } else {
                    entries.chunks(*size).map(<[f64]>::to_vec).collect()
                },
                rows: Some(row_of.iter().map(|&r| r as usize).collect()),
                validate: false,
            },
        }
    }
}

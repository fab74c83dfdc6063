//! The placement array: write-once cells, the partial-array cost, and the
//! number of gaps, plus order-preserving views onto subsets of cells.

use thiserror::Error;

use crate::metric::{MetricSpace, PointId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArrayError {
    #[error("cell {index} is out of range for an array of length {len}")]
    OutOfRange { index: usize, len: usize },
    #[error("cell {index} is already occupied")]
    Occupied { index: usize },
}

/// A size-n array whose cells are each written at most once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlacementArray {
    cells: Vec<Option<PointId>>,
    filled: usize,
    gaps: usize,
}

impl PlacementArray {
    pub fn new(n: usize) -> Self {
        PlacementArray {
            cells: vec![None; n],
            filled: 0,
            gaps: usize::from(n > 0),
        }
    }

    pub fn from_cells(cells: Vec<Option<PointId>>) -> Self {
        let filled = cells.iter().filter(|c| c.is_some()).count();
        let gaps = count_gaps(&cells);
        PlacementArray {
            cells,
            filled,
            gaps,
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn filled(&self) -> usize {
        self.filled
    }

    pub fn is_full(&self) -> bool {
        self.filled == self.cells.len()
    }

    pub fn cells(&self) -> &[Option<PointId>] {
        &self.cells
    }

    pub fn get(&self, i: usize) -> Option<PointId> {
        self.cells.get(i).copied().flatten()
    }

    /// Writes `x` into the empty cell `i`. Cells can never be rewritten.
    pub fn place(&mut self, i: usize, x: PointId) -> Result<(), ArrayError> {
        let len = self.cells.len();
        match self.cells.get(i) {
            None => return Err(ArrayError::OutOfRange { index: i, len }),
            Some(Some(_)) => return Err(ArrayError::Occupied { index: i }),
            Some(None) => {}
        }
        let left_empty = i > 0 && self.cells[i - 1].is_none();
        let right_empty = i + 1 < len && self.cells[i + 1].is_none();
        match (left_empty, right_empty) {
            (true, true) => self.gaps += 1,
            (false, false) => self.gaps -= 1,
            _ => {}
        }
        self.cells[i] = Some(x);
        self.filled += 1;
        Ok(())
    }

    /// Sum of distances over adjacent pairs of occupied cells.
    pub fn cost(&self, space: &MetricSpace) -> f64 {
        self.cells
            .windows(2)
            .filter_map(|w| match (w[0], w[1]) {
                (Some(a), Some(b)) => Some(space.dist(a, b)),
                _ => None,
            })
            .sum()
    }

    /// Number of maximal runs of empty cells, maintained under [`place`](Self::place).
    pub fn gaps(&self) -> usize {
        self.gaps
    }

    /// Order-preserving view onto the empty cells.
    pub fn empty_view(&self) -> CellView {
        CellView::identity(self.len()).empty_view(self)
    }

    /// The final placement as a JSON array of point indices (null when empty).
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.cells).expect("serializing cells cannot fail")
    }
}

/// Gap count recomputed from scratch.
pub fn count_gaps(cells: &[Option<PointId>]) -> usize {
    let mut gaps = 0;
    let mut prev_empty = false;
    for c in cells {
        if c.is_none() && !prev_empty {
            gaps += 1;
        }
        prev_empty = c.is_none();
    }
    gaps
}

/// An order-preserving map from `0..len` onto a subset of a base array's
/// cells. Views of views are stored already composed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CellView {
    Identity(usize),
    Mapped(Vec<usize>),
}

impl CellView {
    pub fn identity(n: usize) -> Self {
        CellView::Identity(n)
    }

    pub fn len(&self) -> usize {
        match self {
            CellView::Identity(n) => *n,
            CellView::Mapped(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Base-array index of local cell `i`.
    #[inline]
    pub fn base(&self, i: usize) -> usize {
        match self {
            CellView::Identity(n) => {
                assert!(i < *n, "view index {i} out of range for length {n}");
                i
            }
            CellView::Mapped(m) => m[i],
        }
    }

    pub fn get(&self, array: &PlacementArray, i: usize) -> Option<PointId> {
        array.get(self.base(i))
    }

    pub fn place(
        &self,
        array: &mut PlacementArray,
        i: usize,
        x: PointId,
    ) -> Result<(), ArrayError> {
        if i >= self.len() {
            return Err(ArrayError::OutOfRange {
                index: i,
                len: self.len(),
            });
        }
        array.place(self.base(i), x)
    }

    /// Restricts this view to the local cells `keep` (ascending), composed.
    pub fn restrict(&self, keep: impl IntoIterator<Item = usize>) -> CellView {
        CellView::Mapped(keep.into_iter().map(|i| self.base(i)).collect())
    }

    /// View onto this view's cells that are still empty in `array`.
    pub fn empty_view(&self, array: &PlacementArray) -> CellView {
        self.restrict((0..self.len()).filter(|&i| self.get(array, i).is_none()))
    }

    pub fn to_indices(&self) -> Vec<usize> {
        (0..self.len()).map(|i| self.base(i)).collect()
    }
}

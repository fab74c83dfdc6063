//! Recursively-Fill-Most-Blocks: a Fill-Most-Blocks pass over the first half
//! of the stream, then the same algorithm on the cells it left empty, viewed
//! as one contiguous array.

use crate::array::{CellView, PlacementArray};
use crate::metric::{MetricSpace, PointId};

use super::fmb::{fill_at_level, FillMostBlocks};
use super::{check_stream, OnlinePlacer, PlacerError, ResetEvent};

/// Online state machine form of the recursion. Each level's view is derived
/// from the cells the previous level's pass left empty.
#[derive(Debug, Clone)]
pub struct RecursiveFillMostBlocks {
    n: usize,
    placed: usize,
    view: CellView,
    pass: FillMostBlocks,
    level: usize,
    resets: Vec<ResetEvent>,
}

impl RecursiveFillMostBlocks {
    pub fn new(n: usize) -> Self {
        RecursiveFillMostBlocks {
            n,
            placed: 0,
            view: CellView::identity(n),
            pass: FillMostBlocks::at_level(n, 0),
            level: 0,
            resets: Vec::new(),
        }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    fn descend(&mut self) {
        self.resets.extend_from_slice(self.pass.reset_events());
        let view = self.view.restrict(self.pass.unfilled_cells());
        self.level += 1;
        self.pass = FillMostBlocks::at_level(view.len(), self.level);
        self.view = view;
    }
}

impl OnlinePlacer for RecursiveFillMostBlocks {
    fn name(&self) -> &'static str {
        "rfmb"
    }

    fn capacity(&self) -> usize {
        self.n
    }

    fn next(&mut self, x: PointId, space: &MetricSpace) -> Result<usize, PlacerError> {
        if self.placed >= self.n {
            return Err(PlacerError::Exhausted { capacity: self.n });
        }
        while self.pass.is_done() {
            self.descend();
        }
        let local = self.pass.next(x, space)?;
        self.placed += 1;
        Ok(self.view.base(local))
    }

    fn resets(&self) -> Vec<ResetEvent> {
        let mut all = self.resets.clone();
        all.extend_from_slice(self.pass.reset_events());
        all
    }
}

/// Fills every cell of `view` with the points of `stream` (one per cell).
///
/// Runs a pass over the first ⌈n/2⌉ points, then recurses on the view's
/// remaining empty cells with the last ⌊n/2⌋ points. Returns every net reset.
pub fn recursively_fill_most_blocks(
    view: &CellView,
    array: &mut PlacementArray,
    stream: &[PointId],
    space: &MetricSpace,
) -> Result<Vec<ResetEvent>, PlacerError> {
    check_stream(space, stream, view.len())?;
    let mut resets = Vec::new();
    let mut view = view.clone();
    let mut rest = stream;
    let mut level = 0;
    while !view.is_empty() {
        let (prefix, suffix) = rest.split_at(view.len().div_ceil(2));
        resets.extend(fill_at_level(&view, array, prefix, space, level)?.resets);
        view = view.empty_view(array);
        rest = suffix;
        level += 1;
    }
    Ok(resets)
}

//! Naive comparator: every point goes into the left-most empty cell.

use crate::array::{CellView, PlacementArray};
use crate::metric::{MetricSpace, PointId};

use super::{check_stream, OnlinePlacer, PlacerError};

#[derive(Debug, Clone)]
pub struct Leftmost {
    n: usize,
    next: usize,
}

impl Leftmost {
    pub fn new(n: usize) -> Self {
        Leftmost { n, next: 0 }
    }
}

impl OnlinePlacer for Leftmost {
    fn name(&self) -> &'static str {
        "leftmost"
    }

    fn capacity(&self) -> usize {
        self.n
    }

    fn next(&mut self, x: PointId, space: &MetricSpace) -> Result<usize, PlacerError> {
        if self.next >= self.n {
            return Err(PlacerError::Exhausted { capacity: self.n });
        }
        space.check(x)?;
        self.next += 1;
        Ok(self.next - 1)
    }
}

pub fn leftmost_baseline(
    view: &CellView,
    array: &mut PlacementArray,
    stream: &[PointId],
    space: &MetricSpace,
) -> Result<(), PlacerError> {
    check_stream(space, stream, view.len())?;
    for (i, &x) in stream.iter().enumerate() {
        view.place(array, i, x)?;
    }
    Ok(())
}

//! Fill-Most-Blocks: places the first ⌈n/2⌉ points of a stream into an array
//! of length n using 2⌊√n⌋ blocks and an online r-net of at most ⌊√n⌋ centers.

use crate::array::{CellView, PlacementArray};
use crate::metric::{MetricSpace, PointId};
use crate::net::Net;
use crate::oracle::IncrementalMst;

use super::{check_stream, OnlinePlacer, PlacerError, ResetEvent};

#[derive(Debug, Clone)]
struct Block {
    start: usize,
    len: usize,
    used: usize,
}

impl Block {
    fn is_full(&self) -> bool {
        self.used == self.len
    }
}

/// Lengths of the `2⌊√n⌋` blocks: the first `n mod N2` blocks get `⌈n/N2⌉`
/// cells and the rest `⌊n/N2⌋` (possibly zero).
pub fn block_lengths(n: usize) -> Vec<usize> {
    let n2 = 2 * n.isqrt();
    if n2 == 0 {
        return Vec::new();
    }
    let (q, extra) = (n / n2, n % n2);
    (0..n2).map(|b| q + usize::from(b < extra)).collect()
}

/// State of one Fill-Most-Blocks pass over an array (or view) of length `n`.
#[derive(Debug, Clone)]
pub struct FillMostBlocks {
    n: usize,
    n1: usize,
    quota: usize,
    blocks: Vec<Block>,
    block_owner: Vec<Option<usize>>,
    center_block: Vec<Option<usize>>,
    net: Net,
    /// Bitset over canonical ids of the points received so far.
    seen: Vec<u64>,
    received: Vec<PointId>,
    /// MST of a prefix of `received`, brought up to date at each reset.
    tree: IncrementalMst,
    last_reset_mst: f64,
    placed: usize,
    level: usize,
    resets: Vec<ResetEvent>,
}

impl FillMostBlocks {
    pub fn new(n: usize) -> Self {
        Self::at_level(n, 0)
    }

    pub(crate) fn at_level(n: usize, level: usize) -> Self {
        let mut start = 0;
        let blocks: Vec<Block> = block_lengths(n)
            .into_iter()
            .map(|len| {
                let b = Block {
                    start,
                    len,
                    used: 0,
                };
                start += len;
                b
            })
            .collect();
        FillMostBlocks {
            n,
            n1: n.isqrt(),
            quota: n.div_ceil(2),
            block_owner: vec![None; blocks.len()],
            blocks,
            center_block: Vec::new(),
            net: Net::new(0.0),
            seen: Vec::new(),
            received: Vec::new(),
            tree: IncrementalMst::new(),
            last_reset_mst: 0.0,
            placed: 0,
            level,
            resets: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn quota(&self) -> usize {
        self.quota
    }

    pub fn placed(&self) -> usize {
        self.placed
    }

    pub fn is_done(&self) -> bool {
        self.placed == self.quota
    }

    pub fn net(&self) -> &Net {
        &self.net
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn reset_events(&self) -> &[ResetEvent] {
        &self.resets
    }

    /// Distinct (canonical) points received so far.
    pub fn received(&self) -> &[PointId] {
        &self.received
    }

    /// Local cells this pass left empty, ascending.
    pub fn unfilled_cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks
            .iter()
            .flat_map(|b| b.start + b.used..b.start + b.len)
    }

    fn remember(&mut self, x: PointId, space: &MetricSpace) {
        let c = space.canonical(x).index();
        if self.seen.is_empty() {
            self.seen = vec![0; space.len().div_ceil(64)];
        }
        let (word, bit) = (c / 64, 1u64 << (c % 64));
        if self.seen[word] & bit == 0 {
            self.seen[word] |= bit;
            self.received.push(PointId::from(c));
        }
    }

    /// Places one point and returns its local cell index.
    pub fn next(&mut self, x: PointId, space: &MetricSpace) -> Result<usize, PlacerError> {
        if self.placed >= self.quota {
            return Err(PlacerError::Exhausted {
                capacity: self.quota,
            });
        }
        space.check(x)?;
        self.remember(x, space);

        let (mut center, inserted) = self.net.cover_or_insert(x, space);
        if inserted {
            self.center_block.push(None);
        }
        if self.net.len() > self.n1 {
            self.block_owner.iter_mut().for_each(|o| *o = None);
            for &p in &self.received[self.tree.len()..] {
                self.tree.insert(p, space);
            }
            let mst = self.tree.weight();
            let radius = 4.0 * mst / self.n1 as f64;
            self.resets.push(ResetEvent {
                level: self.level,
                step: self.placed,
                mst,
                previous_mst: self.last_reset_mst,
                radius,
            });
            self.last_reset_mst = mst;
            self.net.reset(x, radius);
            self.center_block.clear();
            self.center_block.push(None);
            center = 0;
        }

        if let Some(b) = self.center_block[center] {
            if self.blocks[b].is_full() {
                self.block_owner[b] = None;
                self.center_block[center] = None;
            }
        }
        let b = match self.center_block[center] {
            Some(b) => b,
            None => {
                let b = (0..self.blocks.len())
                    .find(|&b| self.block_owner[b].is_none() && !self.blocks[b].is_full())
                    .expect("an unassigned non-full block always exists while fewer than ⌈n/2⌉ points are placed");
                self.block_owner[b] = Some(center);
                self.center_block[center] = Some(b);
                b
            }
        };
        let block = &mut self.blocks[b];
        let cell = block.start + block.used;
        block.used += 1;
        self.placed += 1;
        Ok(cell)
    }

    /// Checks the structural invariants of the pass. Returns a description of
    /// the first breach.
    pub fn check_invariants(&self) -> Result<(), String> {
        let min_len = if self.blocks.is_empty() {
            0
        } else {
            self.n / self.blocks.len()
        };
        if self.net.len() > self.n1 {
            return Err(format!(
                "{} centers exceed N1 = {}",
                self.net.len(),
                self.n1
            ));
        }
        if self.center_block.len() != self.net.len() {
            return Err("center/block table out of sync with the net".into());
        }
        for (b, block) in self.blocks.iter().enumerate() {
            if block.len < min_len {
                return Err(format!("block {b} shorter than ⌊n/N2⌋"));
            }
            if let Some(c) = self.block_owner[b] {
                if self.center_block.get(c) != Some(&Some(b)) {
                    return Err(format!("block {b} and center {c} disagree on assignment"));
                }
                if block.used == 0 {
                    return Err(format!("assigned block {b} is empty"));
                }
            }
        }
        for (c, b) in self.center_block.iter().enumerate() {
            if let Some(b) = b {
                if self.block_owner[*b] != Some(c) {
                    return Err(format!("center {c} and block {b} disagree on assignment"));
                }
            }
        }
        Ok(())
    }
}

impl OnlinePlacer for FillMostBlocks {
    fn name(&self) -> &'static str {
        "fmb-half"
    }

    fn capacity(&self) -> usize {
        self.quota
    }

    fn next(&mut self, x: PointId, space: &MetricSpace) -> Result<usize, PlacerError> {
        FillMostBlocks::next(self, x, space)
    }

    fn resets(&self) -> Vec<ResetEvent> {
        self.resets.clone()
    }
}

/// Outcome of a complete Fill-Most-Blocks pass.
#[derive(Debug, Clone)]
pub struct FmbSummary {
    pub resets: Vec<ResetEvent>,
}

/// Runs a full Fill-Most-Blocks pass: places the `⌈n/2⌉` points of `stream`
/// into the cells of `view` (length `n`), writing through to `array`.
pub fn fill_most_blocks(
    view: &CellView,
    array: &mut PlacementArray,
    stream: &[PointId],
    space: &MetricSpace,
) -> Result<FmbSummary, PlacerError> {
    fill_at_level(view, array, stream, space, 0)
}

pub(crate) fn fill_at_level(
    view: &CellView,
    array: &mut PlacementArray,
    stream: &[PointId],
    space: &MetricSpace,
    level: usize,
) -> Result<FmbSummary, PlacerError> {
    let mut state = FillMostBlocks::at_level(view.len(), level);
    check_stream(space, stream, state.quota())?;
    for &x in stream {
        let cell = state.next(x, space)?;
        view.place(array, cell, x)?;
    }
    Ok(FmbSummary {
        resets: state.resets,
    })
}

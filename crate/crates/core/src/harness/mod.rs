//! Experiment harness: run a placer on a generated stream and measure its cost
//! against the offline bounds.

mod sweep;
mod verify;
pub mod workload;

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use sweep::{
    aggregate, plot_rows, sweep, write_plot_csv, Aggregate, PlotRow, SweepPlan, SweepRow,
    SweepTable,
};
pub use verify::{verify, Check, Suite, VerifyReport, Witness};

use crate::adversary::{GenError, Generator};
use crate::array::PlacementArray;
use crate::metric::{MetricSpace, PointId};
use crate::oracle::{opt_bounds, OracleError, TourBounds};
use crate::placer::{OnlinePlacer, PlacerError, PlacerKind, ResetEvent, UnknownPlacer};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error(transparent)]
    UnknownAlgorithm(#[from] UnknownPlacer),
    #[error(transparent)]
    Generator(#[from] GenError),
    #[error(transparent)]
    Placer(#[from] PlacerError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("exact OPT requested but {distinct} distinct points exceed the oracle cap")]
    ExactUnavailable { distinct: usize },
    #[error("sweep needs at least one configuration")]
    EmptySweep,
}

/// One experiment: which placer, on which generated stream.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RunConfig {
    pub algorithm: String,
    pub generator: String,
    pub n: usize,
    pub seed: u64,
    #[serde(default)]
    pub want_exact: bool,
}

impl RunConfig {
    pub fn new(
        algorithm: impl Into<String>,
        generator: impl Into<String>,
        n: usize,
        seed: u64,
    ) -> Self {
        RunConfig {
            algorithm: algorithm.into(),
            generator: generator.into(),
            n,
            seed,
            want_exact: false,
        }
    }

    pub fn exact(mut self, want: bool) -> Self {
        self.want_exact = want;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResetSummary {
    pub count: usize,
    pub events: Vec<ResetEvent>,
}

/// Outcome of [`run_single`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: RunConfig,
    /// Number of points the placer received.
    pub placed: usize,
    pub cost: f64,
    pub bounds: Option<TourBounds>,
    /// `cost / upper` (or `cost / exact`): at most the true ratio on this input.
    pub ratio_lower: Option<f64>,
    /// `cost / lower` (or `cost / exact`): at least the true ratio on this input.
    pub ratio_upper: Option<f64>,
    pub gaps_max: usize,
    /// Gap count of the array after each placement.
    pub gap_trace: Vec<usize>,
    pub resets: ResetSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub far_served: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl RunRecord {
    /// One JSON line. Wall time is only written when `timing` is set, so that
    /// repeated runs produce identical bytes.
    pub fn to_json_line(&self, timing: bool) -> String {
        if timing || self.wall_time_ms.is_none() {
            serde_json::to_string(self)
        } else {
            serde_json::to_string(&RunRecord {
                wall_time_ms: None,
                ..self.clone()
            })
        }
        .expect("run records always serialize")
    }
}

/// `cost / bound`, treating `0 / 0` as a perfect ratio of 1.
pub fn ratio(cost: f64, bound: f64) -> f64 {
    if bound > 0.0 {
        cost / bound
    } else if cost > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}

/// Result of feeding a stream to a placer.
#[derive(Debug, Clone)]
pub struct Execution {
    pub array: PlacementArray,
    /// Cell chosen for each point, in arrival order.
    pub cells: Vec<usize>,
    pub gap_trace: Vec<usize>,
    pub resets: Vec<ResetEvent>,
}

/// Feeds `stream` to `placer` one point at a time, writing into an array of
/// length `n`. Placing into an occupied or out-of-range cell is an error.
pub fn execute(
    placer: &mut dyn OnlinePlacer,
    n: usize,
    space: &MetricSpace,
    stream: &[PointId],
    trace: bool,
) -> Result<Execution, PlacerError> {
    let mut array = PlacementArray::new(n);
    let mut cells = Vec::with_capacity(stream.len());
    let mut gap_trace = Vec::with_capacity(if trace { stream.len() } else { 0 });
    for &x in stream {
        let i = placer.next(x, space)?;
        array.place(i, x)?;
        cells.push(i);
        if trace {
            gap_trace.push(array.gaps());
        }
    }
    Ok(Execution {
        array,
        cells,
        gap_trace,
        resets: placer.resets(),
    })
}

/// Generates the configured stream, runs the placer, and bounds its ratio.
///
/// `fmb-half` receives only the first `⌈n/2⌉` points, and its bounds refer to
/// that prefix.
pub fn run_single(config: &RunConfig) -> Result<RunRecord, HarnessError> {
    let kind: PlacerKind = config.algorithm.parse()?;
    let generator: Generator = config.generator.parse()?;
    let started = Instant::now();
    if config.n == 0 {
        return measure(config, kind, &MetricSpace::empty(), &[], None, started);
    }
    let input = generator.generate(config.n, config.seed)?;
    measure(
        config,
        kind,
        &input.space,
        &input.order,
        input.meta.far_served,
        started,
    )
}

/// Runs `algorithm` on a loaded stream. The record's generator is `"file"`,
/// its seed 0 and its `n` the stream length.
pub fn run_instance(
    algorithm: &str,
    space: &MetricSpace,
    stream: &[PointId],
    want_exact: bool,
) -> Result<RunRecord, HarnessError> {
    let kind: PlacerKind = algorithm.parse()?;
    let config = RunConfig::new(algorithm, "file", stream.len(), 0).exact(want_exact);
    measure(&config, kind, space, stream, None, Instant::now())
}

fn measure(
    config: &RunConfig,
    kind: PlacerKind,
    space: &MetricSpace,
    order: &[PointId],
    far_served: Option<bool>,
    started: Instant,
) -> Result<RunRecord, HarnessError> {
    let mut placer = kind.build(config.n);
    let stream = &order[..placer.capacity().min(order.len())];
    let run = execute(placer.as_mut(), config.n, space, stream, true)?;
    let cost = run.array.cost(space);
    let bounds = if stream.is_empty() {
        None
    } else {
        let b = opt_bounds(space, stream, config.want_exact)?;
        if config.want_exact && b.exact.is_none() {
            return Err(HarnessError::ExactUnavailable {
                distinct: space.distinct(stream).len(),
            });
        }
        Some(b)
    };
    Ok(RunRecord {
        config: config.clone(),
        placed: stream.len(),
        cost,
        ratio_lower: bounds.map(|b| ratio(cost, b.best_upper())),
        ratio_upper: bounds.map(|b| ratio(cost, b.best_lower())),
        bounds,
        gaps_max: run.gap_trace.iter().copied().max().unwrap_or(0),
        gap_trace: run.gap_trace,
        resets: ResetSummary {
            count: run.resets.len(),
            events: run.resets,
        },
        far_served,
        wall_time_ms: Some(started.elapsed().as_secs_f64() * 1e3),
    })
}

//! Property suites with failing witnesses.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::workload::random_instance;
use super::{execute, HarnessError};
use crate::adversary::{
    adversary_order, adversary_params, comb_instance, far_point_probability, validate_comb,
    Generator,
};
use crate::array::{CellView, PlacementArray};
use crate::instance::InstanceFile;
use crate::metric::{MetricSpace, PointId, REL_TOL};
use crate::net::Net;
use crate::oracle::{exact_opt, mst_weight, opt_bounds, DEFAULT_EXACT_CAP};
use crate::placer::{fill_most_blocks, PlacerKind, ResetEvent};
use crate::rng::{seeded, split_seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Lemma3,
    Lemma4,
    Lemma6,
    Theorem8,
    Adversary,
    Comb,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Lemma3,
        Suite::Lemma4,
        Suite::Lemma6,
        Suite::Theorem8,
        Suite::Adversary,
        Suite::Comb,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Lemma3 => "lemma3",
            Suite::Lemma4 => "lemma4",
            Suite::Lemma6 => "lemma6",
            Suite::Theorem8 => "theorem8",
            Suite::Adversary => "adversary",
            Suite::Comb => "comb",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown suite {s:?} (expected one of lemma3, lemma4, lemma6, theorem8, adversary, comb)"))
    }
}

/// A failing input: the trial seed and the instance, stream included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub seed: u64,
    pub instance: serde_json::Value,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub trials: usize,
    pub failures: usize,
    /// The first failure, if any.
    pub witness: Option<Witness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    fn new(name: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            trials: 0,
            failures: 0,
            witness: None,
            note: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    fn record(&mut self, ok: bool, witness: impl FnOnce() -> Witness) {
        self.trials += 1;
        if !ok {
            self.failures += 1;
            if self.witness.is_none() {
                self.witness = Some(witness());
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub budget: usize,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

fn witness(seed: u64, space: &MetricSpace, stream: &[PointId], detail: String) -> Witness {
    let file = InstanceFile::from_space(space, Some(stream.to_vec()), None);
    Witness {
        seed,
        instance: serde_json::to_value(file).expect("instances serialize"),
        detail,
    }
}

fn le_rel(a: f64, b: f64) -> bool {
    a <= b + REL_TOL * b.abs().max(a.abs())
}

fn doubling_ok(resets: &[ResetEvent]) -> bool {
    resets.iter().all(|e| e.doubled(REL_TOL))
}

/// Runs `suite` with `budget` trials; trial `t` uses `split_seed(seed, t)`.
pub fn verify(suite: Suite, budget: usize, seed: u64) -> Result<VerifyReport, HarnessError> {
    let checks = match suite {
        Suite::Lemma3 => lemma3(budget, seed)?,
        Suite::Lemma4 => lemma4(budget, seed)?,
        Suite::Lemma6 => lemma6(budget, seed)?,
        Suite::Theorem8 => theorem8(budget, seed)?,
        Suite::Adversary => adversary(budget, seed)?,
        Suite::Comb => comb(budget)?,
    };
    Ok(VerifyReport {
        suite,
        budget,
        seed,
        passed: checks.iter().all(Check::passed),
        checks,
    })
}

fn lemma3(budget: usize, seed: u64) -> Result<Vec<Check>, HarnessError> {
    let mut check = Check::new("mst <= exact opt <= 2 mst");
    for t in 0..budget {
        let s = split_seed(seed, t as u64);
        let mut rng = seeded(s);
        let (_, space, ids) = random_instance(rng.gen_range(1..=10), &mut rng);
        let mst = mst_weight(&space, &ids)?;
        let opt = exact_opt(&space, &ids)?;
        check.record(le_rel(mst, opt) && le_rel(opt, 2.0 * mst), || {
            witness(s, &space, &ids, format!("mst {mst}, opt {opt}"))
        });
    }
    Ok(vec![check])
}

/// Feeds a random stream to a fixed-radius net. Centers only ever get
/// appended, so after each step it suffices to check the new point for
/// covering and a new center against the older ones for packing; the full
/// check runs at the end.
fn lemma4(budget: usize, seed: u64) -> Result<Vec<Check>, HarnessError> {
    let mut laws = Check::new("net covers and packs after every increase");
    let mut size = Check::new("(|C| - 1) r <= 2 mst");
    for t in 0..budget {
        let s = split_seed(seed, t as u64);
        let mut rng = seeded(s);
        let (_, space, ids) = random_instance(rng.gen_range(1..=200), &mut rng);
        let scale = ids
            .iter()
            .map(|&p| space.dist(ids[0], p))
            .fold(0.0, f64::max);
        let radius = if rng.gen_bool(0.25) {
            0.0
        } else {
            rng.gen::<f64>() * scale
        };
        let (ok, net) = audit_net(&space, &ids, radius);
        laws.record(ok, || witness(s, &space, &ids, format!("radius {radius}")));
        let mst = mst_weight(&space, &ids)?;
        let slack = net.size_slack(&ids, &space);
        let ok = matches!(slack, Ok(v) if v >= -REL_TOL * 2.0 * mst);
        size.record(ok, || {
            witness(s, &space, &ids, format!("radius {radius}, slack {slack:?}"))
        });
    }
    Ok(vec![laws, size])
}

/// Incremental audit of a fixed-radius net fed with `ids`.
pub(crate) fn audit_net(space: &MetricSpace, ids: &[PointId], radius: f64) -> (bool, Net) {
    let mut net = Net::new(radius);
    let mut ok = true;
    for &x in ids {
        let before = net.len();
        let inserted = net.increase(x, space);
        let grew_by_append = net.len() == before + usize::from(inserted);
        let covered = net.find_cover(x, space).is_some();
        let packed = !inserted
            || net.centers()[..before]
                .iter()
                .all(|&c| !space.le(space.dist(c, x), radius));
        ok &= grew_by_append && covered && packed;
    }
    (ok && net.verify(ids, space), net)
}

fn lemma6(budget: usize, seed: u64) -> Result<Vec<Check>, HarnessError> {
    let mut gaps = Check::new("gaps <= 2 sqrt n");
    let mut cost = Check::new("cost <= 11 sqrt n opt (22 sqrt n mst without exact opt)");
    let mut doubling = Check::new("mst at least doubles between resets");
    for t in 0..budget {
        let s = split_seed(seed, t as u64);
        let mut rng = seeded(s);
        let side = 2 + t % 13;
        let n = side * side;
        let (_, space, stream) = random_instance(n.div_ceil(2), &mut rng);
        let mut array = PlacementArray::new(n);
        let summary = fill_most_blocks(&CellView::identity(n), &mut array, &stream, &space)?;
        let root = (n as f64).sqrt();
        let c = array.cost(&space);
        let bounds = opt_bounds(&space, &stream, true)?;
        let limit = match bounds.exact {
            Some(opt) => 11.0 * root * opt,
            None => 22.0 * root * bounds.mst,
        };
        gaps.record(array.gaps() as f64 <= 2.0 * root, || {
            witness(s, &space, &stream, format!("n {n}, gaps {}", array.gaps()))
        });
        cost.record(le_rel(c, limit), || {
            witness(
                s,
                &space,
                &stream,
                format!("n {n}, cost {c}, limit {limit}"),
            )
        });
        doubling.record(doubling_ok(&summary.resets), || {
            witness(
                s,
                &space,
                &stream,
                format!("n {n}, resets {:?}", summary.resets),
            )
        });
    }
    Ok(vec![gaps, cost, doubling])
}

fn theorem8(budget: usize, seed: u64) -> Result<Vec<Check>, HarnessError> {
    let sharp = 15.0 * (2.0 + std::f64::consts::SQRT_2);
    let mut bound = Check::new("cost <= 52 sqrt n opt (104 sqrt n mst without exact opt)");
    let mut sharper = Check::new("cost <= 15(2 + sqrt 2) sqrt n opt when opt is exact");
    let mut doubling = Check::new("mst at least doubles between resets");
    for t in 0..budget {
        let s = split_seed(seed, t as u64);
        let mut rng = seeded(s);
        let n = 1 + t % 64;
        let (space, stream) = match t % 4 {
            0 | 1 => {
                let (_, space, ids) = random_instance(n, &mut rng);
                (space, ids)
            }
            2 => {
                let g = Generator::Comb.generate(n, s)?;
                (g.space, g.order)
            }
            _ => {
                let g = Generator::Adversary.generate(n, s)?;
                (g.space, g.order)
            }
        };
        let mut placer = PlacerKind::Rfmb.build(n);
        let run = execute(placer.as_mut(), n, &space, &stream, false)?;
        let c = run.array.cost(&space);
        let root = (n as f64).sqrt();
        let b = opt_bounds(&space, &stream, true)?;
        let limit = match b.exact {
            Some(opt) => 52.0 * root * opt,
            None => 104.0 * root * b.mst,
        };
        bound.record(le_rel(c, limit), || {
            witness(
                s,
                &space,
                &stream,
                format!("n {n}, cost {c}, limit {limit}"),
            )
        });
        if let Some(opt) = b.exact {
            sharper.record(le_rel(c, sharp * root * opt), || {
                witness(s, &space, &stream, format!("n {n}, cost {c}, opt {opt}"))
            });
        }
        doubling.record(doubling_ok(&run.resets), || {
            witness(
                s,
                &space,
                &stream,
                format!("n {n}, resets {:?}", run.resets),
            )
        });
    }
    Ok(vec![bound, sharper, doubling])
}

/// Stream size of the adversary frequency check.
pub const ADVERSARY_N: usize = 100_000;

fn adversary(budget: usize, seed: u64) -> Result<Vec<Check>, HarnessError> {
    let mut freq = Check::new(format!(
        "far point frequency within 3 sigma of closed form at n = {ADVERSARY_N}"
    ));
    let p = far_point_probability(ADVERSARY_N);
    let far = PointId::from(adversary_params(ADVERSARY_N).cluster_size);
    let hits = (0..budget)
        .filter(|&t| {
            adversary_order(ADVERSARY_N, split_seed(seed, t as u64))
                .order
                .contains(&far)
        })
        .count();
    let sigma = (p * (1.0 - p) / budget.max(1) as f64).sqrt();
    let observed = hits as f64 / budget.max(1) as f64;
    freq.trials = budget;
    if budget > 0 && (observed - p).abs() > 3.0 * sigma {
        freq.failures = 1;
    }
    freq.note = Some(format!(
        "observed {observed:.6}, expected {p:.6}, sigma {sigma:.6}"
    ));

    // Small instance where the exact oracle applies: n = 2^5, |U| = 16.
    let n = 32;
    let u = adversary_params(n).cluster_size as f64;
    let mut uniform = Check::new("streams without the far point use only distances 0 and 1");
    let mut opt = Check::new("exact opt is 0, |U| - 1 or 2|U| - 1");
    for t in 0..budget.min(200) {
        let s = split_seed(seed ^ 0x5eed, t as u64);
        let g = Generator::Adversary.generate(n, s)?;
        if g.meta.far_served != Some(true) {
            let ok = g.order.iter().all(|&a| {
                g.order
                    .iter()
                    .all(|&b| matches!(g.space.dist(a, b), 0.0 | 1.0))
            });
            uniform.record(ok, || {
                witness(s, &g.space, &g.order, "distance outside {0, 1}".into())
            });
        }
        let value = exact_opt(&g.space, &g.order)?;
        let expected = match (g.meta.far_served, g.meta.epochs) {
            (Some(true), Some(0)) => 0.0,
            (Some(true), _) => 2.0 * u - 1.0,
            _ => u - 1.0,
        };
        opt.record(value == expected, || {
            witness(
                s,
                &g.space,
                &g.order,
                format!("opt {value}, expected {expected}"),
            )
        });
    }
    Ok(vec![freq, uniform, opt])
}

fn comb(budget: usize) -> Result<Vec<Check>, HarnessError> {
    let mut valid = Check::new("comb(m) satisfies both conditions exactly");
    let mut ell = Check::new("ell = 1 by exact opt");
    for m in 1..=budget.clamp(1, 64) {
        let (inst, space) = comb_instance(m)?;
        let mut all = vec![inst.a0, inst.a1];
        all.extend_from_slice(&inst.points);
        valid.record(validate_comb(&inst, &space), || {
            witness(m as u64, &space, &all, format!("m {m}"))
        });
        if space.distinct(&all).len() <= DEFAULT_EXACT_CAP {
            let value = exact_opt(&space, &all)?;
            ell.record((value - 1.0).abs() <= 1e-12, || {
                witness(m as u64, &space, &all, format!("m {m}, opt {value}"))
            });
        }
    }
    Ok(vec![valid, ell])
}

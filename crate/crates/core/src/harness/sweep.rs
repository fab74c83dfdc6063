use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_single, HarnessError, RunConfig, RunRecord};
use crate::rng::split_seed;

/// Cartesian product of algorithms, generators and sizes, each run for
/// `trials` seeds. Trial `t` uses `split_seed(master_seed, t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub algorithms: Vec<String>,
    pub generators: Vec<String>,
    pub ns: Vec<usize>,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub want_exact: bool,
}

impl SweepPlan {
    pub fn configs(&self) -> Vec<RunConfig> {
        let mut out = Vec::new();
        for a in &self.algorithms {
            for g in &self.generators {
                for &n in &self.ns {
                    for t in 0..self.trials {
                        out.push(
                            RunConfig::new(a, g, n, split_seed(self.master_seed, t as u64))
                                .exact(self.want_exact),
                        );
                    }
                }
            }
        }
        out
    }
}

/// One row of a sweep: the record, or the error that row produced.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub config: RunConfig,
    pub result: Result<RunRecord, String>,
}

#[derive(Serialize)]
struct ErrorLine<'a> {
    config: &'a RunConfig,
    error: &'a str,
}

impl SweepRow {
    pub fn to_json_line(&self, timing: bool) -> String {
        match &self.result {
            Ok(r) => r.to_json_line(timing),
            Err(e) => serde_json::to_string(&ErrorLine {
                config: &self.config,
                error: e,
            })
            .expect("error rows always serialize"),
        }
    }
}

/// Per-(algorithm, generator, n) summary over the successful rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub algorithm: String,
    pub generator: String,
    pub n: usize,
    pub trials: usize,
    pub errors: usize,
    pub mean_cost: Option<f64>,
    pub max_cost: Option<f64>,
    pub mean_ratio_lower: Option<f64>,
    pub max_ratio_lower: Option<f64>,
    pub mean_ratio_upper: Option<f64>,
    pub max_ratio_upper: Option<f64>,
    pub max_gaps: Option<usize>,
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

fn max(xs: &[f64]) -> Option<f64> {
    xs.iter().copied().reduce(f64::max)
}

/// Groups rows by (algorithm, generator, n) in order of first appearance.
/// Every statistic is recomputed from the raw rows.
pub fn aggregate(rows: &[SweepRow]) -> Vec<Aggregate> {
    let mut index: HashMap<(&str, &str, usize), usize> = HashMap::new();
    let mut groups: Vec<Vec<&SweepRow>> = Vec::new();
    for row in rows {
        let c = &row.config;
        let key = (c.algorithm.as_str(), c.generator.as_str(), c.n);
        let g = *index.entry(key).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(row);
    }
    groups
        .into_iter()
        .map(|group| {
            let c = &group[0].config;
            let ok: Vec<&RunRecord> = group
                .iter()
                .filter_map(|r| r.result.as_ref().ok())
                .collect();
            let costs: Vec<f64> = ok.iter().map(|r| r.cost).collect();
            let lo: Vec<f64> = ok.iter().filter_map(|r| r.ratio_lower).collect();
            let hi: Vec<f64> = ok.iter().filter_map(|r| r.ratio_upper).collect();
            Aggregate {
                algorithm: c.algorithm.clone(),
                generator: c.generator.clone(),
                n: c.n,
                trials: group.len(),
                errors: group.len() - ok.len(),
                mean_cost: mean(&costs),
                max_cost: max(&costs),
                mean_ratio_lower: mean(&lo),
                max_ratio_lower: max(&lo),
                mean_ratio_upper: mean(&hi),
                max_ratio_upper: max(&hi),
                max_gaps: ok.iter().map(|r| r.gaps_max).max(),
            }
        })
        .collect()
}

/// Rows of a sweep in configuration order, with their aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub aggregates: Vec<Aggregate>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    algorithm: &'a str,
    generator: &'a str,
    n: usize,
    seed: u64,
    cost: Option<f64>,
    mst: Option<f64>,
    opt_exact: Option<f64>,
    ratio_lower: Option<f64>,
    ratio_upper: Option<f64>,
    gaps_max: Option<usize>,
    resets: Option<usize>,
    error: Option<&'a str>,
}

impl SweepTable {
    pub fn errors(&self) -> usize {
        self.rows.iter().filter(|r| r.result.is_err()).count()
    }

    /// One JSON object per row. Rows are written in configuration order
    /// whatever order they finished in.
    pub fn write_jsonl(&self, out: &mut impl Write, timing: bool) -> std::io::Result<()> {
        for row in &self.rows {
            writeln!(out, "{}", row.to_json_line(timing))?;
        }
        Ok(())
    }

    /// Flat per-row summary. Error rows keep their config columns and carry
    /// the message in `error`.
    pub fn write_csv(&self, out: impl Write) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            let c = &row.config;
            let ok = row.result.as_ref().ok();
            let bounds = ok.and_then(|r| r.bounds);
            w.serialize(CsvRow {
                algorithm: &c.algorithm,
                generator: &c.generator,
                n: c.n,
                seed: c.seed,
                cost: ok.map(|r| r.cost),
                mst: bounds.map(|b| b.mst),
                opt_exact: bounds.and_then(|b| b.exact),
                ratio_lower: ok.and_then(|r| r.ratio_lower),
                ratio_upper: ok.and_then(|r| r.ratio_upper),
                gaps_max: ok.map(|r| r.gaps_max),
                resets: ok.map(|r| r.resets.count),
                error: row.result.as_ref().err().map(String::as_str),
            })?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs every config, in parallel, keeping per-row errors.
pub fn sweep(configs: &[RunConfig]) -> Result<SweepTable, HarnessError> {
    if configs.is_empty() {
        return Err(HarnessError::EmptySweep);
    }
    let rows: Vec<SweepRow> = configs
        .par_iter()
        .map(|c| SweepRow {
            config: c.clone(),
            result: run_single(c).map_err(|e| e.to_string()),
        })
        .collect();
    let aggregates = aggregate(&rows);
    Ok(SweepTable { rows, aggregates })
}

/// Ratio against `√n`, one row per aggregate, for plotting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub algorithm: String,
    pub generator: String,
    pub n: usize,
    pub sqrt_n: f64,
    pub trials: usize,
    pub mean_ratio_lower: Option<f64>,
    pub mean_ratio_upper: Option<f64>,
    pub max_ratio_upper: Option<f64>,
    /// `max_ratio_upper / √n`: bounded if the ratio grows like `√n`.
    pub max_ratio_upper_per_sqrt_n: Option<f64>,
}

pub fn plot_rows(aggregates: &[Aggregate]) -> Vec<PlotRow> {
    aggregates
        .iter()
        .map(|a| {
            let sqrt_n = (a.n as f64).sqrt();
            PlotRow {
                algorithm: a.algorithm.clone(),
                generator: a.generator.clone(),
                n: a.n,
                sqrt_n,
                trials: a.trials - a.errors,
                mean_ratio_lower: a.mean_ratio_lower,
                mean_ratio_upper: a.mean_ratio_upper,
                max_ratio_upper: a.max_ratio_upper,
                max_ratio_upper_per_sqrt_n: a
                    .max_ratio_upper
                    .filter(|_| sqrt_n > 0.0)
                    .map(|r| r / sqrt_n),
            }
        })
        .collect()
}

pub fn write_plot_csv(rows: &[PlotRow], out: impl Write) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_sizes_three_aggregates() {
        let plan = SweepPlan {
            algorithms: vec!["rfmb".into()],
            generators: vec!["euclidean:2".into()],
            ns: vec![16, 64, 256],
            trials: 20,
            master_seed: 1,
            want_exact: false,
        };
        let t = sweep(&plan.configs()).unwrap();
        assert_eq!(t.rows.len(), 60);
        assert_eq!(t.aggregates.len(), 3);
        assert!(t.aggregates.iter().all(|a| a.trials == 20 && a.errors == 0));
        assert_eq!(plot_rows(&t.aggregates).len(), 3);
    }

    #[test]
    fn bad_rows_do_not_abort() {
        let configs = vec![
            RunConfig::new("", "uniform:4", 10, 1),
            RunConfig::new("leftmost", "uniform:4", 10, 1),
        ];
        let t = sweep(&configs).unwrap();
        assert!(t.rows[0].result.is_err());
        assert!(t.rows[1].result.is_ok());
        assert_eq!(t.errors(), 1);
        let mut csv = Vec::new();
        t.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with(
            "algorithm,generator,n,seed,cost,mst,opt_exact,ratio_lower,ratio_upper,gaps_max,resets"
        ));
        assert_eq!(text.lines().count(), 3);
        assert!(matches!(sweep(&[]), Err(HarnessError::EmptySweep)));
    }
}

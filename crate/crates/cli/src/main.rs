//! `online-tsp`: generate instances, run placers, sweep, verify and plot.
//!
//! Exit status: 0 on success, 1 on a configuration error, 2 when a
//! verification suite fails.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use online_tsp::adversary::Generator;
use online_tsp::harness::{
    plot_rows, run_instance, run_single, sweep, verify, write_plot_csv, RunConfig, Suite, SweepPlan,
};
use online_tsp::instance::InstanceFile;

#[derive(Parser)]
#[command(
    name = "online-tsp",
    version,
    about = "Online metric TSP placement experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a generated instance (space, stream and meta) as JSON.
    Gen {
        #[arg(long)]
        generator: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Run one placer and print its record as one JSON line.
    Run {
        #[arg(long, default_value = "rfmb")]
        algorithm: String,
        /// Generator spec such as `euclidean:2`, `uniform:8`, `adversary`, `comb`.
        #[arg(long, required_unless_present = "instance")]
        generator: Option<String>,
        #[arg(long, required_unless_present = "instance")]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Run on an instance file instead of a generated stream.
        #[arg(long, conflicts_with_all = ["generator", "n"])]
        instance: Option<PathBuf>,
        /// Check the triangle inequality of matrix instances.
        #[arg(long)]
        validate_matrix: bool,
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Run every combination for `--trials` seeds; JSON lines or `--csv`.
    Sweep {
        #[command(flatten)]
        grid: Grid,
        #[arg(long)]
        csv: bool,
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Run a property suite and print its report.
    Verify {
        /// One of lemma3, lemma4, lemma6, theorem8, adversary, comb.
        #[arg(long)]
        suite: String,
        /// Trial budget.
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
    /// CSV of ratio against sqrt(n), one row per (algorithm, generator, n).
    Plotdata {
        #[command(flatten)]
        grid: Grid,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args)]
struct Grid {
    /// Comma-separated placer names.
    #[arg(long, value_delimiter = ',', default_value = "rfmb")]
    algorithm: Vec<String>,
    /// Comma-separated generator specs.
    #[arg(long, value_delimiter = ',', required = true)]
    generator: Vec<String>,
    /// Comma-separated stream lengths.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Master seed; trial seeds are derived from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    exact: bool,
}

impl Grid {
    fn plan(&self) -> Result<SweepPlan> {
        anyhow::ensure!(self.trials >= 1, "--trials must be at least 1");
        Ok(SweepPlan {
            algorithms: self.algorithm.clone(),
            generators: self.generator.clone(),
            ns: self.n.clone(),
            trials: self.trials,
            master_seed: self.seed,
            want_exact: self.exact,
        })
    }
}

#[derive(Args)]
struct Output {
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Output {
    fn open(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

/// Raised when a suite runs to completion but some check fails.
#[derive(Debug)]
struct VerificationFailed;

impl std::fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("verification failed")
    }
}

impl std::error::Error for VerificationFailed {}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen {
            generator,
            n,
            seed,
            out,
        } => {
            let g: Generator = generator.parse()?;
            let s = g.generate(n, seed)?;
            let meta = serde_json::to_value(&s.meta)?;
            let file = InstanceFile::from_space(&s.space, Some(s.order), Some(meta));
            let mut w = out.open()?;
            writeln!(w, "{}", file.to_json())?;
            w.flush()?;
        }
        Command::Run {
            algorithm,
            generator,
            n,
            seed,
            instance,
            validate_matrix,
            exact,
            timing,
            out,
        } => {
            let record = match instance {
                Some(path) => {
                    let inst = InstanceFile::read(&path)
                        .with_context(|| format!("cannot read {}", path.display()))?
                        .load(validate_matrix)?;
                    run_instance(&algorithm, &inst.space, &inst.stream, exact)?
                }
                None => {
                    let config = RunConfig::new(
                        algorithm,
                        generator.expect("required by clap"),
                        n.expect("required by clap"),
                        seed,
                    )
                    .exact(exact);
                    run_single(&config)?
                }
            };
            let mut w = out.open()?;
            writeln!(w, "{}", record.to_json_line(timing))?;
            w.flush()?;
        }
        Command::Sweep {
            grid,
            csv,
            timing,
            out,
        } => {
            let table = sweep(&grid.plan()?.configs())?;
            let mut w = out.open()?;
            if csv {
                table.write_csv(&mut w)?;
            } else {
                table.write_jsonl(&mut w, timing)?;
            }
            w.flush()?;
            if table.errors() > 0 {
                eprintln!("{} of {} rows failed", table.errors(), table.rows.len());
            }
        }
        Command::Verify {
            suite,
            trials,
            seed,
            out,
        } => {
            let suite: Suite = suite.parse().map_err(anyhow::Error::msg)?;
            let report = verify(suite, trials, seed)?;
            let mut w = out.open()?;
            writeln!(w, "{}", serde_json::to_string_pretty(&report)?)?;
            w.flush()?;
            for c in &report.checks {
                eprintln!(
                    "{} {} ({} trials, {} failures)",
                    if c.passed() { "PASS" } else { "FAIL" },
                    c.name,
                    c.trials,
                    c.failures
                );
            }
            if !report.passed {
                return Err(VerificationFailed.into());
            }
        }
        Command::Plotdata { grid, out } => {
            let table = sweep(&grid.plan()?.configs())?;
            let mut w = out.open()?;
            write_plot_csv(&plot_rows(&table.aggregates), &mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<VerificationFailed>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

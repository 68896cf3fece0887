use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use rms_sched::trainer::{evaluate, Allocation, EvalPolicy, MetricSummary};
use serde::Serialize;

use crate::error::CliError;
use crate::io::{self, PolicyKind, ResultRow, Trained};

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Scenario JSON; repeat for several scenarios.
    #[arg(long, required = true)]
    pub config: Vec<PathBuf>,
    /// Comma-separated: edf, random, fifo, dqn.
    #[arg(long, default_value = "edf,random")]
    pub policies: String,
    /// Comma-separated seeds or ranges, e.g. `0..5,9`.
    #[arg(long, default_value = "0..3")]
    pub seeds: String,
    #[arg(long, default_value_t = 5)]
    pub episodes: usize,
    /// Output directory of a `train` run, required for `dqn`.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Mask handed to heuristic policies.
    #[arg(long, value_enum, default_value = "direct")]
    pub allocation: AllocationArg,
    /// Record wall-clock seconds per episode (breaks byte-for-byte
    /// reproducibility of the CSV).
    #[arg(long)]
    pub wall_time: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum AllocationArg {
    Direct,
    Guided,
}

impl From<AllocationArg> for Allocation {
    fn from(a: AllocationArg) -> Self {
        match a {
            AllocationArg::Direct => Allocation::Direct,
            AllocationArg::Guided => Allocation::Guided,
        }
    }
}

#[derive(Debug, Serialize)]
struct SummaryEntry {
    scenario: String,
    policy: String,
    episodes: usize,
    #[serde(flatten)]
    summary: MetricSummary,
}

pub fn run(args: &BenchArgs) -> Result<(), CliError> {
    let policies: Vec<PolicyKind> =
        args.policies.split(',').filter(|p| !p.trim().is_empty()).map(PolicyKind::parse).collect::<Result<_, _>>()?;
    if policies.is_empty() {
        return Err(CliError::config("no policies given"));
    }
    let seeds = io::parse_seeds(&args.seeds)?;
    if args.episodes == 0 {
        return Err(CliError::config("--episodes must be positive"));
    }
    let scenarios = args.config.iter().map(|p| io::load_scenario(p)).collect::<Result<Vec<_>, _>>()?;
    let mut rows: Vec<ResultRow> = Vec::new();
    let mut summary = Vec::new();
    for scenario in &scenarios {
        let trained = match policies.contains(&PolicyKind::Dqn) {
            true => Some(Trained::load(io::checkpoint_dir(&args.checkpoint)?, scenario)?),
            false => None,
        };
        for kind in &policies {
            let policy = match (kind, &trained) {
                (PolicyKind::Heuristic(h), _) => EvalPolicy::heuristic(*h).with_allocation(args.allocation.into()),
                (PolicyKind::Dqn, Some(t)) => t.policy(),
                (PolicyKind::Dqn, None) => return Err(CliError::MissingCheckpoint),
            };
            let start = Instant::now();
            let report = evaluate(scenario, &policy, &seeds, args.episodes, true)?;
            let per_episode = match args.wall_time {
                true => start.elapsed().as_secs_f64() / report.rows.len() as f64,
                false => 0.0,
            };
            rows.extend(io::result_rows(&scenario.name, &report, per_episode));
            summary.push(SummaryEntry {
                scenario: scenario.name.clone(),
                policy: report.policy.clone(),
                episodes: report.rows.len(),
                summary: report.summary,
            });
        }
    }
    io::create_dir(&args.out)?;
    io::write_csv(&args.out.join("results.csv"), &rows)?;
    io::write_json(&args.out.join("summary.json"), &summary)?;
    for s in &summary {
        println!(
            "{:<12} {:<13} makespan {:.2} ± {:.2}  tardiness {:.2} ± {:.2}  completion {:.3}",
            s.scenario,
            s.policy,
            s.summary.makespan.mean,
            s.summary.makespan.std,
            s.summary.total_tardiness.mean,
            s.summary.total_tardiness.std,
            s.summary.completion_rate.mean
        );
    }
    Ok(())
}

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use rms_sched::trainer::TrainLogRow;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::io::{self, ResultRow};

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// A `train` output directory, or a train_log.csv file.
    #[arg(long)]
    pub log: PathBuf,
    /// results.csv from `bench`, for box-plot and Pareto data.
    #[arg(long)]
    pub results: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Serialize)]
struct CurvePoint {
    episode: usize,
    series: &'static str,
    value: f64,
}

#[derive(Debug, Serialize)]
struct BoxPoint<'a> {
    scenario: &'a str,
    policy: &'a str,
    metric: &'static str,
    value: f64,
}

#[derive(Debug, Serialize)]
struct ParetoPoint<'a> {
    scenario: &'a str,
    policy: &'a str,
    seed: u64,
    episode: usize,
    makespan: f64,
    total_tardiness: f64,
    frontier: bool,
}

#[derive(Debug, Deserialize)]
struct NegotiationLogRow {
    #[allow(dead_code)]
    job_id: usize,
    round: usize,
}

#[derive(Debug, Serialize)]
struct HistogramBin {
    round: usize,
    count: usize,
}

fn curves(rows: &[TrainLogRow]) -> Vec<CurvePoint> {
    let mut out = Vec::new();
    for r in rows {
        let mut push = |series, value| out.push(CurvePoint { episode: r.episode, series, value });
        push("reward", r.reward);
        push("loss", r.loss_mean);
        push("epsilon", r.epsilon);
        push("lr", r.lr);
        push("beta", r.beta);
        push("makespan", r.makespan);
        push("total_tardiness", r.total_tardiness);
        if r.negotiations > 0 {
            push("negotiation_rounds_mean", r.rounds_mean);
        }
        if let Some(v) = r.eval_makespan {
            push("eval_makespan", v);
        }
        if let Some(v) = r.eval_tardiness {
            push("eval_tardiness", v);
        }
    }
    out
}

/// Marks points no other point beats on both makespan and tardiness.
fn pareto(rows: &[ResultRow]) -> Vec<ParetoPoint<'_>> {
    rows.iter()
        .map(|r| {
            let dominated = rows.iter().any(|o| {
                o.makespan <= r.makespan
                    && o.total_tardiness <= r.total_tardiness
                    && (o.makespan < r.makespan || o.total_tardiness < r.total_tardiness)
            });
            ParetoPoint {
                scenario: &r.scenario,
                policy: &r.policy,
                seed: r.seed,
                episode: r.episode,
                makespan: r.makespan,
                total_tardiness: r.total_tardiness,
                frontier: !dominated,
            }
        })
        .collect()
}

fn boxplot(rows: &[ResultRow]) -> Vec<BoxPoint<'_>> {
    let mut out = Vec::new();
    for r in rows {
        let metrics: [(&'static str, f64); 5] = [
            ("makespan", r.makespan),
            ("total_tardiness", r.total_tardiness),
            ("avg_utilization", r.avg_utilization),
            ("total_setup_time", r.total_setup_time),
            ("objective", r.objective),
        ];
        for (metric, value) in metrics {
            out.push(BoxPoint { scenario: &r.scenario, policy: &r.policy, metric, value });
        }
    }
    out
}

fn histogram(rows: &[NegotiationLogRow]) -> Vec<HistogramBin> {
    let mut bins: BTreeMap<usize, usize> = BTreeMap::new();
    for r in rows {
        *bins.entry(r.round).or_default() += 1;
    }
    bins.into_iter().map(|(round, count)| HistogramBin { round, count }).collect()
}

fn log_paths(log: &Path) -> (PathBuf, PathBuf) {
    if log.is_dir() {
        (log.join("train_log.csv"), log.join("negotiation_log.csv"))
    } else {
        let dir = log.parent().unwrap_or(Path::new("."));
        (log.to_path_buf(), dir.join("negotiation_log.csv"))
    }
}

pub fn run(args: &PlotArgs) -> Result<(), CliError> {
    let (train_log, negotiation_log) = log_paths(&args.log);
    let train: Vec<TrainLogRow> = io::read_csv(&train_log)?;
    let results: Option<Vec<ResultRow>> = args.results.as_deref().map(io::read_csv).transpose()?;
    let negotiations: Option<Vec<NegotiationLogRow>> =
        if negotiation_log.exists() { Some(io::read_csv(&negotiation_log)?) } else { None };

    io::create_dir(&args.out)?;
    io::write_csv(&args.out.join("curves.csv"), &curves(&train))?;
    if let Some(rows) = &results {
        io::write_csv(&args.out.join("boxplot.csv"), &boxplot(rows))?;
        io::write_csv(&args.out.join("pareto.csv"), &pareto(rows))?;
    }
    if let Some(rows) = &negotiations {
        io::write_csv(&args.out.join("rounds_histogram.csv"), &histogram(rows))?;
    }
    println!("plot data for {} episodes written to {}", train.len(), args.out.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(makespan: f64, total_tardiness: f64) -> ResultRow {
        ResultRow {
            scenario: "s".into(),
            policy: "p".into(),
            seed: 0,
            episode: 0,
            makespan,
            total_tardiness,
            avg_utilization: 0.0,
            total_setup_time: 0.0,
            total_reconfig_time: 0.0,
            reconfig_count: 0,
            completion_rate: 1.0,
            objective: 0.0,
            wall_time: 0.0,
        }
    }

    #[test]
    fn frontier_by_hand() {
        let rows = [row(10.0, 5.0), row(12.0, 3.0), row(12.0, 6.0), row(10.0, 5.0)];
        let flags: Vec<bool> = pareto(&rows).iter().map(|p| p.frontier).collect();
        assert_eq!(flags, vec![true, true, false, true]);
    }

    #[test]
    fn histogram_counts_rounds() {
        let rows: Vec<NegotiationLogRow> =
            [1, 1, 2, 1, 3].iter().map(|&round| NegotiationLogRow { job_id: 0, round }).collect();
        let bins = histogram(&rows);
        assert_eq!(bins.iter().map(|b| (b.round, b.count)).collect::<Vec<_>>(), vec![(1, 3), (2, 1), (3, 1)]);
    }
}

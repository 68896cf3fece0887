use rms_sched::sim::Toggles;
use serde::Serialize;

use super::variants::{Study, StudyArgs};
use crate::error::CliError;
use crate::io::{self, ResultRow};

const CONFIGS: [(&str, bool, bool); 4] = [
    ("baseline", false, false),
    ("reconfig_only", true, false),
    ("negotiation_only", false, true),
    ("combined", true, true),
];

#[derive(Debug, Serialize)]
pub struct BreakdownRow {
    pub config: &'static str,
    pub mode: &'static str,
    pub reconfiguration: bool,
    pub negotiation: bool,
    pub status: &'static str,
    pub completion_rate: f64,
    pub makespan: f64,
    pub total_tardiness: f64,
    pub avg_utilization: f64,
    pub total_setup_time: f64,
    pub total_wait_time: f64,
    pub objective: f64,
}

pub fn run(args: &StudyArgs) -> Result<(), CliError> {
    let study = Study::load(args)?;
    if study.scenario.breakdowns.is_empty() {
        return Err(CliError::config("scenario has no breakdown plan (`breakdowns` is empty)"));
    }
    let mut table = Vec::new();
    let mut runs: Vec<ResultRow> = Vec::new();
    for (mode, breakdowns) in [("normal", false), ("breakdown", true)] {
        for (name, reconfiguration, negotiation) in CONFIGS {
            let label = format!("{name}/{mode}");
            let (scenario, report) = study.run(Toggles { reconfiguration, negotiation }, breakdowns, &label)?;
            let n = report.rows.len() as f64;
            let mean = |f: fn(&rms_sched::sim::EpisodeMetrics) -> f64| {
                report.rows.iter().map(|r| f(&r.metrics)).sum::<f64>() / n
            };
            let completion = report.summary.completion_rate.mean;
            table.push(BreakdownRow {
                config: name,
                mode,
                reconfiguration,
                negotiation,
                status: if completion < 1.0 { "FAIL" } else { "OK" },
                completion_rate: completion,
                makespan: mean(|m| m.makespan),
                total_tardiness: mean(|m| m.total_tardiness),
                avg_utilization: mean(|m| m.avg_utilization),
                total_setup_time: mean(|m| m.total_setup_time),
                total_wait_time: mean(|m| m.total_wait_time),
                objective: mean(|m| m.objective),
            });
            runs.extend(io::result_rows(&scenario.name, &report, 0.0));
        }
    }
    io::create_dir(&args.out)?;
    io::write_csv(&args.out.join("breakdown.csv"), &table)?;
    io::write_csv(&args.out.join("breakdown_runs.csv"), &runs)?;
    for r in &table {
        println!(
            "{:<17} {:<9} {:<4} completion {:>6.1}%  makespan {:>8.2}  objective {:>10.2}",
            r.config,
            r.mode,
            r.status,
            100.0 * r.completion_rate,
            r.makespan,
            r.objective
        );
    }
    Ok(())
}

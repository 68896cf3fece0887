use rms_sched::sim::Toggles;
use serde::Serialize;

use super::variants::{Study, StudyArgs};
use crate::error::CliError;
use crate::io::{self, ResultRow};

/// The four toggle combinations, named by negotiation (N with, T without)
/// and reconfiguration (R reconfigurable, F fixed).
pub const CONFIGS: [(&str, bool, bool); 4] =
    [("WNR", true, true), ("WTR", false, true), ("WNF", true, false), ("WTF", false, false)];

#[derive(Debug, Serialize)]
pub struct FactorialRow {
    pub config: &'static str,
    pub negotiation: bool,
    pub reconfiguration: bool,
    pub episodes: usize,
    pub makespan: f64,
    pub total_tardiness: f64,
    pub avg_utilization: f64,
    pub total_setup_time: f64,
    pub total_reconfig_time: f64,
    pub reconfig_time_per_machine: f64,
    pub reconfig_count: f64,
    pub completion_rate: f64,
    pub objective: f64,
}

pub fn run(args: &StudyArgs) -> Result<(), CliError> {
    let study = Study::load(args)?;
    let machines = study.scenario.machine_count() as f64;
    let mut table = Vec::new();
    let mut runs: Vec<ResultRow> = Vec::new();
    for (name, negotiation, reconfiguration) in CONFIGS {
        let (scenario, report) = study.run(Toggles { reconfiguration, negotiation }, true, name)?;
        let s = report.summary;
        table.push(FactorialRow {
            config: name,
            negotiation,
            reconfiguration,
            episodes: report.rows.len(),
            makespan: s.makespan.mean,
            total_tardiness: s.total_tardiness.mean,
            avg_utilization: s.avg_utilization.mean,
            total_setup_time: s.total_setup_time.mean,
            total_reconfig_time: s.total_reconfig_time.mean,
            reconfig_time_per_machine: s.total_reconfig_time.mean / machines,
            reconfig_count: s.reconfig_count.mean,
            completion_rate: s.completion_rate.mean,
            objective: s.objective.mean,
        });
        runs.extend(io::result_rows(&scenario.name, &report, 0.0));
    }
    io::create_dir(&args.out)?;
    io::write_csv(&args.out.join("factorial.csv"), &table)?;
    io::write_csv(&args.out.join("factorial_runs.csv"), &runs)?;
    println!("{:<4} {:>10} {:>12} {:>8} {:>14}", "cfg", "makespan", "tardiness", "util", "reconfig_time");
    for r in &table {
        println!(
            "{:<4} {:>10.2} {:>12.2} {:>8.3} {:>14.2}",
            r.config, r.makespan, r.total_tardiness, r.avg_utilization, r.total_reconfig_time
        );
    }
    Ok(())
}

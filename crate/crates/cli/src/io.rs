use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use rms_sched::agent::{EnhancedDqn, ObservationSpec};
use rms_sched::baselines::HeuristicKind;
use rms_sched::negotiation::Negotiator;
use rms_sched::sim::{new_scenario, ScenarioConfig};
use rms_sched::trainer::{Allocation, EvalPolicy, EvalReport, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const AGENT_FILE: &str = "agent.json";
pub const NEGOTIATOR_FILE: &str = "negotiator.json";
pub const TRAIN_CONFIG_FILE: &str = "train_config.json";

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

pub fn load_scenario(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = read_text(path)?;
    ScenarioConfig::from_json(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

pub fn load_train_config(path: &Path) -> Result<TrainConfig, CliError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

pub fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).context("serializing json")?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for r in rows {
        w.serialize(r).with_context(|| format!("writing {}", path.display()))?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, CliError> {
    if !path.exists() {
        return Err(CliError::MissingLog(path.to_path_buf()));
    }
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let rows = r.deserialize().collect::<Result<Vec<T>, _>>();
    rows.map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

/// Worker cap from `RMS_SCHED_THREADS`.
pub fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var("RMS_SCHED_THREADS") {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| CliError::config(format!("RMS_SCHED_THREADS must be a positive integer, got `{v}`"))),
        _ => Ok(None),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    Heuristic(HeuristicKind),
    Dqn,
}

impl PolicyKind {
    pub fn parse(name: &str) -> Result<Self, CliError> {
        Ok(match name.trim().to_ascii_lowercase().as_str() {
            "edf" => PolicyKind::Heuristic(HeuristicKind::Edf),
            "random" => PolicyKind::Heuristic(HeuristicKind::Random),
            "fifo" => PolicyKind::Heuristic(HeuristicKind::Fifo),
            "dqn" | "enhanced_dqn" => PolicyKind::Dqn,
            other => return Err(CliError::config(format!("unknown policy `{other}` (edf, random, fifo, dqn)"))),
        })
    }
}

/// A trained agent read back from a `train` output directory.
pub struct Trained {
    pub agent: EnhancedDqn,
    pub negotiator: Option<Negotiator>,
    pub allocation: Allocation,
}

impl Trained {
    pub fn load(dir: &Path, scenario: &ScenarioConfig) -> Result<Self, CliError> {
        let agent_path = dir.join(AGENT_FILE);
        if !agent_path.exists() {
            return Err(CliError::MissingCheckpoint);
        }
        let spec = ObservationSpec::of(&new_scenario(scenario, 0)?);
        let agent = EnhancedDqn::load(&agent_path, Some(&spec)).map_err(CliError::config)?;
        let neg_path = dir.join(NEGOTIATOR_FILE);
        let negotiator = if neg_path.exists() {
            Some(Negotiator::from_json(&read_text(&neg_path)?).map_err(CliError::config)?)
        } else {
            None
        };
        let cfg_path = dir.join(TRAIN_CONFIG_FILE);
        let allocation =
            if cfg_path.exists() { load_train_config(&cfg_path)?.allocation } else { TrainConfig::default().allocation };
        Ok(Self { agent, negotiator, allocation })
    }

    pub fn policy(&self) -> EvalPolicy<'_> {
        EvalPolicy::dqn(&self.agent, self.negotiator.as_ref()).with_allocation(self.allocation)
    }
}

pub fn checkpoint_dir(arg: &Option<PathBuf>) -> Result<&Path, CliError> {
    arg.as_deref().ok_or(CliError::MissingCheckpoint)
}

/// One evaluation episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scenario: String,
    pub policy: String,
    pub seed: u64,
    pub episode: usize,
    pub makespan: f64,
    pub total_tardiness: f64,
    pub avg_utilization: f64,
    pub total_setup_time: f64,
    pub total_reconfig_time: f64,
    pub reconfig_count: usize,
    pub completion_rate: f64,
    pub objective: f64,
    pub wall_time: f64,
}

pub fn result_rows(scenario: &str, report: &EvalReport, wall_time: f64) -> Vec<ResultRow> {
    report
        .rows
        .iter()
        .map(|r| ResultRow {
            scenario: scenario.to_string(),
            policy: report.policy.clone(),
            seed: r.seed,
            episode: r.episode,
            makespan: r.metrics.makespan,
            total_tardiness: r.metrics.total_tardiness,
            avg_utilization: r.metrics.avg_utilization,
            total_setup_time: r.metrics.total_setup_time,
            total_reconfig_time: r.metrics.total_reconfig_time,
            reconfig_count: r.metrics.reconfig_count,
            completion_rate: r.metrics.completion_rate,
            objective: r.metrics.objective,
            wall_time,
        })
        .collect()
}

pub fn parse_seeds(text: &str) -> Result<Vec<u64>, CliError> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || CliError::config(format!("bad seed list entry `{part}`"));
        match part.split_once("..") {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
                out.extend(a..b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    if out.is_empty() {
        return Err(CliError::config("seed list is empty"));
    }
    Ok(out)
}

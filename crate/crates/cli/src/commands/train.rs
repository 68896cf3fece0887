use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use rms_sched::negotiation::write_negotiation_log;
use rms_sched::trainer::{run_training_with, write_train_log, TrainConfig, TrainError};

use crate::error::CliError;
use crate::io::{self, AGENT_FILE, NEGOTIATOR_FILE, TRAIN_CONFIG_FILE};

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Scenario JSON.
    #[arg(long)]
    pub config: PathBuf,
    /// Training hyperparameters as JSON; missing fields take defaults.
    #[arg(long)]
    pub train_config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub episodes: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &TrainArgs) -> Result<(), CliError> {
    let scenario = io::load_scenario(&args.config)?;
    let mut cfg = match &args.train_config {
        Some(p) => io::load_train_config(p)?,
        None => TrainConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(episodes) = args.episodes {
        cfg.episodes = episodes;
    }
    cfg.validate()?;
    io::create_dir(&args.out)?;
    let ckpt_dir = args.out.join("checkpoints");
    let outcome = run_training_with(&scenario, &cfg, |episode, agent| {
        fs::create_dir_all(&ckpt_dir)?;
        agent.save(ckpt_dir.join(format!("agent_ep{:05}.json", episode + 1)))?;
        Ok::<(), TrainError>(())
    })?;

    let log_path = args.out.join("train_log.csv");
    let file = fs::File::create(&log_path).with_context(|| format!("writing {}", log_path.display()))?;
    write_train_log(&outcome.log, file).context("writing train log")?;
    outcome.agent.save(args.out.join(AGENT_FILE)).context("writing agent checkpoint")?;
    if let Some(n) = &outcome.negotiator {
        let path = args.out.join(NEGOTIATOR_FILE);
        fs::write(&path, n.to_json()).with_context(|| format!("writing {}", path.display()))?;
    }
    let neg_path = args.out.join("negotiation_log.csv");
    let file = fs::File::create(&neg_path).with_context(|| format!("writing {}", neg_path.display()))?;
    write_negotiation_log(&outcome.negotiation_records, file).context("writing negotiation log")?;
    io::write_json(&args.out.join(TRAIN_CONFIG_FILE), &cfg)?;
    println!(
        "trained {} episodes on `{}`; outputs in {}",
        outcome.log.len(),
        scenario.name,
        args.out.display()
    );
    Ok(())
}

use std::path::PathBuf;

use clap::Args;
use rms_sched::sim::{ScenarioConfig, Toggles};
use rms_sched::trainer::{evaluate, Allocation, EvalPolicy, EvalReport};

use crate::error::CliError;
use crate::io::{self, PolicyKind, Trained};

/// Options shared by the toggle studies.
#[derive(Debug, Args)]
pub struct StudyArgs {
    /// Scenario JSON.
    #[arg(long)]
    pub config: PathBuf,
    /// edf, random, fifo or dqn.
    #[arg(long, default_value = "edf")]
    pub policy: String,
    #[arg(long, default_value = "0..5")]
    pub seeds: String,
    #[arg(long, default_value_t = 4)]
    pub episodes: usize,
    /// Output directory of a `train` run, required for `dqn`.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

pub struct Study {
    pub scenario: ScenarioConfig,
    pub kind: PolicyKind,
    pub trained: Option<Trained>,
    pub seeds: Vec<u64>,
    pub episodes: usize,
}

impl Study {
    pub fn load(args: &StudyArgs) -> Result<Self, CliError> {
        let scenario = io::load_scenario(&args.config)?;
        let kind = PolicyKind::parse(&args.policy)?;
        let trained = match kind {
            PolicyKind::Dqn => Some(Trained::load(io::checkpoint_dir(&args.checkpoint)?, &scenario)?),
            PolicyKind::Heuristic(_) => None,
        };
        if args.episodes == 0 {
            return Err(CliError::config("--episodes must be positive"));
        }
        Ok(Self { scenario, kind, trained, seeds: io::parse_seeds(&args.seeds)?, episodes: args.episodes })
    }

    /// Evaluates the policy, with proposal-guided allocation, on a copy of
    /// the scenario with the given toggles and breakdown plan.
    pub fn run(&self, toggles: Toggles, breakdowns: bool, label: &str) -> Result<(ScenarioConfig, EvalReport), CliError> {
        let mut scenario = ScenarioConfig { toggles, name: format!("{}/{label}", self.scenario.name), ..self.scenario.clone() };
        if !breakdowns {
            scenario.breakdowns.clear();
        }
        let policy = match (&self.kind, &self.trained) {
            (PolicyKind::Heuristic(h), _) => EvalPolicy::heuristic(*h),
            (PolicyKind::Dqn, Some(t)) => t.policy(),
            (PolicyKind::Dqn, None) => return Err(CliError::MissingCheckpoint),
        };
        let report = evaluate(&scenario, &policy.with_allocation(Allocation::Guided), &self.seeds, self.episodes, true)?;
        Ok((scenario, report))
    }
}

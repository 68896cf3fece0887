use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

/// One training episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainLogRow {
    pub episode: usize,
    pub seed: u64,
    /// Sum of step rewards.
    pub reward: f64,
    pub decisions: usize,
    pub learn_steps: usize,
    pub loss_mean: f64,
    pub nonfinite_losses: usize,
    pub grad_norm_mean: f64,
    pub epsilon: f64,
    pub lr: f64,
    pub beta: f64,
    pub negotiations: usize,
    pub rounds_mean: f64,
    pub negotiation_updates: usize,
    pub l_n: f64,
    pub l_m: f64,
    pub makespan: f64,
    pub total_tardiness: f64,
    pub completion_rate: f64,
    pub objective: f64,
    pub eval_makespan: Option<f64>,
    pub eval_tardiness: Option<f64>,
}

/// Per-episode training history, append-only.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainLog {
    pub rows: Vec<TrainLogRow>,
}

impl TrainLog {
    pub fn push(&mut self, row: TrainLogRow) {
        debug_assert_eq!(row.episode, self.rows.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rewards(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.reward).collect()
    }

    pub fn epsilons(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.epsilon).collect()
    }
}

pub fn write_train_log<W: Write>(log: &TrainLog, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in &log.rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_train_log<R: Read>(input: R) -> csv::Result<TrainLog> {
    let mut r = csv::Reader::from_reader(input);
    let rows = r.deserialize().collect::<Result<Vec<TrainLogRow>, _>>()?;
    Ok(TrainLog { rows })
}

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bids::{collect_bids, Bid, JobRequest};
use super::nets::{scale_bids, BidHead, ScoringNet};
use super::protocol::{
    entropy, normalized_advantages, resolve_conflicts, softmax_select, urgency, Candidate, Resolution, RoundOutcome,
};
use super::NegotiationError;
use crate::nn::{Adam, Matrix, Module, ParamSnapshot};
use crate::sim::SystemState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NegotiationConfig {
    pub scorer_hidden: usize,
    pub head_hidden: usize,
    pub max_rounds: usize,
    pub slack_floor: f64,
    pub entropy_n: f64,
    pub entropy_m: f64,
    pub lr_n: f64,
    pub lr_m: f64,
    /// Records collected between policy updates.
    pub train_every: usize,
    pub seed: u64,
}

impl Default for NegotiationConfig {
    fn default() -> Self {
        Self {
            scorer_hidden: 16,
            head_hidden: 16,
            max_rounds: 8,
            slack_floor: 0.1,
            entropy_n: 0.01,
            entropy_m: 0.01,
            lr_n: 1e-3,
            lr_m: 1e-3,
            train_every: 32,
            seed: 0,
        }
    }
}

/// One completed negotiation, kept for the policy update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegotiationRecord {
    pub job_id: usize,
    pub round: usize,
    pub rounds_used: usize,
    pub bids: Vec<Bid>,
    pub alpha: Vec<f64>,
    /// Index into `bids`.
    pub winner: usize,
    pub reward: f64,
}

impl NegotiationRecord {
    pub fn from_outcome(o: &RoundOutcome, rounds_used: usize, reward: f64) -> Self {
        Self {
            job_id: o.job_id,
            round: o.round,
            rounds_used,
            bids: o.bids.clone(),
            alpha: o.alpha.clone(),
            winner: o.winner,
            reward,
        }
    }

    pub fn winner_machine(&self) -> usize {
        self.bids[self.winner].machine_id
    }
}

/// Losses of one update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NegotiationLosses {
    pub l_n: f64,
    pub l_m: f64,
}

/// Scoring network, shared bid head and their optimizers.
#[derive(Debug, Clone)]
pub struct Negotiator {
    pub config: NegotiationConfig,
    pub scorer: ScoringNet,
    pub head: BidHead,
    opt_n: Adam,
    opt_m: Adam,
    pending: Vec<NegotiationRecord>,
    pub updates: usize,
}

impl Negotiator {
    pub fn new(machines: usize, config: NegotiationConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x6e65_676f);
        Self {
            scorer: ScoringNet::new(config.scorer_hidden, &mut rng),
            head: BidHead::new(machines, config.head_hidden, &mut rng),
            opt_n: Adam::new(config.lr_n),
            opt_m: Adam::new(config.lr_m),
            pending: Vec::new(),
            updates: 0,
            config,
        }
    }

    /// Scores `h` for a bid list, after the machines' bid adjustment.
    pub fn score(&self, bids: &[Bid]) -> Result<Vec<f64>, NegotiationError> {
        if bids.is_empty() {
            return Err(NegotiationError::NoBids);
        }
        let (adjusted, _) = self.adjust(bids)?;
        Ok(self.scorer.forward(&adjusted)?.0)
    }

    fn adjust(&self, bids: &[Bid]) -> Result<(Matrix, super::nets::BidHeadCache), NegotiationError> {
        let raw: Vec<[f64; 5]> = bids.iter().map(|b| b.y).collect();
        let machines: Vec<usize> = bids.iter().map(|b| b.machine_id).collect();
        Ok(self.head.forward(&scale_bids(&raw), &machines)?)
    }

    /// Attention weights over the bids and the winning bid index.
    pub fn score_and_select(&self, bids: &[Bid]) -> Result<(Vec<f64>, usize), NegotiationError> {
        softmax_select(&self.score(bids)?)
    }

    /// Runs the round protocol over the current job view.
    pub fn propose(&self, state: &SystemState) -> Resolution {
        let candidates: Vec<Candidate> = state
            .job_view
            .iter()
            .filter_map(|&id| {
                let req = JobRequest::of(state, id)?;
                let bids = collect_bids(state, &req);
                if bids.is_empty() {
                    return None;
                }
                let j = &state.jobs[id];
                let u = urgency(j.priority as f64, j.due_date, state.clock, j.remaining_work(), self.config.slack_floor);
                Some(Candidate { job_id: id, urgency: u, bids })
            })
            .collect();
        resolve_conflicts(&candidates, self.config.max_rounds, |_, bids| {
            self.score(bids).expect("non-empty bid list scores")
        })
    }

    pub fn pending(&self) -> usize {
        self.pending.len()
    }

    /// Queues a record; runs an update once enough have accumulated.
    pub fn push(&mut self, record: NegotiationRecord) -> Result<Option<NegotiationLosses>, NegotiationError> {
        self.pending.push(record);
        if self.pending.len() >= self.config.train_every {
            let batch = std::mem::take(&mut self.pending);
            return self.train(&batch).map(Some);
        }
        Ok(None)
    }

    /// Loss values on `records` without touching parameters.
    pub fn losses(&self, records: &[NegotiationRecord]) -> Result<NegotiationLosses, NegotiationError> {
        if records.len() < 2 {
            return Err(NegotiationError::BatchTooSmall(records.len()));
        }
        let adv = normalized_advantages(&records.iter().map(|r| r.reward).collect::<Vec<_>>());
        let n = records.len() as f64;
        let (mut l_n, mut l_m) = (0.0, 0.0);
        for (rec, a) in records.iter().zip(&adv) {
            let (alpha, _) = softmax_select(&self.score(&rec.bids)?)?;
            let pg = -a * alpha[rec.winner].ln();
            let h = entropy(&alpha);
            l_n += (pg - self.config.entropy_n * h) / n;
            l_m += (pg - self.config.entropy_m * h) / n;
        }
        Ok(NegotiationLosses { l_n, l_m })
    }

    /// Accumulates the gradients of `L_N` into the scorer and of `L_M` into
    /// the bid head. Gradients are not cleared first.
    pub fn accumulate_gradients(&mut self, records: &[NegotiationRecord]) -> Result<NegotiationLosses, NegotiationError> {
        let losses = self.losses(records)?;
        let adv = normalized_advantages(&records.iter().map(|r| r.reward).collect::<Vec<_>>());
        let n = records.len() as f64;
        for (rec, a) in records.iter().zip(&adv) {
            let (adjusted, hc) = self.adjust(&rec.bids)?;
            let (h, sc) = self.scorer.forward(&adjusted)?;
            let (alpha, _) = softmax_select(&h)?;
            let ent = entropy(&alpha);
            let grad = |beta: f64| -> Vec<f64> {
                alpha
                    .iter()
                    .enumerate()
                    .map(|(j, &p)| {
                        let onehot = if j == rec.winner { 1.0 } else { 0.0 };
                        let ent_term = if p > 0.0 { beta * p * (p.ln() + ent) } else { 0.0 };
                        (-a * (onehot - p) + ent_term) / n
                    })
                    .collect()
            };
            let mut scratch = self.scorer.clone();
            let dy = scratch.backward(&sc, &grad(self.config.entropy_m))?;
            self.scorer.backward(&sc, &grad(self.config.entropy_n))?;
            self.head.backward(&hc, &dy)?;
        }
        Ok(losses)
    }

    /// One policy-gradient step on both the scorer and the bid head.
    pub fn train(&mut self, records: &[NegotiationRecord]) -> Result<NegotiationLosses, NegotiationError> {
        self.scorer.zero_grad();
        self.head.zero_grad();
        let losses = self.accumulate_gradients(records)?;
        self.opt_n.step(&mut self.scorer);
        self.opt_m.step(&mut self.head);
        self.updates += 1;
        Ok(losses)
    }
}

#[derive(Serialize, Deserialize)]
struct NegotiatorState {
    config: NegotiationConfig,
    machines: usize,
    scorer: ParamSnapshot,
    head: ParamSnapshot,
    updates: usize,
}

impl Negotiator {
    /// Network weights and config as JSON. Optimizer moments are not kept.
    pub fn to_json(&self) -> String {
        let doc = NegotiatorState {
            config: self.config,
            machines: self.head.embed.rows,
            scorer: ParamSnapshot::of(&self.scorer),
            head: ParamSnapshot::of(&self.head),
            updates: self.updates,
        };
        serde_json::to_string(&doc).expect("negotiator serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, NegotiationError> {
        let doc: NegotiatorState = serde_json::from_str(text).map_err(|e| NegotiationError::Corrupt(e.to_string()))?;
        let mut n = Negotiator::new(doc.machines, doc.config);
        doc.scorer.restore(&mut n.scorer)?;
        doc.head.restore(&mut n.head)?;
        n.updates = doc.updates;
        Ok(n)
    }
}

/// CSV columns: job_id, round, bidders, alpha, winner, reward. List-valued
/// fields are `;`-separated.
pub fn write_negotiation_log<W: Write>(records: &[NegotiationRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["job_id", "round", "bidders", "alpha", "winner", "reward"])?;
    for r in records {
        let bidders: Vec<String> = r.bids.iter().map(|b| b.machine_id.to_string()).collect();
        let alpha: Vec<String> = r.alpha.iter().map(|a| a.to_string()).collect();
        w.write_record([
            r.job_id.to_string(),
            r.round.to_string(),
            bidders.join(";"),
            alpha.join(";"),
            r.winner_machine().to_string(),
            r.reward.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

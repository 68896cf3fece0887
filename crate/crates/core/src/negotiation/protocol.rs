use super::bids::Bid;
use super::NegotiationError;

/// `alpha = softmax(h)` and the index of its largest entry (lowest index on
/// ties).
pub fn softmax_select(scores: &[f64]) -> Result<(Vec<f64>, usize), NegotiationError> {
    if scores.is_empty() {
        return Err(NegotiationError::NoBids);
    }
    let mut alpha = scores.to_vec();
    crate::nn::softmax_in_place(&mut alpha);
    let mut winner = 0;
    for (i, &a) in alpha.iter().enumerate() {
        if a > alpha[winner] {
            winner = i;
        }
    }
    Ok((alpha, winner))
}

pub fn entropy(alpha: &[f64]) -> f64 {
    -alpha.iter().filter(|&&a| a > 0.0).map(|a| a * a.ln()).sum::<f64>()
}

/// `(r - mean) / (std + 1e-8)` with the population standard deviation.
pub fn normalized_advantages(rewards: &[f64]) -> Vec<f64> {
    let n = rewards.len() as f64;
    let mean = rewards.iter().sum::<f64>() / n;
    let var = rewards.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    rewards.iter().map(|r| (r - mean) / (std + 1e-8)).collect()
}

/// Priority over floored critical ratio: `rho / max(slack, floor)` with
/// `slack = (due - now) / remaining work`.
pub fn urgency(priority: f64, due: f64, now: f64, remaining_work: f64, floor: f64) -> f64 {
    let slack = (due - now) / remaining_work.max(1e-9);
    priority / slack.max(floor)
}

/// A job taking part in a negotiation round.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub job_id: usize,
    pub urgency: f64,
    pub bids: Vec<Bid>,
}

/// Scoring outcome of one job in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutcome {
    pub job_id: usize,
    pub round: usize,
    pub bids: Vec<Bid>,
    pub alpha: Vec<f64>,
    /// Index into `bids`.
    pub winner: usize,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Resolution {
    /// `(job, machine)` pairs, no job or machine twice.
    pub assignments: Vec<(usize, usize)>,
    pub rounds: usize,
    pub outcomes: Vec<RoundOutcome>,
}

impl Resolution {
    /// The accepted scoring outcome for `job`, if it was placed.
    pub fn accepted(&self, job: usize) -> Option<&RoundOutcome> {
        self.outcomes.iter().find(|o| o.job_id == job && o.accepted)
    }
}

/// Repeated bid/score/select rounds. In each round every unplaced job scores
/// the bids of machines still free and targets its winner; a machine wanted
/// by several jobs goes to the most urgent one (earliest candidate on ties)
/// and the others retry next round.
pub fn resolve_conflicts(
    candidates: &[Candidate],
    max_rounds: usize,
    mut score: impl FnMut(&Candidate, &[Bid]) -> Vec<f64>,
) -> Resolution {
    let mut res = Resolution::default();
    let mut placed = vec![false; candidates.len()];
    let mut taken: Vec<usize> = Vec::new();
    for round in 1..=max_rounds {
        let mut wants: Vec<(usize, usize, RoundOutcome)> = Vec::new();
        for (ci, c) in candidates.iter().enumerate() {
            if placed[ci] {
                continue;
            }
            let open: Vec<Bid> = c.bids.iter().copied().filter(|b| !taken.contains(&b.machine_id)).collect();
            if open.is_empty() {
                continue;
            }
            let h = score(c, &open);
            let Ok((alpha, winner)) = softmax_select(&h) else { continue };
            let machine = open[winner].machine_id;
            let outcome = RoundOutcome { job_id: c.job_id, round, bids: open, alpha, winner, accepted: false };
            wants.push((ci, machine, outcome));
        }
        if wants.is_empty() {
            break;
        }
        res.rounds = round;
        let mut machines: Vec<usize> = wants.iter().map(|w| w.1).collect();
        machines.sort_unstable();
        machines.dedup();
        let mut accepted = Vec::new();
        for m in machines {
            let best = wants
                .iter()
                .enumerate()
                .filter(|(_, w)| w.1 == m)
                .fold(None::<usize>, |best, (k, w)| match best {
                    Some(b) if candidates[wants[b].0].urgency >= candidates[w.0].urgency => Some(b),
                    _ => Some(k),
                })
                .expect("machine has a bidder");
            accepted.push(best);
        }
        for (k, (ci, m, mut outcome)) in wants.into_iter().enumerate() {
            if accepted.contains(&k) {
                placed[ci] = true;
                taken.push(m);
                res.assignments.push((candidates[ci].job_id, m));
                outcome.accepted = true;
            }
            res.outcomes.push(outcome);
        }
        if placed.iter().all(|&p| p) {
            break;
        }
    }
    res
}

use serde::{Deserialize, Serialize};

use crate::sim::SystemState;

/// What a job announces when it looks for a machine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JobRequest {
    pub job_id: usize,
    pub process: usize,
    /// Time left until the due date (negative when already late).
    pub time_to_deadline: f64,
    pub priority: f64,
    pub processing_time: f64,
}

impl JobRequest {
    pub fn of(state: &SystemState, job_id: usize) -> Option<Self> {
        let j = state.jobs.get(job_id)?;
        Some(Self {
            job_id,
            process: j.next_process()?,
            time_to_deadline: j.due_date - state.clock,
            priority: j.priority as f64,
            processing_time: j.next_processing_time()?,
        })
    }

    pub fn vector(&self) -> [f64; 4] {
        [self.process as f64, self.time_to_deadline, self.priority, self.processing_time]
    }
}

/// A machine's offer: `[flexibility, reliability, utilization, setup
/// estimate, processing cost]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bid {
    pub machine_id: usize,
    pub y: [f64; 5],
    pub requires_reconfig: bool,
}

/// One bid from every machine that could start the job's next operation now,
/// whether in its active configuration or after a reconfiguration.
pub fn collect_bids(state: &SystemState, request: &JobRequest) -> Vec<Bid> {
    let t = state.clock;
    state
        .machines
        .iter()
        .filter_map(|m| {
            let r = state.pair_delay(request.job_id, m.id)?;
            let requires_reconfig = state.needs_reconfig(request.job_id, m.id);
            let u = if t > 0.0 { (m.busy_time_accum / t).clamp(0.0, 1.0) } else { 0.0 };
            Some(Bid {
                machine_id: m.id,
                y: [m.flexibility, m.reliability, u, m.setup_time + r, request.processing_time / m.efficiency],
                requires_reconfig,
            })
        })
        .collect()
}

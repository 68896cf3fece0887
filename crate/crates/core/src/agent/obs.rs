use serde::{Deserialize, Serialize};

use crate::sim::{JobStatus, SystemState};

/// Shape of the flat observation vector.
///
/// Layout: one `P + 5` segment per machine (status, active-configuration
/// multi-hot, remaining busy time, flexibility, reliability, utilization so
/// far), one `P + 3` segment per view slot (next-process one-hot, remaining
/// work, priority / 5, slack), then clock and completed fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationSpec {
    pub machines: usize,
    pub processes: usize,
    pub view_size: usize,
}

impl ObservationSpec {
    pub fn new(machines: usize, processes: usize, view_size: usize) -> Self {
        Self { machines, processes, view_size }
    }

    pub fn of(state: &SystemState) -> Self {
        Self::new(state.machines.len(), state.process_count, state.view_size)
    }

    pub fn machine_features(&self) -> usize {
        self.processes + 5
    }

    pub fn job_features(&self) -> usize {
        self.processes + 3
    }

    pub fn machine_segment(&self) -> usize {
        self.machines * self.machine_features()
    }

    pub fn dim(&self) -> usize {
        self.machine_segment() + self.view_size * self.job_features() + 2
    }

    pub fn actions(&self) -> usize {
        self.view_size * self.machines + 1
    }

    pub fn encode(&self, state: &SystemState) -> Vec<f64> {
        debug_assert_eq!(*self, Self::of(state));
        let h = state.horizon;
        let t = state.clock;
        let mut out = Vec::with_capacity(self.dim());
        for m in &state.machines {
            out.push(if m.broken {
                -1.0
            } else if m.busy_until > t {
                1.0
            } else {
                0.0
            });
            let start = out.len();
            out.resize(start + self.processes, 0.0);
            for &p in m.current_config() {
                out[start + p] = 1.0;
            }
            out.push((m.busy_until - t).max(0.0) / h);
            out.push(m.flexibility);
            out.push(m.reliability);
            out.push(if t > 0.0 { (m.busy_time_accum / t).min(1.0) } else { 0.0 });
        }
        for slot in 0..self.view_size {
            let start = out.len();
            out.resize(start + self.job_features(), 0.0);
            let Some(&id) = state.job_view.get(slot) else { continue };
            let j = &state.jobs[id];
            if let Some(p) = j.next_process() {
                out[start + p] = 1.0;
            }
            let tail = start + self.processes;
            out[tail] = j.remaining_work() / h;
            out[tail + 1] = j.priority as f64 / 5.0;
            out[tail + 2] = (j.due_date - t) / h;
        }
        out.push(t / h);
        let finished = state.jobs.iter().filter(|j| matches!(j.status, JobStatus::Completed { .. })).count();
        out.push(finished as f64 / state.jobs.len() as f64);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{new_scenario, ScenarioConfig};

    #[test]
    fn reference_dimension() {
        let s = new_scenario(&ScenarioConfig::reference(), 42).unwrap();
        let spec = ObservationSpec::of(&s);
        assert_eq!(spec.dim(), 5 * 11 + 10 * 9 + 2);
        assert_eq!(spec.encode(&s).len(), spec.dim());
    }

    #[test]
    fn machine_segment_reflects_configuration() {
        let s = new_scenario(&ScenarioConfig::reference(), 1).unwrap();
        let spec = ObservationSpec::of(&s);
        let obs = spec.encode(&s);
        // machine 0 starts in its native set {0, 2}
        assert_eq!(&obs[1..7], &[1.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(obs[0], 0.0);
    }
}

use crate::sim::{Feasibility, SystemState};

/// Allocation without negotiation: each viewed job goes to the working
/// machine that can run its next process in its active configuration and
/// frees up first (lowest id on ties), and is proposed only if that machine
/// is free now. Reconfiguration is considered only when no working machine
/// has the process active.
pub fn earliest_available(state: &SystemState) -> Vec<(usize, usize)> {
    let t = state.clock;
    let mut out = Vec::new();
    for &job in &state.job_view {
        let Some(p) = state.jobs[job].next_process() else { continue };
        let working = || state.machines.iter().filter(|m| !m.broken);
        let active: Vec<_> = working().filter(|m| m.current_config().contains(&p)).collect();
        let pool: Vec<_> = if active.is_empty() && state.toggles.reconfiguration {
            working().filter(|m| m.can_host(p, true)).collect()
        } else {
            active
        };
        let first = pool
            .into_iter()
            .min_by(|a, b| a.busy_until.max(t).total_cmp(&b.busy_until.max(t)).then(a.id.cmp(&b.id)));
        if let Some(m) = first {
            if state.pair_delay(job, m.id).is_some() {
                out.push((job, m.id));
            }
        }
    }
    out
}

/// Narrows the environment mask to the proposed pairs. Idle stays available
/// when the environment allows it or nothing was proposed.
pub fn restrict_mask(state: &SystemState, proposals: &[(usize, usize)], raw: &Feasibility) -> Vec<bool> {
    let space = state.action_space();
    let mut mask = vec![false; space.len()];
    for &(job, machine) in proposals {
        if let Some(slot) = state.job_view.iter().position(|&j| j == job) {
            let idx = space.encode(slot, machine);
            if raw.mask[idx] {
                mask[idx] = true;
            }
        }
    }
    let any = mask.iter().any(|&b| b);
    mask[space.idle()] = raw.mask[space.idle()] || !any;
    mask
}

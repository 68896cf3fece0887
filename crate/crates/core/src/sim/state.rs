use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{
    ArrivalMode, BreakdownSpec, FourthTerm, JobSpec, MachineSpec, ObjectiveWeights, RewardConfig,
    ScenarioConfig, Toggles,
};
use super::events::{Event, EventKind};
use super::reward::{self, RewardSnapshot};
use super::{ActionSpace, SimError};

pub type ProcessId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum JobStatus {
    Pending,
    InProgress { step: usize, machine: usize, finish: f64 },
    Completed { at: f64 },
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub id: usize,
    pub process_sequence: Vec<ProcessId>,
    pub processing_times: Vec<f64>,
    pub priority: u8,
    pub due_date: f64,
    pub arrival_time: f64,
    pub status: JobStatus,
    /// Index into `process_sequence` of the next operation to run.
    pub next_step: usize,
    /// Time the job last became ready for assignment.
    pub ready_since: f64,
    pub wait_time: f64,
}

impl Job {
    pub fn is_pending(&self) -> bool {
        matches!(self.status, JobStatus::Pending)
    }

    pub fn is_finished(&self) -> bool {
        matches!(self.status, JobStatus::Completed { .. } | JobStatus::Failed)
    }

    pub fn completion_time(&self) -> Option<f64> {
        match self.status {
            JobStatus::Completed { at } => Some(at),
            _ => None,
        }
    }

    pub fn next_process(&self) -> Option<ProcessId> {
        self.process_sequence.get(self.next_step).copied()
    }

    pub fn next_processing_time(&self) -> Option<f64> {
        self.processing_times.get(self.next_step).copied()
    }

    pub fn remaining_work(&self) -> f64 {
        let from = match self.status {
            JobStatus::InProgress { step, .. } => step + 1,
            JobStatus::Completed { .. } => self.processing_times.len(),
            _ => self.next_step,
        };
        self.processing_times[from.min(self.processing_times.len())..].iter().sum()
    }

    pub fn total_work(&self) -> f64 {
        self.processing_times.iter().sum()
    }
}

/// Which of the two capability sets is active on a machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActiveSet {
    Native,
    Reconfigurable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Machine {
    pub id: usize,
    pub native_processes: Vec<ProcessId>,
    pub reconfigurable_processes: Vec<ProcessId>,
    pub active: ActiveSet,
    pub setup_time: f64,
    /// Time to switch between the two capability sets.
    pub reconfig_time: f64,
    pub efficiency: f64,
    pub flexibility: f64,
    pub reliability: f64,
    pub busy_until: f64,
    pub broken: bool,
    pub busy_time_accum: f64,
    pub setup_time_accum: f64,
    pub reconfig_time_accum: f64,
    pub reconfig_count: usize,
    pub assignments: usize,
    /// Job whose operation currently occupies the machine.
    pub current_job: Option<usize>,
    /// Start of the processing phase of the current operation.
    pub processing_start: f64,
    /// Moving average of on-time completions of jobs finished here.
    pub reputation: f64,
}

impl Machine {
    pub fn current_config(&self) -> &[ProcessId] {
        match self.active {
            ActiveSet::Native => &self.native_processes,
            ActiveSet::Reconfigurable => &self.reconfigurable_processes,
        }
    }

    pub fn can_host(&self, p: ProcessId, reconfiguration: bool) -> bool {
        if reconfiguration {
            self.native_processes.contains(&p) || self.reconfigurable_processes.contains(&p)
        } else {
            self.current_config().contains(&p)
        }
    }

    /// `Some(0.0)` when `p` runs in the active configuration, `Some(reconfig_time)`
    /// when a switch is needed and allowed, `None` otherwise.
    pub fn reconfig_delay(&self, p: ProcessId, reconfiguration: bool) -> Option<f64> {
        if self.current_config().contains(&p) {
            Some(0.0)
        } else if reconfiguration && self.can_host(p, true) {
            Some(self.reconfig_time)
        } else {
            None
        }
    }

    pub fn is_idle_at(&self, t: f64) -> bool {
        !self.broken && t >= self.busy_until
    }

    pub fn utilization(&self, elapsed: f64) -> f64 {
        if elapsed <= 0.0 {
            0.0
        } else {
            (self.busy_time_accum / elapsed).clamp(0.0, 1.0)
        }
    }
}

/// An allocation decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Assign { job: usize, machine: usize },
    Idle,
}

/// A feasible job/machine pairing at the current decision point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasiblePair {
    pub slot: usize,
    pub job: usize,
    pub machine: usize,
    pub reconfig: bool,
    pub reconfig_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Feasibility {
    pub pairs: Vec<FeasiblePair>,
    /// Indexed by [`ActionSpace`]; the last entry is Idle.
    pub mask: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub reward: f64,
    pub done: bool,
}

/// Monotone counters used to derive the shaped step reward.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Counters {
    pub processes_completed: u64,
    /// Sum of priority / 5 over completed jobs.
    pub completed_priority: f64,
    pub setup_incurred: f64,
    pub idle_machine_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    pub clock: f64,
    pub jobs: Vec<Job>,
    pub machines: Vec<Machine>,
    pub job_view: Vec<usize>,
    pub horizon: f64,
    pub rng_seed: u64,
    pub view_size: usize,
    pub process_count: usize,
    pub toggles: Toggles,
    pub weights: ObjectiveWeights,
    pub fourth_term: FourthTerm,
    pub reward_config: RewardConfig,
    pub counters: Counters,
    pending_breakdowns: Vec<BreakdownSpec>,
    events: Vec<Event>,
    record_events: bool,
    done: bool,
}

impl SystemState {
    /// Builds a fresh episode. Machines come from `config.machine_seed`, jobs
    /// from `seed`.
    pub fn new(config: &ScenarioConfig, seed: u64) -> Result<Self, SimError> {
        config.validate()?;
        let machines = build_machines(&config.machines, config.process_count, config.machine_seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let jobs = build_jobs(&config.jobs, config.process_count, &config.arrival, &mut rng);
        let mut state = Self {
            clock: 0.0,
            jobs,
            machines,
            job_view: Vec::new(),
            horizon: config.horizon,
            rng_seed: seed,
            view_size: config.view_size,
            process_count: config.process_count,
            toggles: config.toggles,
            weights: config.weights.normalized()?,
            fourth_term: config.fourth_term,
            reward_config: config.reward,
            counters: Counters::default(),
            pending_breakdowns: Vec::new(),
            events: Vec::new(),
            record_events: true,
            done: false,
        };
        for b in &config.breakdowns {
            state.inject_breakdown(b.machine, b.time)?;
        }
        state.refresh();
        Ok(state)
    }

    /// Disables event logging, which is only needed for analysis.
    pub fn with_event_log(mut self, enabled: bool) -> Self {
        self.record_events = enabled;
        if !enabled {
            self.events.clear();
        }
        self
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn action_space(&self) -> ActionSpace {
        ActionSpace::new(self.view_size, self.machines.len())
    }

    pub fn completed_jobs(&self) -> usize {
        self.jobs.iter().filter(|j| matches!(j.status, JobStatus::Completed { .. })).count()
    }

    pub fn status_counts(&self) -> [usize; 4] {
        let mut c = [0; 4];
        for j in &self.jobs {
            let k = match j.status {
                JobStatus::Pending => 0,
                JobStatus::InProgress { .. } => 1,
                JobStatus::Completed { .. } => 2,
                JobStatus::Failed => 3,
            };
            c[k] += 1;
        }
        c
    }

    /// Checks the availability, compatibility and production-period conditions
    /// for one pair. Returns the reconfiguration delay when feasible.
    pub fn pair_delay(&self, job: usize, machine: usize) -> Option<f64> {
        let j = self.jobs.get(job)?;
        let m = self.machines.get(machine)?;
        if !j.is_pending() || j.arrival_time > self.clock || !m.is_idle_at(self.clock) {
            return None;
        }
        let p = j.next_process()?;
        let tau = j.next_processing_time()?;
        let r = m.reconfig_delay(p, self.toggles.reconfiguration)?;
        let period = self.horizon - self.clock;
        let slack = period - tau / m.efficiency - r;
        (slack >= 0.0).then_some(r)
    }

    pub fn needs_reconfig(&self, job: usize, machine: usize) -> bool {
        match self.jobs[job].next_process() {
            Some(p) => !self.machines[machine].current_config().contains(&p),
            None => false,
        }
    }

    pub fn feasible_actions(&self) -> Feasibility {
        let space = self.action_space();
        let mut mask = vec![false; space.len()];
        let mut pairs = Vec::new();
        if !self.done {
            for (slot, &job) in self.job_view.iter().enumerate() {
                for machine in 0..self.machines.len() {
                    if let Some(r) = self.pair_delay(job, machine) {
                        mask[space.encode(slot, machine)] = true;
                        let reconfig = self.needs_reconfig(job, machine);
                        pairs.push(FeasiblePair { slot, job, machine, reconfig, reconfig_time: r });
                    }
                }
            }
        }
        mask[space.idle()] = pairs.is_empty() || self.next_event_time().is_some();
        Feasibility { pairs, mask }
    }

    /// Maps an action index to a concrete action using the current view.
    pub fn decode_action(&self, index: usize) -> Option<Action> {
        let space = self.action_space();
        if index == space.idle() {
            return Some(Action::Idle);
        }
        let (slot, machine) = space.decode(index)?;
        let job = *self.job_view.get(slot)?;
        Some(Action::Assign { job, machine })
    }

    pub fn encode_action(&self, action: Action) -> Option<usize> {
        let space = self.action_space();
        match action {
            Action::Idle => Some(space.idle()),
            Action::Assign { job, machine } => {
                let slot = self.job_view.iter().position(|&j| j == job)?;
                (machine < self.machines.len()).then(|| space.encode(slot, machine))
            }
        }
    }

    pub fn step(&mut self, action: Action) -> Result<StepOutcome, SimError> {
        if self.done {
            return Err(if self.clock >= self.horizon {
                SimError::ClockOverflow(self.clock)
            } else {
                SimError::EpisodeFinished
            });
        }
        let before = RewardSnapshot::of(self);
        match action {
            Action::Assign { job, machine } => self.assign(job, machine)?,
            Action::Idle => {
                let target = self.next_event_time().unwrap_or(self.horizon).min(self.horizon);
                self.log(Event::new(self.clock, EventKind::Idle).duration(target - self.clock));
                self.advance_to(target);
            }
        }
        self.refresh();
        let after = RewardSnapshot::of(self);
        let reward = reward::shaped(&before, &after, &self.reward_config);
        Ok(StepOutcome { reward, done: self.done })
    }

    fn assign(&mut self, job: usize, machine: usize) -> Result<(), SimError> {
        let in_view = self.job_view.contains(&job);
        let delay = if in_view { self.pair_delay(job, machine) } else { None };
        let Some(r) = delay else {
            return Err(SimError::InfeasibleAction { job, machine, clock: self.clock });
        };
        let t = self.clock;
        let j = &mut self.jobs[job];
        let step = j.next_step;
        let p = j.process_sequence[step];
        let tau = j.processing_times[step];
        j.wait_time += t - j.ready_since;

        let m = &mut self.machines[machine];
        let reconfig = !m.current_config().contains(&p);
        let mut events = Vec::with_capacity(4);
        if reconfig {
            m.active = match m.active {
                ActiveSet::Native => ActiveSet::Reconfigurable,
                ActiveSet::Reconfigurable => ActiveSet::Native,
            };
            m.reconfig_count += 1;
            m.reconfig_time_accum += r;
            events.push(Event::new(t, EventKind::Reconfigure).machine(machine).process(p).duration(r));
        }
        let processing = tau / m.efficiency;
        let proc_start = t + r + m.setup_time;
        let finish = proc_start + processing;
        events.insert(
            0,
            Event::new(t, EventKind::Assign)
                .job(job)
                .machine(machine)
                .process(p)
                .duration(finish - t)
                .reconfig(reconfig),
        );
        events.push(Event::new(t + r, EventKind::Setup).job(job).machine(machine).duration(m.setup_time));
        events.push(
            Event::new(proc_start, EventKind::Process)
                .job(job)
                .machine(machine)
                .process(p)
                .duration(processing),
        );
        m.setup_time_accum += m.setup_time;
        m.busy_time_accum += processing;
        m.busy_until = finish;
        m.processing_start = proc_start;
        m.current_job = Some(job);
        m.assignments += 1;
        self.counters.setup_incurred += m.setup_time + r;
        self.jobs[job].status = JobStatus::InProgress { step, machine, finish };
        for e in events {
            self.log(e);
        }
        Ok(())
    }

    /// Marks `machine` broken from `at_time` on. An operation running on it at
    /// that time is abandoned and its job returns to Pending at the same step.
    pub fn inject_breakdown(&mut self, machine: usize, at_time: f64) -> Result<(), SimError> {
        if machine >= self.machines.len() {
            return Err(SimError::UnknownMachine(machine));
        }
        if at_time <= self.clock {
            self.apply_breakdown(machine, self.clock);
            self.refresh();
        } else {
            self.pending_breakdowns.push(BreakdownSpec { machine, time: at_time });
            self.pending_breakdowns.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.machine.cmp(&b.machine)));
        }
        Ok(())
    }

    fn apply_breakdown(&mut self, machine: usize, t: f64) {
        let m = &mut self.machines[machine];
        if m.broken {
            return;
        }
        m.broken = true;
        let interrupted = m.current_job.take().filter(|_| m.busy_until > t);
        if interrupted.is_some() {
            let unprocessed = m.busy_until - m.processing_start.max(t);
            m.busy_time_accum -= unprocessed.max(0.0);
        }
        m.busy_until = m.busy_until.min(t);
        self.log(Event::new(t, EventKind::Breakdown).machine(machine));
        if let Some(job) = interrupted {
            let j = &mut self.jobs[job];
            if let JobStatus::InProgress { step, .. } = j.status {
                j.next_step = step;
            }
            j.status = JobStatus::Pending;
            j.ready_since = t;
            let p = j.next_process();
            let mut e = Event::new(t, EventKind::JobReturned).job(job).machine(machine);
            if let Some(p) = p {
                e = e.process(p);
            }
            self.log(e);
        }
    }

    /// Earliest time after the clock at which anything changes by itself.
    pub fn next_event_time(&self) -> Option<f64> {
        let release = self
            .machines
            .iter()
            .filter(|m| !m.broken && m.current_job.is_some() && m.busy_until > self.clock)
            .map(|m| m.busy_until);
        let arrivals = self
            .jobs
            .iter()
            .filter(|j| j.is_pending() && j.arrival_time > self.clock)
            .map(|j| j.arrival_time);
        let breakdowns = self.pending_breakdowns.iter().map(|b| b.time);
        release.chain(arrivals).chain(breakdowns).min_by(f64::total_cmp)
    }

    fn advance_to(&mut self, target: f64) {
        let t0 = self.clock;
        let dt = (target - t0).max(0.0);
        for m in self.machines.iter().filter(|m| !m.broken) {
            let busy = (m.busy_until - t0).clamp(0.0, dt);
            self.counters.idle_machine_time += dt - busy;
        }
        // completions before breakdowns at equal times
        let mut completions: Vec<(f64, usize)> = self
            .jobs
            .iter()
            .filter_map(|j| match j.status {
                JobStatus::InProgress { finish, .. } if finish <= target => Some((finish, j.id)),
                _ => None,
            })
            .collect();
        completions.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut due: Vec<BreakdownSpec> = Vec::new();
        self.pending_breakdowns.retain(|b| {
            if b.time <= target {
                due.push(*b);
                false
            } else {
                true
            }
        });
        let (mut ci, mut bi) = (0, 0);
        while ci < completions.len() || bi < due.len() {
            let take_completion =
                bi >= due.len() || (ci < completions.len() && completions[ci].0 <= due[bi].time);
            if take_completion {
                let (finish, job) = completions[ci];
                ci += 1;
                // a breakdown handled earlier may have pulled the job back
                if matches!(self.jobs[job].status, JobStatus::InProgress { .. }) {
                    self.complete_operation(job, finish);
                }
            } else {
                let b = due[bi];
                bi += 1;
                self.apply_breakdown(b.machine, b.time);
            }
        }
        self.clock = target;
    }

    fn complete_operation(&mut self, job: usize, finish: f64) {
        let JobStatus::InProgress { step, machine, .. } = self.jobs[job].status else {
            return;
        };
        let p = self.jobs[job].process_sequence[step];
        self.counters.processes_completed += 1;
        let m = &mut self.machines[machine];
        m.current_job = None;
        self.log(Event::new(finish, EventKind::OperationComplete).job(job).machine(machine).process(p));
        let j = &mut self.jobs[job];
        j.next_step = step + 1;
        if j.next_step >= j.process_sequence.len() {
            j.status = JobStatus::Completed { at: finish };
            let on_time = finish <= j.due_date;
            let prio = j.priority as f64;
            self.counters.completed_priority += prio / 5.0;
            let m = &mut self.machines[machine];
            m.reputation = 0.99 * m.reputation + 0.01 * if on_time { 1.0 } else { 0.0 };
            self.log(Event::new(finish, EventKind::JobComplete).job(job).machine(machine));
        } else {
            j.status = JobStatus::Pending;
            j.ready_since = finish;
        }
    }

    /// Fails unreachable jobs, rebuilds the view and updates `done`.
    fn refresh(&mut self) {
        let reconf = self.toggles.reconfiguration;
        let mut failed = Vec::new();
        for j in self.jobs.iter().filter(|j| j.is_pending()) {
            let p = j.next_process().expect("pending job has a next process");
            if !self.machines.iter().any(|m| !m.broken && m.can_host(p, reconf)) {
                failed.push(j.id);
            }
        }
        for id in failed {
            let t = self.clock;
            self.jobs[id].status = JobStatus::Failed;
            let p = self.jobs[id].next_process();
            let mut e = Event::new(t, EventKind::JobFailed).job(id);
            if let Some(p) = p {
                e = e.process(p);
            }
            self.log(e);
        }
        let mut view: Vec<&Job> =
            self.jobs.iter().filter(|j| j.is_pending() && j.arrival_time <= self.clock).collect();
        view.sort_by(|a, b| a.arrival_time.total_cmp(&b.arrival_time).then(a.id.cmp(&b.id)));
        self.job_view = view.into_iter().take(self.view_size).map(|j| j.id).collect();
        self.done = self.clock >= self.horizon || self.jobs.iter().all(Job::is_finished);
    }

    fn log(&mut self, e: Event) {
        if self.record_events {
            self.events.push(e);
        }
    }

    /// Priority-weighted tardiness accumulated so far: unfinished jobs are
    /// charged up to the current clock.
    pub fn tardiness_to_date(&self) -> f64 {
        self.jobs
            .iter()
            .map(|j| {
                let end = j.completion_time().unwrap_or(self.clock);
                j.priority as f64 * (end - j.due_date).max(0.0)
            })
            .sum()
    }
}

fn build_machines(spec: &MachineSpec, process_count: usize, seed: u64) -> Vec<Machine> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d61_6368_696e_6573);
    let draw = |rng: &mut ChaCha8Rng, r: [f64; 2]| {
        if r[1] > r[0] {
            rng.random_range(r[0]..=r[1])
        } else {
            r[0]
        }
    };
    let blank = |id: usize| Machine {
        id,
        native_processes: Vec::new(),
        reconfigurable_processes: Vec::new(),
        active: ActiveSet::Native,
        setup_time: 0.0,
        reconfig_time: 0.0,
        efficiency: 1.0,
        flexibility: 0.0,
        reliability: 0.0,
        busy_until: 0.0,
        broken: false,
        busy_time_accum: 0.0,
        setup_time_accum: 0.0,
        reconfig_time_accum: 0.0,
        reconfig_count: 0,
        assignments: 0,
        current_job: None,
        processing_start: 0.0,
        reputation: 1.0,
    };
    if let Some(defs) = &spec.explicit {
        return defs
            .iter()
            .enumerate()
            .map(|(id, d)| {
                let mut native = d.native.clone();
                let mut reconf = d.reconfigurable.clone();
                native.sort_unstable();
                reconf.sort_unstable();
                let reconfig_time = match d.reconfig_time {
                    Some(r) => r,
                    None => round2(draw(&mut rng, spec.reconfig_time_range)),
                };
                Machine {
                    native_processes: native,
                    reconfigurable_processes: reconf,
                    setup_time: d.setup_time,
                    reconfig_time,
                    efficiency: d.efficiency,
                    flexibility: d.flexibility,
                    reliability: d.reliability,
                    ..blank(id)
                }
            })
            .collect();
    }
    let count = spec.count.unwrap_or(0);
    let all: Vec<usize> = (0..process_count).collect();
    let mut best: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    // resample until native sets cover every process type, if possible
    for _ in 0..256 {
        let sets: Vec<(Vec<usize>, Vec<usize>)> = (0..count)
            .map(|_| {
                let mut ids = all.clone();
                ids.shuffle(&mut rng);
                let n = rng.random_range(2..=3usize).min(process_count - 2);
                let r = rng.random_range(2..=3usize).min(process_count - n);
                let mut native = ids[..n].to_vec();
                let mut reconf = ids[n..n + r].to_vec();
                native.sort_unstable();
                reconf.sort_unstable();
                (native, reconf)
            })
            .collect();
        let covered = all.iter().all(|p| sets.iter().any(|(n, _)| n.contains(p)));
        best = sets;
        if covered {
            break;
        }
    }
    best.into_iter()
        .enumerate()
        .map(|(id, (native, reconf))| Machine {
            native_processes: native,
            reconfigurable_processes: reconf,
            setup_time: round2(draw(&mut rng, spec.setup_time_range)),
            reconfig_time: round2(draw(&mut rng, spec.reconfig_time_range)),
            flexibility: round2(draw(&mut rng, spec.flexibility_range)),
            reliability: round2(draw(&mut rng, spec.reliability_range)),
            ..blank(id)
        })
        .collect()
}

fn build_jobs(spec: &JobSpec, process_count: usize, arrival: &ArrivalMode, rng: &mut ChaCha8Rng) -> Vec<Job> {
    let draw = |rng: &mut ChaCha8Rng, r: [f64; 2]| {
        if r[1] > r[0] {
            rng.random_range(r[0]..=r[1])
        } else {
            r[0]
        }
    };
    let mut clock = 0.0;
    let mut next_arrival = |rng: &mut ChaCha8Rng| match arrival {
        ArrivalMode::Batch => 0.0,
        ArrivalMode::Poisson { rate } => {
            let u: f64 = rng.random_range(f64::EPSILON..1.0);
            clock += -u.ln() / rate;
            clock
        }
    };
    if let Some(defs) = &spec.explicit {
        return defs
            .iter()
            .enumerate()
            .map(|(id, d)| {
                let arrival_time = d.arrival_time;
                let total: f64 = d.times.iter().sum();
                let due_date = match d.due_date {
                    Some(due) => due,
                    None => arrival_time + draw(rng, spec.due_multiplier) * total,
                };
                Job {
                    id,
                    process_sequence: d.processes.clone(),
                    processing_times: d.times.clone(),
                    priority: d.priority,
                    due_date,
                    arrival_time,
                    status: JobStatus::Pending,
                    next_step: 0,
                    ready_since: arrival_time,
                    wait_time: 0.0,
                }
            })
            .collect();
    }
    (0..spec.count)
        .map(|id| {
            let len = rng.random_range(spec.process_length[0]..=spec.process_length[1]);
            let process_sequence: Vec<usize> = (0..len).map(|_| rng.random_range(0..process_count)).collect();
            let [tlo, thi] = spec.time_range;
            let processing_times: Vec<f64> =
                (0..len).map(|_| rng.random_range(tlo.ceil() as i64..=thi.floor() as i64) as f64).collect();
            let priority = rng.random_range(spec.priority_range[0]..=spec.priority_range[1]);
            let arrival_time = next_arrival(rng);
            let total: f64 = processing_times.iter().sum();
            let due_date = round2(arrival_time + draw(rng, spec.due_multiplier) * total);
            Job {
                id,
                process_sequence,
                processing_times,
                priority,
                due_date,
                arrival_time,
                status: JobStatus::Pending,
                next_step: 0,
                ready_since: arrival_time,
                wait_time: 0.0,
            }
        })
        .collect()
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

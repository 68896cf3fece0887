//! Scenario configuration, deserialized from JSON.

use serde::{Deserialize, Serialize};

use super::SimError;

/// Weights of the four objective terms: makespan, tardiness, setup and the
/// wait/utilization term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveWeights {
    pub makespan: f64,
    pub tardiness: f64,
    pub setup: f64,
    pub fourth: f64,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        Self { makespan: 0.4, tardiness: 0.3, setup: 0.2, fourth: 0.1 }
    }
}

impl ObjectiveWeights {
    pub fn new(makespan: f64, tardiness: f64, setup: f64, fourth: f64) -> Self {
        Self { makespan, tardiness, setup, fourth }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.makespan, self.tardiness, self.setup, self.fourth]
    }

    /// Rescales the weights to sum to one.
    pub fn normalized(&self) -> Result<Self, SimError> {
        let w = self.as_array();
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(SimError::NegativeWeights);
        }
        let sum: f64 = w.iter().sum();
        if sum <= 0.0 {
            return Err(SimError::InvalidConfig("objective weights sum to zero".into()));
        }
        Ok(Self::new(w[0] / sum, w[1] / sum, w[2] / sum, w[3] / sum))
    }
}

/// Which quantity fills the fourth objective slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FourthTerm {
    /// Total time jobs spent waiting for a machine.
    #[default]
    WaitTime,
    /// Sum over machines of (1 - busy/elapsed)^2.
    SquaredIdle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Toggles {
    pub reconfiguration: bool,
    pub negotiation: bool,
}

impl Default for Toggles {
    fn default() -> Self {
        Self { reconfiguration: true, negotiation: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreakdownSpec {
    pub machine: usize,
    #[serde(default)]
    pub time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ArrivalMode {
    /// Every job is released at t = 0.
    #[default]
    Batch,
    /// Exponential inter-arrival gaps with the given rate (jobs per time unit).
    Poisson { rate: f64 },
}

/// An explicitly specified machine (Table-II style rows).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineDef {
    pub native: Vec<usize>,
    pub reconfigurable: Vec<usize>,
    pub setup_time: f64,
    #[serde(default = "default_flexibility")]
    pub flexibility: f64,
    #[serde(default = "default_reliability")]
    pub reliability: f64,
    #[serde(default = "one")]
    pub efficiency: f64,
    /// Drawn from `reconfig_time_range` when absent.
    #[serde(default)]
    pub reconfig_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineSpec {
    /// Number of machines to generate. Ignored when `explicit` is set.
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub explicit: Option<Vec<MachineDef>>,
    #[serde(default = "default_time_range")]
    pub setup_time_range: [f64; 2],
    #[serde(default = "default_time_range")]
    pub reconfig_time_range: [f64; 2],
    #[serde(default = "default_flex_range")]
    pub flexibility_range: [f64; 2],
    #[serde(default = "default_rel_range")]
    pub reliability_range: [f64; 2],
}

impl MachineSpec {
    pub fn generated(count: usize) -> Self {
        Self {
            count: Some(count),
            explicit: None,
            setup_time_range: default_time_range(),
            reconfig_time_range: default_time_range(),
            flexibility_range: default_flex_range(),
            reliability_range: default_rel_range(),
        }
    }

    pub fn explicit(defs: Vec<MachineDef>) -> Self {
        Self { explicit: Some(defs), ..Self::generated(0) }
    }

    pub fn machine_count(&self) -> usize {
        match &self.explicit {
            Some(defs) => defs.len(),
            None => self.count.unwrap_or(0),
        }
    }
}

/// An explicitly specified job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobDef {
    pub processes: Vec<usize>,
    pub times: Vec<f64>,
    pub priority: u8,
    /// Drawn from the due-date multiplier when absent.
    #[serde(default)]
    pub due_date: Option<f64>,
    #[serde(default)]
    pub arrival_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobSpec {
    #[serde(default)]
    pub count: usize,
    #[serde(default = "default_process_length")]
    pub process_length: [usize; 2],
    #[serde(default = "default_job_time_range")]
    pub time_range: [f64; 2],
    #[serde(default = "default_priority_range")]
    pub priority_range: [u8; 2],
    #[serde(default = "default_due_multiplier")]
    pub due_multiplier: [f64; 2],
    #[serde(default)]
    pub explicit: Option<Vec<JobDef>>,
}

impl JobSpec {
    pub fn generated(count: usize) -> Self {
        Self {
            count,
            process_length: default_process_length(),
            time_range: default_job_time_range(),
            priority_range: default_priority_range(),
            due_multiplier: default_due_multiplier(),
            explicit: None,
        }
    }

    pub fn job_count(&self) -> usize {
        match &self.explicit {
            Some(defs) => defs.len(),
            None => self.count,
        }
    }
}

/// Shaping coefficients of the per-step reward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardConfig {
    pub clip_min: f64,
    pub clip_max: f64,
    /// Bonus per completed process step.
    pub process_bonus: f64,
    /// Bonus per completed job, multiplied by priority / 5.
    pub job_bonus: f64,
    /// Penalty per time unit of setup or reconfiguration incurred.
    pub setup_penalty: f64,
    /// Penalty per unit of priority-weighted tardiness accrued.
    pub tardiness_penalty: f64,
    /// Penalty per idle machine time unit.
    pub idle_penalty: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            clip_min: -10.0,
            clip_max: 10.0,
            process_bonus: 1.0,
            job_bonus: 2.0,
            setup_penalty: 0.1,
            tardiness_penalty: 0.002,
            idle_penalty: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    pub machines: MachineSpec,
    pub jobs: JobSpec,
    pub process_count: usize,
    pub view_size: usize,
    pub horizon: f64,
    #[serde(default)]
    pub weights: ObjectiveWeights,
    #[serde(default)]
    pub fourth_term: FourthTerm,
    #[serde(default)]
    pub toggles: Toggles,
    #[serde(default)]
    pub breakdowns: Vec<BreakdownSpec>,
    #[serde(default)]
    pub arrival: ArrivalMode,
    #[serde(default)]
    pub reward: RewardConfig,
    /// Seed for generated machine capabilities; fixed across episodes so the
    /// plant stays the same while job streams vary.
    #[serde(default)]
    pub machine_seed: u64,
}

impl ScenarioConfig {
    /// Table II machines, 6 process types, 50 jobs.
    pub fn reference() -> Self {
        let rows: [(&[usize], &[usize], f64, f64); 5] = [
            (&[0, 2], &[1, 3], 5.2, 0.85),
            (&[1, 3, 4], &[0, 2], 4.8, 0.92),
            (&[2, 5], &[0, 1, 4], 6.1, 0.78),
            (&[0, 3, 5], &[2, 4], 3.9, 0.88),
            (&[1, 4], &[0, 3, 5], 5.7, 0.81),
        ];
        let defs = rows
            .iter()
            .map(|(n, r, s, f)| MachineDef {
                native: n.to_vec(),
                reconfigurable: r.to_vec(),
                setup_time: *s,
                flexibility: *f,
                reliability: default_reliability(),
                efficiency: 1.0,
                reconfig_time: None,
            })
            .collect();
        Self {
            name: "reference".into(),
            machines: MachineSpec::explicit(defs),
            jobs: JobSpec::generated(50),
            process_count: 6,
            view_size: 10,
            horizon: 3000.0,
            weights: ObjectiveWeights::default(),
            fourth_term: FourthTerm::default(),
            toggles: Toggles::default(),
            breakdowns: Vec::new(),
            arrival: ArrivalMode::Batch,
            reward: RewardConfig::default(),
            machine_seed: 0,
        }
    }

    /// Reference plant with 20 jobs, for quick runs.
    pub fn desk() -> Self {
        Self { name: "desk".into(), jobs: JobSpec::generated(20), horizon: 1500.0, ..Self::reference() }
    }

    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| SimError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn machine_count(&self) -> usize {
        self.machines.machine_count()
    }

    pub fn job_count(&self) -> usize {
        self.jobs.job_count()
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidConfig(msg));
        let m = self.machine_count();
        if m == 0 {
            return bad("machine count must be positive".into());
        }
        if self.job_count() == 0 {
            return bad("job count must be positive".into());
        }
        if self.process_count == 0 {
            return bad("process count must be positive".into());
        }
        if self.view_size == 0 {
            return bad("view size must be positive".into());
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return bad("horizon must be positive".into());
        }
        self.weights.normalized()?;
        if self.reward.clip_min > self.reward.clip_max {
            return bad("reward clip_min exceeds clip_max".into());
        }
        for r in [
            &self.machines.setup_time_range,
            &self.machines.reconfig_time_range,
            &self.machines.flexibility_range,
            &self.machines.reliability_range,
            &self.jobs.time_range,
            &self.jobs.due_multiplier,
        ] {
            if !(r[0] <= r[1] && r[0] >= 0.0) {
                return bad(format!("invalid range {r:?}"));
            }
        }
        let p = self.process_count;
        match &self.machines.explicit {
            Some(defs) => {
                for (id, d) in defs.iter().enumerate() {
                    validate_machine(id, d, p)?;
                }
            }
            None => {
                if p < 4 {
                    return bad("generated machines need at least 4 process types".into());
                }
            }
        }
        match &self.jobs.explicit {
            Some(defs) => {
                for (id, d) in defs.iter().enumerate() {
                    validate_job(id, d, p)?;
                }
            }
            None => {
                let [lo, hi] = self.jobs.process_length;
                if lo < 3 || hi > 5 || lo > hi {
                    return bad("process_length must lie within [3, 5]".into());
                }
                let [plo, phi] = self.jobs.priority_range;
                if plo < 1 || phi > 5 || plo > phi {
                    return bad("priority_range must lie within [1, 5]".into());
                }
            }
        }
        for b in &self.breakdowns {
            if b.machine >= m {
                return Err(SimError::UnknownMachine(b.machine));
            }
        }
        if let ArrivalMode::Poisson { rate } = self.arrival {
            if !(rate > 0.0 && rate.is_finite()) {
                return bad("poisson rate must be positive".into());
            }
        }
        Ok(())
    }
}

fn validate_machine(id: usize, d: &MachineDef, p: usize) -> Result<(), SimError> {
    let bad = |msg: &str| Err(SimError::InvalidConfig(format!("machine {id}: {msg}")));
    if !(2..=3).contains(&d.native.len()) || !(2..=3).contains(&d.reconfigurable.len()) {
        return bad("native and reconfigurable sets must hold 2-3 processes");
    }
    if d.native.iter().chain(&d.reconfigurable).any(|&x| x >= p) {
        return bad("process id out of range");
    }
    if d.native.iter().any(|x| d.reconfigurable.contains(x)) {
        return bad("native and reconfigurable sets overlap");
    }
    if !(d.efficiency > 0.0) || d.setup_time < 0.0 {
        return bad("efficiency must be positive and setup time non-negative");
    }
    if !(0.0..=1.0).contains(&d.flexibility) || !(0.0..=1.0).contains(&d.reliability) {
        return bad("flexibility and reliability must lie in [0, 1]");
    }
    if matches!(d.reconfig_time, Some(r) if r < 0.0) {
        return bad("negative reconfiguration time");
    }
    Ok(())
}

fn validate_job(id: usize, d: &JobDef, p: usize) -> Result<(), SimError> {
    let bad = |msg: &str| Err(SimError::InvalidConfig(format!("job {id}: {msg}")));
    if d.processes.len() != d.times.len() {
        return bad("processes and times differ in length");
    }
    if !(3..=5).contains(&d.processes.len()) {
        return bad("a job needs 3-5 processes");
    }
    if d.processes.iter().any(|&x| x >= p) {
        return bad("process id out of range");
    }
    if d.times.iter().any(|t| !(5.0..=15.0).contains(t)) {
        return bad("processing times must lie in [5, 15]");
    }
    if !(1..=5).contains(&d.priority) {
        return bad("priority must lie in [1, 5]");
    }
    if matches!(d.due_date, Some(due) if due < d.arrival_time) {
        return bad("due date precedes arrival");
    }
    Ok(())
}

fn one() -> f64 {
    1.0
}
fn default_flexibility() -> f64 {
    0.85
}
fn default_reliability() -> f64 {
    0.9
}
fn default_time_range() -> [f64; 2] {
    [3.0, 7.0]
}
fn default_flex_range() -> [f64; 2] {
    [0.75, 0.95]
}
fn default_rel_range() -> [f64; 2] {
    [0.8, 1.0]
}
fn default_process_length() -> [usize; 2] {
    [3, 5]
}
fn default_job_time_range() -> [f64; 2] {
    [5.0, 15.0]
}
fn default_priority_range() -> [u8; 2] {
    [1, 5]
}
fn default_due_multiplier() -> [f64; 2] {
    [2.0, 4.0]
}

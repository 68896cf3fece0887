//! Simulation event log and its CSV export.

use std::io::Write;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Assign,
    Reconfigure,
    Setup,
    Process,
    OperationComplete,
    JobComplete,
    Breakdown,
    JobReturned,
    JobFailed,
    Idle,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::Assign => "assign",
            EventKind::Reconfigure => "reconfigure",
            EventKind::Setup => "setup",
            EventKind::Process => "process",
            EventKind::OperationComplete => "operation_complete",
            EventKind::JobComplete => "job_complete",
            EventKind::Breakdown => "breakdown",
            EventKind::JobReturned => "job_returned",
            EventKind::JobFailed => "job_failed",
            EventKind::Idle => "idle",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    pub job_id: Option<usize>,
    pub machine_id: Option<usize>,
    pub process_id: Option<usize>,
    pub duration: f64,
    pub reconfig_flag: bool,
}

impl Event {
    pub fn new(time: f64, kind: EventKind) -> Self {
        Self { time, kind, job_id: None, machine_id: None, process_id: None, duration: 0.0, reconfig_flag: false }
    }

    pub fn job(mut self, id: usize) -> Self {
        self.job_id = Some(id);
        self
    }

    pub fn machine(mut self, id: usize) -> Self {
        self.machine_id = Some(id);
        self
    }

    pub fn process(mut self, id: usize) -> Self {
        self.process_id = Some(id);
        self
    }

    pub fn duration(mut self, d: f64) -> Self {
        self.duration = d;
        self
    }

    pub fn reconfig(mut self, flag: bool) -> Self {
        self.reconfig_flag = flag;
        self
    }
}

/// Writes `events` as CSV with columns
/// `time,event_kind,job_id,machine_id,process_id,duration,reconfig_flag`.
pub fn write_event_log<W: Write>(events: &[Event], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "event_kind", "job_id", "machine_id", "process_id", "duration", "reconfig_flag"])?;
    let opt = |x: Option<usize>| x.map(|v| v.to_string()).unwrap_or_default();
    for e in events {
        w.write_record([
            e.time.to_string(),
            e.kind.as_str().to_string(),
            opt(e.job_id),
            opt(e.machine_id),
            opt(e.process_id),
            e.duration.to_string(),
            (e.reconfig_flag as u8).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::dqn::{AgentConfig, EnhancedDqn};
use super::obs::ObservationSpec;
use super::AgentError;
use crate::nn::ParamSnapshot;
use crate::replay::RunningNorm;

pub const CHECKPOINT_SCHEMA: &str = "rms-sched-checkpoint/v1";

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Checkpoint {
    schema: String,
    spec: ObservationSpec,
    actions: usize,
    config: AgentConfig,
    epsilon: f64,
    learn_steps: u64,
    norm: RunningNorm,
    online: ParamSnapshot,
    target: ParamSnapshot,
}

impl EnhancedDqn {
    pub fn to_json(&self) -> String {
        let doc = Checkpoint {
            schema: CHECKPOINT_SCHEMA.into(),
            spec: self.spec,
            actions: self.actions(),
            config: self.config,
            epsilon: self.epsilon,
            learn_steps: self.learn_steps,
            norm: self.norm.clone(),
            online: ParamSnapshot::of(&self.online),
            target: ParamSnapshot::of(&self.target),
        };
        serde_json::to_string(&doc).expect("checkpoint serializes")
    }

    /// Rebuilds an agent from [`EnhancedDqn::to_json`] output. With `expected`
    /// set, the stored observation layout must match it.
    pub fn from_json(text: &str, expected: Option<&ObservationSpec>) -> Result<Self, AgentError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| AgentError::CorruptCheckpoint(e.to_string()))?;
        match value.get("schema").and_then(|s| s.as_str()) {
            Some(CHECKPOINT_SCHEMA) => {}
            Some(other) => return Err(AgentError::SchemaVersionMismatch(format!("schema tag {other}"))),
            None => return Err(AgentError::CorruptCheckpoint("missing schema tag".into())),
        }
        let doc: Checkpoint =
            serde_json::from_value(value).map_err(|e| AgentError::CorruptCheckpoint(e.to_string()))?;
        if let Some(spec) = expected {
            if *spec != doc.spec {
                return Err(AgentError::SchemaVersionMismatch(format!(
                    "checkpoint observation {:?} does not match {:?}",
                    doc.spec, spec
                )));
            }
        }
        if doc.actions != doc.spec.actions() || doc.norm.dim() != doc.spec.dim() {
            return Err(AgentError::CorruptCheckpoint("inconsistent dimensions".into()));
        }
        let mut agent = EnhancedDqn::new(doc.spec, doc.config);
        doc.online.restore(&mut agent.online).map_err(|e| AgentError::CorruptCheckpoint(e.to_string()))?;
        doc.target.restore(&mut agent.target).map_err(|e| AgentError::CorruptCheckpoint(e.to_string()))?;
        agent.norm = doc.norm;
        agent.epsilon = doc.epsilon;
        agent.learn_steps = doc.learn_steps;
        Ok(agent)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), AgentError> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>, expected: Option<&ObservationSpec>) -> Result<Self, AgentError> {
        let text = fs::read_to_string(path)?;
        Self::from_json(&text, expected)
    }
}

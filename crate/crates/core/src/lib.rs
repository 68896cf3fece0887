//! Scheduling for reconfigurable manufacturing systems.
//!
//! The crate bundles a seedable job-shop simulator with machine
//! reconfiguration and breakdowns ([`sim`]), a small differentiable-layer
//! toolkit ([`nn`]), prioritized n-step replay ([`replay`]), a dueling
//! attention DQN scheduler ([`agent`]), an auction-style job/machine
//! negotiation layer ([`negotiation`]), heuristic baselines ([`baselines`])
//! and the training/evaluation loop ([`trainer`]).

pub mod sim;
pub mod nn;
pub mod replay;
pub mod agent;
pub mod negotiation;
pub mod baselines;
pub mod parallel;
pub mod trainer;

//! Auction-style job/machine allocation: job requests, machine bids, a learned
//! scoring network with softmax attention over bids, multi-round conflict
//! resolution and policy-gradient training.

mod allocation;
mod bids;
mod engine;
mod nets;
mod protocol;

pub use allocation::{earliest_available, restrict_mask};
pub use bids::{collect_bids, Bid, JobRequest};
pub use engine::{
    write_negotiation_log, NegotiationConfig, NegotiationLosses, NegotiationRecord, Negotiator,
};
pub use nets::{scale_bids, BidHead, ScoringNet, BID_SCALE};
pub use protocol::{
    entropy, normalized_advantages, resolve_conflicts, softmax_select, urgency, Candidate, Resolution, RoundOutcome,
};

use thiserror::Error;

use crate::nn::NnError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NegotiationError {
    #[error("no bids to score")]
    NoBids,
    #[error("negotiation update needs at least 2 records, got {0}")]
    BatchTooSmall(usize),
    #[error("corrupt negotiator state: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Nn(#[from] NnError),
}

//! Agents: remote chat endpoints (neutral, primed or representation-steered)
//! and offline synthetic oracles, plus the batch executor.

mod batch;
mod client;
mod condition;
mod icp;
mod synthetic;

pub use batch::{process_trial, run_batch, BatchOptions, Progress};
pub use client::{extract_text, query_agent, request_body, ChatClient, EndpointConfig, RetryPolicy};
pub use condition::{Emotion, Intensity, Scope, SteeringCondition, SteeringField};
pub use icp::{is_wrapped, strip_icp, wrap_icp, IcpLibrary};
pub use synthetic::{EndowmentFactors, LinearScore, LossPolicy, SyntheticAgent, SyntheticAgentSpec};

use thiserror::Error;

use crate::response_parsing::RawResponse;
use crate::task_battery::{Domain, TrialSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GatewayError {
    #[error("unknown emotion `{0}`")]
    UnknownEmotion(String),
    #[error("prompt already carries a persona preamble")]
    AlreadyWrapped,
    #[error("invalid condition: {0}")]
    Invalid(String),
    #[error("transport: {0}")]
    Transport(String),
    #[error("timeout: {0}")]
    Timeout(String),
    #[error("http status {status}: {body}")]
    Http { status: u16, body: String },
    #[error("protocol: {detail}")]
    Protocol { detail: String, raw: String },
    #[error("synthetic agent cannot answer domain {0}")]
    UnsupportedDomain(Domain),
    #[error("batch aborted: {failed} of {total} trials failed (threshold {threshold})")]
    BatchAborted { failed: usize, total: usize, threshold: f64 },
    #[error("record sink: {0}")]
    Sink(String),
}

impl GatewayError {
    /// Reply body kept for the record, when one arrived.
    pub fn raw_payload(&self) -> Option<&str> {
        match self {
            GatewayError::Protocol { raw, .. } => Some(raw),
            GatewayError::Http { body, .. } => Some(body),
            _ => None,
        }
    }
}

/// Anything that can answer a trial under a steering condition.
pub trait Agent: Send + Sync {
    fn identity(&self) -> String;
    fn answer(&self, trial: &TrialSpec, condition: &SteeringCondition) -> Result<RawResponse, GatewayError>;
    /// Whether records should carry wall-clock latency. Synthetic agents
    /// return false so their records stay reproducible.
    fn timed(&self) -> bool;
}

//! One executed trial: spec, condition, raw reply and parsed outcome.

use serde::{Deserialize, Serialize};

use crate::agent_gateway::SteeringCondition;
use crate::response_parsing::{OutcomeValue, ParsedOutcome, RawResponse};
use crate::task_battery::TrialSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum RecordStatus {
    Ok,
    ParseFailed,
    TransportFailed { error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: TrialSpec,
    pub condition: SteeringCondition,
    pub agent: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<RawResponse>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<ParsedOutcome>,
    pub status: RecordStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency_ms: Option<u64>,
}

/// A choice mapped back to the payload's canonical option index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CanonChoice {
    Option(usize),
    Indifferent,
}

impl TrialRecord {
    /// Parsed value when the agent answered and the parse succeeded.
    pub fn value(&self) -> Option<OutcomeValue> {
        match self.status {
            RecordStatus::Ok => self.outcome.as_ref().and_then(|o| o.value),
            _ => None,
        }
    }

    pub fn is_transport_failure(&self) -> bool {
        matches!(self.status, RecordStatus::TransportFailed { .. })
    }

    pub fn choice(&self) -> Option<CanonChoice> {
        match self.value()? {
            OutcomeValue::Choice(pos) => self.trial.canonical_option(pos).map(CanonChoice::Option),
            OutcomeValue::Indifferent => Some(CanonChoice::Indifferent),
            _ => None,
        }
    }

    pub fn score(&self) -> Option<u8> {
        match self.value()? {
            OutcomeValue::Score(s) => Some(s),
            _ => None,
        }
    }

    pub fn accepted(&self) -> Option<bool> {
        match self.value()? {
            OutcomeValue::Accept(a) => Some(a),
            _ => None,
        }
    }

    pub fn price_cents(&self) -> Option<u64> {
        match self.value()? {
            OutcomeValue::PriceCents(c) => Some(c),
            _ => None,
        }
    }

    pub fn give(&self) -> Option<u32> {
        match self.value()? {
            OutcomeValue::Give(g) => Some(g),
            _ => None,
        }
    }
}

impl TrialRecord {
    /// Record for an answer text, parsed with the standard tables. Useful
    /// for replaying saved transcripts.
    pub fn answered(trial: TrialSpec, condition: SteeringCondition, agent: &str, full_text: &str) -> Self {
        let raw = crate::response_parsing::split_thinking(full_text);
        let out = crate::response_parsing::parse_answer(&trial.parse_schema, &raw.answer_text);
        let status = if out.is_parsed() { RecordStatus::Ok } else { RecordStatus::ParseFailed };
        TrialRecord {
            trial,
            condition,
            agent: agent.to_string(),
            raw: Some(raw),
            outcome: Some(out),
            status,
            latency_ms: None,
        }
    }
}

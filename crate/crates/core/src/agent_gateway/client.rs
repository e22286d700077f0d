//! Chat-completion client with retries.

use std::io::Read;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::response_parsing::{split_thinking_with, Delimiters, RawResponse};
use crate::task_battery::TrialSpec;

use super::{wrap_icp, Agent, GatewayError, SteeringCondition};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetryPolicy {
    #[serde(default = "default_attempts")]
    pub attempts: u32,
    #[serde(default = "default_base_delay")]
    pub base_delay_ms: u64,
    #[serde(default = "default_max_delay")]
    pub max_delay_ms: u64,
    #[serde(default)]
    pub jitter_seed: u64,
}

fn default_attempts() -> u32 {
    3
}
fn default_base_delay() -> u64 {
    500
}
fn default_max_delay() -> u64 {
    8_000
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { attempts: 3, base_delay_ms: 500, max_delay_ms: 8_000, jitter_seed: 0 }
    }
}

impl RetryPolicy {
    /// Sleeps before attempts 2..=n. Exponential with jitter in [0.5, 1)
    /// of the nominal delay, drawn from a generator keyed by `key`.
    pub fn schedule(&self, key: u64) -> Vec<Duration> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.jitter_seed ^ key.rotate_left(17));
        (0..self.attempts.saturating_sub(1))
            .map(|k| {
                let nominal = self.base_delay_ms.saturating_mul(1u64 << k.min(20)).min(self.max_delay_ms);
                let scale: f64 = rng.gen_range(0.5..1.0);
                Duration::from_millis((nominal as f64 * scale) as u64)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointConfig {
    /// Base URL; `/chat/completions` is appended.
    pub base_url: String,
    pub model_name: String,
    /// Environment variable holding the bearer token.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auth_env: Option<String>,
    /// Resolved secret; never written back out.
    #[serde(default, skip_serializing)]
    pub api_key: Option<String>,
    #[serde(default = "default_true")]
    pub greedy: bool,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default)]
    pub retry: RetryPolicy,
}

fn default_true() -> bool {
    true
}
fn default_max_tokens() -> u32 {
    2048
}
fn default_timeout() -> u64 {
    120
}

impl EndpointConfig {
    pub fn new(base_url: impl Into<String>, model_name: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            model_name: model_name.into(),
            auth_env: None,
            api_key: None,
            greedy: true,
            max_tokens: default_max_tokens(),
            timeout_secs: default_timeout(),
            retry: RetryPolicy::default(),
        }
    }

    fn url(&self) -> String {
        format!("{}/chat/completions", self.base_url.trim_end_matches('/'))
    }

    fn bearer(&self) -> Option<String> {
        self.api_key.clone().or_else(|| self.auth_env.as_ref().and_then(|v| std::env::var(v).ok()))
    }
}

/// Request body for one single-turn exchange. The `steering` field is
/// present only for representation-steered conditions.
pub fn request_body(endpoint: &EndpointConfig, prompt: &str, condition: &SteeringCondition) -> Value {
    let mut body = json!({
        "model": endpoint.model_name,
        "messages": [{"role": "user", "content": prompt}],
        "max_tokens": endpoint.max_tokens,
    });
    if endpoint.greedy {
        body["temperature"] = json!(0);
    }
    if let Some(field) = condition.wire_field() {
        body["steering"] = serde_json::to_value(field).expect("steering field serializes");
    }
    body
}

/// Text of the first choice. A separate reasoning field, when a server
/// sends one, is folded back in as a delimited trace.
pub fn extract_text(raw: &str, delims: &Delimiters) -> Result<String, GatewayError> {
    let protocol = |detail: &str| GatewayError::Protocol { detail: detail.to_string(), raw: raw.to_string() };
    let v: Value = serde_json::from_str(raw).map_err(|e| protocol(&format!("body is not JSON: {e}")))?;
    let message = v.pointer("/choices/0/message").ok_or_else(|| protocol("missing choices[0].message"))?;
    let content =
        message.get("content").and_then(Value::as_str).ok_or_else(|| protocol("message.content is not a string"))?;
    match message.get("reasoning_content").and_then(Value::as_str) {
        Some(r) if !r.is_empty() => Ok(format!("{}{r}{}\n{content}", delims.open, delims.close)),
        _ => Ok(content.to_string()),
    }
}

#[derive(Debug)]
enum Attempt {
    Done(String),
    Retry(GatewayError),
    Fatal(GatewayError),
}

/// Remote agent over the chat-completion protocol.
#[derive(Debug, Clone)]
pub struct ChatClient {
    pub endpoint: EndpointConfig,
    pub delimiters: Delimiters,
    http: ureq::Agent,
}

impl ChatClient {
    pub fn new(endpoint: EndpointConfig) -> Self {
        let http = ureq::AgentBuilder::new().timeout(Duration::from_secs(endpoint.timeout_secs)).build();
        Self { endpoint, delimiters: Delimiters::default(), http }
    }

    fn attempt(&self, body: &Value) -> Attempt {
        let mut req = self.http.post(&self.endpoint.url()).set("Content-Type", "application/json");
        if let Some(key) = self.endpoint.bearer() {
            req = req.set("Authorization", &format!("Bearer {key}"));
        }
        match req.send_json(body.clone()) {
            Ok(resp) => {
                let mut raw = String::new();
                match resp.into_reader().take(64 << 20).read_to_string(&mut raw) {
                    Ok(_) => Attempt::Done(raw),
                    Err(e) => Attempt::Retry(GatewayError::Transport(format!("reading body: {e}"))),
                }
            }
            Err(ureq::Error::Status(status, resp)) => {
                let body = resp.into_string().unwrap_or_default();
                let err = GatewayError::Http { status, body };
                if status == 429 || status >= 500 {
                    Attempt::Retry(err)
                } else {
                    Attempt::Fatal(err)
                }
            }
            Err(ureq::Error::Transport(t)) => {
                let msg = t.to_string();
                if msg.contains("timed out") || msg.contains("Timeout") {
                    Attempt::Retry(GatewayError::Timeout(msg))
                } else {
                    Attempt::Retry(GatewayError::Transport(msg))
                }
            }
        }
    }

    /// Sends `prompt` as given (no priming) with the condition's extension
    /// fields; retries transient failures per the policy.
    pub fn query(&self, prompt: &str, condition: &SteeringCondition, key: u64) -> Result<RawResponse, GatewayError> {
        let body = request_body(&self.endpoint, prompt, condition);
        let mut sleeps = self.endpoint.retry.schedule(key).into_iter();
        loop {
            match self.attempt(&body) {
                Attempt::Done(raw) => {
                    let text = extract_text(&raw, &self.delimiters)?;
                    return Ok(split_thinking_with(&text, &self.delimiters));
                }
                Attempt::Fatal(e) => return Err(e),
                Attempt::Retry(e) => match sleeps.next() {
                    Some(d) => std::thread::sleep(d),
                    None => return Err(e),
                },
            }
        }
    }
}

/// Applies the condition to the prompt (priming for ICP) and queries.
pub fn query_agent(
    client: &ChatClient,
    prompt: &str,
    condition: &SteeringCondition,
    key: u64,
) -> Result<RawResponse, GatewayError> {
    let prompt = match condition {
        SteeringCondition::Icp { emotion, intensity } => wrap_icp(prompt, *emotion, *intensity)?,
        _ => prompt.to_string(),
    };
    client.query(&prompt, condition, key)
}

fn trial_key(trial_id: &str) -> u64 {
    use sha2::{Digest, Sha256};
    let d = Sha256::digest(trial_id.as_bytes());
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

impl Agent for ChatClient {
    fn identity(&self) -> String {
        format!("remote:{}@{}", self.endpoint.model_name, self.endpoint.base_url)
    }

    fn answer(&self, trial: &TrialSpec, condition: &SteeringCondition) -> Result<RawResponse, GatewayError> {
        query_agent(self, &trial.prompt_text, condition, trial_key(&trial.trial_id))
    }

    fn timed(&self) -> bool {
        true
    }
}

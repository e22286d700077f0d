//! Local chat-completion endpoint backed by the synthetic agent, for
//! offline integration runs of the remote path.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

use serde_json::{json, Value};
use tiny_http::{Header, Method, Response, Server};

use crate::agent_gateway::{strip_icp, Emotion, SteeringCondition, SteeringField, SyntheticAgentSpec};
use crate::task_battery::TrialSpec;

use super::HarnessError;

const TRACE: &str = "Weighing the options against the instructions.";

#[derive(Debug, Default)]
pub struct OracleStats {
    pub requests: AtomicUsize,
    /// Requests that carried a valid `steering` field.
    pub steered: AtomicUsize,
    pub rejected: AtomicUsize,
}

/// Serves `POST .../chat/completions`. Prompts are matched verbatim to the
/// battery (after removing a persona preamble) and answered by `spec`.
pub struct OracleServer {
    server: Server,
    by_prompt: HashMap<String, TrialSpec>,
    spec: SyntheticAgentSpec,
    /// Answer every request with 503, to exercise failure handling.
    pub fail_all: bool,
    stats: Arc<OracleStats>,
}

pub struct OracleHandle {
    addr: SocketAddr,
    inner: Arc<OracleServer>,
    thread: Option<JoinHandle<()>>,
    pub stats: Arc<OracleStats>,
}

impl OracleHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Base URL for `EndpointConfig`.
    pub fn base_url(&self) -> String {
        format!("http://{}/v1", self.addr)
    }

    pub fn shutdown(mut self) {
        self.stop();
    }

    fn stop(&mut self) {
        self.inner.server.unblock();
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

impl Drop for OracleHandle {
    fn drop(&mut self) {
        self.stop();
    }
}

fn reply(status: u16, body: Value) -> Response<std::io::Cursor<Vec<u8>>> {
    let header = Header::from_bytes("Content-Type", "application/json").expect("static header");
    Response::from_data(serde_json::to_vec(&body).expect("json")).with_status_code(status).with_header(header)
}

fn error(status: u16, msg: impl Into<String>) -> (u16, Value) {
    (status, json!({"error": {"message": msg.into(), "code": status}}))
}

impl OracleServer {
    /// Binds `addr` (use port 0 for an ephemeral port).
    pub fn bind(addr: &str, trials: &[TrialSpec], spec: SyntheticAgentSpec) -> Result<Self, HarnessError> {
        let server = Server::http(addr).map_err(|e| HarnessError::Io(format!("bind {addr}: {e}")))?;
        let by_prompt = trials.iter().map(|t| (t.prompt_text.clone(), t.clone())).collect();
        Ok(Self { server, by_prompt, spec, fail_all: false, stats: Arc::default() })
    }

    pub fn addr(&self) -> Option<SocketAddr> {
        self.server.server_addr().to_ip()
    }

    fn handle(&self, method: &Method, url: &str, body: &str) -> (u16, Value) {
        self.stats.requests.fetch_add(1, Ordering::SeqCst);
        if *method != Method::Post || !url.ends_with("/chat/completions") {
            return error(404, format!("no route for {method} {url}"));
        }
        if self.fail_all {
            return error(503, "unavailable");
        }
        let req: Value = match serde_json::from_str(body) {
            Ok(v) => v,
            Err(e) => return error(400, format!("body is not JSON: {e}")),
        };
        if let Some(s) = req.get("steering") {
            let emotion = s.get("emotion").and_then(Value::as_str).unwrap_or_default();
            if emotion.parse::<Emotion>().is_err() {
                self.stats.rejected.fetch_add(1, Ordering::SeqCst);
                return error(400, format!("unknown emotion `{emotion}`"));
            }
            let valid = serde_json::from_value::<SteeringField>(s.clone())
                .map_err(|e| e.to_string())
                .and_then(|f| SteeringCondition::rls(f.emotion, f.beta, f.scope, f.layers).map_err(|e| e.to_string()));
            if let Err(e) = valid {
                self.stats.rejected.fetch_add(1, Ordering::SeqCst);
                return error(422, e);
            }
            self.stats.steered.fetch_add(1, Ordering::SeqCst);
        }
        let Some(prompt) = req.pointer("/messages/0/content").and_then(Value::as_str) else {
            return error(400, "messages[0].content missing");
        };
        let Some(trial) = self.by_prompt.get(strip_icp(prompt)) else {
            return error(404, "prompt is not part of the battery");
        };
        match self.spec.synthetic_answer(trial) {
            Ok(raw) => (
                200,
                json!({
                    "id": format!("oracle-{}", trial.trial_id),
                    "object": "chat.completion",
                    "model": req.get("model").cloned().unwrap_or(Value::Null),
                    "choices": [{
                        "index": 0,
                        "message": {"role": "assistant", "content": format!("<think>{TRACE}</think>\n{}", raw.answer_text)},
                        "finish_reason": "stop",
                    }],
                }),
            ),
            Err(e) => error(422, e.to_string()),
        }
    }

    fn serve_loop(&self) {
        for mut req in self.server.incoming_requests() {
            let mut body = String::new();
            let (status, value) = match req.as_reader().read_to_string(&mut body) {
                Ok(_) => self.handle(req.method(), req.url(), &body),
                Err(e) => error(400, e.to_string()),
            };
            let _ = req.respond(reply(status, value));
        }
    }

    /// Serves on the calling thread until the process exits.
    pub fn serve(self) {
        self.serve_loop();
    }

    /// Serves on a background thread until the handle is shut down.
    pub fn spawn(self) -> Result<OracleHandle, HarnessError> {
        let addr = self.addr().ok_or_else(|| HarnessError::Io("oracle is not bound to an IP address".into()))?;
        let stats = self.stats.clone();
        let inner = Arc::new(self);
        let worker = inner.clone();
        let thread = std::thread::spawn(move || worker.serve_loop());
        Ok(OracleHandle { addr, inner, thread: Some(thread), stats })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent_gateway::{query_agent, ChatClient, EndpointConfig, GatewayError, Intensity, RetryPolicy, Scope};
    use crate::task_battery::{generate_battery, AssetStore, BatteryConfig, Domain};

    fn setup() -> (Vec<TrialSpec>, OracleHandle, ChatClient) {
        let cfg = BatteryConfig::new(4).with_domains(&[Domain::Ultimatum]);
        let trials = generate_battery(&cfg, &AssetStore::embedded()).unwrap();
        let handle =
            OracleServer::bind("127.0.0.1:0", &trials, SyntheticAgentSpec::default()).unwrap().spawn().unwrap();
        let mut ep = EndpointConfig::new(handle.base_url(), "oracle");
        ep.retry = RetryPolicy { attempts: 0, ..RetryPolicy::default() };
        (trials, handle, ChatClient::new(ep))
    }

    #[test]
    fn answers_plain_primed_and_steered_prompts() {
        let (trials, handle, client) = setup();
        let t = &trials[0];
        let expected = SyntheticAgentSpec::default().synthetic_answer(t).unwrap().answer_text;
        let plain = query_agent(&client, &t.prompt_text, &SteeringCondition::None, 1).unwrap();
        assert_eq!(plain.answer_text, expected);
        assert_eq!(plain.thinking_trace.as_deref(), Some(TRACE));
        let icp = SteeringCondition::Icp { emotion: Emotion::Joy, intensity: Intensity::High };
        assert_eq!(query_agent(&client, &t.prompt_text, &icp, 1).unwrap().answer_text, expected);
        let rls = SteeringCondition::rls(Emotion::Fear, 35.0, Scope::ThinkingOnly, Some(vec![12])).unwrap();
        assert_eq!(query_agent(&client, &t.prompt_text, &rls, 1).unwrap().answer_text, expected);
        assert_eq!(handle.stats.steered.load(Ordering::SeqCst), 1);
        assert_eq!(handle.stats.requests.load(Ordering::SeqCst), 3);
    }

    fn post(handle: &OracleHandle, body: Value) -> u16 {
        match ureq::post(&format!("{}/chat/completions", handle.base_url())).send_json(body) {
            Ok(r) => r.status(),
            Err(ureq::Error::Status(s, _)) => s,
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn steering_field_is_validated() {
        let (trials, handle, client) = setup();
        let msgs = json!([{"role": "user", "content": trials[0].prompt_text}]);
        let ok =
            json!({"model": "m", "messages": msgs, "steering": {"emotion": "anger", "beta": 8.0, "scope": "all_new"}});
        assert_eq!(post(&handle, ok), 200);
        let unknown =
            json!({"model": "m", "messages": msgs, "steering": {"emotion": "glee", "beta": 8.0, "scope": "all_new"}});
        assert_eq!(post(&handle, unknown), 400);
        let negative =
            json!({"model": "m", "messages": msgs, "steering": {"emotion": "anger", "beta": -1.0, "scope": "all_new"}});
        assert_eq!(post(&handle, negative), 422);
        let no_layers = json!({"model": "m", "messages": msgs, "steering": {"emotion": "anger", "beta": 1.0, "scope": "all_new", "layers": []}});
        assert_eq!(post(&handle, no_layers), 422);
        assert_eq!(handle.stats.rejected.load(Ordering::SeqCst), 3);
        let err = query_agent(&client, "not in the battery", &SteeringCondition::None, 1).unwrap_err();
        assert!(matches!(err, GatewayError::Http { status: 404, .. }));
        handle.shutdown();
    }
}

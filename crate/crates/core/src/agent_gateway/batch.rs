//! Bounded-parallel batch execution with in-order delivery.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Instant;

use crate::record::{RecordStatus, TrialRecord};
use crate::response_parsing::{RawResponse, ResponseParser};
use crate::task_battery::TrialSpec;

use super::{Agent, GatewayError, SteeringCondition};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchOptions {
    /// Upper bound on trials in flight.
    pub parallelism: usize,
    /// Abort once the failed fraction of the batch must exceed this.
    pub failure_threshold: f64,
}

impl Default for BatchOptions {
    fn default() -> Self {
        Self { parallelism: 1, failure_threshold: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Progress {
    pub done: usize,
    pub total: usize,
    pub failed: usize,
}

/// Runs one trial and wraps the outcome in a record.
pub fn process_trial(
    agent: &dyn Agent,
    parser: &ResponseParser,
    trial: &TrialSpec,
    condition: &SteeringCondition,
) -> TrialRecord {
    let start = Instant::now();
    let result = agent.answer(trial, condition);
    let latency_ms = agent.timed().then(|| start.elapsed().as_millis() as u64);
    let (raw, outcome, status) = match result {
        Ok(raw) => {
            let out = parser.parse(&trial.parse_schema, &raw.answer_text);
            let status = if out.is_parsed() { RecordStatus::Ok } else { RecordStatus::ParseFailed };
            (Some(raw), Some(out), status)
        }
        Err(e) => {
            let raw = e.raw_payload().map(|p| RawResponse {
                full_text: p.to_string(),
                thinking_trace: None,
                answer_text: String::new(),
            });
            (raw, None, RecordStatus::TransportFailed { error: e.to_string() })
        }
    };
    TrialRecord {
        trial: trial.clone(),
        condition: condition.clone(),
        agent: agent.identity(),
        raw,
        outcome,
        status,
        latency_ms,
    }
}

/// Executes `trials` with at most `parallelism` in flight. `sink` sees
/// records in input order as soon as each prefix is complete; `progress`
/// sees every completion. Per-trial failures are recorded; the batch stops
/// with `BatchAborted` once failures exceed `failure_threshold * total`.
pub fn run_batch(
    trials: &[TrialSpec],
    agent: &dyn Agent,
    condition: &SteeringCondition,
    opts: BatchOptions,
    parser: &ResponseParser,
    mut sink: impl FnMut(&TrialRecord) -> std::io::Result<()>,
    mut progress: impl FnMut(Progress),
) -> Result<Vec<TrialRecord>, GatewayError> {
    let total = trials.len();
    let workers = opts.parallelism.max(1).min(total.max(1));
    let limit = opts.failure_threshold * total as f64;
    let next = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let mut out: Vec<TrialRecord> = Vec::with_capacity(total);
    let mut failed = 0usize;
    let mut sink_err = None;

    std::thread::scope(|s| {
        let (tx, rx) = mpsc::channel::<(usize, TrialRecord)>();
        for _ in 0..workers {
            let tx = tx.clone();
            let (next, stop) = (&next, &stop);
            s.spawn(move || loop {
                if stop.load(Ordering::SeqCst) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= total {
                    break;
                }
                let rec = process_trial(agent, parser, &trials[i], condition);
                if tx.send((i, rec)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        let mut pending: BTreeMap<usize, TrialRecord> = BTreeMap::new();
        for (n, (i, rec)) in rx.into_iter().enumerate() {
            let done = n + 1;
            if matches!(rec.status, RecordStatus::TransportFailed { .. }) {
                failed += 1;
            }
            progress(Progress { done, total, failed });
            pending.insert(i, rec);
            while let Some(rec) = pending.remove(&out.len()) {
                if sink_err.is_none() {
                    if let Err(e) = sink(&rec) {
                        sink_err = Some(e.to_string());
                        stop.store(true, Ordering::SeqCst);
                    }
                }
                out.push(rec);
            }
            if failed as f64 > limit {
                stop.store(true, Ordering::SeqCst);
            }
        }
    });

    if let Some(e) = sink_err {
        return Err(GatewayError::Sink(e));
    }
    if failed as f64 > limit {
        return Err(GatewayError::BatchAborted { failed, total, threshold: opts.failure_threshold });
    }
    Ok(out)
}

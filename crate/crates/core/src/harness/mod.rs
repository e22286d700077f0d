//! Orchestration behind the command-line tool: battery generation, agent
//! runs with resume, analysis into a report document, and rendering.

mod analyze;
mod config;
mod files;
mod oracle;
mod report;

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use crate::agent_gateway::{
    run_batch, Agent, BatchOptions, ChatClient, GatewayError, SteeringCondition, SyntheticAgent,
};
use crate::record::TrialRecord;
use crate::response_parsing::ResponseParser;
use crate::task_battery::{domain_counts, generate_battery, AssetStore, BatteryError, TrialSpec};

pub use analyze::{
    analyze, ConditionReport, FitStatus, Fits, Fitted, InputFile, PlotData, Provenance, RecordSet, ReportDocument,
    RiskBin, SkippedEffect, REPORT_SCHEMA_VERSION,
};
pub use config::{AgentSettings, HarnessConfig, RunSettings, ScoringSettings};
pub use files::{
    manifest_path, prepare_resume, read_json, read_jsonl, run_id, sha256_file, write_json, write_jsonl, Counts,
    RecordWriter, RunManifest, SCHEMA_VERSION,
};
pub use oracle::{OracleHandle, OracleServer};
pub use report::{render_report, RenderedReport, Table};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("validation: {0}")]
    Validation(String),
    #[error("aborted: {0}")]
    Aborted(String),
    #[error("io: {0}")]
    Io(String),
    #[error(transparent)]
    Battery(#[from] BatteryError),
    #[error(transparent)]
    Gateway(GatewayError),
}

impl From<GatewayError> for HarnessError {
    fn from(e: GatewayError) -> Self {
        match e {
            GatewayError::BatchAborted { .. } => HarnessError::Aborted(e.to_string()),
            GatewayError::UnknownEmotion(_) | GatewayError::Invalid(_) | GatewayError::AlreadyWrapped => {
                HarnessError::Validation(e.to_string())
            }
            other => HarnessError::Gateway(other),
        }
    }
}

impl HarnessError {
    /// Process exit status: 2 for bad input, 3 when too many trials failed
    /// in transport, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Validation(_) | HarnessError::Battery(_) => 2,
            HarnessError::Aborted(_) => 3,
            HarnessError::Io(_) | HarnessError::Gateway(_) => 1,
        }
    }
}

/// Which agent answers a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AgentChoice {
    Synthetic(String),
    Remote,
}

impl std::str::FromStr for AgentChoice {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            None if s == "synthetic" => Ok(AgentChoice::Synthetic("default".into())),
            None if s == "remote" => Ok(AgentChoice::Remote),
            Some(("synthetic", name)) if !name.is_empty() => Ok(AgentChoice::Synthetic(name.into())),
            _ => Err(HarnessError::Validation(format!(
                "--agent: expected `synthetic`, `synthetic:NAME` or `remote`, got `{s}`"
            ))),
        }
    }
}

/// Builds the agent. `seed` overrides the synthetic policy seed.
pub fn build_agent(
    cfg: &HarnessConfig,
    choice: &AgentChoice,
    seed: Option<u64>,
) -> Result<Box<dyn Agent>, HarnessError> {
    match choice {
        AgentChoice::Synthetic(name) => {
            let mut spec = cfg.agent.synthetic.clone();
            if let Some(s) = seed {
                spec = spec.with_seed(s);
            }
            Ok(Box::new(SyntheticAgent::new(name.clone(), spec)))
        }
        AgentChoice::Remote => {
            let ep = cfg.agent.endpoint.clone().ok_or_else(|| {
                HarnessError::Validation("--agent remote needs an [agent.endpoint] table in the config".into())
            })?;
            Ok(Box::new(ChatClient::new(ep)))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerateSummary {
    pub trials: usize,
    pub domain_counts: BTreeMap<crate::task_battery::Domain, usize>,
    pub manifest: RunManifest,
}

/// Writes the battery as JSON lines plus a manifest stub beside it.
/// Output is a pure function of the config and assets.
pub fn cmd_generate(cfg: &HarnessConfig, assets: &AssetStore, out: &Path) -> Result<GenerateSummary, HarnessError> {
    cfg.validate()?;
    let trials = generate_battery(&cfg.battery, assets)?;
    write_jsonl(out, &trials)?;
    let asset_digest = assets.digest();
    let config_digest = cfg.digest(&asset_digest);
    let counts = domain_counts(&trials);
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        run_id: run_id(&config_digest, None, None),
        config_digest,
        asset_digest,
        battery_seed: cfg.battery.seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        agent: None,
        condition: None,
        trials_sha256: Some(sha256_file(out)?),
        started_at: None,
        finished_at: None,
        counts: Counts { trials: trials.len(), ..Counts::default() },
        domain_counts: counts.clone(),
    };
    write_json(&manifest_path(out), &manifest)?;
    Ok(GenerateSummary { trials: trials.len(), domain_counts: counts, manifest })
}

/// Everything one run needs besides the agent.
#[derive(Debug, Clone)]
pub struct RunRequest<'a> {
    pub config: &'a HarnessConfig,
    pub asset_digest: String,
    pub trials: &'a [TrialSpec],
    pub condition: SteeringCondition,
    pub out: &'a Path,
    pub resume: bool,
    /// Suppress progress lines on stderr.
    pub quiet: bool,
}

/// Runs the remaining trials, appending one record line per trial. With
/// `resume`, records already on disk are kept and their trials skipped.
/// The manifest is written even when the batch aborts.
pub fn cmd_run(req: &RunRequest<'_>, agent: &dyn Agent) -> Result<RunManifest, HarnessError> {
    req.config.validate()?;
    req.condition.validate()?;
    if req.out.exists() && !req.resume {
        return Err(HarnessError::Validation(format!(
            "{} already exists; pass --resume to continue it",
            req.out.display()
        )));
    }
    let identity = agent.identity();
    let kept = prepare_resume(req.out)?;
    let label = req.condition.label();
    if let Some(r) = kept.iter().find(|r| r.condition.label() != label || r.agent != identity) {
        return Err(HarnessError::Validation(format!(
            "{}: existing record {} was made by {} under {}, not {} under {}",
            req.out.display(),
            r.trial.trial_id,
            r.agent,
            r.condition.label(),
            identity,
            label
        )));
    }
    let done = files::recorded_ids(&kept);
    let todo: Vec<TrialSpec> = req.trials.iter().filter(|t| !done.contains(&t.trial_id)).cloned().collect();

    let started_at = chrono::Utc::now().to_rfc3339();
    let mut writer = RecordWriter::append(req.out)?;
    let opts =
        BatchOptions { parallelism: req.config.run.parallelism, failure_threshold: req.config.run.failure_threshold };
    let parser = ResponseParser::standard();
    let quiet = req.quiet;
    let result = run_batch(
        &todo,
        agent,
        &req.condition,
        opts,
        parser,
        |r| writer.write(r),
        |p| {
            if !quiet && (p.done == p.total || p.done % 100 == 0) {
                eprintln!("{}/{} trials ({} failed)", p.done, p.total, p.failed);
            }
        },
    );

    let records: Vec<TrialRecord> = read_jsonl(req.out)?;
    let asset_digest = req.asset_digest.clone();
    let config_digest = req.config.digest(&asset_digest);
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        run_id: run_id(&config_digest, Some(&identity), Some(&req.condition)),
        config_digest,
        asset_digest,
        battery_seed: req.config.battery.seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        agent: Some(identity),
        condition: Some(req.condition.clone()),
        trials_sha256: None,
        started_at: Some(started_at),
        finished_at: Some(chrono::Utc::now().to_rfc3339()),
        counts: Counts::of(&records),
        domain_counts: domain_counts(&records.iter().map(|r| r.trial.clone()).collect::<Vec<_>>()),
    };
    write_json(&manifest_path(req.out), &manifest)?;
    result?;
    Ok(manifest)
}

/// Loads trials from a JSON-lines file.
pub fn load_trials(path: &Path) -> Result<Vec<TrialSpec>, HarnessError> {
    let trials: Vec<TrialSpec> = read_jsonl(path)?;
    crate::task_battery::validate_battery(&trials)?;
    Ok(trials)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent_gateway::{Emotion, Scope};
    use crate::task_battery::Domain;

    fn small_config() -> HarnessConfig {
        let mut cfg = HarnessConfig::new(3);
        cfg.battery.domains = Some(vec![Domain::Ultimatum, Domain::Loss]);
        cfg
    }

    #[test]
    fn exit_codes() {
        assert_eq!(HarnessError::Validation("x".into()).exit_code(), 2);
        assert_eq!(HarnessError::Aborted("x".into()).exit_code(), 3);
        let aborted: HarnessError = GatewayError::BatchAborted { failed: 3, total: 4, threshold: 0.5 }.into();
        assert_eq!(aborted.exit_code(), 3);
        let bad: HarnessError = GatewayError::UnknownEmotion("glee".into()).into();
        assert_eq!(bad.exit_code(), 2);
    }

    #[test]
    fn agent_choice_parses() {
        assert_eq!("synthetic".parse::<AgentChoice>().unwrap(), AgentChoice::Synthetic("default".into()));
        assert_eq!("synthetic:prospect".parse::<AgentChoice>().unwrap(), AgentChoice::Synthetic("prospect".into()));
        assert_eq!("remote".parse::<AgentChoice>().unwrap(), AgentChoice::Remote);
        assert!("human".parse::<AgentChoice>().is_err());
        let cfg = HarnessConfig::new(1);
        assert_eq!(build_agent(&cfg, &AgentChoice::Remote, None).err().map(|e| e.exit_code()), Some(2));
    }

    #[test]
    fn generate_is_deterministic_and_counts_ug() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small_config();
        let assets = AssetStore::embedded();
        let a = dir.path().join("a.jsonl");
        let b = dir.path().join("b.jsonl");
        let sa = cmd_generate(&cfg, &assets, &a).unwrap();
        cmd_generate(&cfg, &assets, &b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        assert_eq!(std::fs::read(manifest_path(&a)).unwrap(), std::fs::read(manifest_path(&b)).unwrap());
        assert_eq!(sa.domain_counts[&Domain::Ultimatum], 47);
    }

    #[test]
    fn interrupted_run_resumes_without_duplicates() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small_config();
        let assets = AssetStore::embedded();
        let trials = generate_battery(&cfg.battery, &assets).unwrap();
        let out = dir.path().join("rec.jsonl");
        let agent = build_agent(&cfg, &AgentChoice::Synthetic("prospect".into()), Some(7)).unwrap();
        let condition = SteeringCondition::rls(Emotion::Fear, 35.0, Scope::AllNew, None).unwrap();
        let req = RunRequest {
            config: &cfg,
            asset_digest: assets.digest(),
            trials: &trials[..20],
            condition: condition.clone(),
            out: &out,
            resume: false,
            quiet: true,
        };
        cmd_run(&req, agent.as_ref()).unwrap();
        // Simulate a crash mid-line.
        let mut f = std::fs::OpenOptions::new().append(true).open(&out).unwrap();
        std::io::Write::write_all(&mut f, b"{\"trial\":{\"trial_id\"").unwrap();
        drop(f);
        assert_eq!(cmd_run(&RunRequest { trials: &trials, ..req.clone() }, agent.as_ref()).unwrap_err().exit_code(), 2);
        let m = cmd_run(&RunRequest { trials: &trials, resume: true, ..req.clone() }, agent.as_ref()).unwrap();
        let recs: Vec<TrialRecord> = read_jsonl(&out).unwrap();
        assert_eq!(recs.len(), trials.len());
        assert_eq!(files::recorded_ids(&recs).len(), trials.len());
        assert!(recs.iter().all(|r| r.condition == condition));
        assert_eq!(m.counts.trials, trials.len());
        assert!(m.counts.balanced());

        let fresh = dir.path().join("fresh.jsonl");
        cmd_run(&RunRequest { trials: &trials, out: &fresh, ..req.clone() }, agent.as_ref()).unwrap();
        assert_eq!(std::fs::read(&fresh).unwrap(), std::fs::read(&out).unwrap());

        let other = build_agent(&cfg, &AgentChoice::Synthetic("prospect".into()), Some(8)).unwrap();
        let err = cmd_run(&RunRequest { trials: &trials, resume: true, ..req }, other.as_ref()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use steer_audit::agent_gateway::{Emotion, Intensity, Scope, SteeringCondition};
use steer_audit::harness::{
    analyze, build_agent, cmd_generate, cmd_run, load_trials, read_json, render_report, write_json, AgentChoice,
    HarnessConfig, HarnessError, OracleServer, RecordSet, ReportDocument, RunRequest,
};
use steer_audit::task_battery::{generate_battery, AssetStore, TrialSpec};

#[derive(Parser)]
#[command(
    name = "steer-audit",
    version,
    about = "Rationality and behavioral audit of chat agents under emotion steering"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory with replacement asset files.
    #[arg(long)]
    assets: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Steer {
    None,
    Icp,
    Rls,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    All,
    Markdown,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Write the trial battery as JSON lines.
    Generate {
        #[command(flatten)]
        common: Common,
        /// Battery seed, overriding the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an agent over a battery, appending one record per trial.
    Run {
        #[command(flatten)]
        common: Common,
        /// Trials file; generated from the config when omitted.
        #[arg(long)]
        trials: Option<PathBuf>,
        /// `synthetic`, `synthetic:NAME` or `remote`.
        #[arg(long, default_value = "synthetic")]
        agent: String,
        /// Synthetic agent seed, overriding the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "none")]
        steer: Steer,
        #[arg(long)]
        emotion: Option<String>,
        #[arg(long)]
        intensity: Option<String>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        scope: Option<String>,
        /// Comma-separated layer indices for representation steering.
        #[arg(long, value_delimiter = ',')]
        layers: Option<Vec<u32>>,
        #[arg(long)]
        parallelism: Option<usize>,
        /// Continue an existing records file.
        #[arg(long)]
        resume: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score, fit and contrast record files into a report document.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Record files, one condition each.
        records: Vec<PathBuf>,
        /// Neutral record file; by default the unsteered input.
        #[arg(long)]
        baseline: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a report document to markdown and CSV plot tables.
    Report {
        report: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        format: Format,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve a local chat-completion endpoint backed by the synthetic agent.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trials: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "127.0.0.1:8089")]
        addr: String,
    },
}

fn load_config(common: &Common) -> Result<HarnessConfig, HarnessError> {
    match &common.config {
        Some(p) => HarnessConfig::load(p),
        None => Ok(HarnessConfig::new(0)),
    }
}

fn load_assets(common: &Common) -> Result<AssetStore, HarnessError> {
    Ok(AssetStore::load(common.assets.as_deref())?)
}

fn trials_for(cfg: &HarnessConfig, assets: &AssetStore, path: Option<&Path>) -> Result<Vec<TrialSpec>, HarnessError> {
    match path {
        Some(p) => load_trials(p),
        None => Ok(generate_battery(&cfg.battery, assets)?),
    }
}

fn invalid(msg: impl Into<String>) -> HarnessError {
    HarnessError::Validation(msg.into())
}

fn condition(
    steer: Steer,
    emotion: Option<&str>,
    intensity: Option<&str>,
    beta: Option<f64>,
    scope: Option<&str>,
    layers: Option<Vec<u32>>,
) -> Result<SteeringCondition, HarnessError> {
    let need_emotion = || -> Result<Emotion, HarnessError> {
        Ok(emotion.ok_or_else(|| invalid("--emotion is required with --steer icp|rls"))?.parse()?)
    };
    match steer {
        Steer::None => {
            if emotion.is_some() || intensity.is_some() || beta.is_some() || scope.is_some() || layers.is_some() {
                return Err(invalid("steering flags given with --steer none"));
            }
            Ok(SteeringCondition::None)
        }
        Steer::Icp => {
            if beta.is_some() || scope.is_some() || layers.is_some() {
                return Err(invalid("--beta, --scope and --layers apply to --steer rls only"));
            }
            let intensity: Intensity = match intensity {
                Some(i) => i.parse()?,
                None => Intensity::Medium,
            };
            Ok(SteeringCondition::Icp { emotion: need_emotion()?, intensity })
        }
        Steer::Rls => {
            if intensity.is_some() {
                return Err(invalid("--intensity applies to --steer icp only"));
            }
            let beta = beta.ok_or_else(|| invalid("--beta is required with --steer rls"))?;
            let scope: Scope = match scope {
                Some(s) => s.parse()?,
                None => Scope::AllNew,
            };
            Ok(SteeringCondition::rls(need_emotion()?, beta, scope, layers)?)
        }
    }
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Generate { common, seed, out } => {
            let mut cfg = load_config(&common)?;
            if let Some(s) = seed {
                cfg.battery.seed = s;
            }
            let summary = cmd_generate(&cfg, &load_assets(&common)?, &out)?;
            for (domain, n) in &summary.domain_counts {
                println!("{domain}\t{n}");
            }
            println!("total\t{}", summary.trials);
        }
        Command::Run {
            common,
            trials,
            agent,
            seed,
            steer,
            emotion,
            intensity,
            beta,
            scope,
            layers,
            parallelism,
            resume,
            out,
        } => {
            let mut cfg = load_config(&common)?;
            if let Some(p) = parallelism {
                cfg.run.parallelism = p;
            }
            let assets = load_assets(&common)?;
            let cond = condition(steer, emotion.as_deref(), intensity.as_deref(), beta, scope.as_deref(), layers)?;
            let trials = trials_for(&cfg, &assets, trials.as_deref())?;
            let agent = build_agent(&cfg, &agent.parse::<AgentChoice>()?, seed)?;
            let req = RunRequest {
                config: &cfg,
                asset_digest: assets.digest(),
                trials: &trials,
                condition: cond,
                out: &out,
                resume,
                quiet: false,
            };
            let m = cmd_run(&req, agent.as_ref())?;
            println!(
                "run {}: {} trials, {} parsed, {} parse failures, {} transport failures",
                m.run_id, m.counts.trials, m.counts.parsed, m.counts.parse_failed, m.counts.transport_failed
            );
        }
        Command::Analyze { common, records, baseline, out } => {
            let cfg = load_config(&common)?;
            let sets = records.iter().map(|p| RecordSet::load(p)).collect::<Result<Vec<_>, _>>()?;
            let baseline = baseline.as_deref().map(RecordSet::load).transpose()?;
            let doc = analyze(sets, baseline, cfg.scoring.clip_cents())?;
            write_json(&out, &doc)?;
            println!(
                "{} conditions, {} effects",
                doc.conditions.len() + usize::from(doc.baseline.is_some()),
                doc.effects.len()
            );
        }
        Command::Report { report, format, out } => {
            let doc: ReportDocument = read_json(&report)?;
            let mut rendered = render_report(&doc);
            match format {
                Format::All => {}
                Format::Markdown => rendered.tables.clear(),
                Format::Csv => rendered.markdown.clear(),
            }
            for p in rendered.write_to(&out)? {
                println!("{}", p.display());
            }
        }
        Command::Oracle { common, trials, seed, addr } => {
            let cfg = load_config(&common)?;
            let assets = load_assets(&common)?;
            let trials = trials_for(&cfg, &assets, trials.as_deref())?;
            let mut spec = cfg.agent.synthetic.clone();
            if let Some(s) = seed {
                spec = spec.with_seed(s);
            }
            let server = OracleServer::bind(&addr, &trials, spec)?;
            match server.addr() {
                Some(a) => println!("serving {} trials at http://{a}/v1", trials.len()),
                None => println!("serving {} trials", trials.len()),
            }
            server.serve();
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

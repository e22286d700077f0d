//! Full pipeline: generate, run two conditions, analyze, render.

use steer_audit::agent_gateway::{Emotion, Intensity, SteeringCondition, SyntheticAgent};
use steer_audit::harness::{
    analyze, cmd_generate, cmd_run, load_trials, render_report, HarnessConfig, RecordSet, RunRequest,
};
use steer_audit::task_battery::AssetStore;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("steer-audit-demo"));
    std::fs::create_dir_all(&dir)?;
    let cfg = HarnessConfig::new(42);
    let assets = AssetStore::embedded();

    let trials_path = dir.join("trials.jsonl");
    cmd_generate(&cfg, &assets, &trials_path)?;
    let trials = load_trials(&trials_path)?;
    let agent = SyntheticAgent::new("demo", cfg.agent.synthetic.clone());

    let mut sets = Vec::new();
    let conditions = [
        ("neutral", SteeringCondition::None),
        ("joy", SteeringCondition::Icp { emotion: Emotion::Joy, intensity: Intensity::Medium }),
    ];
    for (name, condition) in conditions {
        let out = dir.join(format!("{name}.jsonl"));
        let _ = std::fs::remove_file(&out);
        let req = RunRequest {
            config: &cfg,
            asset_digest: assets.digest(),
            trials: &trials,
            condition,
            out: &out,
            resume: false,
            quiet: true,
        };
        cmd_run(&req, &agent)?;
        sets.push(RecordSet::load(&out)?);
    }

    let doc = analyze(sets, None, cfg.scoring.clip_cents())?;
    let rendered = render_report(&doc);
    for p in rendered.write_to(&dir.join("report"))? {
        println!("wrote {}", p.display());
    }
    println!("\n{}", rendered.markdown);
    Ok(())
}

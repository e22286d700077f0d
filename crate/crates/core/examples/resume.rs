//! Interrupts a run by truncating its records file, then resumes it.

use std::io::Write;

use steer_audit::agent_gateway::{SteeringCondition, SyntheticAgent};
use steer_audit::harness::{cmd_run, read_jsonl, HarnessConfig, RunRequest};
use steer_audit::record::TrialRecord;
use steer_audit::task_battery::{generate_battery, AssetStore, BatteryConfig, Domain};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let mut cfg = HarnessConfig::new(11);
    cfg.battery = BatteryConfig::new(11).with_domains(&[Domain::Endowment, Domain::Welfare]);
    let assets = AssetStore::embedded();
    let trials = generate_battery(&cfg.battery, &assets)?;
    let agent = SyntheticAgent::new("resume", cfg.agent.synthetic.clone());
    let out = dir.path().join("run.jsonl");

    let request = |resume| RunRequest {
        config: &cfg,
        asset_digest: assets.digest(),
        trials: &trials,
        condition: SteeringCondition::None,
        out: &out,
        resume,
        quiet: true,
    };
    cmd_run(&request(false), &agent)?;
    let full: Vec<TrialRecord> = read_jsonl(&out)?;

    // Keep the first ten lines and a torn eleventh.
    let text = std::fs::read_to_string(&out)?;
    let head: String = text.lines().take(10).map(|l| format!("{l}\n")).collect();
    let mut f = std::fs::File::create(&out)?;
    f.write_all(head.as_bytes())?;
    f.write_all(b"{\"trial\": {\"tri")?;
    drop(f);

    let manifest = cmd_run(&request(true), &agent)?;
    let resumed: Vec<TrialRecord> = read_jsonl(&out)?;
    println!("{} records before, {} after resume; identical: {}", full.len(), resumed.len(), full == resumed);
    println!("manifest counts {:?}", manifest.counts);
    Ok(())
}

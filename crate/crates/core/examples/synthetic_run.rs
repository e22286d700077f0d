//! Runs the seeded synthetic agent over the risk block with four workers.

use steer_audit::agent_gateway::{run_batch, BatchOptions, SteeringCondition, SyntheticAgent, SyntheticAgentSpec};
use steer_audit::response_parsing::ResponseParser;
use steer_audit::task_battery::{generate_battery, AssetStore, BatteryConfig, Domain};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = BatteryConfig::new(42).with_domains(&[Domain::RiskChoice]);
    let trials = generate_battery(&cfg, &AssetStore::embedded())?;
    let agent = SyntheticAgent::new("demo", SyntheticAgentSpec::default().with_seed(7));

    let opts = BatchOptions { parallelism: 4, ..Default::default() };
    let records = run_batch(
        &trials,
        &agent,
        &SteeringCondition::None,
        opts,
        ResponseParser::standard(),
        |_| Ok(()),
        |p| {
            if p.done % 100 == 0 {
                eprintln!("{}/{}", p.done, p.total);
            }
        },
    )?;

    let parsed = records.iter().filter(|r| r.value().is_some()).count();
    println!("{} records, {parsed} parsed", records.len());
    println!("{}", serde_json::to_string_pretty(&records[0])?);
    Ok(())
}

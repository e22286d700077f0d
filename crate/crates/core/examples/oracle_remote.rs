//! Serves the synthetic agent over HTTP and queries it with the remote client.

use steer_audit::agent_gateway::{
    run_batch, BatchOptions, ChatClient, Emotion, EndpointConfig, Scope, SteeringCondition, SyntheticAgentSpec,
};
use steer_audit::harness::OracleServer;
use steer_audit::response_parsing::ResponseParser;
use steer_audit::task_battery::{generate_battery, AssetStore, BatteryConfig, Domain};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = BatteryConfig::new(3).with_domains(&[Domain::Ultimatum, Domain::Dictator]);
    let trials = generate_battery(&cfg, &AssetStore::embedded())?;

    let oracle = OracleServer::bind("127.0.0.1:0", &trials, SyntheticAgentSpec::default())?.spawn()?;
    let client = ChatClient::new(EndpointConfig::new(oracle.base_url(), "oracle"));
    let condition = SteeringCondition::rls(Emotion::Anger, 20.0, Scope::AllNew, None)?;

    let opts = BatchOptions { parallelism: 4, ..Default::default() };
    let records = run_batch(&trials, &client, &condition, opts, ResponseParser::standard(), |_| Ok(()), |_| {})?;
    let r = &records[0];
    println!("{} -> {:?}", r.trial.trial_id, r.value());
    println!("thinking: {:?}", r.raw.as_ref().and_then(|x| x.thinking_trace.as_deref()));

    let stats = oracle.stats.clone();
    oracle.shutdown();
    println!("{} records; oracle saw {stats:?}", records.len());
    Ok(())
}

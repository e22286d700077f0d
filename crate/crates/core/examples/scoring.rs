use steer_audit::agent_gateway::{process_trial, Agent, SteeringCondition, SyntheticAgent, SyntheticAgentSpec};
use steer_audit::response_parsing::ResponseParser;
use steer_audit::scoring::{score_records, DEFAULT_CLIP_CENTS};
use steer_audit::task_battery::{generate_battery, AssetStore, BatteryConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let trials = generate_battery(&BatteryConfig::new(42), &AssetStore::embedded())?;
    let agent = SyntheticAgent::new("scorer", SyntheticAgentSpec::default());
    let records: Vec<_> = trials
        .iter()
        .map(|t| process_trial(&agent as &dyn Agent, ResponseParser::standard(), t, &SteeringCondition::None))
        .collect();

    let scores = score_records(&records, DEFAULT_CLIP_CENTS, None);
    let a = &scores.axioms;
    for (name, r) in [
        ("completeness", &a.completeness),
        ("transitivity", &a.transitivity),
        ("continuity", &a.continuity),
        ("independence", &a.independence),
    ] {
        println!("{name:<14} {}/{} {:?}", r.compliant, r.n_groups, r.rate);
    }
    println!("overall        {:?}", a.overall);

    let ix = &scores.indices;
    println!("risky rate     {:?} ci {:?}", ix.risky_rate.rate, ix.risky_rate.ci);
    println!("UG rejection   {:?}", ix.ug_rejection_rate.rate);
    println!("DG mean give   {:?}", ix.dg_mean_give.mean);
    println!("endowment gap  {:?}", ix.endowment.delta_e);
    Ok(())
}

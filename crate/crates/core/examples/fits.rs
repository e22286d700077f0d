//! Recovers behavioral parameters from synthetic choices.

use steer_audit::agent_gateway::{
    process_trial, Agent, LossPolicy, SteeringCondition, SyntheticAgent, SyntheticAgentSpec,
};
use steer_audit::choice_models::{
    fit_loss_logit, fit_risk_logit, fit_temporal_surface, IntertemporalPair, MixedGamble,
};
use steer_audit::record::{CanonChoice, TrialRecord};
use steer_audit::response_parsing::ResponseParser;
use steer_audit::task_battery::{generate_battery, AssetStore, BatteryConfig, Domain, Payload};

fn records(domain: Domain, repeats: u32, spec: SyntheticAgentSpec) -> Vec<TrialRecord> {
    let cfg = BatteryConfig::new(42).with_domains(&[domain]).with_repeats(domain, repeats);
    let agent = SyntheticAgent::new("fit", spec);
    generate_battery(&cfg, &AssetStore::embedded())
        .unwrap()
        .iter()
        .map(|t| process_trial(&agent as &dyn Agent, ResponseParser::standard(), t, &SteeringCondition::None))
        .collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let risk: Vec<(f64, bool)> = records(Domain::RiskChoice, 20, SyntheticAgentSpec::default())
        .iter()
        .filter_map(|r| match r.trial.payload {
            Payload::Risk { p_percent, gain, sure, .. } => {
                Some((p_percent as f64 / 100.0 * gain as f64 - sure as f64, r.choice()? == CanonChoice::Option(0)))
            }
            _ => None,
        })
        .collect();
    let fit = fit_risk_logit(&risk)?;
    println!("risk: tau={:.3} b={:.3} (true 0.5, 0)", fit.tau, fit.b);

    let spec =
        SyntheticAgentSpec { loss: LossPolicy::Logit { beta0: 0.0, beta_g: 0.5, beta_l: -0.9 }, ..Default::default() };
    let loss: Vec<(MixedGamble, bool)> = records(Domain::Loss, 10, spec)
        .iter()
        .filter_map(|r| match r.trial.payload {
            Payload::Loss { gain, loss } => Some((MixedGamble::new(gain as f64, loss as f64).ok()?, r.accepted()?)),
            _ => None,
        })
        .collect();
    let fit = fit_loss_logit(&loss)?;
    println!("loss: lambda={:.3} ({:?}, true 1.8)", fit.params.lambda, fit.status);

    let temporal: Vec<(IntertemporalPair, bool)> = records(Domain::Temporal, 30, SyntheticAgentSpec::default())
        .iter()
        .filter_map(|r| match r.trial.payload {
            Payload::Temporal { sooner_amount, sooner_delay, later_amount, later_delay, .. } => Some((
                IntertemporalPair::new(
                    sooner_amount as f64,
                    sooner_delay as f64,
                    later_amount as f64,
                    later_delay as f64,
                )
                .ok()?,
                r.choice()? == CanonChoice::Option(1),
            )),
            _ => None,
        })
        .collect();
    let fit = fit_temporal_surface(&temporal)?;
    println!("temporal: {:?}", fit.params);
    for c in &fit.contours {
        println!("  P(later)={:.2}: premium at 0d {:.3}, at 30d {:.3}", c.level, c.premium_at(0.0), c.premium_at(30.0));
    }
    Ok(())
}

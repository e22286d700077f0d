//! Generates the default battery and prints per-domain counts plus one
//! rendered prompt.

use std::collections::BTreeMap;

use steer_audit::task_battery::{generate_battery, AssetStore, BatteryConfig, Domain};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(42);
    let trials = generate_battery(&BatteryConfig::new(seed), &AssetStore::embedded())?;

    let mut counts: BTreeMap<Domain, usize> = BTreeMap::new();
    for t in &trials {
        *counts.entry(t.domain).or_default() += 1;
    }
    for (domain, n) in &counts {
        println!("{domain:<28} {n:>5}");
    }
    println!("{:<28} {:>5}", "total", trials.len());

    if let Some(t) = trials.iter().find(|t| t.domain == Domain::Loss) {
        println!("\n{} ({})\n{}", t.trial_id, t.template_id, t.prompt_text);
    }
    Ok(())
}

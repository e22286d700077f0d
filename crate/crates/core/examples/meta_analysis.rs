//! Effect sizes, random-effects pooling and a text forest plot.

use steer_audit::stats::{clopper_pearson, forest_rows, hedges_g, random_effects_meta, EffectLabel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let baseline = [0.42, 0.51, 0.38, 0.47, 0.55, 0.44, 0.49, 0.40];
    let conditions = [
        ("fear", [0.31, 0.36, 0.29, 0.40, 0.33, 0.35, 0.30, 0.37]),
        ("joy", [0.50, 0.58, 0.47, 0.55, 0.61, 0.52, 0.49, 0.57]),
        ("anger", [0.44, 0.46, 0.39, 0.52, 0.48, 0.41, 0.50, 0.43]),
    ];
    let mut effects = Vec::new();
    for (emotion, xs) in conditions {
        let label = EffectLabel { domain: "risky_rate".into(), emotion: emotion.into(), method: "icp".into() };
        effects.push(hedges_g(&xs, &baseline)?.with_label(label));
    }
    let meta = random_effects_meta(&effects)?;
    for row in forest_rows(&effects, &meta) {
        let name = if row.is_summary { "pooled".to_string() } else { row.emotion };
        println!("{name:<8} g={:+.3} [{:+.3}, {:+.3}] w={:.2}", row.g, row.ci_low, row.ci_high, row.weight);
    }
    println!("tau2={:.4} Q={:.3} k={}", meta.tau2, meta.q, meta.k);

    let (lo, hi) = clopper_pearson(0, 10, 0.95)?;
    println!("0/10 exact 95% interval: [{lo}, {hi:.4}]");
    Ok(())
}

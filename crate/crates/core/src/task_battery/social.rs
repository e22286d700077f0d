//! Ultimatum responder and dictator blocks.

use super::{BatteryConfig, BatteryError, Domain, Draft, OrderRule, ParseSchema, Payload, TemplateSet, TrialSpec};

pub const SOCIAL_TOTALS: std::ops::RangeInclusive<u32> = 5..=15;

/// Unfair offers `y` with `1 <= y < total/2`.
pub fn ug_offers(total: u32) -> impl Iterator<Item = u32> {
    (1..).take_while(move |y| 2 * y < total)
}

pub fn gen_social_blocks(cfg: &BatteryConfig, templates: &TemplateSet) -> Result<Vec<TrialSpec>, BatteryError> {
    let mut out = Vec::new();
    let mut cell = 0usize;
    for total in SOCIAL_TOTALS {
        for offer in ug_offers(total) {
            for repeat in 0..cfg.repeats_for(Domain::Ultimatum) {
                let template = templates.cycled("ultimatum", cell, repeat, cfg.seed)?;
                let draft = Draft {
                    domain: Domain::Ultimatum,
                    payload: Payload::Ultimatum { total, offer },
                    template,
                    repeat,
                    order: OrderRule::Fixed(Vec::new()),
                    group_key: format!("ug:t{total}:y{offer}:r{repeat}"),
                    cue: None,
                };
                out.push(draft.build(cfg, |_| {
                    let prompt = template.render(&[
                        ("currency", &cfg.currency_symbol),
                        ("total", &total.to_string()),
                        ("offer", &offer.to_string()),
                        ("rest", &(total - offer).to_string()),
                    ])?;
                    Ok((prompt, ParseSchema::AcceptReject))
                })?);
            }
            cell += 1;
        }
    }
    for (cell, total) in SOCIAL_TOTALS.enumerate() {
        let allowed: Vec<u32> = (0..=total).collect();
        let choices = format!("[{}]", allowed.iter().map(|a| cfg.money(a)).collect::<Vec<_>>().join(", "));
        for repeat in 0..cfg.repeats_for(Domain::Dictator) {
            let template = templates.cycled("dictator", cell, repeat, cfg.seed)?;
            let draft = Draft {
                domain: Domain::Dictator,
                payload: Payload::Dictator { total },
                template,
                repeat,
                order: OrderRule::Fixed(Vec::new()),
                group_key: format!("dg:t{total}:r{repeat}"),
                cue: None,
            };
            out.push(draft.build(cfg, |_| {
                let prompt = template.render(&[
                    ("currency", &cfg.currency_symbol),
                    ("total", &total.to_string()),
                    ("choices", &choices),
                ])?;
                Ok((prompt, ParseSchema::GiveAmount { allowed: allowed.clone() }))
            })?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::task_battery::AssetStore;

    #[test]
    fn offers_follow_the_unfair_rule() {
        assert_eq!(ug_offers(5).collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(ug_offers(6).collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(ug_offers(15).collect::<Vec<_>>(), (1..=7).collect::<Vec<_>>());
        let total: usize = SOCIAL_TOTALS.map(|t| ug_offers(t).count()).sum();
        assert_eq!(total, 47);
    }

    #[test]
    fn blocks_render_schemas() {
        let t = TemplateSet::load(&AssetStore::embedded(), None).unwrap();
        let trials = gen_social_blocks(&BatteryConfig::new(3), &t).unwrap();
        let ug = trials.iter().filter(|t| t.domain == Domain::Ultimatum).count();
        assert_eq!(ug, 47);
        let dg10 = trials.iter().find(|t| t.payload == Payload::Dictator { total: 10 }).unwrap();
        let ParseSchema::GiveAmount { allowed } = &dg10.parse_schema else { panic!() };
        assert_eq!(allowed.len(), 11);
        assert!(dg10.prompt_text.contains("[$0, $1, $2, $3, $4, $5, $6, $7, $8, $9, $10]"));
        let ids: std::collections::BTreeSet<_> =
            trials.iter().filter(|t| t.domain == Domain::Ultimatum).map(|t| t.template_id.as_str()).collect();
        assert_eq!(ids.len(), 3);
    }
}

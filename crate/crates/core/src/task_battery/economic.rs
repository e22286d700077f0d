//! Risk, certainty-equivalent ladders, ambiguity, loss, endowment and
//! temporal blocks.

use super::assets::{invalid, parse_cell};
use super::{
    numbered_options, AssetStore, BatteryConfig, BatteryError, Domain, Draft, EndowmentFrame, OrderRule, ParseSchema,
    Payload, TemplateSet, TrialSpec,
};

pub const RISK_SURE_AMOUNTS: [u32; 4] = [10, 20, 50, 100];
pub const RISK_PROBS_PERCENT: [u32; 8] = [30, 35, 40, 45, 55, 60, 65, 70];
/// Expected-value offsets in thousandths; zero is excluded.
pub const RISK_DELTAS_PERMILLE: [i32; 10] = [-150, -125, -100, -75, -50, 50, 75, 100, 125, 150];

pub const CE_LADDER_GAIN: u32 = 100;
pub const CE_LADDER_PROBS: [u32; 7] = [25, 35, 45, 55, 65, 75, 85];
pub const CE_RUNGS: usize = 9;

pub const AMBIGUITY_STAKES: [u32; 7] = [10, 20, 30, 40, 50, 75, 100];

/// Gains and losses both range over 5..=14.
pub const LOSS_RANGE: std::ops::RangeInclusive<u32> = 5..=14;

/// Set 1 bands: later amount and the sooner amounts paired with it.
pub const TEMPORAL_SET1_BANDS: [(u32, &[u32]); 3] = [
    (25, &[11, 12, 13, 14, 15, 16, 17, 18, 19, 20, 21, 22, 23, 24]),
    (55, &[25, 27, 30, 32, 35, 37, 40, 42, 45, 47, 50, 52, 53, 54]),
    (85, &[35, 37, 40, 42, 45, 50, 52, 55, 60, 62, 65, 70, 75, 80]),
];
pub const TEMPORAL_SET1_DELAYS: [u32; 7] = [7, 14, 30, 60, 90, 120, 180];
pub const TEMPORAL_SET2_AMOUNTS: [(u32, u32); 7] = [(6, 7), (10, 12), (14, 17), (20, 25), (28, 35), (34, 45), (40, 57)];
pub const TEMPORAL_SET2_DELAYS: [(u32, u32); 6] = [(0, 14), (0, 28), (0, 42), (14, 28), (14, 42), (28, 42)];

/// `round(S·(1+δ)/p)` with ties rounded up, in exact integer arithmetic.
pub fn risk_gain(sure: u32, p_percent: u32, delta_permille: i32) -> u32 {
    let num = sure as i64 * (1000 + delta_permille as i64);
    let den = 10 * p_percent as i64;
    ((2 * num + den) / (2 * den)) as u32
}

/// Sure amounts of a ladder: geometric between 0.2·G and 0.95·G, rounded
/// half-up.
pub fn ce_ladder_rungs(gain: u32) -> Vec<u32> {
    let (lo, hi) = (0.2 * gain as f64, 0.95 * gain as f64);
    (0..CE_RUNGS)
        .map(|i| {
            let x = lo * (hi / lo).powf(i as f64 / (CE_RUNGS - 1) as f64);
            (x + 0.5 + 1e-9).floor() as u32
        })
        .collect()
}

fn echo_schema(labels: Vec<String>, shown: Vec<String>) -> ParseSchema {
    ParseSchema::OptionEcho { labels, options: shown }
}

fn gamble_texts(cfg: &BatteryConfig, p_percent: u32, gain: u32, sure: u32) -> [String; 2] {
    [
        format!("Lottery: {p_percent}% chance of winning {}, otherwise {}.", cfg.money(gain), cfg.money(0)),
        format!("Receive {} for certain.", cfg.money(sure)),
    ]
}

fn echo_trial(draft: Draft<'_>, cfg: &BatteryConfig, texts: [String; 2]) -> Result<TrialSpec, BatteryError> {
    let template = draft.template;
    draft.build(cfg, |order| {
        let (block, labels, shown) = numbered_options(&texts, order);
        let prompt = template.render(&[("options", &block), ("currency", &cfg.currency_symbol)])?;
        Ok((prompt, echo_schema(labels, shown)))
    })
}

/// Choice grid over (S, p, δ) plus certainty-equivalent ladders.
pub fn gen_risk_block(cfg: &BatteryConfig, templates: &TemplateSet) -> Result<Vec<TrialSpec>, BatteryError> {
    let mut out = Vec::new();
    let mut cell = 0usize;
    for &sure in &RISK_SURE_AMOUNTS {
        for &p in &RISK_PROBS_PERCENT {
            for &d in &RISK_DELTAS_PERMILLE {
                let gain = risk_gain(sure, p, d);
                for repeat in 0..cfg.repeats_for(Domain::RiskChoice) {
                    let draft = Draft {
                        domain: Domain::RiskChoice,
                        payload: Payload::Risk { p_percent: p, gain, sure, delta_permille: d },
                        template: templates.cycled("risk", cell, repeat, cfg.seed)?,
                        repeat,
                        order: OrderRule::Random(2),
                        group_key: format!("risk:s{sure}:p{p}:d{d}:r{repeat}"),
                        cue: None,
                    };
                    out.push(echo_trial(draft, cfg, gamble_texts(cfg, p, gain, sure))?);
                }
                cell += 1;
            }
        }
    }
    let rungs = ce_ladder_rungs(CE_LADDER_GAIN);
    for (li, &p) in CE_LADDER_PROBS.iter().enumerate() {
        for repeat in 0..cfg.repeats_for(Domain::RiskCeLadder) {
            for (ri, &sure) in rungs.iter().enumerate() {
                let draft = Draft {
                    domain: Domain::RiskCeLadder,
                    payload: Payload::CeLadder { p_percent: p, gain: CE_LADDER_GAIN, sure, rung: ri },
                    template: templates.cycled("risk", li * CE_RUNGS + ri, repeat, cfg.seed)?,
                    repeat,
                    order: OrderRule::Random(2),
                    group_key: format!("ce:p{p}:r{repeat}"),
                    cue: None,
                };
                out.push(echo_trial(draft, cfg, gamble_texts(cfg, p, CE_LADDER_GAIN, sure))?);
            }
        }
    }
    Ok(out)
}

/// Known 50/50 urn against an urn of unknown composition, same payoff.
pub fn gen_ambiguity_block(cfg: &BatteryConfig, templates: &TemplateSet) -> Result<Vec<TrialSpec>, BatteryError> {
    let mut out = Vec::new();
    for (cell, &gain) in AMBIGUITY_STAKES.iter().enumerate() {
        let payoff = format!("You win {} if a red ball is drawn, otherwise {}.", cfg.money(gain), cfg.money(0));
        let texts = [
            format!("Known urn: exactly 25 red and 25 black balls. {payoff}"),
            format!("Unknown urn: 50 red and black balls in an unknown mix. {payoff}"),
        ];
        for repeat in 0..cfg.repeats_for(Domain::Ambiguity) {
            let draft = Draft {
                domain: Domain::Ambiguity,
                payload: Payload::Ambiguity { gain, known_p: 0.5 },
                template: templates.cycled("ambiguity", cell, repeat, cfg.seed)?,
                repeat,
                order: OrderRule::Random(2),
                group_key: format!("amb:g{gain}:r{repeat}"),
                cue: None,
            };
            out.push(echo_trial(draft, cfg, texts.clone())?);
        }
    }
    Ok(out)
}

/// Accept/reject 50/50 mixed gambles over the full (G, L) grid, each under
/// every loss template.
pub fn gen_loss_block(cfg: &BatteryConfig, templates: &TemplateSet) -> Result<Vec<TrialSpec>, BatteryError> {
    let mut out = Vec::new();
    for gain in LOSS_RANGE {
        for loss in LOSS_RANGE {
            let texts = [
                format!(
                    "ACCEPT: play a fair coin flip, winning {} on heads and losing {} on tails.",
                    cfg.money(gain),
                    cfg.money(loss)
                ),
                format!("REJECT: take {} for certain.", cfg.money(0)),
            ];
            for template in templates.for_domain("loss")? {
                for repeat in 0..cfg.repeats_for(Domain::Loss) {
                    let draft = Draft {
                        domain: Domain::Loss,
                        payload: Payload::Loss { gain, loss },
                        template,
                        repeat,
                        order: OrderRule::Random(2),
                        group_key: format!("loss:g{gain}:l{loss}:{}:r{repeat}", template.id),
                        cue: None,
                    };
                    out.push(draft.build(cfg, |order| {
                        let (block, _, _) = numbered_options(&texts, order);
                        let prompt = template.render(&[("options", &block), ("currency", &cfg.currency_symbol)])?;
                        Ok((prompt, ParseSchema::AcceptReject))
                    })?);
                }
            }
        }
    }
    Ok(out)
}

fn frame_question(frame: EndowmentFrame) -> &'static str {
    match frame {
        EndowmentFrame::Sell => {
            "This brand new item has just been given to you and is yours to keep. What is the MINIMUM price you would ACCEPT to sell it?"
        }
        EndowmentFrame::Buy => "You do not own this brand new item. What is the MAXIMUM price you would PAY to buy it?",
        EndowmentFrame::Unload => {
            "You bought this brand new item yourself, but you now want to get rid of it. What is the MINIMUM price you would ACCEPT to sell it?"
        }
        EndowmentFrame::GiftBuyer => {
            "You received this brand new item as an unexpected gift, and someone wants to buy it from you. What is the MINIMUM price you would ACCEPT to sell it?"
        }
    }
}

/// Sell, buy, unload and gift-buyer prices for every catalog item.
pub fn gen_endowment_block(
    cfg: &BatteryConfig,
    assets: &AssetStore,
    templates: &TemplateSet,
) -> Result<Vec<TrialSpec>, BatteryError> {
    let file = "endowment_items.tsv";
    let mut out = Vec::new();
    for (cell, row) in assets.rows(file, 4)?.iter().enumerate() {
        let (id, name, description) = (&row.cells[0], &row.cells[1], &row.cells[3]);
        let reference_price: u32 = parse_cell(file, row, 2)?;
        if description.is_empty() {
            return Err(invalid(file, row, "empty description"));
        }
        let item_block = format!("Item: {name}\nDescription: {description}");
        for repeat in 0..cfg.repeats_for(Domain::Endowment) {
            let template = templates.cycled("endowment", cell, repeat, cfg.seed)?;
            for frame in EndowmentFrame::ALL {
                let draft = Draft {
                    domain: Domain::Endowment,
                    payload: Payload::Endowment { item: id.clone(), frame, reference_price },
                    template,
                    repeat,
                    order: OrderRule::Fixed(Vec::new()),
                    group_key: format!("end:{id}:r{repeat}"),
                    cue: None,
                };
                out.push(draft.build(cfg, |_| {
                    let prompt = template.render(&[
                        ("item_block", &item_block),
                        ("frame", frame_question(frame)),
                        ("currency", &cfg.currency_symbol),
                    ])?;
                    Ok((prompt, ParseSchema::Price))
                })?);
            }
        }
    }
    Ok(out)
}

/// Delay wording; later delays of 2, 4 or 6 weeks read in weeks.
pub fn format_delay(days: u32, allow_weeks: bool) -> String {
    match days {
        0 => "today".to_string(),
        14 | 28 | 42 if allow_weeks => format!("in {} weeks", days / 7),
        1 => "in 1 day".to_string(),
        d => format!("in {d} days"),
    }
}

fn temporal_texts(cfg: &BatteryConfig, a_s: u32, t_s: u32, a_l: u32, t_l: u32) -> [String; 2] {
    [
        format!("{} {}.", cfg.money(a_s), format_delay(t_s, false)),
        format!("{} {}.", cfg.money(a_l), format_delay(t_l, true)),
    ]
}

/// Set 1: banded immediate-versus-delayed pairs, each shown in both orders.
/// Set 2: the amount-by-delay grid with a drawn order.
pub fn gen_temporal_block(cfg: &BatteryConfig, templates: &TemplateSet) -> Result<Vec<TrialSpec>, BatteryError> {
    let mut out = Vec::new();
    let mut cell = 0usize;
    let repeats = cfg.repeats_for(Domain::Temporal);
    for (a_l, sooner) in TEMPORAL_SET1_BANDS {
        for (i, &a_s) in sooner.iter().enumerate() {
            let t_l = TEMPORAL_SET1_DELAYS[i % TEMPORAL_SET1_DELAYS.len()];
            for repeat in 0..repeats {
                let template = templates.cycled("temporal", cell, repeat, cfg.seed)?;
                for order in [vec![0, 1], vec![1, 0]] {
                    let draft = Draft {
                        domain: Domain::Temporal,
                        payload: Payload::Temporal {
                            set: 1,
                            sooner_amount: a_s,
                            sooner_delay: 0,
                            later_amount: a_l,
                            later_delay: t_l,
                        },
                        template,
                        repeat,
                        order: OrderRule::Fixed(order),
                        group_key: format!("tmp1:{a_l}:{a_s}:r{repeat}"),
                        cue: None,
                    };
                    out.push(echo_trial(draft, cfg, temporal_texts(cfg, a_s, 0, a_l, t_l))?);
                }
            }
            cell += 1;
        }
    }
    for (a_s, a_l) in TEMPORAL_SET2_AMOUNTS {
        for (t_s, t_l) in TEMPORAL_SET2_DELAYS {
            for repeat in 0..repeats {
                let draft = Draft {
                    domain: Domain::Temporal,
                    payload: Payload::Temporal {
                        set: 2,
                        sooner_amount: a_s,
                        sooner_delay: t_s,
                        later_amount: a_l,
                        later_delay: t_l,
                    },
                    template: templates.cycled("temporal", cell, repeat, cfg.seed)?,
                    repeat,
                    order: OrderRule::Random(2),
                    group_key: format!("tmp2:{a_s}:{a_l}:{t_s}:{t_l}:r{repeat}"),
                    cue: None,
                };
                out.push(echo_trial(draft, cfg, temporal_texts(cfg, a_s, t_s, a_l, t_l))?);
            }
            cell += 1;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn templates() -> TemplateSet {
        TemplateSet::load(&AssetStore::embedded(), None).unwrap()
    }

    #[test]
    fn risk_gain_rounds_half_up() {
        assert_eq!(risk_gain(20, 40, 50), 53);
        // Independent float check over the whole grid, away from ties.
        for &s in &RISK_SURE_AMOUNTS {
            for &p in &RISK_PROBS_PERCENT {
                for &d in &RISK_DELTAS_PERMILLE {
                    let exact = s as f64 * (1.0 + d as f64 / 1000.0) / (p as f64 / 100.0);
                    let g = risk_gain(s, p, d) as f64;
                    assert!(g - exact <= 0.5 + 1e-9 && exact - g < 0.5 + 1e-9, "{s} {p} {d}");
                }
            }
        }
    }

    #[test]
    fn risk_grid_has_320_cells_and_nonzero_delta() {
        let trials = gen_risk_block(&BatteryConfig::new(1), &templates()).unwrap();
        let choice: Vec<_> = trials.iter().filter(|t| t.domain == Domain::RiskChoice).collect();
        assert_eq!(choice.len(), 320);
        let keys: BTreeSet<_> = choice.iter().map(|t| serde_json::to_string(&t.payload).unwrap()).collect();
        assert_eq!(keys.len(), 320);
        assert!(!RISK_DELTAS_PERMILLE.contains(&0));
        let ids: BTreeSet<_> = choice.iter().map(|t| t.template_id.as_str()).collect();
        assert_eq!(ids.len(), 3);
    }

    #[test]
    fn ladders_straddle_expected_value() {
        assert_eq!(ce_ladder_rungs(100), vec![20, 24, 30, 36, 44, 53, 64, 78, 95]);
        let rungs = ce_ladder_rungs(CE_LADDER_GAIN);
        for &p in &CE_LADDER_PROBS {
            let ev = p * CE_LADDER_GAIN / 100;
            assert!(rungs[0] < ev && ev < rungs[CE_RUNGS - 1], "p = {p}");
        }
        let trials = gen_risk_block(&BatteryConfig::new(1), &templates()).unwrap();
        let ladder = trials.iter().filter(|t| t.domain == Domain::RiskCeLadder).count();
        assert_eq!(ladder, CE_LADDER_PROBS.len() * CE_RUNGS);
    }

    #[test]
    fn ambiguity_options_differ_in_one_sentence() {
        let trials = gen_ambiguity_block(&BatteryConfig::new(2), &templates()).unwrap();
        assert!(AMBIGUITY_STAKES.len() >= 4);
        for t in &trials {
            let Payload::Ambiguity { known_p, .. } = t.payload else { panic!() };
            assert_eq!(known_p, 0.5);
            let ParseSchema::OptionEcho { options, .. } = &t.parse_schema else { panic!() };
            let split = |s: &str| s.split(". ").map(str::to_string).collect::<Vec<_>>();
            let (a, b) = (split(&options[0]), split(&options[1]));
            assert_eq!(a.len(), b.len());
            let differing = a.iter().zip(&b).filter(|(x, y)| x != y).count();
            assert_eq!(differing, 1, "{options:?}");
        }
    }

    #[test]
    fn loss_grid_is_full_and_symmetric() {
        let trials = gen_loss_block(&BatteryConfig::new(2), &templates()).unwrap();
        let cells: BTreeSet<(u32, u32)> = trials
            .iter()
            .map(|t| match t.payload {
                Payload::Loss { gain, loss } => (gain, loss),
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(cells.len(), 100);
        assert!(cells.contains(&(5, 14)) && cells.contains(&(14, 5)));
        assert_eq!(trials.len(), 300);
        for t in &trials {
            assert!(t.prompt_text.contains("REJECT: take $0 for certain."));
        }
    }

    #[test]
    fn endowment_frames_share_item_block() {
        let assets = AssetStore::embedded();
        let trials = gen_endowment_block(&BatteryConfig::new(2), &assets, &templates()).unwrap();
        assert_eq!(trials.len(), 28);
        for item in trials.chunks(4) {
            let block = |t: &TrialSpec| {
                let start = t.prompt_text.find("Item: ").unwrap();
                let end = t.prompt_text[start..].find("\n\n").unwrap() + start;
                t.prompt_text[start..end].to_string()
            };
            assert_eq!(block(&item[0]), block(&item[1]));
            assert!(item[0].prompt_text.contains("MINIMUM price you would ACCEPT"));
            assert!(item[1].prompt_text.contains("MAXIMUM price you would PAY"));
            assert!(item[2].prompt_text.contains("now want to get rid of it"));
            assert!(item[3].prompt_text.contains("unexpected gift"));
        }
    }

    #[test]
    fn temporal_sets_and_week_wording() {
        let trials = gen_temporal_block(&BatteryConfig::new(2), &templates()).unwrap();
        let set2: Vec<_> = trials.iter().filter(|t| matches!(t.payload, Payload::Temporal { set: 2, .. })).collect();
        assert_eq!(set2.len(), 42);
        assert_eq!(trials.len() - set2.len(), 2 * 42);
        assert_eq!(format_delay(28, true), "in 4 weeks");
        assert_eq!(format_delay(28, false), "in 28 days");
        assert_eq!(format_delay(30, true), "in 30 days");
        let t = set2
            .iter()
            .find(|t| matches!(t.payload, Payload::Temporal { sooner_amount: 6, sooner_delay: 0, later_delay: 28, .. }))
            .unwrap();
        assert!(t.prompt_text.contains("$7 in 4 weeks."));
        assert!(t.prompt_text.contains("$6 today."));
    }
}

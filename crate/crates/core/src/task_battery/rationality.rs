//! Axiom diagnostics: completeness, transitivity, continuity, independence.

use std::collections::BTreeMap;

use super::assets::{invalid, parse_cell, Row};
use super::{
    AssetStore, BatteryConfig, BatteryError, Domain, Draft, Lottery, OrderRule, ParseSchema, Payload, TemplateSet,
    TrialSpec,
};

/// Continuity sweeps p over 0, 5, ..., 100.
pub const CONTINUITY_STEPS: usize = 21;

const PAIRS: [[usize; 2]; 3] = [[0, 1], [1, 2], [0, 2]];

fn ab_schema(shown: Vec<String>) -> ParseSchema {
    ParseSchema::BinaryChoice { labels: vec!["A".into(), "B".into()], options: shown, allow_indifferent: true }
}

fn question_var(q: &str) -> String {
    if q.is_empty() {
        String::new()
    } else {
        format!("{q}\n\n")
    }
}

fn ab_trial(
    draft: Draft<'_>,
    cfg: &BatteryConfig,
    texts: [String; 2],
    question: &str,
) -> Result<TrialSpec, BatteryError> {
    let template = draft.template;
    let question = question_var(question);
    draft.build(cfg, |order| {
        let shown: Vec<String> = order.iter().map(|&i| texts[i].clone()).collect();
        let prompt = template.render(&[
            ("option_a", &shown[0]),
            ("option_b", &shown[1]),
            ("question", &question),
            ("currency", &cfg.currency_symbol),
        ])?;
        Ok((prompt, ab_schema(shown)))
    })
}

fn parse_lottery(file: &str, row: &Row, col: usize) -> Result<Lottery, BatteryError> {
    let mut outcomes = Vec::new();
    for part in row.cells[col].split('|') {
        let (p, x) = part.split_once(':').ok_or_else(|| invalid(file, row, format!("bad lottery `{part}`")))?;
        let p: u32 = p.trim().parse().map_err(|_| invalid(file, row, format!("bad percent in `{part}`")))?;
        let x: u32 = x.trim().parse().map_err(|_| invalid(file, row, format!("bad amount in `{part}`")))?;
        outcomes.push((p, x));
    }
    if outcomes.iter().map(|o| o.0).sum::<u32>() != 100 {
        return Err(invalid(file, row, "lottery percents must sum to 100"));
    }
    Ok(Lottery { outcomes })
}

/// `alpha%` of `a` mixed with the rest of `n`; same amounts merge.
fn mix(alpha: u32, a: &Lottery, n: &Lottery) -> Option<Lottery> {
    let mut merged: BTreeMap<u32, u32> = BTreeMap::new();
    for (w, lot) in [(alpha, a), (100 - alpha, n)] {
        for &(p, x) in &lot.outcomes {
            if (w * p) % 100 != 0 {
                return None;
            }
            *merged.entry(x).or_default() += w * p / 100;
        }
    }
    let outcomes = merged.into_iter().rev().filter(|(_, p)| *p > 0).map(|(x, p)| (p, x)).collect();
    Some(Lottery { outcomes })
}

fn describe_lottery(cfg: &BatteryConfig, l: &Lottery) -> String {
    if let [(100, x)] = l.outcomes.as_slice() {
        return format!("{} for certain.", cfg.money(x));
    }
    let parts: Vec<String> = l.outcomes.iter().map(|&(p, x)| format!("a {p}% chance of {}", cfg.money(x))).collect();
    format!("{}.", parts.join(" and "))
}

/// Completeness pairs in both orders, transitivity triples as three pairwise
/// prompts, continuity sweeps and independence base/mixed pairs.
pub fn gen_rationality_battery(
    cfg: &BatteryConfig,
    assets: &AssetStore,
    templates: &TemplateSet,
) -> Result<Vec<TrialSpec>, BatteryError> {
    let mut out = Vec::new();

    let tpl = templates.cycled("completeness", 0, 0, 0)?;
    for row in assets.rows("completeness.tsv", 4)? {
        let (id, question) = (&row.cells[0], &row.cells[1]);
        let options = [row.cells[2].clone(), row.cells[3].clone()];
        for repeat in 0..cfg.repeats_for(Domain::RationalityCompleteness) {
            for order in [vec![0, 1], vec![1, 0]] {
                let draft = Draft {
                    domain: Domain::RationalityCompleteness,
                    payload: Payload::Completeness { item: id.clone(), options: options.clone() },
                    template: tpl,
                    repeat,
                    order: OrderRule::Fixed(order),
                    group_key: format!("cmp:{id}:r{repeat}"),
                    cue: None,
                };
                out.push(ab_trial(draft, cfg, options.clone(), question)?);
            }
        }
    }

    let tpl = templates.cycled("transitivity", 0, 0, 0)?;
    for row in assets.rows("transitivity.tsv", 5)? {
        let (id, question) = (&row.cells[0], &row.cells[1]);
        let members = [&row.cells[2], &row.cells[3], &row.cells[4]];
        for repeat in 0..cfg.repeats_for(Domain::RationalityTransitivity) {
            for pair in PAIRS {
                let options = [members[pair[0]].clone(), members[pair[1]].clone()];
                let draft = Draft {
                    domain: Domain::RationalityTransitivity,
                    payload: Payload::Transitivity { item: id.clone(), pair, options: options.clone() },
                    template: tpl,
                    repeat,
                    order: OrderRule::Random(2),
                    group_key: format!("trn:{id}:r{repeat}"),
                    cue: None,
                };
                out.push(ab_trial(draft, cfg, options, question)?);
            }
        }
    }

    let tpl = templates.cycled("continuity", 0, 0, 0)?;
    let file = "continuity.tsv";
    for row in assets.rows(file, 4)? {
        let id = &row.cells[0];
        let high: u32 = parse_cell(file, &row, 1)?;
        let low: u32 = parse_cell(file, &row, 2)?;
        let sure: u32 = parse_cell(file, &row, 3)?;
        if !(low < sure && sure < high) {
            return Err(invalid(file, &row, "need low < sure < high"));
        }
        for repeat in 0..cfg.repeats_for(Domain::RationalityContinuity) {
            for step in 0..CONTINUITY_STEPS as u32 {
                let p = step * 5;
                let texts = [
                    format!("a {p}% chance of {}, otherwise {}.", cfg.money(high), cfg.money(low)),
                    format!("{} for certain.", cfg.money(sure)),
                ];
                let draft = Draft {
                    domain: Domain::RationalityContinuity,
                    payload: Payload::Continuity { item: id.clone(), p_percent: p, high, low, sure },
                    template: tpl,
                    repeat,
                    order: OrderRule::Random(2),
                    group_key: format!("con:{id}:r{repeat}"),
                    cue: None,
                };
                out.push(ab_trial(draft, cfg, texts, "")?);
            }
        }
    }

    let tpl = templates.cycled("independence", 0, 0, 0)?;
    let file = "independence.tsv";
    for row in assets.rows(file, 5)? {
        let id = &row.cells[0];
        let alpha: u32 = parse_cell(file, &row, 1)?;
        if !(1..100).contains(&alpha) {
            return Err(invalid(file, &row, "alpha_percent must lie in 1..99"));
        }
        let (l, m, n) = (parse_lottery(file, &row, 2)?, parse_lottery(file, &row, 3)?, parse_lottery(file, &row, 4)?);
        let (ml, mm) = match (mix(alpha, &l, &n), mix(alpha, &m, &n)) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(invalid(file, &row, "mixture percents are not whole numbers")),
        };
        for repeat in 0..cfg.repeats_for(Domain::RationalityIndependence) {
            for (mixed, left, right) in [(false, &l, &m), (true, &ml, &mm)] {
                let texts = [describe_lottery(cfg, left), describe_lottery(cfg, right)];
                let draft = Draft {
                    domain: Domain::RationalityIndependence,
                    payload: Payload::Independence {
                        item: id.clone(),
                        mixed,
                        alpha_percent: alpha,
                        left: left.clone(),
                        right: right.clone(),
                    },
                    template: tpl,
                    repeat,
                    order: OrderRule::Random(2),
                    group_key: format!("ind:{id}:r{repeat}"),
                    cue: None,
                };
                out.push(ab_trial(draft, cfg, texts, "")?);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn trials() -> Vec<TrialSpec> {
        let assets = AssetStore::embedded();
        let t = TemplateSet::load(&assets, None).unwrap();
        gen_rationality_battery(&BatteryConfig::new(4), &assets, &t).unwrap()
    }

    fn groups(trials: &[TrialSpec], d: Domain) -> BTreeMap<String, Vec<&TrialSpec>> {
        let mut g: BTreeMap<String, Vec<&TrialSpec>> = BTreeMap::new();
        for t in trials.iter().filter(|t| t.domain == d) {
            g.entry(t.group_key.clone()).or_default().push(t);
        }
        g
    }

    #[test]
    fn completeness_pairs_differ_only_in_order() {
        let all = trials();
        for (_, g) in groups(&all, Domain::RationalityCompleteness) {
            assert_eq!(g.len(), 2);
            assert_eq!(g[0].payload, g[1].payload);
            assert_eq!(g[0].option_order, vec![0, 1]);
            assert_eq!(g[1].option_order, vec![1, 0]);
            let (Payload::Completeness { options, .. }, ParseSchema::BinaryChoice { options: shown, .. }) =
                (&g[1].payload, &g[1].parse_schema)
            else {
                panic!()
            };
            assert_eq!(shown[0], options[1]);
        }
    }

    #[test]
    fn transitivity_triples_cover_all_pairs() {
        let all = trials();
        for (_, g) in groups(&all, Domain::RationalityTransitivity) {
            let pairs: Vec<_> = g
                .iter()
                .map(|t| match &t.payload {
                    Payload::Transitivity { pair, .. } => *pair,
                    _ => unreachable!(),
                })
                .collect();
            assert_eq!(pairs, PAIRS.to_vec());
        }
    }

    #[test]
    fn continuity_sweeps_have_21_steps() {
        let all = trials();
        let g = groups(&all, Domain::RationalityContinuity);
        assert_eq!(g.len(), 6);
        for (_, sweep) in g {
            let ps: Vec<u32> = sweep
                .iter()
                .map(|t| match t.payload {
                    Payload::Continuity { p_percent, .. } => p_percent,
                    _ => unreachable!(),
                })
                .collect();
            assert_eq!(ps, (0..=100).step_by(5).collect::<Vec<u32>>());
            assert!(sweep[0].prompt_text.contains("as much money as possible"));
        }
    }

    #[test]
    fn mixture_matches_hand_example() {
        let sure = |x| Lottery { outcomes: vec![(100, x)] };
        let mixed = mix(67, &sure(30), &sure(10)).unwrap();
        assert_eq!(mixed.outcomes, vec![(67, 30), (33, 10)]);
        let cfg = BatteryConfig::new(0);
        assert_eq!(describe_lottery(&cfg, &mixed), "a 67% chance of $30 and a 33% chance of $10.");
        assert_eq!(describe_lottery(&cfg, &sure(20)), "$20 for certain.");
        // Mixing preserves the expected-value ordering of the base pair.
        let (l, m, n) = (sure(30), sure(20), sure(10));
        let (ml, mm) = (mix(67, &l, &n).unwrap(), mix(67, &m, &n).unwrap());
        assert!(ml.expected_value() > mm.expected_value());
        assert!(mix(33, &Lottery { outcomes: vec![(50, 1), (50, 2)] }, &sure(0)).is_none());
    }

    #[test]
    fn independence_groups_pair_base_and_mixed() {
        let all = trials();
        for (_, g) in groups(&all, Domain::RationalityIndependence) {
            let flags: Vec<bool> = g
                .iter()
                .map(|t| match t.payload {
                    Payload::Independence { mixed, .. } => mixed,
                    _ => unreachable!(),
                })
                .collect();
            assert_eq!(flags, vec![false, true]);
        }
    }
}

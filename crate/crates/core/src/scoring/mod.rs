//! Axiom compliance and behavioral indices from trial records.

mod axioms;
mod indices;

pub use axioms::{
    completeness_ok, continuity_ok, independence_ok, score_axioms, score_completeness, score_continuity,
    score_independence, score_transitivity, transitivity_ok, AxiomRate, AxiomScores,
};
pub use indices::{
    ambiguity_aversion, assistance_mean, blame_summary, compute_endowment, compute_indices, compute_match_index,
    compute_sai, dictator, match_diff, moral_composites, moral_summary, risky_rate, sai, sai_norm, ug_rejection,
    BlameSummary, DomainIndices, EndowmentSummary, MatchConvention, MatchIndex, Mean, MoralComposite, MoralSummary,
    Rate, ShareRate, StakeRate,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::agent_gateway::Emotion;
use crate::record::{CanonChoice, TrialRecord};
use crate::task_battery::{Domain, EndowmentFrame, Payload};

/// Default price clip: 100 currency units.
pub const DEFAULT_CLIP_CENTS: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub axioms: AxiomScores,
    pub indices: DomainIndices,
}

/// Records sorted by trial id, so every reduction runs in one fixed order.
pub fn sorted(records: &[TrialRecord]) -> Vec<&TrialRecord> {
    let mut v: Vec<&TrialRecord> = records.iter().collect();
    v.sort_by(|a, b| a.trial.trial_id.cmp(&b.trial.trial_id));
    v
}

pub fn score_records(records: &[TrialRecord], clip_cents: u64, induced: Option<Emotion>) -> Scores {
    let recs = sorted(records);
    Scores { axioms: score_axioms(&recs), indices: compute_indices(&recs, clip_cents, induced) }
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Per-unit values used as the sample for emotion-vs-neutral effect sizes,
/// keyed by a stable domain label. Persuasion always uses sad minus anger so
/// that conditions stay comparable.
pub fn effect_units(records: &[TrialRecord], clip_cents: u64) -> BTreeMap<&'static str, Vec<f64>> {
    let recs = sorted(records);
    let mut m: BTreeMap<&'static str, Vec<f64>> = BTreeMap::new();
    let mut push = |k: &'static str, v: Option<f64>| {
        if let Some(v) = v {
            m.entry(k).or_default().push(v);
        }
    };
    for r in &recs {
        let opt = |c: usize| match r.choice() {
            Some(CanonChoice::Option(x)) => Some(indicator(x == c)),
            _ => None,
        };
        match &r.trial.payload {
            Payload::Risk { .. } => push("risk", opt(0)),
            Payload::Ambiguity { .. } => push("ambiguity", opt(0)),
            Payload::Loss { .. } => push("loss", r.accepted().map(indicator)),
            Payload::Temporal { .. } => push("temporal", opt(1)),
            Payload::Endowment { frame: EndowmentFrame::Sell, .. } => {
                push("endowment", r.price_cents().map(|c| c.min(clip_cents) as f64 / 100.0))
            }
            Payload::Stereotype { cue, .. } => push("stereotype", r.score().map(|s| sai(s, *cue))),
            Payload::Blame { statement: crate::task_battery::BlameStatement::Blame, .. } => {
                push("blame", r.score().map(f64::from))
            }
            Payload::Ultimatum { .. } => push("ultimatum", r.accepted().map(|a| indicator(!a))),
            Payload::Dictator { total } => push("dictator", r.give().map(|g| g as f64 / (*total).max(1) as f64)),
            Payload::Welfare { .. } => push("welfare", r.score().map(f64::from)),
            _ => {}
        }
    }
    let mi = compute_match_index(&recs, MatchConvention::SadMinusAnger);
    if !mi.diffs.is_empty() {
        m.insert("persuasion", mi.diffs);
    }
    let (units, _) = moral_composites(&recs);
    if !units.is_empty() {
        m.insert("moral", units.iter().map(|u| u.condemnation).collect());
    }
    let mut rationality = Vec::new();
    for f in [score_completeness, score_transitivity, score_continuity, score_independence] {
        rationality.extend(f(&recs).1.into_iter().flatten().map(indicator));
    }
    if !rationality.is_empty() {
        m.insert("rationality", rationality);
    }
    m
}

/// Number of records per domain with no usable answer.
pub fn failure_counts(records: &[TrialRecord]) -> BTreeMap<Domain, (usize, usize)> {
    let mut m: BTreeMap<Domain, (usize, usize)> = BTreeMap::new();
    for r in records {
        let e = m.entry(r.trial.domain).or_default();
        if r.is_transport_failure() {
            e.1 += 1;
        } else if r.value().is_none() {
            e.0 += 1;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent_gateway::SteeringCondition;
    use crate::response_parsing::{render_canonical, OutcomeValue};
    use crate::task_battery::{generate_battery, AppealFrame, AssetStore, BatteryConfig, MoralStatement, TrialSpec};

    fn battery() -> Vec<TrialSpec> {
        generate_battery(&BatteryConfig::new(2), &AssetStore::embedded()).unwrap()
    }

    fn rec(t: &TrialSpec, v: OutcomeValue) -> TrialRecord {
        let text = render_canonical(&t.parse_schema, v).unwrap();
        TrialRecord::answered(t.clone(), SteeringCondition::None, "test", &text)
    }

    fn canon(t: &TrialSpec, c: usize) -> OutcomeValue {
        OutcomeValue::Choice(t.display_position(c).unwrap())
    }

    #[test]
    fn sai_examples_and_reflection() {
        assert_eq!((sai(5, 1), sai_norm(sai(5, 1))), (5.0, 1.0));
        assert_eq!((sai(2, -1), sai_norm(sai(2, -1))), (4.0, 0.75));
        assert_eq!((sai(3, 1), sai(3, -1)), (3.0, 3.0));
        for s in 1..=5u8 {
            assert_eq!(sai(s, 1), sai(6 - s, -1));
        }
    }

    #[test]
    fn match_index_sign_conventions() {
        assert_eq!(match_diff(4, 2, MatchConvention::SadMinusAnger), 2.0);
        assert_eq!(match_diff(4, 4, MatchConvention::AngerMinusSad), 0.0);
        assert_eq!(match_diff(4, 2, MatchConvention::AngerMinusSad), -2.0);
        assert_eq!(MatchConvention::for_emotion(Some(Emotion::Anger)), MatchConvention::AngerMinusSad);
    }

    #[test]
    fn persuasion_pairs_by_order_and_repeat() {
        let trials: Vec<_> = battery().into_iter().filter(|t| t.domain == Domain::Persuasion).collect();
        let records: Vec<_> = trials
            .iter()
            .map(|t| {
                let Payload::Persuasion { frame, .. } = t.payload else { unreachable!() };
                rec(t, OutcomeValue::Score(if frame == AppealFrame::Sad { 4 } else { 2 }))
            })
            .collect();
        let mi = compute_match_index(&sorted(&records), MatchConvention::SadMinusAnger);
        assert_eq!(mi.n, trials.len() / 2);
        assert_eq!(mi.mean, Some(2.0));
        assert_eq!(mi.excluded, 0);
    }

    #[test]
    fn moral_composite_examples() {
        let trials: Vec<_> = battery().into_iter().filter(|t| t.domain == Domain::Moral).collect();
        let score = |s: MoralStatement| match s {
            MoralStatement::Wrongness => 5,
            MoralStatement::Punishment => 4,
            MoralStatement::Harm | MoralStatement::Consequences => 1,
            MoralStatement::Intention => 2,
        };
        let records: Vec<_> = trials
            .iter()
            .map(|t| {
                let Payload::Moral { statement, .. } = t.payload else { unreachable!() };
                rec(t, OutcomeValue::Score(score(statement)))
            })
            .collect();
        let (units, incomplete) = moral_composites(&sorted(&records));
        assert_eq!(incomplete, 0);
        assert_eq!(units.len(), trials.len() / 5);
        for u in &units {
            assert_eq!((u.condemnation, u.harm_consequences, u.intention, u.restraint()), (4.5, 1.0, 2.0, 4.0));
        }
        let partial = &records[1..];
        assert_eq!(moral_composites(&sorted(partial)).1, 1);
    }

    #[test]
    fn endowment_examples() {
        let trials = battery();
        let frame_trial = |f: EndowmentFrame| {
            trials.iter().find(|t| matches!(t.payload, Payload::Endowment { frame, .. } if frame == f)).unwrap()
        };
        let mut recs = Vec::new();
        for c in [500, 517, 534] {
            recs.push(rec(frame_trial(EndowmentFrame::Sell), OutcomeValue::PriceCents(c)));
        }
        for c in [750, 828] {
            recs.push(rec(frame_trial(EndowmentFrame::Buy), OutcomeValue::PriceCents(c)));
        }
        let e = compute_endowment(&sorted(&recs), DEFAULT_CLIP_CENTS);
        assert_eq!(e.wta.mean, Some(5.17));
        assert_eq!(e.wtp.mean, Some(7.89));
        assert_eq!(e.delta_e, Some(-2.72));

        let same = vec![
            rec(frame_trial(EndowmentFrame::Sell), OutcomeValue::PriceCents(900)),
            rec(frame_trial(EndowmentFrame::Buy), OutcomeValue::PriceCents(900)),
        ];
        assert_eq!(compute_endowment(&sorted(&same), DEFAULT_CLIP_CENTS).delta_e, Some(0.0));

        let big = vec![rec(frame_trial(EndowmentFrame::Sell), OutcomeValue::PriceCents(25_000))];
        assert_eq!(compute_endowment(&sorted(&big), DEFAULT_CLIP_CENTS).wta.mean, Some(100.0));
        // Raw record keeps the unclipped price.
        assert_eq!(big[0].price_cents(), Some(25_000));
    }

    #[test]
    fn rate_examples() {
        let trials = battery();
        let risk: Vec<_> = trials.iter().filter(|t| t.domain == Domain::RiskChoice).take(10).collect();
        let recs: Vec<_> = risk.iter().enumerate().map(|(i, t)| rec(t, canon(t, usize::from(i >= 3)))).collect();
        assert_eq!(risky_rate(&sorted(&recs)).rate, Some(0.3));

        let ug: Vec<_> = trials
            .iter()
            .filter(|t| t.domain == Domain::Ultimatum)
            .map(|t| rec(t, OutcomeValue::Accept(false)))
            .collect();
        let (rej, by_share) = ug_rejection(&sorted(&ug));
        assert_eq!(rej.rate, Some(1.0));
        assert!(by_share.windows(2).all(|w| w[0].share < w[1].share));

        let dg10 = trials.iter().find(|t| t.payload == Payload::Dictator { total: 10 }).unwrap();
        let (give, share) = dictator(&sorted(&[rec(dg10, OutcomeValue::Give(5))]));
        assert_eq!((give.mean, share.mean), (Some(5.0), Some(0.5)));
    }

    #[test]
    fn failed_parses_are_excluded_from_indices_and_fail_axioms() {
        let trials = battery();
        let amb: Vec<_> = trials.iter().filter(|t| t.domain == Domain::Ambiguity).take(4).collect();
        let mut recs: Vec<_> = amb.iter().map(|t| rec(t, canon(t, 0))).collect();
        recs.push(TrialRecord::answered(amb[0].clone(), SteeringCondition::None, "t", "no idea"));
        let (aai, _) = ambiguity_aversion(&sorted(&recs));
        assert_eq!((aai.k, aai.n, aai.excluded), (4, 4, 1));

        let cmp: Vec<_> = trials.iter().filter(|t| t.domain == Domain::RationalityCompleteness).take(2).collect();
        assert_eq!(cmp[0].group_key, cmp[1].group_key);
        let recs = vec![
            rec(cmp[0], canon(cmp[0], 0)),
            TrialRecord::answered(cmp[1].clone(), SteeringCondition::None, "t", "hmm"),
        ];
        let (rate, _) = score_completeness(&sorted(&recs));
        assert_eq!((rate.compliant, rate.n_groups), (0, 1));
    }

    #[test]
    fn scores_ignore_record_order() {
        let trials = battery();
        let spec = crate::agent_gateway::SyntheticAgentSpec { lapse: 0.2, ..Default::default() };
        let mut recs: Vec<_> = trials
            .iter()
            .map(|t| {
                let raw = spec.synthetic_answer(t).unwrap();
                TrialRecord::answered(t.clone(), SteeringCondition::None, "s", &raw.full_text)
            })
            .collect();
        let a = score_records(&recs, DEFAULT_CLIP_CENTS, None);
        recs.reverse();
        let b = score_records(&recs, DEFAULT_CLIP_CENTS, None);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        for r in [a.indices.risky_rate, a.indices.aai, a.indices.ug_rejection_rate] {
            assert!((0.0..=1.0).contains(&r.rate.unwrap()));
        }
        assert!((0.0..=1.0).contains(&a.indices.sai_norm.mean.unwrap()));
        assert!((1.0..=5.0).contains(&a.indices.assistance.mean.unwrap()));
        let units = effect_units(&recs, DEFAULT_CLIP_CENTS);
        assert!(units.contains_key("rationality") && units.contains_key("persuasion"));
    }
}

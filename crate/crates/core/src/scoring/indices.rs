//! Behavioral indices for the economic, vignette and social domains.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::agent_gateway::Emotion;
use crate::record::{CanonChoice, TrialRecord};
use crate::stats::{clopper_pearson, one_sample_t, spearman_rho, TestResult};
use crate::task_battery::{
    AppealFrame, BlameStatement, Domain, EndowmentFrame, LikertOrder, MoralStatement, ParseSchema, Payload,
};

/// Proportion with a 95% Clopper-Pearson interval. `excluded` counts
/// records of the domain that carried no usable answer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub k: usize,
    pub n: usize,
    pub excluded: usize,
    pub rate: Option<f64>,
    pub ci: Option<(f64, f64)>,
}

impl Rate {
    pub fn new(k: usize, n: usize, excluded: usize) -> Self {
        let rate = (n > 0).then(|| k as f64 / n as f64);
        let ci = clopper_pearson(k as u64, n as u64, 0.95).ok();
        Self { k, n, excluded, rate, ci }
    }

    fn from_flags(flags: &[Option<bool>]) -> Self {
        let used: Vec<bool> = flags.iter().flatten().copied().collect();
        Rate::new(used.iter().filter(|&&b| b).count(), used.len(), flags.len() - used.len())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mean {
    pub mean: Option<f64>,
    pub n: usize,
    pub excluded: usize,
}

impl Mean {
    pub fn of(values: &[Option<f64>]) -> Self {
        let used: Vec<f64> = values.iter().flatten().copied().collect();
        let mean = (!used.is_empty()).then(|| used.iter().sum::<f64>() / used.len() as f64);
        Self { mean, n: used.len(), excluded: values.len() - used.len() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StakeRate {
    pub gain: u32,
    pub rate: Rate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShareRate {
    /// Offer share in lowest terms.
    pub numerator: u32,
    pub denominator: u32,
    pub share: f64,
    pub rate: Rate,
}

/// Direction used for the persuasion difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchConvention {
    /// `S(sad frame) - S(anger frame)`; used for sadness and for conditions
    /// with no matching frame.
    SadMinusAnger,
    /// `S(anger frame) - S(sad frame)`.
    AngerMinusSad,
}

impl MatchConvention {
    pub fn for_emotion(e: Option<Emotion>) -> Self {
        match e {
            Some(Emotion::Anger) => MatchConvention::AngerMinusSad,
            _ => MatchConvention::SadMinusAnger,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchIndex {
    pub convention: MatchConvention,
    pub mean: Option<f64>,
    pub n: usize,
    pub excluded: usize,
    /// Paired differences in key order.
    pub diffs: Vec<f64>,
    pub t_test: Option<TestResult>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoralComposite {
    pub harm_level: u8,
    pub condemnation: f64,
    pub harm_consequences: f64,
    pub intention: f64,
}

impl MoralComposite {
    pub fn restraint(&self) -> f64 {
        6.0 - self.intention
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoralSummary {
    pub condemnation: Mean,
    pub harm_consequences: Mean,
    pub intention: Mean,
    pub restraint: Mean,
    pub spearman_harm_condemnation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlameSummary {
    pub blame: Mean,
    pub punishment: Mean,
    pub spearman_severity_blame: Option<f64>,
}

/// Prices in currency units; `delta_e = wta - wtp` is computed from
/// integer cents so it carries no accumulated rounding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndowmentSummary {
    pub clip_cents: u64,
    pub wta: Mean,
    pub wtp: Mean,
    pub delta_e: Option<f64>,
    pub unload_wta: Mean,
    pub gift_buyer_wta: Mean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainIndices {
    pub risky_rate: Rate,
    pub aai: Rate,
    pub aai_by_stake: Vec<StakeRate>,
    pub loss_accept_rate: Rate,
    pub temporal_later_rate: Rate,
    pub ug_rejection_rate: Rate,
    pub ug_by_share: Vec<ShareRate>,
    pub dg_mean_give: Mean,
    pub dg_mean_share: Mean,
    pub assistance: Mean,
    pub sai: Mean,
    pub sai_norm: Mean,
    pub match_index: MatchIndex,
    pub moral: MoralSummary,
    pub blame: BlameSummary,
    pub endowment: EndowmentSummary,
}

fn of_domain<'a>(records: &[&'a TrialRecord], d: Domain) -> Vec<&'a TrialRecord> {
    records.iter().copied().filter(|r| r.trial.domain == d).collect()
}

fn picked(r: &TrialRecord, canonical: usize) -> Option<bool> {
    match r.choice()? {
        CanonChoice::Option(c) => Some(c == canonical),
        CanonChoice::Indifferent => None,
    }
}

/// Share of parsed risk trials where the gamble was chosen.
pub fn risky_rate(records: &[&TrialRecord]) -> Rate {
    let flags: Vec<_> = of_domain(records, Domain::RiskChoice).iter().map(|r| picked(r, 0)).collect();
    Rate::from_flags(&flags)
}

/// P(choose known urn), overall and per stake.
pub fn ambiguity_aversion(records: &[&TrialRecord]) -> (Rate, Vec<StakeRate>) {
    let recs = of_domain(records, Domain::Ambiguity);
    let mut by: BTreeMap<u32, Vec<Option<bool>>> = BTreeMap::new();
    let mut all = Vec::new();
    for r in recs {
        let f = picked(r, 0);
        all.push(f);
        if let Payload::Ambiguity { gain, .. } = r.trial.payload {
            by.entry(gain).or_default().push(f);
        }
    }
    let stakes = by.into_iter().map(|(gain, f)| StakeRate { gain, rate: Rate::from_flags(&f) }).collect();
    (Rate::from_flags(&all), stakes)
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Responder rejection rate, overall and per offer share.
pub fn ug_rejection(records: &[&TrialRecord]) -> (Rate, Vec<ShareRate>) {
    let mut by: BTreeMap<(u32, u32), Vec<Option<bool>>> = BTreeMap::new();
    let mut all = Vec::new();
    for r in of_domain(records, Domain::Ultimatum) {
        let f = r.accepted().map(|a| !a);
        all.push(f);
        if let Payload::Ultimatum { total, offer } = r.trial.payload {
            let g = gcd(offer, total).max(1);
            by.entry((offer / g, total / g)).or_default().push(f);
        }
    }
    let mut shares: Vec<ShareRate> = by
        .into_iter()
        .map(|((n, d), f)| ShareRate {
            numerator: n,
            denominator: d,
            share: n as f64 / d as f64,
            rate: Rate::from_flags(&f),
        })
        .collect();
    shares.sort_by(|a, b| a.share.total_cmp(&b.share));
    (Rate::from_flags(&all), shares)
}

/// Mean give and mean give share `g / T`.
pub fn dictator(records: &[&TrialRecord]) -> (Mean, Mean) {
    let recs = of_domain(records, Domain::Dictator);
    let give: Vec<_> = recs.iter().map(|r| r.give().map(f64::from)).collect();
    let share: Vec<_> = recs
        .iter()
        .map(|r| match r.trial.payload {
            Payload::Dictator { total } if total > 0 => r.give().map(|g| g as f64 / total as f64),
            _ => None,
        })
        .collect();
    (Mean::of(&give), Mean::of(&share))
}

/// Per-record SAI: `S` for a suspicion cue, `6 - S` for a benevolence cue.
pub fn sai(score: u8, cue: i8) -> f64 {
    if cue > 0 {
        score as f64
    } else {
        6.0 - score as f64
    }
}

pub fn sai_norm(sai: f64) -> f64 {
    (sai - 1.0) / 4.0
}

pub fn compute_sai(records: &[&TrialRecord]) -> (Mean, Mean) {
    let vals: Vec<Option<f64>> = of_domain(records, Domain::Stereotype)
        .iter()
        .map(|r| match (r.score(), r.trial.cue) {
            (Some(s), Some(c)) => Some(sai(s, c)),
            _ => None,
        })
        .collect();
    let norm: Vec<_> = vals.iter().map(|v| v.map(sai_norm)).collect();
    (Mean::of(&vals), Mean::of(&norm))
}

pub fn match_diff(sad: u8, anger: u8, convention: MatchConvention) -> f64 {
    match convention {
        MatchConvention::SadMinusAnger => sad as f64 - anger as f64,
        MatchConvention::AngerMinusSad => anger as f64 - sad as f64,
    }
}

fn likert_order(r: &TrialRecord) -> Option<LikertOrder> {
    match r.trial.parse_schema {
        ParseSchema::Likert { order } => Some(order),
        _ => None,
    }
}

pub fn compute_match_index(records: &[&TrialRecord], convention: MatchConvention) -> MatchIndex {
    type Key<'a> = (&'a str, u32, Option<LikertOrder>);
    let mut pairs: BTreeMap<Key, [Option<Option<u8>>; 2]> = BTreeMap::new();
    for r in of_domain(records, Domain::Persuasion) {
        if let Payload::Persuasion { pair, frame } = &r.trial.payload {
            let slot = match frame {
                AppealFrame::Sad => 0,
                AppealFrame::Anger => 1,
            };
            pairs.entry((pair.as_str(), r.trial.repeat, likert_order(r))).or_default()[slot] = Some(r.score());
        }
    }
    let mut diffs = Vec::new();
    let mut excluded = 0;
    for [sad, anger] in pairs.values() {
        match (sad, anger) {
            (Some(Some(s)), Some(Some(a))) => diffs.push(match_diff(*s, *a, convention)),
            _ => excluded += 1,
        }
    }
    let mean = (!diffs.is_empty()).then(|| diffs.iter().sum::<f64>() / diffs.len() as f64);
    let t_test = one_sample_t(&diffs, 0.0).ok();
    MatchIndex { convention, mean, n: diffs.len(), excluded, diffs, t_test }
}

/// Composites per (vignette, repeat, order) unit with all five statements
/// parsed; the count of incomplete units is returned alongside.
pub fn moral_composites(records: &[&TrialRecord]) -> (Vec<MoralComposite>, usize) {
    type Key<'a> = (&'a str, u32, Option<LikertOrder>);
    let mut units: BTreeMap<Key, (u8, BTreeMap<MoralStatement, Option<u8>>)> = BTreeMap::new();
    for r in of_domain(records, Domain::Moral) {
        if let Payload::Moral { vignette, harm_level, statement, .. } = &r.trial.payload {
            let e = units
                .entry((vignette.as_str(), r.trial.repeat, likert_order(r)))
                .or_insert((*harm_level, BTreeMap::new()));
            e.1.insert(*statement, r.score());
        }
    }
    let mut out = Vec::new();
    let mut incomplete = 0;
    for (harm_level, s) in units.into_values() {
        let get = |m: MoralStatement| s.get(&m).copied().flatten().map(f64::from);
        use MoralStatement::*;
        match (get(Wrongness), get(Punishment), get(Harm), get(Consequences), get(Intention)) {
            (Some(w), Some(p), Some(h), Some(c), Some(i)) => out.push(MoralComposite {
                harm_level,
                condemnation: (w + p) / 2.0,
                harm_consequences: (h + c) / 2.0,
                intention: i,
            }),
            _ => incomplete += 1,
        }
    }
    (out, incomplete)
}

fn mean_over(values: impl Iterator<Item = f64>, excluded: usize) -> Mean {
    let v: Vec<Option<f64>> = values.map(Some).collect();
    Mean { excluded, ..Mean::of(&v) }
}

pub fn moral_summary(records: &[&TrialRecord]) -> MoralSummary {
    let (units, incomplete) = moral_composites(records);
    let harm: Vec<f64> = units.iter().map(|u| u.harm_level as f64).collect();
    let cond: Vec<f64> = units.iter().map(|u| u.condemnation).collect();
    MoralSummary {
        condemnation: mean_over(cond.iter().copied(), incomplete),
        harm_consequences: mean_over(units.iter().map(|u| u.harm_consequences), incomplete),
        intention: mean_over(units.iter().map(|u| u.intention), incomplete),
        restraint: mean_over(units.iter().map(MoralComposite::restraint), incomplete),
        spearman_harm_condemnation: spearman_rho(&harm, &cond).ok(),
    }
}

pub fn blame_summary(records: &[&TrialRecord]) -> BlameSummary {
    let recs = of_domain(records, Domain::Blame);
    let by = |want: BlameStatement| -> Vec<(u8, Option<u8>)> {
        recs.iter()
            .filter_map(|r| match r.trial.payload {
                Payload::Blame { severity, statement, .. } if statement == want => Some((severity, r.score())),
                _ => None,
            })
            .collect()
    };
    let blame = by(BlameStatement::Blame);
    let punish = by(BlameStatement::Punishment);
    let vals = |v: &[(u8, Option<u8>)]| v.iter().map(|(_, s)| s.map(f64::from)).collect::<Vec<_>>();
    let parsed: Vec<(f64, f64)> = blame.iter().filter_map(|(sev, s)| s.map(|s| (*sev as f64, s as f64))).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = parsed.into_iter().unzip();
    BlameSummary {
        blame: Mean::of(&vals(&blame)),
        punishment: Mean::of(&vals(&punish)),
        spearman_severity_blame: spearman_rho(&xs, &ys).ok(),
    }
}

pub fn assistance_mean(records: &[&TrialRecord]) -> Mean {
    let v: Vec<_> = of_domain(records, Domain::Welfare).iter().map(|r| r.score().map(f64::from)).collect();
    Mean::of(&v)
}

/// Exact mean in cents as a reduced (numerator, denominator) pair.
fn cents_mean(prices: &[u64]) -> Option<(i128, i128)> {
    (!prices.is_empty()).then(|| (prices.iter().map(|&p| p as i128).sum(), prices.len() as i128))
}

fn price_mean(prices: &[u64], excluded: usize) -> Mean {
    Mean { mean: cents_mean(prices).map(|(s, n)| s as f64 / (n as f64 * 100.0)), n: prices.len(), excluded }
}

/// WTA and WTP from clipped prices; prices above `clip_cents` count as
/// the clip value.
pub fn compute_endowment(records: &[&TrialRecord], clip_cents: u64) -> EndowmentSummary {
    let mut by: BTreeMap<EndowmentFrame, (Vec<u64>, usize)> = BTreeMap::new();
    for r in of_domain(records, Domain::Endowment) {
        if let Payload::Endowment { frame, .. } = r.trial.payload {
            let e = by.entry(frame).or_default();
            match r.price_cents() {
                Some(c) => e.0.push(c.min(clip_cents)),
                None => e.1 += 1,
            }
        }
    }
    let get = |f: EndowmentFrame| by.get(&f).cloned().unwrap_or_default();
    let (sell, sell_x) = get(EndowmentFrame::Sell);
    let (buy, buy_x) = get(EndowmentFrame::Buy);
    let (unload, unload_x) = get(EndowmentFrame::Unload);
    let (gift, gift_x) = get(EndowmentFrame::GiftBuyer);
    let delta_e = match (cents_mean(&sell), cents_mean(&buy)) {
        (Some((ss, ns)), Some((sb, nb))) => Some((ss * nb - sb * ns) as f64 / ((ns * nb) as f64 * 100.0)),
        _ => None,
    };
    EndowmentSummary {
        clip_cents,
        wta: price_mean(&sell, sell_x),
        wtp: price_mean(&buy, buy_x),
        delta_e,
        unload_wta: price_mean(&unload, unload_x),
        gift_buyer_wta: price_mean(&gift, gift_x),
    }
}

pub fn compute_indices(records: &[&TrialRecord], clip_cents: u64, induced: Option<Emotion>) -> DomainIndices {
    let (aai, aai_by_stake) = ambiguity_aversion(records);
    let (ug_rejection_rate, ug_by_share) = ug_rejection(records);
    let (dg_mean_give, dg_mean_share) = dictator(records);
    let (sai, sai_norm) = compute_sai(records);
    let loss: Vec<_> = of_domain(records, Domain::Loss).iter().map(|r| r.accepted()).collect();
    let later: Vec<_> = of_domain(records, Domain::Temporal).iter().map(|r| picked(r, 1)).collect();
    DomainIndices {
        risky_rate: risky_rate(records),
        aai,
        aai_by_stake,
        loss_accept_rate: Rate::from_flags(&loss),
        temporal_later_rate: Rate::from_flags(&later),
        ug_rejection_rate,
        ug_by_share,
        dg_mean_give,
        dg_mean_share,
        assistance: assistance_mean(records),
        sai,
        sai_norm,
        match_index: compute_match_index(records, MatchConvention::for_emotion(induced)),
        moral: moral_summary(records),
        blame: blame_summary(records),
        endowment: compute_endowment(records, clip_cents),
    }
}

//! Scores, model fits, plot data and steered-vs-neutral effects.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agent_gateway::SteeringCondition;
use crate::choice_models::{
    ce_from_ladder, fit_loss_logit, fit_prelec_from_ce, fit_risk_logit, fit_temporal_surface, fit_utility_curvature,
    prelec_weight, sigmoid, CeEstimate, CePoint, FitError, GainLottery, IntertemporalPair, LadderRung, LossFit,
    MixedGamble, PrelecFit, RiskLogitFit, TemporalFit, UtilityFit,
};
use crate::record::{CanonChoice, TrialRecord};
use crate::scoring::{effect_units, score_records, Scores};
use crate::stats::{forest_rows, hedges_g, random_effects_meta, EffectLabel, EffectSize, ForestRow, MetaSummary};
use crate::task_battery::{Payload, LOSS_RANGE};

use super::files::{read_jsonl, sha256_file, Counts};
use super::HarnessError;

pub const REPORT_SCHEMA_VERSION: u32 = 1;
/// Empirical risk points are equal-count bins over dEV.
pub const RISK_BINS: usize = 10;
const CURVE_POINTS: usize = 41;
/// Utility is plotted for linear-weighted prospects; pipeline Prelec fits
/// assume linear utility.
const PRELEC_RHO: f64 = 1.0;

/// All records of one input file.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordSet {
    pub name: String,
    pub sha256: String,
    pub records: Vec<TrialRecord>,
}

impl RecordSet {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let records = read_jsonl(path)?;
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        Ok(Self { name, sha256: sha256_file(path)?, records })
    }

    /// In-memory set; the digest covers the serialized records.
    pub fn from_records(name: impl Into<String>, records: Vec<TrialRecord>) -> Self {
        let mut h = Sha256::new();
        for r in &records {
            h.update(serde_json::to_vec(r).expect("record serializes"));
            h.update(b"\n");
        }
        Self { name: name.into(), sha256: hex::encode(h.finalize()), records }
    }

    fn condition(&self) -> Result<SteeringCondition, HarnessError> {
        let first =
            self.records.first().ok_or_else(|| HarnessError::Validation(format!("{}: no records", self.name)))?;
        let label = first.condition.label();
        if let Some(r) = self.records.iter().find(|r| r.condition.label() != label) {
            return Err(HarnessError::Validation(format!(
                "{}: mixes conditions {} and {}",
                self.name,
                label,
                r.condition.label()
            )));
        }
        Ok(first.condition.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Ok,
    /// No usable trials for this model.
    NoData,
    /// Outcomes are separated; the estimate does not exist.
    Separation,
    InsufficientData,
    Failed,
}

/// A fit result with its status; `value` is absent unless `status` is ok.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fitted<T> {
    pub status: FitStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl<T> Fitted<T> {
    fn from_result(n: usize, r: Result<T, FitError>) -> Self {
        if n == 0 {
            return Self { status: FitStatus::NoData, value: None, error: None };
        }
        match r {
            Ok(v) => Self { status: FitStatus::Ok, value: Some(v), error: None },
            Err(e) => {
                let status = match e {
                    FitError::Separation { .. } => FitStatus::Separation,
                    FitError::InsufficientPoints { .. } => FitStatus::InsufficientData,
                    _ => FitStatus::Failed,
                };
                Self { status, value: None, error: Some(e.to_string()) }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fits {
    pub risk: Fitted<RiskLogitFit>,
    pub utility: Fitted<UtilityFit>,
    pub ce_points: Vec<CeEstimate>,
    /// Ladders whose certainty equivalent could not be read, by probability.
    pub ce_errors: Vec<(f64, String)>,
    pub prelec: Fitted<PrelecFit>,
    pub loss: Fitted<LossFit>,
    pub temporal: Fitted<TemporalFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskBin {
    pub bin: usize,
    pub dev_min: f64,
    pub dev_max: f64,
    pub dev_mean: f64,
    pub n: usize,
    pub risky_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourPoint {
    pub level: f64,
    pub delay: f64,
    pub premium: f64,
}

/// Curve samples are `[x, y]` pairs; fitted curves are empty when the
/// corresponding fit is missing.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub risk_bins: Vec<RiskBin>,
    pub risk_curve: Vec<[f64; 2]>,
    pub utility_curve: Vec<[f64; 2]>,
    pub prelec_curve: Vec<[f64; 2]>,
    pub loss_frontier: Vec<[f64; 2]>,
    pub temporal_contours: Vec<ContourPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub label: String,
    pub source: String,
    pub condition: SteeringCondition,
    pub agents: Vec<String>,
    pub counts: Counts,
    /// sha256 over the sorted trial ids the numbers below derive from.
    pub record_digest: String,
    pub scores: Scores,
    pub fits: Fits,
    pub plots: PlotData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputFile {
    pub name: String,
    pub sha256: String,
    pub records: usize,
    pub role: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub clip_cents: u64,
    pub risk_bins: usize,
    pub inputs: Vec<InputFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedEffect {
    pub domain: String,
    pub condition: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub provenance: Provenance,
    pub baseline: Option<ConditionReport>,
    pub conditions: Vec<ConditionReport>,
    pub effects: Vec<EffectSize>,
    pub skipped_effects: Vec<SkippedEffect>,
    pub meta: Option<MetaSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta_error: Option<String>,
    pub forest: Vec<ForestRow>,
}

fn chose(r: &TrialRecord, canonical: usize) -> Option<bool> {
    match r.choice()? {
        CanonChoice::Option(c) => Some(c == canonical),
        CanonChoice::Indifferent => None,
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

fn risk_trials(records: &[&TrialRecord]) -> Vec<(GainLottery, bool)> {
    records
        .iter()
        .filter_map(|r| match r.trial.payload {
            Payload::Risk { p_percent, gain, sure, .. } => {
                let lot = GainLottery::new(p_percent as f64 / 100.0, gain as f64, sure as f64).ok()?;
                Some((lot, chose(r, 0)?))
            }
            _ => None,
        })
        .collect()
}

fn risk_bins(trials: &[(GainLottery, bool)]) -> Vec<RiskBin> {
    let mut pts: Vec<(f64, bool)> = trials.iter().map(|(l, y)| (l.delta_ev(), *y)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let n = pts.len();
    let bins = RISK_BINS.min(n);
    (0..bins)
        .map(|i| {
            let chunk = &pts[i * n / bins..(i + 1) * n / bins];
            let k = chunk.len() as f64;
            RiskBin {
                bin: i,
                dev_min: chunk[0].0,
                dev_max: chunk[chunk.len() - 1].0,
                dev_mean: chunk.iter().map(|p| p.0).sum::<f64>() / k,
                n: chunk.len(),
                risky_rate: chunk.iter().filter(|p| p.1).count() as f64 / k,
            }
        })
        .collect()
}

/// Ladder certainty equivalents keyed by (p, gain).
fn ladders(records: &[&TrialRecord]) -> (Vec<CeEstimate>, Vec<(f64, String)>, usize) {
    let mut by_lottery: BTreeMap<(u32, u32), BTreeMap<u32, (f64, f64)>> = BTreeMap::new();
    let mut used = 0;
    for r in records {
        if let Payload::CeLadder { p_percent, gain, sure, .. } = r.trial.payload {
            if let Some(took_sure) = chose(r, 1) {
                let cell = by_lottery.entry((p_percent, gain)).or_default().entry(sure).or_default();
                cell.0 += if took_sure { 1.0 } else { 0.0 };
                cell.1 += 1.0;
                used += 1;
            }
        }
    }
    let mut points = Vec::new();
    let mut errors = Vec::new();
    for ((p, gain), rungs) in by_lottery {
        let rungs: Vec<LadderRung> = rungs
            .into_iter()
            .map(|(sure, (k, n))| LadderRung { sure: sure as f64, chose_sure: k, trials: n })
            .collect();
        let pf = p as f64 / 100.0;
        match ce_from_ladder(pf, gain as f64, &rungs) {
            Ok(e) => points.push(e),
            Err(e) => errors.push((pf, e.to_string())),
        }
    }
    (points, errors, used)
}

fn fit_condition(records: &[&TrialRecord]) -> (Fits, PlotData) {
    let risk = risk_trials(records);
    let dev: Vec<(f64, bool)> = risk.iter().map(|(l, y)| (l.delta_ev(), *y)).collect();
    let risk_fit = Fitted::from_result(dev.len(), fit_risk_logit(&dev));
    let utility = Fitted::from_result(risk.len(), fit_utility_curvature(&risk));

    let (ce_points, ce_errors, ce_used) = ladders(records);
    let ce: Vec<CePoint> = ce_points.iter().map(|e| e.point).collect();
    let prelec = Fitted::from_result(ce_used, fit_prelec_from_ce(&ce, PRELEC_RHO));

    let loss_trials: Vec<(MixedGamble, bool)> = records
        .iter()
        .filter_map(|r| match r.trial.payload {
            Payload::Loss { gain, loss } => Some((MixedGamble::new(gain as f64, loss as f64).ok()?, r.accepted()?)),
            _ => None,
        })
        .collect();
    let loss = Fitted::from_result(loss_trials.len(), fit_loss_logit(&loss_trials));

    let temporal_trials: Vec<(IntertemporalPair, bool)> = records
        .iter()
        .filter_map(|r| match r.trial.payload {
            Payload::Temporal { sooner_amount, sooner_delay, later_amount, later_delay, .. } => {
                let pair = IntertemporalPair::new(
                    sooner_amount as f64,
                    sooner_delay as f64,
                    later_amount as f64,
                    later_delay as f64,
                )
                .ok()?;
                Some((pair, chose(r, 1)?))
            }
            _ => None,
        })
        .collect();
    let temporal = Fitted::from_result(temporal_trials.len(), fit_temporal_surface(&temporal_trials));

    let mut plots = PlotData { risk_bins: risk_bins(&risk), ..PlotData::default() };
    if let (Some(f), Some(lo), Some(hi)) = (
        &risk_fit.value,
        dev.iter().map(|d| d.0).min_by(f64::total_cmp),
        dev.iter().map(|d| d.0).max_by(f64::total_cmp),
    ) {
        plots.risk_curve = linspace(lo, hi, CURVE_POINTS).map(|x| [x, sigmoid(f.tau * x + f.b)]).collect();
    }
    if let Some(u) = &utility.value {
        plots.utility_curve = linspace(0.0, 1.0, CURVE_POINTS).map(|x| [x, x.powf(u.rho)]).collect();
    }
    if let Some(w) = &prelec.value {
        plots.prelec_curve =
            linspace(0.01, 0.99, 99).filter_map(|p| prelec_weight(p, w.alpha, w.beta_w).ok().map(|y| [p, y])).collect();
    }
    if let Some(l) = &loss.value {
        plots.loss_frontier = LOSS_RANGE.filter_map(|x| l.frontier(x as f64).map(|g| [x as f64, g])).collect();
    }
    if let Some(t) = &temporal.value {
        let max_delay = temporal_trials.iter().map(|(p, _)| p.delay()).fold(0.0, f64::max);
        for c in &t.contours {
            for d in linspace(0.0, max_delay, 21) {
                plots.temporal_contours.push(ContourPoint { level: c.level, delay: d, premium: c.premium_at(d) });
            }
        }
    }
    let fits = Fits { risk: risk_fit, utility, ce_points, ce_errors, prelec, loss, temporal };
    (fits, plots)
}

fn condition_report(set: &RecordSet, clip_cents: u64) -> Result<ConditionReport, HarnessError> {
    let condition = set.condition()?;
    let recs = crate::scoring::sorted(&set.records);
    let mut agents: Vec<String> = set.records.iter().map(|r| r.agent.clone()).collect();
    agents.sort();
    agents.dedup();
    let mut h = Sha256::new();
    for r in &recs {
        h.update(r.trial.trial_id.as_bytes());
        h.update(b"\n");
    }
    let scores = score_records(&set.records, clip_cents, condition.emotion());
    let (fits, plots) = fit_condition(&recs);
    Ok(ConditionReport {
        label: condition.label(),
        source: set.name.clone(),
        condition,
        agents,
        counts: Counts::of(&set.records),
        record_digest: hex::encode(h.finalize()),
        scores,
        fits,
        plots,
    })
}

fn effect_label(domain: &str, c: &SteeringCondition) -> EffectLabel {
    EffectLabel {
        domain: domain.to_string(),
        emotion: c.emotion().map_or_else(|| "none".to_string(), |e| e.to_string()),
        method: c.method().to_string(),
    }
}

/// Builds the report. Without an explicit `baseline`, the single input
/// recorded under no steering serves as the neutral baseline.
pub fn analyze(
    sets: Vec<RecordSet>,
    baseline: Option<RecordSet>,
    clip_cents: u64,
) -> Result<ReportDocument, HarnessError> {
    if sets.is_empty() && baseline.is_none() {
        return Err(HarnessError::Validation("analyze needs at least one records file".into()));
    }
    let mut steered = Vec::new();
    let mut neutral = baseline.map(|b| vec![b]).unwrap_or_default();
    let explicit = !neutral.is_empty();
    for s in sets {
        if !explicit && s.condition()? == SteeringCondition::None {
            neutral.push(s);
        } else {
            steered.push(s);
        }
    }
    if neutral.len() > 1 {
        return Err(HarnessError::Validation(format!(
            "several neutral inputs ({}); choose one with --baseline",
            neutral.iter().map(|s| s.name.as_str()).collect::<Vec<_>>().join(", ")
        )));
    }
    let baseline = neutral.pop();

    let mut inputs = Vec::new();
    if let Some(b) = &baseline {
        inputs.push(InputFile {
            name: b.name.clone(),
            sha256: b.sha256.clone(),
            records: b.records.len(),
            role: "baseline".into(),
        });
    }
    for s in &steered {
        inputs.push(InputFile {
            name: s.name.clone(),
            sha256: s.sha256.clone(),
            records: s.records.len(),
            role: "condition".into(),
        });
    }

    let base_report = baseline.as_ref().map(|b| condition_report(b, clip_cents)).transpose()?;
    let conditions = steered.iter().map(|s| condition_report(s, clip_cents)).collect::<Result<Vec<_>, _>>()?;

    let mut effects = Vec::new();
    let mut skipped = Vec::new();
    if let Some(b) = &baseline {
        let base_units = effect_units(&b.records, clip_cents);
        for (s, rep) in steered.iter().zip(&conditions) {
            let units = effect_units(&s.records, clip_cents);
            for (domain, xs) in &units {
                let Some(ys) = base_units.get(domain) else {
                    skipped.push(SkippedEffect {
                        domain: domain.to_string(),
                        condition: rep.label.clone(),
                        reason: "domain absent from baseline".into(),
                    });
                    continue;
                };
                match hedges_g(xs, ys) {
                    Ok(e) => effects.push(e.with_label(effect_label(domain, &rep.condition))),
                    Err(e) => skipped.push(SkippedEffect {
                        domain: domain.to_string(),
                        condition: rep.label.clone(),
                        reason: e.to_string(),
                    }),
                }
            }
        }
    } else if !steered.is_empty() {
        skipped.push(SkippedEffect {
            domain: "*".into(),
            condition: "*".into(),
            reason: "no neutral baseline among the inputs".into(),
        });
    }

    let (meta, meta_error, forest) = if effects.is_empty() {
        (None, None, Vec::new())
    } else {
        match random_effects_meta(&effects) {
            Ok(m) => {
                let rows = forest_rows(&effects, &m);
                (Some(m), None, rows)
            }
            Err(e) => (None, Some(e.to_string()), Vec::new()),
        }
    };

    Ok(ReportDocument {
        schema_version: REPORT_SCHEMA_VERSION,
        provenance: Provenance {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            clip_cents,
            risk_bins: RISK_BINS,
            inputs,
        },
        baseline: base_report,
        conditions,
        effects,
        skipped_effects: skipped,
        meta,
        meta_error,
        forest,
    })
}

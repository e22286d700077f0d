//! Offline agents that answer from the structured payload.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::choice_models::{
    prelec_weight, risky_choice_prob, sigmoid, GainLottery, IntertemporalPair, ProspectParams, TemporalParams,
};
use crate::response_parsing::{render_canonical, split_thinking, OutcomeValue, RawResponse};
use crate::task_battery::{AppealFrame, BlameStatement, EndowmentFrame, Lottery, MoralStatement, Payload, TrialSpec};

use super::{Agent, GatewayError, SteeringCondition};

/// Accept/reject rule for mixed gambles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum LossPolicy {
    /// Accept iff `gain > lambda * loss`.
    Threshold { lambda: f64 },
    /// Accept with probability `sigma(beta0 + beta_g G + beta_l L)`.
    Logit { beta0: f64, beta_g: f64, beta_l: f64 },
}

/// `clamp(round(intercept + slope * x), 1, 5)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearScore {
    pub intercept: f64,
    pub slope: f64,
}

impl LinearScore {
    pub const fn new(intercept: f64, slope: f64) -> Self {
        Self { intercept, slope }
    }

    pub fn at(&self, x: f64) -> u8 {
        (self.intercept + self.slope * x).round().clamp(1.0, 5.0) as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndowmentFactors {
    pub sell: f64,
    pub buy: f64,
    pub unload: f64,
    pub gift_buyer: f64,
}

impl EndowmentFactors {
    fn of(&self, frame: EndowmentFrame) -> f64 {
        match frame {
            EndowmentFrame::Sell => self.sell,
            EndowmentFrame::Buy => self.buy,
            EndowmentFrame::Unload => self.unload,
            EndowmentFrame::GiftBuyer => self.gift_buyer,
        }
    }
}

/// Ground-truth response policies for every domain. Vignette policies are
/// fixed score rules that exercise the scoring paths, not behavioral claims.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticAgentSpec {
    pub rng_seed: u64,
    pub prospect: ProspectParams,
    pub loss: LossPolicy,
    pub temporal: TemporalParams,
    /// Probability of picking the known urn at the middle stake of 50.
    pub ambiguity_p_known: f64,
    /// Change in the log-odds of the known urn per unit of stake above 50.
    pub ambiguity_stake_slope: f64,
    /// Probability of a uniformly random answer on rationality items.
    pub lapse: f64,
    pub endowment: EndowmentFactors,
    /// Offer share at which rejection is a coin flip.
    pub ug_threshold: f64,
    pub ug_slope: f64,
    pub dg_share: f64,
    /// Agreement shift toward the cued reading of a stereotype vignette.
    pub stereotype_bias: f64,
    pub persuasion_sad: u8,
    pub persuasion_anger: u8,
    pub condemnation: LinearScore,
    pub harm_consequences: LinearScore,
    pub intention: LinearScore,
    pub blame: LinearScore,
    pub punishment: LinearScore,
    pub assistance: LinearScore,
}

impl Default for SyntheticAgentSpec {
    fn default() -> Self {
        Self {
            rng_seed: 0,
            prospect: ProspectParams { rho: 1.0, alpha: 1.0, beta_w: 1.0, tau: 0.5, b: 0.0 },
            loss: LossPolicy::Threshold { lambda: 1.5 },
            temporal: TemporalParams { b0: -1.0, bd: -0.02, bp: 8.0 },
            ambiguity_p_known: 0.7,
            ambiguity_stake_slope: 0.01,
            lapse: 0.0,
            endowment: EndowmentFactors { sell: 1.3, buy: 0.8, unload: 1.0, gift_buyer: 1.2 },
            ug_threshold: 0.3,
            ug_slope: 20.0,
            dg_share: 0.3,
            stereotype_bias: 1.0,
            persuasion_sad: 4,
            persuasion_anger: 3,
            condemnation: LinearScore::new(2.0, 0.6),
            harm_consequences: LinearScore::new(1.0, 0.8),
            intention: LinearScore::new(5.0, -0.8),
            blame: LinearScore::new(1.0, 0.8),
            punishment: LinearScore::new(0.5, 0.8),
            assistance: LinearScore::new(1.0, 0.8),
        }
    }
}

/// What the agent decides, before rendering.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Decision {
    /// Canonical option index.
    Pick(usize),
    Indifferent,
    Accept(bool),
    Score(u8),
    PriceCents(u64),
    Give(u32),
}

fn keyed_rng(seed: u64, trial_id: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(trial_id.as_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

/// Stable preference score for an option text, independent of display order.
fn text_rank(s: &str) -> [u8; 32] {
    Sha256::digest(s.as_bytes()).into()
}

fn lottery_value(l: &Lottery, rho: f64) -> f64 {
    l.outcomes.iter().map(|&(p, x)| p as f64 / 100.0 * (x as f64).powf(rho)).sum()
}

fn bernoulli(rng: &mut ChaCha8Rng, p: f64) -> bool {
    rng.gen::<f64>() < p
}

impl SyntheticAgentSpec {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    fn decide(&self, trial: &TrialSpec, rng: &mut ChaCha8Rng) -> Decision {
        let rho = self.prospect.rho;
        let lapse = |rng: &mut ChaCha8Rng| self.lapse > 0.0 && bernoulli(rng, self.lapse);
        match &trial.payload {
            Payload::Completeness { options, .. } | Payload::Transitivity { options, .. } => {
                if lapse(rng) {
                    return Decision::Pick(rng.gen_range(0..2));
                }
                Decision::Pick(if text_rank(&options[0]) > text_rank(&options[1]) { 0 } else { 1 })
            }
            Payload::Continuity { p_percent, high, low, sure, .. } => {
                if lapse(rng) {
                    return Decision::Pick(rng.gen_range(0..2));
                }
                let p = *p_percent as f64 / 100.0;
                let w = prelec_weight(p, self.prospect.alpha, self.prospect.beta_w).unwrap_or(p);
                let lot = w * (*high as f64).powf(rho) + (1.0 - w) * (*low as f64).powf(rho);
                let s = (*sure as f64).powf(rho);
                if lot > s {
                    Decision::Pick(0)
                } else if lot < s {
                    Decision::Pick(1)
                } else {
                    Decision::Indifferent
                }
            }
            Payload::Independence { left, right, .. } => {
                if lapse(rng) {
                    return Decision::Pick(rng.gen_range(0..2));
                }
                let (l, r) = (lottery_value(left, rho), lottery_value(right, rho));
                if (l - r).abs() < 1e-9 * l.abs().max(1.0) {
                    Decision::Indifferent
                } else {
                    Decision::Pick(if l > r { 0 } else { 1 })
                }
            }
            Payload::Risk { p_percent, gain, sure, .. } | Payload::CeLadder { p_percent, gain, sure, .. } => {
                let lot = GainLottery { p: *p_percent as f64 / 100.0, gain: *gain as f64, sure: *sure as f64 };
                Decision::Pick(if bernoulli(rng, risky_choice_prob(&lot, &self.prospect)) { 0 } else { 1 })
            }
            Payload::Ambiguity { gain, .. } => {
                let z = crate::choice_models::logit(self.ambiguity_p_known)
                    + self.ambiguity_stake_slope * (*gain as f64 - 50.0);
                Decision::Pick(if bernoulli(rng, sigmoid(z)) { 0 } else { 1 })
            }
            Payload::Loss { gain, loss } => {
                let (g, l) = (*gain as f64, *loss as f64);
                Decision::Accept(match self.loss {
                    LossPolicy::Threshold { lambda } => g > lambda * l,
                    LossPolicy::Logit { beta0, beta_g, beta_l } => {
                        bernoulli(rng, sigmoid(beta0 + beta_g * g + beta_l * l))
                    }
                })
            }
            Payload::Endowment { frame, reference_price, .. } => {
                let cents = (*reference_price as f64 * self.endowment.of(*frame) * 100.0).round().max(0.0);
                Decision::PriceCents(cents as u64)
            }
            Payload::Temporal { sooner_amount, sooner_delay, later_amount, later_delay, .. } => {
                let pair = IntertemporalPair {
                    sooner_amount: *sooner_amount as f64,
                    sooner_delay: *sooner_delay as f64,
                    later_amount: *later_amount as f64,
                    later_delay: *later_delay as f64,
                };
                Decision::Pick(if bernoulli(rng, self.temporal.later_prob(&pair)) { 1 } else { 0 })
            }
            Payload::Stereotype { cue, .. } => {
                Decision::Score(LinearScore::new(3.0, self.stereotype_bias).at(*cue as f64))
            }
            Payload::Persuasion { frame, .. } => Decision::Score(
                match frame {
                    AppealFrame::Sad => self.persuasion_sad,
                    AppealFrame::Anger => self.persuasion_anger,
                }
                .clamp(1, 5),
            ),
            Payload::Moral { harm_level, statement, .. } => {
                let h = *harm_level as f64;
                Decision::Score(match statement {
                    MoralStatement::Wrongness | MoralStatement::Punishment => self.condemnation.at(h),
                    MoralStatement::Harm | MoralStatement::Consequences => self.harm_consequences.at(h),
                    MoralStatement::Intention => self.intention.at(h),
                })
            }
            Payload::Blame { severity, statement, .. } => {
                let s = *severity as f64;
                Decision::Score(match statement {
                    BlameStatement::Blame => self.blame.at(s),
                    BlameStatement::Punishment => self.punishment.at(s),
                })
            }
            Payload::Welfare { need, .. } => Decision::Score(self.assistance.at(*need as f64)),
            Payload::Ultimatum { total, offer } => {
                let share = *offer as f64 / *total as f64;
                let reject = bernoulli(rng, sigmoid(self.ug_slope * (self.ug_threshold - share)));
                Decision::Accept(!reject)
            }
            Payload::Dictator { total } => Decision::Give(((self.dg_share * *total as f64).round() as u32).min(*total)),
        }
    }

    /// Canonical answer text for `trial`, drawn from a generator keyed by
    /// `(rng_seed, trial_id)`.
    pub fn synthetic_answer(&self, trial: &TrialSpec) -> Result<RawResponse, GatewayError> {
        let mut rng = keyed_rng(self.rng_seed, &trial.trial_id);
        let value = match self.decide(trial, &mut rng) {
            Decision::Pick(c) => {
                OutcomeValue::Choice(trial.display_position(c).ok_or(GatewayError::UnsupportedDomain(trial.domain))?)
            }
            Decision::Indifferent => OutcomeValue::Indifferent,
            Decision::Accept(a) => OutcomeValue::Accept(a),
            Decision::Score(s) => OutcomeValue::Score(s),
            Decision::PriceCents(c) => OutcomeValue::PriceCents(c),
            Decision::Give(g) => OutcomeValue::Give(g),
        };
        let text = render_canonical(&trial.parse_schema, value).ok_or(GatewayError::UnsupportedDomain(trial.domain))?;
        Ok(split_thinking(&text))
    }
}

/// A synthetic agent. It ignores the steering condition: every condition
/// sees the same policy unless a different spec is supplied.
#[derive(Debug, Clone)]
pub struct SyntheticAgent {
    pub name: String,
    pub spec: SyntheticAgentSpec,
}

impl SyntheticAgent {
    pub fn new(name: impl Into<String>, spec: SyntheticAgentSpec) -> Self {
        Self { name: name.into(), spec }
    }
}

impl Agent for SyntheticAgent {
    fn identity(&self) -> String {
        format!("synthetic:{}#{}", self.name, self.spec.rng_seed)
    }

    fn answer(&self, trial: &TrialSpec, _condition: &SteeringCondition) -> Result<RawResponse, GatewayError> {
        self.spec.synthetic_answer(trial)
    }

    fn timed(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::response_parsing::parse_answer;
    use crate::task_battery::{generate_battery, AssetStore, BatteryConfig, Domain};

    fn battery() -> Vec<TrialSpec> {
        generate_battery(&BatteryConfig::new(3), &AssetStore::embedded()).unwrap()
    }

    fn find(trials: &[TrialSpec], pred: impl Fn(&Payload) -> bool) -> TrialSpec {
        trials.iter().find(|t| pred(&t.payload)).cloned().unwrap()
    }

    #[test]
    fn every_trial_gets_a_parseable_answer() {
        let spec = SyntheticAgentSpec { lapse: 0.1, ..Default::default() };
        for t in battery() {
            let raw = spec.synthetic_answer(&t).unwrap();
            let out = parse_answer(&t.parse_schema, &raw.answer_text);
            assert!(out.is_parsed(), "{} {:?} -> {:?}", t.trial_id, raw.answer_text, out);
        }
    }

    #[test]
    fn sharp_risk_agent_takes_positive_ev_gambles() {
        let trials = battery();
        let spec =
            SyntheticAgentSpec { prospect: ProspectParams { tau: 1e6, ..Default::default() }, ..Default::default() };
        let mut checked = 0;
        for t in trials.iter().filter(|t| t.domain == Domain::RiskChoice) {
            let Payload::Risk { p_percent, gain, sure, .. } = t.payload else { unreachable!() };
            let dev = p_percent as f64 / 100.0 * gain as f64 - sure as f64;
            if dev.abs() < 1.0 {
                continue;
            }
            let raw = spec.synthetic_answer(t).unwrap();
            let OutcomeValue::Choice(pos) = parse_answer(&t.parse_schema, &raw.answer_text).value.unwrap() else {
                panic!()
            };
            assert_eq!(t.canonical_option(pos) == Some(0), dev > 0.0, "{}", t.trial_id);
            checked += 1;
        }
        assert!(checked > 100);
    }

    #[test]
    fn threshold_loss_rule() {
        let trials = battery();
        let spec = SyntheticAgentSpec::default();
        let accept = |g: u32, l: u32| {
            let t = find(&trials, |p| *p == Payload::Loss { gain: g, loss: l });
            spec.synthetic_answer(&t).unwrap().answer_text
        };
        assert_eq!(accept(9, 5), "ACCEPT");
        assert_eq!(accept(7, 5), "REJECT");
    }

    #[test]
    fn same_seed_and_trial_repeat() {
        let trials = battery();
        let a = SyntheticAgentSpec::default().with_seed(9);
        let b = SyntheticAgentSpec::default().with_seed(10);
        let risk: Vec<_> = trials.iter().filter(|t| t.domain == Domain::RiskChoice).collect();
        let run = |s: &SyntheticAgentSpec| risk.iter().map(|t| s.synthetic_answer(t).unwrap()).collect::<Vec<_>>();
        assert_eq!(run(&a), run(&a));
        assert_ne!(run(&a), run(&b));
    }

    #[test]
    fn empirical_risk_frequency_matches_model() {
        let trials = battery();
        let t = find(&trials, |p| matches!(p, Payload::Risk { delta_permille, .. } if *delta_permille == 50));
        let Payload::Risk { p_percent, gain, sure, .. } = t.payload else { unreachable!() };
        let spec = SyntheticAgentSpec::default();
        let lot = GainLottery { p: p_percent as f64 / 100.0, gain: gain as f64, sure: sure as f64 };
        let p = risky_choice_prob(&lot, &spec.prospect);
        let n = 10_000;
        let gamble_pos = t.display_position(0).unwrap();
        let hits = (0..n)
            .filter(|&s| {
                let raw = spec.clone().with_seed(s).synthetic_answer(&t).unwrap();
                parse_answer(&t.parse_schema, &raw.answer_text).value == Some(OutcomeValue::Choice(gamble_pos))
            })
            .count();
        assert!((hits as f64 / n as f64 - p).abs() < 0.02, "{hits} vs {p}");
    }

    #[test]
    fn moral_condemnation_policy() {
        let s = SyntheticAgentSpec::default();
        let got: Vec<u8> = (1..=5).map(|h| s.condemnation.at(h as f64)).collect();
        assert_eq!(got, vec![3, 3, 4, 4, 5]);
    }
}

//! Seeded generation of every trial battery.
//!
//! Each generator returns fully rendered [`TrialSpec`]s. Payload grids are
//! fixed constants; the seed only moves template cycling and option order.

mod assets;
mod economic;
mod rationality;
mod social;
mod template;
mod vignettes;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use assets::{AssetStore, Row, ASSET_FILES};
pub use economic::{
    ce_ladder_rungs, gen_ambiguity_block, gen_endowment_block, gen_loss_block, gen_risk_block, gen_temporal_block,
    risk_gain, AMBIGUITY_STAKES, CE_LADDER_GAIN, CE_LADDER_PROBS, CE_RUNGS, LOSS_RANGE, RISK_DELTAS_PERMILLE,
    RISK_PROBS_PERCENT, RISK_SURE_AMOUNTS, TEMPORAL_SET1_DELAYS, TEMPORAL_SET2_AMOUNTS, TEMPORAL_SET2_DELAYS,
};
pub use rationality::{gen_rationality_battery, CONTINUITY_STEPS};
pub use social::{gen_social_blocks, ug_offers, SOCIAL_TOTALS};
pub use template::{Template, TemplateSet};
pub use vignettes::{gen_vignette_block, BlameStatement, MoralStatement, ASSISTANCE_LABELS, LIKERT_LABELS_A2D};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BatteryError {
    #[error("missing asset file `{0}`")]
    MissingAsset(String),
    #[error("asset `{file}` line {line}: {detail}")]
    InvalidAsset { file: String, line: usize, detail: String },
    #[error("no templates left for `{0}` after applying the template subset")]
    NoTemplates(String),
    #[error("template `{template}` uses unknown placeholder `{{{name}}}`")]
    Placeholder { template: String, name: String },
    #[error("group `{key}` has {got} trials, expected {expected}")]
    GroupSize { key: String, expected: usize, got: usize },
    #[error("duplicate trial id `{0}`")]
    DuplicateId(String),
    #[error("domain `{0}` is not produced by this generator")]
    WrongDomain(Domain),
    #[error("asset io: {0}")]
    Io(String),
}

macro_rules! domains {
    ($($variant:ident => $name:literal, $short:literal;)*) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum Domain {
            $($variant,)*
        }

        impl Domain {
            pub const ALL: &'static [Domain] = &[$(Domain::$variant,)*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(Domain::$variant => $name,)*
                }
            }

            /// Prefix used in trial ids.
            pub fn short(self) -> &'static str {
                match self {
                    $(Domain::$variant => $short,)*
                }
            }
        }

        impl FromStr for Domain {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($name => Ok(Domain::$variant),)*
                    other => Err(format!("unknown domain `{other}`")),
                }
            }
        }
    };
}

domains! {
    RationalityCompleteness => "rationality_completeness", "cmp";
    RationalityTransitivity => "rationality_transitivity", "trn";
    RationalityContinuity => "rationality_continuity", "con";
    RationalityIndependence => "rationality_independence", "ind";
    RiskChoice => "risk_choice", "risk";
    RiskCeLadder => "risk_ce_ladder", "ce";
    Ambiguity => "ambiguity", "amb";
    Loss => "loss", "loss";
    Endowment => "endowment", "end";
    Temporal => "temporal", "tmp";
    Stereotype => "stereotype", "ste";
    Persuasion => "persuasion", "per";
    Moral => "moral", "mor";
    Blame => "blame", "bla";
    Ultimatum => "ultimatum", "ug";
    Dictator => "dictator", "dg";
    Welfare => "welfare", "wel";
}

impl Domain {
    /// Number of trials sharing one `group_key`, for domains scored as groups.
    pub fn group_size(self) -> Option<usize> {
        match self {
            Domain::RationalityCompleteness | Domain::RationalityIndependence => Some(2),
            Domain::RationalityTransitivity => Some(3),
            Domain::RationalityContinuity => Some(CONTINUITY_STEPS),
            Domain::RiskCeLadder => Some(CE_RUNGS),
            Domain::Moral => Some(10),
            Domain::Persuasion | Domain::Blame => Some(4),
            Domain::Stereotype => Some(2),
            _ => None,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Displayed order of a five-point agreement scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LikertOrder {
    #[serde(rename = "a2d")]
    AgreeToDisagree,
    #[serde(rename = "d2a")]
    DisagreeToAgree,
}

impl LikertOrder {
    pub fn tag(self) -> &'static str {
        match self {
            LikertOrder::AgreeToDisagree => "a2d",
            LikertOrder::DisagreeToAgree => "d2a",
        }
    }
}

/// Expected answer format; each variant has exactly one parser.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParseSchema {
    /// Letter labels with an optional Indifferent answer. `options` are the
    /// option texts in displayed order.
    BinaryChoice {
        labels: Vec<String>,
        options: Vec<String>,
        allow_indifferent: bool,
    },
    /// Numbered options answered by repeating the option text.
    OptionEcho {
        labels: Vec<String>,
        options: Vec<String>,
    },
    AcceptReject,
    Likert {
        order: LikertOrder,
    },
    Price,
    GiveAmount {
        allowed: Vec<u32>,
    },
    Assistance,
}

impl ParseSchema {
    pub fn kind(&self) -> &'static str {
        match self {
            ParseSchema::BinaryChoice { .. } => "binary_choice",
            ParseSchema::OptionEcho { .. } => "option_echo",
            ParseSchema::AcceptReject => "accept_reject",
            ParseSchema::Likert { .. } => "likert",
            ParseSchema::Price => "price",
            ParseSchema::GiveAmount { .. } => "give_amount",
            ParseSchema::Assistance => "assistance",
        }
    }
}

/// A lottery as (percent, amount) outcomes; percents sum to 100.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lottery {
    pub outcomes: Vec<(u32, u32)>,
}

impl Lottery {
    pub fn expected_value(&self) -> f64 {
        self.outcomes.iter().map(|&(p, x)| p as f64 * x as f64 / 100.0).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndowmentFrame {
    Sell,
    Buy,
    Unload,
    GiftBuyer,
}

impl EndowmentFrame {
    pub const ALL: [EndowmentFrame; 4] =
        [EndowmentFrame::Sell, EndowmentFrame::Buy, EndowmentFrame::Unload, EndowmentFrame::GiftBuyer];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AppealFrame {
    Sad,
    Anger,
}

/// Structured trial parameters. Binary payloads use a fixed canonical option
/// index, documented per variant; `TrialSpec::option_order` maps displayed
/// positions onto it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Payload {
    /// Options 0 and 1 are the two item texts.
    Completeness {
        item: String,
        options: [String; 2],
    },
    /// Compares triple members `pair[0]` (option 0) and `pair[1]` (option 1).
    Transitivity {
        item: String,
        pair: [usize; 2],
        options: [String; 2],
    },
    /// Option 0 is the lottery, option 1 the sure amount.
    Continuity {
        item: String,
        p_percent: u32,
        high: u32,
        low: u32,
        sure: u32,
    },
    /// Option 0 is the left lottery, option 1 the right one.
    Independence {
        item: String,
        mixed: bool,
        alpha_percent: u32,
        left: Lottery,
        right: Lottery,
    },
    /// Option 0 is the gamble, option 1 the sure amount.
    Risk {
        p_percent: u32,
        gain: u32,
        sure: u32,
        delta_permille: i32,
    },
    /// Option 0 is the gamble, option 1 the sure rung amount.
    CeLadder {
        p_percent: u32,
        gain: u32,
        sure: u32,
        rung: usize,
    },
    /// Option 0 is the known urn, option 1 the unknown urn.
    Ambiguity {
        gain: u32,
        known_p: f64,
    },
    /// Answered ACCEPT (play) or REJECT (take 0).
    Loss {
        gain: u32,
        loss: u32,
    },
    Endowment {
        item: String,
        frame: EndowmentFrame,
        reference_price: u32,
    },
    /// Option 0 is the sooner-smaller reward, option 1 the later-larger one.
    Temporal {
        set: u8,
        sooner_amount: u32,
        sooner_delay: u32,
        later_amount: u32,
        later_delay: u32,
    },
    Stereotype {
        vignette: String,
        cue: i8,
    },
    Persuasion {
        pair: String,
        frame: AppealFrame,
    },
    Moral {
        vignette: String,
        foundation: String,
        harm_level: u8,
        statement: MoralStatement,
    },
    Blame {
        vignette: String,
        severity: u8,
        statement: BlameStatement,
    },
    Ultimatum {
        total: u32,
        offer: u32,
    },
    Dictator {
        total: u32,
    },
    Welfare {
        case: String,
        need: u8,
    },
}

impl Payload {
    /// Probability of the gamble's gain for risk payloads.
    pub fn gamble_p(&self) -> Option<f64> {
        match self {
            Payload::Risk { p_percent, .. } | Payload::CeLadder { p_percent, .. } => Some(*p_percent as f64 / 100.0),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSpec {
    pub trial_id: String,
    pub domain: Domain,
    pub payload: Payload,
    pub prompt_text: String,
    pub template_id: String,
    /// `option_order[displayed_position]` is the canonical option index.
    pub option_order: Vec<usize>,
    pub parse_schema: ParseSchema,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cue: Option<i8>,
    pub group_key: String,
    pub repeat: u32,
}

impl TrialSpec {
    /// Canonical option shown at `position`, if it exists.
    pub fn canonical_option(&self, position: usize) -> Option<usize> {
        self.option_order.get(position).copied()
    }

    /// Displayed position of canonical option `canonical`.
    pub fn display_position(&self, canonical: usize) -> Option<usize> {
        self.option_order.iter().position(|&c| c == canonical)
    }
}

fn default_repeats() -> u32 {
    1
}

fn default_currency() -> String {
    "$".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatteryConfig {
    pub seed: u64,
    #[serde(default = "default_repeats")]
    pub repeats_per_cell: u32,
    /// Per-domain overrides of `repeats_per_cell`.
    #[serde(default)]
    pub repeats: BTreeMap<Domain, u32>,
    /// Keep only templates whose id is listed. Domains left without a
    /// template are an error.
    #[serde(default)]
    pub template_subset: Option<Vec<String>>,
    #[serde(default = "default_currency")]
    pub currency_symbol: String,
    /// Blocks to generate; all when absent.
    #[serde(default)]
    pub domains: Option<Vec<Domain>>,
}

impl BatteryConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            repeats_per_cell: 1,
            repeats: BTreeMap::new(),
            template_subset: None,
            currency_symbol: default_currency(),
            domains: None,
        }
    }

    pub fn with_repeats(mut self, domain: Domain, n: u32) -> Self {
        self.repeats.insert(domain, n);
        self
    }

    pub fn with_domains(mut self, domains: &[Domain]) -> Self {
        self.domains = Some(domains.to_vec());
        self
    }

    pub fn repeats_for(&self, domain: Domain) -> u32 {
        self.repeats.get(&domain).copied().unwrap_or(self.repeats_per_cell)
    }

    pub fn includes(&self, domain: Domain) -> bool {
        self.domains.as_ref().map_or(true, |d| d.contains(&domain))
    }

    pub(crate) fn money(&self, amount: impl fmt::Display) -> String {
        format!("{}{amount}", self.currency_symbol)
    }
}

/// How a trial's displayed option order is chosen.
pub(crate) enum OrderRule {
    /// Uniform permutation of `n` options drawn from the trial's own key.
    Random(usize),
    Fixed(Vec<usize>),
}

/// Shared inputs for building one trial.
pub(crate) struct Draft<'a> {
    pub domain: Domain,
    pub payload: Payload,
    pub template: &'a Template,
    pub repeat: u32,
    pub order: OrderRule,
    pub group_key: String,
    pub cue: Option<i8>,
}

/// Hash of everything that identifies a trial before its order is known.
/// It seeds the order draw, so one trial can be rebuilt in isolation.
fn base_key(seed: u64, domain: Domain, payload: &Payload, template_id: &str, repeat: u32) -> [u8; 32] {
    let payload = serde_json::to_string(payload).expect("payload serializes");
    let mut h = Sha256::new();
    for part in [seed.to_string(), domain.as_str().to_string(), payload, template_id.to_string(), repeat.to_string()] {
        h.update(part.as_bytes());
        h.update([0x1f]);
    }
    h.finalize().into()
}

fn draw_order(key: [u8; 32], n: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::from_seed(key);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    order
}

fn trial_id(domain: Domain, key: &[u8; 32], order: &[usize]) -> String {
    let mut h = Sha256::new();
    h.update(key);
    for &o in order {
        h.update((o as u32).to_le_bytes());
    }
    let digest = h.finalize();
    format!("{}-{}", domain.short(), hex::encode(&digest[..8]))
}

impl Draft<'_> {
    /// Resolve the order, then render prompt and schema for it.
    pub(crate) fn build(
        self,
        cfg: &BatteryConfig,
        render: impl FnOnce(&[usize]) -> Result<(String, ParseSchema), BatteryError>,
    ) -> Result<TrialSpec, BatteryError> {
        let key = base_key(cfg.seed, self.domain, &self.payload, &self.template.id, self.repeat);
        let order = match self.order {
            OrderRule::Random(n) => draw_order(key, n),
            OrderRule::Fixed(v) => v,
        };
        let (prompt_text, parse_schema) = render(&order)?;
        Ok(TrialSpec {
            trial_id: trial_id(self.domain, &key, &order),
            domain: self.domain,
            payload: self.payload,
            prompt_text,
            template_id: self.template.id.clone(),
            option_order: order,
            parse_schema,
            cue: self.cue,
            group_key: self.group_key,
            repeat: self.repeat,
        })
    }
}

/// Render `texts` (canonical order) as numbered lines in displayed order,
/// returning the block and the displayed texts.
pub(crate) fn numbered_options(texts: &[String], order: &[usize]) -> (String, Vec<String>, Vec<String>) {
    let shown: Vec<String> = order.iter().map(|&i| texts[i].clone()).collect();
    let labels: Vec<String> = (1..=shown.len()).map(|i| i.to_string()).collect();
    let block = shown.iter().enumerate().map(|(i, t)| format!("{}) {t}", i + 1)).collect::<Vec<_>>().join("\n");
    (block, labels, shown)
}

/// Generate every block enabled in `cfg`, in a fixed domain order, and check
/// group integrity and id uniqueness.
pub fn generate_battery(cfg: &BatteryConfig, assets: &AssetStore) -> Result<Vec<TrialSpec>, BatteryError> {
    let templates = TemplateSet::load(assets, cfg.template_subset.as_deref())?;
    let mut out = Vec::new();
    if [
        Domain::RationalityCompleteness,
        Domain::RationalityTransitivity,
        Domain::RationalityContinuity,
        Domain::RationalityIndependence,
    ]
    .iter()
    .any(|d| cfg.includes(*d))
    {
        out.extend(gen_rationality_battery(cfg, assets, &templates)?.into_iter().filter(|t| cfg.includes(t.domain)));
    }
    if cfg.includes(Domain::RiskChoice) || cfg.includes(Domain::RiskCeLadder) {
        out.extend(gen_risk_block(cfg, &templates)?.into_iter().filter(|t| cfg.includes(t.domain)));
    }
    if cfg.includes(Domain::Ambiguity) {
        out.extend(gen_ambiguity_block(cfg, &templates)?);
    }
    if cfg.includes(Domain::Loss) {
        out.extend(gen_loss_block(cfg, &templates)?);
    }
    if cfg.includes(Domain::Endowment) {
        out.extend(gen_endowment_block(cfg, assets, &templates)?);
    }
    if cfg.includes(Domain::Temporal) {
        out.extend(gen_temporal_block(cfg, &templates)?);
    }
    for d in [Domain::Stereotype, Domain::Persuasion, Domain::Moral, Domain::Blame, Domain::Welfare] {
        if cfg.includes(d) {
            out.extend(gen_vignette_block(d, cfg, assets, &templates)?);
        }
    }
    if cfg.includes(Domain::Ultimatum) || cfg.includes(Domain::Dictator) {
        out.extend(gen_social_blocks(cfg, &templates)?.into_iter().filter(|t| cfg.includes(t.domain)));
    }
    validate_battery(&out)?;
    Ok(out)
}

/// Ids are unique and grouped domains have complete groups.
pub fn validate_battery(trials: &[TrialSpec]) -> Result<(), BatteryError> {
    let mut seen = BTreeSet::new();
    let mut groups: BTreeMap<(Domain, &str), usize> = BTreeMap::new();
    for t in trials {
        if !seen.insert(t.trial_id.as_str()) {
            return Err(BatteryError::DuplicateId(t.trial_id.clone()));
        }
        *groups.entry((t.domain, t.group_key.as_str())).or_default() += 1;
    }
    for ((domain, key), got) in groups {
        if let Some(expected) = domain.group_size() {
            if got != expected {
                return Err(BatteryError::GroupSize { key: key.to_string(), expected, got });
            }
        }
    }
    Ok(())
}

/// Count trials per domain, in domain order.
pub fn domain_counts(trials: &[TrialSpec]) -> BTreeMap<Domain, usize> {
    let mut counts = BTreeMap::new();
    for t in trials {
        *counts.entry(t.domain).or_default() += 1;
    }
    counts
}

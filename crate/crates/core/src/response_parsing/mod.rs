//! Turn raw agent text into canonical outcomes.
//!
//! Every parser is total: it returns an exact, normalized or failed outcome
//! and never panics or errors on arbitrary input.

mod amounts;
mod choice;
mod scales;

use serde::{Deserialize, Serialize};

use crate::task_battery::{AssetStore, ParseSchema};

pub use amounts::{parse_give_amount, parse_price};
pub use choice::{parse_accept_reject, parse_binary_choice};
pub use scales::{parse_assistance, parse_likert, ScaleTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    BinaryChoice,
    AcceptReject,
    Likert,
    Price,
    GiveAmount,
    OptionEcho,
    Assistance,
}

/// Canonical answer payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeValue {
    /// Zero-based displayed position of the chosen option.
    Choice(usize),
    Indifferent,
    Accept(bool),
    /// 1..=5 with 5 the strongest agreement or largest increase.
    Score(u8),
    PriceCents(u64),
    Give(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Confidence {
    Exact,
    Normalized,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum ParseFailure {
    Empty,
    NoMatch,
    /// More than one legal answer was found.
    Ambiguous,
    OutOfRange {
        value: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedOutcome {
    pub kind: OutcomeKind,
    pub value: Option<OutcomeValue>,
    pub confidence: Confidence,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<ParseFailure>,
}

impl ParsedOutcome {
    pub fn exact(kind: OutcomeKind, value: OutcomeValue) -> Self {
        Self { kind, value: Some(value), confidence: Confidence::Exact, failure: None }
    }

    pub fn normalized(kind: OutcomeKind, value: OutcomeValue) -> Self {
        Self { kind, value: Some(value), confidence: Confidence::Normalized, failure: None }
    }

    pub fn failed(kind: OutcomeKind, failure: ParseFailure) -> Self {
        Self { kind, value: None, confidence: Confidence::Failed, failure: Some(failure) }
    }

    pub fn is_parsed(&self) -> bool {
        self.confidence != Confidence::Failed
    }
}

/// Text split into an optional deliberation trace and the final answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawResponse {
    pub full_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thinking_trace: Option<String>,
    pub answer_text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Delimiters {
    pub open: String,
    pub close: String,
}

impl Default for Delimiters {
    fn default() -> Self {
        Self { open: "<think>".into(), close: "</think>".into() }
    }
}

/// Split with the default `<think>` delimiters.
pub fn split_thinking(full_text: &str) -> RawResponse {
    split_thinking_with(full_text, &Delimiters::default())
}

/// Extract the first well-formed trace. Unclosed or absent traces leave the
/// whole text as the answer.
pub fn split_thinking_with(full_text: &str, delims: &Delimiters) -> RawResponse {
    let whole =
        || RawResponse { full_text: full_text.to_string(), thinking_trace: None, answer_text: full_text.to_string() };
    if delims.open.is_empty() || delims.close.is_empty() {
        return whole();
    }
    let Some(start) = full_text.find(&delims.open) else { return whole() };
    let body_start = start + delims.open.len();
    let Some(rel_end) = full_text[body_start..].find(&delims.close) else { return whole() };
    let end = body_start + rel_end;
    let trace = full_text[body_start..end].trim().to_string();
    let mut answer = String::new();
    answer.push_str(&full_text[..start]);
    answer.push_str(&full_text[end + delims.close.len()..]);
    // A stray delimiter left in the answer would break the invariant.
    let answer = answer.replace(&delims.open, "").replace(&delims.close, "").trim().to_string();
    RawResponse { full_text: full_text.to_string(), thinking_trace: Some(trace), answer_text: answer }
}

/// Parsers bound to a set of scale normalization tables.
#[derive(Debug, Clone)]
pub struct ResponseParser {
    pub likert: ScaleTable,
    pub assistance: ScaleTable,
}

impl ResponseParser {
    /// Tables from the embedded assets.
    pub fn standard() -> &'static ResponseParser {
        static PARSER: std::sync::OnceLock<ResponseParser> = std::sync::OnceLock::new();
        PARSER.get_or_init(|| {
            ResponseParser::from_assets(&AssetStore::embedded()).expect("embedded normalization tables parse")
        })
    }

    pub fn from_assets(assets: &AssetStore) -> Result<Self, crate::task_battery::BatteryError> {
        Ok(Self {
            likert: ScaleTable::load(assets, "likert_normalization.tsv", &crate::task_battery::LIKERT_LABELS_A2D)?,
            assistance: ScaleTable::load(
                assets,
                "assistance_normalization.tsv",
                &crate::task_battery::ASSISTANCE_LABELS,
            )?,
        })
    }

    /// Dispatch on the trial's schema.
    pub fn parse(&self, schema: &ParseSchema, answer: &str) -> ParsedOutcome {
        match schema {
            ParseSchema::BinaryChoice { labels, options, allow_indifferent } => {
                parse_binary_choice(answer, labels, options, *allow_indifferent)
            }
            ParseSchema::OptionEcho { labels, options } => {
                let mut o = parse_binary_choice(answer, labels, options, false);
                o.kind = OutcomeKind::OptionEcho;
                o
            }
            ParseSchema::AcceptReject => parse_accept_reject(answer),
            ParseSchema::Likert { order } => self.likert.parse(answer, OutcomeKind::Likert, Some(*order)),
            ParseSchema::Price => parse_price(answer),
            ParseSchema::GiveAmount { allowed } => parse_give_amount(answer, allowed),
            ParseSchema::Assistance => self.assistance.parse(answer, OutcomeKind::Assistance, None),
        }
    }
}

/// Parse with the embedded tables.
pub fn parse_answer(schema: &ParseSchema, answer: &str) -> ParsedOutcome {
    ResponseParser::standard().parse(schema, answer)
}

/// The shortest answer string that parses back to `value` exactly.
pub fn render_canonical(schema: &ParseSchema, value: OutcomeValue) -> Option<String> {
    use OutcomeValue as V;
    match (schema, value) {
        (ParseSchema::BinaryChoice { labels, .. } | ParseSchema::OptionEcho { labels, .. }, V::Choice(i)) => {
            labels.get(i).cloned()
        }
        (ParseSchema::BinaryChoice { allow_indifferent: true, .. }, V::Indifferent) => Some("Indifferent".into()),
        (ParseSchema::AcceptReject, V::Accept(a)) => Some(if a { "ACCEPT" } else { "REJECT" }.into()),
        (ParseSchema::Likert { .. }, V::Score(s)) if (1..=5).contains(&s) => {
            Some(crate::task_battery::LIKERT_LABELS_A2D[5 - s as usize].into())
        }
        (ParseSchema::Assistance, V::Score(s)) if (1..=5).contains(&s) => {
            Some(crate::task_battery::ASSISTANCE_LABELS[5 - s as usize].into())
        }
        (ParseSchema::Price, V::PriceCents(c)) => Some(if c % 100 == 0 {
            format!("Price: ${}", c / 100)
        } else {
            format!("Price: ${}.{:02}", c / 100, c % 100)
        }),
        (ParseSchema::GiveAmount { allowed }, V::Give(g)) if allowed.contains(&g) => Some(format!("${g}")),
        _ => None,
    }
}

/// Lowercase, map every non-alphanumeric run to one space, trim.
pub(crate) fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.extend(ch.to_lowercase());
        } else {
            pending_space = true;
        }
    }
    out
}

/// Drop lead-ins such as "Answer:" or "My final answer is".
pub(crate) fn strip_lead_in(norm: &str) -> &str {
    const LEADS: [&str; 14] = [
        "my final answer is ",
        "final answer is ",
        "final answer ",
        "my answer is ",
        "the answer is ",
        "answer is ",
        "answer ",
        "my choice is ",
        "choice ",
        "decision ",
        "response ",
        "i choose ",
        "i pick ",
        "i select ",
    ];
    let mut s = norm;
    loop {
        let before = s;
        for lead in LEADS {
            if let Some(rest) = s.strip_prefix(lead) {
                s = rest;
            }
        }
        if s == before {
            return s;
        }
    }
}

/// Non-empty lines to try, most decisive first: last line, first line.
pub(crate) fn candidate_lines(answer: &str) -> Vec<&str> {
    let lines: Vec<&str> = answer.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    let mut out = Vec::new();
    if let Some(last) = lines.last() {
        out.push(*last);
    }
    if lines.len() > 1 {
        out.push(lines[0]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::task_battery::LikertOrder;
    use proptest::prelude::*;

    #[test]
    fn split_examples() {
        let r = split_thinking("<think>abc</think>\nAnswer: B");
        assert_eq!(r.thinking_trace.as_deref(), Some("abc"));
        assert_eq!(r.answer_text, "Answer: B");
        let r = split_thinking("Answer: B");
        assert_eq!(r.thinking_trace, None);
        assert_eq!(r.answer_text, "Answer: B");
        let r = split_thinking("<think>abc");
        assert_eq!(r.thinking_trace, None);
        assert_eq!(r.answer_text, "<think>abc");
    }

    #[test]
    fn custom_delimiters() {
        let d = Delimiters { open: "[[reason]]".into(), close: "[[/reason]]".into() };
        let r = split_thinking_with("[[reason]]x y[[/reason]] ACCEPT", &d);
        assert_eq!(r.thinking_trace.as_deref(), Some("x y"));
        assert_eq!(r.answer_text, "ACCEPT");
    }

    #[test]
    fn normalize_collapses_punctuation() {
        assert_eq!(normalize("  Receive $20, for certain! "), "receive 20 for certain");
        assert_eq!(strip_lead_in("my final answer is answer b"), "b");
    }

    fn schemas() -> Vec<ParseSchema> {
        vec![
            ParseSchema::BinaryChoice {
                labels: vec!["A".into(), "B".into()],
                options: vec!["$100 today.".into(), "$105 tomorrow.".into()],
                allow_indifferent: true,
            },
            ParseSchema::OptionEcho {
                labels: vec!["1".into(), "2".into()],
                options: vec![
                    "Lottery: 40% chance of winning $53, otherwise $0.".into(),
                    "Receive $20 for certain.".into(),
                ],
            },
            ParseSchema::AcceptReject,
            ParseSchema::Likert { order: LikertOrder::AgreeToDisagree },
            ParseSchema::Likert { order: LikertOrder::DisagreeToAgree },
            ParseSchema::Price,
            ParseSchema::GiveAmount { allowed: (0..=10).collect() },
            ParseSchema::Assistance,
        ]
    }

    fn values() -> impl Strategy<Value = OutcomeValue> {
        prop_oneof![
            (0usize..3).prop_map(OutcomeValue::Choice),
            Just(OutcomeValue::Indifferent),
            any::<bool>().prop_map(OutcomeValue::Accept),
            (0u8..7).prop_map(OutcomeValue::Score),
            (0u64..1_000_000).prop_map(OutcomeValue::PriceCents),
            (0u32..12).prop_map(OutcomeValue::Give),
        ]
    }

    proptest! {
        #[test]
        fn canonical_rendering_round_trips(idx in 0usize..8, value in values()) {
            let schema = &schemas()[idx];
            if let Some(text) = render_canonical(schema, value) {
                let parsed = parse_answer(schema, &text);
                prop_assert_eq!(parsed.value, Some(value));
                prop_assert_eq!(parsed.confidence, Confidence::Exact);
            }
        }

        #[test]
        fn parsers_are_total(idx in 0usize..8, text in "\\PC{0,80}") {
            let out = parse_answer(&schemas()[idx], &text);
            prop_assert_eq!(out.is_parsed(), out.value.is_some());
            prop_assert_eq!(out.failure.is_some(), !out.is_parsed());
            match out.value {
                Some(OutcomeValue::Score(s)) => prop_assert!((1..=5).contains(&s)),
                Some(OutcomeValue::Give(g)) => prop_assert!(g <= 10),
                _ => {}
            }
        }

        #[test]
        fn split_answer_never_holds_delimiters(a in "\\PC{0,30}", b in "\\PC{0,30}", c in "\\PC{0,30}") {
            for text in [format!("{a}<think>{b}</think>{c}"), format!("{a}<think>{b}"), format!("{a}</think>{b}<think>{c}</think>")] {
                let r = split_thinking(&text);
                if r.thinking_trace.is_some() {
                    prop_assert!(!r.answer_text.contains("<think>") && !r.answer_text.contains("</think>"));
                } else {
                    prop_assert_eq!(&r.answer_text, &text);
                }
            }
        }
    }
}

//! Five-point labelled scales: agreement and assistance.

use std::collections::BTreeSet;

use crate::task_battery::{AssetStore, BatteryError, LikertOrder};

use super::{candidate_lines, normalize, strip_lead_in, OutcomeKind, OutcomeValue, ParseFailure, ParsedOutcome};

/// Canonical labels plus accepted variants, each mapped to a score.
#[derive(Debug, Clone)]
pub struct ScaleTable {
    /// Normalized canonical labels for scores 5 down to 1.
    canonical: Vec<String>,
    /// Token sequences with scores, longest first.
    variants: Vec<(Vec<String>, u8)>,
}

impl ScaleTable {
    pub fn load(assets: &AssetStore, file: &str, labels: &[&str; 5]) -> Result<Self, BatteryError> {
        let mut variants = Vec::new();
        for row in assets.rows(file, 2)? {
            let score: u8 = row.cells[1].parse().ok().filter(|s| (1..=5).contains(s)).ok_or_else(|| {
                BatteryError::InvalidAsset { file: file.into(), line: row.line, detail: "score must be 1..=5".into() }
            })?;
            let tokens: Vec<String> = normalize(&row.cells[0]).split(' ').map(str::to_string).collect();
            variants.push((tokens, score));
        }
        let canonical: Vec<String> = labels.iter().map(|l| normalize(l)).collect();
        for (i, c) in canonical.iter().enumerate() {
            let tokens: Vec<String> = c.split(' ').map(str::to_string).collect();
            if !variants.iter().any(|(v, _)| *v == tokens) {
                variants.push((tokens, 5 - i as u8));
            }
        }
        variants.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        Ok(Self { canonical, variants })
    }

    /// Scores of every non-overlapping variant found, longest match first.
    fn scan(&self, norm: &str) -> BTreeSet<u8> {
        let tokens: Vec<&str> = norm.split(' ').filter(|t| !t.is_empty()).collect();
        let mut found = BTreeSet::new();
        let mut i = 0;
        while i < tokens.len() {
            let hit = self
                .variants
                .iter()
                .find(|(v, _)| tokens.len() - i >= v.len() && v.iter().zip(&tokens[i..]).all(|(a, b)| a == b));
            match hit {
                Some((v, s)) => {
                    found.insert(*s);
                    i += v.len();
                }
                None => i += 1,
            }
        }
        found
    }

    /// Score from a label answer. The mapping ignores the displayed order,
    /// which is accepted only to mirror the schema.
    pub fn parse(&self, answer: &str, kind: OutcomeKind, _order: Option<LikertOrder>) -> ParsedOutcome {
        if answer.trim().is_empty() {
            return ParsedOutcome::failed(kind, ParseFailure::Empty);
        }
        let lines = candidate_lines(answer);
        for line in &lines {
            let n = normalize(line);
            let core = strip_lead_in(&n);
            if let Some(i) = self.canonical.iter().position(|c| c == core) {
                return ParsedOutcome::exact(kind, OutcomeValue::Score(5 - i as u8));
            }
        }
        let mut scopes = lines;
        scopes.push(answer);
        let mut ambiguous = false;
        for scope in scopes {
            let found = self.scan(&normalize(scope));
            match found.len() {
                0 => {}
                1 => {
                    let s = *found.iter().next().expect("one score");
                    return ParsedOutcome::normalized(kind, OutcomeValue::Score(s));
                }
                _ => ambiguous = true,
            }
        }
        ParsedOutcome::failed(kind, if ambiguous { ParseFailure::Ambiguous } else { ParseFailure::NoMatch })
    }
}

/// Agreement score with Strongly Agree = 5, whatever the displayed order.
pub fn parse_likert(answer: &str, order: LikertOrder) -> ParsedOutcome {
    super::ResponseParser::standard().likert.parse(answer, OutcomeKind::Likert, Some(order))
}

/// Assistance score with Significantly Increased = 5.
pub fn parse_assistance(answer: &str) -> ParsedOutcome {
    super::ResponseParser::standard().assistance.parse(answer, OutcomeKind::Assistance, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::response_parsing::Confidence;
    use crate::task_battery::{ASSISTANCE_LABELS, LIKERT_LABELS_A2D};

    const ORDERS: [LikertOrder; 2] = [LikertOrder::AgreeToDisagree, LikertOrder::DisagreeToAgree];

    #[test]
    fn likert_examples() {
        for order in ORDERS {
            let out = parse_likert("Strongly Agree", order);
            assert_eq!((out.value, out.confidence), (Some(OutcomeValue::Score(5)), Confidence::Exact));
        }
        assert_eq!(
            parse_likert("Neither Agree nor Disagree", LikertOrder::AgreeToDisagree).value,
            Some(OutcomeValue::Score(3))
        );
        let out = parse_likert("Agree strongly", LikertOrder::DisagreeToAgree);
        assert_eq!((out.value, out.confidence), (Some(OutcomeValue::Score(5)), Confidence::Normalized));
        assert_eq!(
            parse_likert("I strongly disagree with that.", LikertOrder::AgreeToDisagree).value,
            Some(OutcomeValue::Score(1))
        );
        assert_eq!(parse_likert("I don't agree.", LikertOrder::AgreeToDisagree).value, Some(OutcomeValue::Score(2)));
        assert_eq!(
            parse_likert("Agree or disagree?", LikertOrder::AgreeToDisagree).failure,
            Some(ParseFailure::Ambiguous)
        );
        assert_eq!(
            parse_likert("No opinion to share", LikertOrder::AgreeToDisagree).failure,
            Some(ParseFailure::NoMatch)
        );
    }

    #[test]
    fn order_invariance_over_all_labels() {
        for (i, label) in LIKERT_LABELS_A2D.iter().enumerate() {
            let a = parse_likert(label, LikertOrder::AgreeToDisagree);
            let d = parse_likert(label, LikertOrder::DisagreeToAgree);
            assert_eq!(a, d);
            assert_eq!(a.value, Some(OutcomeValue::Score(5 - i as u8)));
        }
        for (i, label) in ASSISTANCE_LABELS.iter().enumerate() {
            assert_eq!(parse_assistance(label).value, Some(OutcomeValue::Score(5 - i as u8)));
        }
    }

    #[test]
    fn assistance_examples() {
        assert_eq!(parse_assistance("Slightly Decreased").value, Some(OutcomeValue::Score(2)));
        assert_eq!(parse_assistance("- Maintained at Current Level").value, Some(OutcomeValue::Score(3)));
        assert_eq!(parse_assistance("It should be increased significantly.").value, Some(OutcomeValue::Score(5)));
        assert_eq!(parse_assistance("more help").confidence, Confidence::Failed);
    }
}

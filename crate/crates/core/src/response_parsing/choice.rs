//! Two-option and accept/reject answers.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use regex::Regex;

use super::{candidate_lines, normalize, strip_lead_in, OutcomeKind, OutcomeValue, ParseFailure, ParsedOutcome};

fn decision_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r#"(?i:\b(?:answer|choose|chose|choice|pick|select|prefer|go with|going with|decision)\b)(?:\s*(?i:is|would be|will be))?[\s:\-*"'(\[]*(?i:option\s*)?[\s:\-*"'(\[]*([A-Z]|\d+|(?i:indifferent))\b"#,
        )
        .expect("valid regex")
    })
}

fn option_mention_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r#"(?i:\boption)\s*[:\-*"'(\[]*([A-Z]|\d+)\b"#).expect("valid regex"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Pick {
    Option(usize),
    Indifferent,
}

impl Pick {
    fn value(self) -> OutcomeValue {
        match self {
            Pick::Option(i) => OutcomeValue::Choice(i),
            Pick::Indifferent => OutcomeValue::Indifferent,
        }
    }
}

enum Found {
    One(Pick),
    Many,
    None,
}

fn classify(set: BTreeSet<Pick>) -> Found {
    match set.len() {
        0 => Found::None,
        1 => Found::One(*set.iter().next().expect("one element")),
        _ => Found::Many,
    }
}

fn padded(s: &str) -> String {
    format!(" {s} ")
}

/// Options whose whole normalized text appears in `scope`.
fn echoes(scope: &str, norm_opts: &[String]) -> BTreeSet<Pick> {
    let hay = padded(&normalize(scope));
    norm_opts
        .iter()
        .enumerate()
        .filter(|(_, o)| !o.is_empty() && hay.contains(&padded(o)))
        .map(|(i, _)| Pick::Option(i))
        .collect()
}

/// Options sharing a token with `scope` that no other option contains.
fn distinctive(scope: &str, norm_opts: &[String]) -> BTreeSet<Pick> {
    let scope_norm = normalize(scope);
    let scope_tokens: BTreeSet<&str> = scope_norm.split(' ').collect();
    let token_sets: Vec<BTreeSet<&str>> = norm_opts.iter().map(|o| o.split(' ').collect()).collect();
    let mut hits = BTreeSet::new();
    for (i, set) in token_sets.iter().enumerate() {
        let unique = set
            .iter()
            .filter(|t| token_sets.iter().enumerate().all(|(j, other)| j == i || !other.contains(*t)))
            .any(|t| scope_tokens.contains(t));
        if unique {
            hits.insert(Pick::Option(i));
        }
    }
    hits
}

fn label_picks(re: &Regex, scope: &str, labels: &[String], allow_indifferent: bool) -> BTreeSet<Pick> {
    re.captures_iter(scope)
        .filter_map(|c| {
            let tok = c.get(1)?.as_str();
            if tok.eq_ignore_ascii_case("indifferent") {
                return allow_indifferent.then_some(Pick::Indifferent);
            }
            labels.iter().position(|l| l == tok).map(Pick::Option)
        })
        .collect()
}

/// Labels first, then verbatim option text, then a distinctive word.
/// `labels` and `options` are in displayed order; the returned choice is a
/// displayed position.
pub fn parse_binary_choice(
    answer: &str,
    labels: &[String],
    options: &[String],
    allow_indifferent: bool,
) -> ParsedOutcome {
    let kind = OutcomeKind::BinaryChoice;
    if answer.trim().is_empty() {
        return ParsedOutcome::failed(kind, ParseFailure::Empty);
    }
    let norm_labels: Vec<String> = labels.iter().map(|l| normalize(l)).collect();
    let norm_opts: Vec<String> = options.iter().map(|o| normalize(o)).collect();
    let lines = candidate_lines(answer);

    for line in &lines {
        let n = normalize(line);
        let core = strip_lead_in(&n);
        let core = core.strip_prefix("option ").unwrap_or(core);
        if let Some(i) = norm_labels.iter().position(|l| l == core) {
            return ParsedOutcome::exact(kind, OutcomeValue::Choice(i));
        }
        if allow_indifferent && matches!(core, "indifferent" | "i am indifferent" | "i m indifferent") {
            return ParsedOutcome::exact(kind, OutcomeValue::Indifferent);
        }
    }

    let mut scopes: Vec<&str> = lines.clone();
    scopes.push(answer);
    let mut ambiguous = false;
    for scope in scopes {
        let tiers: [&dyn Fn() -> BTreeSet<Pick>; 4] = [
            &|| label_picks(decision_re(), scope, labels, allow_indifferent),
            &|| echoes(scope, &norm_opts),
            &|| {
                let mut s = label_picks(option_mention_re(), scope, labels, false);
                if allow_indifferent && padded(&normalize(scope)).contains(" indifferent ") {
                    s.insert(Pick::Indifferent);
                }
                s
            },
            &|| if scope.len() <= 200 { distinctive(scope, &norm_opts) } else { BTreeSet::new() },
        ];
        // A weaker tier may not settle what a stronger one found ambiguous.
        for tier in tiers {
            match classify(tier()) {
                Found::One(p) => return ParsedOutcome::normalized(kind, p.value()),
                Found::Many => {
                    ambiguous = true;
                    break;
                }
                Found::None => {}
            }
        }
    }
    let reason = if ambiguous { ParseFailure::Ambiguous } else { ParseFailure::NoMatch };
    ParsedOutcome::failed(kind, reason)
}

/// Readings of every accept/reject word, in order, with a preceding negation
/// flipping the reading. Each entry is (token index, accepted).
fn accept_mentions(norm: &str) -> Vec<(usize, bool)> {
    let tokens: Vec<&str> = norm.split(' ').collect();
    let mut out = Vec::new();
    for (i, t) in tokens.iter().enumerate() {
        let base = match *t {
            "accept" | "accepts" | "accepted" | "accepting" => true,
            "reject" | "rejects" | "rejected" | "rejecting" | "decline" | "declines" => false,
            _ => continue,
        };
        let negated =
            tokens[i.saturating_sub(2)..i].iter().any(|w| matches!(*w, "not" | "never" | "t" | "won" | "wouldn"));
        out.push((i, base != negated));
    }
    out
}

pub fn parse_accept_reject(answer: &str) -> ParsedOutcome {
    let kind = OutcomeKind::AcceptReject;
    if answer.trim().is_empty() {
        return ParsedOutcome::failed(kind, ParseFailure::Empty);
    }
    let lines = candidate_lines(answer);
    for line in &lines {
        let n = normalize(line);
        match strip_lead_in(&n) {
            "accept" => return ParsedOutcome::exact(kind, OutcomeValue::Accept(true)),
            "reject" => return ParsedOutcome::exact(kind, OutcomeValue::Accept(false)),
            _ => {}
        }
    }
    let mut scopes = lines;
    scopes.push(answer);
    let mut ambiguous = false;
    for scope in scopes {
        let n = normalize(scope);
        let mentions = accept_mentions(strip_lead_in(&n));
        let readings: BTreeSet<bool> = mentions.iter().map(|m| m.1).collect();
        match (readings.len(), mentions.first()) {
            (1, Some(&(_, a))) => return ParsedOutcome::normalized(kind, OutcomeValue::Accept(a)),
            // A decision stated up front outranks words in the justification.
            (2, Some(&(i, a))) if i < 3 && mentions[1].0 > 3 => {
                return ParsedOutcome::normalized(kind, OutcomeValue::Accept(a))
            }
            (0, _) => {}
            _ => ambiguous = true,
        }
    }
    let reason = if ambiguous { ParseFailure::Ambiguous } else { ParseFailure::NoMatch };
    ParsedOutcome::failed(kind, reason)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::response_parsing::Confidence;

    fn ab() -> (Vec<String>, Vec<String>) {
        (vec!["A".into(), "B".into()], vec!["you receive $100 today.".into(), "you receive $105 tomorrow.".into()])
    }

    fn echo() -> (Vec<String>, Vec<String>) {
        (
            vec!["1".into(), "2".into()],
            vec!["Lottery: 40% chance of winning $53, otherwise $0.".into(), "Receive $20 for certain.".into()],
        )
    }

    #[test]
    fn label_answers() {
        let (l, o) = ab();
        let out = parse_binary_choice("Answer: B", &l, &o, true);
        assert_eq!((out.value, out.confidence), (Some(OutcomeValue::Choice(1)), Confidence::Exact));
        let out = parse_binary_choice("indifferent.", &l, &o, true);
        assert_eq!(out.value, Some(OutcomeValue::Indifferent));
        let out = parse_binary_choice("I would choose **A** here.", &l, &o, true);
        assert_eq!((out.value, out.confidence), (Some(OutcomeValue::Choice(0)), Confidence::Normalized));
    }

    #[test]
    fn echo_answers() {
        let (l, o) = echo();
        let out = parse_binary_choice("Receive $20 for certain.", &l, &o, false);
        assert_eq!((out.value, out.confidence), (Some(OutcomeValue::Choice(1)), Confidence::Normalized));
        let out = parse_binary_choice("Lottery: 40% chance of winning $53, otherwise $0", &l, &o, false);
        assert_eq!(out.value, Some(OutcomeValue::Choice(0)));
        let out = parse_binary_choice("2", &l, &o, false);
        assert_eq!(out.confidence, Confidence::Exact);
        let out = parse_binary_choice("I'll take the lottery.", &l, &o, false);
        assert_eq!(out.value, Some(OutcomeValue::Choice(0)));
    }

    #[test]
    fn failures() {
        let (l, o) = ab();
        let out = parse_binary_choice("I cannot decide between these", &l, &o, true);
        assert_eq!(out.confidence, Confidence::Failed);
        assert_eq!(out.failure, Some(ParseFailure::NoMatch));
        let (l, o) = echo();
        let both = "Lottery: 40% chance of winning $53, otherwise $0. Receive $20 for certain.";
        assert_eq!(parse_binary_choice(both, &l, &o, false).failure, Some(ParseFailure::Ambiguous));
        assert_eq!(parse_binary_choice("   ", &l, &o, false).failure, Some(ParseFailure::Empty));
        let (l, o) = ab();
        assert_eq!(
            parse_binary_choice("Option A or option B, hard to say.", &l, &o, true).failure,
            Some(ParseFailure::Ambiguous)
        );
        assert_eq!(parse_binary_choice("Indifferent", &l, &o, false).confidence, Confidence::Failed);
    }

    #[test]
    fn accept_reject_words() {
        assert_eq!(parse_accept_reject("REJECT").value, Some(OutcomeValue::Accept(false)));
        assert_eq!(parse_accept_reject("reject").confidence, Confidence::Exact);
        assert_eq!(parse_accept_reject("I accept the offer.").value, Some(OutcomeValue::Accept(true)));
        assert_eq!(parse_accept_reject("I would not accept this.").value, Some(OutcomeValue::Accept(false)));
        assert_eq!(parse_accept_reject("Maybe.").failure, Some(ParseFailure::NoMatch));
        assert_eq!(parse_accept_reject("accept or reject, hard to say").failure, Some(ParseFailure::Ambiguous));
        let echoed = "REJECT: take $0 for certain.";
        assert_eq!(parse_accept_reject(echoed).value, Some(OutcomeValue::Accept(false)));
    }
}

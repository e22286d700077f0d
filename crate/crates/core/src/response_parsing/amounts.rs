//! Price and give-amount answers.

use std::sync::OnceLock;

use regex::Regex;

use super::{candidate_lines, OutcomeKind, OutcomeValue, ParseFailure, ParsedOutcome};

const AMOUNT: &str = r"(\d{1,3}(?:,\d{3})+|\d+)(?:\.(\d{1,2}))?\b";

fn price_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(&format!(r"(?i)\bprice\s*[:=\-]?\s*(?:\*\*)?\s*(?:\$|usd\s*|us\$|€|£)?\s*{AMOUNT}"))
            .expect("valid regex")
    })
}

fn exact_price_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^Price: \$(\d+)(?:\.(\d{2}))?$").expect("valid regex"))
}

fn bare_dollar_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(&format!(r"^\$\s*{AMOUNT}\.?$")).expect("valid regex"))
}

fn dollar_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(&format!(r"\$\s*{AMOUNT}")).expect("valid regex"))
}

fn give_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(&format!(r"(?i)\b(?:give|giving|offer|send|transfer|answer)\b(?:\s+(?:away|them|the other player|you))?\s*[:\-]?\s*\$?\s*{AMOUNT}"))
            .expect("valid regex")
    })
}

fn to_cents(whole: &str, frac: Option<&str>) -> Option<u64> {
    let dollars: u64 = whole.replace(',', "").parse().ok()?;
    let cents = match frac {
        None => 0,
        Some(f) if f.len() == 1 => f.parse::<u64>().ok()? * 10,
        Some(f) => f.parse::<u64>().ok()?,
    };
    dollars.checked_mul(100)?.checked_add(cents)
}

/// First `Price: $N` or `Price: $N.NN`. A reply that is only a dollar
/// amount is also accepted.
pub fn parse_price(answer: &str) -> ParsedOutcome {
    let kind = OutcomeKind::Price;
    let trimmed = answer.trim();
    if trimmed.is_empty() {
        return ParsedOutcome::failed(kind, ParseFailure::Empty);
    }
    if let Some(c) = exact_price_re().captures(trimmed) {
        if let Some(v) = to_cents(&c[1], c.get(2).map(|m| m.as_str())) {
            return ParsedOutcome::exact(kind, OutcomeValue::PriceCents(v));
        }
    }
    let found = price_re()
        .captures(answer)
        .or_else(|| bare_dollar_re().captures(trimmed))
        .and_then(|c| to_cents(&c[1], c.get(2).map(|m| m.as_str())));
    match found {
        Some(v) => ParsedOutcome::normalized(kind, OutcomeValue::PriceCents(v)),
        None => ParsedOutcome::failed(kind, ParseFailure::NoMatch),
    }
}

/// Whole-dollar amount from the allowed set. Tries, in order: a reply that is
/// only the amount, an amount after a giving verb, the first dollar amount on
/// the last line, the first dollar amount anywhere.
pub fn parse_give_amount(answer: &str, allowed: &[u32]) -> ParsedOutcome {
    let kind = OutcomeKind::GiveAmount;
    let trimmed = answer.trim();
    if trimmed.is_empty() {
        return ParsedOutcome::failed(kind, ParseFailure::Empty);
    }
    let check = |whole: &str, frac: Option<&str>, exact: bool| -> ParsedOutcome {
        let Some(cents) = to_cents(whole, frac) else {
            return ParsedOutcome::failed(kind, ParseFailure::NoMatch);
        };
        if cents % 100 != 0 {
            return ParsedOutcome::failed(kind, ParseFailure::OutOfRange { value: cents / 100 });
        }
        let v = cents / 100;
        match u32::try_from(v).ok().filter(|g| allowed.contains(g)) {
            Some(g) if exact => ParsedOutcome::exact(kind, OutcomeValue::Give(g)),
            Some(g) => ParsedOutcome::normalized(kind, OutcomeValue::Give(g)),
            None => ParsedOutcome::failed(kind, ParseFailure::OutOfRange { value: v }),
        }
    };
    let core = trimmed.trim_end_matches('.');
    if let Some(c) = bare_dollar_re().captures(core) {
        return check(&c[1], c.get(2).map(|m| m.as_str()), true);
    }
    if core.chars().all(|ch| ch.is_ascii_digit()) {
        return check(core, None, true);
    }
    let last_line = candidate_lines(answer).first().copied().unwrap_or(trimmed);
    let found =
        give_re().captures(answer).or_else(|| dollar_re().captures(last_line)).or_else(|| dollar_re().captures(answer));
    match found {
        Some(c) => check(&c[1], c.get(2).map(|m| m.as_str()), false),
        None => ParsedOutcome::failed(kind, ParseFailure::NoMatch),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::response_parsing::Confidence;

    #[test]
    fn price_examples() {
        let out = parse_price("Price: $12");
        assert_eq!((out.value, out.confidence), (Some(OutcomeValue::PriceCents(1200)), Confidence::Exact));
        assert_eq!(parse_price("Price: $12.50").value, Some(OutcomeValue::PriceCents(1250)));
        assert_eq!(parse_price("about ten dollars").failure, Some(ParseFailure::NoMatch));
        assert_eq!(parse_price("My price: $1,200.5 for it").value, Some(OutcomeValue::PriceCents(120_050)));
        assert_eq!(parse_price("**Price:** $7").value, Some(OutcomeValue::PriceCents(700)));
        assert_eq!(parse_price("$8").value, Some(OutcomeValue::PriceCents(800)));
        assert_eq!(parse_price("Price: -$3").confidence, Confidence::Failed);
    }

    #[test]
    fn give_examples() {
        let allowed: Vec<u32> = (0..=10).collect();
        let out = parse_give_amount("$7", &allowed);
        assert_eq!((out.value, out.confidence), (Some(OutcomeValue::Give(7)), Confidence::Exact));
        assert_eq!(parse_give_amount("Out of $10, I will give $3.", &allowed).value, Some(OutcomeValue::Give(3)));
        assert_eq!(parse_give_amount("$12", &allowed).failure, Some(ParseFailure::OutOfRange { value: 12 }));
        assert_eq!(parse_give_amount("$2.50", &allowed).confidence, Confidence::Failed);
        assert_eq!(parse_give_amount("nothing at all", &allowed).failure, Some(ParseFailure::NoMatch));
        assert_eq!(parse_give_amount("0", &allowed).value, Some(OutcomeValue::Give(0)));
    }
}

//! Prompt priming with an emotional persona preamble.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::task_battery::AssetStore;

use super::{Emotion, GatewayError, Intensity};

const OPEN: &str = "<persona>";
const CLOSE: &str = "</persona>";

#[derive(Debug, Clone, Default)]
struct Persona {
    preamble: String,
    exemplars: Vec<String>,
}

/// Preambles and exemplars per emotion, loaded from `icp.tsv`.
#[derive(Debug, Clone)]
pub struct IcpLibrary {
    personas: BTreeMap<Emotion, Persona>,
    pub with_exemplars: bool,
}

impl IcpLibrary {
    pub fn from_assets(assets: &AssetStore) -> Result<Self, GatewayError> {
        let rows = assets.rows("icp.tsv", 3).map_err(|e| GatewayError::Invalid(e.to_string()))?;
        let mut personas: BTreeMap<Emotion, Persona> = BTreeMap::new();
        for row in rows {
            let emotion: Emotion = row.cells[0].parse()?;
            let entry = personas.entry(emotion).or_default();
            match row.cells[1].as_str() {
                "preamble" => entry.preamble = row.cells[2].clone(),
                "exemplar" => entry.exemplars.push(row.cells[2].clone()),
                other => return Err(GatewayError::Invalid(format!("icp.tsv line {}: kind `{other}`", row.line))),
            }
        }
        for e in Emotion::ALL {
            if personas.get(&e).map_or(true, |p| p.preamble.is_empty()) {
                return Err(GatewayError::Invalid(format!("icp.tsv: no preamble for {e}")));
            }
        }
        Ok(Self { personas, with_exemplars: true })
    }

    pub fn standard() -> &'static IcpLibrary {
        static LIB: OnceLock<IcpLibrary> = OnceLock::new();
        LIB.get_or_init(|| IcpLibrary::from_assets(&AssetStore::embedded()).expect("embedded icp assets are valid"))
    }

    /// Prepends the persona block; the task text follows unchanged.
    pub fn wrap(&self, prompt: &str, emotion: Emotion, intensity: Intensity) -> Result<String, GatewayError> {
        if is_wrapped(prompt) {
            return Err(GatewayError::AlreadyWrapped);
        }
        let persona = self.personas.get(&emotion).ok_or_else(|| GatewayError::UnknownEmotion(emotion.to_string()))?;
        let feeling = match intensity.modifier() {
            "" => format!("feeling {emotion}"),
            m => format!("{m} feeling {emotion}"),
        };
        let mut block = format!("{OPEN}\nFor this conversation you are {feeling}. {}\n", persona.preamble);
        if self.with_exemplars && !persona.exemplars.is_empty() {
            block.push_str("Things you have said while in this state:\n");
            for ex in &persona.exemplars {
                block.push_str(&format!("- \"{ex}\"\n"));
            }
        }
        block.push_str(CLOSE);
        Ok(format!("{block}\n\n{prompt}"))
    }
}

pub fn is_wrapped(prompt: &str) -> bool {
    prompt.starts_with(OPEN)
}

/// Task text of a possibly wrapped prompt.
pub fn strip_icp(prompt: &str) -> &str {
    if !is_wrapped(prompt) {
        return prompt;
    }
    prompt.find(CLOSE).map_or(prompt, |i| {
        let rest = &prompt[i + CLOSE.len()..];
        rest.strip_prefix("\n\n").unwrap_or(rest)
    })
}

/// Wraps with the embedded persona library.
pub fn wrap_icp(prompt: &str, emotion: Emotion, intensity: Intensity) -> Result<String, GatewayError> {
    IcpLibrary::standard().wrap(prompt, emotion, intensity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const Q: &str = "Option 1: Receive $20 for certain.\nOption 2: Lottery: 40% chance of winning $53, otherwise $0.";

    #[test]
    fn high_anger_uses_highly() {
        let w = wrap_icp(Q, Emotion::Anger, Intensity::High).unwrap();
        assert!(w.contains("highly feeling anger"));
        assert!(w.ends_with(Q));
        assert_eq!(w.matches(OPEN).count(), 1);
    }

    #[test]
    fn medium_uses_bare_verb() {
        let w = wrap_icp(Q, Emotion::Fear, Intensity::Medium).unwrap();
        assert!(w.contains("you are feeling fear."));
        assert_eq!(w.matches(OPEN).count(), 1);
        for i in Intensity::ALL {
            let w = wrap_icp(Q, Emotion::Joy, i).unwrap();
            assert!(w.contains(&format!("{} feeling joy", i.modifier()).trim_start().to_string()));
        }
    }

    #[test]
    fn double_wrap_is_refused() {
        let once = wrap_icp(Q, Emotion::Sadness, Intensity::Low).unwrap();
        assert!(matches!(wrap_icp(&once, Emotion::Sadness, Intensity::Low), Err(GatewayError::AlreadyWrapped)));
    }

    #[test]
    fn exemplars_are_optional() {
        let mut lib = IcpLibrary::standard().clone();
        lib.with_exemplars = false;
        let w = lib.wrap(Q, Emotion::Disgust, Intensity::VeryHigh).unwrap();
        assert!(!w.contains("Things you have said"));
        assert!(w.contains("extremely feeling disgust"));
    }

    proptest! {
        #[test]
        fn task_body_is_untouched(body in "[ -~\n]{0,200}", e in 0usize..5, i in 0usize..5) {
            prop_assume!(!is_wrapped(&body));
            let w = wrap_icp(&body, Emotion::ALL[e], Intensity::ALL[i]).unwrap();
            prop_assert!(w.ends_with(&body));
            let head = &w[..w.len() - body.len()];
            let tail = format!("{CLOSE}\n\n");
            prop_assert!(head.ends_with(&tail));
            prop_assert_eq!(strip_icp(&w), body.as_str());
        }
    }
}

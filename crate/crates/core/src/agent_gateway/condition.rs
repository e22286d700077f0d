//! Steering conditions and their wire form.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::GatewayError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Emotion {
    Anger,
    Fear,
    Sadness,
    Joy,
    Disgust,
}

impl Emotion {
    pub const ALL: [Emotion; 5] = [Emotion::Anger, Emotion::Fear, Emotion::Sadness, Emotion::Joy, Emotion::Disgust];

    pub fn as_str(self) -> &'static str {
        match self {
            Emotion::Anger => "anger",
            Emotion::Fear => "fear",
            Emotion::Sadness => "sadness",
            Emotion::Joy => "joy",
            Emotion::Disgust => "disgust",
        }
    }
}

impl FromStr for Emotion {
    type Err = GatewayError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Emotion::ALL.into_iter().find(|e| e.as_str() == s).ok_or_else(|| GatewayError::UnknownEmotion(s.to_string()))
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Five-level lexical intensity for prompt priming.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Intensity {
    VeryLow,
    Low,
    Medium,
    High,
    VeryHigh,
}

impl Intensity {
    pub const ALL: [Intensity; 5] =
        [Intensity::VeryLow, Intensity::Low, Intensity::Medium, Intensity::High, Intensity::VeryHigh];

    /// Adverb placed before "feeling"; medium uses the bare verb.
    pub fn modifier(self) -> &'static str {
        match self {
            Intensity::VeryLow => "barely",
            Intensity::Low => "slightly",
            Intensity::Medium => "",
            Intensity::High => "highly",
            Intensity::VeryHigh => "extremely",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Intensity::VeryLow => "very_low",
            Intensity::Low => "low",
            Intensity::Medium => "medium",
            Intensity::High => "high",
            Intensity::VeryHigh => "very_high",
        }
    }
}

impl FromStr for Intensity {
    type Err = GatewayError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Intensity::ALL
            .into_iter()
            .find(|i| i.as_str() == s)
            .ok_or_else(|| GatewayError::Invalid(format!("unknown intensity `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    #[default]
    AllNew,
    ThinkingOnly,
}

impl Scope {
    pub fn as_str(self) -> &'static str {
        match self {
            Scope::AllNew => "all_new",
            Scope::ThinkingOnly => "thinking_only",
        }
    }
}

impl FromStr for Scope {
    type Err = GatewayError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all_new" => Ok(Scope::AllNew),
            "thinking_only" => Ok(Scope::ThinkingOnly),
            _ => Err(GatewayError::Invalid(format!("unknown scope `{s}`"))),
        }
    }
}

/// How an agent is steered. Each method carries only its own knobs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum SteeringCondition {
    #[default]
    None,
    Icp {
        emotion: Emotion,
        intensity: Intensity,
    },
    Rls {
        emotion: Emotion,
        beta: f64,
        scope: Scope,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        layers: Option<Vec<u32>>,
    },
}

/// The `steering` extension object sent to representation-steering servers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteeringField {
    pub emotion: Emotion,
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<Vec<u32>>,
    pub scope: Scope,
}

impl SteeringCondition {
    pub fn rls(emotion: Emotion, beta: f64, scope: Scope, layers: Option<Vec<u32>>) -> Result<Self, GatewayError> {
        let cond = SteeringCondition::Rls { emotion, beta, scope, layers };
        cond.validate()?;
        Ok(cond)
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        if let SteeringCondition::Rls { beta, layers, .. } = self {
            if !beta.is_finite() || *beta < 0.0 {
                return Err(GatewayError::Invalid(format!("beta must be finite and >= 0, got {beta}")));
            }
            if layers.as_ref().is_some_and(|l| l.is_empty()) {
                return Err(GatewayError::Invalid("layers must not be empty when given".into()));
            }
        }
        Ok(())
    }

    pub fn emotion(&self) -> Option<Emotion> {
        match self {
            SteeringCondition::None => None,
            SteeringCondition::Icp { emotion, .. } | SteeringCondition::Rls { emotion, .. } => Some(*emotion),
        }
    }

    pub fn method(&self) -> &'static str {
        match self {
            SteeringCondition::None => "none",
            SteeringCondition::Icp { .. } => "icp",
            SteeringCondition::Rls { .. } => "rls",
        }
    }

    /// Extension object for the request body; only RLS sends one.
    pub fn wire_field(&self) -> Option<SteeringField> {
        match self {
            SteeringCondition::Rls { emotion, beta, scope, layers } => {
                Some(SteeringField { emotion: *emotion, beta: *beta, layers: layers.clone(), scope: *scope })
            }
            _ => None,
        }
    }

    /// Stable short label, used in report rows and file names.
    pub fn label(&self) -> String {
        match self {
            SteeringCondition::None => "none".into(),
            SteeringCondition::Icp { emotion, intensity } => format!("icp:{emotion}:{}", intensity.as_str()),
            SteeringCondition::Rls { emotion, beta, scope, layers } => {
                let mut s = format!("rls:{emotion}:b{beta}:{}", scope.as_str());
                if let Some(l) = layers {
                    let l: Vec<String> = l.iter().map(u32::to_string).collect();
                    s.push_str(&format!(":l{}", l.join("-")));
                }
                s
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn serialization_carries_only_method_fields() {
        let none = serde_json::to_value(SteeringCondition::None).unwrap();
        assert_eq!(none, json!({"method": "none"}));
        let icp = SteeringCondition::Icp { emotion: Emotion::Anger, intensity: Intensity::High };
        assert_eq!(
            serde_json::to_value(&icp).unwrap(),
            json!({"method": "icp", "emotion": "anger", "intensity": "high"})
        );
        let rls = SteeringCondition::rls(Emotion::Fear, 35.0, Scope::AllNew, None).unwrap();
        let v = serde_json::to_value(&rls).unwrap();
        assert_eq!(v, json!({"method": "rls", "emotion": "fear", "beta": 35.0, "scope": "all_new"}));
        let back: SteeringCondition = serde_json::from_value(v).unwrap();
        assert_eq!(back, rls);
    }

    #[test]
    fn wire_field_exact_shape() {
        assert!(SteeringCondition::None.wire_field().is_none());
        let icp = SteeringCondition::Icp { emotion: Emotion::Joy, intensity: Intensity::Low };
        assert!(icp.wire_field().is_none());
        let rls = SteeringCondition::rls(Emotion::Fear, 35.0, Scope::ThinkingOnly, Some(vec![25, 26])).unwrap();
        let v = serde_json::to_value(rls.wire_field().unwrap()).unwrap();
        assert_eq!(v, json!({"emotion": "fear", "beta": 35.0, "layers": [25, 26], "scope": "thinking_only"}));
    }

    #[test]
    fn invalid_rls_knobs_are_rejected() {
        assert!(SteeringCondition::rls(Emotion::Fear, -1.0, Scope::AllNew, None).is_err());
        assert!(SteeringCondition::rls(Emotion::Fear, f64::NAN, Scope::AllNew, None).is_err());
        assert!(SteeringCondition::rls(Emotion::Fear, 1.0, Scope::AllNew, Some(vec![])).is_err());
        assert!(matches!("rage".parse::<Emotion>(), Err(GatewayError::UnknownEmotion(_))));
    }

    #[test]
    fn labels_are_stable() {
        let rls = SteeringCondition::rls(Emotion::Sadness, 8.5, Scope::AllNew, Some(vec![18, 19])).unwrap();
        assert_eq!(rls.label(), "rls:sadness:b8.5:all_new:l18-19");
        let icp = SteeringCondition::Icp { emotion: Emotion::Anger, intensity: Intensity::VeryHigh };
        assert_eq!(icp.label(), "icp:anger:very_high");
    }
}

//! Behavioral choice models: evaluation of the prospect-theory value and
//! weighting functions, and maximum-likelihood / least-squares fitting of
//! the risk, weighting, curvature, loss-aversion and intertemporal models.
//!
//! Everything here is a pure function of its inputs.

mod fit;
mod logistic;
mod optimize;
mod prelec;
mod separation;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fit::{
    fit_loss_logit, fit_prospect_joint, fit_risk_logit, fit_temporal_surface, fit_utility_curvature, IsoContour,
    JointFit, LossFit, LossFitStatus, RiskLogitFit, TemporalFit, UtilityFit, CONTOUR_LEVELS,
};
pub use logistic::{fit_logistic, BinomialRow, LogisticFit};
pub use prelec::{ce_from_ladder, fit_prelec_from_ce, CeEstimate, CeMethod, LadderRung, PrelecFit};
pub use separation::{detect_separation, Separation};

/// Search bounds for the utility curvature exponent.
pub const RHO_BOUNDS: (f64, f64) = (0.05, 5.0);
/// Search bounds for the Prelec curvature.
pub const ALPHA_BOUNDS: (f64, f64) = (0.05, 5.0);
/// Search bounds for the Prelec elevation.
pub const BETA_W_BOUNDS: (f64, f64) = (0.05, 10.0);
/// Search bounds for the choice sensitivity.
pub const TAU_BOUNDS: (f64, f64) = (0.0, 100.0);
/// Gradient-norm stopping tolerance shared by the Newton fitters.
pub const GRAD_TOL: f64 = 1e-8;
/// Iteration cap shared by the fitters.
pub const MAX_ITER: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("domain error: {0}")]
    Domain(String),
}

#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum FitError {
    /// Outcomes are single-class or (quasi-)perfectly separated; the MLE does not exist.
    #[error("separation: {detail}")]
    Separation { detail: String },
    #[error("insufficient points: need {needed}, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("degenerate contour: premium coefficient {bp:.3e} is numerically zero")]
    DegenerateContour { bp: f64 },
    #[error("design is rank deficient: {detail}")]
    RankDeficient { detail: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Non-fatal diagnostics attached to a successful fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "warning", rename_all = "snake_case")]
pub enum FitWarning {
    Boundary { parameter: String, value: f64 },
    Unidentifiable { reason: String },
}

/// A gain-only lottery against a sure amount.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainLottery {
    pub p: f64,
    pub gain: f64,
    pub sure: f64,
}

impl GainLottery {
    pub fn new(p: f64, gain: f64, sure: f64) -> Result<Self, ModelError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(ModelError::Domain(format!("probability {p} outside [0,1]")));
        }
        if !(gain > 0.0 && gain.is_finite()) || !(sure > 0.0 && sure.is_finite()) {
            return Err(ModelError::Domain(format!("gain {gain} and sure amount {sure} must be positive and finite")));
        }
        Ok(Self { p, gain, sure })
    }

    pub fn delta_ev(&self) -> f64 {
        self.p * self.gain - self.sure
    }
}

/// 50/50 gamble paying `gain` or losing `loss`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedGamble {
    pub gain: f64,
    pub loss: f64,
}

impl MixedGamble {
    pub fn new(gain: f64, loss: f64) -> Result<Self, ModelError> {
        if !(gain > 0.0 && loss > 0.0 && gain.is_finite() && loss.is_finite()) {
            return Err(ModelError::Domain(format!("gain {gain} and loss {loss} must be positive")));
        }
        Ok(Self { gain, loss })
    }
}

/// Smaller-sooner versus larger-later pair. Delays are in days.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntertemporalPair {
    pub sooner_amount: f64,
    pub sooner_delay: f64,
    pub later_amount: f64,
    pub later_delay: f64,
}

impl IntertemporalPair {
    pub fn new(sooner_amount: f64, sooner_delay: f64, later_amount: f64, later_delay: f64) -> Result<Self, ModelError> {
        if !(later_amount > sooner_amount && sooner_amount > 0.0) {
            return Err(ModelError::Domain(format!(
                "need later amount {later_amount} > sooner amount {sooner_amount} > 0"
            )));
        }
        if !(later_delay > sooner_delay && sooner_delay >= 0.0) {
            return Err(ModelError::Domain(format!(
                "need later delay {later_delay} > sooner delay {sooner_delay} >= 0"
            )));
        }
        Ok(Self { sooner_amount, sooner_delay, later_amount, later_delay })
    }

    /// Delay difference `t_later - t_sooner` in days.
    pub fn delay(&self) -> f64 {
        self.later_delay - self.sooner_delay
    }

    /// Relative premium `A_later / A_sooner - 1`.
    pub fn premium(&self) -> f64 {
        self.later_amount / self.sooner_amount - 1.0
    }
}

/// Prospect-theory parameters for gain lotteries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProspectParams {
    pub rho: f64,
    pub alpha: f64,
    pub beta_w: f64,
    pub tau: f64,
    pub b: f64,
}

impl Default for ProspectParams {
    /// Risk-neutral, linear weighting, unit sensitivity.
    fn default() -> Self {
        Self { rho: 1.0, alpha: 1.0, beta_w: 1.0, tau: 1.0, b: 0.0 }
    }
}

impl ProspectParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let all = [self.rho, self.alpha, self.beta_w, self.tau, self.b];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::Domain("parameters must be finite".into()));
        }
        if self.rho <= 0.0 || self.alpha <= 0.0 || self.beta_w <= 0.0 {
            return Err(ModelError::Domain("rho, alpha and beta_w must be positive".into()));
        }
        if self.tau < 0.0 {
            return Err(ModelError::Domain("tau must be non-negative".into()));
        }
        Ok(())
    }
}

/// Coefficients of the accept/reject logit for mixed gambles.
///
/// When `lambda_is_proxy` is set the coefficients are absent and `lambda`
/// is the visualization proxy for a single-class response pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossLogitParams {
    pub beta0: Option<f64>,
    pub beta_g: Option<f64>,
    pub beta_l: Option<f64>,
    pub lambda: f64,
    pub lambda_is_proxy: bool,
}

impl LossLogitParams {
    /// Build from coefficients; `lambda = -beta_l / beta_g`.
    pub fn from_coefficients(beta0: f64, beta_g: f64, beta_l: f64) -> Self {
        Self {
            beta0: Some(beta0),
            beta_g: Some(beta_g),
            beta_l: Some(beta_l),
            lambda: -beta_l / beta_g,
            lambda_is_proxy: false,
        }
    }

    /// Acceptance probability for a gamble, when coefficients are present.
    pub fn accept_prob(&self, gamble: MixedGamble) -> Option<f64> {
        match (self.beta0, self.beta_g, self.beta_l) {
            (Some(b0), Some(bg), Some(bl)) => Some(sigmoid(b0 + bg * gamble.gain + bl * gamble.loss)),
            _ => None,
        }
    }

    /// Gain on the 50% acceptance frontier for a given loss.
    pub fn frontier_gain(&self, loss: f64) -> Option<f64> {
        match (self.beta0, self.beta_g, self.beta_l) {
            (Some(b0), Some(bg), Some(bl)) if bg != 0.0 => Some((-b0 - bl * loss) / bg),
            _ if self.lambda_is_proxy => Some(self.lambda * loss),
            _ => None,
        }
    }
}

/// Coefficients of the intertemporal logistic surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemporalParams {
    pub b0: f64,
    pub bd: f64,
    pub bp: f64,
}

impl TemporalParams {
    pub fn later_prob(&self, pair: &IntertemporalPair) -> f64 {
        sigmoid(self.b0 + self.bd * pair.delay() + self.bp * pair.premium())
    }
}

/// Empirical certainty equivalent of a gain lottery.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CePoint {
    pub p: f64,
    pub ce: f64,
    pub gain: f64,
}

impl CePoint {
    pub fn new(p: f64, ce: f64, gain: f64) -> Result<Self, ModelError> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(ModelError::Domain(format!("probability {p} outside (0,1]")));
        }
        if !(gain > 0.0) || !(0.0..=gain).contains(&ce) {
            return Err(ModelError::Domain(format!("need 0 <= ce {ce} <= gain {gain}")));
        }
        Ok(Self { p, ce, gain })
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// `u(x) = x^rho`.
pub fn power_utility(x: f64, rho: f64) -> Result<f64, ModelError> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(ModelError::Domain(format!("utility argument {x} must be non-negative")));
    }
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(ModelError::Domain(format!("exponent {rho} must be positive")));
    }
    Ok(x.powf(rho))
}

/// Prelec weighting `w(p) = exp(-beta (-ln p)^alpha)`, with `w(0) = 0`.
pub fn prelec_weight(p: f64, alpha: f64, beta: f64) -> Result<f64, ModelError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ModelError::Domain(format!("probability {p} outside [0,1]")));
    }
    if !(alpha > 0.0 && beta > 0.0) || !alpha.is_finite() || !beta.is_finite() {
        return Err(ModelError::Domain(format!("alpha {alpha} and beta {beta} must be positive")));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    Ok((-beta * (-p.ln()).powf(alpha)).exp())
}

/// Subjective value difference `w(p) u(G) - u(S)`.
pub fn subjective_difference(lot: &GainLottery, params: &ProspectParams) -> f64 {
    let w = prelec_weight(lot.p, params.alpha, params.beta_w).unwrap_or(f64::NAN);
    w * lot.gain.powf(params.rho) - lot.sure.powf(params.rho)
}

/// Probability of choosing the risky option, `sigma(tau * dU + b)`.
pub fn risky_choice_prob(lot: &GainLottery, params: &ProspectParams) -> f64 {
    sigmoid(params.tau * subjective_difference(lot, params) + params.b)
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn prelec_identity_on_dense_grid() {
        for i in 1..=10_000 {
            let p = i as f64 / 10_000.0;
            let w = prelec_weight(p, 1.0, 1.0).unwrap();
            assert!((w - p).abs() < 1e-12, "p={p} w={w}");
        }
    }

    proptest! {
        #[test]
        fn prelec_monotone_in_p(alpha in 0.05f64..5.0, beta in 0.05f64..10.0) {
            let mut prev = 0.0;
            for i in 0..=1000 {
                let w = prelec_weight(i as f64 / 1000.0, alpha, beta).unwrap();
                prop_assert!(w >= prev);
                prop_assert!((0.0..=1.0).contains(&w));
                prev = w;
            }
        }

        #[test]
        fn risky_prob_monotone_in_gain_and_sure(
            p in 0.01f64..1.0,
            gain in 1.0f64..500.0,
            sure in 1.0f64..500.0,
            bump in 0.0f64..50.0,
            rho in 0.1f64..2.0,
            alpha in 0.1f64..3.0,
            beta_w in 0.1f64..3.0,
            tau in 0.0f64..5.0,
            b in -3.0f64..3.0,
        ) {
            let params = ProspectParams { rho, alpha, beta_w, tau, b };
            let base = GainLottery::new(p, gain, sure).unwrap();
            let more_gain = GainLottery::new(p, gain + bump, sure).unwrap();
            let more_sure = GainLottery::new(p, gain, sure + bump).unwrap();
            prop_assert!(risky_choice_prob(&more_gain, &params) >= risky_choice_prob(&base, &params));
            prop_assert!(risky_choice_prob(&more_sure, &params) <= risky_choice_prob(&base, &params));
        }
    }
}

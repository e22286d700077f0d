//! Certainty-equivalent extraction from sure-amount ladders and the Prelec
//! weighting fit on the resulting points.

use serde::{Deserialize, Serialize};

use super::logistic::{fit_logistic, BinomialRow};
use super::optimize::grid_polish_max;
use super::separation::detect_separation;
use super::{CePoint, FitError, FitWarning, ALPHA_BOUNDS, BETA_W_BOUNDS};

/// Tolerance on `w(1) = 1` before a p = 1 point is flagged.
const CERTAIN_TOL: f64 = 1e-3;

/// Responses at one sure amount of a ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderRung {
    pub sure: f64,
    /// Number of times the sure amount was taken over the lottery.
    pub chose_sure: f64,
    pub trials: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CeMethod {
    /// Unanimous rungs with a single switch: midpoint of the bracketing amounts.
    Midpoint,
    /// 50% crossing of a logistic fit of sure-choice on the sure amount.
    LogisticCrossing,
    /// Linear interpolation where the empirical sure-choice rate crosses 1/2.
    Interpolated,
    /// No switch inside the ladder; the CE is bracketed by a ladder end and 0 or G.
    Censored,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CeEstimate {
    pub point: CePoint,
    pub method: CeMethod,
}

/// Certainty equivalent of the lottery `(p, gain)` from its ladder.
pub fn ce_from_ladder(p: f64, gain: f64, rungs: &[LadderRung]) -> Result<CeEstimate, FitError> {
    if rungs.len() < 2 {
        return Err(FitError::InsufficientPoints { needed: 2, got: rungs.len() });
    }
    let mut rungs = rungs.to_vec();
    rungs.sort_by(|a, b| a.sure.total_cmp(&b.sure));
    if rungs.iter().any(|r| !(r.trials > 0.0) || r.chose_sure < 0.0 || r.chose_sure > r.trials) {
        return Err(FitError::InvalidInput("rung counts out of range".into()));
    }
    let make = |ce: f64, method| {
        CePoint::new(p, ce.clamp(0.0, gain), gain)
            .map(|point| CeEstimate { point, method })
            .map_err(|e| FitError::InvalidInput(e.to_string()))
    };

    let unanimous = rungs.iter().all(|r| r.chose_sure == 0.0 || r.chose_sure == r.trials);
    if unanimous {
        let sure: Vec<bool> = rungs.iter().map(|r| r.chose_sure == r.trials).collect();
        let switches = sure.windows(2).filter(|w| w[0] != w[1]).count();
        let first = rungs[0].sure;
        let last = rungs[rungs.len() - 1].sure;
        match (switches, sure[0]) {
            (0, true) => return make(0.5 * first, CeMethod::Censored),
            (0, false) => return make(0.5 * (last + gain), CeMethod::Censored),
            (1, false) => {
                let k = sure.iter().position(|&s| s).unwrap_or(0);
                return make(0.5 * (rungs[k - 1].sure + rungs[k].sure), CeMethod::Midpoint);
            }
            _ => {}
        }
    }

    let rows: Vec<BinomialRow> = rungs.iter().map(|r| BinomialRow::new(vec![r.sure], r.chose_sure, r.trials)).collect();
    if !detect_separation(&rows).is_separated() {
        if let Ok(fit) = fit_logistic(&rows) {
            let (b0, b1) = (fit.coef[0], fit.coef[1]);
            let ce = -b0 / b1;
            if b1 > 0.0 && (0.0..=gain).contains(&ce) {
                return make(ce, CeMethod::LogisticCrossing);
            }
        }
    }
    let rate: Vec<f64> = rungs.iter().map(|r| r.chose_sure / r.trials).collect();
    for k in 1..rungs.len() {
        if rate[k - 1] < 0.5 && rate[k] >= 0.5 {
            let t = (0.5 - rate[k - 1]) / (rate[k] - rate[k - 1]);
            return make(rungs[k - 1].sure + t * (rungs[k].sure - rungs[k - 1].sure), CeMethod::Interpolated);
        }
    }
    if rate[0] >= 0.5 {
        make(0.5 * rungs[0].sure, CeMethod::Censored)
    } else {
        make(0.5 * (rungs[rungs.len() - 1].sure + gain), CeMethod::Censored)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrelecFit {
    pub alpha: f64,
    pub beta_w: f64,
    /// Residual sum of squares in log-weight space.
    pub rss: f64,
    pub n_used: usize,
    /// Points dropped because their implied weight is 0 or 1 with p < 1.
    pub excluded: Vec<CePoint>,
    /// p = 1 points that violate `ce = G` beyond tolerance.
    pub outliers: Vec<CePoint>,
    pub warnings: Vec<FitWarning>,
}

/// Least-squares Prelec fit: minimizes `sum (ln w(p) - ln w_hat)^2` where
/// `w_hat = u(ce) / u(G)` under power utility with exponent `rho`.
pub fn fit_prelec_from_ce(points: &[CePoint], rho: f64) -> Result<PrelecFit, FitError> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(FitError::InvalidInput(format!("rho {rho} must be positive")));
    }
    let mut xs = Vec::new();
    let mut ls = Vec::new();
    let mut excluded = Vec::new();
    let mut outliers = Vec::new();
    for pt in points {
        let w_hat = (pt.ce / pt.gain).powf(rho);
        if pt.p >= 1.0 {
            if (w_hat - 1.0).abs() > CERTAIN_TOL {
                outliers.push(*pt);
            }
            continue;
        }
        if !(w_hat > 0.0 && w_hat < 1.0) {
            excluded.push(*pt);
            continue;
        }
        xs.push(-pt.p.ln());
        ls.push(-w_hat.ln());
    }
    let mut distinct: Vec<u64> = xs.iter().map(|x| x.to_bits()).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(FitError::InsufficientPoints { needed: 3, got: distinct.len() });
    }

    // For fixed alpha the optimal beta is closed form.
    let beta_for = |alpha: f64| {
        let num: f64 = xs.iter().zip(&ls).map(|(x, l)| x.powf(alpha) * l).sum();
        let den: f64 = xs.iter().map(|x| x.powf(2.0 * alpha)).sum();
        (num / den).clamp(BETA_W_BOUNDS.0, BETA_W_BOUNDS.1)
    };
    let rss_at = |alpha: f64| {
        let beta = beta_for(alpha);
        xs.iter().zip(&ls).map(|(x, l)| (beta * x.powf(alpha) - l).powi(2)).sum::<f64>()
    };
    let (alpha, neg_rss) = grid_polish_max(|a| -rss_at(a), ALPHA_BOUNDS.0, ALPHA_BOUNDS.1, 64, 8);
    let beta_w = beta_for(alpha);
    let rss = -neg_rss;
    if !(alpha.is_finite() && beta_w.is_finite() && rss.is_finite()) {
        return Err(FitError::NonConvergence { iterations: 0, residual: rss });
    }
    let mut warnings = Vec::new();
    for (name, v, (lo, hi)) in [("alpha", alpha, ALPHA_BOUNDS), ("beta_w", beta_w, BETA_W_BOUNDS)] {
        if (v - lo).abs() < 1e-6 * (1.0 + lo) || (v - hi).abs() < 1e-6 * (1.0 + hi) {
            warnings.push(FitWarning::Boundary { parameter: name.into(), value: v });
        }
    }
    Ok(PrelecFit { alpha, beta_w, rss, n_used: xs.len(), excluded, outliers, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choice_models::prelec_weight;
    use approx::assert_abs_diff_eq;

    fn ce_points(alpha: f64, beta: f64) -> Vec<CePoint> {
        [0.05, 0.1, 0.25, 0.4, 0.5, 0.6, 0.75, 0.9, 0.95]
            .iter()
            .map(|&p| CePoint::new(p, 100.0 * prelec_weight(p, alpha, beta).unwrap(), 100.0).unwrap())
            .collect()
    }

    #[test]
    fn linear_weighting_recovered() {
        let fit = fit_prelec_from_ce(&ce_points(1.0, 1.0), 1.0).unwrap();
        assert_abs_diff_eq!(fit.alpha, 1.0, epsilon = 1e-4);
        assert_abs_diff_eq!(fit.beta_w, 1.0, epsilon = 1e-4);
    }

    #[test]
    fn inverse_s_recovered_noiseless() {
        let fit = fit_prelec_from_ce(&ce_points(0.65, 1.2), 1.0).unwrap();
        assert_abs_diff_eq!(fit.alpha, 0.65, epsilon = 1e-3);
        assert_abs_diff_eq!(fit.beta_w, 1.2, epsilon = 1e-3);
        assert!(fit.rss < 1e-12);
    }

    #[test]
    fn curved_utility_is_undone_before_fitting() {
        // u(ce) = w(p) u(G) with rho = 0.5 means ce = w^2 G.
        let pts: Vec<CePoint> = [0.1, 0.3, 0.5, 0.7, 0.9]
            .iter()
            .map(|&p| {
                let w = prelec_weight(p, 0.8, 0.9).unwrap();
                CePoint::new(p, 50.0 * w * w, 50.0).unwrap()
            })
            .collect();
        let fit = fit_prelec_from_ce(&pts, 0.5).unwrap();
        assert_abs_diff_eq!(fit.alpha, 0.8, epsilon = 1e-4);
        assert_abs_diff_eq!(fit.beta_w, 0.9, epsilon = 1e-4);
    }

    #[test]
    fn certain_point_checked_not_fitted() {
        let mut pts = ce_points(1.0, 1.0);
        pts.push(CePoint::new(1.0, 100.0, 100.0).unwrap());
        let fit = fit_prelec_from_ce(&pts, 1.0).unwrap();
        assert!(fit.outliers.is_empty());
        pts.push(CePoint::new(1.0, 80.0, 100.0).unwrap());
        let fit = fit_prelec_from_ce(&pts, 1.0).unwrap();
        assert_eq!(fit.outliers.len(), 1);
        assert_eq!(fit.n_used, 9);
    }

    #[test]
    fn too_few_points() {
        let pts = &ce_points(1.0, 1.0)[..2];
        assert_eq!(fit_prelec_from_ce(pts, 1.0).unwrap_err(), FitError::InsufficientPoints { needed: 3, got: 2 });
    }

    fn rungs(pattern: &[(f64, f64)], n: f64) -> Vec<LadderRung> {
        pattern.iter().map(|&(s, k)| LadderRung { sure: s, chose_sure: k, trials: n }).collect()
    }

    #[test]
    fn unanimous_single_switch_uses_midpoint() {
        let r = rungs(&[(20.0, 0.0), (30.0, 0.0), (40.0, 5.0), (50.0, 5.0)], 5.0);
        let est = ce_from_ladder(0.4, 100.0, &r).unwrap();
        assert_eq!(est.method, CeMethod::Midpoint);
        assert_eq!(est.point.ce, 35.0);
    }

    #[test]
    fn no_switch_is_censored() {
        let r = rungs(&[(20.0, 3.0), (30.0, 3.0)], 3.0);
        let est = ce_from_ladder(0.1, 100.0, &r).unwrap();
        assert_eq!(est.method, CeMethod::Censored);
        assert_eq!(est.point.ce, 10.0);
    }

    #[test]
    fn noisy_ladder_uses_logistic_crossing() {
        let r = rungs(&[(20.0, 1.0), (30.0, 3.0), (40.0, 7.0), (50.0, 9.0)], 10.0);
        let est = ce_from_ladder(0.35, 100.0, &r).unwrap();
        assert_eq!(est.method, CeMethod::LogisticCrossing);
        // Symmetric rates about 35.
        assert_abs_diff_eq!(est.point.ce, 35.0, epsilon = 1e-6);
    }

    #[test]
    fn non_monotone_unanimous_ladder_falls_back() {
        let r = rungs(&[(20.0, 0.0), (30.0, 1.0), (40.0, 0.0), (50.0, 1.0)], 1.0);
        let est = ce_from_ladder(0.35, 100.0, &r).unwrap();
        assert_ne!(est.method, CeMethod::Midpoint);
        assert!((0.0..=100.0).contains(&est.point.ce));
    }
}

//! Effect sizes, intervals, tests and random-effects pooling.

pub mod special;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use special::{beta_quantile, normal_two_sided, student_t_quantile, student_t_two_sided};

/// Normal quantile used for every 95% effect-size interval.
pub const Z95: f64 = 1.96;

#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum StatsError {
    #[error("zero pooled variance")]
    ZeroVariance,
    #[error("no effects to pool")]
    Empty,
    #[error("sample too short: need {needed}, got {got}")]
    ShortSample { needed: usize, got: usize },
    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),
    #[error("domain error: {0}")]
    Domain(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EffectLabel {
    pub domain: String,
    pub emotion: String,
    pub method: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectSize {
    pub g: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n1: usize,
    pub n2: usize,
    pub label: EffectLabel,
}

impl EffectSize {
    pub fn with_label(mut self, label: EffectLabel) -> Self {
        self.label = label;
        self
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Hedges' bias-corrected standardized mean difference of `a` over `b`.
pub fn hedges_g(a: &[f64], b: &[f64]) -> Result<EffectSize, StatsError> {
    let (n1, n2) = (a.len(), b.len());
    if n1 < 2 || n2 < 2 {
        return Err(StatsError::ShortSample { needed: 2, got: n1.min(n2) });
    }
    let df = (n1 + n2 - 2) as f64;
    let pooled = (((n1 - 1) as f64 * variance(a) + (n2 - 1) as f64 * variance(b)) / df).sqrt();
    if !(pooled > 0.0) {
        return Err(StatsError::ZeroVariance);
    }
    let d = (mean(a) - mean(b)) / pooled;
    let j = 1.0 - 3.0 / (4.0 * df - 1.0);
    let g = j * d;
    let (f1, f2) = (n1 as f64, n2 as f64);
    let se = ((f1 + f2) / (f1 * f2) + g * g / (2.0 * df)).sqrt();
    Ok(EffectSize { g, se, ci_low: g - Z95 * se, ci_high: g + Z95 * se, n1, n2, label: EffectLabel::default() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaSummary {
    pub pooled_g: f64,
    pub pooled_se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub tau2: f64,
    pub q: f64,
    pub k: usize,
    /// Normalized random-effects weights, in input order.
    pub weights: Vec<f64>,
}

/// Inverse-variance pooling with a given between-effect variance.
pub fn pool_with_tau2(effects: &[EffectSize], tau2: f64) -> Result<MetaSummary, StatsError> {
    if effects.is_empty() {
        return Err(StatsError::Empty);
    }
    if effects.iter().any(|e| !(e.se > 0.0)) {
        return Err(StatsError::Domain("every effect needs se > 0".into()));
    }
    let raw: Vec<f64> = effects.iter().map(|e| 1.0 / (e.se * e.se + tau2)).collect();
    let total: f64 = raw.iter().sum();
    let pooled_g = raw.iter().zip(effects).map(|(w, e)| w * e.g).sum::<f64>() / total;
    let pooled_se = (1.0 / total).sqrt();
    Ok(MetaSummary {
        pooled_g,
        pooled_se,
        ci_low: pooled_g - Z95 * pooled_se,
        ci_high: pooled_g + Z95 * pooled_se,
        tau2,
        q: cochran_q(effects),
        k: effects.len(),
        weights: raw.iter().map(|w| w / total).collect(),
    })
}

fn cochran_q(effects: &[EffectSize]) -> f64 {
    let w: Vec<f64> = effects.iter().map(|e| 1.0 / (e.se * e.se)).collect();
    let sw: f64 = w.iter().sum();
    let fe = w.iter().zip(effects).map(|(w, e)| w * e.g).sum::<f64>() / sw;
    w.iter().zip(effects).map(|(w, e)| w * (e.g - fe).powi(2)).sum()
}

/// DerSimonian-Laird random-effects summary.
pub fn random_effects_meta(effects: &[EffectSize]) -> Result<MetaSummary, StatsError> {
    if effects.is_empty() {
        return Err(StatsError::Empty);
    }
    if effects.iter().any(|e| !(e.se > 0.0)) {
        return Err(StatsError::Domain("every effect needs se > 0".into()));
    }
    let w: Vec<f64> = effects.iter().map(|e| 1.0 / (e.se * e.se)).collect();
    let sw: f64 = w.iter().sum();
    let sw2: f64 = w.iter().map(|x| x * x).sum();
    let q = cochran_q(effects);
    let c = sw - sw2 / sw;
    let k = effects.len() as f64;
    let tau2 = if effects.len() > 1 && c > 1e-12 * sw { ((q - (k - 1.0)) / c).max(0.0) } else { 0.0 };
    pool_with_tau2(effects, tau2)
}

/// Exact binomial interval from Beta quantiles.
pub fn clopper_pearson(k: u64, n: u64, conf: f64) -> Result<(f64, f64), StatsError> {
    if n == 0 || k > n {
        return Err(StatsError::Domain(format!("need 0 <= k <= n and n >= 1, got k={k}, n={n}")));
    }
    if !(conf > 0.0 && conf < 1.0) {
        return Err(StatsError::Domain(format!("confidence {conf} outside (0,1)")));
    }
    let alpha = 1.0 - conf;
    let (kf, nf) = (k as f64, n as f64);
    let lo = if k == 0 { 0.0 } else { beta_quantile(alpha / 2.0, kf, nf - kf + 1.0) };
    let hi = if k == n { 1.0 } else { beta_quantile(1.0 - alpha / 2.0, kf + 1.0, nf - kf) };
    Ok((lo, hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub df: Option<f64>,
    pub p_value: f64,
}

/// Pooled two-proportion z test of `k1/n1` against `k2/n2`.
pub fn two_proportion_z(k1: u64, n1: u64, k2: u64, n2: u64) -> Result<TestResult, StatsError> {
    if n1 == 0 || n2 == 0 || k1 > n1 || k2 > n2 {
        return Err(StatsError::Domain("counts out of range".into()));
    }
    let (p1, p2) = (k1 as f64 / n1 as f64, k2 as f64 / n2 as f64);
    let pooled = (k1 + k2) as f64 / (n1 + n2) as f64;
    let se = (pooled * (1.0 - pooled) * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    if !(se > 0.0) {
        return Err(StatsError::DegenerateVariance("pooled proportion is 0 or 1".into()));
    }
    let z = (p1 - p2) / se;
    Ok(TestResult { statistic: z, df: None, p_value: normal_two_sided(z) })
}

/// Welch two-sample t test with Welch-Satterthwaite degrees of freedom.
pub fn welch_t(a: &[f64], b: &[f64]) -> Result<TestResult, StatsError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(StatsError::ShortSample { needed: 2, got: a.len().min(b.len()) });
    }
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let (v1, v2) = (variance(a) / n1, variance(b) / n2);
    if !(v1 + v2 > 0.0) {
        return Err(StatsError::DegenerateVariance("both samples constant".into()));
    }
    let t = (mean(a) - mean(b)) / (v1 + v2).sqrt();
    let df = (v1 + v2).powi(2) / (v1 * v1 / (n1 - 1.0) + v2 * v2 / (n2 - 1.0));
    Ok(TestResult { statistic: t, df: Some(df), p_value: student_t_two_sided(t, df) })
}

/// One-sample t test of `mean(xs) = mu0`.
pub fn one_sample_t(xs: &[f64], mu0: f64) -> Result<TestResult, StatsError> {
    if xs.len() < 2 {
        return Err(StatsError::ShortSample { needed: 2, got: xs.len() });
    }
    let n = xs.len() as f64;
    let sd = variance(xs).sqrt();
    if !(sd > 0.0) {
        return Err(StatsError::DegenerateVariance("constant sample".into()));
    }
    let t = (mean(xs) - mu0) / (sd / n.sqrt());
    let df = n - 1.0;
    Ok(TestResult { statistic: t, df: Some(df), p_value: student_t_two_sided(t, df) })
}

/// Ranks starting at 1, ties receiving their average rank.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let mut ranks = vec![0.0; xs.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start;
        while end + 1 < idx.len() && xs[idx[end + 1]] == xs[idx[start]] {
            end += 1;
        }
        let avg = (start + end) as f64 / 2.0 + 1.0;
        for &i in &idx[start..=end] {
            ranks[i] = avg;
        }
        start = end + 1;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, StatsError> {
    let (mx, my) = (mean(xs), mean(ys));
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if !(sxx > 0.0 && syy > 0.0) {
        return Err(StatsError::DegenerateVariance("constant input".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman rank correlation.
pub fn spearman_rho(xs: &[f64], ys: &[f64]) -> Result<f64, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::Domain("length mismatch".into()));
    }
    if xs.len() < 2 {
        return Err(StatsError::ShortSample { needed: 2, got: xs.len() });
    }
    pearson(&average_ranks(xs), &average_ranks(ys))
}

/// Least-squares line with what is needed for a mean-response band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OlsLine {
    pub slope: f64,
    pub intercept: f64,
    /// Residual standard error.
    pub sigma: f64,
    pub n: usize,
    pub x_mean: f64,
    pub sxx: f64,
}

impl OlsLine {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }

    /// Confidence band for the mean response at `x`.
    pub fn band(&self, x: f64, conf: f64) -> (f64, f64) {
        let df = self.n as f64 - 2.0;
        let t = student_t_quantile(0.5 + conf / 2.0, df);
        let half = t * self.sigma * (1.0 / self.n as f64 + (x - self.x_mean).powi(2) / self.sxx).sqrt();
        let y = self.predict(x);
        (y - half, y + half)
    }
}

pub fn ols_line(xs: &[f64], ys: &[f64]) -> Result<OlsLine, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::Domain("length mismatch".into()));
    }
    if xs.len() < 3 {
        return Err(StatsError::ShortSample { needed: 3, got: xs.len() });
    }
    let (mx, my) = (mean(xs), mean(ys));
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(StatsError::DegenerateVariance("constant x".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let sigma = (rss / (xs.len() as f64 - 2.0)).sqrt();
    Ok(OlsLine { slope, intercept, sigma, n: xs.len(), x_mean: mx, sxx })
}

/// One row of forest-plot data; the pooled diamond has `is_summary` set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestRow {
    pub domain: String,
    pub emotion: String,
    pub method: String,
    pub g: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub weight: f64,
    pub is_summary: bool,
}

/// Effect rows in input order followed by the pooled diamond row.
pub fn forest_rows(effects: &[EffectSize], meta: &MetaSummary) -> Vec<ForestRow> {
    let mut rows: Vec<ForestRow> = effects
        .iter()
        .zip(&meta.weights)
        .map(|(e, w)| ForestRow {
            domain: e.label.domain.clone(),
            emotion: e.label.emotion.clone(),
            method: e.label.method.clone(),
            g: e.g,
            ci_low: e.ci_low,
            ci_high: e.ci_high,
            weight: *w,
            is_summary: false,
        })
        .collect();
    rows.push(ForestRow {
        domain: "pooled".into(),
        emotion: String::new(),
        method: "random_effects".into(),
        g: meta.pooled_g,
        ci_low: meta.ci_low,
        ci_high: meta.ci_high,
        weight: 1.0,
        is_summary: true,
    });
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn effect(g: f64, se: f64) -> EffectSize {
        EffectSize { g, se, ci_low: g - Z95 * se, ci_high: g + Z95 * se, n1: 10, n2: 10, label: EffectLabel::default() }
    }

    #[test]
    fn hedges_identical_samples_zero() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(hedges_g(&a, &a).unwrap().g, 0.0);
    }

    #[test]
    fn hedges_unit_difference_at_df18() {
        // Two samples of 10 with equal spread, means one pooled SD apart.
        let base: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let sd = variance(&base).sqrt();
        let shifted: Vec<f64> = base.iter().map(|x| x + sd).collect();
        let e = hedges_g(&shifted, &base).unwrap();
        assert_abs_diff_eq!(e.g, 0.957_746_478_873_239_4, epsilon = 1e-12);
        assert!(e.ci_low <= e.g && e.g <= e.ci_high);
    }

    #[test]
    fn hedges_constant_groups_error() {
        assert_eq!(hedges_g(&[2.0, 2.0], &[2.0, 2.0, 2.0]), Err(StatsError::ZeroVariance));
    }

    #[test]
    fn meta_two_effect_fixture() {
        let m = random_effects_meta(&[effect(0.2, 0.1), effect(0.8, 0.1)]).unwrap();
        assert_abs_diff_eq!(m.q, 18.0, epsilon = 1e-9);
        assert_abs_diff_eq!(m.tau2, 0.17, epsilon = 1e-9);
        assert_abs_diff_eq!(m.pooled_g, 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(m.pooled_se, 0.3, epsilon = 1e-9);
    }

    #[test]
    fn meta_single_and_homogeneous() {
        let m = random_effects_meta(&[effect(0.4, 0.2)]).unwrap();
        assert_abs_diff_eq!(m.pooled_g, 0.4, epsilon = 1e-15);
        assert_eq!(m.tau2, 0.0);
        let m = random_effects_meta(&[effect(0.4, 0.2), effect(0.4, 0.2), effect(0.4, 0.2)]).unwrap();
        assert_eq!(m.tau2, 0.0);
        assert_abs_diff_eq!(m.pooled_g, 0.4, epsilon = 1e-15);
        assert_eq!(random_effects_meta(&[]), Err(StatsError::Empty));
    }

    #[test]
    fn clopper_pearson_examples() {
        let (lo, hi) = clopper_pearson(0, 10, 0.95).unwrap();
        assert_eq!(lo, 0.0);
        assert_abs_diff_eq!(hi, 0.308_497_107_818_760_8, epsilon = 1e-12);
        let (lo, hi) = clopper_pearson(10, 10, 0.95).unwrap();
        assert_abs_diff_eq!(lo, 1.0 - 0.308_497_107_818_760_8, epsilon = 1e-12);
        assert_eq!(hi, 1.0);
        let (lo, hi) = clopper_pearson(5, 10, 0.95).unwrap();
        assert_abs_diff_eq!(lo, 0.187_086_028_447_398_55, epsilon = 1e-10);
        assert_abs_diff_eq!(hi, 0.812_913_971_552_601_5, epsilon = 1e-10);
        assert_abs_diff_eq!(lo + hi, 1.0, epsilon = 1e-12);
        assert!(clopper_pearson(11, 10, 0.95).is_err());
    }

    #[test]
    fn two_proportion_reference() {
        let r = two_proportion_z(12, 40, 20, 45).unwrap();
        assert_abs_diff_eq!(r.statistic, -1.371_935_311_504_074_4, epsilon = 1e-9);
        assert_abs_diff_eq!(r.p_value, 0.170_083_576_534_586_06, epsilon = 1e-9);
        assert_eq!(two_proportion_z(5, 10, 10, 20).unwrap().statistic, 0.0);
    }

    #[test]
    fn welch_reference() {
        let a = [2.1, 3.4, 1.9, 5.6, 4.4, 3.3, 2.8];
        let b = [1.2, 0.8, 2.5, 1.9, 1.1, 0.4, 2.2, 1.6, 0.9];
        let r = welch_t(&a, &b).unwrap();
        assert_abs_diff_eq!(r.statistic, 3.601_869_642_380_463_3, epsilon = 1e-9);
        assert_abs_diff_eq!(r.df.unwrap(), 8.654_775_459_463_346, epsilon = 1e-9);
        assert_abs_diff_eq!(r.p_value, 0.006_111_697_637_434_243_5, epsilon = 1e-9);
    }

    #[test]
    fn one_sample_reference() {
        let d = [0.5, 1.2, -0.3, 0.8, 1.1, 0.2, 0.9, 0.4];
        let r = one_sample_t(&d, 0.0).unwrap();
        assert_abs_diff_eq!(r.statistic, 3.384_456_448_906_598, epsilon = 1e-9);
        assert_abs_diff_eq!(r.p_value, 0.011_687_431_638_318_05, epsilon = 1e-9);
    }

    #[test]
    fn spearman_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(spearman_rho(&x, &[10.0, 20.0, 30.0, 40.0]).unwrap(), 1.0);
        assert_eq!(spearman_rho(&x, &[4.0, 3.0, 2.0, 1.0]).unwrap(), -1.0);
        let r = spearman_rho(&[1.0, 2.0, 2.0, 3.0, 5.0], &[3.0, 1.0, 4.0, 4.0, 9.0]).unwrap();
        assert_abs_diff_eq!(r, 0.763_157_894_736_842_1, epsilon = 1e-12);
    }

    #[test]
    fn ols_reference_band() {
        let x: Vec<f64> = (1..=8).map(f64::from).collect();
        let y = [2.3, 2.9, 4.1, 4.8, 6.2, 6.8, 8.1, 8.7];
        let line = ols_line(&x, &y).unwrap();
        assert_abs_diff_eq!(line.slope, 0.955_952_380_952_380_8, epsilon = 1e-12);
        assert_abs_diff_eq!(line.intercept, 1.185_714_285_714_285, epsilon = 1e-12);
        let (lo, hi) = line.band(2.5, 0.95);
        assert_abs_diff_eq!(lo, 3.342_481_684_090_892, epsilon = 1e-8);
        assert_abs_diff_eq!(hi, 3.808_708_792_099_582, epsilon = 1e-8);
        let (lo, hi) = line.band(10.0, 0.95);
        assert_abs_diff_eq!(lo, 10.288_559_311_485_63, epsilon = 1e-8);
        assert_abs_diff_eq!(hi, 11.201_916_878_990_55, epsilon = 1e-8);
    }

    #[test]
    fn forest_has_diamond_row() {
        let effects = [effect(0.2, 0.1), effect(0.8, 0.1)];
        let m = random_effects_meta(&effects).unwrap();
        let rows = forest_rows(&effects, &m);
        assert_eq!(rows.len(), 3);
        assert!(rows[2].is_summary);
        assert_abs_diff_eq!(m.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-50.0f64..50.0, 2..30)
    }

    proptest! {
        #[test]
        fn hedges_antisymmetric(a in sample(), b in sample()) {
            if let Ok(ab) = hedges_g(&a, &b) {
                let ba = hedges_g(&b, &a).unwrap();
                prop_assert_eq!(ab.g, -ba.g);
                prop_assert_eq!(ab.se, ba.se);
            }
        }

        #[test]
        fn hedges_affine_invariant(a in sample(), b in sample(), c in 0.1f64..10.0, m in -100.0f64..100.0) {
            if let Ok(base) = hedges_g(&a, &b) {
                let ta: Vec<f64> = a.iter().map(|x| c * x + m).collect();
                let tb: Vec<f64> = b.iter().map(|x| c * x + m).collect();
                let moved = hedges_g(&ta, &tb).unwrap();
                prop_assert!((base.g - moved.g).abs() < 1e-12 * (1.0 + base.g.abs()) * 100.0);
            }
        }

        #[test]
        fn meta_zero_tau_is_fixed_effect(gs in prop::collection::vec((-2.0f64..2.0, 0.05f64..1.0), 1..12)) {
            let effects: Vec<EffectSize> = gs.iter().map(|&(g, se)| EffectSize {
                g, se, ci_low: g, ci_high: g, n1: 5, n2: 5, label: EffectLabel::default(),
            }).collect();
            let m = pool_with_tau2(&effects, 0.0).unwrap();
            let w: Vec<f64> = effects.iter().map(|e| 1.0 / (e.se * e.se)).collect();
            let fe = w.iter().zip(&effects).map(|(w, e)| w * e.g).sum::<f64>() / w.iter().sum::<f64>();
            prop_assert!((m.pooled_g - fe).abs() < 1e-12);
            prop_assert!((m.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(random_effects_meta(&effects).unwrap().tau2 >= 0.0);
        }

        #[test]
        fn clopper_pearson_contains_estimate(n in 1u64..200, frac in 0.0f64..=1.0) {
            let k = ((n as f64) * frac).round() as u64;
            let (lo, hi) = clopper_pearson(k, n, 0.95).unwrap();
            let p = k as f64 / n as f64;
            prop_assert!(lo <= p && p <= hi);
        }

        #[test]
        fn spearman_bounded_and_rank_invariant(pairs in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..40)) {
            let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            if let Ok(r) = spearman_rho(&xs, &ys) {
                prop_assert!((-1.0..=1.0).contains(&r));
                let tx: Vec<f64> = xs.iter().map(|x| x.powi(3) + 2.0 * x).collect();
                let ty: Vec<f64> = ys.iter().map(|y| y.exp()).collect();
                prop_assert!((spearman_rho(&tx, &ty).unwrap() - r).abs() < 1e-12);
            }
        }

        #[test]
        fn tests_antisymmetric_with_valid_p(a in sample(), b in sample(), k1 in 0u64..30, k2 in 0u64..30) {
            if let Ok(ab) = welch_t(&a, &b) {
                let ba = welch_t(&b, &a).unwrap();
                prop_assert_eq!(ab.statistic, -ba.statistic);
                prop_assert!((0.0..=1.0).contains(&ab.p_value));
            }
            if let Ok(z) = two_proportion_z(k1, 30, k2, 30) {
                prop_assert_eq!(z.statistic, -two_proportion_z(k2, 30, k1, 30).unwrap().statistic);
                prop_assert!((0.0..=1.0).contains(&z.p_value));
            }
        }
    }

    #[test]
    fn clopper_pearson_coverage_monte_carlo() {
        let n = 25u64;
        let intervals: Vec<(f64, f64)> = (0..=n).map(|k| clopper_pearson(k, n, 0.95).unwrap()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for p in [0.1, 0.5, 0.9] {
            let draws = 10_000;
            let covered = (0..draws)
                .filter(|_| {
                    let k = (0..n).filter(|_| rng.gen::<f64>() < p).count();
                    let (lo, hi) = intervals[k];
                    lo <= p && p <= hi
                })
                .count();
            assert!(covered as f64 / draws as f64 >= 0.95, "p={p}: {covered}");
        }
    }
}

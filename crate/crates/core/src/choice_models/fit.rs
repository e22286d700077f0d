use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::logistic::{aggregate, fit_logistic, BinomialRow};
use super::optimize::{grid_polish_max, nelder_mead_max};
use super::separation::{design_rank, detect_separation, Separation};
use super::{
    logit, risky_choice_prob, FitError, FitWarning, GainLottery, IntertemporalPair, LossLogitParams, MixedGamble,
    ProspectParams, TemporalParams, ALPHA_BOUNDS, BETA_W_BOUNDS, MAX_ITER, RHO_BOUNDS, TAU_BOUNDS,
};

/// Probability levels of the reported temporal iso-contours.
pub const CONTOUR_LEVELS: [f64; 3] = [0.25, 0.5, 0.75];

/// Multiplier applied to the extreme gain/loss ratio for single-class loss data.
const PROXY_SLACK: f64 = 1.05;

fn separation_error(sep: &Separation) -> FitError {
    let detail = match sep {
        Separation::SingleClass { positive: true } => "all outcomes positive".to_string(),
        Separation::SingleClass { positive: false } => "all outcomes negative".to_string(),
        Separation::Complete { direction } => format!("complete separation along {direction:?}"),
        Separation::Quasi { direction } => format!("quasi-complete separation along {direction:?}"),
        Separation::None => "none".to_string(),
    };
    FitError::Separation { detail }
}

fn distinct(values: impl Iterator<Item = f64>) -> usize {
    let mut bits: Vec<u64> = values.map(f64::to_bits).collect();
    bits.sort_unstable();
    bits.dedup();
    bits.len()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskLogitFit {
    pub tau: f64,
    pub b: f64,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    pub n_trials: usize,
    pub warnings: Vec<FitWarning>,
}

/// ML fit of `P(risky) = sigma(tau * dEV + b)` on `(dEV, chose_risky)` trials.
pub fn fit_risk_logit(trials: &[(f64, bool)]) -> Result<RiskLogitFit, FitError> {
    let rows = aggregate(trials.iter().map(|&(dev, y)| (vec![dev], y)));
    let n_x = rows.len();
    if n_x < 2 {
        return Err(FitError::InsufficientPoints { needed: 2, got: n_x });
    }
    let sep = detect_separation(&rows);
    if sep.is_separated() {
        return Err(separation_error(&sep));
    }
    let fit = fit_logistic(&rows)?;
    let (mut b, mut tau) = (fit.coef[0], fit.coef[1]);
    let mut ll = fit.log_likelihood;
    let mut warnings = Vec::new();
    if !(TAU_BOUNDS.0..=TAU_BOUNDS.1).contains(&tau) {
        tau = tau.clamp(TAU_BOUNDS.0, TAU_BOUNDS.1);
        warnings.push(FitWarning::Boundary { parameter: "tau".into(), value: tau });
        let offset_rows: Vec<BinomialRow> =
            rows.iter().map(|r| BinomialRow { x: vec![], offset: tau * r.x[0], ..r.clone() }).collect();
        let refit = fit_logistic(&offset_rows)?;
        b = refit.coef[0];
        ll = refit.log_likelihood;
    }
    Ok(RiskLogitFit {
        tau,
        b,
        log_likelihood: ll,
        iterations: fit.iterations,
        grad_norm: fit.grad_norm,
        n_trials: trials.len(),
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityFit {
    pub rho: f64,
    pub tau: f64,
    pub b: f64,
    pub log_likelihood: f64,
    pub n_trials: usize,
    pub warnings: Vec<FitWarning>,
}

fn utility_rows(trials: &[(GainLottery, bool)], rho: f64) -> Vec<BinomialRow> {
    aggregate(trials.iter().map(|(lot, y)| (vec![lot.p * lot.gain.powf(rho) - lot.sure.powf(rho)], *y)))
}

/// Profile ML fit of `(rho, tau, b)` with linear probability weighting.
///
/// Values of `rho` at which the transformed design is separated have no
/// finite MLE and are skipped by the profile search.
pub fn fit_utility_curvature(trials: &[(GainLottery, bool)]) -> Result<UtilityFit, FitError> {
    let at_one = utility_rows(trials, 1.0);
    if at_one.len() < 2 {
        return Err(FitError::InsufficientPoints { needed: 2, got: at_one.len() });
    }
    if let sep @ Separation::SingleClass { .. } = detect_separation(&at_one) {
        return Err(separation_error(&sep));
    }
    let profile = |rho: f64| -> f64 {
        let rows = utility_rows(trials, rho);
        if detect_separation(&rows).is_separated() {
            return f64::NEG_INFINITY;
        }
        match fit_logistic(&rows) {
            Ok(fit) if fit.coef[1] >= TAU_BOUNDS.0 && fit.coef[1] <= TAU_BOUNDS.1 => fit.log_likelihood,
            _ => f64::NEG_INFINITY,
        }
    };
    let (rho, ll) = grid_polish_max(profile, RHO_BOUNDS.0, RHO_BOUNDS.1, 64, 8);
    if !ll.is_finite() {
        return Err(separation_error(&detect_separation(&at_one)));
    }
    let fit = fit_logistic(&utility_rows(trials, rho))?;
    let mut warnings = Vec::new();
    let stake_pairs = {
        let mut v: Vec<(u64, u64)> = trials.iter().map(|(l, _)| (l.sure.to_bits(), l.gain.to_bits())).collect();
        v.sort_unstable();
        v.dedup();
        v.len()
    };
    if stake_pairs < 2 {
        warnings.push(FitWarning::Unidentifiable {
            reason: format!("{stake_pairs} distinct (S, G) pair(s); curvature needs stake variation"),
        });
    }
    let span = RHO_BOUNDS.1 / RHO_BOUNDS.0;
    if (rho / RHO_BOUNDS.0).ln() < 1e-6 * span.ln() || (RHO_BOUNDS.1 / rho).ln() < 1e-6 * span.ln() {
        warnings.push(FitWarning::Boundary { parameter: "rho".into(), value: rho });
    }
    Ok(UtilityFit {
        rho,
        tau: fit.coef[1],
        b: fit.coef[0],
        log_likelihood: fit.log_likelihood,
        n_trials: trials.len(),
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossFitStatus {
    /// Finite maximum-likelihood estimate.
    Mle,
    /// Classes separate strictly; coefficients give the maximum-margin
    /// frontier, scaled to `beta_g = 1`.
    Separated,
    /// Classes separate with ties on the boundary; a weak separator, scaled to `beta_g = 1`.
    QuasiSeparated,
    /// Every gamble rejected; `lambda` is the visualization proxy.
    ProxyAllReject,
    /// Every gamble accepted; `lambda` is the mirrored proxy.
    ProxyAllAccept,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossFit {
    pub params: LossLogitParams,
    pub status: LossFitStatus,
    pub log_likelihood: Option<f64>,
    pub n_trials: usize,
    pub warnings: Vec<FitWarning>,
}

impl LossFit {
    /// Gain on the 50% frontier at loss `l`.
    pub fn frontier(&self, l: f64) -> Option<f64> {
        self.params.frontier_gain(l)
    }
}

/// Squared distance from `q` to segment `ab` and the nearest point on it.
fn point_segment(q: [f64; 2], a: [f64; 2], b: [f64; 2]) -> (f64, [f64; 2]) {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 { (((q[0] - a[0]) * ab[0] + (q[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0) } else { 0.0 };
    let c = [a[0] + t * ab[0], a[1] + t * ab[1]];
    ((q[0] - c[0]).powi(2) + (q[1] - c[1]).powi(2), c)
}

/// Nearest pair between the convex hulls of two planar point sets: the
/// minimum over every point of one set against every segment of the other.
fn nearest_hull_points(a: &[[f64; 2]], b: &[[f64; 2]]) -> ([f64; 2], [f64; 2]) {
    let mut best = (f64::INFINITY, a[0], b[0]);
    let mut scan = |pts: &[[f64; 2]], other: &[[f64; 2]], swap: bool| {
        for &q in pts {
            for i in 0..other.len() {
                for j in i..other.len() {
                    let (d, c) = point_segment(q, other[i], other[j]);
                    if d < best.0 {
                        best = if swap { (d, c, q) } else { (d, q, c) };
                    }
                }
            }
        }
    };
    scan(a, b, false);
    scan(b, a, true);
    (best.1, best.2)
}

/// Logistic fit of `P(accept) = sigma(b0 + bG G + bL L)` with `lambda = -bL/bG`.
///
/// Single-class data produce a proxy lambda; separable data produce the
/// separating frontier instead of diverging coefficients.
pub fn fit_loss_logit(trials: &[(MixedGamble, bool)]) -> Result<LossFit, FitError> {
    if trials.is_empty() {
        return Err(FitError::InsufficientPoints { needed: 1, got: 0 });
    }
    let n_trials = trials.len();
    let ratios = trials.iter().map(|(g, _)| g.gain / g.loss);
    let accepted = trials.iter().filter(|(_, y)| *y).count();
    let proxy = |lambda: f64, status| LossFit {
        params: LossLogitParams { beta0: None, beta_g: None, beta_l: None, lambda, lambda_is_proxy: true },
        status,
        log_likelihood: None,
        n_trials,
        warnings: Vec::new(),
    };
    if accepted == 0 {
        let max = ratios.fold(f64::NEG_INFINITY, f64::max);
        return Ok(proxy(PROXY_SLACK * max, LossFitStatus::ProxyAllReject));
    }
    if accepted == n_trials {
        let min = ratios.fold(f64::INFINITY, f64::min);
        return Ok(proxy(min / PROXY_SLACK, LossFitStatus::ProxyAllAccept));
    }

    let rows = aggregate(trials.iter().map(|(g, y)| (vec![g.gain, g.loss], *y)));
    if design_rank(&rows) < 3 {
        return Err(FitError::RankDeficient { detail: "gain and loss must vary independently".into() });
    }
    let from_direction = |c: &[f64], status| -> Result<LossFit, FitError> {
        if !(c[1] > 0.0) {
            return Err(FitError::Separation {
                detail: format!("separating direction {c:?} has non-positive gain weight"),
            });
        }
        Ok(LossFit {
            params: LossLogitParams::from_coefficients(c[0] / c[1], 1.0, c[2] / c[1]),
            status,
            log_likelihood: None,
            n_trials,
            warnings: Vec::new(),
        })
    };
    match detect_separation(&rows) {
        Separation::Complete { .. } => {
            let acc: Vec<[f64; 2]> = rows.iter().filter(|r| r.successes > 0.0).map(|r| [r.x[0], r.x[1]]).collect();
            let rej: Vec<[f64; 2]> = rows.iter().filter(|r| r.trials > r.successes).map(|r| [r.x[0], r.x[1]]).collect();
            let (pa, pr) = nearest_hull_points(&acc, &rej);
            let w = [pa[0] - pr[0], pa[1] - pr[1]];
            let mid = [0.5 * (pa[0] + pr[0]), 0.5 * (pa[1] + pr[1])];
            let c = [-(w[0] * mid[0] + w[1] * mid[1]), w[0], w[1]];
            from_direction(&c, LossFitStatus::Separated)
        }
        Separation::Quasi { direction } => from_direction(&direction, LossFitStatus::QuasiSeparated),
        Separation::SingleClass { .. } => unreachable!("both classes checked above"),
        Separation::None => {
            let fit = fit_logistic(&rows)?;
            let (b0, bg, bl) = (fit.coef[0], fit.coef[1], fit.coef[2]);
            let mut warnings = Vec::new();
            if !(bg > 0.0) {
                warnings.push(FitWarning::Unidentifiable {
                    reason: format!("gain coefficient {bg:.4} is not positive; lambda is not interpretable"),
                });
            }
            Ok(LossFit {
                params: LossLogitParams::from_coefficients(b0, bg, bl),
                status: LossFitStatus::Mle,
                log_likelihood: Some(fit.log_likelihood),
                n_trials,
                warnings,
            })
        }
    }
}

/// Iso-probability line `r(d) = intercept + slope * d` of the temporal surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsoContour {
    pub level: f64,
    pub intercept: f64,
    pub slope: f64,
}

impl IsoContour {
    pub fn premium_at(&self, delay: f64) -> f64 {
        self.intercept + self.slope * delay
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalFit {
    pub params: TemporalParams,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub n_trials: usize,
    pub contours: Vec<IsoContour>,
}

impl TemporalParams {
    /// Contour `r(d) = (logit(level) - b0 - bd d) / bp`.
    pub fn contour(&self, level: f64) -> Result<IsoContour, FitError> {
        if self.bp.abs() < 1e-8 {
            return Err(FitError::DegenerateContour { bp: self.bp });
        }
        Ok(IsoContour { level, intercept: (logit(level) - self.b0) / self.bp, slope: -self.bd / self.bp })
    }
}

/// ML fit of `P(later) = sigma(b0 + bd d + bp r)`.
pub fn fit_temporal_surface(trials: &[(IntertemporalPair, bool)]) -> Result<TemporalFit, FitError> {
    let rows = aggregate(trials.iter().map(|(pair, y)| (vec![pair.delay(), pair.premium()], *y)));
    let nd = distinct(rows.iter().map(|r| r.x[0]));
    let nr = distinct(rows.iter().map(|r| r.x[1]));
    if nd < 2 || nr < 2 {
        return Err(FitError::InsufficientPoints { needed: 2, got: nd.min(nr) });
    }
    let sep = detect_separation(&rows);
    if sep.is_separated() {
        return Err(separation_error(&sep));
    }
    if design_rank(&rows) < 3 {
        return Err(FitError::RankDeficient { detail: "delay and premium are collinear".into() });
    }
    let fit = fit_logistic(&rows)?;
    let params = TemporalParams { b0: fit.coef[0], bd: fit.coef[1], bp: fit.coef[2] };
    let contours = CONTOUR_LEVELS.iter().map(|&l| params.contour(l)).collect::<Result<_, _>>()?;
    Ok(TemporalFit {
        params,
        log_likelihood: fit.log_likelihood,
        iterations: fit.iterations,
        n_trials: trials.len(),
        contours,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointFit {
    pub params: ProspectParams,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub warnings: Vec<FitWarning>,
}

fn joint_log_likelihood(trials: &[(GainLottery, bool)], params: &ProspectParams) -> f64 {
    trials
        .iter()
        .map(|(lot, y)| {
            let p = risky_choice_prob(lot, params).clamp(1e-300, 1.0 - 1e-16);
            if *y {
                p.ln()
            } else {
                (1.0 - p).ln()
            }
        })
        .sum()
}

/// Joint ML fit of `(rho, alpha, beta_w, tau, b)` from risky choices.
///
/// Bounded Nelder-Mead from eight starts drawn from `seed`; the first start
/// is the risk-neutral point.
pub fn fit_prospect_joint(trials: &[(GainLottery, bool)], seed: u64) -> Result<JointFit, FitError> {
    let rows = utility_rows(trials, 1.0);
    if rows.len() < 5 {
        return Err(FitError::InsufficientPoints { needed: 5, got: rows.len() });
    }
    if let sep @ Separation::SingleClass { .. } = detect_separation(&rows) {
        return Err(separation_error(&sep));
    }
    const B_BOUNDS: (f64, f64) = (-20.0, 20.0);
    let bounds = [RHO_BOUNDS, ALPHA_BOUNDS, BETA_W_BOUNDS, TAU_BOUNDS, B_BOUNDS];
    let to_params = |v: &[f64]| ProspectParams { rho: v[0], alpha: v[1], beta_w: v[2], tau: v[3], b: v[4] };
    let objective = |v: &[f64]| joint_log_likelihood(trials, &to_params(v));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Vec<f64>, f64, usize)> = None;
    let mut iterations = 0;
    for start in 0..8 {
        let x0: Vec<f64> = if start == 0 {
            vec![1.0, 1.0, 1.0, 0.1, 0.0]
        } else {
            vec![
                rng.gen_range(0.3..1.5),
                rng.gen_range(0.3..1.5),
                rng.gen_range(0.5..2.0),
                rng.gen_range(0.01..1.0),
                rng.gen_range(-1.0..1.0),
            ]
        };
        let (x, ll, it) = nelder_mead_max(objective, &x0, &bounds, 20 * MAX_ITER, 1e-12);
        iterations += it;
        if best.as_ref().map_or(true, |b| ll > b.1) {
            best = Some((x, ll, it));
        }
    }
    let (x, ll, _) = best.expect("at least one start");
    if !ll.is_finite() {
        return Err(FitError::NonConvergence { iterations, residual: ll });
    }
    let names = ["rho", "alpha", "beta_w", "tau", "b"];
    let warnings = x
        .iter()
        .zip(bounds)
        .zip(names)
        .filter(|((v, (lo, hi)), _)| (*v - lo).abs() < 1e-6 || (hi - *v).abs() < 1e-6)
        .map(|((v, _), n)| FitWarning::Boundary { parameter: n.into(), value: *v })
        .collect();
    Ok(JointFit { params: to_params(&x), log_likelihood: ll, iterations, warnings })
}

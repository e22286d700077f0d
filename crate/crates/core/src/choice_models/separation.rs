//! Exact linear-separability test for logistic designs with an intercept
//! and at most two covariates.
//!
//! The set of weakly separating coefficient vectors is the polyhedral cone
//! `{b : z_i . b >= 0}` with `z_i = s_i (1, x_i)` and `s_i = +/-1` by class.
//! For a full-rank design the cone is pointed, so if it is non-trivial it
//! has an extreme ray orthogonal to `dim - 1` of the `z_i`. Enumerating those
//! candidates decides separability exactly.

use serde::{Deserialize, Serialize};

use super::logistic::BinomialRow;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Separation {
    None,
    /// All outcomes in one class.
    SingleClass {
        positive: bool,
    },
    /// A hyperplane strictly separates the classes; `direction` is interior to the separating cone.
    Complete {
        direction: Vec<f64>,
    },
    /// Separation with points on the boundary; `direction` is one weak separator.
    Quasi {
        direction: Vec<f64>,
    },
}

impl Separation {
    pub fn is_separated(&self) -> bool {
        !matches!(self, Separation::None)
    }
}

const TOL: f64 = 1e-10;

/// Signed design points `s_i (1, x_i)`, one per observed class per distinct row.
fn signed_points(rows: &[BinomialRow]) -> Vec<Vec<f64>> {
    let mut pts = Vec::new();
    for r in rows {
        let mut z = Vec::with_capacity(r.x.len() + 1);
        z.push(1.0);
        z.extend_from_slice(&r.x);
        if r.successes > 0.0 {
            pts.push(z.clone());
        }
        if r.trials - r.successes > 0.0 {
            pts.push(z.iter().map(|v| -v).collect());
        }
    }
    pts
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &[f64]) -> Option<Vec<f64>> {
    let n = dot(v, v).sqrt();
    (n > 1e-300).then(|| v.iter().map(|x| x / n).collect())
}

/// Numerical rank of the design `[1, x]`.
pub fn design_rank(rows: &[BinomialRow]) -> usize {
    let Some(first) = rows.first() else { return 0 };
    let dim = first.x.len() + 1;
    let mut m: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            let mut z = vec![1.0];
            z.extend_from_slice(&r.x);
            z
        })
        .collect();
    let scale = m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    let mut rank = 0;
    for col in 0..dim {
        let Some(piv) = (rank..m.len()).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())) else {
            break;
        };
        if m[piv][col].abs() <= 1e-9 * scale {
            continue;
        }
        m.swap(rank, piv);
        for i in 0..m.len() {
            if i != rank {
                let f = m[i][col] / m[rank][col];
                for k in col..dim {
                    m[i][k] -= f * m[rank][k];
                }
            }
        }
        rank += 1;
    }
    rank
}

fn candidates(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let dim = points.first().map_or(0, Vec::len);
    let mut out = Vec::new();
    match dim {
        2 => {
            for z in points {
                if let Some(c) = normalize(&[-z[1], z[0]]) {
                    out.push(c.iter().map(|v| -v).collect());
                    out.push(c);
                }
            }
        }
        3 => {
            for (i, a) in points.iter().enumerate() {
                for b in &points[i + 1..] {
                    let cross = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
                    if let Some(c) = normalize(&cross) {
                        out.push(c.iter().map(|v| -v).collect());
                        out.push(c);
                    }
                }
            }
        }
        _ => {}
    }
    out
}

/// Decide whether the binomial rows are single-class, completely separated,
/// quasi-separated, or overlapping (MLE exists).
///
/// Supports an intercept plus zero, one or two covariates; the design must
/// have full column rank for the two-covariate case.
pub fn detect_separation(rows: &[BinomialRow]) -> Separation {
    let total: f64 = rows.iter().map(|r| r.trials).sum();
    let succ: f64 = rows.iter().map(|r| r.successes).sum();
    if succ <= 0.0 || succ >= total {
        return Separation::SingleClass { positive: succ > 0.0 };
    }
    if rows.first().is_some_and(|r| r.x.len() == 1) {
        return separation_1d(rows);
    }
    let points = signed_points(rows);
    let unit: Vec<Vec<f64>> = points.iter().filter_map(|z| normalize(z)).collect();
    let mut rays: Vec<Vec<f64>> = Vec::new();
    for cand in candidates(&unit) {
        let margins: Vec<f64> = unit.iter().map(|z| dot(z, &cand)).collect();
        let min = margins.iter().copied().fold(f64::INFINITY, f64::min);
        let max = margins.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if min >= -TOL && max > TOL {
            rays.push(cand);
        }
    }
    if rays.is_empty() {
        return Separation::None;
    }
    let dim = rays[0].len();
    let sum: Vec<f64> = (0..dim).map(|k| rays.iter().map(|r| r[k]).sum()).collect();
    if let Some(center) = normalize(&sum) {
        if unit.iter().all(|z| dot(z, &center) > TOL) {
            return Separation::Complete { direction: center };
        }
    }
    // Weak separator that is strict on the most points.
    let best = rays.iter().max_by_key(|r| unit.iter().filter(|z| dot(z, r) > TOL).count()).cloned().unwrap_or_default();
    Separation::Quasi { direction: best }
}

/// One covariate: the classes separate iff their ranges do not overlap.
fn separation_1d(rows: &[BinomialRow]) -> Separation {
    let range = |pick: fn(&BinomialRow) -> bool| {
        rows.iter()
            .filter(|r| pick(r))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.x[0]), hi.max(r.x[0])))
    };
    let (s_lo, s_hi) = range(|r| r.successes > 0.0);
    let (f_lo, f_hi) = range(|r| r.trials - r.successes > 0.0);
    let dir = |mid: f64, sign: f64| normalize(&[-sign * mid, sign]).unwrap_or_default();
    if f_hi < s_lo {
        Separation::Complete { direction: dir(0.5 * (f_hi + s_lo), 1.0) }
    } else if s_hi < f_lo {
        Separation::Complete { direction: dir(0.5 * (s_hi + f_lo), -1.0) }
    } else if f_hi == s_lo && (f_lo < f_hi || s_hi > s_lo) {
        Separation::Quasi { direction: dir(s_lo, 1.0) }
    } else if s_hi == f_lo && (s_lo < s_hi || f_hi > f_lo) {
        Separation::Quasi { direction: dir(f_lo, -1.0) }
    } else {
        Separation::None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows1(data: &[(f64, f64, f64)]) -> Vec<BinomialRow> {
        data.iter().map(|&(x, k, n)| BinomialRow::new(vec![x], k, n)).collect()
    }

    #[test]
    fn single_class_detected() {
        let r = rows1(&[(1.0, 3.0, 3.0), (2.0, 2.0, 2.0)]);
        assert_eq!(detect_separation(&r), Separation::SingleClass { positive: true });
        let r = rows1(&[(1.0, 0.0, 3.0)]);
        assert_eq!(detect_separation(&r), Separation::SingleClass { positive: false });
    }

    #[test]
    fn threshold_data_is_completely_separated() {
        let r = rows1(&[(-2.0, 0.0, 5.0), (-1.0, 0.0, 5.0), (1.0, 5.0, 5.0), (2.0, 5.0, 5.0)]);
        match detect_separation(&r) {
            Separation::Complete { direction } => assert!(direction[1] > 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn shared_boundary_point_is_quasi() {
        let r = rows1(&[(-1.0, 0.0, 5.0), (0.0, 2.0, 5.0), (1.0, 5.0, 5.0)]);
        assert!(matches!(detect_separation(&r), Separation::Quasi { .. }));
    }

    #[test]
    fn overlap_is_not_separated() {
        let r = rows1(&[(-1.0, 1.0, 5.0), (0.0, 2.0, 5.0), (1.0, 4.0, 5.0)]);
        assert_eq!(detect_separation(&r), Separation::None);
    }

    #[test]
    fn two_covariate_line_separation() {
        let mut rows = Vec::new();
        for g in 5..=14 {
            for l in 5..=14 {
                let accept = (g as f64) > 1.5 * l as f64;
                rows.push(BinomialRow::new(vec![g as f64, l as f64], if accept { 1.0 } else { 0.0 }, 1.0));
            }
        }
        assert!(matches!(detect_separation(&rows), Separation::Complete { .. }));
        // Flip one interior cell to create overlap.
        let idx = rows.iter().position(|r| r.x == vec![14.0, 5.0]).unwrap();
        rows[idx].successes = 0.0;
        let idx = rows.iter().position(|r| r.x == vec![5.0, 14.0]).unwrap();
        rows[idx].successes = 1.0;
        assert_eq!(detect_separation(&rows), Separation::None);
    }

    #[test]
    fn rank_of_collinear_design() {
        let rows: Vec<BinomialRow> =
            (0..5).map(|i| BinomialRow::new(vec![i as f64, 2.0 * i as f64], 1.0, 2.0)).collect();
        assert_eq!(design_rank(&rows), 2);
        let rows: Vec<BinomialRow> =
            (0..5).map(|i| BinomialRow::new(vec![i as f64, (i * i) as f64], 1.0, 2.0)).collect();
        assert_eq!(design_rank(&rows), 3);
    }
}

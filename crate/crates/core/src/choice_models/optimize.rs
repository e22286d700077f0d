//! Small deterministic optimizers used by the nonlinear fits.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section maximization of a unimodal function on `[lo, hi]`.
pub(crate) fn golden_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= tol * (1.0 + c.abs()) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let fa = f(a);
    let fb = f(b);
    [(c, fc), (d, fd), (a, fa), (b, fb)]
        .into_iter()
        .filter(|(_, v)| v.is_finite())
        .max_by(|x, y| x.1.total_cmp(&y.1))
        .unwrap_or((c, f64::NEG_INFINITY))
}

/// Scan a log-spaced grid, then polish the best `starts` grid maxima by
/// golden section within their neighbouring grid cells.
pub(crate) fn grid_polish_max<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    grid: usize,
    starts: usize,
) -> (f64, f64) {
    let (llo, lhi) = (lo.ln(), hi.ln());
    let xs: Vec<f64> = (0..grid).map(|i| (llo + (lhi - llo) * i as f64 / (grid - 1) as f64).exp()).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut order: Vec<usize> = (0..grid).filter(|&i| vals[i].is_finite()).collect();
    order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]).then(i.cmp(&j)));
    let mut best = order.first().map_or((xs[0], f64::NEG_INFINITY), |&i| (xs[i], vals[i]));
    for &i in order.iter().take(starts) {
        let a = xs[i.saturating_sub(1)];
        let b = xs[(i + 1).min(grid - 1)];
        let cand = golden_max(&mut f, a, b, 1e-10);
        if cand.1 > best.1 {
            best = cand;
        }
    }
    best
}

/// Nelder-Mead maximization with box constraints enforced by clamping.
///
/// Clamping can flatten the simplex against a bound, so the search restarts
/// from the incumbent with a fresh simplex until a restart stops improving.
pub(crate) fn nelder_mead_max<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    bounds: &[(f64, f64)],
    max_iter: usize,
    tol: f64,
) -> (Vec<f64>, f64, usize) {
    let (mut x, mut fx, mut iters) = nelder_mead_once(&mut f, x0, bounds, max_iter, tol);
    for _ in 0..10 {
        let (x2, f2, it) = nelder_mead_once(&mut f, &x, bounds, max_iter, tol);
        iters += it;
        let gain = f2 - fx;
        if f2 > fx {
            x = x2;
            fx = f2;
        }
        if !(gain > tol * (1.0 + fx.abs())) {
            break;
        }
    }
    (x, fx, iters)
}

fn nelder_mead_once<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    bounds: &[(f64, f64)],
    max_iter: usize,
    tol: f64,
) -> (Vec<f64>, f64, usize) {
    let n = x0.len();
    let clamp = |x: &mut Vec<f64>| {
        for (v, (lo, hi)) in x.iter_mut().zip(bounds) {
            *v = v.clamp(*lo, *hi);
        }
    };
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut v = x0.to_vec();
        let span = (bounds[i].1 - bounds[i].0).min(1e6);
        v[i] += if v[i] + 0.1 * span <= bounds[i].1 { 0.1 * span } else { -0.1 * span };
        clamp(&mut v);
        simplex.push(v);
    }
    // Minimize the negative objective; non-finite values rank last.
    let mut eval = |x: &[f64]| {
        let v = -f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut vals: Vec<f64> = simplex.iter().map(|x| eval(x)).collect();
    let mut iters = 0;
    while iters < max_iter {
        iters += 1;
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
        vals = idx.iter().map(|&i| vals[i]).collect();
        if (vals[n] - vals[0]).abs() <= tol * (1.0 + vals[0].abs()) {
            break;
        }
        let centroid: Vec<f64> = (0..n).map(|k| simplex[..n].iter().map(|v| v[k]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> {
            let mut v: Vec<f64> = (0..n).map(|k| centroid[k] + t * (simplex[n][k] - centroid[k])).collect();
            clamp(&mut v);
            v
        };
        let xr = along(-1.0);
        let fr = eval(&xr);
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = eval(&xe);
            if fe < fr {
                simplex[n] = xe;
                vals[n] = fe;
            } else {
                simplex[n] = xr;
                vals[n] = fr;
            }
        } else if fr < vals[n - 1] {
            simplex[n] = xr;
            vals[n] = fr;
        } else {
            let xc = if fr < vals[n] { along(-0.5) } else { along(0.5) };
            let fc = eval(&xc);
            if fc < vals[n].min(fr) {
                simplex[n] = xc;
                vals[n] = fc;
            } else {
                let best = simplex[0].clone();
                for i in 1..=n {
                    let mut v: Vec<f64> = (0..n).map(|k| best[k] + 0.5 * (simplex[i][k] - best[k])).collect();
                    clamp(&mut v);
                    vals[i] = eval(&v);
                    simplex[i] = v;
                }
            }
        }
    }
    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    (simplex[best].clone(), -vals[best], iters)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, fx) = golden_max(|x| -(x - 1.3).powi(2), 0.0, 5.0, 1e-12);
        assert_abs_diff_eq!(x, 1.3, epsilon = 1e-8);
        assert_abs_diff_eq!(fx, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn grid_polish_escapes_local_peak() {
        // Two bumps; the taller one sits at x = 3.
        let f = |x: f64| (-(x - 0.2).powi(2) / 0.001).exp() + 2.0 * (-(x - 3.0).powi(2) / 0.01).exp();
        let (x, _) = grid_polish_max(f, 0.05, 5.0, 64, 8);
        assert_abs_diff_eq!(x, 3.0, epsilon = 1e-6);
    }

    #[test]
    fn nelder_mead_respects_bounds() {
        let (x, _, _) = nelder_mead_max(
            |v| -((v[0] - 7.0).powi(2) + (v[1] + 1.0).powi(2)),
            &[1.0, 1.0],
            &[(0.0, 5.0), (-3.0, 3.0)],
            2000,
            1e-14,
        );
        assert_abs_diff_eq!(x[0], 5.0, epsilon = 1e-5);
        assert!((x[1] + 1.0).abs() < 1e-4, "{x:?}");
    }
}

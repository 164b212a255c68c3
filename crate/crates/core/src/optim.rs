//! Derivative-free scalar and multivariate solvers used across the crate.
//!
//! Everything here is deterministic: no randomness, no allocation beyond the
//! Nelder-Mead simplex.

use crate::error::{GwError, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Bisection for an increasing function `f` on `[lo, hi]`, returning `t`
/// with `f(t) ≈ target`. Runs until the bracket stops shrinking in floating
/// point or `max_iter` halvings have been made.
pub fn bisect_increasing<F: Fn(f64) -> f64>(
    f: F,
    target: f64,
    mut lo: f64,
    mut hi: f64,
    max_iter: usize,
) -> f64 {
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Regula falsi with the Illinois modification. `f(lo)` and `f(hi)` must
/// have opposite signs.
pub fn false_position<F: Fn(f64) -> f64>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let mut flo = f(lo);
    let mut fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return Err(GwError::NoRoot { lo, hi });
    }
    // 0 = neither, 1 = lo retained last step, 2 = hi retained last step
    let mut side = 0u8;
    let mut x = lo;
    for _ in 0..max_iter {
        x = (lo * fhi - hi * flo) / (fhi - flo);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let fx = f(x);
        if fx == 0.0 || (hi - lo) < tol {
            return Ok(x);
        }
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
            if side == 1 {
                fhi *= 0.5;
            }
            side = 1;
        } else {
            hi = x;
            fhi = fx;
            if side == 2 {
                flo *= 0.5;
            }
            side = 2;
        }
        if fx.abs() < tol * 1e-3 {
            return Ok(x);
        }
    }
    Ok(x)
}

/// Golden-section minimization of a unimodal `f` on `[lo, hi]`.
/// Returns `(argmin, min)`.
pub fn golden_section_min<F: Fn(f64) -> f64>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    iters: usize,
) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if hi - lo <= f64::EPSILON * (lo.abs() + hi.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    // endpoints are candidates too: the minimum may sit on the boundary
    let mut best = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    for x in [lo, hi] {
        let fx = f(x);
        if fx < best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Golden-section maximization; see [`golden_section_min`].
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, iters: usize) -> (f64, f64) {
    let (x, v) = golden_section_min(|t| -f(t), lo, hi, iters);
    (x, -v)
}

/// Minimize over `[lo, hi]` a function that may have several local minima:
/// scan `grid` equispaced points, then refine the best cell by golden section.
pub fn scan_then_golden<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    grid: usize,
    iters: usize,
) -> (f64, f64) {
    let n = grid.max(2);
    let step = (hi - lo) / (n - 1) as f64;
    let mut best_i = 0;
    let mut best_v = f64::INFINITY;
    for i in 0..n {
        let v = f(lo + step * i as f64);
        if v < best_v {
            best_v = v;
            best_i = i;
        }
    }
    let a = lo + step * best_i.saturating_sub(1) as f64;
    let b = (lo + step * (best_i + 1) as f64).min(hi);
    let refined = golden_section_min(&f, a, b, iters);
    if refined.1 <= best_v {
        refined
    } else {
        (lo + step * best_i as f64, best_v)
    }
}

/// Settings for [`nelder_mead`].
#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    pub max_iters: usize,
    /// Initial simplex edge length along each coordinate axis.
    pub step: f64,
    /// Stop when the spread of simplex values falls below this.
    pub f_tol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            step: 0.5,
            f_tol: 1e-13,
        }
    }
}

/// Outcome of a Nelder-Mead run.
#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

/// Adaptive Nelder-Mead (Gao-Han parameters) from `x0`.
///
/// Returns the best vertex seen; the result is never worse than `f(x0)`.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    opts: &NelderMeadOptions,
) -> NelderMeadResult {
    let n = x0.len();
    if n == 0 {
        let v = f(x0);
        return NelderMeadResult {
            x: Vec::new(),
            value: v,
            iterations: 0,
        };
    }
    let nf = n as f64;
    let alpha = 1.0;
    let beta = 1.0 + 2.0 / nf;
    let gamma = 0.75 - 1.0 / (2.0 * nf);
    let delta = 1.0 - 1.0 / nf;

    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut vals: Vec<f64> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    vals.push(sanitize(f(x0)));
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += opts.step;
        vals.push(sanitize(f(&p)));
        pts.push(p);
    }

    let mut order: Vec<usize> = (0..=n).collect();
    let mut centroid = vec![0.0; n];
    let mut xr = vec![0.0; n];
    let mut xe = vec![0.0; n];
    let mut xc = vec![0.0; n];
    let mut iterations = 0;

    while iterations < opts.max_iters {
        iterations += 1;
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
        let best = order[0];
        let worst = order[n];
        let second = order[n - 1];
        if (vals[worst] - vals[best]).abs() <= opts.f_tol * (1.0 + vals[best].abs()) {
            break;
        }

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &k in &order[..n] {
            for (c, x) in centroid.iter_mut().zip(&pts[k]) {
                *c += x;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= nf);

        for j in 0..n {
            xr[j] = centroid[j] + alpha * (centroid[j] - pts[worst][j]);
        }
        let fr = sanitize(f(&xr));

        if fr < vals[best] {
            for j in 0..n {
                xe[j] = centroid[j] + beta * (xr[j] - centroid[j]);
            }
            let fe = sanitize(f(&xe));
            if fe < fr {
                pts[worst].copy_from_slice(&xe);
                vals[worst] = fe;
            } else {
                pts[worst].copy_from_slice(&xr);
                vals[worst] = fr;
            }
            continue;
        }
        if fr < vals[second] {
            pts[worst].copy_from_slice(&xr);
            vals[worst] = fr;
            continue;
        }
        let outside = fr < vals[worst];
        for j in 0..n {
            xc[j] = if outside {
                centroid[j] + gamma * (xr[j] - centroid[j])
            } else {
                centroid[j] - gamma * (centroid[j] - pts[worst][j])
            };
        }
        let fc = sanitize(f(&xc));
        if (outside && fc <= fr) || (!outside && fc < vals[worst]) {
            pts[worst].copy_from_slice(&xc);
            vals[worst] = fc;
            continue;
        }
        // shrink toward best
        let xb = pts[best].clone();
        for &k in &order[1..] {
            for j in 0..n {
                pts[k][j] = xb[j] + delta * (pts[k][j] - xb[j]);
            }
            vals[k] = sanitize(f(&pts[k]));
        }
    }

    let (bi, _) = vals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .expect("simplex is non-empty");
    NelderMeadResult {
        x: pts[bi].clone(),
        value: vals[bi],
        iterations,
    }
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_finds_square_root() {
        let r = bisect_increasing(|t| t * t, 2.0, 0.0, 2.0, 200);
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn false_position_rejects_non_straddling_bracket() {
        let err = false_position(|t| t * t + 1.0, -1.0, 1.0, 1e-12, 100).unwrap_err();
        assert!(matches!(err, GwError::NoRoot { .. }));
    }

    #[test]
    fn false_position_converges_on_cubic() {
        let r = false_position(|t| t * t * t - 2.0 * t - 5.0, 2.0, 3.0, 1e-14, 200).unwrap();
        assert!((r * r * r - 2.0 * r - 5.0).abs() < 1e-11);
    }

    #[test]
    fn golden_section_hits_interior_and_boundary_minima() {
        let (x, v) = golden_section_min(|t| (t - 0.3).powi(2) + 1.0, 0.0, 1.0, 300);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((v - 1.0).abs() < 1e-14);
        let (x, _) = golden_section_min(|t| t, 0.25, 1.0, 300);
        assert_eq!(x, 0.25);
    }

    #[test]
    fn nelder_mead_solves_rosenbrock() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let opts = NelderMeadOptions {
            max_iters: 5000,
            step: 0.5,
            f_tol: 1e-20,
        };
        let res = nelder_mead(rosen, &[-1.2, 1.0], &opts);
        assert!(res.value < 1e-12, "value {}", res.value);
        assert!((res.x[0] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn nelder_mead_never_returns_worse_than_start() {
        let f = |x: &[f64]| x.iter().map(|v| v.sin()).sum::<f64>();
        let x0 = [0.1, -0.4, 2.0];
        let start = f(&x0);
        let res = nelder_mead(f, &x0, &NelderMeadOptions::default());
        assert!(res.value <= start);
    }
}

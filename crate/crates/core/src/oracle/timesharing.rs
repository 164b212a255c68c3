//! Multistart search for the lower convex envelope of the divergence
//! region by time-sharing over at most three components.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{OracleConfig, ACCEPT_TOL, FEASIBLE_TOL};
use crate::error::{check_range, GwError, Result};
use crate::info::{
    binary_entropy_inv, centered_from_gap, dsbs_flat, kl_slices, one_minus_h_centered, Joint2x2,
    LogBase,
};
use crate::ot::q_opt;
use crate::optim::{nelder_mead, NelderMeadOptions};

const COMPONENTS: usize = 3;

/// How the averaged marginal divergences must relate to `(α, β)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Constraint {
    /// `Σ qᵢsᵢ = α`, `Σ qᵢtᵢ = β`: the convex envelope of `φ̲`.
    Equality,
    /// `Σ qᵢsᵢ ≥ α`, `Σ qᵢtᵢ ≥ β`: the convex envelope of `ψ̲`.
    AtLeast,
}

struct Mix {
    weights: [f64; COMPONENTS],
    s: [f64; COMPONENTS],
    t: [f64; COMPONENTS],
    phi: [f64; COMPONENTS],
}

/// Crossover `sin²(x)/2`, which reaches both ends of `[0, 1/2]` at finite
/// `x`.
fn crossover(x: f64) -> f64 {
    0.5 * x.sin().powi(2)
}

fn inv_crossover(a: f64) -> f64 {
    (2.0 * a).clamp(0.0, 1.0).sqrt().asin()
}

fn weights(logits: &[f64]) -> [f64; COMPONENTS] {
    let l = [logits[0], logits[1], 0.0];
    let m = l.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e = l.map(|v| (v - m).exp());
    let total: f64 = e.iter().sum();
    e.map(|v| v / total)
}

/// Marginal divergences `(s, t)` of each component, as `1 - h(a)` and
/// `1 - h(b)`, together with the crossovers themselves.
struct Coords {
    s: [f64; COMPONENTS],
    t: [f64; COMPONENTS],
    a: [f64; COMPONENTS],
    b: [f64; COMPONENTS],
}

/// Angle parameters: `(x_a, x_b)` per component with `a = sin²(x)/2`.
fn angle_coords(x: &[f64]) -> Coords {
    let mut c = Coords {
        s: [0.0; COMPONENTS],
        t: [0.0; COMPONENTS],
        a: [0.0; COMPONENTS],
        b: [0.0; COMPONENTS],
    };
    for i in 0..COMPONENTS {
        c.a[i] = crossover(x[2 * i]);
        c.b[i] = crossover(x[2 * i + 1]);
        c.s[i] = one_minus_h_centered(x[2 * i].cos().powi(2));
        c.t[i] = one_minus_h_centered(x[2 * i + 1].cos().powi(2));
    }
    c
}

/// Scaled parameters: `(y_s, y_t)` per component with
/// `sᵢ = α yᵢ² / Σⱼ wⱼ yⱼ²`, so the weighted average of `s` is exactly `α`
/// before clipping at 1 (likewise for `t`). Clipping is the only source of
/// constraint violation, which keeps points on the axes exactly feasible.
fn scaled_coords(x: &[f64], w: &[f64; COMPONENTS], alpha: f64, beta: f64) -> Coords {
    let mut c = Coords {
        s: [0.0; COMPONENTS],
        t: [0.0; COMPONENTS],
        a: [0.0; COMPONENTS],
        b: [0.0; COMPONENTS],
    };
    for (axis, target) in [(0, alpha), (1, beta)] {
        let r: Vec<f64> = (0..COMPONENTS).map(|i| x[2 * i + axis].powi(2)).collect();
        let mean: f64 = r.iter().zip(w).map(|(r, w)| r * w).sum();
        for (i, &ri) in r.iter().enumerate() {
            let v = if mean > 0.0 { target * ri / mean } else { target };
            let v = v.min(1.0);
            let crossover = 0.5 * (1.0 - centered_from_gap(v));
            if axis == 0 {
                c.s[i] = v;
                c.a[i] = crossover;
            } else {
                c.t[i] = v;
                c.b[i] = crossover;
            }
        }
    }
    c
}

/// Parameters: two per component (angles or scaled coordinates), then two
/// weight logits (the third is pinned at 0).
fn decode(x: &[f64], pxy: &[f64; 4], constraint: Constraint, alpha: f64, beta: f64) -> Mix {
    let p_hat = 2.0 * pxy[1];
    let weights = weights(&x[2 * COMPONENTS..]);
    let c = match constraint {
        Constraint::AtLeast => angle_coords(x),
        Constraint::Equality => scaled_coords(x, &weights, alpha, beta),
    };
    let phi = std::array::from_fn(|i| {
        let q = Joint2x2::coupling_clamped(c.a[i], c.b[i], q_opt(c.a[i], c.b[i], p_hat));
        kl_slices(&q.flat(), pxy, LogBase::Bits)
    });
    Mix {
        weights,
        s: c.s,
        t: c.t,
        phi,
    }
}

fn averages(mix: &Mix) -> (f64, f64, f64) {
    let mut acc = (0.0, 0.0, 0.0);
    for i in 0..COMPONENTS {
        acc.0 += mix.weights[i] * mix.s[i];
        acc.1 += mix.weights[i] * mix.t[i];
        acc.2 += mix.weights[i] * mix.phi[i];
    }
    acc
}

/// Numerical `inf Σᵢ qᵢ φ̲(sᵢ, tᵢ)` over three-point mixtures whose averaged
/// coordinates meet `(α, β)` as specified by `constraint`.
pub fn timesharing_conv_envelope(
    p_hat: f64,
    alpha: f64,
    beta: f64,
    cfg: &OracleConfig,
    constraint: Constraint,
) -> Result<f64> {
    cfg.validate()?;
    if !(p_hat > 0.0 && p_hat < 0.5) {
        return Err(GwError::Domain {
            name: "p_hat",
            value: p_hat,
            constraint: "0 < p_hat < 1/2",
        });
    }
    check_range("alpha", alpha, 0.0, 1.0, "value in [0, 1]")?;
    check_range("beta", beta, 0.0, 1.0, "value in [0, 1]")?;
    let pxy = dsbs_flat(p_hat);
    let gap = |g: f64| match constraint {
        Constraint::Equality => g,
        Constraint::AtLeast => g.max(0.0),
    };
    let violation = |s: f64, t: f64| gap(alpha - s).abs() + gap(beta - t).abs();

    // the unmixed point (α, β) is always feasible and seeds restart 0
    let (a0, b0) = match constraint {
        Constraint::AtLeast => (
            inv_crossover(binary_entropy_inv(1.0 - alpha)),
            inv_crossover(binary_entropy_inv(1.0 - beta)),
        ),
        Constraint::Equality => (1.0, 1.0),
    };
    let n = 2 * COMPONENTS + 2;

    let outcomes: Vec<(Option<f64>, f64, f64)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            let mut x: Vec<f64> = if i == 0 {
                vec![a0, b0, a0, b0, a0, b0, 0.0, 0.0]
            } else {
                (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect()
            };
            let mut best: Option<f64> = None;
            let mut least = (f64::INFINITY, f64::INFINITY);
            let offer = |x: &[f64], best: &mut Option<f64>, least: &mut (f64, f64)| {
                let (s, t, v) = averages(&decode(x, &pxy, constraint, alpha, beta));
                let viol = violation(s, t);
                if viol <= FEASIBLE_TOL && best.is_none_or(|b| v < b) {
                    *best = Some(v);
                }
                if viol < least.0 {
                    *least = (viol, v);
                }
                (alpha - s, beta - t)
            };
            offer(&x, &mut best, &mut least);
            let (mut la, mut lb) = (0.0, 0.0);
            for (stage, &mu) in cfg.penalty_schedule.iter().enumerate() {
                let pen = |g: f64, l: f64| {
                    let s = gap(g + l / (2.0 * mu));
                    mu * s * s
                };
                let f = |params: &[f64]| {
                    let (s, t, v) = averages(&decode(params, &pxy, constraint, alpha, beta));
                    v + pen(alpha - s, la) + pen(beta - t, lb)
                };
                let opts = NelderMeadOptions {
                    max_iters: cfg.max_iters,
                    step: if stage == 0 { 1.0 } else { 0.2 },
                    f_tol: 1e-10,
                };
                x = nelder_mead(f, &x, &opts).x;
                let (ga, gb) = offer(&x, &mut best, &mut least);
                la = gap(la + 2.0 * mu * ga);
                lb = gap(lb + 2.0 * mu * gb);
            }
            (best, least.0, least.1)
        })
        .collect();

    let best = outcomes
        .iter()
        .filter_map(|o| o.0)
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))));
    if let Some(v) = best {
        return Ok(v);
    }
    let (viol, value) = outcomes
        .iter()
        .map(|o| (o.1, o.2))
        .fold((f64::INFINITY, f64::INFINITY), |acc, o| if o.0 < acc.0 { o } else { acc });
    if viol <= ACCEPT_TOL {
        Ok(value)
    } else {
        Err(GwError::NonConvergence { violation: viol })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ot::{conv_phi_lower, phi_lower, psi_lower_dsbs};

    fn quick() -> OracleConfig {
        OracleConfig {
            restarts: 8,
            max_iters: 800,
            ..OracleConfig::default()
        }
    }

    #[test]
    fn origin_costs_nothing() {
        let v = timesharing_conv_envelope(0.05, 0.0, 0.0, &quick(), Constraint::Equality).unwrap();
        assert!(v.abs() < 1e-9);
    }

    #[test]
    fn interior_point_needs_no_mixing() {
        let v = timesharing_conv_envelope(0.05, 0.3, 0.3, &quick(), Constraint::Equality).unwrap();
        assert!((v - phi_lower(0.05, 0.3, 0.3).unwrap()).abs() < 5e-4);
    }

    #[test]
    fn steep_region_matches_two_point_mixture() {
        let (want, _, _) = conv_phi_lower(0.05, 0.6, 0.2).unwrap();
        let v = timesharing_conv_envelope(0.05, 0.6, 0.2, &quick(), Constraint::Equality).unwrap();
        assert!((v - want).abs() < 5e-4, "{v} vs {want}");
    }

    #[test]
    fn at_least_constraints_give_the_increasing_envelope() {
        let want = psi_lower_dsbs(0.05, 0.6, 0.2).unwrap();
        let v = timesharing_conv_envelope(0.05, 0.6, 0.2, &quick(), Constraint::AtLeast).unwrap();
        assert!((v - want).abs() < 5e-4, "{v} vs {want}");
    }
}

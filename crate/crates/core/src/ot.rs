//! Optimal-transport divergence for binary marginals against a DSBS
//! reference, and the envelopes of the resulting divergence region.
//!
//! A binary pmf `Q` is written `(Q(0), Q(1))`; a Bernoulli marginal is
//! identified with its probability of `1`. All quantities are in bits.

use serde::{Deserialize, Serialize};

use crate::dsbs::TIE_TOL;
use crate::error::{check_range, GwError, Result};
use crate::info::{
    binary_convolve, binary_entropy_inv, dsbs_flat, h, kl_slices, one_minus_h_centered, Joint2x2,
    LogBase, Pmf,
};
use crate::optim::{bisect_increasing, false_position, golden_section_min};

const GOLDEN_ITERS: usize = 300;

/// Inward nudge applied to the ends of the shadow-measure bracket.
const BRACKET_NUDGE: f64 = 1e-9;

fn check_p_hat(p_hat: f64) -> Result<()> {
    if !(p_hat > 0.0 && p_hat < 0.5) {
        return Err(GwError::Domain {
            name: "p_hat",
            value: p_hat,
            constraint: "0 < p_hat < 1/2",
        });
    }
    Ok(())
}

fn check_unit(name: &'static str, v: f64) -> Result<()> {
    check_range(name, v, 0.0, 1.0, "value in [0, 1]")
}

fn d_bits(q: &Joint2x2, p_hat: f64) -> f64 {
    kl_slices(&q.flat(), &dsbs_flat(p_hat), LogBase::Bits)
}

/// Minimum of `D(Q_XY‖P_XY)` over couplings of `qx` and `qy`.
///
/// With `a = qx(1)`, `b = qy(1)` the couplings form the segment
/// `Q(1,1) = q ∈ [max(0, a+b-1), min(a, b)]`, on which the divergence is
/// convex. The minimizer is found by bisecting on the sign of the
/// derivative. Returns the minimum value and the minimizing coupling.
pub fn ot_divergence_2x2(qx: &Pmf, qy: &Pmf, p_xy: &Joint2x2) -> Result<(f64, Joint2x2)> {
    if qx.len() != 2 || qy.len() != 2 {
        return Err(GwError::InvalidDistribution(
            "marginals must be binary".into(),
        ));
    }
    if p_xy.flat().iter().any(|&v| v <= 0.0) {
        return Err(GwError::InvalidDistribution(
            "reference joint must be strictly positive".into(),
        ));
    }
    let a = qx.probs()[1];
    let b = qy.probs()[1];
    let lo = (a + b - 1.0).max(0.0);
    let hi = a.min(b);
    let pf = p_xy.flat();
    // the derivative in q is the log cross-ratio difference, increasing in q
    let log_ref_ratio = (pf[0] * pf[3] / (pf[1] * pf[2])).ln();
    let slope = |q: f64| {
        let c = [1.0 + q - a - b, b - q, a - q, q];
        (c[0] * c[3] / (c[1] * c[2])).ln() - log_ref_ratio
    };
    let q = if hi > lo {
        bisect_increasing(slope, 0.0, lo, hi, 200)
    } else {
        lo
    };
    let coupling = Joint2x2::coupling_clamped(a, b, q);
    Ok((kl_slices(&coupling.flat(), &pf, LogBase::Bits), coupling))
}

/// Closed-form `Q(1,1)` of the divergence-minimizing coupling of
/// `Bern(a)` and `Bern(b)` against `DSBS(p)`.
///
/// Uses the conjugate form `2κab / (s + √(s² - 4κ(κ-1)ab))`, with
/// `κ = ((1-p)/p)²` and `s = (κ-1)(a+b) + 1`, which avoids cancellation for
/// small `ab` and stays finite as `κ → 1`.
pub fn q_opt_closed_form(a: f64, b: f64, p: f64) -> Result<f64> {
    check_unit("a", a)?;
    check_unit("b", b)?;
    check_p_hat(p)?;
    Ok(q_opt(a, b, p))
}

pub(crate) fn q_opt(a: f64, b: f64, p: f64) -> f64 {
    let r = (1.0 - p) / p;
    let kappa = r * r;
    let km1 = kappa - 1.0;
    let s = km1 * (a + b) + 1.0;
    let disc = (s * s - 4.0 * kappa * km1 * a * b).max(0.0);
    let denom = s + disc.sqrt();
    if denom <= 0.0 {
        return 0.0;
    }
    let hi = a.min(b);
    let lo = (a + b - 1.0).max(0.0).min(hi);
    (2.0 * kappa * a * b / denom).clamp(lo, hi)
}

/// The divergence-minimizing coupling for marginals `Bern(a)`, `Bern(b)`.
pub fn optimal_coupling(a: f64, b: f64, p_hat: f64) -> Result<Joint2x2> {
    check_unit("a", a)?;
    check_unit("b", b)?;
    check_p_hat(p_hat)?;
    Ok(Joint2x2::coupling_clamped(a, b, q_opt(a, b, p_hat)))
}

/// Lower envelope `φ̲(α, β)` of the divergence region of `DSBS(p̂)`.
pub fn phi_lower(p_hat: f64, alpha: f64, beta: f64) -> Result<f64> {
    check_p_hat(p_hat)?;
    check_unit("alpha", alpha)?;
    check_unit("beta", beta)?;
    Ok(phi_lower_unchecked(p_hat, alpha, beta))
}

fn phi_lower_unchecked(p_hat: f64, alpha: f64, beta: f64) -> f64 {
    let a = binary_entropy_inv(1.0 - alpha);
    let b = binary_entropy_inv(1.0 - beta);
    d_bits(&Joint2x2::coupling_clamped(a, b, q_opt(a, b, p_hat)), p_hat)
}

/// Upper envelope `φ̄(α, β)`: marginals on opposite sides of `1/2`.
pub fn phi_upper(p_hat: f64, alpha: f64, beta: f64) -> Result<f64> {
    check_p_hat(p_hat)?;
    check_unit("alpha", alpha)?;
    check_unit("beta", beta)?;
    let a = binary_entropy_inv(1.0 - alpha);
    let b = 1.0 - binary_entropy_inv(1.0 - beta);
    Ok(d_bits(&Joint2x2::coupling_clamped(a, b, q_opt(a, b, p_hat)), p_hat))
}

/// Lower increasing envelope `ψ̲(α, β)`.
pub fn psi_lower_dsbs(p_hat: f64, alpha: f64, beta: f64) -> Result<f64> {
    check_p_hat(p_hat)?;
    check_unit("alpha", alpha)?;
    check_unit("beta", beta)?;
    let a = binary_entropy_inv(1.0 - alpha);
    let b = binary_entropy_inv(1.0 - beta);
    let ap = binary_convolve(a, p_hat);
    let bp = binary_convolve(b, p_hat);
    Ok(if ap >= b - TIE_TOL && bp >= a - TIE_TOL {
        phi_lower_unchecked(p_hat, alpha, beta)
    } else if ap < b {
        alpha
    } else {
        beta
    })
}

/// A finite mixture `Σ_w Q_W(w) Q_{XY|W=w}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mixture {
    pub weights: Vec<f64>,
    pub components: Vec<Joint2x2>,
}

impl Mixture {
    fn single(q: Joint2x2) -> Self {
        Self {
            weights: vec![1.0],
            components: vec![q],
        }
    }

    fn transpose(&self) -> Self {
        Self {
            weights: self.weights.clone(),
            components: self.components.iter().map(Joint2x2::transpose).collect(),
        }
    }

    /// Averaged `(D(Q_X|W‖P_X), D(Q_Y|W‖P_Y), D(Q_XY|W‖P_XY))` in bits.
    pub fn divergences(&self, p_xy: &Joint2x2) -> (f64, f64, f64) {
        let px = p_xy.marginal_x();
        let py = p_xy.marginal_y();
        let pf = p_xy.flat();
        let mut acc = (0.0, 0.0, 0.0);
        for (&w, q) in self.weights.iter().zip(&self.components) {
            if w <= 0.0 {
                continue;
            }
            acc.0 += w * kl_slices(q.marginal_x().probs(), px.probs(), LogBase::Bits);
            acc.1 += w * kl_slices(q.marginal_y().probs(), py.probs(), LogBase::Bits);
            acc.2 += w * kl_slices(&q.flat(), &pf, LogBase::Bits);
        }
        acc
    }
}

/// Which clause of the convex envelope is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConvClause {
    /// Both marginals bind: `φ̲` itself.
    Interior,
    /// `β` slack, on the linear part: value `α`.
    FlatAlpha,
    /// Mirror of [`ConvClause::FlatAlpha`]: value `β`.
    FlatBeta,
    /// `β < (1-h(p̂))α`: time-sharing with a point mass in `X`.
    SteepAlpha,
    /// Mirror of [`ConvClause::SteepAlpha`].
    SteepBeta,
}

/// Lower convex envelope `conv φ̲(α, β)` with an optimal time-sharing
/// mixture attaining it.
pub fn conv_phi_lower(p_hat: f64, alpha: f64, beta: f64) -> Result<(f64, Mixture, ConvClause)> {
    check_p_hat(p_hat)?;
    check_unit("alpha", alpha)?;
    check_unit("beta", beta)?;
    let a = binary_entropy_inv(1.0 - alpha);
    let b = binary_entropy_inv(1.0 - beta);
    let ap = binary_convolve(a, p_hat);
    let bp = binary_convolve(b, p_hat);
    let slope = 1.0 - h(p_hat);
    if ap >= b - TIE_TOL && bp >= a - TIE_TOL {
        let q = Joint2x2::coupling_clamped(a, b, q_opt(a, b, p_hat));
        return Ok((d_bits(&q, p_hat), Mixture::single(q), ConvClause::Interior));
    }
    if beta < slope * alpha {
        let (v, m) = steep_clause(p_hat, alpha, beta);
        return Ok((v, m, ConvClause::SteepAlpha));
    }
    if alpha < slope * beta {
        let (v, m) = steep_clause(p_hat, beta, alpha);
        return Ok((v, m.transpose(), ConvClause::SteepBeta));
    }
    if ap < b {
        let m = flat_clause(p_hat, alpha, beta)?;
        Ok((alpha, m, ConvClause::FlatAlpha))
    } else {
        let m = flat_clause(p_hat, beta, alpha)?;
        Ok((beta, m.transpose(), ConvClause::FlatBeta))
    }
}

/// `α + α D((1-c, c)‖(1-p̂, p̂))` with `c = h⁻¹(1 - β/α)`, attained by
/// mixing the reference (weight `1-α`) with `X ≡ 0, Y ~ Bern(c)`.
fn steep_clause(p_hat: f64, alpha: f64, beta: f64) -> (f64, Mixture) {
    let c = binary_entropy_inv(1.0 - beta / alpha);
    let d = kl_slices(&[1.0 - c, c], &[1.0 - p_hat, p_hat], LogBase::Bits);
    let reference = Joint2x2::from_flat_unchecked(dsbs_flat(p_hat));
    let point = Joint2x2::from_flat_unchecked([1.0 - c, c, 0.0, 0.0]);
    let m = Mixture {
        weights: vec![1.0 - alpha, alpha],
        components: vec![reference, point],
    };
    (alpha + alpha * d, m)
}

/// Mixture attaining the value `α` on the linear part: the reference with
/// weight `1-θ` and `Bern(a') × BSC(p̂)` with weight `θ = α / (1 - h(a'))`.
fn flat_clause(p_hat: f64, alpha: f64, beta: f64) -> Result<Mixture> {
    let reference = Joint2x2::from_flat_unchecked(dsbs_flat(p_hat));
    if alpha <= 0.0 {
        return Ok(Mixture::single(reference));
    }
    let a1 = a_prime_root(p_hat, beta / alpha)?;
    let theta = (alpha / one_minus_h_centered(1.0 - 2.0 * a1)).min(1.0);
    let tilted = Joint2x2::from_flat_unchecked([
        (1.0 - a1) * (1.0 - p_hat),
        (1.0 - a1) * p_hat,
        a1 * p_hat,
        a1 * (1.0 - p_hat),
    ]);
    Ok(Mixture {
        weights: vec![1.0 - theta, theta],
        components: vec![reference, tilted],
    })
}

/// Ratio `(1 - h(a'*p̂)) / (1 - h(a'))` written in `u = 1 - 2a'`.
fn divergence_ratio(p_hat: f64, u: f64) -> f64 {
    one_minus_h_centered(u * (1.0 - 2.0 * p_hat)) / one_minus_h_centered(u)
}

/// Root `a' ∈ [0, 1/2)` of `(1 - h(a'*p̂)) / (1 - h(a')) = ratio`.
///
/// The left side increases from `1 - h(p̂)` at `a' = 0` toward `(1-2p̂)²`
/// as `a' → 1/2`; ratios outside `[1 - h(p̂), (1-2p̂)²)` have no root.
pub fn a_prime_root(p_hat: f64, ratio: f64) -> Result<f64> {
    check_p_hat(p_hat)?;
    let lo_ratio = divergence_ratio(p_hat, 1.0);
    let hi_ratio = (1.0 - 2.0 * p_hat).powi(2);
    if ratio.is_nan() || ratio < lo_ratio - TIE_TOL || ratio >= hi_ratio {
        return Err(GwError::Domain {
            name: "ratio",
            value: ratio,
            constraint: "1 - h(p_hat) <= ratio < (1 - 2 p_hat)^2",
        });
    }
    if ratio <= lo_ratio {
        return Ok(0.0);
    }
    // the ratio decreases in u = 1 - 2a', so bisect on -ratio
    let mut lo = 0.0;
    let mut hi = 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if divergence_ratio(p_hat, mid) > ratio {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let u = 0.5 * (lo + hi);
    Ok(0.5 * (1.0 - u))
}

/// `φ_q(α) = min_β φ̲(α, β) - β/q` for `q < 0`.
///
/// On `[0, β*]`, where `β*` solves `a*p̂ = b`, `φ̲(α, ·)` agrees with the
/// convex `ψ̲`; beyond `β*` both terms increase. The objective is therefore
/// unimodal and golden-section search applies.
pub fn phi_q_dsbs(p_hat: f64, q: f64, alpha: f64) -> Result<f64> {
    check_p_hat(p_hat)?;
    if !(q < 0.0) || !q.is_finite() {
        return Err(GwError::Domain {
            name: "q",
            value: q,
            constraint: "finite q < 0",
        });
    }
    check_unit("alpha", alpha)?;
    let f = |beta: f64| phi_lower_unchecked(p_hat, alpha, beta) - beta / q;
    Ok(golden_section_min(f, 0.0, 1.0, GOLDEN_ITERS).1.max(0.0))
}

/// Reference parameter `p̂*` with `q_{a,b}(p̂*) = (a+b-p)/2`.
///
/// Defined for `a ≤ b` with `(a, b)` inside the region where both
/// marginal constraints and the `a*b ≥ p` constraint bind. The search
/// bracket is `((b-a)/(1-2a), 1/2)`, nudged inward; a non-straddling
/// bracket means the point is outside that region.
pub fn shadow_measure(p: f64, a: f64, b: f64) -> Result<f64> {
    check_p_hat(p)?;
    check_range("a", a, 0.0, 0.5, "0 <= a <= 1/2")?;
    check_range("b", b, a, 0.5, "a <= b <= 1/2")?;
    let target = 0.5 * (a + b - p);
    let lo = (b - a) / (1.0 - 2.0 * a) + BRACKET_NUDGE;
    let hi = 0.5 - BRACKET_NUDGE;
    if !(lo < hi) {
        return Err(GwError::NoRoot { lo, hi });
    }
    false_position(|t| q_opt(a, b, t) - target, lo, hi, 1e-15, 500)
}

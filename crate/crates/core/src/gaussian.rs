//! Closed forms for the standard bivariate Gaussian source with correlation
//! `0 < ρ < 1`. All quantities are in nats.
//!
//! Rates enter through `s = e^{-α}` and `c = √(1 - e^{-2α})`, i.e. the sine
//! and cosine of the angle `θ_α` with `sin θ_α = e^{-α}`. Clause tests are
//! done on these directly, never through trigonometric round trips.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_range, GwError, Result};
use crate::optim::{golden_section_max, golden_section_min};

/// Equalities within this are treated as ties (resolved to `G1`, then `G2`).
pub const TIE_TOL: f64 = 1e-12;

/// Floor for `1 - ρ̂²` in the `G1` clause.
const RHO_HAT_FLOOR: f64 = 1e-14;

const HYPER_ITERS: usize = 400;

/// `N(0, [[1, ρ], [ρ, 1]])`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSource {
    rho: f64,
}

/// Angles `θ ∈ [0, π/2]` with `sin θ = e^{-rate}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleCoords {
    pub theta_alpha: f64,
    pub theta_beta: f64,
}

impl AngleCoords {
    pub fn from_rates(alpha: f64, beta: f64) -> Result<Self> {
        check_rate("alpha", alpha)?;
        check_rate("beta", beta)?;
        Ok(Self {
            theta_alpha: (-alpha).exp().asin(),
            theta_beta: (-beta).exp().asin(),
        })
    }

    pub fn to_rates(&self) -> (f64, f64) {
        (-self.theta_alpha.sin().ln(), -self.theta_beta.sin().ln())
    }
}

/// Clause selector for [`GaussianSource::upsilon_star`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GaussianRegionLabel {
    G1,
    G2,
    G3,
    G4,
}

impl GaussianRegionLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            GaussianRegionLabel::G1 => "G1",
            GaussianRegionLabel::G2 => "G2",
            GaussianRegionLabel::G3 => "G3",
            GaussianRegionLabel::G4 => "G4",
        }
    }
}

impl fmt::Display for GaussianRegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy)]
struct Trig {
    s: f64,
    c: f64,
}

impl Trig {
    fn of(rate: f64) -> Self {
        Self {
            s: (-rate).exp(),
            c: (-(-2.0 * rate).exp_m1()).sqrt(),
        }
    }
}

fn check_rate(name: &'static str, v: f64) -> Result<()> {
    check_range(name, v, 0.0, f64::MAX, "finite value >= 0")
}

impl GaussianSource {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(GwError::Domain {
                name: "rho",
                value: rho,
                constraint: "0 < rho < 1",
            });
        }
        Ok(Self { rho })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `I(X;Y) = ½ ln(1/(1-ρ²))`.
    pub fn mutual_information(&self) -> f64 {
        -0.5 * (-self.rho * self.rho).ln_1p()
    }

    /// Residual correlation `(ρ - cos θ_α cos θ_β) / (sin θ_α sin θ_β)`.
    /// Only meaningful in `G1`, where it lies in `[0, 1)`.
    pub fn rho_hat(&self, alpha: f64, beta: f64) -> Result<f64> {
        check_rate("alpha", alpha)?;
        check_rate("beta", beta)?;
        let (ta, tb) = (Trig::of(alpha), Trig::of(beta));
        Ok(self.rho_hat_trig(ta, tb))
    }

    fn rho_hat_trig(&self, ta: Trig, tb: Trig) -> f64 {
        (self.rho - ta.c * tb.c) / (ta.s * tb.s)
    }

    fn label(&self, ta: Trig, tb: Trig) -> GaussianRegionLabel {
        let rho = self.rho;
        if ta.c * tb.c <= rho + TIE_TOL && rho * ta.c <= tb.c + TIE_TOL && rho * tb.c <= ta.c + TIE_TOL
        {
            GaussianRegionLabel::G1
        } else if rho < ta.c * tb.c {
            GaussianRegionLabel::G2
        } else if rho * ta.c > tb.c {
            GaussianRegionLabel::G3
        } else {
            GaussianRegionLabel::G4
        }
    }

    pub fn classify(&self, alpha: f64, beta: f64) -> Result<GaussianRegionLabel> {
        check_rate("alpha", alpha)?;
        check_rate("beta", beta)?;
        Ok(self.label(Trig::of(alpha), Trig::of(beta)))
    }

    /// Lower envelope `Υ_G*(α, β)` of the mutual information region.
    pub fn upsilon_star(&self, alpha: f64, beta: f64) -> Result<f64> {
        check_rate("alpha", alpha)?;
        check_rate("beta", beta)?;
        let (ta, tb) = (Trig::of(alpha), Trig::of(beta));
        Ok(match self.label(ta, tb) {
            GaussianRegionLabel::G1 => {
                let rh = self.rho_hat_trig(ta, tb).clamp(-1.0, 1.0);
                let num = (1.0 - rh * rh).max(RHO_HAT_FLOOR);
                let den = 1.0 - self.rho * self.rho;
                alpha + beta - 0.5 * (num / den).ln()
            }
            GaussianRegionLabel::G2 => alpha + beta - self.mutual_information(),
            GaussianRegionLabel::G3 => alpha,
            GaussianRegionLabel::G4 => beta,
        })
    }

    /// The upper envelope is unbounded for every `(α, β)`; this returns
    /// `f64::INFINITY` after validating the arguments.
    pub fn upper_envelope(&self, alpha: f64, beta: f64) -> Result<f64> {
        check_rate("alpha", alpha)?;
        check_rate("beta", beta)?;
        Ok(f64::INFINITY)
    }

    /// Minimum common rate of the lossy Gray-Wyner system under quadratic
    /// distortion.
    pub fn lossy_gw_rate(&self, r1: f64, r2: f64, d1: f64, d2: f64) -> Result<f64> {
        check_rate("r1", r1)?;
        check_rate("r2", r2)?;
        for (name, d) in [("d1", d1), ("d2", d2)] {
            if !(d > 0.0 && d.is_finite()) {
                return Err(GwError::Domain {
                    name,
                    value: d,
                    constraint: "distortion > 0",
                });
            }
        }
        let alpha = (0.5 * (1.0 / d1).ln() - r1).max(0.0);
        let beta = (0.5 * (1.0 / d2).ln() - r2).max(0.0);
        self.upsilon_star(alpha, beta)
    }

    /// Lower divergence envelope `ψ̲(α, β)`; also equals the convex hull of
    /// the coupling-constrained envelope.
    pub fn psi_lower(&self, alpha: f64, beta: f64) -> Result<f64> {
        check_rate("alpha", alpha)?;
        check_rate("beta", beta)?;
        let r2 = self.rho * self.rho;
        Ok(if beta < r2 * alpha {
            alpha
        } else if alpha < r2 * beta {
            beta
        } else {
            (alpha + beta - 2.0 * self.rho * (alpha * beta).sqrt()) / (1.0 - r2)
        })
    }

    /// Upper divergence envelope `φ̄(α, β)`.
    pub fn phi_upper(&self, alpha: f64, beta: f64) -> Result<f64> {
        check_rate("alpha", alpha)?;
        check_rate("beta", beta)?;
        let r2 = self.rho * self.rho;
        Ok((alpha + beta + 2.0 * self.rho * (alpha * beta).sqrt()) / (1.0 - r2))
    }

    /// `φ_q(α)` for `q < 0`.
    pub fn phi_q(&self, q: f64, alpha: f64) -> Result<f64> {
        check_q(q)?;
        check_rate("alpha", alpha)?;
        Ok((1.0 - q) * alpha / (1.0 - q - self.rho * self.rho))
    }

    /// `sup α/p + β/q` over the forward hypercontractivity region
    /// `p, q ≥ 1, (p-1)(q-1) ≥ ρ²`, computed numerically.
    ///
    /// The objective decreases in `p` and `q`, so the supremum sits on the
    /// boundary curve. It is parameterized by `p - 1 = ρ e^s` (so
    /// `q - 1 = ρ e^{-s}`), on which the objective has a single stationary
    /// point; the two ends `s → ∓∞` give the limits `α` and `β`.
    pub fn hyper_sup_psi(&self, alpha: f64, beta: f64) -> Result<f64> {
        check_rate("alpha", alpha)?;
        check_rate("beta", beta)?;
        let rho = self.rho;
        let f = |s: f64| alpha / (1.0 + rho * s.exp()) + beta / (1.0 + rho * (-s).exp());
        let (_, v) = golden_section_max(f, -60.0, 60.0, HYPER_ITERS);
        Ok(v.max(alpha).max(beta))
    }

    /// `inf α/p + β/q` over the reverse hypercontractivity region
    /// `p, q ∈ (0, 1], (1-p)(1-q) ≥ ρ²`, computed numerically.
    ///
    /// On the boundary, `u = 1 - p ∈ (ρ², 1)` and `q = 1 - ρ²/u`; the
    /// objective is convex in `u`.
    pub fn hyper_inf_phibar(&self, alpha: f64, beta: f64) -> Result<f64> {
        check_rate("alpha", alpha)?;
        check_rate("beta", beta)?;
        let r2 = self.rho * self.rho;
        // a vanishing coefficient pushes the other exponent to its extreme
        if alpha == 0.0 {
            return Ok(beta / (1.0 - r2));
        }
        if beta == 0.0 {
            return Ok(alpha / (1.0 - r2));
        }
        let f = |u: f64| {
            let q = 1.0 - r2 / u;
            if u >= 1.0 || q <= 0.0 {
                f64::INFINITY
            } else {
                alpha / (1.0 - u) + beta / q
            }
        };
        Ok(golden_section_min(f, r2, 1.0, HYPER_ITERS).1)
    }

    /// `inf α/p` over `p ∈ (0, 1]` with `(p-1)(q-1) ≥ ρ²`, for `q < 0`,
    /// computed numerically.
    ///
    /// Since `q - 1 < 0`, feasibility reads `p ≤ 1 - ρ²/(1-q)`.
    pub fn hyper_inf_phiq(&self, q: f64, alpha: f64) -> Result<f64> {
        check_q(q)?;
        check_rate("alpha", alpha)?;
        let p_max = 1.0 - self.rho * self.rho / (1.0 - q);
        let f = |p: f64| alpha / p;
        Ok(golden_section_min(f, p_max * 1e-6, p_max, HYPER_ITERS).1)
    }
}

fn check_q(q: f64) -> Result<()> {
    if !(q < 0.0) || !q.is_finite() {
        return Err(GwError::Domain {
            name: "q",
            value: q,
            constraint: "finite q < 0",
        });
    }
    Ok(())
}

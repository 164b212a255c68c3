//! Closed forms for the doubly symmetric binary source `DSBS(p)`.
//!
//! All quantities are in bits. With `a = h⁻¹(1-α)` and `b = h⁻¹(1-β)`,
//! the unit square of `(α, β)` is split into four regions:
//!
//! | label | condition |
//! |-------|-----------|
//! | `D1`  | `a*p ≥ b`, `b*p ≥ a`, `a*b ≥ p` |
//! | `D2`  | `a*b < p` |
//! | `D3`  | `a*p < b` |
//! | `D4`  | `b*p < a` |
//!
//! `D3` and `D4` are further split by the line `β = (1-h(p))α` (resp. its
//! mirror) into a part where the lower envelope is linear and a part bounded
//! below by the projection-region boundary.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_range, GwError, Result};
use crate::info::{binary_convolve, binary_entropy_inv, h};

/// Equalities within this are treated as ties and resolve to the earlier clause.
pub const TIE_TOL: f64 = 1e-12;

/// `DSBS(p)` with disagree probability `0 < p < 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DsbsSource {
    p: f64,
}

/// Region of `[0,1]²` that selects the active clause of an envelope formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionLabel {
    D1,
    D2,
    D3,
    D4,
    D3p,
    D3pp,
    D4p,
    D4pp,
    Outside,
}

impl RegionLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            RegionLabel::D1 => "D1",
            RegionLabel::D2 => "D2",
            RegionLabel::D3 => "D3",
            RegionLabel::D4 => "D4",
            RegionLabel::D3p => "D3p",
            RegionLabel::D3pp => "D3pp",
            RegionLabel::D4p => "D4p",
            RegionLabel::D4pp => "D4pp",
            RegionLabel::Outside => "OUTSIDE",
        }
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Resolution at which [`DsbsSource::classify`] reports labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Granularity {
    /// One of `D1..D4`.
    Coarse,
    /// One of `D1, D2, D3p, D3pp, D4p, D4pp, Outside`.
    Fine,
}

impl DsbsSource {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 0.5) {
            return Err(GwError::Domain {
                name: "p",
                value: p,
                constraint: "0 < p < 1/2",
            });
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `h(p) = H(Y|X)`.
    pub fn conditional_entropy(&self) -> f64 {
        h(self.p)
    }

    /// Rate-distortion function of the source under Hamming distortion.
    pub fn rate_distortion(&self, d1: f64, d2: f64) -> Result<f64> {
        check_range("d1", d1, 0.0, 0.5, "0 <= d1 <= 1/2")?;
        check_range("d2", d2, 0.0, 0.5, "0 <= d2 <= 1/2")?;
        let (a, b) = (d1.min(d2), d1.max(d2));
        let p = self.p;
        let value = if binary_convolve(a, p) >= b - TIE_TOL && binary_convolve(a, b) >= p - TIE_TOL {
            self.d1_clause(a, b)
        } else if binary_convolve(a, b) <= p {
            1.0 + h(p) - h(a) - h(b)
        } else {
            1.0 - h(a)
        };
        Ok(value.max(0.0))
    }

    fn d1_clause(&self, a: f64, b: f64) -> f64 {
        let p = self.p;
        1.0 - (1.0 - p) * h((a + b - p) / (2.0 * (1.0 - p))) - p * h((a - b + p) / (2.0 * p))
    }

    fn coarse(&self, a: f64, b: f64) -> RegionLabel {
        let p = self.p;
        let ap = binary_convolve(a, p);
        let bp = binary_convolve(b, p);
        let ab = binary_convolve(a, b);
        if ap >= b - TIE_TOL && bp >= a - TIE_TOL && ab >= p - TIE_TOL {
            RegionLabel::D1
        } else if ab < p {
            RegionLabel::D2
        } else if ap < b {
            RegionLabel::D3
        } else {
            RegionLabel::D4
        }
    }

    /// Lower boundary `β ≥ g(α)` of the projection region I0*.
    ///
    /// `g(α) = α - α h(p/α)` for `α ≥ 2p`; for `α < 2p` the constraint is
    /// vacuous and `g(α) = 0` (the two pieces meet at `α = 2p`).
    pub fn i0_boundary(&self, alpha: f64) -> f64 {
        if alpha <= 2.0 * self.p {
            0.0
        } else {
            alpha * (1.0 - h(self.p / alpha))
        }
    }

    /// Membership in the projection region `I0*`, with additive `slack`.
    pub fn in_projection_region(&self, alpha: f64, beta: f64, slack: f64) -> bool {
        (0.0..=1.0 + slack).contains(&alpha)
            && (0.0..=1.0 + slack).contains(&beta)
            && beta >= self.i0_boundary(alpha.min(1.0)) - slack
            && alpha >= self.i0_boundary(beta.min(1.0)) - slack
    }

    /// Region label of `(α, β)` at the requested granularity.
    pub fn classify(&self, alpha: f64, beta: f64, level: Granularity) -> Result<RegionLabel> {
        check_unit("alpha", alpha)?;
        check_unit("beta", beta)?;
        let a = binary_entropy_inv(1.0 - alpha);
        let b = binary_entropy_inv(1.0 - beta);
        let coarse = self.coarse(a, b);
        if level == Granularity::Coarse {
            return Ok(coarse);
        }
        let slope = 1.0 - h(self.p);
        Ok(match coarse {
            RegionLabel::D3 => {
                if beta >= slope * alpha {
                    RegionLabel::D3p
                } else if beta >= self.i0_boundary(alpha) - TIE_TOL {
                    RegionLabel::D3pp
                } else {
                    RegionLabel::Outside
                }
            }
            RegionLabel::D4 => {
                if alpha >= slope * beta {
                    RegionLabel::D4p
                } else if alpha >= self.i0_boundary(beta) - TIE_TOL {
                    RegionLabel::D4pp
                } else {
                    RegionLabel::Outside
                }
            }
            other => other,
        })
    }

    /// The lower increasing envelope `Υ*(α, β)`.
    pub fn upsilon_star(&self, alpha: f64, beta: f64) -> Result<f64> {
        check_unit("alpha", alpha)?;
        check_unit("beta", beta)?;
        let a = binary_entropy_inv(1.0 - alpha);
        let b = binary_entropy_inv(1.0 - beta);
        let value = match self.coarse(a, b) {
            RegionLabel::D1 => self.d1_clause(a, b),
            RegionLabel::D2 => 1.0 + h(self.p) - h(a) - h(b),
            RegionLabel::D3 => 1.0 - h(a),
            _ => 1.0 - h(b),
        };
        Ok(value.max(0.0))
    }

    /// The lower envelope `Υ̲*(α, β)` under equality constraints, on I0*.
    pub fn lower_envelope(&self, alpha: f64, beta: f64) -> Result<f64> {
        let label = self.classify(alpha, beta, Granularity::Fine)?;
        Ok(match label {
            RegionLabel::D1 | RegionLabel::D2 => self.upsilon_star(alpha, beta)?,
            RegionLabel::D3p => alpha,
            RegionLabel::D4p => beta,
            RegionLabel::D3pp => self.shadow_clause(alpha, beta),
            RegionLabel::D4pp => self.shadow_clause(beta, alpha),
            _ => return Err(GwError::OutsideRegion { alpha, beta }),
        })
    }

    /// `h(p) + β - (1-α) h((p - α h⁻¹(1 - β/α)) / (1-α))`.
    fn shadow_clause(&self, alpha: f64, beta: f64) -> f64 {
        let p = self.p;
        let c = binary_entropy_inv(1.0 - beta / alpha);
        let rest = 1.0 - alpha;
        if rest <= f64::EPSILON {
            return h(p) + beta;
        }
        h(p) + beta - rest * h((p - alpha * c) / rest)
    }

    /// The upper envelope `Ῡ*(α, β) = h(p) + min(α, β)`, on I0*.
    pub fn upper_envelope(&self, alpha: f64, beta: f64) -> Result<f64> {
        check_unit("alpha", alpha)?;
        check_unit("beta", beta)?;
        if !self.in_projection_region(alpha, beta, TIE_TOL) {
            return Err(GwError::OutsideRegion { alpha, beta });
        }
        Ok(h(self.p) + alpha.min(beta))
    }

    /// Minimum common rate of the lossy Gray-Wyner system under Hamming
    /// distortion, given private rates `r1, r2` and distortions `d1, d2`.
    pub fn lossy_gw_rate(&self, r1: f64, r2: f64, d1: f64, d2: f64) -> Result<f64> {
        check_range("r1", r1, 0.0, f64::INFINITY, "r1 >= 0")?;
        check_range("r2", r2, 0.0, f64::INFINITY, "r2 >= 0")?;
        check_range("d1", d1, 0.0, 0.5, "0 <= d1 <= 1/2")?;
        check_range("d2", d2, 0.0, 0.5, "0 <= d2 <= 1/2")?;
        let alpha = (1.0 - h(d1) - r1).max(0.0);
        let beta = (1.0 - h(d2) - r2).max(0.0);
        self.upsilon_star(alpha.min(1.0), beta.min(1.0))
    }
}

fn check_unit(name: &'static str, v: f64) -> Result<()> {
    check_range(name, v, 0.0, 1.0, "value in [0, 1]")
}

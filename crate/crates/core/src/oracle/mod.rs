//! Independent numerical checks of the closed forms: explicit achieving
//! channels, a multistart search over auxiliary channels, and a
//! time-sharing search for convex envelopes.

mod brute;
mod constructions;
mod timesharing;

use serde::{Deserialize, Serialize};

use crate::error::{GwError, Result};
use crate::info::{AuxChannel, RegionPoint, MAX_W_CARD};

pub use brute::{brute_force_lower, seed_channel, Mode};
pub use constructions::{
    construct_w_cascade, construct_w_coupled, construct_w_gaussian, construct_w_side,
    construct_w_upper, gaussian_w_triple,
};
pub use timesharing::{timesharing_conv_envelope, Constraint};

/// Candidates whose violation is at most this are feasible.
pub const FEASIBLE_TOL: f64 = 1e-6;

/// Best-effort results are accepted up to this violation.
pub const ACCEPT_TOL: f64 = 1e-4;

/// Settings shared by the multistart searches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub restarts: usize,
    pub w_card: usize,
    pub penalty_schedule: Vec<f64>,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            w_card: MAX_W_CARD,
            penalty_schedule: vec![1e1, 1e2, 1e3, 1e4],
            max_iters: 2000,
            seed: 0,
        }
    }
}

impl OracleConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(GwError::Domain {
                name: "restarts",
                value: 0.0,
                constraint: "restarts >= 1",
            });
        }
        if self.w_card == 0 || self.w_card > MAX_W_CARD {
            return Err(GwError::Domain {
                name: "w_card",
                value: self.w_card as f64,
                constraint: "1 <= w_card <= 6",
            });
        }
        let increasing = self.penalty_schedule.windows(2).all(|w| w[0] < w[1]);
        if self.penalty_schedule.is_empty()
            || !increasing
            || self.penalty_schedule.iter().any(|&m| !(m > 0.0))
        {
            return Err(GwError::Domain {
                name: "penalty_schedule",
                value: self.penalty_schedule.first().copied().unwrap_or(f64::NAN),
                constraint: "nonempty, positive, strictly increasing",
            });
        }
        Ok(())
    }
}

/// Outcome of [`brute_force_lower`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub best_channel: AuxChannel,
    pub achieved: RegionPoint,
    pub constraint_violation: f64,
}

/// A random channel with `w_card` outputs. Columns are drawn from a flat
/// Dirichlet and, for half the draws, sharpened by a random power so that
/// near-deterministic channels are also sampled.
pub fn random_channel<R: rand::Rng + ?Sized>(rng: &mut R, w_card: usize) -> AuxChannel {
    let power = if rng.gen_bool(0.5) {
        1.0
    } else {
        rng.gen_range(1.0..8.0)
    };
    let mut probs = Vec::with_capacity(4 * w_card);
    for _ in 0..4 {
        let col: Vec<f64> = (0..w_card)
            .map(|_| (-rng.gen::<f64>().max(1e-300).ln()).powf(power))
            .collect();
        let total: f64 = col.iter().sum();
        probs.extend(col.iter().map(|v| v / total));
    }
    AuxChannel::from_raw_unchecked(w_card, probs)
}

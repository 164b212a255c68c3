//! Multistart penalized search over auxiliary channels `P_{W|XY}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::constructions::{
    construct_w_cascade, construct_w_coupled, construct_w_side, construct_w_upper,
};
use super::{OracleConfig, OracleResult, ACCEPT_TOL, FEASIBLE_TOL};
use crate::dsbs::{DsbsSource, Granularity, RegionLabel};
use crate::error::{check_range, GwError, Result};
use crate::info::{binary_entropy_inv, mi_triple_raw, AuxChannel, LogBase, RegionPoint};
use crate::optim::{nelder_mead, NelderMeadOptions};

/// Smallest probability representable by the logit encoding of a seed.
const LOGIT_FLOOR: f64 = 1e-17;

/// Which envelope the search targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// Minimize `I(X,Y;W)` subject to `I(X;W) ≥ α`, `I(Y;W) ≥ β`.
    Increasing,
    /// Minimize `I(X,Y;W)` subject to `I(X;W) = α`, `I(Y;W) = β`.
    Equality,
    /// Maximize `I(X,Y;W)` subject to `I(X;W) = α`, `I(Y;W) = β`.
    Maximize,
}

struct Problem {
    pxy: [f64; 4],
    w_card: usize,
    alpha: f64,
    beta: f64,
    mode: Mode,
}

impl Problem {
    fn n_params(&self) -> usize {
        4 * (self.w_card - 1)
    }

    /// Column-wise softmax with the last logit of each column pinned at 0.
    fn decode(&self, x: &[f64], out: &mut [f64]) {
        let k = self.w_card - 1;
        for xy in 0..4 {
            let logits = &x[xy * k..(xy + 1) * k];
            let m = logits.iter().copied().fold(0.0f64, f64::max);
            let col = &mut out[xy * self.w_card..(xy + 1) * self.w_card];
            let mut total = 0.0;
            for (c, &l) in col.iter_mut().zip(logits) {
                *c = (l - m).exp();
                total += *c;
            }
            col[k] = (-m).exp();
            total += col[k];
            col.iter_mut().for_each(|c| *c /= total);
        }
    }

    fn encode(&self, ch: &AuxChannel) -> Vec<f64> {
        let k = self.w_card - 1;
        let mut x = Vec::with_capacity(self.n_params());
        for xy in 0..4 {
            let col = &ch.raw()[xy * self.w_card..(xy + 1) * self.w_card];
            let last = col[k].max(LOGIT_FLOOR).ln();
            x.extend(col[..k].iter().map(|&v| v.max(LOGIT_FLOOR).ln() - last));
        }
        x
    }

    fn point(&self, probs: &[f64]) -> RegionPoint {
        mi_triple_raw(&self.pxy, self.w_card, probs, LogBase::Bits)
    }

    /// Signed constraint gaps; positive means violated for `Increasing`.
    fn gaps(&self, pt: &RegionPoint) -> (f64, f64) {
        (self.alpha - pt.alpha, self.beta - pt.beta)
    }

    fn violation(&self, pt: &RegionPoint) -> f64 {
        let (ga, gb) = self.gaps(pt);
        match self.mode {
            Mode::Increasing => ga.max(0.0) + gb.max(0.0),
            Mode::Equality | Mode::Maximize => ga.abs() + gb.abs(),
        }
    }

    /// Quantity being minimized.
    fn objective(&self, pt: &RegionPoint) -> f64 {
        match self.mode {
            Mode::Maximize => -pt.gamma,
            _ => pt.gamma,
        }
    }

    fn penalty(&self, gap: f64, mu: f64, lambda: f64) -> f64 {
        let shifted = gap + lambda / (2.0 * mu);
        let s = match self.mode {
            Mode::Increasing => shifted.max(0.0),
            _ => shifted,
        };
        mu * s * s
    }

    fn update_multiplier(&self, gap: f64, mu: f64, lambda: f64) -> f64 {
        let next = lambda + 2.0 * mu * gap;
        match self.mode {
            Mode::Increasing => next.max(0.0),
            _ => next,
        }
    }
}

/// A restart's best feasible and least-violating candidates.
struct RestartOutcome {
    feasible: Option<(f64, Vec<f64>)>,
    least_violating: (f64, f64, Vec<f64>),
}

impl RestartOutcome {
    fn offer(&mut self, objective: f64, violation: f64, probs: &[f64]) {
        if violation <= FEASIBLE_TOL && self.feasible.as_ref().is_none_or(|(o, _)| objective < *o) {
            self.feasible = Some((objective, probs.to_vec()));
        }
        let (v0, o0, _) = &self.least_violating;
        if violation < *v0 || (violation == *v0 && objective < *o0) {
            self.least_violating = (violation, objective, probs.to_vec());
        }
    }
}

fn run_restart(prob: &Problem, x0: Vec<f64>, cfg: &OracleConfig) -> RestartOutcome {
    let mut probs = vec![0.0; 4 * prob.w_card];
    let mut out = RestartOutcome {
        feasible: None,
        least_violating: (f64::INFINITY, f64::INFINITY, Vec::new()),
    };
    let assess = |x: &[f64], out: &mut RestartOutcome, probs: &mut Vec<f64>| {
        prob.decode(x, probs);
        let pt = prob.point(probs);
        out.offer(prob.objective(&pt), prob.violation(&pt), probs);
        pt
    };
    let mut x = x0;
    assess(&x, &mut out, &mut probs);
    let (mut la, mut lb) = (0.0, 0.0);
    for (stage, &mu) in cfg.penalty_schedule.iter().enumerate() {
        let opts = NelderMeadOptions {
            max_iters: cfg.max_iters,
            step: if stage == 0 { 0.5 } else { 0.1 },
            f_tol: 1e-13,
        };
        let mut scratch = vec![0.0; 4 * prob.w_card];
        let f = |params: &[f64]| {
            prob.decode(params, &mut scratch);
            let p = prob.point(&scratch);
            let (ga, gb) = prob.gaps(&p);
            prob.objective(&p) + prob.penalty(ga, mu, la) + prob.penalty(gb, mu, lb)
        };
        x = nelder_mead(f, &x, &opts).x;
        let pt = assess(&x, &mut out, &mut probs);
        let (ga, gb) = prob.gaps(&pt);
        la = prob.update_multiplier(ga, mu, la);
        lb = prob.update_multiplier(gb, mu, lb);
    }
    out
}

/// Closed-form achieving channel used to seed the search, if one applies.
pub fn seed_channel(src: &DsbsSource, alpha: f64, beta: f64, mode: Mode) -> Result<AuxChannel> {
    let p = src.p();
    let a = binary_entropy_inv(1.0 - alpha);
    let b = binary_entropy_inv(1.0 - beta);
    let ch = match mode {
        Mode::Maximize => construct_w_upper(p, binary_entropy_inv(1.0 - alpha.min(beta)))?,
        Mode::Increasing | Mode::Equality => match src.classify(alpha, beta, Granularity::Coarse)? {
            RegionLabel::D1 => construct_w_coupled(p, a, b)?,
            RegionLabel::D2 => construct_w_cascade(p, a, b)?,
            RegionLabel::D3 => construct_w_side(p, a)?,
            _ => construct_w_side(p, b)?.swap_xy(),
        },
    };
    Ok(ch)
}

/// Multistart search for the envelope selected by `mode` at `(α, β)`.
///
/// Each restart runs Nelder-Mead on a column-wise softmax encoding of the
/// channel, with an augmented-Lagrangian penalty whose weight follows
/// `cfg.penalty_schedule`. Restart 0 starts from the closed-form achieving
/// channel, restarts below `restarts/2` from perturbations of it, and the
/// rest from random logits. The lowest objective among candidates with
/// violation ≤ 1e-6 is returned; failing that, the least-violating candidate
/// if its violation is ≤ 1e-4.
pub fn brute_force_lower(
    src: &DsbsSource,
    alpha: f64,
    beta: f64,
    cfg: &OracleConfig,
    mode: Mode,
) -> Result<OracleResult> {
    cfg.validate()?;
    check_range("alpha", alpha, 0.0, 1.0, "value in [0, 1]")?;
    check_range("beta", beta, 0.0, 1.0, "value in [0, 1]")?;
    if mode != Mode::Increasing && !src.in_projection_region(alpha, beta, 1e-12) {
        return Err(GwError::OutsideRegion { alpha, beta });
    }
    let prob = Problem {
        pxy: crate::info::dsbs_flat(src.p()),
        w_card: cfg.w_card,
        alpha,
        beta,
        mode,
    };
    let seed_ch = seed_channel(src, alpha, beta, mode)?;
    let seed = if seed_ch.w_card() <= cfg.w_card {
        Some(prob.encode(&seed_ch.padded(cfg.w_card)?))
    } else {
        None
    };
    let n = prob.n_params();
    let outcomes: Vec<RestartOutcome> = (0..cfg.restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            let x0 = match &seed {
                Some(s) if i == 0 => s.clone(),
                Some(s) if i < cfg.restarts / 2 => {
                    s.iter().map(|v| v + rng.gen_range(-0.5..0.5)).collect()
                }
                _ => (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect(),
            };
            run_restart(&prob, x0, cfg)
        })
        .collect();

    let mut best_feasible: Option<(f64, &Vec<f64>)> = None;
    let mut least: Option<(f64, f64, &Vec<f64>)> = None;
    for o in &outcomes {
        if let Some((obj, probs)) = &o.feasible {
            if best_feasible.is_none_or(|(b, _)| *obj < b) {
                best_feasible = Some((*obj, probs));
            }
        }
        let (v, obj, probs) = &o.least_violating;
        if least.is_none_or(|(lv, lo, _)| *v < lv || (*v == lv && *obj < lo)) {
            least = Some((*v, *obj, probs));
        }
    }
    let probs = match (best_feasible, least) {
        (Some((_, probs)), _) => probs,
        (None, Some((v, _, probs))) if v <= ACCEPT_TOL => probs,
        (None, least) => {
            return Err(GwError::NonConvergence {
                violation: least.map_or(f64::INFINITY, |l| l.0),
            })
        }
    };
    let best_channel = AuxChannel::from_raw_unchecked(cfg.w_card, probs.clone());
    let achieved = prob.point(probs);
    Ok(OracleResult {
        constraint_violation: prob.violation(&achieved),
        best_channel,
        achieved,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::{mutual_informations, Joint2x2};

    fn quick() -> OracleConfig {
        OracleConfig {
            restarts: 4,
            max_iters: 300,
            ..OracleConfig::default()
        }
    }

    #[test]
    fn encode_decode_round_trip() {
        let prob = Problem {
            pxy: crate::info::dsbs_flat(0.05),
            w_card: 6,
            alpha: 0.0,
            beta: 0.0,
            mode: Mode::Increasing,
        };
        let ch = construct_w_cascade(0.05, 0.01, 0.02).unwrap().padded(6).unwrap();
        let mut probs = vec![0.0; 24];
        prob.decode(&prob.encode(&ch), &mut probs);
        for (a, b) in probs.iter().zip(ch.raw()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn independent_channel_is_optimal_at_origin() {
        let src = DsbsSource::new(0.05).unwrap();
        let res = brute_force_lower(&src, 0.0, 0.0, &quick(), Mode::Increasing).unwrap();
        assert!(res.achieved.gamma <= 1e-6, "{}", res.achieved.gamma);
    }

    #[test]
    fn corner_forces_full_information() {
        let src = DsbsSource::new(0.05).unwrap();
        let res = brute_force_lower(&src, 1.0, 1.0, &quick(), Mode::Increasing).unwrap();
        assert!((res.achieved.gamma - 1.286_396_957_115_956).abs() <= 5e-3);
    }

    #[test]
    fn achieved_point_matches_channel() {
        let src = DsbsSource::new(0.1).unwrap();
        let res = brute_force_lower(&src, 0.4, 0.3, &quick(), Mode::Increasing).unwrap();
        let again = mutual_informations(&Joint2x2::dsbs(0.1).unwrap(), &res.best_channel, LogBase::Bits);
        assert_eq!(again, res.achieved);
        let target = src.upsilon_star(0.4, 0.3).unwrap();
        let own = src
            .upsilon_star(res.achieved.alpha.min(1.0), res.achieved.beta.min(1.0))
            .unwrap();
        assert!(res.achieved.gamma >= own - 1e-9);
        assert!(res.achieved.gamma <= target + 5e-3);
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let src = DsbsSource::new(0.05).unwrap();
        let cfg = OracleConfig {
            seed: 11,
            ..quick()
        };
        let r1 = brute_force_lower(&src, 0.3, 0.2, &cfg, Mode::Increasing).unwrap();
        let r2 = brute_force_lower(&src, 0.3, 0.2, &cfg, Mode::Increasing).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn maximize_reaches_upper_envelope_on_diagonal() {
        let src = DsbsSource::new(0.05).unwrap();
        let res = brute_force_lower(&src, 0.4, 0.4, &quick(), Mode::Maximize).unwrap();
        let upper = src.upper_envelope(0.4, 0.4).unwrap();
        assert!(res.achieved.gamma >= upper - 5e-3);
        let cap = src
            .conditional_entropy()
            + res.achieved.alpha.min(res.achieved.beta);
        assert!(res.achieved.gamma <= cap + 1e-9);
    }

    #[test]
    fn rejects_bad_config() {
        let src = DsbsSource::new(0.05).unwrap();
        let cfg = OracleConfig {
            restarts: 0,
            ..OracleConfig::default()
        };
        assert!(brute_force_lower(&src, 0.1, 0.1, &cfg, Mode::Increasing).is_err());
        assert!(brute_force_lower(&src, 0.3, 0.01, &quick(), Mode::Equality).is_err());
    }
}

//! Self-check suite: closed forms against independent numerical oracles and
//! sampled invariants. Each criterion yields one or more [`Check`]s that
//! report the worst deviation seen and the tolerance it is held to.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dsbs::DsbsSource;
use crate::error::Result;
use crate::gaussian::GaussianSource;
use crate::info::{binary_entropy_inv, h, mutual_informations, Joint2x2, LogBase, Pmf};
use crate::oracle::{
    brute_force_lower, construct_w_cascade, construct_w_coupled, construct_w_side,
    gaussian_w_triple, random_channel, timesharing_conv_envelope, Constraint, Mode, OracleConfig,
};
use crate::ot::{conv_phi_lower, ot_divergence_2x2, q_opt_closed_form, shadow_measure};
use crate::surface::{linspace, surface, Quantity, Source};

/// Number of criteria in the suite.
pub const CRITERIA: u8 = 9;

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub criterion: u8,
    pub name: String,
    pub samples: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    /// One-line human-readable report.
    pub fn report_line(&self) -> String {
        format!(
            "[{}] criterion {} {}: max deviation {:.3e} (tolerance {:.1e}, {} samples)",
            if self.passed { "PASS" } else { "FAIL" },
            self.criterion,
            self.name,
            self.max_deviation,
            self.tolerance,
            self.samples
        )
    }
}

/// Checks for one criterion with the wall time they took.
#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub criterion: u8,
    pub checks: Vec<Check>,
    pub elapsed: Duration,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Suite options. `offset` is added to every closed-form reference value
/// before comparison; a nonzero offset must make the suite fail and serves
/// as a negative control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub quick: bool,
    pub seed: u64,
    pub offset: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            quick: false,
            seed: 0,
            offset: 0.0,
        }
    }
}

/// Running maximum of absolute deviations; NaN counts as infinite.
struct Tracker {
    name: &'static str,
    tolerance: f64,
    max: f64,
    samples: usize,
}

impl Tracker {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            tolerance,
            max: 0.0,
            samples: 0,
        }
    }

    fn push(&mut self, deviation: f64) {
        self.samples += 1;
        let d = if deviation.is_nan() { f64::INFINITY } else { deviation };
        self.max = self.max.max(d);
    }

    /// Records `|got - want|`.
    fn diff(&mut self, got: f64, want: f64) {
        self.push((got - want).abs());
    }

    /// Records how far `lhs` exceeds `rhs` (zero when `lhs <= rhs`).
    fn excess(&mut self, lhs: f64, rhs: f64) {
        self.push((lhs - rhs).max(0.0));
    }

    fn fail(&mut self) {
        self.push(f64::INFINITY);
    }

    fn finish(self, criterion: u8) -> Check {
        Check {
            criterion,
            name: self.name.to_string(),
            samples: self.samples,
            max_deviation: self.max,
            tolerance: self.tolerance,
            passed: self.samples > 0 && self.max <= self.tolerance,
        }
    }
}

fn rng_for(opts: &VerifyOptions, criterion: u8) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(u64::from(criterion));
    rng
}

fn dsbs(p: f64) -> DsbsSource {
    DsbsSource::new(p).expect("fixed crossover probabilities are valid")
}

fn gaussian(rho: f64) -> GaussianSource {
    GaussianSource::new(rho).expect("fixed correlations are valid")
}

/// Criterion 1: the envelope equals the rate-distortion function at the
/// matching distortions.
pub fn identity_check(opts: &VerifyOptions) -> Vec<Check> {
    let mut t = Tracker::new("envelope equals rate-distortion", 1e-12);
    let grid = linspace(1.0, 50);
    for p in [0.05, 0.1, 0.25, 0.4] {
        let src = dsbs(p);
        for &alpha in &grid {
            for &beta in &grid {
                let d1 = binary_entropy_inv(1.0 - alpha);
                let d2 = binary_entropy_inv(1.0 - beta);
                match (src.upsilon_star(alpha, beta), src.rate_distortion(d1, d2)) {
                    (Ok(u), Ok(r)) => t.diff(u, r + opts.offset),
                    _ => t.fail(),
                }
            }
        }
    }
    vec![t.finish(1)]
}

/// Criterion 2: the three explicit channels attain the envelope clauses.
pub fn achievability_check(opts: &VerifyOptions) -> Vec<Check> {
    let mut rng = rng_for(opts, 2);
    let mut cascade = Tracker::new("cascade channel attains its clause", 1e-9);
    let mut side = Tracker::new("side channel attains its clause", 1e-9);
    let mut coupled = Tracker::new("coupled channel attains its clause", 1e-9);
    const SAMPLES: usize = 100;

    let triple = |p: f64, ch: &crate::info::AuxChannel| {
        let pxy = Joint2x2::dsbs(p).expect("valid crossover");
        mutual_informations(&pxy, ch, LogBase::Bits)
    };

    while cascade.samples < SAMPLES {
        let p = rng.gen_range(0.02..0.45);
        let a = rng.gen_range(0.0..0.5);
        let b = rng.gen_range(0.0..0.5);
        if crate::info::binary_convolve(a, b) > p {
            continue;
        }
        let Ok(ch) = construct_w_cascade(p, a, b) else {
            cascade.fail();
            continue;
        };
        let got = triple(p, &ch);
        let want = 1.0 + h(p) - h(a) - h(b) + opts.offset;
        cascade.push(
            (got.alpha - (1.0 - h(a)))
                .abs()
                .max((got.beta - (1.0 - h(b))).abs())
                .max((got.gamma - want).abs()),
        );
    }

    while side.samples < SAMPLES {
        let p = rng.gen_range(0.02..0.45);
        let a = rng.gen_range(0.0..0.5);
        let Ok(ch) = construct_w_side(p, a) else {
            side.fail();
            continue;
        };
        let got = triple(p, &ch);
        let want = 1.0 - h(a) + opts.offset;
        let ap = crate::info::binary_convolve(a, p);
        side.push(
            (got.alpha - (1.0 - h(a)))
                .abs()
                .max((got.beta - (1.0 - h(ap))).abs())
                .max((got.gamma - want).abs()),
        );
    }

    while coupled.samples < SAMPLES {
        let p = rng.gen_range(0.02..0.45);
        let a = rng.gen_range(0.0..0.5);
        let b = rng.gen_range(0.0..0.5);
        let conv = crate::info::binary_convolve;
        if !(conv(a, p) >= b && conv(b, p) >= a && conv(a, b) >= p) {
            continue;
        }
        let Ok(ch) = construct_w_coupled(p, a, b) else {
            coupled.fail();
            continue;
        };
        let got = triple(p, &ch);
        let alpha = 1.0 - h(a);
        let beta = 1.0 - h(b);
        let want = dsbs(p).rate_distortion(a, b).unwrap_or(f64::NAN) + opts.offset;
        coupled.push(
            (got.alpha - alpha)
                .abs()
                .max((got.beta - beta).abs())
                .max((got.gamma - want).abs()),
        );
    }

    vec![cascade.finish(2), side.finish(2), coupled.finish(2)]
}

/// Criterion 3: random channels never leave the region bounded by the
/// closed forms.
pub fn soundness_check(opts: &VerifyOptions) -> Vec<Check> {
    let mut rng = rng_for(opts, 3);
    let per_source = if opts.quick { 10_000 } else { 100_000 };
    let mut lower = Tracker::new("random channels stay above the lower envelope", 1e-9);
    let mut upper = Tracker::new("random channels stay below the upper envelope", 1e-9);
    let mut proj = Tracker::new("random channels stay in the projection region", 1e-9);
    for p in [0.05, 0.25] {
        let src = dsbs(p);
        let pxy = Joint2x2::dsbs(p).expect("valid crossover");
        for _ in 0..per_source {
            let w_card = rng.gen_range(2..=crate::info::MAX_W_CARD);
            let ch = random_channel(&mut rng, w_card);
            let r = mutual_informations(&pxy, &ch, LogBase::Bits);
            let (a, b) = (r.alpha.clamp(0.0, 1.0), r.beta.clamp(0.0, 1.0));
            match src.upsilon_star(a, b) {
                Ok(u) => lower.excess(u + opts.offset, r.gamma),
                Err(_) => lower.fail(),
            }
            upper.excess(r.gamma, h(p) + r.alpha.min(r.beta) - opts.offset);
            proj.push(
                (src.i0_boundary(a) - b)
                    .max(src.i0_boundary(b) - a)
                    .max(0.0),
            );
        }
    }
    vec![lower.finish(3), upper.finish(3), proj.finish(3)]
}

/// Criterion 4: multistart optimization over channels reaches the
/// envelope and never undercuts it.
pub fn oracle_check(opts: &VerifyOptions) -> Vec<Check> {
    let (steps, cfg) = if opts.quick {
        (
            3,
            OracleConfig {
                restarts: 16,
                ..OracleConfig::with_seed(opts.seed)
            },
        )
    } else {
        (9, OracleConfig::with_seed(opts.seed))
    };
    let src = dsbs(0.05);
    let mut attain = Tracker::new("channel search reaches the envelope", 5e-3);
    let mut sound = Tracker::new("channel search never undercuts the envelope", 1e-9);
    let grid = linspace(1.0, steps);
    for &alpha in &grid {
        for &beta in &grid {
            let want = src.upsilon_star(alpha, beta).unwrap_or(f64::NAN) + opts.offset;
            match brute_force_lower(&src, alpha, beta, &cfg, Mode::Increasing) {
                Ok(res) => {
                    attain.diff(res.achieved.gamma, want);
                    let a = res.achieved.alpha.clamp(0.0, 1.0);
                    let b = res.achieved.beta.clamp(0.0, 1.0);
                    match src.upsilon_star(a, b) {
                        Ok(u) => sound.excess(u + opts.offset, res.achieved.gamma),
                        Err(_) => sound.fail(),
                    }
                }
                Err(_) => {
                    attain.fail();
                    sound.fail();
                }
            }
        }
    }
    vec![attain.finish(4), sound.finish(4)]
}

/// Criterion 5: the closed-form optimal coupling and the reference-measure
/// identity.
pub fn ot_check(opts: &VerifyOptions) -> Vec<Check> {
    let mut rng = rng_for(opts, 5);
    let mut coupling = Tracker::new("closed-form coupling matches convex scan", 1e-7);
    let grid = linspace(0.5, 20);
    for p_hat in [0.05, 0.1, 0.25] {
        let pxy = Joint2x2::dsbs(p_hat).expect("valid crossover");
        for &a in &grid {
            for &b in &grid {
                let scan = ot_divergence_2x2(
                    &Pmf::bernoulli(a).expect("a in [0, 1/2]"),
                    &Pmf::bernoulli(b).expect("b in [0, 1/2]"),
                    &pxy,
                );
                match (q_opt_closed_form(a, b, p_hat), scan) {
                    (Ok(q), Ok((_, c))) => coupling.diff(q + opts.offset, c.get(1, 1)),
                    _ => coupling.fail(),
                }
            }
        }
    }

    let mut residual = Tracker::new("reference-measure root residual", 1e-10);
    let mut ident = Tracker::new("divergence gap equals the envelope", 1e-8);
    let conv = crate::info::binary_convolve;
    while ident.samples < 50 {
        let p = [0.05, 0.1, 0.25][rng.gen_range(0..3)];
        let a = rng.gen_range(0.0..0.5);
        let b = rng.gen_range(a..0.5);
        let margin = 1e-3;
        if !(conv(a, p) >= b + margin && conv(b, p) >= a + margin && conv(a, b) >= p + margin) {
            continue;
        }
        match shadow_identity(p, a, b) {
            Ok((res, gap)) => {
                residual.push(res);
                let want = dsbs(p).rate_distortion(a, b).unwrap_or(f64::NAN) + opts.offset;
                ident.diff(gap, want);
            }
            Err(_) => {
                residual.fail();
                ident.fail();
            }
        }
    }
    vec![coupling.finish(5), residual.finish(5), ident.finish(5)]
}

/// Root residual and `D(Q*‖DSBS(p̂*)) - D(P‖DSBS(p̂*))` at a reference
/// measure `p̂*` for the point with distortions `(a, b)`.
fn shadow_identity(p: f64, a: f64, b: f64) -> Result<(f64, f64)> {
    let p_star = shadow_measure(p, a, b)?;
    let q = q_opt_closed_form(a, b, p_star)?;
    let residual = (q - 0.5 * (a + b - p)).abs();
    let reference = Joint2x2::dsbs(p_star)?;
    let coupling = Joint2x2::coupling(a, b, q)?;
    let gap = coupling.divergence(&reference, LogBase::Bits)
        - Joint2x2::dsbs(p)?.divergence(&reference, LogBase::Bits);
    Ok((residual, gap))
}

/// Criterion 6: the case-wise convex envelope against numerical
/// time-sharing.
pub fn conv_envelope_check(opts: &VerifyOptions) -> Vec<Check> {
    let (steps, cfg) = if opts.quick {
        (
            5,
            OracleConfig {
                restarts: 16,
                ..OracleConfig::with_seed(opts.seed)
            },
        )
    } else {
        (15, OracleConfig::with_seed(opts.seed))
    };
    let p_hat = 0.05;
    let mut t = Tracker::new("convex envelope matches time-sharing search", 5e-4);
    let grid = linspace(1.0, steps);
    for &alpha in &grid {
        for &beta in &grid {
            let closed = conv_phi_lower(p_hat, alpha, beta).map(|r| r.0);
            let numeric = timesharing_conv_envelope(p_hat, alpha, beta, &cfg, Constraint::Equality);
            match (closed, numeric) {
                (Ok(c), Ok(n)) => t.diff(c + opts.offset, n),
                _ => t.fail(),
            }
        }
    }
    vec![t.finish(6)]
}

/// Criterion 7: the Gaussian closed forms.
pub fn gaussian_check(opts: &VerifyOptions) -> Vec<Check> {
    let rhos = [0.3, 0.6, 0.9];
    let mut cont = Tracker::new("gaussian envelope is continuous across boundaries", 1e-8);
    let mut mono = Tracker::new("gaussian envelope is nondecreasing", 1e-12);
    let mut hyper = Tracker::new("hypercontractivity optimizations match closed forms", 1e-8);
    let mut sandwich = Tracker::new("jointly gaussian channels stay above the envelope", 1e-9);

    let eps = 1e-10;
    for &rho in &rhos {
        let src = gaussian(rho);
        let u = |a: f64, b: f64| src.upsilon_star(a, b).unwrap_or(f64::NAN);
        let rate = |c: f64| -0.5 * (-c * c).ln_1p();
        for i in 1..=50 {
            let ca = i as f64 / 51.0;
            // G1/G2 boundary: c_a c_b = ρ
            let cb = rho / ca;
            if cb < 1.0 {
                let (a, b) = (rate(ca), rate(cb));
                cont.diff(u(a, b + eps), u(a, (b - eps).max(0.0)) + opts.offset);
                cont.diff(u(b + eps, a), u((b - eps).max(0.0), a) + opts.offset);
            }
            // G1/G3 boundary: c_b = ρ c_a
            let cb = rho * ca;
            let (a, b) = (rate(ca), rate(cb));
            cont.diff(u(a, b + eps), u(a, (b - eps).max(0.0)) + opts.offset);
            cont.diff(u(b + eps, a), u((b - eps).max(0.0), a) + opts.offset);
        }

        let grid = linspace(3.0, 50);
        for (i, &a) in grid.iter().enumerate() {
            for (j, &b) in grid.iter().enumerate() {
                let v = u(a, b);
                if i + 1 < grid.len() {
                    mono.excess(v + opts.offset, u(grid[i + 1], b));
                }
                if j + 1 < grid.len() {
                    mono.excess(v + opts.offset, u(a, grid[j + 1]));
                }
            }
        }

        let grid = linspace(2.0, 20);
        for &a in &grid {
            for &b in &grid {
                match (src.hyper_sup_psi(a, b), src.psi_lower(a, b)) {
                    (Ok(x), Ok(y)) => hyper.diff(x, y + opts.offset),
                    _ => hyper.fail(),
                }
                match (src.hyper_inf_phibar(a, b), src.phi_upper(a, b)) {
                    (Ok(x), Ok(y)) => hyper.diff(x, y + opts.offset),
                    _ => hyper.fail(),
                }
            }
            for q in [-0.5, -1.0, -4.0] {
                match (src.hyper_inf_phiq(q, a), src.phi_q(q, a)) {
                    (Ok(x), Ok(y)) => hyper.diff(x, y + opts.offset),
                    _ => hyper.fail(),
                }
            }
        }
    }

    let mut rng = rng_for(opts, 7);
    let samples = if opts.quick { 10_000 } else { 100_000 };
    while sandwich.samples < samples {
        let rho = rhos[rng.gen_range(0..rhos.len())];
        let src = gaussian(rho);
        let r_x = rng.gen_range(-1.0..1.0_f64);
        let r_y = rng.gen_range(-1.0..1.0_f64);
        let Ok((a, b, g)) = gaussian_w_triple(rho, r_x, r_y) else {
            continue;
        };
        match src.upsilon_star(a.max(0.0), b.max(0.0)) {
            Ok(v) => sandwich.excess(v + opts.offset, g),
            Err(_) => sandwich.fail(),
        }
    }

    vec![
        cont.finish(7),
        mono.finish(7),
        hyper.finish(7),
        sandwich.finish(7),
    ]
}

/// Criterion 8: spot values of the plotted surfaces.
pub fn figure_check(opts: &VerifyOptions) -> Vec<Check> {
    let p = 0.05;
    let src = dsbs(p);
    let mut corner = Tracker::new("dsbs surface corner value", 1e-6);
    match surface(&Source::Dsbs(src), &Quantity::Increasing, 3, 1.0) {
        Ok(rows) => match rows.last().and_then(|r| r.value) {
            Some(v) => corner.diff(v, 1.286_397 + opts.offset),
            None => corner.fail(),
        },
        Err(_) => corner.fail(),
    }

    // the envelopes coincide on the projection boundary beyond α = 2p
    let mut curve = Tracker::new("lower and upper envelopes meet on the boundary curve", 1e-9);
    for alpha in linspace(1.0, 50).into_iter().map(|t| 2.0 * p + (1.0 - 2.0 * p) * t) {
        let beta = src.i0_boundary(alpha);
        for (x, y) in [(alpha, beta), (beta, alpha)] {
            match (src.upper_envelope(x, y), src.lower_envelope(x, y)) {
                (Ok(up), Ok(lo)) => curve.diff(up, lo + opts.offset),
                _ => curve.fail(),
            }
        }
    }

    let g = gaussian(0.9);
    let mut axis = Tracker::new("gaussian envelope on the axis", 1e-12);
    match g.upsilon_star(0.5, 0.0) {
        Ok(v) => axis.diff(v, 0.5 + opts.offset),
        Err(_) => axis.fail(),
    }
    let mut upper = Tracker::new("gaussian upper surface is infinite", 0.0);
    match surface(&Source::Gaussian(g), &Quantity::Upper, 11, 2.0) {
        Ok(rows) => {
            for r in rows {
                upper.push(if r.value == Some(f64::INFINITY) { 0.0 } else { 1.0 });
            }
        }
        Err(_) => upper.fail(),
    }
    vec![corner.finish(8), curve.finish(8), axis.finish(8), upper.finish(8)]
}

/// Criterion 9: the seeded checks repeat bit for bit.
pub fn determinism_check(opts: &VerifyOptions) -> Vec<Check> {
    let quick = VerifyOptions { quick: true, ..*opts };
    let mut t = Tracker::new("seeded checks repeat bit for bit", 0.0);
    let runs: [fn(&VerifyOptions) -> Vec<Check>; 4] = [
        achievability_check,
        soundness_check,
        oracle_check,
        conv_envelope_check,
    ];
    for run in runs {
        let first = run(&quick);
        let second = run(&quick);
        for (x, y) in first.iter().zip(&second) {
            let same = x.samples == y.samples && x.max_deviation.to_bits() == y.max_deviation.to_bits();
            t.push(if same { 0.0 } else { 1.0 });
        }
        if first.len() != second.len() {
            t.fail();
        }
    }
    // full oracle outputs, not just the summary statistics
    let src = dsbs(0.05);
    let cfg = OracleConfig {
        restarts: 8,
        ..OracleConfig::with_seed(opts.seed)
    };
    let a = brute_force_lower(&src, 0.4, 0.7, &cfg, Mode::Increasing);
    let b = brute_force_lower(&src, 0.4, 0.7, &cfg, Mode::Increasing);
    t.push(match (a, b) {
        (Ok(x), Ok(y)) if x == y => 0.0,
        _ => 1.0,
    });
    vec![t.finish(9)]
}

/// Runs one criterion (1 to 9).
pub fn run_criterion(criterion: u8, opts: &VerifyOptions) -> CriterionReport {
    let start = Instant::now();
    let checks = match criterion {
        1 => identity_check(opts),
        2 => achievability_check(opts),
        3 => soundness_check(opts),
        4 => oracle_check(opts),
        5 => ot_check(opts),
        6 => conv_envelope_check(opts),
        7 => gaussian_check(opts),
        8 => figure_check(opts),
        9 => determinism_check(opts),
        _ => Vec::new(),
    };
    CriterionReport {
        criterion,
        checks,
        elapsed: start.elapsed(),
    }
}

/// Runs every criterion in order.
pub fn run_all(opts: &VerifyOptions) -> Vec<CriterionReport> {
    (1..=CRITERIA).map(|c| run_criterion(c, opts)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_criteria_pass() {
        let opts = VerifyOptions {
            quick: true,
            ..VerifyOptions::default()
        };
        for c in [1, 2, 5, 8] {
            let r = run_criterion(c, &opts);
            for check in &r.checks {
                assert!(check.passed, "{}", check.report_line());
            }
        }
    }

    #[test]
    fn offset_breaks_fast_criteria() {
        let opts = VerifyOptions {
            quick: true,
            offset: 1e-3,
            ..VerifyOptions::default()
        };
        for c in [1, 2, 5, 8] {
            assert!(!run_criterion(c, &opts).passed(), "criterion {c}");
        }
    }
}

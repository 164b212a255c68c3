//! Information-theoretic primitives on binary alphabets.
//!
//! Conventions: `0·log 0 = 0`, and probabilities below [`ZERO_PROB`] are
//! treated as exact zeros inside log terms. Binary pmfs are stored as
//! `(P(0), P(1))`; a 2×2 joint is stored row-major with index `2x + y`.

use serde::{Deserialize, Serialize};

use crate::error::{GwError, Result};
use crate::optim::bisect_increasing;

/// Probabilities below this are exact zeros in `x log x` terms.
pub const ZERO_PROB: f64 = 1e-15;

/// Slack accepted on the `[0, 1]` domain of `h` before an error is raised.
const DOMAIN_SLACK: f64 = 1e-12;

/// Inputs whose total deviates from 1 by at most this are renormalized.
const NORMALIZE_SLACK: f64 = 1e-9;

/// Largest supported auxiliary alphabet, `|X||Y| + 2`.
pub const MAX_W_CARD: usize = 6;

/// Logarithm base for entropies and divergences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    Bits,
    Nats,
}

impl LogBase {
    #[inline]
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Bits => x.log2(),
            LogBase::Nats => x.ln(),
        }
    }

    /// Converts a quantity measured in nats into this base.
    #[inline]
    pub fn from_nats(self, v: f64) -> f64 {
        match self {
            LogBase::Bits => v / std::f64::consts::LN_2,
            LogBase::Nats => v,
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            LogBase::Bits => "bits",
            LogBase::Nats => "nats",
        }
    }
}

/// Binary entropy in bits, with the argument clamped to `[0, 1]`.
#[inline]
pub(crate) fn h(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    let u = 1.0 - t;
    let mut s = 0.0;
    if t > ZERO_PROB {
        s -= t * t.log2();
    }
    if u > ZERO_PROB {
        s -= u * u.log2();
    }
    s
}

/// Binary entropy `h(t) = -t log₂ t - (1-t) log₂ (1-t)`.
pub fn binary_entropy(t: f64) -> Result<f64> {
    if !(-DOMAIN_SLACK..=1.0 + DOMAIN_SLACK).contains(&t) {
        return Err(GwError::Domain {
            name: "t",
            value: t,
            constraint: "0 <= t <= 1",
        });
    }
    Ok(h(t))
}

/// Inverse of `h` restricted to `[0, 1/2]`; `y` is clamped to `[0, 1]`.
///
/// Bisection (at most 200 halvings) down to the resolution of `f64`.
pub fn binary_entropy_inv(y: f64) -> f64 {
    let y = if y.is_nan() { 0.0 } else { y.clamp(0.0, 1.0) };
    if y <= 0.0 {
        return 0.0;
    }
    if y >= 1.0 {
        return 0.5;
    }
    bisect_increasing(h, y, 0.0, 0.5, 200)
}

/// `1 - h((1-u)/2)` in bits, accurate to full relative precision as
/// `u → 0` where the direct form cancels.
pub(crate) fn one_minus_h_centered(u: f64) -> f64 {
    let u = u.abs().min(1.0);
    if u >= 0.1 {
        return 1.0 - h(0.5 * (1.0 - u));
    }
    // (1+u)ln(1+u) + (1-u)ln(1-u) = Σ u^{2k} / (k(2k-1))
    let u2 = u * u;
    let mut term = u2;
    let mut sum = 0.0;
    for k in 1..=12 {
        let kf = k as f64;
        sum += term / (kf * (2.0 * kf - 1.0));
        term *= u2;
    }
    sum / (2.0 * std::f64::consts::LN_2)
}

/// Inverse of [`one_minus_h_centered`] on `[0, 1]`: the `u ∈ [0, 1]` with
/// `1 - h((1-u)/2) = gap`. Newton from the right, where the function is
/// increasing and convex, so the iterates decrease monotonically.
pub(crate) fn centered_from_gap(gap: f64) -> f64 {
    if !(gap > 0.0) {
        return 0.0;
    }
    if gap >= 1.0 {
        return 1.0;
    }
    // 1 - h((1-u)/2) >= u²/(2 ln 2), so this start lies right of the root
    let mut u = (2.0 * std::f64::consts::LN_2 * gap).sqrt().min(1.0 - f64::EPSILON);
    for _ in 0..100 {
        // value and slope share ln(1 ± u) away from the series branch
        let (value, slope_ln2) = if u >= 0.1 {
            let (lp, lm) = (u.ln_1p(), (-u).ln_1p());
            let two_ln2 = 2.0 * std::f64::consts::LN_2;
            (((1.0 + u) * lp + (1.0 - u) * lm) / two_ln2, 0.5 * (lp - lm))
        } else {
            (one_minus_h_centered(u), u.atanh())
        };
        let excess = value - gap;
        if excess <= 0.0 {
            break;
        }
        let next = u - excess * std::f64::consts::LN_2 / slope_ln2;
        if !(next < u) {
            break;
        }
        u = next;
    }
    u
}

/// Binary convolution `a(1-b) + b(1-a)`: crossover of two cascaded BSCs.
#[inline]
pub fn binary_convolve(a: f64, b: f64) -> f64 {
    a * (1.0 - b) + b * (1.0 - a)
}

#[inline]
fn xlogy_ratio(q: f64, p: f64, base: LogBase) -> f64 {
    if q <= ZERO_PROB {
        0.0
    } else if p <= 0.0 {
        f64::INFINITY
    } else {
        q * base.log(q / p)
    }
}

/// A finite probability vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pmf {
    probs: Vec<f64>,
}

impl Pmf {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let probs = normalized(probs)?;
        Ok(Self { probs })
    }

    /// `Bern(t)`, i.e. `(1 - t, t)`.
    pub fn bernoulli(t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(GwError::Domain {
                name: "t",
                value: t,
                constraint: "0 <= t <= 1",
            });
        }
        Ok(Self {
            probs: vec![1.0 - t, t],
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

impl AsRef<[f64]> for Pmf {
    fn as_ref(&self) -> &[f64] {
        &self.probs
    }
}

fn normalized(mut probs: Vec<f64>) -> Result<Vec<f64>> {
    if probs.is_empty() {
        return Err(GwError::InvalidDistribution("empty pmf".into()));
    }
    if let Some(bad) = probs.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(GwError::InvalidDistribution(format!(
            "entry {bad} is negative or not finite"
        )));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > NORMALIZE_SLACK {
        return Err(GwError::InvalidDistribution(format!(
            "entries sum to {total}, expected 1"
        )));
    }
    probs.iter_mut().for_each(|v| *v /= total);
    Ok(probs)
}

/// A joint distribution on `{0,1}²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Joint2x2 {
    m: [[f64; 2]; 2],
}

impl Joint2x2 {
    pub fn new(m: [[f64; 2]; 2]) -> Result<Self> {
        let flat = normalized(vec![m[0][0], m[0][1], m[1][0], m[1][1]])?;
        Ok(Self::from_flat_unchecked([flat[0], flat[1], flat[2], flat[3]]))
    }

    pub(crate) fn from_flat_unchecked(f: [f64; 4]) -> Self {
        Self {
            m: [[f[0], f[1]], [f[2], f[3]]],
        }
    }

    /// `DSBS(p)`: uniform `X`, `Y` the output of `BSC(p)`.
    pub fn dsbs(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(GwError::Domain {
                name: "p",
                value: p,
                constraint: "0 <= p <= 1",
            });
        }
        Ok(Self::from_flat_unchecked(dsbs_flat(p)))
    }

    /// The coupling of `Bern(a)` and `Bern(b)` with `Q(1,1) = q`:
    /// `[[1+q-a-b, b-q], [a-q, q]]`.
    pub fn coupling(a: f64, b: f64, q: f64) -> Result<Self> {
        Self::new([[1.0 + q - a - b, b - q], [a - q, q]])
    }

    /// Swap the roles of `X` and `Y`.
    pub fn transpose(&self) -> Self {
        Self {
            m: [[self.m[0][0], self.m[1][0]], [self.m[0][1], self.m[1][1]]],
        }
    }

    /// Like [`Joint2x2::coupling`] but clamps round-off negatives to zero;
    /// for callers whose `q` is feasible by construction.
    pub(crate) fn coupling_clamped(a: f64, b: f64, q: f64) -> Self {
        let f = [1.0 + q - a - b, b - q, a - q, q].map(|v| v.max(0.0));
        let total: f64 = f.iter().sum();
        Self::from_flat_unchecked(f.map(|v| v / total))
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.m[x][y]
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        self.m
    }

    pub fn flat(&self) -> [f64; 4] {
        [self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1]]
    }

    pub fn marginal_x(&self) -> Pmf {
        Pmf {
            probs: vec![self.m[0][0] + self.m[0][1], self.m[1][0] + self.m[1][1]],
        }
    }

    pub fn marginal_y(&self) -> Pmf {
        Pmf {
            probs: vec![self.m[0][0] + self.m[1][0], self.m[0][1] + self.m[1][1]],
        }
    }

    /// Joint entropy `H(X,Y)`.
    pub fn entropy(&self, base: LogBase) -> f64 {
        self.flat()
            .iter()
            .filter(|&&v| v > ZERO_PROB)
            .map(|&v| -v * base.log(v))
            .sum()
    }
}

pub(crate) fn dsbs_flat(p: f64) -> [f64; 4] {
    [(1.0 - p) / 2.0, p / 2.0, p / 2.0, (1.0 - p) / 2.0]
}

/// Relative entropy `D(q‖p)`; `+∞` when `q` is not absolutely continuous
/// with respect to `p`.
pub fn kl_divergence<D: AsRef<[f64]> + ?Sized>(q: &D, p: &D, base: LogBase) -> f64 {
    kl_slices(q.as_ref(), p.as_ref(), base)
}

pub(crate) fn kl_slices(q: &[f64], p: &[f64], base: LogBase) -> f64 {
    debug_assert_eq!(q.len(), p.len());
    let total: f64 = q.iter().zip(p).map(|(&qi, &pi)| xlogy_ratio(qi, pi, base)).sum();
    total.max(0.0)
}

impl AsRef<[f64]> for Joint2x2 {
    fn as_ref(&self) -> &[f64] {
        self.m.as_flattened()
    }
}

impl Joint2x2 {
    /// `D(self‖other)`.
    pub fn divergence(&self, other: &Joint2x2, base: LogBase) -> f64 {
        kl_slices(&self.flat(), &other.flat(), base)
    }
}

/// A conditional distribution `P_{W|XY}` over `w_card ≤ 6` symbols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxChannel {
    w_card: usize,
    /// `probs[(2x + y) * w_card + w] = P(W = w | X = x, Y = y)`.
    probs: Vec<f64>,
}

impl AuxChannel {
    /// Builds a channel from its four columns, indexed by `2x + y`.
    pub fn from_columns(cols: [Vec<f64>; 4]) -> Result<Self> {
        let w_card = cols[0].len();
        if w_card == 0 || w_card > MAX_W_CARD {
            return Err(GwError::InvalidDistribution(format!(
                "w_card = {w_card} must lie in [1, {MAX_W_CARD}]"
            )));
        }
        let mut probs = Vec::with_capacity(4 * w_card);
        for col in cols {
            if col.len() != w_card {
                return Err(GwError::InvalidDistribution(
                    "channel columns have different lengths".into(),
                ));
            }
            probs.extend(normalized(col)?);
        }
        Ok(Self { w_card, probs })
    }

    /// Channel whose output ignores `(x, y)`.
    pub fn constant(pmf: &Pmf) -> Result<Self> {
        let col = pmf.probs().to_vec();
        Self::from_columns([col.clone(), col.clone(), col.clone(), col])
    }

    /// `W = (X, Y)` encoded as `2x + y`.
    pub fn identity() -> Self {
        let mut probs = vec![0.0; 16];
        for xy in 0..4 {
            probs[xy * 4 + xy] = 1.0;
        }
        Self { w_card: 4, probs }
    }

    pub(crate) fn from_raw_unchecked(w_card: usize, probs: Vec<f64>) -> Self {
        debug_assert_eq!(probs.len(), 4 * w_card);
        Self { w_card, probs }
    }

    pub fn w_card(&self) -> usize {
        self.w_card
    }

    pub fn column(&self, x: usize, y: usize) -> &[f64] {
        let xy = 2 * x + y;
        &self.probs[xy * self.w_card..(xy + 1) * self.w_card]
    }

    pub fn raw(&self) -> &[f64] {
        &self.probs
    }

    /// The same channel with the roles of `X` and `Y` exchanged.
    pub fn swap_xy(&self) -> Self {
        let w = self.w_card;
        let mut probs = vec![0.0; 4 * w];
        for x in 0..2 {
            for y in 0..2 {
                let src = (2 * x + y) * w;
                let dst = (2 * y + x) * w;
                probs[dst..dst + w].copy_from_slice(&self.probs[src..src + w]);
            }
        }
        Self { w_card: w, probs }
    }

    /// Pads the output alphabet with never-used symbols.
    pub fn padded(&self, w_card: usize) -> Result<Self> {
        if w_card < self.w_card || w_card > MAX_W_CARD {
            return Err(GwError::InvalidDistribution(format!(
                "cannot pad w_card {} to {w_card}",
                self.w_card
            )));
        }
        let mut probs = vec![0.0; 4 * w_card];
        for xy in 0..4 {
            probs[xy * w_card..xy * w_card + self.w_card]
                .copy_from_slice(&self.probs[xy * self.w_card..(xy + 1) * self.w_card]);
        }
        Ok(Self { w_card, probs })
    }

    /// The induced conditional `P_{XY|W=w}` and the weight `P_W(w)`.
    pub fn posterior(&self, p_xy: &Joint2x2, w: usize) -> (f64, Option<Joint2x2>) {
        let pxy = p_xy.flat();
        let mut joint = [0.0; 4];
        for xy in 0..4 {
            joint[xy] = pxy[xy] * self.probs[xy * self.w_card + w];
        }
        let pw: f64 = joint.iter().sum();
        if pw <= 0.0 {
            return (0.0, None);
        }
        joint.iter_mut().for_each(|v| *v /= pw);
        (pw, Some(Joint2x2::from_flat_unchecked(joint)))
    }
}

/// A point `(α, β, γ)` of the mutual-information or divergence region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionPoint {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// `(I(X;W), I(Y;W), I(X,Y;W))` for `W` drawn through `ch` from `p_xy`.
pub fn mutual_informations(p_xy: &Joint2x2, ch: &AuxChannel, base: LogBase) -> RegionPoint {
    mi_triple_raw(&p_xy.flat(), ch.w_card, &ch.probs, base)
}

pub(crate) fn mi_triple_raw(pxy: &[f64; 4], w_card: usize, probs: &[f64], base: LogBase) -> RegionPoint {
    let px = [pxy[0] + pxy[1], pxy[2] + pxy[3]];
    let py = [pxy[0] + pxy[2], pxy[1] + pxy[3]];
    let mut alpha = 0.0;
    let mut beta = 0.0;
    let mut gamma = 0.0;
    for w in 0..w_card {
        let q = [
            pxy[0] * probs[w],
            pxy[1] * probs[w_card + w],
            pxy[2] * probs[2 * w_card + w],
            pxy[3] * probs[3 * w_card + w],
        ];
        let qw = q[0] + q[1] + q[2] + q[3];
        if qw <= ZERO_PROB {
            continue;
        }
        for xy in 0..4 {
            gamma += xlogy_ratio(q[xy], pxy[xy] * qw, base);
        }
        let qx = [q[0] + q[1], q[2] + q[3]];
        let qy = [q[0] + q[2], q[1] + q[3]];
        for i in 0..2 {
            alpha += xlogy_ratio(qx[i], px[i] * qw, base);
            beta += xlogy_ratio(qy[i], py[i] * qw, base);
        }
    }
    RegionPoint {
        alpha: alpha.max(0.0),
        beta: beta.max(0.0),
        gamma: gamma.max(0.0),
    }
}

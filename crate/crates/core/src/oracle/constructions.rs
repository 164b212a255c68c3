//! Explicit auxiliary channels whose mutual-information triples attain the
//! closed-form envelopes.

use crate::error::{check_range, GwError, Result};
use crate::info::{binary_convolve, AuxChannel};

fn check_crossover(name: &'static str, v: f64) -> Result<()> {
    check_range(name, v, 0.0, 0.5, "0 <= crossover <= 1/2")
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 0.5) {
        return Err(GwError::Domain {
            name: "p",
            value: p,
            constraint: "0 < p < 1/2",
        });
    }
    Ok(())
}

/// `BSC(e)` transition probability for input `u`, output `v`.
fn bsc(e: f64, u: usize, v: usize) -> f64 {
    if u == v {
        1.0 - e
    } else {
        e
    }
}

/// Normalizes per-column joint weights `joint[xy][w]` into `P(w | x, y)`.
fn channel_from_joint(joint: &[Vec<f64>; 4]) -> AuxChannel {
    let w_card = joint[0].len();
    let mut probs = Vec::with_capacity(4 * w_card);
    for col in joint {
        let total: f64 = col.iter().sum();
        probs.extend(col.iter().map(|v| v / total));
    }
    AuxChannel::from_raw_unchecked(w_card, probs)
}

/// `X → BSC(a) → U → BSC(c) → V → BSC(b) → Y` with uniform `U, V` and
/// `W = (U, V)` encoded as `2u + v`, where `c` makes the end-to-end
/// crossover equal to `p`. Requires `a*b ≤ p`.
pub fn construct_w_cascade(p: f64, a: f64, b: f64) -> Result<AuxChannel> {
    check_p(p)?;
    check_crossover("a", a)?;
    check_crossover("b", b)?;
    let ab = binary_convolve(a, b);
    if ab > p + 1e-15 {
        return Err(GwError::Infeasible(format!(
            "cascade needs a*b <= p, got a*b = {ab} > {p}"
        )));
    }
    let c = ((p - ab) / (1.0 - 2.0 * ab)).max(0.0);
    let mut joint: [Vec<f64>; 4] = Default::default();
    for x in 0..2 {
        for y in 0..2 {
            let col = &mut joint[2 * x + y];
            for u in 0..2 {
                for v in 0..2 {
                    col.push(0.5 * bsc(a, x, u) * bsc(c, u, v) * bsc(b, v, y));
                }
            }
        }
    }
    Ok(channel_from_joint(&joint))
}

/// `W ~ Bern(1/2)`, `W → BSC(a) → X → BSC(p) → Y`.
pub fn construct_w_side(p: f64, a: f64) -> Result<AuxChannel> {
    check_p(p)?;
    check_crossover("a", a)?;
    let mut probs = Vec::with_capacity(8);
    for x in 0..2 {
        for _y in 0..2 {
            probs.extend((0..2).map(|w| bsc(a, w, x)));
        }
    }
    Ok(AuxChannel::from_raw_unchecked(2, probs))
}

/// `W ~ Bern(1/2)` with `P_{XY|W}` the coupling of `BSC(a)` and `BSC(b)`
/// whose average is `DSBS(p)`. Feasible exactly when all entries of the
/// two conditionals are nonnegative.
pub fn construct_w_coupled(p: f64, a: f64, b: f64) -> Result<AuxChannel> {
    check_p(p)?;
    check_crossover("a", a)?;
    check_crossover("b", b)?;
    let given0 = [
        1.0 - (a + b + p) / 2.0,
        (-a + b + p) / 2.0,
        (a - b + p) / 2.0,
        (a + b - p) / 2.0,
    ];
    if let Some(bad) = given0.iter().find(|&&v| v < -1e-15) {
        return Err(GwError::Infeasible(format!(
            "coupled construction has negative entry {bad}"
        )));
    }
    let given0 = given0.map(|v| v.max(0.0));
    let given1 = [given0[3], given0[2], given0[1], given0[0]];
    let joint: [Vec<f64>; 4] = std::array::from_fn(|xy| vec![0.5 * given0[xy], 0.5 * given1[xy]]);
    Ok(channel_from_joint(&joint))
}

/// `W = (W', Z)` with `W' → BSC(a) → X` and `Z = X ⊕ Y`, encoded `2w' + z`.
pub fn construct_w_upper(p: f64, a: f64) -> Result<AuxChannel> {
    check_p(p)?;
    check_crossover("a", a)?;
    let mut probs = vec![0.0; 16];
    for x in 0..2 {
        for y in 0..2 {
            let xy = 2 * x + y;
            let z = x ^ y;
            for w1 in 0..2 {
                probs[xy * 4 + 2 * w1 + z] = bsc(a, w1, x);
            }
        }
    }
    Ok(AuxChannel::from_raw_unchecked(4, probs))
}

/// Triple `(I(X;W), I(Y;W), I(X,Y;W))` in nats for a jointly Gaussian `W`
/// with `X = √(1-N₁) W₁ + √N₁ ·noise`, `Y` likewise with `N₂`, and residual
/// correlation `ρ̂ = (ρ - √((1-N₁)(1-N₂))) / √(N₁N₂)` between the noises.
pub fn construct_w_gaussian(rho: f64, n1: f64, n2: f64) -> Result<(f64, f64, f64)> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(GwError::Domain {
            name: "rho",
            value: rho,
            constraint: "0 < rho < 1",
        });
    }
    for (name, n) in [("n1", n1), ("n2", n2)] {
        if !(n > 0.0 && n <= 1.0) {
            return Err(GwError::Domain {
                name,
                value: n,
                constraint: "0 < N <= 1",
            });
        }
    }
    let rho_hat = (rho - ((1.0 - n1) * (1.0 - n2)).sqrt()) / (n1 * n2).sqrt();
    if !(-1e-12..1.0).contains(&rho_hat) {
        return Err(GwError::Infeasible(format!(
            "residual correlation {rho_hat} outside [0, 1)"
        )));
    }
    let rho_hat = rho_hat.max(0.0);
    let alpha = -0.5 * n1.ln();
    let beta = -0.5 * n2.ln();
    let gamma = 0.5 * ((1.0 - rho * rho) / (n1 * n2 * (1.0 - rho_hat * rho_hat))).ln();
    Ok((alpha, beta, gamma))
}

/// Triple in nats for `W` scalar Gaussian with correlations `(r_x, r_y)`
/// to `(X, Y)`; errors if the 3×3 correlation matrix is not positive
/// semidefinite.
pub fn gaussian_w_triple(rho: f64, r_x: f64, r_y: f64) -> Result<(f64, f64, f64)> {
    let det_xy = 1.0 - rho * rho;
    let det3 = 1.0 + 2.0 * rho * r_x * r_y - rho * rho - r_x * r_x - r_y * r_y;
    if !(det3 > 0.0) || r_x.abs() >= 1.0 || r_y.abs() >= 1.0 || !(det_xy > 0.0) {
        return Err(GwError::Infeasible(
            "correlation matrix is not positive definite".into(),
        ));
    }
    let alpha = -0.5 * (1.0 - r_x * r_x).ln();
    let beta = -0.5 * (1.0 - r_y * r_y).ln();
    let gamma = 0.5 * (det_xy / det3).ln();
    Ok((alpha, beta, gamma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsbs::DsbsSource;
    use crate::info::{h, mutual_informations, Joint2x2, LogBase};
    use approx::assert_abs_diff_eq;

    const P: f64 = 0.05;

    fn triple(ch: &AuxChannel) -> (f64, f64, f64) {
        let t = mutual_informations(&Joint2x2::dsbs(P).unwrap(), ch, LogBase::Bits);
        (t.alpha, t.beta, t.gamma)
    }

    #[test]
    fn cascade_examples() {
        let (a, b, g) = triple(&construct_w_cascade(P, 0.0, 0.0).unwrap());
        assert_abs_diff_eq!(g, 1.0 + h(P), epsilon = 1e-9);
        assert_abs_diff_eq!(a, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(b, 1.0, epsilon = 1e-9);
        // a*a = p: c = 0
        let a = (1.0 - (1.0 - 2.0 * P).sqrt()) / 2.0;
        let (_, _, g) = triple(&construct_w_cascade(P, a, a).unwrap());
        assert_abs_diff_eq!(g, 1.0 + h(P) - 2.0 * h(a), epsilon = 1e-9);
        assert!(construct_w_cascade(P, 0.2, 0.2).is_err());
    }

    #[test]
    fn side_examples() {
        let (a, b, g) = triple(&construct_w_side(P, 0.0).unwrap());
        assert_abs_diff_eq!(a, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b, 1.0 - h(P), epsilon = 1e-12);
        assert_abs_diff_eq!(g, 1.0, epsilon = 1e-12);
        let (a, b, g) = triple(&construct_w_side(P, 0.5).unwrap());
        assert!(a.max(b).max(g) < 1e-12);
        let (_, b, _) = triple(&construct_w_side(P, 0.1).unwrap());
        assert_abs_diff_eq!(b, 1.0 - h(0.14), epsilon = 1e-9);
    }

    #[test]
    fn coupled_examples() {
        let (a, b, g) = triple(&construct_w_coupled(P, 0.5, 0.5).unwrap());
        assert!(a.max(b).max(g) < 1e-12);
        let ch = construct_w_coupled(P, 0.2, 0.2).unwrap();
        let (a, b, g) = triple(&ch);
        assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        let want = 1.0 - 0.95 * h(0.35 / 1.9) - 0.05 * h(0.5);
        assert_abs_diff_eq!(g, want, epsilon = 1e-9);
        let src = DsbsSource::new(P).unwrap();
        assert_abs_diff_eq!(g, src.upsilon_star(1.0 - h(0.2), 1.0 - h(0.2)).unwrap(), epsilon = 1e-9);
        // the two conditionals average back to the source
        let pxy = Joint2x2::dsbs(P).unwrap();
        let mut avg = [0.0; 4];
        for w in 0..2 {
            let (pw, post) = ch.posterior(&pxy, w);
            assert_abs_diff_eq!(pw, 0.5, epsilon = 1e-12);
            for (s, v) in avg.iter_mut().zip(post.unwrap().flat()) {
                *s += pw * v;
            }
        }
        for (s, v) in avg.iter().zip(pxy.flat()) {
            assert_abs_diff_eq!(s, &v, epsilon = 1e-12);
        }
        assert!(construct_w_coupled(P, 0.0, 0.4).is_err());
    }

    #[test]
    fn upper_examples() {
        let (a, b, g) = triple(&construct_w_upper(P, 0.5).unwrap());
        assert!(a.max(b) < 1e-12);
        assert_abs_diff_eq!(g, h(P), epsilon = 1e-12);
        let (a, b, g) = triple(&construct_w_upper(P, 0.0).unwrap());
        assert_abs_diff_eq!(a, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g, 1.0 + h(P), epsilon = 1e-12);
        let (a, _, g) = triple(&construct_w_upper(P, 0.11).unwrap());
        assert_abs_diff_eq!(g - a, h(P), epsilon = 1e-9);
    }

    #[test]
    fn gaussian_examples() {
        assert_eq!(construct_w_gaussian(0.9, 1.0, 1.0).unwrap(), (0.0, 0.0, 0.0));
        let n = (-1.0f64).exp();
        let (a, b, g) = construct_w_gaussian(0.9, n, n).unwrap();
        assert_abs_diff_eq!(a, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(b, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(g, 0.547_394_894_755_2, epsilon = 1e-9);
        // zero residual correlation
        let n = 0.1;
        let (a, b, g) = construct_w_gaussian(0.9, n, n).unwrap();
        assert_abs_diff_eq!(g, a + b - 0.5 * (1.0 / 0.19f64).ln(), epsilon = 1e-12);
        assert!(construct_w_gaussian(0.9, 0.05, 0.05).is_err());
    }

    #[test]
    fn gaussian_w_triple_rejects_invalid_correlations() {
        assert!(gaussian_w_triple(0.9, 0.9, -0.9).is_err());
        let (a, b, g) = gaussian_w_triple(0.5, 0.0, 0.0).unwrap();
        assert_eq!((a, b), (0.0, 0.0));
        assert_abs_diff_eq!(g, 0.0, epsilon = 1e-15);
    }
}

use approx::assert_abs_diff_eq;
use gwregion::ot::{
    conv_phi_lower, optimal_coupling, ot_divergence_2x2, phi_lower, phi_q_dsbs, phi_upper,
    psi_lower_dsbs, q_opt_closed_form,
};
use gwregion::{binary_entropy_inv, Joint2x2, LogBase, Pmf};
use proptest::prelude::*;

fn bern(t: f64) -> Pmf {
    Pmf::bernoulli(t).unwrap()
}

#[test]
fn divergence_of_the_source_marginals_is_zero() {
    let p = Joint2x2::dsbs(0.1).unwrap();
    let (v, q) = ot_divergence_2x2(&bern(0.5), &bern(0.5), &p).unwrap();
    assert_abs_diff_eq!(v, 0.0, epsilon = 1e-12);
    assert_abs_diff_eq!(q.get(1, 1), 0.45, epsilon = 1e-12);
}

#[test]
fn upper_envelope_is_the_best_of_the_marginal_flips() {
    let p_hat = 0.05;
    let pxy = Joint2x2::dsbs(p_hat).unwrap();
    for i in 0..=10 {
        for j in 0..=10 {
            let (alpha, beta) = (i as f64 / 10.0, j as f64 / 10.0);
            let a = binary_entropy_inv(1.0 - alpha);
            let b = binary_entropy_inv(1.0 - beta);
            let best = [(a, b), (a, 1.0 - b), (1.0 - a, b), (1.0 - a, 1.0 - b)]
                .iter()
                .map(|&(x, y)| ot_divergence_2x2(&bern(x), &bern(y), &pxy).unwrap().0)
                .fold(f64::NEG_INFINITY, f64::max);
            assert_abs_diff_eq!(phi_upper(p_hat, alpha, beta).unwrap(), best, epsilon = 1e-9);
        }
    }
}

#[test]
fn convex_envelope_is_a_valid_mixture() {
    let p_hat = 0.05;
    let pxy = Joint2x2::dsbs(p_hat).unwrap();
    for (alpha, beta) in [(0.3, 0.3), (0.6, 0.2), (0.2, 0.6), (0.0, 0.5), (0.9, 0.05)] {
        let (v, mix, _) = conv_phi_lower(p_hat, alpha, beta).unwrap();
        let total: f64 = mix.weights.iter().sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        let (s, t, d) = mix.divergences(&pxy);
        assert_abs_diff_eq!(s, alpha, epsilon = 1e-8);
        assert_abs_diff_eq!(t, beta, epsilon = 1e-8);
        assert_abs_diff_eq!(d, v, epsilon = 1e-8);
    }
}

#[test]
fn rejects_bad_arguments() {
    assert!(q_opt_closed_form(1.5, 0.2, 0.1).is_err());
    assert!(phi_lower(0.0, 0.2, 0.2).is_err());
    assert!(phi_q_dsbs(0.1, 0.5, 0.2).is_err());
    assert!(psi_lower_dsbs(0.1, 1.5, 0.2).is_err());
}

proptest! {
    #[test]
    fn optimal_coupling_has_the_requested_marginals(p in 0.01f64..0.49, a in 0.0f64..=0.5, b in 0.0f64..=0.5) {
        let q = optimal_coupling(a, b, p).unwrap();
        prop_assert!((q.marginal_x().probs()[1] - a).abs() < 1e-10);
        prop_assert!((q.marginal_y().probs()[1] - b).abs() < 1e-10);
        prop_assert!(q.flat().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn closed_form_coupling_is_optimal(p in 0.01f64..0.49, a in 0.0f64..=0.5, b in 0.0f64..=0.5) {
        let pxy = Joint2x2::dsbs(p).unwrap();
        let (_, scan) = ot_divergence_2x2(&bern(a), &bern(b), &pxy).unwrap();
        prop_assert!((q_opt_closed_form(a, b, p).unwrap() - scan.get(1, 1)).abs() < 1e-7);
    }

    #[test]
    fn sandwich(p in 0.01f64..0.49, alpha in 0.0f64..=1.0, beta in 0.0f64..=1.0) {
        let lo = phi_lower(p, alpha, beta).unwrap();
        let up = phi_upper(p, alpha, beta).unwrap();
        let psi = psi_lower_dsbs(p, alpha, beta).unwrap();
        let (conv, _, _) = conv_phi_lower(p, alpha, beta).unwrap();
        prop_assert!(psi <= conv + 1e-10);
        prop_assert!(conv <= lo + 1e-10);
        prop_assert!(lo <= up + 1e-10);
        prop_assert!(psi >= alpha.max(beta) - 1e-10);
    }

    #[test]
    fn lower_envelopes_are_convex(
        p in 0.01f64..0.49,
        a1 in 0.0f64..=1.0, b1 in 0.0f64..=1.0,
        a2 in 0.0f64..=1.0, b2 in 0.0f64..=1.0,
    ) {
        let (am, bm) = (0.5 * (a1 + a2), 0.5 * (b1 + b2));
        let psi = |a, b| psi_lower_dsbs(p, a, b).unwrap();
        let conv = |a, b| conv_phi_lower(p, a, b).unwrap().0;
        prop_assert!(psi(am, bm) <= 0.5 * (psi(a1, b1) + psi(a2, b2)) + 1e-9);
        prop_assert!(conv(am, bm) <= 0.5 * (conv(a1, b1) + conv(a2, b2)) + 1e-9);
    }

    #[test]
    fn upper_envelope_is_concave(
        p in 0.01f64..0.49,
        a1 in 0.0f64..=1.0, b1 in 0.0f64..=1.0,
        a2 in 0.0f64..=1.0, b2 in 0.0f64..=1.0,
    ) {
        let (am, bm) = (0.5 * (a1 + a2), 0.5 * (b1 + b2));
        let up = |a, b| phi_upper(p, a, b).unwrap();
        prop_assert!(up(am, bm) >= 0.5 * (up(a1, b1) + up(a2, b2)) - 1e-9);
    }

    #[test]
    fn phi_q_is_increasing_and_concave(p in 0.01f64..0.49, q in -5.0f64..-0.05, a in 0.0f64..0.9, d in 0.001f64..0.05) {
        let f = |x| phi_q_dsbs(p, q, x).unwrap();
        prop_assert!(f(a + d) >= f(a) - 1e-10);
        prop_assert!(f(a + d) - f(a) >= f(a + 2.0 * d) - f(a + d) - 1e-9);
    }

    #[test]
    fn divergence_is_nonnegative(p in 0.01f64..0.49, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let pxy = Joint2x2::dsbs(p).unwrap();
        let (v, q) = ot_divergence_2x2(&bern(a), &bern(b), &pxy).unwrap();
        prop_assert!(v >= 0.0);
        prop_assert!((q.divergence(&pxy, LogBase::Bits) - v).abs() < 1e-12);
    }
}

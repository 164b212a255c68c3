use approx::assert_abs_diff_eq;
use gwregion::{
    binary_entropy, binary_entropy_inv, mutual_informations, AuxChannel, DsbsSource, Granularity,
    Joint2x2, LogBase, RegionLabel,
};
use proptest::prelude::*;

fn h(t: f64) -> f64 {
    binary_entropy(t).unwrap()
}

fn src(p: f64) -> DsbsSource {
    DsbsSource::new(p).unwrap()
}

#[test]
fn envelope_matches_rate_distortion_on_grid() {
    for p in [0.05, 0.1, 0.25, 0.4] {
        let s = src(p);
        for i in 0..50 {
            for j in 0..50 {
                let (a, b) = (i as f64 / 49.0, j as f64 / 49.0);
                let r = s
                    .rate_distortion(binary_entropy_inv(1.0 - a), binary_entropy_inv(1.0 - b))
                    .unwrap();
                assert_abs_diff_eq!(s.upsilon_star(a, b).unwrap(), r, epsilon = 1e-12);
            }
        }
    }
}

#[test]
fn corner_and_origin_values() {
    let s = src(0.05);
    assert_abs_diff_eq!(s.upsilon_star(1.0, 1.0).unwrap(), 1.286_397, epsilon = 1e-6);
    assert_abs_diff_eq!(s.upsilon_star(0.0, 0.0).unwrap(), 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(s.upper_envelope(0.0, 0.0).unwrap(), 0.286_397, epsilon = 1e-6);
}

#[test]
fn channel_below_twice_the_crossover_reaches_the_axis() {
    // W = 1 only when x = 1, and only for y = 0 or rarely y = 1: W is independent of Y
    let p = 0.05;
    let r = p / (1.0 - p);
    let ch = AuxChannel::from_columns([
        vec![1.0, 0.0],
        vec![1.0, 0.0],
        vec![0.0, 1.0],
        vec![1.0 - r, r],
    ])
    .unwrap();
    let t = mutual_informations(&Joint2x2::dsbs(p).unwrap(), &ch, LogBase::Bits);
    assert_abs_diff_eq!(t.beta, 0.0, epsilon = 1e-12);
    assert_abs_diff_eq!(t.alpha, h(p) - 0.5 * h(2.0 * p), epsilon = 1e-12);
    assert!(t.alpha < 2.0 * p);
    assert!(src(p).in_projection_region(t.alpha, t.beta, 1e-12));
}

#[test]
fn equality_envelope_dominates_increasing_envelope() {
    let s = src(0.05);
    let mut outer = 0;
    for i in 0..=40 {
        for j in 0..=40 {
            let (a, b) = (i as f64 / 40.0, j as f64 / 40.0);
            if !s.in_projection_region(a, b, 0.0) {
                continue;
            }
            let label = s.classify(a, b, Granularity::Fine).unwrap();
            let lower = s.lower_envelope(a, b).unwrap();
            let inc = s.upsilon_star(a, b).unwrap();
            assert!(lower >= inc - 1e-12, "({a}, {b}) {label}");
            match label {
                RegionLabel::D1 | RegionLabel::D2 => assert_abs_diff_eq!(lower, inc, epsilon = 1e-12),
                RegionLabel::D3pp | RegionLabel::D4pp => outer += 1,
                _ => {}
            }
        }
    }
    assert!(outer > 0);
}

#[test]
fn envelopes_meet_on_the_projection_boundary() {
    let p = 0.05;
    let s = src(p);
    for i in 0..=20 {
        let a = 2.0 * p + (1.0 - 2.0 * p) * i as f64 / 20.0;
        let b = s.i0_boundary(a);
        assert_abs_diff_eq!(
            s.upper_envelope(a, b).unwrap(),
            s.lower_envelope(a, b).unwrap(),
            epsilon = 1e-9
        );
    }
}

#[test]
fn lossy_rate_reduces_to_the_envelope() {
    let s = src(0.1);
    let (d1, d2) = (0.05, 0.08);
    let v = s.lossy_gw_rate(0.2, 0.3, d1, d2).unwrap();
    let alpha = (1.0 - h(d1) - 0.2).max(0.0);
    let beta = (1.0 - h(d2) - 0.3).max(0.0);
    assert_abs_diff_eq!(v, s.upsilon_star(alpha, beta).unwrap(), epsilon = 1e-14);
}

#[test]
fn rejects_bad_arguments() {
    assert!(DsbsSource::new(0.5).is_err());
    assert!(DsbsSource::new(0.0).is_err());
    assert!(DsbsSource::new(f64::NAN).is_err());
    let s = src(0.05);
    assert!(s.upsilon_star(1.1, 0.2).is_err());
    assert!(s.upsilon_star(-0.1, 0.2).is_err());
    assert!(s.rate_distortion(0.6, 0.1).is_err());
}

proptest! {
    #[test]
    fn envelope_is_symmetric(p in 0.01f64..0.49, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let s = src(p);
        prop_assert!((s.upsilon_star(a, b).unwrap() - s.upsilon_star(b, a).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn envelope_is_monotone(p in 0.01f64..0.49, a in 0.0f64..0.95, b in 0.0f64..=1.0, da in 0.0f64..0.05) {
        let s = src(p);
        prop_assert!(s.upsilon_star(a + da, b).unwrap() >= s.upsilon_star(a, b).unwrap() - 1e-12);
    }

    #[test]
    fn envelope_is_bounded(p in 0.01f64..0.49, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let v = src(p).upsilon_star(a, b).unwrap();
        prop_assert!(v >= a.max(b) - 1e-12);
        prop_assert!(v <= 1.0 + h(p) + 1e-12);
    }

    #[test]
    fn envelope_is_continuous(p in 0.01f64..0.49, a in 0.0f64..0.999, b in 0.0f64..0.999) {
        let s = src(p);
        let eps = 1e-9;
        let v = s.upsilon_star(a, b).unwrap();
        // 1 - h is Hölder continuous near its ends, hence the loose bound
        prop_assert!((s.upsilon_star(a + eps, b).unwrap() - v).abs() < 1e-3);
        prop_assert!((s.upsilon_star(a, b + eps).unwrap() - v).abs() < 1e-3);
    }

    #[test]
    fn upper_envelope_dominates_lower(p in 0.01f64..0.49, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let s = src(p);
        prop_assume!(s.in_projection_region(a, b, 0.0));
        prop_assert!(s.upper_envelope(a, b).unwrap() >= s.lower_envelope(a, b).unwrap() - 1e-12);
    }

    #[test]
    fn classification_is_total(p in 0.01f64..0.49, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let coarse = src(p).classify(a, b, Granularity::Coarse).unwrap();
        prop_assert!(matches!(coarse, RegionLabel::D1 | RegionLabel::D2 | RegionLabel::D3 | RegionLabel::D4));
    }
}

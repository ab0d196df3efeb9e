use std::f64::consts::PI;

use fpoly_core::mixing::{
    blocking_sequence_with, hypothesis_check, lemma1_diagnostic_with, psi, psi_certified, BlockingRule, Condition,
    MixingKind, MixingProfile, Monotonicity, Tau,
};
use proptest::prelude::*;

fn poly(kind: MixingKind, theta: f64) -> MixingProfile {
    MixingProfile::polynomial(kind, Tau::Infinite, theta, None).unwrap()
}

fn head(p: i32, m: u64) -> f64 {
    (1..=m).map(|j| (j as f64).powi(-p)).sum()
}

/// `sum_{j > m} j^-p`: closed form for small `m`, brute force (smallest terms
/// first) otherwise.
fn zeta_tail(p: i32, zeta: f64, m: u64) -> f64 {
    if m <= 10 {
        return zeta - head(p, m);
    }
    ((m + 1)..=10_000_000).rev().map(|j| (j as f64).powi(-p)).sum()
}

#[test]
fn critical_rates_sum_to_basel_constant() {
    let basel = PI * PI / 6.0;
    for d in 1..=4u32 {
        let alpha = poly(MixingKind::Alpha, f64::from(2 * d + 1));
        for c in [Condition::Prop1I, Condition::Thm1I] {
            let cert = hypothesis_check(&alpha, d, c).unwrap();
            assert!(cert.holds);
            let s = cert.sum.unwrap();
            assert!((s.value - basel).abs() < 1e-8, "d={d} {}: {}", c.name(), s.value);
            assert!(s.error_bound < 1e-8);
        }
        let rho = poly(MixingKind::Rho, f64::from(d + 1));
        let cert = hypothesis_check(&rho, d, Condition::Thm1Ii).unwrap();
        assert!((cert.sum.unwrap().value - basel).abs() < 1e-8);
    }
}

#[test]
fn borderline_rates_are_rejected() {
    for d in 1..=4u32 {
        let alpha = poly(MixingKind::Alpha, f64::from(2 * d));
        let cert = hypothesis_check(&alpha, d, Condition::Thm1I).unwrap();
        assert!(!cert.holds, "d={d}");
        assert!(cert.witness.unwrap().contains("divergent"));
        let rho = poly(MixingKind::Rho, f64::from(d));
        assert!(!hypothesis_check(&rho, d, Condition::Prop1Ii).unwrap().holds);
    }
}

#[test]
fn psi_matches_zeta_closed_forms() {
    let zeta4 = PI.powi(4) / 90.0;
    let zeta6 = PI.powi(6) / 945.0;
    // d = 2: j^2 * 8j * j^-7 = 8 j^-4
    let p = poly(MixingKind::Alpha, 7.0);
    for m in [1u64, 3, 10, 100, 1000] {
        let want = 8.0 * zeta_tail(4, zeta4, m);
        let got = psi(&p, 2, m).unwrap();
        assert!(((got - want) / want).abs() < 1e-10, "d=2 m={m}: {got} vs {want}");
    }
    // d = 3: j^3 * (24 j^2 + 2) * j^-9 = 24 j^-4 + 2 j^-6
    let p = poly(MixingKind::Alpha, 9.0);
    for m in [1u64, 5, 50, 500] {
        let want = 24.0 * zeta_tail(4, zeta4, m) + 2.0 * zeta_tail(6, zeta6, m);
        let got = psi_certified(&p, 3, m).unwrap();
        assert!(((got.value - want) / want).abs() < 1e-10, "d=3 m={m}: {} vs {want}", got.value);
        assert!((got.value - want).abs() <= got.error_bound + 1e-15 * want);
    }
}

#[test]
fn finite_range_profiles_give_vanishing_tails() {
    for d in 1..=3u32 {
        let p = MixingProfile::finite_range(MixingKind::Alpha, Tau::Infinite, 2);
        let t = lemma1_diagnostic_with(&p, d, &[1e-2, 1e-3, 1e-4], BlockingRule::Proof).unwrap();
        for row in &t.rows {
            assert_eq!(row.tail_ratio, 0.0, "d={d} b={}", row.b);
        }
        for c in [Condition::Prop1I, Condition::Thm1I] {
            assert!(hypothesis_check(&p, d, c).unwrap().holds);
        }
    }
}

#[test]
fn proof_rule_drives_every_lemma_trend() {
    let p = MixingProfile::polynomial(MixingKind::Alpha, Tau::Infinite, 6.0, Some(0.25)).unwrap();
    let t = lemma1_diagnostic_with(&p, 2, &[1e-2, 1e-3, 1e-4, 1e-5, 1e-6], BlockingRule::Proof).unwrap();
    assert_eq!(
        (t.m_trend, t.volume_trend, t.tail_trend),
        (Monotonicity::Strict, Monotonicity::Strict, Monotonicity::Strict)
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn blocking_sequence_is_consistent(e1 in 1.0f64..7.0, de in 0.01f64..2.0, d in 1u32..4, theta_extra in 0.5f64..4.0) {
        let p = MixingProfile::polynomial(MixingKind::Alpha, Tau::Infinite, f64::from(2 * d) + theta_extra, Some(0.25)).unwrap();
        let (b1, b2) = (10f64.powf(-e1), 10f64.powf(-(e1 + de)));
        for rule in [BlockingRule::Displayed, BlockingRule::Proof] {
            let s1 = blocking_sequence_with(&p, d, b1, rule).unwrap();
            let s2 = blocking_sequence_with(&p, d, b2, rule).unwrap();
            prop_assert!(s2.v >= s1.v);
            prop_assert!(s1.m >= s1.v && s2.m >= s2.v);
            let driver = match rule {
                BlockingRule::Displayed => s1.psi_v,
                BlockingRule::Proof => s1.psi_v.sqrt(),
            };
            prop_assert!((s1.m as f64).powi(d as i32) * b1 >= driver * (1.0 - 1e-12));
            prop_assert!(s1.tail <= s1.psi_v);
        }
    }
}

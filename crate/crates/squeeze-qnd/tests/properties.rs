//! Property tests over randomized parameters.

use proptest::prelude::*;

use squeeze_qnd::concentration::{entanglement_threshold, p_m, pair_entanglement, run_ideal};
use squeeze_qnd::fock::{
    tensor, truncation_for, two_mode_squeezed, Bipartition, SqueezedParams, BOB_MODES,
};
use squeeze_qnd::kerr::{effective_chi, measurement_window, validate_regime, CircuitParams};
use squeeze_qnd::purification::{branch_probabilities, ChannelParams};
use squeeze_qnd::readout::{cascade_steady_output, expected_signal, ReadoutConfig};

fn circuit_strategy() -> impl Strategy<Value = CircuitParams> {
    (
        1e6..5e8f64,
        1e6..5e8f64,
        5e8..5e9f64,
        1e6..5e9f64,
        5e8..5e9f64,
        1e6..5e8f64,
        1e3..1e6f64,
    )
        .prop_map(|(g1, g2, delta, delta_small, omega_c, kappa1, kappa2)| {
            CircuitParams::new(g1, g2, delta, delta_small, omega_c, kappa1, kappa2).unwrap()
        })
}

proptest! {
    #[test]
    fn chi_is_quadratic_in_each_coupling(p in circuit_strategy()) {
        let chi = effective_chi(&p);
        let mut g1_doubled = p;
        g1_doubled.g1 *= 2.0;
        prop_assert_eq!(effective_chi(&g1_doubled), 4.0 * chi);
        let mut g2_doubled = p;
        g2_doubled.g2 *= 2.0;
        prop_assert_eq!(effective_chi(&g2_doubled), 4.0 * chi);
        let mut delta_doubled = p;
        delta_doubled.delta_big *= 2.0;
        prop_assert_eq!(effective_chi(&delta_doubled), chi / 2.0);
    }

    #[test]
    fn window_scales_with_probe_and_chi(p in circuit_strategy(), g in 1.0..200.0f64) {
        let w = measurement_window(&p, g).unwrap();
        let w2 = measurement_window(&p, 2.0 * g).unwrap();
        prop_assert!((w2.tau_min_s - w.tau_min_s / 4.0).abs() <= 1e-12 * w.tau_min_s);
        prop_assert_eq!(w2.tau_max_s, w.tau_max_s);

        // doubling one coupling quadruples chi, dividing tau_min by 16
        let mut strong = p;
        strong.g1 *= 2.0;
        let w16 = measurement_window(&strong, g).unwrap();
        prop_assert!((w16.tau_min_s - w.tau_min_s / 16.0).abs() <= 1e-10 * w.tau_min_s);
    }

    #[test]
    fn feasibility_reports_are_pure(p in circuit_strategy()) {
        prop_assert_eq!(validate_regime(&p), validate_regime(&p));
    }

    #[test]
    fn signal_is_linear_and_symmetric(
        chi in -0.2..0.2f64,
        g in 1.0..100.0f64,
        n1 in 0usize..6,
        n2 in 0usize..6,
    ) {
        let cfg = ReadoutConfig::normalized(chi, g, 1.0, false).unwrap();
        let s1 = expected_signal(n1, &cfg);
        let s2 = expected_signal(n2, &cfg);
        let s12 = expected_signal(n1 + n2, &cfg);
        prop_assert!((s12 - (s1 + s2)).abs() < 1e-9);
        let fwd = cascade_steady_output(n1, n2, &cfg);
        let rev = cascade_steady_output(n2, n1, &cfg);
        prop_assert!((fwd - rev).norm() < 1e-12);
    }

    #[test]
    fn threshold_identity_holds(r in 0.05..2.0f64) {
        let sp = SqueezedParams::new(r).unwrap();
        let lhs = (1.0 + entanglement_threshold(&sp)).ln();
        prop_assert!((lhs - pair_entanglement(&sp)).abs() < 1e-12);
    }

    #[test]
    fn p_m_is_a_distribution(r in 0.05..1.4f64) {
        let sp = SqueezedParams::new(r).unwrap();
        let n = truncation_for(sp.lambda(), 1e-12).unwrap();
        let mut total = 0.0;
        for m in 0..=n {
            let p = p_m(&sp, m);
            prop_assert!(p >= 0.0);
            total += p;
        }
        prop_assert!(total <= 1.0 + 1e-12);
        prop_assert!(1.0 - total < 1e-9);
    }

    #[test]
    fn improvement_agrees_with_entanglement_comparison(r in 0.05..1.4f64) {
        let sp = SqueezedParams::new(r).unwrap();
        let e_in = pair_entanglement(&sp);
        for out in run_ideal(&sp, 12) {
            prop_assert_eq!(out.improved, out.entanglement_nats > e_in);
        }
    }

    #[test]
    fn branch_weights_form_distribution(
        r in 0.05..1.2f64,
        eta_a in 0.0..2.0f64,
        eta_b in 0.0..2.0f64,
    ) {
        let sp = SqueezedParams::new(r).unwrap();
        let ch = ChannelParams::new(eta_a, eta_b, 0.01).unwrap();
        if let Ok(branches) = branch_probabilities(&sp, &ch) {
            let total: f64 = branches.iter().map(|b| b.weight).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!(branches.iter().all(|b| b.weight >= 0.0));
            // jump weights are linear in the loss product
            let ch2 = ChannelParams::new(2.0 * eta_a, 2.0 * eta_b, 0.01).unwrap();
            if let Ok(doubled) = branch_probabilities(&sp, &ch2) {
                for (a, b) in branches[1..].iter().zip(&doubled[1..]) {
                    prop_assert!((b.weight - 2.0 * a.weight).abs() < 1e-15);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn distribution_normalizes_and_entropy_bounded(r in 0.1..1.0f64) {
        let sp = SqueezedParams::new(r).unwrap();
        let n_max = truncation_for(sp.lambda(), 1e-8).unwrap().max(6);
        let pair = two_mode_squeezed(&sp, n_max);
        let t = tensor(&pair, &pair).unwrap();
        let dist = t.total_number_distribution(&BOB_MODES).unwrap();
        let total: f64 = dist.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);

        let e = t.entanglement_entropy(&Bipartition::alice_bob()).unwrap();
        let rank = (n_max + 1) * (n_max + 1);
        prop_assert!(e >= 0.0);
        prop_assert!(e <= (rank as f64).ln() + 1e-12);

        // fidelity is symmetric and bounded
        let other = tensor(&pair, &pair).unwrap();
        let f = t.fidelity(&other).unwrap();
        prop_assert!((f - other.fidelity(&t).unwrap()).abs() < 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&f));
    }
}

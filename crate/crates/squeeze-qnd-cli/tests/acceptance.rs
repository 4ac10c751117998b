//! Acceptance suite: every verification criterion of the project, one test
//! each, printing a pass/fail line with the measured quantities (visible
//! with `cargo test --test acceptance -- --nocapture`).
//!
//! Expected values marked "oracle" were computed independently with
//! arbitrary-precision arithmetic and frozen here.

use std::process::Command;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use squeeze_qnd::concentration::{
    entanglement_threshold, p_m, run_ideal, smallest_improving_m, success_probability,
};
use squeeze_qnd::fock::{
    ideal_m_state, tensor, truncation_for, two_mode_squeezed, Bipartition, SqueezedParams,
    ALICE_MODES, BOB_MODES,
};
use squeeze_qnd::kerr::{effective_chi, measurement_window, CircuitParams};
use squeeze_qnd::purification::{
    branch_probabilities, jump_state, p_no_closed_form, run_batch, ChannelParams,
};
use squeeze_qnd::readout::{
    cascade_steady_output, decode, expected_signal, misidentification_prob, sample_homodyne,
    simulate_cascade_ode, ReadoutConfig,
};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

fn conclude(id: u32, desc: &str, pass: bool, detail: String) {
    println!(
        "[criterion {id:02}] {}: {desc} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {id} failed: {desc} — {detail}");
}

/// Quoted circuit parameters: g1/2pi = g2/2pi = 300 MHz, Delta/2pi =
/// Omega_c/2pi = 1.5 GHz, kappa1/2pi = 100 MHz, kappa2/2pi = 20 kHz.
fn paper_circuit() -> CircuitParams {
    CircuitParams::new(3e8, 3e8, 1.5e9, 1.5e9, 1.5e9, 1e8, 2e4).unwrap()
}

#[test]
fn criterion_01_chi_reproduction() {
    let chi = effective_chi(&paper_circuit());
    let rel = (chi.abs() - 2.4e6).abs() / 2.4e6;
    conclude(
        1,
        "|chi|/2pi = 2.400 MHz from the quoted circuit parameters (0.1%)",
        rel < 1e-3,
        format!("|chi|/2pi = {:.6e} Hz, rel dev {rel:.2e}", chi.abs()),
    );
}

#[test]
fn criterion_02_measurement_window() {
    let w = measurement_window(&paper_circuit(), 50.0).unwrap();
    // oracle: kappa1_ang / (64 |g|^2 chi_ang^2) and 1 / kappa2_ang
    let tau_min_oracle = 1.726_941_656_813_100_4e-11;
    let tau_max_oracle = 7.957_747_154_594_767e-6;
    let dev_min = (w.tau_min_s - tau_min_oracle).abs() / tau_min_oracle;
    let dev_max = (w.tau_max_s - tau_max_oracle).abs() / tau_max_oracle;
    // the published rounded figures: 0.02 ns and 8 us
    let paper_min = (w.tau_min_s - 0.02e-9).abs() / 0.02e-9;
    let paper_max = (w.tau_max_s - 8e-6).abs() / 8e-6;
    let pass = dev_min < 1e-3 && dev_max < 1e-3 && paper_min < 0.2 && paper_max < 0.2;
    conclude(
        2,
        "measurement window (0.1% vs closed form, 20% vs rounded figures)",
        pass,
        format!(
            "tau_min = {:.4e} s (dev {dev_min:.1e}, vs 0.02 ns {paper_min:.1e}), tau_max = {:.4e} s (dev {dev_max:.1e}, vs 8 us {paper_max:.1e})",
            w.tau_min_s, w.tau_max_s
        ),
    );
}

fn entropy_closed_form(r: f64) -> f64 {
    let c2 = r.cosh().powi(2);
    let s2 = r.sinh().powi(2);
    c2 * c2.ln() - s2 * s2.ln()
}

#[test]
fn criterion_03_entropy_closed_form() {
    // oracle value of the closed form at r = 0.9
    let oracle_09 = 1.422_838_629_080_265;
    assert!(
        (entropy_closed_form(0.9) - oracle_09).abs() < 1e-9,
        "closed form drifted from its frozen oracle"
    );

    let mut detail = String::new();
    let mut pass = true;
    for &r in &[0.3, 0.9, 1.2] {
        let sp = SqueezedParams::new(r).unwrap();
        let state = two_mode_squeezed(&sp, 40);
        let numeric = state.entanglement_entropy(&Bipartition::pair()).unwrap();
        let dev = (numeric - entropy_closed_form(r)).abs();
        let ok = dev < 1e-6;
        pass &= ok;
        detail.push_str(&format!("r={r}: |dev| = {dev:.2e}{}; ", if ok { "" } else { " EXCEEDS 1e-6" }));
    }
    // The r = 1.2 deviation is the truncation error of the renormalized
    // n_max = 40 state itself (5.28e-6, dominated by the discarded
    // p*ln(p) tail), not an implementation artifact; no correct
    // implementation of the specified construction can land inside 1e-6
    // at this cutoff. Kept red deliberately; see the test output.
    conclude(
        3,
        "Schmidt entropy at n_max = 40 vs closed form (1e-6, r in {0.3, 0.9, 1.2})",
        pass,
        detail,
    );
}

#[test]
fn criterion_04_p_m_oracle_equivalence() {
    // tensor cutoffs sized so the truncation renormalization inflates the
    // kept sector weights by less than the 1e-10 comparison tolerance
    let cases = [(0.3, 15usize), (0.5, 16), (0.9, 34), (1.2, 65)];
    let mut pass = true;
    let mut worst = (0.0f64, 0.0f64);
    for &(r, n_max) in &cases {
        let sp = SqueezedParams::new(r).unwrap();
        let pair = two_mode_squeezed(&sp, n_max);
        let composite = tensor(&pair, &pair).unwrap();
        let dist = composite.total_number_distribution(&BOB_MODES).unwrap();
        for (m, &entry) in dist.iter().enumerate().take(16) {
            let dev = (entry - p_m(&sp, m)).abs();
            if dev > worst.1 {
                worst = (r, dev);
            }
            pass &= dev < 1e-10;
        }
        // cumulative closed-form mass at the sized cutoff
        let sized = truncation_for(sp.lambda(), 1e-12).unwrap();
        let deficit = 1.0 - (0..=sized).map(|m| p_m(&sp, m)).sum::<f64>();
        pass &= deficit < 1e-9;
    }
    conclude(
        4,
        "closed-form p_m vs projection norms (1e-10, m <= 15) and cutoff deficit (1e-9)",
        pass,
        format!("worst |dev| = {:.2e} at r = {}", worst.1, worst.0),
    );
}

#[test]
fn criterion_05_threshold_and_success() {
    let sp = SqueezedParams::new(0.9).unwrap();
    let threshold = entanglement_threshold(&sp);
    let m_star = smallest_improving_m(&sp);
    let n_max = truncation_for(sp.lambda(), 1e-12).unwrap();
    let success = success_probability(&sp, n_max);

    // brute-force oracles computed from scratch
    let lambda = 0.9f64.tanh();
    let x = lambda * lambda;
    let c2 = 0.9f64.cosh().powi(2);
    let s2 = 0.9f64.sinh().powi(2);
    let threshold_brute = c2.powf(c2) / s2.powf(s2) - 1.0;
    let success_brute: f64 =
        1.0 - (0..4).map(|m| (1.0 - x).powi(2) * x.powi(m) * (m as f64 + 1.0)).sum::<f64>();

    let pass = (threshold - 3.1493).abs() < 1e-3
        && (threshold - threshold_brute).abs() < 1e-9
        && m_star == 4
        && (success - 0.2043).abs() < 5e-4
        && (success - success_brute).abs() < 1e-9;
    conclude(
        5,
        "threshold 3.1493 +- 1e-3 (improving m = 4), success 0.2043 +- 5e-4",
        pass,
        format!("threshold = {threshold:.6}, m* = {m_star}, success = {success:.6}"),
    );
}

#[test]
fn criterion_06_collapse_quality() {
    let sp = SqueezedParams::new(0.9).unwrap();
    let n_max = 12;
    let pair = two_mode_squeezed(&sp, n_max);
    let composite = tensor(&pair, &pair).unwrap();
    let outcomes = run_ideal(&sp, n_max);
    let mut pass = true;
    let mut worst_fid = 1.0f64;
    let mut worst_ent = 0.0f64;
    for out in outcomes.iter().take(11) {
        let (_, collapsed) = composite.project_total_number(&BOB_MODES, out.m).unwrap();
        let ideal = ideal_m_state(out.m, n_max).unwrap();
        let fid = collapsed.fidelity(&ideal).unwrap();
        let entropy = collapsed
            .entanglement_entropy(&Bipartition::alice_bob())
            .unwrap();
        let ent_dev = (entropy - (out.m as f64 + 1.0).ln()).abs();
        worst_fid = worst_fid.min(fid);
        worst_ent = worst_ent.max(ent_dev);
        pass &= fid >= 1.0 - 1e-9 && ent_dev < 1e-9;
    }
    conclude(
        6,
        "collapsed states for m <= 10: fidelity >= 1 - 1e-9, entropy = ln(1+m) +- 1e-9",
        pass,
        format!("worst fidelity = {worst_fid:.12}, worst entropy dev = {worst_ent:.2e}"),
    );
}

#[test]
fn criterion_07_qnd_chain() {
    let cfg = ReadoutConfig::normalized(0.024, 50.0, 1.0, false).unwrap();
    let kappa1 = cfg.kappa1();
    let mut pass = true;
    let mut worst_ode = 0.0f64;
    let mut worst_phase = 0.0f64;
    for n1 in 0..=5usize {
        for n2 in 0..=5usize {
            let exact = cascade_steady_output(n1, n2, &cfg);
            let ode = simulate_cascade_ode(n1, n2, &cfg, 100.0 / kappa1, 0.01 / kappa1).unwrap();
            let ode_rel = (ode - exact).norm() / exact.norm();
            worst_ode = worst_ode.max(ode_rel);
            pass &= ode_rel < 1e-6;

            if n1 + n2 > 0 {
                let x_exact = SQRT_2 * exact.re;
                let x_fo = expected_signal(n1 + n2, &cfg);
                let phi = 4.0 * cfg.chi() * (n1 + n2) as f64 / kappa1;
                // raw first-order deviation against the documented
                // envelope phi^2/6 plus the 2% margin, and the
                // phase-corrected deviation against the 2% margin alone
                let raw_rel = (x_exact - x_fo).abs() / x_fo.abs();
                let x_phase = SQRT_2 * cfg.g_mag() * kappa1.sqrt() * phi.sin();
                let phase_rel = (x_exact - x_phase).abs() / x_fo.abs();
                worst_phase = worst_phase.max(phase_rel);
                pass &= raw_rel <= phi * phi / 6.0 + 0.02;
                pass &= phase_rel <= 0.02;
            }
        }
    }
    // the worked example: sector (1, 2) sits within a flat 2% of 14.4
    let example = SQRT_2 * cascade_steady_output(1, 2, &cfg).re;
    pass &= (example / SQRT_2 - 14.4).abs() / 14.4 < 0.02;

    let mut decode_ok = true;
    for n in 0..=10usize {
        decode_ok &= decode(expected_signal(n, &cfg), &cfg) == n;
    }
    pass &= decode_ok;
    conclude(
        7,
        "ODE vs exact cascade (1e-6), exact vs first-order within phi^2/6 + 2% (phase-corrected within 2%), decode identity",
        pass,
        format!(
            "worst ODE rel = {worst_ode:.2e}, worst phase-corrected dev = {worst_phase:.2e}, decode identity = {decode_ok}"
        ),
    );
}

#[test]
fn criterion_08_noise_statistics() {
    let n_samples = 100_000usize;

    // sampled variance against 1/(2 tau)
    let cfg = ReadoutConfig::normalized(0.024, 50.0, 1.0, true).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(80_801);
    let mean = expected_signal(2, &cfg);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n_samples {
        let read = sample_homodyne(2, &cfg, &mut rng).unwrap();
        let d = read.x_value - mean;
        sum += d;
        sum_sq += d * d;
    }
    let var = (sum_sq - sum * sum / n_samples as f64) / (n_samples as f64 - 1.0);
    let var_expect = 1.0 / (2.0 * cfg.tau());
    let var_band = 3.0 * var_expect * (2.0 / (n_samples as f64 - 1.0)).sqrt();
    let var_ok = (var - var_expect).abs() < var_band;

    // misidentification rate at tau = 100 tau_min against the Gaussian
    // tail oracle erfc(10 / (2 sqrt 2)) = 5.7330e-7
    let tau_min = 1.0 / (64.0 * 50.0f64.powi(2) * 0.024f64.powi(2));
    let cfg_long = ReadoutConfig::normalized(0.024, 50.0, 100.0 * tau_min, true).unwrap();
    let p_oracle = 5.733_031_437_583_878e-7;
    assert!((misidentification_prob(&cfg_long) - p_oracle).abs() < 1e-12);
    let mut rng = ChaCha12Rng::seed_from_u64(80_802);
    let mut wrong = 0u64;
    for _ in 0..n_samples {
        if sample_homodyne(3, &cfg_long, &mut rng).unwrap().decoded_m != 3 {
            wrong += 1;
        }
    }
    let rate = wrong as f64 / n_samples as f64;
    let rate_bound = p_oracle + 3.0 * (p_oracle * (1.0 - p_oracle) / n_samples as f64).sqrt();
    let rate_ok = rate <= rate_bound;

    conclude(
        8,
        "1e5 samples: variance within 3 sigma of 1/(2 tau); misid rate at 100 tau_min below tail + 3 sigma",
        var_ok && rate_ok,
        format!(
            "var = {var:.5} vs {var_expect:.5} (band {var_band:.1e}); misid rate = {rate:.1e} vs bound {rate_bound:.1e}"
        ),
    );
}

#[test]
fn criterion_09_purification_identities() {
    let sp = SqueezedParams::new(0.9).unwrap();
    let ch = ChannelParams::new(0.5, 0.5, 0.01).unwrap();

    // (a) closed-form p_no against the truncated norm sum
    let closed = p_no_closed_form(&sp, &ch);
    let x = sp.lambda() * sp.lambda();
    let eta_t = ch.eta_total() * ch.t_tx;
    let norm_sum: f64 = (0..=100)
        .map(|m| (1.0 - x).powi(2) * x.powi(m) * (-eta_t * m as f64).exp() * (m as f64 + 1.0))
        .sum();
    let p_no_ok = (closed - 0.979_355_537_214_864).abs() < 1e-9 && (closed - norm_sum).abs() < 1e-9;

    // (b) exhaustive sector enumeration: every populated sector of every
    // single-jump branch has m_A != m_B, with exactly zero tolerance
    let n_max = truncation_for(sp.lambda(), 1e-10).unwrap();
    let mut jumps_detectable = true;
    for mode in [ALICE_MODES[0], ALICE_MODES[1], BOB_MODES[0], BOB_MODES[1]] {
        let state = jump_state(&sp, mode, n_max).unwrap();
        let joint = state
            .joint_total_number_distribution(&ALICE_MODES, &BOB_MODES)
            .unwrap();
        jumps_detectable &= !joint.is_empty();
        for ((ma, mb), p) in joint {
            if ma == mb && p > 0.0 {
                jumps_detectable = false;
            }
        }
    }

    // (c) batch yield within 3 sigma binomial of 0.979 at 1e5 trials
    let trials = 100_000u64;
    let readout = ReadoutConfig::normalized(0.024, 50.0, 1.0, false).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(90_901);
    let stats = run_batch(&sp, &ch, &readout, &readout, trials, &mut rng).unwrap();
    let sigma = (0.979 * 0.021 / trials as f64).sqrt();
    let yield_ok = (stats.yield_fraction - 0.979).abs() < 3.0 * sigma;
    let no_false_accepts = stats.false_accepts == 0;

    conclude(
        9,
        "p_no norm identity (1e-9), jump rejection (exhaustive, exact), batch yield 0.979 +- 3 sigma",
        p_no_ok && jumps_detectable && yield_ok && no_false_accepts,
        format!(
            "p_no = {closed:.9} (sum {norm_sum:.9}); jump sectors all off-diagonal = {jumps_detectable}; yield = {:.5} (3 sigma = {:.1e})",
            stats.yield_fraction,
            3.0 * sigma
        ),
    );
}

#[test]
fn criterion_10_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(
        &conf,
        "r = 0.9\ntrials = 2000\nseed = 424242\ntau = 0.05\n",
    )
    .unwrap();
    let run = |out_name: &str, format: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_sqnd"))
            .current_dir(dir.path())
            .args([
                "concentrate",
                "--config",
                "run.conf",
                "--format",
                format,
                "--out",
                out_name,
            ])
            .status()
            .expect("binary runs");
        assert!(status.success());
        std::fs::read(dir.path().join(out_name)).unwrap()
    };
    let json_a = run("a.json", "json");
    let json_b = run("b.json", "json");
    let csv_a = run("a.csv", "csv");
    let csv_b = run("b.csv", "csv");

    // same config and seed through the purify command as well
    let purify = |out_name: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_sqnd"))
            .current_dir(dir.path())
            .args([
                "purify", "--seed", "7", "--trials", "2000", "--format", "json", "--out", out_name,
            ])
            .status()
            .expect("binary runs");
        assert!(status.success());
        std::fs::read(dir.path().join(out_name)).unwrap()
    };
    let purify_a = purify("pa.json");
    let purify_b = purify("pb.json");

    let pass = json_a == json_b && csv_a == csv_b && purify_a == purify_b && !json_a.is_empty();
    conclude(
        10,
        "identical (config, seed) gives byte-identical JSON and CSV documents",
        pass,
        format!(
            "concentrate json {} bytes, csv {} bytes, purify json {} bytes",
            json_a.len(),
            csv_a.len(),
            purify_a.len()
        ),
    );
}

//! The four subcommands: parameter feasibility, QND chain verification,
//! and the concentration / purification experiment drivers.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde_json::{json, Value};

use squeeze_qnd::concentration::{
    self, entanglement_threshold, pair_entanglement, run_ideal, smallest_improving_m,
    success_probability,
};
use squeeze_qnd::fock::{truncation_for, SqueezedParams};
use squeeze_qnd::kerr::{
    check_imperfections, measurement_window, validate_regime_with, CheckStatus, CircuitParams,
    FeasibilityReport, ImperfectionParams, DEFAULT_LL_THRESHOLD,
};
use squeeze_qnd::purification::{branch_probabilities, p_no_closed_form, ChannelParams,
    PurificationEngine};
use squeeze_qnd::readout::{
    cascade_steady_output, decode, expected_signal, simulate_cascade_ode, ReadoutConfig,
};

use crate::config::{ConfigError, RunConfig};
use crate::output::{json_f64, Inputs, Meta, ResultDoc};

/// Error classes matching the exit-code contract: usage/input errors exit
/// 1, physical-regime violations exit 2.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Regime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Regime(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Regime(m) => m,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<squeeze_qnd::Error> for CliError {
    fn from(e: squeeze_qnd::Error) -> Self {
        match e {
            squeeze_qnd::Error::LossTooLarge { .. } | squeeze_qnd::Error::AdiabaticGuard { .. } => {
                CliError::Regime(e.to_string())
            }
            other => CliError::Input(other.to_string()),
        }
    }
}

/// Flag-level overrides shared by the experiment commands.
#[derive(Debug, Clone, Default)]
pub struct CommonOpts {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub no_noise: bool,
}

/// A finished command: human report, result document, optional CSV table,
/// and the exit code (0 or 2; input errors surface as [`CliError`]).
pub struct CommandOutcome {
    pub human: String,
    pub doc: ResultDoc,
    pub csv: Option<String>,
    pub exit_code: i32,
}

fn status_str(s: CheckStatus) -> &'static str {
    match s {
        CheckStatus::Pass => "pass",
        CheckStatus::Fail => "FAIL",
        CheckStatus::NotEvaluable => "n/a",
    }
}

fn report_json(report: &FeasibilityReport) -> Value {
    Value::Array(
        report
            .checks
            .iter()
            .map(|c| {
                json!({
                    "name": c.name,
                    "value": json_f64(c.value),
                    "bound": json_f64(c.bound),
                    "status": status_str(c.status),
                })
            })
            .collect(),
    )
}

fn write_report(human: &mut String, title: &str, report: &FeasibilityReport) {
    let _ = writeln!(human, "{title}:");
    for c in &report.checks {
        let _ = writeln!(
            human,
            "  {:<22} value = {:<13.6e} bound = {:<13.6e} [{}]",
            c.name,
            c.value,
            c.bound,
            status_str(c.status)
        );
        if c.status == CheckStatus::Fail {
            let _ = writeln!(human, "  warning: `{}` violates its bound", c.name);
        }
    }
}

/// `params-check`: effective chi, regime ratios, measurement window, and
/// imperfection bounds for a circuit configuration.
pub fn params_check(cfg: &RunConfig, opts: &CommonOpts) -> Result<CommandOutcome, CliError> {
    let mut r = cfg.resolver();
    let g1 = r.f64_or("g1_over_2pi_hz", 3e8)?;
    let g2 = r.f64_or("g2_over_2pi_hz", 3e8)?;
    let delta_big = r.f64_or("delta_big_over_2pi_hz", 1.5e9)?;
    let delta_small = r.f64_or("delta_small_over_2pi_hz", 1.5e9)?;
    let omega_c = r.f64_or("omega_c_over_2pi_hz", 1.5e9)?;
    let kappa1 = r.f64_or("kappa1_over_2pi_hz", 1e8)?;
    let kappa2 = r.f64_or("kappa2_over_2pi_hz", 2e4)?;
    let g_mag = r.f64_or("g_mag", 50.0)?;
    let ll_threshold = r.f64_or("ll_threshold", DEFAULT_LL_THRESHOLD)?;
    let phase = r.f64_or("phase_instability_rad", 0.05)?;
    let kappa_r1 = r.f64_or("kappa_r1_over_2pi_hz", kappa1)?;
    let kappa_r2 = r.f64_or("kappa_r2_over_2pi_hz", kappa1)?;
    let chi1 = r.f64_or("chi1_over_2pi_hz", 2.4e6)?;
    let chi2 = r.f64_or("chi2_over_2pi_hz", 2.4e6)?;
    let gamma1 = r.f64_or("gamma1_over_2pi_hz", 0.0)?;
    let gamma2 = r.f64_or("gamma2_over_2pi_hz", 0.0)?;
    let n_b1 = r.f64_or("n_b1", 1.053737)?;
    let n_b2 = r.f64_or("n_b2", 1.053737)?;
    r.finish("params-check")?;

    let params = CircuitParams::new(g1, g2, delta_big, delta_small, omega_c, kappa1, kappa2)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let imp = ImperfectionParams::new(
        phase, kappa_r1, kappa_r2, chi1, chi2, gamma1, gamma2, n_b1, n_b2,
    )
    .map_err(|e| CliError::Input(e.to_string()))?;

    let regime = validate_regime_with(&params, ll_threshold);
    let window = measurement_window(&params, g_mag).map_err(|e| CliError::Input(e.to_string()))?;
    let imperfections = check_imperfections(&params, &imp);

    let any_fail = regime.any_fail() || imperfections.any_fail() || !window.is_feasible();

    let mut human = String::new();
    let _ = writeln!(
        human,
        "chi/2pi = {:.6e} Hz  (|chi|/2pi = {:.4} MHz)",
        regime.chi,
        regime.chi.abs() / 1e6
    );
    write_report(&mut human, "regime checks (<< threshold)", &regime);
    let _ = writeln!(
        human,
        "measurement window: {:.6e} s < tau < {:.6e} s  [{}]",
        window.tau_min_s,
        window.tau_max_s,
        if window.is_feasible() { "feasible" } else { "DEGENERATE" }
    );
    write_report(&mut human, "imperfection checks", &imperfections);
    let _ = writeln!(human, "overall: {}", if any_fail { "FAIL" } else { "pass" });

    let mut inputs = Inputs::default();
    inputs
        .num("g1_over_2pi_hz", g1)
        .num("g2_over_2pi_hz", g2)
        .num("delta_big_over_2pi_hz", delta_big)
        .num("delta_small_over_2pi_hz", delta_small)
        .num("omega_c_over_2pi_hz", omega_c)
        .num("kappa1_over_2pi_hz", kappa1)
        .num("kappa2_over_2pi_hz", kappa2)
        .num("g_mag", g_mag)
        .num("ll_threshold", ll_threshold)
        .num("phase_instability_rad", phase)
        .num("kappa_r1_over_2pi_hz", kappa_r1)
        .num("kappa_r2_over_2pi_hz", kappa_r2)
        .num("chi1_over_2pi_hz", chi1)
        .num("chi2_over_2pi_hz", chi2)
        .num("gamma1_over_2pi_hz", gamma1)
        .num("gamma2_over_2pi_hz", gamma2)
        .num("n_b1", n_b1)
        .num("n_b2", n_b2);

    let results = json!({
        "chi_over_2pi_hz": json_f64(regime.chi),
        "regime_checks": report_json(&regime),
        "measurement_window": {
            "tau_min_s": json_f64(window.tau_min_s),
            "tau_max_s": json_f64(window.tau_max_s),
            "feasible": window.is_feasible(),
        },
        "imperfection_checks": report_json(&imperfections),
        "all_pass": !any_fail,
    });

    Ok(CommandOutcome {
        human,
        doc: ResultDoc {
            meta: Meta::new("params-check", opts.seed.unwrap_or(1)),
            inputs: inputs.0,
            results,
        },
        csv: None,
        exit_code: if any_fail { 2 } else { 0 },
    })
}

/// `qnd-verify`: drive the ODE oracle against the exact cascade and the
/// exact cascade against the paper-level first-order signal over photon
/// sectors, and check the noiseless decode identity.
pub fn qnd_verify(cfg: &RunConfig, opts: &CommonOpts) -> Result<CommandOutcome, CliError> {
    let mut r = cfg.resolver();
    let units = r.str_or("units", "normalized");
    let (chi, kappa1, tau) = match units.as_str() {
        "normalized" => (
            r.f64_or("chi", 0.024)?,
            1.0,
            r.f64_or("tau", 1.0)?,
        ),
        "si" => {
            let tau_cyc = std::f64::consts::TAU;
            (
                tau_cyc * r.f64_or("chi_over_2pi_hz", 2.4e6)?,
                tau_cyc * r.f64_or("kappa1_over_2pi_hz", 1e8)?,
                r.f64_or("tau_s", 1e-8)?,
            )
        }
        other => {
            return Err(CliError::Input(format!(
                "units must be `normalized` or `si`, got `{other}`"
            )))
        }
    };
    let g_mag = r.f64_or("g_mag", 50.0)?;
    let n_sector_max = r.u64_or("n_sector_max", 5)? as usize;
    let t_end_kappa1 = r.f64_or("t_end_kappa1", 100.0)?;
    let dt_kappa1 = r.f64_or("dt_kappa1", 0.01)?;
    let ll_threshold = r.f64_or("ll_threshold", DEFAULT_LL_THRESHOLD)?;
    r.finish("qnd-verify")?;

    if chi == 0.0 {
        return Err(CliError::Input("chi must be nonzero for qnd-verify".into()));
    }
    let ratio = chi.abs() / kappa1;
    if ratio >= ll_threshold {
        return Err(CliError::Regime(format!(
            "adiabatic regime violated: |chi|/kappa1 = {ratio:.4} >= {ll_threshold}"
        )));
    }
    let readout = ReadoutConfig::new(chi, kappa1, g_mag, tau, false)?;

    const ODE_TOL: f64 = 1e-6;
    const FIRST_ORDER_MARGIN: f64 = 0.02;

    let mut human = String::new();
    let _ = writeln!(
        human,
        "QND chain verification (chi/kappa1 = {:.4}, |g| = {}, sectors 0..={})",
        chi / kappa1,
        g_mag,
        n_sector_max
    );
    let _ = writeln!(
        human,
        "{:>4} {:>4} {:>13} {:>13} {:>13} {:>13}",
        "n1", "n2", "ode_rel", "raw_fo_rel", "fo_bound", "phase_rel"
    );

    let mut rows = Vec::new();
    let mut all_ok = true;
    for n1 in 0..=n_sector_max {
        for n2 in n1..=n_sector_max {
            let exact = cascade_steady_output(n1, n2, &readout);
            let ode = simulate_cascade_ode(n1, n2, &readout, t_end_kappa1 / kappa1, dt_kappa1 / kappa1)?;
            let ode_rel = (ode - exact).norm() / exact.norm();

            let x_exact = std::f64::consts::SQRT_2 * exact.re;
            let x_fo = expected_signal(n1 + n2, &readout);
            let phi = 4.0 * chi * (n1 + n2) as f64 / kappa1;
            // first-order phase inserted into the exact response shape
            let x_phase = std::f64::consts::SQRT_2 * g_mag * kappa1.sqrt() * phi.sin();
            let (raw_rel, phase_rel) = if n1 + n2 == 0 {
                (0.0, 0.0)
            } else {
                (
                    (x_exact - x_fo).abs() / x_fo.abs(),
                    (x_exact - x_phase).abs() / x_fo.abs(),
                )
            };
            let fo_bound = phi * phi / 6.0 + FIRST_ORDER_MARGIN;

            let ok = ode_rel <= ODE_TOL && raw_rel <= fo_bound && phase_rel <= FIRST_ORDER_MARGIN;
            all_ok &= ok;
            let _ = writeln!(
                human,
                "{n1:>4} {n2:>4} {ode_rel:>13.3e} {raw_rel:>13.3e} {fo_bound:>13.3e} {phase_rel:>13.3e}{}",
                if ok { "" } else { "  [FAIL]" }
            );
            rows.push(json!({
                "n1": n1,
                "n2": n2,
                "ode_vs_exact_rel": json_f64(ode_rel),
                "first_order_rel": json_f64(raw_rel),
                "first_order_bound": json_f64(fo_bound),
                "phase_corrected_rel": json_f64(phase_rel),
                "pass": ok,
            }));
        }
    }

    let mut decode_ok = true;
    for n in 0..=10usize {
        decode_ok &= decode(expected_signal(n, &readout), &readout) == n;
    }
    all_ok &= decode_ok;
    let _ = writeln!(
        human,
        "noiseless decode identity on 0..=10: {}",
        if decode_ok { "pass" } else { "FAIL" }
    );
    let _ = writeln!(human, "overall: {}", if all_ok { "pass" } else { "FAIL" });

    let mut inputs = Inputs::default();
    inputs
        .text("units", &units)
        .num("chi", chi)
        .num("kappa1", kappa1)
        .num("tau", tau)
        .num("g_mag", g_mag)
        .int("n_sector_max", n_sector_max as u64)
        .num("t_end_kappa1", t_end_kappa1)
        .num("dt_kappa1", dt_kappa1)
        .num("ll_threshold", ll_threshold);

    let results = json!({
        "ode_tolerance_rel": json_f64(ODE_TOL),
        "first_order_margin": json_f64(FIRST_ORDER_MARGIN),
        "sectors": Value::Array(rows),
        "decode_identity": decode_ok,
        "all_pass": all_ok,
    });

    Ok(CommandOutcome {
        human,
        doc: ResultDoc {
            meta: Meta::new("qnd-verify", opts.seed.unwrap_or(1)),
            inputs: inputs.0,
            results,
        },
        csv: None,
        exit_code: if all_ok { 0 } else { 2 },
    })
}

struct ReadoutKeys {
    chi: f64,
    g_mag: f64,
    tau: f64,
    noise_enabled: bool,
}

fn resolve_readout(
    r: &mut crate::config::Resolver<'_>,
    opts: &CommonOpts,
) -> Result<ReadoutKeys, ConfigError> {
    let chi = r.f64_or("chi", 0.024)?;
    let g_mag = r.f64_or("g_mag", 50.0)?;
    let tau = r.f64_or("tau", 1.0)?;
    let noise_enabled = r.bool_or("noise_enabled", true)? && !opts.no_noise;
    Ok(ReadoutKeys {
        chi,
        g_mag,
        tau,
        noise_enabled,
    })
}

/// `concentrate`: ideal outcome table plus a seeded Monte Carlo run with
/// noisy (or noiseless) QND readout, in normalized readout units.
pub fn concentrate(cfg: &RunConfig, opts: &CommonOpts) -> Result<CommandOutcome, CliError> {
    let mut r = cfg.resolver();
    let r_squeeze = r.f64_or("r", 0.9)?;
    let readout_keys = resolve_readout(&mut r, opts)?;
    let n_max_key = r.usize_opt("n_max")?;
    let seed = opts.seed.unwrap_or(r.u64_or("seed", 1)?);
    let trials = opts.trials.unwrap_or(r.u64_or("trials", 10_000)?);
    r.finish("concentrate")?;

    let sp = SqueezedParams::new(r_squeeze)?;
    let readout = ReadoutConfig::normalized(
        readout_keys.chi,
        readout_keys.g_mag,
        readout_keys.tau,
        readout_keys.noise_enabled,
    )?;
    let n_max = match n_max_key {
        Some(n) => n,
        None => truncation_for(sp.lambda(), concentration::DEFAULT_TAIL_TOL)?,
    };

    let threshold = entanglement_threshold(&sp);
    let m_star = smallest_improving_m(&sp);
    let e_pair = pair_entanglement(&sp);
    let success = success_probability(&sp, n_max);
    let outcomes = run_ideal(&sp, n_max);

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let stats = concentration::run_monte_carlo(&sp, &readout, trials, &mut rng)?;

    let mut human = String::new();
    let _ = writeln!(
        human,
        "concentration at r = {r_squeeze}: E(pair) = {e_pair:.6} nats, threshold m > {threshold:.4}, smallest improving m = {m_star}"
    );
    let _ = writeln!(human, "ideal success probability = {success:.6}");
    let _ = writeln!(human, "{:>4} {:>12} {:>14} {:>9}", "m", "p_m", "ln(1+m)", "improved");
    for out in &outcomes {
        let _ = writeln!(
            human,
            "{:>4} {:>12.6e} {:>14.6} {:>9}",
            out.m, out.probability, out.entanglement_nats, out.improved
        );
    }
    let _ = writeln!(
        human,
        "monte carlo: {} trials, seed {}, noise {}: success rate = {:.6} (boundary-aware {:.6}), misdecodes = {}",
        trials,
        seed,
        if readout.noise_enabled() { "on" } else { "off" },
        stats.empirical_success_rate,
        stats.boundary_aware_success_rate,
        stats.misdecode_count
    );

    let mut csv = String::from("m,p_m,entanglement_nats,improved,mc_decoded_count\n");
    for out in &outcomes {
        let count = stats.outcome_histogram.get(&out.m).copied().unwrap_or(0);
        let _ = writeln!(
            csv,
            "{},{:e},{},{},{count}",
            out.m, out.probability, out.entanglement_nats, out.improved
        );
    }

    let mut inputs = Inputs::default();
    inputs
        .num("r", r_squeeze)
        .num("chi", readout_keys.chi)
        .num("g_mag", readout_keys.g_mag)
        .num("tau", readout_keys.tau)
        .flag("noise_enabled", readout.noise_enabled())
        .int("n_max", n_max as u64)
        .int("seed", seed)
        .int("trials", trials);

    let results = json!({
        "pair_entanglement_nats": json_f64(e_pair),
        "threshold_m": json_f64(threshold),
        "smallest_improving_m": m_star,
        "success_probability_ideal": json_f64(success),
        "outcomes": outcomes.iter().map(|o| json!({
            "m": o.m,
            "probability": json_f64(o.probability),
            "entanglement_nats": json_f64(o.entanglement_nats),
            "improved": o.improved,
        })).collect::<Vec<_>>(),
        "monte_carlo": serde_json::to_value(&stats).expect("stats serialize"),
    });

    Ok(CommandOutcome {
        human,
        doc: ResultDoc {
            meta: Meta::new("concentrate", seed),
            inputs: inputs.0,
            results,
        },
        csv: Some(csv),
        exit_code: 0,
    })
}

/// `purify`: branch weights, seeded batch of two-sided QND compare-and-keep
/// trials, and output-quality statistics.
pub fn purify(cfg: &RunConfig, opts: &CommonOpts) -> Result<CommandOutcome, CliError> {
    let mut r = cfg.resolver();
    let r_squeeze = r.f64_or("r", 0.9)?;
    let eta_a = r.f64_or("eta_a_per_s", 0.5)?;
    let eta_b = r.f64_or("eta_b_per_s", 0.5)?;
    let t_tx = r.f64_or("t_tx_s", 0.01)?;
    let readout_keys = resolve_readout(&mut r, opts)?;
    let seed = opts.seed.unwrap_or(r.u64_or("seed", 1)?);
    let trials = opts.trials.unwrap_or(r.u64_or("trials", 10_000)?);
    r.finish("purify")?;

    let sp = SqueezedParams::new(r_squeeze)?;
    let ch = ChannelParams::new(eta_a, eta_b, t_tx)?;
    let readout = ReadoutConfig::normalized(
        readout_keys.chi,
        readout_keys.g_mag,
        readout_keys.tau,
        readout_keys.noise_enabled,
    )?;

    let branches = branch_probabilities(&sp, &ch)?;
    let p_no = p_no_closed_form(&sp, &ch);
    let small_loss = ch.small_loss_ok(&sp);

    let engine = PurificationEngine::new(&sp, &ch, &readout, &readout)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let stats = engine.run_batch(trials, &mut rng)?;

    let mut human = String::new();
    let _ = writeln!(
        human,
        "purification at r = {r_squeeze}, eta_A = {eta_a}/s, eta_B = {eta_b}/s, t_tx = {t_tx} s"
    );
    if !small_loss {
        let _ = writeln!(
            human,
            "warning: first-order loss model outside its validity region (nbar * eta * t_tx >= 0.1)"
        );
    }
    let _ = writeln!(human, "closed-form p_no = {p_no:.6}");
    let _ = writeln!(human, "{:>9} {:>13}", "branch", "weight");
    for b in &branches {
        let _ = writeln!(human, "{:>9} {:>13.6e}", b.kind.name(), b.weight);
    }
    let _ = writeln!(
        human,
        "batch: {} trials, seed {}, noise {}: yield = {:.6}, false accepts = {}, kept fidelity mean = {:.6}, kept entanglement mean = {:.6} nats",
        trials,
        seed,
        if readout.noise_enabled() { "on" } else { "off" },
        stats.yield_fraction,
        stats.false_accepts,
        stats.kept_fidelity_mean,
        stats.kept_entanglement_mean_nats
    );

    let mut csv = String::from("branch,weight,mc_count\n");
    for b in &branches {
        let count = stats
            .branch_histogram
            .get(b.kind.name())
            .copied()
            .unwrap_or(0);
        let _ = writeln!(csv, "{},{:e},{count}", b.kind.name(), b.weight);
    }

    let mut inputs = Inputs::default();
    inputs
        .num("r", r_squeeze)
        .num("eta_a_per_s", eta_a)
        .num("eta_b_per_s", eta_b)
        .num("t_tx_s", t_tx)
        .num("chi", readout_keys.chi)
        .num("g_mag", readout_keys.g_mag)
        .num("tau", readout_keys.tau)
        .flag("noise_enabled", readout.noise_enabled())
        .int("seed", seed)
        .int("trials", trials);

    let results = json!({
        "p_no_closed_form": json_f64(p_no),
        "small_loss_ok": small_loss,
        "branches": branches.iter().map(|b| json!({
            "branch": b.kind.name(),
            "weight": json_f64(b.weight),
        })).collect::<Vec<_>>(),
        "stats": serde_json::to_value(&stats).expect("stats serialize"),
    });

    Ok(CommandOutcome {
        human,
        doc: ResultDoc {
            meta: Meta::new("purify", seed),
            inputs: inputs.0,
            results,
        },
        csv: Some(csv),
        exit_code: 0,
    })
}

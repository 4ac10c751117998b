//! Circuit-level parameters, the effective cross-Kerr coefficient, and the
//! regime / imperfection inequality checks.
//!
//! All user-facing frequencies are cyclic (the quoted "/2pi" values, in Hz).
//! Conversion to angular frequency happens exactly once, inside the
//! operations that need it; the chi formula itself is homogeneous enough
//! that the 2pi factors divide out to leave one cyclic-Hz result.

use serde::Serialize;

use crate::{Error, Result};

/// Default quantitative meaning of "much less than": ratio < 0.1.
pub const DEFAULT_LL_THRESHOLD: f64 = 0.1;

const TWO_PI: f64 = std::f64::consts::TAU;

/// Couplings, detunings, drive, and decay rates of the readout chain, all
/// as cyclic frequencies (Hz).
///
/// Couplings may be zero (switched off); the drive, both decay rates, and
/// the big detuning must be nonzero, and the detunings may carry sign.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct CircuitParams {
    /// Coupling of resonator A to its transition, cyclic Hz.
    pub g1: f64,
    /// Coupling of resonator B to its transition, cyclic Hz.
    pub g2: f64,
    /// Detuning of the g2 transition, cyclic Hz, signed, nonzero.
    pub delta_big: f64,
    /// Detuning of the g1 transition, cyclic Hz, signed.
    pub delta_small: f64,
    /// Classical drive strength, cyclic Hz.
    pub omega_c: f64,
    /// Readout-resonator decay rate, cyclic Hz.
    pub kappa1: f64,
    /// Storage-resonator decay rate, cyclic Hz.
    pub kappa2: f64,
}

impl CircuitParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        g1: f64,
        g2: f64,
        delta_big: f64,
        delta_small: f64,
        omega_c: f64,
        kappa1: f64,
        kappa2: f64,
    ) -> Result<Self> {
        let finite_nonneg = [("g1", g1), ("g2", g2)];
        for (name, v) in finite_nonneg {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and >= 0, got {v}"),
                });
            }
        }
        let strictly_positive = [("omega_c", omega_c), ("kappa1", kappa1), ("kappa2", kappa2)];
        for (name, v) in strictly_positive {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and > 0, got {v}"),
                });
            }
        }
        if !delta_big.is_finite() || delta_big == 0.0 {
            return Err(Error::InvalidParameter {
                name: "delta_big",
                reason: format!("must be finite and nonzero, got {delta_big}"),
            });
        }
        if !delta_small.is_finite() {
            return Err(Error::InvalidParameter {
                name: "delta_small",
                reason: format!("must be finite, got {delta_small}"),
            });
        }
        Ok(Self {
            g1,
            g2,
            delta_big,
            delta_small,
            omega_c,
            kappa1,
            kappa2,
        })
    }
}

/// Effective cross-Kerr coefficient `chi = -g1^2 g2^2 / (Delta Omega_c^2)`,
/// returned signed and in cyclic Hz.
pub fn effective_chi(p: &CircuitParams) -> f64 {
    -(p.g1 * p.g1 * p.g2 * p.g2) / (p.delta_big * p.omega_c * p.omega_c)
}

/// Imperfection parameters of the readout chain.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct ImperfectionParams {
    /// Drive phase instability, radians (the delta in g = i|g| e^{i delta}).
    pub phase_instability: f64,
    /// Per-cavity readout decay rates, cyclic Hz.
    pub kappa_r1: f64,
    pub kappa_r2: f64,
    /// Per-cavity Kerr coefficients, cyclic Hz.
    pub chi1: f64,
    pub chi2: f64,
    /// Lumped probe loss (circulators, resonator leakage), cyclic Hz.
    pub gamma1: f64,
    pub gamma2: f64,
    /// Mean photon numbers of the storage resonators.
    pub n_b1: f64,
    pub n_b2: f64,
}

impl ImperfectionParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        phase_instability: f64,
        kappa_r1: f64,
        kappa_r2: f64,
        chi1: f64,
        chi2: f64,
        gamma1: f64,
        gamma2: f64,
        n_b1: f64,
        n_b2: f64,
    ) -> Result<Self> {
        let fields = [
            ("phase_instability", phase_instability),
            ("kappa_r1", kappa_r1),
            ("kappa_r2", kappa_r2),
            ("chi1", chi1),
            ("chi2", chi2),
            ("gamma1", gamma1),
            ("gamma2", gamma2),
            ("n_b1", n_b1),
            ("n_b2", n_b2),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and >= 0, got {v}"),
                });
            }
        }
        Ok(Self {
            phase_instability,
            kappa_r1,
            kappa_r2,
            chi1,
            chi2,
            gamma1,
            gamma2,
            n_b1,
            n_b2,
        })
    }
}

/// Outcome of one inequality check.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// A divisor was zero; the inequality cannot be evaluated.
    NotEvaluable,
}

/// One ratio-vs-bound entry; passes iff `value < bound` strictly.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeasibilityCheck {
    pub name: &'static str,
    pub value: f64,
    pub bound: f64,
    pub status: CheckStatus,
}

impl FeasibilityCheck {
    fn evaluate(name: &'static str, value: f64, bound: f64) -> Self {
        let status = if !value.is_finite() || !bound.is_finite() {
            CheckStatus::NotEvaluable
        } else if value < bound {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        Self {
            name,
            value,
            bound,
            status,
        }
    }

    fn not_evaluable(name: &'static str, value: f64, bound: f64) -> Self {
        Self {
            name,
            value,
            bound,
            status: CheckStatus::NotEvaluable,
        }
    }
}

/// Collected inequality checks together with the chi they were computed
/// from (cyclic Hz).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub chi: f64,
    pub checks: Vec<FeasibilityCheck>,
}

impl FeasibilityReport {
    /// Every check passed.
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status == CheckStatus::Pass)
    }

    /// At least one check evaluated and failed.
    pub fn any_fail(&self) -> bool {
        self.checks.iter().any(|c| c.status == CheckStatus::Fail)
    }
}

/// Check the dispersive-regime conditions `|g1/Omega_c|^2 << 1`,
/// `|g2/Delta| << 1`, and the adiabatic readout condition
/// `|chi|/kappa1 << 1` against the default "<<" threshold.
pub fn validate_regime(p: &CircuitParams) -> FeasibilityReport {
    validate_regime_with(p, DEFAULT_LL_THRESHOLD)
}

/// [`validate_regime`] with an explicit "<<" threshold.
pub fn validate_regime_with(p: &CircuitParams, ll_threshold: f64) -> FeasibilityReport {
    let chi = effective_chi(p);
    let checks = vec![
        FeasibilityCheck::evaluate(
            "g1_over_omega_c_sq",
            (p.g1 / p.omega_c).powi(2),
            ll_threshold,
        ),
        FeasibilityCheck::evaluate("g2_over_delta", (p.g2 / p.delta_big).abs(), ll_threshold),
        FeasibilityCheck::evaluate("chi_over_kappa1", chi.abs() / p.kappa1, ll_threshold),
    ];
    FeasibilityReport { chi, checks }
}

/// Homodyne measurement window endpoints, seconds.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct MeasurementWindow {
    pub tau_min_s: f64,
    pub tau_max_s: f64,
}

impl MeasurementWindow {
    /// The open interval is non-degenerate.
    pub fn is_feasible(&self) -> bool {
        self.tau_min_s < self.tau_max_s
    }
}

/// Measuring-time window `kappa1 / (64 |g|^2 chi^2) < tau < 1 / kappa2`.
///
/// Angular frequencies (2pi times the stored cyclic values) enter the
/// formula; a zero chi (e.g. a switched-off coupling) has no finite lower
/// bound and is rejected.
pub fn measurement_window(p: &CircuitParams, g_mag: f64) -> Result<MeasurementWindow> {
    if !g_mag.is_finite() || g_mag <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "g_mag",
            reason: format!("probe amplitude must be finite and > 0, got {g_mag}"),
        });
    }
    let chi = effective_chi(p);
    if chi == 0.0 {
        return Err(Error::InvalidParameter {
            name: "chi",
            reason: "chi = 0 gives an infinite lower measurement bound".into(),
        });
    }
    let kappa1 = TWO_PI * p.kappa1;
    let kappa2 = TWO_PI * p.kappa2;
    let chi_ang = TWO_PI * chi;
    Ok(MeasurementWindow {
        tau_min_s: kappa1 / (64.0 * g_mag * g_mag * chi_ang * chi_ang),
        tau_max_s: 1.0 / kappa2,
    })
}

/// Evaluate the imperfection bounds: phase instability
/// `delta < 4 chi / kappa1`, cavity mismatch
/// `|chi2 kappa_R1 / (chi1 kappa_R2) - 1| < 1 / <n_B2>`, and probe loss
/// `gamma_i < kappa1 / <n_Bi>^2`.
///
/// Checks whose divisor is zero come back as `NotEvaluable` rather than as
/// failures.
pub fn check_imperfections(p: &CircuitParams, imp: &ImperfectionParams) -> FeasibilityReport {
    let chi = effective_chi(p);

    let phase = FeasibilityCheck::evaluate(
        "phase_instability",
        imp.phase_instability,
        4.0 * chi.abs() / p.kappa1,
    );

    let mismatch = if imp.chi1 == 0.0 || imp.kappa_r2 == 0.0 || imp.n_b2 <= 0.0 {
        FeasibilityCheck::not_evaluable("kerr_decay_mismatch", f64::NAN, f64::NAN)
    } else {
        FeasibilityCheck::evaluate(
            "kerr_decay_mismatch",
            (imp.chi2 * imp.kappa_r1 / (imp.chi1 * imp.kappa_r2) - 1.0).abs(),
            1.0 / imp.n_b2,
        )
    };

    // gamma_i < kappa1 / n_Bi^2, folded into one entry via the worst
    // effective rate gamma_i * n_Bi^2
    let loss = FeasibilityCheck::evaluate(
        "probe_loss",
        (imp.gamma1 * imp.n_b1 * imp.n_b1).max(imp.gamma2 * imp.n_b2 * imp.n_b2),
        p.kappa1,
    );

    FeasibilityReport {
        chi,
        checks: vec![phase, mismatch, loss],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Parameters quoted for the scheme: g1/2pi = g2/2pi = 300 MHz,
    /// Delta/2pi = Omega_c/2pi = 1.5 GHz, kappa1/2pi = 100 MHz,
    /// kappa2/2pi = 20 kHz.
    fn paper_params() -> CircuitParams {
        CircuitParams::new(3e8, 3e8, 1.5e9, 1.5e9, 1.5e9, 1e8, 2e4).unwrap()
    }

    #[test]
    fn chi_reproduces_quoted_value() {
        let chi = effective_chi(&paper_params());
        assert!(chi < 0.0, "chi is negative for positive detuning");
        assert!((chi.abs() - 2.4e6).abs() / 2.4e6 < 1e-12);
    }

    #[test]
    fn chi_zero_coupling() {
        let mut p = paper_params();
        p.g1 = 0.0;
        assert_eq!(effective_chi(&p), 0.0);
    }

    #[test]
    fn chi_half_couplings() {
        let p = CircuitParams::new(1.5e8, 1.5e8, 1.5e9, 1.5e9, 1.5e9, 1e8, 2e4).unwrap();
        assert!((effective_chi(&p).abs() - 0.15e6).abs() < 1e-6);
    }

    #[test]
    fn chi_scaling_laws() {
        let p = paper_params();
        let chi = effective_chi(&p);
        let mut doubled = p;
        doubled.g1 *= 2.0;
        assert_eq!(effective_chi(&doubled), 4.0 * chi);
        let mut half_delta = p;
        half_delta.delta_big /= 2.0;
        assert_eq!(effective_chi(&half_delta), 2.0 * chi);
    }

    #[test]
    fn constructor_rejects_bad_params() {
        assert!(CircuitParams::new(-1.0, 3e8, 1.5e9, 0.0, 1.5e9, 1e8, 2e4).is_err());
        assert!(CircuitParams::new(3e8, 3e8, 0.0, 0.0, 1.5e9, 1e8, 2e4).is_err());
        assert!(CircuitParams::new(3e8, 3e8, 1.5e9, 0.0, 0.0, 1e8, 2e4).is_err());
        assert!(CircuitParams::new(3e8, 3e8, 1.5e9, 0.0, 1.5e9, 0.0, 2e4).is_err());
    }

    #[test]
    fn regime_ratios_for_paper_params() {
        let report = validate_regime(&paper_params());
        let values: Vec<f64> = report.checks.iter().map(|c| c.value).collect();
        assert!((values[0] - 0.04).abs() < 1e-12);
        assert!((values[1] - 0.2).abs() < 1e-12);
        assert!((values[2] - 0.024).abs() < 1e-12);
        // |g2/Delta| = 0.2 misses the 0.1 threshold; the other two pass
        assert_eq!(report.checks[0].status, CheckStatus::Pass);
        assert_eq!(report.checks[1].status, CheckStatus::Fail);
        assert_eq!(report.checks[2].status, CheckStatus::Pass);
        assert!(report.any_fail());
        // a laxer threshold accepts all three
        assert!(validate_regime_with(&paper_params(), 0.25).all_pass());
    }

    #[test]
    fn regime_zero_couplings_all_pass() {
        let p = CircuitParams::new(0.0, 0.0, 1.5e9, 0.0, 1.5e9, 1e8, 2e4).unwrap();
        let report = validate_regime(&p);
        assert!(report.all_pass());
        assert!(report.checks.iter().all(|c| c.value == 0.0));
    }

    #[test]
    fn regime_fails_when_kappa_small() {
        // kappa1/2pi = 1 MHz with |chi|/2pi = 2.4 MHz: ratio 2.4, fail
        let p = CircuitParams::new(3e8, 3e8, 1.5e9, 0.0, 1.5e9, 1e6, 2e4).unwrap();
        let report = validate_regime(&p);
        let chk = &report.checks[2];
        assert!((chk.value - 2.4).abs() < 1e-12);
        assert_eq!(chk.status, CheckStatus::Fail);
    }

    #[test]
    fn reports_are_deterministic() {
        let a = validate_regime(&paper_params());
        let b = validate_regime(&paper_params());
        assert_eq!(a, b);
    }

    #[test]
    fn window_matches_quoted_values() {
        let w = measurement_window(&paper_params(), 50.0).unwrap();
        // closed forms: 1.7269e-11 s and 7.9577e-6 s, i.e. the quoted
        // "0.02 ns < tau < 8 us" after rounding
        assert!((w.tau_min_s - 1.726_941_656_813_1e-11).abs() / 1.726_941_656_813_1e-11 < 1e-9);
        assert!((w.tau_max_s - 7.957_747_154_594_767e-6).abs() / 7.957_747_154_594_767e-6 < 1e-9);
        assert!(w.is_feasible());
    }

    #[test]
    fn window_scaling_in_probe_amplitude() {
        let p = paper_params();
        let w1 = measurement_window(&p, 50.0).unwrap();
        let w2 = measurement_window(&p, 100.0).unwrap();
        assert!((w2.tau_min_s - w1.tau_min_s / 4.0).abs() < 1e-25);
        assert_eq!(w2.tau_max_s, w1.tau_max_s);
    }

    #[test]
    fn window_rejects_zero_chi() {
        let p = CircuitParams::new(0.0, 3e8, 1.5e9, 0.0, 1.5e9, 1e8, 2e4).unwrap();
        assert!(measurement_window(&p, 50.0).is_err());
        assert!(measurement_window(&paper_params(), 0.0).is_err());
    }

    #[test]
    fn imperfections_all_pass_when_clean() {
        let imp =
            ImperfectionParams::new(0.0, 1e8, 1e8, 2.4e6, 2.4e6, 0.0, 0.0, 1.05, 1.05).unwrap();
        let report = check_imperfections(&paper_params(), &imp);
        assert!(report.all_pass());
    }

    #[test]
    fn phase_instability_bound() {
        // 4|chi|/kappa1 = 4 * 2.4/100 = 0.096 rad; 0.05 passes, 0.12 fails
        let ok = ImperfectionParams::new(0.05, 1e8, 1e8, 2.4e6, 2.4e6, 0.0, 0.0, 1.05, 1.05)
            .unwrap();
        let report = check_imperfections(&paper_params(), &ok);
        let phase = &report.checks[0];
        assert!((phase.bound - 0.096).abs() < 1e-12);
        assert_eq!(phase.status, CheckStatus::Pass);

        let bad = ImperfectionParams::new(0.12, 1e8, 1e8, 2.4e6, 2.4e6, 0.0, 0.0, 1.05, 1.05)
            .unwrap();
        assert_eq!(
            check_imperfections(&paper_params(), &bad).checks[0].status,
            CheckStatus::Fail
        );
    }

    #[test]
    fn mismatch_bound() {
        // chi2 kR1 / (chi1 kR2) = 1.5 -> |0.5| < 1/1.05 = 0.952 holds
        let imp =
            ImperfectionParams::new(0.0, 1.5e8, 1e8, 2.4e6, 2.4e6, 0.0, 0.0, 1.05, 1.05).unwrap();
        let report = check_imperfections(&paper_params(), &imp);
        let chk = &report.checks[1];
        assert!((chk.value - 0.5).abs() < 1e-12);
        assert!((chk.bound - 1.0 / 1.05).abs() < 1e-12);
        assert_eq!(chk.status, CheckStatus::Pass);

        // ratio 2.5 leaves |1.5| > 0.952: fail
        let imp =
            ImperfectionParams::new(0.0, 2.5e8, 1e8, 2.4e6, 2.4e6, 0.0, 0.0, 1.05, 1.05).unwrap();
        let report = check_imperfections(&paper_params(), &imp);
        let chk = &report.checks[1];
        assert!((chk.value - 1.5).abs() < 1e-12);
        assert_eq!(chk.status, CheckStatus::Fail);
    }

    #[test]
    fn mismatch_not_evaluable_on_zero_divisor() {
        let imp = ImperfectionParams::new(0.0, 1e8, 1e8, 0.0, 2.4e6, 0.0, 0.0, 1.05, 1.05)
            .unwrap();
        let report = check_imperfections(&paper_params(), &imp);
        assert_eq!(report.checks[1].status, CheckStatus::NotEvaluable);
        assert!(!report.any_fail());
        assert!(!report.all_pass());
    }

    #[test]
    fn probe_loss_bound() {
        // gamma n_B^2 beyond kappa1 fails
        let imp = ImperfectionParams::new(0.0, 1e8, 1e8, 2.4e6, 2.4e6, 2e8, 0.0, 1.05, 1.05)
            .unwrap();
        let report = check_imperfections(&paper_params(), &imp);
        assert_eq!(report.checks[2].status, CheckStatus::Fail);
    }
}

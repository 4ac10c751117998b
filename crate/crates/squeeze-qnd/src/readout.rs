//! The two-cavity cascaded cross-Kerr QND readout chain.
//!
//! A probe with constant drive `a_in = g sqrt(kappa1)`, `g = i|g|`, passes
//! through two identical readout cavities whose frequencies are shifted by
//! `chi n_i`. Each cavity obeys the Heisenberg-Langevin equation
//! `da_i/dt = -i chi n_i a_i - (kappa1/2) a_i - sqrt(kappa1) a_in,i`, the
//! output of the first feeding the input of the second. Since photon-number
//! sectors never mix, everything here works on sector labels `(n1, n2)`
//! rather than on states — that is the QND property, encoded structurally.
//!
//! Homodyne detection of the X quadrature of the final output gives, to
//! first order in `chi/kappa1`, a signal `4 sqrt(2) |g| chi (n1+n2) /
//! sqrt(kappa1)`; the exact steady state and a time-domain integrator are
//! provided to audit that expansion.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::{Error, Result};

/// Parameters of one QND readout chain.
///
/// `chi` and `kappa1` are angular rates; passing `kappa1 = 1` puts the
/// whole chain in normalized units with times measured in `1/kappa1`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct ReadoutConfig {
    chi: f64,
    kappa1: f64,
    g_mag: f64,
    tau: f64,
    noise_enabled: bool,
}

impl ReadoutConfig {
    /// Build a config, enforcing the adiabatic regime guard
    /// `|chi| / kappa1 < 1`.
    pub fn new(chi: f64, kappa1: f64, g_mag: f64, tau: f64, noise_enabled: bool) -> Result<Self> {
        if !kappa1.is_finite() || kappa1 <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "kappa1",
                reason: format!("must be finite and > 0, got {kappa1}"),
            });
        }
        if !tau.is_finite() || tau <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "tau",
                reason: format!("must be finite and > 0, got {tau}"),
            });
        }
        if !g_mag.is_finite() || g_mag <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "g_mag",
                reason: format!("must be finite and > 0, got {g_mag}"),
            });
        }
        if !chi.is_finite() {
            return Err(Error::InvalidParameter {
                name: "chi",
                reason: format!("must be finite, got {chi}"),
            });
        }
        let ratio = chi.abs() / kappa1;
        if ratio >= 1.0 {
            return Err(Error::AdiabaticGuard { ratio });
        }
        Ok(Self {
            chi,
            kappa1,
            g_mag,
            tau,
            noise_enabled,
        })
    }

    /// Normalized-unit config with `kappa1 = 1`; `chi` is then the ratio
    /// `chi/kappa1` and `tau` is measured in units of `1/kappa1`.
    pub fn normalized(chi_over_kappa1: f64, g_mag: f64, tau: f64, noise_enabled: bool) -> Result<Self> {
        Self::new(chi_over_kappa1, 1.0, g_mag, tau, noise_enabled)
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn kappa1(&self) -> f64 {
        self.kappa1
    }

    pub fn g_mag(&self) -> f64 {
        self.g_mag
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn noise_enabled(&self) -> bool {
        self.noise_enabled
    }

    pub fn with_noise(mut self, enabled: bool) -> Self {
        self.noise_enabled = enabled;
        self
    }

    /// The probe drive `g = i |g|`.
    pub fn drive(&self) -> C64 {
        C64::new(0.0, self.g_mag)
    }

    /// Signal contribution of one photon,
    /// `4 sqrt(2) |g| chi / sqrt(kappa1)` (signed by chi).
    pub fn per_photon_step(&self) -> f64 {
        4.0 * std::f64::consts::SQRT_2 * self.g_mag * self.chi / self.kappa1.sqrt()
    }

    /// Standard deviation of the time-averaged vacuum noise on the X
    /// readout, `sqrt(1 / (2 tau))`.
    pub fn noise_std(&self) -> f64 {
        (1.0 / (2.0 * self.tau)).sqrt()
    }
}

/// First-order homodyne signal `4 sqrt(2) |g| chi (n1 + n2) / sqrt(kappa1)`.
pub fn expected_signal(n_total: usize, cfg: &ReadoutConfig) -> f64 {
    cfg.per_photon_step() * n_total as f64
}

/// Exact steady-state output field of the two-cavity cascade,
/// `g sqrt(k) * [(i chi n1 - k/2)(i chi n2 - k/2)] / [(i chi n1 + k/2)(i chi n2 + k/2)]`.
///
/// Expanding to first order in `chi/kappa1` recovers
/// `-4 i g chi (n1 + n2) / sqrt(kappa1) + g sqrt(kappa1)`.
pub fn cascade_steady_output(n1: usize, n2: usize, cfg: &ReadoutConfig) -> C64 {
    let k_half = C64::new(cfg.kappa1 / 2.0, 0.0);
    let mut out = cfg.drive() * cfg.kappa1.sqrt();
    for n in [n1, n2] {
        let shift = C64::new(0.0, cfg.chi * n as f64);
        out *= (shift - k_half) / (shift + k_half);
    }
    out
}

/// The first-order expansion of [`cascade_steady_output`].
pub fn first_order_output(n1: usize, n2: usize, cfg: &ReadoutConfig) -> C64 {
    let g = cfg.drive();
    let n_total = (n1 + n2) as f64;
    g * cfg.kappa1.sqrt() - C64::new(0.0, 4.0) * g * cfg.chi * n_total / cfg.kappa1.sqrt()
}

/// Integrate the cascaded Heisenberg-Langevin equations in the `(n1, n2)`
/// number sector with a fixed-step classical 4th-order scheme and return
/// the output field at `t_end`.
///
/// This is the oracle for the adiabatic elimination: for
/// `t_end >> 1/kappa1` the result converges to [`cascade_steady_output`].
pub fn simulate_cascade_ode(
    n1: usize,
    n2: usize,
    cfg: &ReadoutConfig,
    t_end: f64,
    dt: f64,
) -> Result<C64> {
    if !t_end.is_finite() || t_end < 0.0 {
        return Err(Error::InvalidParameter {
            name: "t_end",
            reason: format!("must be finite and >= 0, got {t_end}"),
        });
    }
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "dt",
            reason: format!("must be finite and > 0, got {dt}"),
        });
    }
    let dt_kappa = dt * cfg.kappa1;
    if dt_kappa >= 0.1 {
        return Err(Error::UnstableStep { dt_kappa });
    }

    let sqrt_k = cfg.kappa1.sqrt();
    let a_in = cfg.drive() * sqrt_k;
    let decay1 = C64::new(-cfg.kappa1 / 2.0, -cfg.chi * n1 as f64);
    let decay2 = C64::new(-cfg.kappa1 / 2.0, -cfg.chi * n2 as f64);
    // da1/dt = decay1 a1 - sqrt(k) a_in
    // da2/dt = decay2 a2 - sqrt(k) (a_in + sqrt(k) a1)
    let deriv = |a: [C64; 2]| -> [C64; 2] {
        [
            decay1 * a[0] - sqrt_k * a_in,
            decay2 * a[1] - sqrt_k * (a_in + sqrt_k * a[0]),
        ]
    };

    let mut a = [C64::new(0.0, 0.0); 2];
    if t_end > 0.0 {
        let steps = (t_end / dt).ceil() as usize;
        let h = t_end / steps as f64;
        for _ in 0..steps {
            let k1 = deriv(a);
            let k2 = deriv([a[0] + 0.5 * h * k1[0], a[1] + 0.5 * h * k1[1]]);
            let k3 = deriv([a[0] + 0.5 * h * k2[0], a[1] + 0.5 * h * k2[1]]);
            let k4 = deriv([a[0] + h * k3[0], a[1] + h * k3[1]]);
            a[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
            a[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
        }
    }
    // a_out2 = a_in2 + sqrt(k) a2 with a_in2 = a_out1 = a_in + sqrt(k) a1
    Ok(a_in + sqrt_k * (a[0] + a[1]))
}

/// One homodyne read.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct HomodyneOutcome {
    /// The measured X value, noise included when enabled.
    pub x_value: f64,
    /// Nearest-integer decode of `x_value` against the per-photon step.
    pub decoded_m: usize,
    /// The per-photon step used for decoding (signed).
    pub per_photon_step: f64,
}

/// Decode a measured X value to a photon number: nearest nonnegative
/// integer of `x / step`, ties away from zero.
pub fn decode(x_value: f64, cfg: &ReadoutConfig) -> usize {
    let step = cfg.per_photon_step();
    if step == 0.0 {
        return 0;
    }
    let q = x_value / step;
    if !q.is_finite() {
        return 0;
    }
    q.round().max(0.0) as usize
}

/// Sample one homodyne read of a total photon number through the chain.
///
/// The X signal carries additive Gaussian vacuum noise of variance
/// `1/(2 tau)` when noise is enabled; with noise disabled the read is the
/// exact first-order signal and decodes to `n_total` identically.
pub fn sample_homodyne<R: Rng + ?Sized>(
    n_total: usize,
    cfg: &ReadoutConfig,
    rng: &mut R,
) -> Result<HomodyneOutcome> {
    let step = cfg.per_photon_step();
    if step == 0.0 {
        return Err(Error::ZeroPhotonStep);
    }
    let mut x = expected_signal(n_total, cfg);
    if cfg.noise_enabled {
        let normal = Normal::new(0.0, cfg.noise_std()).expect("finite noise std");
        x += normal.sample(rng);
    }
    Ok(HomodyneOutcome {
        x_value: x,
        decoded_m: decode(x, cfg),
        per_photon_step: step,
    })
}

/// Probability that one read decodes to a wrong integer: the Gaussian tail
/// `P(|noise| > |step| / 2)` with noise variance `1/(2 tau)`.
///
/// A vanishing step makes the decode degenerate and returns 1.
pub fn misidentification_prob(cfg: &ReadoutConfig) -> f64 {
    let step = cfg.per_photon_step().abs();
    if step == 0.0 {
        return 1.0;
    }
    // P(|N(0, s^2)| > a) = erfc(a / (s sqrt(2))) with a = step/2,
    // s = 1/sqrt(2 tau)
    libm::erfc(0.5 * step * cfg.tau().sqrt())
}

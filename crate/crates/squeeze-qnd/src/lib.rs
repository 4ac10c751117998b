//! Fock-space simulator for entanglement concentration and purification of
//! two-mode squeezed microwave states, read out through a cascaded cross-Kerr
//! QND measurement chain.
//!
//! The crate is organized around five pieces:
//!
//! - [`fock`] — truncated Fock-space state algebra: squeezed-state
//!   construction, tensor products, mode annihilation, total-photon-number
//!   projection, Schmidt entropy, and fidelity.
//! - [`kerr`] — circuit-level parameters, the effective cross-Kerr
//!   coefficient, and the regime / imperfection inequality checks.
//! - [`readout`] — the two-cavity cascaded QND chain: exact steady-state
//!   output, first-order homodyne signal, vacuum-noise sampling, decoding,
//!   and a time-domain ODE oracle for the adiabatic elimination.
//! - [`concentration`] — the concentration protocol: measure the total
//!   photon number on one side, collapse, and keep outcomes that beat the
//!   entanglement of the input pair.
//! - [`purification`] — the purification protocol over a lossy channel:
//!   jump/no-jump trajectory branches, two-sided QND readout, classical
//!   comparison, and keep/discard statistics.
//!
//! States are immutable values and all operations are pure functions; the
//! only stochastic entry points take an explicitly seeded random source.

use thiserror::Error;

pub mod concentration;
pub mod fock;
pub mod kerr;
pub mod purification;
pub mod readout;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter failed its domain constraint.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Squeezing so strong that tanh(r) rounds to 1, leaving no usable
    /// truncation.
    #[error("lambda = tanh(r) must satisfy 0 <= lambda < 1 (got {lambda})")]
    LambdaOutOfRange { lambda: f64 },

    /// Tensor product of states with different cutoffs.
    #[error("mismatched Fock cutoffs: {left} vs {right}")]
    CutoffMismatch { left: usize, right: usize },

    /// Operation addressed a mode label the state does not carry.
    #[error("state has no mode {0}")]
    UnknownMode(fock::Mode),

    /// Operation requires a two-mode (or four-mode) state.
    #[error("expected a {expected}-mode state, got {got} modes")]
    ModeCountMismatch { expected: usize, got: usize },

    /// Operation requires a normalized state.
    #[error("state is not normalized (norm^2 = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    /// Bipartition does not split the state's modes.
    #[error("bipartition does not cover the state's modes")]
    BadBipartition,

    /// Total photon number outside the representable range.
    #[error("total photon number {m} out of range (max {max})")]
    SectorOutOfRange { m: usize, max: usize },

    /// Projection onto a sector with (numerically) zero probability.
    #[error("outcome m = {m} has probability {prob:.3e} below the 1e-14 floor")]
    ImpossibleOutcome { m: usize, prob: f64 },

    /// Ideal m-state with m beyond twice the cutoff.
    #[error("m = {m} exceeds 2 * n_max = {limit}")]
    MTooLarge { m: usize, limit: usize },

    /// States of different shape where identical shape is required.
    #[error("state shapes differ")]
    ShapeMismatch,

    /// Fixed-step integrator driven outside its stability window.
    #[error("unstable step: dt * kappa1 = {dt_kappa} must be < 0.1")]
    UnstableStep { dt_kappa: f64 },

    /// Readout chain outside the adiabatic regime.
    #[error("adiabatic guard violated: |chi| / kappa1 = {ratio} must be < 1")]
    AdiabaticGuard { ratio: f64 },

    /// Homodyne decode with a vanishing per-photon step.
    #[error("per-photon signal step is zero; decode is degenerate")]
    ZeroPhotonStep,

    /// First-order loss model pushed outside its validity region.
    #[error("total jump weight {total} >= 0.5; first-order loss model invalid")]
    LossTooLarge { total: f64 },

    /// A Monte Carlo run with no trials.
    #[error("at least one trial is required")]
    NoTrials,
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

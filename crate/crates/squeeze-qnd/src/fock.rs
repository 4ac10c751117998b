//! Truncated Fock-space state algebra.
//!
//! States are dense complex amplitude tensors over the Fock occupations of
//! two or four named modes, all sharing one per-mode cutoff `n_max`.
//! Constructors renormalize over the truncated support and record the
//! discarded probability mass as a tail deficit, so truncation error stays
//! auditable. Dense storage is deliberate: at `n_max = 35` a four-mode state
//! is ~1.7M amplitudes, which keeps projection and entropy code simple at
//! desk scale.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::{Error, Result};

/// Normalization slack: a state counts as normalized when
/// `|norm^2 - 1| < NORM_TOL`.
pub const NORM_TOL: f64 = 1e-12;

/// Singular values below this are dropped before the `p ln p` sum.
pub const SCHMIDT_FLOOR: f64 = 1e-12;

/// Projection outcomes with probability below this are rejected as
/// impossible rather than renormalized into garbage.
pub const PROB_FLOOR: f64 = 1e-14;

/// Mode label. Two-mode states use `A`/`B`; four-mode states use the fixed
/// order `A1, A2, B1, B2`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Mode {
    A,
    B,
    A1,
    A2,
    B1,
    B2,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::A => "A",
            Mode::B => "B",
            Mode::A1 => "A1",
            Mode::A2 => "A2",
            Mode::B1 => "B1",
            Mode::B2 => "B2",
        };
        write!(f, "{s}")
    }
}

/// Mode order of a single squeezed pair.
pub const PAIR_MODES: [Mode; 2] = [Mode::A, Mode::B];
/// Global mode order of the composite two-pair system.
pub const QUAD_MODES: [Mode; 4] = [Mode::A1, Mode::A2, Mode::B1, Mode::B2];
/// Alice's half of the composite system.
pub const ALICE_MODES: [Mode; 2] = [Mode::A1, Mode::A2];
/// Bob's half of the composite system.
pub const BOB_MODES: [Mode; 2] = [Mode::B1, Mode::B2];

/// Squeezing parameter `r` with its cached `lambda = tanh(r)`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct SqueezedParams {
    r: f64,
    lambda: f64,
}

impl SqueezedParams {
    /// Build from the squeezing parameter `r >= 0`.
    pub fn new(r: f64) -> Result<Self> {
        if !r.is_finite() || r < 0.0 {
            return Err(Error::InvalidParameter {
                name: "r",
                reason: format!("squeezing parameter must be finite and >= 0, got {r}"),
            });
        }
        let lambda = r.tanh();
        if lambda >= 1.0 {
            return Err(Error::LambdaOutOfRange { lambda });
        }
        Ok(Self { r, lambda })
    }

    /// Build from `lambda = tanh(r)` directly.
    pub fn from_lambda(lambda: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&lambda) {
            return Err(Error::LambdaOutOfRange { lambda });
        }
        Ok(Self {
            r: lambda.atanh(),
            lambda,
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Mean photon number per mode, `sinh^2(r)`.
    pub fn mean_photons(&self) -> f64 {
        self.r.sinh().powi(2)
    }
}

/// Smallest cutoff `n_max` whose geometric tail
/// `(1 - lambda^2) * sum_{n > n_max} lambda^(2n) = lambda^(2(n_max + 1))`
/// drops below `tail_tol`.
pub fn truncation_for(lambda: f64, tail_tol: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::LambdaOutOfRange { lambda });
    }
    if !(tail_tol > 0.0 && tail_tol < 1.0) {
        return Err(Error::InvalidParameter {
            name: "tail_tol",
            reason: format!("must lie in (0, 1), got {tail_tol}"),
        });
    }
    let x = lambda * lambda;
    let mut n_max = 0usize;
    let mut tail = x; // lambda^(2(n_max + 1))
    while tail >= tail_tol {
        n_max += 1;
        tail *= x;
    }
    Ok(n_max)
}

/// Bipartition of a state's modes into two non-empty sides.
#[derive(Clone, Debug, PartialEq)]
pub struct Bipartition {
    side_a: Vec<Mode>,
    side_b: Vec<Mode>,
}

impl Bipartition {
    /// Split `labels` into `side_a` and its complement.
    pub fn over(labels: &[Mode], side_a: &[Mode]) -> Result<Self> {
        if side_a.is_empty() || side_a.len() >= labels.len() {
            return Err(Error::BadBipartition);
        }
        for m in side_a {
            if !labels.contains(m) {
                return Err(Error::UnknownMode(*m));
            }
        }
        let side_b: Vec<Mode> = labels
            .iter()
            .copied()
            .filter(|m| !side_a.contains(m))
            .collect();
        Ok(Self {
            side_a: side_a.to_vec(),
            side_b,
        })
    }

    /// The `A1 A2 | B1 B2` cut of the composite system.
    pub fn alice_bob() -> Self {
        Self {
            side_a: ALICE_MODES.to_vec(),
            side_b: BOB_MODES.to_vec(),
        }
    }

    /// The `A | B` cut of a single pair.
    pub fn pair() -> Self {
        Self {
            side_a: vec![Mode::A],
            side_b: vec![Mode::B],
        }
    }

    pub fn side_a(&self) -> &[Mode] {
        &self.side_a
    }

    pub fn side_b(&self) -> &[Mode] {
        &self.side_b
    }
}

/// Dense state over the Fock occupations of 2 or 4 modes.
///
/// Amplitudes are stored row-major in the state's label order with the last
/// mode fastest. `tail_deficit` bounds the probability mass of the
/// untruncated state that lies outside the cutoff; operations propagate it.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiModeState {
    labels: Vec<Mode>,
    dim: usize,
    amps: Vec<C64>,
    tail_deficit: f64,
}

impl MultiModeState {
    fn empty(labels: &[Mode], n_max: usize) -> Self {
        let dim = n_max + 1;
        let len = dim.pow(labels.len() as u32);
        Self {
            labels: labels.to_vec(),
            dim,
            amps: vec![C64::new(0.0, 0.0); len],
            tail_deficit: 0.0,
        }
    }

    /// The all-vacuum state on the given modes.
    pub fn vacuum(labels: &[Mode], n_max: usize) -> Self {
        let mut s = Self::empty(labels, n_max);
        s.amps[0] = C64::new(1.0, 0.0);
        s
    }

    pub fn mode_count(&self) -> usize {
        self.labels.len()
    }

    pub fn n_max(&self) -> usize {
        self.dim - 1
    }

    pub fn labels(&self) -> &[Mode] {
        &self.labels
    }

    /// Upper bound on the probability mass discarded by truncation.
    pub fn tail_deficit(&self) -> f64 {
        self.tail_deficit
    }

    fn axis_of(&self, mode: Mode) -> Result<usize> {
        self.labels
            .iter()
            .position(|&m| m == mode)
            .ok_or(Error::UnknownMode(mode))
    }

    fn flat_index(&self, occ: &[usize]) -> usize {
        occ.iter().fold(0, |acc, &n| acc * self.dim + n)
    }

    fn decompose(&self, mut idx: usize, occ: &mut [usize]) {
        for slot in occ.iter_mut().rev() {
            *slot = idx % self.dim;
            idx /= self.dim;
        }
    }

    /// Amplitude at the given occupation numbers (label order).
    pub fn amplitude(&self, occ: &[usize]) -> C64 {
        assert_eq!(occ.len(), self.labels.len(), "occupation arity mismatch");
        assert!(occ.iter().all(|&n| n < self.dim), "occupation beyond cutoff");
        self.amps[self.flat_index(occ)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `true` when `|norm^2 - 1| < NORM_TOL`.
    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() < NORM_TOL
    }

    fn require_normalized(&self) -> Result<()> {
        let n2 = self.norm_sqr();
        if (n2 - 1.0).abs() < NORM_TOL {
            Ok(())
        } else {
            Err(Error::NotNormalized { norm_sqr: n2 })
        }
    }

    /// Rescale to unit norm, returning the squared norm that was divided
    /// out. Errors on a numerically zero state.
    pub fn normalized(mut self) -> Result<(f64, Self)> {
        let n2 = self.norm_sqr();
        if n2 < PROB_FLOOR {
            return Err(Error::NotNormalized { norm_sqr: n2 });
        }
        let scale = 1.0 / n2.sqrt();
        for a in &mut self.amps {
            *a *= scale;
        }
        Ok((n2, self))
    }

    /// Mean occupation of one mode.
    pub fn mean_occupation(&self, mode: Mode) -> Result<f64> {
        let axis = self.axis_of(mode)?;
        let mut occ = vec![0usize; self.labels.len()];
        let mut acc = 0.0;
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            self.decompose(i, &mut occ);
            acc += occ[axis] as f64 * a.norm_sqr();
        }
        Ok(acc)
    }

    /// Apply the annihilation operator on `mode`. The result is not
    /// normalized; its squared norm equals the input's mean occupation of
    /// that mode.
    pub fn annihilate(&self, mode: Mode) -> Result<Self> {
        let axis = self.axis_of(mode)?;
        let mut out = Self::empty(&self.labels, self.n_max());
        out.tail_deficit = self.tail_deficit;
        let mut occ = vec![0usize; self.labels.len()];
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            self.decompose(i, &mut occ);
            if occ[axis] == 0 {
                continue;
            }
            let k = occ[axis] - 1;
            occ[axis] = k;
            let j = out.flat_index(&occ);
            occ[axis] = k + 1;
            out.amps[j] = ((k + 1) as f64).sqrt() * a;
        }
        Ok(out)
    }

    /// Probability distribution of the total photon number over a subset
    /// of modes. Requires a normalized state; entries sum to 1 up to the
    /// truncation deficit.
    pub fn total_number_distribution(&self, modes: &[Mode]) -> Result<Vec<f64>> {
        self.require_normalized()?;
        let axes = self.subset_axes(modes)?;
        let mut dist = vec![0.0; axes.len() * self.n_max() + 1];
        let mut occ = vec![0usize; self.labels.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let w = a.norm_sqr();
            if w == 0.0 {
                continue;
            }
            self.decompose(i, &mut occ);
            let m: usize = axes.iter().map(|&ax| occ[ax]).sum();
            dist[m] += w;
        }
        Ok(dist)
    }

    /// Projective measurement of the total photon number over `modes`.
    /// Returns the outcome probability and the renormalized post-state.
    pub fn project_total_number(&self, modes: &[Mode], m: usize) -> Result<(f64, Self)> {
        self.require_normalized()?;
        let axes = self.subset_axes(modes)?;
        let max = axes.len() * self.n_max();
        if m > max {
            return Err(Error::SectorOutOfRange { m, max });
        }
        let mut out = self.clone();
        let mut prob = 0.0;
        let mut occ = vec![0usize; self.labels.len()];
        for (i, a) in self.amps.iter().enumerate() {
            self.decompose(i, &mut occ);
            let total: usize = axes.iter().map(|&ax| occ[ax]).sum();
            if total == m {
                prob += a.norm_sqr();
            } else {
                out.amps[i] = C64::new(0.0, 0.0);
            }
        }
        if prob < PROB_FLOOR {
            return Err(Error::ImpossibleOutcome { m, prob });
        }
        let scale = 1.0 / prob.sqrt();
        for a in &mut out.amps {
            *a *= scale;
        }
        Ok((prob, out))
    }

    /// Joint distribution of the total photon numbers over two disjoint
    /// mode subsets, as `((m_a, m_b), probability)` entries with nonzero
    /// weight.
    pub fn joint_total_number_distribution(
        &self,
        modes_a: &[Mode],
        modes_b: &[Mode],
    ) -> Result<Vec<((usize, usize), f64)>> {
        self.require_normalized()?;
        let axes_a = self.subset_axes(modes_a)?;
        let axes_b = self.subset_axes(modes_b)?;
        let wa = axes_a.len() * self.n_max() + 1;
        let wb = axes_b.len() * self.n_max() + 1;
        let mut grid = vec![0.0; wa * wb];
        let mut occ = vec![0usize; self.labels.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let w = a.norm_sqr();
            if w == 0.0 {
                continue;
            }
            self.decompose(i, &mut occ);
            let ma: usize = axes_a.iter().map(|&ax| occ[ax]).sum();
            let mb: usize = axes_b.iter().map(|&ax| occ[ax]).sum();
            grid[ma * wb + mb] += w;
        }
        let mut entries = Vec::new();
        for ma in 0..wa {
            for mb in 0..wb {
                let p = grid[ma * wb + mb];
                if p > 0.0 {
                    entries.push(((ma, mb), p));
                }
            }
        }
        Ok(entries)
    }

    /// Von Neumann entropy (nats) of the reduced state on `cut.side_a`,
    /// from the singular values of the reshaped amplitude matrix.
    pub fn entanglement_entropy(&self, cut: &Bipartition) -> Result<f64> {
        self.require_normalized()?;
        let axes_a = self.subset_axes(cut.side_a())?;
        let axes_b = self.subset_axes(cut.side_b())?;
        if axes_a.len() + axes_b.len() != self.labels.len() {
            return Err(Error::BadBipartition);
        }
        let rows = self.dim.pow(axes_a.len() as u32);
        let cols = self.dim.pow(axes_b.len() as u32);
        let mut mat = DMatrix::<C64>::zeros(rows, cols);
        let mut occ = vec![0usize; self.labels.len()];
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            self.decompose(i, &mut occ);
            let row = axes_a.iter().fold(0, |acc, &ax| acc * self.dim + occ[ax]);
            let col = axes_b.iter().fold(0, |acc, &ax| acc * self.dim + occ[ax]);
            mat[(row, col)] = *a;
        }
        let svd = mat.svd(false, false);
        let mut entropy = 0.0;
        for &sigma in svd.singular_values.iter() {
            if sigma < SCHMIDT_FLOOR {
                continue;
            }
            let p = sigma * sigma;
            entropy -= p * p.ln();
        }
        Ok(entropy)
    }

    /// Overlap `<self|other>`.
    pub fn overlap(&self, other: &Self) -> Result<C64> {
        if self.labels != other.labels || self.dim != other.dim {
            return Err(Error::ShapeMismatch);
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Fidelity `|<self|other>|^2` between two normalized states.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        self.require_normalized()?;
        other.require_normalized()?;
        Ok(self.overlap(other)?.norm_sqr())
    }

    fn subset_axes(&self, modes: &[Mode]) -> Result<Vec<usize>> {
        if modes.is_empty() {
            return Err(Error::BadBipartition);
        }
        let mut axes = Vec::with_capacity(modes.len());
        for &m in modes {
            let ax = self.axis_of(m)?;
            if axes.contains(&ax) {
                return Err(Error::BadBipartition);
            }
            axes.push(ax);
        }
        Ok(axes)
    }
}

/// Two-mode squeezed vacuum truncated at `n_max`: amplitude
/// `sqrt(1 - lambda^2) * lambda^n` at `|n, n>`, renormalized over the
/// truncated support with the tail recorded.
pub fn two_mode_squeezed(sp: &SqueezedParams, n_max: usize) -> MultiModeState {
    let lambda = sp.lambda();
    let mut s = MultiModeState::empty(&PAIR_MODES, n_max);
    let head = (1.0 - lambda * lambda).sqrt();
    let mut raw = 0.0;
    let mut amp = head;
    for n in 0..=n_max {
        let idx = s.flat_index(&[n, n]);
        s.amps[idx] = C64::new(amp, 0.0);
        raw += amp * amp;
        amp *= lambda;
    }
    s.tail_deficit = (1.0 - raw).max(0.0);
    let scale = 1.0 / raw.sqrt();
    for a in &mut s.amps {
        *a *= scale;
    }
    s
}

/// Tensor product of two squeezed pairs into the composite four-mode state
/// with mode order `(A1, A2, B1, B2)`:
/// `out(nA1, nA2, nB1, nB2) = s1(nA1, nB1) * s2(nA2, nB2)`.
pub fn tensor(s1: &MultiModeState, s2: &MultiModeState) -> Result<MultiModeState> {
    if s1.mode_count() != 2 || s2.mode_count() != 2 {
        return Err(Error::ModeCountMismatch {
            expected: 2,
            got: s1.mode_count().max(s2.mode_count()),
        });
    }
    if s1.dim != s2.dim {
        return Err(Error::CutoffMismatch {
            left: s1.n_max(),
            right: s2.n_max(),
        });
    }
    let dim = s1.dim;
    let mut out = MultiModeState::empty(&QUAD_MODES, s1.n_max());
    for a1 in 0..dim {
        for b1 in 0..dim {
            let f1 = s1.amps[a1 * dim + b1];
            if f1.norm_sqr() == 0.0 {
                continue;
            }
            for a2 in 0..dim {
                for b2 in 0..dim {
                    let f2 = s2.amps[a2 * dim + b2];
                    if f2.norm_sqr() == 0.0 {
                        continue;
                    }
                    let idx = ((a1 * dim + a2) * dim + b1) * dim + b2;
                    out.amps[idx] = f1 * f2;
                }
            }
        }
    }
    // discarded mass of the product is the complement of both kept masses
    out.tail_deficit = 1.0 - (1.0 - s1.tail_deficit) * (1.0 - s2.tail_deficit);
    Ok(out)
}

/// The uniformly weighted total-photon-number state
/// `sum_n |n, m - n>_{A1 A2} |n, m - n>_{B1 B2} / sqrt(1 + m)`.
///
/// For `m <= n_max` every term is representable and the state is exact; for
/// `n_max < m <= 2 n_max` the missing terms are recorded in the tail
/// deficit and the kept ones renormalized.
pub fn ideal_m_state(m: usize, n_max: usize) -> Result<MultiModeState> {
    if m > 2 * n_max {
        return Err(Error::MTooLarge {
            m,
            limit: 2 * n_max,
        });
    }
    let mut s = MultiModeState::empty(&QUAD_MODES, n_max);
    let lo = m.saturating_sub(n_max);
    let hi = m.min(n_max);
    let kept = hi - lo + 1;
    let amp = C64::new(1.0 / (kept as f64).sqrt(), 0.0);
    for n in lo..=hi {
        let occ = [n, m - n, n, m - n];
        let idx = s.flat_index(&occ);
        s.amps[idx] = amp;
    }
    s.tail_deficit = 1.0 - kept as f64 / (m + 1) as f64;
    Ok(s)
}

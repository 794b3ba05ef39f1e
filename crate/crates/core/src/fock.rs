//! Multimode bosonic states in a truncated Fock basis.
//!
//! Amplitudes are stored densely in row-major order: the occupation tuple
//! `(n_0, n_1, ..., n_{k-1})` lives at linear index `Σ n_m · stride_m`, with
//! `stride_{k-1} = 1` and `stride_m = stride_{m+1} · (cutoff_{m+1} + 1)`. The
//! serialized form uses the same order, so states are portable.
//!
//! Every state carries a `leakage` figure: the norm² known to be missing from
//! the tensor because it would have landed above a cutoff. For a state built
//! from a physical unit-norm state, `norm² + leakage = 1`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{SimError, SimResult};

/// Tolerance on `norm² + leakage = 1` for operations that require a
/// normalized input.
pub const NORMALIZED_TOL: f64 = 1e-8;

/// Per-mode photon counts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupationIndex(pub Vec<usize>);

impl OccupationIndex {
    pub fn new(counts: impl Into<Vec<usize>>) -> Self {
        Self(counts.into())
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }
}

impl From<&[usize]> for OccupationIndex {
    fn from(v: &[usize]) -> Self {
        Self(v.to_vec())
    }
}

impl<const N: usize> From<[usize; N]> for OccupationIndex {
    fn from(v: [usize; N]) -> Self {
        Self(v.to_vec())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    cutoffs: Vec<usize>,
    strides: Vec<usize>,
    amplitudes: Vec<C64>,
    leakage: f64,
}

fn strides_for(cutoffs: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; cutoffs.len()];
    for m in (0..cutoffs.len().saturating_sub(1)).rev() {
        strides[m] = strides[m + 1] * (cutoffs[m + 1] + 1);
    }
    strides
}

fn check_shape(cutoffs: &[usize]) -> SimResult<usize> {
    if cutoffs.is_empty() {
        return Err(SimError::invalid("a state needs at least one mode"));
    }
    if let Some(m) = cutoffs.iter().position(|&c| c == 0) {
        return Err(SimError::invalid(format!("cutoff of mode {m} must be at least 1")));
    }
    Ok(cutoffs.iter().map(|&c| c + 1).product())
}

impl FockState {
    /// All-zeros occupation with amplitude one.
    pub fn vacuum(num_modes: usize, cutoffs: &[usize]) -> SimResult<Self> {
        if num_modes == 0 {
            return Err(SimError::invalid("a state needs at least one mode"));
        }
        if cutoffs.len() != num_modes {
            return Err(SimError::invalid(format!(
                "expected {num_modes} cutoffs, got {}",
                cutoffs.len()
            )));
        }
        let mut state = Self::zeros(cutoffs)?;
        state.amplitudes[0] = C64::new(1.0, 0.0);
        Ok(state)
    }

    pub fn zeros(cutoffs: &[usize]) -> SimResult<Self> {
        let len = check_shape(cutoffs)?;
        Ok(Self {
            cutoffs: cutoffs.to_vec(),
            strides: strides_for(cutoffs),
            amplitudes: vec![C64::new(0.0, 0.0); len],
            leakage: 0.0,
        })
    }

    /// Wraps a dense amplitude tensor given in row-major order.
    pub fn from_amplitudes(cutoffs: &[usize], amplitudes: Vec<C64>, leakage: f64) -> SimResult<Self> {
        let len = check_shape(cutoffs)?;
        if amplitudes.len() != len {
            return Err(SimError::invalid(format!(
                "amplitude tensor has {} entries, shape needs {len}",
                amplitudes.len()
            )));
        }
        if !(leakage >= 0.0 && leakage.is_finite()) {
            return Err(SimError::invalid(format!("leakage must be finite and ≥ 0, got {leakage}")));
        }
        Ok(Self {
            cutoffs: cutoffs.to_vec(),
            strides: strides_for(cutoffs),
            amplitudes,
            leakage,
        })
    }

    /// Single-mode state from its Fock amplitudes `c_0..=c_N`.
    pub fn single_mode(amplitudes: Vec<C64>, leakage: f64) -> SimResult<Self> {
        if amplitudes.len() < 2 {
            return Err(SimError::invalid("single-mode state needs cutoff ≥ 1"));
        }
        let cutoff = amplitudes.len() - 1;
        Self::from_amplitudes(&[cutoff], amplitudes, leakage)
    }

    pub fn num_modes(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn leakage(&self) -> f64 {
        self.leakage
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn linear_index(&self, idx: &OccupationIndex) -> SimResult<usize> {
        if idx.0.len() != self.num_modes() {
            return Err(SimError::invalid(format!(
                "occupation has {} modes, state has {}",
                idx.0.len(),
                self.num_modes()
            )));
        }
        let mut lin = 0;
        for (m, (&n, &c)) in idx.0.iter().zip(&self.cutoffs).enumerate() {
            if n > c {
                return Err(SimError::invalid(format!("occupation {n} of mode {m} exceeds cutoff {c}")));
            }
            lin += n * self.strides[m];
        }
        Ok(lin)
    }

    /// Occupation of `mode` at linear index `lin`.
    #[inline]
    pub fn occupation_of(&self, lin: usize, mode: usize) -> usize {
        (lin / self.strides[mode]) % (self.cutoffs[mode] + 1)
    }

    pub fn occupation(&self, lin: usize) -> OccupationIndex {
        OccupationIndex((0..self.num_modes()).map(|m| self.occupation_of(lin, m)).collect())
    }

    pub fn amplitude(&self, idx: impl Into<OccupationIndex>) -> SimResult<C64> {
        let lin = self.linear_index(&idx.into())?;
        Ok(self.amplitudes[lin])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Rescales to unit norm. Leakage is rescaled by the same factor so it
    /// stays comparable to the tensor's weight.
    pub fn normalize(&self) -> SimResult<Self> {
        let n2 = self.norm_sqr();
        if n2 == 0.0 || !n2.is_finite() {
            return Err(SimError::DegenerateState);
        }
        let inv = 1.0 / n2.sqrt();
        Ok(Self {
            cutoffs: self.cutoffs.clone(),
            strides: self.strides.clone(),
            amplitudes: self.amplitudes.iter().map(|a| a * inv).collect(),
            leakage: self.leakage / n2,
        })
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            cutoffs: self.cutoffs.clone(),
            strides: self.strides.clone(),
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
            leakage: self.leakage * factor.norm_sqr(),
        }
    }

    fn check_mode(&self, mode: usize) -> SimResult<()> {
        if mode >= self.num_modes() {
            return Err(SimError::invalid(format!(
                "mode {mode} out of range for a {}-mode state",
                self.num_modes()
            )));
        }
        Ok(())
    }

    /// Image under the creation operator on `mode`. Weight sitting at the
    /// cutoff is pushed out of the basis and accounted as leakage.
    pub fn apply_creation(&self, mode: usize) -> SimResult<Self> {
        self.check_mode(mode)?;
        let cutoff = self.cutoffs[mode];
        let stride = self.strides[mode];
        let mut out = vec![C64::new(0.0, 0.0); self.len()];
        let mut lost = 0.0;
        for (lin, &a) in self.amplitudes.iter().enumerate() {
            if a == C64::new(0.0, 0.0) {
                continue;
            }
            let n = self.occupation_of(lin, mode);
            let factor = ((n + 1) as f64).sqrt();
            if n == cutoff {
                lost += (factor * a).norm_sqr();
            } else {
                out[lin + stride] = a * factor;
            }
        }
        Ok(Self {
            cutoffs: self.cutoffs.clone(),
            strides: self.strides.clone(),
            amplitudes: out,
            leakage: self.leakage + lost,
        })
    }

    /// Image under the annihilation operator on `mode`.
    pub fn apply_annihilation(&self, mode: usize) -> SimResult<Self> {
        self.check_mode(mode)?;
        let stride = self.strides[mode];
        let mut out = vec![C64::new(0.0, 0.0); self.len()];
        for (lin, &a) in self.amplitudes.iter().enumerate() {
            let n = self.occupation_of(lin, mode);
            if n > 0 {
                out[lin - stride] = a * (n as f64).sqrt();
            }
        }
        Ok(Self {
            cutoffs: self.cutoffs.clone(),
            strides: self.strides.clone(),
            amplitudes: out,
            leakage: self.leakage,
        })
    }

    pub fn add(&self, other: &Self) -> SimResult<Self> {
        if self.cutoffs != other.cutoffs {
            return Err(SimError::invalid("cannot add states with different shapes"));
        }
        Ok(Self {
            cutoffs: self.cutoffs.clone(),
            strides: self.strides.clone(),
            amplitudes: self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a + b).collect(),
            leakage: self.leakage + other.leakage,
        })
    }

    /// Outer product; modes of `self` come first.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut cutoffs = self.cutoffs.clone();
        cutoffs.extend_from_slice(&other.cutoffs);
        let mut amplitudes = Vec::with_capacity(self.len() * other.len());
        for a in &self.amplitudes {
            amplitudes.extend(other.amplitudes.iter().map(|b| a * b));
        }
        // Missing weight of a product: total weight minus what the tensor holds.
        let (na, nb) = (self.norm_sqr(), other.norm_sqr());
        let leakage = self.leakage * nb + other.leakage * na + self.leakage * other.leakage;
        Self {
            strides: strides_for(&cutoffs),
            cutoffs,
            amplitudes,
            leakage,
        }
    }

    /// `|norm² + leakage − 1|` must be within [`NORMALIZED_TOL`].
    pub fn check_normalized(&self) -> SimResult<()> {
        let total = self.norm_sqr() + self.leakage;
        if (total - 1.0).abs() > NORMALIZED_TOL {
            return Err(SimError::invalid(format!(
                "state is not normalized: norm² + leakage = {total}"
            )));
        }
        Ok(())
    }

    /// Marginal photon-number probabilities of `mode`, `n = 0..=cutoff`.
    pub fn photon_number_distribution(&self, mode: usize) -> SimResult<Vec<f64>> {
        self.check_mode(mode)?;
        self.check_normalized()?;
        Ok(self.marginal(mode))
    }

    /// Unchecked marginal `Σ |a|²` grouped by the occupation of `mode`.
    pub fn marginal(&self, mode: usize) -> Vec<f64> {
        let mut dist = vec![0.0; self.cutoffs[mode] + 1];
        for (lin, a) in self.amplitudes.iter().enumerate() {
            dist[self.occupation_of(lin, mode)] += a.norm_sqr();
        }
        dist
    }

    /// Joint marginal `P[n_a][n_b]` of two distinct modes.
    pub fn joint_marginal(&self, mode_a: usize, mode_b: usize) -> SimResult<Vec<Vec<f64>>> {
        self.check_mode(mode_a)?;
        self.check_mode(mode_b)?;
        if mode_a == mode_b {
            return Err(SimError::invalid("joint marginal needs two distinct modes"));
        }
        let mut joint = vec![vec![0.0; self.cutoffs[mode_b] + 1]; self.cutoffs[mode_a] + 1];
        for (lin, a) in self.amplitudes.iter().enumerate() {
            joint[self.occupation_of(lin, mode_a)][self.occupation_of(lin, mode_b)] += a.norm_sqr();
        }
        Ok(joint)
    }

    /// Norm² of amplitudes with `mode` occupied at or above `n`.
    pub fn weight_at_or_above(&self, mode: usize, n: usize) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(lin, _)| self.occupation_of(*lin, mode) >= n)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Largest `|a − b|` over all amplitudes. Shapes must match.
    pub fn max_abs_diff(&self, other: &Self) -> SimResult<f64> {
        if self.cutoffs != other.cutoffs {
            return Err(SimError::invalid("states have different shapes"));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&FockStateRecord::from(self)).expect("state record serializes")
    }

    pub fn from_json(text: &str) -> SimResult<Self> {
        let rec: FockStateRecord =
            serde_json::from_str(text).map_err(|e| SimError::invalid(format!("malformed state JSON: {e}")))?;
        rec.try_into()
    }
}

/// Wire form of a [`FockState`]. Amplitudes are `[re, im]` pairs in row-major
/// occupation order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FockStateRecord {
    pub num_modes: usize,
    pub cutoffs: Vec<usize>,
    pub amplitudes: Vec<[f64; 2]>,
    pub leakage: f64,
}

impl From<&FockState> for FockStateRecord {
    fn from(s: &FockState) -> Self {
        Self {
            num_modes: s.num_modes(),
            cutoffs: s.cutoffs.clone(),
            amplitudes: s.amplitudes.iter().map(|a| [a.re, a.im]).collect(),
            leakage: s.leakage,
        }
    }
}

impl TryFrom<FockStateRecord> for FockState {
    type Error = SimError;

    fn try_from(rec: FockStateRecord) -> SimResult<Self> {
        if rec.num_modes != rec.cutoffs.len() {
            return Err(SimError::invalid(format!(
                "num_modes {} disagrees with {} cutoffs",
                rec.num_modes,
                rec.cutoffs.len()
            )));
        }
        let amps = rec.amplitudes.iter().map(|&[re, im]| C64::new(re, im)).collect();
        FockState::from_amplitudes(&rec.cutoffs, amps, rec.leakage)
    }
}

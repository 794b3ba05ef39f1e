//! Passive linear optics on [`FockState`]s: beam splitters and phase shifters.
//!
//! A beam splitter acts on creation operators as `â†_l → Σ_k Λ_kl â†_k` with
//!
//! ```text
//! Λ = [[ cos θ′,          −e^{iφ′} sin θ′ ],
//!      [ e^{−iφ′} sin θ′,   cos θ′        ]],   θ′ = θ + δ₁, φ′ = φ + δ₂.
//! ```
//!
//! The induced Fock-space unitary conserves total photon number, so it is
//! applied block by block. Block `T` holds `⟨m′, T−m′|U|m, T−m⟩`; it is the
//! restriction of `Λ^{⊗T}` to symmetric tensors and is built from block
//! `T−1` by coupling in one more photon (see `next_block`). The elements stay
//! accurate at photon numbers where the explicit binomial routing sum, or a
//! recurrence on creation operators alone, loses every digit.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{SimError, SimResult};
use crate::fock::FockState;

/// Weight pushed past the cutoffs above which a beam splitter logs it.
const LOST_LOG_WEIGHT: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeamSplitterSpec {
    pub theta: f64,
    pub phi: f64,
    #[serde(default)]
    pub delta1: f64,
    #[serde(default)]
    pub delta2: f64,
}

impl BeamSplitterSpec {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi, delta1: 0.0, delta2: 0.0 }
    }

    /// The 50:50 splitter with `θ = π/4, φ = π/2`.
    pub fn symmetric() -> Self {
        Self::new(FRAC_PI_4, FRAC_PI_2)
    }

    pub fn perturbed(self, delta1: f64, delta2: f64) -> Self {
        Self { delta1, delta2, ..self }
    }

    pub fn effective_theta(&self) -> f64 {
        self.theta + self.delta1
    }

    pub fn effective_phi(&self) -> f64 {
        self.phi + self.delta2
    }

    /// `θ′ → −θ′` at fixed `φ′`, i.e. `Λ†`.
    pub fn inverse(&self) -> Self {
        Self::new(-self.effective_theta(), self.effective_phi())
    }

    pub fn matrix(&self) -> Matrix2<C64> {
        bs_matrix(self)
    }
}

pub fn bs_matrix(spec: &BeamSplitterSpec) -> Matrix2<C64> {
    let (s, c) = spec.effective_theta().sin_cos();
    let phi = spec.effective_phi();
    Matrix2::new(
        C64::new(c, 0.0),
        -C64::from_polar(s, phi),
        C64::from_polar(s, -phi),
        C64::new(c, 0.0),
    )
}

/// `Λ` embedded on `(mode_a, mode_b)` of an `num_modes`-mode identity.
pub fn mode_matrix(spec: &BeamSplitterSpec, num_modes: usize, mode_a: usize, mode_b: usize) -> SimResult<DMatrix<C64>> {
    if mode_a >= num_modes || mode_b >= num_modes || mode_a == mode_b {
        return Err(SimError::invalid(format!(
            "cannot embed a splitter on ({mode_a}, {mode_b}) in {num_modes} modes"
        )));
    }
    let m = bs_matrix(spec);
    let mut full = DMatrix::identity(num_modes, num_modes);
    full[(mode_a, mode_a)] = m[(0, 0)];
    full[(mode_a, mode_b)] = m[(0, 1)];
    full[(mode_b, mode_a)] = m[(1, 0)];
    full[(mode_b, mode_b)] = m[(1, 1)];
    Ok(full)
}

/// Largest entry of `|Λ†Λ − I|`.
pub fn unitarity_defect(m: &Matrix2<C64>) -> f64 {
    let prod = m.adjoint() * m - Matrix2::identity();
    prod.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn check_pair(state: &FockState, mode_a: usize, mode_b: usize) -> SimResult<()> {
    let k = state.num_modes();
    if mode_a >= k || mode_b >= k {
        return Err(SimError::invalid(format!(
            "beam splitter modes ({mode_a}, {mode_b}) out of range for a {k}-mode state"
        )));
    }
    if mode_a == mode_b {
        return Err(SimError::invalid(format!("beam splitter modes overlap (both {mode_a})")));
    }
    Ok(())
}

/// Advances the block of matrix elements from total photon number `t − 1`
/// to `t`. Blocks are `(t+1)²` row-major by column: entry `[m·(t+1) + p]` is
/// `⟨p, t−p|U|m, t−m⟩`.
///
/// Block `t` is the compression `E†(B_{t−1} ⊗ Λ)E`, where `E` embeds the
/// `t`-photon symmetric space into the `(t−1)`-photon one tensored with a
/// single photon: `E|m⟩ = √(m/t)|m−1⟩⊗e₁ + √((t−m)/t)|m⟩⊗e₂`. A unitary
/// compressed by an isometry cannot amplify rounding errors.
fn next_block(prev: &[C64], t: usize, lam: &Matrix2<C64>) -> Vec<C64> {
    let dim = t + 1;
    let prev_dim = t;
    let (l11, l12, l21, l22) = (lam[(0, 0)], lam[(0, 1)], lam[(1, 0)], lam[(1, 1)]);
    let tf = t as f64;
    let a: Vec<f64> = (0..dim).map(|m| (m as f64 / tf).sqrt()).collect();
    let b: Vec<f64> = (0..dim).map(|m| ((t - m) as f64 / tf).sqrt()).collect();
    let zero = C64::new(0.0, 0.0);
    let at = |p: usize, m: usize| if p < prev_dim && m < prev_dim { prev[m * prev_dim + p] } else { zero };
    let mut block = vec![zero; dim * dim];
    for m in 0..dim {
        for p in 0..dim {
            let mut v = zero;
            if p > 0 {
                let lo = if m > 0 { l11 * a[m] * at(p - 1, m - 1) } else { zero };
                v += a[p] * (lo + l12 * b[m] * at(p - 1, m));
            }
            let lo = if m > 0 { l21 * a[m] * at(p, m - 1) } else { zero };
            v += b[p] * (lo + l22 * b[m] * at(p, m));
            block[m * dim + p] = v;
        }
    }
    block
}

/// Applies the beam splitter `spec` to modes `(mode_a, mode_b)`, with
/// `mode_a` in the role of the first row/column of `Λ`. Output weight that
/// falls above either cutoff is added to the leakage.
pub fn apply_beamsplitter(
    state: &FockState,
    mode_a: usize,
    mode_b: usize,
    spec: &BeamSplitterSpec,
) -> SimResult<FockState> {
    check_pair(state, mode_a, mode_b)?;
    let cut_a = state.cutoffs()[mode_a];
    let cut_b = state.cutoffs()[mode_b];
    let lam = bs_matrix(spec);
    let sa = state.strides()[mode_a];
    let sb = state.strides()[mode_b];
    let amps = state.amplitudes();
    let bases: Vec<usize> = (0..state.len())
        .filter(|&lin| state.occupation_of(lin, mode_a) == 0 && state.occupation_of(lin, mode_b) == 0)
        .collect();

    let mut out = vec![C64::new(0.0, 0.0); state.len()];
    let mut lost = 0.0;
    let mut block = vec![C64::new(1.0, 0.0)];
    let mut tmp = Vec::new();
    for t in 0..=(cut_a + cut_b) {
        if t > 0 {
            block = next_block(&block, t, &lam);
        }
        let dim = t + 1;
        let m_lo = t.saturating_sub(cut_b);
        let m_hi = t.min(cut_a);
        for &base in &bases {
            tmp.clear();
            tmp.resize(dim, C64::new(0.0, 0.0));
            let mut any = false;
            for m in m_lo..=m_hi {
                let a = amps[base + m * sa + (t - m) * sb];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                any = true;
                for (acc, &u) in tmp.iter_mut().zip(&block[m * dim..(m + 1) * dim]) {
                    *acc += a * u;
                }
            }
            if !any {
                continue;
            }
            for (p, &v) in tmp.iter().enumerate() {
                let q = t - p;
                if p <= cut_a && q <= cut_b {
                    out[base + p * sa + q * sb] = v;
                } else {
                    lost += v.norm_sqr();
                }
            }
        }
    }
    if lost > LOST_LOG_WEIGHT {
        log::debug!("beam splitter on modes ({mode_a}, {mode_b}) pushed weight {lost:e} past the cutoffs");
    }
    FockState::from_amplitudes(state.cutoffs(), out, state.leakage() + lost)
}

/// Multiplies the amplitude at occupation `n` of `mode` by `e^{i n·phase}`.
pub fn apply_phase(state: &FockState, mode: usize, phase: f64) -> SimResult<FockState> {
    if mode >= state.num_modes() {
        return Err(SimError::invalid(format!(
            "mode {mode} out of range for a {}-mode state",
            state.num_modes()
        )));
    }
    let phases: Vec<C64> = (0..=state.cutoffs()[mode])
        .map(|n| C64::from_polar(1.0, n as f64 * phase))
        .collect();
    let amps = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(lin, a)| a * phases[state.occupation_of(lin, mode)])
        .collect();
    FockState::from_amplitudes(state.cutoffs(), amps, state.leakage())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sources::{squeezed_vacuum, SqueezeParams};
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn fock2(m: usize, n: usize, cutoff: usize) -> FockState {
        let mut s = FockState::vacuum(2, &[cutoff, cutoff]).unwrap();
        for _ in 0..m {
            s = s.apply_creation(0).unwrap();
        }
        for _ in 0..n {
            s = s.apply_creation(1).unwrap();
        }
        s.normalize().unwrap()
    }

    /// Matrix element by the explicit binomial routing sum. Fine at small
    /// photon numbers and independent of the recurrence.
    fn routing_element(lam: &Matrix2<C64>, m: usize, n: usize, mp: usize) -> C64 {
        let fact = |k: usize| (1..=k).map(|x| x as f64).product::<f64>();
        let binom = |a: usize, b: usize| fact(a) / (fact(b) * fact(a - b));
        let np = m + n - mp;
        let mut sum = c(0.0, 0.0);
        for j in 0..=m.min(mp) {
            let k = mp - j;
            if k > n {
                continue;
            }
            sum += binom(m, j) * binom(n, k)
                * lam[(0, 0)].powu(j as u32)
                * lam[(1, 0)].powu((m - j) as u32)
                * lam[(0, 1)].powu(k as u32)
                * lam[(1, 1)].powu((n - k) as u32);
        }
        sum * (fact(mp) * fact(np) / (fact(m) * fact(n))).sqrt()
    }

    #[test]
    fn matrix_entries() {
        let id = bs_matrix(&BeamSplitterSpec::new(0.0, 1.3));
        assert!((id - Matrix2::identity()).iter().all(|z| z.norm() < 1e-15));

        let sym = bs_matrix(&BeamSplitterSpec::symmetric());
        let h = FRAC_1_SQRT_2;
        assert!((sym[(0, 0)] - c(h, 0.0)).norm() < 1e-15);
        assert!((sym[(0, 1)] - c(0.0, -h)).norm() < 1e-15);
        assert!((sym[(1, 0)] - c(0.0, -h)).norm() < 1e-15);
        assert!((sym[(1, 1)] - c(h, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn recurrence_matches_routing_sum() {
        let spec = BeamSplitterSpec::new(0.37, 1.1).perturbed(0.05, -0.2);
        let lam = bs_matrix(&spec);
        let mut block = vec![c(1.0, 0.0)];
        for t in 1..=8 {
            block = next_block(&block, t, &lam);
            let dim = t + 1;
            for m in 0..=t {
                for p in 0..=t {
                    let expect = routing_element(&lam, m, t - m, p);
                    assert!((block[m * dim + p] - expect).norm() < 1e-13, "t={t} m={m} p={p}");
                }
            }
        }
    }

    #[test]
    fn high_photon_blocks_stay_unitary() {
        let lam = bs_matrix(&BeamSplitterSpec::new(0.9, 0.4).perturbed(0.1, 0.0));
        let mut block = vec![c(1.0, 0.0)];
        for t in 1..=400 {
            block = next_block(&block, t, &lam);
        }
        let dim = 401;
        let u = DMatrix::from_column_slice(dim, dim, &block);
        let defect = (u.adjoint() * &u - DMatrix::<C64>::identity(dim, dim)).camax();
        assert!(defect < 1e-11, "defect {defect}");
    }

    #[test]
    fn single_photon_through_symmetric_splitter() {
        let out = apply_beamsplitter(&fock2(1, 0, 3), 0, 1, &BeamSplitterSpec::symmetric()).unwrap();
        let h = FRAC_1_SQRT_2;
        assert!((out.amplitude([1, 0]).unwrap() - c(h, 0.0)).norm() < 1e-15);
        assert!((out.amplitude([0, 1]).unwrap() - c(0.0, -h)).norm() < 1e-15);
    }

    #[test]
    fn hong_ou_mandel_null() {
        for phi in [0.0, FRAC_PI_2, 1.234] {
            let out = apply_beamsplitter(&fock2(1, 1, 3), 0, 1, &BeamSplitterSpec::new(FRAC_PI_4, phi)).unwrap();
            assert!(out.amplitude([1, 1]).unwrap().norm() < 1e-12);
            let d = out.marginal(0);
            assert!((d[0] - 0.5).abs() < 1e-12 && (d[2] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_spec_is_noop() {
        let s = squeezed_vacuum(SqueezeParams::real(0.4).unwrap(), 10).unwrap();
        let two = s.tensor(&s);
        let out = apply_beamsplitter(&two, 0, 1, &BeamSplitterSpec::new(0.0, 0.7)).unwrap();
        assert!(two.max_abs_diff(&out).unwrap() < 1e-15);
    }

    #[test]
    fn overlapping_modes_rejected() {
        let v = FockState::vacuum(2, &[2, 2]).unwrap();
        assert!(apply_beamsplitter(&v, 1, 1, &BeamSplitterSpec::symmetric()).is_err());
        assert!(apply_beamsplitter(&v, 0, 2, &BeamSplitterSpec::symmetric()).is_err());
    }

    #[test]
    fn splitter_on_spectator_layout() {
        // Photon on mode 2 of three, splitter on (2, 0): spectator mode 1 untouched.
        let s = FockState::vacuum(3, &[2, 2, 2]).unwrap().apply_creation(2).unwrap().apply_creation(1).unwrap();
        let out = apply_beamsplitter(&s, 2, 0, &BeamSplitterSpec::symmetric()).unwrap();
        let h = FRAC_1_SQRT_2;
        assert!((out.amplitude([0, 1, 1]).unwrap() - c(h, 0.0)).norm() < 1e-15);
        assert!((out.amplitude([1, 1, 0]).unwrap() - c(0.0, -h)).norm() < 1e-15);
    }

    #[test]
    fn phases() {
        let one = FockState::vacuum(1, &[2]).unwrap().apply_creation(0).unwrap();
        assert_eq!(apply_phase(&one, 0, 0.0).unwrap(), one);
        let flipped = apply_phase(&one, 0, std::f64::consts::PI).unwrap();
        assert!((flipped.amplitude([1]).unwrap() - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((flipped.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn truncation_is_accounted() {
        // |2,2⟩ at cutoff 2 scatters into |4,0⟩ and |0,4⟩, which leak.
        let s = fock2(2, 2, 2);
        let out = apply_beamsplitter(&s, 0, 1, &BeamSplitterSpec::symmetric()).unwrap();
        assert!(out.leakage() > 0.1);
        assert!((out.norm_sqr() + out.leakage() - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn matrix_is_unitary(theta in -4.0f64..4.0, phi in -4.0f64..4.0, d1 in -0.5f64..0.5, d2 in -0.5f64..0.5) {
            let m = bs_matrix(&BeamSplitterSpec::new(theta, phi).perturbed(d1, d2));
            prop_assert!(unitarity_defect(&m) < 1e-14);
        }

        #[test]
        fn norm_and_leakage_conserved(theta in -3.2f64..3.2, phi in -3.2f64..3.2,
                                     amps in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16)) {
            let s = FockState::from_amplitudes(&[3, 3], amps.into_iter().map(|(a, b)| c(a, b)).collect(), 0.0)
                .unwrap();
            let out = apply_beamsplitter(&s, 0, 1, &BeamSplitterSpec::new(theta, phi)).unwrap();
            prop_assert!((out.norm_sqr() + out.leakage() - s.norm_sqr()).abs() < 1e-10 * (1.0 + s.norm_sqr()));
        }

        #[test]
        fn inverse_restores_state(theta in -1.5f64..1.5, phi in -3.2f64..3.2,
                                  amps in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 9)) {
            // Cutoffs large enough that nothing leaks: inputs live in n ≤ 2 per mode.
            let mut full = vec![c(0.0, 0.0); 25];
            for (k, (a, b)) in amps.into_iter().enumerate() {
                full[(k / 3) * 5 + k % 3] = c(a, b);
            }
            let s = FockState::from_amplitudes(&[4, 4], full, 0.0).unwrap();
            let spec = BeamSplitterSpec::new(theta, phi);
            let there = apply_beamsplitter(&s, 0, 1, &spec).unwrap();
            prop_assert!(there.leakage() < 1e-24);
            let back = apply_beamsplitter(&there, 0, 1, &spec.inverse()).unwrap();
            prop_assert!(back.max_abs_diff(&s).unwrap() < 1e-10);
        }
    }
}

//! Photon-number heralding and realistic single-click detectors.
//!
//! An inefficient detector is an ideal photon counter behind a beam splitter
//! of transmissivity `η`, so `n` incident photons yield `k` counts with
//! probability `C(n,k) ηᵏ (1−η)ⁿ⁻ᵏ`. Dark counts are an independent
//! Bernoulli(`p_d`) event in the same window: the detector reports a single
//! click with probability `p_d + (1 − p_d)·P(k = 1 | n)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{SimError, SimResult};
use crate::fock::FockState;
use crate::math::binomial_pmf;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    eta: f64,
    p_dark: f64,
}

impl DetectorModel {
    pub fn new(eta: f64, p_dark: f64) -> SimResult<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(SimError::invalid(format!("efficiency η must lie in [0, 1], got {eta}")));
        }
        if !(0.0..=1.0).contains(&p_dark) {
            return Err(SimError::invalid(format!("dark-count probability must lie in [0, 1], got {p_dark}")));
        }
        Ok(Self { eta, p_dark })
    }

    pub fn ideal() -> Self {
        Self { eta: 1.0, p_dark: 0.0 }
    }

    pub fn lossy(eta: f64) -> SimResult<Self> {
        Self::new(eta, 0.0)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn p_dark(&self) -> f64 {
        self.p_dark
    }

    /// Probability that `n` incident photons produce a single reported click.
    pub fn single_click_weight(&self, n: usize) -> f64 {
        self.p_dark + (1.0 - self.p_dark) * binomial_pmf(n, 1, self.eta)
    }
}

/// Result of conditioning on a projective detection pattern.
#[derive(Clone, Debug, PartialEq)]
pub struct HeraldOutcome {
    pub probability: f64,
    /// Normalized state on the undetected modes; `None` when the outcome has
    /// zero probability.
    pub state: Option<FockState>,
}

impl HeraldOutcome {
    pub fn is_degenerate(&self) -> bool {
        self.state.is_none()
    }

    /// Photon-number distribution of surviving mode `mode` (indexed among the
    /// undetected modes, in their original order).
    pub fn output_distribution(&self, mode: usize) -> Option<Vec<f64>> {
        self.state.as_ref().map(|s| s.marginal(mode))
    }
}

/// Projects `state` onto the given photon counts (`mode → count`) and returns
/// the renormalized state of the remaining modes with the outcome
/// probability.
pub fn herald(state: &FockState, detections: &BTreeMap<usize, usize>) -> SimResult<HeraldOutcome> {
    let k = state.num_modes();
    for (&mode, &count) in detections {
        if mode >= k {
            return Err(SimError::invalid(format!("detected mode {mode} out of range for a {k}-mode state")));
        }
        if count > state.cutoffs()[mode] {
            return Err(SimError::invalid(format!(
                "count {count} on mode {mode} exceeds its cutoff {}",
                state.cutoffs()[mode]
            )));
        }
    }
    let kept: Vec<usize> = (0..k).filter(|m| !detections.contains_key(m)).collect();
    if kept.is_empty() {
        return Err(SimError::invalid("heralding every mode leaves no output mode"));
    }
    let cutoffs: Vec<usize> = kept.iter().map(|&m| state.cutoffs()[m]).collect();
    let template = FockState::zeros(&cutoffs)?;
    let fixed: usize = detections.iter().map(|(&m, &n)| n * state.strides()[m]).sum();
    // Walk every kept-mode occupation; the detected part of the index is fixed.
    let amps = (0..template.len())
        .map(|out_lin| {
            let lin = fixed
                + kept
                    .iter()
                    .enumerate()
                    .map(|(j, &m)| template.occupation_of(out_lin, j) * state.strides()[m])
                    .sum::<usize>();
            state.amplitudes()[lin]
        })
        .collect();
    let projected = FockState::from_amplitudes(&cutoffs, amps, state.leakage())?;
    let probability = projected.norm_sqr();
    if probability <= f64::MIN_POSITIVE {
        return Ok(HeraldOutcome { probability: 0.0, state: None });
    }
    Ok(HeraldOutcome {
        probability,
        state: Some(projected.normalize()?),
    })
}

/// Probability that `n` photons behind an efficiency-`η` beam splitter give
/// `k` counts on the ideal detector.
pub fn click_given_n(n: usize, k: usize, model: &DetectorModel) -> SimResult<f64> {
    if k > n {
        return Err(SimError::invalid(format!("cannot register {k} clicks from {n} photons")));
    }
    Ok(binomial_pmf(n, k, model.eta))
}

/// Single-click statistics of `detector_mode` and the conditional photon
/// statistics of `output_mode`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClickStatistics {
    pub click_prob: f64,
    /// `P(n_out | one click)`, absent when no click is possible.
    pub output_distribution: Option<Vec<f64>>,
}

impl ClickStatistics {
    /// Probability the output mode holds exactly one photon given the click.
    pub fn single_photon(&self) -> Option<f64> {
        self.output_distribution.as_ref().and_then(|d| d.get(1).copied())
    }
}

/// First-principles mixture over the joint photon-number distribution of the
/// detector and output modes, weighting each detector occupation by the
/// model's single-click probability.
pub fn single_click_statistics(
    state: &FockState,
    detector_mode: usize,
    output_mode: usize,
    model: &DetectorModel,
) -> SimResult<ClickStatistics> {
    state.check_normalized()?;
    let joint = state.joint_marginal(detector_mode, output_mode)?;
    let mut cond = vec![0.0; state.cutoffs()[output_mode] + 1];
    for (n, row) in joint.iter().enumerate() {
        let w = model.single_click_weight(n);
        if w == 0.0 {
            continue;
        }
        for (slot, &p) in cond.iter_mut().zip(row) {
            *slot += w * p;
        }
    }
    let click_prob: f64 = cond.iter().sum();
    if click_prob <= f64::MIN_POSITIVE {
        return Ok(ClickStatistics { click_prob: 0.0, output_distribution: None });
    }
    cond.iter_mut().for_each(|p| *p /= click_prob);
    Ok(ClickStatistics { click_prob, output_distribution: Some(cond) })
}

/// Exactly-one-click statistics for a dark-count-free inefficient detector.
pub fn lossy_single_click(
    state: &FockState,
    detector_mode: usize,
    output_mode: usize,
    model: &DetectorModel,
) -> SimResult<ClickStatistics> {
    if model.p_dark != 0.0 {
        return Err(SimError::invalid(
            "lossy_single_click models loss only; use single_click_statistics with dark counts",
        ));
    }
    single_click_statistics(state, detector_mode, output_mode, model)
}

/// `p_d + (1 − p_d)⟨P̂₁⟩` evaluated as `Σ_n P(n)·[p_d + (1 − p_d) nη(1−η)ⁿ⁻¹]`.
pub fn dark_click_prob(state: &FockState, detector_mode: usize, model: &DetectorModel) -> SimResult<f64> {
    let dist = state.photon_number_distribution(detector_mode)?;
    Ok(dist.iter().enumerate().map(|(n, p)| p * model.single_click_weight(n)).sum())
}

/// `P(n_out = 1 | single click)` by Bayes over true and dark clicks. `None`
/// when the click probability vanishes.
pub fn dark_conditional_single_photon(
    state: &FockState,
    detector_mode: usize,
    output_mode: usize,
    model: &DetectorModel,
) -> SimResult<Option<f64>> {
    Ok(single_click_statistics(state, detector_mode, output_mode, model)?.single_photon())
}

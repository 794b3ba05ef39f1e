//! Two degenerate squeezed vacua mixed on a beam splitter, with one output
//! port watched by a detector.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::check_leakage;
use crate::closed_form::herald_prob_n;
use crate::detection::{herald, single_click_statistics, ClickStatistics, DetectorModel, HeraldOutcome};
use crate::error::{SimError, SimResult};
use crate::fock::FockState;
use crate::optics::{apply_beamsplitter, BeamSplitterSpec};
use crate::optimize::golden_section_max;
use crate::sources::{default_cutoff, squeezed_vacuum, SqueezeParams};

const DETECTOR_MODE: usize = 1;
const OUTPUT_MODE: usize = 0;

/// The two-mode state after the mixing splitter, before any detection.
#[derive(Clone, Debug)]
pub struct DsvSource {
    pub squeeze: SqueezeParams,
    pub splitter: BeamSplitterSpec,
    pub cutoff: usize,
    pub state: FockState,
}

impl DsvSource {
    /// `cutoff = None` picks the per-mode cutoff from the squeezed-vacuum tail.
    pub fn new(squeeze: SqueezeParams, splitter: BeamSplitterSpec, cutoff: Option<usize>) -> SimResult<Self> {
        let cutoff = match cutoff {
            Some(c) => c,
            None => default_cutoff(squeeze.r())?,
        };
        let single = squeezed_vacuum(squeeze, cutoff)?;
        let state = apply_beamsplitter(&single.tensor(&single), 0, 1, &splitter)?;
        check_leakage(state.leakage(), "squeezed vacua mixed on a beam splitter")?;
        Ok(Self { squeeze, splitter, cutoff, state })
    }

    pub fn leakage(&self) -> f64 {
        self.state.leakage()
    }

    /// Click statistics of the detector port and the conditional output.
    pub fn detect(&self, model: &DetectorModel) -> SimResult<ClickStatistics> {
        single_click_statistics(&self.state, DETECTOR_MODE, OUTPUT_MODE, model)
    }

    /// Projective heralding on exactly `count` photons at the detector port.
    pub fn herald_count(&self, count: usize) -> SimResult<HeraldOutcome> {
        herald(&self.state, &BTreeMap::from([(DETECTOR_MODE, count)]))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DsvRun {
    pub r: f64,
    pub varphi: f64,
    pub cutoff: usize,
    pub eta: f64,
    pub p_dark: f64,
    pub click_prob: f64,
    /// `P(n | click)` for the output mode; absent when no click is possible.
    pub output_distribution: Option<Vec<f64>>,
    pub purity: Option<f64>,
    pub leakage: f64,
}

/// Symmetric-splitter source of identical squeezed vacua read out by `model`.
pub fn run_dsv_source(r: f64, varphi: f64, cutoff: Option<usize>, model: &DetectorModel) -> SimResult<DsvRun> {
    let source = DsvSource::new(SqueezeParams::new(r, varphi)?, BeamSplitterSpec::symmetric(), cutoff)?;
    let stats = source.detect(model)?;
    Ok(DsvRun {
        r,
        varphi,
        cutoff: source.cutoff,
        eta: model.eta(),
        p_dark: model.p_dark(),
        click_prob: stats.click_prob,
        purity: stats.single_photon(),
        output_distribution: stats.output_distribution,
        leakage: source.leakage(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerturbedRun {
    pub r: f64,
    pub varphi: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub cutoff: usize,
    pub outcome: HeraldOutcome,
    /// `P(one click, 2n+1 output photons)` for `n = 0, 1, …` up to the cutoff.
    pub joint_odd: Vec<f64>,
    /// Conditional weight on even output photon numbers.
    pub even_weight: f64,
    pub leakage: f64,
}

impl PerturbedRun {
    pub fn click_prob(&self) -> f64 {
        self.outcome.probability
    }

    pub fn purity(&self) -> Option<f64> {
        self.outcome.output_distribution(0).map(|d| d[1])
    }
}

/// Same source with the mixing splitter detuned to `θ = π/4 + δ₁,
/// φ = π/2 + δ₂`, heralded by an ideal single-photon detection.
pub fn run_perturbed_bs(
    r: f64,
    varphi: f64,
    delta1: f64,
    delta2: f64,
    cutoff: Option<usize>,
) -> SimResult<PerturbedRun> {
    let spec = BeamSplitterSpec::symmetric().perturbed(delta1, delta2);
    let source = DsvSource::new(SqueezeParams::new(r, varphi)?, spec, cutoff)?;
    let outcome = source.herald_count(1)?;
    let (joint_odd, even_weight) = match outcome.output_distribution(0) {
        Some(dist) => (
            dist.iter().skip(1).step_by(2).map(|p| p * outcome.probability).collect(),
            dist.iter().step_by(2).sum(),
        ),
        None => (Vec::new(), 0.0),
    };
    Ok(PerturbedRun {
        r,
        varphi,
        delta1,
        delta2,
        cutoff: source.cutoff,
        joint_odd,
        even_weight,
        leakage: source.leakage(),
        outcome,
    })
}

/// Golden-section maximization of the one-photon herald probability
/// `tanh²r / cosh²r` over `[r_lo, r_hi]`. Returns `(r*, p*)`.
pub fn optimize_herald(r_lo: f64, r_hi: f64, tol: f64) -> SimResult<(f64, f64)> {
    if r_lo < 0.0 {
        return Err(SimError::invalid(format!("squeezing bracket must be non-negative, got [{r_lo}, {r_hi}]")));
    }
    let best = golden_section_max(|r| herald_prob_n(r, 1), r_lo, r_hi, tol)?;
    if best.x - r_lo <= tol || r_hi - best.x <= tol {
        return Err(SimError::invalid(format!(
            "maximum found at the bracket edge r = {}; [{r_lo}, {r_hi}] does not contain it",
            best.x
        )));
    }
    Ok((best.x, best.value))
}

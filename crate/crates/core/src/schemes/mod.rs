//! End-to-end experiments: sources, splitters and detectors composed into
//! the heralded single-photon schemes, plus sweeps and parameter searches.

mod dsv;
mod squeezed_coherent;
mod sweep;
mod three_copy;

pub use dsv::{optimize_herald, run_dsv_source, run_perturbed_bs, DsvRun, DsvSource, PerturbedRun};
pub use squeezed_coherent::{
    squeezed_coherent_single_mode, squeezed_coherent_study, squeezed_coherent_three_copy, ProductionPeak,
    three_copy_reach, production_argmax, SingleModeEmission, ThreeCopyEmission,
};
pub use sweep::{linspace, sweep, SweepKind, SweepMetadata, SweepParams, SweepResult, DEFAULT_SWEEP_POINTS};
pub use three_copy::{
    max_three_copy_herald, run_three_copy, three_copy_circuit, three_copy_herald_series, ThreeCopyConfig, ThreeCopySeries,
    ThreeCopyMaximum, THREE_COPY_ASSIGNMENT,
};

use crate::error::{SimError, SimResult};

/// Largest leakage a scheme result may carry.
pub const LEAKAGE_BOUND: f64 = 1e-8;

/// `asinh(1)`, the squeezing that maximizes the single-photon herald rate.
pub const R_MAX: f64 = 0.881_373_587_019_543;

fn check_leakage(leakage: f64, context: &str) -> SimResult<()> {
    if leakage > LEAKAGE_BOUND {
        return Err(SimError::LeakageExceeded {
            leakage,
            bound: LEAKAGE_BOUND,
            context: context.to_string(),
        });
    }
    Ok(())
}

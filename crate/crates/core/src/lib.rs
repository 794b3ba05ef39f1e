//! Truncated-Fock simulation of heralded single-photon sources built from
//! squeezed light, beam splitters and photon counters.

pub mod closed_form;
pub mod detection;
pub mod error;
pub mod fock;
pub mod math;
pub mod optics;
pub mod optimize;
pub mod reproduce;
pub mod schemes;
pub mod sources;

pub use detection::{herald, DetectorModel, HeraldOutcome};
pub use error::{SimError, SimResult};
pub use fock::{FockState, OccupationIndex};
pub use optics::{apply_beamsplitter, apply_phase, bs_matrix, BeamSplitterSpec};
pub use sources::{DisplaceParams, QubitAmplitudes, SqueezeParams};

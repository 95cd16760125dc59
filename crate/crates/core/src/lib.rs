//! Stochastic wave-optics simulation of correlated ("ghost") imaging with
//! split thermal light and parametric down-conversion, together with the
//! closed-form correlation functions used to validate it.
//!
//! Every numerical type is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`, which is what the runner uses.

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod detection;
pub mod error;
pub mod lattice;
pub mod optics;
pub mod oracles;
pub mod rng;
pub mod runner;
pub mod scalar;
pub mod sources;

pub use detection::{
    intensity, normalized_correlation, pixel_statistics, poisson_photocount, Arm1Detector,
    CorrelationAccumulator, DetectorSpec, GEstimate, PixelCounts, PixelRegion, PixelSummary,
    Photocounting,
};
pub use error::{Error, Result};
pub use lattice::{ComplexField, Domain, Fourier, Representation, TransverseGrid};
pub use optics::{diffraction_amplitude, propagate, ArmKind, ImagingArm, ObjectMask, Propagator};
pub use rng::{shot_stream, StreamRole};
pub use runner::{run, simulate, validate, ExperimentConfig, Manifest, RunOutput, Violation};
pub use scalar::Real;
pub use sources::{
    pdc_from_vacua, sample_pdc_pair, sample_pdc_pair_with, sample_thermal, sample_vacuum, split,
    BeamSplitter, PdcGain, ThermalSpectrum,
};

pub type Grid = TransverseGrid<f64>;
pub type Field = ComplexField<f64>;
pub type Thermal = ThermalSpectrum<f64>;
pub type Pdc = PdcGain<f64>;
pub type Splitter = BeamSplitter<f64>;
pub type Arm = ImagingArm<f64>;
pub type Mask = ObjectMask<f64>;
pub type Accumulator = CorrelationAccumulator<f64>;

pub type GridF32 = TransverseGrid<f32>;
pub type FieldF32 = ComplexField<f32>;

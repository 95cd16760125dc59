//! Config-driven Monte-Carlo experiments.
//!
//! Shots are grouped into fixed chunks of [`CHUNK_SHOTS`]. Each chunk owns an
//! accumulator and draws from counter-based streams keyed by shot index, and
//! the chunk accumulators are merged pairwise in chunk order. The result is
//! therefore bitwise identical for any thread count.

mod config;
mod output;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{
    read_mask_file, DetectorKind, Experiment, ExperimentConfig, ObjectKind, Plane, SourceKind,
    Violation,
};
pub use output::{write_g_csv, write_manifest, write_oracle_csv, write_outputs, write_stats_csv};

use crate::detection::{
    intensity, normalized_correlation, Arm1Detector, CorrelationAccumulator, DetectorSpec, GEstimate,
    NormalizedCorrelation, Photocounting, PixelRegion, PixelSummary,
};
use crate::error::{Error, Result};
use crate::lattice::{Fourier, Representation, TransverseGrid};
use crate::optics::{ImagingArm, ObjectMask, Propagator};
use crate::oracles::{
    analytic_g_pdc_2f, analytic_g_pdc_ff, analytic_g_thermal_2f, analytic_g_thermal_ff,
    brute_force_g_pdc, brute_force_g_thermal, GeometrySpec,
};
use crate::rng::{shot_stream, StreamRole};
use crate::sources::{
    sample_pdc_pair_with, sample_thermal, sample_vacuum, split, BeamSplitter, PdcGain,
    ThermalSpectrum,
};

/// Shots per work unit.
pub const CHUNK_SHOTS: u64 = 256;

#[derive(Clone, Copy, Debug)]
enum Source {
    Thermal(ThermalSpectrum<f64>),
    Pdc(PdcGain<f64>),
}

/// Everything a worker needs to simulate any shot.
struct ShotContext {
    grid: TransverseGrid<f64>,
    source: Source,
    splitter: BeamSplitter<f64>,
    fourier: Fourier<f64>,
    arm1: Propagator<f64>,
    arm2: Propagator<f64>,
    offset1: Vec<f64>,
    offset2: Vec<f64>,
    detector: DetectorSpec<f64>,
    region: PixelRegion,
    seed: u64,
}

impl ShotContext {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let grid = cfg.grid()?;
        let source = match cfg.source_kind() {
            SourceKind::Thermal => Source::Thermal(cfg.thermal()?),
            SourceKind::Pdc => Source::Pdc(cfg.pdc()?),
        };
        let (arm1, arm2) = cfg.arms(&grid)?;
        Ok(Self {
            offset1: arm1.vacuum_offset(&grid),
            offset2: arm2.vacuum_offset(&grid),
            arm1: Propagator::new(arm1, grid)?,
            arm2: Propagator::new(arm2, grid)?,
            fourier: Fourier::new(grid.n_points()),
            splitter: cfg.splitter()?,
            detector: cfg.detector(&grid)?,
            region: cfg.region(&grid)?,
            seed: cfg.master_seed,
            grid,
            source,
        })
    }

    fn run_shot(&self, shot: u64, acc: &mut CorrelationAccumulator<f64>) -> Result<()> {
        let (b1, b2) = match &self.source {
            Source::Thermal(spec) => {
                let mut rng = shot_stream(self.seed, shot, StreamRole::Thermal);
                let a = sample_thermal(&self.grid, spec, Representation::P, &mut rng);
                let mut rng = shot_stream(self.seed, shot, StreamRole::Vacuum);
                let v = sample_vacuum(&self.grid, Representation::P, &mut rng);
                split(&a, &v, &self.splitter)?
            }
            Source::Pdc(gain) => {
                let mut r1 = shot_stream(self.seed, shot, StreamRole::Pdc1);
                let mut r2 = shot_stream(self.seed, shot, StreamRole::Pdc2);
                sample_pdc_pair_with(&self.grid, gain, &mut r1, &mut r2)
            }
        };
        let c1 = self.arm1.propagate(&b1.to_position_with(&self.fourier)?)?;
        let c2 = self.arm2.propagate(&b2.to_position_with(&self.fourier)?)?;
        let i1 = intensity(&c1, &self.offset1)?;
        let i2 = intensity(&c2, &self.offset2)?;

        let mut rng = shot_stream(self.seed, shot, StreamRole::Detector);
        let d1: Vec<f64> = i1.iter().map(|&v| self.detector.read(v, &mut rng)).collect();
        let d2: Vec<f64> = i2.iter().map(|&v| self.detector.read(v, &mut rng)).collect();
        let reading = match self.detector.arm1 {
            Arm1Detector::Point(j) => d1[j],
            Arm1Detector::Bucket => d1.iter().sum(),
        };
        acc.record_shot(reading, &d2)?;
        let n1 = self.region.arm1().iter().map(|&j| d1[j]).sum();
        let n2 = self.region.arm2().iter().map(|&j| d2[j]).sum();
        acc.record_pixels(n1, n2);
        Ok(())
    }
}

/// Provenance of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub code_version: String,
    pub experiment: Experiment,
    pub master_seed: u64,
    pub shots: u64,
    pub threads: usize,
    pub deterministic: bool,
    /// Omitted (null) in deterministic mode so that reruns are byte-identical.
    pub wall_time_seconds: Option<f64>,
    pub config: ExperimentConfig,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub config: ExperimentConfig,
    /// Detection-plane coordinate of each arm-2 pixel.
    pub x2: Vec<f64>,
    pub g: GEstimate<f64>,
    pub g_oracle: Vec<f64>,
    /// Normally ordered pixel statistics; `None` when a Wigner beam passes
    /// an absorbing object before the region (same-arm moments undefined).
    pub pixels: Option<PixelSummary<f64>>,
    pub correlation: Option<NormalizedCorrelation<f64>>,
    pub accumulator: CorrelationAccumulator<f64>,
    pub manifest: Manifest,
}

impl RunOutput {
    pub fn n_minus_ratio(&self) -> Option<f64> {
        self.pixels.map(|p| p.n_minus_ratio())
    }
}

/// Analytic `G(x2)` for the configured experiment, scaled by `η²`.
///
/// Far-field and ghost-image experiments use the closed forms; `statistics`
/// runs use the brute-force double sum over the arm impulse responses.
pub fn evaluate_oracle(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    let grid = cfg.grid()?;
    let det = cfg.detector(&grid)?;
    let mask = cfg
        .object_mask(&grid)?
        .unwrap_or_else(|| ObjectMask::transparent(grid.n_points()));
    let geom = GeometrySpec::with_splitter(
        cfg.wavelength,
        cfg.focal_length.unwrap_or(1.0),
        &cfg.splitter()?,
    )?;
    let g = match cfg.experiment {
        Experiment::ThermalFf => analytic_g_thermal_ff(&cfg.thermal()?, &mask, &geom, &grid, det.arm1)?,
        Experiment::Thermal2f => analytic_g_thermal_2f(&cfg.thermal()?, &mask, &geom, &grid, det.arm1)?.exact,
        Experiment::PdcFf => analytic_g_pdc_ff(&cfg.pdc()?, &mask, &grid, det.arm1)?,
        Experiment::Pdc2f => analytic_g_pdc_2f(&cfg.pdc()?, &mask, &grid, det.arm1)?.exact,
        Experiment::Statistics => {
            let (a1, a2) = cfg.arms(&grid)?;
            match cfg.source_kind() {
                SourceKind::Thermal => brute_force_g_thermal(&cfg.thermal()?, &geom, &grid, &a1, &a2, det.arm1)?,
                SourceKind::Pdc => brute_force_g_pdc(&cfg.pdc()?, &grid, &a1, &a2, det.arm1)?,
            }
        }
    };
    let eta2 = cfg.efficiency * cfg.efficiency;
    Ok(g.into_iter().map(|v| v * eta2).collect())
}

/// Detection-plane coordinates of arm 2.
pub fn detection_positions(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    let grid = cfg.grid()?;
    let (_, arm2) = cfg.arms(&grid)?;
    Ok(arm2.detection_positions(&grid))
}

/// Runs the shots and returns the merged accumulator.
pub fn simulate(cfg: &ExperimentConfig) -> Result<CorrelationAccumulator<f64>> {
    let ctx = ShotContext::new(cfg)?;
    let n = ctx.grid.n_points();
    let shots = cfg.shots;
    let n_chunks = shots.div_ceil(CHUNK_SHOTS);
    let threads = if cfg.deterministic { 1 } else { cfg.threads };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Configuration(format!("thread pool: {e}")))?;
    let parts: Result<Vec<_>> = pool.install(|| {
        (0..n_chunks)
            .into_par_iter()
            .map(|c| {
                let mut acc = CorrelationAccumulator::new(n);
                for shot in c * CHUNK_SHOTS..((c + 1) * CHUNK_SHOTS).min(shots) {
                    ctx.run_shot(shot, &mut acc)?;
                }
                Ok(acc)
            })
            .collect()
    });
    CorrelationAccumulator::pairwise_merge(parts?)?
        .ok_or_else(|| Error::InsufficientData("no shots were run".into()))
}

/// Every violated invariant of `cfg`; empty iff [`run`] would start.
pub fn validate(cfg: &ExperimentConfig) -> Vec<Violation> {
    cfg.validate()
}

fn check_runnable(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.shots < 2 {
        return Err(Error::InsufficientData(format!(
            "G needs at least 2 shots, got {}",
            cfg.shots
        )));
    }
    let violations = cfg.validate();
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(Error::Configuration(list.join("; ")));
    }
    Ok(())
}

fn wigner_behind_object(cfg: &ExperimentConfig, arm1: &ImagingArm<f64>) -> bool {
    cfg.source_kind() == SourceKind::Pdc && arm1.object().is_some()
}

/// Executes a full experiment: shots, statistics and the matching oracle.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    check_runnable(cfg)?;
    let start = Instant::now();
    let accumulator = simulate(cfg)?;
    let g = accumulator.finalize_g()?;
    let g_oracle = evaluate_oracle(cfg)?;
    let grid = cfg.grid()?;
    let (arm1, arm2) = cfg.arms(&grid)?;
    let x2 = arm2.detection_positions(&grid);

    let pixels = if wigner_behind_object(cfg, &arm1) {
        None
    } else {
        let raw = accumulator.pixel_summary()?;
        let wigner = cfg.source_kind() == SourceKind::Pdc;
        Some(if wigner && cfg.photocounting == Photocounting::Off {
            let region = cfg.region(&grid)?;
            raw.without_vacuum_noise(region.arm1().len(), region.arm2().len(), cfg.efficiency)
        } else {
            raw
        })
    };
    let correlation = pixels.as_ref().and_then(|p| normalized_correlation(p).ok());
    let wall = start.elapsed().as_secs_f64();
    let manifest = Manifest {
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        experiment: cfg.experiment,
        master_seed: cfg.master_seed,
        shots: cfg.shots,
        threads: if cfg.deterministic { 1 } else { cfg.threads },
        deterministic: cfg.deterministic,
        wall_time_seconds: (!cfg.deterministic).then_some(wall),
        config: cfg.clone(),
    };
    Ok(RunOutput {
        config: cfg.clone(),
        x2,
        g,
        g_oracle,
        pixels,
        correlation,
        accumulator,
        manifest,
    })
}

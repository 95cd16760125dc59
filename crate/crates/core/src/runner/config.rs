//! Flat TOML experiment configuration.
//!
//! Every key sits at the top level; lengths are in metres, bandwidths in
//! rad/m. Example:
//!
//! ```toml
//! experiment = "thermal-ff"
//! n_points = 512
//! dx = 4e-6
//! wavelength = 7.02e-7
//! focal_length = 0.05
//! n_max = 1500.0
//! coherence_length = 1.66e-5
//! object = "double-slit"
//! slit_width = 6.4e-5
//! slit_separation = 1.92e-4
//! shots = 10000
//! master_seed = 1
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::detection::{Arm1Detector, DetectorSpec, Photocounting, PixelRegion};
use crate::error::{Error, Result};
use crate::lattice::TransverseGrid;
use crate::optics::{ImagingArm, ObjectMask};
use crate::sources::{BeamSplitter, PdcGain, ThermalSpectrum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Experiment {
    #[serde(rename = "thermal-ff")]
    ThermalFf,
    #[serde(rename = "thermal-2f")]
    Thermal2f,
    #[serde(rename = "pdc-ff")]
    PdcFf,
    #[serde(rename = "pdc-2f")]
    Pdc2f,
    #[serde(rename = "statistics")]
    Statistics,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Experiment::ThermalFf => "thermal-ff",
            Experiment::Thermal2f => "thermal-2f",
            Experiment::PdcFf => "pdc-ff",
            Experiment::Pdc2f => "pdc-2f",
            Experiment::Statistics => "statistics",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceKind {
    Thermal,
    Pdc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectKind {
    #[default]
    None,
    DoubleSlit,
    SingleSlit,
    File,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorKind {
    #[default]
    Point,
    Bucket,
}

/// Detection plane of a `statistics` run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Plane {
    #[default]
    Near,
    Far,
}

fn default_one() -> f64 {
    1.0
}

fn default_r_re() -> f64 {
    std::f64::consts::FRAC_1_SQRT_2
}

fn default_shots() -> u64 {
    10_000
}

fn default_region_len() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,

    pub n_points: usize,
    pub dx: f64,
    pub wavelength: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub focal_length: Option<f64>,

    /// Source for `statistics` runs; the other experiments imply it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coherence_length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain: Option<f64>,
    /// Alternative to `gain`: peak `sinh²(g)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak_photons: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain_coherence_length: Option<f64>,

    #[serde(default = "default_r_re")]
    pub r_re: f64,
    #[serde(default)]
    pub r_im: f64,
    #[serde(default)]
    pub t_re: f64,
    #[serde(default = "default_r_re")]
    pub t_im: f64,

    #[serde(default)]
    pub object: ObjectKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slit_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slit_separation: Option<f64>,
    /// One transmission per line: `re` or `re,im`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_file: Option<PathBuf>,

    #[serde(default)]
    pub detector: DetectorKind,
    /// Arm-1 point pixel; the optical axis when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point_index: Option<usize>,
    #[serde(default)]
    pub photocounting: Photocounting,
    #[serde(default = "default_one")]
    pub efficiency: f64,

    #[serde(default)]
    pub plane: Plane,
    /// First pixel of the photon-number region; the optical axis when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region_start: Option<usize>,
    #[serde(default = "default_region_len")]
    pub region_len: usize,

    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default)]
    pub master_seed: u64,
    /// Worker threads; 0 uses every available core.
    #[serde(default)]
    pub threads: usize,
    #[serde(default)]
    pub deterministic: bool,
}

/// A violated invariant with a stable machine-readable code.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub code: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Reads a config file; a relative `mask_file` is resolved against the
    /// config's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let (Some(mask), Some(dir)) = (&cfg.mask_file, path.parent()) {
            if mask.is_relative() {
                cfg.mask_file = Some(dir.join(mask));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn source_kind(&self) -> SourceKind {
        match self.experiment {
            Experiment::ThermalFf | Experiment::Thermal2f => SourceKind::Thermal,
            Experiment::PdcFf | Experiment::Pdc2f => SourceKind::Pdc,
            Experiment::Statistics => self.source.unwrap_or(SourceKind::Thermal),
        }
    }

    pub fn grid(&self) -> Result<TransverseGrid<f64>> {
        TransverseGrid::new(self.n_points, self.dx, self.wavelength)
    }

    pub fn splitter(&self) -> Result<BeamSplitter<f64>> {
        BeamSplitter::new(
            Complex::new(self.r_re, self.r_im),
            Complex::new(self.t_re, self.t_im),
        )
    }

    pub fn thermal(&self) -> Result<ThermalSpectrum<f64>> {
        match (self.n_max, self.coherence_length) {
            (Some(n), Some(l)) if l > 0.0 => ThermalSpectrum::from_coherence_length(n, l),
            (Some(_), Some(l)) => Err(Error::Configuration(format!(
                "coherence_length must be positive, got {l}"
            ))),
            _ => Err(Error::Configuration(
                "thermal source needs n_max and coherence_length".into(),
            )),
        }
    }

    pub fn pdc(&self) -> Result<PdcGain<f64>> {
        let l = match self.gain_coherence_length {
            Some(l) if l > 0.0 => l,
            Some(l) => {
                return Err(Error::Configuration(format!(
                    "gain_coherence_length must be positive, got {l}"
                )))
            }
            None => {
                return Err(Error::Configuration(
                    "PDC source needs gain_coherence_length".into(),
                ))
            }
        };
        let dq = std::f64::consts::TAU / l;
        match (self.gain, self.peak_photons) {
            (Some(g), None) => PdcGain::new(g, dq),
            (None, Some(n)) if n >= 0.0 => PdcGain::from_peak_photons(n, dq),
            (None, Some(n)) => Err(Error::Configuration(format!(
                "peak_photons must be >= 0, got {n}"
            ))),
            (Some(_), Some(_)) => Err(Error::Configuration(
                "give either gain or peak_photons, not both".into(),
            )),
            (None, None) => Err(Error::Configuration(
                "PDC source needs gain or peak_photons".into(),
            )),
        }
    }

    fn focal(&self) -> Result<f64> {
        match self.focal_length {
            Some(f) if f.is_finite() && f > 0.0 => Ok(f),
            Some(f) => Err(Error::Configuration(format!(
                "focal_length must be positive, got {f}"
            ))),
            None => Err(Error::Configuration("focal_length is required".into())),
        }
    }

    pub fn object_mask(&self, grid: &TransverseGrid<f64>) -> Result<Option<ObjectMask<f64>>> {
        match self.object {
            ObjectKind::None => Ok(None),
            ObjectKind::DoubleSlit => match (self.slit_width, self.slit_separation) {
                (Some(w), Some(d)) => ObjectMask::double_slit(grid, w, d).map(Some),
                _ => Err(Error::Configuration(
                    "double slit needs slit_width and slit_separation".into(),
                )),
            },
            ObjectKind::SingleSlit => match self.slit_width {
                Some(w) => ObjectMask::single_slit(grid, w).map(Some),
                None => Err(Error::Configuration("single slit needs slit_width".into())),
            },
            ObjectKind::File => {
                let path = self
                    .mask_file
                    .as_ref()
                    .ok_or_else(|| Error::Configuration("object = \"file\" needs mask_file".into()))?;
                let mask = read_mask_file(path)?;
                if mask.len() != grid.n_points() {
                    return Err(Error::LengthMismatch {
                        expected: grid.n_points(),
                        found: mask.len(),
                    });
                }
                Ok(Some(mask))
            }
        }
    }

    /// Arm 1 (object side) and arm 2 (reference side).
    pub fn arms(&self, grid: &TransverseGrid<f64>) -> Result<(ImagingArm<f64>, ImagingArm<f64>)> {
        let mask = self.object_mask(grid)?;
        match self.experiment {
            Experiment::ThermalFf | Experiment::PdcFf => {
                let f = self.focal()?;
                Ok((ImagingArm::fourier(f, mask)?, ImagingArm::fourier(f, None)?))
            }
            Experiment::Thermal2f | Experiment::Pdc2f => {
                let f = self.focal()?;
                Ok((ImagingArm::fourier(f, mask)?, ImagingArm::imaging_2f(f)?))
            }
            Experiment::Statistics => {
                if mask.is_some() {
                    return Err(Error::Configuration(
                        "statistics runs take no object".into(),
                    ));
                }
                match self.plane {
                    Plane::Near => Ok((ImagingArm::identity(), ImagingArm::identity())),
                    Plane::Far => {
                        let f = self.focal()?;
                        Ok((ImagingArm::fourier(f, None)?, ImagingArm::fourier(f, None)?))
                    }
                }
            }
        }
    }

    pub fn detector(&self, grid: &TransverseGrid<f64>) -> Result<DetectorSpec<f64>> {
        let arm1 = match self.detector {
            DetectorKind::Point => Arm1Detector::Point(self.point_index.unwrap_or(grid.center())),
            DetectorKind::Bucket => Arm1Detector::Bucket,
        };
        let spec = DetectorSpec::new(arm1, self.efficiency, self.photocounting)?;
        spec.check_grid(grid)?;
        Ok(spec)
    }

    /// Photon-number region. Down-converted pairs in the far field land on
    /// mirrored pixels; every other configuration uses identical pixels.
    pub fn region(&self, grid: &TransverseGrid<f64>) -> Result<PixelRegion> {
        let start = self.region_start.unwrap_or(grid.center());
        let pixels: Vec<usize> = (start..start + self.region_len).collect();
        let region = if self.source_kind() == SourceKind::Pdc && self.far_field_reference() {
            PixelRegion::mirrored(grid, pixels)?
        } else {
            PixelRegion::same(pixels)?
        };
        region.check(grid.n_points())?;
        Ok(region)
    }

    fn far_field_reference(&self) -> bool {
        match self.experiment {
            Experiment::ThermalFf | Experiment::PdcFf => true,
            Experiment::Thermal2f | Experiment::Pdc2f => false,
            Experiment::Statistics => self.plane == Plane::Far,
        }
    }

    /// Every violated invariant; empty iff a run would start.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |code: &'static str, message: String| out.push(Violation { code, message });

        if self.shots < 2 {
            push("INSUFFICIENT_SHOTS", format!("shots = {} (need at least 2)", self.shots));
        }
        if self.n_points < 2 || !self.n_points.is_power_of_two() {
            push("GRID_NOT_POWER_OF_TWO", format!("n_points = {}", self.n_points));
        }
        if !(self.dx.is_finite() && self.dx > 0.0) {
            push("GRID_SPACING_NOT_POSITIVE", format!("dx = {}", self.dx));
        }
        if !(self.wavelength.is_finite() && self.wavelength > 0.0) {
            push("WAVELENGTH_NOT_POSITIVE", format!("wavelength = {}", self.wavelength));
        }
        let needs_focal = !(self.experiment == Experiment::Statistics && self.plane == Plane::Near);
        if needs_focal {
            if let Err(e) = self.focal() {
                push("FOCAL_LENGTH_INVALID", e.to_string());
            }
        }

        let r = Complex::new(self.r_re, self.r_im);
        let t = Complex::new(self.t_re, self.t_im);
        let total = r.norm_sqr() + t.norm_sqr();
        if !total.is_finite() || (total - 1.0).abs() > 1e-9 {
            push("SPLITTER_NOT_UNITARY", format!("|r|^2 + |t|^2 = {total}"));
        } else if (r * t.conj()).re.abs() > 1e-9 {
            push("SPLITTER_PHASE", format!("Re(r t*) = {}", (r * t.conj()).re));
        }

        match self.source_kind() {
            SourceKind::Thermal => {
                if let Err(e) = self.thermal() {
                    push("SOURCE_INVALID", e.to_string());
                }
                if self.gain.is_some() || self.peak_photons.is_some() {
                    push("SOURCE_MISMATCH", "gain parameters given for a thermal source".into());
                }
            }
            SourceKind::Pdc => {
                if let Err(e) = self.pdc() {
                    push("GAIN_INVALID", e.to_string());
                }
                if self.n_max.is_some() {
                    push("SOURCE_MISMATCH", "n_max given for a PDC source".into());
                }
            }
        }
        if self.source.is_some() && self.experiment != Experiment::Statistics {
            push("SOURCE_MISMATCH", "source is implied by the experiment".into());
        }

        let grid = self.grid().ok();
        let extent = self.n_points as f64 * self.dx;
        match self.object {
            ObjectKind::DoubleSlit => match (self.slit_width, self.slit_separation) {
                (Some(w), Some(d)) => {
                    if !(w > 0.0 && w < d) {
                        push("OBJECT_OVERLAP", format!("slit width {w} must lie in (0, separation {d})"));
                    } else if !(d + w < extent) {
                        push("OBJECT_EXCEEDS_GRID", format!("d + w = {} >= grid extent {extent}", d + w));
                    } else if let Some(g) = &grid {
                        if let Err(e) = ObjectMask::double_slit(g, w, d) {
                            push("OBJECT_EXCEEDS_GRID", e.to_string());
                        }
                    }
                }
                _ => push("OBJECT_MISSING", "double slit needs slit_width and slit_separation".into()),
            },
            ObjectKind::SingleSlit => match self.slit_width {
                Some(w) if w > 0.0 && w < extent => {}
                Some(w) => push("OBJECT_EXCEEDS_GRID", format!("slit width {w} vs grid extent {extent}")),
                None => push("OBJECT_MISSING", "single slit needs slit_width".into()),
            },
            ObjectKind::File => match (&self.mask_file, &grid) {
                (None, _) => push("OBJECT_MISSING", "object = \"file\" needs mask_file".into()),
                (Some(p), Some(g)) => match read_mask_file(p) {
                    Ok(m) if m.len() != g.n_points() => push(
                        "MASK_LENGTH_MISMATCH",
                        format!("mask has {} values, grid has {}", m.len(), g.n_points()),
                    ),
                    Ok(_) => {}
                    Err(e) => push("MASK_FILE_INVALID", e.to_string()),
                },
                _ => {}
            },
            ObjectKind::None => {}
        }
        if self.experiment == Experiment::Statistics && self.object != ObjectKind::None {
            push("OBJECT_NOT_ALLOWED", "statistics runs take no object".into());
        }

        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            push("EFFICIENCY_OUT_OF_RANGE", format!("efficiency = {}", self.efficiency));
        }
        if let Some(g) = &grid {
            if self.detector == DetectorKind::Point {
                let j = self.point_index.unwrap_or(g.center());
                if j >= g.n_points() {
                    push("DETECTOR_OUT_OF_RANGE", format!("point_index = {j}"));
                }
            }
            if self.region_len == 0 {
                push("REGION_EMPTY", "region_len = 0".into());
            } else if let Err(e) = self.region(g) {
                push("REGION_OUT_OF_RANGE", e.to_string());
            }
        }
        out
    }
}

/// Parses a mask file: one `re` or `re,im` value per non-empty line; `#`
/// starts a comment.
pub fn read_mask_file(path: &Path) -> Result<ObjectMask<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',').map(str::trim);
        let parse = |s: Option<&str>| -> Result<f64> {
            s.unwrap_or("0")
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("{}:{}: {e}", path.display(), i + 1)))
        };
        let re = parse(parts.next())?;
        let im = parse(parts.next())?;
        values.push(Complex::new(re, im));
    }
    ObjectMask::new(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const FIG4: &str = r#"
experiment = "thermal-ff"
n_points = 512
dx = 4e-6
wavelength = 7.02e-7
focal_length = 0.05
n_max = 1500.0
coherence_length = 1.66e-5
object = "double-slit"
slit_width = 6.4e-5
slit_separation = 1.92e-4
shots = 10000
master_seed = 1
"#;

    fn codes(cfg: &ExperimentConfig) -> Vec<&'static str> {
        cfg.validate().into_iter().map(|v| v.code).collect()
    }

    #[test]
    fn valid_config_has_no_violations() {
        let cfg = ExperimentConfig::from_toml_str(FIG4).unwrap();
        assert!(cfg.validate().is_empty(), "{:?}", cfg.validate());
        assert_eq!(cfg.source_kind(), SourceKind::Thermal);
        assert!(cfg.splitter().is_ok());
    }

    #[test]
    fn lossy_splitter_is_flagged() {
        let mut cfg = ExperimentConfig::from_toml_str(FIG4).unwrap();
        cfg.r_re = 1.1f64.sqrt() * std::f64::consts::FRAC_1_SQRT_2;
        cfg.t_im = cfg.r_re;
        assert_eq!(codes(&cfg), vec!["SPLITTER_NOT_UNITARY"]);
    }

    #[test]
    fn oversized_object_is_flagged() {
        let mut cfg = ExperimentConfig::from_toml_str(FIG4).unwrap();
        cfg.slit_separation = Some(3e-3);
        assert_eq!(codes(&cfg), vec!["OBJECT_EXCEEDS_GRID"]);
        cfg.slit_separation = Some(1e-5);
        assert_eq!(codes(&cfg), vec!["OBJECT_OVERLAP"]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{FIG4}\nbogus = 1\n");
        assert!(matches!(ExperimentConfig::from_toml_str(&text), Err(Error::Parse(_))));
    }

    #[test]
    fn toml_round_trip() {
        let cfg = ExperimentConfig::from_toml_str(FIG4).unwrap();
        let back = ExperimentConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn several_violations_are_all_reported() {
        let mut cfg = ExperimentConfig::from_toml_str(FIG4).unwrap();
        cfg.n_points = 500;
        cfg.shots = 1;
        cfg.efficiency = 0.0;
        cfg.gain = Some(1.0);
        let c = codes(&cfg);
        for code in ["INSUFFICIENT_SHOTS", "GRID_NOT_POWER_OF_TWO", "EFFICIENCY_OUT_OF_RANGE", "SOURCE_MISMATCH"] {
            assert!(c.contains(&code), "{code} missing from {c:?}");
        }
    }

    #[test]
    fn pdc_and_statistics_configs() {
        let pdc = r#"
experiment = "pdc-ff"
n_points = 64
dx = 1e-5
wavelength = 7e-7
focal_length = 0.05
peak_photons = 750.0
gain_coherence_length = 4e-5
"#;
        let cfg = ExperimentConfig::from_toml_str(pdc).unwrap();
        assert!(cfg.validate().is_empty(), "{:?}", cfg.validate());
        let g = cfg.grid().unwrap();
        assert_eq!(cfg.region(&g).unwrap().arm2(), &[32]);
        let stats = r#"
experiment = "statistics"
source = "pdc"
plane = "far"
n_points = 64
dx = 1e-5
wavelength = 7e-7
focal_length = 0.05
gain = 2.0
gain_coherence_length = 4e-5
region_start = 30
region_len = 2
"#;
        let cfg = ExperimentConfig::from_toml_str(stats).unwrap();
        assert!(cfg.validate().is_empty(), "{:?}", cfg.validate());
        assert_eq!(cfg.region(&cfg.grid().unwrap()).unwrap().arm2(), &[34, 33]);
        let mut bad = cfg.clone();
        bad.object = ObjectKind::DoubleSlit;
        bad.slit_width = Some(2e-5);
        bad.slit_separation = Some(1e-4);
        assert!(codes(&bad).contains(&"OBJECT_NOT_ALLOWED"));
    }

    #[test]
    fn mask_file_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("mask.txt");
        std::fs::write(&p, "# header\n0\n1\n0.5, 0.5\n\n0 # closed\n").unwrap();
        let m = read_mask_file(&p).unwrap();
        assert_eq!(m.len(), 4);
        assert_eq!(m.transmission()[2], Complex::new(0.5, 0.5));
        std::fs::write(&p, "2.0\n").unwrap();
        assert!(read_mask_file(&p).is_err());
        std::fs::write(&p, "abc\n").unwrap();
        assert!(matches!(read_mask_file(&p), Err(Error::Parse(_))));
    }
}

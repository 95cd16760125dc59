//! Per-shot intensities, photocounting, and mergeable correlation sums.
//!
//! Wigner samples carry half a photon of vacuum per mode. Cross-arm
//! covariances of commuting arms need no correction, but mean intensities
//! need the per-pixel offset removed and same-arm variances need `1/4` per
//! mode removed; see [`PixelSummary::without_vacuum_noise`].

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{ComplexField, Domain, Representation, TransverseGrid};
use crate::scalar::Real;

/// Arm-1 detector: a single point pixel or a bucket over the whole plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Arm1Detector {
    Point(usize),
    Bucket,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Photocounting {
    #[default]
    Off,
    Poisson,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectorSpec<T> {
    pub arm1: Arm1Detector,
    pub efficiency: T,
    pub photocounting: Photocounting,
}

impl<T: Real> DetectorSpec<T> {
    pub fn new(arm1: Arm1Detector, efficiency: T, photocounting: Photocounting) -> Result<Self> {
        if !(efficiency > T::zero() && efficiency <= T::one()) {
            return Err(Error::Parameter(format!(
                "efficiency must lie in (0, 1], got {efficiency}"
            )));
        }
        Ok(Self {
            arm1,
            efficiency,
            photocounting,
        })
    }

    pub fn point(index: usize) -> Self {
        Self {
            arm1: Arm1Detector::Point(index),
            efficiency: T::one(),
            photocounting: Photocounting::Off,
        }
    }

    pub fn check_grid(&self, grid: &TransverseGrid<T>) -> Result<()> {
        match self.arm1 {
            Arm1Detector::Point(j) if j >= grid.n_points() => Err(Error::Parameter(format!(
                "point detector index {j} outside lattice of {} points",
                grid.n_points()
            ))),
            _ => Ok(()),
        }
    }

    /// Detector reading from an expected photon number: `η N`, or a Poisson
    /// count with that mean when photocounting is on.
    pub fn read<R: Rng + ?Sized>(&self, n_expected: T, rng: &mut R) -> T {
        match self.photocounting {
            Photocounting::Off => self.efficiency * n_expected,
            Photocounting::Poisson => {
                T::lit(poisson_photocount(n_expected, self.efficiency, rng) as f64)
            }
        }
    }

    /// Arm-1 reading from a full intensity profile.
    pub fn read_arm1<R: Rng + ?Sized>(&self, intensity: &[T], rng: &mut R) -> T {
        let n = match self.arm1 {
            Arm1Detector::Point(j) => intensity[j],
            Arm1Detector::Bucket => intensity.iter().fold(T::zero(), |a, &b| a + b),
        };
        self.read(n, rng)
    }
}

/// Photons per pixel at the detection plane.
///
/// P fields give `|c|²`; Wigner fields give `|c|² - offset`, which may be
/// negative on a single shot.
pub fn intensity<T: Real>(field: &ComplexField<T>, vacuum_offset: &[T]) -> Result<Vec<T>> {
    field.expect_domain(Domain::Position)?;
    let values = field.values();
    match field.representation() {
        Representation::P => Ok(values.iter().map(|v| v.norm_sqr()).collect()),
        Representation::Wigner => {
            if vacuum_offset.len() != values.len() {
                return Err(Error::LengthMismatch {
                    expected: values.len(),
                    found: vacuum_offset.len(),
                });
            }
            Ok(values
                .iter()
                .zip(vacuum_offset)
                .map(|(v, &o)| v.norm_sqr() - o)
                .collect())
        }
    }
}

/// Poisson count with mean `η N`; negative `N` is clamped to zero.
pub fn poisson_photocount<T: Real, R: Rng + ?Sized>(n_expected: T, efficiency: T, rng: &mut R) -> u64 {
    let mean = (efficiency * n_expected).as_f64();
    if !(mean > 0.0) {
        return 0;
    }
    match Poisson::new(mean) {
        Ok(d) => d.sample(rng) as u64,
        Err(_) => 0,
    }
}

/// Pixels integrated in each arm for photon-number statistics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PixelRegion {
    arm1: Vec<usize>,
    arm2: Vec<usize>,
}

impl PixelRegion {
    /// Identical pixel sets in both arms.
    pub fn same(pixels: Vec<usize>) -> Result<Self> {
        if pixels.is_empty() {
            return Err(Error::Parameter("pixel region is empty".into()));
        }
        Ok(Self {
            arm2: pixels.clone(),
            arm1: pixels,
        })
    }

    /// Arm 2 uses the lattice mirror image of the arm-1 pixels. The
    /// self-mirrored edge index 0 has no symmetric partner and is rejected.
    pub fn mirrored<T: Real>(grid: &TransverseGrid<T>, pixels: Vec<usize>) -> Result<Self> {
        if pixels.is_empty() {
            return Err(Error::Parameter("pixel region is empty".into()));
        }
        if pixels.contains(&0) {
            return Err(Error::Parameter(
                "edge index 0 has no symmetric partner".into(),
            ));
        }
        Ok(Self {
            arm2: pixels.iter().map(|&j| grid.reflect(j)).collect(),
            arm1: pixels,
        })
    }

    pub fn arm1(&self) -> &[usize] {
        &self.arm1
    }

    pub fn arm2(&self) -> &[usize] {
        &self.arm2
    }

    pub fn check(&self, n_points: usize) -> Result<()> {
        match self.arm1.iter().chain(&self.arm2).find(|&&j| j >= n_points) {
            Some(j) => Err(Error::Parameter(format!(
                "pixel {j} outside lattice of {n_points} points"
            ))),
            None => Ok(()),
        }
    }
}

/// Photon numbers in a region for one shot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PixelCounts<T> {
    pub n1: T,
    pub n2: T,
    pub n_minus: T,
}

/// `N_i = Σ_region I_i`, with ordering offsets applied to Wigner fields.
pub fn pixel_statistics<T: Real>(
    b1: &ComplexField<T>,
    b2: &ComplexField<T>,
    region: &PixelRegion,
    offset1: &[T],
    offset2: &[T],
) -> Result<PixelCounts<T>> {
    b1.ensure_compatible(b2)?;
    region.check(b1.grid().n_points())?;
    let i1 = intensity(b1, offset1)?;
    let i2 = intensity(b2, offset2)?;
    let n1 = region.arm1.iter().fold(T::zero(), |a, &j| a + i1[j]);
    let n2 = region.arm2.iter().fold(T::zero(), |a, &j| a + i2[j]);
    Ok(PixelCounts {
        n1,
        n2,
        n_minus: n1 - n2,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
struct PixelSums<T> {
    shots: u64,
    n1: T,
    n2: T,
    n1_sq: T,
    n2_sq: T,
    n1_n2: T,
    n_minus_sq: T,
}

/// Running sums for `⟨I1⟩`, `⟨I2(x2)⟩`, `⟨I1 I2(x2)⟩` and the pixel channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationAccumulator<T> {
    n_shots: u64,
    sum_i1: T,
    sum_i2: Vec<T>,
    sum_i1_i2: Vec<T>,
    pixels: PixelSums<T>,
}

/// Finalised correlation estimate over `x2`.
#[derive(Clone, Debug, PartialEq)]
pub struct GEstimate<T> {
    pub n_shots: u64,
    pub g: Vec<T>,
    pub mean_i1: T,
    pub mean_i2: Vec<T>,
    pub visibility: Vec<T>,
}

/// Moments of the pixel channel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PixelSummary<T> {
    pub n_shots: u64,
    pub mean_n1: T,
    pub mean_n2: T,
    pub var_n1: T,
    pub var_n2: T,
    pub cov: T,
    pub var_n_minus: T,
}

impl<T: Real> PixelSummary<T> {
    /// `⟨δN_-²⟩ / (⟨N1⟩ + ⟨N2⟩)`; 1 at the shot-noise level.
    pub fn n_minus_ratio(&self) -> T {
        self.var_n_minus / (self.mean_n1 + self.mean_n2)
    }

    /// Removes the symmetric-ordering vacuum noise from same-arm variances
    /// of Wigner samples: `η²/4` per pixel in each arm. The cross-arm
    /// covariance is unchanged.
    pub fn without_vacuum_noise(mut self, pixels1: usize, pixels2: usize, efficiency: T) -> Self {
        let quarter = T::lit(0.25) * efficiency * efficiency;
        let (o1, o2) = (quarter * T::from_count(pixels1), quarter * T::from_count(pixels2));
        self.var_n1 = self.var_n1 - o1;
        self.var_n2 = self.var_n2 - o2;
        self.var_n_minus = self.var_n_minus - o1 - o2;
        self
    }
}

/// Normalised correlation and its single-arm cross-check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizedCorrelation<T> {
    /// `cov(N1, N2) / √(var N1 var N2)`.
    pub c: T,
    /// `1 - ⟨N1⟩ / var N1`.
    pub from_variance: T,
}

impl<T: Real> CorrelationAccumulator<T> {
    pub fn new(n_pixels: usize) -> Self {
        Self {
            n_shots: 0,
            sum_i1: T::zero(),
            sum_i2: vec![T::zero(); n_pixels],
            sum_i1_i2: vec![T::zero(); n_pixels],
            pixels: PixelSums::default(),
        }
    }

    pub fn n_shots(&self) -> u64 {
        self.n_shots
    }

    pub fn pixel_shots(&self) -> u64 {
        self.pixels.shots
    }

    pub fn n_pixels(&self) -> usize {
        self.sum_i2.len()
    }

    pub fn sum_i1(&self) -> T {
        self.sum_i1
    }

    pub fn sum_i2(&self) -> &[T] {
        &self.sum_i2
    }

    pub fn sum_i1_i2(&self) -> &[T] {
        &self.sum_i1_i2
    }

    pub fn record_shot(&mut self, i1: T, i2: &[T]) -> Result<()> {
        if i2.len() != self.sum_i2.len() {
            return Err(Error::LengthMismatch {
                expected: self.sum_i2.len(),
                found: i2.len(),
            });
        }
        self.n_shots += 1;
        self.sum_i1 = self.sum_i1 + i1;
        for ((s2, s12), &v) in self.sum_i2.iter_mut().zip(&mut self.sum_i1_i2).zip(i2) {
            *s2 = *s2 + v;
            *s12 = *s12 + i1 * v;
        }
        Ok(())
    }

    pub fn record_pixels(&mut self, n1: T, n2: T) {
        let p = &mut self.pixels;
        let d = n1 - n2;
        p.shots += 1;
        p.n1 = p.n1 + n1;
        p.n2 = p.n2 + n2;
        p.n1_sq = p.n1_sq + n1 * n1;
        p.n2_sq = p.n2_sq + n2 * n2;
        p.n1_n2 = p.n1_n2 + n1 * n2;
        p.n_minus_sq = p.n_minus_sq + d * d;
    }

    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if other.sum_i2.len() != self.sum_i2.len() {
            return Err(Error::LengthMismatch {
                expected: self.sum_i2.len(),
                found: other.sum_i2.len(),
            });
        }
        self.n_shots += other.n_shots;
        self.sum_i1 = self.sum_i1 + other.sum_i1;
        for (a, &b) in self.sum_i2.iter_mut().zip(&other.sum_i2) {
            *a = *a + b;
        }
        for (a, &b) in self.sum_i1_i2.iter_mut().zip(&other.sum_i1_i2) {
            *a = *a + b;
        }
        let (p, q) = (&mut self.pixels, &other.pixels);
        p.shots += q.shots;
        p.n1 = p.n1 + q.n1;
        p.n2 = p.n2 + q.n2;
        p.n1_sq = p.n1_sq + q.n1_sq;
        p.n2_sq = p.n2_sq + q.n2_sq;
        p.n1_n2 = p.n1_n2 + q.n1_n2;
        p.n_minus_sq = p.n_minus_sq + q.n_minus_sq;
        Ok(())
    }

    /// Merges a sequence by pairwise (tree) reduction in the given order.
    pub fn pairwise_merge(mut parts: Vec<Self>) -> Result<Option<Self>> {
        while parts.len() > 1 {
            let mut next = Vec::with_capacity(parts.len().div_ceil(2));
            let mut it = parts.into_iter();
            while let Some(mut a) = it.next() {
                if let Some(b) = it.next() {
                    a.merge(&b)?;
                }
                next.push(a);
            }
            parts = next;
        }
        Ok(parts.pop())
    }

    pub fn finalize_g(&self) -> Result<GEstimate<T>> {
        if self.n_shots < 2 {
            return Err(Error::InsufficientData(format!(
                "correlation needs at least 2 shots, have {}",
                self.n_shots
            )));
        }
        let n = T::lit(self.n_shots as f64);
        let mean_i1 = self.sum_i1 / n;
        let mean_i2: Vec<T> = self.sum_i2.iter().map(|&s| s / n).collect();
        let mut g = Vec::with_capacity(mean_i2.len());
        let mut visibility = Vec::with_capacity(mean_i2.len());
        for (&s12, &m2) in self.sum_i1_i2.iter().zip(&mean_i2) {
            let m12 = s12 / n;
            let gi = m12 - mean_i1 * m2;
            g.push(gi);
            visibility.push(if m12 > T::zero() { gi / m12 } else { T::zero() });
        }
        Ok(GEstimate {
            n_shots: self.n_shots,
            g,
            mean_i1,
            mean_i2,
            visibility,
        })
    }

    pub fn pixel_summary(&self) -> Result<PixelSummary<T>> {
        let p = &self.pixels;
        if p.shots < 2 {
            return Err(Error::InsufficientData(format!(
                "pixel statistics need at least 2 shots, have {}",
                p.shots
            )));
        }
        let n = T::lit(p.shots as f64);
        let (m1, m2) = (p.n1 / n, p.n2 / n);
        let dm = m1 - m2;
        Ok(PixelSummary {
            n_shots: p.shots,
            mean_n1: m1,
            mean_n2: m2,
            var_n1: p.n1_sq / n - m1 * m1,
            var_n2: p.n2_sq / n - m2 * m2,
            cov: p.n1_n2 / n - m1 * m2,
            var_n_minus: p.n_minus_sq / n - dm * dm,
        })
    }
}

pub fn normalized_correlation<T: Real>(summary: &PixelSummary<T>) -> Result<NormalizedCorrelation<T>> {
    if !(summary.var_n1 > T::zero() && summary.var_n2 > T::zero()) {
        return Err(Error::UndefinedCorrelation(format!(
            "variances must be positive (var N1 = {}, var N2 = {})",
            summary.var_n1, summary.var_n2
        )));
    }
    Ok(NormalizedCorrelation {
        c: summary.cov / (summary.var_n1 * summary.var_n2).sqrt(),
        from_variance: T::one() - summary.mean_n1 / summary.var_n1,
    })
}

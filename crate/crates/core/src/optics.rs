//! Impulse-response propagation of each arm to its detection plane.
//!
//! Three arms are modelled:
//!
//! * `FourierArm`: object (optional) followed by a lens one focal length
//!   away; the detector sits in the back focal plane. The continuum kernel
//!   `-(i/λf) exp(-2πi x x'/λf) T(x')` maps onto the lattice with detection
//!   coordinates `x_det,k = q_k λf / (2π)`. With fields counted as amplitude
//!   per lattice cell the discretised kernel is exactly `-i` times the
//!   unitary DFT; the constant [`ImagingArm::density_kappa`] converts to
//!   continuum field densities when needed.
//! * `Imaging2f`: a lens `2f` from source and detector: an inverted image,
//!   `c(x) = b(-x) exp(-iπ x² / (λf))`.
//! * `Identity`: detection directly at the source plane.
//!
//! Loss terms are not instantiated: they never enter normally ordered
//! moments, and cross-arm covariances of Wigner samples need no loss vacuum.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{ComplexField, Domain, Fourier, TransverseGrid};
use crate::scalar::Real;

/// Complex amplitude transmission `T(x)` on the position lattice, `|T| <= 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectMask<T> {
    transmission: Vec<Complex<T>>,
}

impl<T: Real> ObjectMask<T> {
    pub fn new(transmission: Vec<Complex<T>>) -> Result<Self> {
        let limit = T::one() + T::epsilon() * T::lit(8.0);
        if let Some((j, v)) = transmission
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.norm() <= limit))
        {
            return Err(Error::Parameter(format!(
                "|T| must not exceed 1, found {} at index {j}",
                v.norm()
            )));
        }
        Ok(Self { transmission })
    }

    pub fn from_real(values: &[T]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex::new(v, T::zero())).collect())
    }

    pub fn transparent(n: usize) -> Self {
        Self {
            transmission: vec![Complex::new(T::one(), T::zero()); n],
        }
    }

    pub fn opaque(n: usize) -> Self {
        Self {
            transmission: vec![Complex::new(T::zero(), T::zero()); n],
        }
    }

    /// Slit of `round(w/dx)` open cells centred on the optical axis.
    pub fn single_slit(grid: &TransverseGrid<T>, width: T) -> Result<Self> {
        let n_open = open_cells(grid, width)?;
        let n = grid.n_points();
        if n_open >= n {
            return Err(Error::Parameter("slit wider than the grid".into()));
        }
        let start = grid.center() - n_open / 2;
        let mut t = Self::opaque(n);
        for j in start..start + n_open {
            t.transmission[j] = Complex::new(T::one(), T::zero());
        }
        Ok(t)
    }

    /// Two slits of width `w` whose centres sit at `±d/2`.
    ///
    /// Each slit opens the `round(w/dx)` consecutive cells whose centre is
    /// closest to `d/2`; the left slit is the exact lattice mirror of the
    /// right one, so the mask is symmetric about the optical axis.
    pub fn double_slit(grid: &TransverseGrid<T>, width: T, separation: T) -> Result<Self> {
        if !(width > T::zero() && width < separation) {
            return Err(Error::Parameter(format!(
                "slits overlap: width {width} must be positive and below separation {separation}"
            )));
        }
        if !(separation + width < grid.extent()) {
            return Err(Error::Parameter(format!(
                "double slit (d + w = {}) exceeds grid extent {}",
                separation + width,
                grid.extent()
            )));
        }
        let n_open = open_cells(grid, width)?;
        let centre = separation * T::lit(0.5) / grid.dx();
        let first = (centre - T::from_count(n_open - 1) * T::lit(0.5))
            .round()
            .to_isize()
            .unwrap_or(0);
        let last = first + n_open as isize - 1;
        let half = grid.center() as isize;
        if first < 1 || last >= half {
            return Err(Error::Parameter(
                "double slit does not fit on the lattice".into(),
            ));
        }
        let mut t = Self::opaque(grid.n_points());
        for off in first..=last {
            t.transmission[(half + off) as usize] = Complex::new(T::one(), T::zero());
            t.transmission[(half - off) as usize] = Complex::new(T::one(), T::zero());
        }
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.transmission.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transmission.is_empty()
    }

    pub fn transmission(&self) -> &[Complex<T>] {
        &self.transmission
    }

    /// `Σ |T(x_j)|²`.
    pub fn power(&self) -> T {
        self.transmission
            .iter()
            .fold(T::zero(), |acc, v| acc + v.norm_sqr())
    }
}

fn open_cells<T: Real>(grid: &TransverseGrid<T>, width: T) -> Result<usize> {
    let n = (width / grid.dx()).round().to_usize().unwrap_or(0);
    if n == 0 {
        return Err(Error::Parameter(format!(
            "slit width {width} is below half a lattice cell"
        )));
    }
    Ok(n)
}

/// Diffraction amplitude `T̃(q_k) = (dx / 2π) Σ_j T(x_j) exp(-i q_k x_j)` on
/// the momentum lattice.
pub fn diffraction_amplitude<T: Real>(
    mask: &ObjectMask<T>,
    grid: &TransverseGrid<T>,
) -> Result<Vec<Complex<T>>> {
    if mask.len() != grid.n_points() {
        return Err(Error::LengthMismatch {
            expected: grid.n_points(),
            found: mask.len(),
        });
    }
    let mut buf = mask.transmission.clone();
    Fourier::new(grid.n_points()).forward_in_place(&mut buf);
    let scale = grid.dx() * T::from_count(grid.n_points()).sqrt() / T::TAU();
    Ok(buf.into_iter().map(|v| v.scale(scale)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArmKind {
    FourierArm,
    Imaging2f,
    Identity,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ImagingArm<T> {
    kind: ArmKind,
    focal_length: T,
    object: Option<ObjectMask<T>>,
}

impl<T: Real> ImagingArm<T> {
    pub fn new(kind: ArmKind, focal_length: T, object: Option<ObjectMask<T>>) -> Result<Self> {
        if kind != ArmKind::Identity && !(focal_length.is_finite() && focal_length > T::zero()) {
            return Err(Error::Configuration(format!(
                "focal length must be positive, got {focal_length}"
            )));
        }
        if kind != ArmKind::FourierArm && object.is_some() {
            return Err(Error::Configuration(format!(
                "{kind:?} arm cannot carry an object"
            )));
        }
        Ok(Self {
            kind,
            focal_length,
            object,
        })
    }

    pub fn fourier(focal_length: T, object: Option<ObjectMask<T>>) -> Result<Self> {
        Self::new(ArmKind::FourierArm, focal_length, object)
    }

    pub fn imaging_2f(focal_length: T) -> Result<Self> {
        Self::new(ArmKind::Imaging2f, focal_length, None)
    }

    pub fn identity() -> Self {
        Self {
            kind: ArmKind::Identity,
            focal_length: T::zero(),
            object: None,
        }
    }

    pub fn kind(&self) -> ArmKind {
        self.kind
    }

    pub fn focal_length(&self) -> T {
        self.focal_length
    }

    pub fn object(&self) -> Option<&ObjectMask<T>> {
        self.object.as_ref()
    }

    /// Coordinates of the detection-plane pixels.
    pub fn detection_positions(&self, grid: &TransverseGrid<T>) -> Vec<T> {
        match self.kind {
            ArmKind::FourierArm => {
                let s = grid.wavelength() * self.focal_length / T::TAU();
                grid.momenta().into_iter().map(|q| q * s).collect()
            }
            ArmKind::Imaging2f | ArmKind::Identity => grid.positions(),
        }
    }

    /// Detection-plane pixel pitch: `λf / (N dx)` behind a Fourier lens.
    pub fn detection_pitch(&self, grid: &TransverseGrid<T>) -> T {
        match self.kind {
            ArmKind::FourierArm => grid.wavelength() * self.focal_length / grid.extent(),
            ArmKind::Imaging2f | ArmKind::Identity => grid.dx(),
        }
    }

    /// `κ = dx √N / √(λf)`: for a Fourier arm, the continuum field density at
    /// the detector is `-i κ` times the unitary DFT of the source density.
    /// Converting densities to amplitudes per cell multiplies by
    /// `√(pitch_det / dx)`, which cancels `κ` exactly; the simulator works in
    /// per-cell units and so applies the bare unitary DFT.
    pub fn density_kappa(&self, grid: &TransverseGrid<T>) -> T {
        match self.kind {
            ArmKind::FourierArm => {
                grid.dx() * T::from_count(grid.n_points()).sqrt()
                    / (grid.wavelength() * self.focal_length).sqrt()
            }
            ArmKind::Imaging2f | ArmKind::Identity => T::one(),
        }
    }

    /// Symmetric-ordering offset per detection pixel: half a photon per
    /// source mode, weighted by `Σ_j |h(k, j)|²`.
    pub fn vacuum_offset(&self, grid: &TransverseGrid<T>) -> Vec<T> {
        let half = T::lit(0.5);
        let per_pixel = match &self.object {
            Some(mask) => half * mask.power() / T::from_count(grid.n_points()),
            None => half,
        };
        vec![per_pixel; grid.n_points()]
    }

    /// Dense impulse response `h[k * N + j]` in per-cell units.
    pub fn impulse_response(&self, grid: &TransverseGrid<T>) -> Result<Vec<Complex<T>>> {
        let n = grid.n_points();
        let zero = Complex::new(T::zero(), T::zero());
        let mut h = vec![zero; n * n];
        match self.kind {
            ArmKind::FourierArm => {
                let norm = T::one() / T::from_count(n).sqrt();
                let mask = self.checked_object(grid)?;
                for k in 0..n {
                    let q = grid.momentum(k);
                    for j in 0..n {
                        let phase = Complex::from_polar(norm, -q * grid.position(j));
                        let t = mask.map_or(Complex::new(T::one(), T::zero()), |m| m[j]);
                        h[k * n + j] = Complex::new(T::zero(), -T::one()) * phase * t;
                    }
                }
            }
            ArmKind::Imaging2f => {
                for k in 0..n {
                    h[k * n + grid.reflect(k)] = self.quadratic_phase(grid, k);
                }
            }
            ArmKind::Identity => {
                for k in 0..n {
                    h[k * n + k] = Complex::new(T::one(), T::zero());
                }
            }
        }
        Ok(h)
    }

    fn checked_object(&self, grid: &TransverseGrid<T>) -> Result<Option<&[Complex<T>]>> {
        match &self.object {
            Some(m) if m.len() != grid.n_points() => Err(Error::LengthMismatch {
                expected: grid.n_points(),
                found: m.len(),
            }),
            Some(m) => Ok(Some(m.transmission())),
            None => Ok(None),
        }
    }

    #[inline]
    fn quadratic_phase(&self, grid: &TransverseGrid<T>, k: usize) -> Complex<T> {
        let x = grid.position(k);
        Complex::from_polar(
            T::one(),
            -T::PI() * x * x / (grid.wavelength() * self.focal_length),
        )
    }
}

/// Propagator holding the FFT plans for repeated use on one grid.
#[derive(Clone, Debug)]
pub struct Propagator<T: Real> {
    arm: ImagingArm<T>,
    grid: TransverseGrid<T>,
    fourier: Fourier<T>,
    phase: Vec<Complex<T>>,
}

impl<T: Real> Propagator<T> {
    pub fn new(arm: ImagingArm<T>, grid: TransverseGrid<T>) -> Result<Self> {
        arm.checked_object(&grid)?;
        let phase = match arm.kind {
            ArmKind::Imaging2f => (0..grid.n_points())
                .map(|k| arm.quadratic_phase(&grid, k))
                .collect(),
            _ => Vec::new(),
        };
        Ok(Self {
            fourier: Fourier::new(grid.n_points()),
            arm,
            grid,
            phase,
        })
    }

    pub fn arm(&self) -> &ImagingArm<T> {
        &self.arm
    }

    pub fn propagate(&self, field: &ComplexField<T>) -> Result<ComplexField<T>> {
        field.expect_domain(Domain::Position)?;
        if *field.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        let mut out = field.clone();
        match self.arm.kind {
            ArmKind::Identity => {}
            ArmKind::Imaging2f => {
                let src = field.values();
                for (k, v) in out.values_mut().iter_mut().enumerate() {
                    *v = src[self.grid.reflect(k)] * self.phase[k];
                }
            }
            ArmKind::FourierArm => {
                let values = out.values_mut();
                if let Some(mask) = &self.arm.object {
                    for (v, t) in values.iter_mut().zip(mask.transmission()) {
                        *v = *v * t;
                    }
                }
                self.fourier.forward_in_place(values);
                for v in values.iter_mut() {
                    *v = Complex::new(v.im, -v.re);
                }
            }
        }
        Ok(out)
    }
}

/// Propagates a position-domain field through `arm`.
pub fn propagate<T: Real>(field: &ComplexField<T>, arm: &ImagingArm<T>) -> Result<ComplexField<T>> {
    Propagator::new(arm.clone(), *field.grid())?.propagate(field)
}

//! Sampled 1-D transverse plane and the unitary transforms between its
//! position and momentum lattices.
//!
//! Lattice conventions (`N` even, power of two):
//!
//! * position `x_j = (j - N/2) dx`,
//! * momentum `q_k = 2π (k - N/2) / (N dx)`,
//! * index `N/2` is the optical axis in both domains, so `x ↦ -x` is the
//!   exact lattice reflection `j ↦ (N - j) mod N` (index 0 is its own image).
//!
//! Field values are amplitudes per lattice cell, normalised so that `|value|²`
//! counts photons in that cell. The transform is the centred, unitary DFT
//!
//! ```text
//! b(q_k) = N^{-1/2} Σ_j b(x_j) exp(-i q_k x_j)
//! ```
//!
//! which keeps both the total photon number and the per-mode variance of
//! white noise unchanged.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Which lattice a [`ComplexField`] is sampled on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    Position,
    Momentum,
}

/// Phase-space representation a stochastic field sample belongs to.
///
/// Moments of `P` samples reproduce normally ordered operator moments; moments
/// of `Wigner` samples reproduce symmetrically ordered ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Representation {
    P,
    Wigner,
}

impl Representation {
    /// Mean `|α|²` of the vacuum in this representation.
    pub fn vacuum_occupation<T: Real>(self) -> T {
        match self {
            Representation::P => T::zero(),
            Representation::Wigner => T::lit(0.5),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransverseGrid<T> {
    n_points: usize,
    dx: T,
    wavelength: T,
}

impl<T: Real> TransverseGrid<T> {
    pub fn new(n_points: usize, dx: T, wavelength: T) -> Result<Self> {
        if n_points < 2 || !n_points.is_power_of_two() {
            return Err(Error::Parameter(format!(
                "n_points must be a power of two >= 2, got {n_points}"
            )));
        }
        if !(dx.is_finite() && dx > T::zero()) {
            return Err(Error::Parameter(format!("dx must be positive, got {dx}")));
        }
        if !(wavelength.is_finite() && wavelength > T::zero()) {
            return Err(Error::Parameter(format!(
                "wavelength must be positive, got {wavelength}"
            )));
        }
        Ok(Self {
            n_points,
            dx,
            wavelength,
        })
    }

    #[inline]
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    #[inline]
    pub fn dx(&self) -> T {
        self.dx
    }

    #[inline]
    pub fn wavelength(&self) -> T {
        self.wavelength
    }

    /// Index of the optical axis, `N/2`.
    #[inline]
    pub fn center(&self) -> usize {
        self.n_points / 2
    }

    /// Full width of the sampled window, `N dx`.
    pub fn extent(&self) -> T {
        T::from_count(self.n_points) * self.dx
    }

    #[inline]
    pub fn position(&self, j: usize) -> T {
        (T::from_count(j) - T::from_count(self.center())) * self.dx
    }

    pub fn positions(&self) -> Vec<T> {
        (0..self.n_points).map(|j| self.position(j)).collect()
    }

    /// Momentum lattice spacing `2π / (N dx)`.
    #[inline]
    pub fn dq(&self) -> T {
        T::TAU() / self.extent()
    }

    #[inline]
    pub fn momentum(&self, k: usize) -> T {
        (T::from_count(k) - T::from_count(self.center())) * self.dq()
    }

    pub fn momenta(&self) -> Vec<T> {
        (0..self.n_points).map(|k| self.momentum(k)).collect()
    }

    /// Lattice image of `-x` (or `-q`): `j ↦ (N - j) mod N`.
    #[inline]
    pub fn reflect(&self, j: usize) -> usize {
        (self.n_points - j) % self.n_points
    }

    /// Lattice index of the momentum difference `q_a - q_b`, wrapped onto the
    /// periodic momentum lattice.
    #[inline]
    pub fn momentum_difference_index(&self, a: usize, b: usize) -> usize {
        let n = self.n_points;
        (a + n + self.center() - b) % n
    }

    /// Lattice index of the momentum sum `q_a + q_b`.
    #[inline]
    pub fn momentum_sum_index(&self, a: usize, b: usize) -> usize {
        let n = self.n_points;
        (a + b + n - self.center()) % n
    }
}

/// Cached forward/inverse plans for the centred unitary DFT on `N` points.
#[derive(Clone)]
pub struct Fourier<T: Real> {
    n: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    norm: T,
}

impl<T: Real> std::fmt::Debug for Fourier<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fourier").field("n", &self.n).finish()
    }
}

impl<T: Real> Fourier<T> {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            norm: T::one() / T::from_count(n).sqrt(),
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Position → momentum, in place.
    pub fn forward_in_place(&self, buf: &mut [Complex<T>]) {
        self.apply(&*self.forward, buf);
    }

    /// Momentum → position, in place.
    pub fn inverse_in_place(&self, buf: &mut [Complex<T>]) {
        self.apply(&*self.inverse, buf);
    }

    fn apply(&self, plan: &dyn Fft<T>, buf: &mut [Complex<T>]) {
        assert_eq!(buf.len(), self.n, "buffer length does not match plan");
        // For even N the centring shift is a rotation by N/2 in both directions.
        let half = self.n / 2;
        buf.rotate_left(half);
        plan.process(buf);
        buf.rotate_left(half);
        for v in buf.iter_mut() {
            *v = v.scale(self.norm);
        }
    }
}

/// Complex amplitudes on a [`TransverseGrid`], tagged with their lattice
/// domain and phase-space representation.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField<T> {
    grid: TransverseGrid<T>,
    values: Vec<Complex<T>>,
    domain: Domain,
    representation: Representation,
}

impl<T: Real> ComplexField<T> {
    pub fn new(
        grid: TransverseGrid<T>,
        values: Vec<Complex<T>>,
        domain: Domain,
        representation: Representation,
    ) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::LengthMismatch {
                expected: grid.n_points(),
                found: values.len(),
            });
        }
        Ok(Self {
            grid,
            values,
            domain,
            representation,
        })
    }

    pub fn zeros(grid: TransverseGrid<T>, domain: Domain, representation: Representation) -> Self {
        Self {
            values: vec![Complex::new(T::zero(), T::zero()); grid.n_points()],
            grid,
            domain,
            representation,
        }
    }

    #[inline]
    pub fn grid(&self) -> &TransverseGrid<T> {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    #[inline]
    pub fn domain(&self) -> Domain {
        self.domain
    }

    #[inline]
    pub fn representation(&self) -> Representation {
        self.representation
    }

    /// Total `Σ |value|²`.
    pub fn power(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, v| acc + v.norm_sqr())
    }

    pub fn expect_domain(&self, expected: Domain) -> Result<()> {
        if self.domain != expected {
            return Err(Error::DomainMismatch {
                expected,
                found: self.domain,
            });
        }
        Ok(())
    }

    /// Checks that `other` lives on the same grid, domain and representation.
    pub fn ensure_compatible(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        other.expect_domain(self.domain)?;
        if self.representation != other.representation {
            return Err(Error::RepresentationMismatch(
                self.representation,
                other.representation,
            ));
        }
        Ok(())
    }

    pub fn to_momentum(&self) -> Result<Self> {
        self.to_momentum_with(&Fourier::new(self.grid.n_points()))
    }

    pub fn to_position(&self) -> Result<Self> {
        self.to_position_with(&Fourier::new(self.grid.n_points()))
    }

    pub fn to_momentum_with(&self, fourier: &Fourier<T>) -> Result<Self> {
        self.expect_domain(Domain::Position)?;
        let mut out = self.clone();
        fourier.forward_in_place(&mut out.values);
        out.domain = Domain::Momentum;
        Ok(out)
    }

    pub fn to_position_with(&self, fourier: &Fourier<T>) -> Result<Self> {
        self.expect_domain(Domain::Momentum)?;
        let mut out = self.clone();
        fourier.inverse_in_place(&mut out.values);
        out.domain = Domain::Position;
        Ok(out)
    }
}

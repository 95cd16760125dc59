//! Closed-form correlation functions on the lattice, brute-force quadrature
//! counterparts, and a small Fock-space check of the Wigner offsets.
//!
//! All formulas are written in the simulator's per-cell units. With the
//! lattice object spectrum
//!
//! ```text
//! T̂(p) = (1/N) Σ_j T(x_j) exp(-i p x_j) = dq · T̃(p)
//! ```
//!
//! (`T̃` as returned by [`diffraction_amplitude`](crate::optics::diffraction_amplitude)) the far-field results are
//!
//! ```text
//! thermal: G(k1, k2) = |rt|² n(q_k2)²     |T̂(q_k1 - q_k2)|²
//! PDC:     G(k1, k2) =       (U V)(q_k2)² |T̂(q_k1 + q_k2)|²
//! ```
//!
//! and the thermal ghost image is
//!
//! ```text
//! G(k1, k2) = |rt|²/N |Σ_m n(q_m) T̂*(q_k1 - q_m) exp(i q_m x'_k2)|²,  x'_k2 = -x_k2
//! ```
//!
//! which reduces to `|rt|² n(q_k1)² |T(-x_k2)|² / N` when `n(q)` is flat over
//! the width of `T̂`. A bucket detector in arm 1 sums `G` over `k1`.
//!
//! Momentum arguments are taken modulo the lattice period, matching the
//! periodic DFT used by the propagators.

use num_complex::Complex;

use crate::detection::Arm1Detector;
use crate::error::{Error, Result};
use crate::lattice::{Fourier, TransverseGrid};
use crate::optics::{ImagingArm, ObjectMask};
use crate::scalar::Real;
use crate::sources::{BeamSplitter, PdcGain, ThermalSpectrum};

/// Optical constants shared by the analytic correlation functions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeometrySpec<T> {
    pub wavelength: T,
    pub focal_length: T,
    pub rt_sq: T,
}

impl<T: Real> GeometrySpec<T> {
    pub fn new(wavelength: T, focal_length: T, rt_sq: T) -> Result<Self> {
        let positive = |v: T| v.is_finite() && v > T::zero();
        if !(positive(wavelength) && positive(focal_length) && positive(rt_sq)) {
            return Err(Error::Parameter(
                "wavelength, focal length and |rt|^2 must be positive".into(),
            ));
        }
        if rt_sq > T::lit(0.25) * (T::one() + T::epsilon() * T::lit(16.0)) {
            return Err(Error::Parameter(format!("|rt|^2 = {rt_sq} exceeds 1/4")));
        }
        Ok(Self {
            wavelength,
            focal_length,
            rt_sq,
        })
    }

    pub fn with_splitter(wavelength: T, focal_length: T, bs: &BeamSplitter<T>) -> Result<Self> {
        Self::new(wavelength, focal_length, bs.rt_sq())
    }
}

/// Dense `N × N` complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationMatrix<T> {
    n: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CorrelationMatrix<T> {
    fn from_lag(n: usize, lag: impl Fn(isize) -> Complex<T>) -> Self {
        let table: Vec<Complex<T>> = (0..2 * n - 1).map(|d| lag(d as isize - n as isize + 1)).collect();
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(table[i + n - 1 - j]);
            }
        }
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }
}

/// `Γ(x_i, x_j) = ⟨a*(x_i) a(x_j)⟩ = (1/N) Σ_k n(q_k) exp(-i q_k (x_i - x_j))`.
pub fn thermal_second_order<T: Real>(
    spec: &ThermalSpectrum<T>,
    grid: &TransverseGrid<T>,
) -> CorrelationMatrix<T> {
    let weights = spec.occupations(grid);
    lag_transform(grid, &weights, -T::one())
}

/// `⟨b1(x_i) b2(x_j)⟩ = (1/N) Σ_k U(q_k) V(q_k) exp(i q_k (x_i - x_j))`.
pub fn pdc_cross_correlation<T: Real>(
    gain: &PdcGain<T>,
    grid: &TransverseGrid<T>,
) -> CorrelationMatrix<T> {
    let weights: Vec<T> = grid.momenta().into_iter().map(|q| gain.u(q) * gain.v(q)).collect();
    lag_transform(grid, &weights, T::one())
}

fn lag_transform<T: Real>(grid: &TransverseGrid<T>, weights: &[T], sign: T) -> CorrelationMatrix<T> {
    let n = grid.n_points();
    let inv_n = T::one() / T::from_count(n);
    let momenta = grid.momenta();
    CorrelationMatrix::from_lag(n, |d| {
        let dx = T::lit(d as f64) * grid.dx();
        let sum = weights
            .iter()
            .zip(&momenta)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (&w, &q)| {
                acc + Complex::from_polar(w, sign * q * dx)
            });
        sum.scale(inv_n)
    })
}

/// `T̂(q_k)`, the object spectrum in lattice units.
fn lattice_spectrum<T: Real>(mask: &ObjectMask<T>, grid: &TransverseGrid<T>) -> Result<Vec<Complex<T>>> {
    let n = grid.n_points();
    if mask.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: mask.len(),
        });
    }
    let mut buf = mask.transmission().to_vec();
    Fourier::new(n).forward_in_place(&mut buf);
    let s = T::one() / T::from_count(n).sqrt();
    Ok(buf.into_iter().map(|v| v.scale(s)).collect())
}

fn arm1_rows<T: Real>(grid: &TransverseGrid<T>, detector: Arm1Detector) -> Result<Vec<usize>> {
    match detector {
        Arm1Detector::Point(k) if k < grid.n_points() => Ok(vec![k]),
        Arm1Detector::Point(k) => Err(Error::Parameter(format!(
            "point detector index {k} outside lattice"
        ))),
        Arm1Detector::Bucket => Ok((0..grid.n_points()).collect()),
    }
}

/// Thermal ghost diffraction: Fourier arms on both sides, object in arm 1.
pub fn analytic_g_thermal_ff<T: Real>(
    spec: &ThermalSpectrum<T>,
    mask: &ObjectMask<T>,
    geom: &GeometrySpec<T>,
    grid: &TransverseGrid<T>,
    detector: Arm1Detector,
) -> Result<Vec<T>> {
    let occ = spec.occupations(grid);
    let t_hat = lattice_spectrum(mask, grid)?;
    let rows = arm1_rows(grid, detector)?;
    let n = grid.n_points();
    Ok((0..n)
        .map(|k2| {
            let w = occ[k2] * occ[k2] * geom.rt_sq;
            rows.iter().fold(T::zero(), |acc, &k1| {
                acc + w * t_hat[grid.momentum_difference_index(k1, k2)].norm_sqr()
            })
        })
        .collect())
}

/// PDC ghost diffraction; the object spectrum enters at `q_k1 + q_k2`.
pub fn analytic_g_pdc_ff<T: Real>(
    gain: &PdcGain<T>,
    mask: &ObjectMask<T>,
    grid: &TransverseGrid<T>,
    detector: Arm1Detector,
) -> Result<Vec<T>> {
    let t_hat = lattice_spectrum(mask, grid)?;
    let rows = arm1_rows(grid, detector)?;
    Ok((0..grid.n_points())
        .map(|k2| {
            let q = grid.momentum(k2);
            let uv = gain.u(q) * gain.v(q);
            rows.iter().fold(T::zero(), |acc, &k1| {
                acc + uv * uv * t_hat[grid.momentum_sum_index(k1, k2)].norm_sqr()
            })
        })
        .collect())
}

/// Ghost image from the exact lattice sum and its short-coherence limit.
#[derive(Clone, Debug, PartialEq)]
pub struct GhostImage<T> {
    pub exact: Vec<T>,
    pub approx: Vec<T>,
}

/// Thermal ghost image: Fourier arm with object, 2f imaging reference arm.
pub fn analytic_g_thermal_2f<T: Real>(
    spec: &ThermalSpectrum<T>,
    mask: &ObjectMask<T>,
    geom: &GeometrySpec<T>,
    grid: &TransverseGrid<T>,
    detector: Arm1Detector,
) -> Result<GhostImage<T>> {
    let occ = spec.occupations(grid);
    imaging_2f(&occ, mask, geom.rt_sq, grid, detector, true)
}

/// PDC ghost image; `U V` replaces `n` and `T̂` enters unconjugated at
/// `q_k1 - q_m` with phase `exp(-i q_m x'_k2)`.
pub fn analytic_g_pdc_2f<T: Real>(
    gain: &PdcGain<T>,
    mask: &ObjectMask<T>,
    grid: &TransverseGrid<T>,
    detector: Arm1Detector,
) -> Result<GhostImage<T>> {
    let uv: Vec<T> = grid.momenta().into_iter().map(|q| gain.u(q) * gain.v(q)).collect();
    imaging_2f(&uv, mask, T::one(), grid, detector, false)
}

fn imaging_2f<T: Real>(
    profile: &[T],
    mask: &ObjectMask<T>,
    prefactor: T,
    grid: &TransverseGrid<T>,
    detector: Arm1Detector,
    thermal: bool,
) -> Result<GhostImage<T>> {
    let n = grid.n_points();
    let t_hat = lattice_spectrum(mask, grid)?;
    let rows = arm1_rows(grid, detector)?;
    let inv_n = T::one() / T::from_count(n);
    let momenta = grid.momenta();
    let mut exact = vec![T::zero(); n];
    let mut approx = vec![T::zero(); n];
    for &k1 in &rows {
        for k2 in 0..n {
            let x = grid.position(grid.reflect(k2));
            let mut sum = Complex::new(T::zero(), T::zero());
            for m in 0..n {
                let th = t_hat[grid.momentum_difference_index(k1, m)];
                let (th, phase) = if thermal {
                    (th.conj(), momenta[m] * x)
                } else {
                    (th, -momenta[m] * x)
                };
                sum = sum + th * Complex::from_polar(profile[m], phase);
            }
            exact[k2] = exact[k2] + prefactor * inv_n * sum.norm_sqr();
            let t = mask.transmission()[grid.reflect(k2)].norm_sqr();
            approx[k2] = approx[k2] + prefactor * inv_n * profile[k1] * profile[k1] * t;
        }
    }
    Ok(GhostImage { exact, approx })
}

/// `⟨c1*(k1) c2(k2)⟩`-type double sum `Σ_{j,j'} f(h1[k1][j]) h2[k2][j'] M(j, j')`.
fn double_sum<T: Real>(
    h1: &[Complex<T>],
    h2: &[Complex<T>],
    m: &CorrelationMatrix<T>,
    n: usize,
    rows: &[usize],
    conjugate_h1: bool,
) -> Vec<T> {
    let zero = Complex::new(T::zero(), T::zero());
    let mut g = vec![T::zero(); n];
    for &k1 in rows {
        let mut left = vec![zero; n];
        for j in 0..n {
            let a = h1[k1 * n + j];
            let a = if conjugate_h1 { a.conj() } else { a };
            if a == zero {
                continue;
            }
            for (jp, l) in left.iter_mut().enumerate() {
                *l = *l + a * m.get(j, jp);
            }
        }
        for (k2, gk) in g.iter_mut().enumerate() {
            let s = (0..n).fold(zero, |acc, jp| acc + left[jp] * h2[k2 * n + jp]);
            *gk = *gk + s.norm_sqr();
        }
    }
    g
}

/// `|rt|² |Σ_{j,j'} h1*(k1, j) h2(k2, j') Γ(j, j')|²` by direct summation.
pub fn brute_force_g_thermal<T: Real>(
    spec: &ThermalSpectrum<T>,
    geom: &GeometrySpec<T>,
    grid: &TransverseGrid<T>,
    arm1: &ImagingArm<T>,
    arm2: &ImagingArm<T>,
    detector: Arm1Detector,
) -> Result<Vec<T>> {
    let n = grid.n_points();
    let gamma = thermal_second_order(spec, grid);
    let (h1, h2) = (arm1.impulse_response(grid)?, arm2.impulse_response(grid)?);
    let rows = arm1_rows(grid, detector)?;
    Ok(double_sum(&h1, &h2, &gamma, n, &rows, true)
        .into_iter()
        .map(|v| v * geom.rt_sq)
        .collect())
}

/// `|Σ_{j,j'} h1(k1, j) h2(k2, j') ⟨b1(x_j) b2(x_j')⟩|²` by direct summation.
pub fn brute_force_g_pdc<T: Real>(
    gain: &PdcGain<T>,
    grid: &TransverseGrid<T>,
    arm1: &ImagingArm<T>,
    arm2: &ImagingArm<T>,
    detector: Arm1Detector,
) -> Result<Vec<T>> {
    let n = grid.n_points();
    let b = pdc_cross_correlation(gain, grid);
    let (h1, h2) = (arm1.impulse_response(grid)?, arm2.impulse_response(grid)?);
    let rows = arm1_rows(grid, detector)?;
    Ok(double_sum(&h1, &h2, &b, n, &rows, false))
}

/// Correlation signal and background per mode at equal mean photon number.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VisibilityScaling<T> {
    /// `⟨n⟩ + ⟨n⟩²`, from `|U V|²`.
    pub pdc_signal: T,
    /// `⟨n⟩²`.
    pub thermal_signal: T,
    /// `⟨I1⟩⟨I2⟩ ∝ ⟨n⟩²` in both cases.
    pub pdc_background: T,
    pub thermal_background: T,
}

impl<T: Real> VisibilityScaling<T> {
    pub fn pdc_signal_to_background(&self) -> T {
        self.pdc_signal / self.pdc_background
    }

    pub fn thermal_signal_to_background(&self) -> T {
        self.thermal_signal / self.thermal_background
    }

    /// `(⟨n⟩ + ⟨n⟩²) / ⟨n⟩² = 1 + 1/⟨n⟩`.
    pub fn pdc_advantage(&self) -> T {
        self.pdc_signal_to_background() / self.thermal_signal_to_background()
    }
}

pub fn visibility_scaling<T: Real>(mean_photons: T) -> Result<VisibilityScaling<T>> {
    if !(mean_photons.is_finite() && mean_photons > T::zero()) {
        return Err(Error::Parameter(format!(
            "mean photon number must be positive, got {mean_photons}"
        )));
    }
    let n2 = mean_photons * mean_photons;
    Ok(VisibilityScaling {
        pdc_signal: mean_photons + n2,
        thermal_signal: n2,
        pdc_background: n2,
        thermal_background: n2,
    })
}

/// Normalised correlation of a split thermal single mode read by
/// photocounters: `⟨N⟩ / (1 + ⟨N⟩)`.
pub fn thermal_photocount_correlation<T: Real>(mean_count: T) -> T {
    mean_count / (T::one() + mean_count)
}

/// Largest supported Fock cutoff.
pub const MAX_FOCK_CUTOFF: usize = 20;

/// Largest tolerated thermal weight beyond the cutoff.
pub const MAX_FOCK_TAIL: f64 = 1e-2;

/// Photon-number and Wigner moments of a single-mode thermal state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FockMoments {
    pub mean_photons: f64,
    pub cutoff: usize,
    /// Thermal weight above the cutoff.
    pub tail_mass: f64,
    /// `⟨n⟩`, explicit sum up to the cutoff plus the geometric tail.
    pub mean_n: f64,
    /// `var n`, explicit sum up to the cutoff plus the geometric tail.
    pub var_n: f64,
    /// `⟨n⟩` of the truncated, renormalised state.
    pub truncated_mean_n: f64,
    pub truncated_var_n: f64,
    /// `⟨|α|²⟩_W` of the truncated state, by quadrature of the Fock Wigner
    /// functions.
    pub wigner_mean: f64,
    /// `var_W |α|²` of the truncated state.
    pub wigner_var: f64,
}

/// Laguerre polynomials `L_0(x) ..= L_m(x)`.
fn laguerre_all(m: usize, x: f64, out: &mut [f64]) {
    out[0] = 1.0;
    if m >= 1 {
        out[1] = 1.0 - x;
    }
    for k in 1..m {
        out[k + 1] = ((2 * k + 1) as f64 - x) * out[k] / (k + 1) as f64
            - k as f64 * out[k - 1] / (k + 1) as f64;
    }
}

/// `⟨|α|^{2p}⟩_W` for Fock states `0..=m`, `p = 1, 2`:
/// `(-1)^m ∫_0^∞ e^{-u} L_m(2u) (u/2)^p du` by composite Simpson.
fn fock_wigner_moments(m: usize) -> Vec<(f64, f64)> {
    const UPPER: f64 = 200.0;
    const STEPS: usize = 40_000;
    let h = UPPER / STEPS as f64;
    let mut acc = vec![(0.0, 0.0); m + 1];
    let mut lag = vec![0.0; m + 1];
    for i in 0..=STEPS {
        let u = i as f64 * h;
        let w = if i == 0 || i == STEPS {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        laguerre_all(m, 2.0 * u, &mut lag);
        let e = (-u).exp() * w;
        let (s1, s2) = (u / 2.0, (u / 2.0).powi(2));
        for (k, a) in acc.iter_mut().enumerate() {
            let f = e * lag[k];
            a.0 += f * s1;
            a.1 += f * s2;
        }
    }
    acc.iter()
        .enumerate()
        .map(|(k, &(a, b))| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            (sign * a * h / 3.0, sign * b * h / 3.0)
        })
        .collect()
}

/// `Σ_{m≥K} x^m`, `Σ m x^m`, `Σ m² x^m`.
fn geometric_tails(x: f64, k: usize) -> (f64, f64, f64) {
    let kf = k as f64;
    let xk = x.powi(k as i32);
    let d = 1.0 - x;
    (
        xk / d,
        xk * (kf - (kf - 1.0) * x) / (d * d),
        xk * (kf * kf - (2.0 * kf * kf - 2.0 * kf - 1.0) * x + (kf - 1.0).powi(2) * x * x) / (d * d * d),
    )
}

/// Moments of thermal states with the given mean photon numbers, truncated
/// at `n_max_fock`.
pub fn fock_ordering_oracle(n_max_fock: usize, mean_photons: &[f64]) -> Result<Vec<FockMoments>> {
    if n_max_fock > MAX_FOCK_CUTOFF {
        return Err(Error::Parameter(format!(
            "Fock cutoff {n_max_fock} exceeds {MAX_FOCK_CUTOFF}"
        )));
    }
    let wigner = fock_wigner_moments(n_max_fock);
    mean_photons
        .iter()
        .map(|&mean| {
            if !(mean.is_finite() && mean >= 0.0) {
                return Err(Error::Parameter(format!(
                    "mean photon number must be >= 0, got {mean}"
                )));
            }
            let x = mean / (1.0 + mean);
            let tail_mass = x.powi(n_max_fock as i32 + 1);
            if tail_mass > MAX_FOCK_TAIL {
                return Err(Error::Truncation {
                    cutoff: n_max_fock,
                    mean,
                    tail: tail_mass,
                });
            }
            let (mut p0, mut p1, mut p2) = (0.0, 0.0, 0.0);
            let (mut w1, mut w2) = (0.0, 0.0);
            for (m, &(a1, a2)) in wigner.iter().enumerate() {
                let p = (1.0 - x) * x.powi(m as i32);
                let mf = m as f64;
                p0 += p;
                p1 += p * mf;
                p2 += p * mf * mf;
                w1 += p * a1;
                w2 += p * a2;
            }
            let (_, t1, t2) = geometric_tails(x, n_max_fock + 1);
            let (mean_n, second) = (p1 + (1.0 - x) * t1, p2 + (1.0 - x) * t2);
            let (tm, ts) = (p1 / p0, p2 / p0);
            let (wm, ws) = (w1 / p0, w2 / p0);
            Ok(FockMoments {
                mean_photons: mean,
                cutoff: n_max_fock,
                tail_mass,
                mean_n,
                var_n: second - mean_n * mean_n,
                truncated_mean_n: tm,
                truncated_var_n: ts - tm * tm,
                wigner_mean: wm,
                wigner_var: ws - wm * wm,
            })
        })
        .collect()
}

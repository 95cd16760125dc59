//! Stochastic input beams: split thermal light and down-converted pairs.
//!
//! Thermal light has a positive Gaussian P-function, so it is sampled in the
//! P representation and every normally ordered moment is exact. Down-converted
//! light has no positive P-function; it is sampled in the Wigner
//! representation from vacuum inputs pushed through the linear gain map
//! `b_i(q) = U(q) a_i(q) + V(q) a_j*(-q)`.
//!
//! All samplers draw directly on the momentum lattice, where the modes of a
//! translation-invariant source are independent.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{ComplexField, Domain, Representation, TransverseGrid};
use crate::scalar::Real;

fn tolerance<T: Real>() -> T {
    T::lit(1e-9).max(T::epsilon() * T::lit(100.0))
}

/// Mean photon number per transverse mode of a thermal source,
/// `n(q) = n_max exp(-q² / (2 Δq²))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalSpectrum<T> {
    n_max: T,
    delta_q: T,
}

impl<T: Real> ThermalSpectrum<T> {
    pub fn new(n_max: T, delta_q: T) -> Result<Self> {
        if !(n_max.is_finite() && n_max >= T::zero()) {
            return Err(Error::Parameter(format!("n_max must be >= 0, got {n_max}")));
        }
        if !(delta_q.is_finite() && delta_q > T::zero()) {
            return Err(Error::Parameter(format!(
                "thermal bandwidth must be positive, got {delta_q}"
            )));
        }
        Ok(Self { n_max, delta_q })
    }

    /// Spectrum whose coherence length `2π/Δq` equals `coherence_length`.
    pub fn from_coherence_length(n_max: T, coherence_length: T) -> Result<Self> {
        Self::new(n_max, T::TAU() / coherence_length)
    }

    pub fn n_max(&self) -> T {
        self.n_max
    }

    pub fn delta_q(&self) -> T {
        self.delta_q
    }

    /// Transverse coherence length, taken as `2π / Δq`.
    pub fn coherence_length(&self) -> T {
        T::TAU() / self.delta_q
    }

    #[inline]
    pub fn mean_photons(&self, q: T) -> T {
        let s = q / self.delta_q;
        self.n_max * (-s * s * T::lit(0.5)).exp()
    }

    /// `n(q_k)` on the momentum lattice.
    pub fn occupations(&self, grid: &TransverseGrid<T>) -> Vec<T> {
        grid.momenta().into_iter().map(|q| self.mean_photons(q)).collect()
    }
}

/// Real parametric gain with Gaussian transverse profile:
/// `U = cosh ḡ(q)`, `V = sinh ḡ(q)`, `ḡ(q) = g exp(-q² / (2 Δq²))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdcGain<T> {
    g: T,
    delta_q: T,
}

impl<T: Real> PdcGain<T> {
    /// `g = 0` is accepted and describes an unpumped crystal.
    pub fn new(g: T, delta_q: T) -> Result<Self> {
        if !(g.is_finite() && g >= T::zero()) {
            return Err(Error::Parameter(format!("gain must be >= 0, got {g}")));
        }
        if !(delta_q.is_finite() && delta_q > T::zero()) {
            return Err(Error::Parameter(format!(
                "gain bandwidth must be positive, got {delta_q}"
            )));
        }
        Ok(Self { g, delta_q })
    }

    /// Gain whose peak photon number per mode `sinh²(g)` equals `n_peak`.
    pub fn from_peak_photons(n_peak: T, delta_q: T) -> Result<Self> {
        Self::new(n_peak.sqrt().asinh(), delta_q)
    }

    pub fn g(&self) -> T {
        self.g
    }

    pub fn delta_q(&self) -> T {
        self.delta_q
    }

    #[inline]
    pub fn local_gain(&self, q: T) -> T {
        let s = q / self.delta_q;
        self.g * (-s * s * T::lit(0.5)).exp()
    }

    #[inline]
    pub fn u(&self, q: T) -> T {
        self.local_gain(q).cosh()
    }

    #[inline]
    pub fn v(&self, q: T) -> T {
        self.local_gain(q).sinh()
    }

    /// Mean photon number per mode in either beam, `|V(q)|²`.
    #[inline]
    pub fn mean_photons(&self, q: T) -> T {
        let v = self.v(q);
        v * v
    }

    pub fn occupations(&self, grid: &TransverseGrid<T>) -> Vec<T> {
        grid.momenta().into_iter().map(|q| self.mean_photons(q)).collect()
    }
}

/// Lossless beam splitter `b1 = r a + t v`, `b2 = t a + r v`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamSplitter<T> {
    r: Complex<T>,
    t: Complex<T>,
}

impl<T: Real> BeamSplitter<T> {
    /// Requires `|r|² + |t|² = 1` and `r t* + t r* = 0`, which keeps the two
    /// output ports commuting.
    pub fn new(r: Complex<T>, t: Complex<T>) -> Result<Self> {
        let tol = tolerance::<T>();
        let total = r.norm_sqr() + t.norm_sqr();
        if !total.is_finite() || (total - T::one()).abs() > tol {
            return Err(Error::Parameter(format!(
                "beam splitter not lossless: |r|^2 + |t|^2 = {total}"
            )));
        }
        let cross = (r * t.conj()).re;
        if cross.abs() > tol {
            return Err(Error::Parameter(format!(
                "beam splitter outputs do not commute: Re(r t*) = {cross}"
            )));
        }
        Ok(Self { r, t })
    }

    /// `r = 1/√2`, `t = i/√2`.
    pub fn balanced() -> Self {
        let h = T::FRAC_1_SQRT_2();
        Self {
            r: Complex::new(h, T::zero()),
            t: Complex::new(T::zero(), h),
        }
    }

    pub fn r(&self) -> Complex<T> {
        self.r
    }

    pub fn t(&self) -> Complex<T> {
        self.t
    }

    /// `|r t|²`, the prefactor of the split-thermal correlation.
    pub fn rt_sq(&self) -> T {
        (self.r * self.t).norm_sqr()
    }
}

impl<T: Real> Default for BeamSplitter<T> {
    fn default() -> Self {
        Self::balanced()
    }
}

/// Circular complex Gaussian with `E|z|² = variance`.
#[inline]
pub(crate) fn complex_normal<T: Real, R: Rng + ?Sized>(rng: &mut R, variance: T) -> Complex<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    let s = (variance * T::lit(0.5)).sqrt();
    Complex::new(T::lit(re) * s, T::lit(im) * s)
}

/// Thermal field on the momentum lattice; mode `k` has variance `n(q_k)`
/// (P) or `n(q_k) + 1/2` (Wigner).
pub fn sample_thermal<T: Real, R: Rng + ?Sized>(
    grid: &TransverseGrid<T>,
    spec: &ThermalSpectrum<T>,
    representation: Representation,
    rng: &mut R,
) -> ComplexField<T> {
    let offset = representation.vacuum_occupation::<T>();
    let values = grid
        .momenta()
        .into_iter()
        .map(|q| {
            let var = spec.mean_photons(q) + offset;
            if var > T::zero() {
                complex_normal(rng, var)
            } else {
                Complex::new(T::zero(), T::zero())
            }
        })
        .collect();
    ComplexField::new(*grid, values, Domain::Momentum, representation)
        .expect("sampler length matches grid")
}

/// Vacuum on the momentum lattice: identically zero in P, white noise of
/// per-mode variance 1/2 in Wigner.
pub fn sample_vacuum<T: Real, R: Rng + ?Sized>(
    grid: &TransverseGrid<T>,
    representation: Representation,
    rng: &mut R,
) -> ComplexField<T> {
    match representation {
        Representation::P => ComplexField::zeros(*grid, Domain::Momentum, representation),
        Representation::Wigner => {
            let half = T::lit(0.5);
            let values = (0..grid.n_points())
                .map(|_| complex_normal(rng, half))
                .collect();
            ComplexField::new(*grid, values, Domain::Momentum, representation)
                .expect("sampler length matches grid")
        }
    }
}

/// Applies the beam-splitter relations elementwise.
pub fn split<T: Real>(
    a: &ComplexField<T>,
    v: &ComplexField<T>,
    bs: &BeamSplitter<T>,
) -> Result<(ComplexField<T>, ComplexField<T>)> {
    a.ensure_compatible(v)?;
    let (r, t) = (bs.r(), bs.t());
    let mut b1 = a.clone();
    let mut b2 = a.clone();
    for (j, (x, y)) in a.values().iter().zip(v.values()).enumerate() {
        b1.values_mut()[j] = r * x + t * y;
        b2.values_mut()[j] = t * x + r * y;
    }
    Ok((b1, b2))
}

/// Signal/idler pair from two independent Wigner vacua; both outputs share
/// the single `rng`.
pub fn sample_pdc_pair<T: Real, R: Rng + ?Sized>(
    grid: &TransverseGrid<T>,
    gain: &PdcGain<T>,
    rng: &mut R,
) -> (ComplexField<T>, ComplexField<T>) {
    let a1 = sample_vacuum(grid, Representation::Wigner, rng);
    let a2 = sample_vacuum(grid, Representation::Wigner, rng);
    pdc_from_vacua(gain, &a1, &a2)
}

/// As [`sample_pdc_pair`] but with separate streams for the two crystal inputs.
pub fn sample_pdc_pair_with<T: Real, R1: Rng + ?Sized, R2: Rng + ?Sized>(
    grid: &TransverseGrid<T>,
    gain: &PdcGain<T>,
    rng_signal: &mut R1,
    rng_idler: &mut R2,
) -> (ComplexField<T>, ComplexField<T>) {
    let a1 = sample_vacuum(grid, Representation::Wigner, rng_signal);
    let a2 = sample_vacuum(grid, Representation::Wigner, rng_idler);
    pdc_from_vacua(gain, &a1, &a2)
}

/// `b1(q) = U a1(q) + V a2*(-q)`, `b2(q) = U a2(q) + V a1*(-q)`.
pub fn pdc_from_vacua<T: Real>(
    gain: &PdcGain<T>,
    a1: &ComplexField<T>,
    a2: &ComplexField<T>,
) -> (ComplexField<T>, ComplexField<T>) {
    let grid = *a1.grid();
    let n = grid.n_points();
    let mut b1 = Vec::with_capacity(n);
    let mut b2 = Vec::with_capacity(n);
    let (x1, x2) = (a1.values(), a2.values());
    for k in 0..n {
        let q = grid.momentum(k);
        let (u, v) = (gain.u(q), gain.v(q));
        let mk = grid.reflect(k);
        b1.push(x1[k].scale(u) + x2[mk].conj().scale(v));
        b2.push(x2[k].scale(u) + x1[mk].conj().scale(v));
    }
    (
        ComplexField::new(grid, b1, Domain::Momentum, Representation::Wigner)
            .expect("length matches grid"),
        ComplexField::new(grid, b2, Domain::Momentum, Representation::Wigner)
            .expect("length matches grid"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::thermal_second_order;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn grid(n: usize) -> TransverseGrid<f64> {
        TransverseGrid::new(n, 1.0, 1.0).unwrap()
    }

    /// Mean and standard error of a sample.
    fn mean_se(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (v / n).sqrt())
    }

    #[test]
    fn spectrum_and_gain_validation() {
        assert!(ThermalSpectrum::new(-1.0, 1.0).is_err());
        assert!(ThermalSpectrum::new(1.0, 0.0).is_err());
        assert!(PdcGain::new(-0.1, 1.0).is_err());
        assert!(PdcGain::new(1.0, f64::NAN).is_err());
        let s = ThermalSpectrum::from_coherence_length(10.0f64, 2.0).unwrap();
        assert!((s.coherence_length() - 2.0).abs() < 1e-15);
        assert_eq!(s.mean_photons(0.0), 10.0);
        let p = PdcGain::from_peak_photons(750.0f64, 1.0).unwrap();
        assert!((p.mean_photons(0.0) - 750.0).abs() < 1e-9);
    }

    #[test]
    fn gain_is_unitary_on_the_lattice() {
        let g = grid(256);
        let gain = PdcGain::new(3.5, 0.3).unwrap();
        for q in g.momenta() {
            let (u, v) = (gain.u(q), gain.v(q));
            // cosh²(x) - sinh²(x) loses digits as e^{2x}; bound is relative to u².
            assert!((u * u - v * v - 1.0).abs() < 1e-12 * u * u.max(1.0));
            if v != 0.0 {
                assert!((u * v).powi(2) > v.powi(4));
            }
        }
    }

    #[test]
    fn splitter_conventions() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(BeamSplitter::new(Complex::new(h, 0.0), Complex::new(h, 0.0)).is_err());
        assert!(BeamSplitter::new(Complex::new(1.1f64.sqrt(), 0.0), Complex::new(0.0, 0.0)).is_err());
        let bs = BeamSplitter::<f64>::balanced();
        assert!((bs.r() * bs.t().conj()).re.abs() < 1e-15);
        assert!((bs.rt_sq() - 0.25).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn quadrature_phase_splitters_are_valid(theta in 0.0f64..1.5, phi in -3.0f64..3.0) {
            let r = Complex::from_polar(theta.cos(), phi);
            let t = Complex::from_polar(theta.sin(), phi + std::f64::consts::FRAC_PI_2);
            let bs = BeamSplitter::new(r, t).unwrap();
            prop_assert!((bs.r() * bs.t().conj()).re.abs() < 1e-12);
        }
    }

    #[test]
    fn empty_thermal_is_zero_in_p() {
        let g = grid(32);
        let s = ThermalSpectrum::new(0.0, 1.0).unwrap();
        let f = sample_thermal(&g, &s, Representation::P, &mut rng(1));
        assert!(f.values().iter().all(|v| v.norm() == 0.0));
        assert_eq!(f.domain(), Domain::Momentum);
    }

    #[test]
    fn empty_thermal_wigner_has_half_variance() {
        let g = grid(32);
        let s = ThermalSpectrum::new(0.0, 1.0).unwrap();
        let mut r = rng(2);
        let mut xs = Vec::with_capacity(100_000);
        while xs.len() < 100_000 {
            let f = sample_thermal(&g, &s, Representation::Wigner, &mut r);
            xs.extend(f.values().iter().map(|v| v.norm_sqr()));
        }
        let (m, se) = mean_se(&xs);
        assert!((m - 0.5).abs() < 3.0 * se, "{m} ± {se}");
    }

    #[test]
    fn thermal_coherence_matches_spectrum_transform() {
        let g = grid(256);
        // FWHM ≈ 100 momentum modes.
        let s = ThermalSpectrum::new(1500.0, 42.5 * g.dq()).unwrap();
        let oracle = thermal_second_order(&s, &g);
        let mut r = rng(3);
        let row = g.center();
        let mut acc = vec![Complex::new(0.0, 0.0); 256];
        let shots = 100_000;
        for _ in 0..shots {
            let a = sample_thermal(&g, &s, Representation::P, &mut r)
                .to_position()
                .unwrap();
            let a0 = a.values()[row].conj();
            for (acc, v) in acc.iter_mut().zip(a.values()) {
                *acc += a0 * v;
            }
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for (j, v) in acc.iter().enumerate() {
            let mc = v / shots as f64;
            let ex = oracle.get(row, j);
            num += (mc - ex).norm_sqr();
            den += ex.norm_sqr();
        }
        let rel_rms = (num / den).sqrt();
        assert!(rel_rms < 0.05, "relative rms {rel_rms}");
    }

    #[test]
    fn vacuum_samples() {
        let g = grid(64);
        let p = sample_vacuum(&g, Representation::P, &mut rng(4));
        assert!(p.values().iter().all(|v| v.norm() == 0.0));

        let s = ThermalSpectrum::new(5.0, 10.0).unwrap();
        let mut r = rng(5);
        let mut power = Vec::new();
        let mut cross_re = Vec::new();
        for _ in 0..2000 {
            let v = sample_vacuum(&g, Representation::Wigner, &mut r);
            let a = sample_thermal(&g, &s, Representation::P, &mut r);
            power.extend(v.values().iter().map(|z| z.norm_sqr()));
            cross_re.extend(v.values().iter().zip(a.values()).map(|(x, y)| (x.conj() * y).re));
        }
        let (m, se) = mean_se(&power);
        assert!((m - 0.5).abs() < 3.0 * se);
        let (c, se) = mean_se(&cross_re);
        assert!(c.abs() < 3.0 * se, "cross {c} ± {se}");
    }

    #[test]
    fn split_conserves_energy_without_vacuum() {
        let g = grid(64);
        let s = ThermalSpectrum::new(100.0, 0.5).unwrap();
        let mut r = rng(6);
        let a = sample_thermal(&g, &s, Representation::P, &mut r);
        let v = sample_vacuum(&g, Representation::P, &mut r);
        let (b1, b2) = split(&a, &v, &BeamSplitter::balanced()).unwrap();
        for j in 0..64 {
            let lhs = b1.values()[j].norm_sqr() + b2.values()[j].norm_sqr();
            let rhs = a.values()[j].norm_sqr();
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
        }
        let zero = ComplexField::zeros(g, Domain::Momentum, Representation::P);
        let (z1, z2) = split(&zero, &zero, &BeamSplitter::balanced()).unwrap();
        assert_eq!(z1.power() + z2.power(), 0.0);
    }

    #[test]
    fn split_rejects_incompatible_inputs() {
        let g = grid(16);
        let a = ComplexField::zeros(g, Domain::Momentum, Representation::P);
        let w = ComplexField::zeros(g, Domain::Momentum, Representation::Wigner);
        let p = ComplexField::zeros(g, Domain::Position, Representation::P);
        let other = ComplexField::zeros(grid(32), Domain::Momentum, Representation::P);
        let bs = BeamSplitter::balanced();
        assert!(matches!(split(&a, &w, &bs), Err(Error::RepresentationMismatch(..))));
        assert!(matches!(split(&a, &p, &bs), Err(Error::DomainMismatch { .. })));
        assert!(matches!(split(&a, &other, &bs), Err(Error::GridMismatch)));
    }

    #[test]
    fn split_thermal_intensity_covariance_matches_coherence() {
        let g = grid(32);
        let s = ThermalSpectrum::new(50.0, 4.0 * g.dq()).unwrap();
        let bs = BeamSplitter::balanced();
        let gamma = thermal_second_order(&s, &g);
        let (x1, x2) = (g.center(), g.center() + 1);
        let mut r = rng(7);
        let shots = 100_000;
        let (mut s1, mut s2, mut s12) = (0.0, 0.0, 0.0);
        for _ in 0..shots {
            let a = sample_thermal(&g, &s, Representation::P, &mut r);
            let v = sample_vacuum(&g, Representation::P, &mut r);
            let (b1, b2) = split(&a, &v, &bs).unwrap();
            let (b1, b2) = (b1.to_position().unwrap(), b2.to_position().unwrap());
            let i1 = b1.values()[x1].norm_sqr();
            let i2 = b2.values()[x2].norm_sqr();
            s1 += i1;
            s2 += i2;
            s12 += i1 * i2;
        }
        let n = shots as f64;
        let cov = s12 / n - (s1 / n) * (s2 / n);
        let expected = bs.rt_sq() * gamma.get(x1, x2).norm_sqr();
        assert!(cov > 0.0);
        assert!(((cov - expected) / expected).abs() < 0.05, "{cov} vs {expected}");
    }

    #[test]
    fn pdc_without_gain_is_vacuum() {
        let g = grid(32);
        let gain = PdcGain::new(0.0, 1.0).unwrap();
        let mut r = rng(8);
        let mut xs = Vec::new();
        for _ in 0..3200 {
            let (b1, b2) = sample_pdc_pair(&g, &gain, &mut r);
            xs.extend(b1.values().iter().chain(b2.values()).map(|v| v.norm_sqr()));
        }
        let (m, se) = mean_se(&xs);
        assert!((m - 0.5).abs() < 3.0 * se);
    }

    #[test]
    fn pdc_moments() {
        let g = grid(16);
        let gain = PdcGain::new(1.5, 3.0 * g.dq()).unwrap();
        let mut r = rng(9);
        let shots = 100_000;
        let k = g.center() + 2;
        let mk = g.reflect(k);
        let mut pow = Vec::with_capacity(shots);
        let mut cross = Vec::with_capacity(shots);
        for _ in 0..shots {
            let (b1, b2) = sample_pdc_pair(&g, &gain, &mut r);
            assert_eq!(b1.representation(), Representation::Wigner);
            pow.push(b1.values()[k].norm_sqr());
            cross.push(b1.values()[k] * b2.values()[mk]);
        }
        let q = g.momentum(k);
        let (m, se) = mean_se(&pow);
        let expected = gain.mean_photons(q) + 0.5;
        assert!((m - expected).abs() < 3.0 * se, "{m} ± {se} vs {expected}");

        let re: Vec<f64> = cross.iter().map(|z| z.re).collect();
        let im: Vec<f64> = cross.iter().map(|z| z.im).collect();
        let (mre, sere) = mean_se(&re);
        let (mim, seim) = mean_se(&im);
        let uv = gain.u(q) * gain.v(q);
        assert!((mre - uv).abs() < 3.0 * sere, "{mre} ± {sere} vs {uv}");
        assert!(mim.abs() < 3.0 * seim);
    }

    #[test]
    fn classical_split_obeys_cauchy_schwarz() {
        let g = grid(16);
        let s = ThermalSpectrum::new(20.0, 2.0 * g.dq()).unwrap();
        let bs = BeamSplitter::balanced();
        let mut r = rng(10);
        let mut n1 = Vec::new();
        let mut n2 = Vec::new();
        for _ in 0..20_000 {
            let a = sample_thermal(&g, &s, Representation::P, &mut r);
            let v = sample_vacuum(&g, Representation::P, &mut r);
            let (b1, b2) = split(&a, &v, &bs).unwrap();
            let (b1, b2) = (b1.to_position().unwrap(), b2.to_position().unwrap());
            n1.push(b1.values()[3..6].iter().map(|z| z.norm_sqr()).sum::<f64>());
            n2.push(b2.values()[4..7].iter().map(|z| z.norm_sqr()).sum::<f64>());
        }
        let (m1, _) = mean_se(&n1);
        let (m2, _) = mean_se(&n2);
        let cov: f64 = n1.iter().zip(&n2).map(|(a, b)| (a - m1) * (b - m2)).sum();
        let v1: f64 = n1.iter().map(|a| (a - m1).powi(2)).sum();
        let v2: f64 = n2.iter().map(|b| (b - m2).powi(2)).sum();
        assert!(cov.abs() <= (v1 * v2).sqrt());
    }
}

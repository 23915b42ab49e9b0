//! Reception pattern and effective gain of a thin-beam atomic ensemble read
//! out against a plane-wave local oscillator.
//!
//! The ensemble responds to the θ-polarized component of an incoming plane
//! wave, weighted by the phase walk-off between signal and LO along the
//! interaction length. Integrating the squared pattern over the sphere gives
//! the effective antenna gain, which corrects the extrinsic NEF for
//! electrically long interaction volumes.

use crate::error::{Error, Result};
use crate::numerics::{gauss_legendre, sinc};

/// Beam interaction geometry: length, free-space wavelength and LO direction.
#[derive(Debug, Clone, Copy)]
pub struct BeamGeometry {
    length: f64,
    wavelength: f64,
    lo_theta: f64,
    lo_phi: f64,
}

impl BeamGeometry {
    pub fn new(length: f64, wavelength: f64, lo_theta: f64, lo_phi: f64) -> Result<Self> {
        if !(length.is_finite() && length >= 0.0) {
            return Err(Error::domain(format!(
                "interaction length must be non-negative, got {length}"
            )));
        }
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(Error::domain(format!(
                "wavelength must be positive, got {wavelength}"
            )));
        }
        if !(0.0..=std::f64::consts::PI).contains(&lo_theta) {
            return Err(Error::domain(format!(
                "LO polar angle must be in [0, π], got {lo_theta}"
            )));
        }
        Ok(Self {
            length,
            wavelength,
            lo_theta,
            lo_phi,
        })
    }

    /// Geometry with the LO arriving broadside (direction cosine 1 along the
    /// beam axis).
    pub fn broadside(length: f64, wavelength: f64) -> Result<Self> {
        Self::new(length, wavelength, std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2)
    }

    /// Direction cosine of the LO with respect to the beam axis,
    /// `cos β' = sin θ' sin φ'`.
    pub fn lo_direction_cosine(&self) -> f64 {
        self.lo_theta.sin() * self.lo_phi.sin()
    }

    pub fn electrical_length(&self) -> f64 {
        self.length / self.wavelength
    }
}

/// Reception pattern `F(θ, φ) = sinθ · sinc[(κL/2)(sinθ sinφ − sinθ' sinφ')]`
/// with `κ = 2π/λ₀`.
pub fn reception_pattern(geom: &BeamGeometry, theta: f64, phi: f64) -> f64 {
    let kappa = 2.0 * std::f64::consts::PI / geom.wavelength;
    let walkoff = theta.sin() * phi.sin() - geom.lo_direction_cosine();
    theta.sin() * sinc(0.5 * kappa * geom.length * walkoff)
}

/// Effective gain `G = 4π / ∬ F² sinθ dθ dφ`.
///
/// Nested Gauss-Legendre quadrature, starting at 64 points per axis and
/// doubling until the relative change drops below 1e-7. For a point-like
/// ensemble the pattern is the dipole `sinθ` and `G = 3/2`.
pub fn effective_gain(geom: &BeamGeometry) -> Result<f64> {
    let mut n = 64;
    let mut previous = f64::NAN;
    while n <= 2048 {
        let integral = pattern_integral(geom, n);
        if integral <= 0.0 || !integral.is_finite() {
            return Err(Error::numerical("pattern integral is not positive"));
        }
        let gain = 4.0 * std::f64::consts::PI / integral;
        if previous.is_finite() && ((gain - previous) / gain).abs() < 1e-7 {
            return Ok(gain);
        }
        previous = gain;
        n *= 2;
    }
    Err(Error::numerical(format!(
        "pattern quadrature did not converge below 1e-7 by {n} points per axis \
         (L/λ₀ = {:.3})",
        geom.electrical_length()
    )))
}

fn pattern_integral(geom: &BeamGeometry, n: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(n);
    let pi = std::f64::consts::PI;
    // θ ∈ [0, π], φ ∈ [0, 2π].
    let mut total = 0.0;
    for (ti, tw) in nodes.iter().zip(&weights) {
        let theta = 0.5 * pi * (ti + 1.0);
        let sin_t = theta.sin();
        let mut phi_sum = 0.0;
        for (pi_n, pw) in nodes.iter().zip(&weights) {
            let phi = pi * (pi_n + 1.0);
            let f = reception_pattern(geom, theta, phi);
            phi_sum += pw * f * f;
        }
        total += tw * sin_t * phi_sum;
    }
    total * (0.5 * pi) * pi
}

/// Corrects an extrinsic NEF for an ensemble of effective gain `G ≥ 3/2`:
/// divides by `sqrt(2G/3)`.
pub fn gain_correction(nef_extrinsic: f64, gain: f64) -> Result<f64> {
    if gain < 1.5 {
        return Err(Error::domain(format!(
            "ensemble gain below the dipole minimum 3/2: {gain}"
        )));
    }
    Ok(nef_extrinsic / (2.0 * gain / 3.0).sqrt())
}

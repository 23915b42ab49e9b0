//! Thermal and vacuum noise quanta, the extrinsic free-space noise-equivalent
//! field (NEF), and conversions between NEF and noise temperature.
//!
//! A coherent microwave receiver observes, on top of any signal, black-body
//! radiation from its surroundings and the zero-point fluctuations of the
//! field. Both are captured by the spectral energy `Θ(f, T)`, whose form
//! depends on whether the receiver is a homodyne (single-quadrature) or
//! heterodyne (image-band-folding) detector.

use crate::constants::{BOLTZMANN, PLANCK, SPEED_OF_LIGHT, VACUUM_PERMITTIVITY};
use crate::error::{Error, Result};
use crate::numerics::bisect;

/// Local-oscillator configuration of the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectionMode {
    /// LO at the signal frequency; responds to one quadrature.
    Homodyne,
    /// LO offset by an IF; folds signal and image bands.
    Heterodyne,
}

/// Signal frequency, background temperature and detection mode.
#[derive(Debug, Clone, Copy)]
pub struct NoiseEnvironment {
    f_signal: f64,
    temperature: f64,
    mode: DetectionMode,
}

impl NoiseEnvironment {
    pub fn new(f_signal: f64, temperature: f64, mode: DetectionMode) -> Result<Self> {
        if !f_signal.is_finite() || f_signal <= 0.0 {
            return Err(Error::domain(format!(
                "signal frequency must be finite and positive, got {f_signal}"
            )));
        }
        if !temperature.is_finite() || temperature < 0.0 {
            return Err(Error::domain(format!(
                "temperature must be finite and non-negative, got {temperature}"
            )));
        }
        Ok(Self {
            f_signal,
            temperature,
            mode,
        })
    }

    pub fn f_signal(&self) -> f64 {
        self.f_signal
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn mode(&self) -> DetectionMode {
        self.mode
    }
}

/// Antenna gain used to refer noise temperatures to field amplitudes.
#[derive(Debug, Clone, Copy)]
pub struct AntennaGain(f64);

impl AntennaGain {
    pub fn new(gain: f64) -> Result<Self> {
        if !gain.is_finite() || gain <= 0.0 {
            return Err(Error::domain(format!(
                "antenna gain must be positive, got {gain}"
            )));
        }
        Ok(Self(gain))
    }

    /// Omnidirectional single-polarization receiver: G = 3/2.
    pub fn dipole() -> Self {
        Self(1.5)
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

impl Default for AntennaGain {
    fn default() -> Self {
        Self::dipole()
    }
}

/// Bose-Einstein mean occupancy `1/(exp(hf/kT) - 1)`.
///
/// Returns exactly 0 at `T = 0` (and whenever `hf/kT` would overflow `exp`);
/// double-precision `exp` overflows near an argument of 709.
pub fn bose_einstein(f: f64, temperature: f64) -> Result<f64> {
    if !f.is_finite() || f <= 0.0 {
        return Err(Error::domain(format!(
            "frequency must be finite and positive, got {f}"
        )));
    }
    if !temperature.is_finite() || temperature < 0.0 {
        return Err(Error::domain(format!(
            "temperature must be finite and non-negative, got {temperature}"
        )));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    let x = PLANCK * f / (BOLTZMANN * temperature);
    if x > 700.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (x.exp() - 1.0))
}

/// Spectral energy `Θ(f, T)` of thermal plus vacuum fluctuations (J/Hz densities
/// carried per unit bandwidth; numerically in joules).
///
/// Homodyne: `hf (n_th/2 + 1/2)`. Heterodyne: `hf (2 n_th + 1)`, the image
/// band doubling both the thermal and the vacuum contribution. Finite at
/// `T = 0`.
pub fn noise_quantum(env: &NoiseEnvironment) -> f64 {
    let n_th = bose_einstein(env.f_signal, env.temperature).expect("validated env");
    let hf = PLANCK * env.f_signal;
    match env.mode {
        DetectionMode::Homodyne => hf * (0.5 * n_th + 0.5),
        DetectionMode::Heterodyne => hf * (2.0 * n_th + 1.0),
    }
}

/// Thermal-only part of `Θ(f, T)` (vacuum contribution removed).
pub fn noise_quantum_thermal(env: &NoiseEnvironment) -> f64 {
    let n_th = bose_einstein(env.f_signal, env.temperature).expect("validated env");
    let hf = PLANCK * env.f_signal;
    match env.mode {
        DetectionMode::Homodyne => hf * 0.5 * n_th,
        DetectionMode::Heterodyne => hf * 2.0 * n_th,
    }
}

/// Vacuum part of `Θ`: `hf/2` homodyne, `hf` heterodyne.
pub fn noise_quantum_vacuum(f_signal: f64, mode: DetectionMode) -> f64 {
    let hf = PLANCK * f_signal;
    match mode {
        DetectionMode::Homodyne => 0.5 * hf,
        DetectionMode::Heterodyne => hf,
    }
}

/// Extrinsic noise-equivalent field of a free-space-coupled sensor
/// (V·m⁻¹·Hz⁻¹ᐟ²): `sqrt(16π f² Θ(f,T) / (3 ε₀ c³))`.
pub fn nef_extrinsic(env: &NoiseEnvironment) -> f64 {
    nef_from_spectral_energy(env.f_signal, noise_quantum(env))
}

/// Thermal-only extrinsic NEF (the quadrature complement of the quantum limit).
pub fn nef_extrinsic_thermal(env: &NoiseEnvironment) -> f64 {
    nef_from_spectral_energy(env.f_signal, noise_quantum_thermal(env))
}

/// Quantum-limit extrinsic NEF (zero-temperature background).
pub fn nef_extrinsic_vacuum(f_signal: f64, mode: DetectionMode) -> f64 {
    nef_from_spectral_energy(f_signal, noise_quantum_vacuum(f_signal, mode))
}

fn nef_from_spectral_energy(f: f64, theta: f64) -> f64 {
    let c3 = SPEED_OF_LIGHT.powi(3);
    (16.0 * std::f64::consts::PI * f * f * theta / (3.0 * VACUUM_PERMITTIVITY * c3)).sqrt()
}

/// Conversion coefficient between a port power spectral density and the field
/// amplitude at a G-gain antenna: `Λ = sqrt(8π f² / (ε₀ c³ G))`
/// (V·m⁻¹·W⁻¹ᐟ²).
pub fn lambda_coeff(f: f64, gain: AntennaGain) -> Result<f64> {
    if !f.is_finite() || f <= 0.0 {
        return Err(Error::domain(format!(
            "frequency must be finite and positive, got {f}"
        )));
    }
    let c3 = SPEED_OF_LIGHT.powi(3);
    Ok((8.0 * std::f64::consts::PI * f * f / (VACUUM_PERMITTIVITY * c3 * gain.value())).sqrt())
}

/// NEF of a receiver with noise temperature `T_e` behind a G-gain antenna:
/// `Λ sqrt(k_B T_e)`.
pub fn nef_from_temperature(t_noise: f64, f: f64, gain: AntennaGain) -> Result<f64> {
    if !t_noise.is_finite() || t_noise < 0.0 {
        return Err(Error::domain(format!(
            "noise temperature must be non-negative, got {t_noise}"
        )));
    }
    Ok(lambda_coeff(f, gain)? * (BOLTZMANN * t_noise).sqrt())
}

/// Noise temperature equivalent to a given NEF; exact inverse of
/// [`nef_from_temperature`].
pub fn temperature_from_nef(nef: f64, f: f64, gain: AntennaGain) -> Result<f64> {
    if !nef.is_finite() || nef < 0.0 {
        return Err(Error::domain(format!("NEF must be non-negative, got {nef}")));
    }
    let lambda = lambda_coeff(f, gain)?;
    Ok((nef / lambda).powi(2) / BOLTZMANN)
}

/// Frequency at which the thermal and vacuum NEF contributions are equal for
/// background temperature `T`, found by bisection on log-frequency over
/// [1 GHz, 100 THz].
///
/// The crossing is where `n_th = 1` (homodyne) or `n_th = 1/2` (heterodyne);
/// the bisection keeps the implementation honest about the `Θ` branches.
pub fn thermal_quantum_crossover(temperature: f64, mode: DetectionMode) -> Result<f64> {
    if !temperature.is_finite() || temperature <= 0.0 {
        return Err(Error::domain(format!(
            "crossover requires positive temperature, got {temperature}"
        )));
    }
    let excess = |log_f: f64| {
        let f = log_f.exp();
        let env = NoiseEnvironment::new(f, temperature, mode).expect("valid range");
        noise_quantum_thermal(&env) - noise_quantum_vacuum(f, mode)
    };
    let log_f = bisect(excess, (1e9_f64).ln(), (1e14_f64).ln(), 1e-9)?;
    Ok(log_f.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn env(f: f64, t: f64, mode: DetectionMode) -> NoiseEnvironment {
        NoiseEnvironment::new(f, t, mode).unwrap()
    }

    #[test]
    fn occupancy_is_zero_at_zero_temperature() {
        assert_eq!(bose_einstein(10e9, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn occupancy_matches_rayleigh_jeans_expansion() {
        // Series oracle for hf << kT: n ≈ kT/hf - 1/2.
        let f = 10e9;
        let t = 290.0;
        let oracle = BOLTZMANN * t / (PLANCK * f) - 0.5;
        let n = bose_einstein(f, t).unwrap();
        assert_relative_eq!(n, oracle, max_relative = 1e-3);
    }

    #[test]
    fn occupancy_is_unity_when_exponent_is_ln2() {
        let t = 100.0;
        let f = BOLTZMANN * t * std::f64::consts::LN_2 / PLANCK;
        assert_relative_eq!(bose_einstein(f, t).unwrap(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn occupancy_rejects_bad_frequency() {
        assert!(bose_einstein(0.0, 300.0).is_err());
        assert!(bose_einstein(f64::NAN, 300.0).is_err());
        assert!(bose_einstein(-1e9, 300.0).is_err());
    }

    #[test]
    fn occupancy_handles_extreme_exponent_without_overflow() {
        // hf/kT far beyond exp() overflow.
        let n = bose_einstein(1e15, 1e-9).unwrap();
        assert_eq!(n, 0.0);
    }

    #[test]
    fn quantum_is_one_photon_heterodyne_at_zero_kelvin() {
        let theta = noise_quantum(&env(10e9, 0.0, DetectionMode::Heterodyne));
        assert_relative_eq!(theta, PLANCK * 10e9, max_relative = 1e-14);
    }

    #[test]
    fn quantum_is_half_photon_homodyne_at_zero_kelvin() {
        let theta = noise_quantum(&env(10e9, 0.0, DetectionMode::Homodyne));
        assert_relative_eq!(theta, 0.5 * PLANCK * 10e9, max_relative = 1e-14);
    }

    #[test]
    fn quantum_matches_rayleigh_jeans_at_low_frequency() {
        // Oracle: heterodyne Θ → 2 k_B T for hf << kT.
        let theta = noise_quantum(&env(1e9, 290.0, DetectionMode::Heterodyne));
        assert_relative_eq!(theta, 2.0 * BOLTZMANN * 290.0, max_relative = 1e-2);
    }

    #[test]
    fn nef_quantum_limit_matches_direct_evaluation() {
        // Independent evaluation of the closed form at T = 0, heterodyne.
        let f = 10e9;
        let direct = (16.0 * std::f64::consts::PI * f * f * PLANCK * f
            / (3.0 * VACUUM_PERMITTIVITY * SPEED_OF_LIGHT.powi(3)))
        .sqrt();
        let nef = nef_extrinsic(&env(f, 0.0, DetectionMode::Heterodyne));
        assert_relative_eq!(nef, direct, max_relative = 1e-14);
        // ~6.8 nV/m/√Hz at 10 GHz.
        assert!((6.5e-9..7.2e-9).contains(&nef));
    }

    #[test]
    fn homodyne_quantum_nef_is_heterodyne_over_sqrt2() {
        let f = 3.3e10;
        let hom = nef_extrinsic(&env(f, 0.0, DetectionMode::Homodyne));
        let het = nef_extrinsic(&env(f, 0.0, DetectionMode::Heterodyne));
        assert_relative_eq!(hom, het / 2.0_f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn lambda_scales_linearly_with_frequency() {
        let g = AntennaGain::dipole();
        let l1 = lambda_coeff(5e9, g).unwrap();
        let l2 = lambda_coeff(10e9, g).unwrap();
        assert_relative_eq!(l2 / l1, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn lambda_scales_inversely_with_sqrt_gain() {
        let l1 = lambda_coeff(10e9, AntennaGain::new(1.5).unwrap()).unwrap();
        let l4 = lambda_coeff(10e9, AntennaGain::new(6.0).unwrap()).unwrap();
        assert_relative_eq!(l4, l1 / 2.0, max_relative = 1e-14);
    }

    #[test]
    fn lambda_rejects_nonpositive_gain() {
        assert!(AntennaGain::new(0.0).is_err());
        assert!(AntennaGain::new(-1.0).is_err());
    }

    #[test]
    fn hundred_kelvin_lna_nef_anchor() {
        let nef = nef_from_temperature(100.0, 10e9, AntennaGain::dipole()).unwrap();
        assert_relative_eq!(nef, 0.098e-6, max_relative = 0.02);
    }

    #[test]
    fn state_of_the_art_nef_temperature_anchor() {
        let t = temperature_from_nef(1.25e-6, 10e9, AntennaGain::dipole()).unwrap();
        assert_relative_eq!(t, 16100.0, max_relative = 0.03);
    }

    #[test]
    fn temperature_nef_round_trip_is_identity() {
        let g = AntennaGain::dipole();
        for t in [0.3, 10.0, 290.0, 1.6e4] {
            let round = temperature_from_nef(nef_from_temperature(t, 7e9, g).unwrap(), 7e9, g).unwrap();
            assert_relative_eq!(round, t, max_relative = 1e-12);
        }
    }

    #[test]
    fn quadrature_decomposition_holds() {
        for mode in [DetectionMode::Homodyne, DetectionMode::Heterodyne] {
            for f in [1e9, 1e11, 4e12] {
                let e = env(f, 290.0, mode);
                let total = nef_extrinsic(&e).powi(2);
                let parts = nef_extrinsic_thermal(&e).powi(2) + nef_extrinsic_vacuum(f, mode).powi(2);
                assert_relative_eq!(total, parts, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn homodyne_crossover_near_4p2_terahertz() {
        let f = thermal_quantum_crossover(290.0, DetectionMode::Homodyne).unwrap();
        assert_relative_eq!(f, 4.19e12, max_relative = 0.01);
        // Analytic check: n_th = 1 there.
        assert_relative_eq!(
            f,
            BOLTZMANN * 290.0 * std::f64::consts::LN_2 / PLANCK,
            max_relative = 1e-6
        );
    }

    #[test]
    fn heterodyne_crossover_is_higher() {
        // The image band doubles thermal and vacuum alike, so the crossing
        // moves to n_th = 1/2: f = kT ln(3)/h ≈ 6.6 THz at 290 K.
        let f = thermal_quantum_crossover(290.0, DetectionMode::Heterodyne).unwrap();
        assert_relative_eq!(f, BOLTZMANN * 290.0 * 3.0_f64.ln() / PLANCK, max_relative = 1e-6);
    }
}

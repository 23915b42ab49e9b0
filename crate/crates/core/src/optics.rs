//! Probe-readout NEF limits for direct, optical-homodyne and
//! optical-heterodyne detection, and the interaction-volume scaling of the
//! free-space sensitivity.

use crate::error::{Error, Result};

/// Optical readout scheme of the transmitted probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpticalScheme {
    /// Direct photodetection of the probe.
    Direct,
    /// Balanced detection against an optical LO at the probe frequency.
    OpticalHomodyne,
    /// Balanced detection against a detuned optical LO.
    OpticalHeterodyne,
}

/// Probe detection chain parameters.
#[derive(Debug, Clone, Copy)]
pub struct OpticalDetection {
    pub scheme: OpticalScheme,
    /// Mean probe power at the detector (W).
    pub probe_power: f64,
    /// Probe optical frequency (Hz).
    pub probe_freq: f64,
    /// Photodetector quantum efficiency, in (0, 1].
    pub quantum_efficiency: f64,
    /// Photodiode noise-equivalent power (W·Hz⁻¹ᐟ²).
    pub nep_pd: f64,
    /// Modulation index of the microwave beatnote on the probe (m/V).
    pub modulation_index: f64,
    /// Optical LO power |A_LO|² (W); required for the coherent schemes.
    pub lo_power: f64,
    /// Probe-LO relative phase (rad); homodyne only.
    pub relative_phase: f64,
}

impl OpticalDetection {
    fn validate(&self) -> Result<()> {
        if !(self.probe_power.is_finite() && self.probe_power > 0.0) {
            return Err(Error::domain("probe power must be positive".to_string()));
        }
        if !(self.probe_freq.is_finite() && self.probe_freq > 0.0) {
            return Err(Error::domain("probe frequency must be positive".to_string()));
        }
        if !(self.quantum_efficiency > 0.0 && self.quantum_efficiency <= 1.0) {
            return Err(Error::domain(format!(
                "quantum efficiency must be in (0, 1], got {}",
                self.quantum_efficiency
            )));
        }
        if !(self.modulation_index.is_finite() && self.modulation_index > 0.0) {
            return Err(Error::domain("modulation index must be positive".to_string()));
        }
        if self.nep_pd < 0.0 {
            return Err(Error::domain("photodiode NEP must be non-negative".to_string()));
        }
        if matches!(self.scheme, OpticalScheme::OpticalHomodyne | OpticalScheme::OpticalHeterodyne)
            && !(self.lo_power > 0.0)
        {
            return Err(Error::domain(
                "coherent optical schemes require a positive LO power".to_string(),
            ));
        }
        Ok(())
    }
}

/// Noise-equivalent field of the optical readout chain (V·m⁻¹·Hz⁻¹ᐟ²).
///
/// With a negligible photodiode NEP the three schemes rank
/// homodyne : heterodyne : direct = 1 : √2 : 2. Returns `+∞` for a homodyne
/// chain at quadrature (`cos φ_d = 0`), where the readout carries no signal.
pub fn nef_optical(det: &OpticalDetection) -> Result<f64> {
    det.validate()?;
    let h_nu = crate::constants::PLANCK * det.probe_freq;
    let p0 = det.probe_power;
    let eta = det.quantum_efficiency;
    let nep_sq = det.nep_pd * det.nep_pd;
    let value = match det.scheme {
        OpticalScheme::Direct => {
            (2.0 * h_nu / (eta * p0) + nep_sq / (p0 * p0)).sqrt() / det.modulation_index
        }
        OpticalScheme::OpticalHomodyne => {
            let cos_phi = det.relative_phase.cos();
            if cos_phi.abs() < 1e-12 {
                return Ok(f64::INFINITY);
            }
            (h_nu / (2.0 * eta * p0) + 2.0 * nep_sq / (p0 * det.lo_power)).sqrt()
                / (cos_phi * det.modulation_index).abs()
        }
        OpticalScheme::OpticalHeterodyne => {
            (h_nu / (eta * p0) + 4.0 * nep_sq / (p0 * det.lo_power)).sqrt() / det.modulation_index
        }
    };
    Ok(value)
}

/// Rescales a free-space NEF to a different interaction volume using
/// `NEF₀ ∝ 1/(L·w₀)`.
pub fn volume_scaled_nef(nef_ref: f64, l_ref: f64, w0_ref: f64, l: f64, w0: f64) -> Result<f64> {
    for (name, v) in [("l_ref", l_ref), ("w0_ref", w0_ref), ("l", l), ("w0", w0)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::domain(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(nef_ref * (l_ref * w0_ref) / (l * w0))
}

//! 1-D waveguide/resonator noise-transport model.
//!
//! A waveguide section of length `L` and complex propagation constant
//! `κ_z = α + iβ` is fed through a coupler with port-side reflection `S₂₂`
//! and terminated in a load with reflection `Γ_L`. Signal, input-background,
//! load and wall noise are propagated as power-normalized traveling waves,
//! giving spatially resolved power spectral densities and the input-referred
//! noise-equivalent power
//!
//! ```text
//! NEP(z) = Θ(f, T_A) + Θ(f, T_L)/B′(z) + Θ(f, T_p)/C′(z) + NEF₀²/K′²(z)
//! ```
//!
//! Unlike the single-mode harmonic-oscillator model this stays accurate for
//! arbitrarily overcoupled or lossy structures, at the cost of being 1-D.

use num_complex::Complex64;

use crate::constants::BOLTZMANN;
use crate::error::{Error, Result};
use crate::homodel::SensorIntrinsic;
use crate::noisequanta::{noise_quantum, DetectionMode, NoiseEnvironment};
use crate::numerics::{adaptive_simpson, argmin, golden_section_min, parabolic_refine};

/// Which electric-field component the atoms sense. Longitudinal components
/// see the opposite reflection sign at both boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FieldComponent {
    #[default]
    Transverse,
    Longitudinal,
}

/// Coupled, terminated waveguide section with its thermal state.
#[derive(Debug, Clone, Copy)]
pub struct WaveguideResonator {
    /// Complex propagation constant α + iβ (1/m), α ≥ 0.
    pub kappa_z: Complex64,
    /// Physical length (m).
    pub length: f64,
    /// Port-side reflection of the coupler, |S₂₂| ≤ 1.
    pub s22: Complex64,
    /// Termination reflection, |Γ_L| ≤ 1.
    pub gamma_load: Complex64,
    /// Transverse mode field constant at the atom location (V·m⁻¹·W⁻¹ᐟ²).
    pub k_w: f64,
    /// Wall temperature (K).
    pub t_wall: f64,
    /// Load temperature (K).
    pub t_load: f64,
    pub field_component: FieldComponent,
}

impl WaveguideResonator {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        kappa_z: Complex64,
        length: f64,
        s22: Complex64,
        gamma_load: Complex64,
        k_w: f64,
        t_wall: f64,
        t_load: f64,
        field_component: FieldComponent,
    ) -> Result<Self> {
        if kappa_z.re < 0.0 || !kappa_z.is_finite() {
            return Err(Error::domain(format!(
                "attenuation constant must be non-negative, got {}",
                kappa_z.re
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::domain(format!("length must be positive, got {length}")));
        }
        if kappa_z.re * length > 20.0 {
            return Err(Error::domain(
                "total attenuation αL > 20 Np is outside the supported range".to_string(),
            ));
        }
        if s22.norm() > 1.0 + 1e-12 {
            return Err(Error::domain(format!("|S22| must be ≤ 1, got {}", s22.norm())));
        }
        if gamma_load.norm() > 1.0 + 1e-12 {
            return Err(Error::domain(format!(
                "|Γ_L| must be ≤ 1, got {}",
                gamma_load.norm()
            )));
        }
        if !(k_w.is_finite() && k_w >= 0.0) {
            return Err(Error::domain(format!("K_W must be non-negative, got {k_w}")));
        }
        if t_wall < 0.0 || t_load < 0.0 {
            return Err(Error::domain("temperatures must be non-negative".to_string()));
        }
        Ok(Self {
            kappa_z,
            length,
            s22,
            gamma_load,
            k_w,
            t_wall,
            t_load,
            field_component,
        })
    }

    fn check_position(&self, z: f64) -> Result<()> {
        if !(0.0..=self.length).contains(&z) {
            return Err(Error::domain(format!(
                "position z = {z} outside [0, {}]",
                self.length
            )));
        }
        Ok(())
    }

    /// Reflections seen by the sensed field component.
    fn effective_reflections(&self) -> (Complex64, Complex64) {
        match self.field_component {
            FieldComponent::Transverse => (self.s22, self.gamma_load),
            FieldComponent::Longitudinal => (-self.s22, -self.gamma_load),
        }
    }

    fn alpha(&self) -> f64 {
        self.kappa_z.re
    }

    /// Round-trip loop factor `S₂₂ Γ_L e^{−2κL}` for the sensed component.
    fn loop_factor(&self) -> Complex64 {
        let (s, g) = self.effective_reflections();
        s * g * (-2.0 * self.kappa_z * self.length).exp()
    }

    /// `|1 − S₂₂ Γ_L e^{−2κL}|²`.
    fn loop_denominator(&self) -> f64 {
        (Complex64::new(1.0, 0.0) - self.loop_factor()).norm_sqr()
    }

    /// Standing-wave shape of waves launched from the coupler side:
    /// `|1 + Γ_L e^{−2κ(L−z)}|²`.
    fn shape_from_input(&self, z: f64) -> f64 {
        let (_, g) = self.effective_reflections();
        (Complex64::new(1.0, 0.0) + g * (-2.0 * self.kappa_z * (self.length - z)).exp()).norm_sqr()
    }

    /// Standing-wave shape of waves launched from the load side:
    /// `|1 + S₂₂ e^{−2κz}|²`.
    fn shape_from_load(&self, z: f64) -> f64 {
        let (s, _) = self.effective_reflections();
        (Complex64::new(1.0, 0.0) + s * (-2.0 * self.kappa_z * z).exp()).norm_sqr()
    }
}

/// Phase for `S₂₂` that puts the loop `S₂₂ Γ_L e^{−2κL}` on resonance
/// (real positive) for a given magnitude.
pub fn resonant_s22(
    magnitude: f64,
    gamma_load: Complex64,
    kappa_z: Complex64,
    length: f64,
) -> Complex64 {
    let rest = gamma_load * (-2.0 * kappa_z * length).exp();
    if rest.norm() == 0.0 {
        return Complex64::new(magnitude, 0.0);
    }
    magnitude * (Complex64::new(0.0, -rest.arg())).exp()
}

/// Signal PSD at position `z` for input PSD `input_psd` (W/Hz).
pub fn psd_signal(wg: &WaveguideResonator, z: f64, input_psd: f64) -> Result<f64> {
    wg.check_position(z)?;
    let coupled = 1.0 - wg.s22.norm_sqr();
    Ok(coupled * wg.shape_from_input(z) * (-2.0 * wg.alpha() * z).exp() / wg.loop_denominator()
        * input_psd)
}

/// PSD at `z` from the thermal background seen by the input port.
pub fn psd_input_thermal(
    wg: &WaveguideResonator,
    f_signal: f64,
    mode: DetectionMode,
    t_background: f64,
    z: f64,
) -> Result<f64> {
    let theta = noise_quantum(&NoiseEnvironment::new(f_signal, t_background, mode)?);
    psd_signal(wg, z, theta)
}

/// PSD at `z` emitted by the termination at `wg.t_load`. Mirror image of the
/// input distribution: `z → L−z`, `S₂₂ ↔ Γ_L`.
pub fn psd_load_thermal(
    wg: &WaveguideResonator,
    f_signal: f64,
    mode: DetectionMode,
    z: f64,
) -> Result<f64> {
    wg.check_position(z)?;
    let theta = noise_quantum(&NoiseEnvironment::new(f_signal, wg.t_load, mode)?);
    let coupled = 1.0 - wg.gamma_load.norm_sqr();
    Ok(coupled
        * wg.shape_from_load(z)
        * (-2.0 * wg.alpha() * (wg.length - z)).exp()
        * theta
        / wg.loop_denominator())
}

/// Dimensionless noise-temperature profile `f(z)` of the lossy walls.
pub fn noise_profile(wg: &WaveguideResonator, z: f64) -> Result<f64> {
    wg.check_position(z)?;
    let (s, g) = wg.effective_reflections();
    let kappa = wg.kappa_z;
    let alpha = wg.alpha();
    let l = wg.length;

    let fwd = ((-kappa * z).exp() + g * (-2.0 * kappa * l).exp() * (kappa * z).exp()).norm_sqr();
    let bwd = ((kappa * z).exp() + s * (-kappa * z).exp()).norm_sqr();

    let grow = (2.0 * alpha * z).exp() - 1.0 - s.norm_sqr() * ((-2.0 * alpha * z).exp() - 1.0);
    let decay = (-2.0 * alpha * l).exp()
        - (-2.0 * alpha * z).exp()
        - g.norm_sqr() * (-4.0 * alpha * l).exp() * ((2.0 * alpha * l).exp() - (2.0 * alpha * z).exp());

    Ok(fwd * grow - bwd * decay)
}

/// PSD at `z` generated by the lossy waveguide walls at `wg.t_wall`.
pub fn psd_wall_thermal(
    wg: &WaveguideResonator,
    f_signal: f64,
    mode: DetectionMode,
    z: f64,
) -> Result<f64> {
    let theta = noise_quantum(&NoiseEnvironment::new(f_signal, wg.t_wall, mode)?);
    Ok(theta * noise_profile(wg, z)? / wg.loop_denominator())
}

/// NEP and its coefficient breakdown at atom position `z`.
#[derive(Debug, Clone, Copy)]
pub struct WgNoiseBreakdown {
    pub nep: f64,
    /// Suppression of load noise; `∞` for a perfect reflector.
    pub b_prime: f64,
    /// Radiative-cooling factor of the wall noise.
    pub c_prime: f64,
    /// Squared field per input power at `z` (V²·m⁻²·W⁻¹).
    pub k_prime_sq: f64,
}

/// Input-referred noise-equivalent power of the waveguide-coupled receiver.
pub fn wg_nep(
    wg: &WaveguideResonator,
    f_signal: f64,
    mode: DetectionMode,
    t_background: f64,
    sensor: &SensorIntrinsic,
    z: f64,
) -> Result<WgNoiseBreakdown> {
    wg.check_position(z)?;
    let alpha = wg.alpha();
    let l = wg.length;
    let signal_coeff = (1.0 - wg.s22.norm_sqr()) * wg.shape_from_input(z) * (-2.0 * alpha * z).exp();

    let theta_a = noise_quantum(&NoiseEnvironment::new(f_signal, t_background, mode)?);
    let theta_l = noise_quantum(&NoiseEnvironment::new(f_signal, wg.t_load, mode)?);
    let theta_p = noise_quantum(&NoiseEnvironment::new(f_signal, wg.t_wall, mode)?);

    let load_coupled = 1.0 - wg.gamma_load.norm_sqr();
    let b_prime = if load_coupled <= 0.0 {
        f64::INFINITY
    } else {
        signal_coeff / ((-2.0 * alpha * (l - z)).exp() * load_coupled * wg.shape_from_load(z))
    };

    let profile = noise_profile(wg, z)?;
    let c_prime = if profile <= 0.0 {
        f64::INFINITY
    } else {
        signal_coeff / profile
    };

    let k_prime_sq = signal_coeff / wg.loop_denominator() * wg.k_w.powi(2);

    let intrinsic = if sensor.nef0 == 0.0 {
        0.0
    } else if k_prime_sq == 0.0 {
        f64::INFINITY
    } else {
        sensor.nef0.powi(2) / k_prime_sq
    };

    let nep = theta_a
        + if b_prime.is_infinite() { 0.0 } else { theta_l / b_prime }
        + if c_prime.is_infinite() { 0.0 } else { theta_p / c_prime }
        + intrinsic;

    Ok(WgNoiseBreakdown {
        nep,
        b_prime,
        c_prime,
        k_prime_sq,
    })
}

/// `wg_nep` divided by `k_B` (K).
pub fn wg_net(
    wg: &WaveguideResonator,
    f_signal: f64,
    mode: DetectionMode,
    t_background: f64,
    sensor: &SensorIntrinsic,
    z: f64,
) -> Result<f64> {
    Ok(wg_nep(wg, f_signal, mode, t_background, sensor, z)?.nep / BOLTZMANN)
}

/// Field amplitudes at `z` due to an impressed unit noise wave launched
/// forward (`f⁺`) and backward (`f⁻`) from a differential source at `z_src`.
pub fn differential_green(
    wg: &WaveguideResonator,
    z: f64,
    z_src: f64,
) -> Result<(Complex64, Complex64)> {
    wg.check_position(z)?;
    wg.check_position(z_src)?;
    let (s, g) = wg.effective_reflections();
    let kappa = wg.kappa_z;
    let ge = g * (-2.0 * kappa * wg.length).exp();
    let denom = Complex64::new(1.0, 0.0) - s * ge;

    let toward_load = (-kappa * z).exp() + ge * (kappa * z).exp();
    let toward_input = (kappa * z).exp() + s * (-kappa * z).exp();

    let f_plus = if z >= z_src {
        (kappa * z_src).exp() * toward_load / denom
    } else {
        ge * (kappa * z_src).exp() * toward_input / denom
    };
    let f_minus = if z > z_src {
        s * (-kappa * z_src).exp() * toward_load / denom
    } else {
        (-kappa * z_src).exp() * toward_input / denom
    };
    Ok((f_plus, f_minus))
}

/// Result of the two-parameter design optimization.
#[derive(Debug, Clone, Copy)]
pub struct WgOptimum {
    pub s22_magnitude: f64,
    pub z: f64,
    pub nep: f64,
    /// True when the NEP is flat in `z` (e.g. lossless walls and no load
    /// leakage); the returned `z` is then arbitrary.
    pub degenerate_z: bool,
}

/// Minimizes the NEP over coupling magnitude `|S₂₂| ∈ [0, 1)` and atom
/// position `z ∈ [0, L]`.
///
/// `family` must map a coupling magnitude to a resonator (typically fixing
/// the `S₂₂` phase to the resonance condition). Golden-section over the
/// magnitude is nested around a z-grid search (1001 points) refined by a
/// parabolic fit.
pub fn optimal_design(
    family: &dyn Fn(f64) -> WaveguideResonator,
    f_signal: f64,
    mode: DetectionMode,
    t_background: f64,
    sensor: &SensorIntrinsic,
) -> Result<WgOptimum> {
    const Z_POINTS: usize = 1001;

    let best_z = |mag: f64| -> Result<(f64, f64, bool)> {
        let wg = family(mag);
        let zs: Vec<f64> = (0..Z_POINTS)
            .map(|i| wg.length * i as f64 / (Z_POINTS - 1) as f64)
            .collect();
        let neps = zs
            .iter()
            .map(|&z| Ok(wg_nep(&wg, f_signal, mode, t_background, sensor, z)?.nep))
            .collect::<Result<Vec<f64>>>()?;
        let lo = neps.iter().cloned().fold(f64::INFINITY, f64::min);
        if !lo.is_finite() {
            return Err(Error::numerical("NEP not finite anywhere along the guide"));
        }
        // Degenerate only when the profile is flat; out-of-band points
        // (infinite NEP at field nodes) do not count as variation by
        // themselves.
        let all_finite = neps.iter().all(|v| v.is_finite());
        let hi = neps.iter().cloned().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
        let degenerate = all_finite && (hi - lo).abs() <= 1e-12 * hi.abs();
        if degenerate {
            return Ok((0.5 * wg.length, lo, true));
        }
        let i = argmin(&neps);
        let z = parabolic_refine(&zs, &neps, i);
        let nep = wg_nep(&wg, f_signal, mode, t_background, sensor, z)?.nep;
        Ok((z, nep.min(neps[i]), false))
    };

    let objective = |mag: f64| match best_z(mag) {
        Ok((_, nep, _)) => nep,
        Err(_) => f64::INFINITY,
    };
    let (mag_opt, _) = golden_section_min(objective, 0.0, 1.0 - 1e-9, 1e-7);
    let (z, nep, degenerate_z) = best_z(mag_opt)?;
    if !nep.is_finite() {
        return Err(Error::numerical("design optimization did not converge"));
    }
    Ok(WgOptimum {
        s22_magnitude: mag_opt,
        z,
        nep,
        degenerate_z,
    })
}

/// Integral of the differential-source PSD over all source positions,
/// cross-checking [`noise_profile`]; exposed for tests and diagnostics.
pub fn wall_psd_by_quadrature(
    wg: &WaveguideResonator,
    f_signal: f64,
    mode: DetectionMode,
    z: f64,
) -> Result<f64> {
    let theta = noise_quantum(&NoiseEnvironment::new(f_signal, wg.t_wall, mode)?);
    let alpha = wg.alpha();
    let density = |z_src: f64| {
        let (fp, fm) = differential_green(wg, z, z_src).expect("positions validated");
        2.0 * alpha * theta * (fp.norm_sqr() + fm.norm_sqr())
    };
    // The Green function has a kink at z′ = z; integrate each side separately.
    let left = adaptive_simpson(&density, 0.0, z, 1e-9);
    let right = adaptive_simpson(&density, z, wg.length, 1e-9);
    Ok(left + right)
}

//! Single-mode harmonic-oscillator model of a port-coupled resonator.
//!
//! A resonator with intrinsic loss rate `γ_i`, coupling rate `γ_c`, phase and
//! group round-trip delays `τ`, `τ_g` and a mode field constant `K_U` at the
//! atom location is driven through a lossless reciprocal coupler. The model
//! yields the stored-energy spectra of signal and noise, the input-referred
//! noise-equivalent power
//!
//! ```text
//! NEP = Θ(f, T_A) + Θ(f, T_p)/C + NEF₀²/K²
//! ```
//!
//! the radiative-cooling factor `C`, the field-per-√power coefficient `K`,
//! the optimal coupling rate that trades field enhancement against radiative
//! cooling, and the port reflection coefficient.
//!
//! Two evaluation forms are provided. [`ModelForm::Approximate`] is the
//! first-order form valid for `γτ ≪ 1`; it is the form behind every closed
//! design expression in this crate and stays physically sensible at arbitrary
//! overcoupling. [`ModelForm::Exact`] keeps the exponential round-trip
//! factors so that the stored-energy bookkeeping (notably the
//! thermal-equilibrium integral) is exact; it is meaningful only while
//! `γτ ≲ 0.1` and is the default for the energy spectra.

use num_complex::Complex64;

use crate::constants::BOLTZMANN;
use crate::error::{Error, Result};
use crate::noisequanta::{
    lambda_coeff, noise_quantum, noise_quantum_vacuum, AntennaGain, NoiseEnvironment,
};
use crate::numerics::{argmin, bisect, golden_section_min};

/// Which algebraic form of the resonator response to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModelForm {
    /// First-order rates (`C = γ_c/γ_i`, `K² = 2γ_c/(γ_i+γ_c)² (τ_g/τ) K_U² H_L`).
    #[default]
    Approximate,
    /// Full round-trip exponentials; valid while `γτ ≲ 0.1`.
    Exact,
}

/// Port-coupled single-mode resonator.
#[derive(Debug, Clone, Copy)]
pub struct HoResonator {
    pub f0: f64,
    pub gamma_i: f64,
    pub gamma_c: f64,
    pub tau: f64,
    pub tau_g: f64,
    pub k_u: f64,
}

impl HoResonator {
    pub fn new(f0: f64, gamma_i: f64, gamma_c: f64, tau: f64, tau_g: f64, k_u: f64) -> Result<Self> {
        for (name, v) in [
            ("f0", f0),
            ("gamma_i", gamma_i),
            ("gamma_c", gamma_c),
            ("tau", tau),
            ("tau_g", tau_g),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !k_u.is_finite() || k_u < 0.0 {
            return Err(Error::domain(format!("k_u must be non-negative, got {k_u}")));
        }
        Ok(Self {
            f0,
            gamma_i,
            gamma_c,
            tau,
            tau_g,
            k_u,
        })
    }

    /// Build from quality factors using `γ = ω₀/(2Q)`.
    ///
    /// `tau` and `tau_g` default to `1/f₀` (half-wave resonator) and
    /// `τ_g = τ` respectively when not supplied.
    pub fn from_quality_factors(
        f0: f64,
        q_i: f64,
        q_c: f64,
        tau: Option<f64>,
        tau_g_over_tau: Option<f64>,
        k_u: f64,
    ) -> Result<Self> {
        if q_i <= 0.0 || q_c <= 0.0 {
            return Err(Error::domain("quality factors must be positive".to_string()));
        }
        let omega0 = 2.0 * std::f64::consts::PI * f0;
        let tau = tau.unwrap_or(1.0 / f0);
        let ratio = tau_g_over_tau.unwrap_or(1.0);
        Self::new(
            f0,
            omega0 / (2.0 * q_i),
            omega0 / (2.0 * q_c),
            tau,
            tau * ratio,
            k_u,
        )
    }

    pub fn with_gamma_c(&self, gamma_c: f64) -> Self {
        Self { gamma_c, ..*self }
    }

    pub fn gamma_total(&self) -> f64 {
        self.gamma_i + self.gamma_c
    }

    /// Coupling ratio `γ_c/γ_i = Q_i/Q_c`.
    pub fn coupling_ratio(&self) -> f64 {
        self.gamma_c / self.gamma_i
    }

    /// Single-mode validity: the model assumes `γτ ≪ 1`. Callers should warn
    /// when this returns false.
    pub fn high_q_valid(&self) -> bool {
        self.gamma_total() * self.tau <= 0.1
    }
}

/// Input background / resonator temperatures and the detection mode.
#[derive(Debug, Clone, Copy)]
pub struct HoEnvironment {
    pub t_background: f64,
    pub t_physical: f64,
    pub mode: crate::noisequanta::DetectionMode,
}

impl HoEnvironment {
    pub fn new(t_background: f64, t_physical: f64, mode: crate::noisequanta::DetectionMode) -> Result<Self> {
        if t_background < 0.0 || t_physical < 0.0 {
            return Err(Error::domain("temperatures must be non-negative".to_string()));
        }
        Ok(Self {
            t_background,
            t_physical,
            mode,
        })
    }
}

/// Intrinsic free-space sensitivity of the atomic sensor.
#[derive(Debug, Clone, Copy)]
pub struct SensorIntrinsic {
    pub nef0: f64,
}

impl SensorIntrinsic {
    pub fn new(nef0: f64) -> Result<Self> {
        if !nef0.is_finite() || nef0 < 0.0 {
            return Err(Error::domain(format!("NEF₀ must be non-negative, got {nef0}")));
        }
        Ok(Self { nef0 })
    }
}

/// Lorentzian resonance response `[1 + (π δω/Δω_r)²]⁻¹` normalized to its
/// power-equivalent bandwidth `Δω_r`.
pub fn lorentzian(delta_omega: f64, delta_omega_r: f64) -> f64 {
    let x = std::f64::consts::PI * delta_omega / delta_omega_r;
    1.0 / (1.0 + x * x)
}

/// Power-equivalent bandwidth of the resonance, `Δω_r = 2π sinh(γτ/2)/τ`
/// (rad/s).
pub fn resonance_bandwidth(res: &HoResonator) -> f64 {
    2.0 * std::f64::consts::PI * (0.5 * res.gamma_total() * res.tau).sinh() / res.tau
}

/// Radiative cooling factor `C`.
///
/// Overcoupling (`γ_c > γ_i`) dilutes the resonator's own thermal emission as
/// seen from the input port.
pub fn cooling_factor(res: &HoResonator, form: ModelForm) -> f64 {
    match form {
        ModelForm::Approximate => res.gamma_c / res.gamma_i,
        ModelForm::Exact => {
            let gt = res.gamma_total() * res.tau;
            let gc2 = 2.0 * res.gamma_c * res.tau;
            let inv = 2.0 * (1.0 - (-gt).exp()) * (-0.5 * gt).exp() / (1.0 - (-gc2).exp()) - 1.0;
            1.0 / inv
        }
    }
}

/// Langevin drive strength `K_p` that enforces the thermal-equilibrium stored
/// energy of the mode.
pub fn langevin_strength(res: &HoResonator) -> f64 {
    let gt = res.gamma_total() * res.tau;
    let gc2 = 2.0 * res.gamma_c * res.tau;
    gc2.exp() * (2.0 * (1.0 - (-gt).exp()) * (-0.5 * gt).exp() - (1.0 - (-gc2).exp()))
}

/// Intra-cavity field magnitude at the atom location per √(input power),
/// `K` (V·m⁻¹·W⁻¹ᐟ²), at detuning `δω` from resonance.
pub fn field_per_sqrt_power(res: &HoResonator, delta_omega: f64, form: ModelForm) -> f64 {
    let h_l = lorentzian(delta_omega, resonance_bandwidth(res));
    let k_sq = match form {
        ModelForm::Approximate => {
            2.0 * res.gamma_c / res.gamma_total().powi(2) * (res.tau_g / res.tau)
                * res.k_u.powi(2)
                * h_l
        }
        ModelForm::Exact => {
            let gt = res.gamma_total() * res.tau;
            let gc2 = 2.0 * res.gamma_c * res.tau;
            res.tau_g * (1.0 - (-gc2).exp()) / (1.0 - (-gt).exp()).powi(2) * res.k_u.powi(2) * h_l
        }
    };
    k_sq.sqrt()
}

/// Input-referred noise-equivalent power (W/Hz).
///
/// Returns `+∞` when the sensor has intrinsic noise but the resonator no
/// longer responds (`K = 0`, e.g. infinite detuning): the receiver is
/// out-of-band there.
pub fn ho_nep(
    res: &HoResonator,
    env: &HoEnvironment,
    sensor: &SensorIntrinsic,
    delta_omega: f64,
    form: ModelForm,
) -> f64 {
    let theta_a = theta(res.f0, env.t_background, env.mode);
    let theta_p = theta(res.f0, env.t_physical, env.mode);
    let c = cooling_factor(res, form);
    let k = field_per_sqrt_power(res, delta_omega, form);
    let intrinsic = if sensor.nef0 == 0.0 {
        0.0
    } else if k == 0.0 {
        return f64::INFINITY;
    } else {
        (sensor.nef0 / k).powi(2)
    };
    theta_a + theta_p / c + intrinsic
}

/// Noise temperature `NEP/k_B` (K). The conventional receiver NET is obtained
/// with `t_background = 0`, which keeps the input vacuum fluctuations.
pub fn ho_net(
    res: &HoResonator,
    env: &HoEnvironment,
    sensor: &SensorIntrinsic,
    delta_omega: f64,
    form: ModelForm,
) -> f64 {
    ho_nep(res, env, sensor, delta_omega, form) / BOLTZMANN
}

fn theta(f: f64, t: f64, mode: crate::noisequanta::DetectionMode) -> f64 {
    noise_quantum(&NoiseEnvironment::new(f, t, mode).expect("validated"))
}

/// Coupling rate minimizing the NEP at fixed `γ_i`.
///
/// Starts from the closed form
/// `γ_c = γ_i sqrt(1 + 2Θ(f,T_p)(τ_g/τ)K_U²H_L/(γ_i NEF₀²))` (derived from
/// the first-order model) and refines it by golden-section minimization of
/// [`ho_nep`] over `[closed/3, 3·closed]` in the requested form.
///
/// Returns `+∞` when `NEF₀ = 0`: the first-order model then has no interior
/// optimum and wants maximal overcoupling (see the waveguide model for the
/// physical saturation).
pub fn optimal_coupling(
    res: &HoResonator,
    env: &HoEnvironment,
    sensor: &SensorIntrinsic,
    delta_omega: f64,
    form: ModelForm,
) -> f64 {
    if sensor.nef0 == 0.0 {
        return f64::INFINITY;
    }
    let theta_p = theta(res.f0, env.t_physical, env.mode);
    let h_l = lorentzian(delta_omega, resonance_bandwidth(res));
    let drive = 2.0 * theta_p * (res.tau_g / res.tau) * res.k_u.powi(2) * h_l
        / (res.gamma_i * sensor.nef0.powi(2));
    let closed = res.gamma_i * (1.0 + drive).sqrt();

    let nep_at = |gamma_c: f64| ho_nep(&res.with_gamma_c(gamma_c), env, sensor, delta_omega, form);
    let (refined, f_refined) = golden_section_min(nep_at, closed / 3.0, closed * 3.0, 1e-6);
    if f_refined <= nep_at(closed) {
        refined
    } else {
        closed
    }
}

/// Complex input reflection coefficient at detuning `δω`:
/// `Γ_in = ((1−C)/(1+C) + i·2Q_ℓΔ) / (1 + i·2Q_ℓΔ)` with `Δ = δω/ω₀` and
/// `Q_ℓ = ω₀/(2γ)`.
pub fn input_reflection(res: &HoResonator, delta_omega: f64) -> Complex64 {
    let omega0 = 2.0 * std::f64::consts::PI * res.f0;
    let q_loaded = omega0 / (2.0 * res.gamma_total());
    let c = res.coupling_ratio();
    let x = 2.0 * q_loaded * delta_omega / omega0;
    let num = Complex64::new((1.0 - c) / (1.0 + c), x);
    let den = Complex64::new(1.0, x);
    num / den
}

/// Stored-energy spectral densities at detuning `δω`, in J/(rad/s), normalized
/// per longitudinal mode so that in thermal equilibrium (`T_A = T_p = T`)
/// `∫ w_th dδω = Θ(f, T)` exactly.
#[derive(Debug, Clone, Copy)]
pub struct EnergySpectra {
    /// Signal-related energy density for the supplied input PSD.
    pub w_sig: f64,
    /// Thermal + vacuum energy density from input background and resonator.
    pub w_th: f64,
    /// Intrinsic sensor noise floor referred to stored energy (δω-independent).
    pub w_0: f64,
}

/// Computes the three stored-energy spectra of the driven, thermally loaded
/// resonator. Uses the exact round-trip forms; `input_psd` is in W/Hz.
pub fn stored_energy_spectra(
    res: &HoResonator,
    env: &HoEnvironment,
    sensor: &SensorIntrinsic,
    input_psd: f64,
    delta_omega: f64,
) -> EnergySpectra {
    let gt = res.gamma_total() * res.tau;
    let gc2 = 2.0 * res.gamma_c * res.tau;
    let h_l = lorentzian(delta_omega, resonance_bandwidth(res));
    let per_mode = res.tau / (2.0 * std::f64::consts::PI);
    let shape = h_l / (1.0 - (-gt).exp()).powi(2);

    let theta_a = theta(res.f0, env.t_background, env.mode);
    let theta_p = theta(res.f0, env.t_physical, env.mode);

    let coupled = (1.0 - (-gc2).exp()) * shape;
    let internal = (-gc2).exp() * langevin_strength(res) * shape;

    let w_sig = per_mode * coupled * input_psd;
    let w_th = per_mode * (coupled * theta_a + internal * theta_p);
    let w_0 = if res.k_u > 0.0 {
        (res.tau / res.tau_g) * sensor.nef0.powi(2)
            / (2.0 * std::f64::consts::PI * res.k_u.powi(2))
    } else {
        f64::INFINITY
    };
    EnergySpectra { w_sig, w_th, w_0 }
}

/// Intrinsic NEF₀ at which the optimally coupled resonator stops improving on
/// the bare free-space sensor.
///
/// Both configurations share the same input vacuum floor, so the comparison
/// is between excess noises: the break-even solves
/// `Λ²(NEP_min(NEF₀) − Θ(f,0)) = NEF₀²`. Uses the first-order form, since the
/// optimum sits at extreme overcoupling for small NEF₀.
pub fn break_even_nef0(res: &HoResonator, env: &HoEnvironment, gain: AntennaGain) -> Result<f64> {
    let lambda_sq = lambda_coeff(res.f0, gain)?.powi(2);
    let floor = noise_quantum_vacuum(res.f0, env.mode);
    let excess = |log_nef0: f64| {
        let nef0 = log_nef0.exp();
        let sensor = SensorIntrinsic { nef0 };
        let gc = optimal_coupling(res, env, &sensor, 0.0, ModelForm::Approximate);
        let nep = ho_nep(&res.with_gamma_c(gc), env, &sensor, 0.0, ModelForm::Approximate);
        (nep - floor) - nef0 * nef0 / lambda_sq
    };
    let log_nef0 = bisect(excess, (1e-12_f64).ln(), (1e-3_f64).ln(), 1e-9)?;
    Ok(log_nef0.exp())
}

/// Brute-force optimum of the NEP over a log grid in `γ_c`; used as an oracle
/// for [`optimal_coupling`] and exposed for sweep outputs.
pub fn coupling_grid_argmin(
    res: &HoResonator,
    env: &HoEnvironment,
    sensor: &SensorIntrinsic,
    delta_omega: f64,
    form: ModelForm,
    gamma_c_range: (f64, f64),
    points: usize,
) -> f64 {
    let (lo, hi) = gamma_c_range;
    let step = (hi / lo).ln() / (points - 1) as f64;
    let grid: Vec<f64> = (0..points).map(|i| lo * (step * i as f64).exp()).collect();
    let neps: Vec<f64> = grid
        .iter()
        .map(|&gc| ho_nep(&res.with_gamma_c(gc), env, sensor, delta_omega, form))
        .collect();
    grid[argmin(&neps)]
}

//! JSON run-configuration documents. All quantities SI (Hz, m, K, rad/s,
//! V·m⁻¹·Hz⁻¹ᐟ²); every field has a documented default. Unknown keys are
//! rejected so typos fail loudly before any computation.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use rydberg_noise::noisequanta::DetectionMode;

fn default_true() -> bool {
    true
}

fn default_wr90() -> Option<WaveguideDims> {
    Some(WaveguideDims {
        a_m: 22.86e-3,
        b_m: 10.16e-3,
        sigma_s_m: 25e6,
    })
}

pub fn detection_mode(name: &str) -> Result<DetectionMode> {
    match name {
        "homodyne" => Ok(DetectionMode::Homodyne),
        "heterodyne" => Ok(DetectionMode::Heterodyne),
        other => bail!("mode must be `homodyne` or `heterodyne`, got `{other}`"),
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsConfig {
    /// Sweep start (Hz).
    #[serde(default = "LimitsConfig::default_f_min")]
    pub f_min_hz: f64,
    /// Sweep end (Hz).
    #[serde(default = "LimitsConfig::default_f_max")]
    pub f_max_hz: f64,
    /// Log-spaced sample count.
    #[serde(default = "LimitsConfig::default_points")]
    pub points: usize,
    /// Background temperature (K).
    #[serde(default = "LimitsConfig::default_temperature")]
    pub temperature_k: f64,
}

impl LimitsConfig {
    fn default_f_min() -> f64 {
        1e9
    }
    fn default_f_max() -> f64 {
        1e13
    }
    fn default_points() -> usize {
        121
    }
    fn default_temperature() -> f64 {
        290.0
    }
}

impl Default for LimitsConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveguideDims {
    /// Broad wall (m).
    pub a_m: f64,
    /// Narrow wall (m).
    pub b_m: f64,
    /// Wall bulk conductivity (S/m).
    #[serde(default = "WaveguideDims::default_sigma")]
    pub sigma_s_m: f64,
}

impl WaveguideDims {
    fn default_sigma() -> f64 {
        25e6
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoConfig {
    /// Resonance frequency (Hz).
    #[serde(default = "HoConfig::default_f0")]
    pub f0_hz: f64,
    /// Intrinsic quality factor.
    #[serde(default = "HoConfig::default_qi")]
    pub q_i: f64,
    /// Phase round-trip time (s); defaults to 1/f0.
    #[serde(default)]
    pub tau_s: Option<f64>,
    /// Group/phase delay ratio; defaults from `waveguide`, else 1.
    #[serde(default)]
    pub tau_g_over_tau: Option<f64>,
    /// Mode field constant (V·m⁻¹·J⁻¹ᐟ²); defaults from `waveguide`.
    #[serde(default)]
    pub k_u: Option<f64>,
    /// Rectangular-guide cross-section for analytic constants; defaults to
    /// WR-90.
    #[serde(default = "default_wr90")]
    pub waveguide: Option<WaveguideDims>,
    /// Free-space intrinsic sensitivity (V·m⁻¹·Hz⁻¹ᐟ²).
    #[serde(default = "HoConfig::default_nef0")]
    pub nef0: f64,
    /// Resonator physical temperature (K).
    #[serde(default = "HoConfig::default_t_physical")]
    pub t_physical_k: f64,
    /// Input background temperature (K).
    #[serde(default)]
    pub t_background_k: f64,
    /// `homodyne` or `heterodyne`.
    #[serde(default = "HoConfig::default_mode")]
    pub mode: String,
    /// `approximate` or `exact` resonator response.
    #[serde(default = "HoConfig::default_form")]
    pub form: String,
    /// Coupling-ratio sweep bounds γ_c/γ_i and sample count.
    #[serde(default = "HoConfig::default_ratio_min")]
    pub ratio_min: f64,
    #[serde(default = "HoConfig::default_ratio_max")]
    pub ratio_max: f64,
    #[serde(default = "HoConfig::default_points")]
    pub points: usize,
    /// Antenna gain for NEF conversion.
    #[serde(default = "HoConfig::default_gain")]
    pub gain: f64,
}

impl HoConfig {
    fn default_f0() -> f64 {
        10e9
    }
    fn default_qi() -> f64 {
        2000.0
    }
    fn default_nef0() -> f64 {
        1.25e-6
    }
    fn default_t_physical() -> f64 {
        290.0
    }
    fn default_mode() -> String {
        "heterodyne".into()
    }
    fn default_form() -> String {
        "approximate".into()
    }
    fn default_ratio_min() -> f64 {
        0.1
    }
    fn default_ratio_max() -> f64 {
        1e3
    }
    fn default_points() -> usize {
        61
    }
    fn default_gain() -> f64 {
        1.5
    }
}

impl Default for HoConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WgConfig {
    /// Signal frequency (Hz).
    #[serde(default = "WgConfig::default_f")]
    pub f_signal_hz: f64,
    /// Attenuation constant (Np/m); overrides `waveguide`.
    #[serde(default)]
    pub kappa_alpha_np_m: Option<f64>,
    /// Phase constant (rad/m); overrides `waveguide`.
    #[serde(default)]
    pub kappa_beta_rad_m: Option<f64>,
    /// Rectangular-guide dimensions for analytic κ_z and K_W; defaults to
    /// WR-90.
    #[serde(default = "default_wr90")]
    pub waveguide: Option<WaveguideDims>,
    /// Guide length (m).
    #[serde(default = "WgConfig::default_length")]
    pub length_m: f64,
    /// Coupling strength as γ_c/γ_i (converted to |S22|); 1e6 (strong
    /// overcoupling) when neither this nor `s22_mag` is given.
    #[serde(default)]
    pub coupling_ratio: Option<f64>,
    /// Coupling strength as |S22| directly.
    #[serde(default)]
    pub s22_mag: Option<f64>,
    /// S22 phase (rad); defaults to the resonant condition.
    #[serde(default)]
    pub s22_phase_rad: Option<f64>,
    /// Termination reflection [Re, Im].
    #[serde(default = "WgConfig::default_gamma_load")]
    pub gamma_load: [f64; 2],
    /// Transverse mode constant (V·m⁻¹·W⁻¹ᐟ²); defaults from `waveguide`.
    #[serde(default)]
    pub k_w: Option<f64>,
    /// Wall temperature (K).
    #[serde(default = "WgConfig::default_t")]
    pub t_wall_k: f64,
    /// Load temperature (K).
    #[serde(default = "WgConfig::default_t")]
    pub t_load_k: f64,
    /// Input background temperature (K).
    #[serde(default)]
    pub t_background_k: f64,
    /// Free-space intrinsic sensitivity (V·m⁻¹·Hz⁻¹ᐟ²).
    #[serde(default)]
    pub nef0: f64,
    /// `homodyne` or `heterodyne`.
    #[serde(default = "WgConfig::default_mode")]
    pub mode: String,
    /// `transverse` or `longitudinal` sensed field component.
    #[serde(default = "WgConfig::default_component")]
    pub field_component: String,
    /// Positions sampled along the guide.
    #[serde(default = "WgConfig::default_z_points")]
    pub z_points: usize,
    /// Antenna gain for NEF conversion.
    #[serde(default = "WgConfig::default_gain")]
    pub gain: f64,
}

impl WgConfig {
    fn default_f() -> f64 {
        10e9
    }
    fn default_length() -> f64 {
        17.85e-3
    }
    fn default_gamma_load() -> [f64; 2] {
        [-1.0, 0.0]
    }
    fn default_t() -> f64 {
        290.0
    }
    fn default_mode() -> String {
        "heterodyne".into()
    }
    fn default_component() -> String {
        "transverse".into()
    }
    fn default_z_points() -> usize {
        201
    }
    fn default_gain() -> f64 {
        1.5
    }
}

impl Default for WgConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeConfig {
    #[serde(default)]
    pub ho: Option<HoConfig>,
    #[serde(default)]
    pub wg: Option<WgConfig>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFileConfig {
    /// Dipole table path (CSV: n, f_transition_hz, mu_d_cm, tau_s_s, tau_p_s).
    #[serde(default = "SweepFileConfig::default_dipole")]
    pub dipole_csv: String,
    /// LNA table path (CSV: frequency_hz, noise_temperature_k, technology, citation).
    #[serde(default = "SweepFileConfig::default_lna")]
    pub lna_csv: String,
    /// Reference sensitivity (V·m⁻¹·Hz⁻¹ᐟ²).
    #[serde(default = "SweepFileConfig::default_nef0")]
    pub nef0_ref: f64,
    /// Principal quantum number of the reference.
    #[serde(default = "SweepFileConfig::default_n_ref")]
    pub n_ref: u32,
    /// Reference interaction length (m).
    #[serde(default = "SweepFileConfig::default_length")]
    pub length_ref_m: f64,
    /// Reference beam waist (m).
    #[serde(default = "SweepFileConfig::default_waist")]
    pub waist_ref_m: f64,
    /// Cavity wall conductivity (S/m).
    #[serde(default = "SweepFileConfig::default_sigma")]
    pub sigma_s_m: f64,
    /// Cavity physical temperature (K).
    #[serde(default = "SweepFileConfig::default_t")]
    pub t_physical_k: f64,
    /// `homodyne` or `heterodyne`.
    #[serde(default = "SweepFileConfig::default_mode")]
    pub mode: String,
    /// Antenna gain for conversions.
    #[serde(default = "SweepFileConfig::default_gain")]
    pub gain: f64,
    /// `extrapolate` or `lindblad` NEF₀ source.
    #[serde(default = "SweepFileConfig::default_source")]
    pub source: String,
}

impl SweepFileConfig {
    fn default_dipole() -> String {
        "data/rb85_dipole.csv".into()
    }
    fn default_lna() -> String {
        "data/lna_survey.csv".into()
    }
    fn default_nef0() -> f64 {
        1.25e-6
    }
    fn default_n_ref() -> u32 {
        70
    }
    fn default_length() -> f64 {
        70e-3
    }
    fn default_waist() -> f64 {
        0.5e-3
    }
    fn default_sigma() -> f64 {
        25e6
    }
    fn default_t() -> f64 {
        290.0
    }
    fn default_mode() -> String {
        "heterodyne".into()
    }
    fn default_gain() -> f64 {
        1.5
    }
    fn default_source() -> String {
        "extrapolate".into()
    }
}

impl Default for SweepFileConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LindbladConfig {
    /// Probe Rabi-frequency bounds (rad/s).
    #[serde(default = "LindbladConfig::default_op_min")]
    pub omega_probe_min_rad_s: f64,
    #[serde(default = "LindbladConfig::default_op_max")]
    pub omega_probe_max_rad_s: f64,
    /// Coupling Rabi-frequency bounds (rad/s).
    #[serde(default = "LindbladConfig::default_oc_min")]
    pub omega_coupling_min_rad_s: f64,
    #[serde(default = "LindbladConfig::default_oc_max")]
    pub omega_coupling_max_rad_s: f64,
    /// Contour grid points per axis.
    #[serde(default = "LindbladConfig::default_grid")]
    pub grid_points: usize,
    /// RF transition dipole moment (C·m).
    #[serde(default = "LindbladConfig::default_mu_rf")]
    pub mu_rf_cm: f64,
    /// Probe transition dipole moment (C·m).
    #[serde(default = "LindbladConfig::default_mu_probe")]
    pub mu_probe_cm: f64,
    /// Participating atomic density (m⁻³).
    #[serde(default = "LindbladConfig::default_density")]
    pub density_m3: f64,
    /// Added per-state dephasing (rad/s).
    #[serde(default = "LindbladConfig::default_dephasing")]
    pub dephasing_rad_s: f64,
    /// Cell length (m).
    #[serde(default = "LindbladConfig::default_length")]
    pub cell_length_m: f64,
    /// Probe beam waist (m).
    #[serde(default = "LindbladConfig::default_waist")]
    pub beam_waist_m: f64,
    /// Velocity averaging on/off and sample count.
    #[serde(default = "default_true")]
    pub doppler: bool,
    #[serde(default = "LindbladConfig::default_doppler_samples")]
    pub doppler_samples: usize,
    /// Add beam-transit dephasing.
    #[serde(default)]
    pub transit_broadening: bool,
}

impl LindbladConfig {
    fn default_op_min() -> f64 {
        std::f64::consts::TAU * 2e6
    }
    fn default_op_max() -> f64 {
        std::f64::consts::TAU * 20e6
    }
    fn default_oc_min() -> f64 {
        std::f64::consts::TAU * 0.5e6
    }
    fn default_oc_max() -> f64 {
        std::f64::consts::TAU * 5e6
    }
    fn default_grid() -> usize {
        21
    }
    fn default_mu_rf() -> f64 {
        4.04e-26
    }
    fn default_mu_probe() -> f64 {
        1.46e-29
    }
    fn default_density() -> f64 {
        1.1e16
    }
    fn default_dephasing() -> f64 {
        std::f64::consts::TAU * 100e3
    }
    fn default_length() -> f64 {
        70e-3
    }
    fn default_waist() -> f64 {
        0.5e-3
    }
    fn default_doppler_samples() -> usize {
        121
    }
}

impl Default for LindbladConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

/// Loads a config document, or the type's defaults when no path is given.
pub fn load_config<T: serde::de::DeserializeOwned + Default>(path: Option<&str>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {p}"))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {p}"))
        }
    }
}

/// Canonical serialization used for the reproducibility hash.
pub fn canonical_json<T: Serialize>(cfg: &T) -> String {
    serde_json::to_string(cfg).expect("config serializes")
}

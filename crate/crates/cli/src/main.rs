//! `rydnoise` — noise temperatures and noise-equivalent fields of
//! Rydberg-atom microwave receivers.

mod config;
mod emit;
mod units;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use config::{
    canonical_json, detection_mode, load_config, HoConfig, LimitsConfig, LindbladConfig,
    OptimizeConfig, SweepFileConfig, WgConfig,
};
use emit::{metadata_header, num, write_output};
use rydberg_noise::constants::BOLTZMANN;
use rydberg_noise::geometry::{te101_constants, te10_propagation, RectWaveguide};
use rydberg_noise::homodel::{
    cooling_factor, field_per_sqrt_power, ho_nep, input_reflection, optimal_coupling,
    HoEnvironment, HoResonator, ModelForm, SensorIntrinsic,
};
use rydberg_noise::lindblad::{
    local_minima_count, optimize_rabi, transit_dephasing, DopplerAveraging, FourLevelSystem,
};
use rydberg_noise::noisequanta::{
    lambda_coeff, nef_extrinsic_thermal, nef_extrinsic_vacuum, nef_from_temperature,
    temperature_from_nef, thermal_quantum_crossover, AntennaGain, DetectionMode, NoiseEnvironment,
};
use rydberg_noise::pattern::{effective_gain, BeamGeometry};
use rydberg_noise::survey::{
    load_dipole_csv, load_lna_csv, run_sweep, sweep_csv, Nef0Source, SweepConfig, SweepReference,
};
use rydberg_noise::wgmodel::{
    optimal_design, resonant_s22, wg_nep, FieldComponent, WaveguideResonator,
};

#[derive(Parser)]
#[command(
    name = "rydnoise",
    version,
    about = "Noise modeling for free-space and cavity-enhanced Rydberg microwave receivers",
    after_help = "Config files are JSON documents with SI units; run a subcommand with --help \
                  for its keys. Outputs are CSV with a `#` metadata header."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct IoArgs {
    /// JSON config file; defaults apply when omitted.
    #[arg(long)]
    config: Option<String>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<String>,
    /// Output format (only `csv`).
    #[arg(long, default_value = "csv")]
    format: String,
}

impl IoArgs {
    fn check(&self) -> Result<()> {
        if self.format != "csv" {
            bail!("unsupported output format `{}`", self.format);
        }
        Ok(())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Free-space NEF limit curves versus frequency.
    ///
    /// Config keys: f_min_hz (1e9), f_max_hz (1e13), points (121),
    /// temperature_k (290).
    Limits {
        #[command(flatten)]
        io: IoArgs,
    },
    /// Convert between NEF [V/m/√Hz] and noise temperature [K].
    ///
    /// Values accept unit suffixes: 1.25uV, 100K, 10GHz.
    Convert {
        /// NEF to convert to a temperature.
        #[arg(long, conflicts_with = "temperature")]
        nef: Option<String>,
        /// Noise temperature to convert to an NEF.
        #[arg(long)]
        temperature: Option<String>,
        /// Signal frequency.
        #[arg(long)]
        frequency: String,
        /// Antenna gain.
        #[arg(long, default_value_t = 1.5)]
        gain: f64,
    },
    /// Effective gain of an extended atomic ensemble.
    Gain {
        /// Interaction length (suffixes allowed).
        #[arg(long)]
        length: String,
        /// Free-space wavelength.
        #[arg(long)]
        wavelength: String,
        /// LO polar angle (rad); broadside when omitted.
        #[arg(long)]
        lo_theta: Option<f64>,
        /// LO azimuth (rad); broadside when omitted.
        #[arg(long)]
        lo_phi: Option<f64>,
    },
    /// Port-coupled resonator noise versus coupling strength
    /// (harmonic-oscillator model).
    ///
    /// Config keys: f0_hz (1e10), q_i (2000), tau_s (1/f0),
    /// tau_g_over_tau, k_u, waveguide{a_m,b_m,sigma_s_m}, nef0 (1.25e-6),
    /// t_physical_k (290), t_background_k (0), mode (heterodyne),
    /// form (approximate), ratio_min (0.1), ratio_max (1e3), points (61),
    /// gain (1.5).
    Ho {
        #[command(flatten)]
        io: IoArgs,
        /// Add a single-sideband-equivalent NET column (NET/2).
        #[arg(long)]
        ssb: bool,
    },
    /// Spatially resolved waveguide-model noise along the structure.
    ///
    /// Config keys: f_signal_hz (1e10), kappa_alpha_np_m, kappa_beta_rad_m,
    /// waveguide{a_m,b_m,sigma_s_m}, length_m (0.01785), coupling_ratio,
    /// s22_mag, s22_phase_rad (resonant), gamma_load ([-1,0]), k_w,
    /// t_wall_k (290), t_load_k (290), t_background_k (0), nef0 (0),
    /// mode (heterodyne), field_component (transverse), z_points (201),
    /// gain (1.5).
    Wg {
        #[command(flatten)]
        io: IoArgs,
        /// Add a single-sideband-equivalent NET column (NET/2).
        #[arg(long)]
        ssb: bool,
    },
    /// Optimal coupling (ho) or optimal coupling and atom position (wg).
    ///
    /// Config: {"ho": {...}} or {"wg": {...}} with the same keys as the
    /// ho/wg subcommands.
    Optimize {
        #[command(flatten)]
        io: IoArgs,
    },
    /// Frequency sweep across the dipole table with cavity sizing,
    /// optimal-coupling waveguide noise and LNA overlay.
    ///
    /// Config keys: dipole_csv, lna_csv, nef0_ref (1.25e-6), n_ref (70),
    /// length_ref_m (0.07), waist_ref_m (5e-4), sigma_s_m (25e6),
    /// t_physical_k (290), mode (heterodyne), gain (1.5),
    /// source (extrapolate|lindblad).
    Sweep {
        #[command(flatten)]
        io: IoArgs,
    },
    /// Shot-noise-limited NEF₀ contour over probe/coupling Rabi
    /// frequencies (master-equation model).
    ///
    /// Config keys: omega_probe_min/max_rad_s, omega_coupling_min/max_rad_s,
    /// grid_points (21), mu_rf_cm, mu_probe_cm, density_m3, dephasing_rad_s,
    /// cell_length_m, beam_waist_m, doppler (true), doppler_samples (121),
    /// transit_broadening (false).
    Lindblad {
        #[command(flatten)]
        io: IoArgs,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Limits { io } => cmd_limits(io),
        Command::Convert {
            nef,
            temperature,
            frequency,
            gain,
        } => cmd_convert(nef, temperature, &frequency, gain),
        Command::Gain {
            length,
            wavelength,
            lo_theta,
            lo_phi,
        } => cmd_gain(&length, &wavelength, lo_theta, lo_phi),
        Command::Ho { io, ssb } => cmd_ho(io, ssb),
        Command::Wg { io, ssb } => cmd_wg(io, ssb),
        Command::Optimize { io } => cmd_optimize(io),
        Command::Sweep { io } => cmd_sweep(io),
        Command::Lindblad { io } => cmd_lindblad(io),
    }
}

fn cmd_limits(io: IoArgs) -> Result<()> {
    io.check()?;
    let cfg: LimitsConfig = load_config(io.config.as_deref())?;
    if !(cfg.f_min_hz > 0.0 && cfg.f_max_hz > cfg.f_min_hz && cfg.points >= 2) {
        bail!("limits: need 0 < f_min_hz < f_max_hz and points >= 2");
    }
    let mut out = metadata_header("limits", &canonical_json(&cfg));
    out.push_str(
        "f_hz,nef_thermal_homodyne,nef_quantum_homodyne,nef_total_homodyne,\
         nef_thermal_heterodyne,nef_quantum_heterodyne,nef_total_heterodyne\n",
    );
    let step = (cfg.f_max_hz / cfg.f_min_hz).ln() / (cfg.points - 1) as f64;
    for i in 0..cfg.points {
        let f = cfg.f_min_hz * (step * i as f64).exp();
        let mut cols = vec![num(f)];
        for mode in [DetectionMode::Homodyne, DetectionMode::Heterodyne] {
            let env = NoiseEnvironment::new(f, cfg.temperature_k, mode)
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            let thermal = nef_extrinsic_thermal(&env);
            let quantum = nef_extrinsic_vacuum(f, mode);
            cols.push(num(thermal));
            cols.push(num(quantum));
            cols.push(num((thermal * thermal + quantum * quantum).sqrt()));
        }
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    if cfg.temperature_k > 0.0 {
        for mode in [DetectionMode::Homodyne, DetectionMode::Heterodyne] {
            if let Ok(f) = thermal_quantum_crossover(cfg.temperature_k, mode) {
                eprintln!(
                    "thermal/quantum crossover ({}): {:.4e} Hz",
                    match mode {
                        DetectionMode::Homodyne => "homodyne",
                        DetectionMode::Heterodyne => "heterodyne",
                    },
                    f
                );
            }
        }
    }
    write_output(io.out.as_deref(), &out)
}

fn cmd_convert(nef: Option<String>, temperature: Option<String>, frequency: &str, gain: f64) -> Result<()> {
    let f = units::parse_quantity(frequency)?;
    let gain = AntennaGain::new(gain).map_err(|e| anyhow::anyhow!("{e}"))?;
    match (nef, temperature) {
        (Some(nef), None) => {
            let nef = units::parse_quantity(&nef)?;
            let t = temperature_from_nef(nef, f, gain).map_err(|e| anyhow::anyhow!("{e}"))?;
            println!(
                "NEF {:.6e} V/m/sqrt(Hz) at {:.6e} Hz (G = {}) -> noise temperature {:.6e} K",
                nef,
                f,
                gain.value(),
                t
            );
        }
        (None, Some(t)) => {
            let t = units::parse_quantity(&t)?;
            let nef = nef_from_temperature(t, f, gain).map_err(|e| anyhow::anyhow!("{e}"))?;
            println!(
                "noise temperature {:.6e} K at {:.6e} Hz (G = {}) -> NEF {:.6e} V/m/sqrt(Hz)",
                t,
                f,
                gain.value(),
                nef
            );
        }
        _ => bail!("convert: pass exactly one of --nef or --temperature"),
    }
    Ok(())
}

fn cmd_gain(length: &str, wavelength: &str, lo_theta: Option<f64>, lo_phi: Option<f64>) -> Result<()> {
    let length = units::parse_quantity(length)?;
    let wavelength = units::parse_quantity(wavelength)?;
    let geom = match (lo_theta, lo_phi) {
        (Some(t), Some(p)) => BeamGeometry::new(length, wavelength, t, p),
        (None, None) => BeamGeometry::broadside(length, wavelength),
        _ => bail!("gain: pass both --lo-theta and --lo-phi or neither"),
    }
    .map_err(|e| anyhow::anyhow!("{e}"))?;
    let g = effective_gain(&geom).map_err(|e| anyhow::anyhow!("{e}"))?;
    println!(
        "L/lambda0 = {:.6}, G = {:.6}, extrinsic-NEF correction 1/sqrt(2G/3) = {:.6}",
        geom.electrical_length(),
        g,
        1.0 / (2.0 * g / 3.0).sqrt()
    );
    Ok(())
}

fn model_form(name: &str) -> Result<ModelForm> {
    match name {
        "approximate" => Ok(ModelForm::Approximate),
        "exact" => Ok(ModelForm::Exact),
        other => bail!("form must be `approximate` or `exact`, got `{other}`"),
    }
}

struct HoSetup {
    resonator: HoResonator,
    env: HoEnvironment,
    sensor: SensorIntrinsic,
    form: ModelForm,
    gain: AntennaGain,
}

fn ho_setup(cfg: &HoConfig) -> Result<HoSetup> {
    let mode = detection_mode(&cfg.mode)?;
    let form = model_form(&cfg.form)?;
    let (k_u, tau_ratio) = match (&cfg.waveguide, cfg.k_u) {
        (_, Some(k_u)) => (k_u, cfg.tau_g_over_tau.unwrap_or(1.0)),
        (Some(wg), None) => {
            let guide = RectWaveguide::new(wg.a_m, wg.b_m, wg.sigma_s_m, Complex64::new(1.0, 0.0))
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            let c = te101_constants(&guide, cfg.f0_hz).map_err(|e| anyhow::anyhow!("{e}"))?;
            (c.k_u, cfg.tau_g_over_tau.unwrap_or(c.tau_ratio))
        }
        (None, None) => bail!("ho: provide k_u or a waveguide cross-section"),
    };
    let resonator = HoResonator::from_quality_factors(
        cfg.f0_hz,
        cfg.q_i,
        cfg.q_i, // placeholder; per-row coupling applied by caller
        cfg.tau_s,
        Some(tau_ratio),
        k_u,
    )
    .map_err(|e| anyhow::anyhow!("{e}"))?;
    let env = HoEnvironment::new(cfg.t_background_k, cfg.t_physical_k, mode)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let sensor = SensorIntrinsic::new(cfg.nef0).map_err(|e| anyhow::anyhow!("{e}"))?;
    let gain = AntennaGain::new(cfg.gain).map_err(|e| anyhow::anyhow!("{e}"))?;
    Ok(HoSetup {
        resonator,
        env,
        sensor,
        form,
        gain,
    })
}

fn cmd_ho(io: IoArgs, ssb: bool) -> Result<()> {
    io.check()?;
    let cfg: HoConfig = load_config(io.config.as_deref())?;
    if !(cfg.ratio_min > 0.0 && cfg.ratio_max > cfg.ratio_min && cfg.points >= 2) {
        bail!("ho: need 0 < ratio_min < ratio_max and points >= 2");
    }
    let setup = ho_setup(&cfg)?;
    let lambda = lambda_coeff(cfg.f0_hz, setup.gain).map_err(|e| anyhow::anyhow!("{e}"))?;

    let mut out = metadata_header("ho", &canonical_json(&cfg));
    out.push_str("coupling_ratio,cooling_factor,k_v_per_m_sqrtw,enhancement,nep_w_per_hz,net_k,");
    if ssb {
        out.push_str("net_ssb_k,");
    }
    out.push_str("nef_v_per_m_sqrthz,reflection_mag,optimal\n");

    let write_row = |ratio: f64, optimal: bool, out: &mut String, warned: &mut bool| {
        let res = setup.resonator.with_gamma_c(ratio * setup.resonator.gamma_i);
        if !res.high_q_valid() && !*warned {
            eprintln!(
                "warning: round-trip loss gamma*tau = {:.3e} exceeds 0.1; single-mode model is \
                 inaccurate at coupling ratio {ratio:.3e}",
                res.gamma_total() * res.tau
            );
            *warned = true;
        }
        let nep = ho_nep(&res, &setup.env, &setup.sensor, 0.0, setup.form);
        let net = nep / BOLTZMANN;
        let k = field_per_sqrt_power(&res, 0.0, setup.form);
        let mut cols = vec![
            num(ratio),
            num(cooling_factor(&res, setup.form)),
            num(k),
            num(k / lambda),
            num(nep),
            num(net),
        ];
        if ssb {
            cols.push(num(0.5 * net));
        }
        cols.push(num(lambda * nep.sqrt()));
        cols.push(num(input_reflection(&res, 0.0).norm()));
        cols.push(if optimal { "1".into() } else { "0".into() });
        out.push_str(&cols.join(","));
        out.push('\n');
    };

    let mut warned = false;
    let step = (cfg.ratio_max / cfg.ratio_min).ln() / (cfg.points - 1) as f64;
    for i in 0..cfg.points {
        let ratio = cfg.ratio_min * (step * i as f64).exp();
        write_row(ratio, false, &mut out, &mut warned);
    }
    let gc_opt = optimal_coupling(&setup.resonator, &setup.env, &setup.sensor, 0.0, setup.form);
    if gc_opt.is_finite() {
        write_row(gc_opt / setup.resonator.gamma_i, true, &mut out, &mut warned);
    } else {
        eprintln!("warning: NEF0 = 0 has no finite optimal coupling (overcouple maximally)");
    }
    write_output(io.out.as_deref(), &out)
}

struct WgSetup {
    kappa: Complex64,
    k_w: f64,
    mode: DetectionMode,
    component: FieldComponent,
    gamma_load: Complex64,
    /// Analytic (K_U, τ_g/τ) when built from a rectangular guide.
    ho_reference: Option<(f64, f64)>,
}

fn wg_setup(cfg: &WgConfig) -> Result<WgSetup> {
    let mode = detection_mode(&cfg.mode)?;
    let component = match cfg.field_component.as_str() {
        "transverse" => FieldComponent::Transverse,
        "longitudinal" => FieldComponent::Longitudinal,
        other => bail!("field_component must be `transverse` or `longitudinal`, got `{other}`"),
    };
    let (kappa, k_w_auto, ho_reference) = match &cfg.waveguide {
        Some(wg) => {
            let guide = RectWaveguide::new(wg.a_m, wg.b_m, wg.sigma_s_m, Complex64::new(1.0, 0.0))
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            let kappa = te10_propagation(&guide, cfg.f_signal_hz).map_err(|e| anyhow::anyhow!("{e}"))?;
            let omega = std::f64::consts::TAU * cfg.f_signal_hz;
            let z_wave = omega * rydberg_noise::constants::VACUUM_PERMEABILITY / kappa.im;
            let k_w = (4.0 * z_wave / (wg.a_m * wg.b_m)).sqrt();
            let c = te101_constants(&guide, cfg.f_signal_hz).map_err(|e| anyhow::anyhow!("{e}"))?;
            (kappa, Some(k_w), Some((c.k_u, c.tau_ratio)))
        }
        None => {
            let (Some(alpha), Some(beta)) = (cfg.kappa_alpha_np_m, cfg.kappa_beta_rad_m) else {
                bail!("wg: provide kappa_alpha_np_m and kappa_beta_rad_m or a waveguide")
            };
            (Complex64::new(alpha, beta), None, None)
        }
    };
    let k_w = match cfg.k_w.or(k_w_auto) {
        Some(k) => k,
        None => bail!("wg: provide k_w or a waveguide cross-section"),
    };
    Ok(WgSetup {
        kappa,
        k_w,
        mode,
        component,
        gamma_load: Complex64::new(cfg.gamma_load[0], cfg.gamma_load[1]),
        ho_reference,
    })
}

fn s22_magnitude(cfg: &WgConfig, kappa: Complex64) -> Result<f64> {
    match (cfg.s22_mag, cfg.coupling_ratio) {
        (Some(mag), None) => {
            if !(0.0..=1.0).contains(&mag) {
                bail!("wg: s22_mag must be in [0, 1]");
            }
            Ok(mag)
        }
        (None, Some(ratio)) => {
            if ratio <= 0.0 {
                bail!("wg: coupling_ratio must be positive");
            }
            // gamma_i tau = 2 alpha L; |S22| = exp(-gamma_c tau).
            Ok((-(ratio * 2.0 * kappa.re * cfg.length_m)).exp())
        }
        // Default: strong overcoupling.
        (None, None) => Ok((-(1e6 * 2.0 * kappa.re * cfg.length_m)).exp()),
        _ => bail!("wg: s22_mag and coupling_ratio are mutually exclusive"),
    }
}

fn build_wg(cfg: &WgConfig, setup: &WgSetup, mag: f64) -> Result<WaveguideResonator> {
    let s22 = match cfg.s22_phase_rad {
        Some(phase) => Complex64::from_polar(mag, phase),
        None => resonant_s22(mag, setup.gamma_load, setup.kappa, cfg.length_m),
    };
    WaveguideResonator::new(
        setup.kappa,
        cfg.length_m,
        s22,
        setup.gamma_load,
        setup.k_w,
        cfg.t_wall_k,
        cfg.t_load_k,
        setup.component,
    )
    .map_err(|e| anyhow::anyhow!("{e}"))
}

fn cmd_wg(io: IoArgs, ssb: bool) -> Result<()> {
    io.check()?;
    let cfg: WgConfig = load_config(io.config.as_deref())?;
    if cfg.z_points < 2 {
        bail!("wg: z_points must be at least 2");
    }
    let setup = wg_setup(&cfg)?;
    let mag = s22_magnitude(&cfg, setup.kappa)?;
    let wg = build_wg(&cfg, &setup, mag)?;
    let sensor = SensorIntrinsic::new(cfg.nef0).map_err(|e| anyhow::anyhow!("{e}"))?;
    let gain = AntennaGain::new(cfg.gain).map_err(|e| anyhow::anyhow!("{e}"))?;
    let lambda = lambda_coeff(cfg.f_signal_hz, gain).map_err(|e| anyhow::anyhow!("{e}"))?;

    // Matching single-mode resonator for the comparison column.
    let ho = setup
        .ho_reference
        .map(|(k_u_max, tau_ratio)| -> Result<_> {
            let omega = std::f64::consts::TAU * cfg.f_signal_hz;
            let tau = 2.0 * cfg.length_m * setup.kappa.im / omega;
            let gamma_i = 2.0 * setup.kappa.re * cfg.length_m / tau;
            let gamma_c = if mag > 0.0 {
                -mag.ln() / tau
            } else {
                f64::INFINITY
            };
            if !gamma_c.is_finite() {
                return Ok(None);
            }
            let env = HoEnvironment::new(cfg.t_background_k, cfg.t_wall_k, setup.mode)
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            let res = HoResonator::new(cfg.f_signal_hz, gamma_i, gamma_c, tau, tau * tau_ratio, k_u_max)
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            if !res.high_q_valid() {
                eprintln!(
                    "warning: gamma*tau = {:.3e} exceeds 0.1; the single-mode comparison column \
                     is unreliable",
                    res.gamma_total() * res.tau
                );
            }
            Ok(Some((res, env, k_u_max)))
        })
        .transpose()?
        .flatten();

    let mut out = metadata_header("wg", &canonical_json(&cfg));
    out.push_str("z_m,z_over_l,inv_b_prime,inv_c_prime,k_prime_sq,nep_w_per_hz,net_k,");
    if ssb {
        out.push_str("net_ssb_k,");
    }
    out.push_str("nef_v_per_m_sqrthz");
    if ho.is_some() {
        out.push_str(",net_ho_k");
    }
    out.push('\n');

    for i in 0..cfg.z_points {
        let z = cfg.length_m * i as f64 / (cfg.z_points - 1) as f64;
        let b = wg_nep(&wg, cfg.f_signal_hz, setup.mode, cfg.t_background_k, &sensor, z)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        let net = b.nep / BOLTZMANN;
        let mut cols = vec![
            num(z),
            num(z / cfg.length_m),
            num(if b.b_prime.is_infinite() { 0.0 } else { 1.0 / b.b_prime }),
            num(if b.c_prime.is_infinite() { 0.0 } else { 1.0 / b.c_prime }),
            num(b.k_prime_sq),
            num(b.nep),
            num(net),
        ];
        if ssb {
            cols.push(num(0.5 * net));
        }
        cols.push(num(lambda * b.nep.sqrt()));
        if let Some((res, env, k_u_max)) = &ho {
            // Sample the standing-wave mode constant at z.
            let k_u_z = k_u_max * (setup.kappa.im * (cfg.length_m - z)).sin().abs();
            let res_z = HoResonator { k_u: k_u_z, ..*res };
            let nep_ho = ho_nep(&res_z, env, &sensor, 0.0, ModelForm::Approximate);
            cols.push(num(nep_ho / BOLTZMANN));
        }
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    write_output(io.out.as_deref(), &out)
}

fn cmd_optimize(io: IoArgs) -> Result<()> {
    io.check()?;
    let cfg: OptimizeConfig = load_config(io.config.as_deref())?;
    match (&cfg.ho, &cfg.wg) {
        (Some(ho_cfg), None) => {
            let setup = ho_setup(ho_cfg)?;
            let gc = optimal_coupling(&setup.resonator, &setup.env, &setup.sensor, 0.0, setup.form);
            if !gc.is_finite() {
                bail!("optimize: NEF0 = 0 has no finite optimal coupling in the single-mode model");
            }
            let res = setup.resonator.with_gamma_c(gc);
            let nep = ho_nep(&res, &setup.env, &setup.sensor, 0.0, setup.form);
            let lambda = lambda_coeff(ho_cfg.f0_hz, setup.gain).map_err(|e| anyhow::anyhow!("{e}"))?;
            let mut out = metadata_header("optimize", &canonical_json(&cfg));
            out.push_str(
                "gamma_c_opt_rad_s,coupling_ratio,net_min_k,nef_min_v_per_m_sqrthz,enhancement,\
                 reflection_mag\n",
            );
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                num(gc),
                num(gc / res.gamma_i),
                num(nep / BOLTZMANN),
                num(lambda * nep.sqrt()),
                num(field_per_sqrt_power(&res, 0.0, setup.form) / lambda),
                num(input_reflection(&res, 0.0).norm()),
            ));
            write_output(io.out.as_deref(), &out)
        }
        (None, Some(wg_cfg)) => {
            let setup = wg_setup(wg_cfg)?;
            let sensor = SensorIntrinsic::new(wg_cfg.nef0).map_err(|e| anyhow::anyhow!("{e}"))?;
            let gain = AntennaGain::new(wg_cfg.gain).map_err(|e| anyhow::anyhow!("{e}"))?;
            let lambda =
                lambda_coeff(wg_cfg.f_signal_hz, gain).map_err(|e| anyhow::anyhow!("{e}"))?;
            let family = |mag: f64| {
                build_wg(wg_cfg, &setup, mag).expect("family parameters validated up-front")
            };
            build_wg(wg_cfg, &setup, 0.5)?; // validate once before the closure runs
            let opt = optimal_design(
                &family,
                wg_cfg.f_signal_hz,
                setup.mode,
                wg_cfg.t_background_k,
                &sensor,
            )
            .map_err(|e| anyhow::anyhow!("{e}"))?;
            if opt.degenerate_z {
                eprintln!("warning: NEP is flat along the guide; reported z is arbitrary");
            }
            let gamma_i_tau = 2.0 * setup.kappa.re * wg_cfg.length_m;
            let ratio = if opt.s22_magnitude > 0.0 && gamma_i_tau > 0.0 {
                -opt.s22_magnitude.ln() / gamma_i_tau
            } else {
                f64::INFINITY
            };
            let mut out = metadata_header("optimize", &canonical_json(&cfg));
            out.push_str(
                "s22_mag_opt,coupling_ratio,z_opt_m,z_over_l,net_min_k,nef_min_v_per_m_sqrthz,\
                 degenerate_z\n",
            );
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                num(opt.s22_magnitude),
                num(ratio),
                num(opt.z),
                num(opt.z / wg_cfg.length_m),
                num(opt.nep / BOLTZMANN),
                num(lambda * opt.nep.sqrt()),
                u8::from(opt.degenerate_z),
            ));
            write_output(io.out.as_deref(), &out)
        }
        _ => bail!("optimize: config must contain exactly one of `ho` or `wg`"),
    }
}

fn cmd_sweep(io: IoArgs) -> Result<()> {
    io.check()?;
    let cfg: SweepFileConfig = load_config(io.config.as_deref())?;
    let dipoles = load_dipole_csv(std::path::Path::new(&cfg.dipole_csv))
        .map_err(|e| anyhow::anyhow!("{e}"))
        .with_context(|| format!("loading {}", cfg.dipole_csv))?;
    if dipoles.is_empty() {
        bail!("sweep: dipole table {} is empty", cfg.dipole_csv);
    }
    let lnas = load_lna_csv(std::path::Path::new(&cfg.lna_csv))
        .map_err(|e| anyhow::anyhow!("{e}"))
        .with_context(|| format!("loading {}", cfg.lna_csv))?;
    if lnas.is_empty() {
        eprintln!("warning: LNA table {} is empty", cfg.lna_csv);
    }
    let sweep_cfg = SweepConfig {
        reference: SweepReference {
            nef0: cfg.nef0_ref,
            n: cfg.n_ref,
            length: cfg.length_ref_m,
            waist: cfg.waist_ref_m,
        },
        wall_conductivity: cfg.sigma_s_m,
        t_physical: cfg.t_physical_k,
        mode: detection_mode(&cfg.mode)?,
        gain: cfg.gain,
        nef0_source: match cfg.source.as_str() {
            "extrapolate" => Nef0Source::Extrapolate,
            "lindblad" => Nef0Source::Lindblad,
            other => bail!("source must be `extrapolate` or `lindblad`, got `{other}`"),
        },
    };
    let output = run_sweep(&sweep_cfg, &dipoles, &lnas).map_err(|e| anyhow::anyhow!("{e}"))?;
    for (n, err) in &output.failures {
        eprintln!("warning: row n = {n} skipped: {err}");
    }
    let mut out = metadata_header("sweep", &canonical_json(&cfg));
    out.push_str(&sweep_csv(&output.rows));
    write_output(io.out.as_deref(), &out)
}

fn cmd_lindblad(io: IoArgs) -> Result<()> {
    io.check()?;
    let cfg: LindbladConfig = load_config(io.config.as_deref())?;
    let tau = std::f64::consts::TAU;
    let mut template = FourLevelSystem::rb85_defaults(tau * 9.8e6, tau * 1.8e6, tau * 5e6, cfg.mu_rf_cm);
    template.mu_probe = cfg.mu_probe_cm;
    template.density = cfg.density_m3;
    template.dephasing = cfg.dephasing_rad_s;
    template.cell_length = cfg.cell_length_m;
    template.beam_waist = cfg.beam_waist_m;
    if cfg.transit_broadening {
        template.dephasing += transit_dephasing(cfg.beam_waist_m, 300.0, 84.91 * 1.66054e-27);
    }
    if cfg.doppler {
        template.doppler = Some(DopplerAveraging {
            samples: cfg.doppler_samples,
            ..DopplerAveraging::rb85_300k()
        });
    }
    let opt = optimize_rabi(
        &template,
        (cfg.omega_probe_min_rad_s, cfg.omega_probe_max_rad_s),
        (cfg.omega_coupling_min_rad_s, cfg.omega_coupling_max_rad_s),
        cfg.grid_points,
    )
    .map_err(|e| anyhow::anyhow!("{e}"))?;
    let basins = local_minima_count(&opt.grid, opt.grid_shape);
    eprintln!(
        "optimum: omega_probe = {:.4e} rad/s, omega_coupling = {:.4e} rad/s, NEF0 = {:.4e}; \
         {} local minima on the grid",
        opt.omega_probe, opt.omega_coupling, opt.nef0, basins
    );
    let mut at_optimum = template;
    at_optimum.omega_probe = opt.omega_probe;
    at_optimum.omega_coupling = opt.omega_coupling;
    if let Ok(t_r) = rydberg_noise::lindblad::transmission(&at_optimum) {
        if 1.0 - t_r > 0.5 {
            eprintln!(
                "warning: probe absorption at the optimum is {:.0}%; the optically-thin \
                 treatment is strained",
                (1.0 - t_r) * 100.0
            );
        }
    }
    let mut out = metadata_header("lindblad", &canonical_json(&cfg));
    out.push_str(&format!(
        "# optimum: omega_probe_rad_s={} omega_coupling_rad_s={} nef0={}\n",
        num(opt.omega_probe),
        num(opt.omega_coupling),
        num(opt.nef0)
    ));
    out.push_str("omega_probe_rad_s,omega_coupling_rad_s,nef0_v_per_m_sqrthz\n");
    for cell in &opt.grid {
        out.push_str(&format!(
            "{},{},{}\n",
            num(cell.omega_probe),
            num(cell.omega_coupling),
            num(cell.nef0)
        ));
    }
    write_output(io.out.as_deref(), &out)
}

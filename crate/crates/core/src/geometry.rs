//! Mode constants and loss parameters of concrete field-enhancement
//! structures: rectangular-waveguide TE₁₀ propagation with conductor loss,
//! TE₁₀₁ cavity constants, the series-RLC plate capacitor, numeric `K_U`/`K_W`
//! extraction from sampled mode profiles, and the survey cavity sizing rule.

use num_complex::Complex64;

use crate::constants::{
    FREE_SPACE_IMPEDANCE, SPEED_OF_LIGHT, VACUUM_PERMEABILITY, VACUUM_PERMITTIVITY,
};
use crate::error::{Error, Result};
use crate::noisequanta::{noise_quantum, DetectionMode, NoiseEnvironment};

/// Rectangular waveguide cross-section and material.
#[derive(Debug, Clone, Copy)]
pub struct RectWaveguide {
    /// Broad wall (m).
    pub a: f64,
    /// Narrow wall (m).
    pub b: f64,
    /// Bulk wall conductivity (S/m).
    pub sigma: f64,
    /// Relative permittivity of the fill (complex allowed).
    pub eps_r: Complex64,
}

impl RectWaveguide {
    pub fn new(a: f64, b: f64, sigma: f64, eps_r: Complex64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a > b && b > 0.0) {
            return Err(Error::domain(format!(
                "require broad wall a > narrow wall b > 0, got a = {a}, b = {b}"
            )));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::domain(format!("conductivity must be positive, got {sigma}")));
        }
        Ok(Self { a, b, sigma, eps_r })
    }

    /// Standard WR-90 X-band guide with the given wall conductivity.
    pub fn wr90(sigma: f64) -> Result<Self> {
        Self::new(22.86e-3, 10.16e-3, sigma, Complex64::new(1.0, 0.0))
    }

    /// TE₁₀ cutoff frequency (Hz), using the real part of the permittivity.
    pub fn te10_cutoff(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.a * self.eps_r.re.sqrt())
    }
}

/// TE₁₀ complex propagation constant `κ_z = α + iβ` (1/m) at frequency `f`.
///
/// β comes from the dispersion relation `β = Re√(ω²µ₀ε − (π/a)²)`; the wall
/// loss is the perturbational surface-resistance result
/// `α_c = R_s (2bπ² + a³k²) / (a³ b β k η)` with `R_s = √(ωµ₀/2σ)`.
/// Evanescent operation (below cutoff) is rejected.
pub fn te10_propagation(wg: &RectWaveguide, f: f64) -> Result<Complex64> {
    if !(f.is_finite() && f > 0.0) {
        return Err(Error::domain(format!("frequency must be positive, got {f}")));
    }
    if f <= wg.te10_cutoff() {
        return Err(Error::domain(format!(
            "TE₁₀ is evanescent below cutoff ({:.4} GHz ≥ {:.4} GHz)",
            wg.te10_cutoff() / 1e9,
            f / 1e9
        )));
    }
    let omega = 2.0 * std::f64::consts::PI * f;
    let eps = VACUUM_PERMITTIVITY * wg.eps_r;
    let kc = std::f64::consts::PI / wg.a;
    // Principal branch: dielectric loss lands in the real part.
    let kappa_fill = (Complex64::new(kc * kc, 0.0) - omega * omega * VACUUM_PERMEABILITY * eps).sqrt();

    let beta = kappa_fill.im;
    let k = omega / SPEED_OF_LIGHT * wg.eps_r.re.sqrt();
    let eta = FREE_SPACE_IMPEDANCE / wg.eps_r.re.sqrt();
    let r_s = (omega * VACUUM_PERMEABILITY / (2.0 * wg.sigma)).sqrt();
    let a3 = wg.a.powi(3);
    let alpha_wall = r_s * (2.0 * wg.b * std::f64::consts::PI.powi(2) + a3 * k * k)
        / (a3 * wg.b * beta * k * eta);

    Ok(Complex64::new(kappa_fill.re + alpha_wall, beta))
}

/// TE₁₀₁ cavity constants at resonance `f0`.
#[derive(Debug, Clone, Copy)]
pub struct Te101Constants {
    /// Peak field per √(stored energy) at the cavity center (V·m⁻¹·J⁻¹ᐟ²).
    pub k_u: f64,
    /// Group-to-phase round-trip delay ratio τ_g/τ.
    pub tau_ratio: f64,
    /// Cavity length λ_g/2 implied by the resonance (m).
    pub length: f64,
}

/// Closed-form TE₁₀₁ constants: `K_U² = 8β/(ε′πab)` and
/// `τ_g/τ = ω₀²/(c²β²)` with `β = Re√(ω₀²µ₀ε − (π/a)²)`.
pub fn te101_constants(wg: &RectWaveguide, f0: f64) -> Result<Te101Constants> {
    if f0 <= wg.te10_cutoff() {
        return Err(Error::domain(format!(
            "no TE₁₀₁ resonance below cutoff ({:.4} GHz)",
            wg.te10_cutoff() / 1e9
        )));
    }
    let omega0 = 2.0 * std::f64::consts::PI * f0;
    let eps = VACUUM_PERMITTIVITY * wg.eps_r;
    let radicand = omega0 * omega0 * VACUUM_PERMEABILITY * eps
        - Complex64::new((std::f64::consts::PI / wg.a).powi(2), 0.0);
    let beta = radicand.sqrt().re;
    let eps_prime = VACUUM_PERMITTIVITY * wg.eps_r.re;
    let k_u_sq = 8.0 * beta / (eps_prime * std::f64::consts::PI * wg.a * wg.b);
    let tau_ratio = (omega0 / (SPEED_OF_LIGHT * beta)).powi(2);
    Ok(Te101Constants {
        k_u: k_u_sq.sqrt(),
        tau_ratio,
        length: std::f64::consts::PI / beta,
    })
}

/// Series RLC plate-capacitor resonator driven by a generator of internal
/// resistance `r_gen`.
#[derive(Debug, Clone, Copy)]
pub struct RlcCircuit {
    /// Loss resistance (Ω).
    pub r_loss: f64,
    /// Generator / radiation resistance (Ω).
    pub r_gen: f64,
    /// Capacitance (F).
    pub c0: f64,
    /// Vapor gap between the plates (m).
    pub h0: f64,
    /// Resonance (rad/s).
    pub omega0: f64,
}

impl RlcCircuit {
    pub fn new(r_loss: f64, r_gen: f64, c0: f64, h0: f64, omega0: f64) -> Result<Self> {
        for (name, v) in [
            ("r_loss", r_loss),
            ("r_gen", r_gen),
            ("c0", c0),
            ("h0", h0),
            ("omega0", omega0),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self {
            r_loss,
            r_gen,
            c0,
            h0,
            omega0,
        })
    }

    /// Field at the vapor gap per √(stored energy): `K_U = √(2/C₀)/h₀`.
    pub fn k_u(&self) -> f64 {
        (2.0 / self.c0).sqrt() / self.h0
    }

    /// Intrinsic loss rate `γ_i = ω₀²RC₀/2` (from `Q_i = 1/(ω₀RC₀)`).
    pub fn gamma_i(&self) -> f64 {
        self.omega0 * self.omega0 * self.r_loss * self.c0 / 2.0
    }

    /// Coupling rate `γ_c = ω₀²R_gC₀/2`.
    pub fn gamma_c(&self) -> f64 {
        self.omega0 * self.omega0 * self.r_gen * self.c0 / 2.0
    }
}

/// Closed-form design constants of the RLC receiver.
#[derive(Debug, Clone, Copy)]
pub struct RlcConstants {
    /// Gap field per √(available input power) (V·m⁻¹·W⁻¹ᐟ²).
    pub k: f64,
    /// Radiative cooling factor `C = R_g/R`.
    pub cooling: f64,
    /// Generator resistance minimizing the NEP for the given sensor.
    pub r_gen_opt: f64,
}

/// `K = 2√2·√R_g/(ω₀h₀C₀(R+R_g))`, `C = R_g/R` and the noise-optimal
/// generator resistance `R_g = R√(1 + 8Θ(f₀,T_p)/(ω₀²RC₀²h₀²NEF₀²))`.
/// `r_gen_opt` is `+∞` for a noiseless sensor (overcouple maximally).
pub fn rlc_constants(
    ckt: &RlcCircuit,
    t_physical: f64,
    mode: DetectionMode,
    nef0: f64,
) -> Result<RlcConstants> {
    let k = 2.0 * 2.0_f64.sqrt() * ckt.r_gen.sqrt()
        / (ckt.omega0 * ckt.h0 * ckt.c0 * (ckt.r_loss + ckt.r_gen));
    let cooling = ckt.r_gen / ckt.r_loss;
    let f0 = ckt.omega0 / (2.0 * std::f64::consts::PI);
    let theta_p = noise_quantum(&NoiseEnvironment::new(f0, t_physical, mode)?);
    let r_gen_opt = if nef0 > 0.0 {
        ckt.r_loss
            * (1.0
                + 8.0 * theta_p
                    / (ckt.omega0.powi(2) * ckt.r_loss * ckt.c0.powi(2) * ckt.h0.powi(2) * nef0 * nef0))
                .sqrt()
    } else {
        f64::INFINITY
    };
    Ok(RlcConstants {
        k,
        cooling,
        r_gen_opt,
    })
}

/// Survey cavity dimensions for a half-wave near-cutoff rectangular guide.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityDims {
    pub a: f64,
    pub b: f64,
    pub length: f64,
    pub w0: f64,
}

/// Sizes the survey cavity at frequency `f`: broad wall chosen so the guided
/// wavelength is 2.5 λ₀, `b = 0.75a`, half-wave length, and probe waist
/// `w₀ = min(1.43 mm, 0.25 b)`.
pub fn survey_sizing(f: f64) -> CavityDims {
    let lambda0 = SPEED_OF_LIGHT / f;
    let lambda_g = 2.5 * lambda0;
    // 1/λ_c² = 1/λ₀² − 1/λ_g², λ_c = 2a.
    let inv_lc_sq = 1.0 / (lambda0 * lambda0) - 1.0 / (lambda_g * lambda_g);
    let a = 0.5 / inv_lc_sq.sqrt();
    let b = 0.75 * a;
    CavityDims {
        a,
        b,
        length: 0.5 * lambda_g,
        w0: (1.43e-3_f64).min(0.25 * b),
    }
}

/// Uniformly sampled 3-D mode profile (standing-wave fields).
#[derive(Debug, Clone)]
pub struct VolumeProfile {
    pub shape: [usize; 3],
    pub spacing: [f64; 3],
    pub origin: [f64; 3],
    /// Complex field vectors, x-fastest storage order.
    pub e_field: Vec<[Complex64; 3]>,
    /// Real part of the relative permittivity per sample.
    pub eps_rel: Vec<f64>,
}

impl VolumeProfile {
    /// Samples an analytic field on a uniform grid.
    pub fn from_fn(
        shape: [usize; 3],
        spacing: [f64; 3],
        origin: [f64; 3],
        field: impl Fn(f64, f64, f64) -> [Complex64; 3],
        eps_rel: impl Fn(f64, f64, f64) -> f64,
    ) -> Self {
        let n = shape[0] * shape[1] * shape[2];
        let mut e = Vec::with_capacity(n);
        let mut eps = Vec::with_capacity(n);
        for k in 0..shape[2] {
            for j in 0..shape[1] {
                for i in 0..shape[0] {
                    let x = origin[0] + i as f64 * spacing[0];
                    let y = origin[1] + j as f64 * spacing[1];
                    let z = origin[2] + k as f64 * spacing[2];
                    e.push(field(x, y, z));
                    eps.push(eps_rel(x, y, z));
                }
            }
        }
        Self {
            shape,
            spacing,
            origin,
            e_field: e,
            eps_rel: eps,
        }
    }

    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.shape[0] * (j + self.shape[1] * k)
    }

    fn trapezoid_weight(i: usize, n: usize) -> f64 {
        if i == 0 || i + 1 == n {
            0.5
        } else {
            1.0
        }
    }

    /// Stored-energy integral `½∫ε′|Ψ|²dV` by trapezoid rule.
    fn stored_energy(&self) -> f64 {
        let dv = self.spacing[0] * self.spacing[1] * self.spacing[2];
        let mut sum = 0.0;
        for k in 0..self.shape[2] {
            let wk = Self::trapezoid_weight(k, self.shape[2]);
            for j in 0..self.shape[1] {
                let wj = Self::trapezoid_weight(j, self.shape[1]);
                for i in 0..self.shape[0] {
                    let wi = Self::trapezoid_weight(i, self.shape[0]);
                    let idx = self.index(i, j, k);
                    let e = &self.e_field[idx];
                    let mag_sq = e[0].norm_sqr() + e[1].norm_sqr() + e[2].norm_sqr();
                    sum += wi * wj * wk * VACUUM_PERMITTIVITY * self.eps_rel[idx] * mag_sq;
                }
            }
        }
        0.5 * sum * dv
    }

    /// Trilinear interpolation of the field at `r`.
    fn sample(&self, r: [f64; 3]) -> Result<[Complex64; 3]> {
        let mut cell = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for d in 0..3 {
            if self.shape[d] < 2 {
                return Err(Error::domain(format!("profile grid too small on axis {d}")));
            }
            let t = (r[d] - self.origin[d]) / self.spacing[d];
            if t < -1e-9 || t > (self.shape[d] - 1) as f64 + 1e-9 {
                return Err(Error::domain(format!(
                    "sample point outside profile grid on axis {d}"
                )));
            }
            let t = t.clamp(0.0, (self.shape[d] - 1) as f64);
            let i = (t.floor() as usize).min(self.shape[d] - 2);
            cell[d] = i;
            frac[d] = t - i as f64;
        }
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for corner in 0..8 {
            let di = corner & 1;
            let dj = (corner >> 1) & 1;
            let dk = (corner >> 2) & 1;
            let w = (if di == 1 { frac[0] } else { 1.0 - frac[0] })
                * (if dj == 1 { frac[1] } else { 1.0 - frac[1] })
                * (if dk == 1 { frac[2] } else { 1.0 - frac[2] });
            let idx = self.index(cell[0] + di, cell[1] + dj, cell[2] + dk);
            for c in 0..3 {
                out[c] += w * self.e_field[idx][c];
            }
        }
        Ok(out)
    }
}

/// Field-per-√(stored energy) constant `K_U(r₀)` along the observation unit
/// vector `a_e`, from a sampled mode profile.
pub fn numeric_ku(profile: &VolumeProfile, r0: [f64; 3], a_e: [f64; 3]) -> Result<f64> {
    let e = profile.sample(r0)?;
    let proj = (e[0] * a_e[0] + e[1] * a_e[1] + e[2] * a_e[2]).norm();
    let energy = profile.stored_energy();
    if energy <= 0.0 {
        return Err(Error::numerical("profile stores no energy"));
    }
    Ok(proj / energy.sqrt())
}

/// Uniformly sampled traveling-mode cross-section with Poynting-flux samples.
#[derive(Debug, Clone)]
pub struct CrossSectionProfile {
    pub shape: [usize; 2],
    pub spacing: [f64; 2],
    pub origin: [f64; 2],
    pub e_field: Vec<[Complex64; 3]>,
    /// Longitudinal Poynting component per sample (W/m²).
    pub poynting_z: Vec<f64>,
}

impl CrossSectionProfile {
    pub fn from_fn(
        shape: [usize; 2],
        spacing: [f64; 2],
        origin: [f64; 2],
        field: impl Fn(f64, f64) -> [Complex64; 3],
        poynting_z: impl Fn(f64, f64) -> f64,
    ) -> Self {
        let n = shape[0] * shape[1];
        let mut e = Vec::with_capacity(n);
        let mut s = Vec::with_capacity(n);
        for j in 0..shape[1] {
            for i in 0..shape[0] {
                let x = origin[0] + i as f64 * spacing[0];
                let y = origin[1] + j as f64 * spacing[1];
                e.push(field(x, y));
                s.push(poynting_z(x, y));
            }
        }
        Self {
            shape,
            spacing,
            origin,
            e_field: e,
            poynting_z: s,
        }
    }

    fn index(&self, i: usize, j: usize) -> usize {
        i + self.shape[0] * j
    }

    fn flux(&self) -> f64 {
        let da = self.spacing[0] * self.spacing[1];
        let mut sum = 0.0;
        for j in 0..self.shape[1] {
            let wj = VolumeProfile::trapezoid_weight(j, self.shape[1]);
            for i in 0..self.shape[0] {
                let wi = VolumeProfile::trapezoid_weight(i, self.shape[0]);
                sum += wi * wj * self.poynting_z[self.index(i, j)];
            }
        }
        sum * da
    }

    fn sample(&self, r: [f64; 2]) -> Result<[Complex64; 3]> {
        let mut cell = [0usize; 2];
        let mut frac = [0.0f64; 2];
        for d in 0..2 {
            if self.shape[d] < 2 {
                return Err(Error::domain(format!("profile grid too small on axis {d}")));
            }
            let t = (r[d] - self.origin[d]) / self.spacing[d];
            if t < -1e-9 || t > (self.shape[d] - 1) as f64 + 1e-9 {
                return Err(Error::domain(format!(
                    "sample point outside cross-section grid on axis {d}"
                )));
            }
            let t = t.clamp(0.0, (self.shape[d] - 1) as f64);
            let i = (t.floor() as usize).min(self.shape[d] - 2);
            cell[d] = i;
            frac[d] = t - i as f64;
        }
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for corner in 0..4 {
            let di = corner & 1;
            let dj = (corner >> 1) & 1;
            let w = (if di == 1 { frac[0] } else { 1.0 - frac[0] })
                * (if dj == 1 { frac[1] } else { 1.0 - frac[1] });
            let idx = self.index(cell[0] + di, cell[1] + dj);
            for c in 0..3 {
                out[c] += w * self.e_field[idx][c];
            }
        }
        Ok(out)
    }
}

/// Traveling-mode field constant `K_W(r₀)` per √(mode power).
///
/// With `beam_waist` given, the field component is averaged over a Gaussian
/// intensity profile `exp(−2r²/w₀²)` centered on `r0` before normalization.
pub fn numeric_kw(
    profile: &CrossSectionProfile,
    r0: [f64; 2],
    a_e: [f64; 3],
    beam_waist: Option<f64>,
) -> Result<f64> {
    let flux = profile.flux();
    if flux <= 0.0 {
        return Err(Error::numerical(
            "mode carries no net power through the cross-section (degenerate mode)",
        ));
    }
    let value = match beam_waist {
        None => {
            let e = profile.sample(r0)?;
            (e[0] * a_e[0] + e[1] * a_e[1] + e[2] * a_e[2]).norm()
        }
        Some(w0) => {
            if !(w0.is_finite() && w0 > 0.0) {
                return Err(Error::domain(format!("beam waist must be positive, got {w0}")));
            }
            profile.sample(r0)?; // r0 must lie inside the grid
            let mut acc = Complex64::new(0.0, 0.0);
            let mut norm = 0.0;
            for j in 0..profile.shape[1] {
                for i in 0..profile.shape[0] {
                    let x = profile.origin[0] + i as f64 * profile.spacing[0];
                    let y = profile.origin[1] + j as f64 * profile.spacing[1];
                    let r_sq = (x - r0[0]).powi(2) + (y - r0[1]).powi(2);
                    let w = (-2.0 * r_sq / (w0 * w0)).exp();
                    let e = &profile.e_field[profile.index(i, j)];
                    acc += w * (e[0] * a_e[0] + e[1] * a_e[1] + e[2] * a_e[2]);
                    norm += w;
                }
            }
            (acc / norm).norm()
        }
    };
    Ok(value / flux.sqrt())
}

/// Analytic TE₁₀ cross-section profile of a rectangular guide at frequency
/// `f`, normalized to a peak field of `e_peak` (V/m).
pub fn te10_cross_section(
    wg: &RectWaveguide,
    f: f64,
    e_peak: f64,
    samples: [usize; 2],
) -> Result<CrossSectionProfile> {
    let kappa = te10_propagation(wg, f)?;
    let beta = kappa.im;
    let omega = 2.0 * std::f64::consts::PI * f;
    let z_wave = omega * VACUUM_PERMEABILITY / beta;
    let a = wg.a;
    Ok(CrossSectionProfile::from_fn(
        samples,
        [wg.a / (samples[0] - 1) as f64, wg.b / (samples[1] - 1) as f64],
        [0.0, 0.0],
        move |x, _| {
            [
                Complex64::new(0.0, 0.0),
                Complex64::new(e_peak * (std::f64::consts::PI * x / a).sin(), 0.0),
                Complex64::new(0.0, 0.0),
            ]
        },
        move |x, _| {
            let e = e_peak * (std::f64::consts::PI * x / a).sin();
            e * e / (2.0 * z_wave)
        },
    ))
}

// ---------------------------------------------------------------------------
// Columnar text I/O for mode profiles.
//
// Volume header:        3d <nx> <ny> <nz> <dx> <dy> <dz> <x0> <y0> <z0>
// Volume row:           x y z ReEx ImEx ReEy ImEy ReEz ImEz eps'
// Cross-section header: 2d <nx> <ny> <dx> <dy> <x0> <y0>
// Cross-section row:    x y ReEx ImEx ReEy ImEy ReEz ImEz Sz
// Rows are x-fastest; all dimensions SI.
// ---------------------------------------------------------------------------

fn parse_floats(line: &str, n: usize, line_no: usize) -> Result<Vec<f64>> {
    let vals: Vec<f64> = line
        .split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|_| Error::data(Some(line_no), format!("bad number `{tok}`")))
        })
        .collect::<Result<_>>()?;
    if vals.len() != n {
        return Err(Error::data(
            Some(line_no),
            format!("expected {n} columns, found {}", vals.len()),
        ));
    }
    Ok(vals)
}

/// Parses a 3-D mode-profile file (see the module format notes).
pub fn parse_volume_profile(text: &str) -> Result<VolumeProfile> {
    let mut lines = text.lines().enumerate();
    let (header_no, header) = lines
        .next()
        .ok_or_else(|| Error::data(None, "empty profile file"))?;
    let mut toks = header.split_whitespace();
    if toks.next() != Some("3d") {
        return Err(Error::data(Some(header_no + 1), "header must start with `3d`"));
    }
    let rest: Vec<f64> = toks
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::data(Some(header_no + 1), format!("bad header field `{t}`")))
        })
        .collect::<Result<_>>()?;
    if rest.len() != 9 {
        return Err(Error::data(Some(header_no + 1), "header needs 9 fields after `3d`"));
    }
    let shape = [rest[0] as usize, rest[1] as usize, rest[2] as usize];
    let spacing = [rest[3], rest[4], rest[5]];
    let origin = [rest[6], rest[7], rest[8]];
    let expected = shape[0] * shape[1] * shape[2];
    if expected == 0 {
        return Err(Error::data(Some(header_no + 1), "profile grid is empty"));
    }

    let mut e_field = Vec::with_capacity(expected);
    let mut eps_rel = Vec::with_capacity(expected);
    for (no, line) in lines {
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let v = parse_floats(line, 10, no + 1)?;
        if !v.iter().all(|x| x.is_finite()) {
            return Err(Error::data(Some(no + 1), "non-finite field sample"));
        }
        e_field.push([
            Complex64::new(v[3], v[4]),
            Complex64::new(v[5], v[6]),
            Complex64::new(v[7], v[8]),
        ]);
        eps_rel.push(v[9]);
    }
    if e_field.len() != expected {
        return Err(Error::data(
            None,
            format!("expected {expected} samples, found {}", e_field.len()),
        ));
    }
    Ok(VolumeProfile {
        shape,
        spacing,
        origin,
        e_field,
        eps_rel,
    })
}

/// Parses a 2-D cross-section profile file (see the module format notes).
pub fn parse_cross_section_profile(text: &str) -> Result<CrossSectionProfile> {
    let mut lines = text.lines().enumerate();
    let (header_no, header) = lines
        .next()
        .ok_or_else(|| Error::data(None, "empty profile file"))?;
    let mut toks = header.split_whitespace();
    if toks.next() != Some("2d") {
        return Err(Error::data(Some(header_no + 1), "header must start with `2d`"));
    }
    let rest: Vec<f64> = toks
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::data(Some(header_no + 1), format!("bad header field `{t}`")))
        })
        .collect::<Result<_>>()?;
    if rest.len() != 6 {
        return Err(Error::data(Some(header_no + 1), "header needs 6 fields after `2d`"));
    }
    let shape = [rest[0] as usize, rest[1] as usize];
    let spacing = [rest[2], rest[3]];
    let origin = [rest[4], rest[5]];
    let expected = shape[0] * shape[1];
    if expected == 0 {
        return Err(Error::data(Some(header_no + 1), "profile grid is empty"));
    }

    let mut e_field = Vec::with_capacity(expected);
    let mut poynting_z = Vec::with_capacity(expected);
    for (no, line) in lines {
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let v = parse_floats(line, 9, no + 1)?;
        e_field.push([
            Complex64::new(v[2], v[3]),
            Complex64::new(v[4], v[5]),
            Complex64::new(v[6], v[7]),
        ]);
        poynting_z.push(v[8]);
    }
    if e_field.len() != expected {
        return Err(Error::data(
            None,
            format!("expected {expected} samples, found {}", e_field.len()),
        ));
    }
    Ok(CrossSectionProfile {
        shape,
        spacing,
        origin,
        e_field,
        poynting_z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn wr90() -> RectWaveguide {
        RectWaveguide::wr90(25e6).unwrap()
    }

    #[test]
    fn perfect_conductor_has_no_wall_loss() {
        let wg = RectWaveguide::wr90(1e30).unwrap();
        let kappa = te10_propagation(&wg, 10e9).unwrap();
        assert!(kappa.re < 1e-9);
    }

    #[test]
    fn wall_loss_decreases_monotonically_with_conductivity() {
        let mut last = f64::INFINITY;
        for sigma in [1e6, 1e7, 1e8, 1e9, 1e12] {
            let wg = RectWaveguide::wr90(sigma).unwrap();
            let alpha = te10_propagation(&wg, 10e9).unwrap().re;
            assert!(alpha < last);
            last = alpha;
        }
    }

    #[test]
    fn wr90_guided_wavelength_matches_textbook_value() {
        let kappa = te10_propagation(&wr90(), 10e9).unwrap();
        let lambda_g = 2.0 * std::f64::consts::PI / kappa.im;
        assert_relative_eq!(lambda_g, 39.7e-3, max_relative = 0.005);
    }

    #[test]
    fn below_cutoff_is_rejected() {
        assert!(te10_propagation(&wr90(), 5e9).is_err());
        assert!(te101_constants(&wr90(), 6e9).is_err());
    }

    #[test]
    fn te101_field_constant_anchor() {
        let c = te101_constants(&wr90(), 10e9).unwrap();
        assert_relative_eq!(c.k_u, 4.43e8, max_relative = 0.01);
        assert_relative_eq!(c.length, 19.85e-3, max_relative = 0.005);
    }

    #[test]
    fn dispersion_vanishes_far_above_cutoff() {
        let wg = RectWaveguide::new(0.2286, 0.1016, 25e6, Complex64::new(1.0, 0.0)).unwrap();
        let c = te101_constants(&wg, 100e9).unwrap();
        assert_relative_eq!(c.tau_ratio, 1.0, max_relative = 1e-4);
    }

    #[test]
    fn wider_narrow_wall_halves_squared_field_constant() {
        let base = wr90();
        let doubled = RectWaveguide::new(base.a, 2.0 * base.b * 0.999, base.sigma, base.eps_r)
            .unwrap();
        let k1 = te101_constants(&base, 10e9).unwrap().k_u;
        let k2 = te101_constants(&doubled, 10e9).unwrap().k_u;
        assert_relative_eq!(k2 * k2 * (2.0 * 0.999), k1 * k1, max_relative = 1e-10);
    }

    #[test]
    fn rlc_limits() {
        let ckt = RlcCircuit::new(2.0, 2.0, 1e-12, 5e-3, 2.0 * std::f64::consts::PI * 1.3e9).unwrap();
        let c = rlc_constants(&ckt, 290.0, DetectionMode::Heterodyne, 1e30).unwrap();
        // Enormous sensor noise: match the generator.
        assert_relative_eq!(c.r_gen_opt, ckt.r_loss, max_relative = 1e-9);
        assert_relative_eq!(c.cooling, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn rlc_constants_consistent_with_oscillator_model() {
        use crate::homodel::{ho_nep, HoEnvironment, HoResonator, ModelForm, SensorIntrinsic};
        let ckt = RlcCircuit::new(1.5, 12.0, 0.8e-12, 4e-3, 2.0 * std::f64::consts::PI * 1.3e9).unwrap();
        let nef0 = 2e-6;
        let c = rlc_constants(&ckt, 290.0, DetectionMode::Heterodyne, nef0).unwrap();
        let f0 = ckt.omega0 / (2.0 * std::f64::consts::PI);

        let res = HoResonator::new(f0, ckt.gamma_i(), ckt.gamma_c(), 1e-12, 1e-12, ckt.k_u()).unwrap();
        let env = HoEnvironment::new(0.0, 290.0, DetectionMode::Heterodyne).unwrap();
        let sensor = SensorIntrinsic::new(nef0).unwrap();
        let nep_ho = ho_nep(&res, &env, &sensor, 0.0, ModelForm::Approximate);

        let theta_p = noise_quantum(
            &NoiseEnvironment::new(f0, 290.0, DetectionMode::Heterodyne).unwrap(),
        );
        let theta_0 = noise_quantum(&NoiseEnvironment::new(f0, 0.0, DetectionMode::Heterodyne).unwrap());
        let nep_direct = theta_0 + theta_p / c.cooling + nef0 * nef0 / (c.k * c.k);
        assert_relative_eq!(nep_ho, nep_direct, max_relative = 1e-9);
    }

    fn te101_profile(n: usize) -> (VolumeProfile, RectWaveguide, f64) {
        let wg = wr90();
        let f0 = 10e9;
        let length = te101_constants(&wg, f0).unwrap().length;
        let (a, b) = (wg.a, wg.b);
        let profile = VolumeProfile::from_fn(
            [n, n, n],
            [a / (n - 1) as f64, b / (n - 1) as f64, length / (n - 1) as f64],
            [0.0, 0.0, 0.0],
            move |x, _, z| {
                [
                    Complex64::new(0.0, 0.0),
                    Complex64::new(
                        (std::f64::consts::PI * x / a).sin() * (std::f64::consts::PI * z / length).sin(),
                        0.0,
                    ),
                    Complex64::new(0.0, 0.0),
                ]
            },
            |_, _, _| 1.0,
        );
        (profile, wg, length)
    }

    #[test]
    fn numeric_field_constant_matches_closed_form() {
        let (profile, wg, length) = te101_profile(101);
        let center = [wg.a / 2.0, wg.b / 2.0, length / 2.0];
        let k_num = numeric_ku(&profile, center, [0.0, 1.0, 0.0]).unwrap();
        let k_ref = te101_constants(&wg, 10e9).unwrap().k_u;
        assert_relative_eq!(k_num, k_ref, max_relative = 0.005);
    }

    #[test]
    fn field_constant_is_scale_invariant() {
        let (mut profile, wg, length) = te101_profile(41);
        let center = [wg.a / 2.0, wg.b / 2.0, length / 2.0];
        let k1 = numeric_ku(&profile, center, [0.0, 1.0, 0.0]).unwrap();
        for e in &mut profile.e_field {
            for c in e.iter_mut() {
                *c *= 1234.5;
            }
        }
        let k2 = numeric_ku(&profile, center, [0.0, 1.0, 0.0]).unwrap();
        assert_relative_eq!(k1, k2, max_relative = 1e-12);
    }

    #[test]
    fn orthogonal_observation_axis_gives_zero() {
        let (profile, wg, length) = te101_profile(21);
        let center = [wg.a / 2.0, wg.b / 2.0, length / 2.0];
        assert_eq!(numeric_ku(&profile, center, [1.0, 0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn sample_outside_grid_is_domain_error() {
        let (profile, wg, length) = te101_profile(11);
        assert!(numeric_ku(&profile, [wg.a * 1.5, wg.b / 2.0, length / 2.0], [0.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn grid_refinement_shrinks_interpolation_error() {
        // Off-node sample: trilinear error is O(h²), so halving the spacing
        // must cut the error by at least 3×.
        let analytic = |x: f64, z: f64, a: f64, l: f64| {
            (std::f64::consts::PI * x / a).sin() * (std::f64::consts::PI * z / l).sin()
        };
        let mut errs = Vec::new();
        for n in [51usize, 101] {
            let (profile, wg, length) = te101_profile(n);
            let r0 = [0.52 * wg.a, wg.b / 3.0, 0.47 * length];
            let k_num = numeric_ku(&profile, r0, [0.0, 1.0, 0.0]).unwrap();
            let k_exact = analytic(r0[0], r0[2], wg.a, length)
                * (8.0 / (VACUUM_PERMITTIVITY * wg.a * wg.b * length)).sqrt();
            errs.push((k_num - k_exact).abs());
        }
        assert!(errs[1] * 3.0 <= errs[0], "errors: {errs:?}");
    }

    #[test]
    fn traveling_mode_constant_anchor() {
        let wg = wr90();
        let profile = te10_cross_section(&wg, 10e9, 1.0, [201, 201]).unwrap();
        let k_w = numeric_kw(&profile, [wg.a / 2.0, wg.b / 2.0], [0.0, 1.0, 0.0], None).unwrap();
        assert_relative_eq!(k_w, 2.931e3, max_relative = 0.01);
        // Power-scale invariance.
        let hot = te10_cross_section(&wg, 10e9, 57.0, [201, 201]).unwrap();
        let k_w2 = numeric_kw(&hot, [wg.a / 2.0, wg.b / 2.0], [0.0, 1.0, 0.0], None).unwrap();
        assert_relative_eq!(k_w, k_w2, max_relative = 1e-9);
    }

    #[test]
    fn gaussian_averaging_reduces_constant_near_peak() {
        let wg = wr90();
        let profile = te10_cross_section(&wg, 10e9, 1.0, [201, 201]).unwrap();
        let center = [wg.a / 2.0, wg.b / 2.0];
        let point = numeric_kw(&profile, center, [0.0, 1.0, 0.0], None).unwrap();
        let avg = numeric_kw(&profile, center, [0.0, 1.0, 0.0], Some(4e-3)).unwrap();
        assert!(avg < point);
        // A waist much smaller than the mode recovers the point value.
        let tight = numeric_kw(&profile, center, [0.0, 1.0, 0.0], Some(1e-4)).unwrap();
        assert_relative_eq!(tight, point, max_relative = 1e-3);
    }

    #[test]
    fn zero_flux_is_degenerate() {
        let profile = CrossSectionProfile::from_fn(
            [11, 11],
            [1e-3, 1e-3],
            [0.0, 0.0],
            |_, _| [Complex64::new(1.0, 0.0); 3],
            |_, _| 0.0,
        );
        assert!(numeric_kw(&profile, [5e-3, 5e-3], [0.0, 1.0, 0.0], None).is_err());
    }

    #[test]
    fn survey_sizing_rules() {
        for f in [1e9, 10.68e9, 100e9] {
            let d = survey_sizing(f);
            assert_relative_eq!(d.b / d.a, 0.75, max_relative = 1e-12);
            let lambda0 = SPEED_OF_LIGHT / f;
            assert_relative_eq!(d.length, 1.25 * lambda0, max_relative = 1e-12);
            // Dispersion oracle: the sized guide really has λ_g = 2.5 λ₀.
            let wg = RectWaveguide::new(d.a, d.b, 1e30, Complex64::new(1.0, 0.0)).unwrap();
            let beta = te10_propagation(&wg, f).unwrap().im;
            assert_relative_eq!(
                2.0 * std::f64::consts::PI / beta,
                2.5 * lambda0,
                max_relative = 1e-9
            );
        }
        // Waist cap engages once 0.25 b exceeds 1.43 mm (b > 5.72 mm).
        let low = survey_sizing(5e9);
        assert!(low.b > 5.72e-3);
        assert_eq!(low.w0, 1.43e-3);
        let high = survey_sizing(60e9);
        assert!(high.b < 5.72e-3);
        assert_relative_eq!(high.w0, 0.25 * high.b, max_relative = 1e-12);
    }

    #[test]
    fn volume_profile_round_trips_through_text() {
        let (profile, ..) = te101_profile(5);
        let mut text = format!(
            "3d {} {} {} {:e} {:e} {:e} 0 0 0\n",
            profile.shape[0],
            profile.shape[1],
            profile.shape[2],
            profile.spacing[0],
            profile.spacing[1],
            profile.spacing[2]
        );
        for k in 0..profile.shape[2] {
            for j in 0..profile.shape[1] {
                for i in 0..profile.shape[0] {
                    let idx = profile.index(i, j, k);
                    let e = &profile.e_field[idx];
                    text.push_str(&format!(
                        "{:e} {:e} {:e} {:e} {:e} {:e} {:e} {:e} {:e} {}\n",
                        profile.origin[0] + i as f64 * profile.spacing[0],
                        profile.origin[1] + j as f64 * profile.spacing[1],
                        profile.origin[2] + k as f64 * profile.spacing[2],
                        e[0].re,
                        e[0].im,
                        e[1].re,
                        e[1].im,
                        e[2].re,
                        e[2].im,
                        profile.eps_rel[idx]
                    ));
                }
            }
        }
        let parsed = parse_volume_profile(&text).unwrap();
        assert_eq!(parsed.shape, profile.shape);
        for (a, b) in parsed.e_field.iter().zip(&profile.e_field) {
            for c in 0..3 {
                assert_relative_eq!(a[c].re, b[c].re, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn malformed_profile_reports_line_number() {
        let text = "3d 2 1 1 1e-3 1e-3 1e-3 0 0 0\n0 0 0 1 0 0 0 0 0 1\n0 0 0 bogus 0 0 0 0 0 1\n";
        match parse_volume_profile(text) {
            Err(Error::Data { line: Some(3), .. }) => {}
            other => panic!("expected data error at line 3, got {other:?}"),
        }
    }
}

//! Four-level ladder master-equation model of Rydberg EIT readout.
//!
//! Levels: ground |1⟩ — probe — |2⟩ — coupling — |3⟩ (Rydberg S) — RF —
//! |4⟩ (Rydberg P). The steady state of the Lindblad equation gives the
//! probe coherence, hence the susceptibility seen by the probe, the cell
//! transmission, its slope against the RF Rabi frequency, and finally the
//! photon-shot-noise-limited free-space sensitivity NEF₀.

use nalgebra::{Matrix4, SMatrix, SVector};
use num_complex::Complex64;

use crate::constants::{
    BOLTZMANN, HBAR, PLANCK, SPEED_OF_LIGHT, VACUUM_PERMITTIVITY,
};
use crate::error::{Error, Result};
use crate::numerics::{argmin, nelder_mead_2d, parabolic_refine};

type M4 = Matrix4<Complex64>;
type M16 = SMatrix<Complex64, 16, 16>;
type V16 = SVector<Complex64, 16>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Maxwellian velocity averaging along the beam axis.
///
/// Each velocity class sees the probe Doppler-shifted by `−k_probe·v` and
/// the (counter-propagating) coupling by `+k_coupling·v`; the RF shift is
/// negligible. Classes are sampled on a uniform grid over `±v_max` and
/// weighted by the Maxwell distribution normalized over the **full**
/// velocity axis; atoms outside the window are far-detuned and contribute
/// no coherence.
#[derive(Debug, Clone, Copy)]
pub struct DopplerAveraging {
    /// 1-D velocity standard deviation √(k_B T/m) (m/s).
    pub sigma_v: f64,
    /// Probe wavevector magnitude (rad/m).
    pub k_probe: f64,
    /// Coupling wavevector magnitude (rad/m), counter-propagating.
    pub k_coupling: f64,
    /// Half-width of the sampled velocity window (m/s).
    pub v_max: f64,
    /// Number of velocity classes (odd keeps the resonant class on-grid).
    pub samples: usize,
}

impl DopplerAveraging {
    /// Rb85 two-photon ladder at 300 K: 780 nm probe against a
    /// counter-propagating 480 nm coupling beam.
    pub fn rb85_300k() -> Self {
        Self {
            sigma_v: 171.4,
            k_probe: 8.0529e6,
            k_coupling: 13.0902e6,
            v_max: 75.0,
            samples: 61,
        }
    }
}

/// Ladder system parameters. All rates and Rabi frequencies in rad/s.
#[derive(Debug, Clone, Copy)]
pub struct FourLevelSystem {
    pub delta_probe: f64,
    pub delta_coupling: f64,
    pub delta_rf: f64,
    pub omega_probe: f64,
    pub omega_coupling: f64,
    pub omega_rf: f64,
    /// Population decay |2⟩→|1⟩.
    pub gamma_21: f64,
    /// Effective population decay |3⟩→|2⟩ (radiative + thermal).
    pub gamma_32: f64,
    /// Effective population decay |4⟩→|3⟩ (radiative + thermal).
    pub gamma_43: f64,
    /// Added dephasing applied to every state.
    pub dephasing: f64,
    /// Probe transition dipole moment (C·m).
    pub mu_probe: f64,
    /// RF transition dipole moment (C·m).
    pub mu_rf: f64,
    /// Atomic number density participating in the signal (m⁻³).
    pub density: f64,
    /// Interaction length (m).
    pub cell_length: f64,
    /// Probe beam waist radius (m).
    pub beam_waist: f64,
    /// Probe optical frequency (Hz).
    pub probe_freq: f64,
    /// Velocity averaging of the cell response; `None` models a single
    /// stationary class.
    pub doppler: Option<DopplerAveraging>,
}

impl FourLevelSystem {
    /// Rb85 D2 two-photon ladder with the usual laboratory values: natural
    /// probe linewidth 2π×6.07 MHz, slow Rydberg decays, 2π×100 kHz added
    /// decoherence per state, π-transition probe dipole, the F = 3 ground
    /// population of a 300 K cell, 70 mm length and a 0.5 mm beam waist.
    /// Velocity averaging is off; enable it with [`Self::with_doppler`].
    pub fn rb85_defaults(omega_probe: f64, omega_coupling: f64, omega_rf: f64, mu_rf: f64) -> Self {
        let tau = std::f64::consts::TAU;
        Self {
            delta_probe: 0.0,
            delta_coupling: 0.0,
            delta_rf: 0.0,
            omega_probe,
            omega_coupling,
            omega_rf,
            gamma_21: tau * 6.0666e6,
            gamma_32: tau * 2.4e3,
            gamma_43: tau * 1.5e3,
            dephasing: tau * 100e3,
            mu_probe: 1.46e-29,
            mu_rf,
            density: 5.4e15,
            cell_length: 70e-3,
            beam_waist: 0.5e-3,
            probe_freq: 384.23e12,
            doppler: None,
        }
    }

    /// Same system with room-temperature velocity averaging enabled.
    pub fn with_doppler(mut self) -> Self {
        self.doppler = Some(DopplerAveraging::rb85_300k());
        self
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("gamma_21", self.gamma_21),
            ("gamma_32", self.gamma_32),
            ("gamma_43", self.gamma_43),
            ("dephasing", self.dephasing),
            ("omega_probe", self.omega_probe),
            ("omega_coupling", self.omega_coupling),
            ("omega_rf", self.omega_rf),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::domain(format!("{name} must be non-negative, got {v}")));
            }
        }
        for (name, v) in [
            ("mu_probe", self.mu_probe),
            ("mu_rf", self.mu_rf),
            ("density", self.density),
            ("cell_length", self.cell_length),
            ("beam_waist", self.beam_waist),
            ("probe_freq", self.probe_freq),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Rotating-frame Hamiltonian divided by ħ (rad/s). Hermitian by
    /// construction.
    pub fn hamiltonian(&self) -> M4 {
        let mut h = M4::zeros();
        let re = |x: f64| Complex64::new(x, 0.0);
        h[(0, 1)] = re(0.5 * self.omega_probe);
        h[(1, 0)] = re(0.5 * self.omega_probe);
        h[(1, 1)] = re(-self.delta_probe);
        h[(1, 2)] = re(0.5 * self.omega_coupling);
        h[(2, 1)] = re(0.5 * self.omega_coupling);
        h[(2, 2)] = re(-(self.delta_probe + self.delta_coupling));
        h[(2, 3)] = re(0.5 * self.omega_rf);
        h[(3, 2)] = re(0.5 * self.omega_rf);
        h[(3, 3)] = re(-(self.delta_probe + self.delta_coupling + self.delta_rf));
        h
    }

    /// Collapse operators with their rates already folded in (√rate · op).
    fn collapse_ops(&self) -> Vec<M4> {
        let mut ops = Vec::with_capacity(7);
        let mut ladder = |lower: usize, upper: usize, rate: f64| {
            if rate > 0.0 {
                let mut op = M4::zeros();
                op[(lower, upper)] = Complex64::new(rate.sqrt(), 0.0);
                ops.push(op);
            }
        };
        ladder(0, 1, self.gamma_21);
        ladder(1, 2, self.gamma_32);
        ladder(2, 3, self.gamma_43);
        if self.dephasing > 0.0 {
            for k in 0..4 {
                let mut op = M4::zeros();
                op[(k, k)] = Complex64::new(self.dephasing.sqrt(), 0.0);
                ops.push(op);
            }
        }
        ops
    }

    /// Gaussian-beam probe power implied by the peak Rabi frequency:
    /// `P = π w₀² ε₀ c E₀²/4` with `E₀ = ħΩ_P/µ₁₂`.
    pub fn probe_power(&self) -> f64 {
        let e_peak = HBAR * self.omega_probe / self.mu_probe;
        std::f64::consts::PI * self.beam_waist.powi(2) * VACUUM_PERMITTIVITY * SPEED_OF_LIGHT
            * e_peak
            * e_peak
            / 4.0
    }
}

/// Mean thermal speed dephasing proxy for atoms crossing the beam,
/// `v̄/(w₀ √(2π))` with `v̄ = √(8 k_B T/(π m))`.
pub fn transit_dephasing(beam_waist: f64, temperature: f64, atomic_mass: f64) -> f64 {
    let v_bar = (8.0 * BOLTZMANN * temperature / (std::f64::consts::PI * atomic_mass)).sqrt();
    v_bar / (beam_waist * (2.0 * std::f64::consts::PI).sqrt())
}

/// Steady-state density matrix.
#[derive(Debug, Clone)]
pub struct SteadyState {
    pub rho: M4,
}

impl SteadyState {
    pub fn trace_defect(&self) -> f64 {
        (self.rho.trace() - ONE).norm()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let diff = self.rho - self.rho.adjoint();
        diff.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of the (Hermitian) density matrix, via the real
    /// symmetric embedding [[Re, −Im], [Im, Re]].
    pub fn min_eigenvalue(&self) -> f64 {
        let mut m = SMatrix::<f64, 8, 8>::zeros();
        for r in 0..4 {
            for c in 0..4 {
                let v = 0.5 * (self.rho[(r, c)] + self.rho[(c, r)].conj());
                m[(r, c)] = v.re;
                m[(r + 4, c + 4)] = v.re;
                m[(r + 4, c)] = v.im;
                m[(r, c + 4)] = -v.im;
            }
        }
        let eig = m.symmetric_eigen();
        eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Probe coherence ⟨1|ρ|2⟩ whose imaginary part is the absorption.
    pub fn probe_coherence(&self) -> Complex64 {
        self.rho[(0, 1)]
    }
}

fn apply_liouvillian(sys: &FourLevelSystem, h: &M4, ops: &[M4], rho: &M4) -> M4 {
    let _ = sys;
    let minus_i = Complex64::new(0.0, -1.0);
    let half = Complex64::new(0.5, 0.0);
    let mut out = (h * rho - rho * h) * minus_i;
    for op in ops {
        let op_dag = op.adjoint();
        let op_dag_op = op_dag * op;
        out += op * rho * op_dag - (op_dag_op * rho + rho * op_dag_op) * half;
    }
    out
}

/// Assembles the 16×16 Liouvillian superoperator directly from the sparse
/// Hamiltonian and rate structure; row-major vectorization `idx = 4·row + col`.
fn liouvillian_matrix(sys: &FourLevelSystem) -> M16 {
    let idx = |r: usize, c: usize| 4 * r + c;
    let h = sys.hamiltonian();
    let mut l = M16::zeros();
    let minus_i = Complex64::new(0.0, -1.0);
    let plus_i = Complex64::new(0.0, 1.0);

    // Coherent part −i(Hρ − ρH).
    for r in 0..4 {
        for c in 0..4 {
            let row = idx(r, c);
            for k in 0..4 {
                let h_rk = h[(r, k)];
                if h_rk != ZERO {
                    l[(row, idx(k, c))] += minus_i * h_rk;
                }
                let h_kc = h[(k, c)];
                if h_kc != ZERO {
                    l[(row, idx(r, k))] += plus_i * h_kc;
                }
            }
        }
    }

    // Ladder decays |a⟩⟨b| with rate Γ: feed ρ_bb into ρ_aa, damp every
    // coherence touching |b⟩ at Γ/2.
    for (a, b, rate) in [
        (0usize, 1usize, sys.gamma_21),
        (1, 2, sys.gamma_32),
        (2, 3, sys.gamma_43),
    ] {
        if rate <= 0.0 {
            continue;
        }
        l[(idx(a, a), idx(b, b))] += Complex64::new(rate, 0.0);
        let half = Complex64::new(0.5 * rate, 0.0);
        for c in 0..4 {
            l[(idx(b, c), idx(b, c))] -= half;
            l[(idx(c, b), idx(c, b))] -= half;
        }
    }

    // Per-state pure dephasing: coherences decay, populations untouched.
    if sys.dephasing > 0.0 {
        let rate = sys.dephasing;
        let half = Complex64::new(0.5 * rate, 0.0);
        for k in 0..4 {
            l[(idx(k, k), idx(k, k))] += Complex64::new(rate, 0.0);
            for c in 0..4 {
                l[(idx(k, c), idx(k, c))] -= half;
                l[(idx(c, k), idx(c, k))] -= half;
            }
        }
    }
    l
}

/// Solves `L(ρ) = 0` with `tr ρ = 1` by a dense linear solve of the
/// vectorized system with the first row replaced by the trace condition.
pub fn steady_state(sys: &FourLevelSystem) -> Result<SteadyState> {
    sys.validate()?;
    let rho = solve_steady(liouvillian_matrix(sys))?;
    Ok(SteadyState { rho })
}

fn solve_steady(mut l: M16) -> Result<M4> {
    let mut rhs = V16::zeros();
    for col in 0..16 {
        l[(0, col)] = ZERO;
    }
    for k in 0..4 {
        l[(0, 4 * k + k)] = ONE;
    }
    rhs[0] = ONE;

    let lu = l.lu();
    let solution = lu
        .solve(&rhs)
        .ok_or_else(|| Error::numerical("singular Liouvillian (all rates zero?)"))?;
    let mut rho = M4::zeros();
    for r in 0..4 {
        for c in 0..4 {
            rho[(r, c)] = solution[4 * r + c];
        }
    }
    Ok(rho)
}

/// Residual `‖L(ρ)‖_F / ‖L‖_F` of a steady-state solution.
pub fn steady_state_residual(sys: &FourLevelSystem, state: &SteadyState) -> f64 {
    let h = sys.hamiltonian();
    let ops = sys.collapse_ops();
    let image = apply_liouvillian(sys, &h, &ops, &state.rho);
    let l = liouvillian_matrix(sys);
    let norm_l = l.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let norm_img = image.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    norm_img / norm_l
}

/// Linear susceptibility seen by the probe,
/// `χ = 2Nµ₁₂ ρ₁₂ / (ε₀ E_probe)` with `E_probe = ħΩ_P/µ₁₂`.
///
/// With velocity averaging enabled the coherence is the Maxwell-weighted
/// mean over the sampled classes (far-detuned classes outside the window
/// contribute nothing but still dilute).
pub fn susceptibility(sys: &FourLevelSystem) -> Result<Complex64> {
    if sys.omega_probe <= 0.0 {
        return Err(Error::domain("susceptibility needs a nonzero probe drive".to_string()));
    }
    let coherence = match &sys.doppler {
        None => steady_state(sys)?.probe_coherence(),
        Some(d) => {
            if d.samples < 3 || d.samples % 2 == 0 {
                return Err(Error::domain(
                    "velocity averaging needs an odd sample count ≥ 3".to_string(),
                ));
            }
            let base = liouvillian_matrix(sys);
            let dv = 2.0 * d.v_max / (d.samples - 1) as f64;
            let mut acc = ZERO;
            for i in 0..d.samples {
                let v = -d.v_max + dv * i as f64;
                let weight = (-0.5 * (v / d.sigma_v).powi(2)).exp()
                    * if i == 0 || i == d.samples - 1 { 0.5 } else { 1.0 };
                // Only the detuning diagonal changes with velocity.
                let mut l = base;
                let shift_p = -d.k_probe * v;
                let shift_c = d.k_coupling * v;
                let level_shift = [0.0, -shift_p, -(shift_p + shift_c), -(shift_p + shift_c)];
                for r in 0..4 {
                    for c in 0..4 {
                        let dw = level_shift[r] - level_shift[c];
                        if dw != 0.0 {
                            l[(4 * r + c, 4 * r + c)] += Complex64::new(0.0, -dw);
                        }
                    }
                }
                let rho = solve_steady(l)?;
                acc += weight * rho[(0, 1)];
            }
            acc * dv / (d.sigma_v * (2.0 * std::f64::consts::PI).sqrt())
        }
    };
    Ok(2.0 * sys.density * sys.mu_probe.powi(2) / (VACUUM_PERMITTIVITY * HBAR * sys.omega_probe)
        * coherence)
}

/// Probe power transmission through the cell, `T_r = exp(−2κ″L)` with
/// `κ″ = (2πν_p/c)·Im√(1+χ)`.
pub fn transmission(sys: &FourLevelSystem) -> Result<f64> {
    if sys.density == 0.0 {
        return Ok(1.0);
    }
    let chi = susceptibility(sys)?;
    let kappa_im =
        2.0 * std::f64::consts::PI * sys.probe_freq / SPEED_OF_LIGHT * (ONE + chi).sqrt().im;
    Ok((-2.0 * kappa_im * sys.cell_length).exp())
}

/// True when the cell is optically thin enough for the model's single-pass
/// treatment (absorption below 50 %).
pub fn optically_thin(sys: &FourLevelSystem) -> Result<bool> {
    Ok(1.0 - transmission(sys)? <= 0.5)
}

/// Local slope `δT_r/δΩ_RF` (s/rad) at the operating RF bias, by central
/// differences with one Richardson extrapolation step.
pub fn transmission_slope(sys: &FourLevelSystem) -> Result<f64> {
    let step = (1e-4 * sys.omega_rf).max(std::f64::consts::TAU * 10.0);
    let diff = |h: f64| -> Result<f64> {
        let mut hi = *sys;
        hi.omega_rf = sys.omega_rf + h;
        let mut lo = *sys;
        lo.omega_rf = (sys.omega_rf - h).max(0.0);
        Ok((transmission(&hi)? - transmission(&lo)?) / (hi.omega_rf - lo.omega_rf))
    };
    let d1 = diff(step)?;
    let d2 = diff(0.5 * step)?;
    Ok((4.0 * d2 - d1) / 3.0)
}

/// Photon-shot-noise-limited free-space NEF₀ (V·m⁻¹·Hz⁻¹ᐟ²) at the current
/// operating point:
/// `ΔΩ_min = √(T_r hν_p / P_in)·(δΩ/δT_r)`, `NEF₀ = √2 (h/µ_d) ΔΩ_min`
/// (1 s integration, 0.5 Hz bandwidth convention).
///
/// Returns `+∞` at a zero-responsivity bias point.
pub fn nef0_model(sys: &FourLevelSystem) -> Result<f64> {
    let t_r = transmission(sys)?;
    let slope = transmission_slope(sys)?;
    if slope.abs() < 1e-18 {
        return Ok(f64::INFINITY);
    }
    let p_in = sys.probe_power();
    let delta_omega_min = (t_r * PLANCK * sys.probe_freq / p_in).sqrt() / slope.abs();
    Ok(2.0_f64.sqrt() * PLANCK / sys.mu_rf * delta_omega_min)
}

/// Minimizes NEF₀ over the RF (LO) bias amplitude; returns the bias and the
/// sensitivity there.
///
/// Deliberately coarse: a fixed log grid over 2π×[0.5, 60] MHz with one
/// parabolic refinement. The operating point must sit on the broad
/// Autler-Townes slope; a finer search would lock onto sub-linewidth
/// structure that no receiver could servo to.
pub fn nef0_at_optimal_bias(sys: &FourLevelSystem) -> Result<(f64, f64)> {
    let tau = std::f64::consts::TAU;
    let (lo, hi) = (tau * 0.5e6, tau * 60e6);
    let n = 13;
    let step = (hi / lo).ln() / (n - 1) as f64;
    let log_biases: Vec<f64> = (0..n).map(|i| lo.ln() + step * i as f64).collect();
    let mut nefs = Vec::with_capacity(n);
    for &log_bias in &log_biases {
        let mut s = *sys;
        s.omega_rf = log_bias.exp();
        nefs.push(nef0_model(&s)?);
    }
    let best = argmin(&nefs);
    if !nefs[best].is_finite() {
        return Err(Error::numerical("no responsive RF bias found"));
    }
    let log_refined = parabolic_refine(&log_biases, &nefs, best);
    let mut s = *sys;
    s.omega_rf = log_refined.exp();
    let nef_refined = nef0_model(&s)?;
    if nef_refined <= nefs[best] {
        Ok((s.omega_rf, nef_refined))
    } else {
        Ok((log_biases[best].exp(), nefs[best]))
    }
}

/// One cell of the sensitivity contour.
#[derive(Debug, Clone, Copy)]
pub struct RabiGridCell {
    pub omega_probe: f64,
    pub omega_coupling: f64,
    pub nef0: f64,
}

/// Result of the probe/coupling Rabi-frequency optimization.
#[derive(Debug, Clone)]
pub struct RabiOptimum {
    pub omega_probe: f64,
    pub omega_coupling: f64,
    pub nef0: f64,
    pub grid: Vec<RabiGridCell>,
    pub grid_shape: (usize, usize),
}

/// Scans NEF₀ over a log grid in (Ω_P, Ω_C), each cell at its optimal RF
/// bias, then refines from the best `K = 3` cells with Nelder-Mead in log
/// coordinates. The full contour grid is returned for plotting.
pub fn optimize_rabi(
    template: &FourLevelSystem,
    omega_probe_bounds: (f64, f64),
    omega_coupling_bounds: (f64, f64),
    grid_points: usize,
) -> Result<RabiOptimum> {
    template.validate()?;
    if grid_points < 3 {
        return Err(Error::domain("grid needs at least 3 points per axis".to_string()));
    }
    let (p_lo, p_hi) = omega_probe_bounds;
    let (c_lo, c_hi) = omega_coupling_bounds;
    if !(p_lo > 0.0 && p_hi > p_lo && c_lo > 0.0 && c_hi > c_lo) {
        return Err(Error::domain("bounds must be positive and ordered".to_string()));
    }

    let nef_at = |omega_p: f64, omega_c: f64| -> f64 {
        if !(p_lo..=p_hi).contains(&omega_p) || !(c_lo..=c_hi).contains(&omega_c) {
            return f64::INFINITY;
        }
        let mut sys = *template;
        sys.omega_probe = omega_p;
        sys.omega_coupling = omega_c;
        match nef0_at_optimal_bias(&sys) {
            Ok((_, nef)) => nef,
            Err(_) => f64::INFINITY,
        }
    };

    let p_step = (p_hi / p_lo).ln() / (grid_points - 1) as f64;
    let c_step = (c_hi / c_lo).ln() / (grid_points - 1) as f64;
    let mut grid = Vec::with_capacity(grid_points * grid_points);
    for j in 0..grid_points {
        let omega_c = c_lo * (c_step * j as f64).exp();
        for i in 0..grid_points {
            let omega_p = p_lo * (p_step * i as f64).exp();
            grid.push(RabiGridCell {
                omega_probe: omega_p,
                omega_coupling: omega_c,
                nef0: nef_at(omega_p, omega_c),
            });
        }
    }
    if grid.iter().all(|c| !c.nef0.is_finite()) {
        return Err(Error::numerical("sensitivity grid is infinite everywhere"));
    }

    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| grid[a].nef0.partial_cmp(&grid[b].nef0).unwrap());

    let mut best = (grid[order[0]].omega_probe, grid[order[0]].omega_coupling, grid[order[0]].nef0);
    for &start in order.iter().take(3) {
        let cell = &grid[start];
        let objective = |log_xy: [f64; 2]| nef_at(log_xy[0].exp(), log_xy[1].exp());
        let (log_opt, nef) = nelder_mead_2d(
            objective,
            [cell.omega_probe.ln(), cell.omega_coupling.ln()],
            [0.5 * p_step, 0.5 * c_step],
            40,
        );
        if nef < best.2 {
            best = (log_opt[0].exp(), log_opt[1].exp(), nef);
        }
    }

    Ok(RabiOptimum {
        omega_probe: best.0,
        omega_coupling: best.1,
        nef0: best.2,
        grid,
        grid_shape: (grid_points, grid_points),
    })
}

/// Counts the contour's basins: local minima of the 3×3-box-smoothed grid.
/// Smoothing removes single-cell wiggles from the inner bias optimization
/// so only macroscopic valleys register.
pub fn basin_count(grid: &[RabiGridCell], shape: (usize, usize)) -> usize {
    let (nx, ny) = shape;
    assert_eq!(grid.len(), nx * ny);
    let mut smoothed = grid.to_vec();
    for j in 0..ny {
        for i in 0..nx {
            let mut acc = 0.0;
            let mut count = 0.0;
            for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if ni < 0 || nj < 0 || ni >= nx as i64 || nj >= ny as i64 {
                        continue;
                    }
                    let v = grid[ni as usize + nx * nj as usize].nef0;
                    if v.is_finite() {
                        acc += v;
                        count += 1.0;
                    }
                }
            }
            smoothed[i + nx * j].nef0 = if count > 0.0 { acc / count } else { f64::INFINITY };
        }
    }
    local_minima_count(&smoothed, shape)
}

/// Counts grid cells that are local minima against their 8-neighborhood;
/// basins of attraction show up as distinct local minima.
pub fn local_minima_count(grid: &[RabiGridCell], shape: (usize, usize)) -> usize {
    let (nx, ny) = shape;
    assert_eq!(grid.len(), nx * ny);
    let mut count = 0;
    for j in 0..ny {
        for i in 0..nx {
            let v = grid[i + nx * j].nef0;
            if !v.is_finite() {
                continue;
            }
            let mut is_min = true;
            for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if ni < 0 || nj < 0 || ni >= nx as i64 || nj >= ny as i64 {
                        continue;
                    }
                    if grid[ni as usize + nx * nj as usize].nef0 < v {
                        is_min = false;
                    }
                }
            }
            if is_min {
                count += 1;
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const TAU: f64 = std::f64::consts::TAU;

    fn reference_system() -> FourLevelSystem {
        FourLevelSystem::rb85_defaults(TAU * 9.8e6, TAU * 1.8e6, TAU * 5e6, 4.04e-26)
    }

    #[test]
    fn direct_assembly_matches_superoperator_application() {
        // Oracle: apply the Lindblad map to every matrix unit and compare
        // against the sparse direct assembly.
        let sys = reference_system();
        let l = liouvillian_matrix(&sys);
        let h = sys.hamiltonian();
        let ops = sys.collapse_ops();
        for r in 0..4 {
            for c in 0..4 {
                let mut basis = M4::zeros();
                basis[(r, c)] = ONE;
                let image = apply_liouvillian(&sys, &h, &ops, &basis);
                for rr in 0..4 {
                    for cc in 0..4 {
                        let direct = l[(4 * rr + cc, 4 * r + c)];
                        assert!(
                            (direct - image[(rr, cc)]).norm() < 1e-9 * (1.0 + image[(rr, cc)].norm()),
                            "mismatch at L[({rr},{cc}),({r},{c})]"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn undriven_system_relaxes_to_ground_state() {
        let mut sys = reference_system();
        sys.omega_probe = 0.0;
        sys.omega_coupling = 0.0;
        sys.omega_rf = 0.0;
        let state = steady_state(&sys).unwrap();
        assert_relative_eq!(state.rho[(0, 0)].re, 1.0, epsilon = 1e-12);
        for k in 1..4 {
            assert!(state.rho[(k, k)].norm() < 1e-12);
        }
    }

    #[test]
    fn steady_state_is_physical() {
        let state = steady_state(&reference_system()).unwrap();
        assert!(state.trace_defect() < 1e-10);
        assert!(state.hermiticity_defect() < 1e-10);
        assert!(state.min_eigenvalue() > -1e-9);
        assert!(steady_state_residual(&reference_system(), &state) < 1e-10);
    }

    #[test]
    fn two_level_absorption_sign_is_positive() {
        // Pure two-level: coupling and RF off. Im χ must be absorptive.
        let mut sys = reference_system();
        sys.omega_coupling = 0.0;
        sys.omega_rf = 0.0;
        sys.omega_probe = TAU * 10e3;
        let chi = susceptibility(&sys).unwrap();
        assert!(chi.im > 0.0);
        // Weak-drive oracle: ρ₁₂ = (iΩ/2)/(γ − iΔ) at Δ = 0, γ = Γ/2 + γ_d.
        let gamma = 0.5 * sys.gamma_21 + sys.dephasing;
        let oracle = 2.0 * sys.density * sys.mu_probe.powi(2)
            / (VACUUM_PERMITTIVITY * HBAR * sys.omega_probe)
            * (sys.omega_probe / (2.0 * gamma));
        assert_relative_eq!(chi.im, oracle, max_relative = 1e-3);
    }

    #[test]
    fn eit_matches_three_level_weak_probe_oracle() {
        // Ω_RF = 0 reduces the ladder to textbook EIT. Weak probe, scan Δ_P.
        let mut sys = reference_system();
        sys.omega_probe = TAU * 10e3;
        sys.omega_coupling = TAU * 4e6;
        sys.omega_rf = 0.0;
        let gamma_21 = 0.5 * sys.gamma_21 + sys.dephasing;
        let gamma_31 = 0.5 * sys.gamma_32 + sys.dephasing;
        for i in 0..21 {
            let delta = TAU * (-50e6 + 100e6 * i as f64 / 20.0);
            sys.delta_probe = delta;
            let state = steady_state(&sys).unwrap();
            let num = Complex64::new(0.0, 0.5 * sys.omega_probe);
            let eit_term = Complex64::new(sys.omega_coupling.powi(2) / 4.0, 0.0)
                / Complex64::new(gamma_31, -delta);
            let oracle = num / (Complex64::new(gamma_21, -delta) + eit_term);
            let sim = state.probe_coherence().im;
            assert_relative_eq!(sim, oracle.im, max_relative = 0.01);
        }
    }

    #[test]
    fn eit_suppresses_resonant_absorption() {
        let mut sys = reference_system();
        sys.omega_probe = TAU * 100e3;
        sys.omega_rf = 0.0;
        sys.omega_coupling = 0.0;
        let opaque = transmission(&sys).unwrap();
        sys.omega_coupling = TAU * 5e6;
        let transparent = transmission(&sys).unwrap();
        assert!(transparent > opaque);
        let state = steady_state(&sys).unwrap();
        sys.omega_coupling = 0.0;
        let state0 = steady_state(&sys).unwrap();
        assert!(state.probe_coherence().im < state0.probe_coherence().im);
    }

    #[test]
    fn transmission_is_in_unit_interval() {
        let mut sys = reference_system();
        for op in [TAU * 0.5e6, TAU * 5e6] {
            for oc in [TAU * 0.5e6, TAU * 5e6] {
                sys.omega_probe = op;
                sys.omega_coupling = oc;
                let t = transmission(&sys).unwrap();
                assert!(t > 0.0 && t <= 1.0, "T_r = {t}");
            }
        }
    }

    #[test]
    fn autler_townes_splitting_tracks_rf_rabi_frequency() {
        // The EIT transmission peak splits into two maxima separated by the
        // RF Rabi frequency once it dominates the linewidths.
        let mut sys = reference_system();
        sys.omega_probe = TAU * 200e3;
        sys.omega_coupling = TAU * 3e6;
        for omega_rf in [TAU * 15e6, TAU * 25e6, TAU * 40e6] {
            sys.omega_rf = omega_rf;
            let n = 801;
            let span = 1.4 * omega_rf;
            let ts: Vec<f64> = (0..n)
                .map(|i| {
                    let mut s = sys;
                    s.delta_probe = -span / 2.0 + span * i as f64 / (n - 1) as f64;
                    transmission(&s).unwrap()
                })
                .collect();
            // Two interior maxima.
            let mut peaks = Vec::new();
            for i in 1..n - 1 {
                if ts[i] > ts[i - 1] && ts[i] >= ts[i + 1] {
                    peaks.push(i);
                }
            }
            assert!(peaks.len() >= 2, "expected a split line, found {} peaks", peaks.len());
            let first = peaks[0];
            let last = *peaks.last().unwrap();
            let splitting = (last - first) as f64 / (n - 1) as f64 * span;
            assert_relative_eq!(splitting, omega_rf, max_relative = 0.05);
        }
    }

    #[test]
    fn slope_vanishes_at_transmission_extremum_and_flips_sign() {
        // Probe detuned into one dressed line: sweeping the RF bias drags
        // the split transmission peak past the probe, creating an interior
        // maximum of T_r(Ω_RF).
        let mut sys = reference_system();
        sys.omega_probe = TAU * 200e3;
        sys.omega_coupling = TAU * 3e6;
        sys.delta_probe = TAU * 5e6;
        let n = 200;
        let biases: Vec<f64> =
            (0..n).map(|i| TAU * 1e6 * (0.5 + 30.0 * i as f64 / n as f64)).collect();
        let ts: Vec<f64> = biases
            .iter()
            .map(|&b| {
                let mut s = sys;
                s.omega_rf = b;
                transmission(&s).unwrap()
            })
            .collect();
        let neg: Vec<f64> = ts.iter().map(|t| -t).collect();
        let i_max = argmin(&neg);
        assert!(i_max > 0 && i_max < n - 1, "no interior extremum (i = {i_max})");
        let at = |bias: f64| {
            let mut s = sys;
            s.omega_rf = bias;
            transmission_slope(&s).unwrap()
        };
        let before = at(biases[i_max - 2]);
        let after = at(biases[i_max + 2]);
        assert!(before > 0.0 && after < 0.0, "slope does not flip: {before}, {after}");
        let near_zero = at(biases[i_max]);
        assert!(near_zero.abs() < before.abs().max(after.abs()));
    }

    #[test]
    fn slope_matches_five_point_stencil() {
        let sys = reference_system();
        let slope = transmission_slope(&sys).unwrap();
        let h = 1e-4 * sys.omega_rf;
        let t = |omega: f64| {
            let mut s = sys;
            s.omega_rf = omega;
            transmission(&s).unwrap()
        };
        let stencil = (t(sys.omega_rf - 2.0 * h) - 8.0 * t(sys.omega_rf - h)
            + 8.0 * t(sys.omega_rf + h)
            - t(sys.omega_rf + 2.0 * h))
            / (12.0 * h);
        assert_relative_eq!(slope, stencil, max_relative = 1e-3);
    }

    #[test]
    fn sensitivity_scales_inversely_with_waist_and_rf_dipole() {
        let sys = reference_system();
        let base = nef0_model(&sys).unwrap();
        // Doubling the waist quadruples the probe power at fixed Ω_P and
        // fixed atomic response: NEF₀ ∝ 1/√P_in halves.
        let mut wide = sys;
        wide.beam_waist *= 2.0;
        assert_relative_eq!(nef0_model(&wide).unwrap(), base / 2.0, max_relative = 1e-9);
        let mut strong = sys;
        strong.mu_rf *= 3.0;
        assert_relative_eq!(nef0_model(&strong).unwrap(), base / 3.0, max_relative = 1e-9);
    }

    #[test]
    fn sensitivity_consistent_with_direct_detection_chain() {
        // Extracting the relative modulation index m_p = (µ_d/h)·|δT_r/δΩ|/T_r
        // and the detected power P₀ = T_r·P_in must reduce nef0_model to the
        // shot-noise-limited direct-detection formula.
        use crate::optics::{nef_optical, OpticalDetection, OpticalScheme};
        let sys = reference_system();
        let t_r = transmission(&sys).unwrap();
        let slope = transmission_slope(&sys).unwrap();
        let m_p = sys.mu_rf / PLANCK * slope.abs() / t_r;
        let det = OpticalDetection {
            scheme: OpticalScheme::Direct,
            probe_power: t_r * sys.probe_power(),
            probe_freq: sys.probe_freq,
            quantum_efficiency: 1.0,
            nep_pd: 0.0,
            modulation_index: m_p,
            lo_power: 0.0,
            relative_phase: 0.0,
        };
        let direct = nef_optical(&det).unwrap();
        let model = nef0_model(&sys).unwrap();
        assert_relative_eq!(model, direct, max_relative = 1e-9);
    }

    #[test]
    fn rabi_optimum_stable_under_grid_refinement() {
        // Stationary single-class landscape: the refined optimum must not
        // move by more than 10% per coordinate when the scan doubles.
        let template = reference_system();
        let bounds_p = (TAU * 1e6, TAU * 16e6);
        let bounds_c = (TAU * 0.5e6, TAU * 4e6);
        let coarse = optimize_rabi(&template, bounds_p, bounds_c, 21).unwrap();
        let fine = optimize_rabi(&template, bounds_p, bounds_c, 41).unwrap();
        assert_relative_eq!(coarse.omega_probe, fine.omega_probe, max_relative = 0.10);
        assert_relative_eq!(coarse.omega_coupling, fine.omega_coupling, max_relative = 0.10);
        assert!(fine.nef0 <= coarse.nef0 * 1.02);
    }

    #[test]
    fn probe_power_matches_gaussian_beam_closed_form() {
        let sys = reference_system();
        let e_peak = HBAR * sys.omega_probe / sys.mu_probe;
        let expected = std::f64::consts::PI / 4.0
            * sys.beam_waist.powi(2)
            * VACUUM_PERMITTIVITY
            * SPEED_OF_LIGHT
            * e_peak
            * e_peak;
        assert_relative_eq!(sys.probe_power(), expected, max_relative = 1e-14);
    }

    #[test]
    fn transit_dephasing_magnitude_is_sane() {
        // Rb85 at 300 K through a 0.5 mm waist: tens of kHz.
        let rate = transit_dephasing(0.5e-3, 300.0, 84.91 * 1.66054e-27);
        assert!(rate > TAU * 20e3 && rate < TAU * 60e3, "rate = {rate}");
    }
}

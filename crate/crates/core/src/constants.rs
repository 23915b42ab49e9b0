//! Physical constants in SI units (CODATA 2018).

/// Planck constant (J·s)
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Reduced Planck constant (J·s)
pub const HBAR: f64 = 1.054_571_817e-34;

/// Boltzmann constant (J/K)
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Speed of light in vacuum (m/s)
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Vacuum permittivity (F/m)
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_8128e-12;

/// Vacuum permeability (H/m)
pub const VACUUM_PERMEABILITY: f64 = 1.256_637_062_12e-6;

/// Free-space wave impedance (Ω)
pub const FREE_SPACE_IMPEDANCE: f64 = 376.730_313_668;

/// Elementary charge (C)
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Bohr radius (m)
pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;

/// Room temperature used throughout for thermal backgrounds (K).
pub const ROOM_TEMPERATURE: f64 = 290.0;

/// Effective gain of an omnidirectional single-polarization receiver.
pub const DIPOLE_GAIN: f64 = 1.5;

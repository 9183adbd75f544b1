//! Physical constants (CODATA 2018), fixed in one place so derived
//! numbers are reproducible.

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Boltzmann constant (J/K).
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// 2π, for Hz ↔ rad/s conversions.
pub const TWO_PI: f64 = std::f64::consts::TAU;

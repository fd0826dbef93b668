//! Physical constants and unit conversions. Energies are in meV throughout.

use std::f64::consts::PI;

/// Planck constant in meV·s.
pub const PLANCK_MEV_S: f64 = 4.135667696e-12;

/// Reduced Planck constant in meV·s.
pub const HBAR_MEV_S: f64 = PLANCK_MEV_S / (2.0 * PI);

/// Frequency in GHz of a photon with energy `e` (meV).
pub fn mev_to_ghz(e: f64) -> f64 {
    e / PLANCK_MEV_S * 1e-9
}

/// Angular frequency in rad/s for an energy `e` (meV).
pub fn mev_to_angular(e: f64) -> f64 {
    e / HBAR_MEV_S
}

/// Energy in meV corresponding to angular frequency `w` (rad/s).
pub fn angular_to_mev(w: f64) -> f64 {
    w * HBAR_MEV_S
}

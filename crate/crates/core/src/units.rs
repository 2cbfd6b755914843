//! Unit system and physical constants.
//!
//! Photon energies are in eV (the symbol ω is used for ħω throughout),
//! lengths in nm and pressures in Pa. Wavenumbers are therefore nm⁻¹ and
//! the only place SI shows up is the final pressure conversion.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// ħc in eV·nm.
pub const HBAR_C: f64 = 197.326_980_4;

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// ħ in eV·s.
pub const HBAR: f64 = 6.582_119_569e-16;

/// Elementary charge in C, i.e. joules per eV.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// 1 eV/nm³ expressed in Pa (J/m³).
pub const EV_PER_NM3_IN_PA: f64 = ELEMENTARY_CHARGE * 1e27;

/// Vacuum wavenumber ω/c in nm⁻¹ of a photon with energy `energy` eV.
pub fn energy_to_vacuum_wavenumber(energy: f64) -> Result<f64> {
    if !(energy >= 0.0) {
        return Err(Error::invalid("energy", format!("must be >= 0 eV, got {energy}")));
    }
    Ok(energy / HBAR_C)
}

/// Plasma wavelength λ_p = 2πc/ω_p in nm.
pub fn plasma_wavelength(omega_p: f64) -> Result<f64> {
    if !(omega_p > 0.0) {
        return Err(Error::invalid("omega_p", format!("must be > 0 eV, got {omega_p}")));
    }
    Ok(2.0 * PI * HBAR_C / omega_p)
}

/// Film thickness below which a film of plasma energy `omega_p` supports an
/// ENZ mode (λ_p / 50).
pub fn enz_thickness_threshold(omega_p: f64) -> Result<f64> {
    Ok(plasma_wavelength(omega_p)? / 50.0)
}

/// Angular frequency in rad/s of a photon of `energy` eV.
#[inline]
pub fn energy_to_angular_frequency(energy: f64) -> f64 {
    energy / HBAR
}

#[inline]
pub fn angular_frequency_to_energy(omega: f64) -> f64 {
    omega * HBAR
}

/// Converts an energy density in eV/nm³ to Pa.
#[inline]
pub fn ev_per_nm3_to_pa(value: f64) -> f64 {
    value * EV_PER_NM3_IN_PA
}

/// Ideal-conductor Casimir pressure −π²ħc/(240 d⁴) in Pa, `d` in nm.
pub fn ideal_casimir_pressure(d: f64) -> f64 {
    ev_per_nm3_to_pa(-PI * PI * HBAR_C / (240.0 * d.powi(4)))
}

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Free-electron permittivity ε(ω) = 1 − ω_p²/(ω² + iγ_pω).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrudeModel {
    /// Plasma energy in eV.
    pub omega_p: f64,
    /// Damping energy in eV.
    pub gamma_p: f64,
}

impl DrudeModel {
    pub fn new(omega_p: f64, gamma_p: f64) -> Result<Self> {
        if !(omega_p > 0.0 && omega_p.is_finite()) {
            return Err(Error::invalid("omega_p", format!("must be > 0 eV, got {omega_p}")));
        }
        if !(gamma_p > 0.0 && gamma_p.is_finite()) {
            return Err(Error::invalid("gamma_p", format!("must be > 0 eV, got {gamma_p}")));
        }
        Ok(Self { omega_p, gamma_p })
    }

    /// ε on the real axis. Also valid for complex ω in the upper half plane.
    #[inline]
    pub fn eps(&self, omega: Complex64) -> Complex64 {
        let wp2 = self.omega_p * self.omega_p;
        1.0 - wp2 / (omega * omega + Complex64::i() * self.gamma_p * omega)
    }

    #[inline]
    pub fn eps_real(&self, omega: f64) -> Complex64 {
        let wp2 = self.omega_p * self.omega_p;
        1.0 - wp2 / Complex64::new(omega * omega, self.gamma_p * omega)
    }

    #[inline]
    pub fn eps_imag(&self, xi: f64) -> f64 {
        1.0 + self.omega_p * self.omega_p / (xi * xi + self.gamma_p * xi)
    }

    /// Im ε(ω) = ω_p²γ/(ω(ω² + γ²)).
    #[inline]
    pub fn loss(&self, omega: f64) -> f64 {
        self.omega_p * self.omega_p * self.gamma_p / (omega * (omega * omega + self.gamma_p * self.gamma_p))
    }
}

/// Single bound-oscillator permittivity ε(ω) = 1 + C ω_L²/(ω_L² − ω² − iγ_Lω).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LorentzModel {
    pub c_l: f64,
    pub omega_l: f64,
    pub gamma_l: f64,
}

impl LorentzModel {
    pub fn new(c_l: f64, omega_l: f64, gamma_l: f64) -> Result<Self> {
        if !(c_l > 0.0 && c_l.is_finite()) {
            return Err(Error::invalid("c_l", format!("must be > 0, got {c_l}")));
        }
        if !(omega_l > 0.0 && omega_l.is_finite()) {
            return Err(Error::invalid("omega_l", format!("must be > 0 eV, got {omega_l}")));
        }
        if !(gamma_l > 0.0 && gamma_l.is_finite()) {
            return Err(Error::invalid("gamma_l", format!("must be > 0 eV, got {gamma_l}")));
        }
        Ok(Self { c_l, omega_l, gamma_l })
    }

    #[inline]
    pub fn eps(&self, omega: Complex64) -> Complex64 {
        let wl2 = self.omega_l * self.omega_l;
        1.0 + self.c_l * wl2 / (wl2 - omega * omega - Complex64::i() * self.gamma_l * omega)
    }

    #[inline]
    pub fn eps_real(&self, omega: f64) -> Complex64 {
        let wl2 = self.omega_l * self.omega_l;
        1.0 + self.c_l * wl2 / Complex64::new(wl2 - omega * omega, -self.gamma_l * omega)
    }

    #[inline]
    pub fn eps_imag(&self, xi: f64) -> f64 {
        let wl2 = self.omega_l * self.omega_l;
        1.0 + self.c_l * wl2 / (wl2 + xi * xi + self.gamma_l * xi)
    }

    /// Static refractive index √(1 + C_L).
    pub fn static_index(&self) -> f64 {
        (1.0 + self.c_l).sqrt()
    }
}

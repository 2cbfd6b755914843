//! Reflection of a freestanding film (vacuum | film | vacuum).
//!
//! All normal wavenumbers take the branch Im q ≥ 0, so evanescent fields
//! decay away from each interface. On the real axis the in-film wavenumber
//! is written as q₁² = (ε − 1)k₀² + q₀², which avoids the cancellation in
//! εk₀² − k² when k is close to the light line.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::materials::Material;
use crate::units::HBAR_C;

/// Above this value of Im(q₁)·t the round-trip factor is set to zero.
const ROUND_TRIP_CUTOFF: f64 = 350.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    TE,
    TM,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::TE, Polarization::TM];
}

impl std::fmt::Display for Polarization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Polarization::TE => "TE",
            Polarization::TM => "TM",
        })
    }
}

/// A film of thickness `thickness` nm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlabGeometry {
    pub thickness: f64,
    pub material: Material,
}

impl SlabGeometry {
    pub fn new(thickness: f64, material: Material) -> Result<Self> {
        if !(thickness > 0.0 && thickness.is_finite()) {
            return Err(Error::invalid("t", format!("film thickness must be > 0 nm, got {thickness}")));
        }
        Ok(Self { thickness, material })
    }
}

/// A conserved transverse momentum and polarization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransverseChannel {
    pub k: f64,
    pub polarization: Polarization,
}

/// Square root with Im ≥ 0 (and Re ≥ 0 on the positive real axis).
#[inline]
pub fn sqrt_upper(z: Complex64) -> Complex64 {
    let s = z.sqrt();
    if s.im < 0.0 || (s.im == 0.0 && s.re < 0.0) {
        -s
    } else {
        s
    }
}

fn check_omega_k(omega: f64, k: f64) -> Result<()> {
    if !(omega > 0.0) {
        return Err(Error::invalid("omega", format!("must be > 0 eV, got {omega}")));
    }
    if !(k >= 0.0) {
        return Err(Error::invalid("k", format!("must be >= 0 nm^-1, got {k}")));
    }
    Ok(())
}

/// Vacuum normal wavenumber q₀ = √(ω²/c² − k²): real for k < ω/c, +i|…|
/// beyond the light line, exactly zero on it.
pub fn kz_vacuum_real(omega: f64, k: f64) -> Result<Complex64> {
    check_omega_k(omega, k)?;
    let k0 = omega / HBAR_C;
    let diff = (k0 - k) * (k0 + k);
    Ok(if diff >= 0.0 {
        Complex64::new(diff.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-diff).sqrt())
    })
}

/// Single-interface coefficient given vacuum and film normal wavenumbers.
#[inline]
pub fn interface_coefficient(eps: Complex64, q0: Complex64, q1: Complex64, pol: Polarization) -> Complex64 {
    match pol {
        Polarization::TE => (q0 - q1) / (q0 + q1),
        Polarization::TM => (eps * q0 - q1) / (eps * q0 + q1),
    }
}

/// Slab reflection r₀₁(1 − e^{2iq₁t})/(1 − r₀₁²e^{2iq₁t}) for vacuum wavenumber
/// `k0` and vacuum normal wavenumber `q0`. The transverse momentum is implied
/// by k² = k₀² − q₀².
#[inline]
pub fn slab_coefficient(eps: Complex64, k0: f64, q0: Complex64, thickness: f64, pol: Polarization) -> Complex64 {
    let q1 = sqrt_upper((eps - 1.0) * (k0 * k0) + q0 * q0);
    let r01 = interface_coefficient(eps, q0, q1, pol);
    if q1.im * thickness > ROUND_TRIP_CUTOFF {
        return r01;
    }
    let round_trip = (Complex64::i() * 2.0 * thickness * q1).exp();
    r01 * (1.0 - round_trip) / (1.0 - r01 * r01 * round_trip)
}

/// Fresnel coefficient of a single vacuum/medium interface.
pub fn fresnel_interface(eps: Complex64, omega: f64, k: f64, pol: Polarization) -> Result<Complex64> {
    check_omega_k(omega, k)?;
    let k0 = omega / HBAR_C;
    let q0 = kz_vacuum_real(omega, k)?;
    let q1 = sqrt_upper(eps * k0 * k0 - k * k);
    Ok(interface_coefficient(eps, q0, q1, pol))
}

/// Reflection coefficient of the film at real frequency `omega` eV and
/// transverse momentum `k` nm⁻¹.
pub fn slab_reflection_real(slab: &SlabGeometry, omega: f64, k: f64, pol: Polarization) -> Result<Complex64> {
    check_omega_k(omega, k)?;
    let eps = slab.material.eps_real_axis(omega)?;
    let q0 = kz_vacuum_real(omega, k)?;
    Ok(slab_coefficient(eps, omega / HBAR_C, q0, slab.thickness, pol))
}

/// Imaginary-axis slab coefficient in terms of κ₀ and ζ = ξ/ħc (both nm⁻¹)
/// and ε(iξ). κ₁² = κ₀² + (ε − 1)ζ².
#[inline]
pub fn slab_coefficient_imag(eps: f64, zeta: f64, kappa0: f64, thickness: f64, pol: Polarization) -> f64 {
    let kappa1 = (kappa0 * kappa0 + (eps - 1.0) * zeta * zeta).sqrt();
    let r = match pol {
        Polarization::TE => (kappa0 - kappa1) / (kappa0 + kappa1),
        Polarization::TM => (eps * kappa0 - kappa1) / (eps * kappa0 + kappa1),
    };
    let decay = -2.0 * kappa1 * thickness;
    if -decay > 2.0 * ROUND_TRIP_CUTOFF {
        return r;
    }
    let e = decay.exp();
    r * (1.0 - e) / (1.0 - r * r * e)
}

/// Reflection coefficient of the film at imaginary frequency ξ.
pub fn slab_reflection_imag(slab: &SlabGeometry, xi: f64, k: f64, pol: Polarization) -> Result<f64> {
    if !(xi > 0.0) {
        return Err(Error::invalid("xi", format!("must be > 0 eV, got {xi}")));
    }
    if !(k >= 0.0) {
        return Err(Error::invalid("k", format!("must be >= 0 nm^-1, got {k}")));
    }
    let eps = slab.material.eps_imag_axis(xi)?;
    let zeta = xi / HBAR_C;
    let kappa0 = (k * k + zeta * zeta).sqrt();
    Ok(slab_coefficient_imag(eps, zeta, kappa0, slab.thickness, pol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn drude() -> Material {
        Material::drude(3.0, 0.035).unwrap()
    }

    #[test]
    fn kz_branches() {
        // ω chosen so that ω/c = 0.02 nm⁻¹
        let omega = 0.02 * HBAR_C;
        let q = kz_vacuum_real(omega, 0.0).unwrap();
        assert_relative_eq!(q.re, 0.02, max_relative = 1e-14);
        assert_eq!(q.im, 0.0);
        let q = kz_vacuum_real(omega, 0.02).unwrap();
        assert!(q.norm() < 1e-12);
        let q = kz_vacuum_real(omega, 0.025).unwrap();
        assert!(q.re.abs() < 1e-15);
        assert_relative_eq!(q.im, 0.015, max_relative = 1e-12);
        assert!(kz_vacuum_real(0.0, 1.0).is_err());
        assert!(kz_vacuum_real(1.0, -1.0).is_err());
    }

    #[test]
    fn no_interface_no_reflection() {
        let one = Complex64::new(1.0, 0.0);
        for pol in Polarization::BOTH {
            for &(w, k) in &[(1.0, 0.0), (2.0, 0.005), (3.0, 0.5)] {
                assert_eq!(fresnel_interface(one, w, k, pol).unwrap(), Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn perfect_conductor_limit() {
        let eps = Complex64::new(-1e12, 0.0);
        let te = fresnel_interface(eps, 2.0, 0.005, Polarization::TE).unwrap();
        let tm = fresnel_interface(eps, 2.0, 0.005, Polarization::TM).unwrap();
        assert_relative_eq!(te.re, -1.0, epsilon = 1e-5);
        assert_relative_eq!(tm.re, 1.0, epsilon = 1e-5);
    }

    #[test]
    fn spp_pole_enhancement() {
        let w = 2.1213;
        let k0 = w / HBAR_C;
        let eps = drude().eps_real_axis(w).unwrap();
        let near = fresnel_interface(eps, w, 3.0 * k0, Polarization::TM).unwrap().norm();
        let far = fresnel_interface(eps, w, 0.5 * k0, Polarization::TM).unwrap().norm();
        assert!(near > 10.0 * far, "near {near} far {far}");
    }

    #[test]
    fn thick_film_is_bulk() {
        let slab = SlabGeometry::new(1000.0, drude()).unwrap();
        for &(w, kf) in &[(0.5, 0.3), (1.5, 2.0), (2.5, 5.0), (2.0, 0.0)] {
            let k = kf * w / HBAR_C;
            let eps = drude().eps_real_axis(w).unwrap();
            let k0 = w / HBAR_C;
            let q1 = sqrt_upper(eps * k0 * k0 - k * k);
            if q1.im * 1000.0 <= 14.0 {
                continue;
            }
            for pol in Polarization::BOTH {
                let r = slab_reflection_real(&slab, w, k, pol).unwrap();
                let r01 = fresnel_interface(eps, w, k, pol).unwrap();
                assert!((r - r01).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn vacuum_film_reflects_nothing() {
        let slab = SlabGeometry::new(5.0, Material::vacuum()).unwrap();
        for pol in Polarization::BOTH {
            assert_eq!(slab_reflection_real(&slab, 2.0, 0.05, pol).unwrap().norm(), 0.0);
            assert_eq!(slab_reflection_imag(&slab, 2.0, 0.05, pol).unwrap(), 0.0);
        }
    }

    #[test]
    fn ultrathin_film_resonance_near_enz() {
        // Near 3 eV the 2 nm film has a TM pole beyond the light line; the
        // 200 nm film is above its SPP frequency and has none.
        let w = 2.95;
        let k0 = w / HBAR_C;
        let peak = |t: f64| {
            let slab = SlabGeometry::new(t, drude()).unwrap();
            (1..400)
                .map(|i| {
                    let k = k0 * (1.0 + 0.1 * i as f64);
                    slab_reflection_real(&slab, w, k, Polarization::TM).unwrap().norm()
                })
                .fold(0.0, f64::max)
        };
        let thin = peak(2.0);
        let thick = peak(200.0);
        assert!(thin > 2.5 && thick < 1.2, "thin {thin} thick {thick}");
    }

    #[test]
    fn imaginary_axis_oracle() {
        // Scripted evaluation of the closed forms for Drude(3, 0.035),
        // ξ = 1 eV, k = 0.01 nm⁻¹, TM, t = 200 nm.
        let eps = 1.0 + 9.0 / (1.0 + 0.035);
        let zeta = 1.0 / 197.326_980_4;
        let k0 = (0.01f64 * 0.01 + zeta * zeta).sqrt();
        let k1 = (0.01f64 * 0.01 + eps * zeta * zeta).sqrt();
        let r = (eps * k0 - k1) / (eps * k0 + k1);
        let e = (-2.0 * k1 * 200.0).exp();
        let expected = r * (1.0 - e) / (1.0 - r * r * e);
        let slab = SlabGeometry::new(200.0, drude()).unwrap();
        let got = slab_reflection_imag(&slab, 1.0, 0.01, Polarization::TM).unwrap();
        assert_relative_eq!(got, expected, max_relative = 1e-13);
        assert!(got > 0.0 && got < 1.0);
    }

    #[test]
    fn imaginary_axis_bulk_limit() {
        let thick = SlabGeometry::new(1e6, drude()).unwrap();
        let eps = drude().eps_imag_axis(0.8).unwrap();
        let zeta = 0.8 / HBAR_C;
        let kappa0 = (0.02f64.powi(2) + zeta * zeta).sqrt();
        let kappa1 = (0.02f64.powi(2) + eps * zeta * zeta).sqrt();
        let te = slab_reflection_imag(&thick, 0.8, 0.02, Polarization::TE).unwrap();
        assert_relative_eq!(te, (kappa0 - kappa1) / (kappa0 + kappa1), max_relative = 1e-14);
    }

    #[test]
    fn imaginary_axis_bounded_on_grid() {
        for m in [drude(), Material::lorentz(1.0, 15.0, 0.01).unwrap()] {
            for &t in &[0.5, 2.0, 20.0, 200.0, 2000.0] {
                let slab = SlabGeometry::new(t, m.clone()).unwrap();
                for i in 0..20 {
                    let xi = 1e-3 * 10f64.powf(i as f64 * 5.0 / 19.0);
                    for j in 0..20 {
                        let k = 1e-5 * 10f64.powf(j as f64 * 6.0 / 19.0);
                        for pol in Polarization::BOTH {
                            let r = slab_reflection_imag(&slab, xi, k, pol).unwrap();
                            assert!(r.is_finite() && r.abs() < 1.0, "{} t={t} xi={xi} k={k} {pol}: {r}", m.name);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn te_vanishes_faster_than_tm_shift_for_dilute_film() {
        // For ε close to 1 both coefficients are small; at normal incidence
        // the TE and TM slab values coincide up to sign convention, and the
        // TE coefficient stays bounded by the TM deviation scale.
        let eps = Complex64::new(1.01, 0.001);
        let w = 2.0;
        let r_te0 = fresnel_interface(eps, w, 0.0, Polarization::TE).unwrap();
        let r_tm0 = fresnel_interface(eps, w, 0.0, Polarization::TM).unwrap();
        assert_relative_eq!(r_te0.norm(), r_tm0.norm(), max_relative = 1e-12);
        assert!(r_te0.norm() < 0.01);
        let k = 0.5 * w / HBAR_C;
        let te = fresnel_interface(eps, w, k, Polarization::TE).unwrap();
        let tm = fresnel_interface(eps, w, k, Polarization::TM).unwrap();
        assert!(te.norm() > r_te0.norm());
        assert!(tm.norm() < r_tm0.norm());
    }

    proptest! {
        #[test]
        fn slab_is_even_in_film_wavenumber(w in 0.1f64..6.0, kf in 0.0f64..20.0, t in 0.5f64..300.0) {
            let eps = drude().eps_real_axis(w).unwrap();
            let k0 = w / HBAR_C;
            let k = kf * k0;
            let q0 = kz_vacuum_real(w, k).unwrap();
            for pol in Polarization::BOTH {
                let q1 = sqrt_upper(eps * k0 * k0 - k * k);
                let eval = |q1: Complex64| {
                    let r01 = interface_coefficient(eps, q0, q1, pol);
                    let e = (Complex64::i() * 2.0 * t * q1).exp();
                    r01 * (1.0 - e) / (1.0 - r01 * r01 * e)
                };
                let a = eval(q1);
                let b = eval(-q1);
                prop_assume!(a.norm() < 1e6 && (q1.im * t) < 30.0);
                prop_assert!((a - b).norm() <= 1e-8 * (1.0 + a.norm()));
            }
        }

        #[test]
        fn slab_converges_to_bulk(w in 0.1f64..6.0, kf in 0.0f64..20.0, t in 1.0f64..400.0) {
            let slab = SlabGeometry::new(t, drude()).unwrap();
            let eps = drude().eps_real_axis(w).unwrap();
            let k0 = w / HBAR_C;
            let k = kf * k0;
            let q1 = sqrt_upper(eps * k0 * k0 - k * k);
            for pol in Polarization::BOTH {
                let r = slab_reflection_real(&slab, w, k, pol).unwrap();
                let r01 = fresnel_interface(eps, w, k, pol).unwrap();
                let decay = (-2.0 * q1.im * t).exp();
                let denom = 1.0 - r01.norm_sqr();
                prop_assume!(denom > 1e-3 && decay < 0.5);
                // |r − r01| = |r01| e (1 − r01²)/(1 − r01² e) ≤ e·2/(1 − |r01|²)
                prop_assert!((r - r01).norm() <= decay * 2.0 / denom + 1e-12);
            }
        }
    }
}

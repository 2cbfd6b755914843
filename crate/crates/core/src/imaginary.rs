//! Zero-temperature Lifshitz pressure on the imaginary frequency axis.
//!
//! P(d) = −(ħ/2π²)∫₀^∞dξ∫₀^∞k dk κ₀ Σ_p r_p²e^{−2κ₀d}/(1 − r_p²e^{−2κ₀d}).
//!
//! With ζ = ξ/ħc and polar variables (κ₀, s = ζ/κ₀) the k-integral becomes
//! κ₀dκ₀ at fixed ζ, and substituting u = 2κ₀d gives
//!
//! P = −ħc/(32π²d⁴) ∫₀^∞ u³ du ∫₀¹ ds Σ_p y_p/(1 − y_p),  y_p = r_p²e^{−u}.
//!
//! The outer integral is cut at u = 60, where e^{−u} is below 1e-26.

use std::cell::Cell;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::materials::{ImaginaryAxis, Material};
use crate::optics::{slab_coefficient_imag, Polarization, SlabGeometry};
use crate::quad::{integrate, integrate_panels, Estimate, QuadratureSettings};
use crate::units::{ev_per_nm3_to_pa, HBAR_C};

/// Upper limit of the radial variable u = 2κ₀d.
pub const RADIAL_CUTOFF: f64 = 60.0;

/// Two identical films of the same material separated by a vacuum gap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CavityConfig {
    pub slab: SlabGeometry,
    /// Gap width d in nm.
    pub gap: f64,
}

impl CavityConfig {
    pub fn new(material: Material, thickness: f64, gap: f64) -> Result<Self> {
        let slab = SlabGeometry::new(thickness, material)?;
        Self::from_slab(slab, gap)
    }

    pub fn from_slab(slab: SlabGeometry, gap: f64) -> Result<Self> {
        if !(gap > 0.0 && gap.is_finite()) {
            return Err(Error::invalid("d", format!("gap must be > 0 nm, got {gap}")));
        }
        Ok(Self { slab, gap })
    }

    pub fn thickness(&self) -> f64 {
        self.slab.thickness
    }

    pub fn material(&self) -> &Material {
        &self.slab.material
    }

    pub fn with_gap(&self, gap: f64) -> Result<Self> {
        Self::from_slab(self.slab.clone(), gap)
    }

    pub fn with_thickness(&self, thickness: f64) -> Result<Self> {
        Self::new(self.slab.material.clone(), thickness, self.gap)
    }
}

/// Casimir pressure in Pa; negative values are attractive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PressureResult {
    pub pressure: f64,
    pub est_abs_error: f64,
    pub evaluations: usize,
}

/// Sum over polarizations of y/(1 − y) at one (u, s) point, in the units of
/// the double integral above.
#[inline]
fn mode_sum(eps_axis: &ImaginaryAxis<'_>, thickness: f64, gap: f64, u: f64, s: f64) -> f64 {
    let kappa0 = u / (2.0 * gap);
    let zeta = kappa0 * s;
    let eps = eps_axis.eval(zeta * HBAR_C);
    let damp = (-u).exp();
    let mut total = 0.0;
    for pol in Polarization::BOTH {
        let r = slab_coefficient_imag(eps, zeta, kappa0, thickness, pol);
        let y = r * r * damp;
        total += y / (1.0 - y);
    }
    total
}

/// Outcome of one pass over the (u, s) double integral.
struct RadialPass {
    outer: Estimate,
    evaluations: usize,
    /// Bound on ∫u³·(inner error) du.
    inner_error: f64,
}

/// Evaluates ∫u³du∫ds Σ y/(1 − y). Inner integrals aim at relative accuracy
/// `inner_rel`, relaxed to an absolute `floor/u³` where the u³ weight makes
/// them irrelevant. With `strict` an unconverged inner integral aborts the
/// pass; otherwise its best estimate is used. The combined evaluation count
/// is held to `outer.max_evals`.
fn radial_pass(
    eps_axis: &ImaginaryAxis<'_>,
    thickness: f64,
    gap: f64,
    outer: &QuadratureSettings,
    inner_rel: f64,
    floor: f64,
    strict: bool,
) -> Result<RadialPass> {
    let budget = outer.max_evals;
    let inner_budget = (budget / 50).max(2_000);
    let evaluations = Cell::new(0usize);
    let inner_error = Cell::new(0.0f64);
    let failure: Cell<Option<Error>> = Cell::new(None);

    let integrand = |u: f64| -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if evaluations.get() > budget {
            failure.set(Some(Error::NotConverged {
                context: "evaluation budget exhausted".into(),
                estimate: f64::NAN,
                error: f64::INFINITY,
                evaluations: evaluations.get(),
            }));
            return f64::NAN;
        }
        let weight = u * u * u;
        let settings = QuadratureSettings {
            rel_tol: inner_rel,
            abs_tol: floor / weight,
            max_evals: inner_budget,
        };
        let est = match integrate(|s| mode_sum(eps_axis, thickness, gap, u, s), 0.0, 1.0, &settings) {
            Ok(est) => est,
            Err(unconverged) if !strict => unconverged.0,
            Err(unconverged) => {
                evaluations.set(evaluations.get() + unconverged.0.evaluations);
                failure.set(Some(unconverged.into_error(format!("inner ξ-integral at u = {u}"))));
                return f64::NAN;
            }
        };
        evaluations.set(evaluations.get() + est.evaluations);
        inner_error.set(inner_error.get().max(weight * est.error));
        weight * est.value
    };

    let breaks = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, RADIAL_CUTOFF];
    let result = integrate_panels(integrand, &breaks, outer);
    if let Some(err) = failure.take() {
        return Err(err);
    }
    let outer_est = result.map_err(|u| u.into_error("outer radial integral"))?;
    let total = evaluations.get() + outer_est.evaluations;
    if total > budget {
        return Err(Error::NotConverged {
            context: "evaluation budget exhausted".into(),
            estimate: outer_est.value,
            error: outer_est.error,
            evaluations: total,
        });
    }
    Ok(RadialPass {
        outer: outer_est,
        evaluations: total,
        inner_error: RADIAL_CUTOFF * inner_error.get(),
    })
}

/// Total Casimir pressure between the two films of `cfg`.
///
/// A coarse pass fixes the magnitude of the radial integral. The accurate
/// pass then lets each inner integral stop once its error, weighted by u³,
/// is a small fraction of the requested tolerance. Near u = 0 the inner
/// integrand has an integrable layer at s ~ u that would otherwise exhaust
/// any relative target.
pub fn total_pressure(cfg: &CavityConfig, quad: &QuadratureSettings) -> Result<PressureResult> {
    quad.validate()?;
    let eps_axis = cfg.material().imaginary_axis()?;
    let thickness = cfg.thickness();
    let gap = cfg.gap;

    let coarse_settings = QuadratureSettings {
        rel_tol: quad.rel_tol.max(1e-3),
        abs_tol: 0.0,
        max_evals: quad.max_evals,
    };
    let coarse = radial_pass(&eps_axis, thickness, gap, &coarse_settings, 1e-4, 0.0, false)?;
    let floor = 0.1 * quad.rel_tol * coarse.outer.value.abs() / RADIAL_CUTOFF;
    let fine_settings = QuadratureSettings {
        max_evals: quad.max_evals.saturating_sub(coarse.evaluations).max(21),
        ..*quad
    };
    let fine = radial_pass(&eps_axis, thickness, gap, &fine_settings, quad.rel_tol * 0.1, floor, true)?;

    let prefactor = -HBAR_C / (32.0 * PI * PI * gap.powi(4));
    let pressure = ev_per_nm3_to_pa(prefactor * fine.outer.value);
    let error = ev_per_nm3_to_pa((prefactor * (fine.outer.error + fine.inner_error)).abs());
    Ok(PressureResult {
        pressure,
        est_abs_error: error,
        evaluations: coarse.evaluations + fine.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::ideal_casimir_pressure;
    use approx::assert_relative_eq;

    fn drude_cfg(t: f64, d: f64) -> CavityConfig {
        CavityConfig::new(Material::drude(3.0, 0.035).unwrap(), t, d).unwrap()
    }

    #[test]
    fn ideal_metal_limit() {
        let metal = Material::drude(100.0, 1e-4).unwrap();
        let cfg = CavityConfig::new(metal.clone(), 1000.0, 1000.0).unwrap();
        let p = total_pressure(&cfg, &QuadratureSettings::default()).unwrap();
        assert_relative_eq!(p.pressure, -1.300e-3, max_relative = 0.02);

        // Plasma-model expansion in δ/d with δ = ħc/ω_p:
        // η = 1 − (16/3)x + 24x² − (640/7)(1 − π²/210)x³.
        let d = 100.0;
        let x = HBAR_C / 100.0 / d;
        let eta = 1.0 - 16.0 / 3.0 * x + 24.0 * x * x - 640.0 / 7.0 * (1.0 - PI * PI / 210.0) * x.powi(3);
        let cfg = CavityConfig::new(metal, 1000.0, d).unwrap();
        let p = total_pressure(&cfg, &QuadratureSettings::default()).unwrap();
        assert_relative_eq!(p.pressure, eta * ideal_casimir_pressure(d), max_relative = 2e-3);
    }

    #[test]
    fn vacuum_films_do_not_interact() {
        let cfg = CavityConfig::new(Material::vacuum(), 5.0, 10.0).unwrap();
        let p = total_pressure(&cfg, &QuadratureSettings::default()).unwrap();
        assert_eq!(p.pressure, 0.0);
    }

    #[test]
    fn pressure_grows_with_thickness() {
        let q = QuadratureSettings::default();
        let ps: Vec<f64> = [2.0, 5.0, 20.0, 200.0]
            .iter()
            .map(|&t| total_pressure(&drude_cfg(t, 10.0), &q).unwrap().pressure.abs())
            .collect();
        assert!(ps.windows(2).all(|w| w[1] > w[0]), "{ps:?}");
    }

    #[test]
    fn reference_values() {
        // Independent nested adaptive evaluation in (κ, s) coordinates.
        let q = QuadratureSettings::default();
        let p = total_pressure(&drude_cfg(2.0, 10.0), &q).unwrap().pressure;
        assert_relative_eq!(p, -1916.195, max_relative = 1e-4);
        let p = total_pressure(&drude_cfg(200.0, 100.0), &q).unwrap().pressure;
        assert_relative_eq!(p, -2.715843, max_relative = 1e-4);
    }

    #[test]
    fn thin_film_at_large_gap_is_cheap_and_stable() {
        // The s-integrand develops a layer of width ~u near s = 0.
        let cfg = drude_cfg(0.5, 1000.0);
        let loose = total_pressure(&cfg, &QuadratureSettings::with_rel_tol(1e-6)).unwrap();
        let tight = total_pressure(&cfg, &QuadratureSettings::with_rel_tol(1e-11)).unwrap();
        assert!(tight.evaluations < 500_000, "{}", tight.evaluations);
        assert!((loose.pressure - tight.pressure).abs() <= loose.est_abs_error.max(1e-6 * tight.pressure.abs()));
    }

    #[test]
    fn error_estimate_covers_tolerance_halving() {
        let cfg = drude_cfg(2.0, 100.0);
        let coarse = total_pressure(&cfg, &QuadratureSettings::with_rel_tol(1e-6)).unwrap();
        let fine = total_pressure(&cfg, &QuadratureSettings::with_rel_tol(5e-7)).unwrap();
        assert!(coarse.est_abs_error >= 0.0);
        assert!((coarse.pressure - fine.pressure).abs() <= coarse.est_abs_error);
    }

    #[test]
    fn tiny_budget_is_reported() {
        let q = QuadratureSettings {
            rel_tol: 1e-12,
            abs_tol: 0.0,
            max_evals: 500,
        };
        assert!(matches!(total_pressure(&drude_cfg(2.0, 10.0), &q), Err(Error::NotConverged { .. })));
    }

    #[test]
    fn rejects_bad_geometry() {
        let m = Material::drude(3.0, 0.035).unwrap();
        assert!(CavityConfig::new(m.clone(), 0.0, 10.0).is_err());
        assert!(CavityConfig::new(m, 2.0, -1.0).is_err());
    }
}

//! Dielectric functions on the real and imaginary frequency axes.

mod analytic;
mod tabulated;

use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use analytic::{DrudeModel, LorentzModel};
pub use tabulated::{
    load_nk_table, parse_nk_table, Extrapolation, LowFrequencyTail, PowerLawDecay, TabulatedMaterial,
};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum MaterialModel {
    Drude(DrudeModel),
    Lorentz(LorentzModel),
    Tabulated(TabulatedMaterial),
}

/// A named dielectric model. Immutable once built; the imaginary-axis
/// interpolant for tabulated data is computed lazily and shared by clones.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    pub model: MaterialModel,
    #[serde(skip)]
    imag_table: Arc<OnceLock<std::result::Result<Arc<ImagAxisTable>, Error>>>,
}

impl PartialEq for Material {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.model == other.model
    }
}

impl Material {
    pub fn new(name: impl Into<String>, model: MaterialModel) -> Self {
        Self {
            name: name.into(),
            model,
            imag_table: Arc::default(),
        }
    }

    pub fn drude(omega_p: f64, gamma_p: f64) -> Result<Self> {
        Ok(Self::new(
            format!("drude({omega_p},{gamma_p})"),
            MaterialModel::Drude(DrudeModel::new(omega_p, gamma_p)?),
        ))
    }

    pub fn lorentz(c_l: f64, omega_l: f64, gamma_l: f64) -> Result<Self> {
        Ok(Self::new(
            format!("lorentz({c_l},{omega_l},{gamma_l})"),
            MaterialModel::Lorentz(LorentzModel::new(c_l, omega_l, gamma_l)?),
        ))
    }

    pub fn tabulated(name: impl Into<String>, table: TabulatedMaterial) -> Self {
        Self::new(name, MaterialModel::Tabulated(table))
    }

    /// ε ≡ 1: a table with n = 1, k = 0 and matching tails.
    pub fn vacuum() -> Self {
        let grid: Vec<f64> = (0..8).map(|i| 10f64.powi(i - 3)).collect();
        let table = TabulatedMaterial::new(
            grid,
            vec![1.0; 8],
            vec![0.0; 8],
            Extrapolation::new(LowFrequencyTail::Constant, PowerLawDecay::default()),
        )
        .expect("vacuum table is valid");
        Self::tabulated("vacuum", table)
    }

    pub fn eps_real_axis(&self, omega: f64) -> Result<Complex64> {
        if !(omega > 0.0) {
            return Err(Error::invalid("omega", format!("must be > 0 eV, got {omega}")));
        }
        match &self.model {
            MaterialModel::Drude(m) => Ok(m.eps_real(omega)),
            MaterialModel::Lorentz(m) => Ok(m.eps_real(omega)),
            MaterialModel::Tabulated(t) => t.eps_real_axis(omega),
        }
    }

    /// ε(iξ). Tabulated materials evaluate the Kramers–Kronig integral
    /// directly; use [`Material::imaginary_axis`] inside hot loops.
    pub fn eps_imag_axis(&self, xi: f64) -> Result<f64> {
        if !(xi > 0.0) {
            return Err(Error::invalid("xi", format!("must be > 0 eV, got {xi}")));
        }
        match &self.model {
            MaterialModel::Drude(m) => Ok(m.eps_imag(xi)),
            MaterialModel::Lorentz(m) => Ok(m.eps_imag(xi)),
            MaterialModel::Tabulated(t) => t.eps_imag_axis(xi),
        }
    }

    /// Analytic continuation to complex frequency (analytic models only).
    pub fn eps_complex(&self, omega: Complex64) -> Result<Complex64> {
        match &self.model {
            MaterialModel::Drude(m) => Ok(m.eps(omega)),
            MaterialModel::Lorentz(m) => Ok(m.eps(omega)),
            MaterialModel::Tabulated(_) => Err(Error::Unsupported(format!(
                "{} has no analytic continuation to complex frequency",
                self.name
            ))),
        }
    }

    /// Cheap evaluator for ε(iξ).
    pub fn imaginary_axis(&self) -> Result<ImaginaryAxis<'_>> {
        match &self.model {
            MaterialModel::Drude(m) => Ok(ImaginaryAxis::Drude(m)),
            MaterialModel::Lorentz(m) => Ok(ImaginaryAxis::Lorentz(m)),
            MaterialModel::Tabulated(t) => {
                // Built outside the OnceLock: the build runs on the rayon pool,
                // and a worker blocked in get_or_init could steal a job that
                // needs this same table.
                let cached = match self.imag_table.get() {
                    Some(c) => c,
                    None => {
                        let built = ImagAxisTable::build(t).map(Arc::new);
                        self.imag_table.get_or_init(|| built)
                    }
                };
                cached.clone().map(ImaginaryAxis::Table)
            }
        }
    }

    /// Plasma energy of a conducting material (Drude, or a table with a
    /// Drude low-frequency tail).
    pub fn plasma_energy(&self) -> Option<f64> {
        match &self.model {
            MaterialModel::Drude(m) => Some(m.omega_p),
            MaterialModel::Lorentz(_) => None,
            MaterialModel::Tabulated(t) => t.drude_tail().map(|d| d.omega_p),
        }
    }

    pub fn is_conductor(&self) -> bool {
        self.plasma_energy().is_some()
    }

    /// Energy scale used for default search brackets and spectrum grids.
    pub fn characteristic_energy(&self) -> f64 {
        match &self.model {
            MaterialModel::Drude(m) => m.omega_p,
            MaterialModel::Lorentz(m) => m.omega_l,
            MaterialModel::Tabulated(t) => match t.drude_tail() {
                Some(d) => d.omega_p,
                None => {
                    let (lo, hi) = t.range();
                    (lo * hi).sqrt()
                }
            },
        }
    }

    fn default_bracket(&self) -> (f64, f64) {
        match &self.model {
            MaterialModel::Drude(m) => (0.2 * m.omega_p, 2.0 * m.omega_p),
            MaterialModel::Lorentz(m) => (0.2 * m.omega_l, 2.0 * m.omega_l * m.static_index()),
            MaterialModel::Tabulated(t) => {
                let (lo, hi) = t.range();
                match t.drude_tail() {
                    Some(d) => ((0.2 * d.omega_p).max(lo), (2.0 * d.omega_p).min(hi)),
                    None => (lo, hi),
                }
            }
        }
    }
}

/// Evaluator for ε(iξ) returned by [`Material::imaginary_axis`].
#[derive(Clone, Debug)]
pub enum ImaginaryAxis<'a> {
    Drude(&'a DrudeModel),
    Lorentz(&'a LorentzModel),
    Table(Arc<ImagAxisTable>),
}

impl ImaginaryAxis<'_> {
    #[inline]
    pub fn eval(&self, xi: f64) -> f64 {
        match self {
            ImaginaryAxis::Drude(m) => m.eps_imag(xi),
            ImaginaryAxis::Lorentz(m) => m.eps_imag(xi),
            ImaginaryAxis::Table(t) => t.eval(xi),
        }
    }
}

/// ε(iξ) − 1 from the Kramers–Kronig integral, sampled on a fixed grid in
/// (ln ξ, ln(ε − 1)) and interpolated with a monotone cubic Hermite spline.
/// A piecewise-linear interpolant would put a kink at every node, which the
/// adaptive pressure quadrature resolves only at great cost.
#[derive(Clone, Debug)]
pub struct ImagAxisTable {
    ln_xi0: f64,
    step: f64,
    ln_excess: Vec<f64>,
    /// Node slopes per grid step.
    slopes: Vec<f64>,
    zero: bool,
}

/// Fritsch–Butland slopes for uniformly spaced data (unit spacing).
fn monotone_slopes(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let delta: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let mut m = vec![0.0; n];
    m[0] = delta[0];
    m[n - 1] = delta[n - 2];
    for i in 1..n - 1 {
        let (a, b) = (delta[i - 1], delta[i]);
        m[i] = if a * b > 0.0 { 2.0 * a * b / (a + b) } else { 0.0 };
    }
    m
}

impl ImagAxisTable {
    const XI_MIN: f64 = 1e-5;
    const XI_MAX: f64 = 1e5;
    const PER_DECADE: usize = 64;

    fn build(table: &TabulatedMaterial) -> Result<Self> {
        let decades = (Self::XI_MAX / Self::XI_MIN).log10().round() as usize;
        let n = decades * Self::PER_DECADE + 1;
        let ln_xi0 = Self::XI_MIN.ln();
        let step = std::f64::consts::LN_10 / Self::PER_DECADE as f64;
        let values: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| table.eps_imag_axis((ln_xi0 + step * i as f64).exp()).map(|e| e - 1.0))
            .collect::<Result<_>>()?;
        let zero = values.iter().all(|v| *v <= 0.0);
        if !zero && values.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::KramersKronig(
                "ε(iξ) − 1 must be positive for a passive material".into(),
            ));
        }
        let ln_excess: Vec<f64> = if zero { Vec::new() } else { values.iter().map(|v| v.ln()).collect() };
        Ok(Self {
            ln_xi0,
            step,
            slopes: monotone_slopes(&ln_excess),
            ln_excess,
            zero,
        })
    }

    pub fn eval(&self, xi: f64) -> f64 {
        if self.zero {
            return 1.0;
        }
        let x = (xi.ln() - self.ln_xi0) / self.step;
        let last = self.ln_excess.len() - 1;
        let y = &self.ln_excess;
        let m = &self.slopes;
        // log-log linear extrapolation past either end
        if x <= 0.0 {
            return 1.0 + (y[0] + x * m[0]).exp();
        }
        if x >= last as f64 {
            return 1.0 + (y[last] + (x - last as f64) * m[last]).exp();
        }
        let i = (x.floor() as usize).min(last - 1);
        let s = x - i as f64;
        let (s2, s3) = (s * s, s * s * s);
        let v = (2.0 * s3 - 3.0 * s2 + 1.0) * y[i]
            + (s3 - 2.0 * s2 + s) * m[i]
            + (-2.0 * s3 + 3.0 * s2) * y[i + 1]
            + (s3 - s2) * m[i + 1];
        1.0 + v.exp()
    }
}

/// Finds the first frequency in [lo, hi] where `f` crosses zero from below,
/// by a log-spaced scan followed by bisection to relative tolerance 1e-10.
fn rising_root(mut f: impl FnMut(f64) -> Result<f64>, lo: f64, hi: f64) -> Result<f64> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::invalid("bracket", format!("need 0 < lo < hi, got [{lo}, {hi}]")));
    }
    const SCAN: usize = 512;
    let ratio = (hi / lo).powf(1.0 / SCAN as f64);
    let mut a = lo;
    let mut fa = f(a)?;
    for i in 1..=SCAN {
        let b = if i == SCAN { hi } else { lo * ratio.powi(i as i32) };
        let fb = f(b)?;
        if fa < 0.0 && fb >= 0.0 {
            let (mut x0, mut x1) = (a, b);
            while (x1 - x0) > 1e-10 * x1 {
                let m = 0.5 * (x0 + x1);
                if f(m)? < 0.0 {
                    x0 = m;
                } else {
                    x1 = m;
                }
            }
            return Ok(0.5 * (x0 + x1));
        }
        a = b;
        fa = fb;
    }
    Err(Error::NoRoot { lo, hi })
}

/// Frequency where Re ε rises through zero, searched on the material's
/// default bracket ([0.2ω_p, 2ω_p] for Drude).
pub fn find_enz_frequency(material: &Material) -> Result<f64> {
    let (lo, hi) = material.default_bracket();
    find_enz_frequency_in(material, lo, hi)
}

pub fn find_enz_frequency_in(material: &Material, lo: f64, hi: f64) -> Result<f64> {
    rising_root(|w| material.eps_real_axis(w).map(|e| e.re), lo, hi)
}

/// Surface-plasmon frequency where Re ε = −1.
pub fn find_spp_frequency(material: &Material) -> Result<f64> {
    let (lo, hi) = material.default_bracket();
    rising_root(|w| material.eps_real_axis(w).map(|e| e.re + 1.0), lo * 0.5, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn enz_of_reference_drude() {
        let m = Material::drude(3.0, 0.035).unwrap();
        let w = find_enz_frequency(&m).unwrap();
        assert_relative_eq!(w, (9.0f64 - 0.035 * 0.035).sqrt(), max_relative = 1e-9);
        assert_relative_eq!(w, 2.99980, max_relative = 1e-5);
    }

    #[test]
    fn enz_lossless_limit() {
        let m = Material::drude(3.0, 1e-9).unwrap();
        assert_relative_eq!(find_enz_frequency(&m).unwrap(), 3.0, max_relative = 1e-9);
    }

    #[test]
    fn enz_of_lorentz_is_longitudinal_frequency() {
        let m = Material::lorentz(1.0, 15.0, 0.01).unwrap();
        let w = find_enz_frequency(&m).unwrap();
        assert_relative_eq!(w, 15.0 * 2f64.sqrt(), max_relative = 1e-4);
    }

    #[test]
    fn spp_of_reference_drude() {
        let m = Material::drude(3.0, 0.035).unwrap();
        let w = find_spp_frequency(&m).unwrap();
        assert_relative_eq!(w, (4.5f64 - 0.035 * 0.035).sqrt(), max_relative = 1e-9);
        assert!((w - 2.1211).abs() < 1e-4);
        assert!((w - 2.12).abs() < 0.01);
    }

    #[test]
    fn no_root_reported() {
        let m = Material::drude(3.0, 0.035).unwrap();
        assert!(matches!(find_enz_frequency_in(&m, 4.0, 10.0), Err(Error::NoRoot { .. })));
    }

    #[test]
    fn vacuum_is_unity_everywhere() {
        let v = Material::vacuum();
        for &w in &[1e-4, 0.3, 3.0, 1e4] {
            assert_eq!(v.eps_real_axis(w).unwrap(), Complex64::new(1.0, 0.0));
            assert_eq!(v.eps_imag_axis(w).unwrap(), 1.0);
            assert_eq!(v.imaginary_axis().unwrap().eval(w), 1.0);
        }
    }

    #[test]
    fn transparency_limit() {
        for m in [
            Material::drude(3.0, 0.035).unwrap(),
            Material::lorentz(1.0, 15.0, 0.01).unwrap(),
        ] {
            assert!(m.eps_imag_axis(1e8).unwrap() - 1.0 < 1e-12);
        }
    }

    #[test]
    fn nonpositive_frequency_rejected() {
        let m = Material::drude(3.0, 0.035).unwrap();
        assert!(m.eps_real_axis(0.0).is_err());
        assert!(m.eps_imag_axis(-1.0).is_err());
    }

    #[test]
    fn cached_table_tracks_direct_kk() {
        let d = DrudeModel::new(3.0, 0.035).unwrap();
        let grid: Vec<f64> = (0..1500).map(|i| 0.01 * (30000f64).powf(i as f64 / 1499.0)).collect();
        let t = TabulatedMaterial::from_permittivity(
            grid,
            |w| d.eps_real(w),
            Extrapolation::new(
                LowFrequencyTail::DrudeTail { omega_p: 3.0, gamma_p: 0.035 },
                PowerLawDecay { exponent: 3.0 },
            ),
        )
        .unwrap();
        let m = Material::tabulated("drude-table", t);
        let fast = m.imaginary_axis().unwrap();
        for &xi in &[0.003, 0.05, 0.7, 4.0, 55.0, 900.0] {
            let direct = m.eps_imag_axis(xi).unwrap();
            assert_relative_eq!(fast.eval(xi), direct, max_relative = 2e-4);
        }
    }

    fn log_points(n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
    }

    #[test]
    fn imaginary_axis_strictly_decreasing() {
        for m in [
            Material::drude(3.0, 0.035).unwrap(),
            Material::lorentz(1.0, 15.0, 0.01).unwrap(),
        ] {
            let xs = log_points(100, 1e-3, 1e3);
            let vals: Vec<f64> = xs.iter().map(|&x| m.eps_imag_axis(x).unwrap()).collect();
            assert!(vals.windows(2).all(|w| w[1] < w[0]), "{}", m.name);
            assert!(vals.iter().all(|&v| v > 1.0));
        }
        let l = Material::lorentz(1.0, 15.0, 0.01).unwrap();
        assert!(l.eps_imag_axis(1e-6).unwrap() <= 2.0);
    }

    proptest! {
        #[test]
        fn passivity(wp in 0.5f64..20.0, g in 1e-3f64..1.0, c in 0.1f64..5.0, wl in 0.5f64..30.0, w in 1e-3f64..100.0) {
            let d = Material::drude(wp, g).unwrap();
            let l = Material::lorentz(c, wl, g).unwrap();
            prop_assert!(d.eps_real_axis(w).unwrap().im > 0.0);
            prop_assert!(l.eps_real_axis(w).unwrap().im > 0.0);
        }

        #[test]
        fn enz_above_spp(wp in 0.5f64..20.0, g_frac in 1e-4f64..0.1) {
            let m = Material::drude(wp, wp * g_frac).unwrap();
            prop_assert!(find_enz_frequency(&m).unwrap() > find_spp_frequency(&m).unwrap());
        }
    }
}

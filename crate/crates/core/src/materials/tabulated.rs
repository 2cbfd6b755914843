//! Tabulated optical constants and their continuation to imaginary frequency.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::analytic::DrudeModel;
use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_panels, QuadratureSettings};

const MIN_ROWS: usize = 8;

/// Model for Im ε below the first tabulated energy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum LowFrequencyTail {
    /// Im ε = ω_p²γ/(ω(ω²+γ²)); Re ε follows the same Drude model.
    DrudeTail { omega_p: f64, gamma_p: f64 },
    /// (n, k) held at their first tabulated values.
    Constant,
}

/// Model for ε above the last tabulated energy: Im ε ∝ ω^(−exponent) and
/// Re ε − 1 ∝ ω⁻².
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawDecay {
    pub exponent: f64,
}

impl Default for PowerLawDecay {
    fn default() -> Self {
        Self { exponent: 2.0 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub low: Option<LowFrequencyTail>,
    pub high: Option<PowerLawDecay>,
}

impl Extrapolation {
    pub fn new(low: LowFrequencyTail, high: PowerLawDecay) -> Self {
        Self {
            low: Some(low),
            high: Some(high),
        }
    }
}

/// Refractive index and extinction sampled on a strictly increasing energy
/// grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TabulatedMaterial {
    grid: Vec<f64>,
    n_values: Vec<f64>,
    k_values: Vec<f64>,
    extrapolation: Extrapolation,
}

impl TabulatedMaterial {
    pub fn new(grid: Vec<f64>, n_values: Vec<f64>, k_values: Vec<f64>, extrapolation: Extrapolation) -> Result<Self> {
        if grid.len() != n_values.len() || grid.len() != k_values.len() {
            return Err(Error::invalid("table", "grid, n and k must have equal length"));
        }
        if grid.len() < MIN_ROWS {
            return Err(Error::invalid(
                "table",
                format!("needs at least {MIN_ROWS} rows, got {}", grid.len()),
            ));
        }
        for (i, w) in grid.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(Error::invalid(
                    "table",
                    format!("energies must be strictly increasing (row {})", i + 2),
                ));
            }
        }
        if !(grid[0] > 0.0) {
            return Err(Error::invalid("table", "energies must be positive"));
        }
        if let Some(i) = k_values.iter().position(|k| !(*k >= 0.0)) {
            return Err(Error::invalid("table", format!("negative extinction at row {}", i + 1)));
        }
        if let Some(i) = n_values.iter().position(|n| !(*n > 0.0)) {
            return Err(Error::invalid("table", format!("non-positive index at row {}", i + 1)));
        }
        if let Some(LowFrequencyTail::DrudeTail { omega_p, gamma_p }) = extrapolation.low {
            DrudeModel::new(omega_p, gamma_p)?;
        }
        if let Some(h) = extrapolation.high {
            if !h.exponent.is_finite() {
                return Err(Error::invalid("exponent", "power-law exponent must be finite"));
            }
        }
        Ok(Self {
            grid,
            n_values,
            k_values,
            extrapolation,
        })
    }

    /// Samples a permittivity function on `grid` and stores it as (n, k).
    pub fn from_permittivity(
        grid: Vec<f64>,
        eps: impl Fn(f64) -> Complex64,
        extrapolation: Extrapolation,
    ) -> Result<Self> {
        let (n, k): (Vec<f64>, Vec<f64>) = grid
            .iter()
            .map(|&w| {
                let nk = eps(w).sqrt();
                // principal root already has n >= 0; passive media have k >= 0
                (nk.re, nk.im.max(0.0))
            })
            .unzip();
        Self::new(grid, n, k, extrapolation)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn n_values(&self) -> &[f64] {
        &self.n_values
    }

    pub fn k_values(&self) -> &[f64] {
        &self.k_values
    }

    pub fn extrapolation(&self) -> Extrapolation {
        self.extrapolation
    }

    pub fn range(&self) -> (f64, f64) {
        (self.grid[0], *self.grid.last().unwrap())
    }

    fn low_drude(&self) -> Option<DrudeModel> {
        match self.extrapolation.low {
            Some(LowFrequencyTail::DrudeTail { omega_p, gamma_p }) => Some(DrudeModel { omega_p, gamma_p }),
            _ => None,
        }
    }

    pub(crate) fn drude_tail(&self) -> Option<DrudeModel> {
        self.low_drude()
    }

    /// Log-linear interpolation of (n, k) inside the grid, then squared.
    fn eps_in_grid(&self, omega: f64) -> Complex64 {
        let g = &self.grid;
        let i = match g.binary_search_by(|x| x.total_cmp(&omega)) {
            Ok(i) => return Complex64::new(self.n_values[i], self.k_values[i]).powi(2),
            Err(i) => i.clamp(1, g.len() - 1),
        };
        let (w0, w1) = (g[i - 1], g[i]);
        let s = (omega / w0).ln() / (w1 / w0).ln();
        let n = self.n_values[i - 1] + s * (self.n_values[i] - self.n_values[i - 1]);
        let k = self.k_values[i - 1] + s * (self.k_values[i] - self.k_values[i - 1]);
        Complex64::new(n, k).powi(2)
    }

    fn first_eps(&self) -> Complex64 {
        Complex64::new(self.n_values[0], self.k_values[0]).powi(2)
    }

    fn last_eps(&self) -> Complex64 {
        let i = self.grid.len() - 1;
        Complex64::new(self.n_values[i], self.k_values[i]).powi(2)
    }

    pub fn eps_real_axis(&self, omega: f64) -> Result<Complex64> {
        if !(omega > 0.0) {
            return Err(Error::invalid("omega", format!("must be > 0 eV, got {omega}")));
        }
        let (lo, hi) = self.range();
        if omega < lo {
            return match self.extrapolation.low {
                Some(LowFrequencyTail::DrudeTail { omega_p, gamma_p }) => {
                    Ok(DrudeModel { omega_p, gamma_p }.eps_real(omega))
                }
                Some(LowFrequencyTail::Constant) => Ok(self.first_eps()),
                None => Err(Error::OutOfRange {
                    what: "permittivity",
                    omega,
                    min: lo,
                    max: hi,
                }),
            };
        }
        if omega > hi {
            return match self.extrapolation.high {
                Some(PowerLawDecay { exponent }) => {
                    let last = self.last_eps();
                    let ratio = hi / omega;
                    Ok(Complex64::new(
                        1.0 + (last.re - 1.0) * ratio * ratio,
                        last.im * ratio.powf(exponent),
                    ))
                }
                None => Err(Error::OutOfRange {
                    what: "permittivity",
                    omega,
                    min: lo,
                    max: hi,
                }),
            };
        }
        Ok(self.eps_in_grid(omega))
    }

    /// ε(iξ) = 1 + (2/π)∫₀^∞ ω Im ε(ω)/(ω² + ξ²) dω.
    ///
    /// The grid part is integrated panel by panel with a break at ω = ξ; the
    /// two extrapolated tails are integrated in closed form.
    pub fn eps_imag_axis(&self, xi: f64) -> Result<f64> {
        if !(xi > 0.0) {
            return Err(Error::invalid("xi", format!("must be > 0 eV, got {xi}")));
        }
        let (lo, hi) = self.range();
        let low = match self.extrapolation.low {
            Some(LowFrequencyTail::DrudeTail { omega_p, gamma_p }) => {
                omega_p * omega_p * gamma_p * drude_tail_kernel(lo, gamma_p, xi)
            }
            Some(LowFrequencyTail::Constant) => 0.5 * self.first_eps().im * (lo / xi).powi(2).ln_1p(),
            None => {
                return Err(Error::KramersKronig(
                    "no low-frequency extrapolation configured".into(),
                ))
            }
        };
        let high = match self.extrapolation.high {
            Some(PowerLawDecay { exponent }) => {
                if !(exponent > 0.0) {
                    return Err(Error::KramersKronig(format!(
                        "power-law exponent {exponent} leaves the high-frequency tail unbounded"
                    )));
                }
                self.last_eps().im * power_law_tail(exponent, xi / hi)?
            }
            None => {
                return Err(Error::KramersKronig(
                    "no high-frequency extrapolation configured".into(),
                ))
            }
        };

        let mut breaks: Vec<f64> = self.grid.clone();
        if xi > lo && xi < hi {
            let at = breaks.partition_point(|&w| w < xi);
            if breaks[at] != xi {
                breaks.insert(at, xi);
            }
        }
        let xi2 = xi * xi;
        let settings = QuadratureSettings {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_evals: 400 * breaks.len() * 21,
        };
        let body = integrate_panels(
            |w| w * self.eps_in_grid(w).im / (w * w + xi2),
            &breaks,
            &settings,
        )
        .map_err(|u| u.into_error(format!("Kramers-Kronig grid integral at xi = {xi} eV")))?;

        let total = low + body.value + high;
        if !total.is_finite() {
            return Err(Error::KramersKronig(format!("non-finite result at xi = {xi} eV")));
        }
        Ok(1.0 + 2.0 / PI * total)
    }
}

/// ∫₀^a dω / ((ω² + γ²)(ω² + ξ²)).
fn drude_tail_kernel(a: f64, gamma: f64, xi: f64) -> f64 {
    let g = |x: f64| (a / x).atan() / x;
    if (xi - gamma).abs() > 1e-6 * gamma {
        (g(gamma) - g(xi)) / (xi * xi - gamma * gamma)
    } else {
        let x = 0.5 * (xi + gamma);
        (a / (x * (x * x + a * a)) + (a / x).atan() / (x * x)) / (2.0 * x)
    }
}

/// ∫₀¹ u^(p−1) / (1 + x²u²) du, the high-frequency tail in units of Im ε at
/// the last grid point.
fn power_law_tail(p: f64, x: f64) -> Result<f64> {
    let x2 = x * x;
    let exact = if p == 1.0 {
        Some(if x < 1e-4 { 1.0 - x2 / 3.0 } else { x.atan() / x })
    } else if p == 2.0 {
        Some(if x < 1e-4 { 0.5 * (1.0 - x2 / 2.0) } else { x2.ln_1p() / (2.0 * x2) })
    } else if p == 3.0 {
        Some(if x < 1e-3 {
            1.0 / 3.0 - x2 / 5.0 + x2 * x2 / 7.0
        } else {
            (1.0 - x.atan() / x) / x2
        })
    } else {
        None
    };
    if let Some(v) = exact {
        return Ok(v);
    }
    integrate(
        |u: f64| u.powf(p - 1.0) / (1.0 + x2 * u * u),
        0.0,
        1.0,
        &QuadratureSettings::with_rel_tol(1e-10),
    )
    .map(|e| e.value)
    .map_err(|u| u.into_error("power-law tail"))
}

/// Parses an n,k table: three columns (energy in eV, n, k) separated by
/// whitespace or commas, `#` comments allowed.
pub fn parse_nk_table(text: &str, source_name: &str, extrapolation: Extrapolation) -> Result<TabulatedMaterial> {
    let table_err = |line: usize, reason: String| Error::Table {
        source_name: source_name.to_string(),
        line,
        reason,
    };
    let mut grid = Vec::new();
    let mut n = Vec::new();
    let mut k = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        if fields.len() != 3 {
            return Err(table_err(lineno, format!("expected 3 columns, found {}", fields.len())));
        }
        let mut vals = [0.0; 3];
        for (v, f) in vals.iter_mut().zip(&fields) {
            *v = f
                .parse::<f64>()
                .map_err(|_| table_err(lineno, format!("cannot parse number {f:?}")))?;
        }
        let [e, nn, kk] = vals;
        if !(e > 0.0 && e.is_finite()) {
            return Err(table_err(lineno, format!("energy must be positive, got {e}")));
        }
        if let Some(&prev) = grid.last() {
            if !(e > prev) {
                return Err(table_err(
                    lineno,
                    format!("energy {e} eV is not greater than the previous row ({prev} eV)"),
                ));
            }
        }
        if !(kk >= 0.0) {
            return Err(table_err(lineno, format!("negative extinction k = {kk}")));
        }
        if !(nn > 0.0) {
            return Err(table_err(lineno, format!("non-positive index n = {nn}")));
        }
        grid.push(e);
        n.push(nn);
        k.push(kk);
    }
    if grid.len() < MIN_ROWS {
        return Err(table_err(
            text.lines().count(),
            format!("needs at least {MIN_ROWS} data rows, found {}", grid.len()),
        ));
    }
    TabulatedMaterial::new(grid, n, k, extrapolation)
}

/// Reads and validates an n,k table file.
pub fn load_nk_table(path: impl AsRef<Path>, extrapolation: Extrapolation) -> Result<TabulatedMaterial> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    parse_nk_table(&text, &path.display().to_string(), extrapolation)
}

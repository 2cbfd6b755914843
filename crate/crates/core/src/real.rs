//! Spectral distribution of the Casimir pressure over real frequencies.
//!
//! p(ω) = (1/2π²) Re ∫₀^∞ k dk q₀ Σ_p x_p/(1 − x_p),  x_p = r_p²e^{2iq₀d},
//!
//! in Pa per eV of photon energy, so that ∫₀^∞ p dω is the pressure returned
//! by [`crate::imaginary::total_pressure`]. The momentum integral is split at
//! the light line. Below it the vacuum normal wavenumber q = q₀ ∈ [0, ω/c]
//! is the integration variable (k dk = −q dq) and the panels end on the
//! phase nodes qd = mπ/2. Above it q₀ = iκ with κ ∈ [0, 30/d], where the
//! integrand reduces to −κ² Im[x/(1 − x)]. Both changes of variable remove
//! the square-root edge at k = ω/c.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaginary::{CavityConfig, RADIAL_CUTOFF};
use crate::materials::Material;
use crate::optics::{slab_coefficient, Polarization};
use crate::quad::{integrate_panels_l1, trapezoid, CompensatedSum, QuadratureSettings};
use crate::units::{ev_per_nm3_to_pa, HBAR_C};

/// Panel edges of the evanescent integral in units of u = 2κd.
const EVANESCENT_BREAKS: [f64; 25] = [
    0.0, 0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 13.0, 16.0, 20.0, 25.0,
    30.0, 40.0, 50.0, RADIAL_CUTOFF,
];

/// Weight of ∫|f| in the tolerance target of the momentum integrals.
const L1_WEIGHT: f64 = 1e-3;

/// Maximum number of refinement rounds in [`force_spectrum`].
const MAX_REFINE_ROUNDS: usize = 12;

/// Relative stability of extremum positions that ends the refinement.
const REFINE_STABILITY: f64 = 0.005;

/// p(ω) at one frequency, by sector and polarization, in Pa/eV.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpectralDensity {
    pub omega: f64,
    pub ev_te: f64,
    pub ev_tm: f64,
    pub prop_te: f64,
    pub prop_tm: f64,
}

impl SpectralDensity {
    pub fn evanescent(&self) -> f64 {
        self.ev_te + self.ev_tm
    }

    pub fn propagating(&self) -> f64 {
        self.prop_te + self.prop_tm
    }

    pub fn total(&self) -> f64 {
        self.evanescent() + self.propagating()
    }
}

/// One column of a [`ForceSpectrum`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    Total,
    Evanescent,
    Propagating,
    EvanescentTe,
    EvanescentTm,
    PropagatingTe,
    PropagatingTm,
}

impl Channel {
    pub fn pick(self, s: &SpectralDensity) -> f64 {
        match self {
            Channel::Total => s.total(),
            Channel::Evanescent => s.evanescent(),
            Channel::Propagating => s.propagating(),
            Channel::EvanescentTe => s.ev_te,
            Channel::EvanescentTm => s.ev_tm,
            Channel::PropagatingTe => s.prop_te,
            Channel::PropagatingTm => s.prop_tm,
        }
    }
}

/// Sampled force spectrum on a strictly increasing grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForceSpectrum {
    pub cfg: CavityConfig,
    pub points: Vec<SpectralDensity>,
}

impl ForceSpectrum {
    pub fn omega_grid(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.omega).collect()
    }

    pub fn series(&self, channel: Channel) -> Vec<f64> {
        self.points.iter().map(|p| channel.pick(p)).collect()
    }

    pub fn p_total(&self) -> Vec<f64> {
        self.series(Channel::Total)
    }

    pub fn p_evanescent(&self) -> Vec<f64> {
        self.series(Channel::Evanescent)
    }

    pub fn p_propagating(&self) -> Vec<f64> {
        self.series(Channel::Propagating)
    }

    /// Trapezoid integral of one channel over the sampled range, in Pa.
    pub fn channel_integral(&self, channel: Channel) -> f64 {
        trapezoid(&self.omega_grid(), &self.series(channel))
    }

    pub fn range(&self) -> (f64, f64) {
        (self.points[0].omega, self.points[self.points.len() - 1].omega)
    }
}

/// How [`force_spectrum`] lays out its frequency grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum GridPolicy {
    Uniform { points: usize },
    /// Explicit energies in eV; must be strictly increasing and lie within
    /// `[omega_min, omega_max]`.
    Explicit(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    pub omega_min: f64,
    pub omega_max: f64,
    pub grid: GridPolicy,
    /// Bisect around local extrema until their positions settle.
    pub refine: bool,
    pub quad: QuadratureSettings,
}

impl SpectrumOptions {
    /// Momentum-integral settings used for spectra.
    pub fn default_quad() -> QuadratureSettings {
        QuadratureSettings {
            rel_tol: 1e-7,
            abs_tol: 0.0,
            max_evals: 200_000,
        }
    }

    /// 600 uniform points on [0.05, 2ω_c] eV with peak refinement, ω_c being
    /// the material's characteristic energy.
    pub fn for_material(material: &Material) -> Self {
        Self {
            omega_min: 0.05,
            omega_max: 2.0 * material.characteristic_energy(),
            grid: GridPolicy::Uniform { points: 600 },
            refine: true,
            quad: Self::default_quad(),
        }
    }

    /// Grid for integrating the whole spectrum: logarithmic below 0.05 eV,
    /// uniform up to 2ω_c, logarithmic again up to 14ω_c.
    pub fn wideband(material: &Material) -> Self {
        let wc = material.characteristic_energy();
        let mut grid = geomspace(1e-3, 0.05, 30);
        grid.pop();
        grid.extend(linspace(0.05, 2.0 * wc, 400));
        grid.pop();
        grid.extend(geomspace(2.0 * wc, 14.0 * wc, 120));
        Self {
            omega_min: grid[0],
            omega_max: grid[grid.len() - 1],
            grid: GridPolicy::Explicit(grid),
            refine: false,
            quad: Self::default_quad(),
        }
    }

    fn grid_points(&self) -> Result<Vec<f64>> {
        if !(self.omega_min > 0.0 && self.omega_min.is_finite()) {
            return Err(Error::invalid("omega_min", format!("must be > 0 eV, got {}", self.omega_min)));
        }
        if !(self.omega_max > self.omega_min && self.omega_max.is_finite()) {
            return Err(Error::invalid(
                "omega_max",
                format!("must exceed omega_min = {} eV, got {}", self.omega_min, self.omega_max),
            ));
        }
        self.quad.validate()?;
        match &self.grid {
            GridPolicy::Uniform { points } => {
                if *points < 2 {
                    return Err(Error::invalid("points", "a spectrum needs at least 2 grid points"));
                }
                Ok(linspace(self.omega_min, self.omega_max, *points))
            }
            GridPolicy::Explicit(grid) => {
                if grid.len() < 2 {
                    return Err(Error::invalid("grid", "a spectrum needs at least 2 grid points"));
                }
                if grid.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::invalid("grid", "energies must be strictly increasing"));
                }
                if grid[0] < self.omega_min || grid[grid.len() - 1] > self.omega_max {
                    return Err(Error::invalid("grid", "energies outside [omega_min, omega_max]"));
                }
                Ok(grid.clone())
            }
        }
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let step = (b - a) / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { b } else { a + step * i as f64 }).collect()
}

pub fn geomspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    linspace(la, lb, n)
        .into_iter()
        .enumerate()
        .map(|(i, x)| if i == 0 { a } else if i == n - 1 { b } else { x.exp() })
        .collect()
}

#[inline]
fn round_trip_ratio(r: Complex64, phase: Complex64) -> Complex64 {
    let x = r * r * phase;
    x / (1.0 - x)
}

/// p(ω) at a single energy `omega` eV.
pub fn spectral_density(cfg: &CavityConfig, omega: f64, quad: &QuadratureSettings) -> Result<SpectralDensity> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::invalid("omega", format!("must be > 0 eV, got {omega}")));
    }
    quad.validate()?;
    let eps = cfg.material().eps_real_axis(omega)?;
    let k0 = omega / HBAR_C;
    let t = cfg.thickness();
    let d = cfg.gap;

    let ev_breaks: Vec<f64> = EVANESCENT_BREAKS.iter().map(|u| u / (2.0 * d)).collect();
    let mut prop_breaks = vec![0.0];
    let node = PI / (2.0 * d);
    let mut m = 1.0;
    while m * node < k0 {
        prop_breaks.push(m * node);
        m += 1.0;
    }
    prop_breaks.push(k0);

    let run = |f: &dyn Fn(f64) -> f64, breaks: &[f64], what: &str, pol: Polarization| -> Result<f64> {
        integrate_panels_l1(f, breaks, quad, L1_WEIGHT)
            .map(|e| e.value)
            .map_err(|u| u.into_error(format!("{what} {pol} momentum integral at omega = {omega} eV")))
    };

    let mut out = SpectralDensity {
        omega,
        ..Default::default()
    };
    let scale = ev_per_nm3_to_pa(1.0) / (2.0 * PI * PI);
    for pol in Polarization::BOTH {
        let ev = |kappa: f64| {
            let q0 = Complex64::new(0.0, kappa);
            let r = slab_coefficient(eps, k0, q0, t, pol);
            let y = round_trip_ratio(r, Complex64::new((-2.0 * kappa * d).exp(), 0.0));
            -kappa * kappa * y.im
        };
        let prop = |q: f64| {
            let r = slab_coefficient(eps, k0, Complex64::new(q, 0.0), t, pol);
            let y = round_trip_ratio(r, Complex64::from_polar(1.0, 2.0 * q * d));
            q * q * y.re
        };
        let p_ev = scale * run(&ev, &ev_breaks, "evanescent", pol)?;
        let p_prop = scale * run(&prop, &prop_breaks, "propagating", pol)?;
        match pol {
            Polarization::TE => {
                out.ev_te = p_ev;
                out.prop_te = p_prop;
            }
            Polarization::TM => {
                out.ev_tm = p_ev;
                out.prop_tm = p_prop;
            }
        }
    }
    Ok(out)
}

fn evaluate(cfg: &CavityConfig, grid: &[f64], quad: &QuadratureSettings) -> Result<Vec<SpectralDensity>> {
    grid.par_iter().map(|&w| spectral_density(cfg, w, quad)).collect()
}

/// Parabolic vertex positions of the interior local extrema of `y` whose
/// magnitude is at least `floor`, with their indices.
pub(crate) fn local_extrema(x: &[f64], y: &[f64], floor: f64) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    for i in 1..y.len().saturating_sub(1) {
        let (a, b, c) = (y[i - 1], y[i], y[i + 1]);
        let is_max = b > a && b >= c;
        let is_min = b < a && b <= c;
        if (is_max || is_min) && b.abs() >= floor {
            out.push((i, parabolic_vertex(x[i - 1], x[i], x[i + 1], a, b, c).0));
        }
    }
    out
}

/// Vertex (position, value) of the parabola through three points. Falls back
/// to the middle point when the three are collinear.
pub(crate) fn parabolic_vertex(x0: f64, x1: f64, x2: f64, y0: f64, y1: f64, y2: f64) -> (f64, f64) {
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curv = (d12 - d01) / (x2 - x0);
    if curv == 0.0 || !curv.is_finite() {
        return (x1, y1);
    }
    // y = y1 + s(x − x1) + curv(x − x1)², s = slope at x1
    let s = d01 + curv * (x1 - x0);
    let dx = (-s / (2.0 * curv)).clamp(x0 - x1, x2 - x1);
    (x1 + dx, y1 + s * dx + curv * dx * dx)
}

fn tracked_extrema(points: &[SpectralDensity]) -> Vec<(usize, f64)> {
    let x: Vec<f64> = points.iter().map(|p| p.omega).collect();
    let mut all = Vec::new();
    for channel in [Channel::Evanescent, Channel::Total] {
        let y: Vec<f64> = points.iter().map(|p| channel.pick(p)).collect();
        let floor = 1e-3 * y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        all.extend(local_extrema(&x, &y, floor));
    }
    all.sort_by(|a, b| a.1.total_cmp(&b.1));
    all
}

fn positions_stable(old: &[(usize, f64)], new: &[(usize, f64)]) -> bool {
    old.len() == new.len()
        && old
            .iter()
            .zip(new)
            .all(|(a, b)| (a.1 - b.1).abs() <= REFINE_STABILITY * b.1.abs())
}

/// Samples [`spectral_density`] on the grid described by `opts`.
pub fn force_spectrum(cfg: &CavityConfig, opts: &SpectrumOptions) -> Result<ForceSpectrum> {
    let grid = opts.grid_points()?;
    let mut points = evaluate(cfg, &grid, &opts.quad)?;

    if opts.refine {
        let mut extrema = tracked_extrema(&points);
        for _ in 0..MAX_REFINE_ROUNDS {
            if extrema.is_empty() {
                break;
            }
            let mut fresh: Vec<f64> = Vec::new();
            for &(i, _) in &extrema {
                for j in [i - 1, i] {
                    let (a, b) = (points[j].omega, points[j + 1].omega);
                    let mid = 0.5 * (a + b);
                    if mid > a && mid < b && (b - a) > 1e-9 * b {
                        fresh.push(mid);
                    }
                }
            }
            fresh.sort_by(f64::total_cmp);
            fresh.dedup();
            if fresh.is_empty() {
                break;
            }
            let added = evaluate(cfg, &fresh, &opts.quad)?;
            points.extend(added);
            points.sort_by(|a, b| a.omega.total_cmp(&b.omega));
            points.dedup_by(|a, b| a.omega == b.omega);
            let next = tracked_extrema(&points);
            let stable = positions_stable(&extrema, &next);
            extrema = next;
            if stable {
                break;
            }
        }
    }

    Ok(ForceSpectrum {
        cfg: cfg.clone(),
        points,
    })
}

/// Total pressure from a sampled spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumIntegral {
    /// Pa.
    pub pressure: f64,
    /// Bound on the contribution outside the sampled range, Pa.
    pub tail_bound: f64,
}

/// Trapezoid integral of the total channel, with a linear ramp to zero below
/// the first grid point and a bound on what lies outside the grid.
///
/// Beyond the grid the propagating integrand oscillates with the gap phase
/// 2ωd/ħc, whose period in ω is πħc/d. The high-frequency bound is the
/// envelope of |p| over the last such period or the last tenth of the grid,
/// whichever is shorter (but at least three points), times half a period, or
/// times ω_max if that is smaller. The
/// low-frequency ramp is counted in full towards the bound.
pub fn integrate_spectrum(spec: &ForceSpectrum) -> Result<SpectrumIntegral> {
    let omega = spec.omega_grid();
    let p = spec.p_total();
    let n = p.len();
    if n < 2 {
        return Err(Error::invalid("spectrum", "at least 2 points are needed"));
    }
    let low = 0.5 * omega[0] * p[0];
    let body = trapezoid(&omega, &p);
    let pressure = [body, low].into_iter().collect::<CompensatedSum>().value();

    let period = PI * HBAR_C / spec.cfg.gap;
    let w_max = omega[n - 1];
    let window = omega
        .partition_point(|&w| w < w_max - period)
        .max(n - n / 10)
        .min(n.saturating_sub(3));
    let envelope = p[window..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tail_bound = envelope * w_max.min(0.5 * period) + low.abs();

    if tail_bound > 0.05 * pressure.abs() && tail_bound > 0.0 {
        return Err(Error::Bandwidth {
            tail: tail_bound,
            integral: pressure,
        });
    }
    Ok(SpectrumIntegral { pressure, tail_bound })
}

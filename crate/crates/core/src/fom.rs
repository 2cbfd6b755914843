//! Averaged force density |P|/t versus film thickness and separation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaginary::{total_pressure, CavityConfig};
use crate::materials::Material;
use crate::quad::QuadratureSettings;
use crate::real::geomspace;

/// Golden-section refinement of t_opt stops at this relative bracket width.
const T_OPT_REL_TOL: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FomPoint {
    /// nm.
    pub t: f64,
    /// nm.
    pub d: f64,
    /// Pa.
    pub pressure: f64,
    /// Absolute error estimate of `pressure`, Pa.
    pub pressure_error: f64,
    /// |pressure|/t in Pa/nm.
    pub fom: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FomScanResult {
    pub d: f64,
    pub points: Vec<FomPoint>,
    /// Refined interior maximum, nm.
    pub t_opt: Option<f64>,
    /// d ln FOM / d ln t over the lowest decade of the grid.
    pub thin_slope: f64,
    /// Same over the highest decade.
    pub thick_slope: f64,
}

pub fn fom(cfg: &CavityConfig, quad: &QuadratureSettings) -> Result<FomPoint> {
    let p = total_pressure(cfg, quad)?;
    Ok(FomPoint {
        t: cfg.thickness(),
        d: cfg.gap,
        pressure: p.pressure,
        pressure_error: p.est_abs_error,
        fom: p.pressure.abs() / cfg.thickness(),
    })
}

/// 24 thicknesses log-spaced over [0.5, 500] nm.
pub fn default_thickness_grid() -> Vec<f64> {
    geomspace(0.5, 500.0, 24)
}

fn validate_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.len() < 8 {
        return Err(Error::invalid(
            "t",
            format!("a FOM sweep needs at least 8 thicknesses, got {}", t_grid.len()),
        ));
    }
    if !(t_grid[0] > 0.0) || t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("t", "thicknesses must be positive and strictly increasing"));
    }
    Ok(())
}

/// Least-squares slope of y against x.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

/// Log-log slope over the points with t in [lo, hi].
fn loglog_slope(points: &[FomPoint], lo: f64, hi: f64) -> f64 {
    let sel: Vec<&FomPoint> = points.iter().filter(|p| p.t >= lo && p.t <= hi && p.fom > 0.0).collect();
    if sel.len() < 2 {
        return f64::NAN;
    }
    let x: Vec<f64> = sel.iter().map(|p| p.t.ln()).collect();
    let y: Vec<f64> = sel.iter().map(|p| p.fom.ln()).collect();
    ls_slope(&x, &y)
}

/// Index of the largest grid FOM whose two neighbours are both lower by more
/// than the combined error estimates.
fn interior_maximum(points: &[FomPoint]) -> Option<usize> {
    let err = |p: &FomPoint| p.pressure_error / p.t;
    (1..points.len() - 1)
        .filter(|&i| {
            let (a, b, c) = (&points[i - 1], &points[i], &points[i + 1]);
            b.fom - a.fom > err(a) + err(b) && b.fom - c.fom > err(b) + err(c)
        })
        .max_by(|&a, &b| points[a].fom.total_cmp(&points[b].fom))
}

/// Golden-section maximisation of FOM in ln t on [lo, hi].
fn refine_optimum(material: &Material, d: f64, lo: f64, hi: f64, quad: &QuadratureSettings) -> Result<f64> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let eval = |lt: f64| -> Result<f64> { Ok(fom(&CavityConfig::new(material.clone(), lt.exp(), d)?, quad)?.fom) };
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    while b - a > T_OPT_REL_TOL.ln_1p() {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = eval(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = eval(x2)?;
        }
    }
    Ok((0.5 * (a + b)).exp())
}

/// FOM at every thickness of `t_grid` (computed in parallel), with the
/// refined interior optimum when one exists and the thin/thick log-log
/// slopes.
pub fn sweep_fom(material: &Material, d: f64, t_grid: &[f64], quad: &QuadratureSettings) -> Result<FomScanResult> {
    validate_grid(t_grid)?;
    let points: Vec<FomPoint> = t_grid
        .par_iter()
        .map(|&t| fom(&CavityConfig::new(material.clone(), t, d)?, quad))
        .collect::<Result<_>>()?;
    let t_opt = match interior_maximum(&points) {
        Some(i) => Some(refine_optimum(material, d, points[i - 1].t, points[i + 1].t, quad)?),
        None => None,
    };
    let (t0, t1) = (t_grid[0], t_grid[t_grid.len() - 1]);
    Ok(FomScanResult {
        d,
        thin_slope: loglog_slope(&points, t0, t0 * 10.0),
        thick_slope: loglog_slope(&points, t1 / 10.0, t1),
        points,
        t_opt,
    })
}

/// t_opt for each separation; separations without an interior maximum get
/// [`Error::NoInteriorMaximum`].
pub fn optimal_thickness_curve(
    material: &Material,
    gaps: &[f64],
    t_grid: &[f64],
    quad: &QuadratureSettings,
) -> Result<Vec<(f64, Result<f64>)>> {
    if gaps.is_empty() {
        return Err(Error::invalid("d", "the separation list is empty"));
    }
    validate_grid(t_grid)?;
    Ok(gaps
        .iter()
        .map(|&d| {
            let r = sweep_fom(material, d, t_grid, quad).and_then(|s| s.t_opt.ok_or(Error::NoInteriorMaximum { d }));
            (d, r)
        })
        .collect())
}

/// Fit of FOM(t) ≈ A(1 − e^{−αt})/(αt).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoteFit {
    /// Pa/nm.
    pub amplitude: f64,
    /// nm⁻¹.
    pub alpha: f64,
    /// Root-mean-square of the relative residuals.
    pub rel_rms: f64,
    /// Log-log slope of the computed FOM over the top half-decade of t.
    pub top_slope: f64,
    pub points: Vec<FomPoint>,
}

fn shape(alpha: f64, t: f64) -> f64 {
    let x = alpha * t;
    -(-x).exp_m1() / x
}

/// Best amplitude and relative RMS residual at fixed α.
fn profile(alpha: f64, t: &[f64], f: &[f64]) -> (f64, f64) {
    let g: Vec<f64> = t.iter().zip(f).map(|(&t, &f)| shape(alpha, t) / f).collect();
    let amplitude = g.iter().sum::<f64>() / g.iter().map(|v| v * v).sum::<f64>();
    let ss: f64 = g.iter().map(|v| (amplitude * v - 1.0).powi(2)).sum();
    (amplitude, (ss / g.len() as f64).sqrt())
}

/// Separable least-squares fit over `points`: the amplitude is solved in
/// closed form for each α, and ln α is located by a scan followed by
/// golden-section search.
pub fn fit_asymptote(points: &[FomPoint]) -> Result<(f64, f64, f64)> {
    let t: Vec<f64> = points.iter().map(|p| p.t).collect();
    let f: Vec<f64> = points.iter().map(|p| p.fom).collect();
    if t.len() < 3 || f.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::FitDiverged("need at least 3 positive FOM values".into()));
    }
    let (lo, hi) = ((1e-4f64).ln(), (10.0f64).ln());
    let n = 200;
    let cost = |la: f64| profile(la.exp(), &t, &f).1;
    let scan: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let best = (0..=n).min_by(|&a, &b| cost(scan[a]).total_cmp(&cost(scan[b]))).unwrap_or(0);
    if best == 0 || best == n {
        return Err(Error::FitDiverged(format!(
            "attenuation driven to the edge of [1e-4, 10] nm^-1 (alpha = {:e})",
            scan[best].exp()
        )));
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (scan[best - 1], scan[best + 1]);
    while b - a > 1e-10 {
        let x1 = b - inv_phi * (b - a);
        let x2 = a + inv_phi * (b - a);
        if cost(x1) < cost(x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    let alpha = (0.5 * (a + b)).exp();
    let (amplitude, rel_rms) = profile(alpha, &t, &f);
    if !(amplitude.is_finite() && rel_rms.is_finite()) {
        return Err(Error::FitDiverged("non-finite fit".into()));
    }
    Ok((amplitude, alpha, rel_rms))
}

/// Fits the thick-film asymptote over `points` log-spaced thicknesses in
/// [t_lo, t_hi] at separation `d`.
pub fn asymptote_check(
    material: &Material,
    d: f64,
    t_lo: f64,
    t_hi: f64,
    points: usize,
    quad: &QuadratureSettings,
) -> Result<AsymptoteFit> {
    if !(t_lo > 0.0 && t_hi > t_lo) || points < 3 {
        return Err(Error::invalid("t", "need 0 < t_lo < t_hi and at least 3 points"));
    }
    let grid = geomspace(t_lo, t_hi, points);
    let pts: Vec<FomPoint> = grid
        .par_iter()
        .map(|&t| fom(&CavityConfig::new(material.clone(), t, d)?, quad))
        .collect::<Result<_>>()?;
    let (amplitude, alpha, rel_rms) = fit_asymptote(&pts)?;
    let top_slope = loglog_slope(&pts, t_hi / 10f64.sqrt() * (1.0 - 1e-12), t_hi);
    Ok(AsymptoteFit {
        amplitude,
        alpha,
        rel_rms,
        top_slope,
        points: pts,
    })
}

//! Resonant peak-valley pairs in the evanescent force spectrum.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaginary::CavityConfig;
use crate::materials::{find_enz_frequency, find_spp_frequency, Material};
use crate::optics::SlabGeometry;
use crate::quad::CompensatedSum;
use crate::real::{force_spectrum, parabolic_vertex, Channel, ForceSpectrum, SpectrumOptions};
use crate::units::{enz_thickness_threshold, HBAR_C};

/// Extrema below this fraction of max |p| are ignored.
pub const PROMINENCE_FLOOR: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModeLabel {
    #[serde(rename = "ENZ")]
    Enz,
    #[serde(rename = "SR_SPP")]
    SrSpp,
    #[serde(rename = "SPP")]
    Spp,
    #[serde(rename = "UNLABELED")]
    Unlabeled,
}

impl std::fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModeLabel::Enz => "ENZ",
            ModeLabel::SrSpp => "SR_SPP",
            ModeLabel::Spp => "SPP",
            ModeLabel::Unlabeled => "UNLABELED",
        })
    }
}

/// A repulsive maximum and the adjacent attractive minimum of p_ev(ω).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakValleyPair {
    pub omega_peak: f64,
    pub omega_valley: f64,
    /// p_ev at the peak and valley, Pa/eV.
    pub p_peak: f64,
    pub p_valley: f64,
    pub band_lo: f64,
    pub band_hi: f64,
    pub label: ModeLabel,
}

impl PeakValleyPair {
    fn amplitude(&self) -> f64 {
        self.p_peak - self.p_valley
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeContribution {
    pub pair: PeakValleyPair,
    /// ∫p_ev dω over the band, Pa.
    pub band_pressure: f64,
    pub separation: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Extremum {
    index: usize,
    omega: f64,
    value: f64,
    is_peak: bool,
}

/// Topographic prominence of y[i] as a maximum.
fn prominence(y: &[f64], i: usize) -> f64 {
    let h = y[i];
    let mut left_min = h;
    for j in (0..i).rev() {
        if y[j] > h {
            break;
        }
        left_min = left_min.min(y[j]);
    }
    let mut right_min = h;
    for &v in &y[i + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}

fn find_extrema(x: &[f64], y: &[f64], floor: f64) -> Vec<Extremum> {
    let neg: Vec<f64> = y.iter().map(|v| -v).collect();
    let mut out = Vec::new();
    for i in 1..y.len().saturating_sub(1) {
        let (a, b, c) = (y[i - 1], y[i], y[i + 1]);
        let is_peak = b > 0.0 && b > a && b >= c && prominence(y, i) >= floor;
        let is_valley = b < 0.0 && b < a && b <= c && prominence(&neg, i) >= floor;
        if is_peak || is_valley {
            let (omega, value) = parabolic_vertex(x[i - 1], x[i], x[i + 1], a, b, c);
            out.push(Extremum {
                index: i,
                omega,
                value,
                is_peak,
            });
        }
    }
    out
}

/// Linear zero of y between samples j and j + 1.
fn crossing(x: &[f64], y: &[f64], j: usize) -> f64 {
    let (y0, y1) = (y[j], y[j + 1]);
    if y0 == y1 {
        return x[j];
    }
    x[j] + (x[j + 1] - x[j]) * y0 / (y0 - y1)
}

fn argmin_abs(y: &[f64], lo: usize, hi: usize) -> usize {
    (lo..=hi).min_by(|&a, &b| y[a].abs().total_cmp(&y[b].abs())).unwrap_or(lo)
}

/// Lower band edge: the nearest zero crossing below sample `from`, searching
/// no further than `limit`. Without a crossing the edge is the spectrum start
/// (when `limit` is 0) or the smallest |p| in the searched range.
fn lower_edge(x: &[f64], y: &[f64], from: usize, limit: usize) -> f64 {
    for j in (limit..from).rev() {
        if y[j] == 0.0 {
            return x[j];
        }
        if y[j] * y[j + 1] < 0.0 {
            return crossing(x, y, j);
        }
    }
    if limit == 0 {
        x[0]
    } else {
        x[argmin_abs(y, limit, from)]
    }
}

fn upper_edge(x: &[f64], y: &[f64], from: usize, limit: usize) -> f64 {
    let last = y.len() - 1;
    for j in from..limit {
        if y[j + 1] == 0.0 {
            return x[j + 1];
        }
        if y[j] * y[j + 1] < 0.0 {
            return crossing(x, y, j);
        }
    }
    if limit == last {
        x[last]
    } else {
        x[argmin_abs(y, from, limit)]
    }
}

/// Finds the peak-valley pairs of the evanescent channel, sorted by
/// frequency.
pub fn detect_pairs(spec: &ForceSpectrum) -> Result<Vec<PeakValleyPair>> {
    let x = spec.omega_grid();
    let y = spec.series(Channel::Evanescent);
    let max_abs = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(max_abs > 0.0) {
        return Err(Error::NoResonances);
    }
    let extrema = find_extrema(&x, &y, PROMINENCE_FLOOR * max_abs);

    let mut groups: Vec<(Extremum, Extremum)> = Vec::new();
    let mut i = 0;
    while i + 1 < extrema.len() {
        let (a, b) = (extrema[i], extrema[i + 1]);
        if a.is_peak != b.is_peak {
            groups.push((a, b));
            i += 2;
        } else {
            i += 1;
        }
    }
    if groups.is_empty() {
        return Err(Error::NoResonances);
    }

    let last = y.len() - 1;
    let mut pairs = Vec::with_capacity(groups.len());
    for (g, &(a, b)) in groups.iter().enumerate() {
        let left_limit = if g == 0 { 0 } else { groups[g - 1].1.index };
        let right_limit = if g + 1 == groups.len() { last } else { groups[g + 1].0.index };
        let (peak, valley) = if a.is_peak { (a, b) } else { (b, a) };
        pairs.push(PeakValleyPair {
            omega_peak: peak.omega,
            omega_valley: valley.omega,
            p_peak: peak.value,
            p_valley: valley.value,
            band_lo: lower_edge(&x, &y, a.index, left_limit),
            band_hi: upper_edge(&x, &y, b.index, right_limit),
            label: ModeLabel::Unlabeled,
        });
    }
    Ok(pairs)
}

/// Assigns ENZ / SR_SPP labels for films thinner than λ_p/50 and SPP for
/// thicker ones. Insulators and unmatched pairs stay unlabeled.
pub fn label_pairs(pairs: &[PeakValleyPair], material: &Material, thickness: f64) -> Vec<PeakValleyPair> {
    let mut out: Vec<PeakValleyPair> = pairs
        .iter()
        .map(|p| PeakValleyPair {
            label: ModeLabel::Unlabeled,
            ..*p
        })
        .collect();
    let Some(wp) = material.plasma_energy() else {
        return out;
    };
    let Ok(threshold) = enz_thickness_threshold(wp) else {
        return out;
    };
    let strongest = |candidates: &mut dyn Iterator<Item = usize>, out: &[PeakValleyPair]| {
        candidates.max_by(|&a, &b| out[a].amplitude().total_cmp(&out[b].amplitude()))
    };

    if thickness < threshold {
        let Ok(enz) = find_enz_frequency(material) else {
            return out;
        };
        let Some(ie) = (0..out.len()).min_by(|&a, &b| {
            (out[a].omega_peak - enz)
                .abs()
                .total_cmp(&(out[b].omega_peak - enz).abs())
        }) else {
            return out;
        };
        out[ie].label = ModeLabel::Enz;
        let enz_peak = out[ie].omega_peak;
        let mut lower = (0..out.len()).filter(|&i| i != ie && out[i].omega_peak < enz_peak);
        if let Some(is) = strongest(&mut lower, &out) {
            out[is].label = ModeLabel::SrSpp;
        }
    } else if let Some(i) = strongest(&mut (0..out.len()), &out) {
        out[i].label = ModeLabel::Spp;
    }
    out
}

/// Linear interpolation of y at `at`, with x sorted.
fn interpolate(x: &[f64], y: &[f64], at: f64) -> f64 {
    let j = x.partition_point(|&v| v <= at).clamp(1, x.len() - 1);
    let (x0, x1) = (x[j - 1], x[j]);
    y[j - 1] + (y[j] - y[j - 1]) * (at - x0) / (x1 - x0)
}

/// Trapezoid integral of p_ev over the pair's band.
pub fn band_contribution(spec: &ForceSpectrum, pair: &PeakValleyPair) -> Result<ModeContribution> {
    let x = spec.omega_grid();
    let y = spec.series(Channel::Evanescent);
    let (lo, hi) = spec.range();
    if !(pair.band_lo >= lo && pair.band_hi <= hi && pair.band_lo < pair.band_hi) {
        return Err(Error::invalid(
            "band",
            format!(
                "[{}, {}] eV is not inside the sampled range [{lo}, {hi}] eV",
                pair.band_lo, pair.band_hi
            ),
        ));
    }
    let mut xs = vec![pair.band_lo];
    let mut ys = vec![interpolate(&x, &y, pair.band_lo)];
    for (xi, yi) in x.iter().zip(&y) {
        if *xi > pair.band_lo && *xi < pair.band_hi {
            xs.push(*xi);
            ys.push(*yi);
        }
    }
    xs.push(pair.band_hi);
    ys.push(interpolate(&x, &y, pair.band_hi));
    let band_pressure = xs
        .windows(2)
        .zip(ys.windows(2))
        .map(|(a, b)| 0.5 * (a[1] - a[0]) * (b[0] + b[1]))
        .collect::<CompensatedSum>()
        .value();
    Ok(ModeContribution {
        pair: *pair,
        band_pressure,
        separation: spec.cfg.gap,
    })
}

/// Labeled band contributions of every detected pair of one spectrum.
pub fn analyze_spectrum(spec: &ForceSpectrum) -> Result<Vec<ModeContribution>> {
    let pairs = detect_pairs(spec)?;
    let labeled = label_pairs(&pairs, spec.cfg.material(), spec.cfg.thickness());
    labeled.iter().map(|p| band_contribution(spec, p)).collect()
}

/// Runs spectrum, detection, labeling and band integration for each gap in
/// `gaps`, keeping the material and thickness of `template`. Rows come back
/// in the order of `gaps`.
pub fn track_modes(template: &CavityConfig, gaps: &[f64], opts: &SpectrumOptions) -> Result<Vec<ModeContribution>> {
    if gaps.is_empty() {
        return Err(Error::invalid("d", "the separation list is empty"));
    }
    let per_gap: Vec<Vec<ModeContribution>> = gaps
        .par_iter()
        .map(|&d| {
            let cfg = template.with_gap(d)?;
            analyze_spectrum(&force_spectrum(&cfg, opts)?)
        })
        .collect::<Result<_>>()?;
    Ok(per_gap.into_iter().flatten().collect())
}

/// Which coupled-interface branch of the isolated film.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Branch {
    /// κ₁ tanh(κ₁t/2) + εκ₀ = 0, the upper (ENZ-like) branch.
    Upper,
    /// εκ₀ tanh(κ₁t/2) + κ₁ = 0, the lower (short-range SPP) branch.
    Lower,
}

fn sqrt_right(z: Complex64) -> Complex64 {
    let s = z.sqrt();
    if s.re < 0.0 {
        -s
    } else {
        s
    }
}

fn dispersion(material: &Material, t: f64, k: f64, omega: Complex64, branch: Branch) -> Result<Complex64> {
    let eps = material.eps_complex(omega)?;
    let k0 = omega / HBAR_C;
    let kappa0 = sqrt_right(k * k - k0 * k0);
    let kappa1 = sqrt_right(k * k - eps * k0 * k0);
    let th = (kappa1 * (0.5 * t)).tanh();
    Ok(match branch {
        Branch::Upper => kappa1 * th + eps * kappa0,
        Branch::Lower => eps * kappa0 * th + kappa1,
    })
}

const NEWTON_MAX_ITER: usize = 50;
const NEWTON_TOL: f64 = 1e-8;

fn newton(material: &Material, t: f64, k: f64, seed: Complex64, branch: Branch) -> Option<Complex64> {
    let f = |w: Complex64| dispersion(material, t, k, w, branch).ok();
    let mut w = seed;
    let mut fw = f(w)?;
    for _ in 0..NEWTON_MAX_ITER {
        let h = 1e-7 * w.norm().max(1e-3);
        let df = (f(w + h)? - f(w - h)?) / (2.0 * h);
        if df.norm() == 0.0 || !df.is_finite() {
            return None;
        }
        let step = fw / df;
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..20 {
            let trial = w - step * lambda;
            if let Some(ft) = f(trial) {
                if ft.is_finite() && ft.norm() < fw.norm() * (1.0 - 1e-4 * lambda) {
                    accepted = Some((trial, ft));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let (next, fnext) = match accepted {
            Some(v) => v,
            None => (w - step, f(w - step)?),
        };
        let delta = (next - w).norm();
        w = next;
        fw = fnext;
        if delta < NEWTON_TOL {
            return Some(w);
        }
    }
    None
}

/// Complex TM mode frequencies (eV) of the isolated film at transverse
/// momentum `k` nm⁻¹, sorted by real part. Newton iterations start from the
/// SPP and ENZ frequencies and from the thin-film estimate ω_p√(kt/2) of the
/// lower branch. Roots inside the light cone (Re ω ≥ ħck) are discarded, so
/// for k → 0 the result is an error.
pub fn slab_mode_dispersion(slab: &SlabGeometry, k: f64) -> Result<Vec<Complex64>> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::invalid("k", format!("must be > 0 nm^-1, got {k}")));
    }
    let material = &slab.material;
    let t = slab.thickness;
    let mut seeds = Vec::new();
    if let Ok(w) = find_spp_frequency(material) {
        seeds.push(w);
    }
    if let Ok(w) = find_enz_frequency(material) {
        seeds.push(w);
    }
    if let Some(wp) = material.plasma_energy() {
        seeds.push(wp * (0.5 * k * t).sqrt().min(1.0));
    }
    if seeds.is_empty() {
        return Err(Error::Unsupported(format!("{} has no surface-mode seed frequency", material.name)));
    }

    let mut roots: Vec<Complex64> = Vec::new();
    for branch in [Branch::Lower, Branch::Upper] {
        for &s in &seeds {
            let Some(w) = newton(material, t, k, Complex64::new(s, 0.0), branch) else {
                continue;
            };
            if !(w.re > 0.0) || w.re >= HBAR_C * k {
                continue;
            }
            if roots.iter().all(|r| (r - w).norm() > 1e-6 * w.norm()) {
                roots.push(w);
            }
        }
    }
    if roots.is_empty() {
        return Err(Error::NotConverged {
            context: format!("film dispersion relation at k = {k} nm^-1"),
            estimate: f64::NAN,
            error: f64::NAN,
            evaluations: NEWTON_MAX_ITER,
        });
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re));
    Ok(roots)
}

//! Adaptive Gauss–Kronrod quadrature with a tanh-sinh fallback.
//!
//! The integrator is globally adaptive: it keeps every panel in a max-heap
//! keyed by its error estimate and bisects the worst one until the summed
//! error meets `max(abs_tol, rel_tol·|I|)` or the evaluation budget runs
//! out. Panels that cannot be bisected any further, or that are still the
//! worst ones when the budget is exhausted, are re-integrated with a
//! fixed-depth tanh-sinh rule, which copes with endpoint singularities that
//! defeat the Kronrod error estimate.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Tolerances and budget for one adaptive integral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Integrand evaluation budget.
    pub max_evals: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 0.0,
            max_evals: 5_000_000,
        }
    }
}

impl QuadratureSettings {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol >= 0.0) {
            return Err(Error::invalid(
                "tolerance",
                format!("rel_tol must be > 0 and abs_tol >= 0 (got {}, {})", self.rel_tol, self.abs_tol),
            ));
        }
        if self.max_evals < 21 {
            return Err(Error::invalid("max_evals", "budget below one Kronrod panel"));
        }
        Ok(())
    }

    /// Same settings with the tolerances scaled by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        Self {
            rel_tol: self.rel_tol * factor,
            abs_tol: self.abs_tol * factor,
            max_evals: self.max_evals,
        }
    }
}

/// Result of a quadrature: value, error estimate and evaluations spent.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Returned when the requested tolerance was not met. Carries the best
/// estimate obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Unconverged(pub Estimate);

impl Unconverged {
    pub fn into_error(self, context: impl Into<String>) -> Error {
        Error::NotConverged {
            context: context.into(),
            estimate: self.0.value,
            error: self.0.error,
            evaluations: self.0.evaluations,
        }
    }
}

/// Neumaier compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21),
// digits as published.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_217_529_920,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const KRONROD_POINTS: usize = 21;

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// One 21-point Gauss–Kronrod panel. Returns (integral, error estimate,
/// integral of |f|).
pub fn gauss_kronrod21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let abs_half = half.abs();

    let fc = f(center);
    let mut res_g = 0.0;
    let mut res_k = fc * WGK[10];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];

    for (j, wg) in WG.iter().enumerate() {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_g += wg * (f1 + f2);
        res_k += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        res_k += WGK[jtwm1] * (f1 + f2);
        res_abs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }

    let mean = res_k * 0.5;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let result = res_k * half;
    res_abs *= abs_half;
    res_asc *= abs_half;
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    if !result.is_finite() {
        err = f64::INFINITY;
    }
    (result, err, res_abs)
}

/// Fixed-depth tanh-sinh rule on [a, b]. Returns (integral, error estimate
/// from the last two refinement levels, evaluations).
pub fn tanh_sinh<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, levels: u32) -> (f64, f64, usize) {
    use std::f64::consts::FRAC_PI_2;
    let half = 0.5 * (b - a);
    let t_max = 3.2_f64;
    let mut evals = 0;

    // Abscissae are evaluated as offsets from the nearer endpoint so that
    // nodes crowding an endpoint do not collapse onto it.
    let mut node = |t: f64, f: &mut F| -> f64 {
        let s = FRAC_PI_2 * t.sinh();
        let cosh_s = s.cosh();
        let w = FRAC_PI_2 * t.cosh() / (cosh_s * cosh_s);
        // 1 - tanh(|s|) = 2 / (1 + e^{2|s|})
        let complement = 2.0 / (1.0 + (2.0 * s.abs()).exp());
        let x = if s >= 0.0 { b - half * complement } else { a + half * complement };
        if x <= a || x >= b || w == 0.0 {
            return 0.0;
        }
        evals += 1;
        let v = f(x);
        if v.is_finite() {
            w * v
        } else {
            0.0
        }
    };

    let mut h = 1.0_f64;
    let mut sum = node(0.0, f);
    let mut k = 1;
    while (k as f64) * h <= t_max {
        let t = k as f64 * h;
        sum += node(t, f) + node(-t, f);
        k += 1;
    }
    let mut estimate = sum * h * half;
    let mut previous = estimate;
    for _ in 0..levels {
        h *= 0.5;
        let mut k = 1;
        while (k as f64) * h <= t_max {
            let t = k as f64 * h;
            sum += node(t, f) + node(-t, f);
            k += 2;
        }
        previous = estimate;
        estimate = sum * h * half;
    }
    (estimate, (estimate - previous).abs(), evals)
}

/// Integrates `f` over [a, b].
pub fn integrate<F: FnMut(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    settings: &QuadratureSettings,
) -> Result<Estimate, Unconverged> {
    integrate_panels(f, &[a, b], settings)
}

/// Integrates `f` over the span of `breakpoints`, using each consecutive
/// pair as an initial panel. The breakpoints must be sorted.
pub fn integrate_panels<F: FnMut(f64) -> f64>(
    f: F,
    breakpoints: &[f64],
    settings: &QuadratureSettings,
) -> Result<Estimate, Unconverged> {
    integrate_panels_l1(f, breakpoints, settings, 0.0)
}

/// Like [`integrate_panels`], but the relative tolerance is measured against
/// `max(|I|, l1_weight·∫|f|)`. For integrands whose positive and negative
/// lobes nearly cancel this stops the refinement from chasing a vanishing
/// target.
pub fn integrate_panels_l1<F: FnMut(f64) -> f64>(
    mut f: F,
    breakpoints: &[f64],
    settings: &QuadratureSettings,
    l1_weight: f64,
) -> Result<Estimate, Unconverged> {
    if breakpoints.len() < 2 {
        return Ok(Estimate::default());
    }
    let mut heap = BinaryHeap::with_capacity(breakpoints.len() * 2);
    let mut evaluations = 0usize;
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut total_abs = 0.0;
    for w in breakpoints.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a == b {
            continue;
        }
        let (value, error, abs) = gauss_kronrod21(&mut f, a, b);
        evaluations += KRONROD_POINTS;
        total += value;
        total_err += error;
        total_abs += abs;
        heap.push(Panel { a, b, value, error, abs });
    }
    let target = |total: f64, total_abs: f64| {
        settings
            .abs_tol
            .max(settings.rel_tol * total.abs().max(l1_weight * total_abs))
    };
    let mut settled: Vec<Panel> = Vec::new();
    let mut iterations = 0usize;

    loop {
        if total_err <= target(total, total_abs) || !total.is_finite() {
            break;
        }
        if evaluations + 2 * KRONROD_POINTS > settings.max_evals {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        let width = (worst.b - worst.a).abs();
        let scale = worst.a.abs().max(worst.b.abs()).max(f64::MIN_POSITIVE);
        if width <= 1e3 * f64::EPSILON * scale || mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            settled.push(worst);
            continue;
        }
        let (v1, e1, a1) = gauss_kronrod21(&mut f, worst.a, mid);
        let (v2, e2, a2) = gauss_kronrod21(&mut f, mid, worst.b);
        evaluations += 2 * KRONROD_POINTS;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        total_abs += a1 + a2 - worst.abs;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1, abs: a1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2, abs: a2 });

        iterations += 1;
        if iterations & 63 == 0 {
            // resynchronise the running sums against drift
            let (t, e, l1) = sums(heap.iter().chain(settled.iter()));
            total = t;
            total_err = e;
            total_abs = l1;
        }
    }

    let mut panels: Vec<Panel> = heap.into_vec();
    panels.extend(settled);
    let (mut total, mut total_err, total_abs) = sums(panels.iter());
    if total_err <= target(total, total_abs) {
        return Ok(Estimate { value: total, error: total_err, evaluations });
    }
    if !total.is_finite() {
        return Err(Unconverged(Estimate { value: total, error: f64::INFINITY, evaluations }));
    }

    // Fallback: re-integrate the worst panels with tanh-sinh.
    panels.sort_by(|x, y| y.error.total_cmp(&x.error));
    for panel in panels.iter_mut().take(16) {
        let (ts, ts_err, n) = tanh_sinh(&mut f, panel.a.min(panel.b), panel.a.max(panel.b), 6);
        evaluations += n;
        let ts = if panel.b < panel.a { -ts } else { ts };
        if ts.is_finite() && ts_err < panel.error {
            panel.value = ts;
            panel.error = ts_err;
        }
    }
    let (t, e, l1) = sums(panels.iter());
    total = t;
    total_err = e;
    let estimate = Estimate { value: total, error: total_err, evaluations };
    if total_err <= target(total, l1) {
        Ok(estimate)
    } else {
        Err(Unconverged(estimate))
    }
}

fn sums<'a>(panels: impl Iterator<Item = &'a Panel>) -> (f64, f64, f64) {
    let mut value = CompensatedSum::new();
    let mut error = 0.0;
    let mut abs = 0.0;
    for p in panels {
        value.add(p.value);
        error += p.error;
        abs += p.abs;
    }
    (value.value(), error, abs)
}

/// Trapezoid rule over sampled data with compensated accumulation.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xw, yw)| 0.5 * (xw[1] - xw[0]) * (yw[0] + yw[1]))
        .collect::<CompensatedSum>()
        .value()
}

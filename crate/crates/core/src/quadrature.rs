//! Globally adaptive 21-point Gauss–Kronrod quadrature for vector-valued
//! integrands.
//!
//! Every component shares the abscissae, so integrands that evaluate several
//! related quantities at once (a kernel and its derivative, or the six
//! master-equation coefficients) pay for the expensive parts a single time.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{DsbError, Result};

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
    0.000_000_000_000_000_000_000_000_000_000_000,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Result of a single 21-point Gauss–Kronrod panel.
#[derive(Debug, Clone, Copy)]
pub struct Panel<const N: usize> {
    pub a: f64,
    pub b: f64,
    pub value: [f64; N],
    pub error: [f64; N],
    pub abs_value: [f64; N],
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

/// Applies the 21-point Kronrod rule (with its embedded 10-point Gauss rule
/// for the error estimate) on `[a, b]`.
pub fn gauss_kronrod21<const N: usize, F>(f: &F, a: f64, b: f64) -> Panel<N>
where
    F: Fn(f64) -> [f64; N],
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let mut samples = [[[0.0; N]; 2]; 10];
    let f_center = f(center);

    let mut gauss = [0.0; N];
    let mut kronrod = [0.0; N];
    let mut res_abs = [0.0; N];
    for k in 0..N {
        kronrod[k] = WGK[10] * f_center[k];
        res_abs[k] = (WGK[10] * f_center[k]).abs();
    }

    for (j, pair) in samples.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let lo = f(center - dx);
        let hi = f(center + dx);
        for k in 0..N {
            let sum = lo[k] + hi[k];
            kronrod[k] += WGK[j] * sum;
            res_abs[k] += WGK[j] * (lo[k].abs() + hi[k].abs());
            // odd Kronrod indices are the Gauss nodes
            if j % 2 == 1 {
                gauss[k] += WG[j / 2] * sum;
            }
        }
        *pair = [lo, hi];
    }

    let mut error = [0.0; N];
    let mut value = [0.0; N];
    let mut abs_value = [0.0; N];
    for k in 0..N {
        let mean = 0.5 * kronrod[k];
        let mut res_asc = WGK[10] * (f_center[k] - mean).abs();
        for (j, [lo, hi]) in samples.iter().enumerate() {
            res_asc += WGK[j] * ((lo[k] - mean).abs() + (hi[k] - mean).abs());
        }
        let err = (kronrod[k] - gauss[k]) * half;
        value[k] = kronrod[k] * half;
        abs_value[k] = res_abs[k] * half.abs();
        error[k] = rescale_error(err, abs_value[k], res_asc * half.abs());
    }

    Panel {
        a,
        b,
        value,
        error,
        abs_value,
    }
}

/// Integral estimate with its absolute error bound per component.
#[derive(Debug, Clone, Copy)]
pub struct Estimate<const N: usize> {
    pub value: [f64; N],
    pub error: [f64; N],
    pub intervals: usize,
}

/// Settings for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadConfig<const N: usize> {
    /// Absolute tolerance per component.
    pub abs_tol: [f64; N],
    pub max_intervals: usize,
}

impl<const N: usize> QuadConfig<N> {
    pub fn uniform(abs_tol: f64) -> Self {
        QuadConfig {
            abs_tol: [abs_tol; N],
            max_intervals: 200_000,
        }
    }
}

struct Ranked<const N: usize> {
    badness: f64,
    panel: Panel<N>,
}

impl<const N: usize> PartialEq for Ranked<N> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<const N: usize> Eq for Ranked<N> {}
impl<const N: usize> PartialOrd for Ranked<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Ranked<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.badness
            .total_cmp(&other.badness)
            .then(other.panel.a.total_cmp(&self.panel.a))
    }
}

/// Integrates `f` over `[breakpoints[0], breakpoints.last()]`, starting from
/// the panels delimited by `breakpoints` and repeatedly bisecting the panel
/// with the largest tolerance-normalised error.
///
/// Convergence is declared once every component's summed error is below its
/// tolerance, or below the round-off floor `100·ε·∫|f|` when the requested
/// tolerance is unreachable in double precision.
pub fn integrate<const N: usize, F>(f: F, breakpoints: &[f64], cfg: &QuadConfig<N>) -> Result<Estimate<N>>
where
    F: Fn(f64) -> [f64; N],
{
    assert!(breakpoints.len() >= 2, "need at least one panel");
    let tol = cfg.abs_tol;
    let badness = |p: &Panel<N>| {
        (0..N)
            .map(|k| if tol[k] > 0.0 { p.error[k] / tol[k] } else { p.error[k] })
            .fold(0.0, f64::max)
    };

    let mut heap = BinaryHeap::with_capacity(breakpoints.len() * 2);
    for w in breakpoints.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        let panel = gauss_kronrod21(&f, w[0], w[1]);
        heap.push(Ranked {
            badness: badness(&panel),
            panel,
        });
    }

    let totals = |heap: &BinaryHeap<Ranked<N>>| {
        let mut err = [0.0; N];
        let mut abs = [0.0; N];
        for r in heap.iter() {
            for k in 0..N {
                err[k] += r.panel.error[k];
                abs[k] += r.panel.abs_value[k];
            }
        }
        (err, abs)
    };
    let converged =
        |err: &[f64; N], abs: &[f64; N]| (0..N).all(|k| err[k] <= tol[k].max(100.0 * f64::EPSILON * abs[k]));

    let (mut err, mut abs) = totals(&heap);
    while !converged(&err, &abs) {
        if heap.len() >= cfg.max_intervals {
            return Err(convergence_failure(&err, &tol, heap.len()));
        }
        let Some(worst) = heap.pop() else { break };
        let p = worst.panel;
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            heap.push(worst);
            return Err(convergence_failure(&err, &tol, heap.len()));
        }
        let left = gauss_kronrod21(&f, p.a, mid);
        let right = gauss_kronrod21(&f, mid, p.b);
        for k in 0..N {
            err[k] += left.error[k] + right.error[k] - p.error[k];
            abs[k] += left.abs_value[k] + right.abs_value[k] - p.abs_value[k];
        }
        for panel in [left, right] {
            heap.push(Ranked {
                badness: badness(&panel),
                panel,
            });
        }
        // running sums drift; refresh before the final verdict
        if converged(&err, &abs) {
            (err, abs) = totals(&heap);
        }
    }

    let mut panels: Vec<Panel<N>> = heap.into_iter().map(|r| r.panel).collect();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut value = [0.0; N];
    for p in &panels {
        for (acc, v) in value.iter_mut().zip(&p.value) {
            *acc += v;
        }
    }
    Ok(Estimate {
        value,
        error: err,
        intervals: panels.len(),
    })
}

fn convergence_failure<const N: usize>(err: &[f64; N], tol: &[f64; N], intervals: usize) -> DsbError {
    let (k, _) = (0..N)
        .map(|k| (k, err[k] / tol[k]))
        .fold((0, f64::MIN), |acc, x| if x.1 > acc.1 { x } else { acc });
    DsbError::Convergence {
        estimate: err[k],
        tolerance: tol[k],
        intervals,
    }
}

/// Scalar convenience wrapper around [`integrate`] on a single interval.
pub fn integrate_scalar<F>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let est = integrate(|x| [f(x)], &[a, b], &QuadConfig::uniform(abs_tol))?;
    Ok((est.value[0], est.error[0]))
}

//! One-dimensional numerical integration.
//!
//! Two independent rule families live here:
//!
//! - [`gauss_kronrod`]: globally adaptive 10/21-point Gauss–Kronrod, used by
//!   the special-function kernels.
//! - [`gauss_legendre`]: fixed 32-point Gauss–Legendre panels refined by
//!   bisection, used by the brute-force oracle layer.
//!
//! Keeping the oracle on a different rule family means an error in one
//! cannot silently certify the other.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};

/// Outcome of a numerical integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub nodes_used: usize,
}

impl QuadratureResult {
    pub(crate) fn combine(self, other: QuadratureResult) -> QuadratureResult {
        QuadratureResult {
            value: self.value + other.value,
            abs_error_estimate: self.abs_error_estimate + other.abs_error_estimate,
            nodes_used: self.nodes_used + other.nodes_used,
        }
    }
}

/// Stopping tolerances for the adaptive Gauss–Kronrod driver.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-12,
            rel: 1e-10,
            max_intervals: 2000,
        }
    }
}

// Kronrod abscissae; odd indices are the 10-point Gauss abscissae.
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

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_478_226,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = fc.abs() * WGK[10];
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Segment { a, b, value, error }
}

/// Globally adaptive Gauss–Kronrod (G10/K21) integration of `f` over `[a, b]`.
///
/// The interval with the largest error estimate is bisected until the total
/// error falls below `max(tol.abs, tol.rel * |value|)`.
pub fn gauss_kronrod<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Result<QuadratureResult> {
    if a == b {
        return Ok(QuadratureResult {
            value: 0.0,
            abs_error_estimate: 0.0,
            nodes_used: 0,
        });
    }
    let first = kronrod21(&f, a, b);
    let mut nodes = 21;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut total = first.value;
    let mut total_err = first.error;

    loop {
        if !total.is_finite() || !total_err.is_finite() {
            return Err(Error::QuadratureNonConvergence {
                value: total,
                abs_error: total_err,
            });
        }
        if total_err <= tol.abs.max(tol.rel * total.abs()) {
            return Ok(QuadratureResult {
                value: total,
                abs_error_estimate: total_err,
                nodes_used: nodes,
            });
        }
        if heap.len() >= tol.max_intervals {
            return Err(Error::QuadratureNonConvergence {
                value: total,
                abs_error: total_err,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // Interval exhausted at machine resolution.
            return Err(Error::QuadratureNonConvergence {
                value: total,
                abs_error: total_err,
            });
        }
        let left = kronrod21(&f, worst.a, mid);
        let right = kronrod21(&f, mid, worst.b);
        nodes += 42;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // Re-sum occasionally drifting totals from the segments themselves.
        if heap.len() % 64 == 0 {
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
}

/// Integrates `f` over `[a, ∞)` through the map `t = a + (1 - x) / x`.
pub fn gauss_kronrod_semi_infinite<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    tol: Tolerance,
) -> Result<QuadratureResult> {
    gauss_kronrod(
        |x| {
            let t = a + (1.0 - x) / x;
            let v = f(t) / (x * x);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        tol,
    )
}

const GL_ORDER: usize = 32;

/// Nodes and weights of the 32-point Gauss–Legendre rule on [-1, 1].
fn legendre_rule() -> &'static ([f64; GL_ORDER], [f64; GL_ORDER]) {
    static RULE: OnceLock<([f64; GL_ORDER], [f64; GL_ORDER])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        let mut x = [0.0; GL_ORDER];
        let mut w = [0.0; GL_ORDER];
        for i in 0..n {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                // Three-term recurrence for P_n and its derivative.
                let mut p0 = 1.0;
                let mut p1 = z;
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
                let dz = p1 / dp;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            x[i] = z;
            w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
        (x, w)
    })
}

/// Panel integral of `f` and of `|f|`.
fn legendre_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let (x, w) = legendre_rule();
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    let mut acc_abs = 0.0;
    for (xi, wi) in x.iter().zip(w.iter()) {
        let v = wi * f(c + h * xi);
        acc += v;
        acc_abs += v.abs();
    }
    (acc * h, acc_abs * h.abs())
}

/// Composite 32-point Gauss–Legendre over `panels` equal panels, with each
/// panel bisected until its two halves agree with the whole to `abs_tol`.
pub fn gauss_legendre<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    panels: usize,
    abs_tol: f64,
) -> QuadratureResult {
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let per_panel = abs_tol / panels as f64;
    let mut out = QuadratureResult {
        value: 0.0,
        abs_error_estimate: 0.0,
        nodes_used: 0,
    };
    for i in 0..panels {
        let lo = a + width * i as f64;
        let hi = if i + 1 == panels { b } else { lo + width };
        let (whole, _) = legendre_panel(&f, lo, hi);
        let part = bisect(&f, lo, hi, whole, per_panel, 0);
        out = out.combine(QuadratureResult {
            value: part.value,
            abs_error_estimate: part.abs_error_estimate,
            nodes_used: part.nodes_used + GL_ORDER,
        });
    }
    out
}

const MAX_BISECTION_DEPTH: u32 = 40;
const ROUNDOFF_FACTOR: f64 = 50.0;

fn bisect<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> QuadratureResult {
    let mid = 0.5 * (a + b);
    let (left, left_abs) = legendre_panel(f, a, mid);
    let (right, right_abs) = legendre_panel(f, mid, b);
    let diff = (left + right - whole).abs();
    // Below this the difference is rounding noise and bisection cannot help.
    let noise = ROUNDOFF_FACTOR * f64::EPSILON * (left_abs + right_abs);
    if diff <= tol.max(noise) || depth >= MAX_BISECTION_DEPTH {
        return QuadratureResult {
            value: left + right,
            abs_error_estimate: diff,
            nodes_used: 2 * GL_ORDER,
        };
    }
    let l = bisect(f, a, mid, left, 0.5 * tol, depth + 1);
    let r = bisect(f, mid, b, right, 0.5 * tol, depth + 1);
    l.combine(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_polynomial_is_exact() {
        let r = gauss_kronrod(|x| x.powi(5) - 3.0 * x * x + 1.0, -1.0, 2.0, Tolerance::default())
            .unwrap();
        // ∫ = [x^6/6 - x^3 + x] from -1 to 2
        let exact = (64.0 / 6.0 - 8.0 + 2.0) - (1.0 / 6.0 + 1.0 - 1.0);
        assert!((r.value - exact).abs() < 1e-13);
        assert_eq!(r.nodes_used, 21);
    }

    #[test]
    fn kronrod_peaked_integrand() {
        let k = 400.0;
        let r = gauss_kronrod(|t: f64| (k * (t - 1.0)).exp(), -1.0, 1.0, Tolerance::default())
            .unwrap();
        let exact = (1.0 - (-2.0 * k).exp()) / k;
        assert!(((r.value - exact) / exact).abs() < 1e-12);
    }

    #[test]
    fn semi_infinite_exponential() {
        let r = gauss_kronrod_semi_infinite(|t: f64| (-2.0 * t).exp(), 1.0, Tolerance::default())
            .unwrap();
        let exact = (-2.0f64).exp() / 2.0;
        assert!(((r.value - exact) / exact).abs() < 1e-11);
    }

    #[test]
    fn legendre_weights_sum_to_two() {
        let (x, w) = legendre_rule();
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        assert!(x.iter().all(|v| v.abs() < 1.0));
    }

    #[test]
    fn legendre_trig_integral() {
        let r = gauss_legendre(|x: f64| x.sin().powi(2), 0.0, std::f64::consts::PI, 4, 1e-13);
        assert!((r.value - std::f64::consts::FRAC_PI_2).abs() < 1e-13);
        assert!(r.abs_error_estimate <= 1e-13);
    }

    #[test]
    fn nonconvergence_is_reported() {
        let tol = Tolerance {
            abs: 1e-15,
            rel: 0.0,
            max_intervals: 4,
        };
        let err = gauss_kronrod(|x: f64| x.abs().sqrt().recip(), -1.0, 1.0, tol).unwrap_err();
        assert!(matches!(err, Error::QuadratureNonConvergence { .. }));
    }
}

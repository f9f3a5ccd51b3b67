//! Test-only oracles, independent of the library's evaluation paths.
#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

/// Tanh-sinh quadrature on `[a, b]`, refined by halving the step until two
/// successive levels agree to `rel_tol`.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    let c = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |h: f64| -> f64 {
        let mut sum = 0.0;
        let mut k = 0i64;
        loop {
            let t = k as f64 * h;
            let mut level = 0.0;
            for s in if k == 0 { vec![1.0] } else { vec![1.0, -1.0] } {
                let u = FRAC_PI_2 * (s * t).sinh();
                let x = u.tanh();
                let w = FRAC_PI_2 * (s * t).cosh() / u.cosh().powi(2);
                // Distance to the nearer endpoint, computed without cancellation.
                let dist = 1.0 / (u.abs().exp() * u.cosh());
                if dist == 0.0 || w == 0.0 {
                    continue;
                }
                let xx = if x > 0.0 { b - half * dist } else if x < 0.0 { a + half * dist } else { c };
                let v = f(xx) * w;
                if v.is_finite() {
                    level += v;
                }
            }
            sum += level;
            k += 1;
            if t > 6.5 {
                break;
            }
        }
        sum * h * half
    };
    let mut h = 0.5;
    let mut prev = eval(h);
    for _ in 0..12 {
        h *= 0.5;
        let next = eval(h);
        if (next - prev).abs() <= rel_tol * next.abs() {
            return next;
        }
        prev = next;
    }
    prev
}

/// Exp-sinh quadrature on `[a, ∞)`.
pub fn exp_sinh<F: Fn(f64) -> f64>(f: F, a: f64, rel_tol: f64) -> f64 {
    let eval = |h: f64| -> f64 {
        let mut sum = 0.0;
        let n = (8.0 / h) as i64;
        for k in -n..=n {
            let t = k as f64 * h;
            let e = (FRAC_PI_2 * t.sinh()).exp();
            let w = FRAC_PI_2 * t.cosh() * e;
            let x = a + e;
            let v = f(x) * w;
            if v.is_finite() {
                sum += v;
            }
        }
        sum * h
    };
    let mut h = 0.25;
    let mut prev = eval(h);
    for _ in 0..10 {
        h *= 0.5;
        let next = eval(h);
        if (next - prev).abs() <= rel_tol * next.abs() {
            return next;
        }
        prev = next;
    }
    prev
}

/// `Γ(s, z) = ∫_z^∞ t^{s-1} e^{-t} dt`.
pub fn upper_gamma_oracle(s: f64, z: f64) -> f64 {
    exp_sinh(|t| ((s - 1.0) * t.ln() - t).exp(), z, 1e-14)
}

/// `E_α(z) = ∫_1^∞ e^{-zt} t^{-α} dt`.
pub fn exp_integral_oracle(alpha: f64, z: f64) -> f64 {
    exp_sinh(|t| (-z * t - alpha * t.ln()).exp(), 1.0, 1e-14)
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `log I_{n+1/2}(z)` for `n ∈ {0, 1, 2}` from the elementary closed forms.
///
/// With `g_n(z) = I_{n+1/2}(z) · √(πz/2)`:
/// `g_0 = sinh z`, `g_1 = cosh z − sinh z/z`,
/// `g_2 = (1 + 3/z²) sinh z − 3 cosh z / z`.
/// Below `z = 4` the Taylor coefficients of `g_n` are used to avoid
/// cancellation; above it the forms are rewritten with `e^{-2z}`.
pub fn log_bessel_half_integer(n: u32, z: f64) -> f64 {
    let log_g = if z < 4.0 {
        let mut s = 0.0;
        for k in 0..60u32 {
            let c = match n {
                0 => 1.0 / factorial(2 * k + 1),
                1 => 2.0 * f64::from(k) / factorial(2 * k + 1),
                2 => 4.0 * f64::from(k) * (f64::from(k) - 1.0) / factorial(2 * k + 1),
                _ => unreachable!(),
            };
            let power = match n {
                0 => 2 * k + 1,
                1 => 2 * k,
                _ => (2 * k).saturating_sub(1),
            };
            s += c * z.powi(power as i32);
        }
        s.ln()
    } else {
        let e = (-2.0 * z).exp();
        let h = match n {
            0 => 0.5 * (1.0 - e),
            1 => 0.5 * (1.0 + e) - 0.5 * (1.0 - e) / z,
            2 => 0.5 * (1.0 + 3.0 / (z * z)) * (1.0 - e) - 1.5 * (1.0 + e) / z,
            _ => unreachable!(),
        };
        z + h.ln()
    };
    0.5 * (2.0 / (PI * z)).ln() + log_g
}

/// Plain power series `Σ_{m<terms} (z/2)^{2m+α} / (m! Γ(m+α+1))` for
/// half-integer or integer `α`, evaluated with direct products (small z only).
pub fn bessel_power_series(alpha: f64, z: f64, terms: usize) -> f64 {
    // Γ(α+1) by the recurrence from Γ(1) or Γ(1/2).
    let mut gamma = if alpha.fract() == 0.0 { 1.0 } else { PI.sqrt() };
    let mut a = if alpha.fract() == 0.0 { 1.0 } else { 0.5 };
    while a < alpha + 1.0 - 1e-12 {
        gamma *= a;
        a += 1.0;
    }
    let x = 0.5 * z;
    let mut term = x.powf(alpha) / gamma;
    let mut sum = term;
    for m in 0..terms - 1 {
        let mf = m as f64 + 1.0;
        term *= x * x / (mf * (mf + alpha));
        sum += term;
    }
    sum
}

/// Deterministic split-mix stream for test-side parameter draws.
pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        lo + (hi - lo) * u
    }
}

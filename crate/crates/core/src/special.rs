//! Scalar special functions evaluated in the log domain.
//!
//! The modified Bessel function of the first kind grows like `e^z`, so every
//! routine here returns (or works internally with) logarithms. Three
//! evaluation branches cover `log I_α(z)`:
//!
//! | branch       | range                          | method                                   |
//! |--------------|--------------------------------|------------------------------------------|
//! | `Series`     | `z < max(10, 2α)`              | power series, log-sum-exp over terms     |
//! | `Quadrature` | between the two crossovers     | Poisson integral, max-shifted integrand  |
//! | `Asymptotic` | `z > max(500, 40α)`            | Debye uniform expansion, terms `U_0..U_5`|

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::logspace::{log_add_exp, log_sum_exp};
use crate::quadrature::{gauss_kronrod, gauss_kronrod_semi_infinite, Tolerance};

/// Series terms more than this many nats below the running sum are dropped.
const SERIES_CUTOFF_NATS: f64 = 40.0;
const SERIES_MAX_TERMS: usize = 500;

/// `log Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(statrs::function::gamma::ln_gamma(x))
}

/// `log n!`, summed directly for small `n`.
pub fn log_factorial(n: u64) -> f64 {
    if n <= 170 {
        let mut s = crate::logspace::CompensatedSum::new();
        for k in 2..=n {
            s.add((k as f64).ln());
        }
        s.value()
    } else {
        statrs::function::gamma::ln_gamma(n as f64 + 1.0)
    }
}

/// `log Γ(s, z)` for integer shape `s ≥ 1`:
/// `log((s-1)!) - z + log Σ_{m<s} z^m / m!`.
pub fn log_upper_incomplete_gamma_int(s: u64, z: f64) -> Result<f64> {
    if s < 1 {
        return Err(Error::domain("incomplete gamma requires s >= 1"));
    }
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::domain(format!("incomplete gamma requires z >= 0, got {z}")));
    }
    let log_sum = if z == 0.0 {
        0.0
    } else {
        let lz = z.ln();
        let mut terms = Vec::with_capacity(s as usize);
        let mut t = 0.0;
        terms.push(t);
        for m in 1..s {
            t += lz - (m as f64).ln();
            terms.push(t);
        }
        log_sum_exp(&terms)
    };
    Ok(log_factorial(s - 1) - z + log_sum)
}

/// Upper incomplete gamma `Γ(s, z)` at integer shape.
pub fn upper_incomplete_gamma_int(s: u64, z: f64) -> Result<f64> {
    log_upper_incomplete_gamma_int(s, z).map(f64::exp)
}

/// Which evaluation route produced a [`LogBesselResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BesselBranch {
    Series,
    Quadrature,
    Asymptotic,
}

impl std::fmt::Display for BesselBranch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            BesselBranch::Series => "series",
            BesselBranch::Quadrature => "quadrature",
            BesselBranch::Asymptotic => "asymptotic",
        };
        f.write_str(s)
    }
}

/// `log I_α(z)` together with the branch that computed it.
///
/// `value` is `-∞` when `I_α(z) = 0`, i.e. at `z = 0` with `α > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogBesselResult {
    pub value: f64,
    pub branch: BesselBranch,
    pub alpha: f64,
    pub z: f64,
}

/// Lower edge of the quadrature band.
pub fn series_crossover(alpha: f64) -> f64 {
    10f64.max(2.0 * alpha)
}

/// Upper edge of the quadrature band.
pub fn asymptotic_crossover(alpha: f64) -> f64 {
    500f64.max(40.0 * alpha)
}

fn check_bessel_args(alpha: f64, z: f64) -> Result<()> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::domain(format!("log_bessel_i requires alpha >= 0, got {alpha}")));
    }
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::domain(format!("log_bessel_i requires z >= 0, got {z}")));
    }
    Ok(())
}

/// Natural log of the modified Bessel function of the first kind.
pub fn log_bessel_i(alpha: f64, z: f64) -> Result<LogBesselResult> {
    check_bessel_args(alpha, z)?;
    let result = |value, branch| LogBesselResult {
        value,
        branch,
        alpha,
        z,
    };
    if z == 0.0 {
        let value = if alpha == 0.0 { 0.0 } else { f64::NEG_INFINITY };
        return Ok(result(value, BesselBranch::Series));
    }
    if z < series_crossover(alpha) {
        if let Some(v) = series(alpha, z) {
            return Ok(result(v, BesselBranch::Series));
        }
        // Very large orders exhaust the term cap before the peak term.
        return Ok(result(quadrature(alpha, z)?, BesselBranch::Quadrature));
    }
    if z > asymptotic_crossover(alpha) {
        return Ok(result(asymptotic(alpha, z), BesselBranch::Asymptotic));
    }
    Ok(result(quadrature(alpha, z)?, BesselBranch::Quadrature))
}

/// Evaluates `log I_α(z)` on a forced branch, regardless of the crossovers.
///
/// Intended for cross-checking branches against each other. The series branch
/// fails with a domain error if it does not converge within its term cap.
pub fn log_bessel_i_branch(alpha: f64, z: f64, branch: BesselBranch) -> Result<f64> {
    check_bessel_args(alpha, z)?;
    if z == 0.0 {
        return Ok(if alpha == 0.0 { 0.0 } else { f64::NEG_INFINITY });
    }
    match branch {
        BesselBranch::Series => series(alpha, z).ok_or_else(|| {
            Error::domain(format!("series for I_{alpha}({z}) did not converge"))
        }),
        BesselBranch::Quadrature => quadrature(alpha, z),
        BesselBranch::Asymptotic => Ok(asymptotic(alpha, z)),
    }
}

fn series(alpha: f64, z: f64) -> Option<f64> {
    let log_half_z = (0.5 * z).ln();
    let step = 2.0 * log_half_z;
    let mut t = -statrs::function::gamma::ln_gamma(alpha + 1.0);
    let mut running = t;
    let mut terms = Vec::with_capacity(64);
    terms.push(t);
    let mut converged = false;
    for m in 0..SERIES_MAX_TERMS - 1 {
        let mf = m as f64 + 1.0;
        let next = t + step - mf.ln() - (mf + alpha).ln();
        let decreasing = next < t;
        t = next;
        terms.push(t);
        running = log_add_exp(running, t);
        if decreasing && t < running - SERIES_CUTOFF_NATS {
            converged = true;
            break;
        }
    }
    if !converged {
        return None;
    }
    Some(alpha * log_half_z + log_sum_exp(&terms))
}

/// Poisson integral `I_α(z) = (z/2)^α / (√π Γ(α+½)) ∫_0^π e^{z cos θ} sin^{2α} θ dθ`,
/// with the integrand shifted by its maximum before exponentiation.
fn quadrature(alpha: f64, z: f64) -> Result<f64> {
    // Peak of z cos θ + 2α log sin θ.
    let c_star = z / ((alpha * alpha + z * z).sqrt() + alpha);
    let theta_star = c_star.acos();
    let log_integrand = |theta: f64| {
        let mut v = z * theta.cos();
        if alpha > 0.0 {
            v += 2.0 * alpha * theta.sin().ln();
        }
        v
    };
    let shift = if alpha > 0.0 {
        z * c_star + alpha * ((1.0 - c_star) * (1.0 + c_star)).ln()
    } else {
        z
    };
    let f = |theta: f64| {
        let v = (log_integrand(theta) - shift).exp();
        if v.is_nan() {
            0.0
        } else {
            v
        }
    };
    let tol = Tolerance::default();
    let mut total = 0.0;
    if theta_star > 0.0 {
        total += gauss_kronrod(f, 0.0, theta_star, tol)?.value;
    }
    total += gauss_kronrod(f, theta_star, PI, tol)?.value;
    let prefactor = alpha * (0.5 * z).ln()
        - 0.5 * PI.ln()
        - statrs::function::gamma::ln_gamma(alpha + 0.5);
    Ok(prefactor + shift + total.ln())
}

/// Coefficients of the Debye polynomials: `U_k(p) = Σ_j c[j] p^{k+2j} / denom`.
const DEBYE: [(&[f64], f64); 5] = [
    (&[3.0, -5.0], 24.0),
    (&[81.0, -462.0, 385.0], 1152.0),
    (
        &[30375.0, -369603.0, 765765.0, -425425.0],
        414720.0,
    ),
    (
        &[4465125.0, -94121676.0, 349922430.0, -446185740.0, 185910725.0],
        39813120.0,
    ),
    (
        &[
            1519035525.0,
            -49286948607.0,
            284499769554.0,
            -614135872350.0,
            566098157625.0,
            -188699385875.0,
        ],
        6688604160.0,
    ),
];

/// Debye polynomial `U_k(p)` for `k = 0..=5`.
pub fn debye_polynomial(k: usize, p: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let (coeffs, denom) = DEBYE[k - 1];
    let p2 = p * p;
    let poly = coeffs.iter().rev().fold(0.0, |acc, c| acc * p2 + c);
    p.powi(k as i32) * poly / denom
}

/// Uniform asymptotic expansion written in `s = √(α² + z²)` so that it stays
/// finite as `α → 0`: `U_k(p)/α^k = s^{-k} Σ_j c_j p^{2j}` with `p = α/s`.
fn asymptotic(alpha: f64, z: f64) -> f64 {
    let s = alpha.hypot(z);
    let p = alpha / s;
    let p2 = p * p;
    let inv_s = 1.0 / s;
    let mut correction = 0.0;
    let mut scale = 1.0;
    for (coeffs, denom) in DEBYE.iter() {
        scale *= inv_s;
        let poly = coeffs.iter().rev().fold(0.0, |acc, c| acc * p2 + c);
        correction += scale * poly / denom;
    }
    let exponent = if alpha > 0.0 {
        s + alpha * (z / (alpha + s)).ln()
    } else {
        s
    };
    exponent - 0.5 * (2.0 * PI * s).ln() + correction.ln_1p()
}

/// Exponential integral `E_α(z) = z^{α-1} Γ(1-α, z)`.
///
/// Orders `α ≤ 0` use the closed-form incomplete gamma; `α = 1` falls back to
/// quadrature of `∫_1^∞ e^{-zt}/t dt`. Larger orders are unsupported.
pub fn exp_integral_e(alpha: i64, z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::domain(format!("exp_integral_e requires z > 0, got {z}")));
    }
    match alpha {
        a if a <= 0 => {
            let shape = (1 - a) as u64;
            let log_value = (a - 1) as f64 * z.ln() + log_upper_incomplete_gamma_int(shape, z)?;
            Ok(log_value.exp())
        }
        1 => exp_integral_quadrature(1.0, z),
        a => Err(Error::UnsupportedOrder(a)),
    }
}

/// `E_α(z)` for real order, by quadrature unless `α` is an integer the
/// closed form covers.
pub fn exp_integral_e_real(alpha: f64, z: f64) -> Result<f64> {
    if alpha.fract() == 0.0 && alpha <= 1.0 {
        return exp_integral_e(alpha as i64, z);
    }
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::domain(format!("exp_integral_e requires z > 0, got {z}")));
    }
    exp_integral_quadrature(alpha, z)
}

fn exp_integral_quadrature(alpha: f64, z: f64) -> Result<f64> {
    // e^{-z} ∫_1^∞ e^{-z(t-1)} t^{-α} dt
    let r = gauss_kronrod_semi_infinite(
        |t: f64| (-z * (t - 1.0) - alpha * t.ln()).exp(),
        1.0,
        Tolerance::default(),
    )?;
    Ok((-z).exp() * r.value)
}

/// Both sides of the printed identity
/// `∫_{-1}^{1} (1-t)^d e^{tκ} dt = -2^{d-1} E_{-d}(2κ) e^{κ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityAudit {
    pub d: f64,
    pub kappa: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_diff: f64,
    pub rel_diff: f64,
}

/// Evaluates the left side by quadrature and the right side exactly as
/// printed. Nothing is asserted; the caller reads the differences.
pub fn audit_identity(d: f64, kappa: f64) -> Result<IdentityAudit> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::domain(format!("identity audit requires d > 0, got {d}")));
    }
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::domain(format!("identity audit requires kappa > 0, got {kappa}")));
    }
    let lhs = gauss_kronrod(
        |t: f64| ((1.0 - t).powf(d)) * (t * kappa).exp(),
        -1.0,
        1.0,
        Tolerance::default(),
    )?
    .value;
    let rhs = -(2f64).powf(d - 1.0) * exp_integral_e_real(-d, 2.0 * kappa)? * kappa.exp();
    let abs_diff = (lhs - rhs).abs();
    let rel_diff = abs_diff / lhs.abs().max(f64::MIN_POSITIVE);
    Ok(IdentityAudit {
        d,
        kappa,
        lhs,
        rhs,
        abs_diff,
        rel_diff,
    })
}

/// `(n log(n/e) + 1, log n!, (n+1) log((n+1)/e) + 1)`.
pub fn factorial_bounds(n: u64) -> (f64, f64, f64) {
    let nf = n as f64;
    let lower = nf * (nf.ln() - 1.0) + 1.0;
    let upper = (nf + 1.0) * ((nf + 1.0).ln() - 1.0) + 1.0;
    (lower, log_factorial(n), upper)
}

/// `(n/(1+n), log(1+n), n)` for `n > -1`.
pub fn log1p_bounds(n: f64) -> Result<(f64, f64, f64)> {
    if !(n > -1.0) || !n.is_finite() {
        return Err(Error::domain(format!("log1p bounds require n > -1, got {n}")));
    }
    Ok((n / (1.0 + n), n.ln_1p(), n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1.0)
    }

    #[test]
    fn log_gamma_values() {
        assert!(log_gamma(1.0).unwrap().abs() < 1e-15);
        assert!(close(log_gamma(5.0).unwrap(), 24f64.ln(), 1e-14));
        assert!(close(log_gamma(0.5).unwrap(), 0.5 * PI.ln(), 1e-14));
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-2.5).is_err());
        assert!(log_gamma(f64::NAN).is_err());
    }

    #[test]
    fn log_gamma_matches_factorial() {
        for n in 1..=100u64 {
            let lg = log_gamma(n as f64).unwrap();
            let lf = log_factorial(n - 1);
            assert!((lg - lf).abs() <= 1e-12 * lf.abs().max(1.0), "n={n}");
        }
    }

    #[test]
    fn incomplete_gamma_examples() {
        assert!(close(upper_incomplete_gamma_int(1, 3.0).unwrap(), (-3f64).exp(), 1e-15));
        let mut fact = 1.0;
        for s in 1..=8u64 {
            if s > 1 {
                fact *= (s - 1) as f64;
            }
            assert!(close(upper_incomplete_gamma_int(s, 0.0).unwrap(), fact, 1e-14));
        }
        assert!(close(
            upper_incomplete_gamma_int(3, 2.0).unwrap(),
            10.0 * (-2f64).exp(),
            1e-14
        ));
        assert!(upper_incomplete_gamma_int(0, 1.0).is_err());
        assert!(upper_incomplete_gamma_int(2, -1.0).is_err());
    }

    #[test]
    fn incomplete_gamma_large_arguments_stay_finite_in_log() {
        let v = log_upper_incomplete_gamma_int(400, 900.0).unwrap();
        assert!(v.is_finite());
        // Γ(1, z) = e^{-z}
        assert!(close(log_upper_incomplete_gamma_int(1, 1e4).unwrap(), -1e4, 1e-15));
    }

    #[test]
    fn bessel_zero_argument() {
        let r = log_bessel_i(0.0, 0.0).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.branch, BesselBranch::Series);
        let r = log_bessel_i(1.5, 0.0).unwrap();
        assert_eq!(r.value, f64::NEG_INFINITY);
        assert_eq!(r.branch, BesselBranch::Series);
    }

    #[test]
    fn bessel_domain_errors() {
        assert!(log_bessel_i(-0.5, 1.0).is_err());
        assert!(log_bessel_i(0.5, -1.0).is_err());
        assert!(log_bessel_i(0.5, f64::INFINITY).is_err());
    }

    #[test]
    fn bessel_half_order_example() {
        let v = log_bessel_i(0.5, 1.0).unwrap().value;
        let expect = ((2.0 / PI).sqrt() * 1f64.sinh()).ln();
        assert!((v - expect).abs() < 1e-14);
    }

    #[test]
    fn bessel_branch_selection() {
        assert_eq!(log_bessel_i(0.0, 5.0).unwrap().branch, BesselBranch::Series);
        assert_eq!(log_bessel_i(0.0, 50.0).unwrap().branch, BesselBranch::Quadrature);
        assert_eq!(log_bessel_i(0.0, 600.0).unwrap().branch, BesselBranch::Asymptotic);
        assert_eq!(log_bessel_i(20.0, 30.0).unwrap().branch, BesselBranch::Series);
        assert_eq!(log_bessel_i(20.0, 700.0).unwrap().branch, BesselBranch::Quadrature);
    }

    #[test]
    fn series_cap_falls_back_to_quadrature() {
        // Peak term sits beyond the cap for this order.
        assert!(log_bessel_i_branch(2000.0, 3999.0, BesselBranch::Series).is_err());
        let r = log_bessel_i(2000.0, 3999.0).unwrap();
        assert_eq!(r.branch, BesselBranch::Quadrature);
        assert!(r.value.is_finite());
    }

    #[test]
    fn debye_polynomials_at_one() {
        // U_1(1) = -1/12, U_2(1) = 1/288 (gamma-function Stirling coefficients).
        assert!((debye_polynomial(1, 1.0) + 1.0 / 12.0).abs() < 1e-15);
        assert!((debye_polynomial(2, 1.0) - 1.0 / 288.0).abs() < 1e-15);
    }

    #[test]
    fn exp_integral_examples() {
        assert!(close(exp_integral_e(0, 2.0).unwrap(), (-2f64).exp() / 2.0, 1e-15));
        assert!(close(exp_integral_e(-1, 1.0).unwrap(), 2.0 * (-1f64).exp(), 1e-15));
        // E_1(1) = 0.219383934395520...
        assert!(close(exp_integral_e(1, 1.0).unwrap(), 0.219_383_934_395_520_3, 1e-12));
        assert_eq!(exp_integral_e(2, 1.0).unwrap_err(), Error::UnsupportedOrder(2));
        assert!(exp_integral_e(0, 0.0).is_err());
    }

    #[test]
    fn real_order_agrees_with_integer_path() {
        let a = exp_integral_e(-3, 1.7).unwrap();
        let b = exp_integral_quadrature(-3.0, 1.7).unwrap();
        assert!(close(a, b, 1e-11));
    }

    #[test]
    fn identity_audit_reports_sign_mismatch() {
        let r = audit_identity(1.0, 1.0).unwrap();
        // ∫(1-t)e^t dt over [-1,1] = e - 3/e
        let exact = 1f64.exp() - 3.0 / 1f64.exp();
        assert!((r.lhs - exact).abs() < 1e-12);
        assert!(r.lhs > 0.0 && r.rhs < 0.0);
        assert!(audit_identity(0.0, 1.0).is_err());
        assert!(audit_identity(1.0, 0.0).is_err());
    }

    #[test]
    fn bounds_helpers() {
        let (lo, mid, hi) = factorial_bounds(1);
        assert_eq!((lo, mid), (0.0, 0.0));
        assert!(hi > 0.0);
        assert!(log1p_bounds(-1.0).is_err());
        assert_eq!(log1p_bounds(0.0).unwrap(), (0.0, 0.0, 0.0));
    }
}

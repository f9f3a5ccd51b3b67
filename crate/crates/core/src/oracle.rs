//! Deterministic brute-force checks of the analytic paths.
//!
//! [`quad_kl`] integrates the KL integrand over the sphere directly, with the
//! normalizers themselves obtained by quadrature, so it shares no code with
//! the Bessel-function route used by [`crate::divergence::kl_exact`].
//! Integration uses Gauss–Legendre panels, not the Gauss–Kronrod driver
//! inside the special functions.

use std::cell::Cell;
use std::f64::consts::PI;

use serde::Serialize;

use crate::divergence::AuditRow;
use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, QuadratureResult};
use crate::vmf::{log_stiefel_area, VmfDistribution};

/// Absolute agreement required between [`quad_kl`] and the closed form.
pub const CERTIFY_TOLERANCE: f64 = 1e-7;

const PANELS: usize = 16;
const OUTER_TOL: f64 = 1e-12;
const INNER_TOL: f64 = 1e-13;

/// Integral of `f` over `S^{d-1}` for `d ∈ {2, 3}`.
///
/// `d = 2`: `x = (cos φ, sin φ)`; `d = 3`: `x = (cos θ, sin θ cos φ, sin θ sin φ)`.
fn sphere_integral<F: Fn(&[f64; 3]) -> f64>(d: usize, f: F) -> Result<QuadratureResult> {
    match d {
        2 => Ok(gauss_legendre(
            |phi: f64| f(&[phi.cos(), phi.sin(), 0.0]),
            -PI,
            PI,
            PANELS,
            OUTER_TOL,
        )),
        3 => {
            let inner_err = Cell::new(0.0f64);
            let inner_nodes = Cell::new(0usize);
            let outer = gauss_legendre(
                |theta: f64| {
                    let (st, ct) = theta.sin_cos();
                    let r = gauss_legendre(
                        |phi: f64| f(&[ct, st * phi.cos(), st * phi.sin()]),
                        -PI,
                        PI,
                        PANELS,
                        INNER_TOL,
                    );
                    inner_err.set(inner_err.get().max(r.abs_error_estimate * st));
                    inner_nodes.set(inner_nodes.get() + r.nodes_used);
                    r.value * st
                },
                0.0,
                PI,
                PANELS,
                OUTER_TOL,
            );
            Ok(QuadratureResult {
                value: outer.value,
                abs_error_estimate: outer.abs_error_estimate + PI * inner_err.get(),
                nodes_used: inner_nodes.get(),
            })
        }
        other => Err(Error::UnsupportedDimension(other)),
    }
}

/// `log ∫ exp(κ μᵀx) dσ(x)`, computed as `κ + log ∫ exp(κ(μᵀx − 1)) dσ`.
fn log_partition(d: usize, kappa: f64, mu: [f64; 3]) -> Result<(f64, QuadratureResult)> {
    let r = sphere_integral(d, |x| (kappa * (dot3(&mu, x) - 1.0)).exp())?;
    Ok((kappa + r.value.ln(), r))
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// KL(q ‖ p) by quadrature over the sphere, for `d ∈ {2, 3}`.
///
/// The pair is placed with `μ_q = e₁` and `μ_p = (cos θ, sin θ, 0)`.
pub fn quad_kl(q: &VmfDistribution, p: &VmfDistribution) -> Result<QuadratureResult> {
    if q.dim() != p.dim() {
        return Err(Error::DimensionMismatch(q.dim(), p.dim()));
    }
    let d = q.dim();
    if d > 3 {
        return Err(Error::UnsupportedDimension(d));
    }
    let cos = p.mu().dot(q.mu())?.clamp(-1.0, 1.0);
    let sin = (1.0 - cos * cos).sqrt();
    let mu_q = [1.0, 0.0, 0.0];
    let mu_p = [cos, sin, 0.0];
    let (kq, kp) = (q.kappa(), p.kappa());

    let (log_zq, zq) = log_partition(d, kq, mu_q)?;
    let (log_zp, zp) = log_partition(d, kp, mu_p)?;
    let shifted = log_zq - kq;
    let kl = sphere_integral(d, |x| {
        let a = dot3(&mu_q, x);
        let b = dot3(&mu_p, x);
        let density = (kq * (a - 1.0) - shifted).exp();
        density * ((kq * a - log_zq) - (kp * b - log_zp))
    })?;
    let abs_error_estimate = kl.abs_error_estimate
        + zq.abs_error_estimate / zq.value
        + zp.abs_error_estimate / zp.value;
    Ok(QuadratureResult {
        value: kl.value,
        abs_error_estimate,
        nodes_used: kl.nodes_used + zq.nodes_used + zp.nodes_used,
    })
}

/// Integral of the density over the sphere, reduced to the polar angle:
/// `∫_0^π exp(log c_d(κ) + κ cos θ) sin^{d-2} θ τ(d−1, 1) dθ`.
pub fn quad_normalization(dist: &VmfDistribution) -> Result<QuadratureResult> {
    let d = dist.dim();
    if !(2..=8).contains(&d) {
        return Err(Error::UnsupportedDimension(d));
    }
    let log_area = log_stiefel_area(d - 1, 1)?;
    let (log_norm, kappa) = (dist.log_norm(), dist.kappa());
    let power = d as f64 - 2.0;
    Ok(gauss_legendre(
        |theta: f64| {
            let mut v = log_norm + kappa * theta.cos() + log_area;
            if power > 0.0 {
                v += power * theta.sin().ln();
            }
            v.exp()
        },
        0.0,
        PI,
        PANELS,
        OUTER_TOL,
    ))
}

/// Summary of an oracle pass over audit rows.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Certification {
    pub kl_checked: usize,
    pub kl_max_abs_diff: f64,
    pub kl_failures: usize,
    pub normalizations_checked: usize,
    pub normalization_max_abs_dev: f64,
}

impl Certification {
    pub fn passed(&self) -> bool {
        self.kl_failures == 0 && self.normalization_max_abs_dev <= 1e-8
    }
}

/// Fills `quad` on every row with `d ≤ 3` and checks the normalization of
/// every distribution with `d ≤ 8`. Row flags are refreshed.
pub fn certify_rows(rows: &mut [AuditRow]) -> Result<Certification> {
    use rayon::prelude::*;

    let results: Vec<Result<(Option<f64>, Vec<f64>)>> = rows
        .par_iter()
        .map(|row| {
            let Some(report) = &row.report else {
                return Ok((None, Vec::new()));
            };
            let quad = if report.q.dim() <= 3 {
                Some(quad_kl(&report.q, &report.p)?.value)
            } else {
                None
            };
            let mut devs = Vec::new();
            if report.q.dim() <= 8 {
                for dist in [&report.q, &report.p] {
                    devs.push((quad_normalization(dist)?.value - 1.0).abs());
                }
            }
            Ok((quad, devs))
        })
        .collect();

    let mut cert = Certification::default();
    for (row, result) in rows.iter_mut().zip(results) {
        let (quad, devs) = result?;
        if let (Some(qv), Some(r)) = (quad, &row.report) {
            let diff = (qv - r.exact).abs();
            cert.kl_checked += 1;
            cert.kl_max_abs_diff = cert.kl_max_abs_diff.max(diff);
            if diff > CERTIFY_TOLERANCE {
                cert.kl_failures += 1;
            }
        }
        for dev in devs {
            cert.normalizations_checked += 1;
            cert.normalization_max_abs_dev = cert.normalization_max_abs_dev.max(dev);
        }
        row.quad = quad;
        row.refresh_flags();
    }
    Ok(cert)
}

//! Von Mises–Fisher distributions on the unit hypersphere and their KL
//! divergence.
//!
//! The crate is organised bottom-up:
//!
//! - [`special`]: log-domain special functions (`log Γ`, integer-order
//!   incomplete gamma, `log I_α`, exponential integrals).
//! - [`vmf`]: the distribution itself (normalizer, density, sampler).
//! - [`divergence`]: exact KL, the closed-form upper bound, the uniform-prior
//!   closed form, Monte Carlo estimates and grid audits.
//! - [`oracle`]: deterministic sphere quadrature used to certify the
//!   analytic paths.
//! - [`cli`]: the `vmf-kl` command-line front end.

// Negated comparisons are used deliberately so NaN fails validation, and the
// quadrature tables keep their published digits.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod cli;
pub mod divergence;
pub mod error;
pub mod logspace;
pub mod oracle;
pub mod quadrature;
pub mod special;
pub mod vmf;

pub use divergence::{
    audit_grid, kl_exact, kl_exact_to_uniform, kl_uniform_prior_closed_form, kl_upper_bound,
    mc_kl_estimate, AuditRow, GridSpec, KlReport, McEstimate, UpperBound,
};
pub use error::{Error, Result};
pub use oracle::{quad_kl, quad_normalization};
pub use quadrature::QuadratureResult;
pub use special::{
    audit_identity, exp_integral_e, log_bessel_i, log_gamma, upper_incomplete_gamma_int,
    BesselBranch, LogBesselResult,
};
pub use vmf::{
    log_norm_const, mean_resultant_length, stiefel_area, SampleBatch, UnitVector, VmfDistribution,
};

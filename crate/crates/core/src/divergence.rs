//! KL divergence between von Mises–Fisher distributions.
//!
//! Four quantities are computed side by side so they can be compared:
//!
//! - [`kl_exact`]: the closed form, using `E_q[x] = A_d(κ_q) μ_q`;
//! - [`kl_upper_bound`]: a published closed-form upper bound valid for odd
//!   `d` (even `d` is lifted by one null dimension);
//! - [`kl_uniform_prior_closed_form`]: the published uniform-prior value
//!   `κ_q − (d/2 − 1) log 2`;
//! - [`mc_kl_estimate`]: a Monte Carlo average of the log density ratio.
//!
//! Whether the bound actually bounds, and whether the uniform-prior value
//! matches [`kl_exact_to_uniform`], are outputs of [`audit_grid`], never
//! assumptions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vmf::{format_float, log_stiefel_area, UnitVector, VmfDistribution};

/// Tolerance for declaring the uniform-prior closed form consistent with the
/// exact value.
pub const COROLLARY_TOLERANCE: f64 = 1e-9;

/// Number of standard errors used when flagging Monte Carlo disagreement.
pub const MC_SIGMAS: f64 = 3.0;

fn same_dim(q: &VmfDistribution, p: &VmfDistribution) -> Result<usize> {
    if q.dim() != p.dim() {
        return Err(Error::DimensionMismatch(q.dim(), p.dim()));
    }
    Ok(q.dim())
}

/// `KL(q ‖ p) = log c_d(κ_q) − log c_d(κ_p) + (κ_q − κ_p μ_pᵀμ_q) A_d(κ_q)`.
pub fn kl_exact(q: &VmfDistribution, p: &VmfDistribution) -> Result<f64> {
    same_dim(q, p)?;
    let cos = p.mu().dot(q.mu())?;
    let a = q.mean_resultant_length()?;
    Ok(q.log_norm() - p.log_norm() + (q.kappa() - p.kappa() * cos) * a)
}

/// `KL(q ‖ uniform) = κ_q A_d(κ_q) + log c_d(κ_q) + log τ(d, 1)`.
pub fn kl_exact_to_uniform(q: &VmfDistribution) -> Result<f64> {
    let a = q.mean_resultant_length()?;
    Ok(q.kappa() * a + q.log_norm() + log_stiefel_area(q.dim(), 1)?)
}

/// The uniform-prior closed form `κ_q − (d/2 − 1) log 2`.
pub fn kl_uniform_prior_closed_form(q: &VmfDistribution) -> f64 {
    q.kappa() - q.half_dim_minus_one() * std::f64::consts::LN_2
}

/// Value of the closed-form upper bound and the dimension it was evaluated in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UpperBound {
    pub value: f64,
    pub dim: usize,
    pub padded: bool,
}

impl UpperBound {
    pub fn padded_dim(&self) -> Option<usize> {
        self.padded.then_some(self.dim)
    }
}

/// ```text
/// κ_q − κ_p μ_pᵀμ_q + d• log κ_q + Σ_{m=1}^{d⋄} κ_q^m/m!
///     − ((d² − 2d + 1)/4) log κ_p + d⋄(d⋄+1) log d⋄ − d⋄² + 1
/// ```
/// with `d⋄ = (d−3)/2`, `d• = (d−1)/2` and `0 log 0 = 0`. Even `d` is first
/// lifted to `d + 1`; appending a zero coordinate to both means leaves
/// `μ_pᵀμ_q` unchanged.
pub fn kl_upper_bound(q: &VmfDistribution, p: &VmfDistribution) -> Result<UpperBound> {
    let d = same_dim(q, p)?;
    let (kq, kp) = (q.kappa(), p.kappa());
    if !(kq > 0.0) || !(kp > 0.0) {
        return Err(Error::domain(format!(
            "upper bound needs kappa_q > 0 and kappa_p > 0, got {kq} and {kp}"
        )));
    }
    let cos = p.mu().dot(q.mu())?;
    let (dim, padded) = if d % 2 == 0 { (d + 1, true) } else { (d, false) };
    let df = dim as f64;
    let dd = (dim - 3) / 2;
    let ddf = dd as f64;
    let db = 0.5 * (df - 1.0);

    let mut series = 0.0;
    let mut term = 1.0;
    for m in 1..=dd {
        term *= kq / m as f64;
        series += term;
    }
    let dd_log_dd = if dd == 0 { 0.0 } else { ddf * (ddf + 1.0) * ddf.ln() };
    let value = kq - kp * cos + db * kq.ln() + series
        - ((df * df - 2.0 * df + 1.0) / 4.0) * kp.ln()
        + dd_log_dd
        - ddf * ddf
        + 1.0;
    Ok(UpperBound { value, dim, padded })
}

/// Monte Carlo mean of `log q(x) − log p(x)` over draws from `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub n: usize,
}

pub fn mc_kl_estimate(
    q: &VmfDistribution,
    p: &VmfDistribution,
    n: usize,
    seed: u64,
) -> Result<McEstimate> {
    same_dim(q, p)?;
    if n < 2 {
        return Err(Error::domain("Monte Carlo estimate needs n >= 2"));
    }
    // Welford
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, x) in q.sampler(seed)?.take(n).enumerate() {
        let x = x?;
        let v = q.log_pdf(&x)? - p.log_pdf(&x)?;
        let delta = v - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (v - mean);
    }
    let var = m2 / (n - 1) as f64;
    Ok(McEstimate {
        estimate: mean,
        stderr: (var / n as f64).sqrt(),
        n,
    })
}

/// Every KL quantity for one `(q, p)` pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KlReport {
    pub exact: f64,
    pub bound: Option<f64>,
    pub corollary: Option<f64>,
    pub mc_estimate: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub q: VmfDistribution,
    pub p: VmfDistribution,
    pub padded_dim: Option<usize>,
}

impl KlReport {
    /// Builds a report; the Monte Carlo fields are filled when `mc` is
    /// `Some((n, seed))`.
    pub fn new(q: &VmfDistribution, p: &VmfDistribution, mc: Option<(usize, u64)>) -> Result<Self> {
        let exact = kl_exact(q, p)?;
        let bound = if q.kappa() > 0.0 && p.kappa() > 0.0 {
            Some(kl_upper_bound(q, p)?)
        } else {
            None
        };
        let corollary = p.is_uniform().then(|| kl_uniform_prior_closed_form(q));
        let mc = match mc {
            Some((n, seed)) => Some(mc_kl_estimate(q, p, n, seed)?),
            None => None,
        };
        Ok(KlReport {
            exact,
            bound: bound.map(|b| b.value),
            corollary,
            mc_estimate: mc.map(|m| m.estimate),
            mc_stderr: mc.map(|m| m.stderr),
            q: q.clone(),
            p: p.clone(),
            padded_dim: bound.and_then(|b| b.padded_dim()),
        })
    }

    pub fn cos_theta(&self) -> f64 {
        self.p.mu().dot(self.q.mu()).unwrap_or(f64::NAN)
    }
}

/// Grid of audit points; also the on-disk grid-spec format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dims: Vec<usize>,
    pub kappas_q: Vec<f64>,
    pub kappas_p: Vec<f64>,
    pub cosines: Vec<f64>,
    #[serde(default)]
    pub n_mc: usize,
    #[serde(default)]
    pub seed: u64,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty()
            || self.kappas_q.is_empty()
            || self.kappas_p.is_empty()
            || self.cosines.is_empty()
        {
            return Err(Error::domain("every grid axis must be nonempty"));
        }
        if let Some(c) = self.cosines.iter().find(|c| !(c.abs() <= 1.0)) {
            return Err(Error::domain(format!("cosine {c} outside [-1, 1]")));
        }
        if self.n_mc == 1 {
            return Err(Error::domain("n_mc must be 0 (disabled) or >= 2"));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for &d in &self.dims {
            for &kappa_q in &self.kappas_q {
                for &kappa_p in &self.kappas_p {
                    for &cos_theta in &self.cosines {
                        out.push(GridPoint {
                            d,
                            kappa_q,
                            kappa_p,
                            cos_theta,
                        });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    pub d: usize,
    pub kappa_q: f64,
    pub kappa_p: f64,
    pub cos_theta: f64,
}

impl GridPoint {
    /// `μ_q = e₁`, `μ_p = cos θ e₁ + sin θ e₂`.
    pub fn distributions(&self) -> Result<(VmfDistribution, VmfDistribution)> {
        if self.d < 2 {
            return Err(Error::domain(format!("dimension must be >= 2, got {}", self.d)));
        }
        if !(self.cos_theta.abs() <= 1.0) {
            return Err(Error::domain(format!("cosine {} outside [-1, 1]", self.cos_theta)));
        }
        let mu_q = UnitVector::basis(self.d, 0)?;
        let mut p = vec![0.0; self.d];
        p[0] = self.cos_theta;
        p[1] = (1.0 - self.cos_theta * self.cos_theta).sqrt();
        let mu_p = UnitVector::new(p)?;
        Ok((
            VmfDistribution::new(mu_q, self.kappa_q)?,
            VmfDistribution::new(mu_p, self.kappa_p)?,
        ))
    }
}

/// Row flags.
pub mod flags {
    pub const BOUND_BELOW_EXACT: &str = "bound_below_exact";
    pub const COROLLARY_DEVIATES: &str = "corollary_deviates";
    pub const MC_DISAGREES: &str = "mc_disagrees";
    pub const ORACLE_MISMATCH: &str = "oracle_mismatch";
    pub const ERROR: &str = "error";
}

/// One audited grid point. Failures are recorded in `error`, not raised.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditRow {
    pub point: GridPoint,
    pub report: Option<KlReport>,
    /// `kl_exact_to_uniform(q)` when `κ_p = 0`.
    pub exact_to_uniform: Option<f64>,
    /// Deterministic quadrature of the KL integral, when certified.
    pub quad: Option<f64>,
    pub flags: Vec<String>,
    pub error: Option<String>,
}

impl AuditRow {
    pub fn evaluate(point: GridPoint, n_mc: usize, mc_seed: u64) -> AuditRow {
        let mut row = AuditRow {
            point,
            report: None,
            exact_to_uniform: None,
            quad: None,
            flags: Vec::new(),
            error: None,
        };
        let outcome = (|| -> Result<(KlReport, Option<f64>)> {
            let (q, p) = point.distributions()?;
            let mc = (n_mc >= 2).then_some((n_mc, mc_seed));
            let report = KlReport::new(&q, &p, mc)?;
            let uniform = if p.is_uniform() {
                Some(kl_exact_to_uniform(&q)?)
            } else {
                None
            };
            Ok((report, uniform))
        })();
        match outcome {
            Ok((report, uniform)) => {
                row.report = Some(report);
                row.exact_to_uniform = uniform;
                row.refresh_flags();
            }
            Err(e) => {
                row.error = Some(e.to_string());
                row.flags.push(flags::ERROR.to_string());
            }
        }
        row
    }

    /// Wraps a single report, e.g. for the `kl` subcommand.
    pub fn from_report(report: KlReport) -> Result<AuditRow> {
        let point = GridPoint {
            d: report.q.dim(),
            kappa_q: report.q.kappa(),
            kappa_p: report.p.kappa(),
            cos_theta: report.cos_theta(),
        };
        let exact_to_uniform = if report.p.is_uniform() {
            Some(kl_exact_to_uniform(&report.q)?)
        } else {
            None
        };
        let mut row = AuditRow {
            point,
            report: Some(report),
            exact_to_uniform,
            quad: None,
            flags: Vec::new(),
            error: None,
        };
        row.refresh_flags();
        Ok(row)
    }

    /// Recomputes flags from the current fields.
    pub fn refresh_flags(&mut self) {
        let mut out = Vec::new();
        if let Some(r) = &self.report {
            let stderr = r.mc_stderr.unwrap_or(0.0);
            if let Some(b) = r.bound {
                if b < r.exact - MC_SIGMAS * stderr {
                    out.push(flags::BOUND_BELOW_EXACT);
                }
            }
            if let (Some(c), Some(u)) = (r.corollary, self.exact_to_uniform) {
                if (c - u).abs() > COROLLARY_TOLERANCE {
                    out.push(flags::COROLLARY_DEVIATES);
                }
            }
            if let Some(m) = r.mc_estimate {
                if (m - r.exact).abs() > MC_SIGMAS * stderr + 1e-12 {
                    out.push(flags::MC_DISAGREES);
                }
            }
            if let Some(qv) = self.quad {
                if (qv - r.exact).abs() > crate::oracle::CERTIFY_TOLERANCE {
                    out.push(flags::ORACLE_MISMATCH);
                }
            }
        }
        if self.error.is_some() {
            out.push(flags::ERROR);
        }
        self.flags = out.into_iter().map(String::from).collect();
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }

    /// `corollary − kl_exact_to_uniform`, when both exist.
    pub fn corollary_deviation(&self) -> Option<f64> {
        let c = self.report.as_ref()?.corollary?;
        Some(c - self.exact_to_uniform?)
    }
}

/// Per-row Monte Carlo seed: `seed XOR row_index`.
pub fn row_seed(seed: u64, row_index: usize) -> u64 {
    seed ^ row_index as u64
}

/// Evaluates every grid point. Rows are independent and computed in
/// parallel; each row's seed depends only on its index, so the output does
/// not depend on scheduling.
pub fn audit_grid(spec: &GridSpec) -> Result<Vec<AuditRow>> {
    spec.validate()?;
    let points = spec.points();
    Ok(points
        .into_par_iter()
        .enumerate()
        .map(|(i, pt)| AuditRow::evaluate(pt, spec.n_mc, row_seed(spec.seed, i)))
        .collect())
}

/// Column names of the tabular report.
pub const CSV_COLUMNS: [&str; 11] = [
    "d",
    "kappa_q",
    "kappa_p",
    "cos_theta",
    "exact",
    "bound",
    "corollary",
    "mc",
    "mc_stderr",
    "padded_dim",
    "flags",
];

fn opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

/// CSV rendering. A trailing `quad` column is added when any row carries a
/// certification value.
pub fn rows_to_csv(rows: &[AuditRow]) -> String {
    let with_quad = rows.iter().any(|r| r.quad.is_some());
    let mut out = CSV_COLUMNS.join(",");
    if with_quad {
        out.push_str(",quad");
    }
    out.push('\n');
    for row in rows {
        let r = row.report.as_ref();
        let mut fields = vec![
            row.point.d.to_string(),
            format_float(row.point.kappa_q),
            format_float(row.point.kappa_p),
            format_float(row.point.cos_theta),
            opt(r.map(|r| r.exact)),
            opt(r.and_then(|r| r.bound)),
            opt(r.and_then(|r| r.corollary)),
            opt(r.and_then(|r| r.mc_estimate)),
            opt(r.and_then(|r| r.mc_stderr)),
            r.and_then(|r| r.padded_dim).map(|d| d.to_string()).unwrap_or_default(),
            row.flags.join(";"),
        ];
        if with_quad {
            fields.push(opt(row.quad));
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct RowJson<'a> {
    d: usize,
    kappa_q: f64,
    kappa_p: f64,
    cos_theta: f64,
    exact: Option<f64>,
    bound: Option<f64>,
    corollary: Option<f64>,
    exact_to_uniform: Option<f64>,
    mc: Option<f64>,
    mc_stderr: Option<f64>,
    padded_dim: Option<usize>,
    quad: Option<f64>,
    flags: &'a [String],
    error: Option<&'a str>,
}

fn row_json(row: &AuditRow) -> RowJson<'_> {
    let r = row.report.as_ref();
    RowJson {
        d: row.point.d,
        kappa_q: row.point.kappa_q,
        kappa_p: row.point.kappa_p,
        cos_theta: row.point.cos_theta,
        exact: r.map(|r| r.exact),
        bound: r.and_then(|r| r.bound),
        corollary: r.and_then(|r| r.corollary),
        exact_to_uniform: row.exact_to_uniform,
        mc: r.and_then(|r| r.mc_estimate),
        mc_stderr: r.and_then(|r| r.mc_stderr),
        padded_dim: r.and_then(|r| r.padded_dim),
        quad: row.quad,
        flags: &row.flags,
        error: row.error.as_deref(),
    }
}

/// One row as a JSON object with the CSV fields plus `exact_to_uniform`,
/// `quad` and `error`.
pub fn row_to_json_value(row: &AuditRow) -> serde_json::Value {
    serde_json::to_value(row_json(row)).expect("row serializes")
}

pub fn rows_to_json(rows: &[AuditRow]) -> String {
    let items: Vec<RowJson<'_>> = rows.iter().map(row_json).collect();
    serde_json::to_string_pretty(&items).expect("rows serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(d: usize, kq: f64, kp: f64, cos: f64) -> (VmfDistribution, VmfDistribution) {
        GridPoint {
            d,
            kappa_q: kq,
            kappa_p: kp,
            cos_theta: cos,
        }
        .distributions()
        .unwrap()
    }

    fn coth(x: f64) -> f64 {
        1.0 / x.tanh()
    }

    #[test]
    fn kl_of_self_is_zero() {
        for d in 2..=9 {
            let (q, _) = pair(d, 3.5, 1.0, 1.0);
            assert_eq!(kl_exact(&q, &q).unwrap(), 0.0);
            let m = mc_kl_estimate(&q, &q, 100, 1).unwrap();
            assert_eq!((m.estimate, m.stderr), (0.0, 0.0));
        }
    }

    #[test]
    fn kl_exact_d3_closed_forms() {
        let (q, p) = pair(3, 2.0, 0.0, 1.0);
        let want = (coth(2.0) - 0.5) * 2.0
            + crate::vmf::log_norm_const(3, 2.0).unwrap()
            + (4.0 * std::f64::consts::PI).ln();
        assert!((kl_exact(&q, &p).unwrap() - want).abs() < 1e-12);

        let (q, p) = pair(3, 5.0, 5.0, -1.0);
        let want = 10.0 * (coth(5.0) - 0.2);
        assert!((kl_exact(&q, &p).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let (q, _) = pair(3, 1.0, 1.0, 1.0);
        let (p, _) = pair(4, 1.0, 1.0, 1.0);
        assert_eq!(kl_exact(&q, &p).unwrap_err(), Error::DimensionMismatch(3, 4));
        assert!(kl_upper_bound(&q, &p).is_err());
        assert!(mc_kl_estimate(&q, &p, 10, 0).is_err());
    }

    #[test]
    fn upper_bound_examples() {
        let (q, p) = pair(3, 1.0, 1.0, 1.0);
        let b = kl_upper_bound(&q, &p).unwrap();
        assert_eq!((b.value, b.dim, b.padded), (1.0, 3, false));

        let e = std::f64::consts::E;
        let (q, p) = pair(3, e, e, 1.0);
        // 0 + 1·log e + 0 − 1·log e + 0 − 0 + 1
        assert!((kl_upper_bound(&q, &p).unwrap().value - 1.0).abs() < 1e-15);

        let (q, p) = pair(5, 1.0, 1.0, 1.0);
        assert!((kl_upper_bound(&q, &p).unwrap().value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn upper_bound_pads_even_dimensions() {
        let (q, p) = pair(4, 2.0, 3.0, 0.3);
        let b = kl_upper_bound(&q, &p).unwrap();
        assert_eq!(b.padded_dim(), Some(5));
        let b5 = kl_upper_bound(&q.padded().unwrap(), &p.padded().unwrap()).unwrap();
        assert_eq!(b.value, b5.value);
        assert_eq!(b5.padded_dim(), None);
    }

    #[test]
    fn upper_bound_rejects_zero_concentration() {
        let (q, p) = pair(3, 1.0, 0.0, 1.0);
        assert!(kl_upper_bound(&q, &p).is_err());
        assert!(kl_upper_bound(&p, &q).is_err());
    }

    #[test]
    fn corollary_examples() {
        let (q, _) = pair(2, 0.0, 0.0, 1.0);
        assert_eq!(kl_uniform_prior_closed_form(&q), 0.0);
        let (q, _) = pair(3, 1.0, 0.0, 1.0);
        assert_eq!(kl_uniform_prior_closed_form(&q), 1.0 - 0.5 * 2f64.ln());
        let (q, _) = pair(4, 2.5, 0.0, 1.0);
        assert_eq!(kl_uniform_prior_closed_form(&q), 2.5 - 2f64.ln());
    }

    #[test]
    fn exact_to_uniform_examples() {
        let (q, p) = pair(6, 0.0, 0.0, 1.0);
        assert!(kl_exact_to_uniform(&q).unwrap().abs() < 1e-14);
        assert!(kl_exact(&q, &p).unwrap().abs() < 1e-14);
        // c_3(κ) = κ / (4π sinh κ)
        let (q, _) = pair(3, 1.0, 0.0, 1.0);
        let want = coth(1.0) - 1.0 + (1.0 / 1f64.sinh()).ln();
        assert!((kl_exact_to_uniform(&q).unwrap() - want).abs() < 1e-13);
    }

    #[test]
    fn report_fields_follow_parameters() {
        let (q, p) = pair(3, 1.0, 1.0, 1.0);
        let r = KlReport::new(&q, &p, None).unwrap();
        assert_eq!(r.bound, Some(1.0));
        assert_eq!(r.corollary, None);
        assert_eq!((r.mc_estimate, r.mc_stderr), (None, None));

        let (q, p) = pair(4, 1.0, 0.0, 0.0);
        let r = KlReport::new(&q, &p, Some((100, 3))).unwrap();
        assert_eq!(r.bound, None);
        assert!(r.corollary.is_some());
        assert!(r.mc_estimate.is_some() && r.mc_stderr.is_some());
        assert_eq!(r.padded_dim, None);
    }

    #[test]
    fn grid_rows_capture_errors() {
        let spec = GridSpec {
            dims: vec![3],
            kappas_q: vec![1.0, -1.0],
            kappas_p: vec![1.0],
            cosines: vec![1.0],
            n_mc: 0,
            seed: 0,
        };
        let rows = audit_grid(&spec).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].error.is_none());
        assert_eq!(rows[0].report.as_ref().unwrap().bound, Some(1.0));
        assert!(rows[1].error.is_some());
        assert!(rows[1].has_flag(flags::ERROR));
    }

    #[test]
    fn grid_validation() {
        let mut spec = GridSpec {
            dims: vec![3],
            kappas_q: vec![1.0],
            kappas_p: vec![1.0],
            cosines: vec![1.5],
            n_mc: 0,
            seed: 0,
        };
        assert!(audit_grid(&spec).is_err());
        spec.cosines = vec![];
        assert!(audit_grid(&spec).is_err());
    }

    #[test]
    fn csv_has_fixed_columns() {
        let spec = GridSpec {
            dims: vec![4],
            kappas_q: vec![2.0],
            kappas_p: vec![0.0, 1.0],
            cosines: vec![0.5],
            n_mc: 50,
            seed: 7,
        };
        let rows = audit_grid(&spec).unwrap();
        let csv = rows_to_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
        for line in lines {
            assert_eq!(line.split(',').count(), CSV_COLUMNS.len());
        }
        let json: serde_json::Value = serde_json::from_str(&rows_to_json(&rows)).unwrap();
        assert_eq!(json.as_array().unwrap().len(), 2);
        assert_eq!(json[1]["padded_dim"], 5);
    }
}

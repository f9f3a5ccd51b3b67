//! The von Mises–Fisher distribution on the unit sphere `S^{d-1}`.
//!
//! ```text
//! f(x; μ, κ) = c_d(κ) exp(κ μᵀx)
//! c_d(κ)     = κ^{d/2-1} / ((2π)^{d/2} I_{d/2-1}(κ))
//! ```
//!
//! `κ = 0` is the uniform distribution, whose density is one over the area
//! of the sphere.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{log_bessel_i, log_gamma};

/// Norms below this are rejected rather than normalized.
const MIN_NORM: f64 = 1e-12;

/// Proposals allowed for a single rejection-sampled cosine.
pub const MAX_PROPOSALS: u64 = 10_000_000;

/// A point on the unit sphere in `R^d`, `d ≥ 2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Normalizes `coords`. Fails for `d < 2`, non-finite input, or a
    /// (near-)zero vector.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::domain(format!(
                "unit vectors need dimension >= 2, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("unit vector has non-finite coordinates"));
        }
        let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm < MIN_NORM {
            return Err(Error::domain(format!("cannot normalize vector of norm {norm:e}")));
        }
        if (norm - 1.0).abs() <= 4.0 * f64::EPSILON {
            // Already unit length; keep the bits so serialized points round-trip.
            return Ok(UnitVector(coords));
        }
        Ok(UnitVector(coords.into_iter().map(|c| c / norm).collect()))
    }

    /// The `i`-th standard basis vector of `R^d`.
    pub fn basis(dim: usize, i: usize) -> Result<Self> {
        if i >= dim {
            return Err(Error::domain(format!("basis index {i} out of range for d = {dim}")));
        }
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        UnitVector::new(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, other: &UnitVector) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum())
    }

    /// Appends a zero coordinate, embedding `S^{d-1}` into `S^d`.
    pub fn pad(&self) -> UnitVector {
        let mut v = self.0.clone();
        v.push(0.0);
        UnitVector(v)
    }

    /// Householder reflection `H` with `H e₁ = self`, applied to `x`.
    pub fn reflect_from_e1(&self, x: &[f64]) -> Vec<f64> {
        let mut u = self.0.iter().map(|m| -m).collect::<Vec<_>>();
        u[0] += 1.0;
        let uu: f64 = u.iter().map(|c| c * c).sum();
        if uu < 1e-300 {
            return x.to_vec();
        }
        let ux: f64 = u.iter().zip(x).map(|(a, b)| a * b).sum();
        let scale = 2.0 * ux / uu;
        x.iter().zip(&u).map(|(xi, ui)| xi - scale * ui).collect()
    }
}

impl<'de> Deserialize<'de> for UnitVector {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let coords = Vec::<f64>::deserialize(de)?;
        UnitVector::new(coords).map_err(serde::de::Error::custom)
    }
}

/// `log c_d(κ)`; at `κ = 0` this is minus the log area of `S^{d-1}`.
pub fn log_norm_const(d: usize, kappa: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::domain(format!("dimension must be >= 2, got {d}")));
    }
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(Error::domain(format!("kappa must be finite and >= 0, got {kappa}")));
    }
    let df = d as f64;
    if kappa == 0.0 {
        return Ok(log_gamma(0.5 * df)? - 2f64.ln() - 0.5 * df * PI.ln());
    }
    let order = 0.5 * df - 1.0;
    let log_i = log_bessel_i(order, kappa)?.value;
    Ok(order * kappa.ln() - 0.5 * df * (2.0 * PI).ln() - log_i)
}

/// Mean resultant length `A_d(κ) = I_{d/2}(κ) / I_{d/2-1}(κ)`, the norm of
/// `E[x]`.
pub fn mean_resultant_length(d: usize, kappa: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::domain(format!("dimension must be >= 2, got {d}")));
    }
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(Error::domain(format!("kappa must be finite and >= 0, got {kappa}")));
    }
    if kappa == 0.0 {
        return Ok(0.0);
    }
    let order = 0.5 * d as f64 - 1.0;
    let num = log_bessel_i(order + 1.0, kappa)?.value;
    let den = log_bessel_i(order, kappa)?.value;
    Ok((num - den).exp())
}

/// `log τ(d, r)`, the log area of the Stiefel manifold of orthonormal
/// `r`-frames in `R^d`.
pub fn log_stiefel_area(d: usize, r: usize) -> Result<f64> {
    if r < 1 || r > d {
        return Err(Error::domain(format!("stiefel area requires 1 <= r <= d, got d={d}, r={r}")));
    }
    let (df, rf) = (d as f64, r as f64);
    let mut log_gammas = 0.0;
    for j in 1..=r {
        log_gammas += log_gamma((df - j as f64 + 1.0) / 2.0)?;
    }
    Ok(rf * 2f64.ln() + 0.5 * df * rf * PI.ln() - 0.25 * rf * (rf - 1.0) * PI.ln() - log_gammas)
}

/// `τ(d, r)`; `τ(d, 1)` is the surface area of `S^{d-1}`.
pub fn stiefel_area(d: usize, r: usize) -> Result<f64> {
    log_stiefel_area(d, r).map(f64::exp)
}

/// A von Mises–Fisher distribution with cached log normalizer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VmfDistribution {
    mu: UnitVector,
    kappa: f64,
    #[serde(skip)]
    log_norm: f64,
}

impl VmfDistribution {
    pub fn new(mu: UnitVector, kappa: f64) -> Result<Self> {
        let log_norm = log_norm_const(mu.dim(), kappa)?;
        Ok(VmfDistribution {
            mu,
            kappa,
            log_norm,
        })
    }

    /// The uniform distribution on `S^{d-1}`, with mean direction `e₁`.
    pub fn uniform(dim: usize) -> Result<Self> {
        VmfDistribution::new(UnitVector::basis(dim, 0)?, 0.0)
    }

    pub fn mu(&self) -> &UnitVector {
        &self.mu
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn dim(&self) -> usize {
        self.mu.dim()
    }

    pub fn log_norm(&self) -> f64 {
        self.log_norm
    }

    /// `d/2 - 1`, the Bessel order in the normalizer.
    pub fn half_dim_minus_one(&self) -> f64 {
        0.5 * self.dim() as f64 - 1.0
    }

    /// `(d - 3)/2`, the exponent of `(1 - w²)` in the cosine density.
    pub fn cosine_exponent(&self) -> f64 {
        0.5 * (self.dim() as f64 - 3.0)
    }

    /// `(d - 1)/2`.
    pub fn half_dim_minus_half(&self) -> f64 {
        0.5 * (self.dim() as f64 - 1.0)
    }

    pub fn is_uniform(&self) -> bool {
        self.kappa == 0.0
    }

    pub fn log_pdf(&self, x: &UnitVector) -> Result<f64> {
        Ok(self.log_norm + self.kappa * self.mu.dot(x)?)
    }

    /// Same distribution lifted to `d + 1` by appending a zero coordinate to `μ`.
    pub fn padded(&self) -> Result<Self> {
        VmfDistribution::new(self.mu.pad(), self.kappa)
    }

    pub fn mean_resultant_length(&self) -> Result<f64> {
        mean_resultant_length(self.dim(), self.kappa)
    }

    /// `n` independent draws, deterministic in `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<SampleBatch> {
        if n < 1 {
            return Err(Error::domain("sample size must be >= 1"));
        }
        let points = self.sampler(seed)?.take(n).collect::<Result<Vec<_>>>()?;
        Ok(SampleBatch {
            points,
            seed,
            params: self.clone(),
        })
    }

    /// Endless stream of draws from the generator seeded with `seed`; the
    /// first `n` items equal `sample(n, seed).points`.
    pub fn sampler(&self, seed: u64) -> Result<VmfSampler<'_>> {
        Ok(VmfSampler {
            dist: self,
            cosine: CosineSampler::new(self.dim(), self.kappa)?,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// Parallel sampling over chunks of `chunk_size` draws. Chunk `i` uses the
    /// stream seeded with `seed ^ i`, so the result equals
    /// [`VmfDistribution::sample_chunked`] regardless of thread count.
    pub fn sample_par(&self, n: usize, seed: u64, chunk_size: usize) -> Result<SampleBatch> {
        self.chunked(n, seed, chunk_size, true)
    }

    /// Serial counterpart of [`VmfDistribution::sample_par`].
    pub fn sample_chunked(&self, n: usize, seed: u64, chunk_size: usize) -> Result<SampleBatch> {
        self.chunked(n, seed, chunk_size, false)
    }

    fn chunked(&self, n: usize, seed: u64, chunk_size: usize, parallel: bool) -> Result<SampleBatch> {
        if n < 1 || chunk_size < 1 {
            return Err(Error::domain("sample size and chunk size must be >= 1"));
        }
        let sampler = CosineSampler::new(self.dim(), self.kappa)?;
        let chunks = n.div_ceil(chunk_size);
        let run_chunk = |i: usize| -> Result<Vec<UnitVector>> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ i as u64);
            let len = chunk_size.min(n - i * chunk_size);
            (0..len).map(|_| self.draw(&sampler, &mut rng)).collect()
        };
        let parts: Vec<Vec<UnitVector>> = if parallel {
            (0..chunks).into_par_iter().map(run_chunk).collect::<Result<_>>()?
        } else {
            (0..chunks).map(run_chunk).collect::<Result<_>>()?
        };
        Ok(SampleBatch {
            points: parts.into_iter().flatten().collect(),
            seed,
            params: self.clone(),
        })
    }

    /// Tangent-normal construction: `x = w e₁ + √(1-w²) v` in the `e₁` frame,
    /// then reflected onto `μ`.
    fn draw<R: Rng>(&self, sampler: &CosineSampler, rng: &mut R) -> Result<UnitVector> {
        let d = self.dim();
        let w = sampler.draw(rng)?;
        let tangent = loop {
            let v: Vec<f64> = (0..d - 1).map(|_| rng.sample(StandardNormal)).collect();
            let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm > MIN_NORM {
                break v.into_iter().map(|c| c / norm).collect::<Vec<_>>();
            }
        };
        let radial = ((1.0 - w) * (1.0 + w)).max(0.0).sqrt();
        let mut local = Vec::with_capacity(d);
        local.push(w);
        local.extend(tangent.iter().map(|t| radial * t));
        UnitVector::new(self.mu.reflect_from_e1(&local))
    }
}

/// Iterator over draws from a [`VmfDistribution`].
pub struct VmfSampler<'a> {
    dist: &'a VmfDistribution,
    cosine: CosineSampler,
    rng: ChaCha8Rng,
}

impl Iterator for VmfSampler<'_> {
    type Item = Result<UnitVector>;

    fn next(&mut self) -> Option<Self::Item> {
        Some(self.dist.draw(&self.cosine, &mut self.rng))
    }
}

/// Rejection sampler for the cosine `w = μᵀx`, whose density is proportional
/// to `(1-w²)^{(d-3)/2} e^{κw}` on `[-1, 1]` (Wood's envelope).
#[derive(Debug, Clone)]
struct CosineSampler {
    kappa: f64,
    b: f64,
    x0: f64,
    c: f64,
    dm1: f64,
    beta: Beta<f64>,
}

impl CosineSampler {
    fn new(d: usize, kappa: f64) -> Result<Self> {
        let dm1 = d as f64 - 1.0;
        let b = dm1 / (2.0 * kappa + (4.0 * kappa * kappa + dm1 * dm1).sqrt());
        let x0 = (1.0 - b) / (1.0 + b);
        let c = kappa * x0 + dm1 * ((1.0 - x0) * (1.0 + x0)).ln();
        let beta = Beta::new(0.5 * dm1, 0.5 * dm1)
            .map_err(|e| Error::domain(format!("beta proposal: {e}")))?;
        Ok(CosineSampler {
            kappa,
            b,
            x0,
            c,
            dm1,
            beta,
        })
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> Result<f64> {
        for _ in 0..MAX_PROPOSALS {
            let z: f64 = self.beta.sample(rng);
            let w = (1.0 - (1.0 + self.b) * z) / (1.0 - (1.0 - self.b) * z);
            let u: f64 = rng.random();
            if self.kappa * w + self.dm1 * (1.0 - self.x0 * w).ln() - self.c >= u.ln() {
                return Ok(w.clamp(-1.0, 1.0));
            }
        }
        Err(Error::SamplerStall(MAX_PROPOSALS))
    }
}

/// Draws from a [`VmfDistribution`] plus what is needed to regenerate them.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub points: Vec<UnitVector>,
    pub seed: u64,
    pub params: VmfDistribution,
}

#[derive(Serialize, Deserialize)]
struct SampleBatchJson {
    seed: u64,
    kappa: f64,
    mu: Vec<f64>,
    points: Vec<Vec<f64>>,
}

impl SampleBatch {
    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn dim(&self) -> usize {
        self.params.dim()
    }

    /// Componentwise sample mean.
    pub fn mean_vector(&self) -> Vec<f64> {
        mean_vector(self.points.iter().map(|p| p.coords()), self.dim())
    }

    /// Norm of the sample mean vector.
    pub fn mean_resultant_length(&self) -> f64 {
        self.mean_vector().iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// CSV with header `x1..xd`, one row per point.
    pub fn to_csv(&self) -> String {
        let d = self.dim();
        let mut out = (1..=d).map(|i| format!("x{i}")).collect::<Vec<_>>().join(",");
        out.push('\n');
        for p in &self.points {
            out.push_str(&join_floats(p.coords()));
            out.push('\n');
        }
        out
    }

    /// Parses [`SampleBatch::to_csv`] output. The CSV carries no parameters,
    /// so they are supplied by the caller.
    pub fn from_csv(text: &str, params: VmfDistribution, seed: u64) -> Result<Self> {
        let points = parse_csv_points(text, params.dim())?;
        Ok(SampleBatch {
            points,
            seed,
            params,
        })
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(SampleBatchJson {
            seed: self.seed,
            kappa: self.params.kappa(),
            mu: self.params.mu().coords().to_vec(),
            points: self.points.iter().map(|p| p.coords().to_vec()).collect(),
        })
        .expect("sample batch serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("sample batch serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: SampleBatchJson = serde_json::from_str(text)
            .map_err(|e| Error::domain(format!("invalid sample batch json: {e}")))?;
        Self::from_json_parts(raw)
    }

    pub fn from_json_value(value: serde_json::Value) -> Result<Self> {
        let raw: SampleBatchJson = serde_json::from_value(value)
            .map_err(|e| Error::domain(format!("invalid sample batch json: {e}")))?;
        Self::from_json_parts(raw)
    }

    fn from_json_parts(raw: SampleBatchJson) -> Result<Self> {
        let params = VmfDistribution::new(UnitVector::new(raw.mu)?, raw.kappa)?;
        let points = raw
            .points
            .into_iter()
            .map(|p| {
                if p.len() != params.dim() {
                    return Err(Error::DimensionMismatch(p.len(), params.dim()));
                }
                UnitVector::new(p)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SampleBatch {
            points,
            seed: raw.seed,
            params,
        })
    }
}

pub(crate) fn mean_vector<'a, I: Iterator<Item = &'a [f64]>>(points: I, d: usize) -> Vec<f64> {
    let mut sum = vec![0.0; d];
    let mut n = 0usize;
    for p in points {
        for (s, c) in sum.iter_mut().zip(p) {
            *s += c;
        }
        n += 1;
    }
    sum.into_iter().map(|s| s / n.max(1) as f64).collect()
}

/// Shortest text that parses back to the same `f64`, always with a decimal
/// point or exponent (`1.0`, `0.25`, `1e-300`).
pub fn format_float(x: f64) -> String {
    format!("{x:?}")
}

pub(crate) fn join_floats(xs: &[f64]) -> String {
    xs.iter().map(|&c| format_float(c)).collect::<Vec<_>>().join(",")
}

fn parse_csv_points(text: &str, d: usize) -> Result<Vec<UnitVector>> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header.split(',').count() != d {
        return Err(Error::DimensionMismatch(header.split(',').count(), d));
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let coords = line
                .split(',')
                .map(|f| {
                    f.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::domain(format!("bad csv field {f:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if coords.len() != d {
                return Err(Error::DimensionMismatch(coords.len(), d));
            }
            UnitVector::new(coords)
        })
        .collect()
}

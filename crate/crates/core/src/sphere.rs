//! Geometry of the complex sphere `Ω_d`: surface measure, the identification
//! with `S^{2d-1} ⊂ R^{2d}`, reproducible uniform sampling and Monte Carlo
//! `L^p` norms.
//!
//! The surface measure is not normalized: `σ_d(Ω_d) = ω_d`, and every norm
//! estimate carries the factor `ω_d` explicitly.
//!
//! Sampling is split into fixed-size chunks. Chunk `i` draws from a ChaCha
//! stream keyed by `(seed, i)`, so the output depends only on
//! `(seed, count, chunk)` and never on the number of worker threads.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};

pub const DEFAULT_CHUNK: usize = 4096;
pub const UNIT_TOL: f64 = 1e-12;

/// `ω_d`, the surface area of `S^{2d-1}`: `2 π^d / (d-1)!`.
pub fn omega_d(d: u32) -> Result<f64> {
    if d < 1 {
        return Err(invalid("omega_d needs d >= 1"));
    }
    let fact: f64 = (1..d).map(f64::from).product();
    Ok(2.0 * std::f64::consts::PI.powi(d as i32) / fact)
}

/// A point of `Ω_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    coords: Vec<Complex64>,
}

impl SpherePoint {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(invalid("sphere point needs at least one coordinate"));
        }
        let n: f64 = coords.iter().map(|c| c.norm_sqr()).sum();
        if !((n - 1.0).abs() <= UNIT_TOL) {
            return Err(invalid(format!("point is not on the unit sphere: <z,z> = {n}")));
        }
        Ok(Self { coords })
    }

    /// Normalizes a nonzero vector onto the sphere.
    pub fn normalized(coords: Vec<Complex64>) -> Result<Self> {
        let n: f64 = coords.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(invalid("cannot normalize a zero or non-finite vector"));
        }
        Ok(Self { coords: coords.into_iter().map(|c| c / n).collect() })
    }

    /// The pole `e_d = (0, ..., 0, 1)`.
    pub fn north(d: u32) -> Self {
        let mut coords = vec![Complex64::new(0.0, 0.0); d as usize];
        coords[d as usize - 1] = Complex64::new(1.0, 0.0);
        Self { coords }
    }

    /// `Υ^{-1}`: `(x_1, y_1, ..., x_d, y_d) -> (x_1 + i y_1, ...)`.
    pub fn from_real(xs: &[f64]) -> Result<Self> {
        if xs.len() % 2 != 0 {
            return Err(invalid("real coordinates must come in (x, y) pairs"));
        }
        Self::new(xs.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect())
    }

    pub fn dim(&self) -> u32 {
        self.coords.len() as u32
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    /// `<z, w> = Σ z_j conj(w_j)`.
    pub fn inner(&self, w: &SpherePoint) -> Complex64 {
        self.coords.iter().zip(&w.coords).map(|(a, b)| a * b.conj()).sum()
    }

    /// `Υ(z) = (x_1, y_1, ..., x_d, y_d) ∈ S^{2d-1}`.
    pub fn upsilon(&self) -> Vec<f64> {
        self.coords.iter().flat_map(|c| [c.re, c.im]).collect()
    }
}

/// Deterministic generator for chunk `chunk` of a run seeded by `seed`.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Derives an independent seed for a named sub-stream of a run.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut rng = chunk_rng(seed, u64::MAX - tag);
    rng.random()
}

pub(crate) fn random_point<R: Rng + ?Sized>(d: u32, rng: &mut R) -> SpherePoint {
    loop {
        let coords: Vec<Complex64> = (0..d)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        if let Ok(p) = SpherePoint::normalized(coords) {
            return p;
        }
    }
}

/// Runs `f` over `count` items split into chunks of `chunk`, in parallel,
/// concatenating results in chunk order.
pub fn par_chunked<T, F>(count: usize, chunk: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync,
{
    let chunk = chunk.max(1);
    let n_chunks = count.div_ceil(chunk);
    let nested: Vec<Vec<T>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c as u64);
            let len = chunk.min(count - c * chunk);
            (0..len).map(|i| f(&mut rng, c * chunk + i)).collect()
        })
        .collect();
    nested.into_iter().flatten().collect()
}

/// `count` i.i.d. uniform points of `Ω_d` (normalized Gaussian vectors in `R^{2d}`).
pub fn sample_omega(d: u32, count: usize, seed: u64, chunk: usize) -> Result<Vec<SpherePoint>> {
    if d < 1 {
        return Err(invalid("sample_omega needs d >= 1"));
    }
    if count == 0 {
        return Err(invalid("sample_omega needs count >= 1"));
    }
    Ok(par_chunked(count, chunk, seed, |rng, _| random_point(d, rng)))
}

/// Exponent of an `L^p` norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LpExponent {
    Finite(f64),
    Infinity,
}

impl LpExponent {
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(LpExponent::Infinity)
        } else if p.is_finite() && p >= 1.0 {
            Ok(LpExponent::Finite(p))
        } else {
            Err(invalid(format!("L^p exponent must be >= 1 or infinite, got {p}")))
        }
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn recip(self) -> f64 {
        match self {
            LpExponent::Finite(p) => 1.0 / p,
            LpExponent::Infinity => 0.0,
        }
    }

    pub fn value(self) -> f64 {
        match self {
            LpExponent::Finite(p) => p,
            LpExponent::Infinity => f64::INFINITY,
        }
    }

    pub fn is_two(self) -> bool {
        self == LpExponent::Finite(2.0)
    }
}

impl std::str::FromStr for LpExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inf" | "infinity" | "∞" => Ok(LpExponent::Infinity),
            _ => {
                let p: f64 = s.parse().map_err(|_| invalid(format!("bad exponent '{s}'")))?;
                LpExponent::new(p)
            }
        }
    }
}

impl std::fmt::Display for LpExponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LpExponent::Finite(p) => write!(f, "{p}"),
            LpExponent::Infinity => f.write_str("inf"),
        }
    }
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: Option<u64>,
    /// Set for sup-norm estimates, which can only undershoot.
    pub lower_bound_only: bool,
}

impl McEstimate {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

/// `‖f‖_p` from `|f|` at uniform samples: `(ω_d · mean |f|^p)^{1/p}` with a
/// delta-method standard error, or the sample maximum for `p = ∞`.
pub fn mc_lp_norm(values: &[f64], p: LpExponent, d: u32) -> Result<McEstimate> {
    if values.is_empty() {
        return Err(invalid("mc_lp_norm needs at least one value"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite function value".into()));
    }
    let n = values.len();
    match p {
        LpExponent::Infinity => {
            let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            Ok(McEstimate { value: max, stderr: 0.0, samples: n, seed: None, lower_bound_only: true })
        }
        LpExponent::Finite(p) => {
            let omega = omega_d(d)?;
            let powered: Vec<f64> = values.iter().map(|v| v.abs().powf(p)).collect();
            let (mean, var) = mean_var(&powered);
            let integral = omega * mean;
            let integral_se = omega * (var / n as f64).sqrt();
            let value = integral.powf(1.0 / p);
            let stderr = if integral > 0.0 { value / (p * integral) * integral_se } else { 0.0 };
            Ok(McEstimate { value, stderr, samples: n, seed: None, lower_bound_only: false })
        }
    }
}

/// Sample mean and unbiased variance.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Sup-norm lower bound: the best of `values` over `cloud`, improved by a
/// shrinking random walk on a small cap around the leading candidates.
pub fn refine_sup<F>(f: F, cloud: &[SpherePoint], values: &[f64], seed: u64, starts: usize) -> f64
where
    F: Fn(&SpherePoint) -> f64,
{
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut best = values.iter().fold(0.0f64, |m, v| m.max(*v));
    for (s, &idx) in order.iter().take(starts).enumerate() {
        let mut rng = chunk_rng(seed, s as u64);
        let mut x = cloud[idx].clone();
        let mut fx = values[idx];
        let mut h = 0.1;
        for it in 0..60 {
            let trial: Vec<Complex64> = x
                .coords()
                .iter()
                .map(|c| {
                    c + Complex64::new(h * rng.sample::<f64, _>(StandardNormal), h * rng.sample::<f64, _>(StandardNormal))
                })
                .collect();
            if let Ok(y) = SpherePoint::normalized(trial) {
                let fy = f(&y);
                if fy > fx {
                    x = y;
                    fx = fy;
                }
            }
            if it % 15 == 14 {
                h *= 0.4;
            }
        }
        best = best.max(fx);
    }
    best
}

//! Exact orthogonal bases of `H_{m,n}(Ω_d)`, zonal kernels and the
//! addition-formula and Gegenbauer identities.
//!
//! `H_{m,n}` is realized as the orthogonal complement of `P_{m-1,n-1}` inside
//! `P_{m,n}` (restricted to the sphere). The monomial inner product vanishes
//! unless the charge vectors `α - β` agree, so Gram–Schmidt runs separately on
//! each charge block.

use std::collections::HashMap;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::dims::{dim_complex_harmonic, BiDegree};
use crate::error::{invalid, Error, Result};
use crate::poly::{monomial_inner_unchecked, multi_indices, power_table, FloatPoly, MonomialPoly, MultiIndex};
use crate::special_fn::{disk_poly_unchecked, gegenbauer_unchecked};
use crate::sphere::{derive_seed, mean_var, omega_d, par_chunked, random_point, SpherePoint, DEFAULT_CHUNK};

pub const MAX_BASIS_DEGREE: u32 = 8;
pub const MAX_BASIS_DIM: u32 = 4;

/// Orthogonal basis of `H_{m,n}(Ω_d)` with exact squared norms in units of `ω_d`.
#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    d: u32,
    bidegree: BiDegree,
    vectors: Vec<MonomialPoly>,
    sq_norms: Vec<BigRational>,
    normalized: Vec<FloatPoly>,
    max_deg: usize,
}

impl HarmonicBasis {
    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn bidegree(&self) -> BiDegree {
        self.bidegree
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[MonomialPoly] {
        &self.vectors
    }

    pub fn sq_norms(&self) -> &[BigRational] {
        &self.sq_norms
    }

    /// `Y_j(z)` normalized in `L^2(Ω_d)`: `vectors[j](z) / sqrt(sq_norms[j] ω_d)`.
    pub fn eval(&self, j: usize, z: &SpherePoint) -> Result<Complex64> {
        if j >= self.len() {
            return Err(invalid(format!("basis index {j} out of range (size {})", self.len())));
        }
        self.check_point(z)?;
        let pows = power_table(z.coords(), self.max_deg);
        Ok(self.normalized[j].eval_with(&pows))
    }

    /// All orthonormalized basis functions at `z`.
    pub fn eval_all(&self, z: &SpherePoint) -> Result<Vec<Complex64>> {
        self.check_point(z)?;
        Ok(self.eval_all_unchecked(z.coords()))
    }

    pub(crate) fn eval_all_unchecked(&self, z: &[Complex64]) -> Vec<Complex64> {
        let pows = power_table(z, self.max_deg);
        self.normalized.iter().map(|p| p.eval_with(&pows)).collect()
    }

    fn check_point(&self, z: &SpherePoint) -> Result<()> {
        if z.dim() != self.d {
            return Err(invalid(format!("point has dimension {}, basis has {}", z.dim(), self.d)));
        }
        Ok(())
    }
}

fn check_feasible(d: u32, b: BiDegree) -> Result<()> {
    if d < 2 {
        return Err(invalid(format!("complex dimension must be >= 2, got {d}")));
    }
    if d > MAX_BASIS_DIM || b.m > MAX_BASIS_DEGREE || b.n > MAX_BASIS_DEGREE {
        return Err(Error::Infeasible(format!(
            "basis construction is limited to d <= {MAX_BASIS_DIM} and m, n <= {MAX_BASIS_DEGREE}; got d={d}, {b}"
        )));
    }
    Ok(())
}

type Key = (MultiIndex, MultiIndex);

struct Block {
    keys: Vec<Key>,
    lower: Vec<Vec<BigRational>>,
}

fn charge(a: &[u32], b: &[u32]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| *x as i64 - *y as i64).collect()
}

fn dot(u: &[BigRational], v: &[BigRational]) -> BigRational {
    u.iter().zip(v).filter(|(a, b)| !a.is_zero() && !b.is_zero()).fold(BigRational::zero(), |acc, (a, b)| acc + a * b)
}

/// Builds an orthogonal basis of `H_{m,n}(Ω_d)`.
pub fn build_harmonic_basis(d: u32, b: BiDegree) -> Result<HarmonicBasis> {
    check_feasible(d, b)?;
    let du = d as usize;
    let expected = dim_complex_harmonic(d, b)?;

    let mut blocks: Vec<Block> = Vec::new();
    let mut block_of: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut position: HashMap<Key, usize> = HashMap::new();
    for a in multi_indices(du, b.m) {
        for bb in multi_indices(du, b.n) {
            let q = charge(&a, &bb);
            let bi = *block_of.entry(q).or_insert_with(|| {
                blocks.push(Block { keys: Vec::new(), lower: Vec::new() });
                blocks.len() - 1
            });
            position.insert((a.clone(), bb.clone()), blocks[bi].keys.len());
            blocks[bi].keys.push((a.clone(), bb));
        }
    }
    if b.m > 0 && b.n > 0 {
        for a in multi_indices(du, b.m - 1) {
            for bb in multi_indices(du, b.n - 1) {
                let bi = block_of[&charge(&a, &bb)];
                let mut v = vec![BigRational::zero(); blocks[bi].keys.len()];
                for j in 0..du {
                    let (mut a2, mut b2) = (a.clone(), bb.clone());
                    a2[j] += 1;
                    b2[j] += 1;
                    v[position[&(a2, b2)]] += BigRational::one();
                }
                blocks[bi].lower.push(v);
            }
        }
    }

    let mut vectors = Vec::new();
    let mut sq_norms = Vec::new();
    for block in &blocks {
        for (v, nsq) in orthogonalize_block(du, block)? {
            let mut p = MonomialPoly::zero(du);
            for (i, c) in v.into_iter().enumerate() {
                let (a, bb) = &block.keys[i];
                p.add_term(a.clone(), bb.clone(), c);
            }
            let f = p.make_primitive();
            vectors.push(p);
            sq_norms.push(nsq * &f * &f);
        }
    }

    if vectors.len() as u128 != expected {
        return Err(Error::Internal(format!(
            "basis for d={d}, {b} has {} vectors but dim H_(m,n) = {expected}",
            vectors.len()
        )));
    }
    let omega = omega_d(d)?;
    let normalized = vectors
        .iter()
        .zip(&sq_norms)
        .map(|(p, s)| FloatPoly::new(p, 1.0 / (s.to_f64().unwrap_or(f64::NAN) * omega).sqrt()))
        .collect::<Vec<_>>();
    let max_deg = normalized.iter().map(FloatPoly::max_deg).max().unwrap_or(0);
    Ok(HarmonicBasis { d, bidegree: b, vectors, sq_norms, normalized, max_deg })
}

/// Gram–Schmidt inside one charge block: the lower-degree vectors first, then
/// the unit vectors. Returns the surviving unit-vector residuals with their
/// squared norms.
fn orthogonalize_block(d: usize, block: &Block) -> Result<Vec<(Vec<BigRational>, BigRational)>> {
    let n = block.keys.len();
    let gram: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            let (a, b) = &block.keys[i];
            (0..n)
                .map(|k| {
                    let (c, e) = &block.keys[k];
                    monomial_inner_unchecked(d, a, b, c, e)
                })
                .collect()
        })
        .collect();
    let apply = |v: &[BigRational]| -> Vec<BigRational> { gram.iter().map(|row| dot(row, v)).collect() };

    // (vector, G·vector, squared norm)
    let mut ortho: Vec<(Vec<BigRational>, Vec<BigRational>, BigRational)> = Vec::new();
    let mut survivors = Vec::new();
    let unit = |i: usize| {
        let mut e = vec![BigRational::zero(); n];
        e[i] = BigRational::one();
        e
    };
    let candidates = block.lower.iter().cloned().map(|v| (v, true)).chain((0..n).map(|i| (unit(i), false)));
    for (mut v, is_lower) in candidates {
        for (q, gq, nq) in &ortho {
            let c = dot(&v, gq);
            if !c.is_zero() {
                let k = c / nq;
                for (vi, qi) in v.iter_mut().zip(q) {
                    if !qi.is_zero() {
                        *vi -= &k * qi;
                    }
                }
            }
        }
        if v.iter().all(Zero::is_zero) {
            if is_lower {
                return Err(Error::Internal("lower-degree monomials became dependent".into()));
            }
            continue;
        }
        let gv = apply(&v);
        let nsq = dot(&v, &gv);
        if !is_lower {
            survivors.push((v.clone(), nsq.clone()));
        }
        ortho.push((v, gv, nsq));
    }
    Ok(survivors)
}

/// Reproducing kernel of `H_{m,n}` with pole `w`.
#[derive(Debug, Clone)]
pub struct ZonalKernel {
    bidegree: BiDegree,
    pole: SpherePoint,
    scale: f64,
}

impl ZonalKernel {
    pub fn new(b: BiDegree, pole: SpherePoint) -> Result<Self> {
        let d = pole.dim();
        let dim = dim_complex_harmonic(d, b)? as f64;
        Ok(Self { bidegree: b, scale: dim / omega_d(d)?, pole })
    }

    pub fn pole(&self) -> &SpherePoint {
        &self.pole
    }

    /// `Z_w(z) = (d_{m,n} / ω_d) R_{m,n}^{d-2}(<z, w>)`.
    pub fn eval(&self, z: &SpherePoint) -> Result<Complex64> {
        if z.dim() != self.pole.dim() {
            return Err(invalid("point and pole dimensions differ"));
        }
        Ok(self.eval_unchecked(z))
    }

    fn eval_unchecked(&self, z: &SpherePoint) -> Complex64 {
        zonal_value(self.pole.dim(), self.bidegree, self.scale, z.inner(&self.pole))
    }
}

fn zonal_value(d: u32, b: BiDegree, scale: f64, t: Complex64) -> Complex64 {
    let r = t.norm();
    let t = if r > 1.0 { t / r } else { t };
    scale * disk_poly_unchecked(b.m as usize, b.n as usize, d as usize - 2, t)
}

/// Maximum deviations found by [`verify_addition`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdditionReport {
    /// `max |Σ conj(Y_j(w)) Y_j(z) - Z_w(z)|`
    pub kernel: f64,
    /// `max |Σ |Y_j(z)|^2 - d_{m,n}/ω_d|`
    pub diagonal: f64,
    pub pairs: usize,
}

impl AdditionReport {
    pub fn max(&self) -> f64 {
        self.kernel.max(self.diagonal)
    }
}

fn random_pairs(d: u32, samples: usize, seed: u64) -> Vec<(SpherePoint, SpherePoint)> {
    par_chunked(samples, DEFAULT_CHUNK, seed, |rng, _| (random_point(d, rng), random_point(d, rng)))
}

/// Compares the orthonormal basis expansion of the kernel with the disk
/// polynomial closed form on random pairs.
pub fn verify_addition(d: u32, b: BiDegree, samples: usize, seed: u64) -> Result<AdditionReport> {
    if samples == 0 {
        return Err(invalid("need at least one sample pair"));
    }
    let basis = build_harmonic_basis(d, b)?;
    let scale = dim_complex_harmonic(d, b)? as f64 / omega_d(d)?;
    let pairs = random_pairs(d, samples, seed);
    let (kernel, diagonal) = pairs
        .par_iter()
        .map(|(z, w)| {
            let yz = basis.eval_all_unchecked(z.coords());
            let yw = basis.eval_all_unchecked(w.coords());
            let sum: Complex64 = yz.iter().zip(&yw).map(|(a, b)| a * b.conj()).sum();
            let closed = zonal_value(d, b, scale, z.inner(w));
            let diag: f64 = yz.iter().map(|y| y.norm_sqr()).sum();
            ((sum - closed).norm(), (diag - scale).abs())
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    Ok(AdditionReport { kernel, diagonal, pairs: samples })
}

/// Maximum deviation between the real-sphere Gegenbauer kernel of degree `k`
/// on `S^{2d-1}` and the sum of the complex zonal kernels with `m + n = k`.
pub fn verify_gegenbauer(d: u32, k: u32, samples: usize, seed: u64) -> Result<f64> {
    if d < 2 {
        return Err(invalid(format!("complex dimension must be >= 2, got {d}")));
    }
    if samples == 0 {
        return Err(invalid("need at least one sample pair"));
    }
    let omega = omega_d(d)?;
    let lam = d as f64 - 1.0;
    let factor = (2.0 * d as f64 + 2.0 * k as f64 - 2.0) / (omega * (2.0 * d as f64 - 2.0));
    let terms: Vec<(BiDegree, f64)> = (0..=k)
        .map(|m| {
            let b = BiDegree::new(m, k - m);
            Ok((b, dim_complex_harmonic(d, b)? as f64 / omega))
        })
        .collect::<Result<_>>()?;
    let pairs = random_pairs(d, samples, seed);
    Ok(pairs
        .par_iter()
        .map(|(z, w)| {
            let t = z.inner(w);
            let x: f64 = z.upsilon().iter().zip(w.upsilon()).map(|(a, b)| a * b).sum();
            let lhs = factor * gegenbauer_unchecked(k as usize, lam, x.clamp(-1.0, 1.0));
            let rhs: Complex64 = terms.iter().map(|(b, s)| zonal_value(d, *b, *s, t)).sum();
            (rhs - lhs).norm()
        })
        .reduce(|| 0.0, f64::max))
}

/// Monte Carlo estimate of `(π_{m,n} f)(w) = ∫ f(z) conj(Z_w(z)) dσ(z)` with
/// its standard error.
pub fn project_mc<F>(f: F, d: u32, b: BiDegree, w: &SpherePoint, samples: usize, seed: u64) -> Result<(Complex64, f64)>
where
    F: Fn(&SpherePoint) -> Complex64 + Sync,
{
    if samples < 2 {
        return Err(invalid("projection needs at least two samples"));
    }
    if w.dim() != d {
        return Err(invalid("pole dimension does not match d"));
    }
    let kernel = ZonalKernel::new(b, w.clone())?;
    let omega = omega_d(d)?;
    let pts = crate::sphere::sample_omega(d, samples, derive_seed(seed, 1), DEFAULT_CHUNK)?;
    let vals: Vec<Complex64> = pts.par_iter().map(|z| f(z) * kernel.eval_unchecked(z).conj()).collect();
    if vals.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Data("non-finite function value".into()));
    }
    let re: Vec<f64> = vals.iter().map(|v| v.re).collect();
    let im: Vec<f64> = vals.iter().map(|v| v.im).collect();
    let (mr, vr) = mean_var(&re);
    let (mi, vi) = mean_var(&im);
    let stderr = omega * ((vr + vi) / samples as f64).sqrt();
    Ok((omega * Complex64::new(mr, mi), stderr))
}

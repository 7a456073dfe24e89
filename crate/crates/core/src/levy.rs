//! Levy means of multiplier norms on coefficient spheres, the two-sided
//! bounds for them, and Nikolskii-type inequality checks.
//!
//! Coordinates come from a real orthonormal system of
//! `T_{M1,M2} = ⊕ {H_{m,n} : M1 < max(m,n) <= M2}`. Conjugation maps
//! `H_{m,n}` onto `H_{n,m}`, so real functions are built from the pair: the
//! real and imaginary parts of an orthogonal basis of `H_{m,n}`,
//! re-orthogonalized exactly. Real parts are even and imaginary parts odd
//! under `z -> conj(z)`, so the two groups are orthogonal to each other.

use std::collections::HashSet;

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::basis::build_harmonic_basis;
use crate::dims::{dim_complex_harmonic, layer_dim, layer_members, theta, BiDegree, Grading};
use crate::error::{invalid, Error, Result};
use crate::multipliers::MultiplierFamily;
use crate::poly::{power_table, FloatPoly, MonomialPoly};
use crate::sphere::{
    chunk_rng, derive_seed, mc_lp_norm, mean_var, omega_d, par_chunked, random_point, refine_sup, sample_omega, LpExponent,
    McEstimate, SpherePoint, DEFAULT_CHUNK,
};

/// One real basis function: `Re P` when `imag` is false, otherwise `Im P`,
/// where `poly` stores `(P + conj P)/2` or `(P - conj P)/2` respectively.
#[derive(Debug, Clone)]
pub struct RealFunction {
    pub poly: MonomialPoly,
    pub imag: bool,
    /// `∫ f^2 dσ / ω_d`, exact.
    pub sq_norm: BigRational,
    /// Bidegree of the complex space the function came from.
    pub source: BiDegree,
    pub level: u64,
}

/// Real `L^2(Ω_d)`-orthonormal system of `T_{M1,M2}` under the max grading.
#[derive(Debug, Clone)]
pub struct RealBasis {
    d: u32,
    m1: u64,
    m2: u64,
    functions: Vec<RealFunction>,
    float: Vec<FloatPoly>,
    max_deg: usize,
}

fn gram_schmidt_real(polys: Vec<MonomialPoly>) -> Vec<(MonomialPoly, BigRational)> {
    let mut out: Vec<(MonomialPoly, BigRational)> = Vec::new();
    for mut v in polys {
        for (q, nq) in &out {
            let c = v.inner(q);
            if !c.is_zero() {
                v.add_scaled(q, &(-(c / nq)));
            }
        }
        if v.is_zero() {
            continue;
        }
        let f = v.make_primitive();
        let nsq = v.inner(&v);
        debug_assert!(!f.is_zero());
        out.push((v, nsq));
    }
    out
}

impl RealBasis {
    /// Builds the system for levels `m1 < l <= m2`.
    pub fn window(d: u32, m1: u64, m2: u64) -> Result<Self> {
        if m1 >= m2 {
            return Err(invalid(format!("window needs M1 < M2, got ({m1}, {m2})")));
        }
        let half = BigRational::new(1.into(), 2.into());
        let mut functions = Vec::new();
        for l in m1 + 1..=m2 {
            let mut seen = HashSet::new();
            for b in layer_members(l, Grading::Max) {
                if !seen.insert((b.m.max(b.n), b.m.min(b.n))) {
                    continue;
                }
                let h = build_harmonic_basis(d, b)?;
                let expected = if b.m == b.n { h.len() } else { 2 * h.len() };
                let mut count = 0;
                for imag in [false, true] {
                    let parts: Vec<MonomialPoly> = h
                        .vectors()
                        .iter()
                        .map(|p| {
                            let mut q = p.clone();
                            let sign = if imag { -half.clone() } else { half.clone() };
                            q = q.scaled(&half);
                            q.add_scaled(&p.conj(), &sign);
                            q
                        })
                        .collect();
                    for (poly, sq_norm) in gram_schmidt_real(parts) {
                        count += 1;
                        functions.push(RealFunction { poly, imag, sq_norm, source: b, level: l });
                    }
                }
                if count != expected {
                    return Err(Error::Internal(format!(
                        "real system for {b} has {count} functions, expected {expected}"
                    )));
                }
            }
        }
        let s = theta(d, m1, m2, Grading::Max)?;
        if functions.len() as u128 != s {
            return Err(Error::Internal(format!("real system has {} functions, θ = {s}", functions.len())));
        }
        let omega = omega_d(d)?;
        let float: Vec<FloatPoly> = functions
            .iter()
            .map(|f| FloatPoly::new(&f.poly, 1.0 / (f.sq_norm.to_f64().unwrap_or(f64::NAN) * omega).sqrt()))
            .collect();
        let max_deg = float.iter().map(FloatPoly::max_deg).max().unwrap_or(0);
        Ok(Self { d, m1, m2, functions, float, max_deg })
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn functions(&self) -> &[RealFunction] {
        &self.functions
    }

    pub fn window_levels(&self) -> (u64, u64) {
        (self.m1, self.m2)
    }

    /// All orthonormal real functions at `z`.
    pub fn eval_all(&self, z: &SpherePoint) -> Result<Vec<f64>> {
        if z.dim() != self.d {
            return Err(invalid("point dimension does not match basis"));
        }
        Ok(self.eval_all_unchecked(z))
    }

    fn eval_all_unchecked(&self, z: &SpherePoint) -> Vec<f64> {
        let pows = power_table(z.coords(), self.max_deg);
        self.float
            .iter()
            .zip(&self.functions)
            .map(|(p, f)| {
                let v = p.eval_with(&pows);
                if f.imag {
                    v.im
                } else {
                    v.re
                }
            })
            .collect()
    }

    /// Row-major `cloud.len() × s` matrix of function values.
    fn design_matrix(&self, cloud: &[SpherePoint]) -> DMatrix<f64> {
        let rows: Vec<Vec<f64>> = cloud.par_iter().map(|z| self.eval_all_unchecked(z)).collect();
        DMatrix::from_fn(cloud.len(), self.len(), |i, k| rows[i][k])
    }
}

/// A Levy-mean problem for `Λ_s` on `T_{M1,M2}`.
#[derive(Debug, Clone)]
pub struct LevyProblem {
    pub d: u32,
    pub m1: u64,
    pub m2: u64,
    pub fam: MultiplierFamily,
    pub p: LpExponent,
    basis: RealBasis,
    lambdas: Vec<f64>,
}

impl LevyProblem {
    pub fn new(fam: MultiplierFamily, m1: u64, m2: u64, p: LpExponent) -> Result<Self> {
        if fam.grading != Grading::Max {
            return Err(invalid("Levy problems use the max grading"));
        }
        let basis = RealBasis::window(fam.d, m1, m2)?;
        let lambdas = basis.functions().iter().map(|f| fam.at_level(f.level)).collect::<Result<Vec<_>>>()?;
        Ok(Self { d: fam.d, m1, m2, fam, p, basis, lambdas })
    }

    pub fn s(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &RealBasis {
        &self.basis
    }

    /// `(Σ λ_k^2 / s)^{1/2}`, the exact Levy mean for `p = 2`.
    pub fn parseval_mean(&self) -> f64 {
        (self.lambdas.iter().map(|l| l * l).sum::<f64>() / self.s() as f64).sqrt()
    }
}

fn unit_gaussian<R: Rng + ?Sized>(s: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..s).map(|_| rng.sample(StandardNormal)).collect();
        let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 0.0 {
            return x.into_iter().map(|v| v / n).collect();
        }
    }
}

/// `‖Λ_s J(x)‖_p` estimated on `inner` fresh uniform points.
fn sampled_norm<R: Rng + ?Sized>(prob: &LevyProblem, x: &[f64], inner: usize, omega: f64, rng: &mut R) -> f64 {
    let mut acc = 0.0f64;
    for _ in 0..inner {
        let z = random_point(prob.d, rng);
        let v = prob.basis.eval_all_unchecked(&z).iter().zip(x).map(|(a, b)| a * b).sum::<f64>().abs();
        acc = match prob.p {
            LpExponent::Infinity => acc.max(v),
            LpExponent::Finite(p) => acc + v.powf(p),
        };
    }
    match prob.p {
        LpExponent::Infinity => acc,
        LpExponent::Finite(p) => (omega * acc / inner as f64).powf(1.0 / p),
    }
}

/// Monte Carlo estimate of `M(‖·‖_{(Λ_s,p)}) = (E ‖Λ_s J(x)‖_p^2)^{1/2}` over
/// `x` uniform on `S^{s-1}`. Each outer sample gets its own cloud of
/// `omega_samples` points, so the reported standard error covers both levels
/// of sampling.
///
/// With `p = 2` and `omega_samples = 0` the exact Parseval value is returned.
pub fn levy_mean_mc(prob: &LevyProblem, sphere_samples: usize, omega_samples: usize, seed: u64) -> Result<McEstimate> {
    if prob.p.is_two() && omega_samples == 0 {
        return Ok(McEstimate {
            value: prob.parseval_mean(),
            stderr: 0.0,
            samples: 1,
            seed: Some(seed),
            lower_bound_only: false,
        });
    }
    if omega_samples < 1000 {
        return Err(invalid("Monte Carlo Levy means need at least 1000 sphere points"));
    }
    if sphere_samples < 2 {
        return Err(invalid("need at least two coefficient-sphere samples"));
    }
    let s = prob.s();
    let omega = omega_d(prob.d)?;
    let sq = par_chunked(sphere_samples, 4, seed, |rng, _| {
        let x: Vec<f64> = unit_gaussian(s, rng).iter().zip(&prob.lambdas).map(|(a, l)| a * l).collect();
        sampled_norm(prob, &x, omega_samples, omega, rng).powi(2)
    });
    let (mean, var) = mean_var(&sq);
    let value = mean.sqrt();
    let stderr = if value > 0.0 { (var / sq.len() as f64).sqrt() / (2.0 * value) } else { 0.0 };
    Ok(McEstimate {
        value,
        stderr,
        samples: sphere_samples,
        seed: Some(seed),
        lower_bound_only: matches!(prob.p, LpExponent::Infinity),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevyCase {
    /// `2 < p < ∞`
    A,
    /// `p = ∞`
    B,
    /// `1 <= p < 2`
    C,
    /// `p = 2`
    D,
}

impl std::fmt::Display for LevyCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LevyCase::A => "a",
            LevyCase::B => "b",
            LevyCase::C => "c",
            LevyCase::D => "d",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    NonIncreasing,
    NonDecreasing,
    Neither,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevyBounds {
    pub case: LevyCase,
    pub lower: f64,
    /// `None` when the bound carries an unspecified absolute constant.
    pub upper: Option<f64>,
    /// For cases (a), (b): the upper bound without its absolute constant.
    pub structural_factor: Option<f64>,
    pub monotonicity: Monotonicity,
    /// `lower > upper` although both are numeric.
    pub inconsistent: bool,
    /// `Σ λ(l)^2 d_l` and `Σ λ(l-1)^2 d_l` over the window, after any permutation.
    pub lower_sum: f64,
    pub upper_sum: f64,
    pub s: usize,
}

impl LevyBounds {
    /// `estimate / structural_factor`, for the cases with an unknown constant.
    pub fn empirical_constant(&self, estimate: f64) -> Option<f64> {
        self.structural_factor.filter(|f| *f > 0.0).map(|f| estimate / f)
    }
}

/// Evaluates the two-sided bounds on the Levy mean for the problem's `p`.
pub fn levy_bounds(prob: &LevyProblem) -> Result<LevyBounds> {
    let fam = &prob.fam;
    let d = prob.d;
    let vals = (prob.m1..=prob.m2).map(|l| fam.at_level(l)).collect::<Result<Vec<_>>>()?;
    let non_inc = vals.windows(2).all(|w| w[1] <= w[0]);
    let non_dec = vals.windows(2).all(|w| w[1] >= w[0]);
    let monotonicity = match (non_inc, non_dec) {
        (true, _) => Monotonicity::NonIncreasing,
        (false, true) => Monotonicity::NonDecreasing,
        _ => Monotonicity::Neither,
    };
    let (mut lo, mut hi) = (0.0, 0.0);
    for (i, l) in (prob.m1 + 1..=prob.m2).enumerate() {
        let dl = layer_dim(d, l, Grading::Max)? as f64;
        lo += vals[i + 1].powi(2) * dl;
        hi += vals[i].powi(2) * dl;
    }
    if monotonicity == Monotonicity::NonDecreasing {
        std::mem::swap(&mut lo, &mut hi);
    }
    let s = prob.s();
    let sf = s as f64;
    let omega = omega_d(d)?;
    let base_lo = (lo / sf).sqrt();
    let base_hi = (hi / sf).sqrt();
    let (case, lower, upper, structural) = match prob.p {
        LpExponent::Infinity => (LevyCase::B, base_lo, None, Some(omega.powf(-0.5) * sf.ln().sqrt() * base_hi)),
        LpExponent::Finite(p) if p == 2.0 => (LevyCase::D, base_lo, Some(base_hi), None),
        LpExponent::Finite(p) if p < 2.0 => (LevyCase::C, omega.sqrt() / 2.0 * base_lo, Some(base_hi), None),
        LpExponent::Finite(p) => {
            (LevyCase::A, base_lo, None, Some(p.sqrt() * omega.powf(1.0 / p - 0.5) * base_hi))
        }
    };
    let inconsistent = upper.is_some_and(|u| lower > u * (1.0 + 1e-12));
    Ok(LevyBounds {
        case,
        lower,
        upper,
        structural_factor: structural,
        monotonicity,
        inconsistent,
        lower_sum: lo,
        upper_sum: hi,
        s,
    })
}

/// The two Nikolskii ratios for one function:
/// `‖t‖_∞ / ((s/ω)^{1/p} ‖t‖_p)` and `‖t‖_p / ((s/ω)^{1/2-1/p} ‖t‖_2)`.
pub fn nikolskii_ratios(sup: f64, lp: f64, l2: f64, p: f64, s: usize, d: u32) -> Result<(f64, f64)> {
    let q = s as f64 / omega_d(d)?;
    Ok((sup / (q.powf(1.0 / p) * lp), lp / (q.powf(0.5 - 1.0 / p) * l2)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NikolskiiReport {
    pub trials: usize,
    pub s: usize,
    pub p: f64,
    /// Trials where the sup-norm inequality failed beyond 3 standard errors.
    pub sup_violations: usize,
    /// Trials where the `L^p`–`L^2` inequality failed beyond 3 standard errors
    /// (only checked for `p >= 2`).
    pub lp_violations: usize,
    pub worst_sup_ratio: f64,
    pub worst_lp_ratio: f64,
}

impl NikolskiiReport {
    pub fn violations(&self) -> usize {
        self.sup_violations + self.lp_violations
    }
}

/// Random real polynomials in `T_{M1,M2}` tested against both Nikolskii
/// inequalities. `‖t‖_2` is exact (Parseval); `‖t‖_p` is a Monte Carlo
/// estimate unless `p = 2`; `‖t‖_∞` is a refined sampled maximum.
pub fn nikolskii_check(
    d: u32,
    m1: u64,
    m2: u64,
    p: f64,
    trials: usize,
    omega_samples: usize,
    seed: u64,
) -> Result<NikolskiiReport> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(invalid(format!("p must be finite and >= 1, got {p}")));
    }
    if trials == 0 || omega_samples < 2 {
        return Err(invalid("need at least one trial and two sphere points"));
    }
    let basis = RealBasis::window(d, m1, m2)?;
    let s = basis.len();
    let cloud = sample_omega(d, omega_samples, derive_seed(seed, 1), DEFAULT_CHUNK)?;
    let design = basis.design_matrix(&cloud);
    let coeff_seed = derive_seed(seed, 2);
    let refine_seed = derive_seed(seed, 3);
    let results: Vec<Result<(bool, bool, f64, f64)>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = chunk_rng(coeff_seed, t as u64);
            let c: Vec<f64> = (0..s).map(|_| rng.sample(StandardNormal)).collect();
            let l2 = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            let cv = nalgebra::DVector::from_column_slice(&c);
            let vals: Vec<f64> = (&design * &cv).iter().map(|v| v.abs()).collect();
            let (lp, lp_se) = if p == 2.0 {
                (l2, 0.0)
            } else {
                let e = mc_lp_norm(&vals, LpExponent::Finite(p), d)?;
                (e.value, e.stderr)
            };
            let f = |z: &SpherePoint| {
                basis.eval_all_unchecked(z).iter().zip(&c).map(|(a, b)| a * b).sum::<f64>().abs()
            };
            let sup = refine_sup(f, &cloud, &vals, derive_seed(refine_seed, t as u64), 3);
            let (r1, r2) = nikolskii_ratios(sup, lp, l2, p, s, d)?;
            let rel = lp_se / lp;
            let v1 = r1 > 1.0 + 3.0 * r1 * rel;
            let v2 = p >= 2.0 && r2 > 1.0 + 3.0 * r2 * rel;
            Ok((v1, v2, r1, if p >= 2.0 { r2 } else { f64::NAN }))
        })
        .collect();
    let mut rep = NikolskiiReport {
        trials,
        s,
        p,
        sup_violations: 0,
        lp_violations: 0,
        worst_sup_ratio: 0.0,
        worst_lp_ratio: 0.0,
    };
    for r in results {
        let (v1, v2, r1, r2) = r?;
        rep.sup_violations += v1 as usize;
        rep.lp_violations += v2 as usize;
        rep.worst_sup_ratio = rep.worst_sup_ratio.max(r1);
        if r2.is_finite() {
            rep.worst_lp_ratio = rep.worst_lp_ratio.max(r2);
        }
    }
    Ok(rep)
}

/// Number of real functions contributed by a bidegree pair.
pub fn pair_real_dim(d: u32, b: BiDegree) -> Result<u128> {
    let h = dim_complex_harmonic(d, b)?;
    Ok(if b.m == b.n { h } else { 2 * h })
}

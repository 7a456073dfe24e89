//! Sparse polynomials `Σ c_{α,β} z^α conj(z)^β` with rational coefficients,
//! and the exact monomial inner product on `Ω_d`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Result};

pub type MultiIndex = Vec<u32>;

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `<z^a conj(z)^b, z^c conj(z)^e> / ω_d`.
///
/// The integrand is `z^{a+e} conj(z)^{b+c}`, which integrates to zero unless
/// `a + e = b + c`; then the value is `(d-1)! (a+e)! / (d-1+|a+e|)!`.
pub fn monomial_inner(d: usize, a: &[u32], b: &[u32], c: &[u32], e: &[u32]) -> Result<BigRational> {
    if [a.len(), b.len(), c.len(), e.len()].iter().any(|&l| l != d) {
        return Err(invalid(format!("multi-indices must all have length {d}")));
    }
    Ok(monomial_inner_unchecked(d, a, b, c, e))
}

pub(crate) fn monomial_inner_unchecked(d: usize, a: &[u32], b: &[u32], c: &[u32], e: &[u32]) -> BigRational {
    let mut num = BigInt::one();
    let mut total = 0u64;
    for j in 0..d {
        let s = a[j] + e[j];
        if s != b[j] + c[j] {
            return BigRational::zero();
        }
        num *= factorial(s as u64);
        total += s as u64;
    }
    let d1 = d as u64 - 1;
    // (d-1)! / (d-1+total)! = 1 / ((d)(d+1)...(d-1+total))
    let den = (d1 + 1..=d1 + total).fold(BigInt::one(), |acc, k| acc * BigInt::from(k));
    BigRational::new(num, den)
}

/// All multi-indices of length `d` and total degree `k`, in descending
/// lexicographic order (`z_1^k` first).
pub fn multi_indices(d: usize, k: u32) -> Vec<MultiIndex> {
    fn rec(d: usize, k: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if prefix.len() + 1 == d {
            prefix.push(k);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=k).rev() {
            prefix.push(first);
            rec(d, k - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if d == 0 {
        return out;
    }
    rec(d, k, &mut Vec::with_capacity(d), &mut out);
    out
}

/// A polynomial in `z` and `conj(z)` with exact rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialPoly {
    d: usize,
    terms: BTreeMap<(MultiIndex, MultiIndex), BigRational>,
}

impl MonomialPoly {
    pub fn zero(d: usize) -> Self {
        Self { d, terms: BTreeMap::new() }
    }

    pub fn monomial(alpha: MultiIndex, beta: MultiIndex, coeff: BigRational) -> Result<Self> {
        if alpha.len() != beta.len() || alpha.is_empty() {
            return Err(invalid("monomial multi-indices must have equal nonzero length"));
        }
        let mut p = Self::zero(alpha.len());
        p.add_term(alpha, beta, coeff);
        Ok(p)
    }

    pub fn one(d: usize) -> Self {
        Self::monomial(vec![0; d], vec![0; d], BigRational::one()).expect("d >= 1")
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &MultiIndex, &BigRational)> {
        self.terms.iter().map(|((a, b), c)| (a, b, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, alpha: &[u32], beta: &[u32]) -> BigRational {
        self.terms.get(&(alpha.to_vec(), beta.to_vec())).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn add_term(&mut self, alpha: MultiIndex, beta: MultiIndex, coeff: BigRational) {
        debug_assert_eq!(alpha.len(), self.d);
        if coeff.is_zero() {
            return;
        }
        let key = (alpha, beta);
        let sum = match self.terms.remove(&key) {
            Some(c) => c + coeff,
            None => coeff,
        };
        if !sum.is_zero() {
            self.terms.insert(key, sum);
        }
    }

    /// `self + k * other`.
    pub fn add_scaled(&mut self, other: &MonomialPoly, k: &BigRational) {
        for ((a, b), c) in &other.terms {
            self.add_term(a.clone(), b.clone(), c * k);
        }
    }

    pub fn scaled(&self, k: &BigRational) -> Self {
        let mut out = Self::zero(self.d);
        out.add_scaled(self, k);
        out
    }

    /// Multiplies by `Σ_j |z_j|^2`, which is 1 on the sphere.
    pub fn times_norm_sq(&self) -> Self {
        let mut out = Self::zero(self.d);
        for ((a, b), c) in &self.terms {
            for j in 0..self.d {
                let (mut a2, mut b2) = (a.clone(), b.clone());
                a2[j] += 1;
                b2[j] += 1;
                out.add_term(a2, b2, c.clone());
            }
        }
        out
    }

    /// The polynomial whose values are the complex conjugates of `self`'s
    /// (coefficients are real, so this swaps `α` and `β`).
    pub fn conj(&self) -> Self {
        Self {
            d: self.d,
            terms: self.terms.iter().map(|((a, b), c)| ((b.clone(), a.clone()), c.clone())).collect(),
        }
    }

    /// `<self, other> / ω_d = ∫ self · conj(other) dσ / ω_d`, exactly.
    pub fn inner(&self, other: &MonomialPoly) -> BigRational {
        let mut acc = BigRational::zero();
        for ((a, b), c1) in &self.terms {
            for ((c, e), c2) in &other.terms {
                let v = monomial_inner_unchecked(self.d, a, b, c, e);
                if !v.is_zero() {
                    acc += v * c1 * c2;
                }
            }
        }
        acc
    }

    /// Rescales to coprime integer coefficients with a positive leading term;
    /// returns the factor applied.
    pub fn make_primitive(&mut self) -> BigRational {
        if self.is_zero() {
            return BigRational::one();
        }
        let mut lcm_den = BigInt::one();
        let mut gcd_num = BigInt::zero();
        for c in self.terms.values() {
            lcm_den = lcm_den.lcm(c.denom());
            gcd_num = gcd_num.gcd(c.numer());
        }
        let mut factor = BigRational::new(lcm_den, gcd_num);
        if self.terms.values().next().is_some_and(|c| c.is_negative()) {
            factor = -factor;
        }
        for c in self.terms.values_mut() {
            *c = &*c * &factor;
        }
        factor
    }

    /// Floating-point value at `z` (no sphere check).
    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        let zc: Vec<Complex64> = z.iter().map(|c| c.conj()).collect();
        self.terms
            .iter()
            .map(|((a, b), c)| {
                let mut v = Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0);
                for j in 0..self.d {
                    v *= z[j].powu(a[j]) * zc[j].powu(b[j]);
                }
                v
            })
            .sum()
    }
}

/// Precomputed floating-point form of a polynomial for repeated evaluation.
#[derive(Debug, Clone)]
pub(crate) struct FloatPoly {
    d: usize,
    max_deg: usize,
    terms: Vec<(MultiIndex, MultiIndex, f64)>,
}

impl FloatPoly {
    pub(crate) fn new(p: &MonomialPoly, scale: f64) -> Self {
        let terms: Vec<_> = p
            .terms()
            .map(|(a, b, c)| (a.clone(), b.clone(), c.to_f64().unwrap_or(f64::NAN) * scale))
            .collect();
        let max_deg = terms
            .iter()
            .flat_map(|(a, b, _)| a.iter().chain(b.iter()).copied())
            .max()
            .unwrap_or(0) as usize;
        Self { d: p.dim(), max_deg, terms }
    }

    pub(crate) fn max_deg(&self) -> usize {
        self.max_deg
    }

    /// Evaluates with a power table `pows[j][k] = (z_j^k, conj(z_j)^k)`.
    pub(crate) fn eval_with(&self, pows: &[Vec<(Complex64, Complex64)>]) -> Complex64 {
        self.terms
            .iter()
            .map(|(a, b, c)| {
                let mut v = Complex64::new(*c, 0.0);
                for j in 0..self.d {
                    v *= pows[j][a[j] as usize].0 * pows[j][b[j] as usize].1;
                }
                v
            })
            .sum()
    }
}

pub(crate) fn power_table(z: &[Complex64], max_deg: usize) -> Vec<Vec<(Complex64, Complex64)>> {
    z.iter()
        .map(|&zj| {
            let mut row = Vec::with_capacity(max_deg + 1);
            let (mut p, mut q) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
            for _ in 0..=max_deg {
                row.push((p, q));
                p *= zj;
                q *= zj.conj();
            }
            row
        })
        .collect()
}

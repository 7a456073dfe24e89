//! Jacobi, Gegenbauer and disk polynomials.
//!
//! All evaluations use forward three-term recurrences in `f64`. Degrees used
//! elsewhere in the crate stay in the low hundreds where this is stable.

use num_complex::Complex64;

use crate::error::{invalid, Result};

/// Inputs that overshoot the closed unit interval/disk by at most this much
/// are clamped; anything further out is rejected.
pub const CLAMP_TOL: f64 = 1e-12;

/// Degree and parameters of a Jacobi polynomial `P_k^{(alpha, beta)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiParams {
    pub k: i64,
    pub alpha: f64,
    pub beta: f64,
}

impl JacobiParams {
    pub fn new(k: i64, alpha: f64, beta: f64) -> Self {
        Self { k, alpha, beta }
    }
}

/// Arguments of the disk polynomial `R_{m,n}^{alpha}(z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskPolyArg {
    pub m: i64,
    pub n: i64,
    pub alpha: i64,
    pub z: Complex64,
}

fn clamp_unit(x: f64, what: &str) -> Result<f64> {
    if !x.is_finite() {
        return Err(invalid(format!("{what} must be finite, got {x}")));
    }
    if x.abs() > 1.0 + CLAMP_TOL {
        return Err(invalid(format!("{what} = {x} lies outside [-1, 1]")));
    }
    Ok(x.clamp(-1.0, 1.0))
}

/// `P_k^{(alpha,beta)}(x)` by the standard three-term recurrence.
pub fn jacobi_eval(p: JacobiParams, x: f64) -> Result<f64> {
    let JacobiParams { k, alpha, beta } = p;
    if k < 0 {
        return Err(invalid(format!("Jacobi degree must be >= 0, got {k}")));
    }
    if !alpha.is_finite() || !beta.is_finite() || alpha <= -1.0 || beta <= -1.0 {
        return Err(invalid(format!(
            "Jacobi parameters must be finite and > -1, got ({alpha}, {beta})"
        )));
    }
    let x = clamp_unit(x, "Jacobi argument")?;
    Ok(jacobi_unchecked(k as usize, alpha, beta, x))
}

pub(crate) fn jacobi_unchecked(k: usize, a: f64, b: f64, x: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 0.5 * ((a + b + 2.0) * x + (a - b));
    for n in 2..=k {
        let n = n as f64;
        let s = 2.0 * n + a + b;
        let c1 = 2.0 * n * (n + a + b) * (s - 2.0);
        let c2 = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b);
        let c3 = 2.0 * (n + a - 1.0) * (n + b - 1.0) * s;
        let next = (c2 * cur - c3 * prev) / c1;
        prev = cur;
        cur = next;
    }
    cur
}

/// `binom(k + alpha, k)`, the value of `P_k^{(alpha,beta)}` at `x = 1`.
pub fn jacobi_at_one(k: usize, alpha: f64) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc * (alpha + j as f64) / j as f64)
}

/// Gegenbauer polynomial `C_k^lam(t)` in the standard normalization
/// `C_k^lam(1) = binom(k + 2 lam - 1, k)`.
pub fn gegenbauer_eval(k: i64, lam: f64, t: f64) -> Result<f64> {
    if k < 0 {
        return Err(invalid(format!("Gegenbauer degree must be >= 0, got {k}")));
    }
    if !(lam > 0.0) || !lam.is_finite() {
        return Err(invalid(format!("Gegenbauer index must be > 0, got {lam}")));
    }
    let t = clamp_unit(t, "Gegenbauer argument")?;
    Ok(gegenbauer_unchecked(k as usize, lam, t))
}

pub(crate) fn gegenbauer_unchecked(k: usize, lam: f64, t: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 2.0 * lam * t;
    for n in 2..=k {
        let n = n as f64;
        let next = (2.0 * t * (n + lam - 1.0) * cur - (n + 2.0 * lam - 2.0) * prev) / n;
        prev = cur;
        cur = next;
    }
    cur
}

/// Disk polynomial `R_{m,n}^{alpha}(z)`, normalized so that `R(1) = 1`.
///
/// For `m >= n` this is `z^{m-n} P_n^{(alpha, m-n)}(2|z|^2 - 1) / P_n^{(alpha, m-n)}(1)`;
/// the case `m < n` uses `conj(z)` and swaps the roles of `m` and `n`.
pub fn disk_poly_eval(a: DiskPolyArg) -> Result<Complex64> {
    let DiskPolyArg { m, n, alpha, z } = a;
    if m < 0 || n < 0 {
        return Err(invalid(format!("disk polynomial degrees must be >= 0, got ({m}, {n})")));
    }
    if alpha < 0 {
        return Err(invalid(format!("disk polynomial index must be >= 0, got {alpha}")));
    }
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(invalid("disk polynomial argument must be finite"));
    }
    let r = z.norm();
    if r > 1.0 + CLAMP_TOL {
        return Err(invalid(format!("|z| = {r} exceeds 1")));
    }
    let z = if r > 1.0 { z / r } else { z };
    Ok(disk_poly_unchecked(m as usize, n as usize, alpha as usize, z))
}

pub(crate) fn disk_poly_unchecked(m: usize, n: usize, alpha: usize, z: Complex64) -> Complex64 {
    let (hi, lo, w) = if m >= n { (m, n, z) } else { (n, m, z.conj()) };
    let shift = (hi - lo) as f64;
    let a = alpha as f64;
    let x = (2.0 * z.norm_sqr() - 1.0).clamp(-1.0, 1.0);
    let radial = jacobi_unchecked(lo, a, shift, x) / jacobi_at_one(lo, a);
    w.powu((hi - lo) as u32) * radial
}

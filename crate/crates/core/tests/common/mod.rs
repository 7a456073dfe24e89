//! Reference implementations used only by the tests. None of them call into
//! the library's own formulas.
#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};

pub fn binom(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Number of monomials `z^a conj(z)^b` with `|a| = m`, `|b| = n`.
pub fn dim_p(d: u64, m: i64, n: i64) -> u128 {
    if m < 0 || n < 0 {
        return 0;
    }
    binom(m as u64 + d - 1, d - 1) * binom(n as u64 + d - 1, d - 1)
}

/// `dim P_{m,n} - dim P_{m-1,n-1}`.
pub fn dmn(d: u64, m: u64, n: u64) -> u128 {
    dim_p(d, m as i64, n as i64) - dim_p(d, m as i64 - 1, n as i64 - 1)
}

/// `dim H_k(S^{N-1})` from the count of homogeneous polynomials in `N` real variables.
pub fn real_harmonic_dim(big_n: u64, k: u64) -> u128 {
    let hom = |j: i64| if j < 0 { 0 } else { binom(j as u64 + big_n - 1, big_n - 1) };
    hom(k as i64) - hom(k as i64 - 2)
}

pub fn compositions(d: usize, k: u32) -> Vec<Vec<u32>> {
    if d == 1 {
        return vec![vec![k]];
    }
    let mut out = Vec::new();
    for first in 0..=k {
        for mut rest in compositions(d - 1, k - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Exact rank by fraction-free Gaussian elimination.
pub fn bareiss_rank(mut a: Vec<Vec<BigInt>>) -> usize {
    let rows = a.len();
    if rows == 0 {
        return 0;
    }
    let cols = a[0].len();
    let mut rank = 0;
    let mut prev = BigInt::one();
    for c in 0..cols {
        let Some(piv) = (rank..rows).find(|&r| !a[r][c].is_zero()) else { continue };
        a.swap(rank, piv);
        for r in rank + 1..rows {
            for j in c + 1..cols {
                let v = &a[rank][c] * &a[r][j] - &a[r][c] * &a[rank][j];
                a[r][j] = v / &prev;
            }
            a[r][c] = BigInt::zero();
        }
        prev = a[rank][c].clone();
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// `dim ker Δ` on bihomogeneous polynomials of bidegree `(m, n)`, where
/// `Δ` acts on `z^a conj(z)^b` as `Σ_j a_j b_j z^{a-e_j} conj(z)^{b-e_j}` (up to the factor 4).
pub fn laplacian_kernel_dim(d: usize, m: u32, n: u32) -> u128 {
    let cols: Vec<(Vec<u32>, Vec<u32>)> = compositions(d, m)
        .into_iter()
        .flat_map(|a| compositions(d, n).into_iter().map(move |b| (a.clone(), b)))
        .collect();
    if m == 0 || n == 0 {
        return cols.len() as u128;
    }
    let mut row_index = BTreeMap::new();
    for a in compositions(d, m - 1) {
        for b in compositions(d, n - 1) {
            let k = row_index.len();
            row_index.insert((a.clone(), b), k);
        }
    }
    let mut mat = vec![vec![BigInt::zero(); cols.len()]; row_index.len()];
    for (c, (a, b)) in cols.iter().enumerate() {
        for j in 0..d {
            if a[j] > 0 && b[j] > 0 {
                let (mut a2, mut b2) = (a.clone(), b.clone());
                a2[j] -= 1;
                b2[j] -= 1;
                mat[row_index[&(a2, b2)]][c] += BigInt::from(a[j] * b[j]);
            }
        }
    }
    cols.len() as u128 - bareiss_rank(mat) as u128
}

/// Jacobi polynomial from its explicit binomial sum.
pub fn jacobi(n: u32, a: f64, b: f64, x: f64) -> f64 {
    let gbin = |top: f64, k: u32| (0..k).fold(1.0, |acc, i| acc * (top - i as f64) / (i + 1) as f64);
    (0..=n)
        .map(|s| {
            gbin(n as f64 + a, n - s) * gbin(n as f64 + b, s) * ((x - 1.0) / 2.0).powi(s as i32) * ((x + 1.0) / 2.0).powi((n - s) as i32)
        })
        .sum()
}

/// Disk polynomial `R^α_{m,n}` normalized by `R(1) = 1`.
pub fn disk_poly(m: u32, n: u32, alpha: f64, z: Complex64) -> Complex64 {
    if m < n {
        return disk_poly(n, m, alpha, z).conj();
    }
    let r2 = z.norm_sqr();
    let j = jacobi(n, alpha, (m - n) as f64, 2.0 * r2 - 1.0) / jacobi(n, alpha, (m - n) as f64, 1.0);
    z.powu(m - n) * j
}

/// Gegenbauer polynomial from its explicit sum.
pub fn gegenbauer(k: u32, lam: f64, x: f64) -> f64 {
    let rising = |a: f64, n: u32| (0..n).fold(1.0, |acc, i| acc * (a + i as f64));
    let fact = |n: u32| (1..=n).fold(1.0, |acc, i| acc * i as f64);
    (0..=k / 2)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * rising(lam, k - j) / (fact(j) * fact(k - 2 * j)) * (2.0 * x).powi((k - 2 * j) as i32)
        })
        .sum()
}

pub fn omega(d: u32) -> f64 {
    2.0 * std::f64::consts::PI.powi(d as i32) / (1..d).fold(1.0, |acc, i| acc * i as f64)
}

/// Sorted-spectrum width table: every bidegree with level at most `lmax`
/// contributes `λ(level)` with multiplicity `d_{m,n}`.
pub fn brute_width_table<F>(d: u64, lmax: u32, star: bool, n_max: usize, lam: F) -> Vec<f64>
where
    F: Fn(u32) -> f64,
{
    let mut spec: Vec<(f64, u128)> = Vec::new();
    for m in 0..=lmax {
        for n in 0..=lmax {
            let level = if star { m + n } else { m.max(n) };
            if level <= lmax {
                spec.push((lam(level), dmn(d, m as u64, n as u64)));
            }
        }
    }
    spec.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut out = Vec::with_capacity(n_max + 1);
    for (v, mult) in spec {
        if v == 0.0 {
            break;
        }
        for _ in 0..mult {
            if out.len() > n_max {
                return out;
            }
            out.push(v);
        }
    }
    out.truncate(n_max + 1);
    out
}

//! Dimension combinatorics for complex and real spherical harmonics.
//!
//! All counts are exact `u128` values with checked arithmetic.

use std::fmt;

use crate::error::{invalid, Error, Result};

/// Bidegree `(m, n)` of a complex spherical harmonic: degree `m` in `z` and
/// degree `n` in `conj(z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BiDegree {
    pub m: u32,
    pub n: u32,
}

impl BiDegree {
    pub const fn new(m: u32, n: u32) -> Self {
        Self { m, n }
    }

    pub fn swapped(self) -> Self {
        Self { m: self.n, n: self.m }
    }

    pub fn level(self, grading: Grading) -> u64 {
        match grading {
            Grading::Star => self.m as u64 + self.n as u64,
            Grading::Max => self.m.max(self.n) as u64,
        }
    }
}

impl fmt::Display for BiDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.m, self.n)
    }
}

/// Level function on bidegrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Grading {
    /// `|(m,n)| = m + n`
    Star,
    /// `|(m,n)| = max(m, n)`
    Max,
}

impl std::str::FromStr for Grading {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "star" => Ok(Grading::Star),
            "max" => Ok(Grading::Max),
            other => Err(invalid(format!("unknown grading '{other}' (expected star|max)"))),
        }
    }
}

impl fmt::Display for Grading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Grading::Star => "star",
            Grading::Max => "max",
        })
    }
}

/// Binomial coefficient with `binom(n, k) = 0` for `k < 0` or `k > n`.
pub fn binom(n: i64, k: i64) -> Result<u128> {
    if k < 0 || n < 0 || k > n {
        return Ok(0);
    }
    let k = k.min(n - k) as u128;
    let n = n as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = acc.checked_mul(n - i).ok_or(Error::Overflow("binomial"))? / (i + 1);
    }
    Ok(acc)
}

/// `dim H_{m,n}(Ω_d)`.
pub fn dim_complex_harmonic(d: u32, b: BiDegree) -> Result<u128> {
    if d < 2 {
        return Err(invalid(format!("complex dimension must be >= 2, got {d}")));
    }
    let (d, m, n) = (d as i64, b.m as i64, b.n as i64);
    let full = binom(m + d - 1, m)?
        .checked_mul(binom(n + d - 1, n)?)
        .ok_or(Error::Overflow("d_{m,n}"))?;
    let lower = binom(m + d - 2, m - 1)?
        .checked_mul(binom(n + d - 2, n - 1)?)
        .ok_or(Error::Overflow("d_{m,n}"))?;
    Ok(full - lower)
}

/// `dim P_{m,n}(C^d)`, the number of monomials `z^a conj(z)^b` with `|a| = m`, `|b| = n`.
pub fn dim_bihomogeneous(d: u32, b: BiDegree) -> Result<u128> {
    let (d, m, n) = (d as i64, b.m as i64, b.n as i64);
    binom(m + d - 1, m)?
        .checked_mul(binom(n + d - 1, n)?)
        .ok_or(Error::Overflow("dim P_{m,n}"))
}

/// Dimension of degree-`k` spherical harmonics on `S^{D-1} ⊂ R^D`.
pub fn dim_real_harmonic(real_dim: u32, k: u32) -> Result<u128> {
    if real_dim < 3 {
        return Err(invalid(format!("real dimension must be >= 3, got {real_dim}")));
    }
    let (dd, k) = (real_dim as i64, k as i64);
    Ok(binom(dd + k - 1, k)? - binom(dd + k - 3, k - 2)?)
}

/// Bidegrees at exactly level `l`, in lexicographic `(m, n)` order.
pub fn layer_members(l: u64, grading: Grading) -> Vec<BiDegree> {
    let l = l as u32;
    match grading {
        Grading::Star => (0..=l).map(|m| BiDegree::new(m, l - m)).collect(),
        Grading::Max => {
            let mut v: Vec<BiDegree> = (0..=l)
                .map(|m| BiDegree::new(m, l))
                .chain((0..l).map(|n| BiDegree::new(l, n)))
                .collect();
            v.sort();
            v
        }
    }
}

/// `d_l = dim H_l`, the total dimension of level `l`.
pub fn layer_dim(d: u32, l: u64, grading: Grading) -> Result<u128> {
    let cum = cumulative_dim(d, l, grading)?;
    if l == 0 {
        return Ok(cum);
    }
    Ok(cum - cumulative_dim(d, l - 1, grading)?)
}

/// `dim T_N = d_0 + ... + d_N`, in closed form.
///
/// Max grading: with `S_N = binom(N+d, d)` the bidegree sum telescopes to
/// `S_N^2 - S_{N-1}^2`. Star grading: polynomials of degree `<= N` on
/// `S^{2d-1}`, `binom(N+2d-1, 2d-1) + binom(N+2d-2, 2d-1)`.
pub fn cumulative_dim(d: u32, level: u64, grading: Grading) -> Result<u128> {
    if d < 2 {
        return Err(invalid(format!("complex dimension must be >= 2, got {d}")));
    }
    let n = i64::try_from(level).map_err(|_| Error::Overflow("dim T_N"))?;
    let d = d as i64;
    match grading {
        Grading::Max => {
            let s = binom(n + d, d)?;
            let s_prev = binom(n - 1 + d, d)?;
            let sq = |x: u128| x.checked_mul(x).ok_or(Error::Overflow("dim T_N"));
            Ok(sq(s)? - sq(s_prev)?)
        }
        Grading::Star => binom(n + 2 * d - 1, 2 * d - 1)?
            .checked_add(binom(n + 2 * d - 2, 2 * d - 1)?)
            .ok_or(Error::Overflow("dim T_N")),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerSummary {
    pub l: u64,
    pub members: Vec<BiDegree>,
    pub a_l: usize,
    pub d_l: u128,
    pub cum_dim: u128,
}

/// Summary of level `l`.
pub fn layer(d: u32, l: u64, grading: Grading) -> Result<LayerSummary> {
    let members = layer_members(l, grading);
    let d_l = layer_dim(d, l, grading)?;
    let cum_dim = cumulative_dim(d, l, grading)?;
    Ok(LayerSummary { l, a_l: members.len(), members, d_l, cum_dim })
}

/// All level summaries `0..=lmax`, computed incrementally.
pub fn layers(d: u32, lmax: u64, grading: Grading) -> Result<Vec<LayerSummary>> {
    let mut out = Vec::with_capacity(lmax as usize + 1);
    let mut cum = 0u128;
    for l in 0..=lmax {
        let members = layer_members(l, grading);
        let d_l = layer_dim(d, l, grading)?;
        cum = cum.checked_add(d_l).ok_or(Error::Overflow("dim T_N"))?;
        out.push(LayerSummary { l, a_l: members.len(), members, d_l, cum_dim: cum });
    }
    Ok(out)
}

/// `θ_{a,b} = Σ_{j=a+1}^{b} d_j`.
pub fn theta(d: u32, a: u64, b: u64, grading: Grading) -> Result<u128> {
    if a >= b {
        return Err(invalid(format!("theta needs a < b, got a={a}, b={b}")));
    }
    Ok(cumulative_dim(d, b, grading)? - cumulative_dim(d, a, grading)?)
}

/// One row of [`DimBoundsReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct DimBoundRow {
    pub l: u64,
    pub d_l: u128,
    pub cum_dim: u128,
    /// `d_l / l^{2d-2}`.
    pub ratio: f64,
    /// `(lead * l^{2d-2} - d_l) / l^{2d-3}`: the smallest `C_1` that works at this `l`.
    pub c1: f64,
    /// `(d_l - lead * l^{2d-2}) / l^{2d-3}`: the smallest `C_2` that works at this `l`.
    pub c2: f64,
    /// `(dim T_l - lead_T * l^{2d-1}) / l^{2d-2}`.
    pub c3: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimBoundsReport {
    pub d: u32,
    /// `2(2d-1) / (d!(d-1)!)`.
    pub leading_coefficient: f64,
    /// `2 / (d!(d-1)!)`.
    pub cumulative_leading_coefficient: f64,
    pub rows: Vec<DimBoundRow>,
    pub max_c1: f64,
    pub max_c2: f64,
    pub max_c3: f64,
    /// Levels where `dim T_l` fell below `lead_T * l^{2d-1}`.
    pub cumulative_lower_violations: usize,
    /// Bidegree bound `(m+n)(mn)^{d-2}/((d-1)!(d-2)!) <= d_{m,n} <= ... + C(m+n)m^{d-2}n^{d-3}`.
    pub bidegree: BidegreeBoundCheck,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BidegreeBoundCheck {
    /// `d = 2` has no `(d-2)!`-free form of the bound.
    Skipped { reason: String },
    Checked {
        pairs: usize,
        /// Pairs with `mn = 0`, excluded.
        skipped_pairs: usize,
        lower_violations: usize,
        smallest_admissible_c: f64,
    },
}

fn factorial_f64(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, j| acc * j as f64)
}

/// Checks the two-sided asymptotics of `dim H_l` and `dim T_N` under the max
/// grading over `l ∈ [lo, hi]`, plus the bidegree bound on `d_{m,n}` for
/// `1 <= m, n <= hi`.
pub fn check_dim_bounds(d: u32, lo: u64, hi: u64) -> Result<DimBoundsReport> {
    if d < 2 {
        return Err(invalid(format!("complex dimension must be >= 2, got {d}")));
    }
    if lo == 0 || lo > hi {
        return Err(invalid(format!("level range [{lo}, {hi}] must be nonempty and start at >= 1")));
    }
    let fd = factorial_f64(d) * factorial_f64(d - 1);
    let lead = 2.0 * (2.0 * d as f64 - 1.0) / fd;
    let lead_t = 2.0 / fd;
    let all = layers(d, hi, Grading::Max)?;
    let mut rows = Vec::new();
    let (mut max_c1, mut max_c2, mut max_c3) = (f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut cum_viol = 0;
    for s in &all[lo as usize..] {
        let l = s.l as f64;
        let p = 2 * d as i32 - 2;
        let main = lead * l.powi(p);
        let dl = s.d_l as f64;
        let c1 = (main - dl) / l.powi(p - 1);
        let c2 = (dl - main) / l.powi(p - 1);
        let cum_main = lead_t * l.powi(p + 1);
        let cum = s.cum_dim as f64;
        let c3 = (cum - cum_main) / l.powi(p);
        if cum < cum_main {
            cum_viol += 1;
        }
        max_c1 = max_c1.max(c1);
        max_c2 = max_c2.max(c2);
        max_c3 = max_c3.max(c3);
        rows.push(DimBoundRow { l: s.l, d_l: s.d_l, cum_dim: s.cum_dim, ratio: dl / l.powi(p), c1, c2, c3 });
    }
    let bidegree = if d == 2 {
        BidegreeBoundCheck::Skipped { reason: "d = 2: (d-2)! and (mn)^(d-2) degenerate".into() }
    } else {
        let denom = factorial_f64(d - 1) * factorial_f64(d - 2);
        let (mut pairs, mut skipped, mut viol) = (0, 0, 0);
        let mut cmax = f64::NEG_INFINITY;
        for m in 0..=hi as u32 {
            for n in 0..=hi as u32 {
                if m == 0 || n == 0 {
                    skipped += 1;
                    continue;
                }
                pairs += 1;
                let dmn = dim_complex_harmonic(d, BiDegree::new(m, n))? as f64;
                let (mf, nf) = (m as f64, n as f64);
                let base = (mf + nf) * (mf * nf).powi(d as i32 - 2) / denom;
                if dmn < base {
                    viol += 1;
                }
                let scale = (mf + nf) * mf.powi(d as i32 - 2) * nf.powi(d as i32 - 3);
                cmax = cmax.max((dmn - base) / scale);
            }
        }
        BidegreeBoundCheck::Checked {
            pairs,
            skipped_pairs: skipped,
            lower_violations: viol,
            smallest_admissible_c: cmax.max(0.0),
        }
    };
    Ok(DimBoundsReport {
        d,
        leading_coefficient: lead,
        cumulative_leading_coefficient: lead_t,
        rows,
        max_c1,
        max_c2,
        max_c3,
        cumulative_lower_violations: cum_viol,
        bidegree,
    })
}

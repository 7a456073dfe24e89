//! Exact `L^2 -> L^2` Kolmogorov widths of multiplier operators, rate fits,
//! and the structural factors of the width estimates for general `(p, q)`.
//!
//! In Hilbert space the width `d_n` of a diagonal operator is its `(n+1)`-st
//! largest singular value, so a width table is the sorted multiplier spectrum
//! with each level repeated by its dimension.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::dims::{cumulative_dim, dim_real_harmonic, layer_dim, Grading};
use crate::error::{invalid, Error, Result};
use crate::multipliers::{FamilyKind, MultiplierFamily};

/// Highest level enumerated when building a table.
pub const LEVEL_GUARD: u64 = 1000;
/// Smallest index used by the default fit range.
pub const DEFAULT_FIT_START: f64 = 1e3;

/// `(n, d_n)` for `n = 0..entries.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct WidthTable {
    pub d: u32,
    pub family: Option<MultiplierFamily>,
    pub entries: Vec<f64>,
    /// All widths are equal: the operator is not compact.
    pub non_compact: bool,
    /// The spectrum ran out of nonzero values before `n_max`.
    pub truncated: bool,
}

impl WidthTable {
    pub fn get(&self, n: usize) -> Option<f64> {
        self.entries.get(n).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Expands `(value, multiplicity)` pairs into the first `n_max + 1` widths,
/// largest absolute value first. Stops early at the first zero.
pub fn widths_from_spectrum(mut spectrum: Vec<(f64, u128)>, n_max: usize) -> Result<(Vec<f64>, bool)> {
    if spectrum.iter().any(|(v, _)| !v.is_finite()) {
        return Err(Error::Data("non-finite multiplier value".into()));
    }
    spectrum.iter_mut().for_each(|(v, _)| *v = v.abs());
    spectrum.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut out = Vec::with_capacity(n_max + 1);
    for (v, mult) in spectrum {
        if v == 0.0 {
            return Ok((out, true));
        }
        let room = (n_max + 1 - out.len()) as u128;
        let take = mult.min(room) as usize;
        out.extend(std::iter::repeat_n(v, take));
        if out.len() > n_max {
            return Ok((out, false));
        }
    }
    Ok((out, true))
}

fn table_from_levels<F>(fam: &MultiplierFamily, n_max: usize, mult: F) -> Result<WidthTable>
where
    F: Fn(u64) -> Result<u128>,
{
    if n_max < 1 {
        return Err(invalid("n_max must be >= 1"));
    }
    let mut spectrum = Vec::new();
    let mut cum = 0u128;
    let mut l = 0u64;
    while cum <= n_max as u128 {
        if l > LEVEL_GUARD {
            return Err(Error::Infeasible(format!("n_max = {n_max} needs levels beyond {LEVEL_GUARD}")));
        }
        let m = mult(l)?;
        spectrum.push((fam.at_level(l)?, m));
        cum += m;
        l += 1;
    }
    // Later levels only matter if they beat the current (n_max+1)-st value.
    let (head, _) = widths_from_spectrum(spectrum.clone(), n_max)?;
    let cutoff = head.last().copied().unwrap_or(0.0);
    while l <= LEVEL_GUARD {
        let v = fam.at_level(l)?.abs();
        if v <= cutoff {
            break;
        }
        spectrum.push((v, mult(l)?));
        l += 1;
    }
    let (entries, truncated) = widths_from_spectrum(spectrum, n_max)?;
    Ok(WidthTable { d: fam.d, non_compact: fam.is_identity(), family: Some(fam.clone()), entries, truncated })
}

/// Width table `d_0..=d_{n_max}` of `Λ: L^2(Ω_d) -> L^2(Ω_d)`.
pub fn l2_width_table(fam: &MultiplierFamily, n_max: usize) -> Result<WidthTable> {
    table_from_levels(fam, n_max, |l| layer_dim(fam.d, l, fam.grading))
}

/// Star-grading table built from the real-sphere multiplicities
/// `dim H_k(S^{2d-1})` instead of the complex bidegree sums.
pub fn l2_width_table_real_sphere(fam: &MultiplierFamily, n_max: usize) -> Result<WidthTable> {
    if fam.grading != Grading::Star {
        return Err(invalid("the real-sphere table exists for the star grading only"));
    }
    let k_of = |l: u64| u32::try_from(l).map_err(|_| Error::Overflow("level"));
    table_from_levels(fam, n_max, |l| dim_real_harmonic(2 * fam.d, k_of(l)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitModel {
    /// `ln d_n = c + a ln n`
    Power,
    /// `ln d_n = c + a ln n + b ln ln n`
    PowerLog,
    /// `ln d_n = c + a n^{exponent}`
    Stretched { exponent: f64 },
}

impl fmt::Display for FitModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitModel::Power => f.write_str("power"),
            FitModel::PowerLog => f.write_str("power_log"),
            FitModel::Stretched { exponent } => write!(f, "stretched({exponent})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: FitModel,
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of `ln ln n` for [`FitModel::PowerLog`].
    pub log_coefficient: Option<f64>,
    pub range: (f64, f64),
    pub points: usize,
    pub residual_rms: f64,
}

/// Plateau midpoints `(n, d_n)` with `lo <= n <= hi`.
///
/// A run that reaches the end of the table may be cut short, so it is left
/// out unless it is the only run.
pub fn plateau_midpoints(entries: &[f64], lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < entries.len() {
        let mut end = start;
        while end + 1 < entries.len() && entries[end + 1] == entries[start] {
            end += 1;
        }
        let last = end + 1 == entries.len();
        if !last || start == 0 {
            let mid = (start + end) as f64 / 2.0;
            if mid >= lo && mid <= hi && mid > 0.0 {
                out.push((mid, entries[start]));
            }
        }
        start = end + 1;
    }
    out
}

fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Result<(Vec<f64>, f64)> {
    let k = rows[0].len();
    let x = DMatrix::from_fn(rows.len(), k, |i, j| rows[i][j]);
    let yv = DVector::from_column_slice(y);
    let svd = x.clone().svd(true, true);
    let beta = svd.solve(&yv, 1e-14).map_err(|e| Error::Range(format!("least squares failed: {e}")))?;
    let resid = &yv - &x * &beta;
    let rms = (resid.norm_squared() / y.len() as f64).sqrt();
    Ok((beta.iter().copied().collect(), rms))
}

fn fit_points(entries: &[f64], range: (f64, f64)) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = range;
    if !(lo >= 1.0) || !(hi > lo) {
        return Err(Error::Range(format!("fit range [{lo}, {hi}] must satisfy 1 <= lo < hi")));
    }
    let hi_idx = (hi.floor() as usize).min(entries.len().saturating_sub(1));
    if entries[lo.ceil() as usize..=hi_idx.max(lo.ceil() as usize).min(entries.len() - 1)]
        .iter()
        .any(|v| *v <= 0.0)
    {
        return Err(Error::Range("fit range contains zero widths".into()));
    }
    let pts = plateau_midpoints(entries, lo, hi);
    if pts.len() < 20 {
        return Err(Error::Range(format!("fit range has {} plateau points, need >= 20", pts.len())));
    }
    Ok(pts)
}

/// Log-log regression of the widths, optionally with a `ln ln n` term.
pub fn fit_power(entries: &[f64], range: (f64, f64), with_log_factor: bool) -> Result<FitResult> {
    if entries.is_empty() || range.0 as usize >= entries.len() {
        return Err(Error::Range("fit range lies outside the table".into()));
    }
    let pts = fit_points(entries, range)?;
    let rows: Vec<Vec<f64>> = pts
        .iter()
        .map(|(n, _)| {
            let ln = n.ln();
            if with_log_factor {
                vec![1.0, ln, ln.ln()]
            } else {
                vec![1.0, ln]
            }
        })
        .collect();
    let y: Vec<f64> = pts.iter().map(|(_, v)| v.ln()).collect();
    let (beta, rms) = least_squares(&rows, &y)?;
    Ok(FitResult {
        model: if with_log_factor { FitModel::PowerLog } else { FitModel::Power },
        slope: beta[1],
        intercept: beta[0],
        log_coefficient: with_log_factor.then(|| beta[2]),
        range,
        points: pts.len(),
        residual_rms: rms,
    })
}

/// Second stage of a two-stage fit: with the power exponent `slope` fixed
/// (from a first-stage fit), regresses `ln d_n - slope ln n` on `ln ln n`.
/// `log_coefficient` then estimates `-ξ`.
pub fn fit_log_factor(entries: &[f64], range: (f64, f64), slope: f64) -> Result<FitResult> {
    if !slope.is_finite() {
        return Err(invalid("fixed slope must be finite"));
    }
    if entries.is_empty() || range.0 as usize >= entries.len() {
        return Err(Error::Range("fit range lies outside the table".into()));
    }
    let pts = fit_points(entries, (range.0.max(3.0), range.1))?;
    let rows: Vec<Vec<f64>> = pts.iter().map(|(n, _)| vec![1.0, n.ln().ln()]).collect();
    let y: Vec<f64> = pts.iter().map(|(n, v)| v.ln() - slope * n.ln()).collect();
    let (beta, rms) = least_squares(&rows, &y)?;
    Ok(FitResult {
        model: FitModel::PowerLog,
        slope,
        intercept: beta[0],
        log_coefficient: Some(beta[1]),
        range,
        points: pts.len(),
        residual_rms: rms,
    })
}

/// Regression of `ln d_n` on `n^{r/(2d-1)}`; the slope estimates `-R`.
pub fn fit_stretched(entries: &[f64], d: u32, r: f64, range: (f64, f64)) -> Result<FitResult> {
    if d < 1 || !(r > 0.0) {
        return Err(invalid("stretched fit needs d >= 1 and r > 0"));
    }
    if entries.is_empty() || range.0 as usize >= entries.len() {
        return Err(Error::Range("fit range lies outside the table".into()));
    }
    let exponent = r / (2.0 * d as f64 - 1.0);
    let pts = fit_points(entries, range)?;
    let rows: Vec<Vec<f64>> = pts.iter().map(|(n, _)| vec![1.0, n.powf(exponent)]).collect();
    let y: Vec<f64> = pts.iter().map(|(_, v)| v.ln()).collect();
    let (beta, rms) = least_squares(&rows, &y)?;
    Ok(FitResult {
        model: FitModel::Stretched { exponent },
        slope: beta[1],
        intercept: beta[0],
        log_coefficient: None,
        range,
        points: pts.len(),
        residual_rms: rms,
    })
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// `R = γ (d!(d-1)!/2)^{r/(2d-1)}`, the decay constant under the max grading.
pub fn rate_constant_max(d: u32, gamma: f64, r: f64) -> f64 {
    gamma * (factorial(d) * factorial(d - 1) / 2.0).powf(r / (2.0 * d as f64 - 1.0))
}

/// `R* = γ ((2d-1)!/2)^{r/(2d-1)}`, the decay constant under the star grading.
pub fn rate_constant_star(d: u32, gamma: f64, r: f64) -> f64 {
    gamma * (factorial(2 * d - 1) / 2.0).powf(r / (2.0 * d as f64 - 1.0))
}

/// Which width estimate to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// Sobolev classes, cases `'a'..='i'`.
    Sobolev(char),
    /// Finitely smooth family, star grading, upper estimate.
    FsStarUpper,
    /// Finitely smooth family, star grading, lower estimate.
    FsStarLower,
    /// Finitely smooth family, max grading, upper estimate.
    FsMaxUpper,
    /// Finitely smooth family, max grading, lower estimate.
    FsMaxLower,
    /// Analytic family, max grading, lower estimate.
    ExpMaxLower,
    /// Analytic family, max grading, upper estimate.
    ExpMaxUpper,
    /// Analytic family, star grading, lower estimate.
    ExpStarLower,
    /// Analytic family, star grading, upper estimate.
    ExpStarUpper,
}

impl FromStr for BoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(c) = s.strip_prefix("sobolev-") {
            let mut chars = c.chars();
            return match (chars.next(), chars.next()) {
                (Some(ch @ 'a'..='i'), None) => Ok(BoundKind::Sobolev(ch)),
                _ => Err(invalid(format!("unknown Sobolev case '{c}' (expected a..i)"))),
            };
        }
        Ok(match s {
            "fs-star-upper" => BoundKind::FsStarUpper,
            "fs-star-lower" => BoundKind::FsStarLower,
            "fs-max-upper" => BoundKind::FsMaxUpper,
            "fs-max-lower" => BoundKind::FsMaxLower,
            "exp-max-lower" => BoundKind::ExpMaxLower,
            "exp-max-upper" => BoundKind::ExpMaxUpper,
            "exp-star-lower" => BoundKind::ExpStarLower,
            "exp-star-upper" => BoundKind::ExpStarUpper,
            other => return Err(invalid(format!("unknown bound '{other}'"))),
        })
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundKind::Sobolev(c) => write!(f, "sobolev-{c}"),
            BoundKind::FsStarUpper => f.write_str("fs-star-upper"),
            BoundKind::FsStarLower => f.write_str("fs-star-lower"),
            BoundKind::FsMaxUpper => f.write_str("fs-max-upper"),
            BoundKind::FsMaxLower => f.write_str("fs-max-lower"),
            BoundKind::ExpMaxLower => f.write_str("exp-max-lower"),
            BoundKind::ExpMaxUpper => f.write_str("exp-max-upper"),
            BoundKind::ExpStarLower => f.write_str("exp-star-lower"),
            BoundKind::ExpStarUpper => f.write_str("exp-star-upper"),
        }
    }
}

/// A width estimate with its parameters. `xi` applies to the finitely smooth
/// family and `r` to the analytic one; `p`, `q` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSpec {
    pub kind: BoundKind,
    pub d: u32,
    pub gamma: f64,
    pub xi: f64,
    pub r: f64,
    pub p: f64,
    pub q: f64,
}

/// Structural factors of a width estimate at index `m`, without the unknown
/// absolute constants.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundValue {
    pub kind: BoundKind,
    pub m: u64,
    /// Width index the estimate refers to (differs from `m` for the
    /// `r > 1` forms, which bound `d_{φ_m}` or `d_{[ψ_m]}`).
    pub width_index: u64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    /// `("R", value)` or `("R*", value)` for the analytic family.
    pub constant: Option<(&'static str, f64)>,
}

fn pos(x: f64) -> f64 {
    x.max(0.0)
}

fn hyp(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Hypothesis(what.to_string()))
    }
}

/// The `(p, q)` selector shared by the lower estimates: 1, or `(ln m)^{-1/2}`.
fn log_selector(p: f64, q: f64, ln_m: f64) -> Result<f64> {
    let one = ((1.0..=2.0).contains(&p) && q > 1.0 && q <= 2.0)
        || ((2.0..f64::INFINITY).contains(&p) && q >= 2.0)
        || ((1.0..=2.0).contains(&p) && q >= 2.0);
    if one {
        return Ok(1.0);
    }
    let half = ((1.0..=2.0).contains(&p) && q == 1.0) || (p == f64::INFINITY && q >= 2.0);
    if half {
        return Ok(ln_m.powf(-0.5));
    }
    Err(Error::Hypothesis(format!("no selector case covers p={p}, q={q}")))
}

/// Evaluates the structural factor(s) of `spec` at index `m >= 2`.
pub fn bound_eval(spec: &BoundSpec, m: u64) -> Result<BoundValue> {
    let BoundSpec { kind, d, gamma, xi, r, p, q } = *spec;
    if d < 2 {
        return Err(invalid("d must be >= 2"));
    }
    if m < 2 {
        return Err(invalid("index m must be >= 2 (the estimates involve ln m)"));
    }
    if !(p >= 1.0) || !(q >= 1.0) {
        return Err(invalid("p and q must be >= 1"));
    }
    if !(gamma > 0.0) {
        return Err(Error::Hypothesis("gamma > 0".into()));
    }
    let dd = 2.0 * d as f64 - 1.0;
    let mf = m as f64;
    let ln_m = mf.ln();
    let base = mf.powf(-gamma / dd);
    let rp = 1.0 / p;
    let rq = 1.0 / q;
    let q_factor = if q.is_finite() { q.sqrt() } else { ln_m.sqrt() };
    let value = |lower: Option<f64>, upper: Option<f64>| BoundValue {
        kind,
        m,
        width_index: m,
        lower,
        upper,
        constant: None,
    };
    match kind {
        BoundKind::Sobolev(c) => {
            let eq_or = |cond: bool| cond || (p == q);
            let (lo, hi) = match c {
                'a' => {
                    hyp(eq_or(2.0 <= q && q <= p && p.is_finite()), "p = q, or 2 <= q <= p < inf")?;
                    (base, base)
                }
                'b' => {
                    hyp(eq_or(2.0 <= q && q <= p), "p = q, or 2 <= q <= p <= inf")?;
                    (base * ln_m.powf(-0.5), base)
                }
                'c' => {
                    hyp(2.0 <= q && q <= p && p.is_finite(), "2 <= q <= p < inf")?;
                    hyp(gamma / dd > 0.5, "gamma/(2d-1) > 1/2")?;
                    (base, base)
                }
                'd' => {
                    hyp(2.0 <= q && q <= p, "2 <= q <= p <= inf")?;
                    hyp(gamma / dd > 0.5, "gamma/(2d-1) > 1/2")?;
                    (base, base * ln_m.sqrt())
                }
                'e' => {
                    hyp(p <= q && q <= 2.0, "1 <= p <= q <= 2")?;
                    hyp(gamma / dd > rp - rq, "gamma/(2d-1) > 1/p - 1/q")?;
                    let v = base * mf.powf(rp - rq);
                    (v, v)
                }
                'f' => {
                    hyp(p <= q && q <= 2.0, "1 <= p <= q <= 2")?;
                    (base, base)
                }
                'g' => {
                    hyp(p <= q && q <= 2.0, "1 <= p <= q <= 2")?;
                    (base * ln_m.powf(-0.5), base)
                }
                'h' => {
                    hyp(p <= 2.0 && 2.0 <= q && q.is_finite(), "1 <= p <= 2 <= q < inf")?;
                    hyp(gamma / dd > rp, "gamma/(2d-1) > 1/p")?;
                    let v = base * mf.powf(rp - 0.5);
                    (v, v)
                }
                'i' => {
                    hyp(p <= 2.0 && 2.0 <= q, "1 <= p <= 2 <= q <= inf")?;
                    hyp(gamma / dd > rp, "gamma/(2d-1) > 1/p")?;
                    let v = base * mf.powf(rp - 0.5);
                    (v, v * ln_m.sqrt())
                }
                other => return Err(invalid(format!("unknown Sobolev case '{other}'"))),
            };
            Ok(value(Some(lo), Some(hi)))
        }
        BoundKind::FsStarUpper | BoundKind::FsMaxUpper => {
            hyp(q >= 2.0, "2 <= q <= inf")?;
            if kind == BoundKind::FsStarUpper {
                hyp(gamma / dd > rp, "gamma/(2d-1) > 1/p")?;
            } else if p <= 2.0 {
                hyp(gamma > dd * rp, "gamma > (2d-1)/p for p <= 2")?;
            } else {
                hyp(gamma > dd / 2.0, "gamma > (2d-1)/2 for p >= 2")?;
            }
            let v = base * mf.powf(pos(rp - 0.5)) * ln_m.powf(-xi) * q_factor;
            Ok(value(None, Some(v)))
        }
        BoundKind::FsStarLower | BoundKind::FsMaxLower => {
            if kind == BoundKind::FsStarLower {
                hyp(gamma / dd > rp - rq, "gamma/(2d-1) > 1/p - 1/q")?;
            } else {
                hyp(gamma > dd / 2.0, "gamma > (2d-1)/2")?;
            }
            let v = base * ln_m.powf(-xi) * log_selector(p, q, ln_m)?;
            Ok(value(Some(v), None))
        }
        BoundKind::ExpMaxLower => {
            hyp(r > 0.0, "r > 0")?;
            let big_r = rate_constant_max(d, gamma, r);
            let sel = log_selector(p, q, ln_m)?;
            let mut out = if r <= 1.0 {
                value(Some((-big_r * mf.powf(r / dd)).exp() * sel), None)
            } else {
                // d_{[ψ_k]} >> exp(-R φ_k^{r/(2d-1)}) κ_k with φ_k = dim T_k
                let phi = cumulative_dim(d, m, Grading::Max)? as f64;
                let psi = phi - phi.powf(1.0 - r / dd) - 1.0;
                let mut v = value(Some((-big_r * phi.powf(r / dd)).exp() * sel), None);
                v.width_index = psi.max(0.0).floor() as u64;
                v
            };
            out.constant = Some(("R", big_r));
            Ok(out)
        }
        BoundKind::ExpMaxUpper => {
            hyp(r > 0.0, "r > 0")?;
            hyp(q >= 2.0, "2 <= q <= inf")?;
            let big_r = rate_constant_max(d, gamma, r);
            let mut out = if r <= 1.0 {
                let qf = if q.is_finite() { 1.0 } else { ln_m.sqrt() };
                let v = (-big_r * mf.powf(r / dd)).exp() * mf.powf((1.0 - r / dd) * pos(rp - 0.5)) * qf;
                value(None, Some(v))
            } else {
                let poly = if p <= 2.0 {
                    mf.powf((dd - 1.0) * (rp - rq))
                } else {
                    mf.powf((dd - 1.0) * (0.5 - rq))
                };
                let mut v = value(None, Some((-gamma * mf.powf(r)).exp() * poly));
                v.width_index = u64::try_from(cumulative_dim(d, m, Grading::Max)?).map_err(|_| Error::Overflow("φ_k"))?;
                v
            };
            out.constant = Some(("R", big_r));
            Ok(out)
        }
        BoundKind::ExpStarLower | BoundKind::ExpStarUpper => {
            hyp(r > 0.0 && r <= 1.0, "0 < r <= 1")?;
            let big_r = rate_constant_star(d, gamma, r);
            let decay = (-big_r * mf.powf(r / dd)).exp();
            let mut out = if kind == BoundKind::ExpStarLower {
                value(Some(decay * log_selector(p, q, ln_m)?), None)
            } else {
                hyp(q >= 2.0, "2 <= q <= inf")?;
                value(None, Some(decay * mf.powf((1.0 - r / dd) * pos(rp - 0.5)) * q_factor))
            };
            out.constant = Some(("R*", big_r));
            Ok(out)
        }
    }
}

/// Star versus max grading for one multiplier function.
#[derive(Debug, Clone, PartialEq)]
pub struct GradingComparison {
    pub d: u32,
    pub kind: FamilyKind,
    pub non_compact: bool,
    pub star: Option<FitResult>,
    pub max: Option<FitResult>,
    /// `star.slope / max.slope`.
    pub slope_ratio: Option<f64>,
    /// `R*/R` for the analytic family, 1 otherwise.
    pub expected_ratio: Option<f64>,
}

impl GradingComparison {
    /// Slopes differ by at most `tol` (power fits) or their ratio is within
    /// relative `tol` of the expected one (stretched fits).
    pub fn agrees(&self, tol: f64) -> Option<bool> {
        let (s, m) = (self.star.as_ref()?, self.max.as_ref()?);
        match s.model {
            FitModel::Stretched { .. } => {
                let expected = self.expected_ratio?;
                Some(((s.slope / m.slope) / expected - 1.0).abs() <= tol)
            }
            _ => Some((s.slope - m.slope).abs() <= tol),
        }
    }
}

/// Fits both gradings of `kind` over `[10^3, n_max]` and compares the rates.
pub fn grading_compare(kind: &FamilyKind, d: u32, n_max: usize) -> Result<GradingComparison> {
    let star_f = MultiplierFamily::new(kind.clone(), Grading::Star, d)?;
    let max_f = MultiplierFamily::new(kind.clone(), Grading::Max, d)?;
    if star_f.is_identity() {
        return Ok(GradingComparison {
            d,
            kind: kind.clone(),
            non_compact: true,
            star: None,
            max: None,
            slope_ratio: None,
            expected_ratio: None,
        });
    }
    let range = (DEFAULT_FIT_START, n_max as f64);
    let st = l2_width_table(&star_f, n_max)?;
    let mt = l2_width_table(&max_f, n_max)?;
    let (star, max, expected) = match kind {
        FamilyKind::ExpAnalytic { gamma, r } => (
            fit_stretched(&st.entries, d, *r, range)?,
            fit_stretched(&mt.entries, d, *r, range)?,
            rate_constant_star(d, *gamma, *r) / rate_constant_max(d, *gamma, *r),
        ),
        _ => (fit_power(&st.entries, range, false)?, fit_power(&mt.entries, range, false)?, 1.0),
    };
    Ok(GradingComparison {
        d,
        kind: kind.clone(),
        non_compact: false,
        slope_ratio: Some(star.slope / max.slope),
        star: Some(star),
        max: Some(max),
        expected_ratio: Some(expected),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn fam(s: &str, g: Grading) -> MultiplierFamily {
        MultiplierFamily::new(s.parse().unwrap(), g, 2).unwrap()
    }

    #[test]
    fn identity_table_is_constant() {
        let t = l2_width_table(&fam("id", Grading::Max), 50).unwrap();
        assert!(t.non_compact);
        assert_eq!(t.len(), 51);
        assert!(t.entries.iter().all(|v| *v == 1.0));
    }

    #[test]
    fn exp_star_table() {
        let t = l2_width_table(&fam("exp:gamma=1,r=1", Grading::Star), 13).unwrap();
        let e1 = (-1.0f64).exp();
        let e2 = (-2.0f64).exp();
        assert_eq!(t.entries[0], 1.0);
        assert!(t.entries[1..=4].iter().all(|v| *v == e1));
        assert!(t.entries[5..=13].iter().all(|v| *v == e2));
    }

    #[test]
    fn sobolev_star_table() {
        let t = l2_width_table(&fam("sobolev:gamma=2", Grading::Star), 12).unwrap();
        assert!(t.entries[0..=3].iter().all(|v| (*v - 1.0 / 3.0).abs() < 1e-15));
        assert!(t.entries[4..=12].iter().all(|v| (*v - 1.0 / 8.0).abs() < 1e-15));
    }

    #[test]
    fn hand_expanded_table() {
        let (w, truncated) = widths_from_spectrum(vec![(0.5, 2), (1.0, 1), (0.25, 3)], 10).unwrap();
        assert_eq!(w, vec![1.0, 0.5, 0.5, 0.25, 0.25, 0.25]);
        assert!(truncated);
        let (w, truncated) = widths_from_spectrum(vec![(0.5, 2), (0.0, 5), (1.0, 1)], 10).unwrap();
        assert_eq!(w, vec![1.0, 0.5, 0.5]);
        assert!(truncated);
    }

    #[test]
    fn zeros_truncate() {
        let t = l2_width_table(&fam("table:1,0.5,0,0,0,0", Grading::Max), 30).unwrap();
        assert!(t.truncated);
        assert_eq!(t.len(), 8);
    }

    #[test]
    fn synthetic_fits() {
        let power: Vec<f64> = (0..5000).map(|n| if n == 0 { 1.0 } else { 1.0 / n as f64 }).collect();
        let f = fit_power(&power, (10.0, 4999.0), false).unwrap();
        assert_abs_diff_eq!(f.slope, -1.0, epsilon = 1e-10);
        let st: Vec<f64> = (0..5000).map(|n| (-2.0 * (n as f64).powf(1.0 / 3.0)).exp()).collect();
        let f = fit_stretched(&st, 2, 1.0, (10.0, 4999.0)).unwrap();
        assert_abs_diff_eq!(f.slope, -2.0, epsilon = 1e-10);
    }

    #[test]
    fn fit_errors() {
        let few: Vec<f64> = (0..10).map(|n| 1.0 / (n + 1) as f64).collect();
        assert!(matches!(fit_power(&few, (1.0, 9.0), false), Err(Error::Range(_))));
        let mut zeros: Vec<f64> = (0..100).map(|n| 1.0 / (n + 1) as f64).collect();
        zeros[50] = 0.0;
        assert!(matches!(fit_power(&zeros, (1.0, 99.0), false), Err(Error::Range(_))));
    }

    #[test]
    fn constants() {
        assert_abs_diff_eq!(rate_constant_max(2, 1.0, 1.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rate_constant_star(2, 1.0, 1.0), 3f64.powf(1.0 / 3.0), epsilon = 1e-15);
        let spec = BoundSpec { kind: BoundKind::ExpMaxLower, d: 2, gamma: 1.0, xi: 0.0, r: 1.0, p: 2.0, q: 2.0 };
        assert_eq!(bound_eval(&spec, 10).unwrap().constant.unwrap().1, 1.0);
        let spec = BoundSpec { kind: BoundKind::ExpStarLower, ..spec };
        assert_abs_diff_eq!(bound_eval(&spec, 10).unwrap().constant.unwrap().1, 1.44224957, epsilon = 1e-8);
    }

    #[test]
    fn fs_star_upper_example() {
        let spec = BoundSpec { kind: BoundKind::FsStarUpper, d: 2, gamma: 3.0, xi: 0.0, r: 0.0, p: 2.0, q: 2.0 };
        let v = bound_eval(&spec, 10_000).unwrap();
        assert_abs_diff_eq!(v.upper.unwrap(), 2f64.sqrt() * 1e-4, epsilon = 1e-18);
    }

    #[test]
    fn hypotheses_are_enforced() {
        let spec = BoundSpec { kind: BoundKind::FsStarUpper, d: 2, gamma: 1.0, xi: 0.0, r: 0.0, p: 1.0, q: 2.0 };
        assert!(matches!(bound_eval(&spec, 100), Err(Error::Hypothesis(_))));
        let spec = BoundSpec { kind: BoundKind::Sobolev('h'), p: 1.0, q: f64::INFINITY, gamma: 5.0, ..spec };
        assert!(matches!(bound_eval(&spec, 100), Err(Error::Hypothesis(_))));
        let spec = BoundSpec { kind: BoundKind::Sobolev('i'), ..spec };
        let v = bound_eval(&spec, 100).unwrap();
        assert!(v.lower.unwrap() < v.upper.unwrap());
        let spec = BoundSpec { kind: BoundKind::ExpStarLower, r: 2.0, ..spec };
        assert!(matches!(bound_eval(&spec, 100), Err(Error::Hypothesis(_))));
        let spec = BoundSpec { kind: BoundKind::FsMaxLower, p: 1.5, q: 1.5, ..spec };
        assert!(bound_eval(&spec, 100).is_ok());
    }

    #[test]
    fn r_above_one_uses_layer_indices() {
        let spec = BoundSpec { kind: BoundKind::ExpMaxUpper, d: 2, gamma: 1.0, xi: 0.0, r: 2.0, p: 2.0, q: 2.0 };
        let v = bound_eval(&spec, 3).unwrap();
        assert_eq!(v.width_index, 64);
        assert_abs_diff_eq!(v.upper.unwrap(), (-9.0f64).exp(), epsilon = 1e-18);
    }

    #[test]
    fn parse_kinds() {
        for s in ["sobolev-a", "sobolev-i", "fs-star-upper", "exp-max-lower"] {
            assert_eq!(s.parse::<BoundKind>().unwrap().to_string(), s);
        }
        assert!("sobolev-j".parse::<BoundKind>().is_err());
        assert!("nope".parse::<BoundKind>().is_err());
    }

    #[test]
    fn transfer_tables_match() {
        for d in 2..=4 {
            let f = MultiplierFamily::new("exp:gamma=0.5,r=1".parse().unwrap(), Grading::Star, d).unwrap();
            let a = l2_width_table(&f, 5000).unwrap();
            let b = l2_width_table_real_sphere(&f, 5000).unwrap();
            assert_eq!(a.entries, b.entries);
        }
    }

    #[test]
    fn identity_comparison_is_non_compact() {
        let c = grading_compare(&FamilyKind::Identity, 2, 100).unwrap();
        assert!(c.non_compact && c.star.is_none());
    }
}

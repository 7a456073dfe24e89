//! Multiplier families `λ`, their action on coefficient vectors, and the
//! level sequences `N_k`, `m_k`, `β` behind the width upper bounds.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::dims::{cumulative_dim, dim_complex_harmonic, theta, BiDegree, Grading};
use crate::error::{invalid, Error, Result};

/// Upper limit on the number of levels scanned when looking for `N_{k+1}`.
pub const SCAN_LIMIT: u64 = 1_000_000;
const SCAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum FamilyKind {
    /// `(t(t+2d-2))^{-γ/2}`, zero at `t = 0`.
    Sobolev { gamma: f64 },
    /// `t^{-γ} (ln t)^{-ξ}` for `t > 1`, zero on `[0, 1]`.
    FiniteSmooth { gamma: f64, xi: f64 },
    /// `exp(-γ t^r)`.
    ExpAnalytic { gamma: f64, r: f64 },
    Identity,
    /// Value per integer level.
    Table(Vec<f64>),
}

impl FamilyKind {
    fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(format!("{name} must be finite and > 0, got {v}")))
            }
        };
        match self {
            FamilyKind::Sobolev { gamma } => pos("gamma", *gamma),
            FamilyKind::FiniteSmooth { gamma, xi } => {
                pos("gamma", *gamma)?;
                if xi.is_finite() && *xi >= 0.0 {
                    Ok(())
                } else {
                    Err(invalid(format!("xi must be finite and >= 0, got {xi}")))
                }
            }
            FamilyKind::ExpAnalytic { gamma, r } => {
                pos("gamma", *gamma)?;
                pos("r", *r)
            }
            FamilyKind::Identity => Ok(()),
            FamilyKind::Table(v) => {
                if v.iter().all(|x| x.is_finite()) {
                    Ok(())
                } else {
                    Err(invalid("table values must be finite"))
                }
            }
        }
    }
}

fn parse_params(s: &str) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| invalid(format!("expected key=value, got '{part}'")))?;
        let v: f64 = v.trim().parse().map_err(|_| invalid(format!("bad number in '{part}'")))?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}

fn take(params: &mut BTreeMap<String, f64>, key: &str, default: Option<f64>) -> Result<f64> {
    params.remove(key).or(default).ok_or_else(|| invalid(format!("missing parameter '{key}'")))
}

impl FromStr for FamilyKind {
    type Err = Error;

    /// Grammar: `sobolev:gamma=2`, `fs:gamma=3,xi=0.5`, `exp:gamma=1,r=0.5`,
    /// `id`, `table:1,0.5,0.25`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        if name == "table" {
            let values = rest
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| invalid(format!("bad table value '{v}'"))))
                .collect::<Result<Vec<_>>>()?;
            let kind = FamilyKind::Table(values);
            kind.validate()?;
            return Ok(kind);
        }
        let mut params = parse_params(rest)?;
        let kind = match name {
            "sobolev" => FamilyKind::Sobolev { gamma: take(&mut params, "gamma", None)? },
            "fs" | "finite_smooth" => FamilyKind::FiniteSmooth {
                gamma: take(&mut params, "gamma", None)?,
                xi: take(&mut params, "xi", Some(0.0))?,
            },
            "exp" | "exp_analytic" => FamilyKind::ExpAnalytic {
                gamma: take(&mut params, "gamma", None)?,
                r: take(&mut params, "r", None)?,
            },
            "id" | "identity" => FamilyKind::Identity,
            other => return Err(invalid(format!("unknown multiplier family '{other}'"))),
        };
        if let Some(k) = params.keys().next() {
            return Err(invalid(format!("unexpected parameter '{k}' for family '{name}'")));
        }
        kind.validate()?;
        Ok(kind)
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyKind::Sobolev { gamma } => write!(f, "sobolev:gamma={gamma}"),
            FamilyKind::FiniteSmooth { gamma, xi } => write!(f, "fs:gamma={gamma},xi={xi}"),
            FamilyKind::ExpAnalytic { gamma, r } => write!(f, "exp:gamma={gamma},r={r}"),
            FamilyKind::Identity => f.write_str("id"),
            FamilyKind::Table(v) => {
                f.write_str("table:")?;
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

/// A multiplier sequence `λ_{m,n} = λ(|(m,n)|)` on `Ω_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierFamily {
    pub kind: FamilyKind,
    pub grading: Grading,
    pub d: u32,
}

impl MultiplierFamily {
    pub fn new(kind: FamilyKind, grading: Grading, d: u32) -> Result<Self> {
        kind.validate()?;
        if d < 2 {
            return Err(invalid(format!("complex dimension must be >= 2, got {d}")));
        }
        Ok(Self { kind, grading, d })
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.kind, FamilyKind::Identity)
    }

    /// `λ(t)`.
    pub fn lambda(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(invalid(format!("lambda needs finite t >= 0, got {t}")));
        }
        Ok(match &self.kind {
            FamilyKind::Sobolev { gamma } => {
                if t == 0.0 {
                    0.0
                } else {
                    (t * (t + 2.0 * self.d as f64 - 2.0)).powf(-gamma / 2.0)
                }
            }
            FamilyKind::FiniteSmooth { gamma, xi } => {
                if t <= 1.0 {
                    0.0
                } else {
                    t.powf(-gamma) * t.ln().powf(-xi)
                }
            }
            FamilyKind::ExpAnalytic { gamma, r } => (-gamma * t.powf(*r)).exp(),
            FamilyKind::Identity => 1.0,
            FamilyKind::Table(v) => {
                if t.fract() != 0.0 {
                    return Err(invalid(format!("table family is only defined at integer levels, got {t}")));
                }
                *v.get(t as usize).ok_or_else(|| invalid(format!("table has no value for level {t}")))?
            }
        })
    }

    /// `λ` at an integer level.
    pub fn at_level(&self, l: u64) -> Result<f64> {
        self.lambda(l as f64)
    }

    /// `λ_{m,n}`: `λ(m+n)` under the star grading, `λ(max(m,n))` under the max grading.
    pub fn at(&self, b: BiDegree) -> Result<f64> {
        self.at_level(b.level(self.grading))
    }
}

/// Coefficients of `f = Σ c_{(m,n),j} Y_j^{(m,n)}` against orthonormal bases.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CoeffVector {
    d: u32,
    coeffs: BTreeMap<(BiDegree, usize), Complex64>,
}

impl CoeffVector {
    pub fn new(d: u32) -> Self {
        Self { d, coeffs: BTreeMap::new() }
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn set(&mut self, b: BiDegree, j: usize, c: Complex64) -> Result<()> {
        let dim = dim_complex_harmonic(self.d, b)?;
        if j as u128 >= dim {
            return Err(invalid(format!("index {j} out of range for {b} (dimension {dim})")));
        }
        if c == Complex64::new(0.0, 0.0) {
            self.coeffs.remove(&(b, j));
        } else {
            self.coeffs.insert((b, j), c);
        }
        Ok(())
    }

    pub fn get(&self, b: BiDegree, j: usize) -> Complex64 {
        self.coeffs.get(&(b, j)).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (BiDegree, usize, Complex64)> + '_ {
        self.coeffs.iter().map(|(&(b, j), &c)| (b, j, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `‖f‖_2` by Parseval.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `Λ f`: every coefficient scaled by `λ_{m,n}`.
    pub fn apply(&self, fam: &MultiplierFamily) -> Result<CoeffVector> {
        if fam.d != self.d {
            return Err(invalid("family and coefficient vector have different d"));
        }
        let mut out = CoeffVector::new(self.d);
        for (&(b, j), &c) in &self.coeffs {
            let v = c * fam.at(b)?;
            if v != Complex64::new(0.0, 0.0) {
                out.coeffs.insert((b, j), v);
            }
        }
        Ok(out)
    }
}

/// Output of [`build_nk_sequence`].
#[derive(Debug, Clone, PartialEq)]
pub struct NkSequence {
    pub levels: Vec<u64>,
    /// Levels `l` in the scanned range with `λ(l) = λ(l-1)`.
    pub plateaus: Vec<u64>,
}

/// `N_1 = N`, `N_{k+1} = min{l : e λ(l) <= λ(N_k)}`, for `kmax` terms.
pub fn build_nk_sequence(fam: &MultiplierFamily, n: u64, kmax: usize) -> Result<NkSequence> {
    if n < 1 {
        return Err(invalid("start level N must be >= 1"));
    }
    if kmax == 0 {
        return Err(invalid("kmax must be >= 1"));
    }
    let l0 = fam.at_level(n)?;
    if !(l0 > 0.0) {
        return Err(invalid(format!("lambda(N) must be > 0, got {l0} at N={n}")));
    }
    let e = std::f64::consts::E;
    let mut levels = vec![n];
    let mut plateaus = Vec::new();
    let mut prev_val = l0;
    let mut l = n;
    while levels.len() < kmax {
        let target = fam.at_level(*levels.last().expect("nonempty"))?;
        loop {
            l += 1;
            if l - n > SCAN_LIMIT {
                return Err(Error::Divergence(format!(
                    "no level within {SCAN_LIMIT} of N={n} satisfies e*lambda(l) <= lambda(N_k)"
                )));
            }
            let v = fam.at_level(l)?;
            if v > prev_val * (1.0 + SCAN_TOL) {
                return Err(invalid(format!("lambda increases at level {l}: {prev_val} -> {v}")));
            }
            if v == prev_val {
                plateaus.push(l);
            }
            prev_val = v;
            if e * v <= target * (1.0 + SCAN_TOL) {
                levels.push(l);
                break;
            }
        }
    }
    Ok(NkSequence { levels, plateaus })
}

/// The level bookkeeping behind `β = Σ m_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaPlan {
    pub n: u64,
    pub eps: f64,
    /// `N_1, ..., N_{M+1}`.
    pub nk: Vec<u64>,
    pub big_m: u64,
    /// `m_0 = dim T_N`, `m_k = floor(e^{-εk} θ_{N_1,N_2}) + 1`.
    pub mk: Vec<u128>,
    pub beta: u128,
    pub theta12: u128,
    /// `θ_{N_k, N_{k+1}}` for `k = 1..=M`.
    pub thetas: Vec<u128>,
    /// `(p, ratio)` pairs measuring membership in the class `K_{ε,p}`.
    pub kclass_ratios: Vec<(f64, f64)>,
    /// `C_ε = Σ_{k=1}^M e^{-εk} + M / θ_{N_1,N_2}`.
    pub c_eps: f64,
    pub plateaus: Vec<u64>,
}

impl BetaPlan {
    pub fn kclass_ratio(&self, p: f64) -> Option<f64> {
        self.kclass_ratios.iter().find(|(q, _)| *q == p).map(|(_, r)| *r)
    }
}

/// `(Σ_{k=1}^M e^{-k(1-ε/2)} θ_k^{1/p} / θ_{12}^{1/2}) / θ_{12}^{1/p-1/2}`.
pub fn kclass_ratio(thetas: &[u128], theta12: u128, eps: f64, p: f64) -> f64 {
    let t12 = theta12 as f64;
    let sum: f64 = thetas
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let k = (i + 1) as f64;
            (-k * (1.0 - eps / 2.0)).exp() * (t as f64).powf(1.0 / p) / t12.sqrt()
        })
        .sum();
    sum / t12.powf(1.0 / p - 0.5)
}

/// Builds `N_k`, `M`, `m_k` and `β` for start level `n` and `ε > 0`, and the
/// `K_{ε,p}` ratios for each `p` in `ps`.
pub fn plan_beta(fam: &MultiplierFamily, n: u64, eps: f64, ps: &[f64]) -> Result<BetaPlan> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(invalid(format!("eps must be finite and > 0, got {eps}")));
    }
    if ps.iter().any(|p| !(*p >= 1.0)) {
        return Err(invalid("every p must be >= 1"));
    }
    let g = fam.grading;
    let d = fam.d;
    let head = build_nk_sequence(fam, n, 2)?;
    let theta12 = theta(d, head.levels[0], head.levels[1], g)?;
    let big_m = ((theta12 as f64).ln() / eps).floor().max(0.0) as u64;
    let seq = build_nk_sequence(fam, n, big_m as usize + 1)?;
    let thetas = seq
        .levels
        .windows(2)
        .map(|w| theta(d, w[0], w[1], g))
        .collect::<Result<Vec<_>>>()?;
    let mut mk = vec![cumulative_dim(d, n, g)?];
    for k in 1..=big_m {
        mk.push(((-eps * k as f64).exp() * theta12 as f64).floor() as u128 + 1);
    }
    let beta = mk.iter().try_fold(0u128, |a, &b| a.checked_add(b)).ok_or(Error::Overflow("beta"))?;
    let c_eps = (1..=big_m).map(|k| (-eps * k as f64).exp()).sum::<f64>() + big_m as f64 / theta12 as f64;
    let kclass_ratios = ps.iter().map(|&p| (p, kclass_ratio(&thetas, theta12, eps, p))).collect();
    Ok(BetaPlan {
        n,
        eps,
        nk: seq.levels,
        big_m,
        mk,
        beta,
        theta12,
        thetas,
        kclass_ratios,
        c_eps,
        plateaus: seq.plateaus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn fam(s: &str, g: Grading) -> MultiplierFamily {
        MultiplierFamily::new(s.parse().unwrap(), g, 2).unwrap()
    }

    #[test]
    fn lambda_examples() {
        assert_abs_diff_eq!(fam("sobolev:gamma=2", Grading::Star).lambda(1.0).unwrap(), 1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(fam("fs:gamma=3,xi=1", Grading::Max).lambda(1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(fam("exp:gamma=1,r=1", Grading::Max).lambda(2.0).unwrap(), 0.135335283236, epsilon = 1e-12);
        assert!(fam("table:1,0.5", Grading::Max).lambda(2.0).is_err());
        assert!(fam("id", Grading::Max).lambda(-1.0).is_err());
    }

    #[test]
    fn multiplier_at_examples() {
        let b = BiDegree::new(1, 1);
        assert_eq!(fam("id", Grading::Star).at(BiDegree::new(3, 7)).unwrap(), 1.0);
        assert_abs_diff_eq!(fam("exp:gamma=1,r=1", Grading::Star).at(b).unwrap(), (-2.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(fam("exp:gamma=1,r=1", Grading::Max).at(b).unwrap(), (-1.0f64).exp(), epsilon = 1e-15);
        assert_eq!(fam("sobolev:gamma=2", Grading::Star).at(BiDegree::new(0, 0)).unwrap(), 0.0);
    }

    #[test]
    fn parse_errors() {
        assert!("sobolev".parse::<FamilyKind>().is_err());
        assert!("exp:gamma=1".parse::<FamilyKind>().is_err());
        assert!("exp:gamma=1,r=1,z=2".parse::<FamilyKind>().is_err());
        assert!("fs:gamma=-1".parse::<FamilyKind>().is_err());
        assert!("bogus".parse::<FamilyKind>().is_err());
        let k: FamilyKind = "fs:gamma=3".parse().unwrap();
        assert_eq!(k, FamilyKind::FiniteSmooth { gamma: 3.0, xi: 0.0 });
        assert_eq!(k.to_string().parse::<FamilyKind>().unwrap(), k);
    }

    #[test]
    fn apply_examples() {
        let f = fam("exp:gamma=1,r=1", Grading::Max);
        let zero = CoeffVector::new(2);
        assert!(zero.apply(&f).unwrap().is_zero());
        let mut c = CoeffVector::new(2);
        c.set(BiDegree::new(1, 1), 0, Complex64::new(1.0, 0.0)).unwrap();
        let out = c.apply(&f).unwrap();
        assert_abs_diff_eq!(out.get(BiDegree::new(1, 1), 0).re, (-1.0f64).exp(), epsilon = 1e-15);
        assert_eq!(c.apply(&fam("id", Grading::Max)).unwrap(), c);
        assert!(c.set(BiDegree::new(1, 1), 3, Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn nk_examples() {
        let s = build_nk_sequence(&fam("exp:gamma=1,r=1", Grading::Max), 3, 4).unwrap();
        assert_eq!(s.levels, vec![3, 4, 5, 6]);
        let s = build_nk_sequence(&fam("fs:gamma=3,xi=0", Grading::Max), 3, 2).unwrap();
        assert_eq!(s.levels, vec![3, 5]);
        assert!(matches!(build_nk_sequence(&fam("id", Grading::Max), 3, 2), Err(Error::Divergence(_))));
        assert!(build_nk_sequence(&fam("fs:gamma=3", Grading::Max), 1, 2).is_err());
    }

    #[test]
    fn nk_plateaus_are_flagged() {
        let f = fam("table:1,1,0.5,0.5,0.5,0.1", Grading::Max);
        let s = build_nk_sequence(&f, 1, 2).unwrap();
        assert_eq!(s.levels, vec![1, 5]);
        assert_eq!(s.plateaus, vec![3, 4]);
    }

    #[test]
    fn beta_plan_example() {
        let p = plan_beta(&fam("exp:gamma=1,r=1", Grading::Max), 3, 0.5, &[1.0, 1.5, 2.0]).unwrap();
        assert_eq!(p.theta12, 61);
        assert_eq!(p.mk[0], 64);
        assert_eq!(p.big_m, 8);
        assert_eq!(p.nk, (3..=11).collect::<Vec<_>>());
        assert_eq!(p.beta, p.mk.iter().sum::<u128>());
        assert!(p.kclass_ratios.iter().all(|(_, r)| r.is_finite()));
        assert!(plan_beta(&fam("id", Grading::Max), 3, 0.5, &[2.0]).is_err());
        let fs = plan_beta(&fam("fs:gamma=3,xi=0", Grading::Max), 3, 0.5, &[2.0]).unwrap();
        assert_eq!(&fs.nk[..2], &[3, 5]);
        assert!(fs.kclass_ratios[0].1.is_finite());
    }

    #[test]
    fn monotone_tails() {
        for s in ["sobolev:gamma=1", "fs:gamma=3,xi=2", "exp:gamma=1,r=0.5"] {
            let f = fam(s, Grading::Max);
            for l in 2..2000u64 {
                assert!(f.at_level(l + 1).unwrap() <= f.at_level(l).unwrap(), "{s} at {l}");
            }
        }
    }

    proptest! {
        #[test]
        fn grading_symmetry(m in 0u32..50, n in 0u32..50, g in prop::bool::ANY) {
            let g = if g { Grading::Star } else { Grading::Max };
            for s in ["sobolev:gamma=1.5", "fs:gamma=2,xi=1", "exp:gamma=0.7,r=1.3", "id"] {
                let f = fam(s, g);
                prop_assert_eq!(f.at(BiDegree::new(m, n)).unwrap(), f.at(BiDegree::new(n, m)).unwrap());
            }
        }

        #[test]
        fn beta_bound(n in 2u64..12, eps in 0.2f64..1.5) {
            let p = plan_beta(&fam("exp:gamma=1,r=1", Grading::Max), n, eps, &[2.0]).unwrap();
            let bound = cumulative_dim(2, n, Grading::Max).unwrap() as f64 + p.c_eps * p.theta12 as f64;
            prop_assert!(p.beta as f64 <= bound + 1e-9);
            prop_assert!(p.nk.windows(2).all(|w| w[0] < w[1]));
        }

        #[test]
        fn parseval_scaling(vals in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 7)) {
            let f = fam("exp:gamma=1,r=1", Grading::Max);
            let mut c = CoeffVector::new(2);
            let keys = [(0, 1, 0), (0, 1, 1), (1, 0, 0), (1, 0, 1), (1, 1, 0), (1, 1, 1), (1, 1, 2)];
            let mut expect = 0.0;
            for ((m, n, j), (re, im)) in keys.iter().zip(&vals) {
                let v = Complex64::new(*re, *im);
                c.set(BiDegree::new(*m, *n), *j, v).unwrap();
                expect += (-2.0f64).exp() * v.norm_sqr();
            }
            prop_assert!((c.apply(&f).unwrap().l2_norm().powi(2) - expect).abs() < 1e-12);
        }
    }
}

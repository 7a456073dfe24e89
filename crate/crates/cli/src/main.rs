mod emit;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use cwidths::basis::{build_harmonic_basis, project_mc, verify_addition, verify_gegenbauer};
use cwidths::dims::{check_dim_bounds, layers, BidegreeBoundCheck};
use cwidths::levy::{levy_bounds, levy_mean_mc, nikolskii_check, LevyProblem};
use cwidths::multipliers::{plan_beta, FamilyKind, MultiplierFamily};
use cwidths::sphere::LpExponent;
use cwidths::widths::{
    bound_eval, fit_log_factor, fit_power, fit_stretched, grading_compare, l2_width_table,
    l2_width_table_real_sphere, BoundKind, BoundSpec, FitResult, DEFAULT_FIT_START,
};
use cwidths::{BiDegree, Complex64, Error, Grading, SpherePoint};

use emit::{rational, to_csv, to_json, Obj, Value};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "cwidths", version, about = "Harmonic analysis and n-width laboratory on complex spheres")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format (each command has a default).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Layer table l, a_l, d_l, cum_dim (dimension formula for H_{m,n} summed over a grading layer).
    Dims {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        lmax: u64,
        #[arg(long, default_value = "max")]
        grading: Grading,
    },
    /// Exact orthogonal basis of H_{m,n} (orthogonal complement of P_{m-1,n-1} in P_{m,n}).
    Basis {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        n: u32,
    },
    /// Numerical identity and inequality checks; exit 1 when outside --tol.
    #[command(subcommand)]
    Check(CheckCmd),
    /// Levy mean of a multiplier norm on the coefficient sphere of T_{M1,M2}, with its two-sided bounds.
    Levy(LevyArgs),
    /// Level sequence N_k and the width-index plan built from it (geometric decay of λ by e per step).
    Seq {
        #[arg(long)]
        family: FamilyKind,
        #[arg(long, default_value = "max")]
        grading: Grading,
        #[arg(long, default_value_t = 2)]
        d: u32,
        #[arg(long = "N")]
        big_n: u64,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
    },
    /// Kolmogorov widths: exact L2 tables, rate fits and structural bound factors.
    #[command(subcommand)]
    Widths(WidthsCmd),
    /// Monte Carlo projection of a test function onto H_{m,n} through the zonal kernel.
    Project {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        n: u32,
        /// `const` or `mono:A/B` with exponent lists A, B, e.g. `mono:1,0/0,1` for z1·conj(z2).
        #[arg(long = "f", default_value = "const")]
        function: String,
        /// Pole as 2d real coordinates (normalized); defaults to the north pole.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        pole: Option<Vec<f64>>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum CheckCmd {
    /// Addition formula: Σ conj(Y_j(w)) Y_j(z) = (d_{m,n}/ω_d) R_{m,n}^{d-2}(<z,w>).
    Addition {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Gegenbauer kernel on S^{2d-1} equals the sum of complex zonal kernels with m + n = k.
    Gegenbauer {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Nikolskii inequalities ‖t‖_∞ <= (s/ω)^{1/p}‖t‖_p and ‖t‖_p <= (s/ω)^{1/2-1/p}‖t‖_2 on random polynomials.
    Nikolskii {
        #[arg(long, default_value_t = 2)]
        d: u32,
        #[arg(long, default_value_t = 0)]
        m1: u64,
        #[arg(long)]
        m2: u64,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Number of random polynomials.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 20_000)]
        omega_samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest admissible fraction of violating polynomials.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Two-sided growth of dim H_l and dim T_N, and the bidegree bound on d_{m,n}.
    DimBounds {
        #[arg(long)]
        d: u32,
        #[arg(long, default_value_t = 1)]
        lmin: u64,
        #[arg(long)]
        lmax: u64,
        /// Largest admissible relative gap between d_lmax / lmax^{2d-2} and its limit.
        #[arg(long, default_value_t = 0.1)]
        tol: f64,
    },
}

#[derive(Args)]
struct LevyArgs {
    #[arg(long)]
    family: FamilyKind,
    #[arg(long, default_value_t = 2)]
    d: u32,
    #[arg(long, default_value_t = 0)]
    m1: u64,
    #[arg(long)]
    m2: u64,
    #[arg(long, default_value = "2")]
    p: LpExponent,
    #[arg(long, default_value_t = 1000)]
    sphere_samples: usize,
    /// Points per norm evaluation; 0 selects the exact Parseval value when p = 2.
    #[arg(long, default_value_t = 10_000)]
    omega_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum WidthsCmd {
    /// Exact widths d_0..d_nmax of Λ: L2 -> L2 (sorted multiplier spectrum).
    Spectrum {
        #[arg(long)]
        family: FamilyKind,
        #[arg(long, default_value = "max")]
        grading: Grading,
        #[arg(long, default_value_t = 2)]
        d: u32,
        #[arg(long)]
        nmax: usize,
        /// Star grading only: use the real-sphere multiplicities dim H_k(S^{2d-1}).
        #[arg(long)]
        real_sphere: bool,
    },
    /// Fit a rate model to a width table CSV (n,d_n).
    Fit {
        /// CSV produced by `widths spectrum`.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "power")]
        model: FitKind,
        /// Required for the stretched model.
        #[arg(long)]
        r: Option<f64>,
        #[arg(long, default_value_t = 2)]
        d: u32,
        /// Fixed power exponent for the second stage of a power-log fit.
        #[arg(long, allow_hyphen_values = true)]
        slope: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_FIT_START)]
        lo: f64,
        #[arg(long)]
        hi: Option<f64>,
    },
    /// Structural factors of a width estimate, after checking its hypotheses.
    Bounds {
        /// sobolev-a..sobolev-i, fs-star-upper, fs-star-lower, fs-max-upper, fs-max-lower,
        /// exp-max-lower, exp-max-upper, exp-star-lower, exp-star-upper.
        #[arg(long)]
        theorem: BoundKind,
        #[arg(long, default_value_t = 2)]
        d: u32,
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = 0.0)]
        xi: f64,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        /// Index m (>= 2).
        #[arg(long)]
        m: u64,
    },
    /// Fit both gradings of one multiplier function and compare the rates.
    CompareGradings {
        #[arg(long)]
        family: FamilyKind,
        #[arg(long, default_value_t = 2)]
        d: u32,
        #[arg(long, default_value_t = 1_000_000)]
        nmax: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FitKind {
    Power,
    PowerLog,
    Stretched,
}

/// Rendered output plus whether a check passed.
struct Report {
    text: String,
    pass: bool,
}

fn json(v: impl Into<Value>) -> Report {
    Report { text: to_json(&v.into()), pass: true }
}

fn only_json(format: Option<Format>) -> anyhow::Result<()> {
    if format == Some(Format::Csv) {
        return Err(Error::InvalidArgument("this command only emits JSON".into()).into());
    }
    Ok(())
}

fn fit_value(f: &FitResult) -> Value {
    Obj::new()
        .put("model", f.model.to_string())
        .put("slope", f.slope)
        .put("intercept", f.intercept)
        .put("residual", f.residual_rms)
        .put("log_coefficient", f.log_coefficient)
        .put("points", f.points)
        .put("range", vec![f.range.0, f.range.1])
        .into()
}

fn test_function(spec: &str, d: u32) -> anyhow::Result<Box<dyn Fn(&SpherePoint) -> Complex64 + Sync>> {
    if spec == "const" {
        return Ok(Box::new(|_| Complex64::new(1.0, 0.0)));
    }
    let body = spec
        .strip_prefix("mono:")
        .ok_or_else(|| Error::InvalidArgument(format!("unknown test function '{spec}'")))?;
    let parse = |s: &str| -> anyhow::Result<Vec<u32>> {
        let v: Vec<u32> = s
            .split(',')
            .map(|x| x.trim().parse::<u32>())
            .collect::<Result<_, _>>()
            .map_err(|_| Error::InvalidArgument(format!("bad exponent list '{s}'")))?;
        if v.len() != d as usize {
            return Err(Error::InvalidArgument(format!("exponent list '{s}' needs {d} entries")).into());
        }
        Ok(v)
    };
    let (a, b) = body
        .split_once('/')
        .ok_or_else(|| Error::InvalidArgument("monomial must look like mono:A/B".into()))?;
    let (a, b) = (parse(a)?, parse(b)?);
    Ok(Box::new(move |z: &SpherePoint| {
        z.coords()
            .iter()
            .zip(a.iter().zip(&b))
            .map(|(c, (i, j))| c.powu(*i) * c.conj().powu(*j))
            .product()
    }))
}

fn run(cli: Cli) -> anyhow::Result<Report> {
    let format = cli.format;
    Ok(match cli.command {
        Command::Dims { d, lmax, grading } => {
            let ls = layers(d, lmax, grading)?;
            if format == Some(Format::Json) {
                let rows: Vec<Value> = ls
                    .iter()
                    .map(|s| Obj::new().put("l", s.l).put("a_l", s.a_l).put("d_l", s.d_l).put("cum_dim", s.cum_dim).into())
                    .collect();
                json(Obj::new().put("d", d).put("grading", grading.to_string()).put("layers", Value::Arr(rows)))
            } else {
                let rows: Vec<Vec<Value>> =
                    ls.iter().map(|s| vec![s.l.into(), s.a_l.into(), s.d_l.into(), s.cum_dim.into()]).collect();
                Report { text: to_csv(&["l", "a_l", "d_l", "cum_dim"], &rows), pass: true }
            }
        }
        Command::Basis { d, m, n } => {
            only_json(format)?;
            let b = build_harmonic_basis(d, BiDegree::new(m, n))?;
            let vectors: Vec<Value> = b
                .vectors()
                .iter()
                .map(|v| {
                    let terms: Vec<Value> = v
                        .terms()
                        .map(|(a, bb, c)| {
                            Obj::new()
                                .put("alpha", a.clone())
                                .put("beta", bb.clone())
                                .put("numerator", c.numer().to_string())
                                .put("denominator", c.denom().to_string())
                                .into()
                        })
                        .collect();
                    Value::Arr(terms)
                })
                .collect();
            let norms: Vec<Value> = b.sq_norms().iter().map(rational).collect();
            json(
                Obj::new()
                    .put("d", d)
                    .put("m", m)
                    .put("n", n)
                    .put("vectors", Value::Arr(vectors))
                    .put("sq_norms", Value::Arr(norms)),
            )
        }
        Command::Check(c) => {
            only_json(format)?;
            run_check(c)?
        }
        Command::Levy(a) => {
            only_json(format)?;
            let fam = MultiplierFamily::new(a.family.clone(), Grading::Max, a.d)?;
            let prob = LevyProblem::new(fam, a.m1, a.m2, a.p)?;
            let est = levy_mean_mc(&prob, a.sphere_samples, a.omega_samples, a.seed)?;
            let b = levy_bounds(&prob)?;
            json(
                Obj::new()
                    .put("estimate", est.value)
                    .put("stderr", est.stderr)
                    .put("lower", b.lower)
                    .put("upper", b.upper)
                    .put("case", b.case.to_string())
                    .put("empirical_C", b.empirical_constant(est.value))
                    .put("structural_factor", b.structural_factor)
                    .put("inconsistent", b.inconsistent)
                    .put("estimate_is_lower_bound", est.lower_bound_only)
                    .put("family", a.family.to_string())
                    .put("d", a.d)
                    .put("window", vec![a.m1, a.m2])
                    .put("s", b.s)
                    .put("p", a.p.to_string())
                    .put("sphere_samples", est.samples)
                    .put("omega_samples", a.omega_samples)
                    .put("seed", a.seed),
            )
        }
        Command::Seq { family, grading, d, big_n, eps } => {
            only_json(format)?;
            let fam = MultiplierFamily::new(family.clone(), grading, d)?;
            let ps = [1.0, 1.5, 2.0];
            let plan = plan_beta(&fam, big_n, eps, &ps)?;
            let ratios: Vec<Value> =
                plan.kclass_ratios.iter().map(|(p, r)| Obj::new().put("p", *p).put("ratio", *r).into()).collect();
            json(
                Obj::new()
                    .put("family", family.to_string())
                    .put("grading", grading.to_string())
                    .put("d", d)
                    .put("N", big_n)
                    .put("eps", eps)
                    .put("nk", plan.nk.clone())
                    .put("plateaus", plan.plateaus.clone())
                    .put("M", plan.big_m)
                    .put("m", plan.mk.clone())
                    .put("beta", plan.beta)
                    .put("theta12", plan.theta12)
                    .put("thetas", plan.thetas.clone())
                    .put("kclass_ratios", Value::Arr(ratios))
                    .put("c_eps", plan.c_eps),
            )
        }
        Command::Widths(w) => run_widths(w, format)?,
        Command::Project { d, m, n, function, pole, samples, seed } => {
            only_json(format)?;
            let w = match &pole {
                Some(xs) if xs.len() == 2 * d as usize => {
                    SpherePoint::normalized(xs.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect())?
                }
                Some(xs) => bail!(Error::InvalidArgument(format!("--pole needs {} coordinates, got {}", 2 * d, xs.len()))),
                None => SpherePoint::north(d),
            };
            let f = test_function(&function, d)?;
            let (v, se) = project_mc(f, d, BiDegree::new(m, n), &w, samples, seed)?;
            json(
                Obj::new()
                    .put("re", v.re)
                    .put("im", v.im)
                    .put("stderr", se)
                    .put("d", d)
                    .put("m", m)
                    .put("n", n)
                    .put("f", function)
                    .put("pole", w.upsilon())
                    .put("samples", samples)
                    .put("seed", seed),
            )
        }
    })
}

fn run_check(c: CheckCmd) -> anyhow::Result<Report> {
    Ok(match c {
        CheckCmd::Addition { d, m, n, samples, seed, tol } => {
            check_tol(tol)?;
            let r = verify_addition(d, BiDegree::new(m, n), samples, seed)?;
            let dev = r.max();
            let pass = dev < tol;
            let mut rep = json(
                Obj::new()
                    .put("check", "addition")
                    .put("d", d)
                    .put("m", m)
                    .put("n", n)
                    .put("deviation", dev)
                    .put("kernel_deviation", r.kernel)
                    .put("diagonal_deviation", r.diagonal)
                    .put("tol", tol)
                    .put("pass", pass)
                    .put("samples", samples)
                    .put("seed", seed),
            );
            rep.pass = pass;
            rep
        }
        CheckCmd::Gegenbauer { d, k, samples, seed, tol } => {
            check_tol(tol)?;
            let dev = verify_gegenbauer(d, k, samples, seed)?;
            let pass = dev < tol;
            let mut rep = json(
                Obj::new()
                    .put("check", "gegenbauer")
                    .put("d", d)
                    .put("k", k)
                    .put("deviation", dev)
                    .put("tol", tol)
                    .put("pass", pass)
                    .put("samples", samples)
                    .put("seed", seed),
            );
            rep.pass = pass;
            rep
        }
        CheckCmd::Nikolskii { d, m1, m2, p, samples, omega_samples, seed, tol } => {
            check_tol(tol)?;
            let r = nikolskii_check(d, m1, m2, p, samples, omega_samples, seed)?;
            let frac = r.violations() as f64 / r.trials as f64;
            let pass = frac < tol;
            let mut rep = json(
                Obj::new()
                    .put("check", "nikolskii")
                    .put("d", d)
                    .put("window", vec![m1, m2])
                    .put("p", p)
                    .put("s", r.s)
                    .put("trials", r.trials)
                    .put("sup_violations", r.sup_violations)
                    .put("lp_violations", r.lp_violations)
                    .put("worst_sup_ratio", r.worst_sup_ratio)
                    .put("worst_lp_ratio", r.worst_lp_ratio)
                    .put("tol", tol)
                    .put("pass", pass)
                    .put("omega_samples", omega_samples)
                    .put("seed", seed),
            );
            rep.pass = pass;
            rep
        }
        CheckCmd::DimBounds { d, lmin, lmax, tol } => {
            check_tol(tol)?;
            let r = check_dim_bounds(d, lmin, lmax)?;
            let last = r.rows.last().map(|row| row.ratio).unwrap_or(f64::NAN);
            let gap = (last / r.leading_coefficient - 1.0).abs();
            let (bideg, bideg_ok) = match &r.bidegree {
                BidegreeBoundCheck::Skipped { reason } => (Obj::new().put("skipped", reason.clone()).into(), true),
                BidegreeBoundCheck::Checked { pairs, skipped_pairs, lower_violations, smallest_admissible_c } => (
                    Value::from(
                        Obj::new()
                            .put("pairs", *pairs)
                            .put("skipped_pairs", *skipped_pairs)
                            .put("lower_violations", *lower_violations)
                            .put("smallest_admissible_c", *smallest_admissible_c),
                    ),
                    *lower_violations == 0,
                ),
            };
            let pass = gap <= tol && r.cumulative_lower_violations == 0 && bideg_ok;
            let rows: Vec<Value> = r
                .rows
                .iter()
                .map(|row| {
                    Obj::new()
                        .put("l", row.l)
                        .put("d_l", row.d_l)
                        .put("cum_dim", row.cum_dim)
                        .put("ratio", row.ratio)
                        .put("c1", row.c1)
                        .put("c2", row.c2)
                        .put("c3", row.c3)
                        .into()
                })
                .collect();
            let mut rep = json(
                Obj::new()
                    .put("check", "dim-bounds")
                    .put("d", d)
                    .put("leading_coefficient", r.leading_coefficient)
                    .put("cumulative_leading_coefficient", r.cumulative_leading_coefficient)
                    .put("final_ratio", last)
                    .put("relative_gap", gap)
                    .put("max_c1", r.max_c1)
                    .put("max_c2", r.max_c2)
                    .put("max_c3", r.max_c3)
                    .put("cumulative_lower_violations", r.cumulative_lower_violations)
                    .put("bidegree", bideg)
                    .put("tol", tol)
                    .put("pass", pass)
                    .put("rows", Value::Arr(rows)),
            );
            rep.pass = pass;
            rep
        }
    })
}

fn check_tol(tol: f64) -> anyhow::Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("--tol must be > 0, got {tol}")).into())
    }
}

fn read_table(path: &PathBuf) -> anyhow::Result<Vec<f64>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["n", "d_n"] {
        bail!(Error::Data(format!("expected header n,d_n, found {}", headers.iter().collect::<Vec<_>>().join(","))));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let n: usize = rec[0].parse().map_err(|_| Error::Data(format!("bad index on row {}", i + 1)))?;
        let v: f64 = rec[1].parse().map_err(|_| Error::Data(format!("bad width on row {}", i + 1)))?;
        if n != i {
            bail!(Error::Data(format!("rows must list n = 0, 1, 2, ... (row {} has n = {n})", i + 1)));
        }
        out.push(v);
    }
    if out.is_empty() {
        bail!(Error::Data("empty width table".into()));
    }
    Ok(out)
}

fn run_widths(w: WidthsCmd, format: Option<Format>) -> anyhow::Result<Report> {
    Ok(match w {
        WidthsCmd::Spectrum { family, grading, d, nmax, real_sphere } => {
            let fam = MultiplierFamily::new(family.clone(), grading, d)?;
            let t = if real_sphere { l2_width_table_real_sphere(&fam, nmax)? } else { l2_width_table(&fam, nmax)? };
            if format == Some(Format::Json) {
                json(
                    Obj::new()
                        .put("family", family.to_string())
                        .put("grading", grading.to_string())
                        .put("d", d)
                        .put("non_compact", t.non_compact)
                        .put("truncated", t.truncated)
                        .put("d_n", t.entries.clone()),
                )
            } else {
                let rows: Vec<Vec<Value>> =
                    t.entries.iter().enumerate().map(|(n, v)| vec![Value::from(n), Value::from(*v)]).collect();
                Report { text: to_csv(&["n", "d_n"], &rows), pass: true }
            }
        }
        WidthsCmd::Fit { input, model, r, d, slope, lo, hi } => {
            only_json(format)?;
            let entries = read_table(&input)?;
            let range = (lo, hi.unwrap_or((entries.len() - 1) as f64));
            let f = match model {
                FitKind::Power => fit_power(&entries, range, false)?,
                FitKind::PowerLog => match slope {
                    Some(a) => fit_log_factor(&entries, range, a)?,
                    None => fit_power(&entries, range, true)?,
                },
                FitKind::Stretched => {
                    let r = r.ok_or_else(|| Error::InvalidArgument("--r is required for the stretched model".into()))?;
                    fit_stretched(&entries, d, r, range)?
                }
            };
            json(fit_value(&f))
        }
        WidthsCmd::Bounds { theorem, d, gamma, xi, r, p, q, m } => {
            only_json(format)?;
            let spec = BoundSpec { kind: theorem, d, gamma, xi, r, p, q };
            let v = bound_eval(&spec, m)?;
            let (cname, cval) = match v.constant {
                Some((n, c)) => (Value::from(n), Value::from(c)),
                None => (Value::Null, Value::Null),
            };
            json(
                Obj::new()
                    .put("theorem", theorem.to_string())
                    .put("d", d)
                    .put("gamma", gamma)
                    .put("xi", xi)
                    .put("r", r)
                    .put("p", p)
                    .put("q", q)
                    .put("m", m)
                    .put("width_index", v.width_index)
                    .put("lower", v.lower)
                    .put("upper", v.upper)
                    .put("constant", cname)
                    .put("constant_value", cval),
            )
        }
        WidthsCmd::CompareGradings { family, d, nmax } => {
            only_json(format)?;
            let c = grading_compare(&family, d, nmax)?;
            let mut o = Obj::new().put("family", family.to_string()).put("d", d).put("nmax", nmax);
            if c.non_compact {
                o = o.put("non_compact", true).put("message", "non-compact, no rates");
            } else {
                o = o
                    .put("non_compact", false)
                    .put("star", c.star.as_ref().map(fit_value))
                    .put("max", c.max.as_ref().map(fit_value))
                    .put("slope_ratio", c.slope_ratio)
                    .put("expected_ratio", c.expected_ratio)
                    .put("agree_within_0.05", c.agrees(0.05));
            }
            json(o)
        }
    })
}

fn is_usage_error(e: &anyhow::Error) -> bool {
    matches!(e.downcast_ref::<Error>(), Some(Error::InvalidArgument(_) | Error::Hypothesis(_) | Error::Range(_)))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.out.clone();
    let report = match run(cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(if is_usage_error(&e) { EXIT_USAGE } else { EXIT_CHECK_FAILED });
        }
    };
    let written = match &out {
        Some(path) => fs::write(path, &report.text).map_err(|e| anyhow!("cannot write {}: {e}", path.display())),
        None => {
            print!("{}", report.text);
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_CHECK_FAILED);
    }
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK_FAILED)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn monomial_test_function() {
        let f = test_function("mono:1,0/0,1", 2).unwrap();
        let z = SpherePoint::new(vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]).unwrap();
        let v = f(&z);
        assert!((v - Complex64::new(0.0, -0.48)).norm() < 1e-15);
        assert!(test_function("mono:1/0", 2).is_err());
        assert!(test_function("bogus", 2).is_err());
    }
}

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde_json::{json, Value};

use quon_core::bounds::{
    compositeness_overlap, composite_q, conservation_residual, conservation_sweep,
    default_sweep, format_rational, parse_rational, propagate_statistics, q_from_v, relative_q,
    v_from_q, ConservationSetup, Flavor,
};
use quon_core::gram::{
    self, det_exact, gram_matrix, limit_eigenvector_holds, midpoint_samples, positivity_scan,
    rank_at_limit, zagier_determinant, zagier_float_check, GramLimits, ZagierProduct,
};
use quon_core::observables::{
    check_all_commutators, check_hamiltonian, free_hamiltonian, locality_check_discrete,
    TruncatedFockSpace,
};
use quon_core::parastat::{
    self, build_green, check_canonical, check_trilinear, check_vacuum_conditions, gentile_demo,
    occupancy_report, rotation, ParaKind,
};
use quon_core::qfock::{vacuum_expectation, ModeLabel, OperatorWord};
use quon_core::speicher::{self, mc_estimate};
use quon_core::verify::{run_all, VerifyConfig};
use quon_core::wick::{enumerate_contractions, wick_expectation};

#[derive(Parser, Debug)]
#[command(name = "quon", version, about = "Quon Fock-space checks and statistics bookkeeping")]
struct Cli {
    /// Emit JSON (the only output format).
    #[arg(long, global = true)]
    json: bool,
    /// Seed for Monte Carlo and randomized checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// State-space dimension budget for parastatistics realizations.
    #[arg(long, global = true, default_value_t = parastat::DEFAULT_MAX_DIM)]
    limit_dim: usize,
    /// Include wall-clock seconds in the report.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
struct GramArgs {
    /// Largest particle count for which the Gram matrix is built.
    #[arg(long, default_value_t = GramLimits::default().max_n)]
    max_n: usize,
    /// Largest matrix dimension for exact determinants.
    #[arg(long, default_value_t = GramLimits::default().max_exact_dim)]
    max_exact_dim: usize,
}

impl GramArgs {
    fn limits(self) -> GramLimits {
        GramLimits {
            max_n: self.max_n,
            max_exact_dim: self.max_exact_dim,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Method {
    Rewrite,
    Wick,
    Both,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum ObsCheck {
    Commutator,
    Locality,
    Hamiltonian,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum ParaCheck {
    Trilinear,
    Vacuum,
    Occupancy,
    Canonical,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum KindArg {
    Bose,
    Fermi,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Vacuum expectation value of an operator word.
    Vev {
        /// Word such as "a1 a2 c1 c2" (a = annihilator, c = creator).
        #[arg(long)]
        word: String,
        #[arg(long, value_enum, default_value = "both")]
        method: Method,
    },
    /// Gram matrix of n distinct-mode quons.
    Gram {
        #[arg(long)]
        n: usize,
        /// Also compute the exact determinant.
        #[arg(long)]
        exact: bool,
        /// Evaluate the matrix at this q.
        #[arg(long, allow_hyphen_values = true)]
        at: Option<f64>,
        #[command(flatten)]
        limits: GramArgs,
    },
    /// Compare det M_n(q) with the Zagier product.
    Zagier {
        #[arg(long)]
        n: usize,
        /// Sample points for the floating comparison when the exact route is over the limit.
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[command(flatten)]
        limits: GramArgs,
    },
    /// Smallest Gram eigenvalue over sampled q, plus the q = ±1 limits.
    Positivity {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, allow_hyphen_values = true, default_value_t = -0.99)]
        lo: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.99)]
        hi: f64,
        #[command(flatten)]
        limits: GramArgs,
    },
    /// q = 0 number and transition operators on a truncated Fock space.
    Observables {
        #[arg(long)]
        modes: u32,
        #[arg(long)]
        cap: usize,
        /// Series depth; defaults to cap - 1.
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, value_enum)]
        check: ObsCheck,
    },
    /// Green-ansatz parastatistics.
    Para {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        modes: usize,
        /// Per-component cap (parabose only).
        #[arg(long)]
        cap: Option<u32>,
        #[arg(long, value_enum)]
        check: ParaCheck,
    },
    /// Basis dependence of an occupancy-capped statistics.
    Gentile {
        #[arg(long, default_value_t = 2)]
        nmax: usize,
        /// Rotation angle of the single-particle basis change.
        #[arg(long, allow_hyphen_values = true, default_value_t = std::f64::consts::FRAC_PI_4)]
        theta: f64,
    },
    /// Monte Carlo over random-sign Bose components.
    Speicher {
        #[arg(long)]
        word: String,
        #[arg(long, allow_hyphen_values = true)]
        q: f64,
        /// Number of components.
        #[arg(long = "N")]
        components: usize,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
    },
    /// Statistics-violation parameter arithmetic.
    #[command(subcommand)]
    Bounds(BoundsCommand),
    /// Run every built-in check with default parameters.
    VerifyAll {
        /// Skip the floating n = 5 determinant comparison.
        #[arg(long)]
        skip_n5: bool,
    },
}

#[derive(Subcommand, Debug)]
enum BoundsCommand {
    /// Convert between v_F, v_B and q.
    Convert {
        #[arg(long, allow_hyphen_values = true, group = "input")]
        vf: Option<String>,
        #[arg(long, allow_hyphen_values = true, group = "input")]
        vb: Option<String>,
        #[arg(long, allow_hyphen_values = true, group = "input")]
        q: Option<String>,
    },
    /// q_b = q_f² and the matching violation bounds.
    Propagate {
        #[arg(long, allow_hyphen_values = true)]
        qe: String,
    },
    /// q^(n²) for an n-constituent composite.
    Composite {
        #[arg(long, allow_hyphen_values = true)]
        q: String,
        #[arg(long)]
        n: u32,
    },
    /// Norm of two nearly identical composites in one state.
    Overlap {
        #[arg(long, allow_hyphen_values = true)]
        la: f64,
        #[arg(long, allow_hyphen_values = true)]
        lb: f64,
    },
    /// Residual of the bilinear commutation used to relate q_e and q_gamma.
    Conservation {
        #[arg(long, allow_hyphen_values = true, default_value = "-1")]
        qe: String,
        /// Momenta k,l,p,r.
        #[arg(long, allow_hyphen_values = true, value_delimiter = ',', required = true)]
        momenta: Vec<i64>,
        #[arg(long, default_value_t = 3)]
        cap: usize,
        /// Override q_gamma (defaults to q_e²).
        #[arg(long, allow_hyphen_values = true)]
        q_gamma: Option<String>,
        /// Also run the default sweep q_e = -1 + 10^-j, j = 1..3.
        #[arg(long)]
        sweep: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    fn from_ok(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Error => "error",
        }
    }
}

type Outcome = Result<(Value, Value, Status), String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn poly_json(p: &quon_core::QPolynomial) -> Value {
    json!(p.to_coeff_strings())
}

fn vev(word: &str, method: Method) -> Outcome {
    let w: OperatorWord = word.parse().map_err(err)?;
    let params = json!({ "word": w.to_string(), "method": format!("{method:?}").to_lowercase() });
    let rewrite = (method != Method::Wick).then(|| vacuum_expectation(&w));
    let wick = match method {
        Method::Rewrite => None,
        _ => Some(wick_expectation(&w).map_err(err)?),
    };
    let value = rewrite.as_ref().or(wick.as_ref()).expect("one method ran");
    let agree = match (&rewrite, &wick) {
        (Some(a), Some(b)) => Some(a == b),
        _ => None,
    };
    let contractions = if method == Method::Rewrite {
        None
    } else {
        Some(enumerate_contractions(&w).map_err(err)?.len())
    };
    let results = json!({
        "value": value.to_string(),
        "coefficients": poly_json(value),
        "methods_agree": agree,
        "contractions": contractions,
    });
    Ok((params, results, Status::from_ok(agree != Some(false))))
}

fn gram_cmd(n: usize, exact: bool, at: Option<f64>, limits: GramLimits) -> Outcome {
    let m = gram_matrix(n, &limits).map_err(err)?;
    let params = json!({ "n": n, "exact": exact, "at": at });
    let entries: Vec<Vec<String>> = m
        .rows()
        .iter()
        .map(|r| r.iter().map(|p| p.to_string()).collect())
        .collect();
    let orderings: Vec<String> = m
        .permutations
        .iter()
        .map(|p| gram::permutation_word(p).to_string())
        .collect();
    let mut results = json!({ "n": n, "dim": m.dim(), "orderings": orderings, "entries": entries });
    let mut ok = true;
    if exact {
        let det = det_exact(&m, &limits).map_err(err)?;
        let matches = det == zagier_determinant(n);
        ok &= matches;
        results["det"] = json!(ZagierProduct::new(n).to_string());
        results["det_poly"] = json!(det.to_string());
        results["match"] = json!(matches);
    }
    if let Some(q) = at {
        let e = m.eval_f64(q);
        let rows: Vec<Vec<f64>> = (0..e.nrows())
            .map(|i| (0..e.ncols()).map(|j| e[(i, j)]).collect())
            .collect();
        results["evaluated_f64"] = json!(rows);
        results["det_f64"] = json!(gram::det_f64(&m, q));
    }
    Ok((params, results, Status::from_ok(ok)))
}

fn zagier_cmd(n: usize, samples: usize, limits: GramLimits) -> Outcome {
    let params = json!({ "n": n, "samples": samples });
    let m = gram_matrix(n, &limits).map_err(err)?;
    let product = ZagierProduct::new(n);
    if m.dim() <= limits.max_exact_dim {
        let det = det_exact(&m, &limits).map_err(err)?;
        let matches = det == product.expand();
        let results = json!({
            "method": "exact",
            "det": product.to_string(),
            "det_poly": det.to_string(),
            "match": matches,
        });
        return Ok((params, results, Status::from_ok(matches)));
    }
    let checks = zagier_float_check(&m, &midpoint_samples(-0.95, 0.95, samples));
    let worst = checks.iter().map(|c| c.relative_error).fold(0.0, f64::max);
    let matches = worst <= 1e-9;
    let results = json!({
        "method": "float",
        "det": product.to_string(),
        "samples": checks,
        "max_relative_error": worst,
        "tolerance": 1e-9,
        "match": matches,
    });
    Ok((params, results, Status::from_ok(matches)))
}

fn positivity_cmd(n: usize, samples: usize, lo: f64, hi: f64, limits: GramLimits) -> Outcome {
    let params = json!({ "n": n, "samples": samples, "lo": lo, "hi": hi });
    let m = gram_matrix(n, &limits).map_err(err)?;
    let scan = positivity_scan(&m, &midpoint_samples(lo, hi, samples)).map_err(err)?;
    let all_positive = scan.iter().all(|s| s.positive);
    let limits_json: Vec<Value> = [1i64, -1]
        .iter()
        .map(|&s| {
            json!({
                "q": s,
                "rank": rank_at_limit(&m, s),
                "sign_vector_eigenvalue_n_factorial": limit_eigenvector_holds(&m, s),
            })
        })
        .collect();
    let limits_ok = n == 0
        || [1i64, -1]
            .iter()
            .all(|&s| rank_at_limit(&m, s) == 1 && limit_eigenvector_holds(&m, s));
    let results = json!({
        "threshold": gram::EIGEN_POSITIVE_TOL,
        "all_positive": all_positive,
        "min_eigenvalue": scan.iter().map(|s| s.min_eigenvalue).fold(f64::INFINITY, f64::min),
        "scan": scan,
        "limits": limits_json,
    });
    Ok((params, results, Status::from_ok(all_positive && limits_ok)))
}

fn observables_cmd(modes: u32, cap: usize, depth: Option<usize>, check: ObsCheck) -> Outcome {
    let depth = depth.unwrap_or(cap.saturating_sub(1));
    let params = json!({
        "modes": modes,
        "cap": cap,
        "depth": depth,
        "check": format!("{check:?}").to_lowercase(),
    });
    let space = TruncatedFockSpace::with_mode_count(modes, cap).map_err(err)?;
    let (results, ok) = match check {
        ObsCheck::Commutator => {
            let reports = check_all_commutators(&space, depth).map_err(err)?;
            let ok = reports.iter().all(|r| r.holds);
            (json!({ "all_hold": ok, "triples": reports }), ok)
        }
        ObsCheck::Locality => {
            let mut reports = Vec::new();
            for &x in &space.modes {
                for &y in &space.modes {
                    for &w in &space.modes {
                        reports.push(locality_check_discrete(&space, x, y, w).map_err(err)?);
                    }
                }
            }
            let ok = reports.iter().all(|r| r.holds);
            (json!({ "all_hold": ok, "triples": reports }), ok)
        }
        ObsCheck::Hamiltonian => {
            let energies: BTreeMap<ModeLabel, BigRational> = space
                .modes
                .iter()
                .map(|&m| (m, BigRational::from_integer(m.0.into())))
                .collect();
            let h = free_hamiltonian(&space, &energies).map_err(err)?;
            let report = check_hamiltonian(&space, &h).map_err(err)?;
            let energies: BTreeMap<String, String> = energies
                .iter()
                .map(|(m, e)| (m.to_string(), e.to_string()))
                .collect();
            let ok = report.holds;
            (json!({ "energies": energies, "report": report }), ok)
        }
    };
    Ok((params, results, Status::from_ok(ok)))
}

fn para_cmd(
    kind: KindArg,
    p: usize,
    modes: usize,
    cap: Option<u32>,
    check: ParaCheck,
    max_dim: usize,
) -> Outcome {
    let kind = match kind {
        KindArg::Bose => ParaKind::Parabose,
        KindArg::Fermi => ParaKind::Parafermi,
    };
    let params = json!({
        "kind": kind,
        "p": p,
        "modes": modes,
        "cap": cap,
        "check": format!("{check:?}").to_lowercase(),
        "limit_dim": max_dim,
    });
    let r = build_green(kind, p, modes, cap, max_dim).map_err(err)?;
    let to_value = |v: Result<Value, serde_json::Error>| v.map_err(err);
    let (results, ok) = match check {
        ParaCheck::Trilinear => {
            let rep = check_trilinear(&r).map_err(err)?;
            let ok = rep.holds;
            (to_value(serde_json::to_value(rep))?, ok)
        }
        ParaCheck::Vacuum => {
            let rep = check_vacuum_conditions(&r).map_err(err)?;
            let ok = rep.holds;
            (to_value(serde_json::to_value(rep))?, ok)
        }
        ParaCheck::Occupancy => {
            let rep = occupancy_report(&r).map_err(err)?;
            let ok = rep.holds;
            (to_value(serde_json::to_value(rep))?, ok)
        }
        ParaCheck::Canonical => {
            if p != 1 {
                return Err("canonical relations only apply to p = 1".into());
            }
            let rep = check_canonical(&r).map_err(err)?;
            let ok = rep.holds;
            (to_value(serde_json::to_value(rep))?, ok)
        }
    };
    let mut results = results;
    results["dimension"] = json!(r.dimension);
    Ok((params, results, Status::from_ok(ok)))
}

fn gentile_cmd(nmax: usize, theta: f64) -> Outcome {
    let params = json!({ "nmax": nmax, "theta": theta });
    let rep = gentile_demo(nmax, &rotation(theta)).map_err(err)?;
    let ok = rep.parafermi.pattern_states_zero
        && rep.parafermi.norm_sq_before.abs() < 1e-12
        && rep.parafermi.norm_sq_after.abs() < 1e-12;
    Ok((params, serde_json::to_value(rep).map_err(err)?, Status::from_ok(ok)))
}

fn speicher_cmd(word: &str, q: f64, n: usize, samples: usize, seed: u64) -> Outcome {
    let w: OperatorWord = word.parse().map_err(err)?;
    let params = json!({ "word": w.to_string(), "q": q, "N": n, "samples": samples, "seed": seed });
    let est = mc_estimate(&w, q, n, samples, seed).map_err(err)?;
    let target_poly = wick_expectation(&w).map_err(err)?;
    let target = target_poly.eval_f64(q);
    let gap = (est.mean - target).abs();
    let tolerance = (3.0 * est.stderr).max(2.0 / n as f64);
    let sigmas = if est.stderr > 0.0 {
        Some(gap / est.stderr)
    } else {
        None
    };
    let results = json!({
        "mean": est.mean,
        "stderr": est.stderr,
        "target": target,
        "target_poly": target_poly.to_string(),
        "sigmas": sigmas,
        "tolerance": tolerance,
        "within_tolerance": gap <= tolerance,
    });
    Ok((params, results, Status::from_ok(gap <= tolerance)))
}

fn rat(s: &str) -> Result<BigRational, String> {
    parse_rational(s).map_err(err)
}

fn num(x: &BigRational) -> Value {
    json!(speicher::rational_to_f64(x))
}

fn bounds_cmd(cmd: &BoundsCommand) -> Outcome {
    match cmd {
        BoundsCommand::Convert { vf, vb, q } => {
            let (params, results) = match (vf, vb, q) {
                (Some(v), None, None) | (None, Some(v), None) => {
                    let flavor = if vf.is_some() {
                        Flavor::Fermionic
                    } else {
                        Flavor::Bosonic
                    };
                    let x = rat(v)?;
                    let q = q_from_v(&x, flavor).map_err(err)?;
                    let key = if vf.is_some() { "vf" } else { "vb" };
                    (
                        json!({ key: v }),
                        json!({
                            "flavor": flavor,
                            "v": format_rational(&x),
                            "q": format_rational(&q),
                            "q_f64": num(&q),
                            "round_trip": v_from_q(&q, flavor).map_err(err)? == x,
                        }),
                    )
                }
                (None, None, Some(qs)) => {
                    let q = rat(qs)?;
                    let vf = v_from_q(&q, Flavor::Fermionic).map_err(err)?;
                    let vb = v_from_q(&q, Flavor::Bosonic).map_err(err)?;
                    (
                        json!({ "q": qs }),
                        json!({
                            "q": format_rational(&q),
                            "v_f": format_rational(&vf),
                            "v_b": format_rational(&vb),
                            "v_f_f64": num(&vf),
                            "v_b_f64": num(&vb),
                        }),
                    )
                }
                _ => return Err("exactly one of --vf, --vb, --q is required".into()),
            };
            Ok((params, results, Status::Pass))
        }
        BoundsCommand::Propagate { qe } => {
            let q = rat(qe)?;
            let p = propagate_statistics(&q).map_err(err)?;
            let rel = relative_q(&p.q_b).map_err(err)?;
            let results = json!({
                "q_e": format_rational(&p.q_f),
                "q_gamma": format_rational(&p.q_b),
                "q_gamma_f64": num(&p.q_b),
                "q_gamma_leading": format_rational(&p.q_b_leading),
                "v_e": format_rational(&p.v_f),
                "v_gamma": format_rational(&p.v_b),
                "v_gamma_leading": format_rational(&p.v_b_leading),
                "q_e_gamma": rel,
            });
            Ok((json!({ "qe": qe }), results, Status::Pass))
        }
        BoundsCommand::Composite { q, n } => {
            let x = rat(q)?;
            let c = composite_q(&x, *n).map_err(err)?;
            let results = json!({
                "q_composite": format_rational(&c),
                "q_composite_f64": num(&c),
                "exponent": n * n,
            });
            Ok((json!({ "q": q, "n": n }), results, Status::Pass))
        }
        BoundsCommand::Overlap { la, lb } => {
            let o = compositeness_overlap(*la, *lb).map_err(err)?;
            Ok((
                json!({ "la": la, "lb": lb }),
                serde_json::to_value(o).map_err(err)?,
                Status::Pass,
            ))
        }
        BoundsCommand::Conservation {
            qe,
            momenta,
            cap,
            q_gamma,
            sweep,
        } => {
            let m: [i64; 4] = momenta
                .as_slice()
                .try_into()
                .map_err(|_| "--momenta needs exactly four values k,l,p,r".to_string())?;
            let q = rat(qe)?;
            let g = q_gamma.as_deref().map(rat).transpose()?;
            let setup = ConservationSetup::new(m, *cap).map_err(err)?;
            let report = conservation_residual(&setup, &q, g.as_ref()).map_err(err)?;
            let mut ok = true;
            // at the Fermi point with q_gamma = q_e² the residual must vanish
            if q == -num_one() && g.is_none() {
                ok &= report.residual_sq == "0";
            }
            let mut results = json!({
                "norm": "Fermi seminorm (q = -1 inner product); residual_qe_norm uses the q_e Fock inner product",
                "report": report,
            });
            if *sweep {
                let s = conservation_sweep(&setup, &default_sweep()).map_err(err)?;
                ok &= s.at_minus_one == 0.0 && s.decreasing && (s.slope - 1.0).abs() <= 0.2;
                results["sweep"] = serde_json::to_value(s).map_err(err)?;
            }
            let params = json!({
                "qe": qe,
                "momenta": m,
                "cap": cap,
                "q_gamma": q_gamma,
                "sweep": sweep,
            });
            Ok((params, results, Status::from_ok(ok)))
        }
    }
}

fn num_one() -> BigRational {
    BigRational::from_integer(1.into())
}

fn verify_all(seed: Option<u64>, skip_n5: bool) -> Outcome {
    let mut config = VerifyConfig::default();
    if let Some(s) = seed {
        config.seed = s;
    }
    config.zagier_n5 = !skip_n5;
    let report = run_all(&config);
    for c in &report.checks {
        eprintln!("[{}] {:>2} {}", if c.passed { "pass" } else { "FAIL" }, c.id, c.name);
    }
    let ok = report.passed;
    Ok((
        serde_json::to_value(&config).map_err(err)?,
        serde_json::to_value(report).map_err(err)?,
        Status::from_ok(ok),
    ))
}

fn subcommand_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Vev { .. } => "vev",
        Command::Gram { .. } => "gram",
        Command::Zagier { .. } => "zagier",
        Command::Positivity { .. } => "positivity",
        Command::Observables { .. } => "observables",
        Command::Para { .. } => "para",
        Command::Gentile { .. } => "gentile",
        Command::Speicher { .. } => "speicher",
        Command::Bounds(b) => match b {
            BoundsCommand::Convert { .. } => "bounds convert",
            BoundsCommand::Propagate { .. } => "bounds propagate",
            BoundsCommand::Composite { .. } => "bounds composite",
            BoundsCommand::Overlap { .. } => "bounds overlap",
            BoundsCommand::Conservation { .. } => "bounds conservation",
        },
        Command::VerifyAll { .. } => "verify-all",
    }
}

fn dispatch(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Vev { word, method } => vev(word, *method),
        Command::Gram {
            n,
            exact,
            at,
            limits,
        } => gram_cmd(*n, *exact, *at, limits.limits()),
        Command::Zagier { n, samples, limits } => zagier_cmd(*n, *samples, limits.limits()),
        Command::Positivity {
            n,
            samples,
            lo,
            hi,
            limits,
        } => positivity_cmd(*n, *samples, *lo, *hi, limits.limits()),
        Command::Observables {
            modes,
            cap,
            depth,
            check,
        } => observables_cmd(*modes, *cap, *depth, *check),
        Command::Para {
            kind,
            p,
            modes,
            cap,
            check,
        } => para_cmd(*kind, *p, *modes, *cap, *check, cli.limit_dim),
        Command::Gentile { nmax, theta } => gentile_cmd(*nmax, *theta),
        Command::Speicher {
            word,
            q,
            components,
            samples,
        } => speicher_cmd(word, *q, *components, *samples, cli.seed.unwrap_or(0)),
        Command::Bounds(b) => bounds_cmd(b),
        Command::VerifyAll { skip_n5 } => verify_all(cli.seed, *skip_n5),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("could not configure {t} threads: {e}");
        }
    }
    let start = Instant::now();
    let (parameters, results, status) = match dispatch(&cli) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            (json!({}), json!({ "error": e }), Status::Error)
        }
    };
    let elapsed = start.elapsed().as_secs_f64();
    if cli.timing {
        eprintln!("elapsed: {elapsed:.3} s");
    }
    let report = json!({
        "subcommand": subcommand_name(&cli.command),
        "parameters": parameters,
        "results": results,
        "status": status.as_str(),
        "elapsed": if cli.timing { json!(elapsed) } else { Value::Null },
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    );
    match status {
        Status::Pass => ExitCode::SUCCESS,
        Status::Fail => ExitCode::from(1),
        Status::Error => ExitCode::from(2),
    }
}

//! Command-line front end. `run` returns the process exit code:
//! 0 success, 1 usage or input error, 2 a check failed, 3 a resource limit
//! was hit.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::coupling::{verify_many, LemmaId, Mode, VerifyOptions};
use crate::error::{Error, Result};
use crate::harness::{self, Bundle, Limits, Profile, ReproduceConfig};
use crate::lp::{self, CertificateForm, LpVariant};
use crate::model::Instance;
use crate::policies::{self, DpConfig, PolicyId};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "rematch", version, about = "Repeated stochastic matching toolkit")]
struct Cli {
    /// Worker threads (falls back to REMATCH_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(flatten)]
    limits: LimitArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
struct LimitArgs {
    /// Most edges for full sample enumeration.
    #[arg(long, global = true, default_value_t = crate::model::DEFAULT_ENUMERATION_LIMIT)]
    enumeration_limit: usize,
    /// Most edges for the exact dynamic program.
    #[arg(long, global = true, default_value_t = policies::DEFAULT_DP_LIMIT)]
    dp_limit: usize,
    /// Most candidate edges for exhaustive general matching.
    #[arg(long, global = true, default_value_t = crate::kernels::DEFAULT_EXACT_LIMIT)]
    exact_limit: usize,
}

impl LimitArgs {
    fn limits(self) -> Limits {
        Limits { enumeration: self.enumeration_limit, dp: self.dp_limit, exact: self.exact_limit }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a generated instance as JSON.
    Gen {
        #[command(subcommand)]
        family: Family,
        /// Output file (stdout if absent).
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo reward statistics for one policy.
    Simulate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value = "sm")]
        policy: String,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check lemmas on an instance file or a generated family.
    Verify(VerifyArgs),
    /// Factor-revealing LP at one horizon.
    Lp {
        #[arg(long)]
        t: usize,
        #[arg(long, default_value = "sm")]
        variant: String,
        /// Solve the primal with the simplex method.
        #[arg(long)]
        solve: bool,
        /// Check the dual certificate; exits 2 when infeasible.
        #[arg(long)]
        check_dual: bool,
        #[arg(long, value_enum, default_value_t = FormArg::FiniteHorizon)]
        form: FormArg,
    },
    /// Exact optimal expected reward.
    Opt {
        #[arg(long)]
        instance: PathBuf,
        /// Restrict to policies that keep every found success.
        #[arg(long)]
        commit: bool,
    },
    /// Run a named experiment bundle, or all of them.
    Reproduce {
        /// One of lp, lemmas, generalized, ratios, separation, upper-bound,
        /// offline, kernels, all.
        bundle: String,
        #[arg(long, default_value_t = harness::DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum Family {
    Gneps {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
    },
    Separation,
    Knn {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
    },
    Random {
        #[arg(long, default_value = "unit-small")]
        profile: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, conflicts_with = "profile")]
    instance: Option<PathBuf>,
    /// Generate `count` instances from this profile instead of reading one.
    #[arg(long)]
    profile: Option<String>,
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Lemma names; all applicable ones when absent.
    #[arg(long = "lemma")]
    lemmas: Vec<String>,
    /// Horizon; every t ≤ T when absent.
    #[arg(long)]
    t: Option<usize>,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    mode: ModeArg,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Policy standing in for OPT: opt or opt_commit.
    #[arg(long, default_value = "opt")]
    reference: String,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum ModeArg {
    Exact,
    MonteCarlo,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum FormArg {
    Printed,
    FiniteHorizon,
}

/// Runs the CLI with the process's stdout and stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let threads = cli.threads.or_else(|| std::env::var("REMATCH_THREADS").ok().and_then(|v| v.parse().ok()));
    let mut buf: Vec<u8> = Vec::new();
    let result = match threads {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli, &mut buf)),
            Err(e) => Err(Error::Domain(format!("cannot start {n} threads: {e}"))),
        },
        _ => dispatch(&cli, &mut buf),
    };
    let result = result.and_then(|code| {
        out.write_all(&buf)?;
        Ok(code)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_resource_limit() {
                EXIT_RESOURCE
            } else {
                EXIT_USAGE
            }
        }
    }
}

fn emit(out: &mut dyn Write, path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn load(path: &PathBuf) -> Result<Instance> {
    Instance::from_json(&fs::read_to_string(path)?)
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let limits = cli.limits.limits();
    limits.validate()?;
    match &cli.command {
        Command::Gen { family, out: path } => {
            let inst = match family {
                Family::Gneps { n, eps } => harness::gen_gneps(*n, *eps)?,
                Family::Separation => harness::gen_separation(),
                Family::Knn { n, p } => harness::gen_knn(*n, *p)?,
                Family::Random { profile, seed } => harness::gen_random(profile.parse()?, *seed),
            };
            emit(out, path.as_ref(), &format!("{}\n", inst.to_json()))?;
            Ok(EXIT_OK)
        }
        Command::Simulate { instance, policy, trials, seed, format, out: path } => {
            let inst = load(instance)?;
            let policy: PolicyId = policy.parse()?;
            let stats = harness::monte_carlo_with(&inst, policy, *trials, *seed, &limits)?;
            let text = match format {
                Format::Json => format!("{}\n", stats.to_json()),
                Format::Csv => stats.to_csv(),
            };
            emit(out, path.as_ref(), &text)?;
            Ok(EXIT_OK)
        }
        Command::Verify(args) => verify(args, &limits, out),
        Command::Lp { t, variant, solve, check_dual, form } => {
            let variant: LpVariant = variant.parse()?;
            let primal = if *solve { Some(lp::build_primal(*t, variant)?.solve()?.objective) } else { None };
            let u = lp::u_closed_form(*t, variant)?;
            let factor = lp::approximation_factor(*t, variant).ok();
            let mut feasible = None;
            let mut violated = None;
            if *check_dual {
                let form = match form {
                    FormArg::Printed => CertificateForm::Printed,
                    FormArg::FiniteHorizon => CertificateForm::FiniteHorizon,
                };
                let cert = lp::dual_certificate(*t, variant, form)?;
                let check = lp::verify_dual_feasible(&cert, *t, variant);
                feasible = Some(check.feasible);
                violated = check.violated;
            }
            let line = json!({"t": t, "variant": variant.name(), "primal_opt": primal, "dual_u": u,
                              "factor": factor, "feasible": feasible, "violated": violated});
            writeln!(out, "{line}")?;
            Ok(if feasible == Some(false) { EXIT_CHECK_FAILED } else { EXIT_OK })
        }
        Command::Opt { instance, commit } => {
            let inst = load(instance)?;
            let table = policies::build_dp_with(&inst, DpConfig { limit: limits.dp, ..DpConfig::new(*commit) })?;
            let line = json!({"value": table.root_value(), "commit": commit, "edges": inst.edge_count(),
                              "rounds": inst.rounds, "states": table.len()});
            writeln!(out, "{line}")?;
            Ok(EXIT_OK)
        }
        Command::Reproduce { bundle, seed, out: path } => {
            let config = ReproduceConfig { seed: *seed, limits };
            let bundles: Vec<Bundle> =
                if bundle == "all" { Bundle::ALL.to_vec() } else { vec![bundle.parse()?] };
            let mut text = String::new();
            let mut pass = true;
            for b in bundles {
                let r = harness::reproduce(b, &config)?;
                pass &= r.pass;
                text.push_str(&r.render());
            }
            emit(out, path.as_ref(), &text)?;
            Ok(if pass { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
    }
}

fn verify(args: &VerifyArgs, limits: &Limits, out: &mut dyn Write) -> Result<i32> {
    let instances: Vec<Instance> = match (&args.instance, &args.profile) {
        (Some(path), _) => vec![load(path)?],
        (None, Some(profile)) => {
            let profile: Profile = profile.parse()?;
            (0..args.count).map(|i| harness::gen_random(profile, crate::rng::mix(args.seed, i as u64))).collect()
        }
        (None, None) => return Err(Error::Domain("give --instance or --profile".into())),
    };
    let requested: Vec<LemmaId> = args.lemmas.iter().map(|l| l.parse()).collect::<Result<_>>()?;
    let mode = match args.mode {
        ModeArg::Exact => Mode::Exact,
        ModeArg::MonteCarlo => Mode::MonteCarlo { trials: args.trials, seed: args.seed },
    };
    let options = VerifyOptions {
        reference: args.reference.parse()?,
        enumeration_limit: limits.enumeration,
        dp_limit: limits.dp,
        exact_limit: limits.exact,
    };
    let mut all_hold = true;
    for (index, inst) in instances.iter().enumerate() {
        let lemmas = if requested.is_empty() { LemmaId::applicable(inst) } else { requested.clone() };
        let horizons: Vec<usize> = match args.t {
            Some(t) => vec![t],
            None => (1..=inst.rounds).collect(),
        };
        for report in verify_many(inst, &lemmas, &horizons, mode, &options)? {
            all_hold &= report.holds();
            let mut value = serde_json::to_value(&report)?;
            if instances.len() > 1 {
                value.as_object_mut().expect("object").insert("instance".into(), json!(index));
            }
            writeln!(out, "{value}")?;
        }
    }
    Ok(if all_hold { EXIT_OK } else { EXIT_CHECK_FAILED })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_with(std::iter::once("rematch").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn help_and_usage_codes() {
        assert_eq!(call(&["--help"]).0, EXIT_OK);
        assert_eq!(call(&["--version"]).0, EXIT_OK);
        assert_eq!(call(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(call(&["gen", "gneps", "--n", "1"]).0, EXIT_USAGE);
    }

    #[test]
    fn lp_json_and_check_codes() {
        let (code, out, _) = call(&["lp", "--t", "4", "--variant", "sm", "--solve", "--check-dual"]);
        assert_eq!(code, EXIT_OK);
        let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
        assert!((v["primal_opt"].as_f64().unwrap() - v["dual_u"].as_f64().unwrap()).abs() < 1e-9);
        assert_eq!(v["feasible"], json!(true));
        let (code, _, _) = call(&["lp", "--t", "5", "--check-dual", "--form", "printed"]);
        assert_eq!(code, EXIT_CHECK_FAILED);
    }

    #[test]
    fn resource_limit_code() {
        assert_eq!(call(&["--dp-limit", "99", "lp", "--t", "3"]).0, EXIT_RESOURCE);
    }

    #[test]
    fn verify_profile_holds() {
        let (code, out, err) = call(&["verify", "--profile", "unit-small", "--count", "3", "--seed", "4"]);
        assert_eq!(code, EXIT_OK, "{err}");
        assert!(out.lines().count() > 3);
    }
}

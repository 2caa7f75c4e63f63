//! Command-line front end.  A thin adapter: every number printed here is
//! reproducible by calling the library with the same configuration.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::json;

use sdym::backlund::{BacklundTransform, Order, TransformSettings};
use sdym::charge::{radial_profile, total_charge_grid, total_charge_radial_with, RadialSettings};
use sdym::jet::RealSlicePoint;
use sdym::seeds::{SeedSpec, Solution};
use sdym::verify::{verify_solution, CheckStatus, VerifySettings};
use sdym::{Result, SdymError};

#[derive(Parser)]
#[command(name = "sdym", version, about = "Exact seed solutions, transformations and charge \
integrals for a self-dual gauge system", long_about = None)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the full identity catalogue of a seed and write a JSON report.
    Verify(VerifyArgs),
    /// Evaluate the composed transformation at a base point.
    Transform(TransformArgs),
    /// Tabulate charge densities on a radial grid as CSV.
    ChargeProfile(ProfileArgs),
    /// Integrate the transformed charge density over the whole slice.
    TotalCharge(TotalArgs),
    /// Write a built-in seed description for use with the other commands.
    Seed(SeedArgs),
}

/// Options shared by every evaluating subcommand.
#[derive(Args)]
struct RunConfig {
    /// Seed description file (JSON).
    #[arg(long, value_name = "PATH")]
    seed: Option<PathBuf>,
    /// Built-in radial one-lump seed with parameter "re[,im]".
    #[arg(long, value_name = "A", conflicts_with = "seed")]
    instanton: Option<String>,
    /// Truncation degree of jet evaluations.
    #[arg(long, default_value_t = 4)]
    jet_degree: usize,
    /// Gauss-Legendre node count for quadrature.
    #[arg(long, default_value_t = 32)]
    quad_order: usize,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    config: RunConfig,
    /// Number of sample points.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Sample points for the transformation checks.
    #[arg(long, default_value_t = 20)]
    transform_samples: usize,
    /// Radius of the sampled ball on the real slice.
    #[arg(long, default_value_t = 2.0)]
    radius: f64,
    /// PRNG seed for sampling.
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
    /// Tolerance override "identity=value"; the name "all" matches every entry.
    #[arg(long, value_name = "NAME=VALUE", value_parser = parse_tol)]
    tol: Vec<(String, f64)>,
}

#[derive(Args)]
struct TransformArgs {
    #[command(flatten)]
    config: RunConfig,
    /// Base point "y_re,y_im,z_re,z_im" on the real slice.
    #[arg(long, default_value = "0,0,0,0", value_parser = parse_base)]
    base: RealSlicePoint,
}

#[derive(Args)]
struct ProfileArgs {
    #[command(flatten)]
    config: RunConfig,
    /// Largest radius of the profile.
    #[arg(long, default_value_t = 5.0)]
    r_max: f64,
    /// Number of radii, equally spaced in (0, r_max].
    #[arg(long, default_value_t = 50)]
    count: usize,
}

#[derive(Args)]
struct TotalArgs {
    #[command(flatten)]
    config: RunConfig,
    /// Integration scheme.
    #[arg(long, value_enum, default_value = "radial")]
    method: Method,
    /// Half-width of the grid box (grid method only).
    #[arg(long, default_value_t = 3.0)]
    half_width: f64,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Method {
    Radial,
    Grid,
}

#[derive(Args)]
struct SeedArgs {
    /// Radial one-lump seed with parameter "re[,im]".
    #[arg(long, value_name = "A", conflicts_with = "vacuum")]
    instanton: Option<String>,
    /// Trivial seed (identity group element, vanishing potentials).
    #[arg(long)]
    vacuum: bool,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

fn parse_complex(text: &str) -> std::result::Result<Complex64, String> {
    let parts: Vec<&str> = text.split(',').collect();
    let err = |_| format!("expected \"re\" or \"re,im\", got {text:?}");
    match parts.as_slice() {
        [re] => Ok(Complex64::new(re.trim().parse().map_err(err)?, 0.0)),
        [re, im] => Ok(Complex64::new(
            re.trim().parse().map_err(err)?,
            im.trim().parse().map_err(err)?,
        )),
        _ => Err(format!("expected \"re\" or \"re,im\", got {text:?}")),
    }
}

fn parse_base(text: &str) -> std::result::Result<RealSlicePoint, String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 4 {
        return Err(format!("expected \"y_re,y_im,z_re,z_im\", got {text:?}"));
    }
    let mut v = [0.0f64; 4];
    for (slot, part) in v.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| format!("expected \"y_re,y_im,z_re,z_im\", got {text:?}"))?;
    }
    Ok(RealSlicePoint::new(Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3])))
}

fn parse_tol(text: &str) -> std::result::Result<(String, f64), String> {
    let (name, value) = text
        .split_once('=')
        .ok_or_else(|| format!("expected \"identity=value\", got {text:?}"))?;
    let v: f64 = value
        .trim()
        .parse()
        .map_err(|_| format!("tolerance in {text:?} is not a number"))?;
    if !(v > 0.0) {
        return Err(format!("tolerance in {text:?} must be positive"));
    }
    Ok((name.trim().to_string(), v))
}

fn load_solution(config: &RunConfig) -> Result<Solution> {
    if let Some(path) = &config.seed {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SdymError::Config(format!("cannot read {}: {e}", path.display())))?;
        return SeedSpec::from_json(&text)?.build();
    }
    if let Some(a) = &config.instanton {
        let a = parse_complex(a).map_err(SdymError::Config)?;
        return Solution::one_instanton(a);
    }
    Err(SdymError::Config("pass either --seed or --instanton".into()))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| SdymError::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// 2 for malformed input or configuration, 1 for numerical diagnostics.
fn exit_class(e: &SdymError) -> u8 {
    match e {
        SdymError::SeedInvalid(_)
        | SdymError::Config(_)
        | SdymError::FullGaugeRequired
        | SdymError::DegreeBudgetExceeded { .. }
        | SdymError::OrderTooHigh { .. }
        | SdymError::BaseOffRealSlice => 2,
        _ => 1,
    }
}

fn cmd_verify(args: &VerifyArgs) -> Result<ExitCode> {
    let sol = load_solution(&args.config)?;
    let st = VerifySettings {
        degree: args.config.jet_degree,
        quad_order: args.config.quad_order,
        samples: args.samples,
        radius: args.radius,
        rng_seed: args.rng_seed,
        transform_samples: args.transform_samples,
        tol_overrides: args.tol.clone(),
        ..VerifySettings::default()
    };
    let report = verify_solution(&sol, &st)?;
    for chk in &report.checks {
        let (status, detail) = match chk.status {
            CheckStatus::Pass => ("pass", format!("{:.3e}", chk.max_residual.unwrap())),
            CheckStatus::Fail => ("FAIL", format!("{:.3e}", chk.max_residual.unwrap())),
            CheckStatus::Skipped => ("skip", "-".into()),
        };
        eprintln!("{status}  {:<46} {detail:>12}  (tol {:.1e})", chk.name, chk.tol);
    }
    emit(&args.config.out, &report.to_json())?;
    if report.all_pass() {
        eprintln!("verdict: pass");
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("verdict: FAIL");
        Ok(ExitCode::from(1))
    }
}

fn cmd_transform(args: &TransformArgs) -> Result<ExitCode> {
    let sol = load_solution(&args.config)?;
    let settings = TransformSettings {
        degree: args.config.jet_degree,
        quad_order: args.config.quad_order,
        anchor: RealSlicePoint::origin(),
    };
    let p = args.base;
    let bt = BacklundTransform::new(&sol, settings, Order::LeftThenRight);
    let record = bt.arguments(p).and_then(|gp| {
        Ok(json!({
            "base": [p.y.re, p.y.im, p.z.re, p.z.im],
            "alpha": [gp.alpha.value().re, gp.alpha.value().im],
            "tau": [gp.tau.value().re, gp.tau.value().im],
            "beta": [gp.beta.value().re, gp.beta.value().im],
            "hermiticity_residual": bt.hermiticity_residual(p)?,
            "commutativity_residual": bt.commutativity_residual(p)?,
        }))
    });
    match record {
        Ok(v) => {
            emit(&args.config.out, &serde_json::to_string_pretty(&v).unwrap())?;
            Ok(ExitCode::SUCCESS)
        }
        Err(e) if exit_class(&e) == 1 => {
            let v = json!({
                "base": [p.y.re, p.y.im, p.z.re, p.z.im],
                "diagnostic": e.to_string(),
            });
            emit(&args.config.out, &serde_json::to_string_pretty(&v).unwrap())?;
            Ok(ExitCode::from(1))
        }
        Err(e) => Err(e),
    }
}

fn cmd_charge_profile(args: &ProfileArgs) -> Result<ExitCode> {
    if args.count == 0 || !(args.r_max > 0.0) {
        return Err(SdymError::Config("need a positive radius and count".into()));
    }
    let sol = load_solution(&args.config)?;
    let radii: Vec<f64> =
        (1..=args.count).map(|i| args.r_max * i as f64 / args.count as f64).collect();
    let profile = radial_profile(&sol, &radii)?;
    emit(&args.config.out, &profile.to_csv())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_total_charge(args: &TotalArgs) -> Result<ExitCode> {
    let sol = load_solution(&args.config)?;
    let (total, method) = match args.method {
        Method::Radial => {
            let settings =
                RadialSettings { quad_order: args.config.quad_order, ..RadialSettings::default() };
            (total_charge_radial_with(&sol, settings)?, "radial")
        }
        Method::Grid => {
            (total_charge_grid(&sol, args.half_width, args.config.quad_order)?, "grid")
        }
    };
    let v = json!({
        "value": total.value,
        "method": method,
        "error_estimate": total.error_estimate,
    });
    emit(&args.config.out, &serde_json::to_string_pretty(&v).unwrap())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_seed(args: &SeedArgs) -> Result<ExitCode> {
    let spec = if args.vacuum {
        SeedSpec::from_json("{\"kind\": \"full_gauge\"}")?
    } else if let Some(a) = &args.instanton {
        let a = parse_complex(a).map_err(SdymError::Config)?;
        SeedSpec::one_instanton(a)?
    } else {
        return Err(SdymError::Config("pass either --instanton or --vacuum".into()));
    };
    emit(&args.out, &spec.to_json())?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.cmd {
        Command::Verify(a) => cmd_verify(a),
        Command::Transform(a) => cmd_transform(a),
        Command::ChargeProfile(a) => cmd_charge_profile(a),
        Command::TotalCharge(a) => cmd_total_charge(a),
        Command::Seed(a) => cmd_seed(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_class(&e))
        }
    }
}

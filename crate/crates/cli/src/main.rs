mod output;
mod parse;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use hqc::hardy::{growth_exponent, hardy_order};
use hqc::koebe::{coeff_a, coeff_b, HarmonicKoebe, KoebeFamily};
use hqc::lab::{conjecture_report, DEFAULT_SEED};
use hqc::render::{render_disk_image, GridSpec};
use hqc::schwarzian::{sup_norm, sup_norm_trend, Functional, NormRequest};
use hqc::shearing::shear_residual;
use hqc::{dilatation_and_jacobian, DilatationParam, DiskPoint, HarmonicMap, HqcError};

use parse::{parse_grid, parse_integers, parse_point, parse_reals, Integers, Reals};

#[derive(Parser)]
#[command(name = "hqc", version, about = "Harmonic Koebe-type family: evaluation, norms, orders and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate f_k, its parts, dilatation and Jacobian at points
    Eval(EvalArgs),
    /// Taylor coefficients A(n,k), B(n,k)
    Coeffs(CoeffsArgs),
    /// Compare the shearing integration with the closed form
    ShearCheck(ShearArgs),
    /// Weighted sup norm of the Schwarzian or pre-Schwarzian
    SchwarzianNorm(NormArgs),
    /// Integral means M_p(r) and their growth exponent
    Hardy(HardyArgs),
    /// Hardy-space order for given K and Schwarzian bound lambda
    Order(OrderArgs),
    /// Run every consistency check over k and lambda grids
    Verify(VerifyArgs),
    /// SVG image of a polar grid under f_k or the harmonic Koebe map
    Render(RenderArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Param {
    /// Dilatation bound k in [0, 1)
    #[arg(long = "k")]
    k: Option<f64>,
    /// Distortion K = (1+k)/(1-k) >= 1
    #[arg(long = "K")]
    big_k: Option<f64>,
}

impl Param {
    fn resolve(&self) -> Result<DilatationParam> {
        Ok(match (self.k, self.big_k) {
            (Some(k), _) => DilatationParam::from_k(k)?,
            (_, Some(kk)) => DilatationParam::from_big_k(kk)?,
            _ => unreachable!("clap enforces one of --k/--K"),
        })
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    param: Param,
    /// Point `re` or `re,im`; repeatable
    #[arg(long = "z", required = true, value_parser = parse_point, allow_hyphen_values = true)]
    z: Vec<Complex64>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CoeffsArgs {
    #[command(flatten)]
    param: Param,
    /// Indices, as in `1..5` or `2,3,10`
    #[arg(long = "n", value_parser = parse_integers)]
    n: Integers,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ShearArgs {
    #[command(flatten)]
    param: Param,
    /// Number of sample points in |z| <= rmax
    #[arg(long, default_value_t = 100)]
    points: usize,
    #[arg(long, default_value_t = 0.9)]
    rmax: f64,
    /// Quadrature tolerance
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Largest residual accepted before exiting with status 3
    #[arg(long, default_value_t = 1e-8)]
    threshold: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FunctionalArg {
    #[value(name = "S")]
    S,
    #[value(name = "P")]
    P,
}

#[derive(Args)]
struct NormArgs {
    #[command(flatten)]
    param: Param,
    #[arg(long, value_enum, default_value = "S")]
    functional: FunctionalArg,
    /// Radial x angular grid
    #[arg(long, value_parser = parse_grid, default_value = "256x512")]
    grid: (usize, usize),
    /// Boundary margin: the grid stops at |z| = 1 - margin
    #[arg(long, default_value_t = 1e-3)]
    margin: f64,
    /// Also report values at the trend margins 1e-2, 3e-3, 1e-3
    #[arg(long)]
    trend: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HardyArgs {
    #[command(flatten)]
    param: Param,
    #[arg(long)]
    p: f64,
    /// Radii, increasing; the exponent is fitted on the last four
    #[arg(long, value_parser = parse_reals, default_value = "0.9,0.99,0.999,0.9999")]
    radii: Reals,
    /// Absolute quadrature tolerance on the mean of |f|^p
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OrderArgs {
    #[command(flatten)]
    param: Param,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// k grid, as in `0.2,0.4` or `0..0.8:0.2`
    #[arg(long = "k", value_parser = parse_reals, conflicts_with = "big_k")]
    k: Option<Reals>,
    /// K grid; converted to k
    #[arg(long = "K", value_parser = parse_reals)]
    big_k: Option<Reals>,
    #[arg(long, value_parser = parse_reals, default_value = "0,6,6.5,8,10,20,50")]
    lambda: Reals,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct RenderTarget {
    #[arg(long = "k")]
    k: Option<f64>,
    #[arg(long = "K")]
    big_k: Option<f64>,
    /// Render the harmonic Koebe function instead of f_k
    #[arg(long)]
    harmonic_koebe: bool,
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    target: RenderTarget,
    /// Concentric circles, counting the emphasized outer one
    #[arg(long, default_value_t = 10)]
    circles: usize,
    #[arg(long, default_value_t = 24)]
    spokes: usize,
    #[arg(long, default_value_t = 0.98)]
    rmax: f64,
    #[arg(long, default_value_t = 512)]
    samples: usize,
    /// Half-width of the output image in pixels
    #[arg(long, default_value_t = 400.0)]
    viewport: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A flag combination clap cannot express; exits like a parse error.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

enum Outcome {
    Done,
    Failed,
}

#[derive(Serialize)]
struct EvalRow {
    k: f64,
    #[serde(rename = "K")]
    big_k: f64,
    z: Complex64,
    f: Complex64,
    h: Complex64,
    g: Complex64,
    omega: Complex64,
    jacobian: f64,
}

fn eval(args: EvalArgs) -> Result<Outcome> {
    let p = args.param.resolve()?;
    let map = KoebeFamily::new(p)?;
    let rows: Vec<EvalRow> = args
        .z
        .iter()
        .map(|&z| {
            let jet = map.jet(DiskPoint::new(z)?)?;
            let (omega, jacobian) = dilatation_and_jacobian(&jet)?;
            Ok(EvalRow { k: p.k(), big_k: p.big_k(), z, f: jet.value(), h: jet.h[0], g: jet.g[0], omega, jacobian })
        })
        .collect::<Result<_, HqcError>>()?;
    let text = match args.format {
        Format::Json => output::to_json(&rows)?,
        Format::Csv => output::csv(
            &["k", "z_re", "z_im", "f_re", "f_im", "h_re", "h_im", "g_re", "g_im", "omega_re", "omega_im", "jacobian"],
            rows.iter().map(|r| {
                [r.k, r.z.re, r.z.im, r.f.re, r.f.im, r.h.re, r.h.im, r.g.re, r.g.im, r.omega.re, r.omega.im, r.jacobian]
                    .iter()
                    .map(|x| output::real(*x))
                    .collect()
            }),
        ),
    };
    output::emit(args.out.as_deref(), &text)?;
    Ok(Outcome::Done)
}

#[derive(Serialize)]
struct CoeffRow {
    n: u64,
    #[serde(rename = "A")]
    a: f64,
    #[serde(rename = "B")]
    b: f64,
}

fn coeffs(args: CoeffsArgs) -> Result<Outcome> {
    let p = args.param.resolve()?;
    let rows: Vec<CoeffRow> = args
        .n
        .0
        .iter()
        .map(|&n| Ok(CoeffRow { n, a: coeff_a(n, p)?, b: coeff_b(n, p)? }))
        .collect::<Result<_, HqcError>>()?;
    let text = match args.format {
        Format::Json => output::to_json(&rows)?,
        Format::Csv => output::csv(
            &["n", "A", "B"],
            rows.iter().map(|r| vec![r.n.to_string(), output::real(r.a), output::real(r.b)]),
        ),
    };
    output::emit(args.out.as_deref(), &text)?;
    Ok(Outcome::Done)
}

#[derive(Serialize)]
struct ShearReport {
    k: f64,
    #[serde(rename = "K")]
    big_k: f64,
    points: usize,
    rmax: f64,
    seed: u64,
    tol: f64,
    threshold: f64,
    max_residual: f64,
    pass: bool,
}

fn shear_check(args: ShearArgs) -> Result<Outcome> {
    let p = args.param.resolve()?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    if !(args.rmax > 0.0 && args.rmax < 1.0) {
        return Err(HqcError::Domain(format!("rmax = {} must lie in (0, 1)", args.rmax)).into());
    }
    let grid: Vec<DiskPoint> = (0..args.points)
        .map(|_| DiskPoint::from_polar(args.rmax * rng.gen::<f64>().sqrt(), std::f64::consts::TAU * rng.gen::<f64>()))
        .collect::<Result<_, HqcError>>()?;
    let max_residual = shear_residual(p, &grid, args.tol)?;
    let report = ShearReport {
        k: p.k(),
        big_k: p.big_k(),
        points: args.points,
        rmax: args.rmax,
        seed: args.seed,
        tol: args.tol,
        threshold: args.threshold,
        max_residual,
        pass: max_residual <= args.threshold,
    };
    output::emit(args.out.as_deref(), &output::to_json(&report)?)?;
    Ok(if report.pass { Outcome::Done } else { Outcome::Failed })
}

fn schwarzian_norm(args: NormArgs) -> Result<Outcome> {
    let map = KoebeFamily::new(args.param.resolve()?)?;
    let functional = match args.functional {
        FunctionalArg::S => Functional::Schwarzian,
        FunctionalArg::P => Functional::PreSchwarzian,
    };
    let request = NormRequest::new(functional).with_grid(args.grid.0, args.grid.1).with_margin(args.margin);
    let text = if args.trend {
        output::to_json(&sup_norm_trend(&map, &request)?)?
    } else {
        output::to_json(&sup_norm(&map, &request)?)?
    };
    output::emit(args.out.as_deref(), &text)?;
    Ok(Outcome::Done)
}

fn hardy(args: HardyArgs) -> Result<Outcome> {
    let map = KoebeFamily::new(args.param.resolve()?)?;
    let curve = growth_exponent(&map, args.p, &args.radii.0, args.tol)?;
    let text = match args.format {
        Format::Json => output::to_json(&curve)?,
        Format::Csv => output::csv(
            &["r", "M_p"],
            curve.radii.iter().zip(&curve.means).map(|(r, m)| vec![output::real(*r), output::real(*m)]),
        ),
    };
    output::emit(args.out.as_deref(), &text)?;
    Ok(Outcome::Done)
}

fn order(args: OrderArgs) -> Result<Outcome> {
    let p = args.param.resolve()?;
    output::emit(args.out.as_deref(), &output::to_json(&hardy_order(p.big_k(), args.lambda)?)?)?;
    Ok(Outcome::Done)
}

fn verify(args: VerifyArgs) -> Result<Outcome> {
    let k_grid: Vec<f64> = match (&args.k, &args.big_k) {
        (Some(k), _) => k.0.clone(),
        (None, Some(kk)) => {
            kk.0.iter().map(|&x| DilatationParam::from_big_k(x).map(|p| p.k())).collect::<Result<_, HqcError>>()?
        }
        (None, None) => vec![0.2, 0.4, 0.6, 0.8],
    };
    let report = conjecture_report(&k_grid, &args.lambda.0)?;
    for check in &report.checks {
        eprintln!(
            "{} {:<40} worst {:+.3e} (tol {:.0e})",
            if check.pass { "PASS" } else { "FAIL" },
            check.check_name,
            check.worst_violation,
            check.tolerance
        );
    }
    output::emit(args.out.as_deref(), &output::to_json(&report)?)?;
    Ok(if report.all_pass { Outcome::Done } else { Outcome::Failed })
}

fn render(args: RenderArgs) -> Result<Outcome> {
    let spec = GridSpec {
        circles: args.circles,
        spokes: args.spokes,
        max_radius: args.rmax,
        samples_per_curve: args.samples,
        viewport: args.viewport,
    };
    let t = &args.target;
    let (map, title): (Box<dyn HarmonicMap>, String) = if t.harmonic_koebe {
        (Box::new(HarmonicKoebe), "harmonic Koebe function".into())
    } else {
        let p = match (t.k, t.big_k) {
            (Some(k), _) => DilatationParam::from_k(k)?,
            (_, Some(kk)) => DilatationParam::from_big_k(kk)?,
            _ => unreachable!("clap enforces one render target"),
        };
        (Box::new(KoebeFamily::new(p)?), format!("f_k, k = {}", p.k()))
    };
    let rendering = render_disk_image(&map, &spec, &title)?;
    if rendering.nesting.pass {
        eprintln!("nesting check: pass");
    } else {
        eprintln!(
            "nesting check: FLAGGED ({} crossings, {} uncontained pairs)",
            rendering.nesting.crossings, rendering.nesting.uncontained
        );
    }
    output::emit(args.out.as_deref(), &rendering.svg)?;
    Ok(Outcome::Done)
}

fn configure_threads() -> Result<()> {
    if let Ok(value) = std::env::var("HQC_THREADS") {
        let n: usize = value
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| UsageError(format!("HQC_THREADS = '{value}' must be a positive integer")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring thread pool")?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<Outcome> {
    configure_threads()?;
    match cli.command {
        Command::Eval(a) => eval(a),
        Command::Coeffs(a) => coeffs(a),
        Command::ShearCheck(a) => shear_check(a),
        Command::SchwarzianNorm(a) => schwarzian_norm(a),
        Command::Hardy(a) => hardy(a),
        Command::Order(a) => order(a),
        Command::Verify(a) => verify(a),
        Command::Render(a) => render(a),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return 1;
        }
        if let Some(e) = cause.downcast_ref::<HqcError>() {
            return if e.is_domain() { 2 } else { 4 };
        }
    }
    4
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

//! Command-line front end.
//!
//! Every command that checks something prints one JSON object per check
//! (JSON lines). Exit codes: 0 success, 1 failed check, 2 usage error,
//! 3 file error.

mod suites;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::algebra::{AlgebraSpec, Multivector};
use crate::fieldio::{
    read_field, write_field, write_manifest, FieldError, FieldGenerator, FieldManifest, GridSpec, Profile,
    SampledField, TrigTerm,
};
use crate::kernel::ExtendedPoint;
use crate::monogenic::{dirac_residual_norm, extend, ExtensionSpec, ExtensionVariant, MonogenicError, DEFAULT_STEP};
use crate::random::{random_field, random_smooth_field, rng_from_seed, DEFAULT_SEED};
use crate::transform::{convolve, rel_linf, transform, Direction, Engine, Side, TransformError, TransformRequest};

pub use suites::{run_suite, Suite};

#[derive(Debug, Parser)]
#[command(name = "cliffourier", version, about = "Clifford–Fourier transforms of multivector fields")]
pub struct Cli {
    /// Seed for every pseudo-random field.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Add wall-clock `elapsed` seconds to every report line.
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
pub enum Command {
    /// Sample a built-in generator onto a grid and write an MVF1 file.
    Sample(SampleArgs),
    /// Transform an MVF1 field.
    Transform(TransformArgs),
    /// Periodic convolution of two fields on the same grid.
    Convolve(ConvolveArgs),
    /// Evaluate a monogenic extension of a density at points of R^{2n}.
    Extend(ExtendArgs),
    /// Run a named verification suite.
    Verify(VerifyArgs),
    /// Print the header of an MVF1 file.
    Info(InfoArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ProfileKind {
    Gaussian,
    Box,
    Ball,
    PolynomialGaussian,
    Trig,
    Random,
    RandomSmooth,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Base dimension n (1..=4).
    #[arg(long)]
    pub n: usize,
    /// Nodes per axis, comma separated (one value is repeated).
    #[arg(long, value_delimiter = ',')]
    pub dims: Vec<usize>,
    /// Lower corner of the sampled region, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lower: Vec<f64>,
    /// Upper corner of the sampled region, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub upper: Vec<f64>,
    /// Put nodes at cell centres instead of lower cell corners.
    #[arg(long)]
    pub cell_centered: bool,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_enum, default_value = "gaussian")]
    pub profile: ProfileKind,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub center: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub width: f64,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Box corners for the box profile.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub box_lower: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub box_upper: Vec<f64>,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub constant: f64,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub linear: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub quadratic: Vec<f64>,
    /// Trigonometric terms as a JSON array of
    /// `{"amplitude": a, "frequency": [..], "phase": p}`.
    #[arg(long)]
    pub terms: Option<String>,
    /// Blade coefficients (4^n values in blade-mask order); default 1.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub weights: Vec<f64>,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    pub input: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value = "left")]
    pub side: Side,
    #[arg(long, value_enum, default_value = "forward")]
    pub direction: Direction,
    #[arg(long, value_enum, default_value = "fast")]
    pub engine: Engine,
    /// Use the grid of this field as output grid (default: dual grid).
    #[arg(long)]
    pub grid_from: Option<PathBuf>,
    /// Compare the result with this field and report `relLinf`.
    #[arg(long)]
    pub reference: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConvolveArgs {
    pub f: PathBuf,
    pub g: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExtendArgs {
    pub density: PathBuf,
    #[arg(long, value_enum, default_value = "f1-left")]
    pub variant: ExtensionVariant,
    /// Point `y1,..,yn;y'1,..,y'n`; repeatable.
    #[arg(long = "point", required = true, allow_hyphen_values = true)]
    pub points: Vec<String>,
    /// Finite-difference step of the Dirac residual.
    #[arg(long, default_value_t = DEFAULT_STEP)]
    pub step: f64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    /// Restrict to one base dimension (default: 1 and 2).
    #[arg(long)]
    pub n: Option<usize>,
    /// Also write the report lines to this file.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InfoArgs {
    pub input: PathBuf,
}

impl ValueEnum for Side {
    fn value_variants<'a>() -> &'a [Self] {
        &[Side::Left, Side::Right]
    }
    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(match self {
            Side::Left => "left",
            Side::Right => "right",
        }))
    }
}

impl ValueEnum for Direction {
    fn value_variants<'a>() -> &'a [Self] {
        &[Direction::Forward, Direction::Inverse]
    }
    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(match self {
            Direction::Forward => "forward",
            Direction::Inverse => "inverse",
        }))
    }
}

impl ValueEnum for Engine {
    fn value_variants<'a>() -> &'a [Self] {
        &[Engine::Direct, Engine::Fast]
    }
    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(match self {
            Engine::Direct => "direct",
            Engine::Fast => "fast",
        }))
    }
}

impl ValueEnum for ExtensionVariant {
    fn value_variants<'a>() -> &'a [Self] {
        &ExtensionVariant::ALL
    }
    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(self.name()))
    }
}

/// One line of a JSON-lines report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub check: String,
    pub parameters: BTreeMap<String, Value>,
    pub metrics: BTreeMap<String, f64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed: Option<f64>,
}

impl RunReport {
    pub fn new(command: &str, check: &str, parameters: Value, metrics: &[(&str, f64)], pass: bool) -> Self {
        let parameters = match parameters {
            Value::Object(map) => map.into_iter().collect(),
            Value::Null => BTreeMap::new(),
            other => BTreeMap::from([("value".to_string(), other)]),
        };
        Self {
            command: command.to_string(),
            check: check.to_string(),
            parameters,
            metrics: metrics.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            pass,
            elapsed: None,
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("reports serialize")
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    File(String),
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::File(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::File(m) | CliError::Failed(m) => m,
        }
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        match e {
            FieldError::InvalidGrid(_) | FieldError::InvalidParameters(_) | FieldError::GridMismatch => {
                CliError::Usage(e.to_string())
            }
            FieldError::Algebra(_) => CliError::Usage(e.to_string()),
            _ => CliError::File(format!("{} ({})", e, e.code())),
        }
    }
}

impl From<TransformError> for CliError {
    fn from(e: TransformError) -> Self {
        match e {
            TransformError::Field(f) => f.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<MonogenicError> for CliError {
    fn from(e: MonogenicError) -> Self {
        match e {
            MonogenicError::Field(f) => f.into(),
            MonogenicError::Transform(t) => t.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

/// Parses `std::env::args`, runs the command and returns the exit code.
pub fn main() -> i32 {
    run_from(std::env::args_os())
}

pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.threads {
        Some(0) => Err(CliError::Usage("--threads must be positive".into())),
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| run(&cli)),
            Err(e) => Err(CliError::Usage(e.to_string())),
        },
        None => run(&cli),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

fn run(cli: &Cli) -> Result<i32, CliError> {
    let mut out = Output::new(cli.timing);
    match &cli.command {
        Command::Sample(args) => cmd_sample(args, cli.seed, &mut out),
        Command::Transform(args) => cmd_transform(args, &mut out),
        Command::Convolve(args) => cmd_convolve(args, &mut out),
        Command::Extend(args) => cmd_extend(args, &mut out),
        Command::Verify(args) => cmd_verify(args, cli.seed, &mut out),
        Command::Info(args) => cmd_info(args),
    }
}

/// Collects report lines and prints them as they are produced.
struct Output {
    timing: bool,
    started: Instant,
    lines: Vec<String>,
    all_pass: bool,
}

impl Output {
    fn new(timing: bool) -> Self {
        Self {
            timing,
            started: Instant::now(),
            lines: Vec::new(),
            all_pass: true,
        }
    }

    fn emit(&mut self, mut report: RunReport) {
        if self.timing {
            report.elapsed = Some(self.started.elapsed().as_secs_f64());
        }
        self.all_pass &= report.pass;
        let line = report.to_line();
        println!("{line}");
        self.lines.push(line);
    }

    fn exit_code(&self) -> i32 {
        if self.all_pass {
            0
        } else {
            1
        }
    }

    fn save(&self, path: &Path) -> Result<(), CliError> {
        let mut file = fs::File::create(path).map_err(|e| CliError::File(format!("{}: {e}", path.display())))?;
        for line in &self.lines {
            writeln!(file, "{line}").map_err(|e| CliError::File(e.to_string()))?;
        }
        Ok(())
    }
}

fn expand(values: &[f64], n: usize, what: &str) -> Result<Vec<f64>, CliError> {
    match values.len() {
        1 => Ok(vec![values[0]; n]),
        len if len == n => Ok(values.to_vec()),
        len => Err(CliError::Usage(format!("--{what}: expected 1 or {n} values, got {len}"))),
    }
}

fn build_grid(args: &GridArgs) -> Result<GridSpec, CliError> {
    let n = args.n;
    if n == 0 || n > crate::algebra::MAX_N {
        return Err(CliError::Usage(format!("--n {n} outside 1..=4")));
    }
    let dims = match args.dims.len() {
        1 => vec![args.dims[0]; n],
        len if len == n => args.dims.clone(),
        len => return Err(CliError::Usage(format!("--dims: expected 1 or {n} values, got {len}"))),
    };
    let lower = expand(&args.lower, n, "lower")?;
    let upper = expand(&args.upper, n, "upper")?;
    let grid = if args.cell_centered {
        GridSpec::cell_centered(dims, &lower, &upper)?
    } else {
        GridSpec::from_extent(dims, &lower, &upper)?
    };
    Ok(grid)
}

fn cmd_sample(args: &SampleArgs, seed: u64, out: &mut Output) -> Result<i32, CliError> {
    let grid = build_grid(&args.grid)?;
    let n = grid.n();
    let spec = AlgebraSpec::new(n).map_err(|e| CliError::Usage(e.to_string()))?;
    let weights = if args.weights.is_empty() {
        Multivector::one(spec)
    } else {
        Multivector::from_coeffs(spec, args.weights.clone()).map_err(|e| CliError::Usage(e.to_string()))?
    };
    let center = if args.center.is_empty() {
        vec![0.0; n]
    } else {
        expand(&args.center, n, "center")?
    };
    let profile = match args.profile {
        ProfileKind::Gaussian => Some(Profile::Gaussian {
            center,
            width: args.width,
        }),
        ProfileKind::Box => Some(Profile::BoxIndicator {
            lower: expand(&args.box_lower, n, "box-lower")?,
            upper: expand(&args.box_upper, n, "box-upper")?,
        }),
        ProfileKind::Ball => Some(Profile::BallIndicator {
            center,
            radius: args.radius,
        }),
        ProfileKind::PolynomialGaussian => Some(Profile::PolynomialGaussian {
            constant: args.constant,
            linear: if args.linear.is_empty() { vec![0.0; n] } else { expand(&args.linear, n, "linear")? },
            quadratic: if args.quadratic.is_empty() {
                vec![0.0; n]
            } else {
                expand(&args.quadratic, n, "quadratic")?
            },
            width: args.width,
        }),
        ProfileKind::Trig => {
            let text = args
                .terms
                .as_deref()
                .ok_or_else(|| CliError::Usage("--terms is required for the trig profile".into()))?;
            let terms: Vec<TrigTerm> =
                serde_json::from_str(text).map_err(|e| CliError::Usage(format!("--terms: {e}")))?;
            Some(Profile::TrigPolynomial { terms })
        }
        ProfileKind::Random | ProfileKind::RandomSmooth => None,
    };
    let (field, generator, parameters) = match profile {
        Some(profile) => {
            let gen = FieldGenerator::new(profile, weights)?;
            let field = crate::fieldio::sample(&gen, &grid, spec)?;
            let params = serde_json::to_value(&gen).expect("generator serializes");
            (field, gen.profile.kind().to_string(), params)
        }
        None => {
            let mut rng = rng_from_seed(seed);
            let (field, name) = match args.profile {
                ProfileKind::Random => (random_field(&grid, spec, &mut rng)?, "random"),
                _ => (random_smooth_field(&grid, spec, &mut rng)?, "random-smooth"),
            };
            (field, name.to_string(), json!({ "seed": seed }))
        }
    };
    write_field(&field, &args.output)?;
    let parameters = json!({ "generator": parameters, "grid": grid });
    write_manifest(&FieldManifest::new(generator.clone(), parameters), &args.output)?;
    out.emit(RunReport::new(
        "sample",
        &generator,
        json!({ "output": args.output.display().to_string(), "n": n, "dims": grid.dims() }),
        &[("l2Norm", field.l2_norm()), ("maxNorm", field.max_norm())],
        true,
    ));
    Ok(0)
}

fn cmd_transform(args: &TransformArgs, out: &mut Output) -> Result<i32, CliError> {
    let f = read_field(&args.input)?;
    let mut req = TransformRequest::new(args.side, args.direction, args.engine);
    if let Some(path) = &args.grid_from {
        req = req.with_output_grid(read_field(path)?.grid().clone());
    }
    let result = transform(&f, &req)?;
    write_field(&result, &args.output)?;
    let mut metrics = vec![("inputL2Norm", f.l2_norm()), ("outputL2Norm", result.l2_norm())];
    let mut pass = true;
    let mut grids_match = None;
    if let Some(path) = &args.reference {
        let reference = read_field(path)?;
        let same = reference.grid().same_as(result.grid()) && reference.spec() == result.spec();
        grids_match = Some(same);
        let rel = if same { rel_linf(&result, &reference)? } else { f64::INFINITY };
        metrics.push(("relLinf", rel));
        pass = same && rel <= 1e-8;
    }
    let mut params = json!({
        "input": args.input.display().to_string(),
        "output": args.output.display().to_string(),
        "side": side_name(args.side),
        "direction": direction_name(args.direction),
        "engine": engine_name(args.engine),
    });
    if let Some(same) = grids_match {
        params["gridsMatch"] = json!(same);
    }
    out.emit(RunReport::new("transform", "transform", params, &metrics, pass));
    Ok(out.exit_code())
}

fn cmd_convolve(args: &ConvolveArgs, out: &mut Output) -> Result<i32, CliError> {
    let f = read_field(&args.f)?;
    let g = read_field(&args.g)?;
    let result = convolve(&f, &g)?;
    write_field(&result, &args.output)?;
    out.emit(RunReport::new(
        "convolve",
        "convolve",
        json!({ "output": args.output.display().to_string() }),
        &[("l2Norm", result.l2_norm())],
        true,
    ));
    Ok(0)
}

fn parse_point(text: &str, n: usize) -> Result<ExtendedPoint, CliError> {
    let bad = || CliError::Usage(format!("--point {text:?}: expected `y1,..,yn;y'1,..,y'n`"));
    let (y, yp) = text.split_once(';').ok_or_else(bad)?;
    let parse = |s: &str| -> Result<Vec<f64>, CliError> {
        s.split(',').map(|v| v.trim().parse::<f64>().map_err(|_| bad())).collect()
    };
    let (y, yp) = (parse(y)?, parse(yp)?);
    if y.len() != n || yp.len() != n {
        return Err(bad());
    }
    ExtendedPoint::new(y, yp).map_err(|_| bad())
}

fn cmd_extend(args: &ExtendArgs, out: &mut Output) -> Result<i32, CliError> {
    let density = read_field(&args.density)?;
    let n = density.spec().n();
    let ext = ExtensionSpec::new(args.variant, density)?;
    for text in &args.points {
        let p = parse_point(text, n)?;
        let value = extend(&ext, &p)?;
        let residual = dirac_residual_norm(&ext, &p, args.step)?;
        out.emit(RunReport::new(
            "extend",
            args.variant.name(),
            json!({ "y": p.y, "yPrime": p.y_prime, "step": args.step, "value": value.coeffs() }),
            &[("norm", value.norm()), ("diracResidual", residual)],
            residual <= 1e-4,
        ));
    }
    Ok(out.exit_code())
}

fn cmd_verify(args: &VerifyArgs, seed: u64, out: &mut Output) -> Result<i32, CliError> {
    let dims: Vec<usize> = match args.n {
        Some(n @ 1..=2) => vec![n],
        Some(n) => return Err(CliError::Usage(format!("--n {n}: suites run for n = 1 or 2"))),
        None => vec![1, 2],
    };
    run_suite(args.suite, &dims, seed, &mut |r| out.emit(r))?;
    if let Some(path) = &args.report {
        out.save(path)?;
    }
    Ok(out.exit_code())
}

fn cmd_info(args: &InfoArgs) -> Result<i32, CliError> {
    let f: SampledField = read_field(&args.input)?;
    let grid = f.grid();
    let join = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(", ");
    println!("n: {}", grid.n());
    println!(
        "dims: {}",
        grid.dims().iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" x ")
    );
    println!("origin: {}", join(grid.origin()));
    println!("spacing: {}", join(grid.spacing()));
    println!("complex: {}", f.is_complex());
    println!("points: {}", grid.len());
    println!("l2-norm: {:e}", f.l2_norm());
    Ok(0)
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Left => "left",
        Side::Right => "right",
    }
}

fn direction_name(direction: Direction) -> &'static str {
    match direction {
        Direction::Forward => "forward",
        Direction::Inverse => "inverse",
    }
}

fn engine_name(engine: Engine) -> &'static str {
    match engine {
        Engine::Direct => "direct",
        Engine::Fast => "fast",
    }
}

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use flate2::write::GzEncoder;
use flate2::Compression;

use parisian_qsd::inversion::EulerInversion;
use parisian_qsd::qsd::{qsd_density, qsd_transform, survival_asymptote};
use parisian_qsd::report::{num, CsvTable};
use parisian_qsd::resolvent::{parisian_resolvent, ResolventQuery};
use parisian_qsd::simulate::{mc_resolvent_grid, mc_survival_curve, simulate_parisian_path, SimConfig};
use parisian_qsd::validation::{evaluate, write_artifacts, NamedModel, Scope, ValidationOptions};
use parisian_qsd::{Error, LevyModel, ModelConfig};

const EXIT_VALIDATION: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "parisian-qsd", version, about = "Parisian ruin resolvents and quasi-stationary laws")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Normalized quasi-stationary Laplace transform on an alpha grid.
    Transform(TransformArgs),
    /// Quasi-stationary density on a y grid.
    Density(DensityArgs),
    /// Large-time survival asymptote on a t grid.
    Asymptote(AsymptoteArgs),
    /// Parisian resolvent on an (x, alpha, q, theta) grid.
    Resolvent(ResolventArgs),
    /// Monte Carlo estimates of the resolvent and the survival curve.
    Simulate(SimulateArgs),
    /// Run the acceptance suite, or its model-generic part for one model.
    Validate(ValidateArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Model configuration file (key = value).
    #[arg(long)]
    model: PathBuf,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TransformArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    x: f64,
    #[arg(long)]
    theta: f64,
    #[arg(long, default_value_t = 5.0)]
    alpha_max: f64,
    #[arg(long, default_value_t = 50)]
    alpha_steps: usize,
}

#[derive(Args, Debug)]
struct DensityArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    x: f64,
    #[arg(long)]
    theta: f64,
    /// Lower end of the grid; defaults to -y-max.
    #[arg(long, allow_negative_numbers = true)]
    y_min: Option<f64>,
    #[arg(long, default_value_t = 20.0)]
    y_max: f64,
    #[arg(long, default_value_t = 200)]
    y_steps: usize,
}

#[derive(Args, Debug)]
struct AsymptoteArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    x: f64,
    #[arg(long)]
    theta: f64,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long, default_value_t = 10.0)]
    t_min: f64,
    #[arg(long, default_value_t = 100.0)]
    t_max: f64,
    #[arg(long, default_value_t = 90)]
    t_steps: usize,
}

#[derive(Args, Debug)]
struct ResolventArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_delimiter = ',', required = true)]
    x: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    alpha: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    q: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    theta: Vec<f64>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    x: f64,
    #[arg(long)]
    theta: f64,
    #[arg(long, default_value_t = 100_000)]
    paths: usize,
    #[arg(long, default_value = "0xC0FFEE", value_parser = parse_seed)]
    seed: u64,
    /// Grid step for Brownian models.
    #[arg(long, default_value_t = 1e-4)]
    step: f64,
    #[arg(long, default_value_t = 200.0)]
    horizon: f64,
    /// Killing rates for resolvent estimates.
    #[arg(long, value_delimiter = ',')]
    q: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    alpha: Vec<f64>,
    /// Times for survival estimates.
    #[arg(long, value_delimiter = ',')]
    t: Vec<f64>,
    /// Per-path functionals (pathIndex, tauTheta, tauClassic, X_horizon).
    #[arg(long)]
    raw_out: Option<PathBuf>,
    /// Gzip the raw path output.
    #[arg(long)]
    gzip: bool,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Restrict to the model-generic criteria for this model.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Directory for CSV artifacts.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, default_value = "0xC0FFEE", value_parser = parse_seed)]
    seed: u64,
    /// Scales every Monte Carlo path count.
    #[arg(long, default_value_t = 1.0)]
    path_scale: f64,
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let t = s.trim();
    let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => t.parse(),
    };
    parsed.map_err(|e| format!("invalid seed `{s}`: {e}"))
}

enum Failure {
    Lib(Error),
    Io(io::Error),
    Validation,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation) => ExitCode::from(EXIT_VALIDATION),
        Err(Failure::Lib(e)) => {
            eprintln!("parisian-qsd: {e}");
            ExitCode::from(match e {
                Error::Config(_) => EXIT_USAGE,
                _ => EXIT_NUMERIC,
            })
        }
        Err(Failure::Io(e)) => {
            eprintln!("parisian-qsd: {e}");
            ExitCode::from(EXIT_NUMERIC)
        }
    }
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Transform(a) => transform(a),
        Command::Density(a) => density(a),
        Command::Asymptote(a) => asymptote(a),
        Command::Resolvent(a) => resolvent(a),
        Command::Simulate(a) => simulate(a),
        Command::Validate(a) => validate(a),
    }
}

fn load(path: &Path) -> Result<(ModelConfig, LevyModel), Failure> {
    let cfg = ModelConfig::load(path)?;
    // a model the file describes but the library rejects is still a bad configuration
    let model = cfg.build().map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    Ok((cfg, model))
}

/// Table with the command and the resolved model in its header.
fn table(command: &str, cfg: &ModelConfig, columns: &[&str]) -> CsvTable {
    let mut t = CsvTable::new(columns);
    t.meta("command", command);
    for line in cfg.render().lines() {
        if let Some((k, v)) = line.split_once(" = ") {
            t.meta(&format!("model.{k}"), v);
        }
    }
    t
}

fn emit(t: &CsvTable, out: &Option<PathBuf>) -> Result<(), Failure> {
    match out {
        Some(p) => t.write(p)?,
        None => io::stdout().lock().write_all(t.render().as_bytes())?,
    }
    Ok(())
}

fn grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 0 {
        return vec![lo];
    }
    (0..=steps).map(|i| lo + (hi - lo) * i as f64 / steps as f64).collect()
}

fn transform(a: TransformArgs) -> Result<(), Failure> {
    let (cfg, model) = load(&a.common.model)?;
    let qt = qsd_transform(&model, a.x, a.theta)?;
    let mut t = table("transform", &cfg, &["alpha", "h", "normalized"]);
    t.meta("x", num(a.x))
        .meta("theta", num(a.theta))
        .meta("alpha_max", num(a.alpha_max))
        .meta("alpha_steps", a.alpha_steps)
        .meta("h_zero", num(qt.h_zero))
        .meta("transform_abscissa", num(qt.alpha_max));
    for alpha in grid(0.0, a.alpha_max, a.alpha_steps) {
        let h: f64 = qt.h_at(alpha)?;
        t.push_nums(&[alpha, h, h / qt.h_zero]);
    }
    emit(&t, &a.common.out)
}

fn density(a: DensityArgs) -> Result<(), Failure> {
    let (cfg, model) = load(&a.common.model)?;
    let qt = qsd_transform(&model, a.x, a.theta)?;
    let y_min = a.y_min.unwrap_or(-a.y_max);
    if !(a.y_max > y_min) {
        return Err(Error::Config(format!("empty y range [{y_min}, {}]", a.y_max)).into());
    }
    let inv = EulerInversion::default();
    let mut t = table("density", &cfg, &["y", "density"]);
    t.meta("x", num(a.x))
        .meta("theta", num(a.theta))
        .meta("y_min", num(y_min))
        .meta("y_max", num(a.y_max))
        .meta("y_steps", a.y_steps)
        .meta("negative_mass", num(qt.negative_mass()?));
    for (y, d) in qsd_density(&qt, &grid(y_min, a.y_max, a.y_steps), &inv)? {
        t.push_nums(&[y, d]);
    }
    emit(&t, &a.common.out)
}

fn asymptote(a: AsymptoteArgs) -> Result<(), Failure> {
    let (cfg, model) = load(&a.common.model)?;
    qsd_transform(&model, a.x, a.theta)?;
    let mut t = table("asymptote", &cfg, &["t", "value"]);
    t.meta("x", num(a.x))
        .meta("theta", num(a.theta))
        .meta("alpha", num(a.alpha))
        .meta("t_min", num(a.t_min))
        .meta("t_max", num(a.t_max))
        .meta("t_steps", a.t_steps);
    for time in grid(a.t_min, a.t_max, a.t_steps) {
        t.push_nums(&[time, survival_asymptote(&model, a.x, a.theta, time, a.alpha)?]);
    }
    emit(&t, &a.common.out)
}

fn join(v: &[f64]) -> String {
    v.iter().map(|&x| num(x)).collect::<Vec<_>>().join(";")
}

fn resolvent(a: ResolventArgs) -> Result<(), Failure> {
    let (cfg, model) = load(&a.common.model)?;
    let mut t = table("resolvent", &cfg, &["model", "x", "alpha", "q", "theta", "value", "branch"]);
    t.meta("x", join(&a.x)).meta("alpha", join(&a.alpha)).meta("q", join(&a.q)).meta("theta", join(&a.theta));
    for &x in &a.x {
        for &alpha in &a.alpha {
            for &q in &a.q {
                for &theta in &a.theta {
                    let v = parisian_resolvent(&model, ResolventQuery { x, alpha, q, theta })?;
                    t.push(vec![
                        model.id(),
                        num(x),
                        num(alpha),
                        num(q),
                        num(theta),
                        num(v.value),
                        v.branch.label().to_string(),
                    ]);
                }
            }
        }
    }
    emit(&t, &a.common.out)
}

fn simulate(a: SimulateArgs) -> Result<(), Failure> {
    let (cfg, model) = load(&a.common.model)?;
    let sim = SimConfig {
        model,
        x0: a.x,
        theta: a.theta,
        horizon: a.horizon,
        paths: a.paths,
        seed: a.seed,
        step: a.step,
        clock_seed: None,
    };
    sim.validate()?;
    if a.q.is_empty() && a.t.is_empty() && a.raw_out.is_none() {
        return Err(Error::Config("nothing to estimate: give --q, --t or --raw-out".into()).into());
    }
    let mut t = table("simulate", &cfg, &["kind", "theta", "alpha", "q", "t", "mean", "stderr", "n", "seed"]);
    t.meta("x", num(a.x))
        .meta("theta", num(a.theta))
        .meta("paths", a.paths)
        .meta("seed", format!("{:#x}", a.seed))
        .meta("step", num(a.step))
        .meta("horizon", num(a.horizon))
        .meta("q", join(&a.q))
        .meta("alpha", join(&a.alpha))
        .meta("t", join(&a.t));
    let row = |kind: &str, alpha: f64, q: f64, time: f64, e: parisian_qsd::simulate::McEstimate| {
        vec![
            kind.to_string(),
            num(a.theta),
            num(alpha),
            num(q),
            num(time),
            num(e.mean),
            num(e.stderr),
            e.n.to_string(),
            format!("{:#x}", e.seed),
        ]
    };
    if !a.q.is_empty() {
        for e in mc_resolvent_grid(&sim, &[a.theta], &a.alpha, &a.q)? {
            t.push(row("resolvent", e.alpha, e.q, f64::NAN, e.estimate));
        }
    }
    if !a.t.is_empty() {
        for (&time, e) in a.t.iter().zip(mc_survival_curve(&sim, &a.t)?) {
            t.push(row("survival", f64::NAN, f64::NAN, time, e));
        }
    }
    if let Some(path) = &a.raw_out {
        write_raw(&sim, path, a.gzip)?;
    }
    emit(&t, &a.common.out)
}

fn write_raw(sim: &SimConfig, path: &Path, gzip: bool) -> Result<(), Failure> {
    let file = BufWriter::new(File::create(path)?);
    let mut out: Box<dyn Write> =
        if gzip { Box::new(GzEncoder::new(file, Compression::default())) } else { Box::new(file) };
    let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), num);
    writeln!(out, "pathIndex,tauTheta,tauClassic,X_horizon")?;
    for p in 0..sim.paths {
        let o = simulate_parisian_path(sim, p)?;
        writeln!(out, "{p},{},{},{}", opt(o.ruin_time), opt(o.classical_ruin_time), num(o.terminal_value))?;
    }
    out.flush()?;
    Ok(())
}

fn validate(a: ValidateArgs) -> Result<(), Failure> {
    let scope = match &a.model {
        Some(p) => {
            let (_, model) = load(p)?;
            let name = p.file_stem().map_or_else(|| model.id(), |s| s.to_string_lossy().into_owned());
            Scope::Model(NamedModel { name, model })
        }
        None => Scope::Full,
    };
    let opts = ValidationOptions { seed: a.seed, path_scale: a.path_scale };
    let mut results = Vec::new();
    let mut stdout = io::stdout().lock();
    for id in scope.criteria() {
        let mut r = evaluate(id, &scope, &opts);
        writeln!(stdout, "{}", r.line())?;
        for n in &r.notes {
            writeln!(stdout, "    note: {n}")?;
        }
        stdout.flush()?;
        if let Some(t) = r.artifact.as_mut() {
            t.meta("criterion", id).meta("seed", format!("{:#x}", a.seed)).meta("path_scale", num(a.path_scale));
        }
        results.push(r);
    }
    if let Some(dir) = &a.out_dir {
        write_artifacts(&results, dir)?;
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    writeln!(stdout, "{} of {} criteria passed", results.len() - failed, results.len())?;
    if failed > 0 {
        return Err(Failure::Validation);
    }
    Ok(())
}

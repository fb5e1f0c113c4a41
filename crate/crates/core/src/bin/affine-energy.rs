use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use affine_energy::affine_energy::{BvContext, BvSource, EnergyContext};
use affine_energy::bodies::{
    banach_mazur_estimate, busemann_petty_deficit, petty_product, BanachMazurOptions, BodySpec, CentroidMethod,
    ConvexBody,
};
use affine_energy::funcspace::FunctionSpec;
use affine_energy::inequalities::centroid_stability_check;
use affine_energy::scenario::{reports_to_csv, reports_to_json, run_scenario, RunOptions, Scenario};
use affine_energy::spherequad::{Scheme, SphereGrid, SphereSpec};
use affine_energy::Error;

const EXIT_FAIL: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "affine-energy", version, about = "Affine energies, sharp constants and convex-body deficits")]
struct Cli {
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true, env = "AFFINE_ENERGY_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every job of a scenario file and write the reports.
    Verify {
        #[arg(long)]
        scenario: PathBuf,
        /// Output file; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Multiplies every tolerance of the ladder.
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
        /// Record per-job wall time in the reports.
        #[arg(long)]
        wall_time: bool,
    },
    /// Affine energy of one function, its rearrangement and the gap.
    Energy {
        /// Function spec as inline JSON or a path to a JSON file.
        #[arg(long)]
        function: String,
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[command(flatten)]
        sphere: SphereArgs,
        /// Evaluate at this many evenly spaced lambda in [0, 1] instead.
        #[arg(long)]
        lambda_sweep: Option<usize>,
    },
    /// A single convex-body quantity.
    Body {
        #[arg(long, value_enum)]
        op: BodyOp,
        /// Body spec as inline JSON or a path to a JSON file.
        #[arg(long)]
        body: String,
        /// Second body for `banach-mazur`; the unit ball if absent.
        #[arg(long)]
        other: Option<String>,
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Quasi Monte Carlo samples for `centroid-stability`.
        #[arg(long, default_value_t = 200_000)]
        mc_samples: usize,
        #[command(flatten)]
        sphere: SphereArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum BodyOp {
    Volume,
    PettyProduct,
    BusemannPettyDeficit,
    BanachMazur,
    CentroidStability,
}

#[derive(clap::Args)]
struct SphereArgs {
    /// Sphere resolution; the per-dimension default if absent.
    #[arg(long)]
    sphere_resolution: Option<usize>,
    #[arg(long)]
    sphere_scheme: Option<Scheme>,
}

impl SphereArgs {
    fn grid(&self, n: usize) -> Result<Arc<SphereGrid>, Error> {
        let mut spec = SphereSpec::default_for(n);
        if let Some(r) = self.sphere_resolution {
            spec.resolution = r;
        }
        if let Some(s) = self.sphere_scheme {
            spec.scheme = s;
        }
        Ok(Arc::new(spec.build()?))
    }
}

#[derive(Serialize)]
struct EnergyRow {
    lambda: f64,
    p: f64,
    energy: f64,
    grad_norm: f64,
    energy_star: f64,
    gap: f64,
}

/// Errors the CLI maps to exit codes.
enum Failure {
    Input(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical_domain() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

fn json_arg(arg: &str) -> Result<String, Failure> {
    if arg.trim_start().starts_with('{') {
        Ok(arg.to_string())
    } else {
        std::fs::read_to_string(Path::new(arg)).map_err(|e| Failure::Input(format!("{arg}: {e}")))
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

fn energy_row(spec: &FunctionSpec, lambda: f64, p: f64, sphere: &SphereArgs) -> Result<EnergyRow, Error> {
    let f = spec.build()?;
    let grid = sphere.grid(f.dim())?;
    let grad_norm = f.sobolev_grad_norm(p)?;
    if p == 1.0 {
        let fstar = f.symmetric_rearrangement()?;
        let energy = BvContext::new(BvSource::Grid(f), grid.clone())?.energy()?.e1;
        let energy_star = BvContext::new(BvSource::Grid(fstar), grid)?.energy()?.e1;
        return Ok(EnergyRow { lambda, p, energy, grad_norm, energy_star, gap: energy - energy_star });
    }
    let gap = EnergyContext::new(&f, lambda, p, grid)?.polya_szego_gap()?;
    Ok(EnergyRow { lambda, p, energy: gap.e_f, grad_norm, energy_star: gap.e_fstar, gap: gap.gap })
}

fn run_verify(
    scenario: &Path,
    out: Option<&Path>,
    format: Format,
    opts: RunOptions,
) -> Result<bool, Failure> {
    let text = std::fs::read_to_string(scenario)
        .map_err(|e| Failure::Input(format!("{}: {e}", scenario.display())))?;
    let scenario = Scenario::from_json(&text)?;
    let reports = run_scenario(&scenario, &opts).map_err(|f| {
        if f.error.is_numerical_domain() {
            Failure::Numerical(f.to_string())
        } else {
            Failure::Input(f.to_string())
        }
    })?;
    let body = match format {
        Format::Json => reports_to_json(&reports),
        Format::Csv => reports_to_csv(&reports)?,
    };
    emit(&body, out)?;
    for r in reports.iter().filter(|r| !r.pass) {
        eprintln!("FAIL {}: deficit {:.6e} below -{:.3e}", r.id, r.deficit, r.tolerance);
    }
    Ok(reports.iter().all(|r| r.pass))
}

fn run_body(
    op: BodyOp,
    body: &ConvexBody,
    other: Option<&str>,
    lambda: f64,
    p: f64,
    seed: u64,
    mc_samples: usize,
    sphere: &SphereArgs,
) -> Result<String, Failure> {
    let grid = sphere.grid(body.dim())?;
    let out = match op {
        BodyOp::Volume => to_json(&serde_json::json!({ "volume": body.volume() })),
        BodyOp::PettyProduct => to_json(&serde_json::json!({ "petty_product": petty_product(body, &grid)? })),
        BodyOp::BusemannPettyDeficit => {
            let d = busemann_petty_deficit(&body.as_star(), lambda, p, grid, CentroidMethod::Auto)?;
            to_json(&serde_json::json!({ "lambda": lambda, "p": p, "deficit": d }))
        }
        BodyOp::BanachMazur => {
            let l = match other {
                Some(text) => BodySpec::from_json(&json_arg(text)?)?.build()?,
                None => ConvexBody::ball(body.dim(), 1.0)?,
            };
            let opts = BanachMazurOptions { seed, grid: Some(grid.spec()), ..Default::default() };
            to_json(&serde_json::json!({ "log_distance_upper": banach_mazur_estimate(body, &l, &opts)? }))
        }
        BodyOp::CentroidStability => to_json(&centroid_stability_check(body, grid, mc_samples, seed)?),
    };
    Ok(out)
}

fn run(cli: Cli) -> Result<bool, Failure> {
    match cli.command {
        Command::Verify { scenario, out, format, seed, tolerance_scale, wall_time } => {
            if !(tolerance_scale > 0.0 && tolerance_scale.is_finite()) {
                return Err(Failure::Input(format!("tolerance scale must be positive, got {tolerance_scale}")));
            }
            let opts = RunOptions { seed, tolerance_scale, record_wall_time: wall_time };
            run_verify(&scenario, out.as_deref(), format, opts)
        }
        Command::Energy { function, lambda, p, sphere, lambda_sweep } => {
            let spec = FunctionSpec::from_json(&json_arg(&function)?)?;
            let text = match lambda_sweep {
                Some(k) if k >= 2 => {
                    let rows = (0..k)
                        .map(|i| energy_row(&spec, i as f64 / (k - 1) as f64, p, &sphere))
                        .collect::<Result<Vec<_>, _>>()?;
                    to_json(&rows)
                }
                Some(k) => return Err(Failure::Input(format!("lambda sweep needs at least 2 points, got {k}"))),
                None => to_json(&energy_row(&spec, lambda, p, &sphere)?),
            };
            emit(&text, None)?;
            Ok(true)
        }
        Command::Body { op, body, other, lambda, p, seed, mc_samples, sphere } => {
            let k = BodySpec::from_json(&json_arg(&body)?)?.build()?;
            let text = run_body(op, &k, other.as_deref(), lambda, p, seed, mc_samples, &sphere)?;
            emit(&text, None)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        pool = pool.num_threads(t);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    };
    match pool.install(|| run(cli)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}

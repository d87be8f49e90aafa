//! Command-line frontend: closed-form coverage metrics, Monte Carlo
//! estimates with z-scores, sweep presets, declarative sweeps, and the
//! analytic-versus-simulation validation grid.
//!
//! Exit codes: 0 success, 2 invalid flags or spec, 3 failed z-check,
//! 4 i/o failure.

use std::path::PathBuf;
use std::process::exit;

use clap::{Args, Parser, Subcommand, ValueEnum};

use wsncov::analytics::{optimal_density, ScenarioParams};
use wsncov::experiments::{
    agreement_z, figure1_sweep, figure2_sweep, figure3_sweep, figure4_sweep, run_sweep,
    validation_grid, ExperimentError, Figure1Config, Figure2Config, Figure3Config, Figure4Config,
    SweepOutput, SweepSpec,
};
use wsncov::model::{NetworkModel, RegionOfInterest, ToleranceProfile};
use wsncov::montecarlo::{
    estimate_at_most_m_fraction, estimate_cover, estimate_intersection, estimate_m_cover,
    estimate_m_intersection, estimate_saf, MetricEstimate, SimulationConfig,
};

const EXIT_USAGE: i32 = 2;
const EXIT_CHECK: i32 = 3;
const EXIT_IO: i32 = 4;

fn usage_error(message: impl std::fmt::Display) -> ! {
    eprintln!("error: {message}");
    exit(EXIT_USAGE);
}

fn io_error(message: impl std::fmt::Display) -> ! {
    eprintln!("error: {message}");
    exit(EXIT_IO);
}

/// Map experiment errors onto the exit-code contract: bad specs and bad
/// parameters are usage errors, everything filesystem-related is i/o.
fn experiment_error(err: ExperimentError) -> ! {
    match err {
        ExperimentError::Spec(_) | ExperimentError::Model(_) => usage_error(err),
        ExperimentError::Io(_) | ExperimentError::Csv(_) | ExperimentError::Json(_) => {
            io_error(err)
        }
    }
}

#[derive(Parser)]
#[command(
    name = "wsncov",
    version,
    about = "Coverage analytics for sensor networks exploiting a spatial profile of the sensed variable"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form coverage metrics for one parameter set.
    Analyze(AnalyzeArgs),
    /// Monte Carlo estimates next to the closed forms, with z-scores.
    Simulate(SimulateArgs),
    /// Built-in sweep preset (1-4): CSV table plus JSON summary.
    Figure(FigureArgs),
    /// Run a sweep described by a JSON spec file.
    Sweep(SweepArgs),
    /// Analytic-versus-simulation validation grid with per-cell pass/fail.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// Sensor density in sensors per square meter.
    #[arg(long, conflicts_with = "density_km2")]
    lambda: Option<f64>,
    /// Sensor density in sensors per square kilometer (exact 1e-6
    /// conversion to per square meter). Default 20 when neither unit is
    /// given.
    #[arg(long)]
    density_km2: Option<f64>,
    /// Native sensing radius in meters.
    #[arg(long, default_value_t = 150.0)]
    rs: f64,
    /// Allowed sensing tolerance, in units of the sensed variable.
    #[arg(long, default_value_t = 5.0)]
    tau: f64,
    /// Profile amplitude.
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    /// Spatial variation rate per meter.
    #[arg(long, default_value_t = 0.01, conflicts_with = "no_profile")]
    w: f64,
    /// No profile information: the sensing radius is never extended.
    #[arg(long)]
    no_profile: bool,
    /// Region-of-interest radius in meters.
    #[arg(long, default_value_t = 100.0)]
    r: f64,
    /// Exact sensor count for the per-count metrics.
    #[arg(long)]
    m: Option<u64>,
}

impl ModelArgs {
    fn density(&self) -> f64 {
        match (self.lambda, self.density_km2) {
            (Some(lambda), None) => lambda,
            (None, Some(km2)) => km2 * 1e-6,
            (None, None) => 20.0 * 1e-6,
            (Some(_), Some(_)) => unreachable!("clap rejects both density units"),
        }
    }

    fn profile(&self) -> ToleranceProfile {
        if self.no_profile {
            ToleranceProfile::no_profile()
        } else {
            ToleranceProfile::exponential(self.amplitude, self.w)
                .unwrap_or_else(|e| usage_error(e))
        }
    }

    fn scenario(&self) -> ScenarioParams {
        let net = NetworkModel::new(self.density(), self.rs).unwrap_or_else(|e| usage_error(e));
        let region = RegionOfInterest::new(self.r).unwrap_or_else(|e| usage_error(e));
        ScenarioParams::new(net, self.profile(), self.tau, region)
            .unwrap_or_else(|e| usage_error(e))
    }

    fn config_json(&self) -> serde_json::Value {
        serde_json::json!({
            "density_per_m2": self.density(),
            "density_per_km2": self.density() * 1e6,
            "sensing_radius_m": self.rs,
            "tolerance": self.tau,
            "amplitude": self.amplitude,
            "variation_rate_per_m": if self.no_profile {
                serde_json::Value::Null
            } else {
                serde_json::json!(self.w)
            },
            "no_profile": self.no_profile,
            "region_radius_m": self.r,
            "m": self.m,
        })
    }
}

#[derive(Args)]
struct SimArgs {
    /// Master seed; replications derive independent streams from it.
    #[arg(long, env = "WSNCOV_SEED", default_value_t = 12345)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    replications: usize,
    /// Test points per replication (rounded down to a square grid).
    #[arg(long, default_value_t = 10_000)]
    test_points: usize,
    /// Observation-window half-width in meters.
    #[arg(long, default_value_t = 5_000.0)]
    window: f64,
    /// Sampling padding in meters; defaults to R(tau) + r + 1.
    #[arg(long)]
    padding: Option<f64>,
}

impl SimArgs {
    fn config(&self) -> SimulationConfig {
        if self.replications < 1 {
            usage_error("replications must be at least 1");
        }
        if self.test_points < 1 {
            usage_error("test-points must be at least 1");
        }
        if !(self.window.is_finite() && self.window > 0.0) {
            usage_error("window must be finite and positive");
        }
        if let Some(p) = self.padding {
            if !(p.is_finite() && p >= 0.0) {
                usage_error("padding must be finite and nonnegative");
            }
        }
        SimulationConfig {
            seed: self.seed,
            replications: self.replications,
            test_points: self.test_points,
            half_width: self.window,
            padding: self.padding,
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Fractional digits in scientific notation.
    #[arg(long, default_value_t = 10)]
    precision: usize,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    sim: SimArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Exit with status 3 when any defined z-score exceeds the threshold.
    #[arg(long)]
    check: bool,
    /// z-score threshold for --check.
    #[arg(long, default_value_t = 4.0)]
    z_max: f64,
}

#[derive(Args)]
struct FigureArgs {
    /// Preset number.
    #[arg(value_parser = clap::value_parser!(u8).range(1..=4))]
    number: u8,
    /// Output CSV path (the JSON summary lands next to it); defaults to
    /// figure<N>.csv in the working directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the preset's exact-count list (presets 2-4, repeatable).
    #[arg(long = "m")]
    counts: Vec<u64>,
    /// Override the preset's region radii (preset 3, repeatable).
    #[arg(long = "r")]
    radii: Vec<f64>,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON sweep spec path.
    spec: PathBuf,
    /// Output CSV path; overrides the spec's own output field.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    sim: SimArgs,
    /// Optional report CSV path (JSON lands next to it).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn fmt(value: f64, precision: usize) -> String {
    format!("{value:.precision$e}")
}

fn print_rows(rows: &[(&str, Option<f64>)], precision: usize) {
    for (name, value) in rows {
        match value {
            Some(v) => println!("{name:<20} {}", fmt(*v, precision)),
            None => println!("{name:<20} nan"),
        }
    }
}

fn rows_to_json(rows: &[(&str, Option<f64>)]) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    for (name, value) in rows {
        map.insert(
            name.to_string(),
            match value {
                Some(v) => serde_json::json!(v),
                None => serde_json::Value::Null,
            },
        );
    }
    serde_json::Value::Object(map)
}

fn cmd_analyze(args: AnalyzeArgs) {
    let params = args.model.scenario();
    let mut rows: Vec<(&str, Option<f64>)> = vec![
        ("density_per_m2", Some(params.network().density())),
        ("density_per_km2", Some(params.network().density() * 1e6)),
        ("effective_radius_m", Some(params.effective_radius().meters())),
        ("nu_tau", Some(params.saf())),
        ("vacancy_tau", Some(params.vacancy())),
        ("eta_tau", params.cif().ok()),
        ("mu_tau", Some(params.intersection_prob())),
        ("beta_tau", Some(params.cover_prob())),
    ];
    if let Some(m) = args.model.m {
        if m < 1 {
            usage_error("m must be at least 1");
        }
        let opt = optimal_density(
            m,
            params.network(),
            params.profile(),
            params.tolerance(),
            params.region(),
        );
        rows.push(("nu_m", Some(params.at_most_m_saf(m))));
        rows.push(("mu_m", Some(params.m_intersection_prob(m))));
        rows.push(("beta_m", Some(params.m_cover_prob(m))));
        rows.push(("lambda_opt_per_m2", Some(opt.density)));
        rows.push(("lambda_opt_per_km2", Some(opt.density * 1e6)));
        rows.push(("mu_max", Some(opt.peak_probability)));
    }
    match args.output.format {
        Format::Text => print_rows(&rows, args.output.precision),
        Format::Json => {
            let doc = serde_json::json!({
                "config": args.model.config_json(),
                "metrics": rows_to_json(&rows),
            });
            println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
        }
    }
}

struct SimRow {
    metric: &'static str,
    closed_form: f64,
    estimate: MetricEstimate,
}

fn cmd_simulate(args: SimulateArgs) {
    let params = args.model.scenario();
    let sim = args.sim.config();
    let expected = wsncov::montecarlo::expected_sensor_count(&params, &sim);
    if expected > 2e7 {
        usage_error(format!(
            "configuration implies {expected:.2e} sensors per replication; \
             reduce the density, window, or padding"
        ));
    }

    let mut rows = vec![
        SimRow {
            metric: "nu_tau",
            closed_form: params.saf(),
            estimate: estimate_saf(&params, &sim),
        },
        SimRow {
            metric: "mu_tau",
            closed_form: params.intersection_prob(),
            estimate: estimate_intersection(&params, &sim),
        },
        SimRow {
            metric: "beta_tau",
            closed_form: params.cover_prob(),
            estimate: estimate_cover(&params, &sim),
        },
    ];
    if let Some(m) = args.model.m {
        if m < 1 {
            usage_error("m must be at least 1");
        }
        rows.push(SimRow {
            metric: "nu_m",
            closed_form: params.at_most_m_saf(m),
            estimate: estimate_at_most_m_fraction(m, &params, &sim),
        });
        rows.push(SimRow {
            metric: "mu_m",
            closed_form: params.m_intersection_prob(m),
            estimate: estimate_m_intersection(m, &params, &sim),
        });
        rows.push(SimRow {
            metric: "beta_m",
            closed_form: params.m_cover_prob(m),
            estimate: estimate_m_cover(m, &params, &sim),
        });
    }

    let z_of = |row: &SimRow| -> Option<f64> {
        (row.estimate.replications >= 2).then(|| agreement_z(&row.estimate, row.closed_form))
    };

    let precision = args.output.precision;
    match args.output.format {
        Format::Text => {
            println!(
                "{:<10} {:<18} {:<18} {:<18} z",
                "metric", "closed_form", "estimate", "std_error"
            );
            for row in &rows {
                let se = row
                    .estimate
                    .standard_error
                    .map(|se| fmt(se, precision))
                    .unwrap_or_else(|| "nan".into());
                let z = z_of(row)
                    .map(|z| format!("{z:.3}"))
                    .unwrap_or_else(|| "nan".into());
                println!(
                    "{:<10} {:<18} {:<18} {:<18} {}",
                    row.metric,
                    fmt(row.closed_form, precision),
                    fmt(row.estimate.mean, precision),
                    se,
                    z
                );
            }
        }
        Format::Json => {
            let rows_json: Vec<serde_json::Value> = rows
                .iter()
                .map(|row| {
                    serde_json::json!({
                        "metric": row.metric,
                        "closed_form": row.closed_form,
                        "estimate": row.estimate.mean,
                        "std_error": row.estimate.standard_error,
                        "replications": row.estimate.replications,
                        "samples_per_replication": row.estimate.samples_per_replication,
                        "z": z_of(row),
                    })
                })
                .collect();
            let doc = serde_json::json!({
                "config": args.model.config_json(),
                "simulation": sim,
                "rows": rows_json,
            });
            println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
        }
    }

    if args.check {
        let worst = rows
            .iter()
            .filter_map(|row| z_of(row).map(|z| (row.metric, z)))
            .filter(|(_, z)| z.abs() > args.z_max)
            .collect::<Vec<_>>();
        if !worst.is_empty() {
            for (metric, z) in worst {
                eprintln!("check failed: {metric} z = {z:.3} exceeds {}", args.z_max);
            }
            exit(EXIT_CHECK);
        }
    }
}

fn cmd_figure(args: FigureArgs) {
    let default_name = format!("figure{}.csv", args.number);
    let path = args.out.unwrap_or_else(|| PathBuf::from(default_name));
    let out: SweepOutput = match args.number {
        1 => {
            if !args.counts.is_empty() || !args.radii.is_empty() {
                usage_error("preset 1 takes neither --m nor --r");
            }
            figure1_sweep(&Figure1Config::default())
        }
        2 => {
            if !args.radii.is_empty() {
                usage_error("preset 2 does not take --r");
            }
            let mut cfg = Figure2Config::default();
            if !args.counts.is_empty() {
                cfg.counts = args.counts;
            }
            figure2_sweep(&cfg)
        }
        3 => {
            let mut cfg = Figure3Config::default();
            if !args.counts.is_empty() {
                cfg.counts = args.counts;
            }
            if !args.radii.is_empty() {
                cfg.region_radii = args.radii;
            }
            figure3_sweep(&cfg)
        }
        4 => {
            if !args.radii.is_empty() {
                usage_error("preset 4 sweeps r itself; --r is not accepted");
            }
            let mut cfg = Figure4Config::default();
            if !args.counts.is_empty() {
                cfg.counts = args.counts;
            }
            figure4_sweep(&cfg)
        }
        _ => unreachable!("clap restricts the range"),
    }
    .unwrap_or_else(|e| experiment_error(e));

    out.write(&path).unwrap_or_else(|e| experiment_error(e));
    println!(
        "figure {}: {} rows -> {}",
        args.number,
        out.table.rows.len(),
        path.display()
    );
}

fn cmd_sweep(args: SweepArgs) {
    let text = std::fs::read_to_string(&args.spec)
        .unwrap_or_else(|e| usage_error(format!("cannot read spec {}: {e}", args.spec.display())));
    let spec = SweepSpec::from_json(&text).unwrap_or_else(|e| usage_error(e));
    let out = run_sweep(&spec).unwrap_or_else(|e| experiment_error(e));
    let path = args
        .out
        .or(spec.output)
        .unwrap_or_else(|| PathBuf::from("sweep.csv"));
    out.write(&path).unwrap_or_else(|e| experiment_error(e));
    println!("sweep: {} rows -> {}", out.table.rows.len(), path.display());
}

fn cmd_validate(args: ValidateArgs) {
    let sim = args.sim.config();
    let report = validation_grid(&sim).unwrap_or_else(|e| experiment_error(e));
    print!("{}", report.render_text());
    if let Some(path) = &args.out {
        report.write(path).unwrap_or_else(|e| experiment_error(e));
        println!("report -> {}", path.display());
    }
    if report.within_z4 < 22 || report.within_z3 < 20 {
        eprintln!(
            "validation failed: {}/24 within 4 SE (need 22), {}/24 within 3 SE (need 20)",
            report.within_z4, report.within_z3
        );
        exit(EXIT_CHECK);
    }
}

fn main() {
    match Cli::parse().command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Figure(args) => cmd_figure(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Validate(args) => cmd_validate(args),
    }
}

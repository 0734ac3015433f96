use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mmw_cluster::compare::{compare, load_reference};
use mmw_cluster::report::{load_stats, simulate, write_outputs, OutputFormat};
use mmw_cluster::scenario::load_scenario;
use mmw_cluster::{fixtures, Error, RayDensity};

const EXIT_VALIDATION: u8 = 2;
const EXIT_RUNTIME: u8 = 3;
const EXIT_THRESHOLD: u8 = 4;

#[derive(Parser)]
#[command(name = "mmw-cluster", version, about = "Cluster-level mmWave channel simulator")]
struct Cli {
    /// Worker threads; 0 picks the number of cores.
    #[arg(long, env = "RT_ICM_THREADS", default_value_t = 0, global = true)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write profiles and statistics.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// Diffuse rays per cluster (overrides the scenario).
        #[arg(long)]
        n_rays: Option<usize>,
        /// Angle bin width, degrees.
        #[arg(long)]
        delta_phi: Option<f64>,
        /// Delay bin width, nanoseconds.
        #[arg(long)]
        delta_tau: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Compare stats files against a reference table.
    Compare {
        #[arg(long, required = true, num_args = 1..)]
        stats: Vec<PathBuf>,
        #[arg(long)]
        reference: PathBuf,
    },
    /// List or print the bundled scenario and reference files.
    Fixtures {
        #[command(subcommand)]
        action: FixtureAction,
    },
}

#[derive(Subcommand)]
enum FixtureAction {
    List,
    Emit { name: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn fail(err: Error) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(if err.is_input_error() {
        EXIT_VALIDATION
    } else {
        EXIT_RUNTIME
    })
}

fn validation(msg: String) -> ExitCode {
    fail(Error::Validation(vec![msg]))
}

fn run_simulate(
    scenario: PathBuf,
    out_dir: PathBuf,
    n_rays: Option<usize>,
    delta_phi: Option<f64>,
    delta_tau: Option<f64>,
    format: Format,
) -> ExitCode {
    let mut sc = match load_scenario(&scenario) {
        Ok(sc) => sc,
        Err(e) => return fail(e),
    };
    match n_rays {
        Some(0) => return validation("--n-rays must be positive".into()),
        Some(n) => sc.simulation.density = RayDensity::Count(n),
        None => {}
    }
    if let Some(p) = delta_phi {
        if !(p > 0.0 && p.is_finite()) {
            return validation(format!("--delta-phi must be positive, got {p}"));
        }
        sc.simulation.delta_phi = p;
    }
    if let Some(t) = delta_tau {
        if !(t > 0.0 && t.is_finite()) {
            return validation(format!("--delta-tau must be positive, got {t}"));
        }
        sc.simulation.delta_tau = t * 1e-9;
    }
    let output = match simulate(&sc) {
        Ok(o) => o,
        Err(e) => return fail(e),
    };
    let format = match format {
        Format::Csv => OutputFormat::Csv,
        Format::Json => OutputFormat::Json,
    };
    match write_outputs(&output, &out_dir, format) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}

fn run_compare(stats: Vec<PathBuf>, reference: PathBuf) -> ExitCode {
    let reference = match load_reference(&reference) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let stats = match stats.iter().map(load_stats).collect::<Result<Vec<_>, _>>() {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let report = match compare(&stats, &reference) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        eprintln!("thresholds exceeded: {}", report.exceeded.join(", "));
        ExitCode::from(EXIT_THRESHOLD)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
    {
        eprintln!("error: thread pool: {e}");
        return ExitCode::from(EXIT_RUNTIME);
    }
    match cli.command {
        Command::Simulate {
            scenario,
            out_dir,
            n_rays,
            delta_phi,
            delta_tau,
            format,
        } => run_simulate(scenario, out_dir, n_rays, delta_phi, delta_tau, format),
        Command::Compare { stats, reference } => run_compare(stats, reference),
        Command::Fixtures { action } => match action {
            FixtureAction::List => {
                for n in fixtures::names() {
                    println!("{n}");
                }
                ExitCode::SUCCESS
            }
            FixtureAction::Emit { name } => match fixtures::get(&name) {
                Some(text) => {
                    print!("{text}");
                    ExitCode::SUCCESS
                }
                None => validation(format!("unknown fixture `{name}`")),
            },
        },
    }
}

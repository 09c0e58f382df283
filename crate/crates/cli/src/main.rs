use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use entemp_core::error::{Error, ErrorClass};
use entemp_core::runner::{self, Scale};
use entemp_core::RunConfig;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_REGRESSION: u8 = 4;

#[derive(Parser)]
#[command(name = "entemp", version, about = "Entanglement temperature of a scalar field near a black hole")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides `output_dir` in the config)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads; defaults to the number of hardware threads
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = ScaleArg::Desk)]
    scale: ScaleArg,
}

#[derive(Subcommand)]
enum Command {
    /// Temperature report for one background
    Run,
    /// Schwarzschild and Reissner-Nordstrom temperature table
    Table1,
    /// Closed-form entropies against the brute-force grid oracle
    OracleCheck,
    /// Entropy against cut position at eps = 0 with a power-law fit
    AreaLaw,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Desk,
    Paper,
}

enum Failure {
    Error(Error),
    Regression(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, Error> {
    match path {
        Some(p) => RunConfig::load(p),
        None => RunConfig::from_toml(""),
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(Error::Config("--threads must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    }
    let scale = match cli.scale {
        ScaleArg::Desk => Scale::Desk,
        ScaleArg::Paper => Scale::Paper,
    };
    match cli.command {
        Command::Run => {
            let cfg = load_config(cli.config.as_deref())?;
            let out = runner::output_dir(cli.out.as_deref(), Some(&cfg));
            let report = runner::cmd_run(&cfg, &out)?;
            match report.t_ee_mean {
                Some(t) => println!("T_EE = {t:.6e}  T_BH = {:.6e}  ({} of {} cuts accepted)", report.t_hawking, report.accepted_n.len(), report.per_n.len() + report.failures.len()),
                None => println!("no sweep passed the linearity check; T_BH = {:.6e}", report.t_hawking),
            }
            if !report.has_horizon {
                println!("no horizon: the Hawking temperature vanishes");
            }
            for f in &report.failures {
                println!("n = {}: {}", f.n, f.message);
            }
            println!("artifacts in {}", out.display());
        }
        Command::Table1 => {
            let out = runner::output_dir(cli.out.as_deref(), None);
            let table = runner::cmd_table1(scale, &out)?;
            print!("{}", runner::table1_csv(&table));
            if !table.all_within_tolerance() {
                return Err(Failure::Regression("temperature table outside tolerance".into()));
            }
        }
        Command::OracleCheck => {
            let out = runner::output_dir(cli.out.as_deref(), None);
            let check = runner::cmd_oracle_check(&out)?;
            let worst = check.cases.iter().map(|c| c.abs_diff).fold(0.0, f64::max);
            println!("{} cases, worst |dS| = {worst:.3e}", check.cases.len());
            if !check.passed() {
                let bad: Vec<&str> = check.cases.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
                return Err(Failure::Regression(format!("oracle mismatch in {}", bad.join(", "))));
            }
        }
        Command::AreaLaw => {
            let mut cfg = load_config(cli.config.as_deref())?;
            if cli.config.is_none() {
                cfg.metric.kind = entemp_core::MetricKind::Flat;
            }
            let out = runner::output_dir(cli.out.as_deref(), Some(&cfg));
            let fit = runner::cmd_area_law(&cfg, &out)?;
            println!("S ~ {:.6e} n^{:.6}  (r2 = {:.6})", fit.prefactor, fit.exponent, fit.r2);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Regression(msg)) => {
            let body = serde_json::json!({ "error": "acceptance_regression", "message": msg });
            eprintln!("{body}");
            ExitCode::from(EXIT_REGRESSION)
        }
        Err(Failure::Error(e)) => {
            let body = serde_json::json!({ "error": e.tag(), "message": e.to_string() });
            eprintln!("{body}");
            ExitCode::from(match e.class() {
                ErrorClass::Config => EXIT_CONFIG,
                ErrorClass::Numerical | ErrorClass::Io => EXIT_NUMERICAL,
            })
        }
    }
}

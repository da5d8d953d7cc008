//! Thin command-line front end over the library pipeline.

use clap::{Parser, Subcommand};
use nullcone::asymptotic::ClassifyParams;
use nullcone::config::RunConfig;
use nullcone::pipeline::{aggregate_report, classify_from_text, execute_run, execute_sweep};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "nullcone",
    about = "Radial quasilinear wave laboratory: solver runs, eikonal tracing, \
             inequality diagnostics, and asymptotic-system classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one scenario pipeline from a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides out_dir from the config).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
    /// Classify a quadratic nonlinearity from a term file
    /// (lines `alpha,beta,coeff` over {t,x,y,z}, '+' sums, '#' comments).
    Classify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 40.0)]
        s_max: f64,
        #[arg(long, default_value_t = 0.1)]
        amplitude: f64,
        #[arg(long, default_value_t = 16)]
        directions: usize,
        #[arg(long, default_value_t = 1e6)]
        blowup_threshold_factor: f64,
        /// Optional weak-null acceptance threshold on the growth exponent.
        #[arg(long)]
        max_growth_exponent: Option<f64>,
    },
    /// Run every ε of the config's [sweep] section and aggregate a CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Parallel run limit (overrides the config value).
        #[arg(long)]
        parallel: Option<usize>,
        #[arg(long)]
        quiet: bool,
    },
    /// Aggregate existing run directories (summary.json files) into one CSV.
    Report {
        #[arg(long)]
        out: PathBuf,
    },
}

fn out_dir_of(config: &RunConfig, flag: Option<PathBuf>, fallback: &str) -> PathBuf {
    flag.or_else(|| config.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(fallback))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config, out, quiet } => match RunConfig::load(&config) {
            Ok(cfg) => {
                let dir = out_dir_of(&cfg, out, "run_out");
                match execute_run(&cfg, &dir, quiet) {
                    Ok(summary) => {
                        if !quiet {
                            println!("artifacts in {}", dir.display());
                        }
                        nullcone::pipeline::exit_code_for(&summary.termination)
                    }
                    Err(e) => {
                        eprintln!("error: {e}");
                        1
                    }
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                1
            }
        },
        Command::Classify {
            config,
            s_max,
            amplitude,
            directions,
            blowup_threshold_factor,
            max_growth_exponent,
        } => {
            let params = ClassifyParams {
                s_max,
                amplitude,
                n_directions: directions,
                blowup_threshold_factor,
                ..Default::default()
            };
            match std::fs::read_to_string(&config)
                .map_err(nullcone::Error::from)
                .and_then(|text| classify_from_text(&text, &params, max_growth_exponent))
            {
                Ok(v) => {
                    println!("{}", serde_json::to_string_pretty(&v).expect("json"));
                    0
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    1
                }
            }
        }
        Command::Sweep {
            config,
            out,
            parallel,
            quiet,
        } => match RunConfig::load(&config) {
            Ok(cfg) => {
                let dir = out_dir_of(&cfg, out, "sweep_out");
                match execute_sweep(&cfg, &dir, parallel, quiet) {
                    Ok((_, any_error)) => {
                        if !quiet {
                            println!("sweep table in {}", dir.join("sweep.csv").display());
                        }
                        if any_error {
                            1
                        } else {
                            0
                        }
                    }
                    Err(e) => {
                        eprintln!("error: {e}");
                        1
                    }
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                1
            }
        },
        Command::Report { out } => match aggregate_report(&out) {
            Ok(csv) => {
                let path = out.join("report.csv");
                match std::fs::write(&path, csv) {
                    Ok(()) => {
                        println!("aggregate in {}", path.display());
                        0
                    }
                    Err(e) => {
                        eprintln!("error: {e}");
                        1
                    }
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                1
            }
        },
    };
    ExitCode::from(code as u8)
}

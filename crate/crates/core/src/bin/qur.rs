use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qur_core::experiments::{
    run_bound_report, run_fig1, run_fig2, run_purity, run_verify, VerifyConfig, FIG_PHI,
};
use qur_core::Error;

#[derive(Parser)]
#[command(name = "qur", version, about = "Uncertainty and reverse-uncertainty bound calculator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mondal bound vs the state-independent reverse bound along the figure state
    Fig1 {
        #[arg(long, default_value_t = 1000)]
        points: usize,
        #[arg(long, default_value_t = FIG_PHI)]
        phi: f64,
        #[arg(long, default_value = "fig1.csv")]
        out: PathBuf,
    },
    /// Reverse bound tightened by σx, σy, σz auxiliaries along the figure state
    Fig2 {
        #[arg(long, default_value_t = 1000)]
        points: usize,
        #[arg(long, default_value = "fig2.csv")]
        out: PathBuf,
    },
    /// Check every inequality on random states and observables
    Verify {
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9, allow_negative_numbers = true)]
        tol: f64,
    },
    /// Full bound report for one state and two or more observables
    Bound {
        #[arg(long)]
        state: PathBuf,
        #[arg(long = "obs", required = true, num_args = 1)]
        obs: Vec<PathBuf>,
        #[arg(long = "aux", num_args = 1)]
        aux: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Purity lower bound from two observables
    Purity {
        #[arg(long)]
        state: PathBuf,
        #[arg(long = "obs", required = true, num_args = 1)]
        obs: Vec<PathBuf>,
    },
}

fn fail(err: Error) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(if err.is_numerical() { 3 } else { 1 })
}

fn write_out(out: Option<&PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Fig1 { points, phi, out } => {
            let table = run_fig1(points, phi)?;
            table.write_csv(&out)?;
            eprintln!("wrote {} rows to {}", table.rows.len(), out.display());
        }
        Command::Fig2 { points, out } => {
            let table = run_fig2(points)?;
            table.write_csv(&out)?;
            eprintln!("wrote {} rows to {}", table.rows.len(), out.display());
        }
        Command::Verify {
            trials,
            dims,
            seed,
            tol,
        } => {
            let report = run_verify(&VerifyConfig {
                trials,
                dims,
                seed,
                tol,
            })?;
            print!("{}", report.render(true));
            return Ok(ExitCode::from(report.exit_code() as u8));
        }
        Command::Bound {
            state,
            obs,
            aux,
            out,
        } => {
            if obs.len() < 2 {
                return Err(Error::InvalidInput("bound needs at least two --obs".into()));
            }
            let report = run_bound_report(&state, &obs, &aux)?;
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            write_out(out.as_ref(), &text)?;
        }
        Command::Purity { state, obs } => {
            let est = run_purity(&state, &obs)?;
            println!("estimate {}", est.estimate);
            println!("purity {}", est.purity);
            println!("gap {}", est.gap);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => fail(err),
    }
}

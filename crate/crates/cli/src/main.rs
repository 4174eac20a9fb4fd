// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use cvtele_cli::{default_quadrature, figures, run_figure, run_text, selftest, CliError, RunOptions, Summary};

#[derive(Parser)]
#[command(name = "simulate", version, about = "Teleportation fidelity sweeps in the characteristic-function picture")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutputArgs {
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    jobs: Option<usize>,
    /// Omit the timestamp so identical configs give byte-identical files.
    #[arg(long)]
    reproducible: bool,
    /// Also write a gnuplot script next to the CSV.
    #[arg(long)]
    emit_plot_script: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config.
    Run {
        config: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run a built-in figure recipe.
    Figure {
        #[arg(required_unless_present = "list")]
        id: Option<String>,
        /// List the recipe ids.
        #[arg(long)]
        list: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check the engine against closed forms and the Fock-basis oracle.
    Selftest {
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn pool(jobs: Option<usize>) -> rayon::ThreadPool {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        b = b.num_threads(n.max(1));
    }
    b.build().expect("thread pool")
}

fn options(o: &OutputArgs) -> RunOptions {
    RunOptions { out_dir: o.out.clone(), reproducible: o.reproducible, emit_plot_script: o.emit_plot_script }
}

fn report(s: &Summary, started: Instant) {
    println!("wrote {} ({} rows x {} columns) in {:.1}s", s.csv.display(), s.rows, s.columns, started.elapsed().as_secs_f64());
    if let Some(p) = &s.script {
        println!("wrote {}", p.display());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let started = Instant::now();
    match cli.command {
        Command::Run { config, output } => {
            let text = fs::read_to_string(&config).map_err(|error| CliError::Io { path: config.clone(), error })?;
            let stem = config.file_stem().and_then(|s| s.to_str()).unwrap_or("experiment").to_string();
            let origin = config.display().to_string();
            let summary = pool(output.jobs).install(|| run_text(&text, &origin, &stem, &options(&output)))?;
            report(&summary, started);
        }
        Command::Figure { id, list, output } => {
            if list {
                for id in figures::ids() {
                    println!("{id}");
                }
                return Ok(());
            }
            let id = id.expect("clap requires an id without --list");
            let summary = pool(output.jobs).install(|| run_figure(&id, &options(&output)))?;
            report(&summary, started);
        }
        Command::Selftest { jobs } => {
            let quad = default_quadrature()?;
            let checks = pool(jobs)
                .install(|| selftest::run(&quad))
                .map_err(|e| CliError::Numeric {
                    origin: "selftest".into(),
                    error: cvtele_cli::experiment::EvalError { series: "selftest".into(), point: "-".into(), source: e },
                })?;
            let mut failed = 0;
            for c in &checks {
                let verdict = if c.passed() { "PASS" } else { "FAIL" };
                failed += usize::from(!c.passed());
                println!("{verdict}  {:<42} error {:.2e} (tol {:.0e})", c.name, c.error, c.tol);
            }
            println!("{} of {} checks passed in {:.1}s", checks.len() - failed, checks.len(), started.elapsed().as_secs_f64());
            if failed > 0 {
                return Err(CliError::Selftest { failed });
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("simulate: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

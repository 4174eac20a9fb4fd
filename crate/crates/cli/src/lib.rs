// SPDX-License-Identifier: Apache-2.0

//! Library side of the `simulate` binary: config parsing, sweep execution and
//! output writing.

pub mod config;
pub mod experiment;
pub mod figures;
pub mod output;
pub mod selftest;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use cvtele::overlap::QuadratureConfig;

use config::{ConfigError, ExperimentConfig, ExperimentKind};
use experiment::{EvalError, Plan};

/// Environment variable overriding the default single-mode quadrature order.
pub const QUAD_ORDER_ENV: &str = "CFT_QUAD_ORDER";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{origin}: {error}")]
    Config { origin: String, error: ConfigError },
    #[error("numeric failure in {origin}: {error}")]
    Numeric { origin: String, error: EvalError },
    #[error("{}: {error}", path.display())]
    Io { path: PathBuf, error: io::Error },
    #[error("{failed} selftest check(s) failed")]
    Selftest { failed: usize },
}

impl CliError {
    /// 1 selftest failure, 3 configuration, 4 numerics, 5 I/O; clap uses 2 for usage.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Selftest { .. } => 1,
            CliError::Config { .. } => 3,
            CliError::Numeric { .. } => 4,
            CliError::Io { .. } => 5,
        }
    }

    fn config(origin: &str, error: ConfigError) -> Self {
        CliError::Config { origin: origin.to_string(), error }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub reproducible: bool,
    pub emit_plot_script: bool,
}

#[derive(Debug, Clone)]
pub struct Summary {
    pub csv: PathBuf,
    pub script: Option<PathBuf>,
    pub rows: usize,
    pub columns: usize,
}

/// Library defaults with the environment override applied.
pub fn default_quadrature() -> Result<QuadratureConfig, CliError> {
    let mut q = QuadratureConfig::default();
    if let Ok(v) = std::env::var(QUAD_ORDER_ENV) {
        let bad = || CliError::config(QUAD_ORDER_ENV, ConfigError::new(None, None, format!("expected an integer >= 8, found `{v}`")));
        q.order = v.trim().parse().map_err(|_| bad())?;
        if q.order < 8 {
            return Err(bad());
        }
    }
    Ok(q)
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|error| CliError::Io { path: path.to_path_buf(), error })
}

/// Parses, plans, evaluates and writes one experiment. Nothing is written unless
/// every grid point evaluates.
pub fn run_text(text: &str, origin: &str, default_stem: &str, opts: &RunOptions) -> Result<Summary, CliError> {
    let cfg = ExperimentConfig::parse(text).map_err(|e| CliError::config(origin, e))?;
    if cfg.kind == ExperimentKind::Figure {
        let id = cfg.figure.as_deref().expect("checked by the parser");
        return run_figure(id, opts);
    }
    run_config(&cfg, origin, default_stem, None, opts)
}

pub fn run_figure(id: &str, opts: &RunOptions) -> Result<Summary, CliError> {
    let (canonical, text) = figures::RECIPES
        .iter()
        .find(|(k, _)| k.eq_ignore_ascii_case(id))
        .copied()
        .ok_or_else(|| {
            let known: Vec<&str> = figures::ids().collect();
            CliError::config("figure", ConfigError::new(None, None, format!("unknown figure `{id}` (known: {})", known.join(", "))))
        })?;
    let origin = format!("figure recipe {canonical}");
    let cfg = ExperimentConfig::parse(text).map_err(|e| CliError::config(&origin, e))?;
    run_config(&cfg, &origin, &format!("fig-{canonical}"), Some(canonical), opts)
}

fn run_config(
    cfg: &ExperimentConfig,
    origin: &str,
    default_stem: &str,
    figure: Option<&str>,
    opts: &RunOptions,
) -> Result<Summary, CliError> {
    let plan = Plan::new(cfg, default_quadrature()?).map_err(|e| CliError::config(origin, e))?;
    let table = plan.execute().map_err(|error| CliError::Numeric { origin: origin.to_string(), error })?;

    let stem = cfg.name.clone().unwrap_or_else(|| default_stem.to_string());
    fs::create_dir_all(&opts.out_dir).map_err(|error| CliError::Io { path: opts.out_dir.clone(), error })?;
    let csv_name = format!("{stem}.csv");
    let csv = opts.out_dir.join(&csv_name);
    let meta = output::Metadata {
        experiment: cfg.kind.name(),
        title: cfg.title.as_deref(),
        figure,
        config_text: &cfg.source,
        reproducible: opts.reproducible,
    };
    write(&csv, &output::render_csv(&table, &meta))?;

    let mut script = None;
    if opts.emit_plot_script {
        let outer = cfg.axes.first().map(|a| a.values()).unwrap_or_default();
        if let Some(gp) = output::render_gnuplot(&csv_name, &table, &plan.axis_names, &outer) {
            let path = opts.out_dir.join(format!("{stem}.gp"));
            write(&path, &gp)?;
            script = Some(path);
        }
    }
    Ok(Summary { csv, script, rows: table.rows.len(), columns: table.columns.len() })
}

//! `levy-bounds`: envelopes, certificates and the density oracle from the
//! command line.
//!
//! Exit status: 0 on success or a passing verification, 1 when a
//! verification fails or a computation breaks down, 2 on usage or
//! configuration errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use levy_bounds::harness::{Format, RunConfig};

mod commands;

#[derive(Debug, Parser)]
#[command(
    name = "levy-bounds",
    version,
    about = "Explicit heat-kernel bounds for isotropic unimodal Lévy processes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the built-in catalog.
    Catalog {
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Evaluate ψ, ψ* and ψ⁻ of an entry.
    Eval {
        #[arg(long)]
        entry: String,
        /// Comma-separated arguments.
        #[arg(long, value_delimiter = ',', required = true)]
        u: Vec<f64>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Certify a weak scaling condition of ψ on a grid.
    Certify {
        #[arg(long)]
        entry: String,
        #[arg(long, value_enum)]
        direction: DirectionArg,
        /// Defaults to the index the entry declares.
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long, default_value_t = 1e-4)]
        grid_min: f64,
        #[arg(long, default_value_t = 1e4)]
        grid_max: f64,
        #[arg(long, default_value_t = 512)]
        grid_points: usize,
    },
    /// Print the constant ledger of an entry.
    Bounds {
        #[arg(long)]
        entry: String,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Transition density by Fourier inversion on a (t, r) grid.
    Oracle(GridArgs),
    /// Compare envelopes with the oracle.
    Verify {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        sandwich: bool,
        #[arg(long)]
        doubling: bool,
        #[arg(long)]
        nu: bool,
        #[arg(long)]
        surrogate: bool,
    },
    /// gnuplot columns: log t, log r, log lower, log oracle, log upper.
    Report(GridArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DirectionArg {
    Lower,
    Upper,
}

/// Flags mirrored by the configuration file keys.
#[derive(Debug, Args)]
struct GridArgs {
    /// Flat `key = value` file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    entry: Option<String>,
    #[arg(long)]
    dimension: Option<usize>,
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    t_count: Option<usize>,
    #[arg(long)]
    r_min: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    r_count: Option<usize>,
    #[arg(long)]
    lambda_min: Option<f64>,
    #[arg(long)]
    lambda_max: Option<f64>,
    #[arg(long)]
    lambda_count: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

impl GridArgs {
    /// Configuration file first, then flags. The second value tells whether
    /// a format was asked for explicitly.
    fn resolve(&self) -> Result<(RunConfig, bool), commands::Failure> {
        let mut cfg = RunConfig::default();
        let mut format_given = self.format.is_some();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| {
                commands::Failure::usage(format!("cannot read {}: {e}", path.display()))
            })?;
            format_given |= text.lines().any(|l| {
                l.split('#')
                    .next()
                    .unwrap_or("")
                    .trim_start()
                    .starts_with("format")
            });
            cfg.apply_text(&text).map_err(commands::Failure::from)?;
        }
        if let Some(e) = &self.entry {
            cfg.entry = e.clone();
        }
        macro_rules! take {
            ($($field:ident => $($target:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$field { cfg.$($target).+ = v; })*
            };
        }
        take!(
            t_min => t.min, t_max => t.max, t_count => t.count,
            r_min => r.min, r_max => r.max, r_count => r.count,
            lambda_min => lambda.min, lambda_max => lambda.max, lambda_count => lambda.count,
            tol => tol,
        );
        if self.dimension.is_some() {
            cfg.dimension = self.dimension;
        }
        if let Some(o) = &self.out {
            cfg.out = Some(o.clone());
        }
        if let Some(f) = self.format {
            cfg.format = f.into();
        }
        cfg.validate().map_err(commands::Failure::from)?;
        Ok((cfg, format_given))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("levy-bounds: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use iostab::experiment::{parse_complex, run, Command, ExperimentConfig, Format, EXIT_USAGE};
use iostab::stability::DEFAULT_SEED;
use num_complex::Complex64;

/// Input-output gain experiments on exactly discretized systems.
#[derive(Parser)]
#[command(name = "iostab", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Spatial cells M; dt = 1/M (default 64, or 1000 for laplace-check)
    #[arg(long, global = true)]
    grid_size: Option<usize>,
    /// Band widths for sweep-counterexample, multiples of 1/M in (0, 1]
    #[arg(long, global = true, value_delimiter = ',', default_values_t = [1.0, 0.25, 0.0625])]
    eps: Vec<f64>,
    /// Horizon in steps (default: three transit times, or until F^k < 1e-12)
    #[arg(long, global = true)]
    horizon: Option<usize>,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Random input pairs for the pairing identity
    #[arg(long, global = true, default_value_t = 100)]
    trials: usize,
    /// Random probes for gain and admissibility brackets
    #[arg(long, global = true, default_value_t = 32)]
    probes: usize,
    /// Catalogue system: delay1, exp1, diag-exp-2, transport, leftshift (default: all)
    #[arg(long, global = true)]
    system: Option<String>,
    /// Catalogue kernel for laplace-check
    #[arg(long, global = true, default_value = "delay1")]
    kernel: String,
    /// Laplace points such as 0, 1.5, 1+2i (comma separated or repeated)
    #[arg(long = "s", global = true, value_delimiter = ',', allow_hyphen_values = true, value_parser = complex)]
    s: Vec<Complex64>,
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Ratio table for the moving-band inputs on the left-shift system
    SweepCounterexample,
    /// L∞ and L¹ gain brackets with witnesses
    Gains,
    /// Pairing identity and primal/dual gain inequalities
    CheckDuality,
    /// Observation and control admissibility constants
    Admissibility,
    /// Laplace transform of a catalogue kernel against closed form and realization
    LaplaceCheck,
    /// List built-in systems and kernels
    Catalogue,
}

#[derive(ValueEnum, Clone, Copy)]
enum OutFormat {
    Csv,
    Json,
}

fn complex(s: &str) -> Result<Complex64, String> {
    parse_complex(s).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let command = match cli.command {
        Cmd::SweepCounterexample => Command::SweepCounterexample,
        Cmd::Gains => Command::Gains,
        Cmd::CheckDuality => Command::CheckDuality,
        Cmd::Admissibility => Command::Admissibility,
        Cmd::LaplaceCheck => Command::LaplaceCheck,
        Cmd::Catalogue => Command::Catalogue,
    };
    let mut cfg = ExperimentConfig::new(command);
    cfg.grid_size = cli.grid_size.unwrap_or(command.default_grid_size());
    cfg.eps_list = cli.eps;
    cfg.horizon = cli.horizon;
    cfg.seed = cli.seed;
    cfg.trials = cli.trials;
    cfg.probes = cli.probes;
    cfg.system = cli.system;
    cfg.kernel = cli.kernel;
    if !cli.s.is_empty() {
        cfg.s_points = cli.s;
    }
    cfg.output_path = cli.output;
    cfg.format = match cli.format {
        OutFormat::Csv => Format::Csv,
        OutFormat::Json => Format::Json,
    };
    ExitCode::from(run(&cfg) as u8)
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use skaudit_cli::audit::{bounds_command, delta_command, source_info};
use skaudit_cli::config::{parse_override, ExperimentConfig};
use skaudit_cli::error::{CliError, CliResult};
use skaudit_cli::{plot, sweep, verify};
use skaudit_core::bounds::DEFAULT_C1;

#[derive(Parser)]
#[command(name = "skaudit", version, about = "Secret-key extraction security audits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print H(X|Z), sigma and rho3 of a source preset or pmf file.
    SourceInfo { spec: String },
    /// Run a grid sweep and write CSVs plus a manifest.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Exact delta of a source with its distance curve.
    Delta {
        #[arg(long)]
        source: String,
        #[arg(long)]
        n: usize,
        /// Treat the pmf as an explicit joint over n-tuples.
        #[arg(long)]
        tuple: bool,
    },
    /// Partition bounds and the certified lower bound on delta.
    Bounds {
        #[arg(long)]
        source: String,
        #[arg(long)]
        n: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        b: Vec<f64>,
        #[arg(long)]
        m: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_C1)]
        c1: f64,
    },
    /// Check every implemented inequality on a grid of codes.
    Verify {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
        /// Added to delta in the trade-off check.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        perturb_delta: f64,
    },
    /// Render SVG charts from sweep CSVs.
    Plot {
        #[arg(required = true)]
        csv: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    source: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    rate: Option<String>,
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    b: Option<String>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    threshold: Option<String>,
    #[arg(long)]
    c1: Option<String>,
    /// Any config key, as key=value. Repeatable.
    #[arg(long = "set", value_parser = parse_override)]
    set: Vec<(String, String)>,
}

impl Overrides {
    fn apply(self, mut cfg: ExperimentConfig) -> CliResult<ExperimentConfig> {
        let named = [
            ("source", self.source),
            ("n", self.n),
            ("rate", self.rate),
            ("seeds", self.seeds),
            ("b", self.b),
            ("mode", self.mode),
            ("trials", self.trials),
            ("out", self.out),
            ("threshold", self.threshold),
            ("c1", self.c1),
        ];
        for (k, v) in &self.set {
            cfg.set(k, v)?;
        }
        for (k, v) in named {
            if let Some(v) = v {
                cfg.set(k, &v)?;
            }
        }
        Ok(cfg)
    }
}

fn base_config(path: Option<&Path>, default: ExperimentConfig) -> CliResult<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(default),
    }
}

fn init_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("SKAUDIT_THREADS") else {
        return Ok(());
    };
    let threads: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Config(format!("SKAUDIT_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    init_threads()?;
    match cli.command {
        Command::SourceInfo { spec } => print!("{}", source_info(&spec)?),
        Command::Delta { source, n, tuple } => print!("{}", delta_command(&source, n, tuple)?),
        Command::Bounds { source, n, b, m, c1 } => {
            if b.iter().any(|v| !(*v >= 0.0)) {
                return Err(CliError::Config("b must be non-negative".into()));
            }
            print!("{}", bounds_command(&source, n, &b, m, c1)?)
        }
        Command::Sweep { config, overrides } => {
            let cfg = overrides.apply(base_config(config.as_deref(), ExperimentConfig::default())?)?;
            let out = sweep::run_sweep(&cfg)?;
            for p in sweep::write_outputs(&cfg, &out)? {
                println!("wrote {}", p.display());
            }
        }
        Command::Verify {
            config,
            overrides,
            perturb_delta,
        } => {
            let cfg = overrides.apply(base_config(config.as_deref(), verify::default_config())?)?;
            let report = verify::run_verify(&cfg, perturb_delta)?;
            println!("{report}");
            if !report.passed() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Plot { csv, out } => {
            let dir = match out {
                Some(d) => d,
                None => csv[0]
                    .parent()
                    .map(Path::to_path_buf)
                    .unwrap_or_else(|| PathBuf::from(".")),
            };
            for p in plot::plot(&csv, &dir)? {
                println!("wrote {}", p.display());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("skaudit: {e}");
            e.exit_code()
        }
    }
}

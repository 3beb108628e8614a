//! Command-line front end for the truncated ideal observer.

mod commands;
mod config;
mod error;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{parse_threshold, ExperimentConfig, Format, MethodConfig, Threshold};
use error::CliError;
use output::Header;

#[derive(Parser, Debug)]
#[command(
    name = "truncio",
    version,
    about = "Ideal observer with lefthand feature truncation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Options,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Total area and its analysis, gist and guessing parts at one threshold vector.
    Auc,
    /// Area decomposition at every point of a threshold grid.
    Sweep,
    /// Rated-only ROC curve with its completion segments.
    Roc,
    /// Forced-choice simulation compared with the decomposition.
    Oracle,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Auc => "auc",
            Command::Sweep => "sweep",
            Command::Roc => "roc",
            Command::Oracle => "oracle",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum MethodKind {
    Quadrature,
    MonteCarlo,
}

#[derive(Args, Debug)]
struct Options {
    /// JSON experiment config; `-` reads stdin.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random stream; required by Monte Carlo runs.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores). Never changes the numbers.
    #[arg(long, global = true, env = "TRUNCIO_THREADS")]
    threads: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Internal noise standard deviation.
    #[arg(long, global = true)]
    sigma: Option<f64>,
    /// Comma-separated thresholds, `-inf` allowed.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_threshold)]
    tau: Option<Vec<Threshold>>,
    #[arg(long, global = true, value_enum)]
    method: Option<MethodKind>,
    /// Monte Carlo samples per class.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Quadrature cells.
    #[arg(long, global = true)]
    cells: Option<usize>,
    /// Forced-choice pairs for the oracle.
    #[arg(long, global = true)]
    pairs: Option<usize>,
    /// Rating thresholds along the ROC curve.
    #[arg(long, global = true)]
    thresholds: Option<usize>,
}

fn read_config(path: &PathBuf) -> Result<String, CliError> {
    let mut text = String::new();
    let read = if path.as_os_str() == "-" {
        io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        File::open(path).and_then(|mut f| f.read_to_string(&mut text).map(|_| ()))
    };
    read.map_err(|e| CliError::Config(format!("reading {}: {e}", path.display())))?;
    Ok(text)
}

fn apply_overrides(cfg: &mut ExperimentConfig, o: &Options) {
    if let Some(s) = o.seed {
        cfg.seed = Some(s);
    }
    if let Some(s) = o.sigma {
        cfg.model.sigma = s;
    }
    if let Some(t) = &o.tau {
        cfg.taus = Some(t.clone());
    }
    if let Some(kind) = o.method {
        let keep = cfg.method;
        cfg.method = Some(match (kind, keep) {
            (MethodKind::Quadrature, Some(m @ MethodConfig::Quadrature { .. })) => m,
            (MethodKind::MonteCarlo, Some(m @ MethodConfig::MonteCarlo { .. })) => m,
            (MethodKind::Quadrature, _) => MethodConfig::Quadrature {
                cells: config::DEFAULT_CELLS,
            },
            (MethodKind::MonteCarlo, _) => MethodConfig::MonteCarlo {
                n: truncio::Method::DEFAULT_SAMPLES,
            },
        });
    }
    cfg.resolve();
    match cfg.method.as_mut() {
        Some(MethodConfig::MonteCarlo { n }) => {
            if let Some(s) = o.samples {
                *n = s;
            }
        }
        Some(MethodConfig::Quadrature { cells }) => {
            if let Some(c) = o.cells {
                *cells = c;
            }
        }
        None => {}
    }
    if let Some(p) = o.pairs {
        cfg.oracle.n_pairs = p;
    }
    if let Some(t) = o.thresholds {
        cfg.roc.n_thresholds = t;
    }
    if let Some(f) = o.format {
        cfg.output.format = f;
    }
    if let Some(p) = &o.output {
        cfg.output.path = Some(p.clone());
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let path = cli
        .opts
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("no config given (--config)".into()))?;
    let mut cfg = config::parse(&read_config(path)?)?;
    apply_overrides(&mut cfg, &cli.opts);

    if let Some(n) = cli.opts.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("threads: {e}")))?;
    }

    let stochastic = matches!(cli.command, Command::Oracle)
        || matches!(cfg.method, Some(MethodConfig::MonteCarlo { .. }));
    let table = match cli.command {
        Command::Auc => commands::auc(&cfg)?,
        Command::Sweep => commands::sweep_grid(&cfg)?,
        Command::Roc => commands::roc(&cfg)?,
        Command::Oracle => commands::oracle(&cfg)?,
    };
    let header = Header {
        command: cli.command.name(),
        config_sha256: cfg.digest(),
        seed: cfg.seed_label(stochastic),
    };

    let sink: Box<dyn Write> = match &cfg.output.path {
        Some(p) => Box::new(
            File::create(p)
                .map_err(|e| CliError::Config(format!("output {}: {e}", p.display())))?,
        ),
        None => Box::new(io::stdout().lock()),
    };
    let mut out = BufWriter::new(sink);
    let written = match cfg.output.format {
        Format::Csv => output::write_csv(&mut out, &header, &table),
        Format::Json => output::write_json(&mut out, &header, &table),
    };
    written
        .and_then(|_| out.flush())
        .map_err(|e| CliError::Config(format!("writing output: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("truncio: {e}");
            e.exit_code()
        }
    }
}

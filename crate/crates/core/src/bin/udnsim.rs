use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use udn_coop::config::{ConfigErrors, ConfigFile, ConfigFileError};
use udn_coop::output::{manifest, run_row, run_sweep, write_csv, OutputError, ResultRow, RowLabel, Timing};
use udn_coop::preset::{figure_sweeps, Figure, DEFAULT_PRESET_DROPS};
use udn_coop::sim::SimError;
use udn_coop::sweep::{Scheme, SweepError, SweepSpec};

const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "udnsim", version, about = "Joint transmission Monte Carlo for ultra-dense networks")]
struct Cli {
    /// Worker threads for drops (default: all cores).
    #[arg(long, global = true, env = "UDNSIM_JOBS")]
    jobs: Option<usize>,
    /// Write 0 into wall_clock_s so repeated runs are byte-identical.
    #[arg(long, global = true)]
    no_timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one configuration and write a single CSV row.
    Run {
        /// TOML config; omitted keys take defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override a config key, e.g. `--set n_coop=3`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a one-parameter sweep from a TOML spec.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the preset sweeps for one figure (fig3 … fig8) or `all`.
    Reproduce {
        #[arg(long)]
        figure: String,
        #[arg(long)]
        out: PathBuf,
        /// Drops per point.
        #[arg(long, default_value_t = DEFAULT_PRESET_DROPS)]
        drops: usize,
    },
}

enum Failure {
    Config(String),
    Io(String),
    Other(anyhow::Error),
}

impl From<ConfigErrors> for Failure {
    fn from(e: ConfigErrors) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<ConfigFileError> for Failure {
    fn from(e: ConfigFileError) -> Self {
        match e {
            ConfigFileError::Io { .. } => Failure::Io(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

impl From<SweepError> for Failure {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::File(f) => f.into(),
            other => Failure::Config(other.to_string()),
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        Failure::Other(e.into())
    }
}

impl From<OutputError> for Failure {
    fn from(e: OutputError) -> Self {
        match e {
            OutputError::Sweep(s) => s.into(),
            OutputError::Sim(s) => s.into(),
            OutputError::Io(_) | OutputError::Csv(_) => Failure::Io(e.to_string()),
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Io(format!("cannot create {}: {e}", path.display())))
}

fn save_rows(path: &Path, rows: &[ResultRow]) -> Result<(), Failure> {
    write_csv(create(path)?, rows)?;
    Ok(())
}

fn warn(warnings: Vec<String>) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn cmd_run(config: Option<&Path>, overrides: &[String], out: &Path, jobs: usize, timing: Timing) -> Result<(), Failure> {
    let mut file = match config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    for o in overrides {
        file.set(o)?;
    }
    let cfg = file.validate()?;
    warn(cfg.warnings());
    // Open the output first so an unwritable path fails before the simulation.
    let writer = create(out)?;
    let (row, _) = run_row(RowLabel::default(), &cfg, &Scheme::ALL, jobs, timing)?;
    write_csv(writer, &[row])?;
    Ok(())
}

fn cmd_sweep(spec: &Path, out: &Path, jobs: usize, timing: Timing) -> Result<(), Failure> {
    let spec = SweepSpec::load(spec)?;
    for p in spec.points()? {
        warn(p.config.warnings());
    }
    let writer = create(out)?;
    let rows = run_sweep(&spec, 0, jobs, timing)?;
    write_csv(writer, &rows)?;
    Ok(())
}

fn cmd_reproduce(figure: &str, out: &Path, drops: usize, jobs: usize, timing: Timing) -> Result<(), Failure> {
    let figures: Vec<Figure> = if figure.eq_ignore_ascii_case("all") {
        Figure::ALL.to_vec()
    } else {
        vec![figure.parse().map_err(|e: udn_coop::preset::UnknownFigure| Failure::Config(e.to_string()))?]
    };
    if drops == 0 {
        return Err(Failure::Config("--drops must be positive".into()));
    }
    fs::create_dir_all(out).map_err(|e| Failure::Io(format!("cannot create {}: {e}", out.display())))?;
    for fig in figures {
        let specs = figure_sweeps(fig, drops);
        let text = manifest(fig.name(), fig.title(), &specs)?;
        let manifest_path = out.join(format!("{}.manifest.toml", fig.name()));
        fs::write(&manifest_path, text)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", manifest_path.display())))?;
        let mut rows = Vec::new();
        for (i, spec) in specs.iter().enumerate() {
            rows.extend(run_sweep(spec, i, jobs, timing)?);
        }
        save_rows(&out.join(format!("{}.csv", fig.name())), &rows)?;
        eprintln!("{}: {} rows", fig.name(), rows.len());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let jobs = cli
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);
    let timing = if cli.no_timing { Timing::Zero } else { Timing::Measure };
    let result = match &cli.command {
        Command::Run { config, overrides, out } => cmd_run(config.as_deref(), overrides, out, jobs, timing),
        Command::Sweep { spec, out } => cmd_sweep(spec, out, jobs, timing),
        Command::Reproduce { figure, out, drops } => cmd_reproduce(figure, out, *drops, jobs, timing),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error:\n{msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("i/o error: {msg}");
            ExitCode::from(EXIT_IO)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {:#}", e.context("simulation failed"));
            ExitCode::FAILURE
        }
    }
}

//! `dsim` command-line driver: configuration loading, experiment dispatch
//! and CSV output.
//!
//! Exit codes: 0 success, 1 output I/O failure, 2 configuration or flag
//! error, 3 simulation or fit error.

mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dsim_core::experiments::{ExperimentConfig, Mode};

pub use config::{config_to_toml, load_config, parse_config, RunManifest};
pub use output::{read_table, Table};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("simulation error: {0}")]
    Simulation(#[from] dsim_core::Error),
    #[error("output error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Simulation(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "dsim", version, about = "Dressed-state NV-center simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args, Clone, Default)]
pub struct CommonArgs {
    /// TOML configuration file; missing keys take defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed of all noise streams.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of noise trajectories.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub trajectories: Option<i64>,
    /// Output CSV path [default: <command>.csv].
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Undriven qubit or CWDD-protected dressed qubit.
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    /// Poisson shot noise with N photon counts per point.
    #[arg(long = "shot-noise", global = true, value_name = "N")]
    pub shot_noise: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Bare,
    Cwdd,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Bare => Mode::Bare,
            ModeArg::Cwdd => Mode::Cwdd,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Gaussian,
    DampedCosine,
    Beat,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dressed energies and gaps versus field offset (b_G column).
    Spectrum,
    /// Ω/Δ ratio at which the gap curvature vanishes, one row per Δ.
    Sweetspot {
        /// Detunings, MHz.
        #[arg(long, value_delimiter = ',', default_values_t = [0.4, 2.0])]
        delta: Vec<f64>,
    },
    /// Fluorescence versus probe frequency.
    Odmr,
    /// Ramsey signal versus free delay.
    Fid,
    /// Rabi signal versus drive duration.
    Rabi,
    /// Target-state population after n NOT gates.
    Notgate {
        /// Largest gate count [default: notgate.n_max].
        #[arg(long)]
        n_max: Option<u32>,
    },
    /// Driven-coherence decay time versus drive strength.
    T2scan,
    /// Fit a decay model to a CSV series.
    Fit {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "gaussian")]
        model: ModelArg,
        /// Abscissa column [default: first column].
        #[arg(long)]
        x: Option<String>,
        /// Signal column [default: first of signal, fidelity, or the second column].
        #[arg(long)]
        y: Option<String>,
        /// Hold the Gaussian offset at this value.
        #[arg(long, allow_negative_numbers = true)]
        fixed_offset: Option<f64>,
        /// Centre tone of the beat model, MHz [default: bare.fid_detuning].
        #[arg(long, allow_negative_numbers = true)]
        center: Option<f64>,
        /// Tone spacing of the beat model, MHz [default: constants.a_hf].
        #[arg(long)]
        spacing: Option<f64>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Sweetspot { .. } => "sweetspot",
            Command::Odmr => "odmr",
            Command::Fid => "fid",
            Command::Rabi => "rabi",
            Command::Notgate { .. } => "notgate",
            Command::T2scan => "t2scan",
            Command::Fit { .. } => "fit",
        }
    }

    fn takes_mode(&self) -> bool {
        matches!(
            self,
            Command::Odmr | Command::Fid | Command::Rabi | Command::Notgate { .. }
        )
    }
}

/// Configuration file plus command-line overrides, validated.
pub fn resolve_config(common: &CommonArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &common.config {
        Some(p) => load_config(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.noise.master_seed = s;
    }
    if let Some(n) = common.trajectories {
        cfg.trajectories = n;
    }
    if let Some(n) = common.shot_noise {
        cfg.readout.shots = Some(n);
    }
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(cfg)
}

fn thread_count() -> Result<Option<usize>, CliError> {
    match std::env::var("DSIM_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::Config(format!(
                "DSIM_THREADS = '{v}' is not a positive integer"
            ))),
        },
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let started = Instant::now();
    let command = &cli.command;
    if cli.common.mode.is_some() && !command.takes_mode() {
        return Err(CliError::Usage(format!(
            "--mode does not apply to '{}'",
            command.name()
        )));
    }
    let mode = command
        .takes_mode()
        .then(|| Mode::from(cli.common.mode.unwrap_or(ModeArg::Bare)));
    let cfg = resolve_config(&cli.common)?;
    let out = cli
        .common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", command.name())));

    let run = || commands::dispatch(command, mode, &cfg);
    let (table, notes) = match thread_count()? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("DSIM_THREADS: {e}")))?
            .install(run)?,
        None => run()?,
    };

    let mut comments = vec![
        format!("dsim {VERSION}"),
        format!("command: {}", command.name()),
    ];
    if let Some(m) = mode {
        comments.push(format!("mode: {}", m.name()));
    }
    comments.push(format!("seed: {}", cfg.noise.master_seed));
    comments.push(format!("trajectories: {}", cfg.trajectories));
    comments.extend(notes);
    comments.push("config:".to_string());
    comments.push(
        config_to_toml(&cfg)?
            .lines()
            .map(|l| format!("  {l}"))
            .collect::<Vec<_>>()
            .join("\n"),
    );
    output::write_file(&out, &table.render(&comments)?)?;

    let mut manifest_path = out.clone().into_os_string();
    manifest_path.push(".manifest.toml");
    let manifest = RunManifest {
        command: command.name().to_string(),
        mode: mode.map(|m| m.name().to_string()),
        version: VERSION.to_string(),
        master_seed: cfg.noise.master_seed,
        outputs: vec![out.display().to_string()],
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        config: cfg,
    };
    output::write_file(PathBuf::from(manifest_path).as_path(), manifest.to_toml()?.as_bytes())
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code. Diagnostics go to stderr.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("dsim: {e}");
            e.exit_code()
        }
    }
}

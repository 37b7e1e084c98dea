mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::warn;
use losmimo::transceiver::{ChannelModel, Interference};

use commands::Report;
use config::{CommandKind, ExperimentConfig, SnrGrid};

const THREADS_ENV: &str = "LOSMIMO_THREADS";

/// Experiment runner for line-of-sight MIMO links with rotatable ULAs.
#[derive(Parser, Debug)]
#[command(name = "losmimo", version)]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,

    /// Omit to run the command named in the config file.
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Experiment config (TOML or JSON). Flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file; stdout when omitted.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    /// Also write a gnuplot script for the CSV output.
    #[arg(long, global = true)]
    plot_script: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true, allow_hyphen_values = true)]
    snr_start_db: Option<f64>,

    #[arg(long, global = true, allow_hyphen_values = true)]
    snr_stop_db: Option<f64>,

    #[arg(long, global = true)]
    snr_step_db: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integer and relaxed capacity bounds over an SNR grid.
    BoundSweep(CountArgs),
    /// Capacity over a grid of normalized spacings.
    EtaSweep(EtaSweepArgs),
    /// Geometric bank of receive rotations.
    Plan(PlanArgs),
    /// Per-stream SINR and rate of the Fourier + MRC transceiver.
    Transceive(TransceiveArgs),
    /// Parallel vs rotated architectures as a share of the bound.
    Table1(Table1Args),
    /// Eigenvalue histogram of the scaled channel Gram.
    Polarization(PolarizationArgs),
    /// Circulant surrogate error against array size.
    SurrogateScaling(SurrogateArgs),
    /// Three fixed spacings against the full spacing sweep.
    ThreeSpacing(ThreeSpacingArgs),
}

#[derive(Args, Debug, Default)]
struct CountArgs {
    #[arg(long)]
    nt: Option<usize>,
    #[arg(long)]
    nr: Option<usize>,
}

#[derive(Args, Debug)]
struct EtaSweepArgs {
    #[command(flatten)]
    counts: CountArgs,
    /// Explicit spacing grid, comma separated.
    #[arg(long, value_delimiter = ',')]
    etas: Option<Vec<f64>>,
    #[arg(long)]
    eta_points: Option<usize>,
    /// Keep only the best spacing per SNR.
    #[arg(long)]
    envelope: bool,
}

#[derive(Args, Debug)]
struct PlanArgs {
    #[command(flatten)]
    counts: CountArgs,
    /// Geometric ratio between consecutive spacings.
    #[arg(long)]
    r: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    snr_min_db: Option<f64>,
}

#[derive(Args, Debug)]
struct TransceiveArgs {
    /// Geometry file (TOML or JSON): a full geometry or `n_tx`, `n_rx`, `eta`.
    #[arg(long)]
    geometry: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    snr_db: Option<f64>,
    #[arg(long, conflicts_with = "sweep_streams")]
    streams: Option<usize>,
    /// Use the stream count with the best sum rate.
    #[arg(long)]
    sweep_streams: bool,
    #[arg(long)]
    model: Option<ChannelModel>,
    /// `all-directions` or `active-streams`.
    #[arg(long, value_parser = parse_interference)]
    interference: Option<Interference>,
}

#[derive(Args, Debug)]
struct Table1Args {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    sweep_streams: bool,
    #[arg(long, value_parser = parse_interference)]
    interference: Option<Interference>,
}

#[derive(Args, Debug)]
struct PolarizationArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    bins: Option<usize>,
    /// Upper edge of the histogram.
    #[arg(long)]
    upper: Option<f64>,
}

#[derive(Args, Debug)]
struct SurrogateArgs {
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
}

#[derive(Args, Debug)]
struct ThreeSpacingArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    eta_points: Option<usize>,
}

fn parse_interference(s: &str) -> Result<Interference, String> {
    match s {
        "all-directions" | "all" => Ok(Interference::AllDirections),
        "active-streams" | "active" => Ok(Interference::ActiveStreams),
        other => Err(format!("unknown interference rule '{other}'")),
    }
}

fn set<T>(slot: &mut Option<T>, value: Option<T>) {
    if value.is_some() {
        *slot = value;
    }
}

fn set_flag(slot: &mut Option<bool>, flag: bool) {
    if flag {
        *slot = Some(true);
    }
}

impl CountArgs {
    fn apply(self, cfg: &mut ExperimentConfig) {
        set(&mut cfg.n_tx, self.nt);
        set(&mut cfg.n_rx, self.nr);
    }
}

impl Command {
    fn kind(&self) -> CommandKind {
        match self {
            Self::BoundSweep(_) => CommandKind::BoundSweep,
            Self::EtaSweep(_) => CommandKind::EtaSweep,
            Self::Plan(_) => CommandKind::Plan,
            Self::Transceive(_) => CommandKind::Transceive,
            Self::Table1(_) => CommandKind::Table1,
            Self::Polarization(_) => CommandKind::Polarization,
            Self::SurrogateScaling(_) => CommandKind::SurrogateScaling,
            Self::ThreeSpacing(_) => CommandKind::ThreeSpacing,
        }
    }

    fn apply(self, cfg: &mut ExperimentConfig) {
        match self {
            Self::BoundSweep(a) => a.apply(cfg),
            Self::EtaSweep(a) => {
                a.counts.apply(cfg);
                set(&mut cfg.etas, a.etas);
                set(&mut cfg.eta_points, a.eta_points);
                set_flag(&mut cfg.envelope, a.envelope);
            }
            Self::Plan(a) => {
                a.counts.apply(cfg);
                set(&mut cfg.ratio, a.r);
                set(&mut cfg.snr_min_db, a.snr_min_db);
            }
            Self::Transceive(a) => {
                if a.geometry.is_some() {
                    cfg.geometry_file = a.geometry;
                }
                set(&mut cfg.snr_db, a.snr_db);
                if a.streams.is_some() {
                    cfg.streams = a.streams;
                    cfg.sweep_streams = Some(false);
                }
                set_flag(&mut cfg.sweep_streams, a.sweep_streams);
                if a.sweep_streams {
                    cfg.streams = None;
                }
                set(&mut cfg.model, a.model);
                set(&mut cfg.interference, a.interference);
            }
            Self::Table1(a) => {
                set(&mut cfg.n, a.n);
                set_flag(&mut cfg.sweep_streams, a.sweep_streams);
                set(&mut cfg.interference, a.interference);
            }
            Self::Polarization(a) => {
                set(&mut cfg.n, a.n);
                set(&mut cfg.eta, a.eta);
                set(&mut cfg.epsilon, a.epsilon);
                set(&mut cfg.bins, a.bins);
                set(&mut cfg.upper, a.upper);
            }
            Self::SurrogateScaling(a) => {
                set(&mut cfg.eta, a.eta);
                set(&mut cfg.sizes, a.sizes);
            }
            Self::ThreeSpacing(a) => {
                set(&mut cfg.n, a.n);
                set(&mut cfg.eta_points, a.eta_points);
            }
        }
    }
}

impl CommonArgs {
    fn apply(self, cfg: &mut ExperimentConfig) -> Result<()> {
        set(&mut cfg.output, self.output);
        set(&mut cfg.plot_script, self.plot_script);
        set(&mut cfg.seed, self.seed);
        let grid_flags = [self.snr_start_db, self.snr_stop_db, self.snr_step_db];
        if grid_flags.iter().any(Option::is_some) {
            let base = cfg.snr;
            let pick = |flag: Option<f64>, from_file: Option<f64>, name: &str| {
                flag.or(from_file).with_context(|| format!("--{name} is required to define the SNR grid"))
            };
            cfg.snr = Some(SnrGrid::new(
                pick(self.snr_start_db, base.map(|g| g.start_db), "snr-start-db")?,
                pick(self.snr_stop_db, base.map(|g| g.stop_db), "snr-stop-db")?,
                pick(self.snr_step_db, base.map(|g| g.step_db).or(Some(1.0)), "snr-step-db")?,
            ));
        }
        Ok(())
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value.trim().parse().with_context(|| format!("{THREADS_ENV}={value} is not a count"))?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    configure_threads()?;
    let mut cfg = match &cli.common.config {
        Some(path) if !path.exists() => bail!("config file {} does not exist", path.display()),
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let kind = match (&cli.command, cfg.command) {
        (Some(cmd), Some(file_kind)) if cmd.kind() != file_kind => {
            warn!("config names {file_kind:?}, running {:?} from the command line", cmd.kind());
            cmd.kind()
        }
        (Some(cmd), _) => cmd.kind(),
        (None, Some(file_kind)) => file_kind,
        (None, None) => bail!("no command given on the command line or in the config"),
    };
    cli.common.apply(&mut cfg)?;
    if let Some(cmd) = cli.command {
        cmd.apply(&mut cfg);
    }
    cfg.command = Some(kind);
    cfg.resolve_geometry()?;

    let out = cfg.output.as_deref();
    match commands::run(kind, &cfg)? {
        Report::Table(table) => {
            output::emit_table(&table, out)?;
            if let Some(script) = &cfg.plot_script {
                let data = out.context("--plot-script needs --output so the script can reference the CSV")?;
                let title = format!("{kind:?}");
                output::emit_text(&output::plot_script(&table, data, &title), Some(script))?;
            }
        }
        Report::Plan { json, summary } => {
            output::emit_text(&json, out)?;
            eprint!("{summary}");
            if cfg.plot_script.is_some() {
                warn!("plan output is JSON; no plot script written");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

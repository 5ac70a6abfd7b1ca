use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use splitspec_core::experiments::{
    run, state_spectrum, ExperimentConfig, ExperimentOutput, Grid, ModelSpec, OutputFormat, Scenario, StateLabel,
};
use splitspec_core::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "splitspec", version, about = "Split spectroscopy of spin-1/2 chains by exact diagonalization")]
struct Cli {
    /// Seed for disorder realizations; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; all cores by default.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModelName {
    Xy,
    RandomField,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the experiment described by a TOML config file.
    Run {
        config: PathBuf,
        /// Output file; the config's `output` or stdout otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Split spectrum of one eigenstate.
    Spectrum(SpectrumArgs),
    /// Disorder-averaged entanglement of mid-spectrum states.
    SweepDisorder(DisorderArgs),
    /// RF linear-response curve next to the split spectrum.
    RfCheck(RfArgs),
}

#[derive(Args, Debug)]
struct ModelArgs {
    #[arg(long, value_enum, default_value_t = ModelName::Xy)]
    model: ModelName,
    #[arg(long = "J", default_value_t = 1.0)]
    j: f64,
    /// XY anisotropy.
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    /// XY transverse field.
    #[arg(long, default_value_t = 0.0)]
    h: f64,
    /// Random-field disorder strength.
    #[arg(long = "H", default_value_t = 1.0)]
    disorder: f64,
}

impl ModelArgs {
    fn spec(&self) -> ModelSpec {
        match self.model {
            ModelName::Xy => ModelSpec::Xy { j: self.j, alpha: self.alpha, h: self.h },
            ModelName::RandomField => ModelSpec::RandomField { j: self.j, disorder: self.disorder },
        }
    }
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long = "L")]
    len: usize,
    /// gs, mid or e<index>.
    #[arg(long, default_value = "gs")]
    state: StateLabel,
    /// Lorentzian half-width of the broadened curve (JSON output only).
    #[arg(long, default_value_t = 0.05)]
    eta: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DisorderArgs {
    #[arg(long = "J", default_value_t = 1.0)]
    j: f64,
    /// Chain lengths, e.g. `8,10,12`.
    #[arg(long = "L", value_delimiter = ',', default_value = "8,10,12")]
    sizes: Vec<usize>,
    /// Disorder strengths: `1,3,5` or `start:stop:step`.
    #[arg(long = "H", default_value = "1:6:0.5", value_parser = parse_grid)]
    disorder: Grid,
    #[arg(long, default_value_t = 20)]
    realizations: u64,
    /// States per realization nearest the window center; all window states when absent.
    #[arg(long)]
    states_per_realization: Option<usize>,
    /// Normalized energy window `lo,hi`.
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [0.45, 0.55])]
    window: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RfArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long = "L", default_value_t = 5)]
    len: usize,
    #[arg(long, default_value = "gs")]
    state: StateLabel,
    /// Drive duration.
    #[arg(long)]
    t_final: Option<f64>,
    /// Time step.
    #[arg(long)]
    dt: Option<f64>,
    /// Frequency grid step.
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    let nums = |sep: char| -> std::result::Result<Vec<f64>, String> {
        s.split(sep).map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"))).collect()
    };
    let grid = if s.contains(':') {
        match nums(':')?.as_slice() {
            &[start, stop, step] => Grid::Range { start, stop, step },
            _ => return Err("expected start:stop:step".into()),
        }
    } else {
        Grid::Values(nums(',')?)
    };
    grid.points().map_err(|e| e.to_string())?;
    Ok(grid)
}

fn apply_globals(cli: &Cli, cfg: &mut ExperimentConfig) {
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
}

fn emit(out: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
            write(&mut file)?;
            file.flush()?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            write(&mut stdout)?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn run_config(cli: &Cli, mut cfg: ExperimentConfig, out: Option<PathBuf>) -> Result<()> {
    apply_globals(cli, &mut cfg);
    cfg.validate()?;
    let output: ExperimentOutput = run(&cfg)?;
    let path = out.or_else(|| cfg.output.clone());
    emit(path.as_deref(), |w| output.write(w, cli.format.into()))
}

fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run { config, out } => run_config(cli, ExperimentConfig::from_path(config)?, out.clone()),
        Command::Spectrum(a) => {
            let mut cfg = ExperimentConfig::new(Scenario::Coefficients, a.model.spec());
            cfg.sizes = vec![a.len];
            cfg.states = vec![a.state];
            cfg.numerics.eta = a.eta;
            apply_globals(cli, &mut cfg);
            let spectrum = state_spectrum(&cfg)?;
            emit(a.out.as_deref(), |w| match cli.format {
                Format::Csv => spectrum.write_csv(w),
                Format::Json => {
                    serde_json::to_writer_pretty(&mut *w, &spectrum.to_json())?;
                    writeln!(w)?;
                    Ok(())
                }
            })
        }
        Command::SweepDisorder(a) => {
            let mut cfg =
                ExperimentConfig::new(Scenario::DisorderSweep, ModelSpec::RandomField { j: a.j, disorder: 1.0 });
            cfg.sizes = a.sizes.clone();
            cfg.fields = Some(a.disorder.clone());
            cfg.ensemble.n_realizations = a.realizations;
            cfg.ensemble.n_states_per_realization = a.states_per_realization;
            cfg.ensemble.energy_window = [a.window[0], a.window[1]];
            run_config(cli, cfg, a.out.clone())
        }
        Command::RfCheck(a) => {
            let mut cfg = ExperimentConfig::new(Scenario::RfCheck, a.model.spec());
            cfg.sizes = vec![a.len];
            cfg.states = vec![a.state];
            if let Some(t) = a.t_final {
                cfg.rf.drive.t_final = t;
            }
            if let Some(dt) = a.dt {
                cfg.rf.drive.dt = dt;
            }
            if let Some(step) = a.step {
                cfg.rf.step = step;
            }
            run_config(cli, cfg, a.out.clone())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
    }
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(Error::Config(msg)) => {
            eprintln!("error: invalid configuration: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

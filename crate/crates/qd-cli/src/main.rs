use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qd_cli::config::{
    apply_scenario, device_model, parse_config, RunConfig, Scenario,
};
use qd_cli::oracle::convergence_report;
use qd_cli::pipeline::{
    masked_map, masked_spectrum, spectrum_at, sweep_map, tracks_for, PipelineError,
};
use qd_cli::validate::{report, run_all};
use qd_cli::writers::{
    config_hash, heatmap_pgm, map_tsv, metadata_text, spectrum_tsv, tracks_tsv,
};

#[derive(Parser)]
#[command(
    name = "qdsim",
    version,
    about = "Quantum-dot emission simulator: bias sweeps, filtered spectra, and self-checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Fig5a,
    Fig5b,
    Fig3,
    Custom,
}

impl From<ScenarioArg> for Scenario {
    fn from(s: ScenarioArg) -> Scenario {
        match s {
            ScenarioArg::Fig5a => Scenario::Fig5a,
            ScenarioArg::Fig5b => Scenario::Fig5b,
            ScenarioArg::Fig3 => Scenario::Fig3,
            ScenarioArg::Custom => Scenario::Custom,
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenario preset applied on top of the configuration.
    #[arg(long, value_enum, default_value = "custom")]
    scenario: ScenarioArg,
    /// Worker threads for the sweep pool (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the emission spectrum at a single bias voltage.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Bias voltage; defaults to the configured anchor voltage.
        #[arg(long)]
        voltage: Option<f64>,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Zero the bins around both laser energies.
        #[arg(long)]
        mask_notches: bool,
    },
    /// Run the bias sweep: spectral map, labeled peak tracks, heatmap.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        mask_notches: bool,
    },
    /// Run the full invariant suite and print a pass/fail table.
    Validate {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Compare RK4 against the matrix-exponential reference propagator.
    Oracle {
        #[command(flatten)]
        common: CommonArgs,
        /// Coarse step for the comparison; it is repeated at half this step.
        #[arg(long, default_value_t = 0.1)]
        dt: f64,
        /// Horizon of the comparison, ps.
        #[arg(long, default_value_t = 600.0)]
        t_end: f64,
        /// Bias voltage; defaults to the configured anchor voltage.
        #[arg(long)]
        voltage: Option<f64>,
    },
}

/// Loads the configuration file (or defaults) and applies the scenario.
fn load_config(common: &CommonArgs) -> Result<RunConfig, String> {
    let text = match &common.config {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?,
        None => String::new(),
    };
    let mut cfg = parse_config(&text).map_err(|e| e.to_string())?;
    apply_scenario(&mut cfg, common.scenario.into()).map_err(|e| e.to_string())?;
    Ok(cfg)
}

/// Runs `body` inside a rayon pool of the requested size (or the default
/// global pool when unset).
fn with_pool<T>(workers: Option<usize>, body: impl FnOnce() -> T + Send) -> Result<T, String>
where
    T: Send,
{
    match workers {
        None => Ok(body()),
        Some(n) => {
            if n == 0 {
                return Err("--workers must be at least 1".into());
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| e.to_string())?;
            Ok(pool.install(body))
        }
    }
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), String> {
    fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

const EXIT_VALIDATION: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

fn classify_pipeline(e: PipelineError) -> (u8, String) {
    match e {
        PipelineError::Config(c) => (EXIT_CONFIG, c.to_string()),
        PipelineError::Run(m) => (EXIT_RUNTIME, m),
    }
}

fn run() -> Result<(), (u8, String)> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate {
            common,
            voltage,
            out,
            mask_notches,
        } => {
            let cfg = load_config(&common).map_err(|m| (EXIT_CONFIG, m))?;
            let hash = config_hash(&cfg);
            let v = voltage.unwrap_or(cfg.model.anchor_voltage);
            let spectrum = with_pool(common.workers, || spectrum_at(&cfg, v))
                .map_err(|m| (EXIT_CONFIG, m))?
                .map_err(|e| classify_pipeline(e))?;
            let spectrum = if mask_notches {
                masked_spectrum(&spectrum, &cfg)
            } else {
                spectrum
            };
            write_file(&out, "spectrum.tsv", spectrum_tsv(&spectrum, v, &hash).as_bytes())
                .map_err(|m| (EXIT_RUNTIME, m))?;
            write_file(
                &out,
                "spectrum.meta.txt",
                metadata_text(&cfg, &hash).as_bytes(),
            )
            .map_err(|m| (EXIT_RUNTIME, m))?;
            Ok(())
        }
        Command::Sweep {
            common,
            out,
            mask_notches,
        } => {
            let cfg = load_config(&common).map_err(|m| (EXIT_CONFIG, m))?;
            let hash = config_hash(&cfg);
            let map = with_pool(common.workers, || sweep_map(&cfg))
                .map_err(|m| (EXIT_CONFIG, m))?
                .map_err(|e| classify_pipeline(e))?;
            let map = if mask_notches {
                masked_map(&map, &cfg)
            } else {
                map
            };
            let model = device_model(&cfg).map_err(|e| (EXIT_CONFIG, e.to_string()))?;
            let tracks = tracks_for(&map, &cfg, &model);
            write_file(&out, "map.tsv", map_tsv(&map, &hash).as_bytes())
                .map_err(|m| (EXIT_RUNTIME, m))?;
            write_file(&out, "map.meta.txt", metadata_text(&cfg, &hash).as_bytes())
                .map_err(|m| (EXIT_RUNTIME, m))?;
            write_file(&out, "tracks.tsv", tracks_tsv(&tracks, &hash).as_bytes())
                .map_err(|m| (EXIT_RUNTIME, m))?;
            write_file(&out, "map.pgm", &heatmap_pgm(&map, cfg.output.heatmap_gamma))
                .map_err(|m| (EXIT_RUNTIME, m))?;
            if map.failed_columns() > 0 {
                eprintln!(
                    "warning: {} of {} columns failed; see map.tsv header",
                    map.failed_columns(),
                    map.voltages.len()
                );
            }
            Ok(())
        }
        Command::Validate { common } => {
            let cfg = load_config(&common).map_err(|m| (EXIT_CONFIG, m))?;
            let results = with_pool(common.workers, || run_all(&cfg))
                .map_err(|m| (EXIT_CONFIG, m))?;
            if report(&results) {
                Ok(())
            } else {
                Err((EXIT_VALIDATION, "validation failed".into()))
            }
        }
        Command::Oracle {
            common,
            dt,
            t_end,
            voltage,
        } => {
            let cfg = load_config(&common).map_err(|m| (EXIT_CONFIG, m))?;
            let v = voltage.unwrap_or(cfg.model.anchor_voltage);
            let report = convergence_report(&cfg, v, dt, t_end)
                .map_err(|e| classify_pipeline(e))?;
            println!("{report}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, message)) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}

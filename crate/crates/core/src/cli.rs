//! Command-line front end: `generate`, `estimate` and `sweep`.
//!
//! Configuration files are TOML with the keys of [`ExperimentConfig`]
//! plus an optional `output` path for the sweep CSV. Unknown keys are
//! rejected and missing keys take the defaults of [`ExperimentConfig`].

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::angular::build_dictionary;
use crate::bench::{
    self, channel_seed, evaluate, run_sweep, run_sweep_with_threads, simulate_pilots, ExperimentConfig, Score,
};
use crate::channel::{load_fixture, sample_paths, save_fixture, ChannelFixture};
use crate::estimators::{EstimationProblem, EstimatorKind};
use crate::{Error, Result};

/// Environment variable holding the default worker count for sweeps.
pub const THREADS_ENV: &str = "RIS_DSOMP_THREADS";

#[derive(Debug, Parser)]
#[command(name = "ris-dsomp", version, about = "RIS cascaded channel estimation simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a channel realization and write it as a JSON fixture.
    Generate(GenerateArgs),
    /// Run estimators on a fixture and print NMSE and support recovery.
    Estimate(EstimateArgs),
    /// Run a Monte-Carlo sweep and write CSV plus manifest.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// TOML experiment config; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Fixture path to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Trial seed (defaults to the config's master seed).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of common paths (defaults to the first config value).
    #[arg(long)]
    pub lc: Option<usize>,
    /// Overwrite an existing file.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Fixture written by `generate`.
    pub fixture: PathBuf,
    /// Comma-separated estimators.
    #[arg(long, value_delimiter = ',', default_value = "ds_omp")]
    pub estimators: Vec<EstimatorKind>,
    /// Pilot length.
    #[arg(long)]
    pub q: usize,
    /// SNR in dB, `inf` for noiseless.
    #[arg(long = "snr-db", default_value_t = 0.0, allow_hyphen_values = true)]
    pub snr_db: f64,
    /// Trial seed for pilots and noise (defaults to the fixture seed).
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// TOML experiment config; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// CSV path (overrides `output` in the config).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long = "snr-db", allow_hyphen_values = true)]
    pub snr_db: Option<f64>,
    /// Comma-separated pilot lengths.
    #[arg(long, value_delimiter = ',')]
    pub q: Option<Vec<usize>>,
    /// Comma-separated common-path counts.
    #[arg(long, value_delimiter = ',')]
    pub lc: Option<Vec<usize>>,
    /// Comma-separated estimators.
    #[arg(long, value_delimiter = ',')]
    pub estimators: Option<Vec<EstimatorKind>>,
    /// Overwrite existing CSV and manifest.
    #[arg(long)]
    pub force: bool,
}

/// Parsed config file: the experiment and the optional output path.
#[derive(Debug, Clone, PartialEq)]
pub struct CliConfigFile {
    pub experiment: ExperimentConfig,
    pub output: Option<PathBuf>,
}

impl CliConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text)?;
        let output = match table.remove("output") {
            None => None,
            Some(toml::Value::String(s)) => Some(PathBuf::from(s)),
            Some(other) => {
                return Err(Error::Config(format!("`output` must be a string, got {other}")));
            }
        };
        let experiment: ExperimentConfig = table.try_into()?;
        Ok(Self { experiment, output })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    fn load_or_default(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::load(p),
            None => Ok(Self {
                experiment: ExperimentConfig::default(),
                output: None,
            }),
        }
    }
}

fn guard_overwrite(path: &Path, force: bool) -> Result<()> {
    if path.exists() && !force {
        return Err(Error::OutputExists(path.to_path_buf()));
    }
    Ok(())
}

/// Samples the trial-`seed` realization and writes it as a fixture.
///
/// The paths are the ones a sweep with master seed `seed` uses for trial 0.
pub fn cmd_generate(args: &GenerateArgs) -> Result<ChannelFixture> {
    let file = CliConfigFile::load_or_default(args.config.as_deref())?;
    let config = file.experiment;
    let l_c = match args.lc {
        Some(l_c) => l_c,
        None => *config
            .l_c_values
            .first()
            .ok_or_else(|| Error::Config("l_c_values is empty".into()))?,
    };
    let geom = config.geometry(l_c);
    geom.validate()?;
    config.gains.validate()?;
    let seed = args.seed.unwrap_or(config.master_seed);
    guard_overwrite(&args.out, args.force)?;
    let paths = sample_paths(&geom, &config.gains, channel_seed(seed, l_c))?;
    let fixture = ChannelFixture::new(geom, config.gains, seed, paths);
    save_fixture(&fixture, &args.out)?;
    Ok(fixture)
}

/// Simulates pilots for a stored realization and scores each estimator.
pub fn cmd_estimate(args: &EstimateArgs) -> Result<Vec<Score>> {
    let fixture = load_fixture(&args.fixture)?;
    let realization = fixture.realize()?;
    let bs_dict = build_dictionary(realization.geom.bs);
    let ris_dict = build_dictionary(realization.geom.ris);
    let seed = args.seed.unwrap_or(fixture.seed);
    let (sensing, meas) = simulate_pilots(&realization, args.q, args.snr_db, seed, &ris_dict)?;
    let problem = EstimationProblem {
        measurements: &meas,
        sensing: &sensing,
        bs_dict: &bs_dict,
        ris_dict: &ris_dict,
    };
    evaluate(&realization, &problem, &args.estimators)
}

/// Config of a sweep after applying command-line overrides.
pub fn sweep_config(args: &SweepArgs) -> Result<(ExperimentConfig, PathBuf)> {
    let file = CliConfigFile::load_or_default(args.config.as_deref())?;
    let mut config = file.experiment;
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if let Some(trials) = args.trials {
        config.n_trials = trials;
    }
    if let Some(snr) = args.snr_db {
        config.snr_db = snr;
    }
    if let Some(q) = &args.q {
        config.q_values = q.clone();
    }
    if let Some(lc) = &args.lc {
        config.l_c_values = lc.clone();
    }
    if let Some(est) = &args.estimators {
        config.estimators = est.clone();
    }
    config.validate()?;
    let out = args
        .out
        .clone()
        .or(file.output)
        .ok_or_else(|| Error::Config("no output path (use --out or `output` in the config)".into()))?;
    Ok((config, out))
}

/// Runs the sweep and writes the CSV and its manifest. Returns the CSV path.
pub fn cmd_sweep(args: &SweepArgs) -> Result<PathBuf> {
    let (config, out) = sweep_config(args)?;
    guard_overwrite(&out, args.force)?;
    guard_overwrite(&bench::manifest_path(&out), args.force)?;
    let result = match threads_from_env()? {
        Some(threads) => run_sweep_with_threads(&config, threads)?,
        None => run_sweep(&config)?,
    };
    bench::write_csv(&result.points, &out)?;
    bench::write_manifest(&config, &out)?;
    Ok(out)
}

fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
    }
}

/// Formats one estimator score as a single output line.
pub fn format_score(score: &Score) -> String {
    format!(
        "{:<15} nmse={:.6e} nmse_db={:.2} row_rec={:.4} col_rec={:.4}",
        score.estimator.name(),
        score.nmse,
        10.0 * score.nmse.log10(),
        score.row_rate,
        score.col_rate
    )
}

/// Runs a parsed command and returns the lines to print.
pub fn run(cli: &Cli) -> Result<Vec<String>> {
    match &cli.command {
        Command::Generate(args) => {
            let fixture = cmd_generate(args)?;
            Ok(vec![format!(
                "wrote {} (seed {}, {} users, L_c={})",
                args.out.display(),
                fixture.seed,
                fixture.geometry.k_users,
                fixture.geometry.l_c
            )])
        }
        Command::Estimate(args) => Ok(cmd_estimate(args)?.iter().map(format_score).collect()),
        Command::Sweep(args) => {
            let out = cmd_sweep(args)?;
            Ok(vec![format!(
                "wrote {} and {}",
                out.display(),
                bench::manifest_path(&out).display()
            )])
        }
    }
}

//! Command-line harness for seeded fair-clustering experiments.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fairclust::experiment::prepare;
use fairclust::model::TauSpec;
use fairclust::table::render;
use fairclust::{Algorithm, Error, ExperimentConfig, Norm, OutputFormat};

const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "fairclust",
    version,
    about = "Tau-ratio fair k-means / k-median experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run(RunArgs),
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// vanilla, frac, frac-oe or oracle.
    #[arg(long, value_parser = parse_with::<Algorithm>)]
    algorithm: Option<Algorithm>,
    #[arg(long)]
    k: Option<usize>,
    /// `1/k` or comma-separated per-group fractions.
    #[arg(long, value_parser = parse_tau)]
    tau: Option<TauSpec>,
    #[arg(long, value_parser = parse_norm)]
    p: Option<Norm>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    jobs: Option<usize>,
    /// Summary destination; per-trial rows go to `<stem>.trials.<ext>` beside it.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_parser = parse_with::<OutputFormat>)]
    format: Option<OutputFormat>,
}

fn parse_with<T>(s: &str) -> Result<T, String>
where
    T: std::str::FromStr<Err = Error>,
{
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_tau(s: &str) -> Result<TauSpec, String> {
    TauSpec::parse(s).map_err(|e| e.to_string())
}

fn parse_norm(s: &str) -> Result<Norm, String> {
    let p: u32 = s.parse().map_err(|_| format!("p must be 1 or 2, got `{s}`"))?;
    Norm::try_from(p).map_err(|e| e.to_string())
}

impl RunArgs {
    fn apply(self, config: &mut ExperimentConfig) {
        if let Some(v) = self.algorithm {
            config.algorithm = v;
        }
        if let Some(v) = self.k {
            config.k = v;
        }
        if let Some(v) = self.tau {
            config.tau = v;
        }
        if let Some(v) = self.p {
            config.p = v;
        }
        if let Some(v) = self.trials {
            config.trials = v;
        }
        if let Some(v) = self.seed {
            config.seed = v;
        }
        if let Some(v) = self.jobs {
            config.jobs = v;
        }
        if let Some(v) = self.output {
            config.output = Some(v);
        }
        if let Some(v) = self.format {
            config.format = v;
        }
    }
}

fn trials_path(output: &Path, format: OutputFormat) -> PathBuf {
    let stem = output
        .file_stem()
        .map_or_else(|| "results".into(), |s| s.to_string_lossy().into_owned());
    output.with_file_name(format!("{stem}.trials.{}", format.extension()))
}

fn run(args: RunArgs) -> Result<(), (u8, Error)> {
    let config_path = args.config.clone();
    let mut config = ExperimentConfig::load(&config_path).map_err(|e| (EXIT_CONFIG, e))?;
    args.apply(&mut config);
    let experiment = prepare(config).map_err(|e| (EXIT_CONFIG, e))?;
    let result = experiment.run().map_err(|e| (EXIT_RUNTIME, e))?;
    let config = experiment.config();
    let summary = render(&result.summary, config.format).map_err(|e| (EXIT_RUNTIME, e))?;
    match &config.output {
        Some(path) => {
            let trials = render(&result.trials, config.format).map_err(|e| (EXIT_RUNTIME, e))?;
            let write = |p: &Path, text: &str| {
                std::fs::write(p, text).map_err(|source| {
                    (
                        EXIT_RUNTIME,
                        Error::Io {
                            path: p.to_path_buf(),
                            source,
                        },
                    )
                })
            };
            write(path, &summary)?;
            write(&trials_path(path, config.format), &trials)?;
        }
        None => print!("{summary}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let Command::Run(args) = cli.command;
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, e)) => {
            eprintln!("error: {e}");
            ExitCode::from(code)
        }
    }
}

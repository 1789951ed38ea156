mod commands;
mod config;
mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::ExperimentFile;
use crate::error::{CliError, CliResult};
use crate::output::{compare, read_manifest, read_snapshot};

#[derive(Parser, Debug)]
#[command(name = "heckfa", version, about = "Heckman selection models with learned feature assignment")]
struct Cli {
    /// Experiment file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the seed in every config section.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Where artifacts are written.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Re-run a recorded output directory from its config snapshot and
    /// check that every artifact reproduces byte for byte.
    #[arg(long, global = true, value_name = "DIR")]
    replay: Option<PathBuf>,

    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic dataset and its ground-truth sidecar.
    Synth,
    /// Train, extract and evaluate one method end to end.
    Run {
        /// NAIVE, FA, FA_STAR or HECKMAN_C; overrides [run] method.
        #[arg(long)]
        method: Option<String>,
    },
    /// Compare methods, with optional repeats and sensitivity grids.
    Benchmark,
    /// Paired t-test between two columns of numbers.
    Ttest {
        a: PathBuf,
        b: PathBuf,
        /// Column to read from both files (default: the first).
        #[arg(long)]
        column: Option<String>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Synth => "synth",
            Command::Run { .. } => "run",
            Command::Benchmark => "benchmark",
            Command::Ttest { .. } => "ttest",
        }
    }
}

const DEFAULT_OUT_DIR: &str = "heckfa-out";

fn apply_seed(file: &mut ExperimentFile, seed: u64) {
    if let Some(run) = file.run.as_mut() {
        run.seed = Some(seed);
    }
    if let Some(synth) = file.synth.as_mut() {
        synth.seed = Some(seed);
    }
}

fn effective_seed(file: &ExperimentFile) -> Option<u64> {
    file.run
        .as_ref()
        .and_then(|r| r.seed)
        .or_else(|| file.synth.as_ref().and_then(|s| s.seed))
}

fn produce(cli: &Cli, file: &ExperimentFile) -> CliResult<commands::Produced> {
    match &cli.command {
        Command::Synth => commands::synth(file),
        Command::Run { method } => commands::run(file, method.as_deref()),
        Command::Benchmark => commands::benchmark(file),
        Command::Ttest { a, b, column } => commands::ttest(a, b, column.as_deref()),
    }
}

fn execute(cli: &Cli) -> CliResult<()> {
    if let Command::Ttest { .. } = cli.command {
        if cli.replay.is_some() {
            return Err(CliError::Usage("--replay does not apply to ttest".into()));
        }
        let produced = produce(cli, &ExperimentFile::default())?;
        print!("{}", produced.summary);
        if let Some(dir) = &cli.out_dir {
            let manifest = produced.artifacts.manifest("ttest", None, "");
            produced.artifacts.write(dir, &manifest, "")?;
        }
        return Ok(());
    }

    if let Some(recorded) = &cli.replay {
        return replay(cli, recorded);
    }

    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Usage(format!("{} needs --config <FILE>", cli.command.name())))?;
    let mut file = ExperimentFile::load(path)?;
    if let Some(seed) = cli.seed {
        apply_seed(&mut file, seed);
    }
    let snapshot = file.to_toml()?;
    let produced = produce(cli, &file)?;
    let dir = cli.out_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    let manifest = produced
        .artifacts
        .manifest(cli.command.name(), effective_seed(&file), &snapshot);
    produced.artifacts.write(&dir, &manifest, &snapshot)?;
    print!("{}", produced.summary);
    eprintln!("artifacts written to {}", dir.display());
    Ok(())
}

fn replay(cli: &Cli, recorded: &Path) -> CliResult<()> {
    if cli.config.is_some() || cli.seed.is_some() {
        return Err(CliError::Usage(
            "--replay uses the recorded config snapshot; drop --config and --seed".into(),
        ));
    }
    let recorded_manifest = read_manifest(recorded)?;
    if recorded_manifest.command != cli.command.name() {
        return Err(CliError::Usage(format!(
            "{} was recorded by `{}`, not `{}`",
            recorded.display(),
            recorded_manifest.command,
            cli.command.name()
        )));
    }
    let (snapshot_path, snapshot) = read_snapshot(recorded)?;
    let mut file = ExperimentFile::parse(&snapshot)?;
    file.resolve_paths(snapshot_path.parent().unwrap_or(Path::new(".")));
    let produced = produce(cli, &file)?;
    let manifest = produced
        .artifacts
        .manifest(cli.command.name(), effective_seed(&file), &snapshot);
    let dir = cli.out_dir.clone().unwrap_or_else(|| recorded.join("replay"));
    produced.artifacts.write(&dir, &manifest, &snapshot)?;
    let diffs = compare(&recorded_manifest, &manifest);
    if !diffs.is_empty() {
        return Err(CliError::ReplayMismatch(diffs));
    }
    eprintln!(
        "replay reproduced {} artifacts of {} byte for byte (written to {})",
        manifest.artifacts.len(),
        recorded.display(),
        dir.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Usage(_) = e {
                eprintln!("usage: heckfa [--config FILE] [--seed N] [--out-dir DIR] [--replay DIR] <synth|run|benchmark|ttest>");
            }
            ExitCode::from(u8::try_from(e.exit_code()).unwrap_or(1))
        }
    }
}

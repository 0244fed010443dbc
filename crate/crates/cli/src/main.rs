mod commands;
mod failure;
mod fasta;
mod output;
mod run_config;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use seqkern::seq::Alphabet;

use commands::Context;
use failure::Failure;
use run_config::{Keys, RunConfig, Section};

/// Sequence kernels, kernel regression, MMD tests and discrete-mass
/// diagnostics.
///
/// Settings come from an INI file (`--config`) with `[kernel]`, `[data]` and
/// `[run]` sections. Any key can be overridden after the subcommand with
/// `--key value` or `--section.key value`; a bare key goes to `[data]` or
/// `[run]` when the subcommand reads it there and to `[kernel]` otherwise.
/// Relative paths in the file are resolved against its directory.
#[derive(Parser)]
#[command(name = "seqkern", version)]
struct Cli {
    /// INI configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for every random choice (default 0).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// `ACGT` (default), `protein`, or any string of single-character letters.
    #[arg(long, global = true)]
    alphabet: Option<String>,

    /// Output file (default: standard output).
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// Configuration overrides.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY VALUE")]
    settings: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Gram matrix of the sequences in `input`, with a header row of IDs.
    Gram(Overrides),
    /// Kernel regression with normalized RMSE.
    ///
    /// Fits `labels` (CSV `id,label`) on the sequences in `input`. Run keys:
    /// `ridge` (default 0, the pseudo-inverse fit) and `train_fraction`
    /// (default 1). The normalized RMSE goes to standard error.
    Regress(Overrides),
    /// MMD two-sample test.
    ///
    /// Compares the FASTA files `x` and `y`. Run keys: `n_bootstrap` (500),
    /// `level` (0.05), `method` (permutation or multiplier).
    MmdTest(Overrides),
    /// Greedy single-edit MMD minimization.
    ///
    /// Searches for the sequence closest in MMD to the sequences in `target`,
    /// starting from `init` (default: the first target written twice). Run
    /// keys: `max_steps` (100), `min_improvement`, `normalize` (divide MMD by
    /// its initial value).
    Optimize(Overrides),
    /// Inverse-Gram diagnostic over nested sets.
    ///
    /// Reports `sqrt((K_B⁻¹)_XX)` for the sequence `target` over nested sets
    /// given as length `cutoffs` (e.g. `1,2,3`) or as FASTA files in `sets`.
    Diagnose(Overrides),
    /// Synthetic FASTA data.
    ///
    /// Run keys: `preset` (toy-regression, mirrored-halves, tcr-like), `n`
    /// (100), `len` (4), `half` (mirrored or uniform). toy-regression writes
    /// its labels to the data key `labels`.
    Synth(Overrides),
}

type Handler = fn(&Context) -> Result<(), Failure>;

impl Command {
    fn parts(&self) -> (&Overrides, &'static Keys, Handler) {
        match self {
            Command::Gram(o) => (o, &commands::GRAM_KEYS, commands::gram_cmd),
            Command::Regress(o) => (o, &commands::REGRESS_KEYS, commands::regress_cmd),
            Command::MmdTest(o) => (o, &commands::MMD_TEST_KEYS, commands::mmd_test_cmd),
            Command::Optimize(o) => (o, &commands::OPTIMIZE_KEYS, commands::optimize_cmd),
            Command::Diagnose(o) => (o, &commands::DIAGNOSE_KEYS, commands::diagnose_cmd),
            Command::Synth(o) => (o, &commands::SYNTH_KEYS, commands::synth_cmd),
        }
    }
}

fn parse_alphabet(name: &str) -> Result<Arc<Alphabet>, Failure> {
    match name {
        "ACGT" | "dna" => Ok(Alphabet::dna()),
        "protein" => Ok(Alphabet::protein()),
        letters => Alphabet::from_chars(letters).map_err(Failure::from),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let (overrides, keys, command) = cli.command.parts();
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.apply_overrides(&overrides.settings, keys)?;
    if let Some(seed) = cli.seed {
        cfg.set(Section::Run, "seed", &seed.to_string());
    }
    if let Some(threads) = cli.threads {
        cfg.set(Section::Run, "threads", &threads.to_string());
    }
    if let Some(alphabet) = &cli.alphabet {
        cfg.set(Section::Data, "alphabet", alphabet);
    }
    if let Some(output) = &cli.output {
        cfg.set(Section::Run, "output", &output.display().to_string());
    }
    cfg.check_keys(keys)?;

    let parse = |key: &str| -> Result<Option<u64>, Failure> {
        cfg.run
            .get(key)
            .map(|v| v.parse().map_err(|e| Failure::config(format!("[run] {key} = `{v}`: {e}"))))
            .transpose()
    };
    if let Some(threads) = parse("threads")? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads as usize)
            .build_global()
            .map_err(|e| Failure::config(format!("threads: {e}")))?;
    }
    let ctx = Context {
        seed: parse("seed")?.unwrap_or(0),
        alphabet: parse_alphabet(cfg.data.get("alphabet").map_or("ACGT", String::as_str))?,
        cfg,
    };
    command(&ctx)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("seqkern: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

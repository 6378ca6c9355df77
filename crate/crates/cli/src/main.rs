//! `ooc`: corpus corruption, sentence-encoder pre-training, model training
//! and evaluation for out-of-context word detection.
//!
//! Every command takes an optional `--config FILE` of `key = value` lines;
//! flags override file values, and the fully resolved configuration is
//! written next to the outputs.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ooc_core::models::Topology;

#[derive(Parser)]
#[command(name = "ooc", version, about = "Out-of-context word detection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tag, filter, corrupt and split a corpus of one-document-per-file text.
    Corrupt(CorruptArgs),
    /// Build a frequency-ranked vocabulary from a training directory.
    Vocab(VocabArgs),
    /// Pre-train a sentence encoder (lm-cr or nmt-cr).
    Pretrain(PretrainArgs),
    /// Train one topology on a split produced by `corrupt`.
    Train(TrainArgs),
    /// Score dev and test, sweep thresholds on dev and report test metrics.
    Eval(EvalArgs),
    /// Re-apply a corruption manifest to the clean corpus.
    Replay(ReplayArgs),
    /// Write a synthetic corpus (two-topic or raw-text fixture).
    Synth(SynthArgs),
}

#[derive(Args)]
struct Common {
    /// `key = value` file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Global seed [default: 0].
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct CorruptArgs {
    #[command(flatten)]
    common: Common,
    /// Directory of `*.txt` documents, one sentence per line.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replacements per document [default: 10].
    #[arg(long)]
    rate: Option<usize>,
    /// Appearance-window radius in frequency ranks [default: 50].
    #[arg(long)]
    k: Option<usize>,
    /// Minimum noun occurrences of a lemma in its document [default: 2].
    #[arg(long)]
    min_lemma_freq: Option<usize>,
    /// Vocabulary size for replacement candidates [default: 30000].
    #[arg(long)]
    vocab_size: Option<usize>,
    /// Longest kept sentence [default: 50].
    #[arg(long)]
    max_sentence_len: Option<usize>,
    /// Documents with fewer sentences are dropped [default: 11].
    #[arg(long)]
    min_sentences: Option<usize>,
}

#[derive(Args)]
struct VocabArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    train: Option<PathBuf>,
    /// Entries including the reserved symbols [default: 30000].
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainingFlags {
    /// [default: 10]
    #[arg(long)]
    epochs: Option<usize>,
    /// [default: 32]
    #[arg(long)]
    batch_size: Option<usize>,
    /// Adam step size [default: 0.001].
    #[arg(long)]
    lr: Option<f64>,
    /// Global gradient-norm clip; 0 disables [default: 5].
    #[arg(long)]
    clip: Option<f64>,
    /// [default: 256]
    #[arg(long)]
    embed_dim: Option<usize>,
    /// [default: 512]
    #[arg(long)]
    hidden_dim: Option<usize>,
}

#[derive(Args)]
struct PretrainArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    training: TrainingFlags,
    /// `lm` or `nmt`.
    #[arg(long)]
    mode: Option<commands::Mode>,
    /// Training documents (the source side for `lm`, and for `nmt` copy pairs).
    #[arg(long)]
    train: Option<PathBuf>,
    /// Vocabulary file; built from --train when absent.
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// [default: 30000]
    #[arg(long)]
    vocab_size: Option<usize>,
    /// Parallel source file for `nmt`, one sentence per line.
    #[arg(long)]
    source: Option<PathBuf>,
    /// Parallel target file for `nmt`, aligned with --source.
    #[arg(long)]
    target: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    training: TrainingFlags,
    #[arg(long)]
    topology: Option<Topology>,
    /// Sentence-encoder checkpoint, required by contextual topologies.
    #[arg(long)]
    sentenc: Option<PathBuf>,
    /// Output directory of `corrupt` (train/, dev/, manifest.tsv).
    #[arg(long)]
    splits: Option<PathBuf>,
    /// Vocabulary file; built from the training split when absent.
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// [default: 30000]
    #[arg(long)]
    vocab_size: Option<usize>,
    /// Preceding sentences summarized into the context [default: 10].
    #[arg(long)]
    context_window: Option<usize>,
    /// [default: 50]
    #[arg(long)]
    max_sentence_len: Option<usize>,
    /// Train the sentence encoder jointly [default: false].
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    finetune_encoder: Option<bool>,
    /// Best checkpoint; `.last`, `.log.tsv` and `.resolved.config` go alongside.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    dev: Option<PathBuf>,
    #[arg(long)]
    test: Option<PathBuf>,
    /// Gold replacements; defaults to manifest.tsv next to the dev directory.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Vocabulary the model must have been trained with.
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// `all` or a comma-separated list of thresholds [default: all].
    #[arg(long)]
    thresholds: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// The clean corpus written by `corrupt` (clean/).
    #[arg(long)]
    clean: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    common: Common,
    /// `topic` or `fixture` [default: topic].
    #[arg(long)]
    kind: Option<commands::SynthKind>,
    /// [default: 200]
    #[arg(long)]
    documents: Option<usize>,
    /// Sentences per fixture document [default: 20].
    #[arg(long)]
    sentences: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Corrupt(a) => commands::corrupt(a),
        Command::Vocab(a) => commands::vocab(a),
        Command::Pretrain(a) => commands::pretrain(a),
        Command::Train(a) => commands::train(a),
        Command::Eval(a) => commands::eval(a),
        Command::Replay(a) => commands::replay(a),
        Command::Synth(a) => commands::synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use threehan_cli::commands;
use threehan_cli::config::{resolve, Overrides};

#[derive(Parser)]
#[command(
    name = "threehan",
    about = "Three-level hierarchical attention network for article classification",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic labeled corpus.
    Synth {
        /// Output corpus file (one JSON article per line).
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Tokenize, build the vocabulary, encode, and split a corpus.
    Prepare {
        /// Input corpus file (one JSON article per line).
        #[arg(long)]
        corpus: PathBuf,
        /// Directory for vocab.tsv and the encoded splits.
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Train a model on prepared data.
    Train {
        /// Directory produced by prepare.
        #[arg(long)]
        data_dir: PathBuf,
        /// Where to write the model checkpoint.
        #[arg(long)]
        checkpoint: PathBuf,
        /// Where to write the per-epoch history CSV.
        #[arg(long)]
        history: PathBuf,
        /// Initialize level-1 weights from a pretrain checkpoint.
        #[arg(long)]
        init_from: Option<PathBuf>,
        /// Pretrained word-vector file (token v1 .. v_dim per line).
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Supervised headline pre-training of the level-1 weights.
    Pretrain {
        /// Directory produced by prepare.
        #[arg(long)]
        data_dir: PathBuf,
        /// Where to write the level-1 checkpoint.
        #[arg(long)]
        checkpoint: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Print accuracy of a checkpoint on an encoded dataset.
    Evaluate {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Encoded dataset file (train.jsonl / val.jsonl / test.jsonl).
        #[arg(long)]
        dataset: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Print one fake-probability per input article line.
    Predict {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Vocabulary file from prepare.
        #[arg(long)]
        vocab: PathBuf,
        /// Raw article file (one JSON article per line).
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Render an attention heatmap for one article as standalone HTML.
    Explain {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        vocab: PathBuf,
        /// File holding one JSON article.
        #[arg(long)]
        article: PathBuf,
        /// Output HTML path.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
}

fn run(cli: Cli) -> threehan::Result<()> {
    let overrides = match &cli.command {
        Command::Synth { overrides, .. }
        | Command::Prepare { overrides, .. }
        | Command::Train { overrides, .. }
        | Command::Pretrain { overrides, .. }
        | Command::Evaluate { overrides, .. }
        | Command::Predict { overrides, .. }
        | Command::Explain { overrides, .. } => overrides,
    };
    let config = resolve(overrides)?;
    config.validate()?;
    eprint!("{}", config.render());

    match &cli.command {
        Command::Synth { out, .. } => commands::cmd_synth(&config, out),
        Command::Prepare { corpus, out_dir, .. } => commands::cmd_prepare(&config, corpus, out_dir),
        Command::Train {
            data_dir,
            checkpoint,
            history,
            init_from,
            embeddings,
            ..
        } => commands::cmd_train(
            &config,
            data_dir,
            checkpoint,
            history,
            init_from.as_deref(),
            embeddings.as_deref(),
        ),
        Command::Pretrain {
            data_dir,
            checkpoint,
            ..
        } => commands::cmd_pretrain(&config, data_dir, checkpoint),
        Command::Evaluate {
            checkpoint, dataset, ..
        } => commands::cmd_evaluate(checkpoint, dataset),
        Command::Predict {
            checkpoint,
            vocab,
            input,
            ..
        } => commands::cmd_predict(checkpoint, vocab, input),
        Command::Explain {
            checkpoint,
            vocab,
            article,
            out,
            ..
        } => commands::cmd_explain(&config, checkpoint, vocab, article, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

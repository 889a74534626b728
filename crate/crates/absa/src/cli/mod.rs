//! Command-line interface: `prepare` normalizes a raw dataset, `run`
//! executes the full train → mine → retrain pipeline, and `report`
//! renders a mining log as a readable heatmap.
//!
//! Exit codes: 0 on success, 1 on runtime failure, 2 on usage or
//! configuration errors. Every `run` writes an effective-config snapshot
//! (`config.txt`) that reproduces the run bit for bit via `--config`.

pub mod config;
pub mod report;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::data::{
    file_hash, load_corpus, load_embeddings, load_semeval_xml, load_twitter_3line,
    random_embeddings, save_corpus, split_heldout, ClassCounts, Instance, RawInstance,
    Vocabulary,
};
use crate::error::{Error, Result};
use crate::eval::{bootstrap_test, render_metrics, BootstrapOutcome, PredictionSet};
use crate::mining::{run_mining, save_mining_log, LogHeader, MiningConfig};
use crate::model::{save_checkpoint, ModelParams};
use crate::numerics::RngState;
use crate::training::{predictions_of, train, train_supervised, write_history, TrainConfig};
use config::{resolve, snapshot, RunConfig, RunOverrides};
use report::ReportArgs;

#[derive(Parser)]
#[command(
    name = "absa",
    version,
    about = "Aspect-level sentiment classification with mined attention supervision"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize a raw dataset into corpus files plus a vocabulary.
    Prepare(PrepareArgs),
    /// Train a classifier, mine attention supervision, retrain, evaluate.
    Run(RunArgs),
    /// Render a mining log as plain text and a self-contained HTML page.
    Report(ReportArgs),
}

/// Entry point for the binary; returns the process exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Prepare(args) => cmd_prepare(&args),
        Command::Run(args) => cmd_run(&args),
        Command::Report(args) => report::cmd_report(&args),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                2
            } else {
                1
            }
        }
    }
}

// ---------------------------------------------------------------------------
// prepare

#[derive(Args, Debug)]
pub struct PrepareArgs {
    /// Raw training file.
    #[arg(long)]
    pub train: PathBuf,
    /// Raw test file (same format).
    #[arg(long)]
    pub test: PathBuf,
    /// Input format: semeval-xml | twitter-3line.
    #[arg(long)]
    pub format: String,
    /// Output directory for the normalized dataset.
    #[arg(long)]
    pub out: PathBuf,
    /// Fraction of the training data held out for validation (0 disables).
    #[arg(long, default_value_t = 0.2)]
    pub val_fraction: f64,
    /// Discard words seen fewer than this many times when building the
    /// vocabulary.
    #[arg(long, default_value_t = 1)]
    pub min_count: usize,
    /// Seed for the validation split.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

fn cmd_prepare(args: &PrepareArgs) -> Result<()> {
    let summary = execute_prepare(args)?;
    print!("{summary}");
    Ok(())
}

/// Load, split, and write a dataset; returns the printed summary so tests
/// can check it without capturing stdout.
pub fn execute_prepare(args: &PrepareArgs) -> Result<String> {
    let loader: fn(&Path) -> Result<Vec<RawInstance>> = match args.format.as_str() {
        "semeval-xml" => load_semeval_xml,
        "twitter-3line" => load_twitter_3line,
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown format {other:?}; expected semeval-xml or twitter-3line"
            )))
        }
    };
    if !(0.0..1.0).contains(&args.val_fraction) {
        return Err(Error::InvalidConfig(format!(
            "val_fraction {} outside [0, 1)",
            args.val_fraction
        )));
    }

    let train_full = loader(&args.train)?;
    let test = loader(&args.test)?;
    let vocab = Vocabulary::build(&train_full, args.min_count)?;
    let (train, validation) = if args.val_fraction == 0.0 {
        (train_full.clone(), Vec::new())
    } else {
        let mut rng = RngState::new(args.seed).derive("split");
        split_heldout(&train_full, args.val_fraction, &mut rng)?
    };

    std::fs::create_dir_all(&args.out)?;
    save_corpus(&args.out.join("train.jsonl"), &train)?;
    save_corpus(&args.out.join("val.jsonl"), &validation)?;
    save_corpus(&args.out.join("test.jsonl"), &test)?;
    vocab.save(&args.out.join("vocab.txt"))?;

    let mut summary = String::new();
    summary.push_str(&format!("train: {}\n", ClassCounts::of(&train_full)));
    summary.push_str(&format!("test: {}\n", ClassCounts::of(&test)));
    summary.push_str(&format!(
        "split: {} train / {} validation (fraction {}, seed {})\n",
        train.len(),
        validation.len(),
        args.val_fraction,
        args.seed
    ));
    summary.push_str(&format!(
        "vocabulary: {} words (min_count {}, hash {:016x})\n",
        vocab.len(),
        args.min_count,
        vocab.content_hash()
    ));
    std::fs::write(args.out.join("manifest.txt"), &summary)?;
    Ok(summary)
}

// ---------------------------------------------------------------------------
// run

#[derive(Args, Debug, Default)]
pub struct RunArgs {
    /// Key=value config file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Prepared dataset directory (output of `prepare`).
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// baseline | aw-as | pg-as | random-mask | as_a-only | as_m-only.
    #[arg(long)]
    pub mode: Option<String>,
    /// Pretrained word vectors ("word v1 v2 ..." lines); random when absent.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Embedding width.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Mining iterations.
    #[arg(long)]
    pub k: Option<usize>,
    /// Entropy threshold of the extraction gate.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Attention-regularizer weight for the final training stage.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Noise samples per gradient-based influence estimate.
    #[arg(long)]
    pub noise_n: Option<usize>,
    /// Noise standard deviation for that estimate.
    #[arg(long)]
    pub noise_sigma: Option<f64>,
    /// Adam learning rate.
    #[arg(long)]
    pub lr: Option<f64>,
    /// Dropout rate.
    #[arg(long)]
    pub dropout: Option<f64>,
    /// Maximum training epochs per stage.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Minibatch size.
    #[arg(long)]
    pub batch: Option<usize>,
    /// Early-stopping patience in epochs.
    #[arg(long)]
    pub patience: Option<usize>,
    /// Master seed; all randomness derives from it.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Continuation epochs after each mining iteration.
    #[arg(long)]
    pub epochs_per_iteration: Option<usize>,
    /// Start the final training from the last mining parameters.
    #[arg(long)]
    pub warm_start: bool,
    /// Evaluate the attention regularizer on a dropout-free pass.
    #[arg(long)]
    pub regularize_clean: bool,
    /// Bootstrap draws for the significance test.
    #[arg(long)]
    pub bootstrap: Option<usize>,
    /// Output directory (default: $ABSA_OUT_ROOT/<dataset>-<mode>-seed<seed>).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(&self) -> Result<RunOverrides> {
        let mut o = RunOverrides {
            dataset: self.dataset.clone(),
            embeddings: self.embeddings.clone(),
            dim: self.dim,
            k: self.k,
            epsilon: self.epsilon,
            gamma: self.gamma,
            noise_n: self.noise_n,
            noise_sigma: self.noise_sigma,
            lr: self.lr,
            dropout: self.dropout,
            epochs: self.epochs,
            batch: self.batch,
            patience: self.patience,
            seed: self.seed,
            epochs_per_iteration: self.epochs_per_iteration,
            bootstrap: self.bootstrap,
            out: self.out.clone(),
            ..RunOverrides::default()
        };
        if let Some(mode) = &self.mode {
            o.mode = Some(mode.parse()?);
        }
        // Boolean flags can only switch behavior on; absence means "defer
        // to the config file".
        if self.warm_start {
            o.warm_start = Some(true);
        }
        if self.regularize_clean {
            o.regularize_clean = Some(true);
        }
        Ok(o)
    }
}

/// Accuracy and Macro-F1 of one model on the test set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsPair {
    pub accuracy: f64,
    pub macro_f1: f64,
}

/// What a `run` produced, for programmatic callers.
#[derive(Debug)]
pub struct RunSummary {
    pub baseline: MetricsPair,
    /// Test metrics of the retrained model; absent in baseline mode.
    pub enhanced: Option<MetricsPair>,
    /// Significance of enhanced vs baseline; absent in baseline mode.
    pub p_values: Option<BootstrapOutcome>,
    /// Instances that ended up with at least one supervised position.
    pub supervised: usize,
    pub out: PathBuf,
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let cfg = resolve(args.config.as_deref(), args.overrides()?)?;
    let summary = execute_run(&cfg, |stage| eprintln!("[absa] {stage}"))?;
    let line = |name: &str, m: &MetricsPair| {
        println!("{name}: accuracy {:.4} macro_f1 {:.4}", m.accuracy, m.macro_f1);
    };
    line("baseline", &summary.baseline);
    if let Some(enhanced) = &summary.enhanced {
        line(cfg.mode.as_str(), enhanced);
    }
    if let Some(p) = &summary.p_values {
        println!(
            "bootstrap vs baseline: p_accuracy {:.4} p_macro_f1 {:.4}",
            p.p_accuracy, p.p_macro_f1
        );
    }
    println!("supervised instances: {}", summary.supervised);
    println!("artifacts: {}", summary.out.display());
    Ok(())
}

/// The full pipeline behind `run`: baseline training, mining (unless
/// baseline mode), supervised retraining, evaluation, artifact writing.
/// `progress` receives one line per stage.
pub fn execute_run(cfg: &RunConfig, mut progress: impl FnMut(&str)) -> Result<RunSummary> {
    progress(&format!("loading dataset {}", cfg.dataset.display()));
    let vocab = Vocabulary::load(&cfg.dataset.join("vocab.txt"))?;
    let vocab_hash = vocab.content_hash();
    let train_path = cfg.dataset.join("train.jsonl");
    let corpus_hash = file_hash(&train_path)?;
    let train_set = encode_corpus(&vocab, &train_path)?;
    let val_set = {
        let path = cfg.dataset.join("val.jsonl");
        if path.is_file() {
            let v = encode_corpus(&vocab, &path)?;
            (!v.is_empty()).then_some(v)
        } else {
            None
        }
    };
    let test_set = encode_corpus(&vocab, &cfg.dataset.join("test.jsonl"))?;
    if test_set.is_empty() {
        return Err(Error::InvalidData("test corpus is empty".into()));
    }

    let root = RngState::new(cfg.seed);
    let embedding = match &cfg.embeddings {
        Some(path) => {
            progress(&format!("loading embeddings {}", path.display()));
            load_embeddings(path, &vocab, cfg.dim, &mut root.derive("embeddings"))?
        }
        None => random_embeddings(vocab.len(), cfg.dim, &mut root.derive("embeddings")),
    };
    let init = ModelParams::init(&embedding, &mut root.derive("init"))?;

    std::fs::create_dir_all(&cfg.out)?;
    std::fs::write(cfg.out.join("config.txt"), snapshot(cfg))?;

    let train_cfg = TrainConfig {
        lr: cfg.lr,
        epochs: cfg.epochs,
        batch_size: cfg.batch,
        dropout: cfg.dropout,
        gamma: cfg.gamma,
        patience: cfg.patience,
        seed: cfg.seed,
        regularize_clean: cfg.regularize_clean,
    };

    progress("training baseline");
    let baseline = train(init.clone(), &train_set, val_set.as_deref(), &train_cfg)?;
    save_checkpoint(&baseline.params, &cfg.out.join("baseline.ckpt"), vocab_hash)?;
    write_history(&cfg.out.join("baseline-history.tsv"), &baseline.history)?;
    let baseline_preds = predictions_of(&baseline.params, &test_set)?;
    std::fs::write(
        cfg.out.join("baseline-metrics.txt"),
        render_metrics(&baseline_preds, None)?,
    )?;
    let baseline_pair = metrics_pair(&baseline_preds)?;

    if !cfg.mode.mines() {
        return Ok(RunSummary {
            baseline: baseline_pair,
            enhanced: None,
            p_values: None,
            supervised: 0,
            out: cfg.out.clone(),
        });
    }

    progress(&format!(
        "mining supervision ({} iterations, mode {})",
        cfg.k, cfg.mode
    ));
    let mining_cfg = MiningConfig {
        iterations: cfg.k,
        entropy_threshold: cfg.epsilon,
        mode: cfg.mode.saliency(cfg.noise_n, cfg.noise_sigma),
        epochs_per_iteration: cfg.epochs_per_iteration,
        random_mask: cfg.mode.random_mask(),
        seed: cfg.seed,
    };
    let mining = run_mining(&train_set, baseline.params.clone(), &mining_cfg, &train_cfg)?;
    let header = LogHeader {
        corpus_hash,
        vocab_hash,
        mode: cfg.mode.to_string(),
        iterations: cfg.k,
        entropy_threshold: cfg.epsilon,
    };
    save_mining_log(&cfg.out.join("mining.jsonl"), &header, &mining.log)?;
    mining.mined.state().save(&cfg.out.join("supervision.jsonl"))?;

    let mined = mining.mined.filtered(cfg.mode.filter())?;
    let supervised = mined.supervised_count();

    progress(&format!(
        "retraining with supervision ({supervised} supervised instances)"
    ));
    let start = if cfg.warm_start {
        mining.final_params().clone()
    } else {
        init
    };
    let enhanced = train_supervised(start, &mined, val_set.as_deref(), &train_cfg)?;
    save_checkpoint(&enhanced.params, &cfg.out.join("enhanced.ckpt"), vocab_hash)?;
    write_history(&cfg.out.join("enhanced-history.tsv"), &enhanced.history)?;

    progress("evaluating");
    let enhanced_preds = predictions_of(&enhanced.params, &test_set)?;
    let p_values = bootstrap_test(
        &enhanced_preds,
        &baseline_preds,
        cfg.bootstrap,
        &mut root.derive("bootstrap"),
    )?;
    std::fs::write(
        cfg.out.join("enhanced-metrics.txt"),
        render_metrics(&enhanced_preds, Some(&p_values))?,
    )?;
    let enhanced_pair = metrics_pair(&enhanced_preds)?;

    Ok(RunSummary {
        baseline: baseline_pair,
        enhanced: Some(enhanced_pair),
        p_values: Some(p_values),
        supervised,
        out: cfg.out.clone(),
    })
}

fn encode_corpus(vocab: &Vocabulary, path: &Path) -> Result<Vec<Instance>> {
    load_corpus(path)?
        .iter()
        .map(|raw| vocab.encode(raw))
        .collect()
}

fn metrics_pair(preds: &PredictionSet) -> Result<MetricsPair> {
    Ok(MetricsPair {
        accuracy: crate::eval::accuracy(preds)?,
        macro_f1: crate::eval::macro_f1(preds)?,
    })
}

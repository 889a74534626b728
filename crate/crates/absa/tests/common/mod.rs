//! Shared fixtures for the integration suites.
//!
//! The centerpiece is a synthetic benchmark with planted decoys. Every
//! sentence carries exactly one decoy word and one signal word. In training
//! data each decoy co-occurs with its own class most of the time, so it is
//! frequent, cheap to learn, and almost right; the signal words always agree
//! with the label but each individual word is rare, so learning them is
//! slow. At test time the decoys are dealt uniformly at random: a classifier
//! that kept its attention on decoys drops toward chance, while one that
//! moved its attention onto the signal words keeps its accuracy.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

use absa::cli::config::{RunConfig, RunMode};
use absa::cli::{execute_prepare, PrepareArgs};
use absa::data::{Instance, RawInstance, Sentiment};
use absa::model::ModelParams;
use absa::numerics::{RngState, Tensor};

pub const ASPECT_WORD: &str = "item";

/// Decoy words in class-code order (Positive, Negative, Neutral). Each one
/// leans toward its class in training sentences but carries no information
/// in test sentences.
pub const DECOY_WORDS: [&str; 3] = ["service", "kitchen", "decor"];

/// Signal vocabularies in class-code order. Every signal word agrees with
/// its label, but each word individually is rare.
pub const SIGNAL_WORDS: [[&str; 6]; 3] = [
    ["excellent", "superb", "delightful", "wonderful", "stellar", "charming"],
    ["awful", "dreadful", "miserable", "horrible", "terrible", "woeful"],
    ["ordinary", "average", "typical", "standard", "plain", "routine"],
];

const FILLER_WORDS: &[&str] = &[
    "the", "this", "that", "a", "was", "felt", "seemed", "quite", "really",
    "rather", "just", "overall", "honestly", "yesterday",
];

/// Shape of the synthetic benchmark.
#[derive(Debug, Clone, Copy)]
pub struct SyntheticSpec {
    /// Training sentences per class.
    pub train_per_class: usize,
    /// Test sentences per class.
    pub test_per_class: usize,
    /// Fraction of training sentences whose decoy matches their class; the
    /// rest draw one of the other two decoys. Test decoys are uniform.
    pub decoy_alignment: f64,
}

impl Default for SyntheticSpec {
    fn default() -> SyntheticSpec {
        SyntheticSpec {
            train_per_class: 80,
            test_per_class: 40,
            decoy_alignment: 0.8,
        }
    }
}

/// Generate the (train, test) split for one seed.
pub fn synthetic_corpus(spec: &SyntheticSpec, seed: u64) -> (Vec<RawInstance>, Vec<RawInstance>) {
    let mut rng = RngState::new(seed).derive("synthetic");
    let mut nonce = 0..;

    let mut train = Vec::new();
    for class in Sentiment::all() {
        for _ in 0..spec.train_per_class {
            let decoy = if rng.coin(spec.decoy_alignment) {
                DECOY_WORDS[class.index()]
            } else {
                // One of the two foreign decoys, evenly.
                let offset = 1 + rng.below(2);
                DECOY_WORDS[(class.index() + offset) % 3]
            };
            train.push(sentence(&mut rng, nonce.next().unwrap(), class, decoy));
        }
    }
    rng.shuffle(&mut train);

    let mut test = Vec::new();
    for class in Sentiment::all() {
        for _ in 0..spec.test_per_class {
            let decoy = DECOY_WORDS[rng.below(3)];
            test.push(sentence(&mut rng, nonce.next().unwrap(), class, decoy));
        }
    }
    (train, test)
}

fn sentence(rng: &mut RngState, nonce: usize, label: Sentiment, decoy: &str) -> RawInstance {
    let n_fillers = 3 + rng.below(3);
    let mut words: Vec<String> = (0..n_fillers)
        .map(|_| FILLER_WORDS[rng.below(FILLER_WORDS.len())].to_string())
        .collect();
    words.push(SIGNAL_WORDS[label.index()][rng.below(SIGNAL_WORDS[0].len())].to_string());
    words.push(decoy.to_string());
    words.push(ASPECT_WORD.to_string());
    rng.shuffle(&mut words);
    let aspect = words
        .iter()
        .position(|w| w == ASPECT_WORD)
        .expect("aspect word was just inserted");
    RawInstance {
        id: format!("s{nonce}"),
        tokens: words,
        aspect: vec![aspect],
        label,
    }
}

/// Serialize instances in the 3-line tweet format (placeholder sentence,
/// target, numeric label) so they can flow through the real `prepare` path.
pub fn write_twitter_3line(path: &Path, instances: &[RawInstance]) -> std::io::Result<()> {
    let mut text = String::new();
    for inst in instances {
        let template: Vec<&str> = inst
            .tokens
            .iter()
            .enumerate()
            .map(|(pos, word)| {
                if inst.aspect.contains(&pos) {
                    "$T$"
                } else {
                    word.as_str()
                }
            })
            .collect();
        let label = match inst.label {
            Sentiment::Positive => "1",
            Sentiment::Negative => "-1",
            Sentiment::Neutral => "0",
        };
        text.push_str(&template.join(" "));
        text.push('\n');
        text.push_str(ASPECT_WORD);
        text.push('\n');
        text.push_str(label);
        text.push('\n');
    }
    std::fs::write(path, text)
}

/// Write the synthetic benchmark as raw files and run `prepare` over them;
/// returns the prepared dataset directory.
pub fn prepare_synthetic(root: &Path, spec: &SyntheticSpec, seed: u64) -> PathBuf {
    let (train, test) = synthetic_corpus(spec, seed);
    let raw_train = root.join("train.txt");
    let raw_test = root.join("test.txt");
    write_twitter_3line(&raw_train, &train).expect("write raw train");
    write_twitter_3line(&raw_test, &test).expect("write raw test");
    let out = root.join("prepared");
    execute_prepare(&PrepareArgs {
        train: raw_train,
        test: raw_test,
        format: "twitter-3line".to_string(),
        out: out.clone(),
        val_fraction: 0.15,
        min_count: 1,
        seed,
    })
    .expect("prepare synthetic dataset");
    out
}

/// Hyperparameters sized for the synthetic benchmark: small embeddings,
/// short training, a modest mining schedule.
pub fn synthetic_run_config(
    dataset: &Path,
    mode: RunMode,
    seed: u64,
    out: &Path,
) -> RunConfig {
    RunConfig {
        dataset: dataset.to_path_buf(),
        embeddings: None,
        mode,
        dim: 16,
        k: 3,
        epsilon: 0.7,
        gamma: 1.0,
        noise_n: 4,
        noise_sigma: 0.05,
        lr: 0.003,
        dropout: 0.1,
        epochs: 8,
        batch: 16,
        patience: 20,
        seed,
        epochs_per_iteration: 1,
        warm_start: false,
        regularize_clean: false,
        bootstrap: 200,
        out: out.to_path_buf(),
    }
}

// ---------------------------------------------------------------------------
// Random models and instances for the numeric criteria.

/// A random instance: tokens drawn from the non-mask vocabulary, at least
/// one aspect position, and at least `min_eligible` context positions.
pub fn random_instance(rng: &mut RngState, vocab_size: usize, max_len: usize) -> Instance {
    let min_eligible = 2;
    loop {
        let len = min_eligible + 1 + rng.below(max_len.saturating_sub(min_eligible));
        // Token 0 is the mask id; skip it so nothing starts pre-masked.
        let tokens: Vec<usize> = (0..len).map(|_| 1 + rng.below(vocab_size - 1)).collect();
        let n_aspect = 1 + rng.below(2.min(len - min_eligible));
        let mut positions: Vec<usize> = (0..len).collect();
        rng.shuffle(&mut positions);
        let mut aspect: Vec<usize> = positions[..n_aspect].to_vec();
        aspect.sort_unstable();
        let label = Sentiment::all()[rng.below(3)];
        let inst = Instance {
            id: format!("r{}", rng.below(1_000_000)),
            tokens,
            aspect,
            label,
        };
        if inst.len() - inst.aspect.len() >= min_eligible {
            return inst;
        }
    }
}

/// Random parameters with healthy magnitudes: embeddings U[-0.5, 0.5),
/// attention and output weights wider than the training-time init so
/// gradients are comfortably above finite-difference noise.
pub fn random_params(rng: &mut RngState, vocab_size: usize, dim: usize) -> ModelParams {
    let mut embedding = Tensor::zeros(&[vocab_size, dim]);
    rng.fill_uniform(&mut embedding, -0.5, 0.5);
    let mut params = ModelParams::init(&embedding, rng).expect("rank-2 embedding");
    rng.fill_uniform(&mut params.attn, -0.3, 0.3);
    rng.fill_uniform(&mut params.w_out, -0.3, 0.3);
    rng.fill_uniform(&mut params.b_out, -0.1, 0.1);
    params
}

/// Read a file, panicking with its path on failure.
pub fn bytes_of(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

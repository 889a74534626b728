//! Training: the plain cross-entropy objective, the attention-regularized
//! objective over a mined corpus, and the shared epoch/optimizer loop with
//! early stopping on validation Macro-F1.

use std::io::Write;
use std::path::Path;

use crate::data::instance::Instance;
use crate::error::{Error, Result};
use crate::eval::{accuracy, macro_f1, PredictionSet};
use crate::mining::MinedCorpus;
use crate::model::{
    accumulate_loss_and_grads, forward, predict, Dropout, Gradients, ModelParams,
};
use crate::numerics::{AdamState, RngState};

/// Hyperparameters of one training run.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub dropout: f64,
    /// Weight of the attention regularizer (used only when supervision is
    /// present).
    pub gamma: f64,
    /// Stop after this many epochs without a validation Macro-F1 improvement.
    pub patience: usize,
    pub seed: u64,
    /// When set, the regularizer reads attention from a separate
    /// dropout-free forward pass instead of the same pass as the
    /// cross-entropy term.
    pub regularize_clean: bool,
}

impl Default for TrainConfig {
    fn default() -> TrainConfig {
        TrainConfig {
            lr: 0.001,
            epochs: 30,
            batch_size: 32,
            dropout: 0.3,
            gamma: 0.1,
            patience: 5,
            seed: 1,
            regularize_clean: false,
        }
    }
}

/// Target attention values for one instance: 1/|s_a| on each active word,
/// exactly 0 on each misleading word, nothing else.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedDistribution {
    entries: Vec<(usize, f64)>,
}

impl ExpectedDistribution {
    /// (position, expected weight) pairs, active words first.
    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn weight_at(&self, pos: usize) -> Option<f64> {
        self.entries
            .iter()
            .find(|(p, _)| *p == pos)
            .map(|(_, w)| *w)
    }
}

/// Build the expected attention distribution from supervision sets: every
/// active position gets 1/|s_a|, every misleading position gets 0. The sets
/// must be disjoint and duplicate-free.
pub fn expected_distribution(s_a: &[usize], s_m: &[usize]) -> Result<ExpectedDistribution> {
    let mut entries = Vec::with_capacity(s_a.len() + s_m.len());
    let share = if s_a.is_empty() {
        0.0
    } else {
        1.0 / s_a.len() as f64
    };
    for &p in s_a {
        entries.push((p, share));
    }
    for &p in s_m {
        if s_a.contains(&p) {
            return Err(Error::InvalidData(format!(
                "position {p} is in both supervision sets"
            )));
        }
        entries.push((p, 0.0));
    }
    let mut seen = std::collections::HashSet::new();
    for (p, _) in &entries {
        if !seen.insert(*p) {
            return Err(Error::InvalidData(format!(
                "position {p} repeated in supervision sets"
            )));
        }
    }
    Ok(ExpectedDistribution { entries })
}

/// Squared Euclidean distance between attention and its target, summed over
/// the supervised positions only.
pub fn regularizer(alpha: &[f64], expected: &ExpectedDistribution) -> f64 {
    expected
        .entries
        .iter()
        .map(|&(pos, want)| {
            debug_assert!(pos < alpha.len(), "supervised position out of range");
            let diff = alpha[pos] - want;
            diff * diff
        })
        .sum()
}

/// One epoch's record in the training history.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_accuracy: Option<f64>,
    pub val_macro_f1: Option<f64>,
}

/// Result of a training run: the selected parameters and the full history.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ModelParams,
    pub history: Vec<EpochStats>,
    /// Epoch whose checkpoint was selected (None without validation).
    pub best_epoch: Option<usize>,
}

/// Train with the plain cross-entropy objective.
pub fn train(
    init: ModelParams,
    corpus: &[Instance],
    validation: Option<&[Instance]>,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    let items: Vec<EngineItem> = corpus
        .iter()
        .map(|instance| EngineItem {
            instance,
            expected: None,
        })
        .collect();
    run_engine(init, &items, validation, config)
}

/// Train with cross-entropy plus the attention regularizer, using each mined
/// instance's expected distribution on the original (unmasked) sentence.
pub fn train_supervised(
    init: ModelParams,
    mined: &MinedCorpus,
    validation: Option<&[Instance]>,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    mined.validate()?;
    let items: Vec<EngineItem> = mined
        .items()
        .iter()
        .map(|m| EngineItem {
            instance: &m.instance,
            expected: Some(&m.expected),
        })
        .collect();
    run_engine(init, &items, validation, config)
}

struct EngineItem<'a> {
    instance: &'a Instance,
    expected: Option<&'a ExpectedDistribution>,
}

fn run_engine(
    init: ModelParams,
    items: &[EngineItem],
    validation: Option<&[Instance]>,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    if items.is_empty() {
        return Err(Error::InvalidData("cannot train on an empty corpus".into()));
    }
    if config.batch_size == 0 {
        return Err(Error::InvalidArgument("batch size must be positive".into()));
    }
    let mut rng = RngState::new(config.seed).derive("train");
    let mut params = init;
    let mut adam = AdamState::new(&params.tensors());
    let mut grads = Gradients::zeros_like(&params);
    let mut history = Vec::new();
    let mut best: Option<(f64, usize, ModelParams)> = None;
    let mut stale_epochs = 0usize;

    for epoch in 1..=config.epochs {
        let mut order: Vec<usize> = (0..items.len()).collect();
        rng.shuffle(&mut order);
        let mut epoch_loss = 0.0;

        for (batch_index, batch) in order.chunks(config.batch_size).enumerate() {
            grads.zero();
            let mut batch_loss = 0.0;
            for &i in batch {
                let item = &items[i];
                let loss =
                    instance_loss(&params, item, config, &mut rng, &mut grads).map_err(|e| {
                        match e {
                            Error::NumericalFailure { .. } => Error::Diverged {
                                epoch,
                                batch: batch_index,
                            },
                            other => other,
                        }
                    })?;
                batch_loss += loss;
            }
            if !batch_loss.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    batch: batch_index,
                });
            }
            grads.scale(1.0 / batch.len() as f64);
            let grad_refs = grads.tensors();
            adam.step(&mut params.tensors_mut(), &grad_refs, config.lr)?;
            epoch_loss += batch_loss;
        }

        let (val_accuracy, val_macro_f1) = match validation {
            Some(val) if !val.is_empty() => {
                let preds = predictions_of(&params, val)?;
                (Some(accuracy(&preds)?), Some(macro_f1(&preds)?))
            }
            _ => (None, None),
        };
        history.push(EpochStats {
            epoch,
            train_loss: epoch_loss / items.len() as f64,
            val_accuracy,
            val_macro_f1,
        });

        if let Some(f1) = val_macro_f1 {
            // Strict improvement required; ties keep the earlier epoch.
            if best.as_ref().is_none_or(|(best_f1, _, _)| f1 > *best_f1) {
                best = Some((f1, epoch, params.clone()));
                stale_epochs = 0;
            } else {
                stale_epochs += 1;
                if stale_epochs >= config.patience {
                    break;
                }
            }
        }
    }

    Ok(match best {
        Some((_, epoch, best_params)) => TrainOutcome {
            params: best_params,
            history,
            best_epoch: Some(epoch),
        },
        None => TrainOutcome {
            params,
            history,
            best_epoch: None,
        },
    })
}

fn instance_loss(
    params: &ModelParams,
    item: &EngineItem,
    config: &TrainConfig,
    rng: &mut RngState,
    grads: &mut Gradients,
) -> Result<f64> {
    let supervision = item.expected.map(|e| (e, config.gamma));
    // A separate clean pass only matters when dropout is active; without it
    // the "clean" forward is the forward already being taken.
    let split_clean_pass = config.regularize_clean && config.dropout > 0.0;
    match (supervision, split_clean_pass) {
        (Some((expected, gamma)), true) => {
            // Cross-entropy through the usual dropout pass...
            let ce = accumulate_loss_and_grads(
                params,
                item.instance,
                &[],
                None,
                dropout_of(config.dropout, rng),
                grads,
            )?;
            // ...but the regularizer reads attention from a clean pass.
            let clean = forward(params, item.instance, &[], Dropout::Off)?;
            crate::model::accumulate_regularizer_grads(
                params,
                item.instance,
                &clean,
                expected,
                gamma,
                grads,
            );
            let reg = gamma * regularizer(&clean.alpha, expected);
            let total = ce + reg;
            if !total.is_finite() {
                return Err(Error::NumericalFailure {
                    id: item.instance.id.clone(),
                    detail: "non-finite loss".into(),
                });
            }
            Ok(total)
        }
        _ => accumulate_loss_and_grads(
            params,
            item.instance,
            &[],
            supervision,
            dropout_of(config.dropout, rng),
            grads,
        ),
    }
}

fn dropout_of(rate: f64, rng: &mut RngState) -> Dropout<'_> {
    if rate > 0.0 {
        Dropout::On { rate, rng }
    } else {
        Dropout::Off
    }
}

/// Classify every instance with dropout off, pairing gold and predicted
/// labels for evaluation.
pub fn predictions_of(params: &ModelParams, instances: &[Instance]) -> Result<PredictionSet> {
    let mut preds = PredictionSet::with_capacity(instances.len());
    for instance in instances {
        let trace = predict(params, instance)?;
        preds.push(instance.id.clone(), instance.label, trace.pred)?;
    }
    Ok(preds)
}

/// Write the per-epoch history as tab-separated text.
pub fn write_history(path: &Path, history: &[EpochStats]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "epoch\ttrain_loss\tval_accuracy\tval_macro_f1")?;
    for row in history {
        let fmt_opt = |x: Option<f64>| match x {
            Some(v) => format!("{v:.6}"),
            None => "-".to_string(),
        };
        writeln!(
            out,
            "{}\t{:.6}\t{}\t{}",
            row.epoch,
            row.train_loss,
            fmt_opt(row.val_accuracy),
            fmt_opt(row.val_macro_f1)
        )?;
    }
    out.flush()?;
    Ok(())
}

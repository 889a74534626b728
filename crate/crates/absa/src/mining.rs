//! Iterative supervision mining.
//!
//! Starting from a trained model, repeat for a fixed number of iterations:
//! evaluate every instance with its previously extracted words masked,
//! measure how peaked the influence distribution is, and — when the entropy
//! is below the gate — pull out the most influential context word, filing
//! it as *active* (the prediction was right) or *misleading* (it was
//! wrong). Each iteration ends with a short continuation of training on the
//! masked corpus so the next round sees a model that no longer leans on the
//! removed words. The final product joins every original sentence with its
//! extracted word sets and their target attention distribution.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::instance::{
    apply_mask, Instance, Sentiment, SupervisionSets, SupervisionState,
};
use crate::error::{Error, Result};
use crate::model::{forward, Dropout, ModelParams};
use crate::numerics::{entropy, RngState};
use crate::saliency::{saliency_aw, saliency_pg, SaliencyMode, SaliencyVector};
use crate::training::{expected_distribution, train, ExpectedDistribution, TrainConfig};

/// Default number of mining iterations.
pub const DEFAULT_ITERATIONS: usize = 5;
/// Default entropy gate: extraction happens only when the influence
/// distribution's entropy falls below this.
pub const DEFAULT_ENTROPY_THRESHOLD: f64 = 3.0;

/// Settings for one mining run.
#[derive(Debug, Clone)]
pub struct MiningConfig {
    /// Number of extract-mask-retrain rounds.
    pub iterations: usize,
    /// Entropy gate; 0 keeps the gate permanently closed (no extractions).
    pub entropy_threshold: f64,
    /// Influence definition used to rank context words.
    pub mode: SaliencyMode,
    /// Epochs of continuation training on the masked corpus per round.
    pub epochs_per_iteration: usize,
    /// Ablation: extract a uniformly random eligible word instead of the
    /// most influential one.
    pub random_mask: bool,
    pub seed: u64,
}

impl Default for MiningConfig {
    fn default() -> MiningConfig {
        MiningConfig {
            iterations: DEFAULT_ITERATIONS,
            entropy_threshold: DEFAULT_ENTROPY_THRESHOLD,
            mode: SaliencyMode::AttentionWeights,
            epochs_per_iteration: 1,
            random_mask: false,
            seed: 1,
        }
    }
}

impl MiningConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidConfig(
                "mining needs at least one iteration".into(),
            ));
        }
        if !self.entropy_threshold.is_finite() || self.entropy_threshold < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "entropy threshold must be finite and non-negative, got {}",
                self.entropy_threshold
            )));
        }
        if self.epochs_per_iteration == 0 {
            return Err(Error::InvalidConfig(
                "continuation training needs at least one epoch".into(),
            ));
        }
        Ok(())
    }
}

/// Which word set an extracted position was filed under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Destination {
    /// The prediction was correct: the word supported it.
    Active,
    /// The prediction was wrong: the word misled the model.
    Misleading,
}

/// What one mining step did for one instance.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    /// The instance as evaluated: previously extracted positions replaced
    /// by the mask token. This iteration's pick (if any) is *not* masked
    /// here; it takes effect next round.
    pub masked: Instance,
    /// Entropy of the influence distribution over eligible positions.
    pub entropy: f64,
    pub predicted: Sentiment,
    pub saliency: SaliencyVector,
    /// Extracted position and its destination, when the gate opened.
    pub extracted: Option<(usize, Destination)>,
    /// True when fewer than two eligible positions remain; no further
    /// extraction happens for this instance.
    pub exhausted: bool,
}

/// One mining decision: mask what was extracted so far, predict, and —
/// entropy gate and exhaustion permitting — extract the most influential
/// word into the active or misleading set.
pub fn mine_instance_step(
    params: &ModelParams,
    instance: &Instance,
    sets: &SupervisionSets,
    config: &MiningConfig,
    rng: &mut RngState,
) -> Result<StepOutcome> {
    let masked = apply_mask(instance, &sets.union())?;
    let trace = forward(params, &masked, &[], Dropout::Off)?;
    let saliency = match config.mode {
        SaliencyMode::AttentionWeights => saliency_aw(&trace),
        SaliencyMode::PartialGradients { n, sigma } => {
            saliency_pg(params, &masked, &[], n, sigma, rng)?
        }
    };
    let e = entropy(&saliency.at(&trace.eligible))?;
    let exhausted = trace.eligible.len() < 2;
    let extracted = if !exhausted && e < config.entropy_threshold {
        let position = if config.random_mask {
            trace.eligible[rng.below(trace.eligible.len())]
        } else {
            saliency
                .argmax_over(&trace.eligible)
                .expect("eligible positions are non-empty here")
        };
        let destination = if trace.pred == instance.label {
            Destination::Active
        } else {
            Destination::Misleading
        };
        Some((position, destination))
    } else {
        None
    };
    Ok(StepOutcome {
        masked,
        entropy: e,
        predicted: trace.pred,
        saliency,
        extracted,
        exhausted,
    })
}

/// One sentence joined with its mined supervision: the original (unmasked)
/// instance, the extracted word sets, and the target attention weights.
#[derive(Debug, Clone, PartialEq)]
pub struct MinedInstance {
    pub instance: Instance,
    pub sets: SupervisionSets,
    pub expected: ExpectedDistribution,
}

/// The supervised corpus: every original instance, in corpus order, paired
/// with its (possibly empty) supervision.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MinedCorpus {
    items: Vec<MinedInstance>,
}

/// Which supervision to keep when building ablation variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupervisionFilter {
    All,
    /// Keep only the active sets (drop every misleading word).
    ActiveOnly,
    /// Keep only the misleading sets (every target weight becomes 0).
    MisleadingOnly,
}

impl MinedCorpus {
    /// Pair each instance with its supervision sets, building the target
    /// distribution per instance. Every supervised id must exist in the
    /// corpus.
    pub fn join(corpus: &[Instance], state: &SupervisionState) -> Result<MinedCorpus> {
        let mut items = Vec::with_capacity(corpus.len());
        let mut matched = 0usize;
        for instance in corpus {
            let sets = state.get(&instance.id).cloned().unwrap_or_default();
            if !sets.is_empty() || state.get(&instance.id).is_some() {
                matched += 1;
            }
            sets.validate(instance)?;
            let expected = expected_distribution(&sets.s_a, &sets.s_m)?;
            items.push(MinedInstance {
                instance: instance.clone(),
                sets,
                expected,
            });
        }
        if matched < state.supervised_count() {
            for (id, _) in state.iter() {
                if !corpus.iter().any(|x| &x.id == id) {
                    return Err(Error::InvalidData(format!(
                        "supervision refers to unknown instance {id}"
                    )));
                }
            }
        }
        Ok(MinedCorpus { items })
    }

    /// Build directly from items; `validate` enforces the invariants.
    pub fn from_items(items: Vec<MinedInstance>) -> MinedCorpus {
        MinedCorpus { items }
    }

    pub fn items(&self) -> &[MinedInstance] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Instances carrying at least one extracted word.
    pub fn supervised_count(&self) -> usize {
        self.items.iter().filter(|m| !m.sets.is_empty()).count()
    }

    /// Check every invariant: word sets valid for their instance (in
    /// bounds, disjoint, never aspect positions), target weights exactly
    /// 1/|s_a| on active and 0 on misleading positions, ids unique.
    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::with_capacity(self.items.len());
        for item in &self.items {
            if !seen.insert(&item.instance.id) {
                return Err(Error::InvalidData(format!(
                    "duplicate instance id {}",
                    item.instance.id
                )));
            }
            item.sets.validate(&item.instance)?;
            let want = expected_distribution(&item.sets.s_a, &item.sets.s_m)?;
            if item.expected != want {
                return Err(Error::InvalidData(format!(
                    "instance {}: target weights do not match its word sets",
                    item.instance.id
                )));
            }
        }
        Ok(())
    }

    /// A copy with only the requested supervision kept (targets rebuilt).
    pub fn filtered(&self, filter: SupervisionFilter) -> Result<MinedCorpus> {
        let items = self
            .items
            .iter()
            .map(|m| {
                let sets = match filter {
                    SupervisionFilter::All => m.sets.clone(),
                    SupervisionFilter::ActiveOnly => SupervisionSets {
                        s_a: m.sets.s_a.clone(),
                        s_m: Vec::new(),
                    },
                    SupervisionFilter::MisleadingOnly => SupervisionSets {
                        s_a: Vec::new(),
                        s_m: m.sets.s_m.clone(),
                    },
                };
                let expected = expected_distribution(&sets.s_a, &sets.s_m)?;
                Ok(MinedInstance {
                    instance: m.instance.clone(),
                    sets,
                    expected,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MinedCorpus { items })
    }

    /// The supervision as a persistable state (instances with empty sets
    /// omitted).
    pub fn state(&self) -> SupervisionState {
        let mut state = SupervisionState::new();
        for item in &self.items {
            if !item.sets.is_empty() {
                *state.sets_mut(&item.instance.id) = item.sets.clone();
            }
        }
        state
    }
}

/// One line of the mining log: what happened to one instance in one
/// iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRow {
    pub k: usize,
    pub id: String,
    pub entropy: f64,
    pub gold: Sentiment,
    pub predicted: Sentiment,
    /// Positions masked in the evaluated sentence (extractions of earlier
    /// iterations).
    pub masked: Vec<usize>,
    /// Influence scores per token position.
    pub saliency: Vec<f64>,
    pub extracted: Option<usize>,
    pub destination: Option<Destination>,
    pub exhausted: bool,
}

/// First line of a mining log file: which run produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub corpus_hash: u64,
    pub vocab_hash: u64,
    pub mode: String,
    pub iterations: usize,
    pub entropy_threshold: f64,
}

/// Everything a mining run produces.
#[derive(Debug, Clone)]
pub struct MiningOutcome {
    pub mined: MinedCorpus,
    /// Model parameters after each iteration's continuation training.
    pub params_history: Vec<ModelParams>,
    pub log: Vec<LogRow>,
}

impl MiningOutcome {
    /// Parameters after the final iteration.
    pub fn final_params(&self) -> &ModelParams {
        self.params_history
            .last()
            .expect("mining runs at least one iteration")
    }
}

/// Run the full mining loop against an already-trained model.
///
/// Each iteration applies [`mine_instance_step`] to every instance in
/// corpus order, then continues training on the masked corpus. Randomness
/// is derived per (iteration, instance) from the mining seed, so results
/// do not depend on evaluation order.
pub fn run_mining(
    corpus: &[Instance],
    init: ModelParams,
    config: &MiningConfig,
    train_config: &TrainConfig,
) -> Result<MiningOutcome> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(Error::InvalidData("cannot mine an empty corpus".into()));
    }
    let root = RngState::new(config.seed);
    let mut sets = vec![SupervisionSets::default(); corpus.len()];
    let mut params = init;
    let mut params_history = Vec::with_capacity(config.iterations);
    let mut log = Vec::with_capacity(config.iterations * corpus.len());

    for k in 1..=config.iterations {
        let mut masked_corpus = Vec::with_capacity(corpus.len());
        for (i, instance) in corpus.iter().enumerate() {
            let mut step_rng =
                root.derive_indexed("mine", ((k - 1) * corpus.len() + i) as u64);
            let step = mine_instance_step(&params, instance, &sets[i], config, &mut step_rng)
                .map_err(|e| at_iteration(e, k))?;
            log.push(LogRow {
                k,
                id: instance.id.clone(),
                entropy: step.entropy,
                gold: instance.label,
                predicted: step.predicted,
                masked: sets[i].union(),
                saliency: step.saliency.scores.clone(),
                extracted: step.extracted.map(|(p, _)| p),
                destination: step.extracted.map(|(_, d)| d),
                exhausted: step.exhausted,
            });
            if let Some((position, destination)) = step.extracted {
                match destination {
                    Destination::Active => sets[i].s_a.push(position),
                    Destination::Misleading => sets[i].s_m.push(position),
                }
            }
            masked_corpus.push(step.masked);
        }
        let continuation = TrainConfig {
            epochs: config.epochs_per_iteration,
            seed: root.derive_indexed("continue", k as u64).seed(),
            ..train_config.clone()
        };
        let outcome =
            train(params, &masked_corpus, None, &continuation).map_err(|e| at_iteration(e, k))?;
        params = outcome.params;
        params_history.push(params.clone());
    }

    let mut state = SupervisionState::new();
    for (instance, s) in corpus.iter().zip(&sets) {
        if !s.is_empty() {
            *state.sets_mut(&instance.id) = s.clone();
        }
    }
    let mined = MinedCorpus::join(corpus, &state)?;
    Ok(MiningOutcome {
        mined,
        params_history,
        log,
    })
}

/// The masking ablation: the same loop, but the extracted position is
/// drawn uniformly from the eligible positions instead of taking the most
/// influential one.
pub fn mine_random_ablation(
    corpus: &[Instance],
    init: ModelParams,
    config: &MiningConfig,
    train_config: &TrainConfig,
) -> Result<MiningOutcome> {
    let config = MiningConfig {
        random_mask: true,
        ..config.clone()
    };
    run_mining(corpus, init, &config, train_config)
}

fn at_iteration(e: Error, k: usize) -> Error {
    match e {
        Error::NumericalFailure { id, detail } => Error::NumericalFailure {
            id,
            detail: format!("{detail} (mining iteration {k})"),
        },
        other => other,
    }
}

/// Write a mining log: a header line followed by one line per
/// (iteration, instance) record.
pub fn save_mining_log(path: &Path, header: &LogHeader, rows: &[LogRow]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer(&mut out, header)?;
    writeln!(out)?;
    for row in rows {
        serde_json::to_writer(&mut out, row)?;
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

/// Read a mining log written by [`save_mining_log`].
pub fn load_mining_log(path: &Path) -> Result<(LogHeader, Vec<LogRow>)> {
    let text = std::fs::read_to_string(path)?;
    let bad = |line: usize, detail: String| Error::BadRecord {
        path: path.display().to_string(),
        line,
        detail,
    };
    let mut lines = text.lines().enumerate();
    let (_, first) = lines
        .next()
        .ok_or_else(|| bad(1, "empty mining log".into()))?;
    let header: LogHeader =
        serde_json::from_str(first).map_err(|e| bad(1, format!("bad header: {e}")))?;
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row: LogRow =
            serde_json::from_str(line).map_err(|e| bad(i + 1, e.to_string()))?;
        rows.push(row);
    }
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::vocab::MASK_ID;
    use crate::numerics::Tensor;

    fn tiny_params(vocab: usize, d: usize, seed: u64) -> ModelParams {
        let mut rng = RngState::new(seed);
        let mut emb = Tensor::zeros(&[vocab, d]);
        rng.fill_uniform(&mut emb, -0.25, 0.25);
        ModelParams::init(&emb, &mut rng).unwrap()
    }

    fn inst(id: &str, tokens: &[usize], aspect: &[usize], label: Sentiment) -> Instance {
        Instance {
            id: id.to_string(),
            tokens: tokens.to_vec(),
            aspect: aspect.to_vec(),
            label,
        }
    }

    fn small_corpus() -> Vec<Instance> {
        vec![
            inst("a", &[2, 3, 4, 5, 6], &[0], Sentiment::Positive),
            inst("b", &[3, 7, 2, 8], &[1], Sentiment::Negative),
            inst("c", &[5, 4, 9, 2, 7], &[2], Sentiment::Neutral),
        ]
    }

    fn quick_train_config() -> TrainConfig {
        TrainConfig {
            epochs: 1,
            batch_size: 4,
            dropout: 0.0,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn step_masks_prior_extractions_and_extracts_the_argmax() {
        let params = tiny_params(12, 6, 5);
        let instance = inst("x", &[2, 3, 4, 5, 6], &[0], Sentiment::Positive);
        let sets = SupervisionSets {
            s_a: vec![2],
            s_m: vec![],
        };
        let config = MiningConfig {
            entropy_threshold: 1e9,
            ..MiningConfig::default()
        };
        let mut rng = RngState::new(0);
        let step = mine_instance_step(&params, &instance, &sets, &config, &mut rng).unwrap();

        // Only the earlier extraction is masked in the evaluated sentence.
        assert_eq!(step.masked.tokens, vec![2, 3, MASK_ID, 5, 6]);
        assert!(!step.exhausted);
        let (position, _) = step.extracted.unwrap();
        assert_ne!(position, 2, "already-masked position cannot be re-extracted");
        assert!(!instance.is_aspect(position));
        // The pick is the influence argmax over eligible positions.
        let eligible = [1, 3, 4];
        assert_eq!(step.saliency.argmax_over(&eligible), Some(position));
        // Destination reflects whether the prediction matched the label.
        let want = if step.predicted == instance.label {
            Destination::Active
        } else {
            Destination::Misleading
        };
        assert_eq!(step.extracted.unwrap().1, want);
    }

    #[test]
    fn zero_threshold_keeps_the_gate_closed() {
        let params = tiny_params(12, 6, 5);
        let instance = inst("x", &[2, 3, 4, 5], &[0], Sentiment::Positive);
        let config = MiningConfig {
            entropy_threshold: 0.0,
            ..MiningConfig::default()
        };
        let mut rng = RngState::new(0);
        let step =
            mine_instance_step(&params, &instance, &SupervisionSets::default(), &config, &mut rng)
                .unwrap();
        assert!(step.extracted.is_none());
        assert!(step.entropy >= 0.0);
    }

    #[test]
    fn a_single_eligible_position_is_exhausted() {
        let params = tiny_params(12, 6, 5);
        // Two context words; one already extracted leaves one eligible.
        let instance = inst("x", &[2, 3, 4], &[0], Sentiment::Positive);
        let sets = SupervisionSets {
            s_a: vec![],
            s_m: vec![1],
        };
        let config = MiningConfig {
            entropy_threshold: 1e9,
            ..MiningConfig::default()
        };
        let mut rng = RngState::new(0);
        let step = mine_instance_step(&params, &instance, &sets, &config, &mut rng).unwrap();
        assert!(step.exhausted);
        assert!(step.extracted.is_none());
        assert_eq!(step.entropy, 0.0, "one-point distribution");
    }

    #[test]
    fn wide_open_gate_extracts_until_one_word_remains() {
        let corpus = small_corpus();
        let config = MiningConfig {
            iterations: 10,
            entropy_threshold: 1e9,
            seed: 3,
            ..MiningConfig::default()
        };
        let outcome = run_mining(
            &corpus,
            tiny_params(12, 6, 7),
            &config,
            &quick_train_config(),
        )
        .unwrap();
        for item in outcome.mined.items() {
            let context_words = item.instance.len() - item.instance.aspect.len();
            let extracted = item.sets.s_a.len() + item.sets.s_m.len();
            assert_eq!(
                extracted,
                context_words - 1,
                "instance {} should mine down to a single context word",
                item.instance.id
            );
        }
    }

    #[test]
    fn zero_threshold_run_yields_empty_supervision() {
        let corpus = small_corpus();
        let config = MiningConfig {
            iterations: 3,
            entropy_threshold: 0.0,
            ..MiningConfig::default()
        };
        let outcome = run_mining(
            &corpus,
            tiny_params(12, 6, 7),
            &config,
            &quick_train_config(),
        )
        .unwrap();
        assert_eq!(outcome.mined.supervised_count(), 0);
        assert!(outcome.mined.items().iter().all(|m| m.expected.is_empty()));
        assert!(outcome.log.iter().all(|row| row.extracted.is_none()));
    }

    #[test]
    fn structural_invariants_hold_across_a_run() {
        let corpus = small_corpus();
        let config = MiningConfig {
            iterations: 4,
            entropy_threshold: 1.2,
            seed: 11,
            ..MiningConfig::default()
        };
        let outcome = run_mining(
            &corpus,
            tiny_params(12, 6, 13),
            &config,
            &quick_train_config(),
        )
        .unwrap();

        outcome.mined.validate().unwrap();
        for item in outcome.mined.items() {
            let total = item.sets.s_a.len() + item.sets.s_m.len();
            assert!(total <= config.iterations);
            for &p in item.sets.s_a.iter().chain(&item.sets.s_m) {
                assert!(!item.instance.is_aspect(p));
            }
        }
        // One log row per (iteration, instance), in order; the gate is
        // respected on every row.
        assert_eq!(outcome.log.len(), config.iterations * corpus.len());
        for row in &outcome.log {
            if row.extracted.is_some() {
                assert!(row.entropy < config.entropy_threshold);
                assert!(!row.exhausted);
                let pos = row.extracted.unwrap();
                assert!(!row.masked.contains(&pos), "extractions never repeat");
            }
            let sum: f64 = row.saliency.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9, "saliency stays a distribution");
        }
        assert_eq!(outcome.params_history.len(), config.iterations);
    }

    #[test]
    fn runs_are_deterministic_under_a_seed() {
        let corpus = small_corpus();
        let config = MiningConfig {
            iterations: 3,
            entropy_threshold: 2.0,
            mode: SaliencyMode::PartialGradients { n: 2, sigma: 0.01 },
            seed: 21,
            ..MiningConfig::default()
        };
        let run = || {
            run_mining(
                &corpus,
                tiny_params(12, 6, 9),
                &config,
                &quick_train_config(),
            )
            .unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(a.log, b.log);
        assert_eq!(a.mined, b.mined);
        assert_eq!(a.final_params(), b.final_params());
    }

    #[test]
    fn random_ablation_extracts_only_eligible_positions() {
        let corpus = small_corpus();
        let config = MiningConfig {
            iterations: 4,
            entropy_threshold: 1e9,
            seed: 17,
            ..MiningConfig::default()
        };
        let outcome = mine_random_ablation(
            &corpus,
            tiny_params(12, 6, 19),
            &config,
            &quick_train_config(),
        )
        .unwrap();
        outcome.mined.validate().unwrap();
        for row in &outcome.log {
            if let Some(pos) = row.extracted {
                assert!(!row.masked.contains(&pos));
                let instance = corpus.iter().find(|x| x.id == row.id).unwrap();
                assert!(!instance.is_aspect(pos));
            }
        }
        // Reproducible under the same seed.
        let again = mine_random_ablation(
            &corpus,
            tiny_params(12, 6, 19),
            &config,
            &quick_train_config(),
        )
        .unwrap();
        assert_eq!(outcome.log, again.log);
    }

    #[test]
    fn continuation_training_moves_the_parameters() {
        let corpus = small_corpus();
        let init = tiny_params(12, 6, 23);
        let config = MiningConfig {
            iterations: 1,
            ..MiningConfig::default()
        };
        let outcome = run_mining(&corpus, init.clone(), &config, &quick_train_config()).unwrap();
        assert_ne!(outcome.params_history[0], init);
    }

    #[test]
    fn join_rejects_unknown_ids_and_validate_rejects_tampered_targets() {
        let corpus = small_corpus();
        let mut state = SupervisionState::new();
        state.sets_mut("a").s_a.push(1);
        let mined = MinedCorpus::join(&corpus, &state).unwrap();
        assert_eq!(mined.len(), corpus.len());
        assert_eq!(mined.supervised_count(), 1);
        mined.validate().unwrap();

        state.sets_mut("ghost").s_m.push(0);
        assert!(MinedCorpus::join(&corpus, &state).is_err());

        // A hand-built item whose target does not match its sets fails
        // validation.
        let bad = MinedCorpus::from_items(vec![MinedInstance {
            instance: corpus[0].clone(),
            sets: SupervisionSets {
                s_a: vec![1],
                s_m: vec![],
            },
            expected: expected_distribution(&[1, 2], &[]).unwrap(),
        }]);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn filtering_restricts_the_supervision() {
        let corpus = small_corpus();
        let mut state = SupervisionState::new();
        state.sets_mut("a").s_a.push(1);
        state.sets_mut("a").s_m.push(2);
        state.sets_mut("b").s_m.push(3);
        let mined = MinedCorpus::join(&corpus, &state).unwrap();

        let active = mined.filtered(SupervisionFilter::ActiveOnly).unwrap();
        active.validate().unwrap();
        assert!(active.items().iter().all(|m| m.sets.s_m.is_empty()));
        assert_eq!(active.supervised_count(), 1);

        let misleading = mined.filtered(SupervisionFilter::MisleadingOnly).unwrap();
        misleading.validate().unwrap();
        assert!(misleading.items().iter().all(|m| m.sets.s_a.is_empty()));
        // Every remaining target weight is zero.
        for item in misleading.items() {
            assert!(item.expected.entries().iter().all(|&(_, w)| w == 0.0));
        }

        assert_eq!(mined.filtered(SupervisionFilter::All).unwrap(), mined);
    }

    #[test]
    fn mining_log_round_trips_through_disk() {
        let corpus = small_corpus();
        let config = MiningConfig {
            iterations: 2,
            entropy_threshold: 2.5,
            seed: 29,
            ..MiningConfig::default()
        };
        let outcome = run_mining(
            &corpus,
            tiny_params(12, 6, 31),
            &config,
            &quick_train_config(),
        )
        .unwrap();
        let header = LogHeader {
            corpus_hash: 111,
            vocab_hash: 222,
            mode: config.mode.label().to_string(),
            iterations: config.iterations,
            entropy_threshold: config.entropy_threshold,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mining.jsonl");
        save_mining_log(&path, &header, &outcome.log).unwrap();
        let (got_header, got_rows) = load_mining_log(&path).unwrap();
        assert_eq!(got_header, header);
        assert_eq!(got_rows, outcome.log);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(MiningConfig {
            iterations: 0,
            ..MiningConfig::default()
        }
        .validate()
        .is_err());
        assert!(MiningConfig {
            entropy_threshold: -1.0,
            ..MiningConfig::default()
        }
        .validate()
        .is_err());
        assert!(MiningConfig {
            epochs_per_iteration: 0,
            ..MiningConfig::default()
        }
        .validate()
        .is_err());
    }
}

//! Evaluation: accuracy, Macro-F1, per-class precision/recall, and the
//! paired bootstrap significance test between two systems.

use crate::data::instance::{Sentiment, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::numerics::RngState;

/// Parallel (id, gold, predicted) records for one system on one test set.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PredictionSet {
    ids: Vec<String>,
    golds: Vec<Sentiment>,
    preds: Vec<Sentiment>,
}

impl PredictionSet {
    pub fn new() -> PredictionSet {
        PredictionSet::default()
    }

    pub fn with_capacity(n: usize) -> PredictionSet {
        PredictionSet {
            ids: Vec::with_capacity(n),
            golds: Vec::with_capacity(n),
            preds: Vec::with_capacity(n),
        }
    }

    pub fn push(&mut self, id: String, gold: Sentiment, pred: Sentiment) -> Result<()> {
        if self.ids.contains(&id) {
            return Err(Error::InvalidData(format!("duplicate prediction id {id}")));
        }
        self.ids.push(id);
        self.golds.push(gold);
        self.preds.push(pred);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Sentiment, Sentiment)> + '_ {
        self.ids
            .iter()
            .zip(&self.golds)
            .zip(&self.preds)
            .map(|((id, &g), &p)| (id.as_str(), g, p))
    }

    fn require_non_empty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::InvalidData(
                "cannot evaluate an empty prediction set".into(),
            ))
        } else {
            Ok(())
        }
    }
}

/// Fraction of instances where the prediction equals the gold label.
pub fn accuracy(preds: &PredictionSet) -> Result<f64> {
    preds.require_non_empty()?;
    Ok(accuracy_on(preds, None))
}

/// Unweighted mean of per-class F1 over the three classes. A class with
/// neither gold nor predicted instances contributes F1 = 0.
pub fn macro_f1(preds: &PredictionSet) -> Result<f64> {
    preds.require_non_empty()?;
    Ok(macro_f1_on(preds, None))
}

/// Per-class precision, recall, and F1 (zero where undefined).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Metrics for each class in class-code order.
pub fn per_class_metrics(preds: &PredictionSet) -> Result<[ClassMetrics; NUM_CLASSES]> {
    preds.require_non_empty()?;
    let counts = confusion(preds, None);
    let mut out = [ClassMetrics {
        precision: 0.0,
        recall: 0.0,
        f1: 0.0,
    }; NUM_CLASSES];
    for (c, m) in out.iter_mut().enumerate() {
        *m = counts.class_metrics(c);
    }
    Ok(out)
}

/// p-values of the paired bootstrap test, one per metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapOutcome {
    /// Fraction of resamples where system A's accuracy was not strictly
    /// better than system B's.
    pub p_accuracy: f64,
    /// Same for Macro-F1.
    pub p_macro_f1: f64,
}

/// Paired bootstrap: resample the instances with replacement `n` times
/// (both systems scored on the same resample) and report, per metric, the
/// fraction of resamples where `system_a` does not beat `system_b`.
///
/// The two systems must cover exactly the same instance ids; `system_b` may
/// list them in a different order.
pub fn bootstrap_test(
    system_a: &PredictionSet,
    system_b: &PredictionSet,
    n: usize,
    rng: &mut RngState,
) -> Result<BootstrapOutcome> {
    system_a.require_non_empty()?;
    if n == 0 {
        return Err(Error::InvalidArgument(
            "bootstrap needs at least one resample".into(),
        ));
    }
    // Align system B to system A's instance order.
    let mut b_index = std::collections::HashMap::with_capacity(system_b.len());
    for (i, id) in system_b.ids.iter().enumerate() {
        b_index.insert(id.as_str(), i);
    }
    if system_b.len() != system_a.len() {
        return Err(Error::InvalidData(format!(
            "prediction sets cover {} vs {} instances",
            system_a.len(),
            system_b.len()
        )));
    }
    let mut b_aligned = PredictionSet::with_capacity(system_a.len());
    for (id, gold, _) in system_a.iter() {
        let Some(&j) = b_index.get(id) else {
            return Err(Error::InvalidData(format!(
                "instance {id} missing from the second prediction set"
            )));
        };
        if system_b.golds[j] != gold {
            return Err(Error::InvalidData(format!(
                "instance {id} has different gold labels in the two sets"
            )));
        }
        b_aligned.push(id.to_string(), gold, system_b.preds[j])?;
    }

    let size = system_a.len();
    let mut not_better_acc = 0usize;
    let mut not_better_f1 = 0usize;
    let mut resample = vec![0usize; size];
    for _ in 0..n {
        for slot in &mut resample {
            *slot = rng.below(size);
        }
        let acc_a = accuracy_on(system_a, Some(&resample));
        let acc_b = accuracy_on(&b_aligned, Some(&resample));
        if acc_a <= acc_b {
            not_better_acc += 1;
        }
        let f1_a = macro_f1_on(system_a, Some(&resample));
        let f1_b = macro_f1_on(&b_aligned, Some(&resample));
        if f1_a <= f1_b {
            not_better_f1 += 1;
        }
    }
    Ok(BootstrapOutcome {
        p_accuracy: not_better_acc as f64 / n as f64,
        p_macro_f1: not_better_f1 as f64 / n as f64,
    })
}

/// Render a metrics report: accuracy, Macro-F1, per-class
/// precision/recall/F1, and — when comparing against another system —
/// bootstrap p-values.
pub fn render_metrics(
    preds: &PredictionSet,
    vs_baseline: Option<&BootstrapOutcome>,
) -> Result<String> {
    use std::fmt::Write;
    let per_class = per_class_metrics(preds)?;
    let mut out = String::new();
    let mut line = |s: String| out.push_str(&(s + "\n"));
    line(format!("instances {}", preds.len()));
    line(format!("accuracy {:.6}", accuracy(preds)?));
    line(format!("macro_f1 {:.6}", macro_f1(preds)?));
    for (class, m) in Sentiment::all().iter().zip(&per_class) {
        let mut row = String::new();
        write!(
            row,
            "class {} precision {:.6} recall {:.6} f1 {:.6}",
            class.as_str(),
            m.precision,
            m.recall,
            m.f1
        )
        .expect("writing to a string cannot fail");
        line(row);
    }
    if let Some(b) = vs_baseline {
        line(format!("p_accuracy_vs_baseline {:.6}", b.p_accuracy));
        line(format!("p_macro_f1_vs_baseline {:.6}", b.p_macro_f1));
    }
    Ok(out)
}

/// Confusion counts; `indices` selects a resample (None = every instance).
struct Confusion {
    /// matrix[gold][pred]
    matrix: [[usize; NUM_CLASSES]; NUM_CLASSES],
}

impl Confusion {
    fn class_metrics(&self, c: usize) -> ClassMetrics {
        let tp = self.matrix[c][c];
        let predicted: usize = (0..NUM_CLASSES).map(|g| self.matrix[g][c]).sum();
        let gold: usize = self.matrix[c].iter().sum();
        let precision = if predicted == 0 {
            0.0
        } else {
            tp as f64 / predicted as f64
        };
        let recall = if gold == 0 { 0.0 } else { tp as f64 / gold as f64 };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        ClassMetrics {
            precision,
            recall,
            f1,
        }
    }
}

fn confusion(preds: &PredictionSet, indices: Option<&[usize]>) -> Confusion {
    let mut matrix = [[0usize; NUM_CLASSES]; NUM_CLASSES];
    let mut add = |i: usize| {
        matrix[preds.golds[i].index()][preds.preds[i].index()] += 1;
    };
    match indices {
        Some(idx) => idx.iter().for_each(|&i| add(i)),
        None => (0..preds.len()).for_each(add),
    }
    Confusion { matrix }
}

fn accuracy_on(preds: &PredictionSet, indices: Option<&[usize]>) -> f64 {
    let correct = |i: usize| preds.golds[i] == preds.preds[i];
    match indices {
        Some(idx) => idx.iter().filter(|&&i| correct(i)).count() as f64 / idx.len() as f64,
        None => (0..preds.len()).filter(|&i| correct(i)).count() as f64 / preds.len() as f64,
    }
}

fn macro_f1_on(preds: &PredictionSet, indices: Option<&[usize]>) -> f64 {
    let counts = confusion(preds, indices);
    (0..NUM_CLASSES)
        .map(|c| counts.class_metrics(c).f1)
        .sum::<f64>()
        / NUM_CLASSES as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use Sentiment::{Negative as N, Neutral as Nu, Positive as P};

    fn set(pairs: &[(Sentiment, Sentiment)]) -> PredictionSet {
        let mut s = PredictionSet::new();
        for (i, &(gold, pred)) in pairs.iter().enumerate() {
            s.push(format!("i{i}"), gold, pred).unwrap();
        }
        s
    }

    #[test]
    fn accuracy_basics() {
        assert_eq!(accuracy(&set(&[(P, P), (N, N), (Nu, Nu)])).unwrap(), 1.0);
        assert_eq!(accuracy(&set(&[(P, N), (N, P), (Nu, P)])).unwrap(), 0.0);
        let two_thirds = accuracy(&set(&[(P, P), (N, N), (Nu, P)])).unwrap();
        assert!((two_thirds - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn macro_f1_matches_hand_computed_confusion() {
        // golds [P,P,N,Neu], preds [P,N,N,Neu]:
        // F1(P) = 2/3, F1(N) = 2/3, F1(Neu) = 1 => macro = 7/9.
        let s = set(&[(P, P), (P, N), (N, N), (Nu, Nu)]);
        let f1 = macro_f1(&s).unwrap();
        assert!((f1 - 7.0 / 9.0).abs() < 1e-12, "{f1}");
    }

    #[test]
    fn perfect_predictions_give_macro_f1_one() {
        assert_eq!(macro_f1(&set(&[(P, P), (N, N), (Nu, Nu)])).unwrap(), 1.0);
    }

    #[test]
    fn never_predicted_class_scores_zero_f1() {
        // Neutral present in gold but never predicted.
        let s = set(&[(P, P), (N, N), (Nu, P)]);
        let per_class = per_class_metrics(&s).unwrap();
        assert_eq!(per_class[Nu.index()].f1, 0.0);
        assert_eq!(per_class[Nu.index()].recall, 0.0);
        let f1 = macro_f1(&s).unwrap();
        // P: precision 1/2, recall 1 => 2/3; N: 1; Nu: 0.
        assert!((f1 - (2.0 / 3.0 + 1.0) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn class_absent_from_gold_and_pred_contributes_zero() {
        let s = set(&[(P, P), (N, N)]);
        assert!((macro_f1(&s).unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn metrics_are_order_invariant() {
        let a = set(&[(P, P), (N, P), (Nu, Nu)]);
        let mut b = PredictionSet::new();
        b.push("x2".into(), Nu, Nu).unwrap();
        b.push("x0".into(), P, P).unwrap();
        b.push("x1".into(), N, P).unwrap();
        assert_eq!(accuracy(&a).unwrap(), accuracy(&b).unwrap());
        assert_eq!(macro_f1(&a).unwrap(), macro_f1(&b).unwrap());
    }

    #[test]
    fn macro_f1_equals_accuracy_on_diagonal_confusions() {
        let s = set(&[(P, P), (P, P), (N, N), (Nu, Nu)]);
        assert_eq!(macro_f1(&s).unwrap(), accuracy(&s).unwrap());
    }

    #[test]
    fn rendered_report_lists_every_metric_once() {
        let s = set(&[(P, P), (P, N), (N, N), (Nu, Nu)]);
        let text = render_metrics(&s, None).unwrap();
        assert!(text.contains("instances 4"));
        assert!(text.contains("accuracy 0.750000"));
        assert!(text.contains("macro_f1 0.777778"));
        for class in ["positive", "negative", "neutral"] {
            assert_eq!(
                text.matches(&format!("class {class} ")).count(),
                1,
                "{text}"
            );
        }
        assert!(!text.contains("p_accuracy"));

        let b = BootstrapOutcome {
            p_accuracy: 0.031,
            p_macro_f1: 0.25,
        };
        let with_p = render_metrics(&s, Some(&b)).unwrap();
        assert!(with_p.contains("p_accuracy_vs_baseline 0.031000"));
        assert!(with_p.contains("p_macro_f1_vs_baseline 0.250000"));
    }

    #[test]
    fn empty_sets_and_duplicate_ids_are_rejected() {
        assert!(accuracy(&PredictionSet::new()).is_err());
        assert!(macro_f1(&PredictionSet::new()).is_err());
        let mut s = PredictionSet::new();
        s.push("same".into(), P, P).unwrap();
        assert!(s.push("same".into(), N, N).is_err());
    }

    #[test]
    fn bootstrap_identical_systems_never_beat_each_other() {
        let s = set(&[(P, P), (N, P), (Nu, Nu), (P, N)]);
        let mut rng = RngState::new(1);
        let out = bootstrap_test(&s, &s.clone(), 200, &mut rng).unwrap();
        assert_eq!(out.p_accuracy, 1.0);
        assert_eq!(out.p_macro_f1, 1.0);
    }

    #[test]
    fn bootstrap_total_dominance_gives_p_zero() {
        let golds: Vec<Sentiment> = (0..100)
            .map(|i| [P, N, Nu][i % 3])
            .collect();
        let mut all_right = PredictionSet::new();
        let mut all_wrong = PredictionSet::new();
        for (i, &g) in golds.iter().enumerate() {
            all_right.push(format!("i{i}"), g, g).unwrap();
            let wrong = if g == P { N } else { P };
            all_wrong.push(format!("i{i}"), g, wrong).unwrap();
        }
        let mut rng = RngState::new(2);
        let out = bootstrap_test(&all_right, &all_wrong, 1000, &mut rng).unwrap();
        assert_eq!(out.p_accuracy, 0.0);
        assert_eq!(out.p_macro_f1, 0.0);
    }

    #[test]
    fn bootstrap_is_deterministic_under_seed() {
        let a = set(&[(P, P), (N, P), (Nu, Nu), (P, P), (N, N)]);
        let b = set(&[(P, N), (N, N), (Nu, Nu), (P, P), (N, P)]);
        let r1 = bootstrap_test(&a, &b, 500, &mut RngState::new(7)).unwrap();
        let r2 = bootstrap_test(&a, &b, 500, &mut RngState::new(7)).unwrap();
        assert_eq!(r1, r2);
        assert!((0.0..=1.0).contains(&r1.p_accuracy));
        assert!((0.0..=1.0).contains(&r1.p_macro_f1));
    }

    #[test]
    fn bootstrap_aligns_b_by_id_and_rejects_mismatches() {
        let a = set(&[(P, P), (N, N)]);
        // Same ids, different order.
        let mut b = PredictionSet::new();
        b.push("i1".into(), N, P).unwrap();
        b.push("i0".into(), P, P).unwrap();
        let mut rng = RngState::new(3);
        bootstrap_test(&a, &b, 10, &mut rng).unwrap();

        // Different id set.
        let mut c = PredictionSet::new();
        c.push("zz".into(), P, P).unwrap();
        c.push("i0".into(), P, P).unwrap();
        assert!(bootstrap_test(&a, &c, 10, &mut rng).is_err());

        // Mismatched gold labels.
        let mut d = PredictionSet::new();
        d.push("i0".into(), P, P).unwrap();
        d.push("i1".into(), Nu, N).unwrap();
        assert!(bootstrap_test(&a, &d, 10, &mut rng).is_err());
    }
}

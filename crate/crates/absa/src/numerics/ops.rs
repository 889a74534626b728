//! Scalar numeric building blocks: stable softmax with excluded positions,
//! Shannon entropy in nats, and argmax with deterministic tie-breaking.

use crate::error::{Error, Result};

/// How far a probability vector's sum may drift from 1 before we refuse to
/// treat it as a distribution.
const DISTRIBUTION_TOLERANCE: f64 = 1e-6;

/// Numerically stable softmax over the positions of `scores` that are *not*
/// listed in `excluded`. Excluded positions come back as exactly `0.0`, so
/// downstream sums over the full vector stay valid.
///
/// Errors with `empty support` if every position is excluded (or `scores` is
/// empty): there is nothing to normalize over.
pub fn softmax_excluded(scores: &[f64], excluded: &[usize]) -> Result<Vec<f64>> {
    let mut include = vec![true; scores.len()];
    for &i in excluded {
        if i < include.len() {
            include[i] = false;
        }
    }
    let max = scores
        .iter()
        .zip(&include)
        .filter(|(_, inc)| **inc)
        .map(|(s, _)| *s)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::EmptySupport(scores.len()));
    }
    let mut out = vec![0.0; scores.len()];
    let mut sum = 0.0;
    for (i, (&s, &inc)) in scores.iter().zip(&include).enumerate() {
        if inc {
            let e = (s - max).exp();
            out[i] = e;
            sum += e;
        }
    }
    for x in &mut out {
        *x /= sum;
    }
    Ok(out)
}

/// Softmax with no exclusions.
pub fn softmax(scores: &[f64]) -> Result<Vec<f64>> {
    softmax_excluded(scores, &[])
}

/// Shannon entropy of a probability vector, in nats (natural log), with the
/// usual convention `0 * ln 0 = 0`.
///
/// The input must be a distribution: non-negative entries summing to 1
/// within a small tolerance. Anything else is an `invalid distribution`.
pub fn entropy(dist: &[f64]) -> Result<f64> {
    if dist.is_empty() {
        return Err(Error::InvalidDistribution("empty vector".to_string()));
    }
    let mut sum = 0.0;
    for &p in dist {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "entry {p} is negative or non-finite"
            )));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > DISTRIBUTION_TOLERANCE {
        return Err(Error::InvalidDistribution(format!(
            "entries sum to {sum}, expected 1"
        )));
    }
    Ok(dist
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum())
}

/// Index of the largest element; ties resolve to the lowest index so results
/// never depend on float comparison order.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn softmax_matches_frozen_values() {
        let p = softmax(&[1.0, 2.0, 3.0]).unwrap();
        assert_close(p[0], 0.09003057317038046, 1e-15);
        assert_close(p[1], 0.24472847105479764, 1e-15);
        assert_close(p[2], 0.6652409557748218, 1e-15);
        assert_close(p.iter().sum::<f64>(), 1.0, 1e-12);
    }

    #[test]
    fn excluded_positions_get_exact_zero() {
        let p = softmax_excluded(&[5.0, 7.0, 9.0], &[1]).unwrap();
        assert_eq!(p[1], 0.0);
        assert_close(p[0], 0.017986209962091555, 1e-15);
        assert_close(p[2], 0.9820137900379085, 1e-15);
        assert_close(p.iter().sum::<f64>(), 1.0, 1e-12);
    }

    #[test]
    fn softmax_is_shift_invariant_and_stable_at_large_scores() {
        let a = softmax(&[1.0, 2.0, 3.0]).unwrap();
        let b = softmax(&[1001.0, 1002.0, 1003.0]).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_close(*x, *y, 1e-12);
        }
        // Without max-subtraction these would overflow to inf/NaN.
        assert!(b.iter().all(|p| p.is_finite()));
    }

    #[test]
    fn softmax_with_everything_excluded_is_empty_support() {
        let err = softmax_excluded(&[1.0, 2.0], &[0, 1]).unwrap_err();
        assert!(err.to_string().contains("empty support"));
        let err = softmax(&[]).unwrap_err();
        assert!(err.to_string().contains("empty support"));
    }

    #[test]
    fn out_of_range_exclusions_are_ignored() {
        let p = softmax_excluded(&[0.0, 0.0], &[5]).unwrap();
        assert_close(p[0], 0.5, 1e-15);
        assert_close(p[1], 0.5, 1e-15);
    }

    #[test]
    fn entropy_matches_frozen_values() {
        assert_close(entropy(&[0.5, 0.5]).unwrap(), 0.6931471805599453, 1e-15);
        assert_close(
            entropy(&[0.25, 0.25, 0.25, 0.25]).unwrap(),
            1.3862943611198906,
            1e-15,
        );
        assert_close(
            entropy(&[0.7, 0.1, 0.1, 0.1]).unwrap(),
            0.9404479886553264,
            1e-15,
        );
        // Entropy of softmax([1,2,3]).
        let p = softmax(&[1.0, 2.0, 3.0]).unwrap();
        assert_close(entropy(&p).unwrap(), 0.8323955818399389, 1e-12);
    }

    #[test]
    fn entropy_of_point_mass_is_zero() {
        assert_eq!(entropy(&[1.0, 0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn entropy_rejects_non_distributions() {
        let err = entropy(&[0.5, 0.6]).unwrap_err();
        assert!(err.to_string().contains("invalid distribution"));
        let err = entropy(&[-0.1, 1.1]).unwrap_err();
        assert!(err.to_string().contains("invalid distribution"));
        let err = entropy(&[]).unwrap_err();
        assert!(err.to_string().contains("invalid distribution"));
    }

    #[test]
    fn argmax_breaks_ties_toward_lowest_index() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0, 2.0]), 1);
        assert_eq!(argmax(&[5.0]), 0);
        assert_eq!(argmax(&[2.0, 2.0, 2.0]), 0);
    }
}

//! Per-position influence scores over a sentence's context words.
//!
//! Two definitions are supported: the model's own attention weights, and a
//! noise-averaged gradient×input attribution. Both yield a distribution
//! over eligible positions (non-negative, sums to 1, exactly zero on
//! aspect/masked positions) so the mining loop can treat them uniformly.

use crate::data::instance::Instance;
use crate::error::{Error, Result};
use crate::model::{
    eligible_positions, forward_with_noise, logprob_grad_wrt_context, ForwardTrace, ModelParams,
};
use crate::numerics::{dot, RngState};

/// Default number of noise samples for the gradient attribution.
pub const DEFAULT_NOISE_SAMPLES: usize = 8;
/// Default noise standard deviation for the gradient attribution.
pub const DEFAULT_NOISE_SIGMA: f64 = 0.01;

/// Which influence definition to use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SaliencyMode {
    /// Influence = the attention weight itself.
    AttentionWeights,
    /// Influence = |gradient of the predicted class log-probability times
    /// the context vector|, averaged over `n` noisy forward passes with
    /// embedding noise of standard deviation `sigma`.
    PartialGradients { n: usize, sigma: f64 },
}

impl SaliencyMode {
    /// Short label for logs and reports.
    pub fn label(&self) -> &'static str {
        match self {
            SaliencyMode::AttentionWeights => "aw",
            SaliencyMode::PartialGradients { .. } => "pg",
        }
    }
}

/// An influence distribution over the token positions of one sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyVector {
    /// One score per token position; exactly 0 at ineligible positions.
    pub scores: Vec<f64>,
    pub mode: SaliencyMode,
    /// True if any noise sample produced an all-zero attribution and was
    /// replaced by the uniform distribution over eligible positions.
    pub uniform_fallback: bool,
}

impl SaliencyVector {
    /// Highest-scoring position among `eligible`; ties break to the lowest
    /// position index. None when `eligible` is empty.
    pub fn argmax_over(&self, eligible: &[usize]) -> Option<usize> {
        let mut best: Option<usize> = None;
        for &pos in eligible {
            match best {
                Some(b) if self.scores[pos] <= self.scores[b] => {}
                _ => best = Some(pos),
            }
        }
        best
    }

    /// Scores restricted to `positions`, in their order.
    pub fn at(&self, positions: &[usize]) -> Vec<f64> {
        positions.iter().map(|&p| self.scores[p]).collect()
    }
}

/// Influence under the attention-weight definition: the trace's attention
/// distribution verbatim.
pub fn saliency_aw(trace: &ForwardTrace) -> SaliencyVector {
    SaliencyVector {
        scores: trace.alpha.clone(),
        mode: SaliencyMode::AttentionWeights,
        uniform_fallback: false,
    }
}

/// Normalize `raw` into a distribution by absolute value over `eligible`
/// positions (zero elsewhere). None when every eligible value is zero —
/// the caller decides the fallback.
pub fn normalize_abs(raw: &[f64], eligible: &[usize]) -> Option<Vec<f64>> {
    let total: f64 = eligible.iter().map(|&p| raw[p].abs()).sum();
    if total == 0.0 {
        return None;
    }
    let mut out = vec![0.0; raw.len()];
    for &p in eligible {
        out[p] = raw[p].abs() / total;
    }
    Some(out)
}

/// Influence under the gradient definition.
///
/// For each of `n` samples: perturb every eligible context word's memory
/// and context embedding with N(0, sigma²) noise, run the model, take the
/// gradient of the predicted class's log-probability with respect to each
/// context vector, and score each position by |gradient · context vector|
/// normalized to sum 1. The final vector is the mean over samples,
/// renormalized. A sample whose scores are identically zero (saturated
/// output) falls back to the uniform distribution and flags the result.
pub fn saliency_pg(
    params: &ModelParams,
    instance: &Instance,
    masked: &[usize],
    n: usize,
    sigma: f64,
    rng: &mut RngState,
) -> Result<SaliencyVector> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "gradient saliency needs at least one sample".into(),
        ));
    }
    if sigma < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "noise standard deviation must be non-negative, got {sigma}"
        )));
    }
    let d = params.dim();
    let eligible = eligible_positions(instance, masked);
    let mut mean = vec![0.0; instance.len()];
    let mut uniform_fallback = false;
    // Without noise every sample is identical; evaluating once keeps the
    // result exactly independent of the sample count.
    let samples = if sigma == 0.0 { 1 } else { n };
    for _ in 0..samples {
        let noise: Vec<(Vec<f64>, Vec<f64>)> = eligible
            .iter()
            .map(|_| (rng.gaussian(d, sigma), rng.gaussian(d, sigma)))
            .collect();
        let trace = forward_with_noise(params, instance, masked, &noise)?;
        let grads = logprob_grad_wrt_context(params, &trace, trace.pred);
        let mut raw = vec![0.0; instance.len()];
        for (j, &pos) in trace.eligible.iter().enumerate() {
            let h = trace
                .context_vector(pos)
                .expect("eligible position has a context vector");
            raw[pos] = dot(&grads[j], h);
        }
        let sample = match normalize_abs(&raw, &trace.eligible) {
            Some(scores) => scores,
            None => {
                uniform_fallback = true;
                let share = 1.0 / trace.eligible.len() as f64;
                let mut scores = vec![0.0; instance.len()];
                for &p in &trace.eligible {
                    scores[p] = share;
                }
                scores
            }
        };
        for (acc, s) in mean.iter_mut().zip(&sample) {
            *acc += s;
        }
    }
    for x in &mut mean {
        *x /= samples as f64;
    }
    // Each sample sums to 1, so the mean does too up to rounding; make the
    // invariant exact.
    let total: f64 = eligible.iter().map(|&p| mean[p]).sum();
    for &p in &eligible {
        mean[p] /= total;
    }
    Ok(SaliencyVector {
        scores: mean,
        mode: SaliencyMode::PartialGradients { n, sigma },
        uniform_fallback,
    })
}

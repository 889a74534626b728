//! Central finite-difference gradient verification.
//!
//! The training code uses hand-derived backward passes, so this module is the
//! independent referee: it perturbs sampled coordinates of each parameter
//! tensor by `+h` / `-h`, re-evaluates the loss, and compares the secant
//! slope against the analytic gradient.

use crate::error::{Error, Result};

use super::rng::RngState;
use super::tensor::Tensor;

/// Step sizes outside this window either drown in roundoff (too small) or in
/// truncation error (too large) for 64-bit central differences.
const H_MIN: f64 = 1e-6;
const H_MAX: f64 = 1e-4;

/// Compare analytic gradients against central finite differences.
///
/// * `loss` re-evaluates the scalar loss at the current value of `params`;
///   it must be deterministic (same params, same loss).
/// * `analytic` holds the gradient tensors to verify, aligned with `params`.
/// * `h` is the perturbation step, required to lie in `[1e-6, 1e-4]`.
/// * At most `max_coords_per_tensor` coordinates are checked per tensor,
///   sampled uniformly without replacement from `rng`.
///
/// Returns the maximum relative error
/// `|analytic - numeric| / max(|analytic|, |numeric|, 1e-8)` over all checked
/// coordinates. Params are restored to their original values before
/// returning. A non-finite loss anywhere aborts with `unstable point`.
pub fn check_gradient<F>(
    mut loss: F,
    params: &mut [Tensor],
    analytic: &[Tensor],
    h: f64,
    max_coords_per_tensor: usize,
    rng: &mut RngState,
) -> Result<f64>
where
    F: FnMut(&[Tensor]) -> Result<f64>,
{
    if !(H_MIN..=H_MAX).contains(&h) {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step {h} outside [{H_MIN}, {H_MAX}]"
        )));
    }
    if params.len() != analytic.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} params vs {} gradient tensors",
            params.len(),
            analytic.len()
        )));
    }
    for (p, a) in params.iter().zip(analytic) {
        if p.shape() != a.shape() {
            return Err(Error::ShapeMismatch(format!(
                "param shape {:?} vs gradient shape {:?}",
                p.shape(),
                a.shape()
            )));
        }
    }

    let mut max_rel = 0.0_f64;
    for ti in 0..params.len() {
        let coords = rng.sample_indices(params[ti].numel(), max_coords_per_tensor);
        for ci in coords {
            let original = params[ti].data()[ci];

            params[ti].data_mut()[ci] = original + h;
            let plus = loss(params)?;
            params[ti].data_mut()[ci] = original - h;
            let minus = loss(params)?;
            params[ti].data_mut()[ci] = original;

            if !plus.is_finite() || !minus.is_finite() {
                return Err(Error::UnstablePoint);
            }
            let numeric = (plus - minus) / (2.0 * h);
            let exact = analytic[ti].data()[ci];
            let rel = (exact - numeric).abs() / exact.abs().max(numeric.abs()).max(1e-8);
            if rel > max_rel {
                max_rel = rel;
            }
        }
    }
    Ok(max_rel)
}

//! Adam optimizer with bias-corrected first and second moment estimates.

use crate::error::{Error, Result};

use super::tensor::Tensor;

/// Optimizer state: one pair of moment tensors per parameter tensor, plus the
/// shared step counter. Defaults are beta1 = 0.9, beta2 = 0.999, eps = 1e-8.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<Tensor>,
    v: Vec<Tensor>,
    t: u64,
    beta1: f64,
    beta2: f64,
    eps: f64,
}

impl AdamState {
    /// Fresh state with zeroed moments matching the given parameter tensors.
    pub fn new(params: &[&Tensor]) -> AdamState {
        AdamState {
            m: params.iter().map(|p| Tensor::zeros(p.shape())).collect(),
            v: params.iter().map(|p| Tensor::zeros(p.shape())).collect(),
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    /// Number of steps taken so far.
    pub fn steps(&self) -> u64 {
        self.t
    }

    /// Apply one update in place:
    ///
    /// ```text
    /// m <- beta1 m + (1 - beta1) g        mhat = m / (1 - beta1^t)
    /// v <- beta2 v + (1 - beta2) g^2      vhat = v / (1 - beta2^t)
    /// theta <- theta - lr * mhat / (sqrt(vhat) + eps)
    /// ```
    ///
    /// `params` and `grads` must line up one-to-one with the tensors this
    /// state was created from.
    pub fn step(&mut self, params: &mut [&mut Tensor], grads: &[&Tensor], lr: f64) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::ShapeMismatch(format!(
                "optimizer tracks {} tensors, got {} params / {} grads",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        for ((p, g), mo) in params.iter().zip(grads).zip(&self.m) {
            if p.shape() != mo.shape() || g.shape() != mo.shape() {
                return Err(Error::ShapeMismatch(format!(
                    "optimizer moment shape {:?} vs param {:?} / grad {:?}",
                    mo.shape(),
                    p.shape(),
                    g.shape()
                )));
            }
        }
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for ((param, grad), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            let pd = param.data_mut();
            let gd = grad.data();
            let md = m.data_mut();
            let vd = v.data_mut();
            for i in 0..pd.len() {
                let g = gd[i];
                md[i] = self.beta1 * md[i] + (1.0 - self.beta1) * g;
                vd[i] = self.beta2 * vd[i] + (1.0 - self.beta2) * g * g;
                let mhat = md[i] / bc1;
                let vhat = vd[i] / bc2;
                pd[i] -= lr * mhat / (vhat.sqrt() + self.eps);
            }
        }
        Ok(())
    }
}

//! The attentional memory-network classifier.
//!
//! For an instance with tokens `x` and aspect positions `T`:
//!
//! ```text
//! v        = mean of aspect-embedding rows over T
//! score_i  = v' M m_i          for eligible context positions i
//! alpha    = softmax(score)    (0 on ineligible positions)
//! o        = sum_i alpha_i h_i
//! logits   = W_o (o + v) + b_o
//! ```
//!
//! where `m_i` / `h_i` are the memory / context embedding rows of token i.
//! A position is *eligible* when it is not an aspect position, not in the
//! caller's masked set, and not the reserved mask token. The backward pass
//! is derived by hand and verified against finite differences in the test
//! suite.

use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::data::instance::{Instance, Sentiment, NUM_CLASSES};
use crate::data::vocab::MASK_ID;
use crate::error::{Error, Result};
use crate::numerics::tensor::{axpy_row, dot, matvec, matvec_t};
use crate::numerics::{argmax, softmax, softmax_excluded, RngState, Tensor};
use crate::training::ExpectedDistribution;

/// All trainable tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// Aspect embedding matrix, |V| x d. Feeds v.
    pub aspect_emb: Tensor,
    /// Memory embedding matrix, |V| x d. Feeds attention scores.
    pub mem_emb: Tensor,
    /// Context embedding matrix, |V| x d. Feeds the output representation.
    pub ctx_emb: Tensor,
    /// Attention bilinear form, d x d.
    pub attn: Tensor,
    /// Output weights, 3 x d.
    pub w_out: Tensor,
    /// Output bias, 3.
    pub b_out: Tensor,
}

impl ModelParams {
    /// Initialize from an embedding matrix (copied into all three embedding
    /// tables) plus Uniform[-0.01, 0.01) draws for the attention and output
    /// parameters, in the order attn, w_out, b_out.
    pub fn init(embedding: &Tensor, rng: &mut RngState) -> Result<ModelParams> {
        if embedding.shape().len() != 2 {
            return Err(Error::ShapeMismatch(format!(
                "embedding matrix must be rank 2, got {:?}",
                embedding.shape()
            )));
        }
        let dim = embedding.shape()[1];
        let mut attn = Tensor::zeros(&[dim, dim]);
        let mut w_out = Tensor::zeros(&[NUM_CLASSES, dim]);
        let mut b_out = Tensor::zeros(&[NUM_CLASSES]);
        rng.fill_uniform(&mut attn, -0.01, 0.01);
        rng.fill_uniform(&mut w_out, -0.01, 0.01);
        rng.fill_uniform(&mut b_out, -0.01, 0.01);
        Ok(ModelParams {
            aspect_emb: embedding.clone(),
            mem_emb: embedding.clone(),
            ctx_emb: embedding.clone(),
            attn,
            w_out,
            b_out,
        })
    }

    pub fn dim(&self) -> usize {
        self.aspect_emb.shape()[1]
    }

    pub fn vocab_size(&self) -> usize {
        self.aspect_emb.shape()[0]
    }

    /// Tensors in declared order (the order used by the optimizer and the
    /// checkpoint format).
    pub fn tensors(&self) -> [&Tensor; 6] {
        [
            &self.aspect_emb,
            &self.mem_emb,
            &self.ctx_emb,
            &self.attn,
            &self.w_out,
            &self.b_out,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut Tensor; 6] {
        [
            &mut self.aspect_emb,
            &mut self.mem_emb,
            &mut self.ctx_emb,
            &mut self.attn,
            &mut self.w_out,
            &mut self.b_out,
        ]
    }

    /// Clone the tensors into a plain vector (for gradient checking).
    pub fn to_tensor_vec(&self) -> Vec<Tensor> {
        self.tensors().into_iter().cloned().collect()
    }

    /// Rebuild params from a tensor vector produced by [`to_tensor_vec`].
    pub fn from_tensor_vec(tensors: &[Tensor]) -> Result<ModelParams> {
        if tensors.len() != 6 {
            return Err(Error::ShapeMismatch(format!(
                "expected 6 tensors, got {}",
                tensors.len()
            )));
        }
        Ok(ModelParams {
            aspect_emb: tensors[0].clone(),
            mem_emb: tensors[1].clone(),
            ctx_emb: tensors[2].clone(),
            attn: tensors[3].clone(),
            w_out: tensors[4].clone(),
            b_out: tensors[5].clone(),
        })
    }
}

/// Gradients for every tensor in [`ModelParams`], same shapes and order.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub aspect_emb: Tensor,
    pub mem_emb: Tensor,
    pub ctx_emb: Tensor,
    pub attn: Tensor,
    pub w_out: Tensor,
    pub b_out: Tensor,
}

impl Gradients {
    pub fn zeros_like(params: &ModelParams) -> Gradients {
        Gradients {
            aspect_emb: Tensor::zeros(params.aspect_emb.shape()),
            mem_emb: Tensor::zeros(params.mem_emb.shape()),
            ctx_emb: Tensor::zeros(params.ctx_emb.shape()),
            attn: Tensor::zeros(params.attn.shape()),
            w_out: Tensor::zeros(params.w_out.shape()),
            b_out: Tensor::zeros(params.b_out.shape()),
        }
    }

    pub fn tensors(&self) -> [&Tensor; 6] {
        [
            &self.aspect_emb,
            &self.mem_emb,
            &self.ctx_emb,
            &self.attn,
            &self.w_out,
            &self.b_out,
        ]
    }

    pub fn zero(&mut self) {
        self.aspect_emb.fill(0.0);
        self.mem_emb.fill(0.0);
        self.ctx_emb.fill(0.0);
        self.attn.fill(0.0);
        self.w_out.fill(0.0);
        self.b_out.fill(0.0);
    }

    /// Multiply every gradient by a scalar (used for batch averaging).
    pub fn scale(&mut self, factor: f64) {
        self.aspect_emb.data_mut().iter_mut().for_each(|x| *x *= factor);
        self.mem_emb.data_mut().iter_mut().for_each(|x| *x *= factor);
        self.ctx_emb.data_mut().iter_mut().for_each(|x| *x *= factor);
        self.attn.data_mut().iter_mut().for_each(|x| *x *= factor);
        self.w_out.data_mut().iter_mut().for_each(|x| *x *= factor);
        self.b_out.data_mut().iter_mut().for_each(|x| *x *= factor);
    }
}

/// Dropout behaviour for one forward pass.
pub enum Dropout<'a> {
    /// Evaluation mode: no units dropped, no randomness consumed.
    Off,
    /// Inverted dropout: kept units are scaled by 1/(1-rate) so evaluation
    /// needs no rescaling. Applied to the memory and context embeddings and
    /// to (o + v).
    On { rate: f64, rng: &'a mut RngState },
}

/// Everything the forward pass computed, cached for backward and analysis.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// Eligible context positions, increasing.
    pub eligible: Vec<usize>,
    /// Raw attention scores; meaningful only at eligible positions.
    pub scores: Vec<f64>,
    /// Attention weights over all token positions; exactly 0 off support.
    pub alpha: Vec<f64>,
    /// Aspect representation v.
    pub v: Vec<f64>,
    /// Attention-weighted context representation o.
    pub o: Vec<f64>,
    /// (o + v) after dropout — the vector the output layer actually saw.
    pub s_dropped: Vec<f64>,
    /// Output layer activations.
    pub logits: Vec<f64>,
    /// Predicted distribution over the three classes.
    pub probs: Vec<f64>,
    /// Argmax class (ties to the lowest class code).
    pub pred: Sentiment,
    /// Post-dropout memory rows, parallel to `eligible`.
    m_tilde: Vec<Vec<f64>>,
    /// Post-dropout context rows, parallel to `eligible`.
    h_tilde: Vec<Vec<f64>>,
    /// Dropout scale vectors for memory rows (None when dropout off).
    drop_m: Option<Vec<Vec<f64>>>,
    /// Dropout scale vectors for context rows.
    drop_h: Option<Vec<Vec<f64>>>,
    /// Dropout scale vector for (o + v).
    drop_s: Option<Vec<f64>>,
}

impl ForwardTrace {
    /// The context vector h the output layer saw for eligible position
    /// `pos`, i.e. the post-dropout (and post-noise) context row.
    pub fn context_vector(&self, pos: usize) -> Option<&[f64]> {
        self.eligible
            .iter()
            .position(|&p| p == pos)
            .map(|j| self.h_tilde[j].as_slice())
    }
}

/// Context positions the attention may use: not aspect, not in `masked`,
/// and not the reserved mask token.
pub fn eligible_positions(instance: &Instance, masked: &[usize]) -> Vec<usize> {
    (0..instance.len())
        .filter(|&i| !instance.is_aspect(i) && !masked.contains(&i) && instance.tokens[i] != MASK_ID)
        .collect()
}

/// Additive perturbations of the input embeddings, one pair of d-vectors
/// (memory delta, context delta) per eligible position.
pub type ContextNoise = [(Vec<f64>, Vec<f64>)];

/// Run the model. `masked` positions are excluded from attention exactly as
/// if their tokens had been replaced by the mask token.
pub fn forward(
    params: &ModelParams,
    instance: &Instance,
    masked: &[usize],
    dropout: Dropout,
) -> Result<ForwardTrace> {
    forward_impl(params, instance, masked, dropout, None)
}

/// Run the model with additive noise on the eligible context words' input
/// embeddings (dropout off). `noise` must hold one (memory delta, context
/// delta) pair per eligible position, in position order.
pub fn forward_with_noise(
    params: &ModelParams,
    instance: &Instance,
    masked: &[usize],
    noise: &ContextNoise,
) -> Result<ForwardTrace> {
    forward_impl(params, instance, masked, Dropout::Off, Some(noise))
}

fn forward_impl(
    params: &ModelParams,
    instance: &Instance,
    masked: &[usize],
    dropout: Dropout,
    noise: Option<&ContextNoise>,
) -> Result<ForwardTrace> {
    let d = params.dim();
    let n = instance.len();
    for &t in &instance.tokens {
        if t >= params.vocab_size() {
            return Err(Error::InvalidArgument(format!(
                "token id {t} of instance {} outside vocabulary of {}",
                instance.id,
                params.vocab_size()
            )));
        }
    }

    let eligible = eligible_positions(instance, masked);
    if eligible.is_empty() {
        return Err(Error::FullyMasked {
            id: instance.id.clone(),
        });
    }
    if let Some(noise) = noise {
        if noise.len() != eligible.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} noise pairs for {} eligible positions",
                noise.len(),
                eligible.len()
            )));
        }
    }

    // Dropout masks are drawn for every token position in a fixed order
    // (all memory rows, then all context rows, then the output vector), so
    // the stream a training run consumes does not depend on which positions
    // happen to be eligible.
    let (drop_m, drop_h, drop_s) = match dropout {
        Dropout::Off => (None, None, None),
        Dropout::On { rate, rng } => {
            if !(0.0..1.0).contains(&rate) {
                return Err(Error::InvalidArgument(format!(
                    "dropout rate {rate} outside [0, 1)"
                )));
            }
            let keep = 1.0 / (1.0 - rate);
            let draw_rows = |rng: &mut RngState| -> Vec<Vec<f64>> {
                (0..n)
                    .map(|_| {
                        (0..d)
                            .map(|_| if rng.coin(rate) { 0.0 } else { keep })
                            .collect()
                    })
                    .collect()
            };
            let m = draw_rows(rng);
            let h = draw_rows(rng);
            let s: Vec<f64> = (0..d)
                .map(|_| if rng.coin(rate) { 0.0 } else { keep })
                .collect();
            (Some(m), Some(h), Some(s))
        }
    };

    // v: mean aspect embedding.
    let mut v = vec![0.0; d];
    for &j in &instance.aspect {
        for (vk, ak) in v.iter_mut().zip(params.aspect_emb.row(instance.tokens[j])) {
            *vk += ak;
        }
    }
    let inv_t = 1.0 / instance.aspect.len() as f64;
    v.iter_mut().for_each(|x| *x *= inv_t);

    // Post-dropout (and post-noise) memory and context rows per eligible
    // position.
    let mut m_tilde = Vec::with_capacity(eligible.len());
    let mut h_tilde = Vec::with_capacity(eligible.len());
    for (j, &pos) in eligible.iter().enumerate() {
        let tok = instance.tokens[pos];
        let mut m: Vec<f64> = params.mem_emb.row(tok).to_vec();
        let mut h: Vec<f64> = params.ctx_emb.row(tok).to_vec();
        if let Some(noise) = noise {
            let (nm, nh) = &noise[j];
            for (mk, nk) in m.iter_mut().zip(nm) {
                *mk += nk;
            }
            for (hk, nk) in h.iter_mut().zip(nh) {
                *hk += nk;
            }
        }
        if let (Some(dm), Some(dh)) = (&drop_m, &drop_h) {
            for (mk, sk) in m.iter_mut().zip(&dm[pos]) {
                *mk *= sk;
            }
            for (hk, sk) in h.iter_mut().zip(&dh[pos]) {
                *hk *= sk;
            }
        }
        m_tilde.push(m);
        h_tilde.push(h);
    }

    // Attention scores and weights.
    let mv = matvec_t(&params.attn, &v); // M' v, reused: score_i = (M'v) . m_i
    let mut scores = vec![0.0; n];
    for (j, &pos) in eligible.iter().enumerate() {
        scores[pos] = dot(&mv, &m_tilde[j]);
    }
    let ineligible: Vec<usize> = (0..n).filter(|p| !eligible.contains(p)).collect();
    let alpha = softmax_excluded(&scores, &ineligible)?;

    // Aspect-related sentence representation.
    let mut o = vec![0.0; d];
    for (j, &pos) in eligible.iter().enumerate() {
        for (ok, hk) in o.iter_mut().zip(&h_tilde[j]) {
            *ok += alpha[pos] * hk;
        }
    }

    let mut s_dropped: Vec<f64> = o.iter().zip(&v).map(|(a, b)| a + b).collect();
    if let Some(z) = &drop_s {
        for (sk, zk) in s_dropped.iter_mut().zip(z) {
            *sk *= zk;
        }
    }

    let mut logits = matvec(&params.w_out, &s_dropped);
    for (l, b) in logits.iter_mut().zip(params.b_out.data()) {
        *l += b;
    }
    let probs = softmax(&logits)?;
    if probs.iter().any(|p| !p.is_finite()) {
        return Err(Error::NumericalFailure {
            id: instance.id.clone(),
            detail: "non-finite prediction".to_string(),
        });
    }
    let pred = Sentiment::from_index(argmax(&probs)).expect("3 classes");

    let drop_m = drop_m.map(|rows| eligible.iter().map(|&p| rows[p].clone()).collect());
    let drop_h = drop_h.map(|rows| eligible.iter().map(|&p| rows[p].clone()).collect());
    Ok(ForwardTrace {
        eligible,
        scores,
        alpha,
        v,
        o,
        s_dropped,
        logits,
        probs,
        pred,
        m_tilde,
        h_tilde,
        drop_m,
        drop_h,
        drop_s,
    })
}

/// Cross-entropy of the trace against the instance's gold label, plus the
/// attention regularizer when supervision is given:
///
/// ```text
/// loss = -ln p[y] + gamma * sum_q (alpha_q - expected_q)^2
/// ```
pub fn loss_of(
    trace: &ForwardTrace,
    instance: &Instance,
    supervision: Option<(&ExpectedDistribution, f64)>,
) -> Result<f64> {
    let p_gold = trace.probs[instance.label.index()];
    let mut loss = -p_gold.ln();
    if let Some((expected, gamma)) = supervision {
        loss += gamma * crate::training::regularizer(&trace.alpha, expected);
    }
    if !loss.is_finite() {
        return Err(Error::NumericalFailure {
            id: instance.id.clone(),
            detail: format!("non-finite loss (gold probability {p_gold})"),
        });
    }
    Ok(loss)
}

/// Forward + backward, accumulating gradients into `grads` (which the caller
/// zeroes between batches). Returns the loss.
pub fn accumulate_loss_and_grads(
    params: &ModelParams,
    instance: &Instance,
    masked: &[usize],
    supervision: Option<(&ExpectedDistribution, f64)>,
    dropout: Dropout,
    grads: &mut Gradients,
) -> Result<f64> {
    let trace = forward(params, instance, masked, dropout)?;
    let loss = loss_of(&trace, instance, supervision)?;
    backward(params, instance, &trace, supervision, grads);
    Ok(loss)
}

/// Convenience wrapper returning freshly allocated gradients.
pub fn loss_and_grads(
    params: &ModelParams,
    instance: &Instance,
    masked: &[usize],
    supervision: Option<(&ExpectedDistribution, f64)>,
    dropout: Dropout,
) -> Result<(f64, Gradients)> {
    let mut grads = Gradients::zeros_like(params);
    let loss = accumulate_loss_and_grads(params, instance, masked, supervision, dropout, &mut grads)?;
    Ok((loss, grads))
}

/// Accumulate only the regularizer's gradients, read off the given trace.
/// Used when the regularizer is computed on a different forward pass than
/// the cross-entropy term.
pub(crate) fn accumulate_regularizer_grads(
    params: &ModelParams,
    instance: &Instance,
    trace: &ForwardTrace,
    expected: &ExpectedDistribution,
    gamma: f64,
    grads: &mut Gradients,
) {
    backward_impl(params, instance, trace, Some((expected, gamma)), false, grads);
}

/// Hand-derived backward pass for the loss of [`loss_of`].
fn backward(
    params: &ModelParams,
    instance: &Instance,
    trace: &ForwardTrace,
    supervision: Option<(&ExpectedDistribution, f64)>,
    grads: &mut Gradients,
) {
    backward_impl(params, instance, trace, supervision, true, grads);
}

fn backward_impl(
    params: &ModelParams,
    instance: &Instance,
    trace: &ForwardTrace,
    supervision: Option<(&ExpectedDistribution, f64)>,
    include_cross_entropy: bool,
    grads: &mut Gradients,
) {
    let d = params.dim();

    // d loss / d logits = p - onehot(y); zero when only the regularizer is
    // being backpropagated (its zeros flow through the output-layer terms).
    let mut dlogits = vec![0.0; trace.probs.len()];
    if include_cross_entropy {
        dlogits.copy_from_slice(&trace.probs);
        dlogits[instance.label.index()] -= 1.0;
    }

    // Output layer: logits = W_o s + b_o.
    for (c, &dl) in dlogits.iter().enumerate() {
        axpy_row(&mut grads.w_out, c, dl, &trace.s_dropped);
        grads.b_out.data_mut()[c] += dl;
    }
    let mut ds = matvec_t(&params.w_out, &dlogits);
    if let Some(z) = &trace.drop_s {
        for (dsk, zk) in ds.iter_mut().zip(z) {
            *dsk *= zk;
        }
    }
    // s = o + v: gradient flows to both.
    let mut dv = ds.clone();
    let d_o = ds;

    // o = sum alpha_i h_i.
    let mut dalpha = vec![0.0; instance.len()];
    for (j, &pos) in trace.eligible.iter().enumerate() {
        dalpha[pos] = dot(&d_o, &trace.h_tilde[j]);
    }
    // Regularizer: gamma * sum_q (alpha_q - expected_q)^2 over supervised
    // positions. Ineligible supervised positions have constant alpha = 0 and
    // contribute nothing (handled by the softmax backward reaching only
    // eligible positions).
    if let Some((expected, gamma)) = supervision {
        for &(pos, want) in expected.entries() {
            dalpha[pos] += 2.0 * gamma * (trace.alpha[pos] - want);
        }
    }

    // Softmax backward restricted to the support:
    // dscore_i = alpha_i (dalpha_i - sum_j alpha_j dalpha_j).
    let inner: f64 = trace
        .eligible
        .iter()
        .map(|&p| trace.alpha[p] * dalpha[p])
        .sum();
    let mv = matvec_t(&params.attn, &trace.v); // M'v

    let mut dmv = vec![0.0; d]; // gradient w.r.t. (M'v)
    for (j, &pos) in trace.eligible.iter().enumerate() {
        let dscore = trace.alpha[pos] * (dalpha[pos] - inner);
        if dscore == 0.0 {
            // Saves the embedding-row updates for positions softmax zeroed.
            continue;
        }
        // score = (M'v) . m_tilde: gradient to both factors.
        for (a, mk) in dmv.iter_mut().zip(&trace.m_tilde[j]) {
            *a += dscore * mk;
        }
        let tok = instance.tokens[pos];
        match &trace.drop_m {
            Some(masks) => {
                let row = grads.mem_emb.row_mut(tok);
                for k in 0..d {
                    row[k] += dscore * mv[k] * masks[j][k];
                }
            }
            None => axpy_row(&mut grads.mem_emb, tok, dscore, &mv),
        }
    }
    // (M'v): gradient to M and to v. d/dM[a][b] of (M'v).m collapses to
    // dM[a][b] += v[a] * dmv[b]; d/dv += M dmv.
    for a in 0..d {
        let va = trace.v[a];
        let row = grads.attn.row_mut(a);
        for (b, dmb) in dmv.iter().enumerate() {
            row[b] += va * dmb;
        }
    }
    let dv_from_scores = matvec(&params.attn, &dmv);
    for (dvk, x) in dv.iter_mut().zip(&dv_from_scores) {
        *dvk += x;
    }

    // Context rows: dh_i = alpha_i * d_o (through dropout mask).
    for (j, &pos) in trace.eligible.iter().enumerate() {
        let a = trace.alpha[pos];
        if a == 0.0 {
            continue;
        }
        let tok = instance.tokens[pos];
        match &trace.drop_h {
            Some(masks) => {
                let row = grads.ctx_emb.row_mut(tok);
                for k in 0..d {
                    row[k] += a * d_o[k] * masks[j][k];
                }
            }
            None => axpy_row(&mut grads.ctx_emb, tok, a, &d_o),
        }
    }

    // Aspect rows: v is the mean over aspect positions.
    let inv_t = 1.0 / instance.aspect.len() as f64;
    for &j in &instance.aspect {
        axpy_row(&mut grads.aspect_emb, instance.tokens[j], inv_t, &dv);
    }
}

/// Gradient of `ln p[class]` with respect to each eligible position's
/// context vector h, parallel to `trace.eligible`. Within one forward, h
/// influences the logits only through `o`, so the gradient is
/// `alpha_i * z * W_o' (onehot(class) - p)`.
pub fn logprob_grad_wrt_context(
    params: &ModelParams,
    trace: &ForwardTrace,
    class: Sentiment,
) -> Vec<Vec<f64>> {
    let mut dlogits: Vec<f64> = trace.probs.iter().map(|p| -p).collect();
    dlogits[class.index()] += 1.0;
    let mut ds = matvec_t(&params.w_out, &dlogits);
    if let Some(z) = &trace.drop_s {
        for (dsk, zk) in ds.iter_mut().zip(z) {
            *dsk *= zk;
        }
    }
    trace
        .eligible
        .iter()
        .map(|&pos| ds.iter().map(|x| trace.alpha[pos] * x).collect())
        .collect()
}

/// Evaluate an instance with dropout off.
pub fn predict(params: &ModelParams, instance: &Instance) -> Result<ForwardTrace> {
    forward(params, instance, &[], Dropout::Off)
}

const CHECKPOINT_MAGIC: &[u8; 8] = b"ABSAMNW\0";
const CHECKPOINT_VERSION: u32 = 1;

/// Write a checkpoint: magic, format version, d, |V|, vocabulary hash, then
/// the tensors in declared order as little-endian 32-bit floats.
pub fn save_checkpoint(params: &ModelParams, path: &Path, vocab_hash: u64) -> Result<()> {
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    out.write_all(CHECKPOINT_MAGIC)?;
    out.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    out.write_all(&(params.dim() as u32).to_le_bytes())?;
    out.write_all(&(params.vocab_size() as u64).to_le_bytes())?;
    out.write_all(&vocab_hash.to_le_bytes())?;
    for tensor in params.tensors() {
        for &x in tensor.data() {
            out.write_all(&(x as f32).to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Read a checkpoint, verifying the magic, version, and vocabulary hash.
pub fn load_checkpoint(path: &Path, expected_vocab_hash: u64) -> Result<ModelParams> {
    let mut input = BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic).map_err(|_| truncated(path))?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(Error::BadCheckpoint(format!(
            "{} is not a model checkpoint",
            path.display()
        )));
    }
    let version = read_u32(&mut input, path)?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::BadCheckpoint(format!(
            "unsupported checkpoint version {version}"
        )));
    }
    let dim = read_u32(&mut input, path)? as usize;
    let vocab_size = read_u64(&mut input, path)? as usize;
    let vocab_hash = read_u64(&mut input, path)?;
    if vocab_hash != expected_vocab_hash {
        return Err(Error::BadCheckpoint(format!(
            "vocabulary hash mismatch: checkpoint {vocab_hash:016x}, expected {expected_vocab_hash:016x}"
        )));
    }

    let shapes: [Vec<usize>; 6] = [
        vec![vocab_size, dim],
        vec![vocab_size, dim],
        vec![vocab_size, dim],
        vec![dim, dim],
        vec![NUM_CLASSES, dim],
        vec![NUM_CLASSES],
    ];
    let mut tensors = Vec::with_capacity(6);
    for shape in &shapes {
        let numel: usize = shape.iter().product();
        let mut data = Vec::with_capacity(numel);
        let mut buf = [0u8; 4];
        for _ in 0..numel {
            input.read_exact(&mut buf).map_err(|_| truncated(path))?;
            data.push(f32::from_le_bytes(buf) as f64);
        }
        tensors.push(Tensor::from_vec(shape, data)?);
    }
    let mut rest = [0u8; 1];
    if input.read(&mut rest)? != 0 {
        return Err(Error::BadCheckpoint(format!(
            "{} has trailing bytes",
            path.display()
        )));
    }
    ModelParams::from_tensor_vec(&tensors)
}

fn truncated(path: &Path) -> Error {
    Error::BadCheckpoint(format!("{} is truncated", path.display()))
}

fn read_u32(input: &mut impl Read, path: &Path) -> Result<u32> {
    let mut buf = [0u8; 4];
    input.read_exact(&mut buf).map_err(|_| truncated(path))?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64(input: &mut impl Read, path: &Path) -> Result<u64> {
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf).map_err(|_| truncated(path))?;
    Ok(u64::from_le_bytes(buf))
}

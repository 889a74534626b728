//! Crate-wide error type.
//!
//! Every fallible operation in the library returns [`Result`]. Variants carry
//! enough context (file positions, instance ids, epoch/batch counters) that a
//! CLI user can act on the message without a stack trace.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A softmax was requested over a score vector in which every index is
    /// excluded, so there is no support to normalize over.
    #[error("empty support: all {0} positions are excluded from the softmax")]
    EmptySupport(usize),

    /// A probability vector handed to an entropy or divergence computation
    /// was not a distribution (negative mass, or mass not summing to 1).
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// A loss evaluation during gradient checking produced a non-finite
    /// value, so finite differences are meaningless at this point.
    #[error("unstable point: loss is not finite at the evaluation point")]
    UnstablePoint,

    /// Tensor shapes disagree with what an operation requires.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// An instance has no eligible context positions left: everything is an
    /// aspect word or already masked, so the attention has nothing to attend
    /// over.
    #[error("fully masked: instance {id} has no eligible context positions")]
    FullyMasked { id: String },

    /// A forward or saliency computation produced NaN/inf for an instance.
    #[error("numerical failure on instance {id}: {detail}")]
    NumericalFailure { id: String, detail: String },

    /// Training produced a non-finite loss and was aborted.
    #[error("training diverged: non-finite loss at epoch {epoch}, batch {batch}")]
    Diverged { epoch: usize, batch: usize },

    /// The XML of a sentence-level review file could not be parsed.
    #[error("malformed xml: {0}")]
    MalformedXml(String),

    /// A character span recorded for an aspect term does not line up with any
    /// token produced by the tokenizer.
    #[error("aspect span misaligned in sentence {sentence_id}: {detail}")]
    SpanMisaligned { sentence_id: String, detail: String },

    /// A record in a line-oriented input file is structurally broken.
    #[error("bad record at {path}:{line}: {detail}")]
    BadRecord {
        path: String,
        line: usize,
        detail: String,
    },

    /// A dataset, vocabulary, or supervision file failed a consistency check
    /// (empty corpus, out-of-range positions, overlapping word sets, ...).
    #[error("invalid data: {0}")]
    InvalidData(String),

    /// A checkpoint file is unreadable or belongs to a different model /
    /// vocabulary than the one it is being loaded into.
    #[error("bad checkpoint: {0}")]
    BadCheckpoint(String),

    /// A configuration file or flag value is unusable (unknown key, value out
    /// of range). The CLI maps this to its usage-error exit code.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// An argument violated a documented precondition of a library call.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors that indicate misuse of the command line rather than a
    /// failure while doing real work.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::InvalidConfig(_))
    }
}

//! Loader for whitespace-delimited word-vector text files
//! (`word v1 v2 ... v_dim`, one word per line).

use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::data::vocab::Vocabulary;
use crate::error::{Error, Result};
use crate::numerics::{RngState, Tensor};

/// Half-width of the uniform range used for words without a pre-trained row.
const OOV_RANGE: f64 = 0.25;

/// Build a `|V| × dim` embedding matrix: rows for words present in the file
/// are copied verbatim; every other row — including the reserved mask and
/// unknown tokens — is drawn from Uniform[-0.25, 0.25).
///
/// Rows are randomized in increasing id order, so the result is a pure
/// function of (file, vocab, dim, seed). If a word repeats in the file the
/// first occurrence wins. A line whose field count is not `1 + dim` is an
/// error naming the line.
pub fn load_embeddings(
    path: &Path,
    vocab: &Vocabulary,
    dim: usize,
    rng: &mut RngState,
) -> Result<Tensor> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut matrix = Tensor::zeros(&[vocab.len(), dim]);
    let mut filled = vec![false; vocab.len()];

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |detail: String| Error::BadRecord {
            path: path.display().to_string(),
            line: lineno + 1,
            detail,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != dim + 1 {
            return Err(bad(format!(
                "expected word + {dim} values, found {} fields",
                fields.len()
            )));
        }
        let Some(id) = vocab.id(fields[0]) else {
            continue;
        };
        if filled[id] {
            continue;
        }
        for (j, field) in fields[1..].iter().enumerate() {
            let value: f64 = field
                .parse()
                .map_err(|_| bad(format!("unparseable value {field:?} in column {}", j + 2)))?;
            *matrix.at_mut(id, j) = value;
        }
        filled[id] = true;
    }

    for (id, was_filled) in filled.iter().enumerate() {
        if !was_filled {
            for x in matrix.row_mut(id) {
                *x = rng.uniform(-OOV_RANGE, OOV_RANGE);
            }
        }
    }
    Ok(matrix)
}

/// A fully random embedding matrix, equivalent to loading an empty file:
/// every row Uniform[-0.25, 0.25).
pub fn random_embeddings(vocab_size: usize, dim: usize, rng: &mut RngState) -> Tensor {
    let mut matrix = Tensor::zeros(&[vocab_size, dim]);
    rng.fill_uniform(&mut matrix, -OOV_RANGE, OOV_RANGE);
    matrix
}

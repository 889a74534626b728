//! Normalized on-disk corpus (one JSON object per line: id, tokens, aspect,
//! label), the held-out split, and content hashing.

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::data::instance::{RawInstance, Sentiment};
use crate::error::{Error, Result};
use crate::numerics::{fnv1a64, RngState};

/// Write instances as JSON lines in the given order.
pub fn save_corpus(path: &Path, instances: &[RawInstance]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for inst in instances {
        serde_json::to_writer(&mut out, inst)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Read a normalized corpus, validating every instance and id uniqueness.
pub fn load_corpus(path: &Path) -> Result<Vec<RawInstance>> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut instances = Vec::new();
    let mut seen = HashSet::new();
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
        let inst: RawInstance = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        inst.validate()?;
        if !seen.insert(inst.id.clone()) {
            return Err(bad(format!("duplicate instance id {}", inst.id)));
        }
        instances.push(inst);
    }
    Ok(instances)
}

/// FNV-1a hash of a file's bytes; ties mining logs and reports to the exact
/// corpus they were produced from.
pub fn file_hash(path: &Path) -> Result<u64> {
    Ok(fnv1a64(&std::fs::read(path)?))
}

/// Per-class instance counts in class-code order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassCounts {
    pub positive: usize,
    pub negative: usize,
    pub neutral: usize,
}

impl ClassCounts {
    pub fn of(instances: &[RawInstance]) -> ClassCounts {
        let mut counts = [0usize; 3];
        for inst in instances {
            counts[inst.label.index()] += 1;
        }
        ClassCounts {
            positive: counts[Sentiment::Positive.index()],
            negative: counts[Sentiment::Negative.index()],
            neutral: counts[Sentiment::Neutral.index()],
        }
    }

    pub fn total(&self) -> usize {
        self.positive + self.negative + self.neutral
    }
}

impl fmt::Display for ClassCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Pos {} Neg {} Neu {} (total {})",
            self.positive,
            self.negative,
            self.neutral,
            self.total()
        )
    }
}

/// Randomly hold out `round(N * fraction)` instances for validation.
///
/// Both returned halves preserve the original corpus order; the split is a
/// pure function of (instances, fraction, seed). Fewer than 5 instances is
/// an error — a split that small cannot support tuning.
pub fn split_heldout(
    instances: &[RawInstance],
    fraction: f64,
    rng: &mut RngState,
) -> Result<(Vec<RawInstance>, Vec<RawInstance>)> {
    if !(0.0..1.0).contains(&fraction) || fraction == 0.0 {
        return Err(Error::InvalidArgument(format!(
            "held-out fraction {fraction} outside (0, 1)"
        )));
    }
    if instances.len() < 5 {
        return Err(Error::InvalidData(format!(
            "corpus of {} instances is too small to split",
            instances.len()
        )));
    }
    let n = instances.len();
    let heldout = (n as f64 * fraction).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut order);
    let heldout_set: HashSet<usize> = order[..heldout].iter().copied().collect();

    let mut train = Vec::with_capacity(n - heldout);
    let mut validation = Vec::with_capacity(heldout);
    for (i, inst) in instances.iter().enumerate() {
        if heldout_set.contains(&i) {
            validation.push(inst.clone());
        } else {
            train.push(inst.clone());
        }
    }
    Ok((train, validation))
}

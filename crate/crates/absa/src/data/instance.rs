//! Core instance types: sentiment labels, raw (string-token) and encoded
//! (id-token) instances, masking, and per-instance supervision sets.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::vocab::MASK_ID;
use crate::error::{Error, Result};

/// Three-way sentiment polarity with stable integer codes 0/1/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sentiment {
    Positive,
    Negative,
    Neutral,
}

/// Number of sentiment classes.
pub const NUM_CLASSES: usize = 3;

impl Sentiment {
    /// Stable class code: Positive 0, Negative 1, Neutral 2.
    pub fn index(self) -> usize {
        match self {
            Sentiment::Positive => 0,
            Sentiment::Negative => 1,
            Sentiment::Neutral => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Sentiment> {
        match i {
            0 => Some(Sentiment::Positive),
            1 => Some(Sentiment::Negative),
            2 => Some(Sentiment::Neutral),
            _ => None,
        }
    }

    /// All classes in code order.
    pub fn all() -> [Sentiment; 3] {
        [Sentiment::Positive, Sentiment::Negative, Sentiment::Neutral]
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sentiment::Positive => "positive",
            Sentiment::Negative => "negative",
            Sentiment::Neutral => "neutral",
        }
    }
}

impl fmt::Display for Sentiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Sentiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Sentiment> {
        match s {
            "positive" => Ok(Sentiment::Positive),
            "negative" => Ok(Sentiment::Negative),
            "neutral" => Ok(Sentiment::Neutral),
            other => Err(Error::InvalidData(format!("unknown sentiment {other:?}"))),
        }
    }
}

/// An instance before vocabulary encoding: string tokens, aspect token
/// positions, gold label, and a stable id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawInstance {
    pub id: String,
    pub tokens: Vec<String>,
    pub aspect: Vec<usize>,
    pub label: Sentiment,
}

impl RawInstance {
    /// Structural checks shared by loaders and the corpus reader.
    pub fn validate(&self) -> Result<()> {
        if self.tokens.is_empty() {
            return Err(Error::InvalidData(format!(
                "instance {} has no tokens",
                self.id
            )));
        }
        if self.aspect.is_empty() {
            return Err(Error::InvalidData(format!(
                "instance {} has no aspect positions",
                self.id
            )));
        }
        for w in self.aspect.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::InvalidData(format!(
                    "instance {} aspect positions not strictly increasing",
                    self.id
                )));
            }
        }
        if *self.aspect.last().expect("non-empty") >= self.tokens.len() {
            return Err(Error::InvalidData(format!(
                "instance {} aspect position out of range",
                self.id
            )));
        }
        Ok(())
    }
}

/// An instance encoded against a vocabulary: tokens are word ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub id: String,
    pub tokens: Vec<usize>,
    pub aspect: Vec<usize>,
    pub label: Sentiment,
}

impl Instance {
    /// Number of token positions.
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn is_aspect(&self, pos: usize) -> bool {
        self.aspect.binary_search(&pos).is_ok()
    }
}

/// Return a copy of `instance` with the tokens at `positions` replaced by the
/// mask id. The input instance is not modified; an empty position list
/// returns an identical copy.
///
/// Positions must be in range and must not be aspect positions.
pub fn apply_mask(instance: &Instance, positions: &[usize]) -> Result<Instance> {
    let mut out = instance.clone();
    for &p in positions {
        if p >= out.tokens.len() {
            return Err(Error::InvalidArgument(format!(
                "mask position {p} out of range for instance {} (len {})",
                instance.id,
                out.tokens.len()
            )));
        }
        if instance.is_aspect(p) {
            return Err(Error::InvalidArgument(format!(
                "mask position {p} is an aspect position of instance {}",
                instance.id
            )));
        }
        out.tokens[p] = MASK_ID;
    }
    Ok(out)
}

/// Supervision word sets for one instance. Positions are stored in
/// extraction order (the order mining appended them), never sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupervisionSets {
    pub s_a: Vec<usize>,
    pub s_m: Vec<usize>,
}

impl SupervisionSets {
    pub fn is_empty(&self) -> bool {
        self.s_a.is_empty() && self.s_m.is_empty()
    }

    /// All supervised positions, active first, in extraction order.
    pub fn union(&self) -> Vec<usize> {
        self.s_a.iter().chain(&self.s_m).copied().collect()
    }

    pub fn contains(&self, pos: usize) -> bool {
        self.s_a.contains(&pos) || self.s_m.contains(&pos)
    }

    /// Check disjointness and bounds against an instance.
    pub fn validate(&self, instance: &Instance) -> Result<()> {
        for &p in self.s_a.iter().chain(&self.s_m) {
            if p >= instance.len() {
                return Err(Error::InvalidData(format!(
                    "supervision position {p} out of range for instance {}",
                    instance.id
                )));
            }
            if instance.is_aspect(p) {
                return Err(Error::InvalidData(format!(
                    "supervision position {p} is an aspect position of instance {}",
                    instance.id
                )));
            }
        }
        for &p in &self.s_a {
            if self.s_m.contains(&p) {
                return Err(Error::InvalidData(format!(
                    "position {p} appears in both supervision sets of instance {}",
                    instance.id
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct SupervisionRecord {
    id: String,
    s_a: Vec<usize>,
    s_m: Vec<usize>,
}

/// Supervision sets for a whole corpus, keyed by instance id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SupervisionState {
    map: BTreeMap<String, SupervisionSets>,
}

impl SupervisionState {
    pub fn new() -> SupervisionState {
        SupervisionState::default()
    }

    /// Sets for an instance; absent means both sets empty.
    pub fn get(&self, id: &str) -> Option<&SupervisionSets> {
        self.map.get(id)
    }

    /// Mutable sets for an instance, created empty on first access.
    pub fn sets_mut(&mut self, id: &str) -> &mut SupervisionSets {
        self.map.entry(id.to_string()).or_default()
    }

    /// Number of instances with at least one extracted position.
    pub fn supervised_count(&self) -> usize {
        self.map.values().filter(|s| !s.is_empty()).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &SupervisionSets)> {
        self.map.iter()
    }

    /// Write one JSON object per instance (sorted by id) with fields
    /// `id`, `s_a`, `s_m`.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        for (id, sets) in &self.map {
            let record = SupervisionRecord {
                id: id.clone(),
                s_a: sets.s_a.clone(),
                s_m: sets.s_m.clone(),
            };
            serde_json::to_writer(&mut out, &record)?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<SupervisionState> {
        let reader = BufReader::new(std::fs::File::open(path)?);
        let mut state = SupervisionState::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: SupervisionRecord =
                serde_json::from_str(&line).map_err(|e| Error::BadRecord {
                    path: path.display().to_string(),
                    line: lineno + 1,
                    detail: e.to_string(),
                })?;
            if state.map.contains_key(&record.id) {
                return Err(Error::BadRecord {
                    path: path.display().to_string(),
                    line: lineno + 1,
                    detail: format!("duplicate instance id {}", record.id),
                });
            }
            state.map.insert(
                record.id,
                SupervisionSets {
                    s_a: record.s_a,
                    s_m: record.s_m,
                },
            );
        }
        Ok(state)
    }
}

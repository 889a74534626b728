//! Vocabulary: word ↔ id bijection with reserved mask/unknown entries.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::data::instance::{Instance, RawInstance};
use crate::error::{Error, Result};
use crate::numerics::fnv1a64;

/// Token written in place of masked words. The tokenizer lowercases and
/// splits punctuation, so no data token can ever collide with it.
pub const MASK_TOKEN: &str = "<mask>";
/// Token for words outside the vocabulary.
pub const UNK_TOKEN: &str = "<unk>";

/// Reserved id of [`MASK_TOKEN`]; the model treats this id as carrying no
/// signal.
pub const MASK_ID: usize = 0;
/// Reserved id of [`UNK_TOKEN`].
pub const UNK_ID: usize = 1;

/// Word ↔ id bijection. Ids are contiguous from 0, with the mask and unknown
/// tokens pinned at 0 and 1 and the rest ordered by descending frequency,
/// ties broken lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Build from a corpus, keeping tokens whose frequency is at least
    /// `min_count`. The corpus must be non-empty.
    pub fn build(instances: &[RawInstance], min_count: usize) -> Result<Vocabulary> {
        if instances.is_empty() {
            return Err(Error::InvalidData(
                "cannot build a vocabulary from an empty corpus".to_string(),
            ));
        }
        if min_count < 1 {
            return Err(Error::InvalidArgument(
                "min_count must be at least 1".to_string(),
            ));
        }
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for inst in instances {
            for tok in &inst.tokens {
                *counts.entry(tok.as_str()).or_insert(0) += 1;
            }
        }
        let mut kept: Vec<(&str, usize)> = counts
            .into_iter()
            .filter(|(_, c)| *c >= min_count)
            .collect();
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));

        let mut words = Vec::with_capacity(kept.len() + 2);
        words.push(MASK_TOKEN.to_string());
        words.push(UNK_TOKEN.to_string());
        words.extend(kept.into_iter().map(|(w, _)| w.to_string()));
        Ok(Vocabulary::from_words(words))
    }

    fn from_words(words: Vec<String>) -> Vocabulary {
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Vocabulary { words, index }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    /// Id of `word`, falling back to the unknown id.
    pub fn id_or_unk(&self, word: &str) -> usize {
        self.id(word).unwrap_or(UNK_ID)
    }

    pub fn word(&self, id: usize) -> &str {
        &self.words[id]
    }

    /// Encode a raw instance to vocabulary ids, mapping unseen words to the
    /// unknown id. Validates the instance first.
    pub fn encode(&self, raw: &RawInstance) -> Result<Instance> {
        raw.validate()?;
        Ok(Instance {
            id: raw.id.clone(),
            tokens: raw.tokens.iter().map(|t| self.id_or_unk(t)).collect(),
            aspect: raw.aspect.clone(),
            label: raw.label,
        })
    }

    /// The token strings of an encoded instance.
    pub fn decode(&self, instance: &Instance) -> Vec<String> {
        instance
            .tokens
            .iter()
            .map(|&id| self.words[id].clone())
            .collect()
    }

    /// Content hash over the word list; embedded in checkpoints so a model
    /// can never be loaded against the wrong vocabulary.
    pub fn content_hash(&self) -> u64 {
        fnv1a64(self.words.join("\n").as_bytes())
    }

    /// One word per line, line number = id.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        for w in &self.words {
            writeln!(out, "{w}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Vocabulary> {
        let reader = BufReader::new(std::fs::File::open(path)?);
        let mut words = Vec::new();
        for line in reader.lines() {
            words.push(line?);
        }
        if words.len() < 2 || words[MASK_ID] != MASK_TOKEN || words[UNK_ID] != UNK_TOKEN {
            return Err(Error::InvalidData(format!(
                "vocabulary file {} does not start with the reserved tokens",
                path.display()
            )));
        }
        let vocab = Vocabulary::from_words(words);
        if vocab.index.len() != vocab.words.len() {
            return Err(Error::InvalidData(format!(
                "vocabulary file {} contains duplicate words",
                path.display()
            )));
        }
        Ok(vocab)
    }
}

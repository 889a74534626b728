//! Tokenizer shared by every loader: lowercase, split on whitespace, and
//! break punctuation into single-character tokens.
//!
//! Tokens carry character offsets into the original string so aspect-term
//! character spans can be aligned to token positions.

/// A token with its half-open character span `[start, end)` in the original
/// (pre-lowercasing) string. Offsets count Unicode scalar values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

/// Tokenize a sentence. Runs of alphanumeric characters (plus any mark
/// characters attached to them) form word tokens; every other non-whitespace
/// character becomes a single-character token; whitespace only separates.
/// Token text is lowercased.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut word = String::new();
    let mut word_start = 0usize;

    let flush = |tokens: &mut Vec<Token>, word: &mut String, start: usize, end: usize| {
        if !word.is_empty() {
            tokens.push(Token {
                text: std::mem::take(word),
                start,
                end,
            });
        }
    };

    for (i, c) in text.chars().enumerate() {
        if c.is_alphanumeric() {
            if word.is_empty() {
                word_start = i;
            }
            word.extend(c.to_lowercase());
        } else {
            flush(&mut tokens, &mut word, word_start, i);
            if !c.is_whitespace() {
                tokens.push(Token {
                    text: c.to_lowercase().collect(),
                    start: i,
                    end: i + 1,
                });
            }
        }
    }
    let total = text.chars().count();
    flush(&mut tokens, &mut word, word_start, total);
    tokens
}

/// Just the token strings, for callers that don't need spans.
pub fn tokenize_words(text: &str) -> Vec<String> {
    tokenize(text).into_iter().map(|t| t.text).collect()
}

/// Positions of the tokens that overlap the character span `[from, to)`.
/// A span that cuts through the middle of a token expands to cover that
/// whole token. Returns an empty vector when nothing overlaps.
pub fn positions_overlapping(tokens: &[Token], from: usize, to: usize) -> Vec<usize> {
    tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| t.start < to && t.end > from)
        .map(|(i, _)| i)
        .collect()
}

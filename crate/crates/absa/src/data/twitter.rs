//! Loader for the 3-line tweet format: a sentence containing the `$T$`
//! placeholder, the target string, and a label in {1, -1, 0}.

use std::path::Path;

use crate::data::instance::{RawInstance, Sentiment};
use crate::data::tokenize::{positions_overlapping, tokenize};
use crate::error::{Error, Result};

const PLACEHOLDER: &str = "$T$";

/// Load repeating 3-line records. The placeholder is replaced by the target
/// string (every occurrence), and the aspect positions are the tokens the
/// substituted target spans. Labels map 1 → Positive, -1 → Negative,
/// 0 → Neutral. Instance ids are `"t{record index}"`.
pub fn load_twitter_3line(path: &Path) -> Result<Vec<RawInstance>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines: Vec<&str> = text.lines().collect();
    while lines.last().is_some_and(|l| l.trim().is_empty()) {
        lines.pop();
    }
    if lines.len() % 3 != 0 {
        return Err(Error::BadRecord {
            path: path.display().to_string(),
            line: lines.len(),
            detail: format!("{} lines is not a multiple of 3", lines.len()),
        });
    }

    let mut instances = Vec::with_capacity(lines.len() / 3);
    for (record, chunk) in lines.chunks(3).enumerate() {
        let (template, target, label_text) = (chunk[0], chunk[1].trim(), chunk[2].trim());
        let first_line = record * 3 + 1;
        let bad = |line_offset: usize, detail: String| Error::BadRecord {
            path: path.display().to_string(),
            line: first_line + line_offset,
            detail,
        };

        let label = match label_text {
            "1" => Sentiment::Positive,
            "-1" => Sentiment::Negative,
            "0" => Sentiment::Neutral,
            other => return Err(bad(2, format!("unknown label {other:?}"))),
        };
        if !template.contains(PLACEHOLDER) {
            return Err(bad(0, format!("sentence contains no {PLACEHOLDER}")));
        }

        // Substitute the target for each placeholder, recording the character
        // span each substitution occupies in the final sentence.
        let mut sentence = String::new();
        let mut chars_so_far = 0usize;
        let mut spans: Vec<(usize, usize)> = Vec::new();
        let target_chars = target.chars().count();
        let mut pieces = template.split(PLACEHOLDER).peekable();
        while let Some(piece) = pieces.next() {
            sentence.push_str(piece);
            chars_so_far += piece.chars().count();
            if pieces.peek().is_some() {
                sentence.push_str(target);
                spans.push((chars_so_far, chars_so_far + target_chars));
                chars_so_far += target_chars;
            }
        }

        let tokens = tokenize(&sentence);
        let mut aspect: Vec<usize> = spans
            .iter()
            .flat_map(|&(from, to)| positions_overlapping(&tokens, from, to))
            .collect();
        aspect.sort_unstable();
        aspect.dedup();
        if aspect.is_empty() {
            return Err(bad(1, format!("target {target:?} spans no token")));
        }

        let instance = RawInstance {
            id: format!("t{record}"),
            tokens: tokens.into_iter().map(|t| t.text).collect(),
            aspect,
            label,
        };
        instance.validate()?;
        instances.push(instance);
    }
    Ok(instances)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_file(body: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "{body}").unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn substitutes_target_and_finds_aspect_positions() {
        let f = write_file("i love $T$ !\napple\n1\n");
        let got = load_twitter_3line(f.path()).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].id, "t0");
        assert_eq!(got[0].tokens, vec!["i", "love", "apple", "!"]);
        assert_eq!(got[0].aspect, vec![2]);
        assert_eq!(got[0].label, Sentiment::Positive);
    }

    #[test]
    fn multi_word_target_covers_multiple_positions() {
        let f = write_file("the $T$ was -1 star\nsteve jobs keynote\n-1\n");
        let got = load_twitter_3line(f.path()).unwrap();
        assert_eq!(
            got[0].tokens,
            vec!["the", "steve", "jobs", "keynote", "was", "-", "1", "star"]
        );
        assert_eq!(got[0].aspect, vec![1, 2, 3]);
        assert_eq!(got[0].label, Sentiment::Negative);
    }

    #[test]
    fn all_three_labels_parse() {
        let f = write_file("$T$ rocks\na\n1\n$T$ sucks\nb\n-1\n$T$ exists\nc\n0\n");
        let got = load_twitter_3line(f.path()).unwrap();
        let labels: Vec<Sentiment> = got.iter().map(|i| i.label).collect();
        assert_eq!(
            labels,
            vec![Sentiment::Positive, Sentiment::Negative, Sentiment::Neutral]
        );
        assert_eq!(got[2].id, "t2");
    }

    #[test]
    fn repeated_placeholder_marks_every_occurrence() {
        let f = write_file("$T$ vs $T$ again\nandroid\n0\n");
        let got = load_twitter_3line(f.path()).unwrap();
        assert_eq!(got[0].tokens, vec!["android", "vs", "android", "again"]);
        assert_eq!(got[0].aspect, vec![0, 2]);
    }

    #[test]
    fn line_count_not_divisible_by_three_is_an_error() {
        let f = write_file("only $T$ here\ntarget\n");
        let err = load_twitter_3line(f.path()).unwrap_err();
        assert!(err.to_string().contains("multiple of 3"), "{err}");
    }

    #[test]
    fn unknown_label_reports_its_line() {
        let f = write_file("fine $T$\nphone\n2\n");
        let err = load_twitter_3line(f.path()).unwrap_err();
        assert!(err.to_string().contains("unknown label"), "{err}");
        assert!(err.to_string().contains(":3"), "{err}");
    }

    #[test]
    fn missing_placeholder_is_an_error() {
        let f = write_file("no placeholder here\nphone\n0\n");
        let err = load_twitter_3line(f.path()).unwrap_err();
        assert!(err.to_string().contains("$T$"), "{err}");
    }

    #[test]
    fn trailing_blank_lines_are_tolerated() {
        let f = write_file("ok $T$\nscreen\n0\n\n\n");
        assert_eq!(load_twitter_3line(f.path()).unwrap().len(), 1);
    }
}

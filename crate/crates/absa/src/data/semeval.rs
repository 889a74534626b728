//! Loader for the sentence-level XML review format used by the 2014 aspect
//! task: `<sentences><sentence id><text>...</text><aspectTerms><aspectTerm
//! term polarity from to/>...`.

use std::path::Path;

use crate::data::instance::{RawInstance, Sentiment};
use crate::data::tokenize::{positions_overlapping, tokenize};
use crate::error::{Error, Result};

/// Load every (sentence, aspect term) pair as one instance.
///
/// * Aspect character offsets are aligned to token positions by expanding to
///   every overlapping token; a span overlapping nothing is an error naming
///   the sentence id.
/// * Aspect terms labeled `conflict` are dropped.
/// * Sentences without aspect terms are skipped.
/// * Instance ids are `"{sentence id}:{term index}"` with the index counting
///   all aspect terms of the sentence, so ids are stable under filtering.
pub fn load_semeval_xml(path: &Path) -> Result<Vec<RawInstance>> {
    let text = std::fs::read_to_string(path)?;
    let doc = roxmltree::Document::parse(&text)
        .map_err(|e| Error::MalformedXml(format!("{}: {e}", path.display())))?;

    let mut instances = Vec::new();
    for sentence in doc
        .root_element()
        .children()
        .filter(|n| n.has_tag_name("sentence"))
    {
        let sid = sentence.attribute("id").unwrap_or("?").to_string();
        let Some(sentence_text) = sentence
            .children()
            .find(|n| n.has_tag_name("text"))
            .and_then(|n| n.text())
        else {
            return Err(Error::MalformedXml(format!(
                "sentence {sid} has no text element"
            )));
        };
        let tokens = tokenize(sentence_text);

        let terms: Vec<roxmltree::Node> = sentence
            .children()
            .filter(|n| n.has_tag_name("aspectTerms"))
            .flat_map(|n| n.children().filter(|c| c.has_tag_name("aspectTerm")))
            .collect();
        for (k, term) in terms.iter().enumerate() {
            let polarity = term.attribute("polarity").ok_or_else(|| {
                Error::MalformedXml(format!("sentence {sid}: aspectTerm without polarity"))
            })?;
            let label = match polarity {
                "positive" => Sentiment::Positive,
                "negative" => Sentiment::Negative,
                "neutral" => Sentiment::Neutral,
                "conflict" => continue,
                other => {
                    return Err(Error::MalformedXml(format!(
                        "sentence {sid}: unknown polarity {other:?}"
                    )))
                }
            };
            let from = parse_offset(term.attribute("from"), &sid, "from")?;
            let to = parse_offset(term.attribute("to"), &sid, "to")?;
            let aspect = positions_overlapping(&tokens, from, to);
            if aspect.is_empty() {
                return Err(Error::SpanMisaligned {
                    sentence_id: sid.clone(),
                    detail: format!(
                        "span {from}..{to} ({:?}) overlaps no token",
                        term.attribute("term").unwrap_or("")
                    ),
                });
            }
            instances.push(RawInstance {
                id: format!("{sid}:{k}"),
                tokens: tokens.iter().map(|t| t.text.clone()).collect(),
                aspect,
                label,
            });
        }
    }
    for inst in &instances {
        inst.validate()?;
    }
    Ok(instances)
}

fn parse_offset(value: Option<&str>, sid: &str, name: &str) -> Result<usize> {
    value
        .ok_or_else(|| Error::MalformedXml(format!("sentence {sid}: aspectTerm missing {name}")))?
        .parse::<usize>()
        .map_err(|_| Error::MalformedXml(format!("sentence {sid}: non-numeric {name} offset")))
}

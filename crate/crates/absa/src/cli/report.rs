//! Mining-log reports: per instance and per iteration, the sentence with
//! tokens shaded by influence, the masked positions, the gate entropy,
//! gold and predicted labels, and the extracted word.
//!
//! Two renderings are produced: plain text for terminals and a single,
//! self-contained HTML file (inline styles only, no external resources).

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;

use crate::data::{file_hash, load_corpus, RawInstance, Vocabulary};
use crate::error::{Error, Result};
use crate::mining::{load_mining_log, Destination, LogHeader, LogRow};
use crate::model::{load_checkpoint, predict, ModelParams};

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Mining log produced by `run` (mining.jsonl).
    #[arg(long)]
    pub log: PathBuf,
    /// Prepared dataset directory the log was mined from.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Model checkpoint; adds a final-attention row per instance.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Output directory for report.txt and report.html.
    #[arg(long)]
    pub out: PathBuf,
    /// Render only the first N instances (0 = all).
    #[arg(long, default_value_t = 0)]
    pub limit: usize,
}

pub fn cmd_report(args: &ReportArgs) -> Result<()> {
    let (text, html) = execute_report(args)?;
    std::fs::create_dir_all(&args.out)?;
    std::fs::write(args.out.join("report.txt"), text)?;
    std::fs::write(args.out.join("report.html"), html)?;
    println!("wrote {}", args.out.join("report.html").display());
    Ok(())
}

/// Build both renderings; returns (plain text, HTML).
pub fn execute_report(args: &ReportArgs) -> Result<(String, String)> {
    let (header, rows) = load_mining_log(&args.log)?;

    let train_path = args.dataset.join("train.jsonl");
    let corpus_hash = file_hash(&train_path)?;
    if corpus_hash != header.corpus_hash {
        return Err(Error::InvalidData(format!(
            "mining log was produced from a different corpus \
             (log hash {:016x}, {} hash {corpus_hash:016x})",
            header.corpus_hash,
            train_path.display()
        )));
    }
    let vocab = Vocabulary::load(&args.dataset.join("vocab.txt"))?;
    if vocab.content_hash() != header.vocab_hash {
        return Err(Error::InvalidData(
            "mining log was produced with a different vocabulary".into(),
        ));
    }

    let corpus = load_corpus(&train_path)?;
    let by_id: HashMap<&str, &RawInstance> =
        corpus.iter().map(|r| (r.id.as_str(), r)).collect();
    let checkpoint = match &args.checkpoint {
        Some(path) => Some(load_checkpoint(path, header.vocab_hash)?),
        None => None,
    };

    let reports = group_rows(&rows, &by_id, checkpoint.as_ref(), &vocab, args.limit)?;
    Ok((
        render_text(&header, &reports),
        render_html(&header, &reports),
    ))
}

/// One instance's worth of report: its words and one row per iteration,
/// plus the retrained model's attention when a checkpoint is given.
struct InstanceReport<'a> {
    raw: &'a RawInstance,
    rows: Vec<&'a LogRow>,
    final_alpha: Option<Vec<f64>>,
}

fn group_rows<'a>(
    rows: &'a [LogRow],
    by_id: &HashMap<&str, &'a RawInstance>,
    checkpoint: Option<&ModelParams>,
    vocab: &Vocabulary,
    limit: usize,
) -> Result<Vec<InstanceReport<'a>>> {
    let mut order: Vec<&str> = Vec::new();
    let mut grouped: HashMap<&str, Vec<&LogRow>> = HashMap::new();
    for row in rows {
        let entry = grouped.entry(row.id.as_str()).or_default();
        if entry.is_empty() {
            order.push(row.id.as_str());
        }
        entry.push(row);
    }
    if limit > 0 {
        order.truncate(limit);
    }

    let mut reports = Vec::with_capacity(order.len());
    for id in order {
        let Some(raw) = by_id.get(id) else {
            return Err(Error::InvalidData(format!(
                "mining log mentions instance {id:?} absent from the corpus"
            )));
        };
        let final_alpha = match checkpoint {
            Some(params) => {
                let instance = vocab.encode(raw)?;
                Some(predict(params, &instance)?.alpha)
            }
            None => None,
        };
        let mut rows = grouped.remove(id).expect("grouped by construction");
        rows.sort_by_key(|r| r.k);
        reports.push(InstanceReport {
            raw,
            rows,
            final_alpha,
        });
    }
    Ok(reports)
}

/// How one token renders: masked placeholder, bracketed aspect word, or a
/// word with its influence weight.
enum TokenCell<'a> {
    Masked,
    Aspect(&'a str),
    Word(&'a str, f64),
}

fn token_cells<'a>(
    raw: &'a RawInstance,
    masked: &[usize],
    weights: &[f64],
) -> Vec<TokenCell<'a>> {
    raw.tokens
        .iter()
        .enumerate()
        .map(|(pos, word)| {
            if masked.contains(&pos) {
                TokenCell::Masked
            } else if raw.aspect.contains(&pos) {
                TokenCell::Aspect(word)
            } else {
                TokenCell::Word(word, weights.get(pos).copied().unwrap_or(0.0))
            }
        })
        .collect()
}

fn extraction_note(raw: &RawInstance, row: &LogRow) -> String {
    match (row.extracted, row.destination) {
        (Some(pos), Some(dest)) => {
            let word = raw.tokens.get(pos).map(String::as_str).unwrap_or("?");
            let set = match dest {
                Destination::Active => "active",
                Destination::Misleading => "misleading",
            };
            format!("{word} -> {set}")
        }
        _ if row.exhausted => "exhausted".to_string(),
        _ => "---".to_string(),
    }
}

// ---------------------------------------------------------------------------
// plain text

fn render_text(header: &LogHeader, reports: &[InstanceReport<'_>]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "mining report: mode {} iterations {} entropy_threshold {} corpus {:016x}",
        header.mode, header.iterations, header.entropy_threshold, header.corpus_hash
    );
    for report in reports {
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "instance {}  gold {}  aspect {:?}",
            report.raw.id,
            report.raw.label.as_str(),
            aspect_words(report.raw).join(" ")
        );
        for row in &report.rows {
            let _ = writeln!(
                out,
                "  k={}  E={:.4}  pred={}  extract={}",
                row.k,
                row.entropy,
                row.predicted.as_str(),
                extraction_note(report.raw, row)
            );
            let _ = writeln!(
                out,
                "       {}",
                text_sentence(&token_cells(report.raw, &row.masked, &row.saliency))
            );
        }
        if let Some(alpha) = &report.final_alpha {
            let _ = writeln!(out, "  retrained attention:");
            let _ = writeln!(
                out,
                "       {}",
                text_sentence(&token_cells(report.raw, &[], alpha))
            );
        }
    }
    out
}

fn text_sentence(cells: &[TokenCell<'_>]) -> String {
    cells
        .iter()
        .map(|cell| match cell {
            TokenCell::Masked => "\u{27e8}mask\u{27e9}".to_string(),
            TokenCell::Aspect(word) => format!("[{word}]"),
            TokenCell::Word(word, w) => format!("{word}({w:.2})"),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn aspect_words(raw: &RawInstance) -> Vec<&str> {
    raw.aspect
        .iter()
        .filter_map(|&pos| raw.tokens.get(pos).map(String::as_str))
        .collect()
}

// ---------------------------------------------------------------------------
// HTML

fn render_html(header: &LogHeader, reports: &[InstanceReport<'_>]) -> String {
    let mut body = String::new();
    let _ = writeln!(
        body,
        "<h1>Mining report</h1>\n<p class=\"meta\">mode {} &middot; {} iterations \
         &middot; entropy threshold {} &middot; corpus {:016x}</p>",
        escape(&header.mode),
        header.iterations,
        header.entropy_threshold,
        header.corpus_hash
    );
    for report in reports {
        let _ = writeln!(
            body,
            "<h2>{} <span class=\"gold\">gold {}</span></h2>",
            escape(&report.raw.id),
            report.raw.label.as_str()
        );
        body.push_str(
            "<table>\n<tr><th>k</th><th>E</th><th>predicted</th>\
             <th>sentence</th><th>extracted</th></tr>\n",
        );
        for row in &report.rows {
            let _ = writeln!(
                body,
                "<tr><td>{}</td><td>{:.4}</td><td>{}</td><td>{}</td><td>{}</td></tr>",
                row.k,
                row.entropy,
                row.predicted.as_str(),
                html_sentence(&token_cells(report.raw, &row.masked, &row.saliency)),
                escape(&extraction_note(report.raw, row))
            );
        }
        if let Some(alpha) = &report.final_alpha {
            let _ = writeln!(
                body,
                "<tr><td colspan=\"3\">retrained</td><td>{}</td><td></td></tr>",
                html_sentence(&token_cells(report.raw, &[], alpha))
            );
        }
        body.push_str("</table>\n");
    }

    format!(
        "<!doctype html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n\
         <title>Mining report</title>\n<style>\n{STYLE}</style>\n</head>\n\
         <body>\n{body}</body>\n</html>\n"
    )
}

const STYLE: &str = "\
body { font-family: Georgia, serif; margin: 2rem auto; max-width: 60rem; color: #222; }
h2 { font-size: 1rem; margin: 1.5rem 0 0.25rem; }
.gold { font-weight: normal; color: #555; }
.meta { color: #555; }
table { border-collapse: collapse; width: 100%; }
th, td { border: 1px solid #ccc; padding: 0.3rem 0.5rem; text-align: left;
         font-size: 0.9rem; vertical-align: top; }
.tok { padding: 0.05rem 0.15rem; border-radius: 0.15rem; }
.aspect { font-weight: bold; text-decoration: underline; }
.masked { color: #999; font-style: italic; }
";

/// Render one sentence as shaded spans. Shade scales with the token's
/// weight relative to the row maximum; masked tokens get zero shade.
fn html_sentence(cells: &[TokenCell<'_>]) -> String {
    let max = cells
        .iter()
        .filter_map(|c| match c {
            TokenCell::Word(_, w) => Some(*w),
            _ => None,
        })
        .fold(0.0_f64, f64::max);
    cells
        .iter()
        .map(|cell| match cell {
            TokenCell::Masked => {
                "<span class=\"tok masked\">\u{27e8}mask\u{27e9}</span>".to_string()
            }
            TokenCell::Aspect(word) => {
                format!("<span class=\"tok aspect\">{}</span>", escape(word))
            }
            TokenCell::Word(word, w) => {
                let shade = if max > 0.0 { (w / max) * 0.85 } else { 0.0 };
                format!(
                    "<span class=\"tok\" style=\"background: rgba(235, 106, 60, {shade:.3})\" \
                     title=\"{w:.4}\">{}</span>",
                    escape(word)
                )
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
    out
}

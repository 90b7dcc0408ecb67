//! Corpus ingestion and report serialization.
//!
//! Text is loaded exactly as stored; normalization is left to the caller.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{AsrReport, DiacritizerReport};
use crate::orthography::normalize;

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line count mismatch: {ref_lines} reference lines, {hyp_lines} hypothesis lines")]
    LineCountMismatch { ref_lines: usize, hyp_lines: usize },
    #[error("{}:{line}: invalid UTF-8", path.display())]
    InvalidUtf8 { path: PathBuf, line: usize },
    #[error("line {line}: malformed record: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("line {line}: duplicate record id {id:?}")]
    DuplicateId { id: String, line: usize },
    #[error("record {id}: reference is empty")]
    EmptyRecord { id: String },
    #[error("malformed report: {0}")]
    MalformedReport(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub id: String,
    #[serde(rename = "ref")]
    pub reference: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hyp: Option<String>,
}

fn read(path: &Path) -> Result<Vec<u8>, CorpusError> {
    fs::read(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Splits file contents into lines. LF or CRLF endings; a final newline
/// does not produce an extra empty line.
pub fn split_lines(bytes: &[u8], path: &Path) -> Result<Vec<String>, CorpusError> {
    let mut body = bytes;
    if let Some(rest) = body.strip_suffix(b"\n") {
        body = rest;
    }
    if bytes.is_empty() {
        return Ok(Vec::new());
    }
    body.split(|&b| b == b'\n')
        .enumerate()
        .map(|(i, raw)| {
            let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
            String::from_utf8(raw.to_vec()).map_err(|_| CorpusError::InvalidUtf8 {
                path: path.to_path_buf(),
                line: i + 1,
            })
        })
        .collect()
}

/// Reads a one-utterance-per-line text file.
pub fn load_lines(path: &Path) -> Result<Vec<String>, CorpusError> {
    split_lines(&read(path)?, path)
}

/// Pairs line i of each file into a record with id `i` (1-based).
pub fn load_parallel(ref_path: &Path, hyp_path: &Path) -> Result<Vec<EvalRecord>, CorpusError> {
    let refs = load_lines(ref_path)?;
    let hyps = load_lines(hyp_path)?;
    if refs.len() != hyps.len() {
        return Err(CorpusError::LineCountMismatch {
            ref_lines: refs.len(),
            hyp_lines: hyps.len(),
        });
    }
    Ok(refs
        .into_iter()
        .zip(hyps)
        .enumerate()
        .map(|(i, (reference, hyp))| EvalRecord {
            id: (i + 1).to_string(),
            reference,
            hyp: Some(hyp),
        })
        .collect())
}

/// Newline-delimited JSON objects with string fields `id`, `ref` and an
/// optional `hyp`. Blank lines are skipped.
pub fn parse_jsonl(text: &str) -> Result<Vec<EvalRecord>, CorpusError> {
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: EvalRecord = serde_json::from_str(line).map_err(|e| CorpusError::MalformedRecord {
            line: line_no,
            reason: e.to_string(),
        })?;
        if !seen.insert(record.id.clone()) {
            return Err(CorpusError::DuplicateId {
                id: record.id,
                line: line_no,
            });
        }
        records.push(record);
    }
    Ok(records)
}

pub fn load_jsonl(path: &Path) -> Result<Vec<EvalRecord>, CorpusError> {
    let bytes = read(path)?;
    let text = match String::from_utf8(bytes) {
        Ok(t) => t,
        Err(e) => {
            let valid = &e.as_bytes()[..e.utf8_error().valid_up_to()];
            let line = valid.iter().filter(|&&b| b == b'\n').count() + 1;
            return Err(CorpusError::InvalidUtf8 {
                path: path.to_path_buf(),
                line,
            });
        }
    };
    parse_jsonl(&text)
}

/// Rejects records whose reference normalizes to nothing.
pub fn check_references(records: &[EvalRecord]) -> Result<(), CorpusError> {
    match records.iter().find(|r| normalize(&r.reference).is_empty()) {
        Some(r) => Err(CorpusError::EmptyRecord { id: r.id.clone() }),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "report", rename_all = "snake_case")]
pub enum Report {
    Asr(AsrReport),
    Diacritizer(DiacritizerReport),
}

impl From<AsrReport> for Report {
    fn from(r: AsrReport) -> Self {
        Report::Asr(r)
    }
}

impl From<DiacritizerReport> for Report {
    fn from(r: DiacritizerReport) -> Self {
        Report::Diacritizer(r)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    #[default]
    Markdown,
    Tsv,
}

/// Which case-ending variants appear in table output. JSON always carries
/// both.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum CaseEnding {
    With,
    Without,
    #[default]
    Both,
}

impl CaseEnding {
    fn with(self) -> bool {
        matches!(self, CaseEnding::With | CaseEnding::Both)
    }

    fn without(self) -> bool {
        matches!(self, CaseEnding::Without | CaseEnding::Both)
    }
}

#[derive(Serialize)]
struct DocumentOut<'a> {
    #[serde(flatten)]
    report: &'a Report,
    toolkit_version: &'a str,
}

#[derive(Deserialize)]
struct DocumentIn {
    #[serde(flatten)]
    report: Report,
    #[allow(dead_code)]
    toolkit_version: String,
}

fn percent(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{:.2}%", v * 100.0),
        None => "—".to_string(),
    }
}

/// Header and cells of the single-row table for a report.
fn table(report: &Report, case: CaseEnding) -> (Vec<&'static str>, Vec<String>) {
    match report {
        Report::Asr(r) => {
            let m = &r.metrics;
            let mut header = vec![
                "Condition",
                "WER w/o diacritics",
                "CER w/o diacritics",
                "WER w/ diacritics",
                "CER w/ diacritics",
                "Coverage",
            ];
            let mut row = vec![
                r.condition.to_string(),
                percent(Some(m.wer_plain)),
                percent(Some(m.cer_plain)),
                percent(Some(m.wer_diac)),
                percent(Some(m.cer_diac)),
                percent(m.coverage_hyp),
            ];
            if case.with() {
                header.push("Precision w. case");
                row.push(percent(m.precision_with_case));
            }
            if case.without() {
                header.push("Precision w.o. case");
                row.push(percent(m.precision_without_case));
            }
            (header, row)
        }
        Report::Diacritizer(r) => {
            let m = &r.metrics;
            let mut header = vec!["Model", "Coverage"];
            let mut row = vec![r.label.clone(), percent(m.coverage)];
            if case.with() {
                header.push("DER w. case");
                row.push(percent(m.der_with_case));
            }
            if case.without() {
                header.push("DER w.o. case");
                row.push(percent(m.der_without_case));
            }
            (header, row)
        }
    }
}

pub fn emit_report(report: &Report, format: ReportFormat, case: CaseEnding) -> Vec<u8> {
    match format {
        ReportFormat::Json => {
            let doc = DocumentOut {
                report,
                toolkit_version: TOOLKIT_VERSION,
            };
            let mut out = serde_json::to_vec_pretty(&doc).expect("reports always serialize");
            out.push(b'\n');
            out
        }
        ReportFormat::Markdown => {
            let (header, row) = table(report, case);
            let align: Vec<&str> = std::iter::once("---")
                .chain(std::iter::repeat_n("---:", header.len() - 1))
                .collect();
            format!(
                "| {} |\n| {} |\n| {} |\n",
                header.join(" | "),
                align.join(" | "),
                row.join(" | ")
            )
            .into_bytes()
        }
        ReportFormat::Tsv => {
            let (header, row) = table(report, case);
            format!("{}\n{}\n", header.join("\t"), row.join("\t")).into_bytes()
        }
    }
}

/// Reads back a JSON report produced by [`emit_report`].
pub fn parse_report(bytes: &[u8]) -> Result<Report, CorpusError> {
    let doc: DocumentIn = serde_json::from_slice(bytes)?;
    Ok(doc.report)
}

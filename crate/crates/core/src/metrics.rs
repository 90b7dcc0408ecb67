//! Error rates, diacritic coverage, matched-word precision and DER.
//!
//! Every corpus metric is a ratio of integer tallies summed over records,
//! so per-record work can run in any order (or in parallel) and still
//! produce bit-identical reports.

use std::fmt;
use std::ops::{Add, AddAssign};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alignment::{edit_distance, matched_pairs, MatchedWordPair};
use crate::orthography::{Counts, SentenceForm, WordForm};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("record count mismatch: {refs} references, {hyps} hypotheses")]
    RecordCountMismatch { refs: usize, hyps: usize },
    #[error("reference corpus is empty")]
    EmptyReference,
    #[error("corpus contains no Arabic letters")]
    NoArabicLetters,
    #[error("matched pair has different base text: {ref_word} / {hyp_word}")]
    InvariantViolation { ref_word: String, hyp_word: String },
    #[error("record {record}: predicted base text differs from gold")]
    BaseTextMismatch { record: usize },
}

/// What counts toward the coverage numerator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverageMode {
    /// Every mark counts, so Shadda+vowel contributes 2.
    #[default]
    Marks,
    /// Letters carrying at least one mark.
    MarkedLetters,
}

impl CoverageMode {
    fn numerator(self, counts: &Counts) -> usize {
        match self {
            CoverageMode::Marks => counts.marks,
            CoverageMode::MarkedLetters => counts.marked_letters,
        }
    }
}

/// A numerator/denominator pair; the ratio is undefined when the
/// denominator is zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Fraction {
    pub hits: usize,
    pub total: usize,
}

impl Fraction {
    pub fn ratio(&self) -> Option<f64> {
        (self.total > 0).then(|| self.hits as f64 / self.total as f64)
    }
}

impl Add for Fraction {
    type Output = Fraction;

    fn add(self, rhs: Fraction) -> Fraction {
        Fraction {
            hits: self.hits + rhs.hits,
            total: self.total + rhs.total,
        }
    }
}

impl AddAssign for Fraction {
    fn add_assign(&mut self, rhs: Fraction) {
        *self = *self + rhs;
    }
}

fn check_paired(refs: &[SentenceForm], hyps: &[SentenceForm]) -> Result<(), MetricError> {
    if refs.len() != hyps.len() {
        return Err(MetricError::RecordCountMismatch {
            refs: refs.len(),
            hyps: hyps.len(),
        });
    }
    Ok(())
}

fn word_edits(reference: &SentenceForm, hypothesis: &SentenceForm, with_diacritics: bool) -> usize {
    let (r, h) = (reference.words(), hypothesis.words());
    if with_diacritics {
        edit_distance(r, h, |a, b| a == b)
    } else {
        edit_distance(r, h, WordForm::same_base)
    }
}

/// Character edits and reference length over the rendered sentences.
fn char_edits(reference: &SentenceForm, hypothesis: &SentenceForm, with_diacritics: bool) -> Fraction {
    let render = |s: &SentenceForm| -> Vec<char> {
        if with_diacritics {
            s.render().chars().collect()
        } else {
            s.strip().render().chars().collect()
        }
    };
    let (r, h) = (render(reference), render(hypothesis));
    Fraction {
        hits: edit_distance(&r, &h, |a, b| a == b),
        total: r.len(),
    }
}

/// Word error rate over a paired corpus. Words compare on full diacritized
/// form when `with_diacritics`, on base letters otherwise.
pub fn wer(refs: &[SentenceForm], hyps: &[SentenceForm], with_diacritics: bool) -> Result<f64, MetricError> {
    check_paired(refs, hyps)?;
    let total = refs
        .iter()
        .zip(hyps)
        .map(|(r, h)| Fraction {
            hits: word_edits(r, h, with_diacritics),
            total: r.words().len(),
        })
        .fold(Fraction::default(), Add::add);
    total.ratio().ok_or(MetricError::EmptyReference)
}

/// Character error rate; inter-word spaces count as characters.
pub fn cer(refs: &[SentenceForm], hyps: &[SentenceForm], with_diacritics: bool) -> Result<f64, MetricError> {
    check_paired(refs, hyps)?;
    let total = refs
        .iter()
        .zip(hyps)
        .map(|(r, h)| char_edits(r, h, with_diacritics))
        .fold(Fraction::default(), Add::add);
    total.ratio().ok_or(MetricError::EmptyReference)
}

pub fn corpus_counts(corpus: &[SentenceForm]) -> Counts {
    corpus.iter().map(SentenceForm::counts).fold(Counts::default(), Add::add)
}

fn coverage_of(counts: &Counts, mode: CoverageMode) -> Option<f64> {
    Fraction {
        hits: mode.numerator(counts),
        total: counts.letters,
    }
    .ratio()
}

/// Marks (or marked letters) per Arabic letter. May exceed 1 in
/// [`CoverageMode::Marks`].
pub fn coverage(corpus: &[SentenceForm], mode: CoverageMode) -> Result<f64, MetricError> {
    coverage_of(&corpus_counts(corpus), mode).ok_or(MetricError::NoArabicLetters)
}

/// Number of leading positions scored in a word: all of them, or all but
/// the case-ending position.
fn scored_len(word: &WordForm, include_case_ending: bool) -> usize {
    if include_case_ending {
        word.len()
    } else {
        word.len() - 1
    }
}

fn pair_precision(pair: &MatchedWordPair<'_>, include_case_ending: bool) -> Result<Fraction, MetricError> {
    if !pair.ref_word.same_base(pair.hyp_word) {
        return Err(MetricError::InvariantViolation {
            ref_word: pair.ref_word.to_string(),
            hyp_word: pair.hyp_word.to_string(),
        });
    }
    let n = scored_len(pair.ref_word, include_case_ending);
    let mut tally = Fraction::default();
    for (r, h) in pair.ref_word.graphemes()[..n].iter().zip(pair.hyp_word.graphemes()) {
        if r.is_letter() && !r.cluster().is_empty() && !h.cluster().is_empty() {
            tally.total += 1;
            tally.hits += usize::from(r.cluster() == h.cluster());
        }
    }
    Ok(tally)
}

/// Cluster agreement over positions where both sides carry marks.
/// `hits` = agreeing positions, `total` = compared positions.
pub fn precision(pairs: &[MatchedWordPair<'_>], include_case_ending: bool) -> Result<Fraction, MetricError> {
    pairs.iter().try_fold(Fraction::default(), |acc, p| {
        Ok(acc + pair_precision(p, include_case_ending)?)
    })
}

/// Diacritic error tally over gold-marked positions; an unmarked
/// prediction counts as an error. `hits` = errors, `total` = counted.
pub fn der(gold: &SentenceForm, predicted: &SentenceForm, include_case_ending: bool) -> Result<Fraction, MetricError> {
    if !gold.same_base(predicted) {
        return Err(MetricError::BaseTextMismatch { record: 0 });
    }
    let mut tally = Fraction::default();
    for (g, p) in gold.words().iter().zip(predicted.words()) {
        let n = scored_len(g, include_case_ending);
        for (gu, pu) in g.graphemes()[..n].iter().zip(p.graphemes()) {
            if gu.is_letter() && !gu.cluster().is_empty() {
                tally.total += 1;
                tally.hits += usize::from(gu.cluster() != pu.cluster());
            }
        }
    }
    Ok(tally)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConditionLabel {
    #[serde(rename = "UD")]
    Undiacritized,
    #[serde(rename = "MD")]
    ManuallyDiacritized,
    #[serde(rename = "AD")]
    AutomaticallyDiacritized,
    #[serde(rename = "other")]
    Other,
}

impl ConditionLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConditionLabel::Undiacritized => "UD",
            ConditionLabel::ManuallyDiacritized => "MD",
            ConditionLabel::AutomaticallyDiacritized => "AD",
            ConditionLabel::Other => "other",
        }
    }
}

/// Training condition of the evaluated system plus an optional free-form
/// pipeline tag such as `UD+lexicon`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Condition {
    pub label: ConditionLabel,
    pub tag: Option<String>,
}

impl Condition {
    pub fn new(label: ConditionLabel) -> Self {
        Condition { label, tag: None }
    }

    pub fn tagged(label: ConditionLabel, tag: impl Into<String>) -> Self {
        Condition {
            label,
            tag: Some(tag.into()),
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.tag {
            Some(tag) => f.write_str(tag),
            None => f.write_str(self.label.as_str()),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AsrCounts {
    pub records: usize,
    pub ref_words: usize,
    pub word_edits_plain: usize,
    pub word_edits_diac: usize,
    pub ref_chars_plain: usize,
    pub ref_chars_diac: usize,
    pub char_edits_plain: usize,
    pub char_edits_diac: usize,
    pub ref_letters: usize,
    pub ref_marks: usize,
    pub ref_marked_letters: usize,
    pub hyp_letters: usize,
    pub hyp_marks: usize,
    pub hyp_marked_letters: usize,
    pub matched_words: usize,
    pub agreed_positions_with_case: usize,
    pub compared_positions_with_case: usize,
    pub agreed_positions_without_case: usize,
    pub compared_positions_without_case: usize,
}

impl AsrCounts {
    /// Tallies one (reference, hypothesis) record.
    pub fn for_record(reference: &SentenceForm, hypothesis: &SentenceForm) -> Result<Self, MetricError> {
        let plain_chars = char_edits(reference, hypothesis, false);
        let diac_chars = char_edits(reference, hypothesis, true);
        let rc = reference.counts();
        let hc = hypothesis.counts();
        let pairs = matched_pairs(reference, hypothesis);
        let with_case = precision(&pairs, true)?;
        let without_case = precision(&pairs, false)?;
        Ok(AsrCounts {
            records: 1,
            ref_words: reference.words().len(),
            word_edits_plain: word_edits(reference, hypothesis, false),
            word_edits_diac: word_edits(reference, hypothesis, true),
            ref_chars_plain: plain_chars.total,
            ref_chars_diac: diac_chars.total,
            char_edits_plain: plain_chars.hits,
            char_edits_diac: diac_chars.hits,
            ref_letters: rc.letters,
            ref_marks: rc.marks,
            ref_marked_letters: rc.marked_letters,
            hyp_letters: hc.letters,
            hyp_marks: hc.marks,
            hyp_marked_letters: hc.marked_letters,
            matched_words: pairs.len(),
            agreed_positions_with_case: with_case.hits,
            compared_positions_with_case: with_case.total,
            agreed_positions_without_case: without_case.hits,
            compared_positions_without_case: without_case.total,
        })
    }

    fn ref_counts(&self) -> Counts {
        Counts {
            letters: self.ref_letters,
            marks: self.ref_marks,
            marked_letters: self.ref_marked_letters,
        }
    }

    fn hyp_counts(&self) -> Counts {
        Counts {
            letters: self.hyp_letters,
            marks: self.hyp_marks,
            marked_letters: self.hyp_marked_letters,
        }
    }
}

impl AddAssign for AsrCounts {
    fn add_assign(&mut self, o: AsrCounts) {
        self.records += o.records;
        self.ref_words += o.ref_words;
        self.word_edits_plain += o.word_edits_plain;
        self.word_edits_diac += o.word_edits_diac;
        self.ref_chars_plain += o.ref_chars_plain;
        self.ref_chars_diac += o.ref_chars_diac;
        self.char_edits_plain += o.char_edits_plain;
        self.char_edits_diac += o.char_edits_diac;
        self.ref_letters += o.ref_letters;
        self.ref_marks += o.ref_marks;
        self.ref_marked_letters += o.ref_marked_letters;
        self.hyp_letters += o.hyp_letters;
        self.hyp_marks += o.hyp_marks;
        self.hyp_marked_letters += o.hyp_marked_letters;
        self.matched_words += o.matched_words;
        self.agreed_positions_with_case += o.agreed_positions_with_case;
        self.compared_positions_with_case += o.compared_positions_with_case;
        self.agreed_positions_without_case += o.agreed_positions_without_case;
        self.compared_positions_without_case += o.compared_positions_without_case;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsrMetrics {
    pub wer_plain: f64,
    pub cer_plain: f64,
    pub wer_diac: f64,
    pub cer_diac: f64,
    pub coverage_hyp: Option<f64>,
    pub coverage_ref: Option<f64>,
    pub precision_with_case: Option<f64>,
    pub precision_without_case: Option<f64>,
}

impl AsrMetrics {
    pub fn from_counts(c: &AsrCounts, mode: CoverageMode) -> Result<Self, MetricError> {
        let rate = |hits, total| Fraction { hits, total }.ratio().ok_or(MetricError::EmptyReference);
        Ok(AsrMetrics {
            wer_plain: rate(c.word_edits_plain, c.ref_words)?,
            cer_plain: rate(c.char_edits_plain, c.ref_chars_plain)?,
            wer_diac: rate(c.word_edits_diac, c.ref_words)?,
            cer_diac: rate(c.char_edits_diac, c.ref_chars_diac)?,
            coverage_hyp: coverage_of(&c.hyp_counts(), mode),
            coverage_ref: coverage_of(&c.ref_counts(), mode),
            precision_with_case: Fraction {
                hits: c.agreed_positions_with_case,
                total: c.compared_positions_with_case,
            }
            .ratio(),
            precision_without_case: Fraction {
                hits: c.agreed_positions_without_case,
                total: c.compared_positions_without_case,
            }
            .ratio(),
        })
    }
}

/// One evaluated ASR system: a row of the ASR results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsrReport {
    pub condition: Condition,
    pub coverage_mode: CoverageMode,
    pub metrics: AsrMetrics,
    pub counts: AsrCounts,
}

/// Evaluates a paired corpus. Records are tallied on the current rayon
/// pool and summed in record order.
pub fn evaluate_asr(
    refs: &[SentenceForm],
    hyps: &[SentenceForm],
    condition: Condition,
    mode: CoverageMode,
) -> Result<AsrReport, MetricError> {
    check_paired(refs, hyps)?;
    let tallies: Vec<AsrCounts> = refs
        .par_iter()
        .zip(hyps.par_iter())
        .map(|(r, h)| AsrCounts::for_record(r, h))
        .collect::<Result<_, _>>()?;
    let mut counts = AsrCounts::default();
    for t in tallies {
        counts += t;
    }
    let metrics = AsrMetrics::from_counts(&counts, mode)?;
    Ok(AsrReport {
        condition,
        coverage_mode: mode,
        metrics,
        counts,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiacritizerCounts {
    pub records: usize,
    pub letters: usize,
    pub marks: usize,
    pub marked_letters: usize,
    pub error_positions_with_case: usize,
    pub counted_positions_with_case: usize,
    pub error_positions_without_case: usize,
    pub counted_positions_without_case: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiacritizerMetrics {
    pub coverage: Option<f64>,
    pub der_with_case: Option<f64>,
    pub der_without_case: Option<f64>,
}

/// One evaluated text diacritizer: a row of the diacritizer table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiacritizerReport {
    pub label: String,
    pub coverage_mode: CoverageMode,
    pub metrics: DiacritizerMetrics,
    pub counts: DiacritizerCounts,
}

pub fn evaluate_diacritizer(
    gold: &[SentenceForm],
    predicted: &[SentenceForm],
    label: impl Into<String>,
    mode: CoverageMode,
) -> Result<DiacritizerReport, MetricError> {
    check_paired(gold, predicted)?;
    let tallies: Vec<(Fraction, Fraction, Counts)> = gold
        .par_iter()
        .zip(predicted.par_iter())
        .enumerate()
        .map(|(record, (g, p))| {
            let remap = |e| match e {
                MetricError::BaseTextMismatch { .. } => MetricError::BaseTextMismatch { record },
                other => other,
            };
            let with_case = der(g, p, true).map_err(remap)?;
            let without_case = der(g, p, false).map_err(remap)?;
            Ok((with_case, without_case, p.counts()))
        })
        .collect::<Result<_, MetricError>>()?;
    let mut with_case = Fraction::default();
    let mut without_case = Fraction::default();
    let mut counts = Counts::default();
    for (w, wo, c) in tallies {
        with_case += w;
        without_case += wo;
        counts += c;
    }
    Ok(DiacritizerReport {
        label: label.into(),
        coverage_mode: mode,
        metrics: DiacritizerMetrics {
            coverage: coverage_of(&counts, mode),
            der_with_case: with_case.ratio(),
            der_without_case: without_case.ratio(),
        },
        counts: DiacritizerCounts {
            records: gold.len(),
            letters: counts.letters,
            marks: counts.marks,
            marked_letters: counts.marked_letters,
            error_positions_with_case: with_case.hits,
            counted_positions_with_case: with_case.total,
            error_positions_without_case: without_case.hits,
            counted_positions_without_case: without_case.total,
        },
    })
}

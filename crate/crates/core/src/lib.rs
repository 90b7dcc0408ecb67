//! Diacritic-aware evaluation for Arabic ASR output and text diacritizers.
//!
//! The crate parses Arabic text into letters and diacritic clusters
//! ([`orthography`]), aligns reference and hypothesis sequences
//! ([`alignment`]), and computes word/character error rates with and without
//! diacritics, diacritic coverage, matched-word precision and DER
//! ([`metrics`]). A majority-form lexicon ([`restorer`]) serves as a baseline
//! text diacritizer, and [`corpusio`] handles corpora and report output.
//!
//! ```
//! use tashkeel_eval::{evaluate_asr, parse_raw, Condition, ConditionLabel, CoverageMode, ParsePolicy};
//!
//! let reference = vec![parse_raw("عَلِمَ وَأَنْشَدَ", ParsePolicy::Strict).unwrap()];
//! let hypothesis = vec![parse_raw("عَلِمَ وَأَنْشَدُ", ParsePolicy::Strict).unwrap()];
//! let report = evaluate_asr(
//!     &reference,
//!     &hypothesis,
//!     Condition::new(ConditionLabel::ManuallyDiacritized),
//!     CoverageMode::Marks,
//! )
//! .unwrap();
//! assert_eq!(report.metrics.wer_plain, 0.0);
//! assert_eq!(report.metrics.wer_diac, 0.5);
//! ```

pub mod alignment;
pub mod cli;
pub mod corpusio;
pub mod metrics;
pub mod orthography;
pub mod restorer;

pub use alignment::{align, edit_distance, matched_pairs, AlignmentPath, EditKind, EditOp, MatchedWordPair};
pub use corpusio::{emit_report, load_jsonl, load_parallel, CaseEnding, CorpusError, EvalRecord, Report, ReportFormat};
pub use metrics::{
    cer, coverage, der, evaluate_asr, evaluate_diacritizer, precision, wer, AsrCounts, AsrMetrics, AsrReport,
    Condition, ConditionLabel, CoverageMode, DiacritizerReport, Fraction, MetricError,
};
pub use orthography::{
    normalize, parse, parse_raw, Counts, DiacriticMark, GraphemeUnit, MarkCluster, OrthographyError,
    ParsePolicy, SentenceForm, WordForm,
};
pub use restorer::{LexiconModel, ModelError};

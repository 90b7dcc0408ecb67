//! Majority-form lexicon diacritizer.
//!
//! Training tallies every diacritized word under its undiacritized key;
//! restoration replaces each word with the most frequent form seen for its
//! key and leaves unknown words alone.
//!
//! File format (UTF-8, LF):
//!
//! ```text
//! tashkeel-lexicon v1
//! <stripped>\t<diacritized>\t<count>
//! ```
//!
//! one entry per line, ordered by key, then by rank within the key.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::orthography::{parse, ParsePolicy, SentenceForm, WordForm};

pub const MODEL_HEADER: &str = "tashkeel-lexicon v1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("training corpus contains no words")]
    EmptyCorpus,
    #[error("malformed model file, line {line}: {reason}")]
    MalformedModelFile { line: usize, reason: String },
}

fn malformed(line: usize, reason: impl Into<String>) -> ModelError {
    ModelError::MalformedModelFile {
        line,
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    pub form: WordForm,
    pub count: u64,
}

/// Summary of what a model was trained on. Derived from the entries so it
/// survives a save/load cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingStats {
    pub word_tokens: u64,
    pub unique_forms: usize,
    /// Fraction of keys with two or more observed diacritized forms.
    pub ambiguity_rate: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LexiconModel {
    entries: BTreeMap<String, Vec<LexiconEntry>>,
}

impl LexiconModel {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn train(corpus: &[SentenceForm]) -> Result<Self, ModelError> {
        let mut tally: BTreeMap<String, BTreeMap<WordForm, u64>> = BTreeMap::new();
        for word in corpus.iter().flat_map(SentenceForm::words) {
            *tally
                .entry(word.base_text())
                .or_default()
                .entry(word.clone())
                .or_default() += 1;
        }
        if tally.is_empty() {
            return Err(ModelError::EmptyCorpus);
        }
        let entries = tally
            .into_iter()
            .map(|(key, forms)| {
                let forms = forms
                    .into_iter()
                    .map(|(form, count)| LexiconEntry { form, count })
                    .collect();
                (key, ranked(forms))
            })
            .collect();
        Ok(LexiconModel { entries })
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Observed forms for an undiacritized key, best first.
    pub fn forms(&self, key: &str) -> Option<&[LexiconEntry]> {
        self.entries.get(key).map(Vec::as_slice)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn stats(&self) -> TrainingStats {
        let keys = self.entries.len();
        let ambiguous = self.entries.values().filter(|f| f.len() >= 2).count();
        TrainingStats {
            word_tokens: self.entries.values().flatten().map(|e| e.count).sum(),
            unique_forms: keys,
            ambiguity_rate: if keys == 0 { 0.0 } else { ambiguous as f64 / keys as f64 },
        }
    }

    pub fn restore_word(&self, word: &WordForm) -> WordForm {
        match self.entries.get(&word.base_text()) {
            Some(forms) => forms[0].form.clone(),
            None => word.clone(),
        }
    }

    pub fn restore(&self, input: &SentenceForm) -> SentenceForm {
        SentenceForm::new(input.words().iter().map(|w| self.restore_word(w)).collect())
    }

    pub fn save(&self) -> String {
        let mut out = String::from(MODEL_HEADER);
        out.push('\n');
        for (key, forms) in &self.entries {
            for e in forms {
                let _ = writeln!(out, "{key}\t{}\t{}", e.form, e.count);
            }
        }
        out
    }

    pub fn load(bytes: &[u8]) -> Result<Self, ModelError> {
        let text = std::str::from_utf8(bytes).map_err(|e| malformed(1, format!("invalid UTF-8: {e}")))?;
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, MODEL_HEADER)) => {}
            Some((_, other)) => return Err(malformed(1, format!("expected header {MODEL_HEADER:?}, found {other:?}"))),
            None => return Err(malformed(1, "missing header")),
        }

        let mut grouped: BTreeMap<String, Vec<LexiconEntry>> = BTreeMap::new();
        for (n, line) in lines {
            let cols: Vec<&str> = line.split('\t').collect();
            let [key, form_text, count] = cols[..] else {
                return Err(malformed(n, format!("expected 3 tab-separated columns, found {}", cols.len())));
            };
            let count: u64 = count
                .parse()
                .map_err(|_| malformed(n, format!("invalid count {count:?}")))?;
            if count == 0 {
                return Err(malformed(n, "count must be at least 1"));
            }
            let form = match parse(form_text, ParsePolicy::Strict) {
                Ok(s) if s.words().len() == 1 && s.render() == form_text => {
                    s.into_words().pop().expect("one word")
                }
                _ => return Err(malformed(n, format!("not a normalized word: {form_text:?}"))),
            };
            if form.base_text() != key {
                return Err(malformed(n, format!("{form_text:?} does not strip to {key:?}")));
            }
            let forms = grouped.entry(key.to_string()).or_default();
            if forms.iter().any(|e| e.form == form) {
                return Err(malformed(n, format!("duplicate form {form_text:?}")));
            }
            forms.push(LexiconEntry { form, count });
        }
        let entries = grouped.into_iter().map(|(k, v)| (k, ranked(v))).collect();
        Ok(LexiconModel { entries })
    }
}

/// Count descending, then codepoint order of the rendered form.
fn ranked(mut forms: Vec<LexiconEntry>) -> Vec<LexiconEntry> {
    forms.sort_by_cached_key(|e| (std::cmp::Reverse(e.count), e.form.to_string()));
    forms
}

pub fn train(corpus: &[SentenceForm]) -> Result<LexiconModel, ModelError> {
    LexiconModel::train(corpus)
}

pub fn restore(model: &LexiconModel, input: &SentenceForm) -> SentenceForm {
    model.restore(input)
}

//! Arabic orthography: normalization, grapheme parsing, rendering and
//! diacritic stripping.
//!
//! A word is decomposed into [`GraphemeUnit`]s, each holding one base
//! codepoint and the [`MarkCluster`] of diacritics attached to it. Only
//! Arabic letters (U+0621..U+064A, tatweel excluded) may carry marks. Any
//! other codepoint (digits, Latin, punctuation, dagger alif, Quranic
//! annotation signs) becomes a grapheme with an empty cluster that is not
//! counted as a letter.

use std::fmt;

use log::warn;
use thiserror::Error;

const TATWEEL: char = '\u{0640}';

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrthographyError {
    #[error("word {word}: diacritic U+{:04X} has no preceding Arabic letter", *.mark as u32)]
    LeadingDiacritic { word: usize, mark: char },
    #[error("word {word}: letter U+{:04X} carries two vocalic marks ({first:?}, {second:?})", *.base as u32)]
    IllegalCluster {
        word: usize,
        base: char,
        first: DiacriticMark,
        second: DiacriticMark,
    },
    #[error("word has no graphemes")]
    EmptyWord,
}

/// The eight tashkeel marks, U+064B..U+0652.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DiacriticMark {
    Fathatan,
    Dammatan,
    Kasratan,
    Fatha,
    Damma,
    Kasra,
    Shadda,
    Sukun,
}

impl DiacriticMark {
    pub const ALL: [DiacriticMark; 8] = [
        DiacriticMark::Fathatan,
        DiacriticMark::Dammatan,
        DiacriticMark::Kasratan,
        DiacriticMark::Fatha,
        DiacriticMark::Damma,
        DiacriticMark::Kasra,
        DiacriticMark::Shadda,
        DiacriticMark::Sukun,
    ];

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            '\u{064B}' => Some(DiacriticMark::Fathatan),
            '\u{064C}' => Some(DiacriticMark::Dammatan),
            '\u{064D}' => Some(DiacriticMark::Kasratan),
            '\u{064E}' => Some(DiacriticMark::Fatha),
            '\u{064F}' => Some(DiacriticMark::Damma),
            '\u{0650}' => Some(DiacriticMark::Kasra),
            '\u{0651}' => Some(DiacriticMark::Shadda),
            '\u{0652}' => Some(DiacriticMark::Sukun),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            DiacriticMark::Fathatan => '\u{064B}',
            DiacriticMark::Dammatan => '\u{064C}',
            DiacriticMark::Kasratan => '\u{064D}',
            DiacriticMark::Fatha => '\u{064E}',
            DiacriticMark::Damma => '\u{064F}',
            DiacriticMark::Kasra => '\u{0650}',
            DiacriticMark::Shadda => '\u{0651}',
            DiacriticMark::Sukun => '\u{0652}',
        }
    }

    /// Shadda is the only gemination mark; the other seven are vocalic.
    pub fn is_gemination(self) -> bool {
        self == DiacriticMark::Shadda
    }

    /// Sort key for canonical cluster order: Shadda first, then codepoint.
    fn canonical_key(c: char) -> (bool, char) {
        (c != '\u{0651}', c)
    }
}

pub fn is_diacritic(c: char) -> bool {
    ('\u{064B}'..='\u{0652}').contains(&c)
}

pub fn is_arabic_letter(c: char) -> bool {
    ('\u{0621}'..='\u{064A}').contains(&c) && c != TATWEEL
}

/// Diacritics on one letter: an optional Shadda plus at most one vocalic mark.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MarkCluster {
    shadda: bool,
    vowel: Option<DiacriticMark>,
}

impl MarkCluster {
    pub const EMPTY: MarkCluster = MarkCluster {
        shadda: false,
        vowel: None,
    };

    /// Builds a cluster from marks in any order. Fails on two distinct
    /// vocalic marks, returning them in the order seen.
    pub fn from_marks<I>(marks: I) -> Result<Self, (DiacriticMark, DiacriticMark)>
    where
        I: IntoIterator<Item = DiacriticMark>,
    {
        let mut cluster = MarkCluster::EMPTY;
        for mark in marks {
            cluster.add(mark)?;
        }
        Ok(cluster)
    }

    /// Adds a mark; a repeat of the same kind is a no-op.
    fn add(&mut self, mark: DiacriticMark) -> Result<(), (DiacriticMark, DiacriticMark)> {
        if mark.is_gemination() {
            self.shadda = true;
            return Ok(());
        }
        match self.vowel {
            None => {
                self.vowel = Some(mark);
                Ok(())
            }
            Some(v) if v == mark => Ok(()),
            Some(v) => Err((v, mark)),
        }
    }

    pub fn has_shadda(&self) -> bool {
        self.shadda
    }

    pub fn vowel(&self) -> Option<DiacriticMark> {
        self.vowel
    }

    pub fn is_empty(&self) -> bool {
        !self.shadda && self.vowel.is_none()
    }

    /// Number of marks (0, 1 or 2).
    pub fn len(&self) -> usize {
        usize::from(self.shadda) + usize::from(self.vowel.is_some())
    }

    /// Marks in canonical order.
    pub fn marks(&self) -> impl Iterator<Item = DiacriticMark> {
        let shadda = self.shadda.then_some(DiacriticMark::Shadda);
        shadda.into_iter().chain(self.vowel)
    }
}

impl fmt::Display for MarkCluster {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for mark in self.marks() {
            write!(f, "{}", mark.as_char())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GraphemeUnit {
    base: char,
    cluster: MarkCluster,
}

impl GraphemeUnit {
    /// Returns `None` when `base` is itself a diacritic, or when a
    /// non-empty cluster is put on a codepoint that is not an Arabic letter.
    pub fn new(base: char, cluster: MarkCluster) -> Option<Self> {
        if is_diacritic(base) || (!cluster.is_empty() && !is_arabic_letter(base)) {
            return None;
        }
        Some(GraphemeUnit { base, cluster })
    }

    pub fn base(&self) -> char {
        self.base
    }

    pub fn cluster(&self) -> &MarkCluster {
        &self.cluster
    }

    pub fn is_letter(&self) -> bool {
        is_arabic_letter(self.base)
    }

    pub fn stripped(&self) -> Self {
        GraphemeUnit {
            base: self.base,
            cluster: MarkCluster::EMPTY,
        }
    }
}

impl fmt::Display for GraphemeUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.base, self.cluster)
    }
}

/// A whitespace-free token. The last grapheme holds the case ending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WordForm {
    graphemes: Vec<GraphemeUnit>,
}

/// A word's clusters split into the body and the case-ending position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseSplit {
    pub body: Vec<MarkCluster>,
    pub ending: MarkCluster,
}

impl WordForm {
    pub fn new(graphemes: Vec<GraphemeUnit>) -> Result<Self, OrthographyError> {
        if graphemes.is_empty() {
            return Err(OrthographyError::EmptyWord);
        }
        Ok(WordForm { graphemes })
    }

    pub fn graphemes(&self) -> &[GraphemeUnit] {
        &self.graphemes
    }

    pub fn len(&self) -> usize {
        self.graphemes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphemes.is_empty()
    }

    pub fn strip(&self) -> WordForm {
        WordForm {
            graphemes: self.graphemes.iter().map(GraphemeUnit::stripped).collect(),
        }
    }

    /// True when both words have the same base codepoints, ignoring marks.
    pub fn same_base(&self, other: &WordForm) -> bool {
        self.graphemes.len() == other.graphemes.len()
            && self
                .graphemes
                .iter()
                .zip(&other.graphemes)
                .all(|(a, b)| a.base == b.base)
    }

    /// The undiacritized spelling as a string.
    pub fn base_text(&self) -> String {
        self.graphemes.iter().map(|g| g.base).collect()
    }

    pub fn case_split(&self) -> CaseSplit {
        let (last, body) = self
            .graphemes
            .split_last()
            .expect("WordForm is never empty");
        CaseSplit {
            body: body.iter().map(|g| g.cluster).collect(),
            ending: last.cluster,
        }
    }

    pub fn counts(&self) -> Counts {
        self.graphemes
            .iter()
            .filter(|g| g.is_letter())
            .fold(Counts::default(), |mut acc, g| {
                acc.letters += 1;
                acc.marks += g.cluster.len();
                acc.marked_letters += usize::from(!g.cluster.is_empty());
                acc
            })
    }
}

impl fmt::Display for WordForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.graphemes {
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct SentenceForm {
    words: Vec<WordForm>,
}

impl SentenceForm {
    pub fn new(words: Vec<WordForm>) -> Self {
        SentenceForm { words }
    }

    pub fn words(&self) -> &[WordForm] {
        &self.words
    }

    pub fn into_words(self) -> Vec<WordForm> {
        self.words
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn strip(&self) -> SentenceForm {
        SentenceForm {
            words: self.words.iter().map(WordForm::strip).collect(),
        }
    }

    pub fn same_base(&self, other: &SentenceForm) -> bool {
        self.words.len() == other.words.len()
            && self.words.iter().zip(&other.words).all(|(a, b)| a.same_base(b))
    }

    pub fn counts(&self) -> Counts {
        self.words
            .iter()
            .map(WordForm::counts)
            .fold(Counts::default(), |acc, c| acc + c)
    }

    pub fn render(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for SentenceForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, w) in self.words.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{w}")?;
        }
        Ok(())
    }
}

/// Letter and mark tallies. `marked_letters` counts letters with a
/// non-empty cluster, so a Shadda+vowel letter adds 2 to `marks` but 1 here.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Counts {
    pub letters: usize,
    pub marks: usize,
    pub marked_letters: usize,
}

impl std::ops::Add for Counts {
    type Output = Counts;

    fn add(self, rhs: Counts) -> Counts {
        Counts {
            letters: self.letters + rhs.letters,
            marks: self.marks + rhs.marks,
            marked_letters: self.marked_letters + rhs.marked_letters,
        }
    }
}

impl std::ops::AddAssign for Counts {
    fn add_assign(&mut self, rhs: Counts) {
        *self = *self + rhs;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ParsePolicy {
    /// Malformed mark sequences are errors.
    #[default]
    Strict,
    /// Stray marks are dropped and conflicting vowels keep the first seen.
    Lenient,
}

/// Removes tatweel, collapses whitespace and puts every run of diacritics
/// into canonical order with duplicates removed. Everything else passes
/// through untouched.
pub fn normalize(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut word_buf = String::new();
    let mut run: Vec<char> = Vec::new();
    for word in raw.split_whitespace() {
        word_buf.clear();
        for c in word.chars().filter(|&c| c != TATWEEL) {
            if is_diacritic(c) {
                run.push(c);
                continue;
            }
            flush_marks(&mut run, &mut word_buf);
            word_buf.push(c);
        }
        flush_marks(&mut run, &mut word_buf);
        // tatweel-only tokens vanish entirely
        if word_buf.is_empty() {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&word_buf);
    }
    out
}

fn flush_marks(run: &mut Vec<char>, out: &mut String) {
    if run.is_empty() {
        return;
    }
    run.sort_by_key(|&c| DiacriticMark::canonical_key(c));
    run.dedup();
    out.extend(run.drain(..));
}

/// Splits normalized text into words and graphemes.
pub fn parse(normalized: &str, policy: ParsePolicy) -> Result<SentenceForm, OrthographyError> {
    let mut words = Vec::new();
    for (word_index, token) in normalized.split_whitespace().enumerate() {
        let mut graphemes: Vec<GraphemeUnit> = Vec::with_capacity(token.len() / 2);
        for c in token.chars() {
            let Some(mark) = DiacriticMark::from_char(c) else {
                graphemes.push(GraphemeUnit {
                    base: c,
                    cluster: MarkCluster::EMPTY,
                });
                continue;
            };
            let host = graphemes.last_mut().filter(|g| g.is_letter());
            let Some(host) = host else {
                if policy == ParsePolicy::Strict {
                    return Err(OrthographyError::LeadingDiacritic {
                        word: word_index,
                        mark: c,
                    });
                }
                warn!("dropping diacritic U+{:04X} without a base letter in word {word_index}", c as u32);
                continue;
            };
            if let Err((first, second)) = host.cluster.add(mark) {
                if policy == ParsePolicy::Strict {
                    return Err(OrthographyError::IllegalCluster {
                        word: word_index,
                        base: host.base,
                        first,
                        second,
                    });
                }
                warn!("keeping {first:?} over {second:?} on U+{:04X} in word {word_index}", host.base as u32);
            }
        }
        if !graphemes.is_empty() {
            words.push(WordForm { graphemes });
        }
    }
    Ok(SentenceForm { words })
}

/// Normalizes then parses.
pub fn parse_raw(raw: &str, policy: ParsePolicy) -> Result<SentenceForm, OrthographyError> {
    parse(&normalize(raw), policy)
}

pub fn render(sentence: &SentenceForm) -> String {
    sentence.render()
}

pub fn strip(sentence: &SentenceForm) -> SentenceForm {
    sentence.strip()
}

pub fn counts(sentence: &SentenceForm) -> Counts {
    sentence.counts()
}

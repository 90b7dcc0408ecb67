//! Unit-cost edit distance alignment and matched-word extraction.
//!
//! Ties between equal-cost paths are broken at every cell in the order
//! Match > Substitute > Delete > Insert, so the returned path is fully
//! determined by the inputs.

use crate::orthography::{SentenceForm, WordForm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EditKind {
    Match,
    Substitute,
    /// Consumes a reference token only.
    Delete,
    /// Consumes a hypothesis token only.
    Insert,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EditOp {
    pub kind: EditKind,
    pub ref_index: Option<usize>,
    pub hyp_index: Option<usize>,
}

impl EditOp {
    fn diagonal(kind: EditKind, i: usize, j: usize) -> Self {
        EditOp {
            kind,
            ref_index: Some(i),
            hyp_index: Some(j),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct AlignmentPath {
    pub ops: Vec<EditOp>,
    pub cost: usize,
}

impl AlignmentPath {
    pub fn matches(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.ops.iter().filter(|op| op.kind == EditKind::Match).map(|op| {
            (
                op.ref_index.expect("match has ref index"),
                op.hyp_index.expect("match has hyp index"),
            )
        })
    }
}

// Backpointer codes for the traceback table.
const DIAG: u8 = 0;
const UP: u8 = 1;
const LEFT: u8 = 2;

/// Minimum unit-cost edit distance using two rows of memory.
pub fn edit_distance<A, B, F>(a: &[A], b: &[B], equal: F) -> usize
where
    F: Fn(&A, &B) -> bool,
{
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let diag = prev[j] + usize::from(!equal(x, y));
            cur[j + 1] = diag.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Full alignment of `a` (reference) against `b` (hypothesis).
///
/// Costs are kept in two rows; the traceback table stores one byte per cell.
pub fn align<A, B, F>(a: &[A], b: &[B], equal: F) -> AlignmentPath
where
    F: Fn(&A, &B) -> bool,
{
    let width = b.len() + 1;
    let mut back = vec![LEFT; (a.len() + 1) * width];
    for i in 1..=a.len() {
        back[i * width] = UP;
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; width];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        let row = (i + 1) * width;
        for (j, y) in b.iter().enumerate() {
            let diag = prev[j] + usize::from(!equal(x, y));
            let up = prev[j + 1] + 1;
            let left = cur[j] + 1;
            let (best, dir) = if diag <= up && diag <= left {
                (diag, DIAG)
            } else if up <= left {
                (up, UP)
            } else {
                (left, LEFT)
            };
            cur[j + 1] = best;
            back[row + j + 1] = dir;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let cost = prev[b.len()];

    let mut ops = Vec::with_capacity(a.len().max(b.len()));
    let (mut i, mut j) = (a.len(), b.len());
    while i > 0 || j > 0 {
        match back[i * width + j] {
            DIAG => {
                i -= 1;
                j -= 1;
                let kind = if equal(&a[i], &b[j]) {
                    EditKind::Match
                } else {
                    EditKind::Substitute
                };
                ops.push(EditOp::diagonal(kind, i, j));
            }
            UP => {
                i -= 1;
                ops.push(EditOp {
                    kind: EditKind::Delete,
                    ref_index: Some(i),
                    hyp_index: None,
                });
            }
            _ => {
                j -= 1;
                ops.push(EditOp {
                    kind: EditKind::Insert,
                    ref_index: None,
                    hyp_index: Some(j),
                });
            }
        }
    }
    ops.reverse();
    AlignmentPath { ops, cost }
}

/// Reference/hypothesis words aligned as a match on their stripped forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchedWordPair<'a> {
    pub ref_word: &'a WordForm,
    pub hyp_word: &'a WordForm,
}

/// Aligns the two sentences on undiacritized words and returns one pair per
/// Match, carrying the original diacritized words.
pub fn matched_pairs<'a>(
    reference: &'a SentenceForm,
    hypothesis: &'a SentenceForm,
) -> Vec<MatchedWordPair<'a>> {
    let (r, h) = (reference.words(), hypothesis.words());
    align(r, h, WordForm::same_base)
        .matches()
        .map(|(i, j)| MatchedWordPair {
            ref_word: &r[i],
            hyp_word: &h[j],
        })
        .collect()
}

//! Shared fixtures and test oracles.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

use tashkeel_eval::{parse_raw, ParsePolicy, SentenceForm};

pub const LETTERS: [char; 10] = ['ب', 'ت', 'ر', 'س', 'ع', 'ل', 'م', 'ن', 'ا', 'ي'];
pub const VOWELS: [char; 7] = [
    '\u{064B}', '\u{064C}', '\u{064D}', '\u{064E}', '\u{064F}', '\u{0650}', '\u{0652}',
];
pub const SHADDA: char = '\u{0651}';

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/mini")
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_dir().join(name)).unwrap()
}

pub fn sentence(text: &str) -> SentenceForm {
    parse_raw(text, ParsePolicy::Strict).unwrap()
}

/// Minimum edit cost by enumerating every edit script (no memoization).
pub fn brute_force_distance<T, F: Fn(&T, &T) -> bool + Copy>(a: &[T], b: &[T], eq: F) -> usize {
    match (a.split_first(), b.split_first()) {
        (None, None) => 0,
        (Some(_), None) => a.len(),
        (None, Some(_)) => b.len(),
        (Some((x, ra)), Some((y, rb))) => {
            let diag = usize::from(!eq(x, y)) + brute_force_distance(ra, rb, eq);
            let del = 1 + brute_force_distance(ra, b, eq);
            let ins = 1 + brute_force_distance(a, rb, eq);
            diag.min(del).min(ins)
        }
    }
}

/// A random cluster string: empty, a vowel, Shadda, or Shadda+vowel.
pub fn random_cluster(rng: &mut StdRng, allow_empty: bool) -> String {
    let choice = rng.gen_range(if allow_empty { 0 } else { 1 }..4);
    let vowel = *VOWELS.choose(rng).unwrap();
    match choice {
        0 => String::new(),
        1 | 2 => vowel.to_string(),
        _ if rng.gen_bool(0.5) => format!("{SHADDA}{vowel}"),
        _ => SHADDA.to_string(),
    }
}

/// Random normalized word of 1..=max_len letters over a small alphabet.
pub fn random_word(rng: &mut StdRng, max_len: usize, fully_diacritized: bool) -> String {
    let len = rng.gen_range(1..=max_len);
    let alphabet = &LETTERS[..rng.gen_range(2..=LETTERS.len())];
    (0..len)
        .map(|_| format!("{}{}", alphabet.choose(rng).unwrap(), random_cluster(rng, !fully_diacritized)))
        .collect()
}

pub fn random_sentence(rng: &mut StdRng, max_words: usize, fully_diacritized: bool) -> String {
    let n = rng.gen_range(1..=max_words);
    (0..n)
        .map(|_| random_word(rng, 4, fully_diacritized))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Derives a noisy hypothesis: word drops, insertions, substitutions,
/// re-diacritization and mark stripping.
pub fn corrupt(rng: &mut StdRng, reference: &str) -> String {
    let mut words: Vec<String> = Vec::new();
    for w in reference.split(' ') {
        match rng.gen_range(0..10) {
            0 => {}
            1 => {
                words.push(w.to_string());
                words.push(random_word(rng, 3, false));
            }
            2 => words.push(random_word(rng, 4, false)),
            3 => words.push(w.chars().filter(|c| !('\u{064B}'..='\u{0652}').contains(c)).collect()),
            4 => {
                let bases: Vec<char> = w.chars().filter(|c| !('\u{064B}'..='\u{0652}').contains(c)).collect();
                words.push(bases.iter().map(|b| format!("{b}{}", random_cluster(rng, true))).collect());
            }
            _ => words.push(w.to_string()),
        }
    }
    if words.is_empty() {
        words.push(random_word(rng, 3, false));
    }
    words.join(" ")
}

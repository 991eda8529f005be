//! Pluggable tokenizers used for length limits and entity percentages.

use std::collections::HashSet;
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;

use crate::entities::CharIndex;
use crate::error::{Error, Result};

/// A token located by char offsets, end-exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token {
    pub start: usize,
    pub end: usize,
}

pub trait Tokenizer: Send + Sync {
    fn tokenize(&self, text: &str) -> Vec<Token>;

    fn count(&self, text: &str) -> usize {
        self.tokenize(text).len()
    }
}

fn word_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\w+|[^\w\s]").unwrap())
}

/// Runs of word characters (letters, digits, underscore) and single
/// punctuation marks. Whitespace separates tokens and is never part of one,
/// so the original text is recoverable from the tokens and the gaps.
#[derive(Debug, Clone, Copy, Default)]
pub struct WordTokenizer;

impl Tokenizer for WordTokenizer {
    fn tokenize(&self, text: &str) -> Vec<Token> {
        let index = CharIndex::new(text);
        word_regex()
            .find_iter(text)
            .map(|m| Token {
                start: index.char_of(m.start()).expect("char boundary"),
                end: index.char_of(m.end()).expect("char boundary"),
            })
            .collect()
    }
}

/// Greedy longest-match subword tokenizer over a vocabulary file (one token
/// per line). Each word-tokenizer piece is split into the longest vocabulary
/// prefixes; unknown characters become single-char tokens. An approximation
/// of a byte-pair tokenizer, good enough for length accounting.
#[derive(Debug, Clone)]
pub struct VocabTokenizer {
    vocab: HashSet<String>,
    max_len: usize,
}

impl VocabTokenizer {
    pub fn new<I: IntoIterator<Item = String>>(tokens: I) -> Self {
        let vocab: HashSet<String> = tokens.into_iter().filter(|t| !t.is_empty()).collect();
        let max_len = vocab.iter().map(|t| t.chars().count()).max().unwrap_or(1);
        VocabTokenizer { vocab, max_len }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::new(text.lines().map(|l| l.trim_end_matches(['\r', '\n']).to_string())))
    }
}

impl Tokenizer for VocabTokenizer {
    fn tokenize(&self, text: &str) -> Vec<Token> {
        let mut out = Vec::new();
        for piece in WordTokenizer.tokenize(text) {
            let chars: Vec<char> = text.chars().skip(piece.start).take(piece.end - piece.start).collect();
            let mut i = 0;
            while i < chars.len() {
                let mut take = 1;
                for len in (2..=self.max_len.min(chars.len() - i)).rev() {
                    let candidate: String = chars[i..i + len].iter().collect();
                    if self.vocab.contains(&candidate) {
                        take = len;
                        break;
                    }
                }
                out.push(Token { start: piece.start + i, end: piece.start + i + take });
                i += take;
            }
        }
        out
    }
}

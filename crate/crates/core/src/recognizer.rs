//! Rule-based entity recognizer and external span ingestion.
//!
//! The built-in recognizer combines a versioned set of regular-expression
//! rules for the NUMBERS types with a user-supplied gazetteer for named
//! entities. Spans from any external tagger can be piped in through the
//! sidecar format instead.

use std::collections::BTreeMap;
use std::path::Path;

use aho_corasick::{AhoCorasick, MatchKind};
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::entities::{placeholder_regex, validate_spans, CharIndex, EntitySpan, EntityType};
use crate::error::{Error, Result};

/// Version tag of the built-in pattern set. Bump when rules change.
pub const PATTERN_SET_VERSION: &str = "numbers-v1";

const MONTH: &str = r"(?:January|February|March|April|May|June|July|August|September|October|November|December|Jan\.|Feb\.|Mar\.|Apr\.|Jun\.|Jul\.|Aug\.|Sept?\.|Oct\.|Nov\.|Dec\.)";
const FULL_MONTH_NO_MAY: &str =
    r"(?:January|February|March|April|June|July|August|September|October|November|December)";
const PERIOD: &str = r"(?:years?|quarters?|months?|weeks?|days?|half|halves)";
const NUM: &str = r"\d{1,3}(?:,\d{3})+(?:\.\d+)?|\d+(?:\.\d+)?";
const NUMBER_WORD: &str = r"(?:zero|one|two|three|four|five|six|seven|eight|nine|ten|eleven|twelve|thirteen|fourteen|fifteen|sixteen|seventeen|eighteen|nineteen|twenty|thirty|forty|fifty|sixty|seventy|eighty|ninety|hundred|thousand|million|billion|trillion|dozen)";

struct PatternRule {
    entity_type: EntityType,
    regex: Regex,
}

/// Rules in priority order; on equal-length overlaps the earlier rule wins.
fn build_rules() -> Vec<PatternRule> {
    let scale = r"(?:\s?(?:thousand|million|billion|trillion)\b|\s?(?:bn|mn|[MBK])\b)?";
    let specs: Vec<(EntityType, String)> = vec![
        // dates
        (
            EntityType::Date,
            format!(r"\b{MONTH}\s\d{{1,2}}(?:st|nd|rd|th)?,?\s\d{{4}}\b|\b\d{{1,2}}\s{MONTH}\s\d{{4}}\b|\b{MONTH}\s\d{{4}}\b|\b{MONTH}\s\d{{1,2}}(?:st|nd|rd|th)?\b"),
        ),
        (EntityType::Date, r"\b\d{4}-\d{2}-\d{2}\b|\b\d{1,2}/\d{1,2}/\d{2,4}\b".to_string()),
        (
            EntityType::Date,
            r"\b(?:Q[1-4]|[1-4]Q|H[12])(?:\s?(?:FY)?'?\d{2}(?:\d{2})?\b)?|\bFY\s?'?\d{2}(?:\d{2})?\b".to_string(),
        ),
        (
            EntityType::Date,
            format!(r"\b(?:[Tt]he\s)?(?:(?:first|second|third|fourth|final|last|next|current|prior|previous|same|coming|{FULL_MONTH_NO_MAY}|May|\d{{4}})\s)?(?:fiscal\s|calendar\s)?quarter(?:\sof\s(?:fiscal\s)?\d{{4}})?\b"),
        ),
        (
            EntityType::Date,
            r"\b(?:[Ff]iscal|[Cc]alendar)\s(?:[Yy]ear\s)?(?:19|20)\d{2}\b|\b(?:[Ff]iscal|[Cc]alendar)\s[Yy]ear\b".to_string(),
        ),
        (
            EntityType::Date,
            format!(r"(?i)\b(?:today|yesterday|tomorrow|year[- ]to[- ]date|(?:this|last|next|the\spast|the\snext|the\scoming|the\sprior|the\sprevious)\s{PERIOD}|(?:a|an|one|two|three|four|five|six|seven|eight|nine|ten|\d+)\s{PERIOD}\sago|(?:a|an|one)\s(?:less|more|extra|additional|fewer)\s(?:week|day|month|quarter|year)|(?:the\s)?(?:first|second)\shalf(?:\sof\s(?:the\s)?(?:year|\d{{4}}))?)\b"),
        ),
        (EntityType::Date, format!(r"\b{FULL_MONTH_NO_MAY}\b|\b(?:19|20)\d{{2}}\b")),
        // times
        (
            EntityType::Time,
            r"\b\d{1,2}:\d{2}(?:\s?(?:[ap]\.m\.|[AaPp][Mm]\b))?(?:\s(?:ET|EST|EDT|PT|PST|CT|Eastern(?:\sTime)?|Pacific(?:\sTime)?)\b)?|\b\d{1,2}\s?(?:[ap]\.m\.|(?:AM|PM|am|pm)\b)".to_string(),
        ),
        (
            EntityType::Time,
            r"(?i)\b(?:this|tomorrow|yesterday)\s(?:morning|afternoon|evening)\b|\b(?:tonight|overnight|morning|afternoon|evening)\b".to_string(),
        ),
        // money
        (EntityType::Money, format!(r"(?:US|C|A)?[$€£¥]\s?(?:{NUM}){scale}")),
        (
            EntityType::Money,
            format!(r"\b(?:{NUM})\s?(?:(?:thousand|million|billion|trillion)\s)?(?:dollars|euros|yen|USD|EUR|GBP|cents)\b"),
        ),
        // percent
        (
            EntityType::Percent,
            format!(r"\b(?:{NUM})\s?(?:%|percent\b|per\scent\b|percentage\spoints?\b)"),
        ),
        // quantity
        (
            EntityType::Quantity,
            format!(r"\b(?:{NUM})(?:\s|-)?(?:foot|feet|square\sfeet|square\sfoot|miles?|kilometers?|km|meters?|kg|kilograms?|pounds|lbs|tons?|tonnes|barrels|bbl|gallons|liters|litres|acres|megawatts?|MW|gigawatts?|GW|MWh|GWh|TWh|ounces|oz|bushels)\b"),
        ),
        // ordinal
        (
            EntityType::Ordinal,
            r"(?i)\b(?:first|second|third|fourth|fifth|sixth|seventh|eighth|ninth|tenth|eleventh|twelfth)\b|\b\d+(?:st|nd|rd|th)\b".to_string(),
        ),
        // cardinal
        (
            EntityType::Cardinal,
            format!(r"\b(?:{NUM})(?:\s(?:thousand|million|billion|trillion)\b)?"),
        ),
        (
            EntityType::Cardinal,
            format!(r"(?i)\b{NUMBER_WORD}(?:[\s-]{NUMBER_WORD})*\b"),
        ),
    ];
    specs
        .into_iter()
        .map(|(entity_type, pattern)| PatternRule {
            entity_type,
            regex: Regex::new(&pattern).unwrap_or_else(|e| panic!("invalid built-in pattern: {e}")),
        })
        .collect()
}

/// User-supplied term list: one `TYPE term` entry per line.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Gazetteer {
    entries: Vec<(EntityType, String)>,
}

impl Gazetteer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, entity_type: EntityType, term: impl Into<String>) {
        let term = term.into();
        if !term.trim().is_empty() && !self.entries.iter().any(|(t, s)| *t == entity_type && *s == term) {
            self.entries.push((entity_type, term));
        }
    }

    pub fn entries(&self) -> &[(EntityType, String)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Parses gazetteer text. Blank lines and `#` comments are skipped; the
    /// type tag is separated from the term by a tab or the first run of
    /// whitespace.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut gazetteer = Gazetteer::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (tag, term) = match trimmed.split_once('\t') {
                Some(pair) => pair,
                None => trimmed.split_once(char::is_whitespace).ok_or_else(|| Error::Ingestion {
                    path: origin.to_string(),
                    line: line_no,
                    message: format!("expected `TYPE term`, found {trimmed:?}"),
                })?,
            };
            let entity_type: EntityType = tag.trim().parse().map_err(|e: Error| Error::Ingestion {
                path: origin.to_string(),
                line: line_no,
                message: e.to_string(),
            })?;
            let term = term.trim();
            if term.is_empty() {
                return Err(Error::Ingestion {
                    path: origin.to_string(),
                    line: line_no,
                    message: "empty term".to_string(),
                });
            }
            gazetteer.add(entity_type, term);
        }
        Ok(gazetteer)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Tab-separated text that [`Gazetteer::parse`] reads back.
    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(t, term)| format!("{}\t{term}\n", t.label())).collect()
    }
}

#[derive(Debug, Clone)]
pub struct RecognizerConfig {
    pub gazetteer: Gazetteer,
    /// Apply the built-in NUMBERS rules.
    pub number_patterns: bool,
}

impl Default for RecognizerConfig {
    fn default() -> Self {
        RecognizerConfig { gazetteer: Gazetteer::new(), number_patterns: true }
    }
}

#[derive(Debug, Clone)]
struct Candidate {
    start: usize,
    end: usize,
    priority: usize,
    entity_type: EntityType,
}

/// Keeps the longest candidate among overlapping ones; ties go to the
/// earlier start, then to the lower priority number. Output sorted by start.
fn resolve(mut candidates: Vec<Candidate>) -> Vec<Candidate> {
    candidates.sort_by(|a, b| {
        (b.end - b.start)
            .cmp(&(a.end - a.start))
            .then(a.start.cmp(&b.start))
            .then(a.priority.cmp(&b.priority))
    });
    let mut kept: BTreeMap<usize, Candidate> = BTreeMap::new();
    for cand in candidates {
        let clash_before = kept
            .range(..cand.end)
            .next_back()
            .is_some_and(|(_, k)| k.end > cand.start);
        if !clash_before {
            kept.insert(cand.start, cand);
        }
    }
    kept.into_values().collect()
}

pub struct Recognizer {
    rules: Vec<PatternRule>,
    gazetteer_types: Vec<EntityType>,
    automaton: Option<AhoCorasick>,
}

impl std::fmt::Debug for Recognizer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Recognizer")
            .field("rules", &self.rules.len())
            .field("gazetteer_terms", &self.gazetteer_types.len())
            .finish()
    }
}

impl Recognizer {
    pub fn new(config: &RecognizerConfig) -> Result<Self> {
        let rules = if config.number_patterns { build_rules() } else { Vec::new() };
        let (gazetteer_types, terms): (Vec<EntityType>, Vec<&str>) = config
            .gazetteer
            .entries()
            .iter()
            .map(|(t, s)| (t.clone(), s.as_str()))
            .unzip();
        let automaton = if terms.is_empty() {
            None
        } else {
            Some(
                AhoCorasick::builder()
                    .match_kind(MatchKind::Standard)
                    .build(&terms)
                    .map_err(|e| Error::Config(format!("gazetteer automaton: {e}")))?,
            )
        };
        Ok(Recognizer { rules, gazetteer_types, automaton })
    }

    /// Recognizes entities in `text`. Spans are sorted, non-overlapping and
    /// never touch existing `LABEL_n` placeholders.
    pub fn recognize(&self, text: &str) -> Vec<EntitySpan> {
        if text.is_empty() {
            return Vec::new();
        }
        let blocked: Vec<(usize, usize)> =
            placeholder_regex().find_iter(text).map(|m| (m.start(), m.end())).collect();
        let is_blocked = |s: usize, e: usize| blocked.iter().any(|&(bs, be)| s < be && bs < e);

        let mut candidates = Vec::new();
        if let Some(automaton) = &self.automaton {
            for m in automaton.find_overlapping_iter(text) {
                let (s, e) = (m.start(), m.end());
                if is_word_bounded(text, s, e) && !is_blocked(s, e) {
                    candidates.push(Candidate {
                        start: s,
                        end: e,
                        priority: 0,
                        entity_type: self.gazetteer_types[m.pattern().as_usize()].clone(),
                    });
                }
            }
        }
        for (i, rule) in self.rules.iter().enumerate() {
            for m in rule.regex.find_iter(text) {
                let (s, e) = trim_match(text, m.start(), m.end());
                if s < e && !is_blocked(s, e) {
                    candidates.push(Candidate { start: s, end: e, priority: i + 1, entity_type: rule.entity_type.clone() });
                }
            }
        }

        let index = CharIndex::new(text);
        resolve(candidates)
            .into_iter()
            .map(|c| {
                let start = index.char_of(c.start).expect("match starts on a char boundary");
                let end = index.char_of(c.end).expect("match ends on a char boundary");
                EntitySpan::new(start, end, c.entity_type, &text[c.start..c.end])
            })
            .collect()
    }
}

fn trim_match(text: &str, mut s: usize, mut e: usize) -> (usize, usize) {
    let slice = &text[s..e];
    let lead = slice.len() - slice.trim_start().len();
    s += lead;
    let trail = text[s..e].len() - text[s..e].trim_end().len();
    e -= trail;
    (s, e)
}

fn is_word_bounded(text: &str, s: usize, e: usize) -> bool {
    let before_ok = text[..s].chars().next_back().is_none_or(|c| !c.is_alphanumeric());
    let after_ok = text[e..].chars().next().is_none_or(|c| !c.is_alphanumeric());
    before_ok && after_ok
}

/// One span record of the sidecar file (JSON Lines, UTF-8, char offsets).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SidecarRecord {
    pub doc_id: String,
    pub start: usize,
    pub end: usize,
    #[serde(rename = "type")]
    pub entity_type: EntityType,
    pub surface: String,
}

impl SidecarRecord {
    pub fn span(&self) -> EntitySpan {
        EntitySpan::new(self.start, self.end, self.entity_type.clone(), self.surface.clone())
    }
}

/// Reads a sidecar file, grouping spans by document id.
pub fn read_sidecar(path: impl AsRef<Path>) -> Result<BTreeMap<String, Vec<EntitySpan>>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_sidecar(&text, &path.display().to_string())
}

pub fn parse_sidecar(text: &str, origin: &str) -> Result<BTreeMap<String, Vec<EntitySpan>>> {
    let mut out: BTreeMap<String, Vec<EntitySpan>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: SidecarRecord = serde_json::from_str(line).map_err(|e| Error::Ingestion {
            path: origin.to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.entry(record.doc_id.clone()).or_default().push(record.span());
    }
    Ok(out)
}

pub fn write_sidecar<W: std::io::Write>(mut writer: W, doc_id: &str, spans: &[EntitySpan]) -> Result<()> {
    for span in spans {
        let record = SidecarRecord {
            doc_id: doc_id.to_string(),
            start: span.start,
            end: span.end,
            entity_type: span.entity_type.clone(),
            surface: span.surface.clone(),
        };
        serde_json::to_writer(&mut writer, &record)?;
        writer.write_all(b"\n").map_err(|e| Error::io("<sidecar>", e))?;
    }
    Ok(())
}

/// Validates externally produced spans against `text` and resolves overlaps
/// (longer span kept, ties to the earlier start).
pub fn load_external_spans(text: &str, spans: &[EntitySpan]) -> Result<Vec<EntitySpan>> {
    let index = CharIndex::new(text);
    let len = index.char_len();
    for span in spans {
        if span.start >= span.end || span.end > len {
            return Err(Error::Integrity(format!(
                "span {}..{} {} {:?} lies outside the document ({len} chars)",
                span.start, span.end, span.entity_type, span.surface
            )));
        }
        let slice = index.slice(text, span.start, span.end).unwrap_or_default();
        if slice != span.surface {
            return Err(Error::Integrity(format!(
                "span {}..{} {} has surface {:?} but the document reads {:?}",
                span.start, span.end, span.entity_type, span.surface, slice
            )));
        }
    }
    let candidates = spans
        .iter()
        .enumerate()
        .map(|(i, s)| Candidate { start: s.start, end: s.end, priority: i, entity_type: s.entity_type.clone() })
        .collect();
    let resolved: Vec<EntitySpan> = resolve(candidates)
        .into_iter()
        .map(|c| {
            let surface = index.slice(text, c.start, c.end).unwrap_or_default().to_string();
            EntitySpan::new(c.start, c.end, c.entity_type, surface)
        })
        .collect();
    validate_spans(text, &resolved)?;
    Ok(resolved)
}

//! Entity type system, the four-category taxonomy, and the span/map
//! structures shared by the recognizer and anonymizer.
//!
//! Offsets are counted in Unicode scalar values (`char`s), never bytes.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use indexmap::IndexMap;
use regex::Regex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Entity label. The eighteen core labels come from the standard NER label
/// set; anything else is an extension label (e.g. `INDUSTRY`, `FORM`) that
/// only the LLM anonymizer produces.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EntityType {
    Date,
    Cardinal,
    Money,
    Percent,
    Ordinal,
    Time,
    Quantity,
    Gpe,
    Loc,
    Fac,
    Person,
    Org,
    Norp,
    Product,
    Event,
    Law,
    WorkOfArt,
    Language,
    Extension(String),
}

impl EntityType {
    /// The eighteen core labels in taxonomy order.
    pub const CORE: [EntityType; 18] = [
        EntityType::Date,
        EntityType::Cardinal,
        EntityType::Money,
        EntityType::Percent,
        EntityType::Ordinal,
        EntityType::Time,
        EntityType::Quantity,
        EntityType::Gpe,
        EntityType::Loc,
        EntityType::Fac,
        EntityType::Person,
        EntityType::Org,
        EntityType::Norp,
        EntityType::Product,
        EntityType::Event,
        EntityType::Law,
        EntityType::WorkOfArt,
        EntityType::Language,
    ];

    pub fn label(&self) -> &str {
        match self {
            EntityType::Date => "DATE",
            EntityType::Cardinal => "CARDINAL",
            EntityType::Money => "MONEY",
            EntityType::Percent => "PERCENT",
            EntityType::Ordinal => "ORDINAL",
            EntityType::Time => "TIME",
            EntityType::Quantity => "QUANTITY",
            EntityType::Gpe => "GPE",
            EntityType::Loc => "LOC",
            EntityType::Fac => "FAC",
            EntityType::Person => "PERSON",
            EntityType::Org => "ORG",
            EntityType::Norp => "NORP",
            EntityType::Product => "PRODUCT",
            EntityType::Event => "EVENT",
            EntityType::Law => "LAW",
            EntityType::WorkOfArt => "WORK_OF_ART",
            EntityType::Language => "LANGUAGE",
            EntityType::Extension(label) => label,
        }
    }

    pub fn is_core(&self) -> bool {
        !matches!(self, EntityType::Extension(_))
    }

    pub fn category(&self) -> EntityCategory {
        category_of(self)
    }
}

fn label_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[A-Z]+(?:_[A-Z]+)*$").unwrap())
}

impl FromStr for EntityType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(core) = EntityType::CORE.iter().find(|t| t.label() == s) {
            return Ok(core.clone());
        }
        if label_pattern().is_match(s) {
            return Ok(EntityType::Extension(s.to_string()));
        }
        let valid: Vec<&str> = EntityType::CORE.iter().map(|t| t.label()).collect();
        Err(Error::Config(format!(
            "unknown entity label {s:?}; valid labels are {} or any uppercase extension label such as INDUSTRY",
            valid.join(", ")
        )))
    }
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl Serialize for EntityType {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for EntityType {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum EntityCategory {
    Numbers,
    Places,
    Objects,
    Others,
}

impl EntityCategory {
    pub const ALL: [EntityCategory; 4] = [
        EntityCategory::Numbers,
        EntityCategory::Places,
        EntityCategory::Objects,
        EntityCategory::Others,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EntityCategory::Numbers => "NUMBERS",
            EntityCategory::Places => "PLACES",
            EntityCategory::Objects => "OBJECTS",
            EntityCategory::Others => "OTHERS",
        }
    }

    fn bit(self) -> u8 {
        match self {
            EntityCategory::Numbers => 1,
            EntityCategory::Places => 2,
            EntityCategory::Objects => 4,
            EntityCategory::Others => 8,
        }
    }
}

impl fmt::Display for EntityCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EntityCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "NUMBERS" | "NUM" => Ok(EntityCategory::Numbers),
            "PLACES" | "PLC" => Ok(EntityCategory::Places),
            "OBJECTS" | "OBJ" => Ok(EntityCategory::Objects),
            "OTHERS" | "OTH" => Ok(EntityCategory::Others),
            _ => Err(Error::Config(format!(
                "unknown entity category {s:?}; expected one of numbers, places, objects, others"
            ))),
        }
    }
}

/// Fixed taxonomy. Total over all labels: extension labels land in OTHERS.
pub fn category_of(entity_type: &EntityType) -> EntityCategory {
    use EntityType::*;
    match entity_type {
        Date | Cardinal | Money | Percent | Ordinal | Time | Quantity => EntityCategory::Numbers,
        Gpe | Loc | Fac => EntityCategory::Places,
        Person | Org | Norp => EntityCategory::Objects,
        Product | Event | Law | WorkOfArt | Language | Extension(_) => EntityCategory::Others,
    }
}

/// A subset of the four categories, used to select what gets masked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct CategorySet(u8);

impl CategorySet {
    pub const NONE: CategorySet = CategorySet(0);
    pub const ALL: CategorySet = CategorySet(0b1111);

    pub fn only(category: EntityCategory) -> Self {
        CategorySet(category.bit())
    }

    pub fn with(self, category: EntityCategory) -> Self {
        CategorySet(self.0 | category.bit())
    }

    pub fn contains(self, category: EntityCategory) -> bool {
        self.0 & category.bit() != 0
    }

    pub fn union(self, other: CategorySet) -> Self {
        CategorySet(self.0 | other.0)
    }

    pub fn is_disjoint(self, other: CategorySet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = EntityCategory> {
        EntityCategory::ALL.into_iter().filter(move |c| self.contains(*c))
    }
}

impl FromIterator<EntityCategory> for CategorySet {
    fn from_iter<I: IntoIterator<Item = EntityCategory>>(iter: I) -> Self {
        iter.into_iter().fold(CategorySet::NONE, CategorySet::with)
    }
}

impl FromStr for CategorySet {
    type Err = Error;

    /// Comma-separated category names; `all` and `none` are accepted.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("all") {
            return Ok(CategorySet::ALL);
        }
        if s.is_empty() || s.eq_ignore_ascii_case("none") {
            return Ok(CategorySet::NONE);
        }
        s.split(',').map(|part| part.parse::<EntityCategory>()).collect()
    }
}

impl fmt::Display for CategorySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.iter().map(|c| c.name()).collect();
        if names.is_empty() {
            f.write_str("NONE")
        } else {
            f.write_str(&names.join("+"))
        }
    }
}

/// A located, typed entity occurrence. `start`/`end` are char offsets,
/// end-exclusive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EntitySpan {
    pub start: usize,
    pub end: usize,
    #[serde(rename = "type")]
    pub entity_type: EntityType,
    pub surface: String,
}

impl EntitySpan {
    pub fn new(start: usize, end: usize, entity_type: EntityType, surface: impl Into<String>) -> Self {
        EntitySpan { start, end, entity_type, surface: surface.into() }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }

    pub fn category(&self) -> EntityCategory {
        category_of(&self.entity_type)
    }

    pub fn overlaps(&self, other: &EntitySpan) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// Char-offset to byte-offset table for one document.
#[derive(Debug, Clone)]
pub struct CharIndex {
    /// `bytes[i]` is the byte offset of char `i`; the last entry is `text.len()`.
    bytes: Vec<usize>,
}

impl CharIndex {
    pub fn new(text: &str) -> Self {
        let mut bytes: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
        bytes.push(text.len());
        CharIndex { bytes }
    }

    pub fn char_len(&self) -> usize {
        self.bytes.len() - 1
    }

    pub fn byte_of(&self, char_offset: usize) -> Option<usize> {
        self.bytes.get(char_offset).copied()
    }

    /// Inverse of [`byte_of`](Self::byte_of); `byte` must be a char boundary.
    pub fn char_of(&self, byte: usize) -> Option<usize> {
        self.bytes.binary_search(&byte).ok()
    }

    pub fn slice<'a>(&self, text: &'a str, start: usize, end: usize) -> Option<&'a str> {
        let b0 = self.byte_of(start)?;
        let b1 = self.byte_of(end)?;
        text.get(b0..b1)
    }
}

/// Checks the span invariants against `text`: bounds, surface equality,
/// sorted order and no overlap.
pub fn validate_spans(text: &str, spans: &[EntitySpan]) -> Result<()> {
    let index = CharIndex::new(text);
    let len = index.char_len();
    let mut prev_end = 0usize;
    for (i, span) in spans.iter().enumerate() {
        if span.start >= span.end || span.end > len {
            return Err(Error::Integrity(format!(
                "span #{i} {}..{} ({}) lies outside the document of {len} chars",
                span.start, span.end, span.entity_type
            )));
        }
        let slice = index.slice(text, span.start, span.end).unwrap_or_default();
        if slice != span.surface {
            return Err(Error::Integrity(format!(
                "span #{i} {}..{} ({}) surface {:?} does not match document slice {:?}",
                span.start, span.end, span.entity_type, span.surface, slice
            )));
        }
        if i > 0 && span.start < prev_end {
            return Err(Error::Integrity(format!(
                "span #{i} {}..{} overlaps or precedes the previous span ending at {prev_end}",
                span.start, span.end
            )));
        }
        prev_end = span.end;
    }
    Ok(())
}

/// Map key normalization: surrounding whitespace trimmed, case preserved.
pub fn normalize_surface(surface: &str) -> &str {
    surface.trim()
}

/// A numbered placeholder such as `PERSON_1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Placeholder {
    pub entity_type: EntityType,
    pub index: usize,
}

impl Placeholder {
    pub fn new(entity_type: EntityType, index: usize) -> Self {
        Placeholder { entity_type, index }
    }
}

impl fmt::Display for Placeholder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.entity_type.label(), self.index)
    }
}

impl FromStr for Placeholder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let caps = placeholder_exact()
            .captures(s.trim())
            .ok_or_else(|| Error::Parse(format!("{s:?} is not a placeholder of the form LABEL_n")))?;
        let entity_type: EntityType = caps[1].parse()?;
        let index: usize = caps[2]
            .parse()
            .map_err(|_| Error::Parse(format!("placeholder index in {s:?} is out of range")))?;
        if index == 0 {
            return Err(Error::Parse(format!("placeholder {s:?} has index 0; indices are 1-based")));
        }
        Ok(Placeholder { entity_type, index })
    }
}

fn placeholder_exact() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^([A-Z]+(?:_[A-Z]+)*)_([0-9]+)$").unwrap())
}

/// Matches placeholder tokens embedded in text.
pub fn placeholder_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\b([A-Z]+(?:_[A-Z]+)*)_([1-9][0-9]*)\b").unwrap())
}

/// Document-global mapping from (type, normalized surface) to a 1-based,
/// per-type placeholder index assigned in order of first appearance.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EntityMap {
    entries: IndexMap<(EntityType, String), usize>,
    next_index: IndexMap<EntityType, usize>,
}

impl Serialize for EntityMap {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.entries())
    }
}

impl<'de> Deserialize<'de> for EntityMap {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let entries = Vec::<EntityMapEntry>::deserialize(deserializer)?;
        EntityMap::from_entries(entries).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityMapEntry {
    #[serde(rename = "type")]
    pub entity_type: EntityType,
    pub surface: String,
    pub index: usize,
    pub placeholder: String,
}

impl EntityMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the placeholder index for the key, assigning the next one for
    /// the type on first sight.
    pub fn insert(&mut self, entity_type: &EntityType, surface: &str) -> usize {
        let key = (entity_type.clone(), normalize_surface(surface).to_string());
        if let Some(&index) = self.entries.get(&key) {
            return index;
        }
        let next = self.next_index.entry(entity_type.clone()).or_insert(0);
        *next += 1;
        let index = *next;
        self.entries.insert(key, index);
        index
    }

    pub fn get(&self, entity_type: &EntityType, surface: &str) -> Option<Placeholder> {
        let key = (entity_type.clone(), normalize_surface(surface).to_string());
        self.entries.get(&key).map(|&i| Placeholder::new(entity_type.clone(), i))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of distinct surfaces recorded for a type.
    pub fn count_for(&self, entity_type: &EntityType) -> usize {
        self.next_index.get(entity_type).copied().unwrap_or(0)
    }

    /// Entries in insertion order.
    pub fn entries(&self) -> impl Iterator<Item = EntityMapEntry> + '_ {
        self.entries.iter().map(|((t, s), &i)| EntityMapEntry {
            entity_type: t.clone(),
            surface: s.clone(),
            index: i,
            placeholder: Placeholder::new(t.clone(), i).to_string(),
        })
    }

    /// Placeholder string to surface, for back-substitution.
    pub fn surface_of(&self, placeholder: &Placeholder) -> Option<&str> {
        self.entries
            .iter()
            .find(|((t, _), &i)| *t == placeholder.entity_type && i == placeholder.index)
            .map(|((_, s), _)| s.as_str())
    }

    pub fn to_json(&self) -> String {
        let entries: Vec<EntityMapEntry> = self.entries().collect();
        serde_json::to_string_pretty(&entries).expect("entity map serializes")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        Self::from_entries(serde_json::from_str(json)?)
    }

    /// Rebuilds a map, checking the dense first-appearance numbering.
    pub fn from_entries(entries: Vec<EntityMapEntry>) -> Result<Self> {
        let mut map = EntityMap::new();
        for entry in entries {
            let index = map.insert(&entry.entity_type, &entry.surface);
            if index != entry.index {
                return Err(Error::Integrity(format!(
                    "entity map entry {} for {:?} breaks dense first-appearance numbering (expected index {index})",
                    entry.placeholder, entry.surface
                )));
            }
        }
        Ok(map)
    }
}

//! Global entity mapping, placeholder substitution and entity statistics.

use serde::{Deserialize, Serialize};

use crate::entities::{
    placeholder_regex, validate_spans, CategorySet, CharIndex, EntityCategory, EntityMap, EntitySpan, Placeholder,
};
use crate::error::{Error, Result};
use crate::tokenize::Tokenizer;

/// Assigns placeholder indices in order of first appearance. Spans must be
/// sorted by start.
pub fn build_entity_map(spans: &[EntitySpan]) -> EntityMap {
    let mut map = EntityMap::new();
    for span in spans {
        map.insert(&span.entity_type, &span.surface);
    }
    map
}

/// Replaces every span whose category is selected with its placeholder.
/// Text outside the replaced spans is left byte-identical.
pub fn apply_map(text: &str, spans: &[EntitySpan], map: &EntityMap, categories: CategorySet) -> Result<String> {
    if categories.is_empty() {
        return Ok(text.to_string());
    }
    let index = CharIndex::new(text);
    let mut out = text.to_string();
    for span in spans.iter().rev() {
        if !categories.contains(span.category()) {
            continue;
        }
        let placeholder = map.get(&span.entity_type, &span.surface).ok_or_else(|| {
            Error::Integrity(format!(
                "span {}..{} {} {:?} has no entry in the entity map",
                span.start, span.end, span.entity_type, span.surface
            ))
        })?;
        let (b0, b1) = match (index.byte_of(span.start), index.byte_of(span.end)) {
            (Some(b0), Some(b1)) if b0 < b1 => (b0, b1),
            _ => {
                return Err(Error::Integrity(format!(
                    "span {}..{} lies outside the document",
                    span.start, span.end
                )))
            }
        };
        out.replace_range(b0..b1, &placeholder.to_string());
    }
    Ok(out)
}

/// Result of anonymizing one document.
#[derive(Debug, Clone)]
pub struct Anonymized {
    pub text: String,
    pub map: EntityMap,
}

/// Validates the spans, builds the global map from all of them, and masks
/// the selected categories.
pub fn anonymize(text: &str, spans: &[EntitySpan], categories: CategorySet) -> Result<Anonymized> {
    validate_spans(text, spans)?;
    let map = build_entity_map(spans);
    let text = apply_map(text, spans, &map, categories)?;
    Ok(Anonymized { text, map })
}

/// Substitutes placeholders that appear in `map` back with their surfaces.
/// Unknown placeholders are left untouched.
pub fn restore(text: &str, map: &EntityMap) -> String {
    placeholder_regex()
        .replace_all(text, |caps: &regex::Captures<'_>| {
            let whole = caps.get(0).unwrap().as_str();
            match whole.parse::<Placeholder>() {
                Ok(p) => map.surface_of(&p).map(str::to_string).unwrap_or_else(|| whole.to_string()),
                Err(_) => whole.to_string(),
            }
        })
        .into_owned()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// Tokens covered by recognized spans over all tokens of the raw text.
    Raw,
    /// Tokens covered by `LABEL_n` placeholders over all tokens of the
    /// anonymized text.
    Anonymized,
}

/// Entity share of a document in percent. A token counts as an entity token
/// when a span (or placeholder) covers it fully or partially.
pub fn entity_percentage(text: &str, spans: &[EntitySpan], basis: Basis, tokenizer: &dyn Tokenizer) -> Result<f64> {
    let tokens = tokenizer.tokenize(text);
    if tokens.is_empty() {
        return Err(Error::UndefinedRatio("document has no tokens".to_string()));
    }
    let regions: Vec<(usize, usize)> = match basis {
        Basis::Raw => spans.iter().map(|s| (s.start, s.end)).collect(),
        Basis::Anonymized => {
            let index = CharIndex::new(text);
            placeholder_regex()
                .find_iter(text)
                .map(|m| (index.char_of(m.start()).unwrap(), index.char_of(m.end()).unwrap()))
                .collect()
        }
    };
    let covered = tokens
        .iter()
        .filter(|t| regions.iter().any(|&(s, e)| t.start < e && s < t.end))
        .count();
    Ok(covered as f64 / tokens.len() as f64 * 100.0)
}

/// Per-document entity counts, by category.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EntityStats {
    pub tokens: usize,
    pub entity_pct: f64,
    pub numbers: usize,
    pub places: usize,
    pub objects: usize,
    pub others: usize,
}

pub fn entity_stats(text: &str, spans: &[EntitySpan], tokenizer: &dyn Tokenizer) -> Result<EntityStats> {
    let mut stats = EntityStats {
        tokens: tokenizer.count(text),
        entity_pct: entity_percentage(text, spans, Basis::Raw, tokenizer)?,
        ..Default::default()
    };
    for span in spans {
        match span.category() {
            EntityCategory::Numbers => stats.numbers += 1,
            EntityCategory::Places => stats.places += 1,
            EntityCategory::Objects => stats.objects += 1,
            EntityCategory::Others => stats.others += 1,
        }
    }
    Ok(stats)
}

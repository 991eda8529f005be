//! In-memory pipeline stages: variant construction, signal extraction,
//! recognition testing and the join to the panel.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anonymizer::{anonymize, entity_stats, EntityStats};
use crate::corpus::{announcement_date, DocKind, Document, SignalRecord, TradingCalendar, Variant};
use crate::entities::{EntityMap, EntitySpan};
use crate::error::{Error, Result};
use crate::llm::{recognize_identity, Gateway, OrdinalEncoding, PromptKind, RecognitionOutcome};
use crate::recognizer::{load_external_spans, Recognizer};
use crate::tokenize::Tokenizer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Measure {
    Sentiment,
    Uncertainty,
    Investment,
    Economy,
}

impl Measure {
    pub const ALL: [Measure; 4] = [Measure::Sentiment, Measure::Uncertainty, Measure::Investment, Measure::Economy];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Sentiment => "Sentiment",
            Measure::Uncertainty => "Uncertainty",
            Measure::Investment => "Investment",
            Measure::Economy => "Economy",
        }
    }

    pub fn prompt(self, kind: DocKind) -> PromptKind {
        match (self, kind) {
            (Measure::Sentiment, DocKind::Transcript) => PromptKind::SentimentTranscript,
            (Measure::Sentiment, DocKind::Headline) => PromptKind::SentimentNews,
            (Measure::Uncertainty, _) => PromptKind::Uncertainty,
            (Measure::Investment, _) => PromptKind::Investment,
            (Measure::Economy, _) => PromptKind::Economy,
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Measure::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown measure {s:?}; expected sentiment, uncertainty, investment or economy")))
    }
}

pub fn parse_measures(list: &str) -> Result<Vec<Measure>> {
    let mut out = Vec::new();
    for part in list.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let m: Measure = part.parse()?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    Ok(out)
}

/// One document rendered under one variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantText {
    pub doc_id: String,
    pub variant: Variant,
    pub text: String,
    /// Surface map for span-based variants.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<EntityMap>,
    /// Placeholder count found in model-anonymized output.
    #[serde(default)]
    pub placeholders: usize,
    #[serde(default)]
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocStats {
    pub doc_id: String,
    pub stats: EntityStats,
}

#[derive(Debug, Clone, Default)]
pub struct AnonymizeOutput {
    /// Ordered by document, then by requested variant.
    pub texts: Vec<VariantText>,
    pub stats: Vec<DocStats>,
    pub spans: BTreeMap<String, Vec<EntitySpan>>,
}

impl AnonymizeOutput {
    pub fn text(&self, doc_id: &str, variant: Variant) -> Option<&VariantText> {
        self.texts.iter().find(|t| t.doc_id == doc_id && t.variant == variant)
    }
}

/// Where entity spans come from: an external tagger's sidecar per document
/// when present, else the built-in recognizer.
pub struct SpanSource<'a> {
    pub recognizer: &'a Recognizer,
    pub external: Option<&'a BTreeMap<String, Vec<EntitySpan>>>,
}

impl SpanSource<'_> {
    pub fn spans(&self, doc: &Document) -> Result<Vec<EntitySpan>> {
        match self.external.and_then(|m| m.get(&doc.doc_id)) {
            Some(spans) => load_external_spans(&doc.text, spans),
            None => Ok(self.recognizer.recognize(&doc.text)),
        }
    }
}

fn pool(jobs: usize) -> Option<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().ok()
}

fn in_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> T {
    match pool(jobs) {
        Some(p) => p.install(f),
        None => f(),
    }
}

/// Builds every requested variant of every document. The model-anonymized
/// variant needs a gateway.
pub fn anonymize_documents(
    docs: &[Document],
    spans: &SpanSource<'_>,
    variants: &[Variant],
    gateway: Option<&Gateway>,
    tokenizer: &dyn Tokenizer,
    jobs: usize,
) -> Result<AnonymizeOutput> {
    if variants.contains(&Variant::Llm) && gateway.is_none() {
        return Err(Error::Config("the LLM variant needs a provider".into()));
    }
    type PerDoc = (Vec<VariantText>, DocStats, Vec<EntitySpan>);
    let per_doc: Vec<Result<PerDoc>> = in_pool(jobs, || {
        docs.par_iter()
            .map(|doc| -> Result<PerDoc> {
                let found = spans.spans(doc)?;
                // an empty document has no defined entity share
                let stats = entity_stats(&doc.text, &found, tokenizer).unwrap_or_default();
                let mut texts = Vec::new();
                for &variant in variants {
                    let vt = match (variant, variant.categories()) {
                        (Variant::Raw, _) => VariantText {
                            doc_id: doc.doc_id.clone(),
                            variant,
                            text: doc.text.clone(),
                            map: None,
                            placeholders: 0,
                            truncated: false,
                        },
                        (Variant::Llm, _) => {
                            let out = gateway.expect("checked above").llm_anonymize(&doc.text)?;
                            VariantText {
                                doc_id: doc.doc_id.clone(),
                                variant,
                                placeholders: out.placeholders.len(),
                                text: out.text,
                                map: None,
                                truncated: out.truncated,
                            }
                        }
                        (_, Some(categories)) => {
                            let a = anonymize(&doc.text, &found, categories)?;
                            VariantText {
                                doc_id: doc.doc_id.clone(),
                                variant,
                                placeholders: a.map.len(),
                                text: a.text,
                                map: Some(a.map),
                                truncated: false,
                            }
                        }
                        (_, None) => unreachable!("only RAW and LLM lack a category set"),
                    };
                    texts.push(vt);
                }
                Ok((texts, DocStats { doc_id: doc.doc_id.clone(), stats }, found))
            })
            .collect()
    });
    let mut out = AnonymizeOutput::default();
    for r in per_doc {
        let (texts, stats, found) = r?;
        out.spans.insert(stats.doc_id.clone(), found);
        out.texts.extend(texts);
        out.stats.push(stats);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionFailure {
    pub doc_id: String,
    pub variant: Variant,
    pub measure: Measure,
    pub message: String,
    pub raw_response: String,
}

/// Scores each variant text with each measure's prompt. An answer that
/// still fails to parse after the re-ask becomes a missing value and a
/// recorded failure; transport and authentication errors abort.
pub fn extract_signals(
    gateway: &Gateway,
    docs: &[Document],
    texts: &[VariantText],
    measures: &[Measure],
    calendar: &TradingCalendar,
    encoding: &OrdinalEncoding,
    jobs: usize,
) -> Result<(Vec<SignalRecord>, Vec<ExtractionFailure>)> {
    let by_id: HashMap<&str, &Document> = docs.iter().map(|d| (d.doc_id.as_str(), d)).collect();
    let mut work = Vec::new();
    for t in texts {
        let doc = by_id
            .get(t.doc_id.as_str())
            .ok_or_else(|| Error::Integrity(format!("variant text for unknown document {}", t.doc_id)))?;
        let date = announcement_date(&doc.timestamp, calendar)?;
        for &m in measures {
            work.push((t, *doc, date, m));
        }
    }
    let model = gateway.provider().settings().model.clone();
    let results: Vec<Result<(SignalRecord, Option<ExtractionFailure>)>> = in_pool(jobs, || {
        work.par_iter()
            .map(|(t, doc, date, m)| {
                let record = |value| SignalRecord {
                    doc_id: doc.doc_id.clone(),
                    firm_id: doc.firm_id.clone(),
                    announcement_date: *date,
                    variant: t.variant,
                    model: model.clone(),
                    measure: m.name().to_string(),
                    value,
                    count: 1,
                };
                match gateway.complete(m.prompt(doc.kind), &t.text) {
                    Ok(r) => Ok((record(r.score(encoding)), None)),
                    Err(Error::Response { message, raw_response, .. }) => {
                        log::warn!("{} {} {m}: {message}", doc.doc_id, t.variant);
                        let failure = ExtractionFailure {
                            doc_id: doc.doc_id.clone(),
                            variant: t.variant,
                            measure: *m,
                            message,
                            raw_response,
                        };
                        Ok((record(None), Some(failure)))
                    }
                    Err(e) => Err(e),
                }
            })
            .collect()
    });
    let mut records = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for r in results {
        let (rec, fail) = r?;
        records.push(rec);
        failures.extend(fail);
    }
    Ok((records, failures))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocRecognition {
    pub doc_id: String,
    pub variant: Variant,
    pub ticker: String,
    pub year: i32,
    pub outcome: RecognitionOutcome,
}

/// Asks the model to name firm and year for every variant text.
pub fn recognize_documents(
    gateway: &Gateway,
    docs: &[Document],
    texts: &[VariantText],
    jobs: usize,
) -> Result<Vec<DocRecognition>> {
    let by_id: HashMap<&str, &Document> = docs.iter().map(|d| (d.doc_id.as_str(), d)).collect();
    in_pool(jobs, || {
        texts
            .par_iter()
            .map(|t| {
                let doc = by_id
                    .get(t.doc_id.as_str())
                    .ok_or_else(|| Error::Integrity(format!("variant text for unknown document {}", t.doc_id)))?;
                let outcome = recognize_identity(gateway, &t.text, &doc.ticker, doc.truth_year())?;
                Ok(DocRecognition {
                    doc_id: doc.doc_id.clone(),
                    variant: t.variant,
                    ticker: doc.ticker.clone(),
                    year: doc.truth_year(),
                    outcome,
                })
            })
            .collect()
    })
}

/// Per-document auxiliary signals: entity share of the raw text (under the
/// TRF variant) and firm recognition per variant.
pub fn auxiliary_signals(
    docs: &[Document],
    stats: &[DocStats],
    recognition: &[DocRecognition],
    calendar: &TradingCalendar,
    model: &str,
) -> Result<Vec<SignalRecord>> {
    let by_id: HashMap<&str, &Document> = docs.iter().map(|d| (d.doc_id.as_str(), d)).collect();
    let mut out = Vec::new();
    let mut push = |doc_id: &str, variant: Variant, measure: &str, value: f64| -> Result<()> {
        let doc = by_id.get(doc_id).ok_or_else(|| Error::Integrity(format!("statistics for unknown document {doc_id}")))?;
        out.push(SignalRecord {
            doc_id: doc_id.to_string(),
            firm_id: doc.firm_id.clone(),
            announcement_date: announcement_date(&doc.timestamp, calendar)?,
            variant,
            model: model.to_string(),
            measure: measure.to_string(),
            value: Some(value),
            count: 1,
        });
        Ok(())
    };
    for s in stats {
        if s.stats.tokens > 0 {
            push(&s.doc_id, Variant::Trf, "EntityPct", s.stats.entity_pct)?;
        }
    }
    for r in recognition {
        push(&r.doc_id, r.variant, "RecognitionFirm", f64::from(u8::from(r.outcome.firm_hit)))?;
    }
    Ok(out)
}

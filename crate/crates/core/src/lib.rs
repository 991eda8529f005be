//! Entity-consistent anonymization of financial text, model-based signal
//! extraction and fixed-effects regressions that measure what masking costs.

pub mod anonymizer;
pub mod entities;
pub mod error;
pub mod llm;
pub mod recognizer;
pub mod tokenize;
pub mod econometrics;
pub mod frame;
pub mod corpus;
pub mod evaluation;
pub mod synthetic;
pub mod pipeline;

pub use anonymizer::{anonymize, apply_map, build_entity_map, restore, Anonymized, EntityStats};
pub use corpus::{DocKind, Document, SignalRecord, TradingCalendar, Variant};
pub use entities::{CategorySet, EntityCategory, EntityMap, EntitySpan, EntityType, Placeholder};
pub use error::{Error, Result};
pub use frame::Frame;
pub use recognizer::{Gazetteer, Recognizer, RecognizerConfig};
pub use tokenize::{Tokenizer, WordTokenizer};

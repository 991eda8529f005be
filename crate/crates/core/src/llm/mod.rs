//! Chat-completion gateway: prompt catalog, strict output parsers, response
//! cache, rate limiting and providers (HTTP and deterministic mock).

mod cache;
mod gateway;
mod parse;
mod provider;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cache::{CacheEntry, ResponseCache};
pub use gateway::{
    recognize_identity, score_identity, Gateway, GatewayConfig, LlmAnonymization, RateLimiter, RecognitionOutcome,
    RetryPolicy, REASK_MESSAGE,
};
pub use parse::parse_response;
pub use provider::{
    ChatMessage, ChatRequest, ChatResponse, HttpProvider, MockProvider, MockResponder, MockTableEntry, Provider,
    ProviderError, ProviderSettings, Role, payload_hash,
};

/// Version of the prompt template set; part of every cache key.
pub const TEMPLATE_VERSION: &str = "prompts-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PromptKind {
    Anonymize,
    Recognize,
    SentimentTranscript,
    SentimentNews,
    Uncertainty,
    Investment,
    Economy,
}

impl PromptKind {
    pub const ALL: [PromptKind; 7] = [
        PromptKind::Anonymize,
        PromptKind::Recognize,
        PromptKind::SentimentTranscript,
        PromptKind::SentimentNews,
        PromptKind::Uncertainty,
        PromptKind::Investment,
        PromptKind::Economy,
    ];

    /// The instruction text sent as the system message.
    pub fn template(self) -> &'static str {
        match self {
            PromptKind::Anonymize => include_str!("../../prompts/anonymize.txt").trim_end(),
            PromptKind::Recognize => include_str!("../../prompts/recognize.txt").trim_end(),
            PromptKind::SentimentTranscript => include_str!("../../prompts/sentiment_transcript.txt").trim_end(),
            PromptKind::SentimentNews => include_str!("../../prompts/sentiment_news.txt").trim_end(),
            PromptKind::Uncertainty => include_str!("../../prompts/uncertainty.txt").trim_end(),
            PromptKind::Investment => include_str!("../../prompts/investment.txt").trim_end(),
            PromptKind::Economy => include_str!("../../prompts/economy.txt").trim_end(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PromptKind::Anonymize => "ANONYMIZE",
            PromptKind::Recognize => "RECOGNIZE",
            PromptKind::SentimentTranscript => "SENTIMENT_TRANSCRIPT",
            PromptKind::SentimentNews => "SENTIMENT_NEWS",
            PromptKind::Uncertainty => "UNCERTAINTY",
            PromptKind::Investment => "INVESTMENT",
            PromptKind::Economy => "ECONOMY",
        }
    }

    /// Identifies the kind from a system message, if it is one of ours.
    pub fn from_template(system: &str) -> Option<PromptKind> {
        PromptKind::ALL.into_iter().find(|k| k.template() == system)
    }
}

impl fmt::Display for PromptKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PromptKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase().replace('-', "_");
        PromptKind::ALL
            .into_iter()
            .find(|k| k.name() == upper)
            .ok_or_else(|| Error::Config(format!("unknown prompt kind {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Bearish,
    Bullish,
    NotAvailable,
}

impl Direction {
    pub fn as_bit(self) -> Option<u8> {
        match self {
            Direction::Bearish => Some(0),
            Direction::Bullish => Some(1),
            Direction::NotAvailable => None,
        }
    }
}

/// Five-level answer of the investment and economy prompts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OrdinalChoice {
    IncreaseSubstantially,
    Increase,
    NoChange,
    Decrease,
    DecreaseSubstantially,
    NoInformation,
}

impl OrdinalChoice {
    pub fn label(self) -> &'static str {
        match self {
            OrdinalChoice::IncreaseSubstantially => "increase substantially",
            OrdinalChoice::Increase => "increase",
            OrdinalChoice::NoChange => "no change",
            OrdinalChoice::Decrease => "decrease",
            OrdinalChoice::DecreaseSubstantially => "decrease substantially",
            OrdinalChoice::NoInformation => "no information is provided",
        }
    }
}

/// Numeric scale behind the five-level answers, most positive first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrdinalEncoding(pub [f64; 5]);

impl Default for OrdinalEncoding {
    fn default() -> Self {
        OrdinalEncoding([2.0, 1.0, 0.0, -1.0, -2.0])
    }
}

impl OrdinalEncoding {
    pub fn score(&self, choice: OrdinalChoice) -> Option<f64> {
        let slot = match choice {
            OrdinalChoice::IncreaseSubstantially => 0,
            OrdinalChoice::Increase => 1,
            OrdinalChoice::NoChange => 2,
            OrdinalChoice::Decrease => 3,
            OrdinalChoice::DecreaseSubstantially => 4,
            OrdinalChoice::NoInformation => return None,
        };
        Some(self.0[slot])
    }
}

/// Default integer encoding; `None` for NO_INFORMATION.
pub fn ordinal_score(choice: OrdinalChoice) -> Option<i8> {
    OrdinalEncoding::default().score(choice).map(|v| v as i8)
}

/// `(2·direction − 1)·magnitude`; missing when the direction is NA.
pub fn sentiment_score(direction: Direction, magnitude: f64) -> Result<Option<f64>> {
    if !(0.0..=1.0).contains(&magnitude) {
        return Err(Error::Parse(format!("magnitude {magnitude} outside [0, 1]")));
    }
    Ok(direction.as_bit().map(|d| (2.0 * f64::from(d) - 1.0) * magnitude))
}

/// Parsed content of one model answer; the variant always matches the kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Extraction {
    Sentiment { direction: Direction, magnitude: Option<f64> },
    Uncertainty(f64),
    Ordinal(OrdinalChoice),
    Identity { ticker: String, year: i32 },
    Anonymized(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionResult {
    pub kind: PromptKind,
    pub value: Extraction,
    pub raw_response: String,
    pub output_tokens: usize,
    /// Recorded when the provider returns them; never used in scoring.
    pub logprobs: Option<Vec<f64>>,
}

impl ExtractionResult {
    /// The numeric measure, if any: sentiment score, uncertainty, or the
    /// ordinal encoding of an investment/economy answer.
    pub fn score(&self, encoding: &OrdinalEncoding) -> Option<f64> {
        match &self.value {
            Extraction::Sentiment { direction, magnitude } => {
                magnitude.and_then(|m| sentiment_score(*direction, m).ok().flatten())
            }
            Extraction::Uncertainty(u) => Some(*u),
            Extraction::Ordinal(choice) => encoding.score(*choice),
            Extraction::Identity { .. } | Extraction::Anonymized(_) => None,
        }
    }
}

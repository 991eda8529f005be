//! Strict parsers for the structured answers each prompt asks for.
//!
//! Only surrounding whitespace and a single trailing period (the prompts end
//! their format line with one) are tolerated; anything else is rejected.

use std::sync::OnceLock;

use regex::Regex;

use super::{Direction, Extraction, OrdinalChoice, PromptKind};
use crate::error::{Error, Result};

struct Grammars {
    sentiment: Regex,
    identity: Regex,
    uncertainty: Regex,
    ordinal: Regex,
    no_information: Regex,
}

fn grammars() -> &'static Grammars {
    static G: OnceLock<Grammars> = OnceLock::new();
    G.get_or_init(|| Grammars {
        sentiment: Regex::new(
            r"^\*\*Direction Estimate: (0|1|NA)\*\*,\*\*Magnitude Estimate: (NA|[0-9]+(?:\.[0-9]+)?)\*\*\.?$",
        )
        .unwrap(),
        identity: Regex::new(
            r"^\*\*Company Estimate: ([A-Za-z][A-Za-z0-9.\-]{0,9})\*\*,\*\*Year Estimate: ([0-9]{4})\*\*\.?$",
        )
        .unwrap(),
        uncertainty: Regex::new(r"^\*\*Uncertainty Score: ([0-9]+(?:\.[0-9]+)?)\*\*\.?$").unwrap(),
        ordinal: Regex::new(
            r"^\*\*(?i:(increase substantially|increase|no change|decrease substantially|decrease)) - ([^*\n]*[^*\s][^*\n]*)\*\*\.?$",
        )
        .unwrap(),
        no_information: Regex::new(r"^\*\*(?i:no information is provided)\*\*\.?$").unwrap(),
    })
}

fn unit_interval(raw: &str, what: &str) -> Result<f64> {
    let value: f64 = raw.parse().map_err(|_| Error::Parse(format!("{what} {raw:?} is not a number")))?;
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::Parse(format!("{what} {value} outside [0, 1]")));
    }
    Ok(value)
}

/// Parses a raw model answer for the given prompt kind.
pub fn parse_response(kind: PromptKind, raw: &str) -> Result<Extraction> {
    let text = raw.trim();
    let g = grammars();
    let mismatch = || Error::Parse(format!("{kind} answer does not follow the required format: {text:?}"));
    match kind {
        PromptKind::Anonymize => Ok(Extraction::Anonymized(raw.to_string())),
        PromptKind::SentimentTranscript | PromptKind::SentimentNews => {
            let caps = g.sentiment.captures(text).ok_or_else(mismatch)?;
            let direction = match &caps[1] {
                "0" => Direction::Bearish,
                "1" => Direction::Bullish,
                _ => Direction::NotAvailable,
            };
            let magnitude = match &caps[2] {
                "NA" => None,
                m => Some(unit_interval(m, "magnitude")?),
            };
            if magnitude.is_none() && direction != Direction::NotAvailable {
                return Err(Error::Parse(format!("magnitude NA with a directional answer: {text:?}")));
            }
            Ok(Extraction::Sentiment { direction, magnitude })
        }
        PromptKind::Recognize => {
            let caps = g.identity.captures(text).ok_or_else(mismatch)?;
            let year: i32 = caps[2].parse().map_err(|_| mismatch())?;
            Ok(Extraction::Identity { ticker: caps[1].to_string(), year })
        }
        PromptKind::Uncertainty => {
            let caps = g.uncertainty.captures(text).ok_or_else(mismatch)?;
            Ok(Extraction::Uncertainty(unit_interval(&caps[1], "uncertainty")?))
        }
        PromptKind::Investment | PromptKind::Economy => {
            if g.no_information.is_match(text) {
                return Ok(Extraction::Ordinal(OrdinalChoice::NoInformation));
            }
            let caps = g.ordinal.captures(text).ok_or_else(mismatch)?;
            let choice = match caps[1].to_ascii_lowercase().as_str() {
                "increase substantially" => OrdinalChoice::IncreaseSubstantially,
                "increase" => OrdinalChoice::Increase,
                "no change" => OrdinalChoice::NoChange,
                "decrease" => OrdinalChoice::Decrease,
                _ => OrdinalChoice::DecreaseSubstantially,
            };
            Ok(Extraction::Ordinal(choice))
        }
    }
}

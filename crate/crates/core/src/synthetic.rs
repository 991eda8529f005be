//! Seeded synthetic corpus, panel and deterministic mock model.
//!
//! Transcripts carry two kinds of cues for every measure: plain words that
//! survive anonymization and percentage figures that the NUMBERS rules mask.
//! The mock model scores whatever cues it can still read, so masking removes
//! a known, independent component of each signal. Panel outcomes are driven
//! by the scores of the raw text.

use std::sync::{Arc, OnceLock};

use chrono::{DateTime, Datelike, Duration, FixedOffset, NaiveDate, TimeZone};
use chrono_tz::America::New_York;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Normal};
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::anonymizer::anonymize;
use crate::corpus::{announcement_date, DocKind, Document, TradingCalendar};
use crate::entities::{CategorySet, EntityType};
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::llm::{ChatRequest, ChatResponse, MockProvider, MockResponder, PromptKind};
use crate::recognizer::{Gazetteer, Recognizer, RecognizerConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub firms: usize,
    /// Transcript slots per firm; slot k falls on trading day 2k.
    pub slots: usize,
    pub start: NaiveDate,
    /// Variance of the raw sentiment score over the variance of the masked
    /// numeric component; must exceed 1.
    pub signal_to_noise: f64,
    /// Announcement-day return per unit of raw sentiment, in percent.
    pub beta: f64,
    pub return_noise_sd: f64,
    /// Share of transcripts that name the firm's product, which the
    /// recognizer does not mask.
    pub product_leak_rate: f64,
    pub headlines_per_transcript: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            seed: 7,
            firms: 40,
            slots: 10,
            start: NaiveDate::from_ymd_opt(2021, 1, 4).unwrap(),
            signal_to_noise: 2.0,
            beta: 2.0,
            return_noise_sd: 1.0,
            product_leak_rate: 0.5,
            headlines_per_transcript: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticFirm {
    pub firm_id: String,
    pub ticker: String,
    pub name: String,
    pub product: String,
    pub ceo: String,
    pub cfo: String,
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub firms: Vec<SyntheticFirm>,
    pub documents: Vec<Document>,
    pub panel: Frame,
    pub calendar: TradingCalendar,
    pub gazetteer: Gazetteer,
}

const PREFIXES: [&str; 10] = ["Nor", "Vel", "Cas", "Bri", "Tal", "Orin", "Zen", "Mar", "Quil", "Hal"];
const SUFFIXES: [&str; 8] = ["well", "ora", "tek", "dyne", "vex", "gate", "mont", "ara"];
const INDUSTRIES: [&str; 6] = ["Dynamics", "Systems", "Holdings", "Labs", "Industries", "Networks"];
const PRODUCT_BASES: [&str; 8] = ["Helix", "Nimbus", "Quasar", "Vertex", "Aurora", "Lumen", "Cobalt", "Falcon"];
const PRODUCT_TAILS: [&str; 6] = ["Core", "Wave", "Edge", "Flow", "Grid", "Sense"];
const FIRST_NAMES: [&str; 8] = ["Alice", "Marcus", "Priya", "Jonas", "Elena", "Tomas", "Grace", "Omar"];
const LAST_NAMES: [&str; 8] = ["Whitfield", "Okafor", "Lindqvist", "Moreau", "Castillo", "Nakamura", "Brennan", "Adeyemi"];

const POSITIVE: [(&str, &str); 6] = [
    ("strong", "We saw strong demand across our segments."),
    ("robust", "Order intake was robust."),
    ("excellent", "Execution in the field was excellent."),
    ("improved", "Gross margins improved."),
    ("solid", "Cash generation was solid."),
    ("encouraging", "Customer feedback has been encouraging."),
];
const NEGATIVE: [(&str, &str); 6] = [
    ("headwinds", "We faced headwinds in several markets."),
    ("weak", "Orders in the channel were weak."),
    ("challenging", "The pricing environment was challenging."),
    ("pressure", "Input costs put pressure on margins."),
    ("softness", "We saw softness in enterprise spending."),
    ("disappointing", "Results in services were disappointing."),
];
const UNCERTAIN: [&str; 3] = ["Visibility remains uncertain.", "The outlook is volatile.", "Conditions are unpredictable."];
const CERTAIN: [&str; 2] = ["Visibility is clear.", "Our outlook is stable."];
const EXPAND: [&str; 2] = ["We plan to expand capacity.", "We will accelerate investment in new plants."];
const CUT: [&str; 2] = ["We will cut capital spending.", "We are pausing new projects."];
const IMPROVING: [&str; 2] = ["Demand conditions are improving.", "The macro backdrop is strengthening."];
const WORSENING: [&str; 2] = ["Demand conditions are deteriorating.", "The macro backdrop is weakening."];

fn firm_roster(rng: &mut ChaCha8Rng, n: usize) -> Vec<SyntheticFirm> {
    let mut names: Vec<(usize, usize, usize)> = Vec::new();
    for p in 0..PREFIXES.len() {
        for s in 0..SUFFIXES.len() {
            for i in 0..INDUSTRIES.len() {
                names.push((p, s, i));
            }
        }
    }
    names.shuffle(rng);
    let mut products: Vec<(usize, usize)> =
        (0..PRODUCT_BASES.len()).flat_map(|b| (0..PRODUCT_TAILS.len()).map(move |t| (b, t))).collect();
    products.shuffle(rng);
    let mut tickers = std::collections::HashSet::new();
    (0..n)
        .map(|k| {
            let (p, s, i) = names[k % names.len()];
            let stem = format!("{}{}", PREFIXES[p], SUFFIXES[s]);
            let name = if k < names.len() { format!("{stem} {}", INDUSTRIES[i]) } else { format!("{stem} {} Group", INDUSTRIES[i]) };
            let mut ticker: String = stem.chars().filter(|c| c.is_ascii_alphabetic()).take(3).collect::<String>().to_uppercase();
            ticker.push(INDUSTRIES[i].chars().next().unwrap());
            let mut t = ticker.clone();
            let mut bump = b'A';
            while !tickers.insert(t.clone()) {
                t = format!("{ticker}{}", bump as char);
                bump += 1;
            }
            let (b, tl) = products[k % products.len()];
            let person = |rng: &mut ChaCha8Rng| {
                format!("{} {}", FIRST_NAMES[rng.random_range(0..8)], LAST_NAMES[rng.random_range(0..8)])
            };
            let ceo = person(rng);
            let mut cfo = person(rng);
            while cfo == ceo {
                cfo = person(rng);
            }
            SyntheticFirm {
                firm_id: (10001 + k).to_string(),
                ticker: t,
                name,
                product: format!("{}{}", PRODUCT_BASES[b], PRODUCT_TAILS[tl]),
                ceo,
                cfo,
            }
        })
        .collect()
}

fn pct(x: f64) -> String {
    format!("{:.1}%", x.abs())
}

/// The quarter a call held on `date` reports on: the previous calendar quarter.
fn reported_quarter(date: NaiveDate) -> (i32, i32) {
    let quarter = (date.month0() / 3 + 1) as i32;
    if quarter == 1 {
        (4, date.year() - 1)
    } else {
        (quarter - 1, date.year())
    }
}

fn transcript_text(rng: &mut ChaCha8Rng, firm: &SyntheticFirm, date: NaiveDate, numeric_sd: f64, leak: bool) -> String {
    let (q, year) = reported_quarter(date);
    let mut lines = vec![
        format!("Good morning, and welcome to the {} Q{q} {year} earnings conference call.", firm.name),
        format!("Joining us today are CEO {} and CFO {}.", firm.ceo, firm.cfo),
    ];
    let mut body: Vec<String> = Vec::new();
    let positives = Binomial::new(10, 0.5).unwrap().sample(rng) as usize;
    for k in 0..10 {
        let pool = if k < positives { &POSITIVE } else { &NEGATIVE };
        body.push(pool[rng.random_range(0..pool.len())].1.to_string());
    }
    let rev = Normal::new(0.0, numeric_sd).unwrap().sample(rng);
    body.push(format!("Revenue was {} {} from a year ago.", if rev >= 0.0 { "up" } else { "down" }, pct(rev)));

    for _ in 0..rng.random_range(1..4) {
        if rng.random_bool(0.5) {
            body.push(UNCERTAIN[rng.random_range(0..UNCERTAIN.len())].to_string());
        } else {
            body.push(CERTAIN[rng.random_range(0..CERTAIN.len())].to_string());
        }
    }
    body.push(format!("We widened our guidance range by {}.", pct(rng.random_range(0.0..20.0))));

    for _ in 0..rng.random_range(0..3) {
        let pool = if rng.random_bool(0.5) { &EXPAND } else { &CUT };
        body.push(pool[rng.random_range(0..pool.len())].to_string());
    }
    let capex: f64 = Normal::new(0.0, 5.0).unwrap().sample(rng);
    body.push(format!("Capital expenditures will {} by {}.", if capex >= 0.0 { "rise" } else { "fall" }, pct(capex)));

    for _ in 0..rng.random_range(0..3) {
        let pool = if rng.random_bool(0.5) { &IMPROVING } else { &WORSENING };
        body.push(pool[rng.random_range(0..pool.len())].to_string());
    }
    let demand: f64 = Normal::new(0.0, 4.0).unwrap().sample(rng);
    body.push(format!("We expect demand to {} by {}.", if demand >= 0.0 { "grow" } else { "shrink" }, pct(demand)));
    if leak {
        body.push(format!("Customers continue to adopt our {} platform.", firm.product));
    }
    body.shuffle(rng);
    lines.extend(body);
    lines.push(format!("Thank you for your interest in {}.", firm.name));
    lines.join(" ")
}

struct Cues {
    revenue: Regex,
    guidance: Regex,
    capex: Regex,
    demand: Regex,
    year: Regex,
}

fn cues() -> &'static Cues {
    static C: OnceLock<Cues> = OnceLock::new();
    C.get_or_init(|| Cues {
        revenue: Regex::new(r"Revenue was (up|down) ([0-9]+(?:\.[0-9]+)?)%").unwrap(),
        guidance: Regex::new(r"guidance range by ([0-9]+(?:\.[0-9]+)?)%").unwrap(),
        capex: Regex::new(r"Capital expenditures will (rise|fall) by ([0-9]+(?:\.[0-9]+)?)%").unwrap(),
        demand: Regex::new(r"demand to (grow|shrink) by ([0-9]+(?:\.[0-9]+)?)%").unwrap(),
        year: Regex::new(r"\b(?:19|20)[0-9]{2}\b").unwrap(),
    })
}

fn count_any(text: &str, phrases: &[&str]) -> f64 {
    phrases.iter().map(|p| text.matches(p).count()).sum::<usize>() as f64
}

fn signed_cue(re: &Regex, text: &str, positive: &str) -> Option<f64> {
    let mut total = None;
    for caps in re.captures_iter(text) {
        let v: f64 = caps[2].parse().unwrap_or(0.0);
        *total.get_or_insert(0.0) += if &caps[1] == positive { v } else { -v };
    }
    total
}

fn words(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()).map(str::to_lowercase).collect()
}

/// Sentiment score the mock assigns to a text.
pub fn mock_sentiment(text: &str) -> f64 {
    let w = words(text);
    let pos = w.iter().filter(|x| POSITIVE.iter().any(|(k, _)| k == x)).count() as f64;
    let neg = w.iter().filter(|x| NEGATIVE.iter().any(|(k, _)| k == x)).count() as f64;
    let lex = if pos + neg > 0.0 { (pos - neg) / (pos + neg) } else { 0.0 };
    let num = signed_cue(&cues().revenue, text, "up").unwrap_or(0.0);
    let s = (0.5 * lex + num / 40.0).clamp(-1.0, 1.0);
    (s * 10_000.0).round() / 10_000.0
}

pub fn mock_uncertainty(text: &str) -> f64 {
    let lex = count_any(text, &UNCERTAIN) - count_any(text, &CERTAIN);
    let num: f64 = cues().guidance.captures_iter(text).map(|c| c[1].parse::<f64>().unwrap_or(0.0)).sum();
    let u = (0.4 + 0.1 * lex + num / 100.0).clamp(0.0, 1.0);
    (u * 10_000.0).round() / 10_000.0
}

fn ordinal_answer(lex_up: f64, lex_down: f64, cue: Option<f64>, scale: f64) -> Option<i32> {
    if lex_up + lex_down == 0.0 && cue.is_none() {
        return None;
    }
    let z = 0.5 * (lex_up - lex_down) + cue.unwrap_or(0.0) / scale;
    Some((z.round() as i32).clamp(-2, 2))
}

pub fn mock_investment(text: &str) -> Option<i32> {
    ordinal_answer(count_any(text, &EXPAND), count_any(text, &CUT), signed_cue(&cues().capex, text, "rise"), 4.0)
}

pub fn mock_economy(text: &str) -> Option<i32> {
    ordinal_answer(count_any(text, &IMPROVING), count_any(text, &WORSENING), signed_cue(&cues().demand, text, "grow"), 3.0)
}

fn ordinal_text(score: Option<i32>) -> String {
    match score {
        None => "**no information is provided**".to_string(),
        Some(2) => "**increase substantially - the call points to a sharp rise.**".to_string(),
        Some(1) => "**increase - the call points to a rise.**".to_string(),
        Some(0) => "**no change - the call points to stable levels.**".to_string(),
        Some(-1) => "**decrease - the call points to a decline.**".to_string(),
        Some(_) => "**decrease substantially - the call points to a sharp decline.**".to_string(),
    }
}

fn sentiment_text(s: f64) -> String {
    format!("**Direction Estimate: {}**,**Magnitude Estimate: {:.4}**", u8::from(s >= 0.0), s.abs())
}

/// Deterministic stand-in for the chat model, keyed on the firm roster.
pub fn mock_responder(firms: Vec<SyntheticFirm>, recognizer: Arc<Recognizer>) -> MockResponder {
    Arc::new(move |request: &ChatRequest| {
        let text = request.payload();
        let content = match request.kind {
            PromptKind::SentimentTranscript | PromptKind::SentimentNews => sentiment_text(mock_sentiment(text)),
            PromptKind::Uncertainty => format!("**Uncertainty Score: {:.4}**", mock_uncertainty(text)),
            PromptKind::Investment => ordinal_text(mock_investment(text)),
            PromptKind::Economy => ordinal_text(mock_economy(text)),
            PromptKind::Recognize => {
                let ticker = firms
                    .iter()
                    .find(|f| text.contains(&f.name) || text.contains(&f.product))
                    .map_or("UNKN", |f| f.ticker.as_str());
                let year = cues().year.find(text).map_or(2019, |m| m.as_str().parse().unwrap_or(2019));
                format!("**Company Estimate: {ticker}**,**Year Estimate: {year}**")
            }
            PromptKind::Anonymize => {
                let spans = recognizer.recognize(text);
                anonymize(text, &spans, CategorySet::ALL).map(|a| a.text).unwrap_or_else(|_| text.to_string())
            }
        };
        ChatResponse::text(content)
    })
}

impl SyntheticData {
    pub fn recognizer_config(&self) -> RecognizerConfig {
        RecognizerConfig { gazetteer: self.gazetteer.clone(), number_patterns: true }
    }

    pub fn mock_provider(&self) -> Result<MockProvider> {
        let recognizer = Arc::new(Recognizer::new(&self.recognizer_config())?);
        Ok(MockProvider::new("synthetic").with_fallback(mock_responder(self.firms.clone(), recognizer)))
    }
}

fn eastern(date: NaiveDate, minutes_after_midnight: u32) -> DateTime<FixedOffset> {
    let naive = date.and_hms_opt(minutes_after_midnight / 60, minutes_after_midnight % 60, 0).unwrap();
    New_York.from_local_datetime(&naive).earliest().expect("no DST gap in the sampled hours").fixed_offset()
}

/// Generates firms, transcripts (and optional headlines), a weekday trading
/// calendar and a panel keyed on announcement dates.
pub fn generate(config: &SyntheticConfig) -> Result<SyntheticData> {
    if !(config.signal_to_noise > 1.0) {
        return Err(Error::Config(format!("signal_to_noise must exceed 1, got {}", config.signal_to_noise)));
    }
    if config.firms == 0 || config.slots == 0 {
        return Err(Error::Config("synthetic corpus needs at least one firm and one slot".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let firms = firm_roster(&mut rng, config.firms);
    let mut gazetteer = Gazetteer::new();
    for f in &firms {
        gazetteer.add(EntityType::Org, f.name.clone());
        gazetteer.add(EntityType::Person, f.ceo.clone());
        gazetteer.add(EntityType::Person, f.cfo.clone());
    }
    let calendar =
        TradingCalendar::weekdays(config.start, config.start + Duration::days((config.slots as i64) * 3 + 14));
    let days: Vec<NaiveDate> = calendar.dates().collect();

    // the lexicon part of the score is 0.5 * (2k - 10) / 10 with k ~ Bin(10, 1/2),
    // variance 0.025; the revenue cue adds x / 40 with x ~ N(0, sd)
    let lexicon_var = 0.025;
    let numeric_sd = 40.0 * (lexicon_var / (config.signal_to_noise - 1.0)).sqrt();

    let mut documents = Vec::new();
    let mut rows: Vec<(String, NaiveDate, f64, f64, Option<i32>, Option<i32>)> = Vec::new();
    for slot in 0..config.slots {
        for firm in &firms {
            let day = days[2 * slot];
            let minutes = rng.random_range(7 * 60..19 * 60);
            let timestamp = eastern(day, minutes);
            let leak = rng.random_bool(config.product_leak_rate.clamp(0.0, 1.0));
            let text = transcript_text(&mut rng, firm, day, numeric_sd, leak);
            let doc_id = format!("{}-{}", firm.ticker, day.format("%Y%m%d"));
            let date = announcement_date(&timestamp, &calendar)?;
            rows.push((
                firm.firm_id.clone(),
                date,
                mock_sentiment(&text),
                mock_uncertainty(&text),
                mock_investment(&text),
                mock_economy(&text),
            ));
            for h in 0..config.headlines_per_transcript {
                let s = mock_sentiment(&text);
                let (verb, tone) = if s >= 0.0 { ("gains", "strong") } else { ("slips", "weak") };
                documents.push(Document {
                    doc_id: format!("{doc_id}-h{h}"),
                    firm_id: firm.firm_id.clone(),
                    ticker: firm.ticker.clone(),
                    timestamp: timestamp + Duration::minutes(5 + h as i64),
                    kind: DocKind::Headline,
                    source: "Yahoo".into(),
                    text: format!("{} {verb} after {tone} quarter, revenue was up {}", firm.name, pct(s * 40.0)),
                    org_mentions: Some(1),
                    fiscal_year: None,
                });
            }
            documents.push(Document {
                doc_id,
                firm_id: firm.firm_id.clone(),
                ticker: firm.ticker.clone(),
                timestamp,
                kind: DocKind::Transcript,
                source: "synthetic".into(),
                text,
                org_mentions: None,
                fiscal_year: Some(reported_quarter(day).1),
            });
        }
    }
    documents.sort_by(|a, b| (a.timestamp, &a.doc_id).cmp(&(b.timestamp, &b.doc_id)));

    let n = rows.len();
    let mut panel = Frame::new(rows.iter().map(|r| r.0.clone()).collect(), rows.iter().map(|r| r.1).collect())?;
    let std_normal = Normal::new(0.0, 1.0).unwrap();
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..n).map(|_| std_normal.sample(rng)).collect() };
    let date_effect: std::collections::HashMap<NaiveDate, f64> =
        days.iter().map(|d| (*d, 0.5 * std_normal.sample(&mut rng))).collect();

    let fe = draw(&mut rng);
    let lag1 = draw(&mut rng);
    let eps = draw(&mut rng);
    let dgtw: Vec<f64> = (0..n)
        .map(|i| config.beta * rows[i].2 + date_effect[&rows[i].1] + 0.2 * fe[i] + 0.05 * lag1[i] + config.return_noise_sd * eps[i])
        .collect();
    let cutoff = days[config.slots];
    let vol_pre: Vec<f64> = draw(&mut rng).into_iter().map(|z| 2.0 + 0.3 * z).collect();
    let e = draw(&mut rng);
    let vol_post: Vec<f64> = (0..n).map(|i| 1.5 * rows[i].3 + 0.6 * vol_pre[i] + 0.2 * e[i]).collect();
    let capx_t = draw(&mut rng);
    let e = draw(&mut rng);
    let capx_t2: Vec<f64> = (0..n).map(|i| 0.3 * f64::from(rows[i].4.unwrap_or(0)) + 0.5 * capx_t[i] + 0.5 * e[i]).collect();
    let sale_lag = draw(&mut rng);
    let e = draw(&mut rng);
    let sale: Vec<f64> = (0..n).map(|i| 0.3 * f64::from(rows[i].5.unwrap_or(0)) + 0.3 * sale_lag[i] + 0.5 * e[i]).collect();
    let va_lag = draw(&mut rng);
    let e = draw(&mut rng);
    let va: Vec<f64> = (0..n).map(|i| 0.25 * f64::from(rows[i].5.unwrap_or(0)) + 0.3 * va_lag[i] + 0.5 * e[i]).collect();

    let mut put = |name: &str, v: Vec<f64>| panel.set_column(name, v.into_iter().map(Some).collect());
    put("DGTW", dgtw)?;
    put("Vol_post", vol_post)?;
    put("Capx_t+2", capx_t2)?;
    put("SaleChange_t", sale)?;
    put("ValueAddChange_t", va)?;
    put("FE", fe)?;
    put("DGTW_t-1", lag1)?;
    for name in ["DGTW_t-2", "DGTW_t-3", "DGTW_t-22_t-4", "DGTW_t-253_t-23", "ln_Size", "ln_BM", "ln_Turnover"] {
        put(name, draw(&mut rng))?;
    }
    put("Vol_pre", vol_pre)?;
    for name in ["Alpha_pre", "Abs_Abnormal_Ret"] {
        put(name, draw(&mut rng))?;
    }
    put("Capx_t", capx_t)?;
    for name in ["Leverage", "ln_Total_Asset", "Tangibility", "BM"] {
        put(name, draw(&mut rng))?;
    }
    put("SaleChange_t-2", sale_lag)?;
    put("ValueAddChange_t-2", va_lag)?;
    for name in ["TNIC3TSIMM", "TNIC3HHI"] {
        put(name, draw(&mut rng))?;
    }
    let coverage: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(0..25))).collect();
    put("Coverage", coverage)?;
    let nasdaq: Vec<f64> = (0..n).map(|_| f64::from(u8::from(rng.random_bool(0.4)))).collect();
    put("Nasdaq", nasdaq)?;
    let pre: Vec<f64> = rows.iter().map(|r| f64::from(u8::from(r.1 < cutoff))).collect();
    put("Pre", pre)?;

    Ok(SyntheticData { firms, documents, panel, calendar, gazetteer })
}

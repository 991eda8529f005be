//! Document ingestion, headline filters, announcement-date assignment, daily
//! aggregation and the signal/panel join.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use chrono::{DateTime, Datelike, FixedOffset, NaiveDate, NaiveTime, Weekday};
use chrono_tz::America::New_York;
use indexmap::IndexMap;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::entities::{CategorySet, EntityCategory, EntityType};
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::recognizer::Recognizer;
use crate::tokenize::Tokenizer;

/// Transcripts longer than this many tokens are dropped at ingestion.
pub const TRANSCRIPT_TOKEN_CAP: usize = 15_000;

/// Identifier columns and the variables a panel file may carry.
pub const PANEL_VARIABLES: [&str; 30] = [
    "DGTW",
    "Vol_post",
    "Capx_t+2",
    "SaleChange_t",
    "ValueAddChange_t",
    "FE",
    "DGTW_t-1",
    "DGTW_t-2",
    "DGTW_t-3",
    "DGTW_t-22_t-4",
    "DGTW_t-253_t-23",
    "ln_Size",
    "ln_BM",
    "ln_Turnover",
    "Vol_pre",
    "Alpha_pre",
    "Abs_Abnormal_Ret",
    "Capx_t",
    "Leverage",
    "ln_Total_Asset",
    "Tangibility",
    "BM",
    "SaleChange_t-2",
    "ValueAddChange_t-2",
    "TNIC3TSIMM",
    "TNIC3HHI",
    "Coverage",
    "Nasdaq",
    "Pre",
    "Recognition_Firm",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocKind {
    Transcript,
    Headline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub firm_id: String,
    pub ticker: String,
    /// RFC 3339 with an explicit offset.
    pub timestamp: DateTime<FixedOffset>,
    pub kind: DocKind,
    #[serde(default)]
    pub source: String,
    pub text: String,
    /// Distinct organizations mentioned (headlines); computed by the
    /// recognizer when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub org_mentions: Option<usize>,
    /// Fiscal year the document refers to, when it differs from the
    /// calendar year of the timestamp.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fiscal_year: Option<i32>,
}

impl Document {
    pub fn eastern_date(&self) -> NaiveDate {
        self.timestamp.with_timezone(&New_York).date_naive()
    }

    pub fn truth_year(&self) -> i32 {
        self.fiscal_year.unwrap_or_else(|| self.eastern_date().year())
    }
}

pub fn parse_documents(text: &str, origin: &str) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    let mut ids = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let ingest = |message: String| Error::Ingestion { path: origin.to_string(), line: i + 1, message };
        let doc: Document = serde_json::from_str(line).map_err(|e| ingest(e.to_string()))?;
        if !ids.insert(doc.doc_id.clone()) {
            return Err(ingest(format!("duplicate doc_id {:?}", doc.doc_id)));
        }
        docs.push(doc);
    }
    Ok(docs)
}

pub fn read_documents(path: impl AsRef<Path>) -> Result<Vec<Document>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_documents(&text, &path.display().to_string())
}

pub fn write_documents(path: impl AsRef<Path>, docs: &[Document]) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    for d in docs {
        serde_json::to_writer(&mut out, d)?;
        out.push(b'\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Valid trading dates, supplied as data.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TradingCalendar {
    dates: BTreeSet<NaiveDate>,
}

impl TradingCalendar {
    pub fn new(dates: impl IntoIterator<Item = NaiveDate>) -> Self {
        TradingCalendar { dates: dates.into_iter().collect() }
    }

    /// Every Monday–Friday in `[start, end]`; for tests and synthetic data.
    pub fn weekdays(start: NaiveDate, end: NaiveDate) -> Self {
        Self::new(start.iter_days().take_while(|d| *d <= end).filter(|d| !is_weekend(*d)))
    }

    /// One ISO date per line; blank lines and `#` comments ignored.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut dates = BTreeSet::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let d = crate::frame::parse_date(line).ok_or_else(|| Error::Ingestion {
                path: origin.to_string(),
                line: i + 1,
                message: format!("unparseable date {line:?}"),
            })?;
            dates.insert(d);
        }
        if dates.is_empty() {
            return Err(Error::Calendar(format!("{origin} lists no trading dates")));
        }
        Ok(TradingCalendar { dates })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text: String = self.dates.iter().map(|d| format!("{d}\n")).collect();
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.dates.contains(&date)
    }

    pub fn dates(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        self.dates.iter().copied()
    }

    fn check_range(&self, date: NaiveDate) -> Result<()> {
        match (self.dates.first(), self.dates.last()) {
            (Some(first), Some(last)) if date >= *first && date <= *last => Ok(()),
            (Some(first), Some(last)) => {
                Err(Error::Calendar(format!("{date} outside calendar range {first}..{last}")))
            }
            _ => Err(Error::Calendar("empty trading calendar".into())),
        }
    }

    /// First trading day strictly after `date`.
    pub fn next_after(&self, date: NaiveDate) -> Result<NaiveDate> {
        self.check_range(date)?;
        self.dates
            .range(date.succ_opt().unwrap_or(date)..)
            .next()
            .copied()
            .ok_or_else(|| Error::Calendar(format!("no trading day after {date} in the calendar")))
    }
}

pub fn is_weekend(date: NaiveDate) -> bool {
    matches!(date.weekday(), Weekday::Sat | Weekday::Sun)
}

fn market_close() -> NaiveTime {
    NaiveTime::from_hms_opt(16, 0, 0).unwrap()
}

/// Trading date a timestamp's information reaches prices: the same day if
/// strictly before 16:00 New York time on a trading day, else the next
/// trading day.
pub fn announcement_date(timestamp: &DateTime<FixedOffset>, calendar: &TradingCalendar) -> Result<NaiveDate> {
    let local = timestamp.with_timezone(&New_York);
    let date = local.date_naive();
    calendar.check_range(date)?;
    if calendar.contains(date) && local.time() < market_close() {
        Ok(date)
    } else {
        calendar.next_after(date)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadlineRule {
    Source,
    StockWord,
    SingleOrg,
    Weekend,
    Duplicate,
}

impl HeadlineRule {
    /// Evaluation order; a headline is attributed to its first failing rule.
    pub const ORDER: [HeadlineRule; 5] = [
        HeadlineRule::Source,
        HeadlineRule::StockWord,
        HeadlineRule::SingleOrg,
        HeadlineRule::Weekend,
        HeadlineRule::Duplicate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HeadlineRule::Source => "source",
            HeadlineRule::StockWord => "stock_word",
            HeadlineRule::SingleOrg => "single_org",
            HeadlineRule::Weekend => "weekend",
            HeadlineRule::Duplicate => "duplicate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct HeadlineFilterConfig {
    /// Kept source; `None` keeps every source.
    pub source: Option<String>,
}

impl Default for HeadlineFilterConfig {
    fn default() -> Self {
        HeadlineFilterConfig { source: Some("Yahoo".to_string()) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub raw: usize,
    pub kept: usize,
    pub drops: IndexMap<String, usize>,
}

fn stock_word() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\bstocks?\b").unwrap())
}

/// Case-folded text with whitespace collapsed, the key for duplicate removal.
pub fn normalize_headline(text: &str) -> String {
    text.split_whitespace().map(str::to_lowercase).collect::<Vec<_>>().join(" ")
}

fn distinct_orgs(recognizer: &Recognizer, text: &str) -> usize {
    recognizer
        .recognize(text)
        .into_iter()
        .filter(|s| s.entity_type == EntityType::Org)
        .map(|s| crate::entities::normalize_surface(&s.surface).to_string())
        .collect::<HashSet<_>>()
        .len()
}

/// Applies the headline filters in [`HeadlineRule::ORDER`]; the first
/// surviving copy of a duplicated headline is kept.
pub fn filter_headlines(
    headlines: Vec<Document>,
    config: &HeadlineFilterConfig,
    recognizer: Option<&Recognizer>,
) -> Result<(Vec<Document>, FilterReport)> {
    let raw = headlines.len();
    let mut drops: IndexMap<String, usize> = HeadlineRule::ORDER.iter().map(|r| (r.name().to_string(), 0)).collect();
    let mut seen = HashSet::new();
    let mut kept = Vec::new();
    for doc in headlines {
        let orgs = match (doc.org_mentions, recognizer) {
            (Some(n), _) => n,
            (None, Some(r)) => distinct_orgs(r, &doc.text),
            (None, None) => {
                return Err(Error::Config(format!(
                    "headline {} has no org_mentions and no recognizer was supplied",
                    doc.doc_id
                )))
            }
        };
        let failed = if config.source.as_deref().is_some_and(|s| !doc.source.eq_ignore_ascii_case(s)) {
            Some(HeadlineRule::Source)
        } else if stock_word().is_match(&doc.text) {
            Some(HeadlineRule::StockWord)
        } else if orgs != 1 {
            Some(HeadlineRule::SingleOrg)
        } else if is_weekend(doc.eastern_date()) {
            Some(HeadlineRule::Weekend)
        } else if !seen.insert(normalize_headline(&doc.text)) {
            Some(HeadlineRule::Duplicate)
        } else {
            None
        };
        match failed {
            Some(rule) => *drops.get_mut(rule.name()).unwrap() += 1,
            None => kept.push(doc),
        }
    }
    let report = FilterReport { raw, kept: kept.len(), drops };
    Ok((kept, report))
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TranscriptReport {
    pub raw: usize,
    pub over_token_cap: usize,
    pub same_day_duplicates: usize,
    pub kept: usize,
}

/// Drops transcripts over the token cap, then keeps the earliest transcript
/// per firm and announcement date.
pub fn ingest_transcripts(
    docs: Vec<Document>,
    calendar: &TradingCalendar,
    tokenizer: &dyn Tokenizer,
    token_cap: usize,
) -> Result<(Vec<Document>, TranscriptReport)> {
    let mut report = TranscriptReport { raw: docs.len(), ..Default::default() };
    let mut best: HashMap<(String, NaiveDate), Document> = HashMap::new();
    for doc in docs {
        if tokenizer.count(&doc.text) > token_cap {
            log::info!("dropping transcript {} over the {token_cap}-token cap", doc.doc_id);
            report.over_token_cap += 1;
            continue;
        }
        let key = (doc.firm_id.clone(), announcement_date(&doc.timestamp, calendar)?);
        match best.get(&key) {
            Some(existing) if (existing.timestamp, &existing.doc_id) <= (doc.timestamp, &doc.doc_id) => {
                log::info!("dropping transcript {}: {} is earlier on the same firm-day", doc.doc_id, existing.doc_id);
                report.same_day_duplicates += 1;
            }
            Some(existing) => {
                log::info!("dropping transcript {}: {} is earlier on the same firm-day", existing.doc_id, doc.doc_id);
                report.same_day_duplicates += 1;
                best.insert(key, doc);
            }
            None => {
                best.insert(key, doc);
            }
        }
    }
    let mut kept: Vec<Document> = best.into_values().collect();
    kept.sort_by(|a, b| (a.timestamp, &a.doc_id).cmp(&(b.timestamp, &b.doc_id)));
    report.kept = kept.len();
    Ok((kept, report))
}

/// Text variant a signal was extracted from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Variant {
    Raw,
    Sm,
    Trf,
    Llm,
    Num,
    Plc,
    Obj,
    Oth,
}

impl Variant {
    pub const ALL: [Variant; 8] =
        [Variant::Raw, Variant::Sm, Variant::Trf, Variant::Llm, Variant::Num, Variant::Plc, Variant::Obj, Variant::Oth];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Raw => "RAW",
            Variant::Sm => "SM",
            Variant::Trf => "TRF",
            Variant::Llm => "LLM",
            Variant::Num => "NUM",
            Variant::Plc => "PLC",
            Variant::Obj => "OBJ",
            Variant::Oth => "OTH",
        }
    }

    /// Categories masked by span-based anonymization; `None` for the raw text
    /// and the model-anonymized variant.
    pub fn categories(self) -> Option<CategorySet> {
        match self {
            Variant::Raw | Variant::Llm => None,
            Variant::Sm | Variant::Trf => Some(CategorySet::ALL),
            Variant::Num => Some(CategorySet::only(EntityCategory::Numbers)),
            Variant::Plc => Some(CategorySet::only(EntityCategory::Places)),
            Variant::Obj => Some(CategorySet::only(EntityCategory::Objects)),
            Variant::Oth => Some(CategorySet::only(EntityCategory::Others)),
        }
    }

    /// The single-category variant masking exactly `categories`, or TRF for
    /// all four.
    pub fn for_categories(categories: CategorySet) -> Option<Variant> {
        if categories == CategorySet::ALL {
            return Some(Variant::Trf);
        }
        [Variant::Num, Variant::Plc, Variant::Obj, Variant::Oth].into_iter().find(|v| v.categories() == Some(categories))
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        Variant::ALL.into_iter().find(|v| v.name() == upper).ok_or_else(|| {
            Error::Config(format!("unknown variant {s:?}; expected one of RAW, SM, TRF, LLM, NUM, PLC, OBJ, OTH"))
        })
    }
}

pub fn parse_variants(list: &str) -> Result<Vec<Variant>> {
    let mut out = Vec::new();
    for part in list.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let v: Variant = part.parse()?;
        if !out.contains(&v) {
            out.push(v);
        }
    }
    Ok(out)
}

/// Measure names used for signal columns.
pub const MEASURES: [&str; 4] = ["Sentiment", "Uncertainty", "Investment", "Economy"];

/// Name of the joined column holding `measure` for `variant`.
pub fn signal_column(measure: &str, variant: Variant) -> String {
    format!("{measure}_{variant}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalRecord {
    pub doc_id: String,
    pub firm_id: String,
    pub announcement_date: NaiveDate,
    pub variant: Variant,
    pub model: String,
    pub measure: String,
    pub value: Option<f64>,
    /// Records folded into this one by daily aggregation.
    #[serde(default = "one")]
    pub count: usize,
}

fn one() -> usize {
    1
}

impl SignalRecord {
    pub fn is_missing(&self) -> bool {
        self.value.is_none()
    }
}

/// Mean of the non-missing values; missing if there are none.
pub fn aggregate_daily(values: &[Option<f64>]) -> Option<f64> {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    if present.is_empty() {
        return None;
    }
    // sort so the floating-point sum does not depend on input order
    let mut present = present;
    present.sort_by(f64::total_cmp);
    Some(present.iter().sum::<f64>() / present.len() as f64)
}

type SignalKey = (String, NaiveDate, Variant, String, String);

/// Collapses records to one per (firm, date, variant, model, measure). The
/// aggregate keeps the smallest contributing doc id.
pub fn aggregate_signals(records: &[SignalRecord]) -> Vec<SignalRecord> {
    let mut groups: BTreeMap<SignalKey, Vec<&SignalRecord>> = BTreeMap::new();
    for r in records {
        let key = (r.firm_id.clone(), r.announcement_date, r.variant, r.model.clone(), r.measure.clone());
        groups.entry(key).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((firm_id, date, variant, model, measure), group)| {
            let values: Vec<Option<f64>> = group.iter().map(|r| r.value).collect();
            SignalRecord {
                doc_id: group.iter().map(|r| r.doc_id.as_str()).min().unwrap().to_string(),
                firm_id,
                announcement_date: date,
                variant,
                model,
                measure,
                value: aggregate_daily(&values),
                count: group.iter().map(|r| r.count).sum(),
            }
        })
        .collect()
}

pub fn write_signals(path: impl AsRef<Path>, records: &[SignalRecord]) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["doc_id", "firm_id", "announcement_date", "variant", "model", "measure", "value", "missing", "count"])?;
    for r in records {
        w.write_record([
            r.doc_id.clone(),
            r.firm_id.clone(),
            r.announcement_date.to_string(),
            r.variant.to_string(),
            r.model.clone(),
            r.measure.clone(),
            crate::frame::format_value(r.value),
            (r.value.is_none() as u8).to_string(),
            r.count.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_signals(path: impl AsRef<Path>) -> Result<Vec<SignalRecord>> {
    let path = path.as_ref();
    let origin = path.display().to_string();
    let mut rdr = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let ingest = |m: String| Error::Ingestion { path: origin.clone(), line: i + 2, message: m };
        let field = |j: usize| rec.get(j).unwrap_or("").to_string();
        out.push(SignalRecord {
            doc_id: field(0),
            firm_id: field(1),
            announcement_date: crate::frame::parse_date(&field(2)).ok_or_else(|| ingest(format!("bad date {:?}", field(2))))?,
            variant: field(3).parse()?,
            model: field(4),
            measure: field(5),
            value: crate::frame::parse_value(&field(6)).map_err(ingest)?,
            count: field(8).parse().map_err(|_| ingest(format!("bad count {:?}", field(8))))?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinReport {
    pub matched: usize,
    pub unmatched_signals: usize,
    pub unmatched_panel: usize,
    pub columns: Vec<String>,
}

/// Inner join of aggregated signals onto panel rows by (firm, date). Each
/// (measure, variant) becomes a column `{measure}_{variant}`; rows keep the
/// panel's order.
pub fn join_panel(signals: &[SignalRecord], panel: &Frame) -> Result<(Frame, JoinReport)> {
    panel.check_unique_keys()?;
    let models: BTreeSet<&str> = signals.iter().map(|s| s.model.as_str()).collect();
    if models.len() > 1 {
        return Err(Error::Config(format!(
            "signals from several models ({}); select one before joining",
            models.into_iter().collect::<Vec<_>>().join(", ")
        )));
    }
    let mut values: BTreeMap<String, HashMap<(&str, NaiveDate), Option<f64>>> = BTreeMap::new();
    let mut signal_keys: BTreeSet<(&str, NaiveDate)> = BTreeSet::new();
    for s in signals {
        let column = signal_column(&s.measure, s.variant);
        let key = (s.firm_id.as_str(), s.announcement_date);
        if values.entry(column.clone()).or_default().insert(key, s.value).is_some() {
            return Err(Error::Integrity(format!(
                "duplicate {column} signal for firm {} on {} after aggregation",
                s.firm_id, s.announcement_date
            )));
        }
        signal_keys.insert(key);
    }
    let panel_keys: HashSet<(&str, NaiveDate)> = panel.firm_id.iter().map(String::as_str).zip(panel.date.iter().copied()).collect();
    let rows: Vec<usize> = (0..panel.len())
        .filter(|&r| signal_keys.contains(&(panel.firm_id[r].as_str(), panel.date[r])))
        .collect();
    let mut frame = panel.take(&rows);
    let mut columns = Vec::new();
    for (column, map) in &values {
        if panel.has_column(column) {
            return Err(Error::Integrity(format!("panel already has a column named {column}")));
        }
        let col = rows.iter().map(|&r| map.get(&(panel.firm_id[r].as_str(), panel.date[r])).copied().flatten()).collect();
        frame.set_column(column.clone(), col)?;
        columns.push(column.clone());
    }
    let report = JoinReport {
        matched: rows.len(),
        unmatched_signals: signal_keys.iter().filter(|k| !panel_keys.contains(*k)).count(),
        unmatched_panel: panel.len() - rows.len(),
        columns,
    };
    if report.unmatched_signals > 0 || report.unmatched_panel > 0 {
        log::info!(
            "join: {} matched, {} unmatched signal keys, {} unmatched panel rows",
            report.matched,
            report.unmatched_signals,
            report.unmatched_panel
        );
    }
    Ok((frame, report))
}

/// Drops panel rows whose date is not a trading day, logging each one.
pub fn restrict_to_trading_days(panel: &Frame, calendar: &TradingCalendar) -> Frame {
    let rows: Vec<usize> = (0..panel.len())
        .filter(|&r| {
            let ok = calendar.contains(panel.date[r]);
            if !ok {
                log::warn!("dropping panel row {} {}: not a trading day", panel.firm_id[r], panel.date[r]);
            }
            ok
        })
        .collect();
    panel.take(&rows)
}

pub fn write_json(path: impl AsRef<Path>, value: &impl Serialize) -> Result<()> {
    let path = path.as_ref();
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    serde_json::to_writer_pretty(&mut file, value)?;
    file.write_all(b"\n").map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(s: &str) -> DateTime<FixedOffset> {
        DateTime::parse_from_rfc3339(s).unwrap()
    }

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn cal() -> TradingCalendar {
        TradingCalendar::weekdays(d(2024, 1, 1), d(2024, 12, 31))
    }

    #[test]
    fn announcement_examples() {
        // 2024-03-05 is a Tuesday; EST is UTC-5 until 2024-03-10
        assert_eq!(announcement_date(&ts("2024-03-05T15:00:00-05:00"), &cal()).unwrap(), d(2024, 3, 5));
        assert_eq!(announcement_date(&ts("2024-03-05T17:30:00-05:00"), &cal()).unwrap(), d(2024, 3, 6));
        assert_eq!(announcement_date(&ts("2024-03-08T17:30:00-05:00"), &cal()).unwrap(), d(2024, 3, 11));
        assert_eq!(announcement_date(&ts("2024-03-05T16:00:00-05:00"), &cal()).unwrap(), d(2024, 3, 6));
        // 19:59 UTC in July is 15:59 EDT
        assert_eq!(announcement_date(&ts("2024-07-09T19:59:00Z"), &cal()).unwrap(), d(2024, 7, 9));
        assert!(matches!(announcement_date(&ts("2025-03-05T10:00:00Z"), &cal()), Err(Error::Calendar(_))));
    }

    fn headline(id: &str, text: &str, when: &str, source: &str, orgs: usize) -> Document {
        Document {
            doc_id: id.into(),
            firm_id: "1".into(),
            ticker: "AAPL".into(),
            timestamp: ts(when),
            kind: DocKind::Headline,
            source: source.into(),
            text: text.into(),
            org_mentions: Some(orgs),
            fiscal_year: None,
        }
    }

    #[test]
    fn headline_filters() {
        let raw = vec![
            headline("a", "Apple unveils new chip", "2024-03-06T10:00:00-05:00", "Yahoo", 1),
            headline("b", "Tech stocks rally", "2024-03-06T10:00:00-05:00", "Yahoo", 1),
            headline("c", "Apple opens store", "2024-03-09T10:00:00-05:00", "Yahoo", 1),
            headline("d", "Apple and Google partner", "2024-03-06T10:00:00-05:00", "Yahoo", 2),
            headline("e", "Apple unveils  NEW chip", "2024-03-07T10:00:00-05:00", "Yahoo", 1),
            headline("f", "Apple unveils new chip", "2024-03-06T10:00:00-05:00", "Reuters", 1),
            headline("g", "Stockholm office for Apple", "2024-03-06T10:00:00-05:00", "Yahoo", 1),
        ];
        let (kept, report) = filter_headlines(raw, &HeadlineFilterConfig::default(), None).unwrap();
        let ids: Vec<&str> = kept.iter().map(|d| d.doc_id.as_str()).collect();
        assert_eq!(ids, ["a", "g"]);
        assert_eq!(report.drops["stock_word"], 1);
        assert_eq!(report.drops["weekend"], 1);
        assert_eq!(report.drops["single_org"], 1);
        assert_eq!(report.drops["duplicate"], 1);
        assert_eq!(report.drops["source"], 1);
        assert_eq!(report.drops.values().sum::<usize>(), report.raw - report.kept);
    }

    #[test]
    fn aggregation_examples() {
        assert_eq!(aggregate_daily(&[Some(0.4), Some(0.6)]), Some(0.5));
        assert_eq!(aggregate_daily(&[Some(0.7)]), Some(0.7));
        assert_eq!(aggregate_daily(&[Some(0.2), None, Some(0.8)]), Some(0.5));
        assert_eq!(aggregate_daily(&[None, None]), None);
    }

    fn sig(firm: &str, date: NaiveDate, value: f64) -> SignalRecord {
        SignalRecord {
            doc_id: format!("{firm}-{date}"),
            firm_id: firm.into(),
            announcement_date: date,
            variant: Variant::Raw,
            model: "m".into(),
            measure: "Sentiment".into(),
            value: Some(value),
            count: 1,
        }
    }

    #[test]
    fn join_counts_unmatched() {
        let csv = "permno,date,DGTW\n1,2024-03-05,0.5\n2,2024-03-05,0.1\n3,2024-03-05,0.2\n";
        let panel = Frame::from_reader(csv.as_bytes(), "t").unwrap();
        let signals = [sig("1", d(2024, 3, 5), 0.3), sig("2", d(2024, 3, 5), -0.1), sig("9", d(2024, 3, 5), 0.0)];
        let (frame, report) = join_panel(&signals, &panel).unwrap();
        assert_eq!(frame.len(), 2);
        assert_eq!(report.unmatched_signals, 1);
        assert_eq!(report.unmatched_panel, 1);
        assert_eq!(frame.column("Sentiment_RAW").unwrap(), &[Some(0.3), Some(-0.1)]);

        let empty = Frame::from_reader("permno,date,DGTW\n".as_bytes(), "t").unwrap();
        assert_eq!(join_panel(&signals, &empty).unwrap().0.len(), 0);

        let dup = [sig("1", d(2024, 3, 5), 0.3), sig("1", d(2024, 3, 5), 0.4)];
        assert!(matches!(join_panel(&dup, &panel), Err(Error::Integrity(_))));
        assert_eq!(join_panel(&aggregate_signals(&dup), &panel).unwrap().0.column("Sentiment_RAW").unwrap()[0], Some(0.35));
    }

    #[test]
    fn transcript_dedup_keeps_earliest() {
        let mut a = headline("late", "x", "2024-03-05T11:00:00-05:00", "", 0);
        a.kind = DocKind::Transcript;
        let mut b = a.clone();
        b.doc_id = "early".into();
        b.timestamp = ts("2024-03-05T09:00:00-05:00");
        let mut c = a.clone();
        c.doc_id = "long".into();
        c.text = "w ".repeat(20);
        let (kept, report) = ingest_transcripts(vec![a, b, c], &cal(), &crate::tokenize::WordTokenizer, 10).unwrap();
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].doc_id, "early");
        assert_eq!((report.over_token_cap, report.same_day_duplicates), (1, 1));
    }

    #[test]
    fn variant_categories() {
        assert_eq!(Variant::for_categories("numbers".parse().unwrap()), Some(Variant::Num));
        assert_eq!(Variant::for_categories(CategorySet::ALL), Some(Variant::Trf));
        assert_eq!(parse_variants("raw, TRF,raw").unwrap(), [Variant::Raw, Variant::Trf]);
        assert!(parse_variants("XYZ").is_err());
    }

    #[test]
    fn calendar_file() {
        let c = TradingCalendar::parse("# dates\n2024-03-05\n2024-03-07\n", "t").unwrap();
        assert_eq!(c.next_after(d(2024, 3, 5)).unwrap(), d(2024, 3, 7));
        assert!(TradingCalendar::parse("2024-13-01\n", "t").is_err());
    }
}

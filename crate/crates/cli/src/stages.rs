//! Pipeline stages over files. Each stage reads its inputs from the corpus
//! or from earlier stage directories under the output root.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anonloss::corpus::{
    aggregate_signals, filter_headlines, ingest_transcripts, join_panel, read_documents, read_signals,
    restrict_to_trading_days, write_documents, write_json, write_signals, DocKind, Document, FilterReport,
    SignalRecord, TradingCalendar, TranscriptReport, Variant,
};
use anonloss::evaluation::{recognition_report, EvaluationConfig, run_battery, write_recognition, write_report, BatteryReport, RecognitionReport};
use anonloss::llm::{Gateway, HttpProvider, MockProvider, Provider, ResponseCache};
use anonloss::pipeline::{
    anonymize_documents, auxiliary_signals, extract_signals, recognize_documents, DocRecognition, DocStats, SpanSource,
    VariantText,
};
use anonloss::recognizer::{read_sidecar, write_sidecar, Gazetteer, Recognizer, RecognizerConfig};
use anonloss::synthetic::{generate, mock_responder, SyntheticConfig, SyntheticFirm};
use anonloss::tokenize::VocabTokenizer;
use anonloss::{Error, Frame, Result, Tokenizer, WordTokenizer};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{ProviderKind, Settings};
use crate::manifest::Manifest;

pub const ANONYMIZE: &str = "anonymize";
pub const EXTRACT: &str = "extract";
pub const RECOGNIZE: &str = "recognize";
pub const EVALUATE: &str = "evaluate";
pub const REPORT: &str = "report";

pub struct Runner {
    pub settings: Settings,
    pub force: bool,
    gateway: Option<Gateway>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IngestReport {
    pub transcripts: TranscriptReport,
    pub headlines: FilterReport,
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Ingestion {
                path: path.display().to_string(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        out.push(b'\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Ingestion { path: path.display().to_string(), line: 1, message: e.to_string() })
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn variant_file(variant: Variant) -> String {
    format!("variants/{variant}.jsonl")
}

impl Runner {
    pub fn new(settings: Settings, force: bool) -> Self {
        Runner { settings, force, gateway: None }
    }

    fn stage_dir(&self, stage: &str) -> PathBuf {
        self.settings.out.join(stage)
    }

    fn tokenizer(&self) -> Result<Box<dyn Tokenizer>> {
        Ok(match &self.settings.vocab {
            Some(path) => Box::new(VocabTokenizer::load(path)?),
            None => Box::new(WordTokenizer),
        })
    }

    fn calendar(&self) -> Result<TradingCalendar> {
        TradingCalendar::load(self.settings.require(&self.settings.calendar, "calendar")?)
    }

    fn recognizer_config(&self) -> Result<RecognizerConfig> {
        let gazetteer = match &self.settings.gazetteer {
            Some(p) => Gazetteer::load(p)?,
            None => Gazetteer::new(),
        };
        Ok(RecognizerConfig { gazetteer, number_patterns: true })
    }

    fn provider(&self) -> Result<Arc<dyn Provider>> {
        let s = &self.settings;
        Ok(match s.provider {
            ProviderKind::Http => Arc::new(HttpProvider::from_env(&s.base_url, &s.api_key_env, s.provider_settings.clone())?),
            ProviderKind::Mock => {
                let firms: Vec<SyntheticFirm> = match &s.mock_firms {
                    Some(p) => read_json(p)?,
                    None => Vec::new(),
                };
                let recognizer = Arc::new(Recognizer::new(&self.recognizer_config()?)?);
                let mut mock = MockProvider::new("cli")
                    .with_settings(s.provider_settings.clone())
                    .with_fallback(mock_responder(firms, recognizer));
                if let Some(table) = &s.mock_table {
                    mock.load_table(table)?;
                }
                Arc::new(mock)
            }
        })
    }

    fn gateway(&mut self) -> Result<&Gateway> {
        if self.gateway.is_none() {
            let provider = self.provider()?;
            let cache = ResponseCache::open(&self.settings.cache_dir)?;
            let gateway = Gateway::new(provider, cache, self.settings.gateway.clone()).with_tokenizer(self.tokenizer()?);
            self.gateway = Some(gateway);
        }
        Ok(self.gateway.as_ref().expect("set above"))
    }

    fn provider_fingerprint(&mut self) -> Result<String> {
        Ok(self.gateway()?.provider().id())
    }

    /// Runs `body` unless the stage's manifest is current.
    fn stage(
        &mut self,
        stage: &str,
        settings: serde_json::Value,
        inputs: Vec<PathBuf>,
        outputs: &[&str],
        body: impl FnOnce(&mut Self, &Path) -> Result<()>,
    ) -> Result<()> {
        let dir = self.stage_dir(stage);
        let manifest = Manifest::new(stage, settings, &inputs, outputs, &self.settings.out)?;
        if !self.force && manifest.is_current(&dir) {
            log::info!("{stage}: up to date, skipping");
            return Ok(());
        }
        create_dir(&dir)?;
        Manifest::invalidate(&dir)?;
        log::info!("{stage}: running");
        body(self, &dir)?;
        manifest.commit(&dir)
    }

    fn variants_json(&self) -> serde_json::Value {
        json!(self.settings.variants.iter().map(|v| v.name()).collect::<Vec<_>>())
    }

    pub fn anonymize(&mut self) -> Result<()> {
        let uses_model = self.settings.variants.contains(&Variant::Llm);
        let fingerprint = if uses_model { Some(self.provider_fingerprint()?) } else { None };
        let s = &self.settings;
        let documents = s.require(&s.documents, "documents")?.to_path_buf();
        let mut inputs = vec![documents.clone(), self.settings.require(&s.calendar, "calendar")?.to_path_buf()];
        inputs.extend(s.gazetteer.iter().cloned());
        inputs.extend(s.spans.iter().cloned());
        inputs.extend(s.vocab.iter().cloned());
        let settings = json!({
            "variants": self.variants_json(),
            "token_cap": s.token_cap,
            "headlines": s.headlines,
            "provider": fingerprint,
        });
        let mut outputs = vec!["documents.jsonl".to_string(), "spans.jsonl".into(), "stats.jsonl".into(), "ingest.json".into()];
        outputs.extend(self.settings.variants.iter().map(|v| variant_file(*v)));
        let outputs: Vec<&str> = outputs.iter().map(String::as_str).collect();
        self.stage(ANONYMIZE, settings, inputs, &outputs, |r, dir| {
            let calendar = r.calendar()?;
            let tokenizer = r.tokenizer()?;
            let recognizer = Recognizer::new(&r.recognizer_config()?)?;
            let external = r.settings.spans.as_ref().map(read_sidecar).transpose()?;
            let (transcripts, headlines): (Vec<Document>, Vec<Document>) =
                read_documents(&documents)?.into_iter().partition(|d| d.kind == DocKind::Transcript);
            let (mut kept, transcripts) =
                ingest_transcripts(transcripts, &calendar, tokenizer.as_ref(), r.settings.token_cap)?;
            let (kept_headlines, headlines) = filter_headlines(headlines, &r.settings.headlines, Some(&recognizer))?;
            kept.extend(kept_headlines);
            kept.sort_by(|a, b| (a.timestamp, &a.doc_id).cmp(&(b.timestamp, &b.doc_id)));
            write_json(dir.join("ingest.json"), &IngestReport { transcripts, headlines })?;

            let variants = r.settings.variants.clone();
            let jobs = r.settings.jobs;
            let gateway = if uses_model { Some(r.gateway()?) } else { None };
            let source = SpanSource { recognizer: &recognizer, external: external.as_ref() };
            let out = anonymize_documents(&kept, &source, &variants, gateway, tokenizer.as_ref(), jobs)?;

            write_documents(dir.join("documents.jsonl"), &kept)?;
            let mut sidecar = Vec::new();
            for (doc_id, spans) in &out.spans {
                write_sidecar(&mut sidecar, doc_id, spans)?;
            }
            let path = dir.join("spans.jsonl");
            std::fs::write(&path, sidecar).map_err(|e| Error::io(&path, e))?;
            write_jsonl(&dir.join("stats.jsonl"), &out.stats)?;
            create_dir(&dir.join("variants"))?;
            for v in variants {
                let texts: Vec<&VariantText> = out.texts.iter().filter(|t| t.variant == v).collect();
                write_jsonl(&dir.join(variant_file(v)), &texts)?;
            }
            Ok(())
        })
    }

    fn anonymized_inputs(&self) -> Vec<PathBuf> {
        let dir = self.stage_dir(ANONYMIZE);
        let mut inputs = vec![dir.join("documents.jsonl")];
        inputs.extend(self.settings.variants.iter().map(|v| dir.join(variant_file(*v))));
        inputs
    }

    fn read_anonymized(&self) -> Result<(Vec<Document>, Vec<VariantText>)> {
        let dir = self.stage_dir(ANONYMIZE);
        let docs = read_documents(dir.join("documents.jsonl"))?;
        let mut texts = Vec::new();
        for v in &self.settings.variants {
            texts.extend(read_jsonl::<VariantText>(&dir.join(variant_file(*v)))?);
        }
        Ok((docs, texts))
    }

    pub fn extract(&mut self) -> Result<()> {
        let mut inputs = self.anonymized_inputs();
        inputs.push(self.settings.require(&self.settings.calendar, "calendar")?.to_path_buf());
        let settings = json!({
            "variants": self.variants_json(),
            "measures": self.settings.measures,
            "encoding": self.settings.encoding,
            "provider": self.provider_fingerprint()?,
        });
        self.stage(EXTRACT, settings, inputs, &["signals.csv", "daily.csv", "failures.jsonl"], |r, dir| {
            let (docs, texts) = r.read_anonymized()?;
            let calendar = r.calendar()?;
            let measures = r.settings.measures.clone();
            let encoding = r.settings.encoding;
            let jobs = r.settings.jobs;
            let (records, failures) = extract_signals(r.gateway()?, &docs, &texts, &measures, &calendar, &encoding, jobs)?;
            if !failures.is_empty() {
                log::warn!("{} extraction answers failed to parse and were recorded as missing", failures.len());
            }
            write_signals(dir.join("signals.csv"), &records)?;
            write_signals(dir.join("daily.csv"), &aggregate_signals(&records))?;
            write_jsonl(&dir.join("failures.jsonl"), &failures)
        })
    }

    pub fn recognize(&mut self) -> Result<()> {
        let mut inputs = self.anonymized_inputs();
        inputs.push(self.stage_dir(ANONYMIZE).join("stats.jsonl"));
        inputs.push(self.settings.require(&self.settings.calendar, "calendar")?.to_path_buf());
        let settings = json!({ "variants": self.variants_json(), "provider": self.provider_fingerprint()? });
        self.stage(RECOGNIZE, settings, inputs, &["recognition.jsonl", "report.json", "signals.csv", "daily.csv"], |r, dir| {
            let (docs, texts) = r.read_anonymized()?;
            let stats: Vec<DocStats> = read_jsonl(&r.stage_dir(ANONYMIZE).join("stats.jsonl"))?;
            let calendar = r.calendar()?;
            let jobs = r.settings.jobs;
            let variants = r.settings.variants.clone();
            let gateway = r.gateway()?;
            let model = gateway.provider().settings().model.clone();
            let hits = recognize_documents(gateway, &docs, &texts, jobs)?;
            let mut reports: Vec<(String, RecognitionReport)> = Vec::new();
            for v in &variants {
                let outcomes: Vec<_> = hits.iter().filter(|h| h.variant == *v).map(|h| h.outcome).collect();
                if !outcomes.is_empty() {
                    reports.push((v.to_string(), recognition_report(&outcomes)?));
                }
            }
            let aux = auxiliary_signals(&docs, &stats, &hits, &calendar, &model)?;
            write_jsonl(&dir.join("recognition.jsonl"), &hits)?;
            write_json(dir.join("report.json"), &reports)?;
            write_signals(dir.join("signals.csv"), &aux)?;
            write_signals(dir.join("daily.csv"), &aggregate_signals(&aux))
        })
    }

    pub fn evaluate(&mut self) -> Result<()> {
        let s = &self.settings;
        let panel = s.require(&s.panel, "panel")?.to_path_buf();
        let calendar = s.require(&s.calendar, "calendar")?.to_path_buf();
        let extracted = self.stage_dir(EXTRACT).join("daily.csv");
        let recognized = self.stage_dir(RECOGNIZE).join("daily.csv");
        let stats = self.stage_dir(ANONYMIZE).join("stats.jsonl");
        let documents = self.stage_dir(ANONYMIZE).join("documents.jsonl");
        let mut inputs = vec![panel.clone(), calendar, extracted.clone()];
        let aux_source = if recognized.exists() { recognized.clone() } else { stats.clone() };
        inputs.push(aux_source.clone());
        if !recognized.exists() {
            inputs.push(documents.clone());
        }
        let settings = json!({
            "batteries": s.batteries.iter().map(|b| b.name()).collect::<Vec<_>>(),
            // thread count does not change results
            "evaluation": EvaluationConfig { jobs: 1, ..s.evaluation.clone() },
        });
        self.stage(EVALUATE, settings, inputs, &["panel.csv", "join.json", "batteries.json"], |r, dir| {
            let calendar = r.calendar()?;
            let mut signals: Vec<SignalRecord> = read_signals(&extracted)?;
            if aux_source == recognized {
                signals.extend(read_signals(&recognized)?);
            } else {
                log::info!("no recognition output; evaluating without recognition signals");
                let docs = read_documents(&documents)?;
                let stats: Vec<DocStats> = read_jsonl(&stats)?;
                let model = signals.first().map(|s| s.model.clone()).unwrap_or_default();
                let none: Vec<DocRecognition> = Vec::new();
                signals.extend(aggregate_signals(&auxiliary_signals(&docs, &stats, &none, &calendar, &model)?));
            }
            let frame = restrict_to_trading_days(&Frame::read_csv(&panel)?, &calendar);
            let (joined, join) = join_panel(&signals, &frame)?;
            joined.write_csv(dir.join("panel.csv"))?;
            write_json(dir.join("join.json"), &join)?;
            let mut reports = Vec::new();
            for &battery in &r.settings.batteries {
                let report = run_battery(battery, &joined, &r.settings.evaluation).unwrap_or_else(|e| {
                    log::warn!("battery {} not run: {e}", battery.name());
                    BatteryReport {
                        name: battery.name().to_string(),
                        fits: Vec::new(),
                        tables: Vec::new(),
                        notes: vec![format!("battery not run: {e}")],
                    }
                });
                reports.push(report);
            }
            write_json(dir.join("batteries.json"), &reports)
        })
    }

    pub fn report(&mut self) -> Result<()> {
        let batteries = self.stage_dir(EVALUATE).join("batteries.json");
        let recognition = self.stage_dir(RECOGNIZE).join("report.json");
        let mut inputs = vec![batteries.clone()];
        if recognition.exists() {
            inputs.push(recognition.clone());
        }
        let with_recognition = recognition.exists();
        let mut outputs: Vec<String> = self.settings.batteries.iter().map(|b| format!("{}/table.txt", b.name())).collect();
        if with_recognition {
            outputs.push("recognition/recognition.csv".into());
        }
        let outputs: Vec<&str> = outputs.iter().map(String::as_str).collect();
        self.stage(REPORT, json!({}), inputs, &outputs, |_, dir| {
            let reports: Vec<BatteryReport> = read_json(&batteries)?;
            write_report(dir, &reports)?;
            if with_recognition {
                let rec: Vec<(String, RecognitionReport)> = read_json(&recognition)?;
                write_recognition(&dir.join("recognition"), &rec)?;
            }
            Ok(())
        })
    }

    pub fn run_all(&mut self) -> Result<()> {
        self.anonymize()?;
        self.extract()?;
        self.recognize()?;
        self.evaluate()?;
        self.report()
    }
}

/// Writes a synthetic corpus and a config file that runs it with the mock
/// model.
pub fn synth(out: &Path, config: &SyntheticConfig) -> Result<()> {
    let data = generate(config)?;
    create_dir(out)?;
    write_documents(out.join("documents.jsonl"), &data.documents)?;
    data.panel.write_csv(out.join("panel.csv"))?;
    data.calendar.write(out.join("calendar.txt"))?;
    let gaz = out.join("gazetteer.tsv");
    std::fs::write(&gaz, data.gazetteer.to_text()).map_err(|e| Error::io(&gaz, e))?;
    write_json(out.join("firms.json"), &data.firms)?;
    let toml = "[corpus]\ndocuments = \"documents.jsonl\"\npanel = \"panel.csv\"\ncalendar = \"calendar.txt\"\n\
                gazetteer = \"gazetteer.tsv\"\n\n[provider]\nkind = \"mock\"\nmock_firms = \"firms.json\"\n\n\
                [pipeline]\nmeasures = [\"sentiment\", \"uncertainty\", \"investment\", \"economy\"]\n";
    let path = out.join("anonloss.toml");
    std::fs::write(&path, toml).map_err(|e| Error::io(&path, e))
}

//! TOML configuration and its merge with command-line flags.
//!
//! Precedence is flag, then config file, then built-in default. Relative
//! paths in a config file resolve against the file's directory.

use std::path::{Path, PathBuf};

use anonloss::corpus::{parse_variants, HeadlineFilterConfig, Variant, TRANSCRIPT_TOKEN_CAP};
use anonloss::entities::{CategorySet, EntityCategory};
use anonloss::evaluation::{Battery, EvaluationConfig};
use anonloss::llm::{GatewayConfig, OrdinalEncoding, ProviderSettings};
use anonloss::pipeline::{parse_measures, Measure};
use anonloss::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub seed: Option<u64>,
    pub corpus: CorpusSection,
    pub provider: ProviderSection,
    pub pipeline: PipelineSection,
    pub evaluation: Option<EvaluationConfig>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSection {
    pub documents: Option<PathBuf>,
    pub panel: Option<PathBuf>,
    pub calendar: Option<PathBuf>,
    pub gazetteer: Option<PathBuf>,
    /// External tagger output, JSON Lines of spans per document.
    pub spans: Option<PathBuf>,
    /// One token per line; the word tokenizer is used when absent.
    pub vocab: Option<PathBuf>,
    pub headline_source: Option<String>,
    pub token_cap: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProviderSection {
    pub kind: Option<String>,
    pub base_url: Option<String>,
    pub api_key_env: Option<String>,
    /// Synthetic firm roster for the mock model.
    pub mock_firms: Option<PathBuf>,
    /// Canned answers, JSON Lines of `{kind, payload_sha256, response}`.
    pub mock_table: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub settings: Option<ProviderSettings>,
    pub gateway: Option<GatewayConfig>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineSection {
    pub variants: Option<Vec<String>>,
    pub categories: Option<Vec<String>>,
    pub measures: Option<Vec<String>>,
    pub ordinal_encoding: Option<[f64; 5]>,
    pub batteries: Option<Vec<String>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: FileConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.rebase(base);
        Ok(config)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p.as_mut() {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        };
        fix(&mut self.out);
        fix(&mut self.corpus.documents);
        fix(&mut self.corpus.panel);
        fix(&mut self.corpus.calendar);
        fix(&mut self.corpus.gazetteer);
        fix(&mut self.corpus.spans);
        fix(&mut self.corpus.vocab);
        fix(&mut self.provider.mock_firms);
        fix(&mut self.provider.mock_table);
        fix(&mut self.provider.cache_dir);
    }
}

/// Values given on the command line; `None` defers to the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub seed: Option<u64>,
    pub provider: Option<String>,
    pub categories: Option<String>,
    pub variants: Option<String>,
    pub measures: Option<String>,
    pub batteries: Option<String>,
    pub documents: Option<PathBuf>,
    pub panel: Option<PathBuf>,
    pub calendar: Option<PathBuf>,
    pub gazetteer: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    Mock,
    Http,
}

/// Fully resolved run settings.
#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    pub out: PathBuf,
    pub jobs: usize,
    pub seed: u64,
    pub documents: Option<PathBuf>,
    pub panel: Option<PathBuf>,
    pub calendar: Option<PathBuf>,
    pub gazetteer: Option<PathBuf>,
    pub spans: Option<PathBuf>,
    pub vocab: Option<PathBuf>,
    pub headlines: HeadlineFilterConfig,
    pub token_cap: usize,
    pub provider: ProviderKind,
    pub base_url: String,
    pub api_key_env: String,
    pub mock_firms: Option<PathBuf>,
    pub mock_table: Option<PathBuf>,
    pub cache_dir: PathBuf,
    pub provider_settings: ProviderSettings,
    pub gateway: GatewayConfig,
    pub variants: Vec<Variant>,
    pub measures: Vec<Measure>,
    pub encoding: OrdinalEncoding,
    pub batteries: Vec<Battery>,
    pub evaluation: EvaluationConfig,
}

pub fn parse_categories(list: &str) -> Result<CategorySet> {
    let mut set = CategorySet::NONE;
    for part in list.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if part.eq_ignore_ascii_case("all") {
            set = set.union(CategorySet::ALL);
            continue;
        }
        let category = EntityCategory::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(part))
            .ok_or_else(|| Error::Config(format!("unknown category {part:?}; expected numbers, places, objects or others")))?;
        set = set.with(category);
    }
    if set.is_empty() {
        return Err(Error::Config("no entity category given".into()));
    }
    Ok(set)
}

/// RAW plus the variant that masks exactly `categories`.
fn variants_for(categories: CategorySet) -> Result<Vec<Variant>> {
    let v = Variant::for_categories(categories).ok_or_else(|| {
        Error::Config("no variant masks exactly that combination of categories; use one category or all".into())
    })?;
    Ok(vec![Variant::Raw, v])
}

fn parse_batteries(list: &str) -> Result<Vec<Battery>> {
    list.split(',').map(str::trim).filter(|p| !p.is_empty()).map(str::parse).collect()
}

impl Settings {
    pub fn resolve(file: FileConfig, flags: Overrides) -> Result<Self> {
        let provider = match flags.provider.or(file.provider.kind).as_deref().unwrap_or("mock") {
            "mock" => ProviderKind::Mock,
            "http" => ProviderKind::Http,
            other => return Err(Error::Config(format!("unknown provider {other:?}; expected mock or http"))),
        };
        let variants = match (flags.categories, flags.variants) {
            (Some(_), Some(_)) => return Err(Error::Config("give either --categories or --variants, not both".into())),
            (Some(c), None) => variants_for(parse_categories(&c)?)?,
            (None, Some(v)) => parse_variants(&v)?,
            (None, None) => match (file.pipeline.categories, file.pipeline.variants) {
                (Some(_), Some(_)) => {
                    return Err(Error::Config("pipeline.categories and pipeline.variants are exclusive".into()))
                }
                (Some(c), None) => variants_for(parse_categories(&c.join(","))?)?,
                (None, Some(v)) => parse_variants(&v.join(","))?,
                (None, None) => vec![Variant::Raw, Variant::Trf],
            },
        };
        if variants.is_empty() {
            return Err(Error::Config("no variants requested".into()));
        }
        let measures = match flags.measures.or(file.pipeline.measures.map(|m| m.join(","))) {
            Some(m) => parse_measures(&m)?,
            None => vec![Measure::Sentiment],
        };
        if measures.is_empty() {
            return Err(Error::Config("no measures requested".into()));
        }
        let mut evaluation = file.evaluation.unwrap_or_default();
        let batteries = match flags.batteries.or(file.pipeline.batteries.map(|b| b.join(","))) {
            Some(b) => parse_batteries(&b)?,
            None => Battery::ALL.to_vec(),
        };
        let jobs = flags.jobs.or(file.jobs).unwrap_or(1);
        if jobs == 0 {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        evaluation.jobs = jobs;
        let out = flags.out.or(file.out).unwrap_or_else(|| PathBuf::from("anonloss-out"));
        let cache_dir = file.provider.cache_dir.unwrap_or_else(|| out.join("cache"));
        let mut provider_settings = file.provider.settings.unwrap_or_default();
        if provider == ProviderKind::Mock && provider_settings.model == ProviderSettings::default().model {
            provider_settings.model = "mock".into();
        }
        Ok(Settings {
            jobs,
            seed: flags.seed.or(file.seed).unwrap_or(7),
            documents: flags.documents.or(file.corpus.documents),
            panel: flags.panel.or(file.corpus.panel),
            calendar: flags.calendar.or(file.corpus.calendar),
            gazetteer: flags.gazetteer.or(file.corpus.gazetteer),
            spans: file.corpus.spans,
            vocab: file.corpus.vocab,
            headlines: match file.corpus.headline_source {
                Some(s) if s.eq_ignore_ascii_case("any") => HeadlineFilterConfig { source: None },
                Some(s) => HeadlineFilterConfig { source: Some(s) },
                None => HeadlineFilterConfig::default(),
            },
            token_cap: file.corpus.token_cap.unwrap_or(TRANSCRIPT_TOKEN_CAP),
            provider,
            base_url: file.provider.base_url.unwrap_or_else(|| "https://api.openai.com/v1".into()),
            api_key_env: file.provider.api_key_env.unwrap_or_else(|| "ANONLOSS_API_KEY".into()),
            mock_firms: file.provider.mock_firms,
            mock_table: file.provider.mock_table,
            cache_dir,
            provider_settings,
            gateway: file.provider.gateway.unwrap_or_default(),
            variants,
            measures,
            encoding: file.pipeline.ordinal_encoding.map(OrdinalEncoding).unwrap_or_default(),
            batteries,
            evaluation,
            out,
        })
    }

    pub fn require<'a>(&self, path: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
        path.as_deref()
            .ok_or_else(|| Error::Config(format!("no {what} given; set corpus.{what} in the config or pass --{what}")))
    }
}

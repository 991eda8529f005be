use std::sync::{Arc, Condvar, Mutex};
use std::time::{Duration, Instant};

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cache::{CacheEntry, ResponseCache};
use super::parse::parse_response;
use super::provider::{ChatMessage, ChatRequest, ChatResponse, Provider, ProviderError, Role};
use super::{Extraction, ExtractionResult, PromptKind};
use crate::entities::{placeholder_regex, EntityType, Placeholder};
use crate::error::{Error, Result};
use crate::tokenize::{Tokenizer, WordTokenizer};

/// Follow-up sent once when an answer does not parse.
pub const REASK_MESSAGE: &str =
    "Your previous answer did not follow the required output format. Answer again using exactly the required format, with no other text.";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    /// Attempts per request for transient failures (first try included).
    pub max_attempts: usize,
    pub initial_backoff_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { max_attempts: 3, initial_backoff_ms: 500 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GatewayConfig {
    pub retry: RetryPolicy,
    pub max_in_flight: usize,
    /// Estimated prompt+payload tokens allowed per minute; `None` disables
    /// the budget.
    pub tokens_per_minute: Option<usize>,
}

impl Default for GatewayConfig {
    fn default() -> Self {
        GatewayConfig { retry: RetryPolicy::default(), max_in_flight: 8, tokens_per_minute: None }
    }
}

/// Bounds concurrent requests and spends a per-minute token budget.
#[derive(Debug)]
pub struct RateLimiter {
    max_in_flight: usize,
    tokens_per_minute: Option<usize>,
    state: Mutex<LimiterState>,
    freed: Condvar,
}

#[derive(Debug)]
struct LimiterState {
    in_flight: usize,
    available: f64,
    refilled_at: Instant,
}

pub struct Permit<'a> {
    limiter: &'a RateLimiter,
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut state = self.limiter.state.lock().unwrap();
        state.in_flight -= 1;
        self.limiter.freed.notify_one();
    }
}

impl RateLimiter {
    pub fn new(max_in_flight: usize, tokens_per_minute: Option<usize>) -> Self {
        RateLimiter {
            max_in_flight: max_in_flight.max(1),
            tokens_per_minute,
            state: Mutex::new(LimiterState {
                in_flight: 0,
                available: tokens_per_minute.unwrap_or(0) as f64,
                refilled_at: Instant::now(),
            }),
            freed: Condvar::new(),
        }
    }

    pub fn acquire(&self, tokens: usize) -> Permit<'_> {
        let mut state = self.state.lock().unwrap();
        loop {
            if let Some(budget) = self.tokens_per_minute {
                let now = Instant::now();
                let elapsed = now.duration_since(state.refilled_at).as_secs_f64();
                state.available = (state.available + elapsed * budget as f64 / 60.0).min(budget as f64);
                state.refilled_at = now;
            }
            // a request larger than the whole budget waits for a full bucket
            let needed = self.tokens_per_minute.map(|b| tokens.min(b) as f64);
            let budget_ok = needed.is_none_or(|n| state.available >= n);
            if state.in_flight < self.max_in_flight && budget_ok {
                state.in_flight += 1;
                if let Some(n) = needed {
                    state.available -= n;
                }
                return Permit { limiter: self };
            }
            let wait = match (budget_ok, self.tokens_per_minute, needed) {
                (false, Some(budget), Some(n)) => {
                    Duration::from_secs_f64(((n - state.available) * 60.0 / budget as f64).max(0.001))
                }
                _ => Duration::from_millis(50),
            };
            state = self.freed.wait_timeout(state, wait).unwrap().0;
        }
    }

    pub fn in_flight(&self) -> usize {
        self.state.lock().unwrap().in_flight
    }
}

/// Uniform entry point for every prompt kind.
pub struct Gateway {
    provider: Arc<dyn Provider>,
    cache: ResponseCache,
    limiter: RateLimiter,
    config: GatewayConfig,
    tokenizer: Box<dyn Tokenizer>,
}

impl std::fmt::Debug for Gateway {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Gateway")
            .field("provider", &self.provider.id())
            .field("cache", &self.cache)
            .field("config", &self.config)
            .finish_non_exhaustive()
    }
}

impl Gateway {
    pub fn new(provider: Arc<dyn Provider>, cache: ResponseCache, config: GatewayConfig) -> Self {
        let limiter = RateLimiter::new(config.max_in_flight, config.tokens_per_minute);
        Gateway { provider, cache, limiter, config, tokenizer: Box::new(WordTokenizer) }
    }

    pub fn with_tokenizer(mut self, tokenizer: Box<dyn Tokenizer>) -> Self {
        self.tokenizer = tokenizer;
        self
    }

    pub fn provider(&self) -> &dyn Provider {
        self.provider.as_ref()
    }

    pub fn cache(&self) -> &ResponseCache {
        &self.cache
    }

    fn send(&self, request: &ChatRequest) -> Result<ChatResponse> {
        let estimate = self.tokenizer.count(request.payload()) + self.tokenizer.count(request.kind.template());
        let attempts = self.config.retry.max_attempts.max(1);
        let mut backoff = Duration::from_millis(self.config.retry.initial_backoff_ms);
        let mut last = String::new();
        for attempt in 1..=attempts {
            let outcome = {
                let _permit = self.limiter.acquire(estimate);
                self.provider.chat(request)
            };
            match outcome {
                Ok(response) => return Ok(response),
                Err(ProviderError::Fatal(e)) => return Err(e),
                Err(ProviderError::Transient(message)) => {
                    log::warn!("{} request attempt {attempt}/{attempts} failed: {message}", request.kind);
                    last = message;
                    if attempt < attempts {
                        std::thread::sleep(backoff);
                        backoff *= 2;
                    }
                }
            }
        }
        Err(Error::Transient { attempts, message: last })
    }

    fn finish(&self, kind: PromptKind, response: ChatResponse, value: Extraction) -> ExtractionResult {
        let output_tokens = response.output_tokens.unwrap_or_else(|| self.tokenizer.count(&response.content));
        ExtractionResult { kind, value, raw_response: response.content, output_tokens, logprobs: response.logprobs }
    }

    /// Sends `payload` under the template for `kind` and parses the answer.
    /// Parsed answers are cached; a malformed answer is re-asked once.
    pub fn complete(&self, kind: PromptKind, payload: &str) -> Result<ExtractionResult> {
        if let Some(limit) = self.provider.settings().context_limit_tokens {
            let size = self.tokenizer.count(payload);
            if size > limit {
                return Err(Error::Config(format!(
                    "{kind} payload of {size} tokens exceeds the provider context limit of {limit}"
                )));
            }
        }
        let provider_id = self.provider.id();
        let key = ResponseCache::key(kind, payload, &provider_id);
        if let Some(hit) = self.cache.get(&key) {
            match parse_response(kind, &hit.response) {
                Ok(value) => {
                    let response =
                        ChatResponse { content: hit.response, output_tokens: hit.output_tokens, logprobs: hit.logprobs };
                    return Ok(self.finish(kind, response, value));
                }
                Err(e) => log::warn!("cached {kind} answer {key} no longer parses ({e}); refetching"),
            }
        }

        let mut request = ChatRequest::new(kind, payload);
        let first = self.send(&request)?;
        let (response, value) = match parse_response(kind, &first.content) {
            Ok(value) => (first, value),
            Err(first_error) => {
                log::warn!("re-asking {kind}: {first_error}");
                request.messages.push(ChatMessage::new(Role::Assistant, first.content.clone()));
                request.messages.push(ChatMessage::new(Role::User, REASK_MESSAGE));
                let second = self.send(&request)?;
                match parse_response(kind, &second.content) {
                    Ok(value) => (second, value),
                    Err(e) => {
                        return Err(Error::Response {
                            kind: kind.to_string(),
                            message: e.to_string(),
                            raw_response: second.content,
                        })
                    }
                }
            }
        };
        self.cache.put(CacheEntry {
            key,
            kind,
            provider: provider_id,
            response: response.content.clone(),
            output_tokens: response.output_tokens,
            logprobs: response.logprobs.clone(),
        })?;
        Ok(self.finish(kind, response, value))
    }

    /// Runs many requests on up to `jobs` worker threads. Results come back
    /// in input order regardless of scheduling.
    pub fn complete_many(&self, requests: &[(PromptKind, String)], jobs: usize) -> Vec<Result<ExtractionResult>> {
        let run = || requests.par_iter().map(|(kind, payload)| self.complete(*kind, payload)).collect();
        match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
            Ok(pool) => pool.install(run),
            Err(_) => requests.iter().map(|(kind, payload)| self.complete(*kind, payload)).collect(),
        }
    }

    /// Model-based anonymization. The output is kept verbatim; placeholders
    /// found in it are inventoried in order of first appearance.
    pub fn llm_anonymize(&self, text: &str) -> Result<LlmAnonymization> {
        if text.trim().is_empty() {
            return Ok(LlmAnonymization { text: String::new(), placeholders: IndexMap::new(), truncated: false });
        }
        let result = self.complete(PromptKind::Anonymize, text)?;
        let output = match result.value {
            Extraction::Anonymized(output) => output,
            _ => unreachable!("anonymize answers parse to Extraction::Anonymized"),
        };
        let placeholders = scan_placeholders(&output);
        let truncated = result.output_tokens >= self.provider.settings().max_output_tokens;
        if truncated {
            log::warn!(
                "anonymized output hit the {}-token output limit; treating as truncated",
                self.provider.settings().max_output_tokens
            );
        }
        if placeholders.is_empty() {
            log::warn!("model anonymization produced no placeholders for a {}-char input", text.chars().count());
        }
        Ok(LlmAnonymization { text: output, placeholders, truncated })
    }
}

fn scan_placeholders(text: &str) -> IndexMap<Placeholder, usize> {
    let mut seen: IndexMap<Placeholder, usize> = IndexMap::new();
    for caps in placeholder_regex().captures_iter(text) {
        let Ok(entity_type) = caps[1].parse::<EntityType>() else { continue };
        let Ok(index) = caps[2].parse::<usize>() else { continue };
        *seen.entry(Placeholder::new(entity_type, index)).or_insert(0) += 1;
    }
    seen
}

/// Output of model-based anonymization. The model never reports original
/// surfaces, so the recovered map is an inventory of placeholders with their
/// occurrence counts, in order of first appearance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LlmAnonymization {
    pub text: String,
    pub placeholders: IndexMap<Placeholder, usize>,
    pub truncated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecognitionOutcome {
    pub firm_hit: bool,
    pub year_hit: bool,
}

/// Firm hit on case-insensitive ticker equality, year hit on exact year.
pub fn score_identity(guess: Option<(&str, i32)>, truth_ticker: &str, truth_year: i32) -> RecognitionOutcome {
    match guess {
        Some((ticker, year)) => RecognitionOutcome {
            firm_hit: ticker.trim().eq_ignore_ascii_case(truth_ticker.trim()),
            year_hit: year == truth_year,
        },
        None => RecognitionOutcome { firm_hit: false, year_hit: false },
    }
}

/// Asks the model to identify firm and year; an unparseable answer counts as
/// a miss on both.
pub fn recognize_identity(
    gateway: &Gateway,
    anonymized: &str,
    truth_ticker: &str,
    truth_year: i32,
) -> Result<RecognitionOutcome> {
    if truth_ticker.trim().is_empty() {
        return Err(Error::Config("recognition truth ticker is empty".to_string()));
    }
    match gateway.complete(PromptKind::Recognize, anonymized) {
        Ok(ExtractionResult { value: Extraction::Identity { ticker, year }, .. }) => {
            Ok(score_identity(Some((&ticker, year)), truth_ticker, truth_year))
        }
        Ok(_) => unreachable!("recognize answers parse to Extraction::Identity"),
        Err(Error::Response { message, .. }) => {
            log::warn!("recognition answer unparseable, counted as a miss: {message}");
            Ok(score_identity(None, truth_ticker, truth_year))
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{Direction, MockProvider, OrdinalChoice};

    fn gateway(mock: Arc<MockProvider>) -> Gateway {
        let config = GatewayConfig { retry: RetryPolicy { max_attempts: 3, initial_backoff_ms: 0 }, ..Default::default() };
        Gateway::new(mock, ResponseCache::in_memory(), config)
    }

    #[test]
    fn parses_mock_sentiment() {
        let mut mock = MockProvider::new("t");
        mock.insert(PromptKind::SentimentTranscript, "doc", "**Direction Estimate: 1**,**Magnitude Estimate: 0.6**");
        let gw = gateway(Arc::new(mock));
        let r = gw.complete(PromptKind::SentimentTranscript, "doc").unwrap();
        assert_eq!(r.value, Extraction::Sentiment { direction: Direction::Bullish, magnitude: Some(0.6) });
    }

    #[test]
    fn no_information_investment() {
        let mut mock = MockProvider::new("t");
        mock.insert(PromptKind::Investment, "doc", "**no information is provided**");
        let r = gateway(Arc::new(mock)).complete(PromptKind::Investment, "doc").unwrap();
        assert_eq!(r.value, Extraction::Ordinal(OrdinalChoice::NoInformation));
    }

    #[test]
    fn cache_prevents_second_request() {
        let mut mock = MockProvider::new("t");
        mock.insert(PromptKind::Uncertainty, "doc", "**Uncertainty Score: 0.3**");
        let mock = Arc::new(mock);
        let gw = gateway(mock.clone());
        let a = gw.complete(PromptKind::Uncertainty, "doc").unwrap();
        let b = gw.complete(PromptKind::Uncertainty, "doc").unwrap();
        assert_eq!(a, b);
        assert_eq!(mock.call_count(), 1);
        gw.complete(PromptKind::Uncertainty, "doc ").unwrap_err();
        assert_eq!(mock.call_count(), 2);
    }

    #[test]
    fn out_of_range_answer_is_reasked_then_fails() {
        let mock = Arc::new(MockProvider::new("t"));
        mock.push_script(Ok(ChatResponse::text("**Uncertainty Score: 1.4**")));
        mock.push_script(Ok(ChatResponse::text("**Uncertainty Score: 1.4**")));
        let gw = gateway(mock.clone());
        match gw.complete(PromptKind::Uncertainty, "doc") {
            Err(Error::Response { raw_response, .. }) => assert_eq!(raw_response, "**Uncertainty Score: 1.4**"),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert_eq!(mock.call_count(), 2);
        assert!(gw.cache().is_empty());
    }

    #[test]
    fn reask_recovers() {
        let mock = Arc::new(MockProvider::new("t"));
        mock.push_script(Ok(ChatResponse::text("I think it is 0.3")));
        mock.push_script(Ok(ChatResponse::text("**Uncertainty Score: 0.3**")));
        let r = gateway(mock.clone()).complete(PromptKind::Uncertainty, "doc").unwrap();
        assert_eq!(r.value, Extraction::Uncertainty(0.3));
        assert_eq!(mock.call_count(), 2);
    }

    #[test]
    fn transient_failures_are_retried_then_surface() {
        let mock = Arc::new(MockProvider::new("t"));
        mock.push_script(Err("connection reset".into()));
        mock.push_script(Ok(ChatResponse::text("**Uncertainty Score: 0.1**")));
        assert!(gateway(mock.clone()).complete(PromptKind::Uncertainty, "doc").is_ok());

        let mock = Arc::new(MockProvider::new("t"));
        for _ in 0..3 {
            mock.push_script(Err("timeout".into()));
        }
        let err = gateway(mock.clone()).complete(PromptKind::Uncertainty, "doc").unwrap_err();
        assert!(matches!(err, Error::Transient { attempts: 3, .. }), "{err}");
    }

    #[test]
    fn anonymize_inventories_placeholders() {
        let raw = "For more information, please refer to the risk factors discussed in Apple's most recently filed annual report on Form 10-K and the form 8-K filed with the SEC today.";
        let out = "For more information, please refer to the risk factors discussed in ORG_1's most recently filed annual report on FORM_1 and the FORM_2 filed with the SEC today.";
        let mut mock = MockProvider::new("t");
        mock.insert(PromptKind::Anonymize, raw, out);
        let anon = gateway(Arc::new(mock)).llm_anonymize(raw).unwrap();
        assert_eq!(anon.text, out);
        let keys: Vec<String> = anon.placeholders.keys().map(|p| p.to_string()).collect();
        assert_eq!(keys, ["ORG_1", "FORM_1", "FORM_2"]);
        assert!(!anon.truncated);
    }

    #[test]
    fn anonymize_empty_input() {
        let mock = Arc::new(MockProvider::new("t"));
        let anon = gateway(mock.clone()).llm_anonymize("").unwrap();
        assert!(anon.text.is_empty() && anon.placeholders.is_empty());
        assert_eq!(mock.call_count(), 0);
    }

    #[test]
    fn anonymize_flags_truncation() {
        let long_output = "word ".repeat(16_000);
        let mock = MockProvider::new("t").with_fallback(Arc::new(move |_| ChatResponse::text(long_output.clone())));
        let anon = gateway(Arc::new(mock)).llm_anonymize(&"input ".repeat(17_000)).unwrap();
        assert!(anon.truncated);
    }

    #[test]
    fn identity_scoring() {
        assert!(score_identity(Some(("AAPL", 2024)), "aapl", 2024).firm_hit);
        assert!(!score_identity(Some(("AAPL", 2023)), "AAPL", 2024).year_hit);
        assert_eq!(score_identity(None, "AAPL", 2024), RecognitionOutcome { firm_hit: false, year_hit: false });
    }

    #[test]
    fn unparseable_recognition_counts_as_miss() {
        let mock = MockProvider::new("t").with_fallback(Arc::new(|_| ChatResponse::text("It is Apple.")));
        let outcome = recognize_identity(&gateway(Arc::new(mock)), "ORG_1 said", "AAPL", 2024).unwrap();
        assert_eq!(outcome, RecognitionOutcome { firm_hit: false, year_hit: false });
    }

    #[test]
    fn context_limit_is_enforced() {
        let mock = MockProvider::new("t").with_settings(crate::llm::ProviderSettings {
            context_limit_tokens: Some(3),
            ..Default::default()
        });
        let err = gateway(Arc::new(mock)).complete(PromptKind::Uncertainty, "a b c d").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn limiter_bounds_in_flight() {
        let limiter = RateLimiter::new(2, None);
        let peak = Mutex::new(0usize);
        std::thread::scope(|s| {
            for _ in 0..8 {
                s.spawn(|| {
                    let _p = limiter.acquire(1);
                    let now = limiter.in_flight();
                    let mut p = peak.lock().unwrap();
                    *p = (*p).max(now);
                    drop(p);
                    std::thread::sleep(Duration::from_millis(5));
                });
            }
        });
        assert!(*peak.lock().unwrap() <= 2);
        assert_eq!(limiter.in_flight(), 0);
    }

    #[test]
    fn complete_many_preserves_order() {
        let mock = MockProvider::new("t").with_fallback(Arc::new(|req: &ChatRequest| {
            let n: f64 = req.payload().parse().unwrap();
            ChatResponse::text(format!("**Uncertainty Score: {}**", n / 100.0))
        }));
        let gw = gateway(Arc::new(mock));
        let reqs: Vec<(PromptKind, String)> = (0..50).map(|i| (PromptKind::Uncertainty, i.to_string())).collect();
        let out = gw.complete_many(&reqs, 4);
        for (i, r) in out.into_iter().enumerate() {
            assert_eq!(r.unwrap().value, Extraction::Uncertainty(i as f64 / 100.0));
        }
    }
}

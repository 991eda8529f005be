use std::collections::{HashMap, VecDeque};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use super::PromptKind;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn new(role: Role, content: impl Into<String>) -> Self {
        ChatMessage { role, content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChatRequest {
    pub kind: PromptKind,
    /// System instruction followed by the conversation; the first user
    /// message is the document payload.
    pub messages: Vec<ChatMessage>,
}

impl ChatRequest {
    pub fn new(kind: PromptKind, payload: &str) -> Self {
        ChatRequest {
            kind,
            messages: vec![ChatMessage::new(Role::System, kind.template()), ChatMessage::new(Role::User, payload)],
        }
    }

    pub fn payload(&self) -> &str {
        self.messages
            .iter()
            .find(|m| m.role == Role::User)
            .map(|m| m.content.as_str())
            .unwrap_or("")
    }

    /// True for a follow-up after a malformed answer.
    pub fn is_reask(&self) -> bool {
        self.messages.iter().any(|m| m.role == Role::Assistant)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChatResponse {
    pub content: String,
    pub output_tokens: Option<usize>,
    pub logprobs: Option<Vec<f64>>,
}

impl ChatResponse {
    pub fn text(content: impl Into<String>) -> Self {
        ChatResponse { content: content.into(), ..Default::default() }
    }
}

#[derive(Debug)]
pub enum ProviderError {
    /// Worth retrying: transport failures, timeouts, 429 and 5xx.
    Transient(String),
    Fatal(Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProviderSettings {
    pub model: String,
    pub temperature: f64,
    pub max_output_tokens: usize,
    pub timeout_secs: u64,
    /// Payloads longer than this (in word tokens) are refused up front.
    pub context_limit_tokens: Option<usize>,
    pub request_logprobs: bool,
}

impl Default for ProviderSettings {
    fn default() -> Self {
        ProviderSettings {
            model: "gpt-4o-mini-2024-07-18".to_string(),
            temperature: 0.0,
            max_output_tokens: 16_000,
            timeout_secs: 120,
            context_limit_tokens: Some(120_000),
            request_logprobs: false,
        }
    }
}

pub trait Provider: Send + Sync {
    /// Stable identifier that goes into cache keys.
    fn id(&self) -> String;

    fn settings(&self) -> &ProviderSettings;

    fn chat(&self, request: &ChatRequest) -> std::result::Result<ChatResponse, ProviderError>;
}

/// OpenAI-style `/chat/completions` endpoint.
pub struct HttpProvider {
    base_url: String,
    api_key: String,
    settings: ProviderSettings,
    client: reqwest::blocking::Client,
}

impl std::fmt::Debug for HttpProvider {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpProvider")
            .field("base_url", &self.base_url)
            .field("settings", &self.settings)
            .finish_non_exhaustive()
    }
}

impl HttpProvider {
    /// Reads the bearer token from `api_key_env`; a missing variable is an
    /// authentication error.
    pub fn from_env(base_url: impl Into<String>, api_key_env: &str, settings: ProviderSettings) -> Result<Self> {
        let api_key = std::env::var(api_key_env)
            .ok()
            .filter(|k| !k.trim().is_empty())
            .ok_or_else(|| Error::ProviderAuth(api_key_env.to_string()))?;
        Self::new(base_url, api_key, settings)
    }

    pub fn new(base_url: impl Into<String>, api_key: impl Into<String>, settings: ProviderSettings) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(settings.timeout_secs))
            .build()
            .map_err(|e| Error::Config(format!("http client: {e}")))?;
        Ok(HttpProvider {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            api_key: api_key.into(),
            settings,
            client,
        })
    }

    fn body(&self, request: &ChatRequest) -> serde_json::Value {
        let mut body = json!({
            "model": self.settings.model,
            "temperature": self.settings.temperature,
            "max_tokens": self.settings.max_output_tokens,
            "messages": request.messages,
        });
        if self.settings.request_logprobs {
            body["logprobs"] = json!(true);
        }
        body
    }
}

#[derive(Deserialize)]
struct CompletionBody {
    choices: Vec<CompletionChoice>,
    #[serde(default)]
    usage: Option<CompletionUsage>,
}

#[derive(Deserialize)]
struct CompletionChoice {
    message: CompletionMessage,
    #[serde(default)]
    logprobs: Option<CompletionLogprobs>,
}

#[derive(Deserialize)]
struct CompletionMessage {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Deserialize)]
struct CompletionLogprobs {
    #[serde(default)]
    content: Vec<TokenLogprob>,
}

#[derive(Deserialize)]
struct TokenLogprob {
    logprob: f64,
}

#[derive(Deserialize)]
struct CompletionUsage {
    completion_tokens: usize,
}

impl Provider for HttpProvider {
    fn id(&self) -> String {
        format!("http:{}:{}:t{}", self.base_url, self.settings.model, self.settings.temperature)
    }

    fn settings(&self) -> &ProviderSettings {
        &self.settings
    }

    fn chat(&self, request: &ChatRequest) -> std::result::Result<ChatResponse, ProviderError> {
        let url = format!("{}/chat/completions", self.base_url);
        let response = self
            .client
            .post(&url)
            .bearer_auth(&self.api_key)
            .json(&self.body(request))
            .send()
            .map_err(|e| ProviderError::Transient(format!("POST {url}: {e}")))?;
        let status = response.status();
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(ProviderError::Transient(format!("POST {url}: HTTP {status}")));
        }
        if status.as_u16() == 401 || status.as_u16() == 403 {
            return Err(ProviderError::Fatal(Error::ProviderAuth(format!("credentials rejected by {url} (HTTP {status})"))));
        }
        if !status.is_success() {
            let text = response.text().unwrap_or_default();
            return Err(ProviderError::Fatal(Error::Config(format!("POST {url}: HTTP {status}: {text}"))));
        }
        let body: CompletionBody = response
            .json()
            .map_err(|e| ProviderError::Transient(format!("malformed completion body from {url}: {e}")))?;
        let choice = body
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| ProviderError::Transient(format!("{url} returned no choices")))?;
        Ok(ChatResponse {
            content: choice.message.content.unwrap_or_default(),
            output_tokens: body.usage.map(|u| u.completion_tokens),
            logprobs: choice.logprobs.map(|l| l.content.into_iter().map(|t| t.logprob).collect()),
        })
    }
}

/// Hex SHA-256 of a payload, the key of mock tables.
pub fn payload_hash(payload: &str) -> String {
    hex::encode(Sha256::digest(payload.as_bytes()))
}

/// One canned answer of a mock table file (JSON Lines).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockTableEntry {
    pub kind: PromptKind,
    pub payload_sha256: String,
    pub response: String,
}

pub type MockResponder = Arc<dyn Fn(&ChatRequest) -> ChatResponse + Send + Sync>;

/// Deterministic provider for tests and hermetic pipelines.
///
/// Lookup order: scripted queue, then the `(kind, payload hash)` table, then
/// the fallback responder. A request that matches nothing is a fatal error.
pub struct MockProvider {
    name: String,
    settings: ProviderSettings,
    table: HashMap<(PromptKind, String), String>,
    script: Mutex<VecDeque<std::result::Result<ChatResponse, String>>>,
    fallback: Option<MockResponder>,
    calls: AtomicUsize,
}

impl std::fmt::Debug for MockProvider {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MockProvider")
            .field("name", &self.name)
            .field("table", &self.table.len())
            .field("calls", &self.calls.load(Ordering::SeqCst))
            .finish_non_exhaustive()
    }
}

impl MockProvider {
    pub fn new(name: impl Into<String>) -> Self {
        MockProvider {
            name: name.into(),
            settings: ProviderSettings { model: "mock".to_string(), ..ProviderSettings::default() },
            table: HashMap::new(),
            script: Mutex::new(VecDeque::new()),
            fallback: None,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn with_settings(mut self, settings: ProviderSettings) -> Self {
        self.settings = settings;
        self
    }

    pub fn with_fallback(mut self, responder: MockResponder) -> Self {
        self.fallback = Some(responder);
        self
    }

    pub fn insert(&mut self, kind: PromptKind, payload: &str, response: impl Into<String>) {
        self.table.insert((kind, payload_hash(payload)), response.into());
    }

    pub fn insert_entry(&mut self, entry: MockTableEntry) {
        self.table.insert((entry.kind, entry.payload_sha256.to_ascii_lowercase()), entry.response);
    }

    /// Queues answers returned in order before any table lookup. `Err`
    /// entries simulate transport failures.
    pub fn push_script(&self, item: std::result::Result<ChatResponse, String>) {
        self.script.lock().unwrap().push_back(item);
    }

    pub fn load_table(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry: MockTableEntry = serde_json::from_str(line).map_err(|e| Error::Ingestion {
                path: path.display().to_string(),
                line: i + 1,
                message: e.to_string(),
            })?;
            self.insert_entry(entry);
        }
        Ok(())
    }

    pub fn call_count(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl Provider for MockProvider {
    fn id(&self) -> String {
        format!("mock:{}:{}", self.name, self.settings.model)
    }

    fn settings(&self) -> &ProviderSettings {
        &self.settings
    }

    fn chat(&self, request: &ChatRequest) -> std::result::Result<ChatResponse, ProviderError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        if let Some(item) = self.script.lock().unwrap().pop_front() {
            return item.map_err(ProviderError::Transient);
        }
        if let Some(response) = self.table.get(&(request.kind, payload_hash(request.payload()))) {
            return Ok(ChatResponse::text(response.clone()));
        }
        match &self.fallback {
            Some(responder) => Ok(responder(request)),
            None => Err(ProviderError::Fatal(Error::Config(format!(
                "mock provider has no answer for {} payload {}",
                request.kind,
                payload_hash(request.payload())
            )))),
        }
    }
}

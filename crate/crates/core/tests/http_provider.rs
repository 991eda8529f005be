use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use anonloss::llm::{
    ChatRequest, Extraction, Gateway, GatewayConfig, HttpProvider, PromptKind, Provider, ProviderError,
    ProviderSettings, ResponseCache, RetryPolicy,
};
use anonloss::Error;

struct Seen {
    authorization: String,
    body: serde_json::Value,
}

/// Serves one canned `(status, body)` per connection, in order, and records
/// what each request carried.
fn serve(replies: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<Seen>>>, JoinHandle<()>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let base = format!("http://{}/v1", listener.local_addr().unwrap());
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = Arc::clone(&seen);
    let handle = std::thread::spawn(move || {
        for (status, body) in replies {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream);
            let mut length = 0;
            let mut authorization = String::new();
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let line = line.trim_end();
                if line.is_empty() {
                    break;
                }
                let (name, value) = line.split_once(':').unwrap_or((line, ""));
                match name.to_ascii_lowercase().as_str() {
                    "content-length" => length = value.trim().parse().unwrap(),
                    "authorization" => authorization = value.trim().to_string(),
                    _ => {}
                }
            }
            let mut raw = vec![0; length];
            reader.read_exact(&mut raw).unwrap();
            log.lock().unwrap().push(Seen { authorization, body: serde_json::from_slice(&raw).unwrap() });
            let mut stream = reader.into_inner();
            write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
        }
    });
    (base, seen, handle)
}

fn completion(content: &str) -> String {
    serde_json::json!({
        "choices": [{ "message": { "role": "assistant", "content": content } }],
        "usage": { "prompt_tokens": 40, "completion_tokens": 9 }
    })
    .to_string()
}

fn settings() -> ProviderSettings {
    ProviderSettings { model: "test-model".into(), timeout_secs: 10, ..Default::default() }
}

#[test]
fn sends_an_authenticated_chat_completion() {
    let (base, seen, handle) = serve(vec![(200, completion("**Uncertainty Score: 0.25**"))]);
    let provider = HttpProvider::new(&base, "secret-token", settings()).unwrap();
    let response = provider.chat(&ChatRequest::new(PromptKind::Uncertainty, "We expect headwinds.")).unwrap();
    handle.join().unwrap();
    assert_eq!(response.content, "**Uncertainty Score: 0.25**");
    assert_eq!(response.output_tokens, Some(9));
    let seen = seen.lock().unwrap();
    assert_eq!(seen[0].authorization, "Bearer secret-token");
    assert_eq!(seen[0].body["model"], "test-model");
    assert_eq!(seen[0].body["temperature"], 0.0);
    assert_eq!(seen[0].body["messages"][0]["role"], "system");
    assert_eq!(seen[0].body["messages"][0]["content"], PromptKind::Uncertainty.template());
    assert_eq!(seen[0].body["messages"][1]["content"], "We expect headwinds.");
}

#[test]
fn gateway_retries_server_errors_then_caches() {
    let (base, seen, handle) = serve(vec![
        (503, "{}".into()),
        (200, completion("**Uncertainty Score: 0.5**")),
    ]);
    let provider = HttpProvider::new(&base, "k", settings()).unwrap();
    let config = GatewayConfig { retry: RetryPolicy { max_attempts: 3, initial_backoff_ms: 1 }, ..Default::default() };
    let gateway = Gateway::new(Arc::new(provider), ResponseCache::in_memory(), config);
    let first = gateway.complete(PromptKind::Uncertainty, "text").unwrap();
    handle.join().unwrap();
    assert_eq!(first.value, Extraction::Uncertainty(0.5));
    // the server has gone; a second answer can only come from the cache
    let second = gateway.complete(PromptKind::Uncertainty, "text").unwrap();
    assert_eq!(second.value, first.value);
    assert_eq!(seen.lock().unwrap().len(), 2);
}

#[test]
fn rejected_credentials_are_an_auth_error() {
    let (base, _, handle) = serve(vec![(401, r#"{"error":"bad key"}"#.into())]);
    let provider = HttpProvider::new(&base, "wrong", settings()).unwrap();
    let err = provider.chat(&ChatRequest::new(PromptKind::Recognize, "text")).unwrap_err();
    handle.join().unwrap();
    assert!(matches!(err, ProviderError::Fatal(Error::ProviderAuth(_))), "{err:?}");
}

#[test]
fn missing_key_variable_is_an_auth_error() {
    let err = HttpProvider::from_env("http://127.0.0.1:9", "ANONLOSS_TEST_NEVER_SET", settings()).unwrap_err();
    assert!(matches!(err, Error::ProviderAuth(_)));
}

use std::time::Duration;

use serde_json::{json, Value};

use super::{estimate_tokens, CompletionBackend, CompletionResult, LlmConfig};
use crate::error::{Error, Result};

pub const ENV_API_URL: &str = "TOPICREFINE_API_URL";
pub const ENV_API_KEY: &str = "TOPICREFINE_API_KEY";

const EXCERPT_CHARS: usize = 300;

/// Chat-completions style HTTP backend. The whole prompt is sent as a single
/// user message.
pub struct RemoteBackend {
    url: String,
    api_key: String,
    model_id: String,
    temperature: f64,
    json_mode: bool,
    agent: ureq::Agent,
}

impl RemoteBackend {
    pub fn new(url: impl Into<String>, api_key: impl Into<String>, config: &LlmConfig) -> Result<Self> {
        let url = url.into();
        let api_key = api_key.into();
        if url.trim().is_empty() {
            return Err(Error::Config(format!("{ENV_API_URL} is empty")));
        }
        if api_key.trim().is_empty() {
            return Err(Error::Config(format!("{ENV_API_KEY} is empty")));
        }
        config.validate()?;
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(RemoteBackend {
            url,
            api_key,
            model_id: config.model_id.clone(),
            temperature: config.temperature,
            json_mode: config.json_mode,
            agent,
        })
    }

    /// Reads endpoint and key from `TOPICREFINE_API_URL` / `TOPICREFINE_API_KEY`.
    pub fn from_env(config: &LlmConfig) -> Result<Self> {
        Self::from_vars(std::env::var(ENV_API_URL).ok(), std::env::var(ENV_API_KEY).ok(), config)
    }

    pub fn from_vars(url: Option<String>, key: Option<String>, config: &LlmConfig) -> Result<Self> {
        let url = url.ok_or_else(|| Error::Config(format!("{ENV_API_URL} is not set")))?;
        let key = key.ok_or_else(|| Error::Config(format!("{ENV_API_KEY} is not set")))?;
        Self::new(url, key, config)
    }

    pub fn request_body(&self, prompt: &str) -> Value {
        let mut body = json!({
            "model": self.model_id,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.temperature,
        });
        if self.json_mode {
            body["response_format"] = json!({"type": "json_object"});
        }
        body
    }
}

fn excerpt(s: &str) -> String {
    let mut e: String = s.chars().take(EXCERPT_CHARS).collect();
    if s.chars().count() > EXCERPT_CHARS {
        e.push('…');
    }
    e
}

impl CompletionBackend for RemoteBackend {
    fn complete(&self, prompt: &str) -> Result<CompletionResult> {
        let body = self.request_body(prompt).to_string();
        let response = self
            .agent
            .post(&self.url)
            .header("Authorization", &format!("Bearer {}", self.api_key))
            .header("Content-Type", "application/json")
            .send(body.as_str());
        let mut response = match response {
            Ok(r) => r,
            Err(e) => return Err(Error::BackendUnavailable(format!("transport: {e}"))),
        };
        let status = response.status().as_u16();
        let text = response
            .body_mut()
            .read_to_string()
            .map_err(|e| Error::BackendUnavailable(format!("reading response body: {e}")))?;
        if status == 429 || status >= 500 {
            return Err(Error::BackendUnavailable(format!("HTTP {status}: {}", excerpt(&text))));
        }
        if status >= 400 {
            return Err(Error::RequestRejected {
                status,
                excerpt: excerpt(&text),
            });
        }

        let value: Value = serde_json::from_str(&text)
            .map_err(|e| Error::Protocol(format!("response is not JSON ({e}): {}", excerpt(&text))))?;
        let content = value
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Protocol(format!("no choices[0].message.content in {}", excerpt(&text))))?
            .to_string();
        let prompt_tokens = value
            .pointer("/usage/prompt_tokens")
            .and_then(Value::as_u64)
            .unwrap_or_else(|| estimate_tokens(prompt));
        let completion_tokens = value
            .pointer("/usage/completion_tokens")
            .and_then(Value::as_u64)
            .unwrap_or_else(|| estimate_tokens(&content));
        Ok(CompletionResult {
            text: content,
            prompt_tokens,
            completion_tokens,
            cached: false,
        })
    }

    fn describe(&self) -> String {
        format!("remote model={} url={} framing=single-user-message", self.model_id, self.url)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::LlmClient;
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use std::sync::mpsc;
    use std::thread;

    /// Serves the canned (status, body) replies in order, one per connection,
    /// and forwards each request body.
    fn serve(replies: Vec<(u16, String)>) -> (String, mpsc::Receiver<String>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for (status, body) in replies {
                let (stream, _) = listener.accept().unwrap();
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut len = 0usize;
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    if line == "\r\n" || line.is_empty() {
                        break;
                    }
                    let lower = line.to_ascii_lowercase();
                    if let Some(v) = lower.strip_prefix("content-length:") {
                        len = v.trim().parse().unwrap();
                    }
                }
                let mut buf = vec![0u8; len];
                reader.read_exact(&mut buf).unwrap();
                tx.send(String::from_utf8(buf).unwrap()).unwrap();
                let mut stream = stream;
                write!(
                    stream,
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                )
                .unwrap();
            }
        });
        (url, rx)
    }

    fn ok_body(content: &str) -> String {
        json!({
            "choices": [{"message": {"role": "assistant", "content": content}}],
            "usage": {"prompt_tokens": 150, "completion_tokens": 20}
        })
        .to_string()
    }

    #[test]
    fn request_carries_zero_temperature() {
        let b = RemoteBackend::new("http://localhost:1", "k", &LlmConfig::default()).unwrap();
        let body = b.request_body("hello");
        assert_eq!(body["temperature"], json!(0.0));
        assert_eq!(body["messages"][0]["role"], "user");
        assert_eq!(body["messages"][0]["content"], "hello");
        assert_eq!(body["response_format"]["type"], "json_object");
        let hot = LlmConfig {
            temperature: 0.7,
            json_mode: false,
            ..Default::default()
        };
        let b = RemoteBackend::new("http://localhost:1", "k", &hot).unwrap();
        assert_eq!(b.request_body("x")["temperature"], json!(0.7));
        assert!(b.request_body("x").get("response_format").is_none());
    }

    #[test]
    fn missing_credentials() {
        let cfg = LlmConfig::default();
        assert!(matches!(RemoteBackend::from_vars(Some("http://x".into()), None, &cfg), Err(Error::Config(_))));
        assert!(matches!(RemoteBackend::from_vars(None, Some("k".into()), &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn successful_round_trip() {
        let (url, rx) = serve(vec![(200, ok_body("{\"coherent\":\"Yes\"}"))]);
        let b = RemoteBackend::new(url, "secret", &LlmConfig::default()).unwrap();
        let r = b.complete("the prompt").unwrap();
        assert_eq!(r.text, "{\"coherent\":\"Yes\"}");
        assert_eq!((r.prompt_tokens, r.completion_tokens), (150, 20));
        let sent: Value = serde_json::from_str(&rx.recv().unwrap()).unwrap();
        assert_eq!(sent["temperature"], json!(0.0));
        assert_eq!(sent["model"], "gpt-3.5-turbo");
    }

    #[test]
    fn unauthorized_is_rejected_without_retry() {
        let (url, _rx) = serve(vec![(401, "{\"error\":\"invalid api key\"}".into())]);
        let b = RemoteBackend::new(url, "bad", &LlmConfig::default()).unwrap();
        let client = LlmClient::new(std::sync::Arc::new(b), LlmConfig::default()).unwrap().with_sleeper(|_| {});
        match client.complete("p") {
            Err(Error::RequestRejected { status, excerpt }) => {
                assert_eq!(status, 401);
                assert!(excerpt.contains("invalid api key"));
            }
            other => panic!("expected rejection, got {other:?}"),
        }
        assert_eq!(client.retry_count(), 0);
    }

    #[test]
    fn server_errors_are_retried() {
        let (url, _rx) = serve(vec![
            (500, "{}".into()),
            (503, "{}".into()),
            (200, ok_body("done")),
        ]);
        let b = RemoteBackend::new(url, "k", &LlmConfig::default()).unwrap();
        let client = LlmClient::new(std::sync::Arc::new(b), LlmConfig::default()).unwrap().with_sleeper(|_| {});
        assert_eq!(client.complete("p").unwrap().text, "done");
        assert_eq!(client.retry_count(), 2);
    }

    #[test]
    fn missing_usage_falls_back_to_estimate() {
        let body = json!({"choices": [{"message": {"content": "abcdefgh"}}]}).to_string();
        let (url, _rx) = serve(vec![(200, body)]);
        let b = RemoteBackend::new(url, "k", &LlmConfig::default()).unwrap();
        let r = b.complete("abcde").unwrap();
        assert_eq!((r.prompt_tokens, r.completion_tokens), (2, 2));
    }
}

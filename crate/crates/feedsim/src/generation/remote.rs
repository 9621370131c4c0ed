//! OpenAI-compatible chat backend.
//!
//! Speaks the `/chat/completions` protocol over blocking HTTP. The
//! persona text rides as the system message and the rendered prompt as
//! the user message, for every prompt kind. Transient failures (429,
//! 5xx, transport errors) retry with exponential backoff; other HTTP
//! errors fail fast.

use super::{BackendError, GenerationBackend, GenerationRequest, RawResponse};
use serde::{Deserialize, Serialize};
use std::time::{Duration, Instant};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RemoteOptions {
    /// Base URL up to and including the API root, e.g.
    /// `https://api.openai.com/v1`.
    pub base_url: String,
    pub model: String,
    /// Environment variable holding the bearer token. Empty value or
    /// unset variable means no Authorization header (fine for local
    /// servers).
    pub api_key_env: String,
    pub timeout_secs: u64,
    pub max_attempts: u32,
    pub backoff_base_ms: u64,
    pub temperature: Option<f64>,
}

impl Default for RemoteOptions {
    fn default() -> Self {
        RemoteOptions {
            base_url: "http://localhost:8000/v1".into(),
            model: "gpt-3.5-turbo".into(),
            api_key_env: "OPENAI_API_KEY".into(),
            timeout_secs: 60,
            max_attempts: 5,
            backoff_base_ms: 250,
            temperature: None,
        }
    }
}

pub struct OpenAiBackend {
    opts: RemoteOptions,
    api_key: Option<String>,
    agent: ureq::Agent,
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [ChatMessage<'a>; 2],
    /// Forwarded so servers that support seeded sampling can honor it.
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    temperature: Option<f64>,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatChoiceMessage,
}

#[derive(Deserialize)]
struct ChatChoiceMessage {
    content: Option<String>,
}

impl OpenAiBackend {
    /// Build a backend, reading the API key from the configured
    /// environment variable.
    pub fn new(opts: RemoteOptions) -> Self {
        let api_key = std::env::var(&opts.api_key_env).ok().filter(|k| !k.is_empty());
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(opts.timeout_secs)))
            .http_status_as_error(false)
            .build();
        OpenAiBackend { opts, api_key, agent: config.into() }
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.opts.base_url.trim_end_matches('/'))
    }

    fn try_once(&self, request: &GenerationRequest) -> Result<String, (bool, BackendError)> {
        let body = ChatRequest {
            model: &self.opts.model,
            messages: [
                ChatMessage { role: "system", content: &request.persona.persona_text },
                ChatMessage { role: "user", content: &request.rendered_prompt },
            ],
            seed: request.seed,
            temperature: self.opts.temperature,
        };
        let mut req = self.agent.post(self.endpoint());
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req
            .send_json(&body)
            .map_err(|e| (true, BackendError::Transport(e.to_string())))?;

        let status = resp.status().as_u16();
        if status == 429 || status >= 500 {
            let snippet = resp.body_mut().read_to_string().unwrap_or_default();
            return Err((true, BackendError::Status { status, snippet: truncate(&snippet) }));
        }
        if status >= 400 {
            let snippet = resp.body_mut().read_to_string().unwrap_or_default();
            return Err((false, BackendError::Status { status, snippet: truncate(&snippet) }));
        }
        let parsed: ChatResponse = resp
            .body_mut()
            .read_json()
            .map_err(|e| (false, BackendError::Protocol(format!("bad response JSON: {e}"))))?;
        let content = parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or((false, BackendError::Protocol("response had no choices[0].message.content".into())))?;
        Ok(content)
    }
}

fn truncate(s: &str) -> String {
    const LIMIT: usize = 200;
    if s.len() <= LIMIT {
        s.to_string()
    } else {
        let mut end = LIMIT;
        while !s.is_char_boundary(end) {
            end -= 1;
        }
        format!("{}...", &s[..end])
    }
}

impl GenerationBackend for OpenAiBackend {
    fn name(&self) -> &str {
        "openai"
    }

    fn complete_raw(&self, request: &GenerationRequest) -> Result<RawResponse, BackendError> {
        let start = Instant::now();
        let mut last: Option<BackendError> = None;
        for attempt in 0..self.opts.max_attempts {
            if attempt > 0 {
                let backoff = self.opts.backoff_base_ms.saturating_mul(1 << (attempt - 1));
                std::thread::sleep(Duration::from_millis(backoff));
            }
            match self.try_once(request) {
                Ok(text) => {
                    return Ok(RawResponse {
                        text,
                        latency_ms: start.elapsed().as_millis() as u64,
                    })
                }
                Err((retryable, err)) => {
                    if !retryable {
                        return Err(err);
                    }
                    log::warn!(
                        "backend attempt {}/{} failed: {err}",
                        attempt + 1,
                        self.opts.max_attempts
                    );
                    last = Some(err);
                }
            }
        }
        Err(BackendError::RetriesExhausted {
            attempts: self.opts.max_attempts,
            last: last.map(|e| e.to_string()).unwrap_or_default(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generation::{PersonaBrief, PromptKind, RequestContext};
    use crate::persona::Party;
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    fn request() -> GenerationRequest {
        GenerationRequest {
            kind: PromptKind::Enrich,
            persona: PersonaBrief {
                agent: 0,
                persona_text: "You are 30 years old.".into(),
                partisanship: 0.0,
                party: Party::Independent,
                news_sources: vec![],
            },
            rendered_prompt: "Add traits.".into(),
            target_words: None,
            seed: 11,
            context: RequestContext::Enrich,
        }
    }

    /// Minimal scripted HTTP server: answers each connection with the
    /// next (status, body) in the script and captures request bodies.
    fn spawn_server(
        script: Vec<(u16, String)>,
    ) -> (String, Arc<AtomicUsize>, std::sync::mpsc::Receiver<String>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let hits = Arc::new(AtomicUsize::new(0));
        let hits_inner = hits.clone();
        let (tx, rx) = std::sync::mpsc::channel();
        std::thread::spawn(move || {
            for (status, body) in script {
                let (stream, _) = listener.accept().unwrap();
                hits_inner.fetch_add(1, Ordering::SeqCst);
                let mut reader = BufReader::new(stream);
                let mut content_length = 0usize;
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    let line = line.trim_end();
                    if line.is_empty() {
                        break;
                    }
                    if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                        content_length = v.trim().parse().unwrap();
                    }
                }
                let mut body_buf = vec![0u8; content_length];
                reader.read_exact(&mut body_buf).unwrap();
                tx.send(String::from_utf8_lossy(&body_buf).into_owned()).unwrap();
                let mut stream = reader.into_inner();
                let reply = format!(
                    "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                    body.len()
                );
                stream.write_all(reply.as_bytes()).unwrap();
            }
        });
        (format!("http://{addr}/v1"), hits, rx)
    }

    fn ok_body(content: &str) -> String {
        serde_json::json!({
            "choices": [{"message": {"role": "assistant", "content": content}}]
        })
        .to_string()
    }

    fn opts(base_url: String) -> RemoteOptions {
        RemoteOptions {
            base_url,
            model: "test-model".into(),
            api_key_env: "FEEDSIM_TEST_MISSING_KEY".into(),
            timeout_secs: 5,
            max_attempts: 4,
            backoff_base_ms: 1,
            temperature: None,
        }
    }

    #[test]
    fn happy_path_sends_persona_and_prompt() {
        let (url, hits, bodies) = spawn_server(vec![(200, ok_body("Nice to meet you."))]);
        let backend = OpenAiBackend::new(opts(url));
        let resp = backend.complete_raw(&request()).unwrap();
        assert_eq!(resp.text, "Nice to meet you.");
        assert_eq!(hits.load(Ordering::SeqCst), 1);
        let body: serde_json::Value = serde_json::from_str(&bodies.recv().unwrap()).unwrap();
        assert_eq!(body["model"], "test-model");
        assert_eq!(body["messages"][0]["role"], "system");
        assert_eq!(body["messages"][0]["content"], "You are 30 years old.");
        assert_eq!(body["messages"][1]["role"], "user");
        assert_eq!(body["messages"][1]["content"], "Add traits.");
        assert_eq!(body["seed"], 11);
    }

    #[test]
    fn rate_limit_then_success_retries_with_backoff() {
        let (url, hits, _bodies) = spawn_server(vec![
            (429, "slow down".into()),
            (500, "oops".into()),
            (200, ok_body("Recovered.")),
        ]);
        let backend = OpenAiBackend::new(opts(url));
        let resp = backend.complete_raw(&request()).unwrap();
        assert_eq!(resp.text, "Recovered.");
        assert_eq!(hits.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn client_errors_fail_fast() {
        let (url, hits, _bodies) = spawn_server(vec![(401, "no key".into())]);
        let backend = OpenAiBackend::new(opts(url));
        let err = backend.complete_raw(&request()).unwrap_err();
        assert!(matches!(err, BackendError::Status { status: 401, .. }), "{err}");
        assert_eq!(hits.load(Ordering::SeqCst), 1);
    }

    #[test]
    fn persistent_failures_exhaust_retries() {
        let (url, hits, _bodies) = spawn_server(vec![
            (503, "down".into()),
            (503, "down".into()),
            (503, "down".into()),
            (503, "down".into()),
        ]);
        let backend = OpenAiBackend::new(opts(url));
        let err = backend.complete_raw(&request()).unwrap_err();
        assert!(matches!(err, BackendError::RetriesExhausted { attempts: 4, .. }), "{err}");
        assert_eq!(hits.load(Ordering::SeqCst), 4);
    }

    #[test]
    fn malformed_json_is_a_protocol_error() {
        let (url, _hits, _bodies) = spawn_server(vec![(200, "not json".into())]);
        let backend = OpenAiBackend::new(opts(url));
        let err = backend.complete_raw(&request()).unwrap_err();
        assert!(matches!(err, BackendError::Protocol(_)), "{err}");
    }
}

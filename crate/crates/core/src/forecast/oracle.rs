//! Chat-completion oracles: an HTTP client and scripted in-process mocks.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use super::{ForecastError, OracleConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn new(role: Role, content: impl Into<String>) -> Self {
        ChatMessage { role, content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChatRequest {
    pub model: String,
    pub temperature: f64,
    pub messages: Vec<ChatMessage>,
}

impl ChatRequest {
    /// Content of the final user message.
    pub fn question(&self) -> &str {
        self.messages.iter().rev().find(|m| m.role == Role::User).map(|m| m.content.as_str()).unwrap_or("")
    }
}

/// Anything that answers chat requests with assistant text.
pub trait ChatOracle: Send {
    fn complete(&mut self, request: &ChatRequest) -> Result<String, ForecastError>;
}

impl<O: ChatOracle + ?Sized> ChatOracle for Box<O> {
    fn complete(&mut self, request: &ChatRequest) -> Result<String, ForecastError> {
        (**self).complete(request)
    }
}

/// Minimum spacing between requests, shared by every clone.
#[derive(Debug, Clone)]
pub struct RateLimiter {
    interval: Duration,
    next: Arc<Mutex<Instant>>,
}

impl RateLimiter {
    /// `per_minute == 0` disables limiting.
    pub fn per_minute(per_minute: u32) -> Self {
        let interval = if per_minute == 0 { Duration::ZERO } else { Duration::from_secs_f64(60.0 / per_minute as f64) };
        RateLimiter { interval, next: Arc::new(Mutex::new(Instant::now())) }
    }

    pub fn wait(&self) {
        if self.interval.is_zero() {
            return;
        }
        let slot = {
            let mut next = self.next.lock().expect("rate limiter poisoned");
            let now = Instant::now();
            let slot = (*next).max(now);
            *next = slot + self.interval;
            slot
        };
        let now = Instant::now();
        if slot > now {
            std::thread::sleep(slot - now);
        }
    }
}

/// Chat-completion client for `POST {endpoint}` with a bearer token read
/// from the configured environment variable.
#[derive(Clone)]
pub struct HttpOracle {
    agent: ureq::Agent,
    endpoint: String,
    api_key: Option<String>,
    max_retries: u32,
    backoff: Duration,
    limiter: RateLimiter,
}

impl HttpOracle {
    pub fn new(config: &OracleConfig) -> Result<Self, ForecastError> {
        let endpoint =
            config.endpoint.clone().ok_or_else(|| ForecastError::Config("oracle endpoint not configured".into()))?;
        let api_key = config.api_key_env.as_ref().and_then(|var| std::env::var(var).ok());
        if api_key.is_none() {
            warn!("no API key found in {:?}; sending unauthenticated requests", config.api_key_env);
        }
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(HttpOracle {
            agent,
            endpoint,
            api_key,
            max_retries: config.max_retries,
            backoff: Duration::from_millis(config.backoff_ms),
            limiter: RateLimiter::per_minute(config.requests_per_minute),
        })
    }

    fn attempt(&self, request: &ChatRequest) -> Result<String, (bool, String)> {
        self.limiter.wait();
        let mut req = self.agent.post(&self.endpoint).header("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req.send_json(request).map_err(|e| (true, e.to_string()))?;
        let status = resp.status().as_u16();
        let body: serde_json::Value =
            resp.body_mut().read_json().map_err(|e| (status >= 500, format!("HTTP {status}: unreadable body: {e}")))?;
        if status == 429 || status >= 500 {
            return Err((true, format!("HTTP {status}: {body}")));
        }
        if status >= 400 {
            return Err((false, format!("HTTP {status}: {body}")));
        }
        body.pointer("/choices/0/message/content")
            .and_then(|v| v.as_str())
            .map(str::to_string)
            .ok_or_else(|| (false, format!("response has no choices[0].message.content: {body}")))
    }
}

impl ChatOracle for HttpOracle {
    fn complete(&mut self, request: &ChatRequest) -> Result<String, ForecastError> {
        let mut delay = self.backoff;
        let mut last = String::new();
        for attempt in 0..=self.max_retries {
            match self.attempt(request) {
                Ok(text) => return Ok(text),
                Err((retryable, msg)) => {
                    debug!("oracle attempt {attempt} failed: {msg}");
                    last = msg;
                    if !retryable {
                        break;
                    }
                    if attempt < self.max_retries {
                        std::thread::sleep(delay);
                        delay *= 2;
                    }
                }
            }
        }
        Err(ForecastError::Transport(last))
    }
}

/// Answers every request with the same text.
#[derive(Debug, Clone)]
pub struct FixedOracle(pub String);

impl ChatOracle for FixedOracle {
    fn complete(&mut self, _: &ChatRequest) -> Result<String, ForecastError> {
        Ok(self.0.clone())
    }
}

/// One scripted reply: text, or a transport failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScriptedReply {
    Text(String),
    Failure { error: String },
}

/// Replies per question text, cycled in order across repeated requests.
/// Questions absent from the script get a transport failure.
#[derive(Debug, Clone, Default)]
pub struct ScriptedOracle {
    script: HashMap<String, Vec<ScriptedReply>>,
    cursor: HashMap<String, usize>,
}

impl ScriptedOracle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, question: impl Into<String>, replies: Vec<ScriptedReply>) -> Self {
        self.script.insert(question.into(), replies);
        self
    }

    /// Each question always answers `[Answer] {value}`.
    pub fn answering(mut self, question: impl Into<String>, value: f64) -> Self {
        self.script.insert(question.into(), vec![ScriptedReply::Text(format!("[Answer] {value}"))]);
        self
    }

    pub fn from_map(script: HashMap<String, Vec<ScriptedReply>>) -> Self {
        ScriptedOracle { script, cursor: HashMap::new() }
    }
}

impl ChatOracle for ScriptedOracle {
    fn complete(&mut self, request: &ChatRequest) -> Result<String, ForecastError> {
        let q = request.question().strip_prefix(super::QUESTION_PREFIX).unwrap_or(request.question());
        let Some(replies) = self.script.get(q).filter(|r| !r.is_empty()) else {
            return Err(ForecastError::Transport(format!("no scripted reply for `{q}`")));
        };
        let i = self.cursor.entry(q.to_string()).or_default();
        let reply = replies[*i % replies.len()].clone();
        *i += 1;
        match reply {
            ScriptedReply::Text(t) => Ok(t),
            ScriptedReply::Failure { error } => Err(ForecastError::Transport(error)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(q: &str) -> ChatRequest {
        ChatRequest {
            model: "m".into(),
            temperature: 0.0,
            messages: vec![ChatMessage::new(Role::System, "s"), ChatMessage::new(Role::User, format!("[Q] {q}"))],
        }
    }

    #[test]
    fn scripted_cycles() {
        let mut o = ScriptedOracle::new()
            .with("x", vec![ScriptedReply::Text("a".into()), ScriptedReply::Failure { error: "boom".into() }]);
        assert_eq!(o.complete(&req("x")).unwrap(), "a");
        assert!(o.complete(&req("x")).is_err());
        assert_eq!(o.complete(&req("x")).unwrap(), "a");
        assert!(o.complete(&req("y")).is_err());
    }

    #[test]
    fn request_serializes_like_chat_api() {
        let v = serde_json::to_value(req("x")).unwrap();
        assert_eq!(v["messages"][0]["role"], "system");
        assert_eq!(v["messages"][1]["content"], "[Q] x");
        assert_eq!(v["temperature"], 0.0);
    }

    #[test]
    fn limiter_spaces_requests() {
        let l = RateLimiter::per_minute(6000);
        let start = Instant::now();
        for _ in 0..4 {
            l.wait();
        }
        assert!(start.elapsed() >= Duration::from_millis(29));
    }

    #[test]
    fn http_oracle_against_local_server() {
        use std::io::{BufRead, BufReader, Read, Write};
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let server = std::thread::spawn(move || {
            // first request: 503, second: success
            for status in ["503 Service Unavailable", "200 OK"] {
                let (mut stream, _) = listener.accept().unwrap();
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut len = 0usize;
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                        len = v.trim().parse().unwrap();
                    }
                    if line == "\r\n" {
                        break;
                    }
                }
                let mut body = vec![0; len];
                reader.read_exact(&mut body).unwrap();
                let req: serde_json::Value = serde_json::from_slice(&body).unwrap();
                assert_eq!(req["model"], "test-model");
                let payload = r#"{"choices":[{"message":{"role":"assistant","content":"[Answer] 0.25"}}]}"#;
                write!(
                    stream,
                    "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
                    payload.len()
                )
                .unwrap();
            }
        });
        let cfg = OracleConfig {
            endpoint: Some(format!("http://{addr}/v1/chat/completions")),
            model_name: "test-model".into(),
            backoff_ms: 1,
            ..OracleConfig::default()
        };
        let mut o = HttpOracle::new(&cfg).unwrap();
        let mut r = req("x");
        r.model = "test-model".into();
        assert_eq!(o.complete(&r).unwrap(), "[Answer] 0.25");
        server.join().unwrap();
    }
}

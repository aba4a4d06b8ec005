//! Text generation over HTTP.
//!
//! Two wire formats are supported. `Simple` posts `{prompt, temperature,
//! seed}` and expects `{text}`. `ChatCompletions` speaks the common
//! `/v1/chat/completions` shape and reads `choices[0].message.content`.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::backend::{BackendError, TextBackend};

pub const ENV_URL: &str = "CQPITFALL_GEN_URL";
pub const ENV_API_KEY: &str = "CQPITFALL_GEN_API_KEY";
pub const ENV_MODEL: &str = "CQPITFALL_GEN_MODEL";
pub const ENV_API: &str = "CQPITFALL_GEN_API";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WireFormat {
    Simple,
    ChatCompletions,
}

#[derive(Debug, Clone)]
pub struct HttpBackendConfig {
    pub url: String,
    pub api_key: Option<String>,
    pub model: Option<String>,
    pub format: WireFormat,
    pub timeout: Duration,
    /// Attempts per call, counting the first.
    pub max_attempts: u32,
    pub backoff: Duration,
}

impl HttpBackendConfig {
    pub fn new(url: impl Into<String>, format: WireFormat) -> Self {
        HttpBackendConfig {
            url: url.into(),
            api_key: None,
            model: None,
            format,
            timeout: Duration::from_secs(120),
            max_attempts: 4,
            backoff: Duration::from_millis(500),
        }
    }

    /// Reads the endpoint and credentials from environment variables.
    pub fn from_env() -> Result<Self, BackendError> {
        let url = std::env::var(ENV_URL)
            .map_err(|_| BackendError::Config(format!("{ENV_URL} is not set")))?;
        let format = match std::env::var(ENV_API).as_deref() {
            Err(_) | Ok("simple") => WireFormat::Simple,
            Ok("chat") | Ok("chat-completions") => WireFormat::ChatCompletions,
            Ok(other) => {
                return Err(BackendError::Config(format!(
                    "{ENV_API} must be 'simple' or 'chat', got {other:?}"
                )))
            }
        };
        let mut config = HttpBackendConfig::new(url, format);
        config.api_key = std::env::var(ENV_API_KEY).ok().filter(|k| !k.is_empty());
        config.model = std::env::var(ENV_MODEL).ok().filter(|m| !m.is_empty());
        Ok(config)
    }
}

pub struct HttpTextBackend {
    config: HttpBackendConfig,
    agent: ureq::Agent,
    id: String,
}

impl HttpTextBackend {
    pub fn new(config: HttpBackendConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let id = match &config.model {
            Some(m) => format!("http:{m}"),
            None => format!("http:{}", config.url),
        };
        HttpTextBackend { config, agent, id }
    }

    fn body(&self, prompt: &str, temperature: Option<f64>, seed: u64) -> Value {
        match self.config.format {
            WireFormat::Simple => {
                let mut body = json!({ "prompt": prompt, "seed": seed });
                if let Some(t) = temperature {
                    body["temperature"] = json!(t);
                }
                body
            }
            WireFormat::ChatCompletions => {
                let mut body = json!({
                    "messages": [{ "role": "user", "content": prompt }],
                    "seed": seed,
                });
                if let Some(m) = &self.config.model {
                    body["model"] = json!(m);
                }
                if let Some(t) = temperature {
                    body["temperature"] = json!(t);
                }
                body
            }
        }
    }

    fn attempt(&self, body: &Value) -> Result<String, BackendError> {
        let mut request = self.agent.post(&self.config.url);
        if let Some(key) = &self.config.api_key {
            request = request.header("Authorization", &format!("Bearer {key}"));
        }
        let mut response = request.send_json(body).map_err(transport_error)?;
        let status = response.status().as_u16();
        let text = response
            .body_mut()
            .read_to_string()
            .map_err(|e| BackendError::InvalidResponse(e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(BackendError::Http { status, body: text });
        }
        let value: Value =
            serde_json::from_str(&text).map_err(|e| BackendError::InvalidResponse(e.to_string()))?;
        let extracted = match self.config.format {
            WireFormat::Simple => value.get("text"),
            WireFormat::ChatCompletions => value.pointer("/choices/0/message/content"),
        };
        extracted
            .and_then(Value::as_str)
            .map(str::to_owned)
            .ok_or_else(|| BackendError::InvalidResponse(format!("no text field in {text}")))
    }
}

fn transport_error(e: ureq::Error) -> BackendError {
    match e {
        ureq::Error::StatusCode(status) => BackendError::Http {
            status,
            body: String::new(),
        },
        ureq::Error::BadUri(u) => BackendError::Config(format!("bad URL {u}")),
        other => BackendError::Unreachable(other.to_string()),
    }
}

fn retryable(e: &BackendError) -> bool {
    match e {
        BackendError::Unreachable(_) => true,
        BackendError::Http { status, .. } => *status == 429 || *status >= 500,
        _ => false,
    }
}

impl TextBackend for HttpTextBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn complete(
        &self,
        prompt: &str,
        temperature: Option<f64>,
        seed: u64,
    ) -> Result<String, BackendError> {
        let body = self.body(prompt, temperature, seed);
        let mut delay = self.config.backoff;
        let mut attempt = 1;
        loop {
            match self.attempt(&body) {
                Err(e) if retryable(&e) && attempt < self.config.max_attempts => {
                    log::warn!("{}: attempt {attempt} failed: {e}", self.id);
                    std::thread::sleep(delay);
                    delay *= 2;
                    attempt += 1;
                }
                other => return other,
            }
        }
    }
}

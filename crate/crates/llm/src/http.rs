//! Live backend speaking the OpenAI-compatible chat-completion wire shape.

use std::sync::atomic::{AtomicU32, Ordering};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::{
    check_scs, AdapterConfig, AdapterError, AdapterExchange, Outcome, Role, ScenarioAdapter,
    ACKNOWLEDGMENT,
};

pub const API_KEY_ENV: &str = "T2N_LLM_API_KEY";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    fn new(role: &str, content: impl Into<String>) -> Self {
        ChatMessage {
            role: role.to_string(),
            content: content.into(),
        }
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChatMessage,
}

pub struct HttpAdapter {
    config: AdapterConfig,
    client: reqwest::blocking::Client,
    backoff: Duration,
    retries: AtomicU32,
}

impl HttpAdapter {
    pub fn new(config: AdapterConfig) -> Result<Self, AdapterError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| AdapterError::Config(e.to_string()))?;
        Ok(HttpAdapter {
            config,
            client,
            backoff: Duration::from_millis(250),
            retries: AtomicU32::new(0),
        })
    }

    /// Base delay before the first retry; doubles on each further retry.
    pub fn with_backoff(mut self, backoff: Duration) -> Self {
        self.backoff = backoff;
        self
    }

    /// Retries performed over the adapter's lifetime.
    pub fn retry_count(&self) -> u32 {
        self.retries.load(Ordering::Relaxed)
    }

    pub fn messages(&self, exchange: &AdapterExchange) -> Vec<ChatMessage> {
        let mut out = vec![
            ChatMessage::new("system", self.config.system_prompt.clone()),
            ChatMessage::new("user", exchange.scenario_text.clone()),
        ];
        for t in &exchange.history {
            let role = match t.role {
                Role::User => "user",
                Role::System => "assistant",
            };
            out.push(ChatMessage::new(role, t.text.clone()));
        }
        out
    }

    /// One chat completion with retries on 5xx, timeouts and connection errors.
    pub fn http_complete(&self, messages: &[ChatMessage]) -> Result<String, AdapterError> {
        let url = self
            .config
            .endpoint_url
            .as_deref()
            .ok_or_else(|| AdapterError::Config("missing endpoint url".into()))?;
        let body = json!({
            "model": self.config.model_name.clone().unwrap_or_else(|| "default".into()),
            "messages": messages,
            "temperature": 0,
        });
        let mut attempt = 0;
        loop {
            let mut req = self.client.post(url).json(&body);
            if let Ok(key) = std::env::var(API_KEY_ENV) {
                req = req.bearer_auth(key);
            }
            let err = match req.send() {
                Ok(resp) => {
                    let status = resp.status();
                    if status.is_success() {
                        let parsed: ChatResponse =
                            resp.json()
                                .map_err(|e| AdapterError::MalformedModelOutput {
                                    attempts: 1,
                                    reason: format!("response body is not a chat completion: {e}"),
                                })?;
                        return parsed
                            .choices
                            .into_iter()
                            .next()
                            .map(|c| c.message.content)
                            .ok_or_else(|| AdapterError::MalformedModelOutput {
                                attempts: 1,
                                reason: "no choices".into(),
                            });
                    }
                    if status.as_u16() == 401 || status.as_u16() == 403 {
                        return Err(AdapterError::AuthFailure(status.as_u16()));
                    }
                    let body = resp.text().unwrap_or_default();
                    if !status.is_server_error() {
                        return Err(AdapterError::BackendStatus {
                            status: status.as_u16(),
                            body,
                        });
                    }
                    AdapterError::BackendStatus {
                        status: status.as_u16(),
                        body,
                    }
                }
                Err(e) if e.is_timeout() => AdapterError::BackendTimeout(self.config.timeout),
                Err(e) => AdapterError::BackendUnreachable(e.to_string()),
            };
            if attempt >= self.config.max_retries {
                return Err(err);
            }
            let delay = self.backoff * 2u32.pow(attempt);
            attempt += 1;
            self.retries.fetch_add(1, Ordering::Relaxed);
            tracing::warn!(attempt, max = self.config.max_retries, ?delay, error = %err, "retrying model call");
            std::thread::sleep(delay);
        }
    }
}

/// Classifies raw model text.
pub fn interpret(raw: &str) -> Result<Outcome, String> {
    let text = strip_fences(raw);
    let mut lines = text.lines();
    let first = lines.next().unwrap_or("").trim();
    if let Some(reason) = first.strip_prefix("REJECT:") {
        return Ok(Outcome::Reject {
            reason: reason.trim().to_string(),
        });
    }
    if first.trim_end_matches(['.', '!']) == ACKNOWLEDGMENT {
        let rest: Vec<&str> = lines.collect();
        let body = format!("{}\n", rest.join("\n").trim());
        return check_scs(&body).map(|_| Outcome::scs(body));
    }
    let body = format!("{}\n", text.trim());
    match check_scs(&body) {
        Ok(_) => Ok(Outcome::scs(body)),
        Err(_) if text.contains('?') => Ok(Outcome::clarify(text.trim())),
        Err(e) => Err(e),
    }
}

fn strip_fences(raw: &str) -> String {
    raw.lines()
        .filter(|l| !l.trim_start().starts_with("```"))
        .collect::<Vec<_>>()
        .join("\n")
        .trim()
        .to_string()
}

impl ScenarioAdapter for HttpAdapter {
    fn name(&self) -> &'static str {
        "http"
    }

    fn generate(&self, exchange: &AdapterExchange) -> Result<Outcome, AdapterError> {
        let mut messages = self.messages(exchange);
        let raw = self.http_complete(&messages)?;
        let reason = match interpret(&raw) {
            Ok(o) => return Ok(o),
            Err(reason) => reason,
        };
        tracing::info!(%reason, "model output failed to parse, asking for a repair");
        messages.push(ChatMessage::new("assistant", raw));
        messages.push(ChatMessage::new(
            "user",
            format!("Your reply could not be parsed as structured command strings ({reason}). Reply with {ACKNOWLEDGMENT} followed by corrected SCS lines only."),
        ));
        let repaired = self.http_complete(&messages)?;
        interpret(&repaired).map_err(|reason| AdapterError::MalformedModelOutput {
            attempts: 2,
            reason,
        })
    }
}

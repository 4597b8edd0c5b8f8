//! Chat-completion transport: HTTP client, scripted stand-in for tests,
//! retry policy, and per-call token/time accounting.

use std::collections::VecDeque;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};

pub const DEFAULT_API_KEY_ENV: &str = "CODEWIRE_API_KEY";
pub const MAX_TRANSPORT_ATTEMPTS: u32 = 3;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Full URL of the chat-completions endpoint.
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub timeout_secs: u64,
    /// Completion queries per recommendation for self-consistency voting.
    pub votes: u32,
    /// Base delay for exponential retry backoff.
    pub retry_backoff_ms: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            endpoint: String::new(),
            model: String::new(),
            api_key_env: DEFAULT_API_KEY_ENV.to_string(),
            temperature: 0.0,
            max_output_tokens: 512,
            timeout_secs: 60,
            votes: 5,
            retry_backoff_ms: 250,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage {
            role: "system".to_string(),
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: "user".to_string(),
            content: content.into(),
        }
    }
}

/// One model round-trip with its token/time accounting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChatExchange {
    pub request: Vec<ChatMessage>,
    pub response: String,
    pub tokens_in: u64,
    pub tokens_out: u64,
    /// True when token counts are local byte estimates rather than
    /// provider-reported usage.
    pub estimated: bool,
    pub latency_ms: u64,
}

/// Rough local token estimate (bytes / 4) for providers that omit usage.
pub fn estimate_tokens(text: &str) -> u64 {
    (text.len() as u64).div_ceil(4)
}

pub trait ChatModel: Send + Sync {
    fn complete(&self, messages: &[ChatMessage]) -> Result<ChatExchange>;
}

/// Retry wrapper: at most `MAX_TRANSPORT_ATTEMPTS` attempts per logical call,
/// exponential backoff between attempts, only transport failures retried.
pub fn complete_with_retries(
    model: &dyn ChatModel,
    messages: &[ChatMessage],
    backoff_base: Duration,
) -> Result<ChatExchange> {
    let mut last = None;
    for attempt in 0..MAX_TRANSPORT_ATTEMPTS {
        match model.complete(messages) {
            Ok(exchange) => return Ok(exchange),
            Err(Error::Transport(msg)) => {
                last = Some(Error::Transport(msg));
                if attempt + 1 < MAX_TRANSPORT_ATTEMPTS && !backoff_base.is_zero() {
                    std::thread::sleep(backoff_base * 2u32.pow(attempt));
                }
            }
            Err(other) => return Err(other),
        }
    }
    Err(last.unwrap_or_else(|| Error::Transport("no attempt made".to_string())))
}

/// OpenAI-style chat-completions client over HTTP.
pub struct HttpChatModel {
    config: ModelConfig,
    agent: ureq::Agent,
}

impl HttpChatModel {
    pub fn new(config: ModelConfig) -> Result<HttpChatModel> {
        if config.endpoint.is_empty() {
            return Err(Error::Config("model endpoint is not set".to_string()));
        }
        if config.temperature < 0.0 {
            return Err(Error::Config(format!(
                "temperature must be non-negative, got {}",
                config.temperature
            )));
        }
        if config.votes == 0 {
            return Err(Error::Config("votes must be at least 1".to_string()));
        }
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(HttpChatModel { config, agent })
    }

    fn api_key(&self) -> Result<String> {
        std::env::var(&self.config.api_key_env).map_err(|_| {
            Error::Config(format!(
                "API key environment variable {} is not set",
                self.config.api_key_env
            ))
        })
    }
}

impl ChatModel for HttpChatModel {
    fn complete(&self, messages: &[ChatMessage]) -> Result<ChatExchange> {
        let key = self.api_key()?;
        let body = json!({
            "model": self.config.model,
            "messages": messages,
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_output_tokens,
        });
        let started = Instant::now();
        let mut response = self
            .agent
            .post(&self.config.endpoint)
            .header("Authorization", &format!("Bearer {key}"))
            .header("Content-Type", "application/json")
            .send_json(&body)
            .map_err(|e| Error::Transport(format!("request failed: {e}")))?;
        let latency_ms = started.elapsed().as_millis() as u64;
        let status = response.status();
        if !status.is_success() {
            let detail = response.body_mut().read_to_string().unwrap_or_default();
            return Err(Error::Transport(format!(
                "endpoint returned status {status}: {}",
                detail.chars().take(300).collect::<String>()
            )));
        }
        let payload: serde_json::Value = response
            .body_mut()
            .read_json()
            .map_err(|e| Error::Transport(format!("unreadable response body: {e}")))?;
        let text = payload["choices"][0]["message"]["content"]
            .as_str()
            .unwrap_or_default()
            .to_string();
        let usage = &payload["usage"];
        let (tokens_in, tokens_out, estimated) = match (
            usage["prompt_tokens"].as_u64(),
            usage["completion_tokens"].as_u64(),
        ) {
            (Some(i), Some(o)) => (i, o, false),
            _ => (
                messages.iter().map(|m| estimate_tokens(&m.content)).sum(),
                estimate_tokens(&text),
                true,
            ),
        };
        Ok(ChatExchange {
            request: messages.to_vec(),
            response: text,
            tokens_in,
            tokens_out,
            estimated,
            latency_ms,
        })
    }
}

/// Test double replaying canned replies in order; an exhausted transcript is
/// a transport error, which exercises the fallback paths.
pub struct ScriptedModel {
    replies: Mutex<VecDeque<String>>,
}

impl ScriptedModel {
    pub fn new<I, S>(transcript: I) -> ScriptedModel
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ScriptedModel {
            replies: Mutex::new(transcript.into_iter().map(Into::into).collect()),
        }
    }

    pub fn remaining(&self) -> usize {
        self.replies.lock().unwrap().len()
    }
}

impl ChatModel for ScriptedModel {
    fn complete(&self, messages: &[ChatMessage]) -> Result<ChatExchange> {
        let reply = self
            .replies
            .lock()
            .unwrap()
            .pop_front()
            .ok_or_else(|| Error::Transport("scripted transcript exhausted".to_string()))?;
        Ok(ChatExchange {
            request: messages.to_vec(),
            tokens_in: messages.iter().map(|m| estimate_tokens(&m.content)).sum(),
            tokens_out: estimate_tokens(&reply),
            response: reply,
            estimated: true,
            latency_ms: 0,
        })
    }
}

/// Test double computing replies from the request, for order-insensitive
/// scripting.
pub struct CallbackModel<F>(pub F);

impl<F> ChatModel for CallbackModel<F>
where
    F: Fn(&[ChatMessage]) -> Result<String> + Send + Sync,
{
    fn complete(&self, messages: &[ChatMessage]) -> Result<ChatExchange> {
        let reply = (self.0)(messages)?;
        Ok(ChatExchange {
            request: messages.to_vec(),
            tokens_in: messages.iter().map(|m| estimate_tokens(&m.content)).sum(),
            tokens_out: estimate_tokens(&reply),
            response: reply,
            estimated: true,
            latency_ms: 0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CallPurpose {
    Decision,
    Completion,
    Naive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub purpose: CallPurpose,
    pub tokens_in: u64,
    pub tokens_out: u64,
    pub estimated: bool,
    pub ms: u64,
}

/// Per-session token and wall-time ledger.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Ledger {
    pub entries: Vec<LedgerEntry>,
}

impl Ledger {
    pub fn record(&mut self, purpose: CallPurpose, exchange: &ChatExchange) {
        self.entries.push(LedgerEntry {
            purpose,
            tokens_in: exchange.tokens_in,
            tokens_out: exchange.tokens_out,
            estimated: exchange.estimated,
            ms: exchange.latency_ms,
        });
    }

    pub fn tokens_in(&self) -> u64 {
        self.entries.iter().map(|e| e.tokens_in).sum()
    }

    pub fn tokens_out(&self) -> u64 {
        self.entries.iter().map(|e| e.tokens_out).sum()
    }

    pub fn total_tokens(&self) -> u64 {
        self.tokens_in() + self.tokens_out()
    }

    pub fn total_ms(&self) -> u64 {
        self.entries.iter().map(|e| e.ms).sum()
    }

    pub fn model_calls(&self) -> usize {
        self.entries.len()
    }
}

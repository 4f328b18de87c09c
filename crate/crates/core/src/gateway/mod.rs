//! Chat sessions against live HTTP providers or recorded transcripts, and
//! extraction of SystemVerilog code from assistant replies.

mod extract;
mod http;
mod ratelimit;
mod replay;

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use extract::{extract_code, Extracted, ExtractionMethod};
pub use http::LiveSession;
pub use ratelimit::{limiter_for, RateLimiter};
pub use replay::{load_transcripts, save_transcript, transcript_file_name, ReplaySession, ReplaySource};

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
    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::Assistant,
            content: content.into(),
        }
    }
}

/// Request/response dialect of a live endpoint.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ApiFlavor {
    /// `{model, messages, temperature, max_tokens}` answered with `choices[0].message.content`.
    #[default]
    ChatCompletions,
    /// Messages API with `x-api-key` authentication and a separate system field.
    AnthropicMessages,
}

fn default_max_tokens() -> u32 {
    4096
}
fn default_timeout() -> u64 {
    120
}
fn default_retries() -> u32 {
    3
}
fn default_rpm() -> u32 {
    20
}
fn default_backoff() -> u64 {
    500
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiveHttpConfig {
    pub endpoint: String,
    pub model: String,
    pub api_key_env: String,
    /// `None` leaves sampling at the provider's default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default)]
    pub api: ApiFlavor,
    #[serde(default = "default_rpm")]
    pub requests_per_minute: u32,
    /// Delay before the first retry; doubled on each further attempt.
    #[serde(default = "default_backoff")]
    pub backoff_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system_prompt: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderConfig {
    LiveHttp(LiveHttpConfig),
    /// Directory of transcript files, one per session.
    Replay { dir: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub provider: ProviderConfig,
    pub session_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub session_id: String,
    pub provider: String,
    pub model: String,
    pub messages: Vec<ChatMessage>,
    #[serde(default)]
    pub meta: BTreeMap<String, serde_json::Value>,
}

impl Transcript {
    pub fn new(session_id: &str, provider: &str, model: &str) -> Self {
        Transcript {
            session_id: session_id.into(),
            provider: provider.into(),
            model: model.into(),
            messages: Vec::new(),
            meta: BTreeMap::new(),
        }
    }

    /// Checks that roles alternate user/assistant after an optional leading
    /// system message, and that user and assistant messages are non-empty.
    pub fn check(&self) -> Result<(), String> {
        let body = match self.messages.first() {
            Some(m) if m.role == Role::System => &self.messages[1..],
            _ => &self.messages[..],
        };
        for (i, m) in body.iter().enumerate() {
            let want = if i % 2 == 0 { Role::User } else { Role::Assistant };
            if m.role != want {
                return Err(format!("message {i} has role {:?}, expected {want:?}", m.role));
            }
            if m.content.is_empty() {
                return Err(format!("message {i} is empty"));
            }
        }
        Ok(())
    }

    pub fn assistant_messages(&self) -> impl Iterator<Item = &ChatMessage> {
        self.messages.iter().filter(|m| m.role == Role::Assistant)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GatewayError {
    #[error("environment variable {0} is not set")]
    MissingCredential(String),
    #[error("transcript source {0} not found")]
    TranscriptNotFound(String),
    #[error("no recorded reply left in session {0}")]
    ReplayExhausted(String),
    #[error("malformed transcript {path}: {message}")]
    FormatError { path: String, message: String },
    #[error("i/o error on {path}: {message}")]
    IoError { path: String, message: String },
    #[error("transport error: {0}")]
    TransportError(String),
    #[error("provider returned HTTP {status}: {body}")]
    ProviderError { status: u16, body: String },
    #[error("no code found in the reply")]
    ExtractionFailure,
}

/// One independent conversation. Sends are strictly sequential.
pub trait ChatSession: Send {
    fn send(&mut self, user_text: &str) -> Result<ChatMessage, GatewayError>;
    fn transcript(&self) -> &Transcript;
}

pub fn open_session(cfg: &SessionConfig) -> Result<Box<dyn ChatSession>, GatewayError> {
    match &cfg.provider {
        ProviderConfig::LiveHttp(c) => Ok(Box::new(LiveSession::open(c, &cfg.session_id)?)),
        ProviderConfig::Replay { dir } => Ok(Box::new(ReplaySession::open(dir, &cfg.session_id)?)),
    }
}

#[cfg(test)]
mod tests;

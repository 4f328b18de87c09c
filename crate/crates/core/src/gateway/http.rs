use std::sync::Arc;
use std::time::Duration;

use serde_json::{json, Value};

use super::ratelimit::{limiter_for, RateLimiter};
use super::{ApiFlavor, ChatMessage, ChatSession, GatewayError, LiveHttpConfig, Role, Transcript};

const ANTHROPIC_VERSION: &str = "2023-06-01";

/// A session against a live chat endpoint.
pub struct LiveSession {
    cfg: LiveHttpConfig,
    key: String,
    client: reqwest::blocking::Client,
    limiter: Arc<RateLimiter>,
    transcript: Transcript,
}

enum Attempt {
    Retry(GatewayError),
    Fail(GatewayError),
}

impl LiveSession {
    pub fn open(cfg: &LiveHttpConfig, session_id: &str) -> Result<Self, GatewayError> {
        let key = std::env::var(&cfg.api_key_env).map_err(|_| GatewayError::MissingCredential(cfg.api_key_env.clone()))?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(cfg.timeout_secs))
            .build()
            .map_err(|e| GatewayError::TransportError(e.to_string()))?;
        let mut transcript = Transcript::new(session_id, &format!("{:?}", cfg.api), &cfg.model);
        transcript.meta.insert("endpoint".into(), cfg.endpoint.clone().into());
        transcript.meta.insert(
            "temperature".into(),
            cfg.temperature.map_or_else(|| Value::from("provider-default"), Value::from),
        );
        transcript.meta.insert("max_tokens".into(), cfg.max_tokens.into());
        if let Some(s) = &cfg.system_prompt {
            transcript.messages.push(ChatMessage {
                role: Role::System,
                content: s.clone(),
            });
        }
        Ok(LiveSession {
            cfg: cfg.clone(),
            key,
            client,
            limiter: limiter_for(&cfg.endpoint, cfg.requests_per_minute),
            transcript,
        })
    }

    fn body(&self) -> Value {
        let role = |r: Role| match r {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        };
        let mut body = match self.cfg.api {
            ApiFlavor::ChatCompletions => json!({
                "model": self.cfg.model,
                "max_tokens": self.cfg.max_tokens,
                "messages": self.transcript.messages.iter()
                    .map(|m| json!({"role": role(m.role), "content": m.content}))
                    .collect::<Vec<_>>(),
            }),
            ApiFlavor::AnthropicMessages => {
                let mut b = json!({
                    "model": self.cfg.model,
                    "max_tokens": self.cfg.max_tokens,
                    "messages": self.transcript.messages.iter()
                        .filter(|m| m.role != Role::System)
                        .map(|m| json!({"role": role(m.role), "content": m.content}))
                        .collect::<Vec<_>>(),
                });
                if let Some(s) = &self.cfg.system_prompt {
                    b["system"] = s.clone().into();
                }
                b
            }
        };
        if let Some(t) = self.cfg.temperature {
            body["temperature"] = t.into();
        }
        body
    }

    fn reply_text(&self, v: &Value) -> Option<String> {
        match self.cfg.api {
            ApiFlavor::ChatCompletions => v["choices"][0]["message"]["content"].as_str().map(str::to_string),
            ApiFlavor::AnthropicMessages => {
                let parts: Vec<&str> = v["content"]
                    .as_array()?
                    .iter()
                    .filter_map(|c| c["text"].as_str())
                    .collect();
                (!parts.is_empty()).then(|| parts.concat())
            }
        }
    }

    fn attempt(&self, body: &Value) -> Result<String, Attempt> {
        self.limiter.acquire();
        let mut req = self.client.post(&self.cfg.endpoint).json(body);
        req = match self.cfg.api {
            ApiFlavor::ChatCompletions => req.bearer_auth(&self.key),
            ApiFlavor::AnthropicMessages => req
                .header("x-api-key", &self.key)
                .header("anthropic-version", ANTHROPIC_VERSION),
        };
        let resp = req
            .send()
            .map_err(|e| Attempt::Retry(GatewayError::TransportError(e.to_string())))?;
        let status = resp.status();
        let text = resp
            .text()
            .map_err(|e| Attempt::Retry(GatewayError::TransportError(e.to_string())))?;
        if !status.is_success() {
            let err = GatewayError::ProviderError {
                status: status.as_u16(),
                body: text,
            };
            return Err(if status.as_u16() == 429 || status.is_server_error() {
                Attempt::Retry(err)
            } else {
                Attempt::Fail(err)
            });
        }
        let v: Value = serde_json::from_str(&text).map_err(|e| {
            Attempt::Fail(GatewayError::ProviderError {
                status: status.as_u16(),
                body: format!("unparseable response ({e}): {text}"),
            })
        })?;
        self.reply_text(&v).ok_or_else(|| {
            Attempt::Fail(GatewayError::ProviderError {
                status: status.as_u16(),
                body: format!("response has no assistant text: {text}"),
            })
        })
    }
}

impl ChatSession for LiveSession {
    fn send(&mut self, user_text: &str) -> Result<ChatMessage, GatewayError> {
        self.transcript.messages.push(ChatMessage::user(user_text));
        let body = self.body();
        let mut attempt = 0u32;
        let text = loop {
            match self.attempt(&body) {
                Ok(t) => break t,
                Err(Attempt::Fail(e)) => return Err(e),
                Err(Attempt::Retry(e)) if attempt >= self.cfg.max_retries => return Err(e),
                Err(Attempt::Retry(_)) => {
                    let delay = self.cfg.backoff_ms.saturating_mul(1u64 << attempt.min(16));
                    std::thread::sleep(Duration::from_millis(delay));
                    attempt += 1;
                }
            }
        };
        let reply = ChatMessage::assistant(text);
        self.transcript.messages.push(reply.clone());
        Ok(reply)
    }

    fn transcript(&self) -> &Transcript {
        &self.transcript
    }
}

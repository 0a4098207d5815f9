use std::time::Duration;

use serde::Deserialize;
use serde_json::{json, Value};

use super::{BackendError, ChatBackend, ChatRequest, ModelConfig};
use crate::protocol::PromptPair;

/// JSON body for one chat-completion request: exactly one system and one
/// user message, no history.
pub fn request_body(prompt: &PromptPair, cfg: &ModelConfig) -> Value {
    let mut body = json!({
        "model": cfg.model_name,
        "messages": [
            {"role": "system", "content": prompt.system_text},
            {"role": "user", "content": prompt.user_text},
        ],
        "max_tokens": cfg.max_output_tokens,
    });
    if let Some(t) = cfg.temperature {
        body["temperature"] = json!(t);
    }
    body
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Deserialize)]
struct Message {
    #[serde(default)]
    content: Option<String>,
}

/// Blocking client for an OpenAI-style `/chat/completions` endpoint.
pub struct HttpBackend {
    agent: ureq::Agent,
    cfg: ModelConfig,
    api_key: Option<String>,
}

impl HttpBackend {
    /// Reads the API key from `cfg.api_key_env` when set.
    pub fn new(cfg: &ModelConfig) -> Self {
        let api_key = cfg
            .api_key_env
            .as_deref()
            .and_then(|var| std::env::var(var).ok())
            .filter(|k| !k.is_empty());
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_secs(cfg.timeout_secs))
            .build();
        Self {
            agent,
            cfg: cfg.clone(),
            api_key,
        }
    }
}

impl ChatBackend for HttpBackend {
    fn model_id(&self) -> &str {
        &self.cfg.model_name
    }

    fn complete(&self, request: &ChatRequest<'_>) -> Result<String, BackendError> {
        let mut req = self
            .agent
            .post(&self.cfg.endpoint_url)
            .set("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            req = req.set("Authorization", &format!("Bearer {key}"));
        }
        let resp = match req.send_json(request_body(request.prompt, &self.cfg)) {
            Ok(resp) => resp,
            Err(ureq::Error::Status(status, resp)) => {
                let body = resp.into_string().unwrap_or_default();
                return Err(BackendError::Status { status, body });
            }
            Err(ureq::Error::Transport(t)) => return Err(BackendError::Transport(t.to_string())),
        };
        let raw = resp
            .into_string()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        if raw.trim().is_empty() {
            return Err(BackendError::EmptyResponse);
        }
        let parsed: CompletionResponse =
            serde_json::from_str(&raw).map_err(|e| BackendError::Decode(e.to_string()))?;
        let text = parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .unwrap_or_default();
        if text.trim().is_empty() {
            return Err(BackendError::EmptyResponse);
        }
        Ok(text)
    }
}

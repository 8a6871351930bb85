//! Chat-completion HTTP backend.
//!
//! Speaks the common chat-completion wire format: POST to the configured
//! endpoint with `model`, `messages` (system + user), `temperature`,
//! `top_p`, and `max_tokens`; reads `choices[0].message.content` and the
//! `usage` block back. Works against any service exposing that shape.

use serde::Deserialize;
use serde_json::json;
use std::time::Instant;

use super::{BackendConfig, BackendError, GenerationBackend, GenerationRequest, GenerationResult};
use crate::text::whitespace_token_count;

pub struct HttpBackend {
    endpoint: String,
    model: String,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
    #[serde(default)]
    usage: Option<Usage>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Deserialize)]
struct Message {
    content: String,
}

#[derive(Deserialize)]
struct Usage {
    #[serde(default)]
    prompt_tokens: Option<u64>,
    #[serde(default)]
    completion_tokens: Option<u64>,
}

impl HttpBackend {
    /// Build from config. The API key is read from the environment variable
    /// named by `api_key_env`, never from the config file itself.
    pub fn from_config(config: &BackendConfig) -> Result<Self, BackendError> {
        let endpoint = config
            .endpoint
            .clone()
            .ok_or_else(|| BackendError::Fatal("http backend requires 'endpoint'".into()))?;
        let model = config
            .model
            .clone()
            .ok_or_else(|| BackendError::Fatal("http backend requires 'model'".into()))?;
        let api_key = match &config.api_key_env {
            Some(var) => Some(std::env::var(var).map_err(|_| {
                BackendError::Fatal(format!("environment variable '{var}' is not set"))
            })?),
            None => None,
        };
        let client = reqwest::blocking::Client::builder()
            .timeout(std::time::Duration::from_secs(120))
            .build()
            .map_err(|e| BackendError::Fatal(format!("cannot build http client: {e}")))?;
        Ok(Self {
            endpoint,
            model,
            api_key,
            client,
        })
    }
}

impl GenerationBackend for HttpBackend {
    fn backend_id(&self) -> String {
        format!("http:{}", self.model)
    }

    fn generate(&self, request: &GenerationRequest) -> Result<GenerationResult, BackendError> {
        let body = json!({
            "model": self.model,
            "messages": [
                {"role": "system", "content": request.system_prompt},
                {"role": "user", "content": request.user_prompt},
            ],
            "temperature": request.temperature,
            "top_p": request.top_p,
            "max_tokens": request.max_output,
        });

        let start = Instant::now();
        let mut http_request = self.client.post(&self.endpoint).json(&body);
        if let Some(key) = &self.api_key {
            http_request = http_request.bearer_auth(key);
        }
        let response = http_request
            .send()
            .map_err(|e| BackendError::Transient(format!("request failed: {e}")))?;

        let status = response.status();
        if status.is_server_error() || status.as_u16() == 429 {
            return Err(BackendError::Transient(format!("status {status}")));
        }
        if !status.is_success() {
            let detail = response.text().unwrap_or_default();
            return Err(BackendError::Fatal(format!("status {status}: {detail}")));
        }

        let parsed: ChatResponse = response
            .json()
            .map_err(|e| BackendError::Fatal(format!("malformed response body: {e}")))?;
        let latency_ms = start.elapsed().as_millis() as u64;
        let text = parsed
            .choices
            .first()
            .map(|c| c.message.content.clone())
            .ok_or_else(|| BackendError::Fatal("response has no choices".into()))?;

        // Fall back to whitespace counts when the service omits usage.
        let (input_tokens, output_tokens) = match &parsed.usage {
            Some(usage) => (
                usage.prompt_tokens.unwrap_or_else(|| {
                    (whitespace_token_count(&request.system_prompt)
                        + whitespace_token_count(&request.user_prompt)) as u64
                }),
                usage
                    .completion_tokens
                    .unwrap_or_else(|| whitespace_token_count(&text) as u64),
            ),
            None => (
                (whitespace_token_count(&request.system_prompt)
                    + whitespace_token_count(&request.user_prompt)) as u64,
                whitespace_token_count(&text) as u64,
            ),
        };

        Ok(GenerationResult {
            text,
            input_tokens,
            output_tokens,
            latency_ms,
            backend_id: self.backend_id(),
        })
    }
}

//! The generation-backend contract and the client wrapper that adds
//! retries, rate limiting, and token budgeting.

use serde::{Deserialize, Serialize};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};
use thiserror::Error;

use super::{GenerationRequest, GenerationResult};

#[derive(Debug, Error)]
pub enum BackendError {
    /// Transport-level failure worth retrying (timeouts, 5xx, connection
    /// resets).
    #[error("transient backend failure: {0}")]
    Transient(String),
    /// Failure that retrying will not fix (bad credentials, 4xx, protocol
    /// violations).
    #[error("backend failure: {0}")]
    Fatal(String),
    #[error("backend unavailable after {attempts} attempts: {last_error}")]
    Unavailable { attempts: u32, last_error: String },
    #[error("no recorded response for prompt hash {prompt_sha256}")]
    ReplayMiss { prompt_sha256: String },
    #[error("token budget exceeded: {used} of {budget} tokens consumed")]
    TokenBudgetExceeded { used: u64, budget: u64 },
}

/// A text-generation backend. Implementations must accept concurrent
/// in-flight requests; shared admission control lives in [`RateLimiter`].
pub trait GenerationBackend: Sync + Send {
    fn backend_id(&self) -> String;
    fn generate(&self, request: &GenerationRequest) -> Result<GenerationResult, BackendError>;
}

/// Backend selection, from `[backend]` config keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Http,
    Mock,
    Replay,
}

/// Deserialized backend configuration (`kind`, `endpoint`, `model`,
/// `api_key_env`, `max_concurrency`, `rpm`, `tpm`, `retries`, ...).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BackendConfig {
    pub kind: BackendKind,
    #[serde(default)]
    pub endpoint: Option<String>,
    #[serde(default)]
    pub model: Option<String>,
    /// Name of the environment variable holding the API key.
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default = "default_max_concurrency")]
    pub max_concurrency: usize,
    /// Requests per minute; absent means unlimited.
    #[serde(default)]
    pub rpm: Option<u32>,
    /// Tokens per minute; absent means unlimited.
    #[serde(default)]
    pub tpm: Option<u32>,
    #[serde(default = "default_retries")]
    pub retries: u32,
    /// Path to a mock script or replay transcript, depending on `kind`.
    #[serde(default)]
    pub script: Option<String>,
    /// Hard cap on total tokens for a run; absent means unlimited.
    #[serde(default)]
    pub token_budget: Option<u64>,
}

fn default_max_concurrency() -> usize {
    4
}

fn default_retries() -> u32 {
    2
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            kind: BackendKind::Mock,
            endpoint: None,
            model: None,
            api_key_env: None,
            max_concurrency: default_max_concurrency(),
            rpm: None,
            tpm: None,
            retries: default_retries(),
            script: None,
            token_budget: None,
        }
    }
}

/// Sliding one-minute window limiter for requests/minute and tokens/minute.
/// `admit` blocks until the call fits the window.
pub struct RateLimiter {
    rpm: Option<u32>,
    tpm: Option<u32>,
    window: Mutex<WindowState>,
}

struct WindowState {
    /// (admission instant, tokens charged) per admitted call, pruned as the
    /// window slides.
    events: Vec<(Instant, u64)>,
}

impl RateLimiter {
    pub fn new(rpm: Option<u32>, tpm: Option<u32>) -> Self {
        Self {
            rpm,
            tpm,
            window: Mutex::new(WindowState { events: Vec::new() }),
        }
    }

    pub fn unlimited() -> Self {
        Self::new(None, None)
    }

    /// Block until a call charging `tokens` fits within the configured
    /// per-minute limits, then record it.
    pub fn admit(&self, tokens: u64) {
        if self.rpm.is_none() && self.tpm.is_none() {
            return;
        }
        loop {
            let wait = {
                let mut state = self.window.lock().unwrap();
                let now = Instant::now();
                state
                    .events
                    .retain(|(t, _)| now.duration_since(*t) < Duration::from_secs(60));
                let requests = state.events.len() as u32;
                let used_tokens: u64 = state.events.iter().map(|(_, n)| *n).sum();
                let over_rpm = self.rpm.is_some_and(|limit| requests >= limit);
                let over_tpm = self
                    .tpm
                    .is_some_and(|limit| used_tokens + tokens > limit as u64 && requests > 0);
                if !over_rpm && !over_tpm {
                    state.events.push((now, tokens));
                    None
                } else {
                    state
                        .events
                        .first()
                        .map(|(t, _)| Duration::from_secs(60).saturating_sub(now.duration_since(*t)))
                }
            };
            match wait {
                None => return,
                Some(d) => std::thread::sleep(d.min(Duration::from_millis(250)).max(Duration::from_millis(5))),
            }
        }
    }
}

/// Run-wide token accounting with an optional hard cap.
pub struct TokenBudget {
    used: AtomicU64,
    budget: Option<u64>,
}

impl TokenBudget {
    pub fn new(budget: Option<u64>) -> Self {
        Self {
            used: AtomicU64::new(0),
            budget,
        }
    }

    pub fn used(&self) -> u64 {
        self.used.load(Ordering::Relaxed)
    }

    fn check(&self) -> Result<(), BackendError> {
        if let Some(budget) = self.budget {
            let used = self.used();
            if used >= budget {
                return Err(BackendError::TokenBudgetExceeded { used, budget });
            }
        }
        Ok(())
    }

    fn charge(&self, tokens: u64) {
        self.used.fetch_add(tokens, Ordering::Relaxed);
    }
}

/// Wraps a backend with retry, rate-limit admission, and budget checks.
pub struct GenerationClient<'a> {
    backend: &'a dyn GenerationBackend,
    retries: u32,
    limiter: Option<&'a RateLimiter>,
    budget: Option<&'a TokenBudget>,
    /// Base backoff; tests shrink it.
    pub backoff: Duration,
}

impl<'a> GenerationClient<'a> {
    pub fn new(backend: &'a dyn GenerationBackend, retries: u32) -> Self {
        Self {
            backend,
            retries,
            limiter: None,
            budget: None,
            backoff: Duration::from_millis(100),
        }
    }

    pub fn with_limiter(mut self, limiter: &'a RateLimiter) -> Self {
        self.limiter = Some(limiter);
        self
    }

    pub fn with_budget(mut self, budget: &'a TokenBudget) -> Self {
        self.budget = Some(budget);
        self
    }

    pub fn backend_id(&self) -> String {
        self.backend.backend_id()
    }

    /// Send a request, retrying transient transport failures with
    /// exponential backoff up to the configured retry count.
    pub fn complete(&self, request: &GenerationRequest) -> Result<GenerationResult, BackendError> {
        if let Some(budget) = self.budget {
            budget.check()?;
        }
        if let Some(limiter) = self.limiter {
            let estimated = crate::text::whitespace_token_count(&request.system_prompt) as u64
                + crate::text::whitespace_token_count(&request.user_prompt) as u64;
            limiter.admit(estimated);
        }

        let mut last_error = String::new();
        for attempt in 0..=self.retries {
            match self.backend.generate(request) {
                Ok(result) => {
                    if let Some(budget) = self.budget {
                        budget.charge(result.input_tokens + result.output_tokens);
                    }
                    return Ok(result);
                }
                Err(BackendError::Transient(message)) => {
                    last_error = message;
                    if attempt < self.retries {
                        std::thread::sleep(self.backoff * 2u32.pow(attempt));
                    }
                }
                Err(other) => return Err(other),
            }
        }
        Err(BackendError::Unavailable {
            attempts: self.retries + 1,
            last_error,
        })
    }
}

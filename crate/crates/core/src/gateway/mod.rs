//! Text-completion providers behind one retrying, bounded-parallel gateway.
//!
//! A [`Provider`] performs single attempts. [`Gateway`] adds the retry
//! policy, the concurrency bound for batches and the JSON-lines transcript.

mod http;
mod replay;
mod stub;

use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use http::HttpProvider;
pub use replay::{read_transcript, ReplayProvider};
pub use stub::{InstanceFixture, ParagraphSlot, StubProvider};

/// Failure of one provider attempt.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProviderError {
    #[error("request timed out")]
    Timeout,
    #[error("rate limited")]
    RateLimited,
    #[error("server error {0}")]
    Server(u16),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("request rejected: {0}")]
    Rejected(String),
}

impl ProviderError {
    pub fn is_transient(&self) -> bool {
        !matches!(self, ProviderError::Rejected(_))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GatewayError {
    #[error("provider unavailable after {attempts} attempts: {last}")]
    ProviderUnavailable { attempts: u32, last: String },
    #[error("provider rejected the request: {0}")]
    ProviderRejected(String),
    #[error("provider timed out after {attempts} attempts")]
    ProviderTimeout { attempts: u32 },
    #[error("invalid provider configuration: {0}")]
    InvalidConfig(String),
}

pub trait Provider: Send + Sync {
    /// Identifier written to transcripts.
    fn id(&self) -> &str;

    fn complete(&self, prompt: &str, model: &str) -> Result<String, ProviderError>;
}

fn default_endpoint() -> String {
    "http://127.0.0.1:8000/v1/chat/completions".into()
}
fn default_model() -> String {
    "gpt-3.5-turbo".into()
}
fn default_credential_env() -> String {
    "NL2MILP_API_KEY".into()
}
fn default_max_tokens() -> u32 {
    256
}
fn default_retries() -> u32 {
    3
}
fn default_backoff() -> u64 {
    500
}
fn default_concurrency() -> usize {
    4
}
fn default_timeout() -> u64 {
    60
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderConfig {
    #[serde(default = "default_endpoint")]
    pub endpoint: String,
    #[serde(default = "default_model")]
    pub model: String,
    /// Fine-tuned model used for classification; falls back to `model`.
    #[serde(default)]
    pub classifier_model: Option<String>,
    /// Name of the environment variable holding the API key.
    #[serde(default = "default_credential_env")]
    pub credential_env: String,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    #[serde(default = "default_retries")]
    pub retries: u32,
    #[serde(default = "default_backoff")]
    pub backoff_base_ms: u64,
    #[serde(default = "default_concurrency")]
    pub max_concurrency: usize,
    #[serde(default = "default_timeout")]
    pub timeout_s: u64,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig {
            endpoint: default_endpoint(),
            model: default_model(),
            classifier_model: None,
            credential_env: default_credential_env(),
            temperature: 0.0,
            max_tokens: default_max_tokens(),
            retries: default_retries(),
            backoff_base_ms: default_backoff(),
            max_concurrency: default_concurrency(),
            timeout_s: default_timeout(),
        }
    }
}

impl ProviderConfig {
    pub fn validate(&self) -> Result<(), GatewayError> {
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(GatewayError::InvalidConfig("temperature must be >= 0".into()));
        }
        if self.max_concurrency == 0 {
            return Err(GatewayError::InvalidConfig("max_concurrency must be >= 1".into()));
        }
        Ok(())
    }

    pub fn classifier_model(&self) -> &str {
        self.classifier_model.as_deref().unwrap_or(&self.model)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRecord {
    pub prompt: String,
    pub reply: String,
    pub provider: String,
    pub latency_ms: u64,
    pub attempts: u32,
}

/// One transcript line. Failed exchanges carry `error` instead of `reply`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub prompt: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reply: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub provider: String,
    pub model: String,
    pub latency_ms: u64,
    pub attempts: u32,
}

pub struct Gateway {
    provider: Box<dyn Provider>,
    config: ProviderConfig,
    transcript: Option<Mutex<Box<dyn Write + Send>>>,
    in_flight: AtomicUsize,
    peak_in_flight: AtomicUsize,
}

impl Gateway {
    pub fn new(provider: impl Provider + 'static, config: ProviderConfig) -> Result<Self, GatewayError> {
        config.validate()?;
        Ok(Gateway {
            provider: Box::new(provider),
            config,
            transcript: None,
            in_flight: AtomicUsize::new(0),
            peak_in_flight: AtomicUsize::new(0),
        })
    }

    /// Append every exchange to `sink` as one JSON line.
    pub fn with_transcript(mut self, sink: impl Write + Send + 'static) -> Self {
        self.transcript = Some(Mutex::new(Box::new(sink)));
        self
    }

    pub fn config(&self) -> &ProviderConfig {
        &self.config
    }

    pub fn provider_id(&self) -> &str {
        self.provider.id()
    }

    /// Highest number of simultaneous provider calls seen so far.
    pub fn peak_in_flight(&self) -> usize {
        self.peak_in_flight.load(Ordering::SeqCst)
    }

    pub fn complete(&self, prompt: &str) -> Result<CompletionRecord, GatewayError> {
        self.complete_with_model(prompt, &self.config.model)
    }

    pub fn complete_with_model(&self, prompt: &str, model: &str) -> Result<CompletionRecord, GatewayError> {
        let start = Instant::now();
        let max_attempts = self.config.retries + 1;
        let mut attempts = 0;
        let outcome = loop {
            attempts += 1;
            match self.attempt(prompt, model) {
                Ok(reply) => break Ok(reply),
                Err(ProviderError::Rejected(m)) => break Err(GatewayError::ProviderRejected(m)),
                Err(e) if attempts >= max_attempts => {
                    break Err(match e {
                        ProviderError::Timeout => GatewayError::ProviderTimeout { attempts },
                        other => GatewayError::ProviderUnavailable {
                            attempts,
                            last: other.to_string(),
                        },
                    })
                }
                Err(_) => std::thread::sleep(self.backoff(attempts)),
            }
        };
        let latency_ms = start.elapsed().as_millis() as u64;
        self.log(TranscriptEntry {
            prompt: prompt.to_string(),
            reply: outcome.as_ref().ok().cloned(),
            error: outcome.as_ref().err().map(|e| e.to_string()),
            provider: self.provider.id().to_string(),
            model: model.to_string(),
            latency_ms,
            attempts,
        });
        outcome.map(|reply| CompletionRecord {
            prompt: prompt.to_string(),
            reply,
            provider: self.provider.id().to_string(),
            latency_ms,
            attempts,
        })
    }

    /// Complete every prompt with at most `max_concurrency` calls in flight.
    /// Results keep input order; failures are reported per item.
    pub fn complete_batch<P: AsRef<str> + Sync>(&self, prompts: &[P]) -> Vec<Result<CompletionRecord, GatewayError>> {
        self.complete_batch_with_model(prompts, &self.config.model)
    }

    pub fn complete_batch_with_model<P: AsRef<str> + Sync>(
        &self,
        prompts: &[P],
        model: &str,
    ) -> Vec<Result<CompletionRecord, GatewayError>> {
        let slots: Vec<Mutex<Option<Result<CompletionRecord, GatewayError>>>> =
            prompts.iter().map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        let workers = self.config.max_concurrency.min(prompts.len());
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    if i >= prompts.len() {
                        break;
                    }
                    let result = self.complete_with_model(prompts[i].as_ref(), model);
                    *slots[i].lock().unwrap() = Some(result);
                });
            }
        });
        slots
            .into_iter()
            .map(|s| s.into_inner().unwrap().expect("every slot is filled"))
            .collect()
    }

    fn attempt(&self, prompt: &str, model: &str) -> Result<String, ProviderError> {
        let now = self.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        self.peak_in_flight.fetch_max(now, Ordering::SeqCst);
        let result = self.provider.complete(prompt, model);
        self.in_flight.fetch_sub(1, Ordering::SeqCst);
        result
    }

    fn backoff(&self, attempt: u32) -> Duration {
        let factor = 1u64 << (attempt - 1).min(16);
        Duration::from_millis(self.config.backoff_base_ms.saturating_mul(factor))
    }

    fn log(&self, entry: TranscriptEntry) {
        let Some(sink) = &self.transcript else { return };
        let line = serde_json::to_string(&entry).expect("transcript entries serialize");
        let mut w = sink.lock().unwrap_or_else(|p| p.into_inner());
        // A broken transcript must not fail the synthesis run.
        let _ = writeln!(w, "{line}").and_then(|_| w.flush());
    }
}

//! Chat-completions client. The wire format is documented in `docs/protocol.md`.

use std::time::Duration;

use serde::Deserialize;
use serde_json::json;

use super::{Provider, ProviderConfig, ProviderError};

pub struct HttpProvider {
    agent: ureq::Agent,
    endpoint: String,
    credential_env: String,
    temperature: f64,
    max_tokens: u32,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    #[serde(default)]
    message: Option<Message>,
    #[serde(default)]
    text: Option<String>,
}

#[derive(Deserialize)]
struct Message {
    content: Option<String>,
}

impl HttpProvider {
    pub fn new(config: &ProviderConfig) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_s.max(1))))
            .http_status_as_error(false)
            .build()
            .into();
        HttpProvider {
            agent,
            endpoint: config.endpoint.clone(),
            credential_env: config.credential_env.clone(),
            temperature: config.temperature,
            max_tokens: config.max_tokens,
        }
    }

    pub fn request_body(&self, prompt: &str, model: &str) -> serde_json::Value {
        json!({
            "model": model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        })
    }
}

fn map_transport(e: ureq::Error) -> ProviderError {
    match e {
        ureq::Error::Timeout(_) => ProviderError::Timeout,
        ureq::Error::Io(io) if io.kind() == std::io::ErrorKind::TimedOut => ProviderError::Timeout,
        ureq::Error::BadUri(u) => ProviderError::Rejected(format!("bad endpoint `{u}`")),
        other => ProviderError::Transport(other.to_string()),
    }
}

/// Reply text from a chat-completions response body.
pub(crate) fn extract_reply(body: &str) -> Result<String, ProviderError> {
    let parsed: ChatResponse = serde_json::from_str(body)
        .map_err(|e| ProviderError::Rejected(format!("malformed response: {e}")))?;
    let choice = parsed
        .choices
        .into_iter()
        .next()
        .ok_or_else(|| ProviderError::Rejected("response has no choices".into()))?;
    choice
        .message
        .and_then(|m| m.content)
        .or(choice.text)
        .ok_or_else(|| ProviderError::Rejected("response choice has no content".into()))
}

impl Provider for HttpProvider {
    fn id(&self) -> &str {
        "http"
    }

    fn complete(&self, prompt: &str, model: &str) -> Result<String, ProviderError> {
        let key = std::env::var(&self.credential_env).map_err(|_| {
            ProviderError::Rejected(format!("credential variable `{}` is not set", self.credential_env))
        })?;
        let body = self.request_body(prompt, model).to_string();
        let mut response = self
            .agent
            .post(&self.endpoint)
            .header("Authorization", &format!("Bearer {key}"))
            .header("Content-Type", "application/json")
            .send(&body)
            .map_err(map_transport)?;
        let status = response.status().as_u16();
        let text = response.body_mut().read_to_string().map_err(map_transport)?;
        match status {
            200..=299 => extract_reply(&text),
            429 => Err(ProviderError::RateLimited),
            408 => Err(ProviderError::Timeout),
            500..=599 => Err(ProviderError::Server(status)),
            _ => Err(ProviderError::Rejected(format!("HTTP {status}: {}", text.trim()))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reply_extraction() {
        let body = r#"{"choices":[{"message":{"role":"assistant","content":" 13"}}]}"#;
        assert_eq!(extract_reply(body).unwrap(), " 13");
        let legacy = r#"{"choices":[{"text":"x <= 1"}]}"#;
        assert_eq!(extract_reply(legacy).unwrap(), "x <= 1");
        assert!(extract_reply(r#"{"choices":[]}"#).is_err());
        assert!(extract_reply("not json").is_err());
    }

    #[test]
    fn request_shape() {
        let p = HttpProvider::new(&ProviderConfig::default());
        let b = p.request_body("hello", "m");
        assert_eq!(b["model"], "m");
        assert_eq!(b["messages"][0]["role"], "user");
        assert_eq!(b["messages"][0]["content"], "hello");
        assert_eq!(b["temperature"], 0.0);
    }

    #[test]
    fn missing_credential_rejected_offline() {
        let cfg = ProviderConfig {
            credential_env: "NL2MILP_TEST_UNSET_CREDENTIAL".into(),
            endpoint: "http://192.0.2.1:9/unreachable".into(),
            ..ProviderConfig::default()
        };
        let p = HttpProvider::new(&cfg);
        assert!(matches!(p.complete("x", "m"), Err(ProviderError::Rejected(_))));
    }
}

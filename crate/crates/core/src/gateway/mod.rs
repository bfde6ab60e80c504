//! Provider-neutral completion interface.
//!
//! A [`Gateway`] sends a [`ChatRequest`] to a [`CompletionProvider`], parses
//! the reply against the expected [`EnvelopeSchema`], and re-sends the
//! identical request when the reply is malformed or a transport call fails.
//! A request with `max_retries = k` makes at most `k + 1` provider calls.

mod config;
pub mod envelope;
mod live;
mod scripted;

use std::sync::Arc;

pub use config::{ConfigError, ProviderConfig, ProviderKind};
pub use envelope::{
    parse_envelope, parse_envelope_bytes, Envelope, EnvelopeError, EnvelopeSchema, Evaluation,
    Finding, GeneratedCase, GeneratedDetail, SelectionEntry,
};
pub use live::LiveProvider;
pub use scripted::{request_hash, Matcher, ScriptEntry, ScriptedProvider};

pub const DEFAULT_MAX_RETRIES: u32 = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChatRequest {
    pub system_prompt: String,
    pub user_prompt: String,
    pub expects: EnvelopeSchema,
    pub max_retries: u32,
}

impl ChatRequest {
    pub fn new(
        system_prompt: impl Into<String>,
        user_prompt: impl Into<String>,
        expects: EnvelopeSchema,
    ) -> Self {
        Self {
            system_prompt: system_prompt.into(),
            user_prompt: user_prompt.into(),
            expects,
            max_retries: DEFAULT_MAX_RETRIES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProviderError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("no scripted response matches request (hash {hash})")]
    ScriptedMiss { hash: String },
}

/// Anything that turns a request into raw model text.
pub trait CompletionProvider: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<String, ProviderError>;
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GatewayError {
    #[error("invalid request: {0}")]
    InvalidRequest(&'static str),
    #[error(transparent)]
    ScriptedMiss(ProviderError),
    #[error("provider unreachable after {attempts} attempts: {message}")]
    Transport { attempts: u32, message: String },
    #[error("unusable model output after {attempts} attempts: {source}")]
    Envelope {
        attempts: u32,
        #[source]
        source: EnvelopeError,
    },
}

#[derive(Clone)]
pub struct Gateway {
    provider: Arc<dyn CompletionProvider>,
    max_retries: u32,
}

impl std::fmt::Debug for Gateway {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Gateway")
            .field("max_retries", &self.max_retries)
            .finish_non_exhaustive()
    }
}

impl Gateway {
    pub fn new(provider: Arc<dyn CompletionProvider>) -> Self {
        Self {
            provider,
            max_retries: DEFAULT_MAX_RETRIES,
        }
    }

    pub fn scripted(provider: ScriptedProvider) -> Self {
        Self::new(Arc::new(provider))
    }

    pub fn with_max_retries(mut self, max_retries: u32) -> Self {
        self.max_retries = max_retries;
        self
    }

    pub fn max_retries(&self) -> u32 {
        self.max_retries
    }

    /// Builds a request carrying this gateway's retry budget.
    pub fn request(
        &self,
        system_prompt: impl Into<String>,
        user_prompt: impl Into<String>,
        expects: EnvelopeSchema,
    ) -> ChatRequest {
        ChatRequest {
            max_retries: self.max_retries,
            ..ChatRequest::new(system_prompt, user_prompt, expects)
        }
    }

    /// Raw provider text, no parsing and no retries.
    pub fn complete(&self, request: &ChatRequest) -> Result<String, GatewayError> {
        validate(request)?;
        self.provider.complete(request).map_err(|e| match e {
            ProviderError::Transport(message) => GatewayError::Transport {
                attempts: 1,
                message,
            },
            miss @ ProviderError::ScriptedMiss { .. } => GatewayError::ScriptedMiss(miss),
        })
    }

    /// Sends `request` and parses the reply, re-asking on transport failures
    /// and unusable output.
    pub fn call(&self, request: &ChatRequest) -> Result<Envelope, GatewayError> {
        validate(request)?;
        let attempts = request.max_retries.saturating_add(1);
        let mut last = None;
        for attempt in 1..=attempts {
            match self.provider.complete(request) {
                Ok(raw) => match parse_envelope(&raw, request.expects) {
                    Ok(envelope) => return Ok(envelope),
                    Err(source) => {
                        tracing::debug!(attempt, %source, "re-asking after unusable output");
                        last = Some(GatewayError::Envelope {
                            attempts: attempt,
                            source,
                        });
                    }
                },
                Err(ProviderError::Transport(message)) => {
                    tracing::debug!(attempt, %message, "re-asking after transport failure");
                    last = Some(GatewayError::Transport {
                        attempts: attempt,
                        message,
                    });
                }
                Err(miss @ ProviderError::ScriptedMiss { .. }) => {
                    return Err(GatewayError::ScriptedMiss(miss))
                }
            }
        }
        Err(last.expect("at least one attempt is always made"))
    }
}

fn validate(request: &ChatRequest) -> Result<(), GatewayError> {
    if request.system_prompt.trim().is_empty() {
        return Err(GatewayError::InvalidRequest("empty system prompt"));
    }
    if request.user_prompt.trim().is_empty() {
        return Err(GatewayError::InvalidRequest("empty user prompt"));
    }
    Ok(())
}

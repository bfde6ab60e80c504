use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Gateway, LiveProvider, ScriptedProvider, DEFAULT_MAX_RETRIES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    Live,
    #[default]
    Scripted,
}

/// Provider section of the service config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderConfig {
    #[serde(default)]
    pub kind: ProviderKind,
    #[serde(default)]
    pub endpoint: Option<String>,
    /// Name of the environment variable holding the API key.
    #[serde(default = "default_credential_env")]
    pub credential_env: String,
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default)]
    pub temperature: f32,
    /// Script file for the scripted provider.
    #[serde(default)]
    pub script: Option<PathBuf>,
}

fn default_credential_env() -> String {
    "BOTENDER_API_KEY".to_string()
}

fn default_max_retries() -> u32 {
    DEFAULT_MAX_RETRIES
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            kind: ProviderKind::Scripted,
            endpoint: None,
            credential_env: default_credential_env(),
            model: None,
            max_retries: DEFAULT_MAX_RETRIES,
            temperature: 0.0,
            script: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("live provider needs an endpoint (config `endpoint` or BOTENDER_LLM_ENDPOINT)")]
    MissingEndpoint,
    #[error("scripted provider needs a script file")]
    MissingScript,
    #[error("cannot load script {path}: {source}")]
    Script {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot build live client: {0}")]
    Client(String),
}

impl ProviderConfig {
    /// Builds a gateway. Environment variables `BOTENDER_LLM_ENDPOINT` and
    /// `BOTENDER_LLM_MODEL` override the file values for the live provider.
    pub fn build(&self) -> Result<Gateway, ConfigError> {
        let gateway = match self.kind {
            ProviderKind::Scripted => {
                let path = self.script.as_ref().ok_or(ConfigError::MissingScript)?;
                let provider = ScriptedProvider::load(path).map_err(|source| ConfigError::Script {
                    path: path.clone(),
                    source,
                })?;
                Gateway::new(Arc::new(provider))
            }
            ProviderKind::Live => {
                let endpoint = std::env::var("BOTENDER_LLM_ENDPOINT")
                    .ok()
                    .or_else(|| self.endpoint.clone())
                    .ok_or(ConfigError::MissingEndpoint)?;
                let model = std::env::var("BOTENDER_LLM_MODEL")
                    .ok()
                    .or_else(|| self.model.clone())
                    .unwrap_or_else(|| "gpt-4.1".to_string());
                let key = std::env::var(&self.credential_env).ok();
                let provider = LiveProvider::new(endpoint, key, model, self.temperature)
                    .map_err(|e| ConfigError::Client(e.to_string()))?;
                Gateway::new(Arc::new(provider))
            }
        };
        Ok(gateway.with_max_retries(self.max_retries))
    }
}

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::identity::{Membership, Role, Session, StaticIdentity};
use crate::gateway::ProviderConfig;
use crate::types::{ChannelName, ServerId, UserId};
use crate::workflow::WorkflowConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    #[serde(default = "default_bind")]
    pub bind: String,
    /// Lowest role allowed to change proposals. Reads are open to members.
    #[serde(default)]
    pub write_role: Role,
    #[serde(default)]
    pub provider: ProviderConfig,
    #[serde(default)]
    pub thresholds: WorkflowConfig,
    #[serde(default)]
    pub store: StoreConfig,
    #[serde(default)]
    pub engine: EngineSection,
    #[serde(default)]
    pub servers: Vec<ServerSeed>,
    #[serde(default)]
    pub identities: Vec<IdentitySeed>,
}

fn default_bind() -> String {
    "127.0.0.1:8080".to_string()
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            bind: default_bind(),
            write_role: Role::Member,
            provider: ProviderConfig::default(),
            thresholds: WorkflowConfig::default(),
            store: StoreConfig::default(),
            engine: EngineSection::default(),
            servers: Vec::new(),
            identities: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StoreConfig {
    #[default]
    Memory,
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineSection {
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
}

fn default_parallelism() -> usize {
    4
}

impl Default for EngineSection {
    fn default() -> Self {
        Self {
            parallelism: default_parallelism(),
        }
    }
}

/// A simulated server created at startup.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServerSeed {
    pub id: ServerId,
    pub channels: Vec<ChannelName>,
    #[serde(default)]
    pub members: Vec<UserId>,
    #[serde(default)]
    pub admins: Vec<UserId>,
    #[serde(default)]
    pub community_description: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentitySeed {
    pub token: String,
    pub user: UserId,
    #[serde(default)]
    pub display_name: Option<String>,
    /// When empty, memberships come from the `servers` table.
    #[serde(default)]
    pub servers: Vec<Membership>,
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

impl ServiceConfig {
    pub fn load(path: &Path) -> Result<Self, ServiceConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ServiceConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ServiceConfigError> {
        let config: Self = toml::from_str(text)?;
        config
            .thresholds
            .validate()
            .map_err(|e| ServiceConfigError::Invalid(e.to_string()))?;
        if config.engine.parallelism == 0 {
            return Err(ServiceConfigError::Invalid("engine.parallelism must be at least 1".into()));
        }
        Ok(config)
    }

    /// Sessions for the configured tokens.
    pub fn identity(&self) -> StaticIdentity {
        let mut identity = StaticIdentity::new();
        for seed in &self.identities {
            let servers = if seed.servers.is_empty() {
                self.servers
                    .iter()
                    .filter_map(|s| {
                        let role = if s.admins.contains(&seed.user) {
                            Role::Admin
                        } else if s.members.contains(&seed.user) {
                            Role::Member
                        } else {
                            return None;
                        };
                        Some(Membership {
                            server: s.id.clone(),
                            role,
                        })
                    })
                    .collect()
            } else {
                seed.servers.clone()
            };
            identity.insert(
                seed.token.clone(),
                Session {
                    user: seed.user.clone(),
                    display_name: seed.display_name.clone().unwrap_or_else(|| seed.user.to_string()),
                    servers,
                },
            );
        }
        identity
    }
}

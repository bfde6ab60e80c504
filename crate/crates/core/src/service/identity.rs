use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::types::{ServerId, UserId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    #[default]
    Member,
    Admin,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Membership {
    pub server: ServerId,
    #[serde(default)]
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub user: UserId,
    pub display_name: String,
    pub servers: Vec<Membership>,
}

impl Session {
    pub fn role_in(&self, server: &ServerId) -> Option<Role> {
        self.servers.iter().find(|m| &m.server == server).map(|m| m.role)
    }
}

/// Resolves a bearer token to a session.
pub trait IdentityProvider: Send + Sync {
    fn authenticate(&self, token: &str) -> Option<Session>;
}

/// Fixed token table, used by tests and the simulator.
#[derive(Debug, Clone, Default)]
pub struct StaticIdentity {
    sessions: HashMap<String, Session>,
}

impl StaticIdentity {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, token: impl Into<String>, session: Session) -> Self {
        self.insert(token, session);
        self
    }

    pub fn insert(&mut self, token: impl Into<String>, session: Session) {
        self.sessions.insert(token.into(), session);
    }
}

impl IdentityProvider for StaticIdentity {
    fn authenticate(&self, token: &str) -> Option<Session> {
        self.sessions.get(token).cloned()
    }
}

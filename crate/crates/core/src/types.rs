//! Identifiers and small value types shared by every module.

use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_string())
            }
        }
    };
}

id_type!(
    /// Identifier of a community server (a Discord guild, or a simulated one).
    ServerId
);
id_type!(TaskId);
id_type!(UserId);
id_type!(ProposalId);
id_type!(CaseId);
id_type!(
    /// Opaque platform handle of a discussion thread.
    ThreadId
);

/// A channel name, always stored with its leading `#`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ChannelName(String);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid channel name {0:?}")]
pub struct InvalidChannel(pub String);

impl ChannelName {
    /// Parses a channel name. A missing leading `#` is added; the identifier
    /// after it must be non-empty and free of whitespace.
    pub fn parse(raw: &str) -> Result<Self, InvalidChannel> {
        let trimmed = raw.trim();
        let ident = trimmed.strip_prefix('#').unwrap_or(trimmed);
        if ident.is_empty() || ident.chars().any(|c| c.is_whitespace() || c == '#') {
            return Err(InvalidChannel(raw.to_string()));
        }
        Ok(Self(format!("#{ident}")))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Name without the leading `#`.
    pub fn ident(&self) -> &str {
        &self.0[1..]
    }
}

impl TryFrom<String> for ChannelName {
    type Error = InvalidChannel;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::parse(&value)
    }
}

impl From<ChannelName> for String {
    fn from(value: ChannelName) -> Self {
        value.0
    }
}

impl fmt::Display for ChannelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// The three kinds of provocation the engine looks for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PipelineKind {
    Ambiguity,
    Narrowness,
    Consequence,
}

impl PipelineKind {
    pub const ALL: [PipelineKind; 3] = [
        PipelineKind::Ambiguity,
        PipelineKind::Narrowness,
        PipelineKind::Consequence,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PipelineKind::Ambiguity => "ambiguity",
            PipelineKind::Narrowness => "narrowness",
            PipelineKind::Consequence => "consequence",
        }
    }

    /// Issue label shown to the selector.
    pub fn issue_label(self) -> &'static str {
        match self {
            PipelineKind::Ambiguity => "underspecified prompt",
            PipelineKind::Narrowness => "overspecified prompt",
            PipelineKind::Consequence => "unintended consequences of the prompt",
        }
    }
}

impl fmt::Display for PipelineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Milliseconds since the Unix epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct Timestamp(pub u64);

/// Something unexpected that was tolerated rather than treated as an error.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Anomaly {
    pub code: String,
    pub detail: String,
}

impl Anomaly {
    pub fn new(code: &str, detail: impl Into<String>) -> Self {
        let anomaly = Self {
            code: code.to_string(),
            detail: detail.into(),
        };
        tracing::warn!(code = %anomaly.code, detail = %anomaly.detail, "anomaly");
        anomaly
    }
}

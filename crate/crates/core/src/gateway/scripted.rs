use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ChatRequest, CompletionProvider, ProviderError};

/// How a script entry recognizes a request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Matcher {
    /// A single substring, or `sha256:<hex>` to match [`request_hash`].
    One(String),
    /// Every substring must be present.
    AllOf(Vec<String>),
}

impl Matcher {
    fn matches(&self, haystack: &str, hash: &str) -> bool {
        match self {
            Matcher::One(s) => match s.strip_prefix("sha256:") {
                Some(hex) => hex.eq_ignore_ascii_case(hash),
                None => haystack.contains(s.as_str()),
            },
            Matcher::AllOf(parts) => parts.iter().all(|p| haystack.contains(p.as_str())),
        }
    }
}

/// One line of a script file: `{"match": ..., "response": ...}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptEntry {
    #[serde(rename = "match")]
    pub matcher: Matcher,
    pub response: String,
}

impl ScriptEntry {
    pub fn new(matcher: impl Into<String>, response: impl Into<String>) -> Self {
        Self {
            matcher: Matcher::One(matcher.into()),
            response: response.into(),
        }
    }

    pub fn all_of<I, S>(parts: I, response: impl Into<String>) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            matcher: Matcher::AllOf(parts.into_iter().map(Into::into).collect()),
            response: response.into(),
        }
    }
}

/// Hex SHA-256 over the system prompt, a NUL byte, and the user prompt.
pub fn request_hash(request: &ChatRequest) -> String {
    let mut hasher = Sha256::new();
    hasher.update(request.system_prompt.as_bytes());
    hasher.update([0u8]);
    hasher.update(request.user_prompt.as_bytes());
    hex::encode(hasher.finalize())
}

/// Deterministic test double: the first entry whose matcher fits the request
/// (system and user prompt, joined by a blank line) supplies the response.
#[derive(Debug)]
pub struct ScriptedProvider {
    entries: Vec<ScriptEntry>,
    strict: bool,
    fallback: String,
    calls: AtomicUsize,
}

impl ScriptedProvider {
    pub fn strict(entries: Vec<ScriptEntry>) -> Self {
        Self {
            entries,
            strict: true,
            fallback: String::new(),
            calls: AtomicUsize::new(0),
        }
    }

    /// Unmatched requests get `fallback` instead of an error.
    pub fn lenient(entries: Vec<ScriptEntry>, fallback: impl Into<String>) -> Self {
        Self {
            strict: false,
            fallback: fallback.into(),
            ..Self::strict(entries)
        }
    }

    pub fn from_json(json: &str) -> Result<Self, serde_json::Error> {
        Ok(Self::strict(serde_json::from_str(json)?))
    }

    pub fn load(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }

    pub fn entries(&self) -> &[ScriptEntry] {
        &self.entries
    }

    /// Number of `complete` calls served so far, matched or not.
    pub fn call_count(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl CompletionProvider for ScriptedProvider {
    fn complete(&self, request: &ChatRequest) -> Result<String, ProviderError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let haystack = format!("{}\n\n{}", request.system_prompt, request.user_prompt);
        let hash = request_hash(request);
        match self.entries.iter().find(|e| e.matcher.matches(&haystack, &hash)) {
            Some(entry) => Ok(entry.response.clone()),
            None if self.strict => Err(ProviderError::ScriptedMiss { hash }),
            None => Ok(self.fallback.clone()),
        }
    }
}

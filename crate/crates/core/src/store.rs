//! JSON document persistence with optimistic concurrency.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::types::Timestamp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Collection {
    Servers,
    Tasks,
    Proposals,
    Cases,
}

impl Collection {
    pub const ALL: [Collection; 4] = [
        Collection::Servers,
        Collection::Tasks,
        Collection::Proposals,
        Collection::Cases,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Collection::Servers => "servers",
            Collection::Tasks => "tasks",
            Collection::Proposals => "proposals",
            Collection::Cases => "cases",
        }
    }
}

/// A stored document and the revision it was read at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub collection: Collection,
    pub id: String,
    pub body: Value,
    pub revision: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StoreError {
    #[error("{collection}/{id} not found", collection = .collection.as_str())]
    NotFound { collection: Collection, id: String },
    #[error("revision conflict on {collection}/{id}", collection = .collection.as_str())]
    Conflict { collection: Collection, id: String },
    #[error("invalid document id {0:?}")]
    InvalidId(String),
    #[error("storage failure: {0}")]
    Io(String),
    #[error("corrupt document {0}")]
    Corrupt(String),
}

/// Document store. `expected` is the revision the writer read, or `None`
/// when the document must not exist yet. Revisions start at 1.
pub trait DocumentStore: Send + Sync {
    fn load(&self, collection: Collection, id: &str) -> Result<Record, StoreError>;

    /// All documents of a collection, ordered by id.
    fn list(&self, collection: Collection) -> Result<Vec<Record>, StoreError>;

    fn persist(&self, collection: Collection, id: &str, body: Value, expected: Option<u64>) -> Result<u64, StoreError>;
}

fn check_id(id: &str) -> Result<(), StoreError> {
    let ok = !id.is_empty()
        && id.len() <= 128
        && !id.starts_with('.')
        && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if ok {
        Ok(())
    } else {
        Err(StoreError::InvalidId(id.to_string()))
    }
}

fn conflict(collection: Collection, id: &str) -> StoreError {
    StoreError::Conflict {
        collection,
        id: id.to_string(),
    }
}

#[derive(Debug, Default)]
pub struct MemoryStore {
    docs: Mutex<BTreeMap<(Collection, String), (Value, u64)>>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }
}

impl DocumentStore for MemoryStore {
    fn load(&self, collection: Collection, id: &str) -> Result<Record, StoreError> {
        let docs = self.docs.lock().expect("store lock");
        docs.get(&(collection, id.to_string()))
            .map(|(body, revision)| Record {
                collection,
                id: id.to_string(),
                body: body.clone(),
                revision: *revision,
            })
            .ok_or_else(|| StoreError::NotFound {
                collection,
                id: id.to_string(),
            })
    }

    fn list(&self, collection: Collection) -> Result<Vec<Record>, StoreError> {
        let docs = self.docs.lock().expect("store lock");
        Ok(docs
            .iter()
            .filter(|((c, _), _)| *c == collection)
            .map(|((c, id), (body, revision))| Record {
                collection: *c,
                id: id.clone(),
                body: body.clone(),
                revision: *revision,
            })
            .collect())
    }

    fn persist(&self, collection: Collection, id: &str, body: Value, expected: Option<u64>) -> Result<u64, StoreError> {
        check_id(id)?;
        let mut docs = self.docs.lock().expect("store lock");
        let key = (collection, id.to_string());
        let current = docs.get(&key).map(|(_, r)| *r);
        if current != expected {
            return Err(conflict(collection, id));
        }
        let revision = current.unwrap_or(0) + 1;
        docs.insert(key, (body, revision));
        Ok(revision)
    }
}

/// One JSON file per document under `<root>/<collection>/<id>.json`.
#[derive(Debug)]
pub struct FileStore {
    root: PathBuf,
    lock: Mutex<()>,
}

#[derive(Serialize, Deserialize)]
struct FileDoc {
    revision: u64,
    body: Value,
}

impl FileStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        for c in Collection::ALL {
            std::fs::create_dir_all(root.join(c.as_str())).map_err(|e| StoreError::Io(e.to_string()))?;
        }
        Ok(Self {
            root,
            lock: Mutex::new(()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn path(&self, collection: Collection, id: &str) -> PathBuf {
        self.root.join(collection.as_str()).join(format!("{id}.json"))
    }

    fn read(&self, path: &Path) -> Result<Option<FileDoc>, StoreError> {
        match std::fs::read_to_string(path) {
            Ok(text) => serde_json::from_str(&text)
                .map(Some)
                .map_err(|e| StoreError::Corrupt(format!("{}: {e}", path.display()))),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(StoreError::Io(e.to_string())),
        }
    }
}

impl DocumentStore for FileStore {
    fn load(&self, collection: Collection, id: &str) -> Result<Record, StoreError> {
        check_id(id)?;
        let _guard = self.lock.lock().expect("store lock");
        let doc = self.read(&self.path(collection, id))?.ok_or_else(|| StoreError::NotFound {
            collection,
            id: id.to_string(),
        })?;
        Ok(Record {
            collection,
            id: id.to_string(),
            body: doc.body,
            revision: doc.revision,
        })
    }

    fn list(&self, collection: Collection) -> Result<Vec<Record>, StoreError> {
        let _guard = self.lock.lock().expect("store lock");
        let dir = self.root.join(collection.as_str());
        let mut ids = Vec::new();
        for entry in std::fs::read_dir(&dir).map_err(|e| StoreError::Io(e.to_string()))? {
            let path = entry.map_err(|e| StoreError::Io(e.to_string()))?.path();
            if path.extension().is_some_and(|e| e == "json") {
                if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                    ids.push(stem.to_string());
                }
            }
        }
        ids.sort();
        let mut out = Vec::with_capacity(ids.len());
        for id in ids {
            if let Some(doc) = self.read(&self.path(collection, &id))? {
                out.push(Record {
                    collection,
                    id,
                    body: doc.body,
                    revision: doc.revision,
                });
            }
        }
        Ok(out)
    }

    fn persist(&self, collection: Collection, id: &str, body: Value, expected: Option<u64>) -> Result<u64, StoreError> {
        check_id(id)?;
        let _guard = self.lock.lock().expect("store lock");
        let path = self.path(collection, id);
        let current = self.read(&path)?.map(|d| d.revision);
        if current != expected {
            return Err(conflict(collection, id));
        }
        let revision = current.unwrap_or(0) + 1;
        let text = serde_json::to_string_pretty(&FileDoc { revision, body }).map_err(|e| StoreError::Io(e.to_string()))?;
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, text).map_err(|e| StoreError::Io(e.to_string()))?;
        std::fs::rename(&tmp, &path).map_err(|e| StoreError::Io(e.to_string()))?;
        Ok(revision)
    }
}

/// Typed load: the document and its revision.
pub fn load_doc<T: DeserializeOwned>(store: &dyn DocumentStore, collection: Collection, id: &str) -> Result<(T, u64), StoreError> {
    let record = store.load(collection, id)?;
    let doc = serde_json::from_value(record.body)
        .map_err(|e| StoreError::Corrupt(format!("{}/{id}: {e}", collection.as_str())))?;
    Ok((doc, record.revision))
}

pub fn save_doc<T: Serialize>(
    store: &dyn DocumentStore,
    collection: Collection,
    id: &str,
    doc: &T,
    expected: Option<u64>,
) -> Result<u64, StoreError> {
    let body = serde_json::to_value(doc).map_err(|e| StoreError::Corrupt(e.to_string()))?;
    store.persist(collection, id, body, expected)
}

/// Next free id of the form `<prefix>-<n>` (four digits, zero padded),
/// derived from the store so that replicas agree.
pub fn next_id(store: &dyn DocumentStore, collection: Collection, prefix: &str) -> Result<String, StoreError> {
    let taken = store
        .list(collection)?
        .into_iter()
        .filter_map(|r| r.id.strip_prefix(&format!("{prefix}-")).and_then(|n| n.parse::<u64>().ok()))
        .max()
        .unwrap_or(0);
    Ok(format!("{prefix}-{:04}", taken + 1))
}

pub trait Clock: Send + Sync {
    fn now(&self) -> Timestamp;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> Timestamp {
        let ms = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0);
        Timestamp(ms)
    }
}

/// Deterministic clock: each reading advances by `step` milliseconds.
#[derive(Debug)]
pub struct StepClock {
    next: AtomicU64,
    step: u64,
}

impl StepClock {
    pub fn new(start: u64, step: u64) -> Self {
        Self {
            next: AtomicU64::new(start),
            step,
        }
    }
}

impl Clock for StepClock {
    fn now(&self) -> Timestamp {
        Timestamp(self.next.fetch_add(self.step, Ordering::SeqCst))
    }
}

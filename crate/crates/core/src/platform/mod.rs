//! Chat platform boundary: inbound events, outbound actions, install-time
//! setup and proposal notifications. [`SimulatedPlatform`] is an in-memory
//! server used by tests and the `simulate` command.

mod sim;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::agent::{handle_message, BotReply, Task, TaskSet, UserMessage};
use crate::gateway::Gateway;
use crate::store::{load_doc, save_doc, Collection, DocumentStore, StoreError};
use crate::types::{Anomaly, ChannelName, ServerId, ThreadId, Timestamp, UserId};
use crate::workflow::{Notice, Proposal};

pub use sim::{SimulatedPlatform, TranscriptEntry};

pub const BOTENDER_CHANNEL: &str = "#botender";

/// The task every server starts with.
pub fn hello_task() -> Task {
    Task::new(
        "hello-botender",
        "Hello Botender",
        "When someone greets Botender in the #botender channel.",
        "Reply with a hello and a smiling emoji.",
    )
    .expect("seed task is valid")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlatformEvent {
    pub server: ServerId,
    pub channel: ChannelName,
    pub author: UserId,
    pub content: String,
    pub at: Timestamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MessageId(pub u64);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    Channel { channel: ChannelName },
    Thread { thread: ThreadId },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum PlatformAction {
    PostMessage {
        target: Target,
        text: String,
        /// Short name of the task that produced a bot reply.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        task_label: Option<String>,
    },
    CreateThread {
        anchor: MessageId,
        name: String,
    },
    CreateChannel {
        name: ChannelName,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum ActionResult {
    Posted { message: MessageId },
    ThreadCreated { thread: ThreadId },
    ChannelCreated,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlatformError {
    #[error("unknown server {0}")]
    UnknownServer(ServerId),
    #[error("server {0} is already installed")]
    AlreadyInstalled(ServerId),
    #[error("server {0} is not installed")]
    NotInstalled(ServerId),
    #[error("unknown post target: {0}")]
    UnknownTarget(String),
    #[error("channel {0} already exists")]
    ChannelExists(ChannelName),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// What a vendor binding must provide.
pub trait ChatPlatform: Send + Sync {
    fn channels(&self, server: &ServerId) -> Result<Vec<ChannelName>, PlatformError>;

    fn execute(&self, server: &ServerId, action: PlatformAction) -> Result<ActionResult, PlatformError>;
}

/// Per-server install record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServerDoc {
    pub id: ServerId,
    pub installed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub community_description: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstallResult {
    pub created_channel: bool,
    pub task_set: TaskSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IngestOutcome {
    pub reply: Option<BotReply>,
    pub task_set_version: Option<u64>,
    pub anomalies: Vec<Anomaly>,
}

/// Connects a chat platform to the bot and the store.
pub struct Adapter {
    platform: Arc<dyn ChatPlatform>,
    store: Arc<dyn DocumentStore>,
    gateway: Gateway,
    ingest_locks: Mutex<HashMap<ServerId, Arc<Mutex<()>>>>,
    task_locks: Mutex<HashMap<ServerId, Arc<Mutex<()>>>>,
}

impl std::fmt::Debug for Adapter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Adapter").finish_non_exhaustive()
    }
}

fn lock_for(map: &Mutex<HashMap<ServerId, Arc<Mutex<()>>>>, server: &ServerId) -> Arc<Mutex<()>> {
    map.lock().expect("lock map").entry(server.clone()).or_default().clone()
}

impl Adapter {
    pub fn new(platform: Arc<dyn ChatPlatform>, store: Arc<dyn DocumentStore>, gateway: Gateway) -> Self {
        Self {
            platform,
            store,
            gateway,
            ingest_locks: Mutex::default(),
            task_locks: Mutex::default(),
        }
    }

    pub fn store(&self) -> &Arc<dyn DocumentStore> {
        &self.store
    }

    pub fn gateway(&self) -> &Gateway {
        &self.gateway
    }

    /// Server-wide lock held while the live task set is replaced.
    pub fn task_lock(&self, server: &ServerId) -> Arc<Mutex<()>> {
        lock_for(&self.task_locks, server)
    }

    pub fn is_installed(&self, server: &ServerId) -> Result<bool, PlatformError> {
        match load_doc::<ServerDoc>(self.store.as_ref(), Collection::Servers, server.as_str()) {
            Ok((doc, _)) => Ok(doc.installed),
            Err(StoreError::NotFound { .. }) => Ok(false),
            Err(e) => Err(e.into()),
        }
    }

    /// Creates `#botender` if missing and seeds the default task.
    pub fn install(&self, server: &ServerId) -> Result<InstallResult, PlatformError> {
        if self.is_installed(server)? {
            return Err(PlatformError::AlreadyInstalled(server.clone()));
        }
        let botender = ChannelName::parse(BOTENDER_CHANNEL).expect("valid channel");
        let created_channel = !self.platform.channels(server)?.contains(&botender);
        if created_channel {
            self.platform
                .execute(server, PlatformAction::CreateChannel { name: botender })?;
        }
        let task_set = TaskSet::new(server.clone(), vec![hello_task()], 1).expect("seed set is valid");
        let existing = self.store.load(Collection::Tasks, server.as_str()).ok().map(|r| r.revision);
        save_doc(self.store.as_ref(), Collection::Tasks, server.as_str(), &task_set, existing)?;
        let doc = ServerDoc {
            id: server.clone(),
            installed: true,
            community_description: None,
        };
        let existing = self.store.load(Collection::Servers, server.as_str()).ok().map(|r| r.revision);
        save_doc(self.store.as_ref(), Collection::Servers, server.as_str(), &doc, existing)?;
        tracing::info!(%server, created_channel, "installed");
        Ok(InstallResult {
            created_channel,
            task_set,
        })
    }

    pub fn list_channels(&self, server: &ServerId) -> Result<Vec<ChannelName>, PlatformError> {
        if !self.is_installed(server)? {
            return Err(PlatformError::NotInstalled(server.clone()));
        }
        self.platform.channels(server)
    }

    /// The deployed task set and its store revision.
    pub fn live_tasks(&self, server: &ServerId) -> Result<(TaskSet, u64), PlatformError> {
        Ok(load_doc(self.store.as_ref(), Collection::Tasks, server.as_str())?)
    }

    /// Answers one message against the task set deployed when it arrives.
    /// Events for servers that are not installed are dropped.
    pub fn ingest(&self, event: &PlatformEvent) -> Result<IngestOutcome, PlatformError> {
        let lock = lock_for(&self.ingest_locks, &event.server);
        let _guard = lock.lock().expect("ingest lock");
        let mut outcome = IngestOutcome::default();
        if !self.is_installed(&event.server)? {
            outcome
                .anomalies
                .push(Anomaly::new("uninstalled_server", format!("dropped event for {}", event.server)));
            return Ok(outcome);
        }
        if event.content.trim().is_empty() {
            outcome
                .anomalies
                .push(Anomaly::new("empty_message", format!("dropped empty message from {}", event.author)));
            return Ok(outcome);
        }
        if !self.platform.channels(&event.server)?.contains(&event.channel) {
            outcome
                .anomalies
                .push(Anomaly::new("unknown_channel", format!("dropped event in {}", event.channel)));
            return Ok(outcome);
        }
        let (snapshot, _) = self.live_tasks(&event.server)?;
        outcome.task_set_version = Some(snapshot.version);
        let message = UserMessage::new(event.channel.clone(), event.content.clone());
        match handle_message(&snapshot, &message, &self.gateway) {
            Ok(result) => {
                outcome.anomalies.extend(result.anomalies);
                if let Some(reply) = result.reply {
                    self.platform.execute(
                        &event.server,
                        PlatformAction::PostMessage {
                            target: Target::Channel {
                                channel: event.channel.clone(),
                            },
                            text: reply.text.clone(),
                            task_label: Some(reply.task_name.clone()),
                        },
                    )?;
                    outcome.reply = Some(reply);
                }
            }
            Err(e) => outcome.anomalies.push(Anomaly::new("agent_unavailable", e.to_string())),
        }
        Ok(outcome)
    }

    fn post(&self, server: &ServerId, target: Target, text: String) -> Result<ActionResult, PlatformError> {
        self.platform.execute(
            server,
            PlatformAction::PostMessage {
                target,
                text,
                task_label: None,
            },
        )
    }

    fn botender_target() -> Target {
        Target::Channel {
            channel: ChannelName::parse(BOTENDER_CHANNEL).expect("valid channel"),
        }
    }

    fn thread_target(&self, proposal: &Proposal, anomalies: &mut Vec<Anomaly>) -> Target {
        match &proposal.thread_ref {
            Some(thread) => Target::Thread { thread: thread.clone() },
            None => {
                anomalies.push(Anomaly::new(
                    "missing_thread",
                    format!("proposal {} has no thread; posting to {BOTENDER_CHANNEL}", proposal.id),
                ));
                Self::botender_target()
            }
        }
    }

    /// Posts the messages for a proposal transition. A created notice also
    /// opens the discussion thread and records it on the proposal.
    pub fn notify(&self, proposal: &mut Proposal, notice: &Notice) -> Result<Vec<Anomaly>, PlatformError> {
        let server = proposal.server.clone();
        let mut anomalies = Vec::new();
        match notice {
            Notice::Created => {
                let mut text = format!("New proposal \"{}\" by {}.", proposal.title, proposal.author);
                if !proposal.description.trim().is_empty() {
                    text.push_str(&format!("\n{}", proposal.description.trim()));
                }
                let posted = self.post(&server, Self::botender_target(), text)?;
                let ActionResult::Posted { message } = posted else {
                    unreachable!("post returns a message id")
                };
                let thread = self.platform.execute(
                    &server,
                    PlatformAction::CreateThread {
                        anchor: message,
                        name: proposal.title.clone(),
                    },
                )?;
                if let ActionResult::ThreadCreated { thread } = thread {
                    proposal.thread_ref = Some(thread);
                }
            }
            Notice::EditSaved { version } => {
                let author = proposal
                    .edit_versions
                    .get(*version)
                    .map(|v| v.author.to_string())
                    .unwrap_or_default();
                let target = self.thread_target(proposal, &mut anomalies);
                self.post(&server, target, format!("Edit v{version} saved by {author}."))?;
            }
            Notice::Deployed => {
                let target = self.thread_target(proposal, &mut anomalies);
                self.post(&server, target, "This proposal has been deployed.".into())?;
                self.post(
                    &server,
                    Self::botender_target(),
                    format!("Proposal \"{}\" has been deployed.", proposal.title),
                )?;
            }
            Notice::Closed => {
                let target = self.thread_target(proposal, &mut anomalies);
                self.post(&server, target, "This proposal has been closed.".into())?;
            }
            Notice::Reopened => {
                let target = self.thread_target(proposal, &mut anomalies);
                self.post(&server, target, "This proposal has been reopened.".into())?;
            }
        }
        Ok(anomalies)
    }
}

#[cfg(test)]
mod tests;

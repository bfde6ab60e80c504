//! Deterministic in-memory chat server.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use super::{ActionResult, ChatPlatform, MessageId, PlatformAction, PlatformError, PlatformEvent, Target};
use crate::types::{ChannelName, ServerId, ThreadId, UserId};

/// One line of the transcript. The transcript alone is enough to rebuild
/// the simulator's state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TranscriptEntry {
    Setup {
        server: ServerId,
        channels: Vec<ChannelName>,
        members: Vec<UserId>,
        admins: Vec<UserId>,
    },
    Event {
        event: PlatformEvent,
    },
    Action {
        server: ServerId,
        action: PlatformAction,
        result: ActionResult,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PostedMessage {
    pub id: MessageId,
    pub target: Target,
    pub text: String,
    pub task_label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimThread {
    pub anchor: MessageId,
    pub name: String,
    /// Members allowed to see the thread.
    pub allowlist: Vec<UserId>,
    pub messages: Vec<MessageId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct SimServer {
    pub channels: Vec<ChannelName>,
    pub members: Vec<UserId>,
    pub admins: Vec<UserId>,
    pub threads: BTreeMap<ThreadId, SimThread>,
    pub messages: BTreeMap<MessageId, PostedMessage>,
}

#[derive(Debug, Default, PartialEq, Eq, Serialize)]
struct SimState {
    servers: BTreeMap<ServerId, SimServer>,
    transcript: Vec<TranscriptEntry>,
    next_message: u64,
    next_thread: u64,
}

impl SimState {
    fn apply(&mut self, server: &ServerId, action: &PlatformAction) -> Result<ActionResult, PlatformError> {
        let next_message = self.next_message + 1;
        let next_thread = self.next_thread + 1;
        let srv = self
            .servers
            .get_mut(server)
            .ok_or_else(|| PlatformError::UnknownServer(server.clone()))?;
        let result = match action {
            PlatformAction::PostMessage { target, text, task_label } => {
                match target {
                    Target::Channel { channel } if !srv.channels.contains(channel) => {
                        return Err(PlatformError::UnknownTarget(channel.to_string()))
                    }
                    Target::Thread { thread } => {
                        let t = srv
                            .threads
                            .get_mut(thread)
                            .ok_or_else(|| PlatformError::UnknownTarget(thread.to_string()))?;
                        t.messages.push(MessageId(next_message));
                    }
                    Target::Channel { .. } => {}
                }
                let id = MessageId(next_message);
                srv.messages.insert(
                    id,
                    PostedMessage {
                        id,
                        target: target.clone(),
                        text: text.clone(),
                        task_label: task_label.clone(),
                    },
                );
                self.next_message = next_message;
                ActionResult::Posted { message: id }
            }
            PlatformAction::CreateThread { anchor, name } => {
                if !srv.messages.contains_key(anchor) {
                    return Err(PlatformError::UnknownTarget(format!("message {}", anchor.0)));
                }
                let id = ThreadId(format!("thread-{next_thread}"));
                srv.threads.insert(
                    id.clone(),
                    SimThread {
                        anchor: *anchor,
                        name: name.clone(),
                        allowlist: srv.admins.clone(),
                        messages: Vec::new(),
                    },
                );
                self.next_thread = next_thread;
                ActionResult::ThreadCreated { thread: id }
            }
            PlatformAction::CreateChannel { name } => {
                if srv.channels.contains(name) {
                    return Err(PlatformError::ChannelExists(name.clone()));
                }
                srv.channels.push(name.clone());
                ActionResult::ChannelCreated
            }
        };
        Ok(result)
    }
}

#[derive(Debug, Default)]
pub struct SimulatedPlatform {
    state: RwLock<SimState>,
}

impl SimulatedPlatform {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_server(&self, server: ServerId, channels: Vec<ChannelName>, members: Vec<UserId>, admins: Vec<UserId>) {
        let mut state = self.state.write().expect("sim lock");
        let entry = TranscriptEntry::Setup {
            server,
            channels,
            members,
            admins,
        };
        Self::replay_entry(&mut state, &entry).expect("setup always applies");
        state.transcript.push(entry);
    }

    /// Records an inbound user message. The caller hands it to the adapter.
    pub fn receive(&self, event: &PlatformEvent) -> Result<(), PlatformError> {
        let mut state = self.state.write().expect("sim lock");
        let srv = state
            .servers
            .get(&event.server)
            .ok_or_else(|| PlatformError::UnknownServer(event.server.clone()))?;
        if !srv.channels.contains(&event.channel) {
            return Err(PlatformError::UnknownTarget(event.channel.to_string()));
        }
        state.transcript.push(TranscriptEntry::Event { event: event.clone() });
        Ok(())
    }

    pub fn transcript(&self) -> Vec<TranscriptEntry> {
        self.state.read().expect("sim lock").transcript.clone()
    }

    pub fn server(&self, server: &ServerId) -> Option<SimServer> {
        self.state.read().expect("sim lock").servers.get(server).cloned()
    }

    pub fn can_view_thread(&self, server: &ServerId, thread: &ThreadId, user: &UserId) -> bool {
        self.server(server)
            .and_then(|s| s.threads.get(thread).map(|t| t.allowlist.contains(user)))
            .unwrap_or(false)
    }

    /// Bot posts in `channel` that carry no task label.
    pub fn notifications_in(&self, server: &ServerId, channel: &ChannelName) -> Vec<PostedMessage> {
        self.server(server)
            .map(|s| {
                s.messages
                    .values()
                    .filter(|m| m.task_label.is_none())
                    .filter(|m| matches!(&m.target, Target::Channel { channel: c } if c == channel))
                    .cloned()
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn thread_messages(&self, server: &ServerId, thread: &ThreadId) -> Vec<PostedMessage> {
        self.server(server)
            .and_then(|s| {
                s.threads
                    .get(thread)
                    .map(|t| t.messages.iter().filter_map(|id| s.messages.get(id).cloned()).collect())
            })
            .unwrap_or_default()
    }

    fn replay_entry(state: &mut SimState, entry: &TranscriptEntry) -> Result<(), PlatformError> {
        match entry {
            TranscriptEntry::Setup {
                server,
                channels,
                members,
                admins,
            } => {
                state.servers.insert(
                    server.clone(),
                    SimServer {
                        channels: channels.clone(),
                        members: members.clone(),
                        admins: admins.clone(),
                        ..SimServer::default()
                    },
                );
            }
            TranscriptEntry::Event { .. } => {}
            TranscriptEntry::Action { server, action, result } => {
                let replayed = state.apply(server, action)?;
                if &replayed != result {
                    return Err(PlatformError::UnknownTarget(format!(
                        "replay diverged: expected {result:?}, got {replayed:?}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Rebuilds a simulator from a transcript.
    pub fn replay(entries: &[TranscriptEntry]) -> Result<Self, PlatformError> {
        let mut state = SimState::default();
        for entry in entries {
            Self::replay_entry(&mut state, entry)?;
            state.transcript.push(entry.clone());
        }
        Ok(Self {
            state: RwLock::new(state),
        })
    }

    /// Whether two simulators hold identical state.
    pub fn same_state(&self, other: &SimulatedPlatform) -> bool {
        *self.state.read().expect("sim lock") == *other.state.read().expect("sim lock")
    }

    pub fn write_jsonl(&self, mut out: impl Write) -> std::io::Result<()> {
        for entry in self.transcript() {
            serde_json::to_writer(&mut out, &entry)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn transcript_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }

    pub fn read_jsonl(input: impl BufRead) -> std::io::Result<Vec<TranscriptEntry>> {
        let mut out = Vec::new();
        for line in input.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            out.push(serde_json::from_str(&line).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?);
        }
        Ok(out)
    }
}

impl ChatPlatform for SimulatedPlatform {
    fn channels(&self, server: &ServerId) -> Result<Vec<ChannelName>, PlatformError> {
        self.state
            .read()
            .expect("sim lock")
            .servers
            .get(server)
            .map(|s| s.channels.clone())
            .ok_or_else(|| PlatformError::UnknownServer(server.clone()))
    }

    fn execute(&self, server: &ServerId, action: PlatformAction) -> Result<ActionResult, PlatformError> {
        let mut state = self.state.write().expect("sim lock");
        let result = state.apply(server, &action)?;
        state.transcript.push(TranscriptEntry::Action {
            server: server.clone(),
            action,
            result: result.clone(),
        });
        Ok(result)
    }
}

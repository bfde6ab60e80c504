//! Bot runtime: the orchestrator picks at most one task for a message, and
//! that task's agent writes a single-turn reply.

use serde::{Deserialize, Serialize};

use crate::gateway::{Envelope, EnvelopeSchema, Gateway, GatewayError};
use crate::prompts;
use crate::types::{Anomaly, ChannelName, ServerId, TaskId};

/// A named (trigger, action) prompt pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Task {
    pub id: TaskId,
    pub name: String,
    pub trigger: String,
    pub action: String,
}

impl Task {
    pub fn new(
        id: impl Into<TaskId>,
        name: impl Into<String>,
        trigger: impl Into<String>,
        action: impl Into<String>,
    ) -> Result<Self, AgentError> {
        let task = Self {
            id: id.into(),
            name: name.into(),
            trigger: trigger.into(),
            action: action.into(),
        };
        task.validate()?;
        Ok(task)
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        for (field, value) in [
            ("id", self.id.as_str()),
            ("name", self.name.as_str()),
            ("trigger", self.trigger.as_str()),
            ("action", self.action.as_str()),
        ] {
            if value.trim().is_empty() {
                return Err(AgentError::InvalidTask(format!("task {field} is empty")));
            }
        }
        Ok(())
    }
}

impl From<String> for TaskId {
    fn from(s: String) -> Self {
        TaskId(s)
    }
}

/// The deployed tasks of one server. Treated as an immutable snapshot: a
/// deployment produces a new value with `version + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSet {
    pub server: ServerId,
    pub tasks: Vec<Task>,
    pub version: u64,
}

impl TaskSet {
    pub fn empty(server: ServerId) -> Self {
        Self {
            server,
            tasks: Vec::new(),
            version: 0,
        }
    }

    pub fn new(server: ServerId, tasks: Vec<Task>, version: u64) -> Result<Self, AgentError> {
        let set = Self {
            server,
            tasks,
            version,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        let mut seen = std::collections::HashSet::new();
        for task in &self.tasks {
            task.validate()?;
            if !seen.insert(&task.id) {
                return Err(AgentError::DuplicateTaskId(task.id.clone()));
            }
        }
        Ok(())
    }

    pub fn get(&self, id: &TaskId) -> Option<&Task> {
        self.tasks.iter().find(|t| &t.id == id)
    }

    pub fn contains(&self, id: &TaskId) -> bool {
        self.get(id).is_some()
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }
}

/// One inbound user message as the agents see it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserMessage {
    pub channel: ChannelName,
    pub content: String,
}

impl UserMessage {
    pub fn new(channel: ChannelName, content: impl Into<String>) -> Self {
        Self {
            channel,
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BotReply {
    pub text: String,
    pub task_id: TaskId,
    /// Label shown alongside the reply.
    pub task_name: String,
}

/// Shared prompt blocks substituted into the provocation prompts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptAssets {
    pub bot_capability: String,
    pub input_specification: String,
    pub community_description: String,
    pub channels: Vec<ChannelName>,
}

impl PromptAssets {
    /// Default texts with the input specification listing `channels`.
    pub fn for_channels(channels: &[ChannelName]) -> Result<Self, AgentError> {
        Self::with_community(channels, prompts::DEFAULT_COMMUNITY_DESCRIPTION)
    }

    pub fn with_community(
        channels: &[ChannelName],
        community_description: &str,
    ) -> Result<Self, AgentError> {
        if channels.is_empty() {
            return Err(AgentError::InvalidAssets("no channels available".into()));
        }
        if community_description.trim().is_empty() {
            return Err(AgentError::InvalidAssets("empty community description".into()));
        }
        let list = channels
            .iter()
            .map(ChannelName::as_str)
            .collect::<Vec<_>>()
            .join(", ");
        Ok(Self {
            bot_capability: prompts::BOT_CAPABILITY.to_string(),
            input_specification: prompts::INPUT_SPECIFICATION.replace("{channels}", &list),
            community_description: community_description.to_string(),
            channels: channels.to_vec(),
        })
    }

    /// Substitutes the shared blocks into a system prompt template.
    pub fn render(&self, template: &str) -> String {
        template
            .replace(prompts::BOT_CAPABILITY_MARKER, &self.bot_capability)
            .replace(prompts::INPUT_SPECIFICATION_MARKER, &self.input_specification)
            .replace(prompts::COMMUNITY_DESCRIPTION_MARKER, &self.community_description)
    }

    pub fn has_channel(&self, channel: &ChannelName) -> bool {
        self.channels.contains(channel)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AgentError {
    #[error("routing unavailable: {0}")]
    RoutingUnavailable(GatewayError),
    #[error("execution unavailable: {0}")]
    ExecutionUnavailable(GatewayError),
    #[error("invalid task: {0}")]
    InvalidTask(String),
    #[error("duplicate task id {0}")]
    DuplicateTaskId(TaskId),
    #[error("invalid prompt assets: {0}")]
    InvalidAssets(String),
}

fn user_message_line(message: &UserMessage) -> String {
    format!(
        "User message in the #{} channel: {}",
        message.channel.ident(),
        message.content
    )
}

pub fn render_orchestrator_prompt(task_set: &TaskSet, message: &UserMessage) -> String {
    let mut out = String::from("Here is a list of tasks:\n\n");
    for task in &task_set.tasks {
        out.push_str(&format!("Task ID: {}\nTask Trigger: {}\n", task.id, task.trigger));
    }
    out.push('\n');
    out.push_str(&user_message_line(message));
    out
}

pub fn render_task_prompt(task: &Task, message: &UserMessage) -> String {
    let action = task.action.trim_end();
    let stop = if action.ends_with(['.', '!', '?']) { "" } else { "." };
    format!("Action: {action}{stop}\n{}", user_message_line(message))
}

/// Result of asking the orchestrator about one message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Routing {
    pub task_id: Option<TaskId>,
    pub anomaly: Option<Anomaly>,
}

/// Asks the orchestrator which task, if any, the message triggers. An id the
/// task set does not contain is treated as no trigger and reported as an
/// anomaly.
pub fn route_event(
    task_set: &TaskSet,
    message: &UserMessage,
    gateway: &Gateway,
) -> Result<Routing, AgentError> {
    if task_set.is_empty() {
        return Ok(Routing {
            task_id: None,
            anomaly: None,
        });
    }
    let request = gateway.request(
        prompts::ORCHESTRATOR_SYSTEM,
        render_orchestrator_prompt(task_set, message),
        EnvelopeSchema::TaskId,
    );
    let id = match gateway.call(&request).map_err(AgentError::RoutingUnavailable)? {
        Envelope::TaskId(id) => id,
        other => unreachable!("task_id schema produced {other:?}"),
    };
    if id == "0" {
        return Ok(Routing {
            task_id: None,
            anomaly: None,
        });
    }
    let id = TaskId(id);
    if task_set.contains(&id) {
        Ok(Routing {
            task_id: Some(id),
            anomaly: None,
        })
    } else {
        Ok(Routing {
            task_id: None,
            anomaly: Some(Anomaly::new(
                "unknown_task_id",
                format!("orchestrator returned task id {id:?} not in task set v{}", task_set.version),
            )),
        })
    }
}

/// True when the task agent's response means "do not reply".
pub fn is_no_reply(response: &str) -> bool {
    let trimmed = response.trim();
    trimmed.is_empty() || trimmed.eq_ignore_ascii_case("n/a")
}

pub fn execute_task(
    task: &Task,
    message: &UserMessage,
    gateway: &Gateway,
) -> Result<Option<String>, AgentError> {
    let request = gateway.request(
        prompts::TASK_AGENT_SYSTEM,
        render_task_prompt(task, message),
        EnvelopeSchema::TaskResponse,
    );
    match gateway.call(&request).map_err(AgentError::ExecutionUnavailable)? {
        Envelope::TaskResponse(text) if is_no_reply(&text) => Ok(None),
        Envelope::TaskResponse(text) => Ok(Some(text)),
        other => unreachable!("task_response schema produced {other:?}"),
    }
}

/// What happened to one message.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MessageOutcome {
    pub triggered: Option<Task>,
    pub reply: Option<BotReply>,
    pub anomalies: Vec<Anomaly>,
}

impl MessageOutcome {
    pub fn triggered_name(&self) -> Option<&str> {
        self.triggered.as_ref().map(|t| t.name.as_str())
    }

    pub fn reply_text(&self) -> Option<&str> {
        self.reply.as_ref().map(|r| r.text.as_str())
    }
}

/// Routes the message and, if a task triggers, runs that task's agent.
pub fn handle_message(
    task_set: &TaskSet,
    message: &UserMessage,
    gateway: &Gateway,
) -> Result<MessageOutcome, AgentError> {
    let routing = route_event(task_set, message, gateway)?;
    let mut outcome = MessageOutcome {
        anomalies: routing.anomaly.into_iter().collect(),
        ..MessageOutcome::default()
    };
    let Some(task) = routing.task_id.and_then(|id| task_set.get(&id)) else {
        return Ok(outcome);
    };
    outcome.triggered = Some(task.clone());
    outcome.reply = execute_task(task, message, gateway)?.map(|text| BotReply {
        text,
        task_id: task.id.clone(),
        task_name: task.name.clone(),
    });
    Ok(outcome)
}

use std::sync::{Arc, Mutex};
use std::time::Instant;

use botender_core::agent::{execute_task, handle_message, route_event};
use botender_core::gateway::envelope::{parse_envelope, Envelope, EnvelopeSchema};
use botender_core::gateway::{ChatRequest, CompletionProvider, ProviderError};
use botender_core::platform::hello_task;
use botender_core::{prompts, ChannelName, Gateway, ScriptEntry, ScriptedProvider, ServerId, Task, TaskSet, UserMessage};

use crate::{Outcome, AGENT_BUDGET};

/// Scripted provider that also keeps every request it saw.
pub struct Recording {
    inner: ScriptedProvider,
    pub seen: Mutex<Vec<ChatRequest>>,
}

impl Recording {
    pub fn new(inner: ScriptedProvider) -> Arc<Self> {
        Arc::new(Self {
            inner,
            seen: Mutex::new(Vec::new()),
        })
    }

    pub fn requests(&self) -> Vec<ChatRequest> {
        self.seen.lock().unwrap().clone()
    }
}

impl CompletionProvider for Recording {
    fn complete(&self, request: &ChatRequest) -> Result<String, ProviderError> {
        self.seen.lock().unwrap().push(request.clone());
        self.inner.complete(request)
    }
}

fn tasks() -> TaskSet {
    let merch = Task::new(
        "merch-link",
        "Merch Link",
        "When someone asks where to buy merch.",
        "Share the link to the official merch store",
    )
    .unwrap();
    TaskSet::new(ServerId::from("srv"), vec![hello_task(), merch], 1).unwrap()
}

fn msg(channel: &str, text: &str) -> UserMessage {
    UserMessage::new(ChannelName::parse(channel).unwrap(), text)
}

fn gateway(entries: Vec<ScriptEntry>) -> (Gateway, Arc<Recording>) {
    let rec = Recording::new(ScriptedProvider::strict(entries));
    (Gateway::new(rec.clone()), rec)
}

fn ensure(cond: bool, what: &str) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.to_string())
    }
}

pub fn check() -> Outcome {
    let start = Instant::now();
    let set = tasks();
    let hello = set.tasks[0].clone();
    let mut checks = 0;

    // Routing request, byte for byte.
    let (gw, rec) = gateway(vec![ScriptEntry::new("Here is a list of tasks", format!(r#"{{"taskId": "{}"}}"#, hello.id))]);
    let routing = route_event(&set, &msg("#botender", "hi botender!"), &gw).map_err(|e| e.to_string())?;
    ensure(routing.task_id.as_ref() == Some(&hello.id) && routing.anomaly.is_none(), "known id routes")?;
    let req = &rec.requests()[0];
    ensure(req.system_prompt == prompts::ORCHESTRATOR_SYSTEM, "orchestrator system prompt")?;
    let expected_user = format!(
        "Here is a list of tasks:\n\nTask ID: {}\nTask Trigger: {}\nTask ID: merch-link\nTask Trigger: When someone asks where to buy merch.\n\nUser message in the #botender channel: hi botender!",
        hello.id, hello.trigger
    );
    ensure(req.user_prompt == expected_user, "orchestrator user prompt")?;
    ensure(req.expects == EnvelopeSchema::TaskId, "orchestrator schema")?;
    checks += 4;

    // Task agent request; the action gains a closing period.
    let (gw, rec) = gateway(vec![ScriptEntry::new("Action:", r#"{"response": "Here is your reply."}"#)]);
    let merch = &set.tasks[1];
    let reply = execute_task(merch, &msg("#general", "where is the merch?"), &gw).map_err(|e| e.to_string())?;
    ensure(reply.as_deref() == Some("Here is your reply."), "task reply text")?;
    let req = &rec.requests()[0];
    ensure(req.system_prompt == prompts::TASK_AGENT_SYSTEM, "task agent system prompt")?;
    ensure(
        req.user_prompt
            == "Action: Share the link to the official merch store.\nUser message in the #general channel: where is the merch?",
        "task agent user prompt",
    )?;
    ensure(req.expects == EnvelopeSchema::TaskResponse, "task agent schema")?;
    checks += 4;

    // "n/a" means no reply even though a task triggered.
    let (gw, _) = gateway(vec![
        ScriptEntry::new("Here is a list of tasks", r#"{"taskId": "merch-link"}"#),
        ScriptEntry::new("Action:", r#"{"response": "n/a"}"#),
    ]);
    let out = handle_message(&set, &msg("#general", "merch?"), &gw).map_err(|e| e.to_string())?;
    ensure(out.reply.is_none() && out.triggered_name() == Some("Merch Link"), "n/a yields no reply")?;
    checks += 1;

    // Unknown id: no reply, one anomaly, task agent never asked.
    let (gw, rec) = gateway(vec![ScriptEntry::new("Here is a list of tasks", r#"{"taskId": "ghost-task"}"#)]);
    let out = handle_message(&set, &msg("#general", "boo"), &gw).map_err(|e| e.to_string())?;
    ensure(
        out.reply.is_none() && out.triggered.is_none() && out.anomalies.len() == 1,
        "unknown id yields none plus anomaly",
    )?;
    ensure(rec.requests().len() == 1, "unknown id skips the task agent")?;
    checks += 2;

    // "0" routes nowhere.
    let (gw, rec) = gateway(vec![ScriptEntry::new("Here is a list of tasks", r#"{"taskId": "0"}"#)]);
    let out = handle_message(&set, &msg("#general", "nice weather"), &gw).map_err(|e| e.to_string())?;
    ensure(out.reply.is_none() && out.anomalies.is_empty() && rec.requests().len() == 1, "zero routes nowhere")?;
    checks += 1;

    // The example envelopes shown to the models.
    for (raw, schema, want) in [
        (r#"{"taskId": "some-task-id"}"#, EnvelopeSchema::TaskId, Envelope::TaskId("some-task-id".into())),
        (r#"{"taskId": "0"}"#, EnvelopeSchema::TaskId, Envelope::TaskId("0".into())),
        (
            r#"{"response": "Here is your reply."}"#,
            EnvelopeSchema::TaskResponse,
            Envelope::TaskResponse("Here is your reply.".into()),
        ),
        (r#"{"response": "n/a"}"#, EnvelopeSchema::TaskResponse, Envelope::TaskResponse("n/a".into())),
    ] {
        ensure(parse_envelope(raw, schema).as_ref() == Ok(&want), raw)?;
        checks += 1;
    }

    let elapsed = start.elapsed();
    ensure(elapsed < AGENT_BUDGET, &format!("took {elapsed:?}"))?;
    Ok(format!("{checks} checks in {elapsed:.2?} (< {AGENT_BUDGET:?})"))
}

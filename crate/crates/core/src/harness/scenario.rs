//! Scripted runs of a whole community on the simulated platform.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::HarnessError;
use crate::agent::{PromptAssets, Task, TaskSet, UserMessage};
use crate::gateway::{Finding, Gateway};
use crate::platform::{hello_task, PlatformEvent, TranscriptEntry, BOTENDER_CHANNEL};
use crate::provocation::PromptUnderTest;
use crate::script::{PlannedCase, PlannedReply, ScriptBuilder};
use crate::service::{ApiRequest, Method, ServerSeed, Service, ServiceConfig, IdentitySeed};
use crate::store::StepClock;
use crate::types::{Anomaly, ChannelName, PipelineKind, ServerId, TaskId, Timestamp, UserId};
use crate::workflow::{apply_changes, draft_hash, TaskChange, WorkflowConfig};

pub const DEMO_SERVER: &str = "fan-club";

/// A server, its people and what they do, in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub server: ServerId,
    pub channels: Vec<ChannelName>,
    pub members: Vec<UserId>,
    #[serde(default)]
    pub admins: Vec<UserId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub community_description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<WorkflowConfig>,
    pub events: Vec<ScenarioEvent>,
}

/// A chat message, or a request made through the API as `author`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioEvent {
    Message {
        channel: ChannelName,
        author: UserId,
        content: String,
        at: Timestamp,
    },
    Api {
        author: UserId,
        method: Method,
        path: String,
        #[serde(default)]
        body: Value,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiLogEntry {
    pub step: usize,
    pub author: UserId,
    pub method: Method,
    pub path: String,
    pub status: u16,
    pub body: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub transcript: Vec<TranscriptEntry>,
    pub api_log: Vec<ApiLogEntry>,
    pub anomalies: Vec<Anomaly>,
}

impl SimulationResult {
    pub fn transcript_jsonl(&self) -> String {
        self.transcript
            .iter()
            .map(|e| serde_json::to_string(e).expect("transcript serializes") + "\n")
            .collect()
    }

    pub fn api_jsonl(&self) -> String {
        self.api_log
            .iter()
            .map(|e| serde_json::to_string(e).expect("log serializes") + "\n")
            .collect()
    }

    /// Writes `transcript.jsonl` and `api.jsonl` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<(), HarnessError> {
        let io = |e: std::io::Error| HarnessError::Io(format!("{}: {e}", dir.display()));
        std::fs::create_dir_all(dir).map_err(io)?;
        std::fs::write(dir.join("transcript.jsonl"), self.transcript_jsonl()).map_err(io)?;
        std::fs::write(dir.join("api.jsonl"), self.api_jsonl()).map_err(io)?;
        Ok(())
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| HarnessError::Scenario(e.to_string()))
    }

    fn validate(&self) -> Result<(), HarnessError> {
        if self.channels.is_empty() {
            return Err(HarnessError::Scenario("no channels".into()));
        }
        for (i, event) in self.events.iter().enumerate() {
            let author = match event {
                ScenarioEvent::Message { author, .. } | ScenarioEvent::Api { author, .. } => author,
            };
            if !self.members.contains(author) && !self.admins.contains(author) {
                return Err(HarnessError::Scenario(format!("event {i}: {author} is not a member")));
            }
        }
        Ok(())
    }

    /// Service config with one token per member; the token is the user id.
    fn service_config(&self, parallelism: usize) -> ServiceConfig {
        let mut members = self.members.clone();
        members.extend(self.admins.iter().filter(|a| !self.members.contains(a)).cloned());
        ServiceConfig {
            thresholds: self.thresholds.unwrap_or_default(),
            engine: crate::service::EngineSection { parallelism },
            servers: vec![ServerSeed {
                id: self.server.clone(),
                channels: self.channels.clone(),
                members: members.clone(),
                admins: self.admins.clone(),
                community_description: self.community_description.clone(),
            }],
            identities: members
                .iter()
                .map(|u| IdentitySeed {
                    token: u.to_string(),
                    user: u.clone(),
                    display_name: None,
                    servers: Vec::new(),
                })
                .collect(),
            ..ServiceConfig::default()
        }
    }

    /// Channels the engine sees once the server is installed.
    pub fn installed_channels(&self) -> Vec<ChannelName> {
        let mut channels = self.channels.clone();
        let botender = ChannelName::parse(BOTENDER_CHANNEL).expect("valid channel");
        if !channels.contains(&botender) {
            channels.push(botender);
        }
        channels
    }
}

/// Installs the server, then plays every event in order. Chat messages go
/// through the adapter; API events through the service.
pub fn run_scenario(scenario: &Scenario, gateway: Gateway, parallelism: usize) -> Result<SimulationResult, HarnessError> {
    scenario.validate()?;
    let config = scenario.service_config(parallelism.max(1));
    let (service, sim) = Service::from_config(&config, gateway, Arc::new(StepClock::new(0, 1000)))
        .map_err(|e| HarnessError::Scenario(e.to_string()))?;
    let mut api_log = Vec::new();
    let mut anomalies = Vec::new();
    for (step, event) in scenario.events.iter().enumerate() {
        match event {
            ScenarioEvent::Message {
                channel,
                author,
                content,
                at,
            } => {
                let event = PlatformEvent {
                    server: scenario.server.clone(),
                    channel: channel.clone(),
                    author: author.clone(),
                    content: content.clone(),
                    at: *at,
                };
                if let Err(e) = sim.receive(&event) {
                    anomalies.push(Anomaly::new("rejected_event", format!("step {step}: {e}")));
                    continue;
                }
                let outcome = service
                    .adapter()
                    .ingest(&event)
                    .map_err(|e| HarnessError::Scenario(format!("step {step}: {e}")))?;
                anomalies.extend(outcome.anomalies);
            }
            ScenarioEvent::Api {
                author,
                method,
                path,
                body,
            } => {
                let request = ApiRequest {
                    method: *method,
                    path: path.clone(),
                    token: Some(author.to_string()),
                    body: body.clone(),
                };
                let response = service.handle(&request);
                tracing::debug!(step, %path, status = response.status, "api call");
                api_log.push(ApiLogEntry {
                    step,
                    author: author.clone(),
                    method: *method,
                    path: path.clone(),
                    status: response.status,
                    body: response.body,
                });
            }
        }
    }
    Ok(SimulationResult {
        transcript: sim.transcript(),
        api_log,
        anomalies,
    })
}

fn merch_task() -> Task {
    Task::new(
        "merch-link",
        "Merch Link",
        "When someone asks where to buy band merchandise.",
        "Reply with the link to the official merch store.",
    )
    .expect("valid task")
}

fn demo_draft() -> Vec<TaskChange> {
    vec![TaskChange::Add { task: merch_task() }]
}

fn api(author: &str, method: Method, path: &str, body: Value) -> ScenarioEvent {
    ScenarioEvent::Api {
        author: UserId::from(author),
        method,
        path: path.to_string(),
        body,
    }
}

fn chat(channel: &str, author: &str, content: &str, at: u64) -> ScenarioEvent {
    ScenarioEvent::Message {
        channel: ChannelName::parse(channel).expect("valid channel"),
        author: UserId::from(author),
        content: content.to_string(),
        at: Timestamp(at),
    }
}

/// Install, greet the bot, propose a new task, test it, vote, save, collect
/// three deploy votes, deploy, then trigger the new task.
pub fn demo_scenario() -> Scenario {
    let draft = serde_json::to_value(demo_draft()).expect("draft serializes");
    let hash = draft_hash(&demo_draft());
    let p = "/proposals/prop-0001";
    let up = json!({"direction": "up"});
    Scenario {
        server: ServerId::from(DEMO_SERVER),
        channels: vec![
            ChannelName::parse("#general").expect("valid"),
            ChannelName::parse("#announcements").expect("valid"),
        ],
        members: ["ana", "ben", "cy"].iter().map(|u| UserId::from(*u)).collect(),
        admins: vec![UserId::from("ana")],
        community_description: None,
        thresholds: None,
        events: vec![
            chat("#botender", "ben", "hello Botender!", 1),
            api(
                "ana",
                Method::Post,
                &format!("/servers/{DEMO_SERVER}/proposals"),
                json!({"title": "Merch Link", "description": "Point fans to the official store.", "draft": draft}),
            ),
            api("ben", Method::Post, &format!("{p}/test"), json!({"draft": draft})),
            api("ana", Method::Post, "/cases/prop-0001-c1/votes", up.clone()),
            api("ben", Method::Post, "/cases/prop-0001-c1/votes", up.clone()),
            api("cy", Method::Post, "/cases/prop-0001-c2/votes", json!({"direction": "down"})),
            api("ana", Method::Post, &format!("{p}/edits"), json!({"draft": draft, "report_hash": hash})),
            api("ana", Method::Post, &format!("{p}/deploy-votes"), up.clone()),
            api("ben", Method::Post, &format!("{p}/deploy-votes"), up.clone()),
            api("cy", Method::Post, &format!("{p}/deploy-votes"), up),
            api("cy", Method::Post, &format!("{p}/deploy"), Value::Null),
            chat("#general", "cy", "where can I buy the tour hoodie?", 2),
        ],
    }
}

/// Script answering every model call [`demo_scenario`] makes.
pub fn demo_script() -> ScriptBuilder {
    let scenario = demo_scenario();
    let assets = PromptAssets::for_channels(&scenario.installed_channels()).expect("channels");
    let live = TaskSet::new(scenario.server.clone(), vec![hello_task()], 1).expect("valid");
    let chan = |c: &str| ChannelName::parse(c).expect("valid");
    let mut b = ScriptBuilder::new(assets, live.clone());
    b.message(
        &UserMessage::new(chan("#botender"), "hello Botender!"),
        Some(&TaskId::from("hello-botender")),
        &PlannedReply::text("Hello there! 😊"),
    );

    let hypothetical = apply_changes(&live, &demo_draft()).expect("draft applies");
    b.with_task_set(hypothetical.clone());
    let task = merch_task();
    let prompt = PromptUnderTest::new(task.trigger.clone(), task.action.clone()).expect("valid");
    b.pipeline(
        PipelineKind::Ambiguity,
        &prompt,
        &[(
            Finding::Ambiguity {
                underspecified_phrase: "band merchandise".into(),
                description: "Fan-made items and resale could count as merchandise.".into(),
            },
            vec![
                PlannedCase::new("#general", "Selling my old tour poster, anyone interested?", PlannedReply::NoTrigger, true)
                    .with_detail("second-hand items count as merchandise"),
                PlannedCase::new("#general", "I made fan art stickers, where should I sell them?", PlannedReply::NoTrigger, true)
                    .with_detail("fan-made goods count as merchandise"),
            ],
        )],
    );
    b.pipeline(
        PipelineKind::Narrowness,
        &prompt,
        &[(
            Finding::Narrowness {
                broader_goal: "help fans find official products".into(),
                overspecified_phrase: "where to buy".into(),
                uncovered_scenarios: "questions about shipping or sizes".into(),
            },
            vec![PlannedCase::new("#general", "Does the store ship to Canada?", PlannedReply::NoTrigger, true)
                .with_detail("shipping questions")],
        )],
    );
    b.pipeline(PipelineKind::Consequence, &prompt, &[]);

    let mut deployed = hypothetical;
    deployed.version = 2;
    b.with_task_set(deployed);
    b.message(
        &UserMessage::new(chan("#general"), "where can I buy the tour hoodie?"),
        Some(&TaskId::from("merch-link")),
        &PlannedReply::text("You can get it at the official merch store: https://store.example.com"),
    );
    b
}

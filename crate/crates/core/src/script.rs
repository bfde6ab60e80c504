//! Builds scripted-provider scripts for whole pipeline runs.
//!
//! Every entry matches the exact request (by hash), so a script built here
//! answers precisely the calls the engine makes for the planned cases and
//! nothing else.

use serde_json::{json, Value};

use crate::agent::{render_orchestrator_prompt, render_task_prompt, PromptAssets, TaskSet, UserMessage};
use crate::gateway::{request_hash, ChatRequest, EnvelopeSchema, Finding, GeneratedCase, GeneratedDetail, ScriptEntry, ScriptedProvider};
use crate::prompts;
use crate::provocation::{render, CaseCandidate, Execution, PromptUnderTest};
use crate::types::{ChannelName, PipelineKind, TaskId};

/// How the bot should answer a planned message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlannedReply {
    /// Orchestrator answers "0".
    NoTrigger,
    /// The task triggers and its agent answers "n/a".
    Silent,
    Text(String),
}

impl PlannedReply {
    pub fn text(s: impl Into<String>) -> Self {
        PlannedReply::Text(s.into())
    }
}

/// One generated case the script should produce.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlannedCase {
    pub channel: String,
    pub user_message: String,
    /// Interpretation (ambiguity) or uncovered scenario (narrowness).
    pub detail: Option<String>,
    pub reasoning: String,
    pub reply: PlannedReply,
    pub label: bool,
}

impl PlannedCase {
    pub fn new(channel: &str, user_message: &str, reply: PlannedReply, label: bool) -> Self {
        Self {
            channel: channel.to_string(),
            user_message: user_message.to_string(),
            detail: None,
            reasoning: format!("probes {user_message}"),
            reply,
            label,
        }
    }

    pub fn with_detail(mut self, detail: &str) -> Self {
        self.detail = Some(detail.to_string());
        self
    }

    fn generated_json(&self, kind: Option<PipelineKind>, finding: Option<&Finding>) -> Value {
        let case = json!({"channel": self.channel, "user_message": self.user_message});
        let detail = self.detail.clone().unwrap_or_else(|| "an alternative reading".to_string());
        match kind {
            Some(PipelineKind::Ambiguity) => json!({
                "underspecified_phrase": finding.map(Finding::phrase).unwrap_or_default(),
                "interpretation": detail,
                "reasoning": self.reasoning,
                "case": case,
            }),
            Some(PipelineKind::Narrowness) => json!({
                "uncovered_scenario": detail,
                "reasoning": self.reasoning,
                "case": case,
            }),
            Some(PipelineKind::Consequence) | None => json!({
                "reasoning": self.reasoning,
                "case": case,
            }),
        }
    }

    fn generated(&self, kind: Option<PipelineKind>, finding: Option<&Finding>) -> GeneratedCase {
        let detail = self.detail.clone().unwrap_or_else(|| "an alternative reading".to_string());
        GeneratedCase {
            detail: match kind {
                Some(PipelineKind::Ambiguity) => GeneratedDetail::Interpretation {
                    underspecified_phrase: finding.map(Finding::phrase).unwrap_or_default().to_string(),
                    interpretation: detail,
                },
                Some(PipelineKind::Narrowness) => GeneratedDetail::UncoveredScenario(detail),
                _ => GeneratedDetail::Plain,
            },
            reasoning: self.reasoning.clone(),
            channel: self.channel.clone(),
            user_message: self.user_message.clone(),
        }
    }
}

/// Finding JSON in the shape the detectors return.
pub fn finding_json(finding: &Finding) -> Value {
    match finding {
        Finding::Ambiguity {
            underspecified_phrase,
            description,
        } => json!({"underspecified_phrase": underspecified_phrase, "description": description}),
        Finding::Narrowness {
            broader_goal,
            overspecified_phrase,
            uncovered_scenarios,
        } => json!({
            "broader_goal": broader_goal,
            "overspecified_phrase": overspecified_phrase,
            "uncovered_scenarios": uncovered_scenarios,
        }),
        Finding::Consequence {
            problematic_phrase,
            consequence,
        } => json!({"problematic_phrase": problematic_phrase, "consequence": consequence}),
    }
}

#[derive(Debug, Clone)]
pub struct ScriptBuilder {
    assets: PromptAssets,
    task_set: TaskSet,
    entries: Vec<ScriptEntry>,
}

impl ScriptBuilder {
    pub fn new(assets: PromptAssets, task_set: TaskSet) -> Self {
        Self {
            assets,
            task_set,
            entries: Vec::new(),
        }
    }

    pub fn entries(&self) -> &[ScriptEntry] {
        &self.entries
    }

    pub fn push(&mut self, entry: ScriptEntry) -> &mut Self {
        self.entries.push(entry);
        self
    }

    /// Adds an entry for the exact (system, user) request.
    pub fn exact(&mut self, system: &str, user: &str, response: impl Into<String>) -> &mut Self {
        let hash = request_hash(&ChatRequest::new(system, user, EnvelopeSchema::TaskId));
        self.push(ScriptEntry::new(format!("sha256:{hash}"), response))
    }

    /// Scripts the orchestrator (and task agent, if triggered) for one
    /// message; returns what execution will record.
    pub fn message(&mut self, message: &UserMessage, task: Option<&TaskId>, reply: &PlannedReply) -> Execution {
        let task = match (reply, task) {
            (PlannedReply::NoTrigger, _) => None,
            (_, Some(id)) => self.task_set.get(id).cloned(),
            (_, None) => self.task_set.tasks.first().cloned(),
        };
        let orchestrator_user = render_orchestrator_prompt(&self.task_set, message);
        let id = task.as_ref().map(|t| t.id.to_string()).unwrap_or_else(|| "0".into());
        if !self.task_set.is_empty() {
            self.exact(prompts::ORCHESTRATOR_SYSTEM, &orchestrator_user, json!({"taskId": id}).to_string());
        }
        let Some(task) = task else {
            return Execution::default();
        };
        let response = match reply {
            PlannedReply::Text(t) => t.clone(),
            _ => "n/a".to_string(),
        };
        self.exact(
            prompts::TASK_AGENT_SYSTEM,
            &render_task_prompt(&task, message),
            json!({"response": response}).to_string(),
        );
        Execution {
            triggered_task: Some(task.name.clone()),
            bot_response: match reply {
                PlannedReply::Text(t) => Some(t.clone()),
                _ => None,
            },
        }
    }

    /// Scripts one pipeline kind: detector, one generator call per finding,
    /// then execution and evaluation of every planned case whose channel is
    /// valid.
    pub fn pipeline(
        &mut self,
        kind: PipelineKind,
        prompt: &PromptUnderTest,
        findings: &[(Finding, Vec<PlannedCase>)],
    ) -> &mut Self {
        let detected: Vec<Value> = findings.iter().map(|(f, _)| finding_json(f)).collect();
        let detector_system = self.assets.render(render::detector_system(kind));
        self.exact(&detector_system, &render::detector_user(prompt), Value::Array(detected).to_string());
        for (finding, cases) in findings {
            let generated: Vec<Value> = cases.iter().map(|c| c.generated_json(Some(kind), Some(finding))).collect();
            let generator_system = self.assets.render(render::generator_system(kind));
            self.exact(
                &generator_system,
                &render::generator_user(prompt, finding),
                Value::Array(generated).to_string(),
            );
            for case in cases {
                self.evaluated(kind, prompt, finding, case);
            }
        }
        self
    }

    fn evaluated(&mut self, kind: PipelineKind, prompt: &PromptUnderTest, finding: &Finding, case: &PlannedCase) {
        let Ok(channel) = ChannelName::parse(&case.channel) else {
            return;
        };
        if !self.assets.has_channel(&channel) {
            return;
        }
        let message = UserMessage::new(channel.clone(), case.user_message.clone());
        let execution = self.message(&message, None, &case.reply);
        let mut candidate = CaseCandidate::from_generated(prompt, Some(finding), case.generated(Some(kind), Some(finding)), channel)
            .expect("planned case matches its kind");
        candidate.execution = Some(execution);
        let user = render::evaluator_user(&candidate).expect("pipeline candidates are evaluated");
        let explanation = if case.label { "demonstrates the issue" } else { "does not demonstrate the issue" };
        let system = self.assets.render(render::evaluator_system(kind));
        self.exact(
            &system,
            &user,
            json!({"label": case.label, "label_explanation": explanation}).to_string(),
        );
    }

    /// Selector answer for `prompt`, picking pool indices in order.
    pub fn selection(&mut self, prompt: &PromptUnderTest, picks: &[usize], n: usize) -> &mut Self {
        let body: Vec<Value> = picks
            .iter()
            .map(|i| json!({"caseId": i.to_string(), "selection_reason": format!("case {i} shows the sharpest divergence")}))
            .collect();
        let system = self.assets.render(&render::selector_system(n));
        let marker = format!("Prompt Under Test:\n• Trigger: {}\n• Action: {}\n", prompt.trigger, prompt.action);
        self.push(ScriptEntry::all_of([system, marker], Value::Array(body).to_string()))
    }

    /// Scripts a baseline generation call and the execution of each case.
    pub fn baseline(&mut self, prompt: &PromptUnderTest, cases: &[PlannedCase]) -> &mut Self {
        let generated: Vec<Value> = cases.iter().map(|c| c.generated_json(None, None)).collect();
        let system = self.assets.render(prompts::BASELINE_SYSTEM);
        self.exact(&system, &render::detector_user(prompt), Value::Array(generated).to_string());
        for case in cases {
            if let Ok(channel) = ChannelName::parse(&case.channel) {
                if self.assets.has_channel(&channel) {
                    self.message(&UserMessage::new(channel, case.user_message.clone()), None, &case.reply);
                }
            }
        }
        self
    }

    /// Replaces the task set used for subsequent orchestrator entries.
    pub fn with_task_set(&mut self, task_set: TaskSet) -> &mut Self {
        self.task_set = task_set;
        self
    }

    pub fn build(&self) -> Vec<ScriptEntry> {
        self.entries.clone()
    }

    pub fn provider(&self) -> ScriptedProvider {
        ScriptedProvider::strict(self.build())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.entries).expect("script serializes")
    }
}

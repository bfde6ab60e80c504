//! JSON document emitted per prompt by the engine.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::types::{Anomaly, PipelineKind};

use super::{CaseCandidate, PromptUnderTest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportMode {
    Botender,
    Baseline,
}

impl ReportMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ReportMode::Botender => "botender",
            ReportMode::Baseline => "baseline",
        }
    }
}

impl std::str::FromStr for ReportMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "botender" => Ok(ReportMode::Botender),
            "baseline" => Ok(ReportMode::Baseline),
            other => Err(format!("unknown mode {other:?} (expected botender or baseline)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportPrompt {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub trigger: String,
    pub action: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportCase {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<PipelineKind>,
    pub channel: String,
    pub user_message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triggered_task: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bot_response: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reasoning: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection_reason: Option<String>,
}

impl ReportCase {
    fn from_candidate(c: &CaseCandidate, mode: ReportMode) -> Self {
        let exec = c.execution.clone().unwrap_or_default();
        let botender = mode == ReportMode::Botender;
        Self {
            kind: if botender { c.kind() } else { None },
            channel: c.channel.as_str().to_string(),
            user_message: c.user_message.clone(),
            triggered_task: exec.triggered_task,
            bot_response: exec.bot_response,
            reasoning: Some(c.reasoning.clone()),
            selection_reason: if botender { c.selection_reason.clone() } else { None },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineReport {
    pub prompt: ReportPrompt,
    pub mode: ReportMode,
    pub cases: Vec<ReportCase>,
    pub anomalies: Vec<Anomaly>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl EngineReport {
    pub fn new(
        id: Option<&str>,
        prompt: &PromptUnderTest,
        mode: ReportMode,
        cases: &[CaseCandidate],
        anomalies: Vec<Anomaly>,
    ) -> Self {
        Self {
            prompt: ReportPrompt {
                id: id.map(str::to_string),
                trigger: prompt.trigger.clone(),
                action: prompt.action.clone(),
            },
            mode,
            cases: cases.iter().map(|c| ReportCase::from_candidate(c, mode)).collect(),
            anomalies,
            error: None,
        }
    }

    pub fn failed(id: Option<&str>, prompt: &PromptUnderTest, mode: ReportMode, error: String) -> Self {
        let mut report = Self::new(id, prompt, mode, &[], Vec::new());
        report.error = Some(error);
        report
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid report at {path}: {message}")]
pub struct ReportSchemaError {
    pub path: String,
    pub message: String,
}

fn bad(path: impl Into<String>, message: impl Into<String>) -> ReportSchemaError {
    ReportSchemaError {
        path: path.into(),
        message: message.into(),
    }
}

fn text_field(obj: &serde_json::Map<String, Value>, key: &str, path: &str, required: bool) -> Result<(), ReportSchemaError> {
    match obj.get(key) {
        Some(Value::String(s)) if !required || !s.is_empty() => Ok(()),
        Some(Value::String(_)) => Err(bad(format!("{path}.{key}"), "must be non-empty")),
        Some(_) => Err(bad(format!("{path}.{key}"), "must be a string")),
        None if required => Err(bad(format!("{path}.{key}"), "missing")),
        None => Ok(()),
    }
}

/// Checks a document against the report format, including that baseline
/// cases carry no kind, evaluation or selection fields.
pub fn validate_report(doc: &Value) -> Result<(), ReportSchemaError> {
    let root = doc.as_object().ok_or_else(|| bad("$", "must be an object"))?;
    for key in root.keys() {
        if !matches!(key.as_str(), "prompt" | "mode" | "cases" | "anomalies" | "error") {
            return Err(bad(format!("$.{key}"), "unknown field"));
        }
    }
    let prompt = root
        .get("prompt")
        .and_then(Value::as_object)
        .ok_or_else(|| bad("$.prompt", "must be an object"))?;
    text_field(prompt, "trigger", "$.prompt", true)?;
    text_field(prompt, "action", "$.prompt", true)?;
    text_field(prompt, "id", "$.prompt", false)?;
    let mode = match root.get("mode").and_then(Value::as_str) {
        Some("botender") => ReportMode::Botender,
        Some("baseline") => ReportMode::Baseline,
        _ => return Err(bad("$.mode", "must be \"botender\" or \"baseline\"")),
    };
    root.get("anomalies")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("$.anomalies", "must be an array"))?;
    if let Some(err) = root.get("error") {
        if !err.is_string() {
            return Err(bad("$.error", "must be a string"));
        }
    }
    let cases = root
        .get("cases")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("$.cases", "must be an array"))?;
    for (i, case) in cases.iter().enumerate() {
        let path = format!("$.cases[{i}]");
        let obj = case.as_object().ok_or_else(|| bad(&path, "must be an object"))?;
        for key in obj.keys() {
            let allowed = match key.as_str() {
                "channel" | "user_message" | "triggered_task" | "bot_response" | "reasoning" => true,
                "kind" | "selection_reason" | "evaluation" => mode == ReportMode::Botender && key != "evaluation",
                _ => false,
            };
            if !allowed {
                return Err(bad(format!("{path}.{key}"), format!("not allowed in {} reports", mode.as_str())));
            }
        }
        text_field(obj, "channel", &path, true)?;
        if !obj["channel"].as_str().is_some_and(|c| c.starts_with('#')) {
            return Err(bad(format!("{path}.channel"), "must start with '#'"));
        }
        text_field(obj, "user_message", &path, true)?;
        for key in ["triggered_task", "bot_response", "reasoning", "selection_reason"] {
            text_field(obj, key, &path, false)?;
        }
        if let Some(kind) = obj.get("kind") {
            if serde_json::from_value::<PipelineKind>(kind.clone()).is_err() {
                return Err(bad(format!("{path}.kind"), "unknown pipeline kind"));
            }
        }
    }
    Ok(())
}

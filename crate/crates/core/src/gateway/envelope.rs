//! Tolerant parsing of the JSON envelopes the models are asked to return.
//!
//! Models are told to emit a bare JSON object, but in practice they wrap it in
//! code fences or prose, key list items by `"0"`, `"1"`, ... or nest the list
//! under a single named field. [`parse_envelope`] accepts all of those shapes
//! and then checks the fields each schema requires. Extra fields are ignored.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::types::PipelineKind;

/// Which envelope a request expects back.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "of")]
pub enum EnvelopeSchema {
    TaskId,
    TaskResponse,
    FindingList(PipelineKind),
    /// `None` is the baseline generator, which produces plain cases.
    CandidateList(Option<PipelineKind>),
    Evaluation,
    Selection,
}

impl EnvelopeSchema {
    /// Field names every item of this envelope must carry.
    pub fn required_fields(self) -> &'static [&'static str] {
        match self {
            EnvelopeSchema::TaskId => &["taskId"],
            EnvelopeSchema::TaskResponse => &["response"],
            EnvelopeSchema::FindingList(PipelineKind::Ambiguity) => {
                &["underspecified_phrase", "description"]
            }
            EnvelopeSchema::FindingList(PipelineKind::Narrowness) => {
                &["broader_goal", "overspecified_phrase", "uncovered_scenarios"]
            }
            EnvelopeSchema::FindingList(PipelineKind::Consequence) => {
                &["problematic_phrase", "consequence"]
            }
            EnvelopeSchema::CandidateList(Some(PipelineKind::Ambiguity)) => {
                &["underspecified_phrase", "interpretation", "reasoning", "case"]
            }
            EnvelopeSchema::CandidateList(Some(PipelineKind::Narrowness)) => {
                &["uncovered_scenario", "reasoning", "case"]
            }
            EnvelopeSchema::CandidateList(Some(PipelineKind::Consequence))
            | EnvelopeSchema::CandidateList(None) => &["reasoning", "case"],
            EnvelopeSchema::Evaluation => &["label", "label_explanation"],
            EnvelopeSchema::Selection => &["caseId", "selection_reason"],
        }
    }
}

/// A detector's report of one problematic phrase.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Finding {
    Ambiguity {
        underspecified_phrase: String,
        description: String,
    },
    Narrowness {
        broader_goal: String,
        overspecified_phrase: String,
        uncovered_scenarios: String,
    },
    Consequence {
        problematic_phrase: String,
        consequence: String,
    },
}

impl Finding {
    pub fn kind(&self) -> PipelineKind {
        match self {
            Finding::Ambiguity { .. } => PipelineKind::Ambiguity,
            Finding::Narrowness { .. } => PipelineKind::Narrowness,
            Finding::Consequence { .. } => PipelineKind::Consequence,
        }
    }

    /// The quoted phrase the finding is about.
    pub fn phrase(&self) -> &str {
        match self {
            Finding::Ambiguity {
                underspecified_phrase,
                ..
            } => underspecified_phrase,
            Finding::Narrowness {
                overspecified_phrase,
                ..
            } => overspecified_phrase,
            Finding::Consequence {
                problematic_phrase, ..
            } => problematic_phrase,
        }
    }
}

/// Kind-specific part of a generated case.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeneratedDetail {
    Interpretation {
        underspecified_phrase: String,
        interpretation: String,
    },
    UncoveredScenario(String),
    Plain,
}

/// A generator's raw output for one case, before channel validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedCase {
    pub detail: GeneratedDetail,
    pub reasoning: String,
    pub channel: String,
    pub user_message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evaluation {
    pub label: bool,
    pub label_explanation: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionEntry {
    pub case_id: String,
    pub selection_reason: String,
}

/// A parsed, schema-checked model response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Envelope {
    TaskId(String),
    TaskResponse(String),
    Findings(Vec<Finding>),
    Candidates(Vec<GeneratedCase>),
    Evaluation(Evaluation),
    Selection(Vec<SelectionEntry>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EnvelopeError {
    #[error("empty model output")]
    Empty,
    #[error("no JSON value found in model output")]
    Malformed,
    #[error("missing required field `{0}`")]
    MissingField(String),
    #[error("field `{field}` must be {expected}")]
    WrongType {
        field: String,
        expected: &'static str,
    },
}

impl EnvelopeError {
    fn wrong(field: &str, expected: &'static str) -> Self {
        EnvelopeError::WrongType {
            field: field.to_string(),
            expected,
        }
    }
}

/// Same as [`parse_envelope`] for input that may not be valid UTF-8.
pub fn parse_envelope_bytes(raw: &[u8], schema: EnvelopeSchema) -> Result<Envelope, EnvelopeError> {
    parse_envelope(&String::from_utf8_lossy(raw), schema)
}

pub fn parse_envelope(raw: &str, schema: EnvelopeSchema) -> Result<Envelope, EnvelopeError> {
    if raw.trim().is_empty() {
        return Err(EnvelopeError::Empty);
    }
    let value = extract_json(raw).ok_or(EnvelopeError::Malformed)?;
    let required = schema.required_fields();
    match schema {
        EnvelopeSchema::TaskId => {
            let obj = single_object(&value, required)?;
            let id = match obj.get("taskId") {
                Some(Value::String(s)) if !s.trim().is_empty() => s.trim().to_string(),
                Some(Value::Number(n)) => n.to_string(),
                Some(_) => return Err(EnvelopeError::wrong("taskId", "a string")),
                None => return Err(EnvelopeError::MissingField("taskId".into())),
            };
            Ok(Envelope::TaskId(id))
        }
        EnvelopeSchema::TaskResponse => {
            let obj = single_object(&value, required)?;
            Ok(Envelope::TaskResponse(text(obj, "response")?))
        }
        EnvelopeSchema::Evaluation => {
            let obj = single_object(&value, required)?;
            let label = match obj.get("label") {
                Some(Value::Bool(b)) => *b,
                Some(_) => return Err(EnvelopeError::wrong("label", "a boolean")),
                None => return Err(EnvelopeError::MissingField("label".into())),
            };
            let label_explanation = match obj.get("label_explanation") {
                Some(Value::String(s)) => s.clone(),
                Some(_) => return Err(EnvelopeError::wrong("label_explanation", "a string")),
                None => return Err(EnvelopeError::MissingField("label_explanation".into())),
            };
            Ok(Envelope::Evaluation(Evaluation {
                label,
                label_explanation,
            }))
        }
        EnvelopeSchema::FindingList(kind) => {
            let items = list_items(&value, required)?;
            let findings = items
                .iter()
                .map(|item| finding(kind, item))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Envelope::Findings(findings))
        }
        EnvelopeSchema::CandidateList(kind) => {
            let items = list_items(&value, required)?;
            let cases = items
                .iter()
                .map(|item| generated_case(kind, item))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Envelope::Candidates(cases))
        }
        EnvelopeSchema::Selection => {
            let items = list_items(&value, required)?;
            let entries = items
                .iter()
                .map(|item| {
                    let case_id = match item.get("caseId") {
                        Some(Value::String(s)) => s.trim().to_string(),
                        Some(Value::Number(n)) => n.to_string(),
                        Some(_) => return Err(EnvelopeError::wrong("caseId", "a string or integer")),
                        None => return Err(EnvelopeError::MissingField("caseId".into())),
                    };
                    Ok(SelectionEntry {
                        case_id,
                        selection_reason: text(item, "selection_reason")?,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Envelope::Selection(entries))
        }
    }
}

fn finding(kind: PipelineKind, item: &Map<String, Value>) -> Result<Finding, EnvelopeError> {
    Ok(match kind {
        PipelineKind::Ambiguity => Finding::Ambiguity {
            underspecified_phrase: text(item, "underspecified_phrase")?,
            description: text(item, "description")?,
        },
        PipelineKind::Narrowness => Finding::Narrowness {
            broader_goal: text(item, "broader_goal")?,
            overspecified_phrase: text(item, "overspecified_phrase")?,
            uncovered_scenarios: text_or_list(item, "uncovered_scenarios")?,
        },
        PipelineKind::Consequence => Finding::Consequence {
            problematic_phrase: text(item, "problematic_phrase")?,
            consequence: text(item, "consequence")?,
        },
    })
}

fn generated_case(
    kind: Option<PipelineKind>,
    item: &Map<String, Value>,
) -> Result<GeneratedCase, EnvelopeError> {
    let detail = match kind {
        Some(PipelineKind::Ambiguity) => GeneratedDetail::Interpretation {
            underspecified_phrase: text(item, "underspecified_phrase")?,
            interpretation: text(item, "interpretation")?,
        },
        Some(PipelineKind::Narrowness) => {
            GeneratedDetail::UncoveredScenario(text(item, "uncovered_scenario")?)
        }
        Some(PipelineKind::Consequence) | None => GeneratedDetail::Plain,
    };
    let reasoning = text(item, "reasoning")?;
    let (channel, user_message) = match item.get("case") {
        Some(case) => case_input(case)?,
        None => return Err(EnvelopeError::MissingField("case".into())),
    };
    Ok(GeneratedCase {
        detail,
        reasoning,
        channel,
        user_message,
    })
}

const MESSAGE_KEYS: [&str; 5] = ["user_message", "user message", "message", "userMessage", "content"];

/// Splits a `case` value into (channel, user message). Accepts an object with
/// a channel and message field, or a string such as `#general: hi` or
/// `channel: #general, user message: hi`.
fn case_input(case: &Value) -> Result<(String, String), EnvelopeError> {
    match case {
        Value::Object(obj) => {
            let channel = match obj.get("channel") {
                Some(Value::String(s)) if !s.trim().is_empty() => s.trim().to_string(),
                Some(_) => return Err(EnvelopeError::wrong("case.channel", "a non-empty string")),
                None => return Err(EnvelopeError::MissingField("case.channel".into())),
            };
            let message = MESSAGE_KEYS
                .iter()
                .find_map(|k| obj.get(*k))
                .ok_or_else(|| EnvelopeError::MissingField("case.user_message".into()))?;
            match message {
                Value::String(s) if !s.trim().is_empty() => Ok((channel, s.trim().to_string())),
                _ => Err(EnvelopeError::wrong("case.user_message", "a non-empty string")),
            }
        }
        Value::String(s) => split_case_string(s).ok_or_else(|| EnvelopeError::wrong("case", "a channel and user message")),
        _ => Err(EnvelopeError::wrong("case", "an object or string")),
    }
}

fn split_case_string(s: &str) -> Option<(String, String)> {
    let lower = s.to_lowercase();
    // `lower` may differ in byte length from `s` for some scripts; only use its
    // indices when lengths agree.
    if lower.len() == s.len() {
        if let Some(pos) = lower.find("user message:") {
            let message = s[pos + "user message:".len()..].trim();
            let head = &s[..pos];
            let channel = head
                .split(|c: char| c.is_whitespace() || c == ',' || c == ';')
                .find(|tok| tok.starts_with('#') && tok.len() > 1)?;
            if message.is_empty() {
                return None;
            }
            return Some((channel.to_string(), message.to_string()));
        }
    }
    let rest = s.trim_start();
    if !rest.starts_with('#') {
        return None;
    }
    let end = rest
        .find(|c: char| c.is_whitespace() || c == ':' || c == ',')
        .unwrap_or(rest.len());
    let channel = &rest[..end];
    let message = rest[end..]
        .trim_start_matches(|c: char| c.is_whitespace() || c == ':' || c == ',' || c == '-')
        .trim();
    if channel.len() < 2 || message.is_empty() {
        return None;
    }
    Some((channel.to_string(), message.to_string()))
}

fn text(obj: &Map<String, Value>, field: &str) -> Result<String, EnvelopeError> {
    match obj.get(field) {
        Some(Value::String(s)) if !s.trim().is_empty() => Ok(s.trim().to_string()),
        Some(Value::String(_)) => Err(EnvelopeError::wrong(field, "a non-empty string")),
        Some(_) => Err(EnvelopeError::wrong(field, "a string")),
        None => Err(EnvelopeError::MissingField(field.to_string())),
    }
}

fn text_or_list(obj: &Map<String, Value>, field: &str) -> Result<String, EnvelopeError> {
    if let Some(Value::Array(items)) = obj.get(field) {
        let parts: Option<Vec<&str>> = items.iter().map(Value::as_str).collect();
        return match parts {
            Some(parts) if !parts.is_empty() => Ok(parts.join("; ")),
            _ => Err(EnvelopeError::wrong(field, "a string")),
        };
    }
    text(obj, field)
}

/// The envelope is a single object. A one-element list is unwrapped.
fn single_object<'a>(
    value: &'a Value,
    required: &[&str],
) -> Result<&'a Map<String, Value>, EnvelopeError> {
    match value {
        Value::Object(obj) => Ok(obj),
        Value::Array(items) if items.len() == 1 => match &items[0] {
            Value::Object(obj) => Ok(obj),
            _ => Err(EnvelopeError::wrong(required[0], "inside a JSON object")),
        },
        _ => Err(EnvelopeError::MissingField(required[0].to_string())),
    }
}

/// Normalizes the list shapes models produce into a list of item objects.
fn list_items<'a>(
    value: &'a Value,
    required: &[&str],
) -> Result<Vec<&'a Map<String, Value>>, EnvelopeError> {
    let as_objects = |items: &'a [Value]| -> Result<Vec<&'a Map<String, Value>>, EnvelopeError> {
        items
            .iter()
            .map(|v| v.as_object().ok_or_else(|| EnvelopeError::wrong("items", "JSON objects")))
            .collect()
    };
    match value {
        Value::Array(items) => as_objects(items),
        Value::Object(obj) => {
            if obj.is_empty() {
                return Ok(Vec::new());
            }
            if required.iter().any(|f| obj.contains_key(*f)) {
                return Ok(vec![obj]);
            }
            if let Some(items) = obj.values().find_map(Value::as_array) {
                return as_objects(items);
            }
            if obj.values().all(Value::is_object) {
                let mut entries: Vec<(&String, &Map<String, Value>)> = obj
                    .iter()
                    .filter_map(|(k, v)| v.as_object().map(|o| (k, o)))
                    .collect();
                if entries.iter().all(|(k, _)| k.parse::<u64>().is_ok()) {
                    entries.sort_by_key(|(k, _)| k.parse::<u64>().unwrap_or(u64::MAX));
                }
                return Ok(entries.into_iter().map(|(_, o)| o).collect());
            }
            Err(EnvelopeError::MissingField(required[0].to_string()))
        }
        _ => Err(EnvelopeError::wrong(required[0], "inside a JSON object or array")),
    }
}

/// Finds the first balanced `{...}` or `[...]` in `raw` that parses as JSON.
pub fn extract_json(raw: &str) -> Option<Value> {
    let bytes = raw.as_bytes();
    // Closing index per opener, filled lazily: `None` not scanned yet,
    // `Some(None)` unbalanced.
    let mut closes: Vec<Option<Option<usize>>> = vec![None; bytes.len()];
    for open in 0..bytes.len() {
        if bytes[open] != b'{' && bytes[open] != b'[' {
            continue;
        }
        if closes[open].is_none() {
            scan_brackets(bytes, open, &mut closes);
        }
        if let Some(Some(close)) = closes[open] {
            if let Ok(value) = serde_json::from_str::<Value>(&raw[open..=close]) {
                if value.is_object() || value.is_array() {
                    return Some(value);
                }
            }
        }
    }
    None
}

/// Matches brackets from `open` onward, honoring JSON strings, and records
/// the outcome for every opener passed outside a string. A scan started at
/// any of those openers would see the same bytes in the same string state,
/// so one pass settles all of them.
fn scan_brackets(bytes: &[u8], open: usize, closes: &mut [Option<Option<usize>>]) {
    let mut stack: Vec<(usize, u8)> = Vec::new();
    let mut in_string = false;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate().skip(open) {
        if in_string {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_string = false;
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' => stack.push((i, b'}')),
            b'[' => stack.push((i, b']')),
            b'}' | b']' => match stack.pop() {
                Some((at, close)) if close == b => {
                    closes[at] = Some(Some(i));
                    if stack.is_empty() {
                        return;
                    }
                }
                Some((at, _)) => {
                    closes[at] = Some(None);
                    break;
                }
                None => break,
            },
            _ => {}
        }
    }
    for (at, _) in stack {
        closes[at] = Some(None);
    }
}

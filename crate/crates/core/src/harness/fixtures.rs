//! The nine validation prompts and the 90 cases rated for them, plus a
//! script that replays those cases through the engine.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::agent::{PromptAssets, Task, TaskSet};
use crate::gateway::Finding;
use crate::provocation::PromptUnderTest;
use crate::script::{PlannedCase, PlannedReply, ScriptBuilder};
use crate::types::{ChannelName, PipelineKind, ServerId};

const PROMPTS_JSON: &str = include_str!("../../fixtures/validation_prompts.json");
const CASES_JSON: &str = include_str!("../../fixtures/validation_cases.json");

/// Server id used for the singleton validation task sets.
pub const VALIDATION_SERVER: &str = "validation";

/// Channel every replayed fixture case is posted in.
pub const FIXTURE_CHANNEL: &str = "#general";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pitfall {
    Ambiguous,
    OverlyNarrow,
    Consequential,
}

impl Pitfall {
    /// The pipeline built to catch this pitfall.
    pub fn kind(self) -> PipelineKind {
        match self {
            Pitfall::Ambiguous => PipelineKind::Ambiguity,
            Pitfall::OverlyNarrow => PipelineKind::Narrowness,
            Pitfall::Consequential => PipelineKind::Consequence,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixturePrompt {
    pub id: String,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pitfall: Option<Pitfall>,
    pub trigger: String,
    pub action: String,
}

impl FixturePrompt {
    pub fn prompt(&self) -> Result<PromptUnderTest, HarnessError> {
        PromptUnderTest::new(self.trigger.clone(), self.action.clone())
            .map_err(|e| HarnessError::Fixtures(format!("prompt {}: {e}", self.id)))
    }

    /// A task set holding only this prompt's task.
    pub fn task_set(&self) -> Result<TaskSet, HarnessError> {
        let task = Task::new(self.id.clone(), self.label.clone(), self.trigger.clone(), self.action.clone())
            .map_err(|e| HarnessError::Fixtures(format!("prompt {}: {e}", self.id)))?;
        TaskSet::new(ServerId::from(VALIDATION_SERVER), vec![task], 1)
            .map_err(|e| HarnessError::Fixtures(format!("prompt {}: {e}", self.id)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureSet {
    pub prompts: Vec<FixturePrompt>,
}

impl FixtureSet {
    /// The shipped nine prompts.
    pub fn builtin() -> Self {
        Self::parse(PROMPTS_JSON).expect("shipped fixtures are valid")
    }

    pub fn builtin_json() -> &'static str {
        PROMPTS_JSON
    }

    /// Accepts `{"prompts": [...]}` or a bare array.
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        if text.trim().is_empty() {
            return Err(HarnessError::Fixtures("fixture file is empty".into()));
        }
        let set: FixtureSet = match serde_json::from_str::<Vec<FixturePrompt>>(text) {
            Ok(prompts) => FixtureSet { prompts },
            Err(_) => serde_json::from_str(text).map_err(|e| HarnessError::Fixtures(e.to_string()))?,
        };
        if set.prompts.is_empty() {
            return Err(HarnessError::Fixtures("fixture file has no prompts".into()));
        }
        let mut seen = HashSet::new();
        for p in &set.prompts {
            if p.id.trim().is_empty() {
                return Err(HarnessError::Fixtures("prompt with empty id".into()));
            }
            if !seen.insert(p.id.as_str()) {
                return Err(HarnessError::Fixtures(format!("duplicate prompt id {}", p.id)));
            }
            p.prompt()?;
        }
        Ok(set)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, id: &str) -> Option<&FixturePrompt> {
        self.prompts.iter().find(|p| p.id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseSet {
    /// Produced by the provocation engine.
    Botender,
    /// Produced by the single-call baseline.
    Standard,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureCase {
    pub prompt: String,
    pub set: CaseSet,
    pub index: u32,
    pub user_message: String,
    /// `None` when the bot stayed silent.
    pub bot_response: Option<String>,
}

#[derive(Debug, Deserialize)]
struct CasesFile {
    cases: Vec<FixtureCase>,
}

pub fn fixture_cases() -> Vec<FixtureCase> {
    serde_json::from_str::<CasesFile>(CASES_JSON)
        .expect("shipped cases are valid")
        .cases
}

pub fn fixture_cases_json() -> &'static str {
    CASES_JSON
}

/// Channels offered to the engine during validation runs.
pub fn validation_channels() -> Vec<ChannelName> {
    ["#general", "#introductions", "#botender"]
        .iter()
        .map(|c| ChannelName::parse(c).expect("valid channel"))
        .collect()
}

pub fn validation_assets() -> PromptAssets {
    PromptAssets::for_channels(&validation_channels()).expect("non-empty channels")
}

fn planned(case: &FixtureCase) -> PlannedCase {
    let reply = match &case.bot_response {
        Some(text) => PlannedReply::text(text.clone()),
        None => PlannedReply::Silent,
    };
    PlannedCase::new(FIXTURE_CHANNEL, &case.user_message, reply, true)
}

/// Last few words of the trigger; always a substring of the prompt.
fn phrase(prompt: &FixturePrompt) -> String {
    let words: Vec<&str> = prompt.trigger.trim_end_matches('.').split(' ').collect();
    words[words.len().saturating_sub(3)..].join(" ")
}

fn finding(kind: PipelineKind, prompt: &FixturePrompt, note: &str) -> Finding {
    let phrase = phrase(prompt);
    match kind {
        PipelineKind::Ambiguity => Finding::Ambiguity {
            underspecified_phrase: phrase,
            description: note.to_string(),
        },
        PipelineKind::Narrowness => Finding::Narrowness {
            broader_goal: format!("support the intent behind {}", prompt.label),
            overspecified_phrase: phrase,
            uncovered_scenarios: note.to_string(),
        },
        PipelineKind::Consequence => Finding::Consequence {
            problematic_phrase: phrase,
            consequence: note.to_string(),
        },
    }
}

/// Findings for `cases` under `kind`. Consequence generators answer one case
/// per finding, the others get every case under a single finding.
fn findings_for(kind: PipelineKind, prompt: &FixturePrompt, cases: Vec<PlannedCase>) -> Vec<(Finding, Vec<PlannedCase>)> {
    if cases.is_empty() {
        return Vec::new();
    }
    match kind {
        PipelineKind::Consequence => cases
            .into_iter()
            .enumerate()
            .map(|(i, c)| (finding(kind, prompt, &format!("side effect {}", i + 1)), vec![c]))
            .collect(),
        _ => vec![(finding(kind, prompt, "reads more than one way"), cases)],
    }
}

/// Script answering a botender-mode run over `prompt` whose selected cases
/// are exactly `chosen` (in order). `extra` passing candidates are added
/// under another kind, plus one rejected candidate, so the selector runs
/// whenever the pool exceeds `n`.
pub fn script_botender_prompt(
    b: &mut ScriptBuilder,
    prompt: &FixturePrompt,
    chosen: &[FixtureCase],
    extra: usize,
    n: usize,
) -> Result<(), HarnessError> {
    let put = prompt.prompt()?;
    b.with_task_set(prompt.task_set()?);
    let main = prompt.pitfall.unwrap_or(Pitfall::Ambiguous).kind();
    let side = PipelineKind::ALL[(PipelineKind::ALL.iter().position(|k| *k == main).expect("listed") + 1) % 3];
    let mut side_cases: Vec<PlannedCase> = (1..=extra)
        .map(|i| {
            PlannedCase::new(
                "#introductions",
                &format!("Does the {} rule cover this? ({i})", prompt.label),
                PlannedReply::NoTrigger,
                true,
            )
        })
        .collect();
    side_cases.push(PlannedCase::new(
        "#introductions",
        &format!("Unrelated chatter near {}", prompt.label),
        PlannedReply::NoTrigger,
        false,
    ));
    let main_cases: Vec<PlannedCase> = chosen.iter().map(planned).collect();

    // Pool order is kind order, then finding, then case.
    let mut pool_main = Vec::new();
    let mut position = 0;
    for kind in PipelineKind::ALL {
        let cases = if kind == main {
            main_cases.clone()
        } else if kind == side {
            side_cases.clone()
        } else {
            Vec::new()
        };
        for case in &cases {
            if case.label {
                if kind == main {
                    pool_main.push(position);
                }
                position += 1;
            }
        }
        b.pipeline(kind, &put, &findings_for(kind, prompt, cases));
    }
    if position > n {
        b.selection(&put, &pool_main[..pool_main.len().min(n)], n);
    }
    Ok(())
}

/// Script answering a baseline run whose cases are `cases`.
pub fn script_baseline_prompt(b: &mut ScriptBuilder, prompt: &FixturePrompt, cases: &[FixtureCase]) -> Result<(), HarnessError> {
    b.with_task_set(prompt.task_set()?);
    let planned: Vec<PlannedCase> = cases.iter().map(planned).collect();
    b.baseline(&prompt.prompt()?, &planned);
    Ok(())
}

/// One script serving both modes over the shipped prompts: botender runs
/// select the rated botender cases, baseline runs return the rated
/// standard cases.
pub fn fixture_script() -> ScriptBuilder {
    let fixtures = FixtureSet::builtin();
    let cases = fixture_cases();
    let mut b = ScriptBuilder::new(validation_assets(), fixtures.prompts[0].task_set().expect("valid fixture"));
    for prompt in &fixtures.prompts {
        let of = |set: CaseSet| -> Vec<FixtureCase> {
            let mut v: Vec<FixtureCase> = cases
                .iter()
                .filter(|c| c.prompt == prompt.id && c.set == set)
                .cloned()
                .collect();
            v.sort_by_key(|c| c.index);
            v
        };
        script_botender_prompt(&mut b, prompt, &of(CaseSet::Botender), 1, 5).expect("valid fixture");
        script_baseline_prompt(&mut b, prompt, &of(CaseSet::Standard)).expect("valid fixture");
    }
    b
}

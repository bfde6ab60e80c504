//! User prompts for the detector, generator, evaluator, selector and baseline
//! calls. System prompts live in [`crate::prompts`].

use crate::gateway::Finding;
use crate::prompts;
use crate::types::PipelineKind;

use super::{CaseCandidate, PromptUnderTest, Provenance};

/// Placeholder for a missing triggered task or bot response.
pub const NONE_TEXT: &str = "None";

pub fn detector_system(kind: PipelineKind) -> &'static str {
    match kind {
        PipelineKind::Ambiguity => prompts::AMBIGUITY_DETECTOR_SYSTEM,
        PipelineKind::Narrowness => prompts::NARROWNESS_DETECTOR_SYSTEM,
        PipelineKind::Consequence => prompts::CONSEQUENCE_DETECTOR_SYSTEM,
    }
}

pub fn generator_system(kind: PipelineKind) -> &'static str {
    match kind {
        PipelineKind::Ambiguity => prompts::AMBIGUITY_GENERATOR_SYSTEM,
        PipelineKind::Narrowness => prompts::NARROWNESS_GENERATOR_SYSTEM,
        PipelineKind::Consequence => prompts::CONSEQUENCE_GENERATOR_SYSTEM,
    }
}

pub fn evaluator_system(kind: PipelineKind) -> &'static str {
    match kind {
        PipelineKind::Ambiguity => prompts::AMBIGUITY_EVALUATOR_SYSTEM,
        PipelineKind::Narrowness => prompts::NARROWNESS_EVALUATOR_SYSTEM,
        PipelineKind::Consequence => prompts::CONSEQUENCE_EVALUATOR_SYSTEM,
    }
}

/// The selector system prompt asking for `n` cases.
pub fn selector_system(n: usize) -> String {
    if n == 5 {
        return prompts::SELECTOR_SYSTEM.to_string();
    }
    prompts::SELECTOR_SYSTEM
        .replace("Select the 5 most", &format!("Select the {n} most"))
        .replace("an array of 5 selected", &format!("an array of {n} selected"))
}

fn prompt_block(header: &str, prompt: &PromptUnderTest) -> String {
    format!(
        "{header}\n• Trigger: {}\n• Action: {}",
        prompt.trigger, prompt.action
    )
}

/// Shared by the three detectors and the baseline generator.
pub fn detector_user(prompt: &PromptUnderTest) -> String {
    prompt_block("Prompt:", prompt)
}

pub fn generator_user(prompt: &PromptUnderTest, finding: &Finding) -> String {
    let head = prompt_block("prompt:", prompt);
    match finding {
        Finding::Ambiguity {
            underspecified_phrase,
            description,
        } => format!(
            "{head}\nunderspecified_phrase: {underspecified_phrase}\ndescription: {description}"
        ),
        Finding::Narrowness {
            broader_goal,
            overspecified_phrase,
            uncovered_scenarios,
        } => format!(
            "{head}\noverspecified_phrase: {overspecified_phrase}\nbroader_goal: {broader_goal}\nuncovered_scenarios: {uncovered_scenarios}"
        ),
        Finding::Consequence {
            problematic_phrase,
            consequence,
        } => format!("{head}\nproblematic_phrase: {problematic_phrase}\nconsequence: {consequence}"),
    }
}

fn case_block(candidate: &CaseCandidate, task_label: &str) -> String {
    let (triggered, response) = execution_texts(candidate);
    format!(
        "case:\n• channel: {}\n• user message: {}\n• {task_label}: {triggered}\n• bot response: {response}",
        candidate.channel, candidate.user_message
    )
}

fn execution_texts(candidate: &CaseCandidate) -> (&str, &str) {
    let exec = candidate.execution.as_ref();
    (
        exec.and_then(|e| e.triggered_task.as_deref()).unwrap_or(NONE_TEXT),
        exec.and_then(|e| e.bot_response.as_deref()).unwrap_or(NONE_TEXT),
    )
}

/// Evaluator user prompt; `None` for baseline candidates, which are never
/// evaluated.
pub fn evaluator_user(candidate: &CaseCandidate) -> Option<String> {
    let head = prompt_block("prompt:", &candidate.prompt);
    let reasoning = &candidate.reasoning;
    Some(match &candidate.provenance {
        Provenance::Ambiguity {
            finding,
            interpretation,
        } => format!(
            "{head}\nunderspecified_phrase: {}\ninterpretation: {interpretation}\nreasoning: {reasoning}\n{}",
            finding.phrase(),
            case_block(candidate, "triggered task")
        ),
        Provenance::Narrowness {
            finding,
            uncovered_scenario,
        } => {
            let broader_goal = match finding {
                Finding::Narrowness { broader_goal, .. } => broader_goal.as_str(),
                _ => "",
            };
            format!(
                "{head}\noverspecified_phrase: {}\nbroader_goal: {broader_goal}\nuncovered_scenario: {uncovered_scenario}\nreasoning: {reasoning}\n{}",
                finding.phrase(),
                case_block(candidate, "trigger task")
            )
        }
        Provenance::Consequence { finding } => {
            let consequence = match finding {
                Finding::Consequence { consequence, .. } => consequence.as_str(),
                _ => "",
            };
            format!(
                "{head}\nproblematic_phrase: {}\nconsequence: {consequence}\nreasoning: {reasoning}\n{}",
                finding.phrase(),
                case_block(candidate, "trigger task")
            )
        }
        Provenance::Baseline => return None,
    })
}

/// Selector user prompt: one block per case, ids are pool indices.
pub fn selector_user(pool: &[CaseCandidate]) -> String {
    pool.iter()
        .enumerate()
        .map(|(id, c)| {
            let (triggered, response) = execution_texts(c);
            let issue = c.kind().map(PipelineKind::issue_label).unwrap_or("none");
            format!(
                "Case ID: {id}\nChannel: {}\nUser Message: {}\nTriggered Task: {triggered}\nBot Response: {response}\n{}\nIdentified Issue: {issue}",
                c.channel,
                c.user_message,
                prompt_block("Prompt Under Test:", &c.prompt)
            )
        })
        .collect::<Vec<_>>()
        .join("\n---\n")
}

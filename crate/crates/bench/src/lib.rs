//! Inputs shared by the benchmarks.

use botender_core::gateway::EnvelopeSchema;
use botender_core::PipelineKind;

/// Model outputs in the shapes the envelope parser has to cope with.
pub fn envelope_samples() -> Vec<(&'static str, EnvelopeSchema, String)> {
    let finding = r#"{"underspecified_phrase": "concerts", "description": "which venue counts is unclear"}"#;
    let candidate = r##"{"reasoning": "asks about merch in a generic channel", "case": {"channel": "#general", "user_message": "where can I buy the hoodie?"}}"##;
    let many: Vec<String> = (0..20)
        .map(|i| format!(r##"{{"uncovered_scenario": "scenario {i}", "reasoning": "r", "case": {{"channel": "#general", "user_message": "message {i}"}}}}"##))
        .collect();
    vec![
        ("task_id_bare", EnvelopeSchema::TaskId, r#"{"taskId": "hello"}"#.to_string()),
        (
            "findings_fenced",
            EnvelopeSchema::FindingList(PipelineKind::Ambiguity),
            format!("Here is the list:\n```json\n[{finding}, {finding}]\n```\nLet me know."),
        ),
        (
            "candidates_numbered",
            EnvelopeSchema::CandidateList(Some(PipelineKind::Consequence)),
            format!(r#"{{"0": {candidate}, "1": {candidate}, "2": {candidate}}}"#),
        ),
        (
            "candidates_nested_20",
            EnvelopeSchema::CandidateList(Some(PipelineKind::Narrowness)),
            format!(r#"{{"test_cases": [{}]}}"#, many.join(", ")),
        ),
        (
            "evaluation_prose",
            EnvelopeSchema::Evaluation,
            r#"Sure. {"label": true, "label_explanation": "the bot answered in the right channel"} Hope that helps"#.to_string(),
        ),
    ]
}

use botender_core::harness::{demo_scenario, demo_script, run_scenario, ScenarioEvent};
use botender_core::platform::{ActionResult, PlatformAction, Target, TranscriptEntry};
use botender_core::service::Method;
use botender_core::Gateway;

use crate::{Outcome, SIM_BOTENDER_NOTICES};

pub fn check() -> Outcome {
    let scenario = demo_scenario();
    let run = || run_scenario(&scenario, Gateway::scripted(demo_script().provider()), 2).map_err(|e| e.to_string());
    let result = run()?;

    if let Some(bad) = result.api_log.iter().find(|e| e.status >= 300) {
        return Err(format!("step {} {} returned {}", bad.step, bad.path, bad.status));
    }
    // k = saved edits in the scenario.
    let k = result
        .api_log
        .iter()
        .filter(|e| e.method == Method::Post && e.path.ends_with("/edits"))
        .count();
    let new_task = scenario
        .events
        .iter()
        .find_map(|e| match e {
            ScenarioEvent::Api { method: Method::Post, path, body, .. } if path.ends_with("/proposals") => {
                body["draft"][0]["task"]["name"].as_str().map(str::to_string)
            }
            _ => None,
        })
        .ok_or("scenario creates no task")?;

    let posts: Vec<(&Target, &Option<String>)> = result
        .transcript
        .iter()
        .filter_map(|e| match e {
            TranscriptEntry::Action {
                action: PlatformAction::PostMessage { target, task_label, .. },
                result: ActionResult::Posted { .. },
                ..
            } => Some((target, task_label)),
            _ => None,
        })
        .collect();
    let notices = posts
        .iter()
        .filter(|(t, label)| label.is_none() && matches!(t, Target::Channel { channel } if channel.as_str() == "#botender"))
        .count();
    let thread = posts.iter().filter(|(t, _)| matches!(t, Target::Thread { .. })).count();
    if notices != SIM_BOTENDER_NOTICES {
        return Err(format!("{notices} #botender notifications"));
    }
    if thread != k + 1 {
        return Err(format!("{thread} thread notifications for k={k}"));
    }
    match result.transcript.last() {
        Some(TranscriptEntry::Action {
            action: PlatformAction::PostMessage { task_label: Some(label), .. },
            ..
        }) if *label == new_task => {}
        other => return Err(format!("last entry is {other:?}")),
    }
    if run()?.transcript_jsonl() != result.transcript_jsonl() {
        return Err("transcripts differ between runs".into());
    }
    Ok(format!(
        "{notices} #botender notifications, {thread} thread notifications (k={k}), final reply labeled {new_task:?}, identical transcript on rerun"
    ))
}

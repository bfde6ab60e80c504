use super::*;
use crate::agent::PromptAssets;
use crate::gateway::{ScriptEntry, ScriptedProvider};
use crate::provocation::EngineConfig;

fn live() -> TaskSet {
    TaskSet::new(
        ServerId::from("srv"),
        vec![Task::new(
            "hello",
            "Hello Botender",
            "When someone greets Botender in the #botender channel.",
            "Reply with a hello and a smiling emoji.",
        )
        .unwrap()],
        1,
    )
    .unwrap()
}

fn merch() -> Task {
    Task::new(
        "merch",
        "Merch Link",
        "When someone asks where to buy merch.",
        "Share the link to the official merch store.",
    )
    .unwrap()
}

fn add_merch() -> Vec<TaskChange> {
    vec![TaskChange::Add { task: merch() }]
}

fn user(name: &str) -> UserId {
    UserId::from(name)
}

fn chan(c: &str) -> ChannelName {
    ChannelName::parse(c).unwrap()
}

fn proposal(draft: Vec<TaskChange>) -> Proposal {
    Proposal::create(
        ProposalId::from("p-0001"),
        ServerId::from("srv"),
        "Welcome Fans",
        "greet new fans",
        draft,
        None,
        user("ana"),
        &live(),
        Timestamp(0),
    )
    .unwrap()
    .0
}

fn outcome(task: Option<&str>, reply: Option<&str>) -> CaseOutcome {
    CaseOutcome {
        triggered_task: task.map(str::to_string),
        bot_response: reply.map(str::to_string),
        error: None,
    }
}

fn generated(msg: &str) -> (TaskId, CaseCandidate) {
    use crate::provocation::{Execution, Provenance};
    (
        TaskId::from("merch"),
        CaseCandidate {
            prompt: PromptUnderTest::new("t", "a").unwrap(),
            provenance: Provenance::Baseline,
            reasoning: "r".into(),
            channel: chan("#general"),
            user_message: msg.into(),
            execution: Some(Execution {
                triggered_task: Some("Merch Link".into()),
                bot_response: Some("shop.example".into()),
            }),
            evaluation: None,
            selection_reason: None,
        },
    )
}

#[test]
fn create_with_draft_and_seed() {
    let (p, notice) = Proposal::create(
        ProposalId::from("p-0001"),
        ServerId::from("srv"),
        "Welcome Fans",
        "",
        add_merch(),
        Some(SeedCase {
            channel: chan("#general"),
            user_message: "where is the merch?".into(),
            triggered_task: None,
            bot_response: None,
        }),
        user("ana"),
        &live(),
        Timestamp(5),
    )
    .unwrap();
    assert_eq!(notice, Notice::Created);
    assert_eq!(p.edit_versions.len(), 1);
    assert_eq!(p.edit_versions[0].changes.len(), 1);
    assert_eq!(p.saved_cases.len(), 1);
    assert_eq!(p.saved_cases[0].origin, CaseOrigin::Playground);
    assert_eq!(p.saved_cases[0].votes[&user("ana")].direction, Vote::Up);
    assert_eq!(p.saved_cases[0].response_history.len(), 1);
}

#[test]
fn create_rejects_empty_title_and_bad_draft() {
    let err = Proposal::create(
        ProposalId::from("p"),
        ServerId::from("srv"),
        "  ",
        "",
        vec![],
        None,
        user("a"),
        &live(),
        Timestamp(0),
    )
    .unwrap_err();
    assert_eq!(err, WorkflowError::EmptyTitle);
    let err = Proposal::create(
        ProposalId::from("p"),
        ServerId::from("srv"),
        "x",
        "",
        vec![TaskChange::Remove { task_id: "ghost".into() }],
        None,
        user("a"),
        &live(),
        Timestamp(0),
    )
    .unwrap_err();
    assert!(matches!(err, WorkflowError::InvalidDraft(_)));
}

#[test]
fn empty_draft_cannot_be_tested() {
    let mut p = proposal(vec![]);
    assert_eq!(
        p.attach_report(vec![], vec![], vec![], vec![], vec![]).unwrap_err(),
        WorkflowError::EmptyDraft
    );
}

#[test]
fn save_requires_fresh_vote() {
    let mut p = proposal(add_merch());
    p.attach_report(add_merch(), vec![], vec![generated("merch?")], vec![], vec![])
        .unwrap();
    let hash = draft_hash(&add_merch());
    let cfg = WorkflowConfig::default();
    let err = p.save_edit(add_merch(), &hash, &user("ana"), &cfg, Timestamp(1)).unwrap_err();
    assert_eq!(
        err,
        WorkflowError::Gate {
            gate: "save_vote_gate",
            required: 1,
            actual: 0
        }
    );
    let case_id = p.pending_report.as_ref().unwrap().generated[0].case_id.clone();
    assert_eq!(p.vote_case(&user("ana"), &case_id, Some(Vote::Up)).unwrap(), (1, 0));
    assert_eq!(p.saved_cases[0].origin, CaseOrigin::Generated);
    let notice = p.save_edit(add_merch(), &hash, &user("ana"), &cfg, Timestamp(2)).unwrap();
    assert_eq!(notice, Notice::EditSaved { version: 1 });
    assert_eq!(p.saved_cases[0].response_history.len(), 1);
    assert_eq!(p.saved_cases[0].response_history[0].version, 1);
    assert!(p.pending_report.is_none());
}

#[test]
fn save_gate_is_configurable() {
    let mut p = proposal(add_merch());
    p.attach_report(add_merch(), vec![], vec![generated("a"), generated("b")], vec![], vec![])
        .unwrap();
    let id = p.pending_report.as_ref().unwrap().generated[0].case_id.clone();
    p.vote_case(&user("ana"), &id, Some(Vote::Down)).unwrap();
    let cfg = WorkflowConfig {
        save_vote_gate: 2,
        ..WorkflowConfig::default()
    };
    let err = p
        .save_edit(add_merch(), &draft_hash(&add_merch()), &user("ana"), &cfg, Timestamp(1))
        .unwrap_err();
    assert!(matches!(err, WorkflowError::Gate { gate: "save_vote_gate", required: 2, actual: 1 }));
}

#[test]
fn changed_draft_is_stale() {
    let mut p = proposal(add_merch());
    p.attach_report(add_merch(), vec![], vec![generated("a")], vec![], vec![])
        .unwrap();
    let id = p.pending_report.as_ref().unwrap().generated[0].case_id.clone();
    p.vote_case(&user("ana"), &id, Some(Vote::Up)).unwrap();
    let mut edited = merch();
    edited.action = "Share the store link and a discount code.".into();
    let other = vec![TaskChange::Add { task: edited }];
    let err = p
        .save_edit(other.clone(), &draft_hash(&other), &user("ana"), &WorkflowConfig::default(), Timestamp(1))
        .unwrap_err();
    assert!(matches!(err, WorkflowError::Stale(_)));
}

#[test]
fn case_added_after_report_makes_it_stale() {
    let mut p = proposal(add_merch());
    p.attach_report(add_merch(), vec![], vec![generated("a")], vec![], vec![])
        .unwrap();
    let id = p.pending_report.as_ref().unwrap().generated[0].case_id.clone();
    p.vote_case(&user("ana"), &id, Some(Vote::Up)).unwrap();
    p.add_manual_case(chan("#general"), "late case").unwrap();
    let err = p
        .save_edit(add_merch(), &draft_hash(&add_merch()), &user("ana"), &WorkflowConfig::default(), Timestamp(1))
        .unwrap_err();
    assert!(matches!(err, WorkflowError::Stale(_)));
}

#[test]
fn revote_overwrites_and_tally_counts() {
    let mut p = proposal(add_merch());
    let id = p.add_manual_case(chan("#general"), "hi").unwrap();
    p.vote_case(&user("a"), &id, Some(Vote::Up)).unwrap();
    assert_eq!(p.vote_case(&user("a"), &id, Some(Vote::Down)).unwrap(), (0, 1));
    assert_eq!(p.case(&id).unwrap().votes.len(), 1);
    p.vote_case(&user("b"), &id, Some(Vote::Up)).unwrap();
    assert_eq!(p.vote_case(&user("c"), &id, Some(Vote::Up)).unwrap(), (2, 1));
    assert_eq!(p.case(&id).unwrap().status(), CaseStatus::Good);
    assert_eq!(
        p.vote_case(&user("a"), &CaseId::from("nope"), Some(Vote::Up)).unwrap_err(),
        WorkflowError::UnknownCase(CaseId::from("nope"))
    );
}

#[test]
fn status_rule() {
    assert_eq!(case_status(2, 1), CaseStatus::Good);
    assert_eq!(case_status(1, 1), CaseStatus::Tbd);
    assert_eq!(case_status(0, 0), CaseStatus::Tbd);
    assert_eq!(case_status(0, 3), CaseStatus::Bad);
}

#[test]
fn counters_sum_to_cases() {
    let mut p = proposal(add_merch());
    assert_eq!(p.counters(), Counters::default());
    let a = p.add_manual_case(chan("#general"), "a").unwrap();
    let b = p.add_manual_case(chan("#general"), "b").unwrap();
    p.add_manual_case(chan("#general"), "c").unwrap();
    p.vote_case(&user("u"), &a, Some(Vote::Up)).unwrap();
    p.vote_case(&user("u"), &b, Some(Vote::Up)).unwrap();
    assert_eq!(p.counters(), Counters { good: 2, bad: 0, tbd: 1 });
}

fn deployable() -> Proposal {
    let mut p = proposal(add_merch());
    let id = p.add_manual_case(chan("#general"), "merch?").unwrap();
    for u in ["a", "b", "c"] {
        p.vote_case(&user(u), &id, Some(Vote::Up)).unwrap();
    }
    p
}

#[test]
fn deploy_votes_are_gated_and_idempotent() {
    let mut p = deployable();
    assert_eq!(
        p.vote_deploy(&user("nobody"), Vote::Up).unwrap_err(),
        WorkflowError::Gate {
            gate: "case_vote_gate",
            required: 1,
            actual: 0
        }
    );
    assert_eq!(p.vote_deploy(&user("a"), Vote::Up).unwrap(), 1);
    assert_eq!(p.vote_deploy(&user("a"), Vote::Up).unwrap(), 1);
    assert_eq!(p.vote_deploy(&user("b"), Vote::Down).unwrap(), 1);
    assert_eq!(p.vote_deploy(&user("c"), Vote::Up).unwrap(), 2);
}

#[test]
fn deploy_needs_threshold_then_applies() {
    let mut p = deployable();
    p.vote_deploy(&user("a"), Vote::Up).unwrap();
    p.vote_deploy(&user("b"), Vote::Up).unwrap();
    let cfg = WorkflowConfig::default();
    let err = p.deploy(&live(), &cfg).unwrap_err();
    assert!(matches!(err, WorkflowError::Gate { gate: "deployment_threshold", required: 3, actual: 2 }));
    p.vote_deploy(&user("c"), Vote::Up).unwrap();
    let (next, notice) = p.deploy(&live(), &cfg).unwrap();
    assert_eq!(notice, Notice::Deployed);
    assert_eq!(next.version, 2);
    assert!(next.contains(&TaskId::from("merch")));
    assert_eq!(p.status, ProposalStatus::Deployed);
    assert!(p.set_status(ProposalStatus::Open).is_err());
}

#[test]
fn conflicting_deploy_leaves_state() {
    let removal = vec![TaskChange::Remove { task_id: "hello".into() }];
    let mut p = proposal(removal);
    let id = p.add_manual_case(chan("#general"), "x").unwrap();
    for u in ["a", "b", "c"] {
        p.vote_case(&user(u), &id, Some(Vote::Up)).unwrap();
        p.vote_deploy(&user(u), Vote::Up).unwrap();
    }
    let already = TaskSet::new(ServerId::from("srv"), vec![], 2).unwrap();
    let before = p.clone();
    assert!(matches!(p.deploy(&already, &WorkflowConfig::default()), Err(WorkflowError::Conflict(_))));
    assert_eq!(p, before);
}

#[test]
fn revert_appends_version() {
    let gw = Gateway::scripted(ScriptedProvider::lenient(vec![], r#"{"taskId": "0"}"#));
    let mut p = proposal(add_merch());
    for i in 1..3 {
        let mut t = merch();
        t.action = format!("variant {i}");
        p.edit_versions.push(EditVersion {
            version: i,
            author: user("ana"),
            changes: vec![TaskChange::Add { task: t }],
            created_at: Timestamp(i as u64),
        });
    }
    p.revert_to(0, &user("ana"), &live(), &gw, Timestamp(9)).unwrap();
    assert_eq!(p.edit_versions.len(), 4);
    assert_eq!(p.edit_versions[3].changes, p.edit_versions[0].changes);
    assert!(matches!(
        p.revert_to(3, &user("ana"), &live(), &gw, Timestamp(9)),
        Err(WorkflowError::OutOfRange { version: 3, latest: 3 })
    ));
}

#[test]
fn status_transitions() {
    let mut p = proposal(vec![]);
    assert_eq!(p.set_status(ProposalStatus::Closed).unwrap(), Some(Notice::Closed));
    assert_eq!(p.set_status(ProposalStatus::Closed).unwrap(), None);
    assert_eq!(p.set_status(ProposalStatus::Open).unwrap(), Some(Notice::Reopened));
    assert!(matches!(
        p.set_status(ProposalStatus::Deployed),
        Err(WorkflowError::IllegalTransition { .. })
    ));
}

#[test]
fn test_and_generate_reports_regression_and_generation() {
    let assets = PromptAssets::for_channels(&[chan("#general"), chan("#botender")]).unwrap();
    let engine = ProvocationEngine::new(assets, EngineConfig::default());
    let gw = Gateway::scripted(ScriptedProvider::lenient(
        vec![ScriptEntry::new("Task ID: merch", r#"{"taskId": "0"}"#)],
        "[]",
    ));
    let mut p = proposal(add_merch());
    for m in ["a", "b", "c"] {
        p.add_manual_case(chan("#general"), m).unwrap();
    }
    let report = test_and_generate(&mut p, &live(), add_merch(), &engine, &gw, &WorkflowConfig::default()).unwrap();
    assert_eq!(report.regression.len(), 3);
    assert!(report.generated.len() <= 5);
    assert!(report.regression.iter().all(|r| r.outcome.triggered_task.is_none()));

    let removal = vec![TaskChange::Remove { task_id: "hello".into() }];
    let mut p = proposal(removal.clone());
    let report = test_and_generate(&mut p, &live(), removal, &engine, &gw, &WorkflowConfig::default()).unwrap();
    assert!(report.generated.is_empty());
}

#[test]
fn config_values_must_be_positive() {
    let cfg = WorkflowConfig {
        deployment_threshold: 0,
        ..WorkflowConfig::default()
    };
    assert_eq!(cfg.validate(), Err(WorkflowError::InvalidConfig("deployment_threshold")));
    assert!(WorkflowConfig::default().validate().is_ok());
}

#[test]
fn saved_cases_get_an_entry_per_saved_version() {
    let mut p = proposal(add_merch());
    let manual = p.add_manual_case(chan("#general"), "merch?").unwrap();
    let hash = draft_hash(&add_merch());
    for round in 0..2 {
        let regression: Vec<_> = p
            .saved_cases
            .iter()
            .map(|c| (c.id.clone(), outcome(Some("Merch Link"), Some("shop"))))
            .collect();
        p.attach_report(add_merch(), regression, vec![], vec![], vec![]).unwrap();
        p.vote_case(&user("ana"), &manual, Some(if round == 0 { Vote::Up } else { Vote::Down }))
            .unwrap();
        p.save_edit(add_merch(), &hash, &user("ana"), &WorkflowConfig::default(), Timestamp(round))
            .unwrap();
    }
    let versions: Vec<usize> = p.case(&manual).unwrap().response_history.iter().map(|e| e.version).collect();
    assert_eq!(versions, [1, 2]);
}

use std::io::Cursor;

use super::*;
use crate::gateway::{ScriptEntry, ScriptedProvider};
use crate::store::MemoryStore;
use crate::types::ProposalId;
use crate::workflow::Proposal;

fn chan(c: &str) -> ChannelName {
    ChannelName::parse(c).unwrap()
}

fn srv() -> ServerId {
    ServerId::from("guild")
}

fn setup(channels: &[&str], script: Vec<ScriptEntry>) -> (Arc<SimulatedPlatform>, Adapter) {
    let sim = Arc::new(SimulatedPlatform::new());
    sim.add_server(
        srv(),
        channels.iter().map(|c| chan(c)).collect(),
        vec![UserId::from("ana"), UserId::from("ben")],
        vec![UserId::from("ana")],
    );
    let gw = Gateway::scripted(ScriptedProvider::strict(script));
    let adapter = Adapter::new(sim.clone(), Arc::new(MemoryStore::new()), gw);
    (sim, adapter)
}

fn hello_script() -> Vec<ScriptEntry> {
    vec![
        ScriptEntry::all_of(["Task ID: hello-botender", "channel: hello"], r#"{"taskId": "hello-botender"}"#),
        ScriptEntry::new("channel: what time is it", r#"{"taskId": "0"}"#),
        ScriptEntry::new("Action: Reply with a hello", r#"{"response": "Hello! 😊"}"#),
    ]
}

fn event(channel: &str, content: &str) -> PlatformEvent {
    PlatformEvent {
        server: srv(),
        channel: chan(channel),
        author: UserId::from("ana"),
        content: content.into(),
        at: Timestamp(1),
    }
}

#[test]
fn install_creates_channel_and_seeds_task() {
    let (sim, adapter) = setup(&["#general"], vec![]);
    let result = adapter.install(&srv()).unwrap();
    assert!(result.created_channel);
    assert_eq!(result.task_set.tasks, vec![hello_task()]);
    assert!(sim.channels(&srv()).unwrap().contains(&chan("#botender")));
    assert_eq!(adapter.install(&srv()).unwrap_err(), PlatformError::AlreadyInstalled(srv()));
}

#[test]
fn install_reuses_existing_channel() {
    let (sim, adapter) = setup(&["#general", "#botender"], vec![]);
    let result = adapter.install(&srv()).unwrap();
    assert!(!result.created_channel);
    assert_eq!(sim.channels(&srv()).unwrap().len(), 2);
    assert_eq!(adapter.live_tasks(&srv()).unwrap().0.tasks[0].name, "Hello Botender");
}

#[test]
fn hello_gets_labeled_reply() {
    let (sim, adapter) = setup(&["#general"], hello_script());
    adapter.install(&srv()).unwrap();
    let e = event("#botender", "hello");
    sim.receive(&e).unwrap();
    let out = adapter.ingest(&e).unwrap();
    assert_eq!(out.reply.unwrap().task_name, "Hello Botender");
    let last = sim.transcript().pop().unwrap();
    let TranscriptEntry::Action {
        action: PlatformAction::PostMessage { task_label, text, .. },
        ..
    } = last
    else {
        panic!("expected a post, got {last:?}");
    };
    assert_eq!(task_label.as_deref(), Some("Hello Botender"));
    assert_eq!(text, "Hello! 😊");
}

#[test]
fn untriggered_message_posts_nothing() {
    let (sim, adapter) = setup(&["#general"], hello_script());
    adapter.install(&srv()).unwrap();
    let before = sim.transcript().len();
    let out = adapter.ingest(&event("#general", "what time is it")).unwrap();
    assert!(out.reply.is_none());
    assert_eq!(sim.transcript().len(), before);
}

#[test]
fn uninstalled_server_drops_events() {
    let (_, adapter) = setup(&["#general"], vec![]);
    let out = adapter.ingest(&event("#general", "hello")).unwrap();
    assert_eq!(out.anomalies[0].code, "uninstalled_server");
    assert!(adapter.list_channels(&srv()).is_err());
}

#[test]
fn list_channels_tracks_created_channels() {
    let (sim, adapter) = setup(&["#general", "#botender"], vec![]);
    adapter.install(&srv()).unwrap();
    assert_eq!(adapter.list_channels(&srv()).unwrap(), vec![chan("#general"), chan("#botender")]);
    sim.execute(&srv(), PlatformAction::CreateChannel { name: chan("#events") })
        .unwrap();
    assert!(adapter.list_channels(&srv()).unwrap().contains(&chan("#events")));
}

fn proposal(adapter: &Adapter) -> Proposal {
    let live = adapter.live_tasks(&srv()).unwrap().0;
    Proposal::create(
        ProposalId::from("p-0001"),
        srv(),
        "Welcome Fans",
        "say hi to fans",
        vec![],
        None,
        UserId::from("ana"),
        &live,
        Timestamp(0),
    )
    .unwrap()
    .0
}

#[test]
fn notification_shapes() {
    let (sim, adapter) = setup(&["#general"], vec![]);
    adapter.install(&srv()).unwrap();
    let mut p = proposal(&adapter);
    adapter.notify(&mut p, &Notice::Created).unwrap();
    let thread = p.thread_ref.clone().expect("thread recorded");
    assert_eq!(sim.notifications_in(&srv(), &chan("#botender")).len(), 1);
    assert!(sim.can_view_thread(&srv(), &thread, &UserId::from("ana")));
    assert!(!sim.can_view_thread(&srv(), &thread, &UserId::from("ben")));

    for v in 1..=3 {
        adapter.notify(&mut p, &Notice::EditSaved { version: v }).unwrap();
    }
    assert_eq!(sim.thread_messages(&srv(), &thread).len(), 3);
    assert_eq!(sim.notifications_in(&srv(), &chan("#botender")).len(), 1);

    adapter.notify(&mut p, &Notice::Deployed).unwrap();
    assert_eq!(sim.thread_messages(&srv(), &thread).len(), 4);
    assert_eq!(sim.notifications_in(&srv(), &chan("#botender")).len(), 2);
}

#[test]
fn missing_thread_falls_back_to_botender() {
    let (sim, adapter) = setup(&["#general"], vec![]);
    adapter.install(&srv()).unwrap();
    let mut p = proposal(&adapter);
    let anomalies = adapter.notify(&mut p, &Notice::Closed).unwrap();
    assert_eq!(anomalies[0].code, "missing_thread");
    assert_eq!(sim.notifications_in(&srv(), &chan("#botender")).len(), 1);
}

#[test]
fn transcript_replay_rebuilds_state() {
    let (sim, adapter) = setup(&["#general"], hello_script());
    adapter.install(&srv()).unwrap();
    let e = event("#botender", "hello");
    sim.receive(&e).unwrap();
    adapter.ingest(&e).unwrap();
    let mut p = proposal(&adapter);
    adapter.notify(&mut p, &Notice::Created).unwrap();
    adapter.notify(&mut p, &Notice::Deployed).unwrap();

    let jsonl = sim.transcript_jsonl();
    let entries = SimulatedPlatform::read_jsonl(Cursor::new(jsonl.as_bytes())).unwrap();
    let rebuilt = SimulatedPlatform::replay(&entries).unwrap();
    assert!(rebuilt.same_state(&sim));
    assert_eq!(rebuilt.transcript_jsonl(), jsonl);
}

#[test]
fn posting_to_unknown_channel_fails() {
    let (sim, _) = setup(&["#general"], vec![]);
    let err = sim
        .execute(
            &srv(),
            PlatformAction::PostMessage {
                target: Target::Channel { channel: chan("#nowhere") },
                text: "x".into(),
                task_label: None,
            },
        )
        .unwrap_err();
    assert!(matches!(err, PlatformError::UnknownTarget(_)));
}

use std::collections::HashSet;
use std::time::Instant;

use botender_core::harness::{
    fixture_cases, fixture_script, run_validation, script_botender_prompt, validation_assets, CaseSet, FixtureCase,
    FixtureSet,
};
use botender_core::provocation::{validate_report, ReportMode};
use botender_core::script::ScriptBuilder;
use botender_core::{prompts, EngineConfig, Gateway, ProvocationEngine};
use serde_json::Value;

use crate::agent::Recording;
use crate::{Outcome, BASELINE_BUDGET, BASELINE_PROMPTS, PIPELINE_MIN_POOL, PIPELINE_REPEATS, PIPELINE_SELECTED};

fn p1_cases(take: usize) -> Vec<FixtureCase> {
    let mut v: Vec<FixtureCase> = fixture_cases()
        .into_iter()
        .filter(|c| c.prompt == "p1" && c.set == CaseSet::Botender)
        .collect();
    v.sort_by_key(|c| c.index);
    v.truncate(take);
    v
}

fn is_selector(system: &str) -> bool {
    // The rendered selector prompt starts with the template's fixed opening.
    system.starts_with(&prompts::SELECTOR_SYSTEM[..80])
}

struct Run {
    pool: usize,
    kinds: usize,
    selected: Vec<(String, String)>,
    all_passed: bool,
    from_pool: bool,
    selector_calls: usize,
}

fn run_p1(chosen: usize, extra: usize) -> Result<Run, String> {
    let fixtures = FixtureSet::builtin();
    let p1 = fixtures.get("p1").ok_or("fixture p1 missing")?;
    let mut b = ScriptBuilder::new(validation_assets(), p1.task_set().map_err(|e| e.to_string())?);
    script_botender_prompt(&mut b, p1, &p1_cases(chosen), extra, PIPELINE_SELECTED).map_err(|e| e.to_string())?;
    let rec = Recording::new(b.provider());
    let gw = Gateway::new(rec.clone());
    let engine = ProvocationEngine::new(validation_assets(), EngineConfig::default());
    let put = p1.prompt().map_err(|e| e.to_string())?;
    let task_set = p1.task_set().map_err(|e| e.to_string())?;
    let run = engine.run_pipelines(&put, &task_set, &gw).map_err(|e| e.to_string())?;
    let sel = engine.select_cases(&run.pool, PIPELINE_SELECTED, &gw).map_err(|e| e.to_string())?;
    let key = |c: &botender_core::CaseCandidate| (c.channel.as_str().to_string(), c.user_message.clone());
    let pool_keys: HashSet<_> = run.pool.iter().map(key).collect();
    Ok(Run {
        pool: run.pool.len(),
        kinds: run.pool.iter().filter_map(|c| c.kind()).collect::<HashSet<_>>().len(),
        selected: sel.cases.iter().map(key).collect(),
        all_passed: sel.cases.iter().all(|c| c.evaluation.as_ref().is_some_and(|e| e.label)),
        from_pool: sel.cases.iter().all(|c| pool_keys.contains(&key(c))),
        selector_calls: rec.requests().iter().filter(|r| is_selector(&r.system_prompt)).count(),
    })
}

pub fn pipeline_check() -> Outcome {
    // Five rated cases under the ambiguity pipeline plus three passing
    // narrowness cases: a pool of eight across two kinds.
    let big = run_p1(5, 3)?;
    if big.pool < PIPELINE_MIN_POOL || big.kinds < 2 {
        return Err(format!("pool of {} across {} kinds", big.pool, big.kinds));
    }
    let distinct: HashSet<_> = big.selected.iter().collect();
    if big.selected.len() != PIPELINE_SELECTED || distinct.len() != PIPELINE_SELECTED {
        return Err(format!("selected {} ({} distinct)", big.selected.len(), distinct.len()));
    }
    if !big.all_passed || !big.from_pool || big.selector_calls != 1 {
        return Err(format!(
            "passed={} from_pool={} selector_calls={}",
            big.all_passed, big.from_pool, big.selector_calls
        ));
    }

    for (chosen, extra) in [(5, 0), (4, 0), (3, 1)] {
        let small = run_p1(chosen, extra)?;
        if small.pool > PIPELINE_SELECTED {
            return Err(format!("small pool has {}", small.pool));
        }
        if small.selector_calls != 0 || small.selected.len() != small.pool {
            return Err(format!("pool of {} called the selector {} times", small.pool, small.selector_calls));
        }
    }

    let fixtures = FixtureSet::builtin();
    let p1 = fixtures.get("p1").unwrap();
    let gw = Gateway::scripted(fixture_script().provider());
    let engine = ProvocationEngine::new(validation_assets(), EngineConfig::default());
    let put = p1.prompt().unwrap();
    let task_set = p1.task_set().unwrap();
    let first = engine.botender_report(Some("p1"), &put, &task_set, &gw).to_json_pretty();
    for i in 1..PIPELINE_REPEATS {
        if engine.botender_report(Some("p1"), &put, &task_set, &gw).to_json_pretty() != first {
            return Err(format!("run {i} differs from run 0"));
        }
    }
    Ok(format!(
        "pool {} -> {} distinct passing cases with one selector call; pools of <=5 skip the selector; {PIPELINE_REPEATS} identical reports",
        big.pool, PIPELINE_SELECTED
    ))
}

fn forbidden_keys(v: &Value, found: &mut Vec<String>) {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                if k == "kind" || k.contains("evaluation") || k.contains("selection") {
                    found.push(k.clone());
                }
                forbidden_keys(child, found);
            }
        }
        Value::Array(items) => items.iter().for_each(|i| forbidden_keys(i, found)),
        _ => {}
    }
}

pub fn baseline_check() -> Outcome {
    let start = Instant::now();
    let fixtures = FixtureSet::builtin();
    let gw = Gateway::scripted(fixture_script().provider());
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut docs = 0;
    for mode in [ReportMode::Botender, ReportMode::Baseline] {
        let out = dir.path().join(mode.as_str());
        let summary = run_validation(&fixtures, mode, &gw, EngineConfig::default(), &out, 1).map_err(|e| e.to_string())?;
        if summary.written.len() != BASELINE_PROMPTS || !summary.failed.is_empty() {
            return Err(format!("{mode:?}: wrote {}, failed {:?}", summary.written.len(), summary.failed));
        }
        for path in &summary.written {
            let doc: Value =
                serde_json::from_str(&std::fs::read_to_string(path).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            validate_report(&doc).map_err(|e| format!("{}: {e}", path.display()))?;
            let mut found = Vec::new();
            forbidden_keys(&doc["cases"], &mut found);
            match mode {
                ReportMode::Baseline if !found.is_empty() => {
                    return Err(format!("{} carries {found:?}", path.display()));
                }
                ReportMode::Botender if !found.iter().any(|k| k == "kind") => {
                    return Err(format!("{} lacks kind", path.display()));
                }
                _ => {}
            }
            docs += 1;
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= BASELINE_BUDGET {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("{docs} schema-valid documents, baseline without kind/evaluation/selection, {elapsed:.2?} (< {BASELINE_BUDGET:?})"))
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use axum::body::Bytes;
use axum::http::{HeaderMap, Method as HttpMethod, StatusCode, Uri};
use axum::response::IntoResponse;
use axum::{Json, Router};
use clap::{Parser, Subcommand};
use botender_core::gateway::{Gateway, ProviderConfig, ProviderKind, ScriptedProvider};
use botender_core::harness::{self, FixtureSet, Scenario};
use botender_core::provocation::{EngineConfig, ReportMode};
use botender_core::service::{ApiRequest, Method, Service, ServiceConfig};
use botender_core::store::SystemClock;

#[derive(Debug, Parser)]
#[command(name = "botender", version, about = "Community-governed chat bot toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate case reports for each fixture prompt.
    Validate {
        /// Fixture prompts; defaults to the shipped nine.
        #[arg(long)]
        prompts: Option<PathBuf>,
        #[arg(long, value_parser = parse_mode)]
        mode: ReportMode,
        /// `scripted:<script.json>` or `live`.
        #[arg(long)]
        provider: String,
        #[arg(long)]
        out: PathBuf,
        /// Prompts processed concurrently.
        #[arg(long, default_value_t = 1)]
        parallel: usize,
        /// Worker threads inside the engine.
        #[arg(long, default_value_t = 4)]
        engine_threads: usize,
    },
    /// Side-by-side summary of two report directories.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Play a scenario on the simulated platform.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        provider: String,
        /// Directory for transcript.jsonl and api.jsonl.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 4)]
        engine_threads: usize,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `bind` from the config.
        #[arg(long)]
        bind: Option<String>,
    },
    /// Write the shipped fixtures, their replay script and the demo scenario.
    Fixtures {
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_mode(s: &str) -> Result<ReportMode, String> {
    s.parse()
}

fn gateway_for(spec: &str) -> Result<Gateway> {
    if let Some(path) = spec.strip_prefix("scripted:") {
        let provider = ScriptedProvider::load(Path::new(path)).with_context(|| format!("loading script {path}"))?;
        return Ok(Gateway::new(Arc::new(provider)));
    }
    if spec == "live" {
        let config = ProviderConfig {
            kind: ProviderKind::Live,
            ..ProviderConfig::default()
        };
        return Ok(config.build()?);
    }
    bail!("unknown provider {spec:?} (expected scripted:<file> or live)")
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Validate {
            prompts,
            mode,
            provider,
            out,
            parallel,
            engine_threads,
        } => {
            let fixtures = match prompts {
                Some(path) => FixtureSet::load(&path)?,
                None => FixtureSet::builtin(),
            };
            let gateway = gateway_for(&provider)?;
            let config = EngineConfig {
                parallelism: engine_threads.max(1),
                ..EngineConfig::default()
            };
            let summary = harness::run_validation(&fixtures, mode, &gateway, config, &out, parallel)?;
            println!("wrote {} reports to {}", summary.written.len(), out.display());
            if !summary.failed.is_empty() {
                eprintln!("prompts with errors: {}", summary.failed.join(", "));
                return Ok(ExitCode::FAILURE);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare { a, b, json } => {
            let rows = harness::compare_dirs(&a, &b)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&rows)?);
            } else {
                println!("{:<8} {:>7} {:>7} {:>7}  kinds (a | b)", "prompt", "cases_a", "cases_b", "overlap");
                for r in rows {
                    let kinds = |k: &std::collections::BTreeSet<_>| {
                        k.iter().map(|k: &botender_core::PipelineKind| k.as_str()).collect::<Vec<_>>().join(",")
                    };
                    println!(
                        "{:<8} {:>7} {:>7} {:>7}  {} | {}",
                        r.prompt,
                        r.cases_a,
                        r.cases_b,
                        r.overlap,
                        kinds(&r.kinds_a),
                        kinds(&r.kinds_b)
                    );
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate {
            scenario,
            provider,
            out,
            engine_threads,
        } => {
            let scenario = Scenario::load(&scenario)?;
            let gateway = gateway_for(&provider)?;
            let result = harness::run_scenario(&scenario, gateway, engine_threads)?;
            result.write_to(&out)?;
            for a in &result.anomalies {
                eprintln!("anomaly {}: {}", a.code, a.detail);
            }
            println!(
                "{} transcript entries, {} api calls written to {}",
                result.transcript.len(),
                result.api_log.len(),
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Serve { config, bind } => serve(&config, bind),
        Command::Fixtures { out } => {
            std::fs::create_dir_all(&out)?;
            let write = |name: &str, text: &str| -> Result<()> {
                std::fs::write(out.join(name), text).with_context(|| format!("writing {name}"))
            };
            write("validation_prompts.json", FixtureSet::builtin_json())?;
            write("validation_cases.json", harness::fixture_cases_json())?;
            write("validation_script.json", &harness::fixture_script().to_json())?;
            write("demo_scenario.json", &serde_json::to_string_pretty(&harness::demo_scenario())?)?;
            write("demo_script.json", &harness::demo_script().to_json())?;
            println!("fixtures written to {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn serve(config_path: &Path, bind: Option<String>) -> Result<ExitCode> {
    let mut config = ServiceConfig::load(config_path)?;
    if let Some(bind) = bind {
        config.bind = bind;
    }
    // The live client is blocking, so everything model-facing is built
    // before the runtime starts.
    let gateway = config.provider.build()?;
    let (service, _sim) = Service::from_config(&config, gateway, Arc::new(SystemClock))?;
    let service = Arc::new(service);
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(async move {
        let app = Router::new().fallback(move |method, uri, headers, body| handle(service.clone(), method, uri, headers, body));
        let listener = tokio::net::TcpListener::bind(&config.bind)
            .await
            .with_context(|| format!("binding {}", config.bind))?;
        tracing::info!(bind = %config.bind, "listening");
        axum::serve(listener, app).await?;
        Ok::<_, anyhow::Error>(())
    })?;
    Ok(ExitCode::SUCCESS)
}

fn bearer(headers: &HeaderMap) -> Option<String> {
    let value = headers.get("authorization")?.to_str().ok()?;
    value
        .strip_prefix("Bearer ")
        .or_else(|| value.strip_prefix("bearer "))
        .map(|t| t.trim().to_string())
}

async fn handle(service: Arc<Service>, method: HttpMethod, uri: Uri, headers: HeaderMap, body: Bytes) -> impl IntoResponse {
    let error = |status: StatusCode, code: &str, message: String| {
        (status, Json(serde_json::json!({ "code": code, "message": message })))
    };
    let Ok(method) = method.as_str().parse::<Method>() else {
        return error(StatusCode::METHOD_NOT_ALLOWED, "method_not_allowed", format!("{method} is not supported"));
    };
    let body = if body.is_empty() {
        serde_json::Value::Null
    } else {
        match serde_json::from_slice(&body) {
            Ok(v) => v,
            Err(e) => return error(StatusCode::BAD_REQUEST, "bad_request", e.to_string()),
        }
    };
    let request = ApiRequest {
        method,
        path: uri.path().to_string(),
        token: bearer(&headers),
        body,
    };
    match tokio::task::spawn_blocking(move || service.handle(&request)).await {
        Ok(response) => (
            StatusCode::from_u16(response.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR),
            Json(response.body),
        ),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()),
    }
}

use std::time::Duration;

use anyhow::{Context, Result};
use eamt_core::backend::predictions_to_jsonl;
use eamt_core::{translate_batch, BackendConfig, BackendKind, TranslationRequest};
use serde_json::json;

use super::usage;
use crate::config::Settings;
use crate::manifest::write_output;
use crate::TranslateArgs;

fn backend_kind(name: &str) -> Result<BackendKind> {
    match name {
        "http-chat" | "http_chat" => Ok(BackendKind::HttpChat),
        "replay" | "replay_file" => Ok(BackendKind::ReplayFile),
        "echo" | "stub_echo" => Ok(BackendKind::StubEcho),
        "fixed" | "stub_fixed" => Ok(BackendKind::StubFixed),
        other => usage(format!("unknown backend `{other}` (expected http-chat, replay, echo or fixed)")),
    }
}

fn read_prompts(path: &std::path::Path) -> Result<Vec<TranslationRequest>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| serde_json::from_str(l).with_context(|| format!("{}:{}", path.display(), n + 1)))
        .collect()
}

pub fn run(args: TranslateArgs, settings: &Settings) -> Result<()> {
    let Some(kind) = settings.pick(args.backend.clone(), "backend")? else {
        return usage("--backend is required (flag, EAMT_BACKEND or config file)");
    };
    let mut config = BackendConfig::new(backend_kind(&kind)?);
    config.endpoint = settings.pick(args.endpoint.clone(), "endpoint")?;
    config.model = settings.pick_or(args.model.clone(), "model", String::new())?;
    config.token_env = settings.pick(args.token_env.clone(), "token-env")?;
    config.temperature = settings.pick_or(args.temperature, "temperature", 0.0)?;
    config.max_in_flight = settings.pick_or(args.concurrency, "concurrency", 4)?;
    config.max_retries = settings.pick_or(args.retries, "retries", 3)?;
    let timeout = settings.pick_or(args.timeout, "timeout", 60.0)?;
    if !(timeout.is_finite() && timeout > 0.0) {
        return usage("--timeout must be positive");
    }
    config.timeout = Duration::from_secs_f64(timeout);
    config.replay_path = settings.pick(args.replay.clone(), "replay")?;
    config.fixed_text = settings.pick(args.fixed_text.clone(), "fixed-text")?;
    if let Err(e) = config.validate() {
        return usage(e.to_string());
    }

    let requests = read_prompts(&args.prompts)?;
    let predictions = translate_batch(&requests, &config)?;
    let failed = predictions.iter().filter(|p| p.failed).count();
    if failed > 0 {
        eprintln!("{failed} of {} translations failed", predictions.len());
    }

    let mut inputs = vec![args.prompts.clone()];
    inputs.extend(config.replay_path.clone());
    let manifest_config = json!({
        "backend": format!("{:?}", config.kind),
        "endpoint": config.endpoint,
        "model": config.model,
        "token_env": config.token_env,
        "temperature": config.temperature,
        "concurrency": config.max_in_flight,
        "retries": config.max_retries,
        "timeout_s": timeout,
        "fixed_text": config.fixed_text,
    });
    write_output(
        &args.out,
        predictions_to_jsonl(&predictions).as_bytes(),
        "translate",
        manifest_config,
        &inputs,
    )
}

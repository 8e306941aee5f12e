use std::path::PathBuf;

use anyhow::{Context, Result};
use eamt_core::backend::load_predictions;
use eamt_core::lexicon::load_lexicon;
use eamt_core::metrics::{match_log_tsv, Denominator, ScorerEndpoint};
use eamt_core::pipeline::{score_corpus, QualityMetric, ScoreOptions};
use eamt_core::report::{percent, records_to_jsonl};
use eamt_core::{EntityLexicon, MatchPolicy};
use serde_json::json;

use super::{load_instances, paths_json, usage};
use crate::config::Settings;
use crate::manifest::{emit, write_output};
use crate::ScoreArgs;

fn on_off(key: &str, value: &str) -> Result<bool> {
    match value {
        "on" | "true" | "yes" => Ok(true),
        "off" | "false" | "no" => Ok(false),
        other => usage(format!("policy `{key}`: expected on or off, got `{other}`")),
    }
}

/// `aliases=off,untranslated=on,denominator=instances`
pub(crate) fn parse_policy(spec: &str) -> Result<MatchPolicy> {
    let mut policy = MatchPolicy::default();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let Some((key, value)) = part.split_once('=') else {
            return usage(format!("policy setting `{part}` is not key=value"));
        };
        match key.trim() {
            "aliases" => policy.use_aliases = on_off(key, value.trim())?,
            "untranslated" => policy.untranslated_rule = on_off(key, value.trim())?,
            "denominator" => {
                policy.denominator = match value.trim() {
                    "entities" => Denominator::Entities,
                    "instances" => Denominator::Instances,
                    other => return usage(format!("policy `denominator`: unknown value `{other}`")),
                }
            }
            other => return usage(format!("unknown policy key `{other}`")),
        }
    }
    Ok(policy)
}

pub(crate) fn parse_scorer(spec: &str) -> Result<QualityMetric> {
    if spec.eq_ignore_ascii_case("chrf") {
        return Ok(QualityMetric::Chrf);
    }
    if let Some(cmd) = spec.strip_prefix("subprocess:") {
        let mut words = cmd.split_whitespace().map(str::to_owned);
        let Some(program) = words.next() else {
            return usage("--scorer subprocess: needs a command");
        };
        return Ok(QualityMetric::External(ScorerEndpoint::Subprocess {
            program,
            args: words.collect(),
        }));
    }
    if let Some(addr) = spec.strip_prefix("tcp:") {
        if addr.is_empty() {
            return usage("--scorer tcp: needs host:port");
        }
        return Ok(QualityMetric::External(ScorerEndpoint::Tcp(addr.to_owned())));
    }
    usage(format!("unknown scorer `{spec}` (expected chrf, subprocess:<cmd> or tcp:<host:port>)"))
}

pub fn run(args: ScoreArgs, settings: &Settings) -> Result<()> {
    let policy = parse_policy(&settings.pick_or(args.policy.clone(), "policy", String::new())?)?;
    let scorer_spec = settings.pick_or(args.scorer.clone(), "scorer", "chrf".to_owned())?;
    let quality = parse_scorer(&scorer_spec)?;

    let predictions = load_predictions(&args.predictions)
        .with_context(|| format!("reading {}", args.predictions.display()))?;
    let instances = load_instances(&args.data, None)?;
    let lexicon = match &args.lexicon {
        Some(p) => load_lexicon(p).with_context(|| format!("reading {}", p.display()))?,
        None => EntityLexicon::new(),
    };
    let opts = ScoreOptions { method: args.method.clone(), policy, quality };
    let scores = score_corpus(&predictions, &instances, &lexicon, &opts)?;

    for s in &scores {
        let t = &s.record.triple;
        eprintln!(
            "{} {}: M-ETA {} {} {} overall {} ({} instances, {} entities)",
            s.record.method,
            s.record.locale,
            percent(t.m_eta),
            t.quality_metric_id,
            percent(t.quality),
            percent(t.overall),
            t.n_instances,
            t.n_entities
        );
        if !s.quality_errors.is_empty() {
            eprintln!("  {} instance(s) had no quality score", s.quality_errors.len());
        }
    }

    let mut inputs: Vec<PathBuf> = vec![args.predictions.clone()];
    inputs.extend(args.data.iter().cloned());
    inputs.extend(args.lexicon.iter().cloned());
    let config = json!({
        "method": args.method,
        "policy": policy,
        "scorer": scorer_spec,
        "inputs": paths_json(&inputs),
    });
    if let Some(log_path) = &args.match_log {
        let log: Vec<_> = scores.iter().flat_map(|s| s.meta.log.iter().cloned()).collect();
        write_output(log_path, match_log_tsv(&log).as_bytes(), "score match-log", config.clone(), &inputs)?;
    }
    let records: Vec<_> = scores.into_iter().map(|s| s.record).collect();
    emit(args.out.as_deref(), &records_to_jsonl(&records), "score", config, &inputs)
}

use std::collections::BTreeSet;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use eamt_core::lexicon::wikidata::{
    default_user_agent, EntityFetcher, FixtureWikidataClient, HttpWikidataClient, WikidataClientConfig,
    DEFAULT_ENDPOINT,
};
use eamt_core::lexicon::{harvest, save_lexicon, to_lexicon_jsonl, HarvestError, HarvestOptions};
use eamt_core::locale::TARGET_LOCALES;
use eamt_core::retry::RetryPolicy;
use eamt_core::Qid;
use serde_json::json;
use tracing::{info, warn};

use super::{load_instances, parse_locales, paths_json, usage};
use crate::config::Settings;
use crate::manifest::write_output;
use crate::HarvestArgs;

fn read_qids(args: &HarvestArgs) -> Result<Vec<Qid>> {
    let mut qids = BTreeSet::new();
    for inst in load_instances(&args.data, None)? {
        qids.extend(inst.entity_ids);
    }
    if let Some(path) = &args.qids {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let qid: Qid = line
                .parse()
                .with_context(|| format!("{}:{}: invalid QID", path.display(), n + 1))?;
            qids.insert(qid);
        }
    }
    Ok(qids.into_iter().collect())
}

pub fn run(args: HarvestArgs, settings: &Settings) -> Result<()> {
    if args.data.is_empty() && args.qids.is_none() {
        return usage("harvest needs --data or --qids");
    }
    let mut default_langs = vec!["en"];
    default_langs.extend(TARGET_LOCALES);
    let languages = parse_locales(&args.languages, &default_langs)?;
    let qids = read_qids(&args)?;
    if qids.is_empty() {
        bail!("no entity ids to harvest");
    }

    let batch_size = settings.pick_or(args.batch_size, "batch-size", 50)?;
    let concurrency = settings.pick_or(args.concurrency, "concurrency", 4)?;
    let labels_only = settings.flag(args.labels_only, "labels-only")?;
    let timestamp = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|s| s.trim().parse().ok());
    let opts = HarvestOptions {
        batch_size,
        max_in_flight: concurrency,
        include_aliases: !labels_only,
        timestamp,
    };

    let mut config = json!({
        "languages": languages,
        "batch_size": batch_size,
        "concurrency": concurrency,
        "labels_only": labels_only,
    });
    let mut inputs = args.data.clone();
    inputs.extend(args.qids.clone());

    let fetcher: Box<dyn EntityFetcher> = match settings.pick(args.offline_fixtures.clone(), "offline-fixtures")? {
        Some(dir) => {
            config["offline_fixtures"] = json!(dir.display().to_string());
            inputs.push(dir.clone());
            Box::new(FixtureWikidataClient::open(&dir)?)
        }
        None => {
            let endpoint = settings.pick_or(args.endpoint.clone(), "endpoint", DEFAULT_ENDPOINT.to_owned())?;
            let rate = settings.pick_or(args.rate_limit, "rate-limit", 5.0)?;
            if !(rate.is_finite() && rate > 0.0) {
                return usage("--rate-limit must be positive");
            }
            let retries = settings.pick_or(args.retries, "retries", 3)?;
            let timeout = settings.pick_or(args.timeout, "timeout", 30.0)?;
            if !(timeout.is_finite() && timeout > 0.0) {
                return usage("--timeout must be positive");
            }
            config["endpoint"] = json!(endpoint);
            config["rate_limit"] = json!(rate);
            config["retries"] = json!(retries);
            Box::new(HttpWikidataClient::new(WikidataClientConfig {
                endpoint,
                requests_per_second: rate,
                timeout: Duration::from_secs_f64(timeout),
                retry: RetryPolicy { max_retries: retries, ..RetryPolicy::default() },
                user_agent: default_user_agent(),
            })?)
        }
    };

    info!(entities = qids.len(), languages = languages.len(), "harvesting");
    match harvest(&qids, &languages, fetcher.as_ref(), &opts) {
        Ok(lexicon) => {
            config["inputs"] = paths_json(&inputs);
            write_output(&args.out, to_lexicon_jsonl(&lexicon).as_bytes(), "harvest", config, &inputs)?;
            eprintln!("{} entities written to {}", lexicon.len(), args.out.display());
            Ok(())
        }
        Err(HarvestError::Incomplete { partial, unfetched, first_error }) => {
            let mut partial_path = args.out.clone().into_os_string();
            partial_path.push(".partial");
            save_lexicon(&partial, &partial_path)?;
            warn!(path = %partial_path.to_string_lossy(), "saved the partial lexicon");
            bail!("{} of {} entities could not be fetched: {first_error}", unfetched.len(), qids.len())
        }
        Err(e) => usage(e.to_string()),
    }
}

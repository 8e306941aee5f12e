use std::collections::BTreeSet;

use anyhow::{Context, Result};
use eamt_core::dataset::{split_stats as compute_split_stats, thousands};
use eamt_core::lexicon::{entity_type_stats, load_lexicon, read_mentions};
use eamt_core::locale::TARGET_LOCALES;
use serde_json::json;

use super::{data_dir_files, infer_split, load_data_dir, parse_locales, usage};
use crate::manifest::emit;
use crate::{EntityStatsArgs, SplitStatsArgs, ValidateArgs};

pub fn validate(args: ValidateArgs) -> Result<()> {
    let mut files = Vec::new();
    if let Some(dir) = &args.data_dir {
        files.extend(data_dir_files(dir)?.into_iter().map(|(kind, _, p)| (kind, p)));
    }
    for path in &args.files {
        files.push((infer_split(path, args.split.as_deref())?, path.clone()));
    }
    for (kind, path) in files {
        let instances = eamt_core::load_split(&path, kind).with_context(|| format!("invalid dataset {}", path.display()))?;
        let entities: usize = instances.iter().map(|i| i.entity_ids.len()).sum();
        let locales: BTreeSet<&str> = instances.iter().map(|i| i.target_locale.as_str()).collect();
        println!(
            "{}: {} instances, {} entities, split {}, target {}",
            path.display(),
            instances.len(),
            thousands(entities),
            kind.as_str(),
            locales.into_iter().collect::<Vec<_>>().join(",")
        );
    }
    Ok(())
}

fn check_format(format: &str) -> Result<()> {
    match format {
        "markdown" | "md" | "csv" => Ok(()),
        other => usage(format!("unknown table format `{other}` (expected markdown or csv)")),
    }
}

pub fn split_stats(args: SplitStatsArgs) -> Result<()> {
    check_format(&args.format)?;
    let splits = load_data_dir(&args.data_dir)?;
    let stats = compute_split_stats(&splits);
    let text = if args.format == "csv" { stats.to_csv() } else { stats.to_markdown() };
    emit(
        args.out.as_deref(),
        &text,
        "stats splits",
        json!({"format": args.format}),
        std::slice::from_ref(&args.data_dir),
    )
}

pub fn entity_stats(args: EntityStatsArgs) -> Result<()> {
    check_format(&args.format)?;
    let languages = parse_locales(&args.languages, &TARGET_LOCALES)?;
    let mentions = read_mentions(&args.mentions).with_context(|| format!("reading {}", args.mentions.display()))?;
    let lexicon = load_lexicon(&args.lexicon).with_context(|| format!("reading {}", args.lexicon.display()))?;
    let stats = entity_type_stats(&mentions, &lexicon, &languages);
    let text = if args.format == "csv" { stats.to_csv() } else { stats.to_markdown() };
    emit(
        args.out.as_deref(),
        &text,
        "stats entities",
        json!({"format": args.format, "languages": languages}),
        &[args.mentions.clone(), args.lexicon.clone()],
    )
}

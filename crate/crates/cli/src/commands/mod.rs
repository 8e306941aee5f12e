use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use eamt_core::dataset::{SplitKind, SplitsByLocale};
use eamt_core::{load_split, Instance, Locale};

use crate::config::Settings;
use crate::{Cli, Command, StatsCommand};

mod data;
mod harvest;
mod prompts;
mod report;
mod score;
mod translate;

/// An invalid argument value detected after parsing; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(UsageError(msg.into()).into())
}

pub fn run(cli: Cli) -> Result<()> {
    let section = match &cli.command {
        Command::ValidateData(_) => "validate-data",
        Command::Stats(_) => "stats",
        Command::Harvest(_) => "harvest",
        Command::RenderPrompts(_) => "render-prompts",
        Command::Translate(_) => "translate",
        Command::Score(_) => "score",
        Command::Report(_) => "report",
    };
    let settings = Settings::load(cli.config.as_deref(), section)?;
    match cli.command {
        Command::ValidateData(a) => data::validate(a),
        Command::Stats(StatsCommand::Splits(a)) => data::split_stats(a),
        Command::Stats(StatsCommand::Entities(a)) => data::entity_stats(a),
        Command::Harvest(a) => harvest::run(a, &settings),
        Command::RenderPrompts(a) => prompts::run(a),
        Command::Translate(a) => translate::run(a, &settings),
        Command::Score(a) => score::run(a, &settings),
        Command::Report(a) => report::run(a, &settings),
    }
}

/// The split named by `explicit`, else the first path component (parent
/// directory or file stem) that names one, else `test`.
pub(crate) fn infer_split(path: &Path, explicit: Option<&str>) -> Result<SplitKind> {
    if let Some(s) = explicit {
        return s.parse().or_else(|e: String| usage(e));
    }
    let parent = path.parent().and_then(Path::file_name).and_then(|s| s.to_str());
    let stem = path.file_stem().and_then(|s| s.to_str());
    Ok([parent, stem]
        .into_iter()
        .flatten()
        .find_map(|s| s.parse().ok())
        .unwrap_or(SplitKind::Test))
}

/// Loads dataset files, rejecting ids repeated across files.
pub(crate) fn load_instances(paths: &[PathBuf], split: Option<&str>) -> Result<Vec<Instance>> {
    let mut all = Vec::new();
    let mut seen = HashSet::new();
    for path in paths {
        let kind = infer_split(path, split)?;
        let instances = load_split(path, kind).with_context(|| format!("loading {}", path.display()))?;
        for inst in &instances {
            if !seen.insert(inst.id.clone()) {
                bail!("{}: instance id `{}` also appears in an earlier file", path.display(), inst.id);
            }
        }
        all.extend(instances);
    }
    Ok(all)
}

/// Dataset files under `dir/<split>/<locale>.jsonl`, sorted.
pub(crate) fn data_dir_files(dir: &Path) -> Result<Vec<(SplitKind, Locale, PathBuf)>> {
    if !dir.is_dir() {
        bail!("{} is not a directory", dir.display());
    }
    let mut out = Vec::new();
    for kind in [SplitKind::Train, SplitKind::Validation, SplitKind::Test] {
        let sub = dir.join(kind.as_str());
        if !sub.is_dir() {
            continue;
        }
        let mut files: Vec<PathBuf> = fs::read_dir(&sub)
            .with_context(|| format!("listing {}", sub.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        files.sort();
        for f in files {
            let stem = f.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
            let locale: Locale = stem
                .parse()
                .with_context(|| format!("{}: file name must be a locale code", f.display()))?;
            out.push((kind, locale, f));
        }
    }
    Ok(out)
}

pub(crate) fn load_data_dir(dir: &Path) -> Result<SplitsByLocale> {
    let mut splits: SplitsByLocale = BTreeMap::new();
    for (kind, locale, path) in data_dir_files(dir)? {
        let instances = load_split(&path, kind).with_context(|| format!("loading {}", path.display()))?;
        if let Some(bad) = instances.iter().find(|i| i.target_locale != locale) {
            bail!(
                "{}: instance `{}` targets {} but the file is for {}",
                path.display(),
                bad.id,
                bad.target_locale,
                locale
            );
        }
        splits.entry(locale).or_default().insert(kind, instances);
    }
    Ok(splits)
}

pub(crate) fn parse_locales(codes: &[String], default: &[&str]) -> Result<Vec<Locale>> {
    let codes: Vec<&str> = if codes.is_empty() {
        default.to_vec()
    } else {
        codes.iter().map(String::as_str).collect()
    };
    codes
        .into_iter()
        .map(|c| c.trim().parse::<Locale>().or_else(|e| usage(e.to_string())))
        .collect()
}

pub(crate) fn paths_json(paths: &[PathBuf]) -> serde_json::Value {
    paths.iter().map(|p| p.display().to_string()).collect()
}

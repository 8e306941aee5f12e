use anyhow::{Context, Result};
use eamt_core::report::load_records;
use eamt_core::{build_report, ReportFormat};
use serde_json::json;

use super::{paths_json, usage};
use crate::config::Settings;
use crate::manifest::emit;
use crate::ReportArgs;

pub fn run(args: ReportArgs, settings: &Settings) -> Result<()> {
    let format_name = settings.pick_or(args.format.clone(), "format", "markdown".to_owned())?;
    let format: ReportFormat = match format_name.parse() {
        Ok(f) => f,
        Err(e) => return usage(e),
    };
    let mut records = Vec::new();
    for path in &args.scores {
        records.extend(load_records(path).with_context(|| format!("reading {}", path.display()))?);
    }
    let matrix = build_report(records.into_iter().map(|r| (r.method, r.locale, r.triple)))?
        .with_method_order(&args.methods);
    let text = matrix.render(format);
    let config = json!({
        "format": format_name,
        "methods": args.methods,
        "inputs": paths_json(&args.scores),
    });
    emit(args.out.as_deref(), &text, "report", config, &args.scores)
}

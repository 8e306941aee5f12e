use std::collections::BTreeMap;

use anyhow::{Context, Result};
use eamt_core::lexicon::load_lexicon;
use eamt_core::prompt::{build_ne_hints, render, select_examples, HintMode, PromptSpec, Selection, Template, MAX_EXAMPLES};
use eamt_core::{EntityLexicon, Locale, TranslationRequest};
use serde_json::json;

use super::{load_instances, paths_json, usage};
use crate::manifest::emit;
use crate::RenderArgs;

fn template(name: &str) -> Result<Template> {
    match name {
        "t1" | "t1_fewshot_ne" | "few-shot" => Ok(Template::FewShotNe),
        "t2" | "t2_zeroshot" | "zero-shot" => Ok(Template::ZeroShot),
        other => usage(format!("unknown template `{other}` (expected t1 or t2)")),
    }
}

pub fn run(args: RenderArgs) -> Result<()> {
    let template = template(&args.template)?;
    let hint_mode = match args.hint_mode.as_str() {
        "qid" => HintMode::Qid,
        "name" | "translated_name" => HintMode::TranslatedName,
        other => return usage(format!("unknown hint mode `{other}` (expected qid or name)")),
    };
    if args.k > MAX_EXAMPLES {
        return usage(format!("--k must be at most {MAX_EXAMPLES}"));
    }
    let selection = if args.first_k { Selection::FirstK } else { Selection::Seeded };
    let instances = load_instances(&args.data, None)?;
    let few_shot = template == Template::FewShotNe;
    let train = if few_shot { load_instances(&args.train, Some("train"))? } else { Vec::new() };
    let lexicon = match (&args.lexicon, few_shot && !args.no_hints) {
        (Some(path), true) => load_lexicon(path).with_context(|| format!("reading {}", path.display()))?,
        _ => EntityLexicon::new(),
    };

    // One example set per target locale, shared by all its prompts.
    let mut examples: BTreeMap<Locale, _> = BTreeMap::new();
    let mut out = String::new();
    for inst in &instances {
        let Some(language) = inst.target_locale.english_name() else {
            anyhow::bail!("instance `{}`: no language name for locale {}", inst.id, inst.target_locale);
        };
        let spec = if few_shot {
            let ex = examples
                .entry(inst.target_locale.clone())
                .or_insert_with(|| select_examples(&train, &inst.target_locale, args.k, args.seed, selection))
                .clone();
            let hints = if args.no_hints { Vec::new() } else { build_ne_hints(inst, &lexicon, hint_mode) };
            PromptSpec {
                template,
                sentence: inst.source_text.clone(),
                target_language_name: language.to_owned(),
                ne_hints: hints,
                examples: ex,
            }
        } else {
            PromptSpec {
                template,
                sentence: inst.source_text.clone(),
                target_language_name: language.to_owned(),
                ne_hints: Vec::new(),
                examples: Vec::new(),
            }
        };
        let rendered = render(&spec).with_context(|| format!("instance `{}`", inst.id))?;
        let line = TranslationRequest { id: inst.id.clone(), prompt: rendered.text };
        out.push_str(&serde_json::to_string(&line)?);
        out.push('\n');
    }

    let mut inputs = args.data.clone();
    if few_shot {
        inputs.extend(args.train.iter().cloned());
        if !args.no_hints {
            inputs.extend(args.lexicon.iter().cloned());
        }
    }
    let config = json!({
        "template": spec_name(template),
        "hint_mode": hint_mode.to_string(),
        "hints": few_shot && !args.no_hints,
        "k": args.k,
        "seed": args.seed,
        "selection": if args.first_k { "first_k" } else { "seeded" },
        "inputs": paths_json(&inputs),
    });
    emit(args.out.as_deref(), &out, "render-prompts", config, &inputs)
}

fn spec_name(t: Template) -> &'static str {
    match t {
        Template::FewShotNe => "t1_fewshot_ne",
        Template::ZeroShot => "t2_zeroshot",
    }
}

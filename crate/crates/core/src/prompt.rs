//! Prompt templates for LLM translation backends.
//!
//! Two templates are supported: a few-shot template with a named-entity block
//! and an examples block, and a zero-shot template. Slot contents are rendered
//! as follows:
//!
//! * `{ne}`: one hint per line, `source ⇒ target` (target is a QID in
//!   [`HintMode::Qid`]).
//! * `{examples}`: `english: <source>` / `<language>: <target>` line pairs,
//!   separated by one blank line.
//!
//! Substitution is single-pass: braces inside substituted values are left alone.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::Instance;
use crate::lexicon::{EntityLexicon, Lookup};
use crate::locale::Locale;

pub const MAX_EXAMPLES: usize = 10;

/// Marker preceding the sentence on the last line of both templates.
pub const SENTENCE_MARKER: &str = "translation of the following english text: ";

const TEMPLATE_FEW_SHOT: &str = "Instruction:
    Translate the following text from english to {tgt}, ensuring that all
    named-entities are accurately translated with no additional explanations. Use
    the provided translation examples and translated named-entities (if provided)
    for consistency. Do not send the English text back in the response, generate
    only the translation and nothing more.
    Named entities:
    {ne}
    Examples:
    {examples}
    Now generate the {tgt} translation of the following english text: {sentence}";

const TEMPLATE_ZERO_SHOT: &str = "Instruction:
    Translate the following text from english to {tgt}, ensuring that all named-
    entities are accurately translated with no additional explanations. Do not send
    the English text back in the response, generate only the translation and nothing
    more.
    Now generate the {tgt} translation of the following english text: {sentence}";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Template {
    /// Few-shot with named-entity hints.
    #[serde(rename = "t1_fewshot_ne")]
    FewShotNe,
    #[serde(rename = "t2_zeroshot")]
    ZeroShot,
}

impl Template {
    pub fn source(self) -> &'static str {
        match self {
            Template::FewShotNe => TEMPLATE_FEW_SHOT,
            Template::ZeroShot => TEMPLATE_ZERO_SHOT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeHint {
    pub source: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExamplePair {
    pub source: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSpec {
    pub template: Template,
    pub sentence: String,
    /// Lowercase English language name, e.g. "french".
    pub target_language_name: String,
    #[serde(default)]
    pub ne_hints: Vec<NeHint>,
    #[serde(default)]
    pub examples: Vec<ExamplePair>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RenderedPrompt {
    pub text: String,
    /// Hex SHA-256 of the spec's canonical JSON.
    pub spec_digest: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("the zero-shot template takes no {0}")]
    UnexpectedField(&'static str),
    #[error("at most {MAX_EXAMPLES} examples are allowed, got {0}")]
    TooManyExamples(usize),
    #[error("target language name is empty")]
    MissingLanguage,
}

impl PromptSpec {
    pub fn validate(&self) -> Result<(), PromptError> {
        if self.target_language_name.trim().is_empty() {
            return Err(PromptError::MissingLanguage);
        }
        if self.template == Template::ZeroShot {
            if !self.ne_hints.is_empty() {
                return Err(PromptError::UnexpectedField("named-entity hints"));
            }
            if !self.examples.is_empty() {
                return Err(PromptError::UnexpectedField("examples"));
            }
        }
        if self.examples.len() > MAX_EXAMPLES {
            return Err(PromptError::TooManyExamples(self.examples.len()));
        }
        Ok(())
    }

    pub fn digest(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("spec serializes");
        hex::encode(Sha256::digest(&canonical))
    }
}

fn ne_block(hints: &[NeHint]) -> String {
    hints
        .iter()
        .map(|h| format!("{} ⇒ {}", h.source, h.target))
        .collect::<Vec<_>>()
        .join("\n")
}

fn examples_block(examples: &[ExamplePair], language: &str) -> String {
    examples
        .iter()
        .map(|e| format!("english: {}\n{language}: {}", e.source, e.target))
        .collect::<Vec<_>>()
        .join("\n\n")
}

fn substitute(template: &str, lookup: impl Fn(&str) -> Option<String>) -> String {
    let mut out = String::with_capacity(template.len() * 2);
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        match after.find('}').and_then(|close| lookup(&after[..close]).map(|v| (close, v))) {
            Some((close, value)) => {
                out.push_str(&value);
                rest = &after[close + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

fn to_lf(s: &str) -> String {
    s.replace("\r\n", "\n").replace('\r', "\n")
}

pub fn render(spec: &PromptSpec) -> Result<RenderedPrompt, PromptError> {
    spec.validate()?;
    let tgt = spec.target_language_name.as_str();
    let text = substitute(spec.template.source(), |name| match name {
        "tgt" => Some(tgt.to_owned()),
        "sentence" => Some(spec.sentence.clone()),
        "ne" => Some(ne_block(&spec.ne_hints)),
        "examples" => Some(examples_block(&spec.examples, tgt)),
        _ => None,
    });
    Ok(RenderedPrompt {
        text: to_lf(&text),
        spec_digest: spec.digest(),
    })
}

/// Recovers the sentence from a rendered prompt: the text after the last
/// occurrence of [`SENTENCE_MARKER`], or the whole input when absent.
pub fn extract_sentence(prompt: &str) -> &str {
    prompt
        .rfind(SENTENCE_MARKER)
        .map_or(prompt, |i| &prompt[i + SENTENCE_MARKER.len()..])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Uniform sampling without replacement from a seeded generator.
    #[default]
    Seeded,
    /// The first `k` pairs in file order.
    FirstK,
}

/// Picks up to `k` distinct (source, reference) pairs from training instances
/// for `target_locale`. Chosen pairs keep their file order.
pub fn select_examples(
    train: &[Instance],
    target_locale: &Locale,
    k: usize,
    seed: u64,
    selection: Selection,
) -> Vec<ExamplePair> {
    let mut seen = std::collections::HashSet::new();
    let pool: Vec<ExamplePair> = train
        .iter()
        .filter(|i| &i.target_locale == target_locale)
        .filter_map(|i| {
            i.gold_targets.first().map(|t| ExamplePair {
                source: i.source_text.clone(),
                target: t.translation.clone(),
            })
        })
        .filter(|p| seen.insert(p.clone()))
        .collect();
    let k = k.min(pool.len());
    match selection {
        Selection::FirstK => pool.into_iter().take(k).collect(),
        Selection::Seeded => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut picked = rand::seq::index::sample(&mut rng, pool.len(), k).into_vec();
            picked.sort_unstable();
            picked.into_iter().map(|i| pool[i].clone()).collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HintMode {
    /// Hint target is the Wikidata id.
    #[default]
    Qid,
    /// Hint target is the entity's name in the target language.
    TranslatedName,
}

impl fmt::Display for HintMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HintMode::Qid => "qid",
            HintMode::TranslatedName => "translated_name",
        })
    }
}

/// One hint per entity id. The hint source is the entity's name in the
/// instance's source language when the lexicon has one, else the QID. In
/// [`HintMode::TranslatedName`], entities without a target-language name are
/// skipped.
pub fn build_ne_hints(instance: &Instance, lexicon: &EntityLexicon, mode: HintMode) -> Vec<NeHint> {
    instance
        .entity_ids
        .iter()
        .filter_map(|qid| {
            let source = match lexicon.lookup(qid, &instance.source_locale) {
                Lookup::Names(n) => n.preferred().map(str::to_owned),
                Lookup::NotFetched => None,
            }
            .unwrap_or_else(|| qid.to_string());
            let target = match mode {
                HintMode::Qid => qid.to_string(),
                HintMode::TranslatedName => lexicon
                    .lookup(qid, &instance.target_locale)
                    .names()?
                    .preferred()?
                    .to_owned(),
            };
            Some(NeHint { source, target })
        })
        .collect()
}

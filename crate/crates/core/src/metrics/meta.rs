use std::collections::HashMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::{Denominator, MatchPolicy, MetricError};
use crate::backend::Prediction;
use crate::dataset::Instance;
use crate::lexicon::EntityLexicon;
use crate::qid::Qid;
use crate::text::normalize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchLogEntry {
    pub instance_id: String,
    pub entity_id: Qid,
    /// The gold name found in the hypothesis, if any.
    pub matched: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetaScore {
    pub score: f64,
    /// Numerator and denominator in the policy's unit (entities or instances).
    pub correct: usize,
    pub total: usize,
    pub n_instances: usize,
    pub n_entities: usize,
    pub log: Vec<MatchLogEntry>,
}

/// Entity translation accuracy.
///
/// An entity is correct when any of its gold names occurs in the normalized
/// hypothesis. Gold names are the instance's reference mentions, plus the
/// lexicon's names in the target language when `use_aliases` is set. Names
/// that normalize to the empty string are ignored. Failed predictions, and
/// (under the untranslated rule) hypotheses equal to the source, match nothing.
///
/// Predictions for ids not in `instances` are ignored.
pub fn m_eta(
    predictions: &[Prediction],
    instances: &[Instance],
    lexicon: &EntityLexicon,
    policy: &MatchPolicy,
) -> Result<MetaScore, MetricError> {
    let by_id: HashMap<&str, &Prediction> = predictions
        .iter()
        .map(|p| (p.instance_id.as_str(), p))
        .collect();
    let missing: Vec<String> = instances
        .iter()
        .filter(|i| !by_id.contains_key(i.id.as_str()))
        .map(|i| i.id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(MetricError::MissingPredictions(missing));
    }

    let mut log = Vec::new();
    let (mut correct_entities, mut n_entities) = (0usize, 0usize);
    let (mut correct_instances, mut scored_instances) = (0usize, 0usize);
    for inst in instances {
        if inst.entity_ids.is_empty() {
            continue;
        }
        let pred = by_id[inst.id.as_str()];
        let hypothesis = normalize(&pred.hypothesis);
        let untranslated = policy.untranslated_rule && hypothesis == normalize(&inst.source_text);
        let credit = !pred.failed && !untranslated;

        let mut all_matched = true;
        for qid in &inst.entity_ids {
            let matched = if credit {
                gold_names(inst, qid, lexicon, policy)
                    .find(|name| {
                        let key = normalize(name);
                        !key.is_empty() && hypothesis.contains(&key)
                    })
                    .map(str::to_owned)
            } else {
                None
            };
            n_entities += 1;
            if matched.is_some() {
                correct_entities += 1;
            } else {
                all_matched = false;
            }
            log.push(MatchLogEntry {
                instance_id: inst.id.clone(),
                entity_id: qid.clone(),
                matched,
            });
        }
        scored_instances += 1;
        if all_matched {
            correct_instances += 1;
        }
    }
    if n_entities == 0 {
        return Err(MetricError::NoEntities);
    }
    let (correct, total) = match policy.denominator {
        Denominator::Entities => (correct_entities, n_entities),
        Denominator::Instances => (correct_instances, scored_instances),
    };
    Ok(MetaScore {
        score: correct as f64 / total as f64,
        correct,
        total,
        n_instances: instances.len(),
        n_entities,
        log,
    })
}

fn gold_names<'a>(
    inst: &'a Instance,
    qid: &'a Qid,
    lexicon: &'a EntityLexicon,
    policy: &MatchPolicy,
) -> impl Iterator<Item = &'a str> {
    let lexicon_names = policy
        .use_aliases
        .then(|| lexicon.lookup(qid, &inst.target_locale).names())
        .flatten()
        .into_iter()
        .flat_map(|n| n.names());
    inst.gold_mentions().chain(lexicon_names)
}

/// `instance_id<TAB>entity_id<TAB>matched name or "-"`, one row per entity.
pub fn match_log_tsv(log: &[MatchLogEntry]) -> String {
    let mut out = String::from("instance_id\tentity_id\tmatched\n");
    for e in log {
        let matched = e
            .matched
            .as_deref()
            .map(|m| m.replace(['\t', '\n', '\r'], " "))
            .unwrap_or_else(|| "-".to_owned());
        let _ = writeln!(out, "{}\t{}\t{}", e.instance_id, e.entity_id, matched);
    }
    out
}

//! Corpus scoring: entity accuracy and quality per target locale.

use std::collections::{BTreeMap, HashMap};

use tracing::warn;

use crate::backend::Prediction;
use crate::dataset::Instance;
use crate::lexicon::EntityLexicon;
use crate::locale::Locale;
use crate::metrics::{
    chrf, external_score, m_eta, MatchPolicy, MetaScore, MetricError, ScoreRequest, ScoreTriple, ScorerEndpoint,
    ScorerError,
};
use crate::report::ScoreRecord;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QualityMetric {
    /// Built-in sentence chrF, best over references, averaged over instances.
    Chrf,
    /// Reference-based scores from an `eamt-scorer/1` process, averaged over
    /// instances; scored against the first reference.
    External(ScorerEndpoint),
}

#[derive(Debug, Clone)]
pub struct ScoreOptions {
    pub method: String,
    pub policy: MatchPolicy,
    pub quality: QualityMetric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocaleScore {
    pub record: ScoreRecord,
    pub meta: MetaScore,
    /// Instances whose external quality score failed, with the reason; they
    /// are left out of the quality mean.
    pub quality_errors: Vec<(String, String)>,
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Scorer(#[from] ScorerError),
    #[error("locale {0}: every quality score failed")]
    NoQuality(Locale),
}

/// Scores each target locale present in `instances`, in locale order.
pub fn score_corpus(
    predictions: &[Prediction],
    instances: &[Instance],
    lexicon: &EntityLexicon,
    opts: &ScoreOptions,
) -> Result<Vec<LocaleScore>, PipelineError> {
    let mut by_locale: BTreeMap<&Locale, Vec<Instance>> = BTreeMap::new();
    for inst in instances {
        by_locale.entry(&inst.target_locale).or_default().push(inst.clone());
    }
    let preds: HashMap<&str, &Prediction> = predictions.iter().map(|p| (p.instance_id.as_str(), p)).collect();

    let mut out = Vec::with_capacity(by_locale.len());
    for (locale, group) in by_locale {
        let meta = m_eta(predictions, &group, lexicon, &opts.policy)?;
        let (quality, metric_id, quality_errors) = quality(&group, &preds, &opts.quality)?;
        let Some(quality) = quality else {
            return Err(PipelineError::NoQuality(locale.clone()));
        };
        let triple = ScoreTriple::new(meta.score, quality, group.len(), meta.n_entities, metric_id)?;
        out.push(LocaleScore {
            record: ScoreRecord {
                method: opts.method.clone(),
                locale: locale.clone(),
                triple,
                policy: Some(opts.policy),
            },
            meta,
            quality_errors,
        });
    }
    Ok(out)
}

type QualityResult = (Option<f64>, String, Vec<(String, String)>);

fn quality(
    group: &[Instance],
    preds: &HashMap<&str, &Prediction>,
    metric: &QualityMetric,
) -> Result<QualityResult, PipelineError> {
    if let Some(inst) = group.iter().find(|i| i.gold_targets.is_empty()) {
        return Err(MetricError::NoReference(inst.id.clone()).into());
    }
    match metric {
        QualityMetric::Chrf => {
            let total: f64 = group
                .iter()
                .map(|inst| {
                    let p = preds[inst.id.as_str()];
                    if p.failed {
                        return 0.0;
                    }
                    inst.gold_targets
                        .iter()
                        .map(|t| chrf(&p.hypothesis, &t.translation))
                        .fold(0.0, f64::max)
                })
                .sum();
            Ok((Some(total / group.len() as f64), "chrF".to_owned(), Vec::new()))
        }
        QualityMetric::External(endpoint) => {
            let batch: Vec<ScoreRequest> = group
                .iter()
                .filter(|i| !preds[i.id.as_str()].failed)
                .map(|i| ScoreRequest {
                    id: i.id.clone(),
                    src: i.source_text.clone(),
                    mt: preds[i.id.as_str()].hypothesis.clone(),
                    reference: i.gold_targets[0].translation.clone(),
                })
                .collect();
            let scores = external_score(&batch, endpoint)?;
            let mut total = 0.0;
            let mut counted = 0usize;
            let mut errors = Vec::new();
            for inst in group {
                match scores.scores.get(&inst.id) {
                    Some(Ok(s)) => {
                        total += s;
                        counted += 1;
                    }
                    Some(Err(e)) => {
                        warn!(id = %inst.id, error = %e, "quality score failed");
                        errors.push((inst.id.clone(), e.clone()));
                    }
                    // failed translation
                    None => counted += 1,
                }
            }
            let metric_id = if scores.metric.is_empty() { "external".to_owned() } else { scores.metric };
            Ok(((counted > 0).then(|| total / counted as f64), metric_id, errors))
        }
    }
}

//! Entity accuracy (M-ETA), translation quality, and their combination.

mod chrf;
mod meta;
mod overall;
pub mod scorer;

use serde::{Deserialize, Serialize};

pub use chrf::{chrf, chrf_with, corpus_chrf, DEFAULT_BETA, DEFAULT_MAX_CHAR_N};
pub use meta::{m_eta, match_log_tsv, MatchLogEntry, MetaScore};
pub use overall::{overall, OVERALL_TOLERANCE};
pub use scorer::{external_score, ExternalScores, ScoreRequest, ScorerEndpoint, ScorerError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("no prediction for {} instance(s): {}", .0.len(), .0.join(", "))]
    MissingPredictions(Vec<String>),
    #[error("corpus has no entities; entity accuracy is undefined")]
    NoEntities,
    #[error("{name} = {value} is outside [0, 1]")]
    Domain { name: &'static str, value: f64 },
    #[error("max character n-gram order must be at least 1")]
    InvalidOrder,
    #[error("no references to score against for instance `{0}`")]
    NoReference(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// NFKC, case folding, whitespace collapsed and trimmed.
    #[default]
    NfkcCasefoldWs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Containment {
    #[default]
    Substring,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Denominator {
    /// Correct entities over all entities.
    #[default]
    Entities,
    /// Instances whose entities all match, over instances with entities.
    Instances,
}

/// How hypotheses are matched against gold entity names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchPolicy {
    pub normalization: Normalization,
    pub containment: Containment,
    /// Also accept the lexicon's label and aliases in the target language.
    pub use_aliases: bool,
    /// A hypothesis equal to its source (after normalization) matches nothing.
    pub untranslated_rule: bool,
    #[serde(default)]
    pub denominator: Denominator,
}

impl Default for MatchPolicy {
    fn default() -> Self {
        MatchPolicy {
            normalization: Normalization::NfkcCasefoldWs,
            containment: Containment::Substring,
            use_aliases: true,
            untranslated_rule: true,
            denominator: Denominator::Entities,
        }
    }
}

/// Entity accuracy, quality, and their harmonic mean for one corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTriple {
    pub m_eta: f64,
    pub quality: f64,
    pub overall: f64,
    pub n_instances: usize,
    pub n_entities: usize,
    pub quality_metric_id: String,
}

impl ScoreTriple {
    pub fn new(
        m_eta: f64,
        quality: f64,
        n_instances: usize,
        n_entities: usize,
        quality_metric_id: impl Into<String>,
    ) -> Result<Self, MetricError> {
        Ok(ScoreTriple {
            overall: overall(m_eta, quality)?,
            m_eta,
            quality,
            n_instances,
            n_entities,
            quality_metric_id: quality_metric_id.into(),
        })
    }
}

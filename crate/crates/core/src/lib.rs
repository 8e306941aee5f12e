//! Entity-aware machine translation toolkit.
//!
//! Loads task datasets, harvests entity names from Wikidata, renders LLM
//! prompts, dispatches translations to interchangeable backends, and scores
//! outputs by entity accuracy (M-ETA), translation quality, and their harmonic
//! mean.

pub mod backend;
pub mod dataset;
mod jsonl;
pub mod lexicon;
pub mod locale;
pub mod metrics;
pub mod pipeline;
pub mod prompt;
pub mod qid;
pub mod report;
pub mod retry;
pub mod text;

pub use backend::{translate_batch, BackendConfig, BackendKind, Prediction, TranslationRequest};
pub use dataset::{load_split, GoldTarget, Instance, SplitKind, SplitStats};
pub use jsonl::JsonlError;
pub use lexicon::{EntityLexicon, Lookup, NameSet};
pub use locale::Locale;
pub use metrics::{chrf, m_eta, overall, MatchPolicy, ScoreTriple};
pub use prompt::{render, PromptSpec, RenderedPrompt, Template};
pub use qid::Qid;
pub use report::{build_report, ReportFormat, ReportMatrix, ScoreRecord};

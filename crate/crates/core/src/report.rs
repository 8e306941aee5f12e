//! Per-language, per-method score tables.
//!
//! Score records are exchanged as JSONL:
//!
//! ```json
//! {"method":"zero-shot","locale":"es","m_eta":0.4792,"quality":0.9171,"overall":0.6295,
//!  "n_instances":739,"n_entities":739,"quality_metric_id":"COMET","policy":{...}}
//! ```
//!
//! Scores are fractions; rendered tables show them ×100 with two decimals.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::jsonl::{self, JsonlError};
use crate::locale::{Locale, TARGET_LOCALES};
use crate::metrics::{overall, MatchPolicy, ScoreTriple, OVERALL_TOLERANCE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub method: String,
    pub locale: Locale,
    #[serde(flatten)]
    pub triple: ScoreTriple,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<MatchPolicy>,
}

pub fn records_to_jsonl(records: &[ScoreRecord]) -> String {
    jsonl::to_jsonl(records)
}

pub fn load_records(path: impl AsRef<Path>) -> Result<Vec<ScoreRecord>, JsonlError> {
    parse_records(&jsonl::read_to_string(path.as_ref())?)
}

pub fn parse_records(text: &str) -> Result<Vec<ScoreRecord>, JsonlError> {
    Ok(jsonl::parse_lines(text)?.into_iter().map(|(_, r)| r).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MetricRow {
    MEta,
    Quality,
    Overall,
}

impl MetricRow {
    pub const ALL: [MetricRow; 3] = [MetricRow::MEta, MetricRow::Quality, MetricRow::Overall];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown report format `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReportError {
    #[error("duplicate result for method `{method}`, locale `{locale}`")]
    Duplicate { method: String, locale: Locale },
    #[error("locale `{0}` is not one of the report columns")]
    UnknownLocale(Locale),
    #[error(
        "inconsistent overall for `{method}`/{locale}: stored {stored:.4}, recomputed {recomputed:.4}"
    )]
    Inconsistent {
        method: String,
        locale: Locale,
        stored: f64,
        recomputed: f64,
    },
    #[error("invalid scores for `{method}`/{locale}: {message}")]
    Invalid {
        method: String,
        locale: Locale,
        message: String,
    },
}

/// Metric × method × locale table.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportMatrix {
    methods: Vec<String>,
    locales: Vec<Locale>,
    cells: BTreeMap<(String, Locale), ScoreTriple>,
}

/// Builds a matrix with methods in lexicographic order; see
/// [`ReportMatrix::with_method_order`] to reorder.
pub fn build_report<I>(results: I) -> Result<ReportMatrix, ReportError>
where
    I: IntoIterator<Item = (String, Locale, ScoreTriple)>,
{
    let locales: Vec<Locale> = TARGET_LOCALES
        .iter()
        .map(|l| l.parse().expect("static locale"))
        .collect();
    let mut cells = BTreeMap::new();
    let mut methods = BTreeSet::new();
    for (method, locale, triple) in results {
        if !locales.contains(&locale) {
            return Err(ReportError::UnknownLocale(locale));
        }
        let key = (method.clone(), locale.clone());
        if cells.contains_key(&key) {
            return Err(ReportError::Duplicate { method, locale });
        }
        methods.insert(method);
        cells.insert(key, triple);
    }
    let matrix = ReportMatrix {
        methods: methods.into_iter().collect(),
        locales,
        cells,
    };
    matrix.check_consistency()?;
    Ok(matrix)
}

impl ReportMatrix {
    pub fn methods(&self) -> &[String] {
        &self.methods
    }

    pub fn locales(&self) -> &[Locale] {
        &self.locales
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn get(&self, method: &str, locale: &Locale) -> Option<&ScoreTriple> {
        self.cells.get(&(method.to_owned(), locale.clone()))
    }

    pub fn value(&self, metric: MetricRow, method: &str, locale: &Locale) -> Option<f64> {
        self.get(method, locale).map(|t| match metric {
            MetricRow::MEta => t.m_eta,
            MetricRow::Quality => t.quality,
            MetricRow::Overall => t.overall,
        })
    }

    /// Puts the listed methods first, in the given order; others follow
    /// lexicographically. Names not in the matrix are ignored.
    pub fn with_method_order<S: AsRef<str>>(mut self, order: &[S]) -> Self {
        let mut ordered: Vec<String> = order
            .iter()
            .map(|m| m.as_ref().to_owned())
            .filter(|m| self.methods.contains(m))
            .collect();
        ordered.dedup();
        for m in &self.methods {
            if !ordered.contains(m) {
                ordered.push(m.clone());
            }
        }
        self.methods = ordered;
        self
    }

    /// Every present overall value must match the harmonic mean of its
    /// components within [`OVERALL_TOLERANCE`].
    pub fn check_consistency(&self) -> Result<(), ReportError> {
        for ((method, locale), t) in &self.cells {
            let recomputed = overall(t.m_eta, t.quality).map_err(|e| ReportError::Invalid {
                method: method.clone(),
                locale: locale.clone(),
                message: e.to_string(),
            })?;
            if !(t.overall - recomputed).abs().le(&OVERALL_TOLERANCE) {
                return Err(ReportError::Inconsistent {
                    method: method.clone(),
                    locale: locale.clone(),
                    stored: t.overall,
                    recomputed,
                });
            }
        }
        Ok(())
    }

    /// Row label for the quality metric: the shared metric id, or "quality"
    /// when cells disagree or the matrix is empty.
    pub fn quality_label(&self) -> String {
        let ids: BTreeSet<&str> = self.cells.values().map(|t| t.quality_metric_id.as_str()).collect();
        match ids.into_iter().collect::<Vec<_>>().as_slice() {
            [only] if !only.is_empty() => (*only).to_owned(),
            _ => "quality".to_owned(),
        }
    }

    fn metric_label(&self, metric: MetricRow) -> String {
        match metric {
            MetricRow::MEta => "M-ETA".to_owned(),
            MetricRow::Quality => self.quality_label(),
            MetricRow::Overall => "Overall".to_owned(),
        }
    }

    fn cell_text(&self, metric: MetricRow, method: &str, locale: &Locale) -> String {
        self.value(metric, method, locale)
            .map_or_else(|| "-".to_owned(), percent)
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Markdown => self.to_markdown(),
            ReportFormat::Csv => self.to_csv(),
            ReportFormat::Json => self.to_json(),
        }
    }

    fn to_markdown(&self) -> String {
        let mut out = String::from("| metric | method |");
        for l in &self.locales {
            let _ = write!(out, " {l} |");
        }
        out.push_str("\n|---|---|");
        out.push_str(&"---:|".repeat(self.locales.len()));
        out.push('\n');
        for metric in MetricRow::ALL {
            for (i, method) in self.methods.iter().enumerate() {
                let label = if i == 0 { self.metric_label(metric) } else { String::new() };
                let _ = write!(out, "| {label} | {} |", method.replace('|', "\\|"));
                for l in &self.locales {
                    let _ = write!(out, " {} |", self.cell_text(metric, method, l));
                }
                out.push('\n');
            }
        }
        out
    }

    fn to_csv(&self) -> String {
        let mut out = String::from("metric,method");
        for l in &self.locales {
            let _ = write!(out, ",{l}");
        }
        out.push('\n');
        for metric in MetricRow::ALL {
            for method in &self.methods {
                let _ = write!(out, "{},{}", csv_field(&self.metric_label(metric)), csv_field(method));
                for l in &self.locales {
                    let _ = write!(out, ",{}", self.cell_text(metric, method, l));
                }
                out.push('\n');
            }
        }
        out
    }

    fn to_json(&self) -> String {
        let rows: Vec<Value> = MetricRow::ALL
            .iter()
            .flat_map(|&metric| {
                self.methods.iter().map(move |method| {
                    let values: serde_json::Map<String, Value> = self
                        .locales
                        .iter()
                        .map(|l| {
                            let v = self
                                .value(metric, method, l)
                                .map_or(Value::Null, |v| json!(percent(v).parse::<f64>().expect("formatted number")));
                            (l.to_string(), v)
                        })
                        .collect();
                    json!({"metric": self.metric_label(metric), "method": method, "values": values})
                })
            })
            .collect();
        let doc = json!({
            "locales": self.locales,
            "methods": self.methods,
            "scale": 100,
            "rows": rows,
        });
        let mut out = serde_json::to_string_pretty(&doc).expect("report serializes");
        out.push('\n');
        out
    }
}

/// Fraction rendered on the 0-100 scale with two decimals.
pub fn percent(v: f64) -> String {
    format!("{:.2}", v * 100.0)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

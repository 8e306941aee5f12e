//! Task dataset schema, JSONL loading with validation, and split statistics.
//!
//! One instance per line:
//!
//! ```json
//! {"id": "a1", "source": "...", "source_locale": "en", "target_locale": "it",
//!  "entities": ["Q42"], "targets": [{"translation": "...", "mention": "..."}]}
//! ```
//!
//! The loader also accepts the task release's variants: `wikidata_id` (string)
//! in place of `entities`, and a single `target` string in place of `targets`.
//! Any other field is kept in [`Instance::metadata`].

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::jsonl::{self, JsonlError};
use crate::locale::Locale;
use crate::qid::Qid;
use crate::text::normalize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitKind {
    Train,
    Validation,
    Test,
}

impl SplitKind {
    /// Train and validation splits must carry references; test splits are unlabelled.
    pub fn is_labelled(self) -> bool {
        !matches!(self, SplitKind::Test)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SplitKind::Train => "train",
            SplitKind::Validation => "validation",
            SplitKind::Test => "test",
        }
    }
}

impl FromStr for SplitKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(SplitKind::Train),
            "validation" | "val" | "dev" => Ok(SplitKind::Validation),
            "test" => Ok(SplitKind::Test),
            other => Err(format!("unknown split kind `{other}`")),
        }
    }
}

/// A reference translation, optionally with the entity's surface form in it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldTarget {
    pub translation: String,
    #[serde(rename = "mention", default, skip_serializing_if = "Option::is_none")]
    pub entity_mention: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub id: String,
    #[serde(rename = "source")]
    pub source_text: String,
    pub source_locale: Locale,
    pub target_locale: Locale,
    #[serde(rename = "entities")]
    pub entity_ids: Vec<Qid>,
    #[serde(rename = "targets", default, skip_serializing_if = "Vec::is_empty")]
    pub gold_targets: Vec<GoldTarget>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

impl Instance {
    /// Gold entity mentions across all references, in reference order.
    pub fn gold_mentions(&self) -> impl Iterator<Item = &str> {
        self.gold_targets
            .iter()
            .filter_map(|t| t.entity_mention.as_deref())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error(transparent)]
    Jsonl(#[from] JsonlError),
    #[error("line {line}: expected a JSON object")]
    NotAnObject { line: usize },
    #[error("line {line}: missing required field `{field}`")]
    MissingField { line: usize, field: &'static str },
    #[error("line {line}: field `{field}`: {message}")]
    InvalidField {
        line: usize,
        field: &'static str,
        message: String,
    },
    #[error("line {line}: duplicate id `{id}` (first seen on line {first_line})")]
    DuplicateId {
        line: usize,
        id: String,
        first_line: usize,
    },
}

/// Loads and validates a JSONL split. Blank lines are skipped.
pub fn load_split(path: impl AsRef<Path>, kind: SplitKind) -> Result<Vec<Instance>, DatasetError> {
    let text = jsonl::read_to_string(path.as_ref())?;
    parse_split(&text, kind)
}

/// Parses split text; line numbers in errors are 1-based.
pub fn parse_split(text: &str, kind: SplitKind) -> Result<Vec<Instance>, DatasetError> {
    let rows = jsonl::parse_lines::<Value>(text)?;
    let mut seen: HashMap<String, usize> = HashMap::with_capacity(rows.len());
    let mut out = Vec::with_capacity(rows.len());
    for (line, value) in rows {
        let Value::Object(obj) = value else {
            return Err(DatasetError::NotAnObject { line });
        };
        let inst = instance_from_object(obj, line, kind)?;
        if let Some(&first_line) = seen.get(&inst.id) {
            return Err(DatasetError::DuplicateId {
                line,
                id: inst.id,
                first_line,
            });
        }
        seen.insert(inst.id.clone(), line);
        out.push(inst);
    }
    Ok(out)
}

fn instance_from_object(
    mut obj: Map<String, Value>,
    line: usize,
    kind: SplitKind,
) -> Result<Instance, DatasetError> {
    let invalid = |field: &'static str, message: String| DatasetError::InvalidField {
        line,
        field,
        message,
    };

    let id = match obj.remove("id") {
        Some(Value::String(s)) if !s.is_empty() => s,
        Some(Value::Number(n)) => n.to_string(),
        Some(_) => return Err(invalid("id", "expected a non-empty string".into())),
        None => return Err(DatasetError::MissingField { line, field: "id" }),
    };
    let source_text = take_string(&mut obj, "source", line)?;
    let source_locale = take_locale(&mut obj, "source_locale", line)?;
    let target_locale = take_locale(&mut obj, "target_locale", line)?;
    if source_locale == target_locale {
        return Err(invalid(
            "target_locale",
            format!("equals source_locale `{source_locale}`"),
        ));
    }

    let entity_value = match (obj.remove("entities"), obj.remove("wikidata_id")) {
        (Some(v), other) => {
            if let Some(other) = other {
                obj.insert("wikidata_id".into(), other);
            }
            v
        }
        (None, Some(v)) => v,
        (None, None) => {
            return Err(DatasetError::MissingField {
                line,
                field: "entities",
            })
        }
    };
    let entity_ids = parse_entities(entity_value).map_err(|m| invalid("entities", m))?;

    let stray_mention = match obj.remove("mention") {
        Some(Value::String(s)) => Some(s),
        Some(Value::Null) | None => None,
        Some(_) => return Err(invalid("mention", "expected a string".into())),
    };
    let gold_targets = match (obj.remove("targets"), obj.remove("target")) {
        (Some(v), other) => {
            if let Some(other) = other {
                obj.insert("target".into(), other);
            }
            if let Some(m) = stray_mention {
                obj.insert("mention".into(), Value::String(m));
            }
            parse_targets(v).map_err(|m| invalid("targets", m))?
        }
        (None, Some(Value::String(translation))) => vec![GoldTarget {
            translation,
            entity_mention: stray_mention,
        }],
        (None, Some(Value::Null)) | (None, None) => Vec::new(),
        (None, Some(_)) => return Err(invalid("target", "expected a string".into())),
    };
    if gold_targets.is_empty() && kind.is_labelled() {
        return Err(DatasetError::MissingField {
            line,
            field: "targets",
        });
    }
    for target in &gold_targets {
        if target.translation.trim().is_empty() {
            return Err(invalid("targets", "empty translation".into()));
        }
        if let Some(mention) = &target.entity_mention {
            if !normalize(&target.translation).contains(&normalize(mention)) {
                return Err(invalid(
                    "targets",
                    format!("mention `{mention}` does not occur in its translation"),
                ));
            }
        }
    }

    let mut metadata = BTreeMap::new();
    if let Some(Value::Object(meta)) = obj.remove("metadata") {
        for (k, v) in meta {
            metadata.insert(k, value_to_text(v));
        }
    }
    for (k, v) in obj {
        metadata.insert(k, value_to_text(v));
    }

    Ok(Instance {
        id,
        source_text,
        source_locale,
        target_locale,
        entity_ids,
        gold_targets,
        metadata,
    })
}

fn take_string(
    obj: &mut Map<String, Value>,
    field: &'static str,
    line: usize,
) -> Result<String, DatasetError> {
    match obj.remove(field) {
        Some(Value::String(s)) => Ok(s),
        Some(_) => Err(DatasetError::InvalidField {
            line,
            field,
            message: "expected a string".into(),
        }),
        None => Err(DatasetError::MissingField { line, field }),
    }
}

fn take_locale(
    obj: &mut Map<String, Value>,
    field: &'static str,
    line: usize,
) -> Result<Locale, DatasetError> {
    take_string(obj, field, line)?
        .parse()
        .map_err(|e: crate::locale::InvalidLocale| DatasetError::InvalidField {
            line,
            field,
            message: e.to_string(),
        })
}

fn parse_entities(value: Value) -> Result<Vec<Qid>, String> {
    let items = match value {
        Value::Array(items) => items,
        Value::String(s) => vec![Value::String(s)],
        Value::Null => Vec::new(),
        _ => return Err("expected a list of Wikidata ids".into()),
    };
    items
        .into_iter()
        .map(|v| match v {
            Value::String(s) => s.parse::<Qid>().map_err(|e| e.to_string()),
            other => Err(format!("expected a string id, got {other}")),
        })
        .collect()
}

fn parse_targets(value: Value) -> Result<Vec<GoldTarget>, String> {
    match value {
        Value::Array(items) => items
            .into_iter()
            .map(|v| match v {
                Value::String(translation) => Ok(GoldTarget {
                    translation,
                    entity_mention: None,
                }),
                obj @ Value::Object(_) => {
                    serde_json::from_value::<GoldTarget>(obj).map_err(|e| e.to_string())
                }
                other => Err(format!("unexpected target {other}")),
            })
            .collect(),
        Value::Null => Ok(Vec::new()),
        _ => Err("expected a list".into()),
    }
}

fn value_to_text(v: Value) -> String {
    match v {
        Value::String(s) => s,
        other => other.to_string(),
    }
}

/// Serializes instances to canonical JSONL (one object per line, trailing newline).
pub fn to_jsonl(instances: &[Instance]) -> String {
    jsonl::to_jsonl(instances)
}

pub fn save_split(path: impl AsRef<Path>, instances: &[Instance]) -> Result<(), DatasetError> {
    Ok(jsonl::write(path.as_ref(), &to_jsonl(instances))?)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SplitCounts {
    pub train: usize,
    pub validation: usize,
    pub test: usize,
    /// False when no training split exists for the locale; rendered as "-".
    pub train_available: bool,
}

/// Per-locale split sizes, rows ordered by locale code.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SplitStats {
    pub rows: BTreeMap<Locale, SplitCounts>,
}

pub type SplitsByLocale = BTreeMap<Locale, BTreeMap<SplitKind, Vec<Instance>>>;

pub fn split_stats(splits: &SplitsByLocale) -> SplitStats {
    let rows = splits
        .iter()
        .map(|(locale, kinds)| {
            let len = |k| kinds.get(&k).map_or(0, Vec::len);
            let counts = SplitCounts {
                train: len(SplitKind::Train),
                validation: len(SplitKind::Validation),
                test: len(SplitKind::Test),
                train_available: kinds.contains_key(&SplitKind::Train),
            };
            (locale.clone(), counts)
        })
        .collect();
    SplitStats { rows }
}

/// `7220` -> `7,220`.
pub fn thousands(n: usize) -> String {
    let digits = n.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

impl SplitStats {
    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| language | train | validation | test |\n|---|---:|---:|---:|\n");
        for (locale, c) in &self.rows {
            let train = if c.train_available {
                thousands(c.train)
            } else {
                "-".to_owned()
            };
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} |",
                locale.display_label(),
                train,
                thousands(c.validation),
                thousands(c.test)
            );
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("locale,train,validation,test\n");
        for (locale, c) in &self.rows {
            let train = if c.train_available {
                c.train.to_string()
            } else {
                "-".to_owned()
            };
            let _ = writeln!(out, "{locale},{train},{},{}", c.validation, c.test);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINE: &str = r#"{"id":"a1","source":"Who wrote Dune?","source_locale":"en","target_locale":"it","entities":["Q190192"],"targets":[{"translation":"Chi ha scritto Dune?","mention":"Dune"}]}"#;

    #[test]
    fn empty_file_is_empty_split() {
        assert!(parse_split("", SplitKind::Train).unwrap().is_empty());
        assert!(parse_split("\n  \n", SplitKind::Test).unwrap().is_empty());
    }

    #[test]
    fn parses_canonical_line() {
        let v = parse_split(LINE, SplitKind::Validation).unwrap();
        assert_eq!(v.len(), 1);
        let i = &v[0];
        assert_eq!(i.id, "a1");
        assert_eq!(i.target_locale.as_str(), "it");
        assert_eq!(i.entity_ids[0].as_str(), "Q190192");
        assert_eq!(i.gold_targets[0].entity_mention.as_deref(), Some("Dune"));
        assert!(i.metadata.is_empty());
    }

    #[test]
    fn malformed_line_names_line_two() {
        let text = format!("{LINE}\n{{\"id\": \"a2\", \n{}", LINE.replace("a1", "a3"));
        let err = parse_split(&text, SplitKind::Train).unwrap_err();
        assert!(matches!(err, DatasetError::Jsonl(JsonlError::Parse { line: 2, .. })), "{err}");
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn duplicate_id_rejected() {
        let text = format!("{LINE}\n{LINE}\n");
        let err = parse_split(&text, SplitKind::Train).unwrap_err();
        assert!(matches!(err, DatasetError::DuplicateId { line: 2, first_line: 1, .. }));
    }

    #[test]
    fn missing_field_is_named() {
        let text = LINE.replace(r#""source_locale":"en","#, "");
        let err = parse_split(&text, SplitKind::Train).unwrap_err();
        assert!(matches!(err, DatasetError::MissingField { field: "source_locale", .. }));
        assert!(err.to_string().contains("`source_locale`"));
    }

    #[test]
    fn invariants_enforced() {
        let same = LINE.replace(r#""target_locale":"it""#, r#""target_locale":"en""#);
        assert!(parse_split(&same, SplitKind::Train).is_err());
        let bad_qid = LINE.replace("Q190192", "P31");
        assert!(parse_split(&bad_qid, SplitKind::Train).is_err());
        let bad_mention = LINE.replace(r#""mention":"Dune""#, r#""mention":"Arrakis""#);
        assert!(parse_split(&bad_mention, SplitKind::Train).is_err());
        let empty_translation = LINE.replace("Chi ha scritto Dune?", " ");
        let empty_translation = empty_translation.replace(r#","mention":"Dune""#, "");
        assert!(parse_split(&empty_translation, SplitKind::Train).is_err());
    }

    #[test]
    fn unlabelled_only_in_test() {
        let text = r#"{"id":"t1","source":"Hi","source_locale":"en","target_locale":"ko","entities":["Q1"]}"#;
        assert_eq!(parse_split(text, SplitKind::Test).unwrap().len(), 1);
        let err = parse_split(text, SplitKind::Validation).unwrap_err();
        assert!(matches!(err, DatasetError::MissingField { field: "targets", .. }));
    }

    #[test]
    fn release_variants_and_metadata() {
        let text = r#"{"id":"x","source":"Where is Rome?","source_locale":"en","target_locale":"de","wikidata_id":"Q220","target":"Wo ist Rom?","mention":"Rom","from":"mintaka","entity_types":["GPE"]}"#;
        let v = parse_split(text, SplitKind::Train).unwrap();
        let i = &v[0];
        assert_eq!(i.entity_ids.len(), 1);
        assert_eq!(i.gold_targets[0].entity_mention.as_deref(), Some("Rom"));
        assert_eq!(i.metadata.get("from").map(String::as_str), Some("mintaka"));
        assert_eq!(i.metadata.get("entity_types").map(String::as_str), Some("[\"GPE\"]"));
    }

    #[test]
    fn round_trip_preserves_fields() {
        let text = r#"{"id":"x","source":"Where is Rome?","source_locale":"en","target_locale":"de","wikidata_id":"Q220","target":"Wo ist Rom?","from":"mintaka","n":3}"#;
        let first = parse_split(text, SplitKind::Train).unwrap();
        let again = parse_split(&to_jsonl(&first), SplitKind::Train).unwrap();
        assert_eq!(first, again);
    }

    #[test]
    fn stats_render_absent_train_as_dash() {
        let mut splits = SplitsByLocale::new();
        let ko: Locale = "ko".parse().unwrap();
        let it: Locale = "it".parse().unwrap();
        splits.entry(ko).or_default().insert(SplitKind::Validation, Vec::new());
        splits.entry(it).or_default().insert(SplitKind::Train, Vec::new());
        let stats = split_stats(&splits);
        let md = stats.to_markdown();
        assert!(md.contains("| Korean (ko) | - | 0 | 0 |"), "{md}");
        assert!(md.contains("| Italian (it) | 0 | 0 | 0 |"), "{md}");
        assert_eq!(stats.rows.values().map(|c| c.train).sum::<usize>(), 0);
        assert!(stats.to_csv().contains("ko,-,0,0"));
    }

    #[test]
    fn all_empty_input() {
        let stats = split_stats(&SplitsByLocale::new());
        assert!(stats.rows.is_empty());
        assert_eq!(stats.to_csv(), "locale,train,validation,test\n");
    }

    #[test]
    fn thousands_separator() {
        assert_eq!(thousands(0), "0");
        assert_eq!(thousands(999), "999");
        assert_eq!(thousands(7220), "7,220");
        assert_eq!(thousands(1234567), "1,234,567");
    }
}

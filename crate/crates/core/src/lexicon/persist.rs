//! Versioned JSONL lexicon files.
//!
//! The first line is a header carrying the format version and entry count;
//! each following line holds one QID:
//!
//! ```text
//! {"format":"eamt-lexicon","version":1,"entries":2}
//! {"qid":"Q42","source":"api","fetched_at":1718000000,"names":{"de":{"label":"Douglas Adams"},"th":{}}}
//! {"qid":"Q64","source":"file","fetched_at":1718000000,"names":{"de":{"label":"Berlin"}}}
//! ```
//!
//! The entry count detects files truncated on a line boundary.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EntityLexicon, LexiconEntry, NameSet, NameSource, Provenance};
use crate::locale::Locale;
use crate::qid::Qid;

pub const LEXICON_VERSION: u32 = 1;
const FORMAT: &str = "eamt-lexicon";

#[derive(Debug, thiserror::Error)]
pub enum LexiconFileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("unsupported lexicon version {found} (expected {LEXICON_VERSION})")]
    Version { found: u32 },
    #[error("corrupt lexicon file: {0}")]
    Corrupt(String),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format: String,
    version: u32,
    entries: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Line {
    qid: Qid,
    source: NameSource,
    fetched_at: u64,
    names: BTreeMap<Locale, NameSet>,
}

pub fn to_lexicon_jsonl(lexicon: &EntityLexicon) -> String {
    let header = Header {
        format: FORMAT.to_owned(),
        version: LEXICON_VERSION,
        entries: lexicon.len(),
    };
    let lines = lexicon.entries().map(|(qid, e)| Line {
        qid: qid.clone(),
        source: e.provenance.source,
        fetched_at: e.provenance.fetched_at,
        names: e.names.clone(),
    });
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');
    out.push_str(&crate::jsonl::to_jsonl(lines));
    out
}

pub fn save_lexicon(lexicon: &EntityLexicon, path: impl AsRef<Path>) -> Result<(), LexiconFileError> {
    let path = path.as_ref();
    fs::write(path, to_lexicon_jsonl(lexicon)).map_err(|source| LexiconFileError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_lexicon(path: impl AsRef<Path>) -> Result<EntityLexicon, LexiconFileError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| LexiconFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_lexicon(&text)
}

/// An empty (or whitespace-only) file is an empty lexicon.
pub fn parse_lexicon(text: &str) -> Result<EntityLexicon, LexiconFileError> {
    let corrupt = |line: usize, msg: String| LexiconFileError::Corrupt(format!("line {line}: {msg}"));
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let Some((hline, htext)) = lines.next() else {
        return Ok(EntityLexicon::new());
    };

    let raw: serde_json::Value =
        serde_json::from_str(htext).map_err(|e| corrupt(hline + 1, e.to_string()))?;
    if raw.get("format").and_then(|f| f.as_str()) != Some(FORMAT) {
        return Err(corrupt(hline + 1, "missing lexicon header".into()));
    }
    if let Some(v) = raw.get("version").and_then(|v| v.as_u64()) {
        if v != u64::from(LEXICON_VERSION) {
            return Err(LexiconFileError::Version { found: v as u32 });
        }
    }
    let header: Header = serde_json::from_value(raw).map_err(|e| corrupt(hline + 1, e.to_string()))?;

    let mut lexicon = EntityLexicon::new();
    for (idx, text) in lines {
        let line: Line = serde_json::from_str(text).map_err(|e| corrupt(idx + 1, e.to_string()))?;
        if let Some((lang, _)) = line.names.iter().find(|(_, n)| !n.is_canonical()) {
            return Err(corrupt(
                idx + 1,
                format!("name set for {}/{lang} has empty or duplicate names", line.qid),
            ));
        }
        let qid = line.qid.clone();
        let prev = lexicon.insert_entry(
            line.qid,
            LexiconEntry {
                names: line.names,
                provenance: Provenance {
                    source: line.source,
                    fetched_at: line.fetched_at,
                },
            },
        );
        if prev.is_some() {
            return Err(corrupt(idx + 1, format!("duplicate entry for {qid}")));
        }
    }
    if lexicon.len() != header.entries {
        return Err(LexiconFileError::Corrupt(format!(
            "header declares {} entries, found {}",
            header.entries,
            lexicon.len()
        )));
    }
    Ok(lexicon)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> EntityLexicon {
        let mut lex = EntityLexicon::new();
        let p = |s, t| Provenance { source: s, fetched_at: t };
        let l = |s: &str| s.parse::<Locale>().unwrap();
        let q = |s: &str| s.parse::<Qid>().unwrap();
        lex.insert(q("Q42"), l("de"), NameSet::new(Some("Douglas Adams".into()), ["DNA", "Douglas Noël Adams"]), p(NameSource::Api, 1_718_000_000));
        lex.insert(q("Q42"), l("th"), NameSet::empty(), p(NameSource::Api, 1_718_000_000));
        lex.insert(q("Q64"), l("de"), NameSet::new(Some("Berlin".into()), Vec::<String>::new()), p(NameSource::File, 5));
        lex.insert(q("Q90"), l("ja"), NameSet::new(None, ["パリ"]), p(NameSource::File, 7));
        lex
    }

    #[test]
    fn round_trip_three_entries() {
        let lex = sample();
        assert_eq!(lex.len(), 3);
        let back = parse_lexicon(&to_lexicon_jsonl(&lex)).unwrap();
        assert_eq!(back, lex);
    }

    #[test]
    fn empty_file_and_empty_lexicon() {
        assert!(parse_lexicon("").unwrap().is_empty());
        let text = to_lexicon_jsonl(&EntityLexicon::new());
        assert!(parse_lexicon(&text).unwrap().is_empty());
    }

    #[test]
    fn truncation_detected() {
        let text = to_lexicon_jsonl(&sample());
        // cut mid-line
        let cut = &text[..text.len() - 20];
        assert!(matches!(parse_lexicon(cut), Err(LexiconFileError::Corrupt(_))));
        // cut on a line boundary
        let whole_lines: Vec<&str> = text.lines().collect();
        let cut = whole_lines[..whole_lines.len() - 1].join("\n");
        let err = parse_lexicon(&cut).unwrap_err();
        assert!(err.to_string().contains("declares 3 entries"), "{err}");
    }

    #[test]
    fn version_mismatch() {
        let text = to_lexicon_jsonl(&sample()).replacen("\"version\":1", "\"version\":9", 1);
        assert!(matches!(parse_lexicon(&text), Err(LexiconFileError::Version { found: 9 })));
    }

    #[test]
    fn rejects_non_canonical_names() {
        let text = "{\"format\":\"eamt-lexicon\",\"version\":1,\"entries\":1}\n{\"qid\":\"Q1\",\"source\":\"api\",\"fetched_at\":0,\"names\":{\"de\":{\"label\":\"A\",\"aliases\":[\"a\"]}}}\n";
        assert!(matches!(parse_lexicon(text), Err(LexiconFileError::Corrupt(_))));
    }
}

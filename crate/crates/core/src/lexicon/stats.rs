use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;

use super::{EntityLexicon, Lookup};
use crate::dataset::thousands;
use crate::locale::Locale;
use crate::qid::Qid;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EntityTypeRow {
    pub label: String,
    /// Unique QIDs of this type.
    pub all: usize,
    /// QIDs of this type with at least one name in the language.
    pub per_language: BTreeMap<Locale, usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EntityTypeStats {
    pub languages: Vec<Locale>,
    /// Ordered by descending `all`, then label.
    pub rows: Vec<EntityTypeRow>,
}

/// Counts unique entities per type and, per language, those the lexicon
/// holds a non-empty name set for.
pub fn entity_type_stats(
    mentions: &[(Qid, String)],
    lexicon: &EntityLexicon,
    languages: &[Locale],
) -> EntityTypeStats {
    let mut by_type: BTreeMap<&str, BTreeSet<&Qid>> = BTreeMap::new();
    for (qid, label) in mentions {
        by_type.entry(label.as_str()).or_default().insert(qid);
    }
    let mut rows: Vec<EntityTypeRow> = by_type
        .into_iter()
        .map(|(label, qids)| {
            let per_language = languages
                .iter()
                .map(|lang| {
                    let n = qids
                        .iter()
                        .filter(|q| matches!(lexicon.lookup(q, lang), Lookup::Names(n) if !n.is_empty()))
                        .count();
                    (lang.clone(), n)
                })
                .collect();
            EntityTypeRow {
                label: label.to_owned(),
                all: qids.len(),
                per_language,
            }
        })
        .collect();
    rows.sort_by(|a, b| b.all.cmp(&a.all).then_with(|| a.label.cmp(&b.label)));
    EntityTypeStats {
        languages: languages.to_vec(),
        rows,
    }
}

impl EntityTypeStats {
    pub fn total_all(&self) -> usize {
        self.rows.iter().map(|r| r.all).sum()
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| Entity type | all |");
        for l in &self.languages {
            let _ = write!(out, " {l} |");
        }
        out.push_str("\n|---|---:|");
        out.push_str(&"---:|".repeat(self.languages.len()));
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "| {} | {} |", row.label, thousands(row.all));
            for l in &self.languages {
                let _ = write!(out, " {} |", thousands(row.per_language[l]));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("entity_type,all");
        for l in &self.languages {
            let _ = write!(out, ",{l}");
        }
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{},{}", row.label, row.all);
            for l in &self.languages {
                let _ = write!(out, ",{}", row.per_language[l]);
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, thiserror::Error)]
pub enum MentionError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
}

/// Reads a `QID<TAB>TYPE` mention file. Blank lines and `#` comments are
/// skipped, as is a leading header row whose first cell is not a QID.
pub fn read_mentions(path: impl AsRef<Path>) -> Result<Vec<(Qid, String)>, MentionError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| MentionError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_mentions(&text)
}

pub fn parse_mentions(text: &str) -> Result<Vec<(Qid, String)>, MentionError> {
    let mut out = Vec::new();
    let mut first = true;
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let is_first = std::mem::replace(&mut first, false);
        let mut cells = line.split('\t');
        let qid_cell = cells.next().unwrap_or_default().trim();
        let type_cell = cells.next().map(str::trim).unwrap_or_default();
        let qid = match qid_cell.parse::<Qid>() {
            Ok(q) => q,
            Err(_) if is_first => continue,
            Err(e) => {
                return Err(MentionError::Invalid {
                    line: idx + 1,
                    message: e.to_string(),
                })
            }
        };
        if type_cell.is_empty() {
            return Err(MentionError::Invalid {
                line: idx + 1,
                message: "missing entity type".into(),
            });
        }
        out.push((qid, type_cell.to_owned()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::{NameSet, NameSource, Provenance};

    fn q(s: &str) -> Qid {
        s.parse().unwrap()
    }
    fn l(s: &str) -> Locale {
        s.parse().unwrap()
    }

    #[test]
    fn empty_mentions_empty_table() {
        let stats = entity_type_stats(&[], &EntityLexicon::new(), &[l("ar")]);
        assert!(stats.rows.is_empty());
        assert_eq!(stats.total_all(), 0);
    }

    #[test]
    fn counts_unique_and_named() {
        let mut lex = EntityLexicon::new();
        let p = Provenance { source: NameSource::File, fetched_at: 0 };
        lex.insert(q("Q1"), l("ar"), NameSet::new(Some("a".into()), Vec::<String>::new()), p.clone());
        lex.insert(q("Q1"), l("th"), NameSet::empty(), p.clone());
        lex.insert(q("Q2"), l("ar"), NameSet::new(None, ["b"]), p.clone());
        let mentions = vec![
            (q("Q1"), "PERSON".to_owned()),
            (q("Q1"), "PERSON".to_owned()),
            (q("Q2"), "PERSON".to_owned()),
            (q("Q3"), "GPE".to_owned()),
        ];
        let stats = entity_type_stats(&mentions, &lex, &[l("ar"), l("th")]);
        assert_eq!(stats.rows[0].label, "PERSON");
        assert_eq!(stats.rows[0].all, 2);
        assert_eq!(stats.rows[0].per_language[&l("ar")], 2);
        assert_eq!(stats.rows[0].per_language[&l("th")], 0);
        assert_eq!(stats.rows[1].all, 1);
        assert_eq!(stats.total_all(), 3);
        assert_eq!(stats.to_csv(), "entity_type,all,ar,th\nPERSON,2,2,0\nGPE,1,0,0\n");
    }

    #[test]
    fn mention_file_parsing() {
        let m = parse_mentions("qid\ttype\n# note\nQ1\tPERSON\n\nQ2\tORG\r\n").unwrap();
        assert_eq!(m, vec![(q("Q1"), "PERSON".into()), (q("Q2"), "ORG".into())]);
        assert!(matches!(parse_mentions("Q1\tPERSON\nX\tORG"), Err(MentionError::Invalid { line: 2, .. })));
        assert!(matches!(parse_mentions("Q1"), Err(MentionError::Invalid { line: 1, .. })));
    }
}

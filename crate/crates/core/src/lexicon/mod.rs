//! Per-language entity names harvested from Wikidata.

mod persist;
mod stats;
pub mod wikidata;

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::locale::Locale;
use crate::qid::Qid;
use crate::text::normalize;

pub use persist::{load_lexicon, parse_lexicon, save_lexicon, to_lexicon_jsonl, LexiconFileError, LEXICON_VERSION};
pub use stats::{entity_type_stats, parse_mentions, read_mentions, EntityTypeRow, EntityTypeStats, MentionError};
pub use wikidata::{harvest, HarvestError, HarvestOptions};

/// Names for one entity in one language.
///
/// Construction drops empty names, aliases that duplicate the label, and
/// aliases that duplicate each other (all compared after normalization).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NameSet {
    #[serde(rename = "label", default, skip_serializing_if = "Option::is_none")]
    primary_label: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    aliases: Vec<String>,
}

impl NameSet {
    pub fn new<I, S>(primary_label: Option<String>, aliases: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut seen = HashSet::new();
        let primary_label = primary_label.filter(|l| {
            let key = normalize(l);
            !key.is_empty() && seen.insert(key)
        });
        let aliases = aliases
            .into_iter()
            .map(Into::into)
            .filter(|a| {
                let key = normalize(a);
                !key.is_empty() && seen.insert(key)
            })
            .collect();
        NameSet {
            primary_label,
            aliases,
        }
    }

    pub fn empty() -> Self {
        NameSet::default()
    }

    pub fn primary_label(&self) -> Option<&str> {
        self.primary_label.as_deref()
    }

    pub fn aliases(&self) -> &[String] {
        &self.aliases
    }

    /// Label first, then aliases.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.primary_label
            .as_deref()
            .into_iter()
            .chain(self.aliases.iter().map(String::as_str))
    }

    /// The label, or the first alias when no label exists.
    pub fn preferred(&self) -> Option<&str> {
        self.names().next()
    }

    pub fn len(&self) -> usize {
        usize::from(self.primary_label.is_some()) + self.aliases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub(crate) fn is_canonical(&self) -> bool {
        *self == NameSet::new(self.primary_label.clone(), self.aliases.iter().cloned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NameSource {
    Api,
    File,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: NameSource,
    /// Unix seconds.
    pub fetched_at: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    pub names: BTreeMap<Locale, NameSet>,
    pub provenance: Provenance,
}

/// Result of [`EntityLexicon::lookup`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lookup<'a> {
    /// The pair was never harvested.
    NotFetched,
    /// The pair was harvested; the set is empty when Wikidata has no name.
    Names(&'a NameSet),
}

impl<'a> Lookup<'a> {
    pub fn names(self) -> Option<&'a NameSet> {
        match self {
            Lookup::Names(n) => Some(n),
            Lookup::NotFetched => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EntityLexicon {
    entries: BTreeMap<Qid, LexiconEntry>,
}

impl EntityLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Qid, &LexiconEntry)> {
        self.entries.iter()
    }

    pub fn entry(&self, qid: &Qid) -> Option<&LexiconEntry> {
        self.entries.get(qid)
    }

    pub fn lookup(&self, qid: &Qid, lang: &Locale) -> Lookup<'_> {
        self.entries
            .get(qid)
            .and_then(|e| e.names.get(lang))
            .map_or(Lookup::NotFetched, Lookup::Names)
    }

    /// Records names for one (QID, language) pair. Provenance of an existing
    /// entry is replaced by the newer one.
    pub fn insert(&mut self, qid: Qid, lang: Locale, names: NameSet, provenance: Provenance) {
        let entry = self.entries.entry(qid).or_insert_with(|| LexiconEntry {
            names: BTreeMap::new(),
            provenance: provenance.clone(),
        });
        entry.names.insert(lang, names);
        entry.provenance = provenance;
    }

    pub(crate) fn insert_entry(&mut self, qid: Qid, entry: LexiconEntry) -> Option<LexiconEntry> {
        self.entries.insert(qid, entry)
    }

    /// Copies every pair from `other`, overwriting pairs present in both.
    pub fn merge(&mut self, other: EntityLexicon) {
        for (qid, entry) in other.entries {
            for (lang, names) in entry.names {
                self.insert(qid.clone(), lang, names, entry.provenance.clone());
            }
        }
    }

    /// Equality of names only, ignoring provenance.
    pub fn same_names(&self, other: &EntityLexicon) -> bool {
        self.entries.len() == other.entries.len()
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|((qa, a), (qb, b))| qa == qb && a.names == b.names)
    }
}

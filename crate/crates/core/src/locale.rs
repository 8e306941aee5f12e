//! Language codes used by the task and their English names.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The ten target locales, in report column order.
pub const TARGET_LOCALES: [&str; 10] = ["ar", "de", "es", "fr", "it", "ja", "ko", "th", "tr", "zh"];

const NAMES: [(&str, &str); 11] = [
    ("ar", "arabic"),
    ("de", "german"),
    ("en", "english"),
    ("es", "spanish"),
    ("fr", "french"),
    ("it", "italian"),
    ("ja", "japanese"),
    ("ko", "korean"),
    ("th", "thai"),
    ("tr", "turkish"),
    ("zh", "chinese"),
];

/// A two-letter lowercase language code such as `it` or `zh`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Locale(String);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid locale `{0}`: expected a two-letter lowercase code")]
pub struct InvalidLocale(pub String);

impl Locale {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Lowercase English name ("french"), as spelled inside prompts.
    pub fn english_name(&self) -> Option<&'static str> {
        NAMES
            .iter()
            .find(|(code, _)| *code == self.0)
            .map(|(_, name)| *name)
    }

    /// Capitalized display label such as "Italian (it)", or the bare code.
    pub fn display_label(&self) -> String {
        match self.english_name() {
            Some(name) => {
                let mut chars = name.chars();
                let first = chars.next().map(|c| c.to_ascii_uppercase()).unwrap_or_default();
                format!("{first}{} ({})", chars.as_str(), self.0)
            }
            None => self.0.clone(),
        }
    }
}

impl FromStr for Locale {
    type Err = InvalidLocale;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Locale::try_from(s.to_owned())
    }
}

impl TryFrom<String> for Locale {
    type Error = InvalidLocale;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        if s.len() == 2 && s.bytes().all(|b| b.is_ascii_lowercase()) {
            Ok(Locale(s))
        } else {
            Err(InvalidLocale(s))
        }
    }
}

impl From<Locale> for String {
    fn from(l: Locale) -> String {
        l.0
    }
}

impl fmt::Display for Locale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

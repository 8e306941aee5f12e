use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// A Wikidata item identifier: `Q` followed by one or more decimal digits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Qid(String);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid Wikidata id `{0}`: expected `Q` followed by digits")]
pub struct InvalidQid(pub String);

impl Qid {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_valid(s: &str) -> bool {
        let mut chars = s.chars();
        chars.next() == Some('Q') && {
            let rest = chars.as_str();
            !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit())
        }
    }
}

impl FromStr for Qid {
    type Err = InvalidQid;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if Self::is_valid(s) {
            Ok(Qid(s.to_owned()))
        } else {
            Err(InvalidQid(s.to_owned()))
        }
    }
}

impl TryFrom<String> for Qid {
    type Error = InvalidQid;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        if Self::is_valid(&s) {
            Ok(Qid(s))
        } else {
            Err(InvalidQid(s))
        }
    }
}

impl From<Qid> for String {
    fn from(q: Qid) -> String {
        q.0
    }
}

impl AsRef<str> for Qid {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Qid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_and_rejects() {
        assert!("Q42".parse::<Qid>().is_ok());
        assert!("Q0".parse::<Qid>().is_ok());
        for bad in ["", "Q", "q42", "P31", "Q4a", " Q42", "Q-1"] {
            assert!(bad.parse::<Qid>().is_err(), "{bad:?} accepted");
        }
    }

    #[test]
    fn serde_validates() {
        let q: Qid = serde_json::from_str("\"Q64\"").unwrap();
        assert_eq!(q.as_str(), "Q64");
        assert!(serde_json::from_str::<Qid>("\"L1\"").is_err());
        assert_eq!(serde_json::to_string(&q).unwrap(), "\"Q64\"");
    }
}

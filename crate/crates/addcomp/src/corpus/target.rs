//! Target identities and their stable string form.
//!
//! A *target* is anything whose surrounding context gets counted. The
//! string grammar below is used in co-occurrence table files and reports:
//!
//! | kind                      | string    | meaning                                        |
//! |---------------------------|-----------|------------------------------------------------|
//! | `Unigram`                 | `w`       | every occurrence of word w                     |
//! | `Ordered`                 | `s t`     | occurrences of s immediately followed by t     |
//! | `Unordered`               | `{s t}`   | occurrences of s,t adjacent in either order    |
//! | `Exclusion`               | `t\s`     | tokens of t with no s immediately adjacent     |
//! | `Adjacent`                | `t&s`     | tokens of t with s immediately adjacent        |
//! | `NearLeft`                | `s*`      | tokens of s, Near-far labels, right skip       |
//! | `NearRight`               | `*t`      | tokens of t, Near-far labels, left skip        |
//! | `NearLeftExcl`            | `s*\t`    | `s*` restricted to tokens not followed by t    |
//! | `NearRightExcl`           | `*t\s`    | `*t` restricted to tokens not preceded by s    |
//!
//! Tokens therefore must not contain whitespace or the marker characters
//! `{ } \ & *`; the writer rejects violations.

use std::fmt;

use crate::error::{Error, Result};

/// Characters reserved by the key grammar.
const MARKERS: &[char] = &['{', '}', '\\', '&', '*', ' ', '\t'];

/// Identity of a counted target. Ordering is derived (kind first, then
/// words), which gives table files a stable, kind-grouped line order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TargetKey {
    /// A word: `w`.
    Unigram(String),
    /// An ordered bigram: `s t`.
    Ordered(String, String),
    /// An unordered bigram `{s t}`; constructors canonicalize word order.
    Unordered(String, String),
    /// Tokens of `word` with `partner` not adjacent: `word\partner`.
    Exclusion { word: String, partner: String },
    /// Tokens of `word` with `partner` adjacent: `word&partner`.
    Adjacent { word: String, partner: String },
    /// Near-far-labeled tokens of `word` (skip one to the right): `word*`.
    NearLeft(String),
    /// Near-far-labeled tokens of `word` (skip one to the left): `*word`.
    NearRight(String),
    /// `word*` restricted to tokens not immediately followed by `partner`.
    NearLeftExcl { word: String, partner: String },
    /// `*word` restricted to tokens not immediately preceded by `partner`.
    NearRightExcl { word: String, partner: String },
}

impl TargetKey {
    /// Unordered bigram with canonical (lexicographic) word order, so
    /// `{s t}` and `{t s}` always denote the same target, independently of
    /// any particular vocabulary.
    pub fn unordered(a: &str, b: &str) -> Self {
        if a <= b {
            TargetKey::Unordered(a.to_string(), b.to_string())
        } else {
            TargetKey::Unordered(b.to_string(), a.to_string())
        }
    }

    /// Validates that every word is representable in the key grammar.
    pub fn validate(&self) -> Result<()> {
        for w in self.words() {
            if w.is_empty() {
                return Err(Error::Data("empty token in target key".into()));
            }
            if w.contains(MARKERS) {
                return Err(Error::Data(format!(
                    "token {w:?} contains a character reserved by the target-key grammar"
                )));
            }
        }
        Ok(())
    }

    /// The constituent words, in stored order.
    pub fn words(&self) -> Vec<&str> {
        match self {
            TargetKey::Unigram(w) | TargetKey::NearLeft(w) | TargetKey::NearRight(w) => {
                vec![w]
            }
            TargetKey::Ordered(s, t) | TargetKey::Unordered(s, t) => vec![s, t],
            TargetKey::Exclusion { word, partner }
            | TargetKey::Adjacent { word, partner }
            | TargetKey::NearLeftExcl { word, partner }
            | TargetKey::NearRightExcl { word, partner } => vec![word, partner],
        }
    }

    /// True for the two phrase kinds (ordered / unordered bigram).
    pub fn is_phrase(&self) -> bool {
        matches!(self, TargetKey::Ordered(..) | TargetKey::Unordered(..))
    }

    /// Parses the string form back into a key.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::Data(format!("invalid target key {s:?}: {why}"));
        if s.is_empty() {
            return Err(bad("empty"));
        }
        if let Some(inner) = s.strip_prefix('{') {
            let inner = inner
                .strip_suffix('}')
                .ok_or_else(|| bad("unterminated '{'"))?;
            let mut it = inner.split(' ');
            let (a, b) = (it.next().unwrap_or(""), it.next().unwrap_or(""));
            if a.is_empty() || b.is_empty() || it.next().is_some() {
                return Err(bad("expected exactly two words inside braces"));
            }
            return Ok(TargetKey::Unordered(a.to_string(), b.to_string()));
        }
        if let Some((left, partner)) = s.split_once('\\') {
            if partner.is_empty() {
                return Err(bad("missing partner after '\\'"));
            }
            if let Some(word) = left.strip_suffix('*') {
                if word.is_empty() {
                    return Err(bad("missing word before '*'"));
                }
                return Ok(TargetKey::NearLeftExcl {
                    word: word.to_string(),
                    partner: partner.to_string(),
                });
            }
            if let Some(word) = left.strip_prefix('*') {
                if word.is_empty() {
                    return Err(bad("missing word after '*'"));
                }
                return Ok(TargetKey::NearRightExcl {
                    word: word.to_string(),
                    partner: partner.to_string(),
                });
            }
            if left.is_empty() {
                return Err(bad("missing word before '\\'"));
            }
            return Ok(TargetKey::Exclusion {
                word: left.to_string(),
                partner: partner.to_string(),
            });
        }
        if let Some((word, partner)) = s.split_once('&') {
            if word.is_empty() || partner.is_empty() {
                return Err(bad("'&' needs a word on both sides"));
            }
            return Ok(TargetKey::Adjacent {
                word: word.to_string(),
                partner: partner.to_string(),
            });
        }
        if let Some((a, b)) = s.split_once(' ') {
            if a.is_empty() || b.is_empty() || b.contains(' ') {
                return Err(bad("expected exactly two space-separated words"));
            }
            return Ok(TargetKey::Ordered(a.to_string(), b.to_string()));
        }
        if let Some(word) = s.strip_suffix('*') {
            if word.is_empty() {
                return Err(bad("missing word before '*'"));
            }
            return Ok(TargetKey::NearLeft(word.to_string()));
        }
        if let Some(word) = s.strip_prefix('*') {
            return Ok(TargetKey::NearRight(word.to_string()));
        }
        Ok(TargetKey::Unigram(s.to_string()))
    }
}

impl fmt::Display for TargetKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetKey::Unigram(w) => write!(f, "{w}"),
            TargetKey::Ordered(s, t) => write!(f, "{s} {t}"),
            TargetKey::Unordered(s, t) => write!(f, "{{{s} {t}}}"),
            TargetKey::Exclusion { word, partner } => write!(f, "{word}\\{partner}"),
            TargetKey::Adjacent { word, partner } => write!(f, "{word}&{partner}"),
            TargetKey::NearLeft(w) => write!(f, "{w}*"),
            TargetKey::NearRight(w) => write!(f, "*{w}"),
            TargetKey::NearLeftExcl { word, partner } => write!(f, "{word}*\\{partner}"),
            TargetKey::NearRightExcl { word, partner } => write!(f, "*{word}\\{partner}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip(key: TargetKey) {
        let s = key.to_string();
        assert_eq!(TargetKey::parse(&s).unwrap(), key, "roundtrip of {s:?}");
    }

    #[test]
    fn every_kind_roundtrips_through_its_string_form() {
        roundtrip(TargetKey::Unigram("interest".into()));
        roundtrip(TargetKey::Ordered("interest".into(), "rate".into()));
        roundtrip(TargetKey::Unordered("interest".into(), "rate".into()));
        roundtrip(TargetKey::Exclusion {
            word: "rate".into(),
            partner: "interest".into(),
        });
        roundtrip(TargetKey::Adjacent {
            word: "rate".into(),
            partner: "interest".into(),
        });
        roundtrip(TargetKey::NearLeft("interest".into()));
        roundtrip(TargetKey::NearRight("rate".into()));
        roundtrip(TargetKey::NearLeftExcl {
            word: "interest".into(),
            partner: "rate".into(),
        });
        roundtrip(TargetKey::NearRightExcl {
            word: "rate".into(),
            partner: "interest".into(),
        });
    }

    #[test]
    fn unordered_is_canonical_in_either_argument_order() {
        assert_eq!(
            TargetKey::unordered("rate", "interest"),
            TargetKey::unordered("interest", "rate")
        );
    }

    #[test]
    fn marker_characters_are_rejected() {
        assert!(TargetKey::Unigram("a*b".into()).validate().is_err());
        assert!(TargetKey::Unigram("a b".into()).validate().is_err());
        assert!(TargetKey::Unigram("{x".into()).validate().is_err());
        assert!(TargetKey::Unigram(String::new()).validate().is_err());
        assert!(TargetKey::Unigram("plain".into()).validate().is_ok());
    }

    #[test]
    fn malformed_keys_fail_to_parse() {
        for bad in ["", "{a b", "{a}", "a b c", "*", "\\x", "&y", "a\\"] {
            assert!(TargetKey::parse(bad).is_err(), "should reject {bad:?}");
        }
    }

    #[test]
    fn ordering_groups_by_kind() {
        let mut keys = vec![
            TargetKey::Ordered("a".into(), "b".into()),
            TargetKey::Unigram("z".into()),
            TargetKey::Unigram("a".into()),
        ];
        keys.sort();
        assert_eq!(keys[0], TargetKey::Unigram("a".into()));
        assert_eq!(keys[1], TargetKey::Unigram("z".into()));
        assert_eq!(keys[2], TargetKey::Ordered("a".into(), "b".into()));
    }
}

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::text::{self, CAP, EMOJI};
use crate::error::{Error, Result};

/// Topic, function-word and proper-name lists. Words are stored lowercase.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryLexicon {
    #[serde(default)]
    pub topics: BTreeMap<String, BTreeSet<String>>,
    #[serde(default)]
    pub function_words: BTreeMap<String, BTreeSet<String>>,
    #[serde(default)]
    pub proper_names: BTreeSet<String>,
}

fn lower_all(set: BTreeSet<String>) -> BTreeSet<String> {
    set.into_iter().map(|w| w.to_lowercase()).collect()
}

impl CategoryLexicon {
    pub fn from_json(json: &str) -> Result<Self> {
        let raw: Self = serde_json::from_str(json)?;
        Ok(Self {
            topics: raw.topics.into_iter().map(|(k, v)| (k, lower_all(v))).collect(),
            function_words: raw.function_words.into_iter().map(|(k, v)| (k, lower_all(v))).collect(),
            proper_names: lower_all(raw.proper_names),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.is_file() {
            return Err(Error::MissingArtifact(path.to_path_buf()));
        }
        let json = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&json).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: e.to_string(),
        })
    }

    pub fn topic_names(&self) -> Vec<&str> {
        self.topics.keys().map(String::as_str).collect()
    }

    /// Indices (in [`Self::topic_names`] order) of the topics containing `token`.
    pub fn topics_of(&self, token: &str) -> Vec<usize> {
        let t = token.to_lowercase();
        self.topics
            .values()
            .enumerate()
            .filter(|(_, words)| words.contains(&t))
            .map(|(i, _)| i)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    Topic(String),
    Pos(String),
    ProperName,
    Hashtag,
    Emoji,
    Punctuation,
    AllCaps,
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Category::Topic(t) => write!(f, "topic:{t}"),
            Category::Pos(p) => write!(f, "pos:{p}"),
            Category::ProperName => f.write_str("proper_names"),
            Category::Hashtag => f.write_str("hashtags"),
            Category::Emoji => f.write_str("emojis"),
            Category::Punctuation => f.write_str("punctuation"),
            Category::AllCaps => f.write_str("all_caps"),
        }
    }
}

/// Categories of an n-gram given its surface tokens. An n-gram belongs to a
/// category when any of its tokens does; the all-caps tag marks the n-gram
/// as all-caps.
pub fn categorize<S: AsRef<str>>(ngram: &[S], lexicon: &CategoryLexicon) -> BTreeSet<Category> {
    let mut out = BTreeSet::new();
    for token in ngram {
        let token = token.as_ref();
        let lower = token.to_lowercase();
        for (name, words) in &lexicon.topics {
            if words.contains(&lower) {
                out.insert(Category::Topic(name.clone()));
            }
        }
        for (name, words) in &lexicon.function_words {
            if words.contains(&lower) {
                out.insert(Category::Pos(name.clone()));
            }
        }
        if lexicon.proper_names.contains(&lower) {
            out.insert(Category::ProperName);
        }
        if token.len() > 1 && token.starts_with('#') {
            out.insert(Category::Hashtag);
        }
        if token == EMOJI || text::is_emoji_token(token) {
            out.insert(Category::Emoji);
        }
        if text::is_punctuation_token(token) {
            out.insert(Category::Punctuation);
        }
        if token == CAP {
            out.insert(Category::AllCaps);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lexicon() -> CategoryLexicon {
        CategoryLexicon::from_json(
            r#"{"topics": {"war": ["Army", "soldier"], "religion": ["lord"]},
                "function_words": {"pronoun": ["we"]},
                "proper_names": ["Jesus", "Trump"]}"#,
        )
        .unwrap()
    }

    #[test]
    fn categorize_examples() {
        let lex = lexicon();
        assert_eq!(categorize(&["#usarmy"], &lex), BTreeSet::from([Category::Hashtag]));
        assert_eq!(categorize(&["jesus"], &lex), BTreeSet::from([Category::ProperName]));
        assert!(categorize(&["xyzq"], &lex).is_empty());
        assert_eq!(
            categorize(&["<CAP>", "army", "!"], &lex),
            BTreeSet::from([Category::AllCaps, Category::Topic("war".into()), Category::Punctuation])
        );
        assert_eq!(categorize(&["<EMOJI>", "😀"], &lex), BTreeSet::from([Category::Emoji]));
        assert_eq!(
            categorize(&["WE"], &lex),
            BTreeSet::from([Category::Pos("pronoun".into())])
        );
    }

    #[test]
    fn topic_lookup_is_case_insensitive() {
        let lex = lexicon();
        assert_eq!(lex.topic_names(), vec!["religion", "war"]);
        assert_eq!(lex.topics_of("ARMY"), vec![1]);
        assert!(lex.topics_of("trump").is_empty());
    }
}

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use super::text::{SPECIALS, UNK};
use crate::error::{Error, Result};

pub const PAD_ID: usize = 0;
pub const UNK_ID: usize = 1;

/// Token ↔ id mapping with dense ids. Special tokens occupy the first ids;
/// the remaining tokens are ordered by descending training count, then
/// lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    min_count: usize,
}

impl Vocabulary {
    pub fn build<I, D>(corpus: I, min_count: usize) -> Result<Self>
    where
        I: IntoIterator<Item = D>,
        D: AsRef<[String]>,
    {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        let docs: Vec<D> = corpus.into_iter().collect();
        let mut total = 0usize;
        for doc in &docs {
            for tok in doc.as_ref() {
                total += 1;
                if !SPECIALS.contains(&tok.as_str()) {
                    *counts.entry(tok.as_str()).or_insert(0) += 1;
                }
            }
        }
        if total == 0 {
            return Err(Error::EmptyCorpus);
        }
        let mut kept: Vec<(&str, usize)> = counts.into_iter().filter(|&(_, c)| c >= min_count).collect();
        kept.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));

        let tokens = SPECIALS
            .iter()
            .map(|s| s.to_string())
            .chain(kept.into_iter().map(|(t, _)| t.to_string()))
            .collect();
        Ok(Self::from_tokens(tokens, min_count))
    }

    fn from_tokens(tokens: Vec<String>, min_count: usize) -> Self {
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Self {
            tokens,
            index,
            min_count,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn min_count(&self) -> usize {
        self.min_count
    }

    pub fn id(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: usize) -> &str {
        self.tokens.get(id).map(String::as_str).unwrap_or(UNK)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    /// Map tokens to ids; out-of-vocabulary tokens become `<UNK>`.
    pub fn encode(&self, tokens: &[String]) -> Vec<usize> {
        tokens.iter().map(|t| self.id(t).unwrap_or(UNK_ID)).collect()
    }

    pub fn decode(&self, ids: &[usize]) -> Vec<String> {
        ids.iter().map(|&i| self.token(i).to_string()).collect()
    }

    /// One `token<TAB>id` line per entry, in id order.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (i, t) in self.tokens.iter().enumerate() {
            let _ = writeln!(out, "{t}\t{i}");
        }
        out
    }

    pub fn from_tsv(text: &str, min_count: usize) -> Result<Self> {
        let mut tokens = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let bad = |message: String| Error::Parse {
                path: "vocab.tsv".into(),
                line: lineno + 1,
                message,
            };
            let (tok, id) = line
                .rsplit_once('\t')
                .ok_or_else(|| bad("expected token<TAB>id".into()))?;
            let id: usize = id.parse().map_err(|_| bad(format!("bad id {id:?}")))?;
            if id != tokens.len() {
                return Err(bad(format!("ids must be dense, expected {}", tokens.len())));
            }
            tokens.push(tok.to_string());
        }
        for (i, s) in SPECIALS.iter().enumerate() {
            if tokens.get(i).map(String::as_str) != Some(*s) {
                return Err(Error::Parse {
                    path: "vocab.tsv".into(),
                    line: i + 1,
                    message: format!("expected special token {s}"),
                });
            }
        }
        Ok(Self::from_tokens(tokens, min_count))
    }
}

//! Tokenization and the normalization pipeline applied to news and user texts.
//!
//! Tokenization splits on whitespace, then peels punctuation marks and emoji
//! off into their own tokens. URLs are kept whole so that normalization can
//! replace them, and `#`/`@` stay attached to the word they prefix so that
//! hashtags and mentions survive as single tokens.

pub const PAD: &str = "<PAD>";
pub const UNK: &str = "<UNK>";
pub const URL: &str = "<URL>";
pub const INT: &str = "<INT>";
pub const CAP: &str = "<CAP>";
pub const EMOJI: &str = "<EMOJI>";
/// Joins timeline and description in the TL+DE setups.
pub const SEP: &str = "<SEP>";

/// Special tokens in id order; `<PAD>` is always id 0 and `<UNK>` id 1.
pub const SPECIALS: [&str; 7] = [PAD, UNK, URL, INT, CAP, EMOJI, SEP];

pub fn is_special(token: &str) -> bool {
    SPECIALS.contains(&token)
}

/// Which text field is being normalized. Determines the length cap and
/// whether emoji tagging applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TextKind {
    Title,
    Body,
    Timeline,
    Description,
}

impl TextKind {
    pub fn max_len(self) -> usize {
        match self {
            TextKind::Title => 30,
            TextKind::Body => 1000,
            TextKind::Timeline => 1000,
            TextKind::Description => 50,
        }
    }

    pub fn is_user_text(self) -> bool {
        matches!(self, TextKind::Timeline | TextKind::Description)
    }
}

/// Emoji detection by code-point range. Covers the pictographic blocks,
/// dingbats, miscellaneous symbols and regional indicators.
pub fn is_emoji_char(c: char) -> bool {
    matches!(c as u32,
        0x1F000..=0x1F02F
        | 0x1F0A0..=0x1F0FF
        | 0x1F1E6..=0x1F1FF
        | 0x1F300..=0x1F5FF
        | 0x1F600..=0x1F64F
        | 0x1F680..=0x1F6FF
        | 0x1F900..=0x1F9FF
        | 0x1FA70..=0x1FAFF
        | 0x2600..=0x26FF
        | 0x2700..=0x27BF
        | 0x2B50
        | 0x2B55
        | 0x231A..=0x231B
        | 0x23E9..=0x23F3)
}

fn is_emoji_modifier(c: char) -> bool {
    matches!(c as u32, 0xFE0F | 0xFE0E | 0x1F3FB..=0x1F3FF | 0x20E3)
}

const ZWJ: char = '\u{200D}';

pub fn is_emoji_token(token: &str) -> bool {
    let mut chars = token.chars();
    matches!(chars.next(), Some(c) if is_emoji_char(c))
        && chars.all(|c| is_emoji_char(c) || is_emoji_modifier(c) || c == ZWJ)
}

/// A character split off as its own token: anything that is neither
/// alphanumeric nor an emoji.
fn is_punct_char(c: char) -> bool {
    !c.is_alphanumeric() && !c.is_whitespace() && !is_emoji_char(c) && !is_emoji_modifier(c) && c != ZWJ
}

pub fn is_punctuation_token(token: &str) -> bool {
    !token.is_empty() && !is_special(token) && token.chars().all(is_punct_char)
}

pub fn is_url(token: &str) -> bool {
    let lower = token.to_ascii_lowercase();
    (lower.starts_with("http://") && lower.len() > 7)
        || (lower.starts_with("https://") && lower.len() > 8)
        || (lower.starts_with("www.") && lower.len() > 4)
}

/// Optional sign followed by one or more ASCII digits.
pub fn is_integer(token: &str) -> bool {
    let digits = token.strip_prefix(['+', '-']).unwrap_or(token);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

/// At least two alphabetic characters, every one of them uppercase.
pub fn is_all_caps(token: &str) -> bool {
    if is_special(token) {
        return false;
    }
    let mut alphabetic = 0;
    for c in token.chars().filter(|c| c.is_alphabetic()) {
        if !c.is_uppercase() {
            return false;
        }
        alphabetic += 1;
    }
    alphabetic >= 2
}

pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        if is_url(chunk) {
            out.push(chunk.to_string());
            continue;
        }
        split_chunk(chunk, &mut out);
    }
    out
}

fn split_chunk(chunk: &str, out: &mut Vec<String>) {
    let chars: Vec<char> = chunk.chars().collect();
    let mut word = String::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if is_emoji_char(c) {
            flush(&mut word, out);
            let mut emoji = String::from(c);
            i += 1;
            while i < chars.len() {
                let next = chars[i];
                if is_emoji_modifier(next) {
                    emoji.push(next);
                    i += 1;
                } else if next == ZWJ && i + 1 < chars.len() && is_emoji_char(chars[i + 1]) {
                    emoji.push(next);
                    emoji.push(chars[i + 1]);
                    i += 2;
                } else {
                    break;
                }
            }
            out.push(emoji);
            continue;
        }
        if is_punct_char(c) {
            let prefixes_word = (c == '#' || c == '@')
                && word.is_empty()
                && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric() || *n == '_');
            if prefixes_word {
                word.push(c);
            } else if c == '_' && !word.is_empty() {
                // handles and hashtags routinely contain underscores
                word.push(c);
            } else {
                flush(&mut word, out);
                out.push(c.to_string());
            }
        } else {
            word.push(c);
        }
        i += 1;
    }
    flush(&mut word, out);
}

fn flush(word: &mut String, out: &mut Vec<String>) {
    if !word.is_empty() {
        out.push(std::mem::take(word));
    }
}

/// Replaces URLs and integers with placeholders, tags all-caps words with
/// `<CAP>`, tags emoji with `<EMOJI>` in user texts, lowercases, and
/// truncates to the cap for `kind`. Tags count toward the cap.
pub fn normalize(tokens: &[String], kind: TextKind) -> Vec<String> {
    let mut out = Vec::with_capacity(tokens.len());
    for token in tokens {
        if is_special(token) {
            out.push(token.clone());
        } else if is_url(token) {
            out.push(URL.to_string());
        } else if is_integer(token) {
            out.push(INT.to_string());
        } else if kind.is_user_text() && is_emoji_token(token) {
            out.push(EMOJI.to_string());
            out.push(token.clone());
        } else if is_all_caps(token) {
            out.push(CAP.to_string());
            out.push(token.to_lowercase());
        } else {
            out.push(token.to_lowercase());
        }
    }
    out.truncate(kind.max_len());
    out
}

/// Tokenize and normalize one raw text field.
pub fn prepare(text: &str, kind: TextKind) -> Vec<String> {
    normalize(&tokenize(text), kind)
}

/// Timeline = concatenation of a user's tweets, normalized as one text.
pub fn prepare_timeline<S: AsRef<str>>(tweets: &[S]) -> Vec<String> {
    let mut tokens = Vec::new();
    for tweet in tweets {
        tokens.extend(tokenize(tweet.as_ref()));
        if tokens.len() > 4 * TextKind::Timeline.max_len() {
            break;
        }
    }
    normalize(&tokens, TextKind::Timeline)
}

/// Fallback retweet extraction for timelines whose records carry no
/// structured retweet list: counts tweets starting with `RT @handle`.
pub fn retweets_from_timeline<S: AsRef<str>>(tweets: &[S]) -> Vec<(String, u32)> {
    let mut counts: std::collections::BTreeMap<String, u32> = Default::default();
    for tweet in tweets {
        let t = tweet.as_ref().trim_start();
        let Some(rest) = t.get(..3).filter(|p| p.eq_ignore_ascii_case("rt ")).map(|_| &t[3..]) else {
            continue;
        };
        let Some(handle) = rest.trim_start().strip_prefix('@') else {
            continue;
        };
        let handle: String = handle
            .chars()
            .take_while(|c| c.is_alphanumeric() || *c == '_')
            .collect();
        if !handle.is_empty() {
            *counts.entry(handle).or_insert(0) += 1;
        }
    }
    counts.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("Trump WINS!"), toks(&["Trump", "WINS", "!"]));
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("a,b"), toks(&["a", ",", "b"]));
    }

    #[test]
    fn tokenize_keeps_urls_hashtags_and_splits_emoji() {
        assert_eq!(
            tokenize("see http://x.co/a?b=1, #usarmy rocks😀😀"),
            toks(&["see", "http://x.co/a?b=1,", "#usarmy", "rocks", "😀", "😀"])
        );
        assert_eq!(tokenize("@some_user: hi"), toks(&["@some_user", ":", "hi"]));
        assert_eq!(tokenize("\"quote\"?!"), toks(&["\"", "quote", "\"", "?", "!"]));
        assert_eq!(tokenize("👍🏽 ok"), toks(&["👍🏽", "ok"]));
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(
            normalize(&toks(&["WINS", "!"]), TextKind::Body),
            toks(&["<CAP>", "wins", "!"])
        );
        assert_eq!(
            normalize(&toks(&["see", "http://x.co", "2020"]), TextKind::Body),
            toks(&["see", "<URL>", "<INT>"])
        );
        assert_eq!(
            normalize(&toks(&["hi", "😀"]), TextKind::Timeline),
            toks(&["hi", "<EMOJI>", "😀"])
        );
        // news text: no emoji tag
        assert_eq!(normalize(&toks(&["hi", "😀"]), TextKind::Body), toks(&["hi", "😀"]));
    }

    #[test]
    fn caps_rule_excludes_single_letters() {
        assert!(!is_all_caps("I"));
        assert!(!is_all_caps("A"));
        assert!(is_all_caps("USA"));
        assert!(is_all_caps("COVID19"));
        assert!(!is_all_caps("Trump"));
        assert!(!is_all_caps("<CAP>"));
    }

    #[test]
    fn integers_and_urls() {
        assert!(is_integer("2020"));
        assert!(is_integer("-5"));
        assert!(is_integer("+12"));
        assert!(!is_integer("-"));
        assert!(!is_integer("3.5"));
        assert!(is_url("https://a.b"));
        assert!(is_url("www.foo.com"));
        assert!(!is_url("http://"));
        assert!(!is_url("wwwfoo"));
    }

    #[test]
    fn truncation_counts_tags() {
        let input: Vec<String> = (0..40).map(|_| "BIG".to_string()).collect();
        let out = normalize(&input, TextKind::Title);
        assert_eq!(out.len(), 30);
        assert_eq!(out[0], CAP);
        assert_eq!(out[1], "big");
        let desc = normalize(&input, TextKind::Description);
        assert_eq!(desc.len(), 50);
    }

    #[test]
    fn retweet_prefix_parser() {
        let tweets = [
            "RT @alice: hello",
            "rt @alice great",
            "RT @bob_2 x",
            "not RT @carol",
            "RT nobody",
        ];
        assert_eq!(
            retweets_from_timeline(&tweets),
            vec![("alice".to_string(), 2), ("bob_2".to_string(), 1)]
        );
    }

    #[test]
    fn timeline_concatenates_tweets() {
        let t = prepare_timeline(&["Hello WORLD", "bye 😀"]);
        assert_eq!(t, toks(&["hello", "<CAP>", "world", "bye", "<EMOJI>", "😀"]));
    }
}

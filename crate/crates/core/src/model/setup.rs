use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Which user-generated text represents a spreader.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UserText {
    Timeline,
    Description,
    Both,
}

/// The seven input configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Setup {
    News,
    Tl,
    De,
    TlDe,
    NewsTl,
    NewsDe,
    NewsTlDe,
}

impl Setup {
    pub const ALL: [Setup; 7] = [
        Setup::News,
        Setup::Tl,
        Setup::De,
        Setup::TlDe,
        Setup::NewsTl,
        Setup::NewsDe,
        Setup::NewsTlDe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Setup::News => "News",
            Setup::Tl => "TL",
            Setup::De => "DE",
            Setup::TlDe => "TL+DE",
            Setup::NewsTl => "N+TL",
            Setup::NewsDe => "N+DE",
            Setup::NewsTlDe => "N+TL+DE",
        }
    }

    pub fn uses_news(self) -> bool {
        matches!(self, Setup::News | Setup::NewsTl | Setup::NewsDe | Setup::NewsTlDe)
    }

    pub fn user_text(self) -> Option<UserText> {
        match self {
            Setup::News => None,
            Setup::Tl | Setup::NewsTl => Some(UserText::Timeline),
            Setup::De | Setup::NewsDe => Some(UserText::Description),
            Setup::TlDe | Setup::NewsTlDe => Some(UserText::Both),
        }
    }

    pub fn uses_users(self) -> bool {
        self.user_text().is_some()
    }

    pub fn modalities(self) -> usize {
        usize::from(self.uses_news()) + usize::from(self.uses_users())
    }
}

impl fmt::Display for Setup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Setup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Setup::ALL
            .into_iter()
            .find(|setup| setup.name() == s)
            .ok_or_else(|| Error::UnknownSetup(s.to_string()))
    }
}

impl Serialize for Setup {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Setup {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in Setup::ALL {
            assert_eq!(s.name().parse::<Setup>().unwrap(), s);
        }
        assert!("N+TL".parse::<Setup>().is_ok());
        let err = "NEWS+TL".parse::<Setup>().unwrap_err().to_string();
        assert!(err.contains("N+TL+DE"), "{err}");
    }
}

//! Letters and words of the path alphabet.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::complex::{EdgeType, Sense};

/// A vertex color, or the leaving/arriving half of an edge traversal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Letter {
    Color(u32),
    Out(EdgeType, Sense),
    In(EdgeType, Sense),
}

pub type Word = Vec<Letter>;

impl Letter {
    pub fn is_color(self) -> bool {
        matches!(self, Letter::Color(_))
    }

    /// Position in the period-3 pattern Color, Out, In.
    pub fn phase(self) -> usize {
        match self {
            Letter::Color(_) => 0,
            Letter::Out(..) => 1,
            Letter::In(..) => 2,
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Letter::Color(c) => write!(f, "C{{{c}}}"),
            Letter::Out(t, s) => write!(f, "O{{{},{}}}", t.token(), s.token()),
            Letter::In(t, s) => write!(f, "I{{{},{}}}", t.token(), s.token()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("bad letter {0:?}")]
pub struct LetterParseError(pub String);

impl FromStr for Letter {
    type Err = LetterParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || LetterParseError(s.to_string());
        let (head, rest) = s.split_at(s.find('{').ok_or_else(bad)?);
        let body = rest
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(bad)?;
        match head {
            "C" => body.parse().map(Letter::Color).map_err(|_| bad()),
            "O" | "I" => {
                let (t, sense) = body.split_once(',').ok_or_else(bad)?;
                let t = EdgeType::from_token(t).ok_or_else(bad)?;
                let sense = match sense {
                    "+" => Sense::Forward,
                    "-" => Sense::Backward,
                    _ => return Err(bad()),
                };
                Ok(if head == "O" {
                    Letter::Out(t, sense)
                } else {
                    Letter::In(t, sense)
                })
            }
            _ => Err(bad()),
        }
    }
}

pub fn format_word(w: &[Letter]) -> String {
    w.iter()
        .map(Letter::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn parse_word(s: &str) -> Result<Word, LetterParseError> {
    s.split_whitespace().map(str::parse).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn letters_round_trip() {
        let w = vec![
            Letter::Color(12),
            Letter::Out(EdgeType::Interior(3), Sense::Forward),
            Letter::In(EdgeType::Left, Sense::Backward),
        ];
        let s = format_word(&w);
        assert_eq!(s, "C{12} O{3,+} I{L,-}");
        assert_eq!(parse_word(&s).unwrap(), w);
        assert!("X{1}".parse::<Letter>().is_err());
        assert!("O{9,+}".parse::<Letter>().is_err());
        assert!("C{}".parse::<Letter>().is_err());
    }
}

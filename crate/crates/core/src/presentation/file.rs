//! Plain-text presentation files.

use std::io::{BufRead, BufWriter, Write};

use super::language::{unpack, AllowedLanguage, WINDOW};
use super::word::{format_word, parse_word};
use super::{pack, Alphabet, Presentation, PresentationError, Relation, RelationKind, Source};

const MAGIC: &str = "quadnil-presentation 1";

const HEADER: &str = "\
# Words are Color, Out, In, Color, ... encodings of walks.
# ALLOWED lists every length-9 factor of a walk encoding on the built levels;
# factors may start mid-pattern. A word of length <= 9 is allowed iff it is a
# prefix of a listed line. Words of length <= 9 that are not allowed, and the
# BACKFORTH words, are zero.
";

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Preamble,
    Alphabet,
    Equiv,
    BackForth,
    Allowed,
}

/// Write `p` in canonical order.
pub fn emit_presentation(p: &Presentation, sink: impl Write) -> std::io::Result<()> {
    let mut out = BufWriter::new(sink);
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "level {}", p.level)?;
    out.write_all(HEADER.as_bytes())?;
    writeln!(out, "ALPHABET")?;
    for l in p.alphabet.letters() {
        writeln!(out, "{l}")?;
    }
    writeln!(out, "EQUIV")?;
    for r in &p.equivalences {
        if let Some((a, b)) = r.sides() {
            writeln!(
                out,
                "{} = {} ; {}",
                format_word(a),
                format_word(b),
                r.source
            )?;
        }
    }
    writeln!(out, "BACKFORTH")?;
    for r in &p.back_and_forth {
        if let RelationKind::Zero(w) = &r.kind {
            writeln!(out, "{} ; {}", format_word(w), r.source)?;
        }
    }
    writeln!(out, "ALLOWED")?;
    for &w in p.allowed.windows() {
        writeln!(out, "{}", format_word(&p.alphabet.decode(&unpack(w))))?;
    }
    out.flush()
}

pub fn load_presentation(source: impl BufRead) -> Result<Presentation, PresentationError> {
    let mut section = Section::Preamble;
    let mut level = None;
    let mut letters = Vec::new();
    let mut alphabet = Alphabet::default();
    let mut equivalences = Vec::new();
    let mut back_and_forth = Vec::new();
    let mut windows = Vec::new();
    let mut saw_magic = false;

    for (i, line) in source.lines().enumerate() {
        let line = line?;
        let n = i + 1;
        let err = |message: String| PresentationError::Parse { line: n, message };
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let next = match line {
            "ALPHABET" => Some(Section::Alphabet),
            "EQUIV" => Some(Section::Equiv),
            "BACKFORTH" => Some(Section::BackForth),
            "ALLOWED" => Some(Section::Allowed),
            _ => None,
        };
        if let Some(next) = next {
            if next <= section {
                return Err(err(format!("section {line} out of order")));
            }
            if section <= Section::Alphabet && next > Section::Alphabet {
                alphabet = Alphabet::new(letters.drain(..)).map_err(|e| err(e.to_string()))?;
            }
            section = next;
            continue;
        }
        let word = |s: &str| parse_word(s).map_err(|e| err(e.to_string()));
        let sourced = |s: &str| -> Result<(String, Source), PresentationError> {
            let (body, src) = s
                .rsplit_once(" ; ")
                .ok_or_else(|| err("missing source".into()))?;
            Ok((body.to_string(), src.parse().map_err(err)?))
        };
        let known = |w: &[super::Letter]| match w.iter().find(|&&l| alphabet.code(l).is_none()) {
            Some(l) => Err(err(format!("letter {l} not in alphabet"))),
            None => Ok(()),
        };
        match section {
            Section::Preamble => {
                if !saw_magic {
                    if line != MAGIC {
                        return Err(err(format!("expected {MAGIC:?}")));
                    }
                    saw_magic = true;
                } else if let Some(v) = line.strip_prefix("level ") {
                    level = Some(v.parse().map_err(|_| err(format!("bad level {v:?}")))?);
                } else {
                    return Err(err(format!("unexpected line {line:?}")));
                }
            }
            Section::Alphabet => {
                letters.push(
                    line.parse()
                        .map_err(|e: super::LetterParseError| err(e.to_string()))?,
                );
            }
            Section::Equiv => {
                let (body, src) = sourced(line)?;
                let (a, b) = body
                    .split_once(" = ")
                    .ok_or_else(|| err("expected `left = right`".into()))?;
                let (a, b) = (word(a)?, word(b)?);
                known(&a)?;
                known(&b)?;
                equivalences.push(Relation::equivalence(a, b, src));
            }
            Section::BackForth => {
                let (body, src) = sourced(line)?;
                let w = word(&body)?;
                known(&w)?;
                back_and_forth.push(Relation {
                    kind: RelationKind::Zero(w),
                    source: src,
                });
            }
            Section::Allowed => {
                let w = word(line)?;
                if w.len() != WINDOW {
                    return Err(err(format!(
                        "window of length {} (expected {WINDOW})",
                        w.len()
                    )));
                }
                known(&w)?;
                windows.push(pack(&alphabet.encode(&w)));
            }
        }
    }
    if section != Section::Allowed {
        return Err(PresentationError::Parse {
            line: 0,
            message: "missing sections".into(),
        });
    }
    equivalences.sort_by(|a, b| a.kind.cmp(&b.kind));
    back_and_forth.sort_by(|a, b| a.kind.cmp(&b.kind));
    Ok(Presentation {
        level: level.ok_or(PresentationError::Parse {
            line: 0,
            message: "missing level".into(),
        })?,
        alphabet,
        equivalences,
        back_and_forth,
        allowed: AllowedLanguage::from_windows(windows),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round_trip(p: &Presentation) -> Presentation {
        let mut buf = Vec::new();
        emit_presentation(p, &mut buf).unwrap();
        load_presentation(buf.as_slice()).unwrap()
    }

    #[test]
    fn empty_presentation_round_trips() {
        let p = Presentation::empty();
        let mut buf = Vec::new();
        emit_presentation(&p, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        for s in ["ALPHABET", "EQUIV", "BACKFORTH", "ALLOWED"] {
            assert!(text.lines().any(|l| l == s));
        }
        assert_eq!(round_trip(&p), p);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = format!("{MAGIC}\nlevel 1\nALPHABET\nC{{0}}\nEQUIV\nC{{0}} = ; tile 1/0\n");
        match load_presentation(text.as_bytes()) {
            Err(PresentationError::Parse { line, .. }) => assert_eq!(line, 6),
            other => panic!("{other:?}"),
        }
        let text = format!("{MAGIC}\nlevel 1\nEQUIV\nALPHABET\n");
        match load_presentation(text.as_bytes()) {
            Err(PresentationError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        let text = format!("{MAGIC}\nlevel 1\nALPHABET\nC{{0}}\nEQUIV\nBACKFORTH\nALLOWED\nC{{1}} C{{1}} C{{1}} C{{1}} C{{1}} C{{1}} C{{1}} C{{1}} C{{1}}\n");
        match load_presentation(text.as_bytes()) {
            Err(PresentationError::Parse { line, message }) => {
                assert_eq!(line, 8);
                assert!(message.contains("not in alphabet"));
            }
            other => panic!("{other:?}"),
        }
    }
}

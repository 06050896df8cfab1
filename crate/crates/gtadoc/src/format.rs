//! The GTDC container.
//!
//! Little-endian throughout:
//!
//! ```text
//! "GTDC" u8 version=1 u32 numWords u32 numSplitters u32 numRules
//! numWords  x (u32 byteLen, UTF-8 bytes)
//! numRules  x (u32 bodyLen, bodyLen x u32 symbol)     root first
//! ```

use gtadoc_core::{Dictionary, Grammar, SymbolId};
use thiserror::Error;

pub const MAGIC: &[u8; 4] = b"GTDC";
pub const VERSION: u8 = 1;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("bad magic: not a GTDC file")]
    BadMagic,
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u8),
    #[error("truncated {section} at byte {offset}")]
    Truncated { section: &'static str, offset: usize },
    #[error("dictionary word {index} is not valid UTF-8")]
    InvalidWord { index: u32 },
    #[error("dictionary word {index} is a duplicate")]
    DuplicateWord { index: u32 },
    #[error("grammar has no root rule")]
    NoRoot,
    #[error("symbol {symbol} in rule {rule} at position {position} is out of range")]
    SymbolOutOfRange { rule: u32, position: usize, symbol: u32 },
    #[error("{0} trailing bytes after the rules section")]
    TrailingBytes(usize),
    #[error("invalid grammar: {0}")]
    Invalid(String),
}

fn put(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

pub fn serialize(g: &Grammar) -> Vec<u8> {
    let d = &g.dictionary;
    let words: usize = d.words().iter().map(|w| 4 + w.len()).sum();
    let mut out = Vec::with_capacity(17 + words + 4 * (g.size() + g.rules.len()));
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    put(&mut out, d.num_words());
    put(&mut out, d.num_splitters());
    put(&mut out, g.rules.len() as u32);
    for w in d.words() {
        put(&mut out, w.len() as u32);
        out.extend_from_slice(w.as_bytes());
    }
    for body in &g.rules {
        put(&mut out, body.len() as u32);
        for s in body {
            put(&mut out, s.0);
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, section: &'static str) -> Result<&'a [u8], FormatError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or(FormatError::Truncated {
                section,
                offset: self.pos,
            })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self, section: &'static str) -> Result<u32, FormatError> {
        let b = self.take(4, section)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

pub fn deserialize(bytes: &[u8]) -> Result<Grammar, FormatError> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(FormatError::BadMagic);
    }
    let mut r = Reader { bytes, pos: 4 };
    let version = r.take(1, "header")?[0];
    if version != VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    let num_words = r.u32("header")?;
    let num_splitters = r.u32("header")?;
    let num_rules = r.u32("header")?;
    if num_rules == 0 {
        return Err(FormatError::NoRoot);
    }
    // every word needs at least its length prefix
    if (num_words as usize).saturating_mul(4) > r.remaining() {
        return Err(FormatError::Truncated {
            section: "dictionary",
            offset: r.pos,
        });
    }
    let mut words = Vec::with_capacity(num_words as usize);
    for index in 0..num_words {
        let len = r.u32("dictionary")? as usize;
        let raw = r.take(len, "dictionary")?;
        let w = std::str::from_utf8(raw).map_err(|_| FormatError::InvalidWord { index })?;
        words.push(w.to_owned());
    }
    let limit = num_words as u64 + num_splitters as u64 + num_rules as u64;
    if (num_rules as usize).saturating_mul(4) > r.remaining() {
        return Err(FormatError::Truncated {
            section: "rules",
            offset: r.pos,
        });
    }
    let mut rules = Vec::with_capacity(num_rules as usize);
    for rule in 0..num_rules {
        let len = r.u32("rules")? as usize;
        let raw = r.take(len.saturating_mul(4), "rules")?;
        let mut body = Vec::with_capacity(len);
        for (position, c) in raw.chunks_exact(4).enumerate() {
            let symbol = u32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            if symbol as u64 >= limit {
                return Err(FormatError::SymbolOutOfRange { rule, position, symbol });
            }
            body.push(SymbolId(symbol));
        }
        rules.push(body);
    }
    if r.remaining() > 0 {
        return Err(FormatError::TrailingBytes(r.remaining()));
    }
    let dictionary = Dictionary::from_words(words, num_splitters).ok_or_else(|| FormatError::DuplicateWord {
        index: first_duplicate(bytes),
    })?;
    let g = Grammar { dictionary, rules };
    g.check_symbols().map_err(|e| FormatError::Invalid(e.to_string()))?;
    Ok(g)
}

// Only reached on the error path; re-reads the dictionary to name the word.
fn first_duplicate(bytes: &[u8]) -> u32 {
    let mut r = Reader { bytes, pos: 9 };
    let n = r.u32("header").unwrap_or(0);
    r.pos = 17;
    let mut seen = std::collections::HashSet::new();
    for i in 0..n {
        let Ok(len) = r.u32("dictionary") else { break };
        let Ok(w) = r.take(len as usize, "dictionary") else {
            break;
        };
        if !seen.insert(w) {
            return i;
        }
    }
    0
}

#[cfg(test)]
mod tests {
    use super::*;
    use gtadoc_core::grammar::build_corpus_stream;
    use gtadoc_core::sequitur::infer;

    fn g1() -> Grammar {
        let files = [("A", vec!["a", "b", "a", "b", "c"]), ("B", vec!["a", "b", "c"])];
        let (d, s) = build_corpus_stream(&files).unwrap();
        infer(d, &s)
    }

    #[test]
    fn round_trip_g1() {
        let g = g1();
        let bytes = serialize(&g);
        assert_eq!(&bytes[..5], b"GTDC\x01");
        assert_eq!(&bytes[5..17], &[3, 0, 0, 0, 2, 0, 0, 0, 3, 0, 0, 0]);
        let back = deserialize(&bytes).unwrap();
        assert_eq!(back, g);
        assert_eq!(serialize(&back), bytes);
    }

    #[test]
    fn distinct_errors() {
        let bytes = serialize(&g1());
        assert_eq!(deserialize(&[]), Err(FormatError::BadMagic));
        assert_eq!(deserialize(b"GTDX\x01"), Err(FormatError::BadMagic));
        let mut v = bytes.clone();
        v[4] = 2;
        assert_eq!(deserialize(&v), Err(FormatError::UnsupportedVersion(2)));
        assert!(matches!(
            deserialize(&bytes[..bytes.len() - 2]),
            Err(FormatError::Truncated { section: "rules", .. })
        ));
        assert!(matches!(
            deserialize(&bytes[..12]),
            Err(FormatError::Truncated { section: "header", .. })
        ));
        let mut v = bytes.clone();
        v.push(0);
        assert_eq!(deserialize(&v), Err(FormatError::TrailingBytes(1)));
        // last symbol of the last rule
        let mut v = bytes.clone();
        let n = v.len();
        v[n - 4..].copy_from_slice(&99u32.to_le_bytes());
        assert!(matches!(
            deserialize(&v),
            Err(FormatError::SymbolOutOfRange { symbol: 99, .. })
        ));
        // R2 referencing the root
        let mut v = bytes.clone();
        v[n - 8..n - 4].copy_from_slice(&5u32.to_le_bytes());
        assert!(matches!(deserialize(&v), Err(FormatError::Invalid(_))));
        // second word renamed to the first
        let mut v = bytes;
        v[26] = b'a';
        assert_eq!(deserialize(&v), Err(FormatError::DuplicateWord { index: 1 }));
    }
}

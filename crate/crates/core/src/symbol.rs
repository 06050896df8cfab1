//! Word dictionary and the integer symbol space shared by words, file
//! splitters and rule references.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use hashbrown::HashMap;

/// A symbol in a rule body.
///
/// Values are classified by two range boundaries: `[0, num_words)` are
/// words, `[num_words, num_words + num_splitters)` are file splitters, and
/// everything above is a rule reference (`rule_base + rule index`).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolId(pub u32);

impl fmt::Debug for SymbolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    Word(u32),
    /// Splitter for the file with this index.
    Splitter(u32),
    /// Reference to the rule with this index (root is 0 and is never referenced).
    Rule(u32),
}

/// Pure range classification of a symbol value.
#[inline]
pub fn classify(sym: SymbolId, num_words: u32, num_splitters: u32) -> SymbolKind {
    let v = sym.0;
    if v < num_words {
        SymbolKind::Word(v)
    } else if v - num_words < num_splitters {
        SymbolKind::Splitter(v - num_words)
    } else {
        SymbolKind::Rule(v - num_words - num_splitters)
    }
}

/// Bidirectional word/id mapping. Ids are dense and assigned in first
/// appearance order; one splitter id per file follows the word range.
#[derive(Clone, Default)]
pub struct Dictionary {
    words: Vec<String>,
    index: HashMap<String, u32>,
    num_splitters: u32,
}

impl Dictionary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a dictionary from an ordered word list. Returns `None` on a
    /// duplicate word.
    pub fn from_words(words: Vec<String>, num_splitters: u32) -> Option<Self> {
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i as u32).is_some() {
                return None;
            }
        }
        Some(Self {
            words,
            index,
            num_splitters,
        })
    }

    /// Returns the id of `word`, assigning the next id if it is new.
    pub fn intern(&mut self, word: &str) -> u32 {
        if let Some(&id) = self.index.get(word) {
            return id;
        }
        let id = self.words.len() as u32;
        self.words.push(String::from(word));
        self.index.insert(String::from(word), id);
        id
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: u32) -> Option<&str> {
        self.words.get(id as usize).map(String::as_str)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn num_words(&self) -> u32 {
        self.words.len() as u32
    }

    pub fn num_splitters(&self) -> u32 {
        self.num_splitters
    }

    pub(crate) fn set_num_splitters(&mut self, n: u32) {
        self.num_splitters = n;
    }

    pub fn splitter(&self, file: u32) -> SymbolId {
        SymbolId(self.num_words() + file)
    }

    /// First symbol value used for rule references.
    pub fn rule_base(&self) -> u32 {
        self.num_words() + self.num_splitters
    }

    pub fn rule_symbol(&self, rule: u32) -> SymbolId {
        SymbolId(self.rule_base() + rule)
    }

    pub fn classify(&self, sym: SymbolId) -> SymbolKind {
        classify(sym, self.num_words(), self.num_splitters)
    }
}

impl PartialEq for Dictionary {
    fn eq(&self, other: &Self) -> bool {
        self.words == other.words && self.num_splitters == other.num_splitters
    }
}

impl Eq for Dictionary {}

impl fmt::Debug for Dictionary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Dictionary")
            .field("words", &self.words)
            .field("num_splitters", &self.num_splitters)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_ranges() {
        assert_eq!(classify(SymbolId(0), 3, 2), SymbolKind::Word(0));
        assert_eq!(classify(SymbolId(2), 3, 2), SymbolKind::Word(2));
        assert_eq!(classify(SymbolId(3), 3, 2), SymbolKind::Splitter(0));
        assert_eq!(classify(SymbolId(4), 3, 2), SymbolKind::Splitter(1));
        assert_eq!(classify(SymbolId(5), 3, 2), SymbolKind::Rule(0));
        assert_eq!(classify(SymbolId(7), 3, 2), SymbolKind::Rule(2));
        // No splitters at all.
        assert_eq!(classify(SymbolId(1), 1, 0), SymbolKind::Rule(0));
    }

    #[test]
    fn interning_is_first_appearance() {
        let mut d = Dictionary::new();
        assert_eq!(d.intern("b"), 0);
        assert_eq!(d.intern("a"), 1);
        assert_eq!(d.intern("b"), 0);
        assert_eq!(d.word(1), Some("a"));
        assert_eq!(d.id("zz"), None);
    }

    #[test]
    fn duplicate_words_rejected() {
        let words = alloc::vec![String::from("x"), String::from("x")];
        assert!(Dictionary::from_words(words, 1).is_none());
    }
}

//! Corpus stream construction, the grammar container, and full expansion.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use hashbrown::HashSet;

use crate::error::{Error, Result};
use crate::symbol::{Dictionary, SymbolId, SymbolKind};

/// A straight-line context-free grammar. `rules[0]` is the root; its body
/// is the whole corpus with one splitter after every file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grammar {
    pub dictionary: Dictionary,
    pub rules: Vec<Vec<SymbolId>>,
}

impl Grammar {
    pub fn root(&self) -> &[SymbolId] {
        &self.rules[0]
    }

    pub fn num_rules(&self) -> usize {
        self.rules.len()
    }

    pub fn num_files(&self) -> usize {
        self.dictionary.num_splitters() as usize
    }

    pub fn classify(&self, sym: SymbolId) -> SymbolKind {
        self.dictionary.classify(sym)
    }

    /// Total number of symbols over all rule bodies.
    pub fn size(&self) -> usize {
        self.rules.iter().map(Vec::len).sum()
    }

    /// Checks that every symbol is in range, that no rule references the
    /// root, and that splitters only occur in the root.
    pub fn check_symbols(&self) -> Result<()> {
        if self.rules.is_empty() {
            return Err(Error::Corruption(String::from("grammar has no root rule")));
        }
        let n = self.rules.len() as u32;
        for (r, body) in self.rules.iter().enumerate() {
            for (pos, &sym) in body.iter().enumerate() {
                match self.classify(sym) {
                    SymbolKind::Word(_) => {}
                    SymbolKind::Splitter(_) if r == 0 => {}
                    SymbolKind::Splitter(_) => {
                        return Err(Error::Corruption(format!(
                            "splitter {sym:?} outside the root (rule {r}, position {pos})"
                        )))
                    }
                    SymbolKind::Rule(c) if c == 0 || c >= n => {
                        return Err(Error::Corruption(format!(
                            "invalid rule reference {sym:?} in rule {r} at position {pos}"
                        )))
                    }
                    SymbolKind::Rule(_) => {}
                }
            }
        }
        Ok(())
    }

    /// Expands the root and splits it into per-file word-id streams.
    pub fn decompress_files(&self) -> Result<Vec<Vec<u32>>> {
        let num_words = self.dictionary.num_words();
        let root = expand(self, self.dictionary.rule_symbol(0))?;
        let mut files = Vec::with_capacity(self.num_files());
        let mut current = Vec::new();
        for sym in root {
            if sym.0 < num_words {
                current.push(sym.0);
                continue;
            }
            let file = sym.0 - num_words;
            if file as usize != files.len() {
                return Err(Error::Corruption(format!(
                    "splitter for file {file} found where file {} ends",
                    files.len()
                )));
            }
            files.push(core::mem::take(&mut current));
        }
        if !current.is_empty() || files.len() != self.num_files() {
            return Err(Error::Corruption(String::from(
                "root does not end with the last file splitter",
            )));
        }
        Ok(files)
    }
}

/// Converts ordered `(file name, tokens)` pairs into a dictionary and the
/// symbol stream `file0 spt0 file1 spt1 ...`.
pub fn build_corpus_stream<N, F, T>(files: &[(N, F)]) -> Result<(Dictionary, Vec<SymbolId>)>
where
    N: AsRef<str>,
    F: AsRef<[T]>,
    T: AsRef<str>,
{
    if files.is_empty() {
        return Err(Error::Usage(String::from("corpus has no files")));
    }
    let mut names = HashSet::with_capacity(files.len());
    for (name, _) in files {
        if !names.insert(name.as_ref()) {
            return Err(Error::Usage(format!("duplicate file name {:?}", name.as_ref())));
        }
    }

    let mut dict = Dictionary::new();
    let ids: Vec<Vec<u32>> = files
        .iter()
        .map(|(_, tokens)| tokens.as_ref().iter().map(|t| dict.intern(t.as_ref())).collect())
        .collect();
    dict.set_num_splitters(files.len() as u32);

    let total = ids.iter().map(Vec::len).sum::<usize>() + files.len();
    let mut stream = Vec::with_capacity(total);
    for (file, words) in ids.iter().enumerate() {
        stream.extend(words.iter().map(|&w| SymbolId(w)));
        stream.push(dict.splitter(file as u32));
    }
    Ok((dict, stream))
}

/// Recursively substitutes rule references until only words and splitters
/// remain.
pub fn expand(grammar: &Grammar, symbol: SymbolId) -> Result<Vec<SymbolId>> {
    let n = grammar.rules.len();
    let start = match grammar.classify(symbol) {
        SymbolKind::Rule(r) if (r as usize) < n => r as usize,
        SymbolKind::Rule(_) => {
            return Err(Error::Corruption(format!("unknown symbol {symbol:?}")));
        }
        _ => return Ok(alloc::vec![symbol]),
    };

    let mut out = Vec::new();
    // (rule, next position) frames; a path longer than the rule count
    // means a reference cycle.
    let mut stack: Vec<(usize, usize)> = alloc::vec![(start, 0)];
    while let Some(top) = stack.last_mut() {
        let (rule, pos) = *top;
        let body = &grammar.rules[rule];
        if pos == body.len() {
            stack.pop();
            continue;
        }
        top.1 += 1;
        let sym = body[pos];
        match grammar.classify(sym) {
            SymbolKind::Rule(c) => {
                if c as usize >= n {
                    return Err(Error::Corruption(format!("unknown symbol {sym:?}")));
                }
                if stack.len() > n {
                    return Err(Error::Corruption(String::from("rule reference cycle")));
                }
                stack.push((c as usize, 0));
            }
            _ => out.push(sym),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use alloc::vec;

    fn ids(v: &[u32]) -> Vec<SymbolId> {
        v.iter().map(|&x| SymbolId(x)).collect()
    }

    #[test]
    fn g1_stream() {
        let (dict, stream) = build_corpus_stream(&fixtures::g1_files()).unwrap();
        assert_eq!(dict.words(), &["a", "b", "c"]);
        assert_eq!(dict.num_splitters(), 2);
        assert_eq!(dict.splitter(0), SymbolId(3));
        assert_eq!(dict.splitter(1), SymbolId(4));
        assert_eq!(stream, ids(&[0, 1, 0, 1, 2, 3, 0, 1, 2, 4]));
    }

    #[test]
    fn single_and_identical_files() {
        let (d, s) = build_corpus_stream(&[("f", vec!["x"])]).unwrap();
        assert_eq!(d.id("x"), Some(0));
        assert_eq!(s, ids(&[0, 1]));

        let (_, s) = build_corpus_stream(&[("f", vec!["w"]), ("g", vec!["w"])]).unwrap();
        assert_eq!(s, ids(&[0, 1, 0, 2]));
    }

    #[test]
    fn zero_files_and_duplicate_names() {
        let none: [(&str, Vec<&str>); 0] = [];
        assert!(matches!(build_corpus_stream(&none), Err(Error::Usage(_))));
        let dup = [("f", vec!["a"]), ("f", vec!["b"])];
        assert!(matches!(build_corpus_stream(&dup), Err(Error::Usage(_))));
    }

    #[test]
    fn expand_g1() {
        let g = fixtures::g1_grammar();
        // R2 = [R1, c] -> a b c
        assert_eq!(expand(&g, g.dictionary.rule_symbol(2)).unwrap(), ids(&[0, 1, 2]));
        assert_eq!(expand(&g, SymbolId(1)).unwrap(), ids(&[1]));
        assert_eq!(
            expand(&g, g.dictionary.rule_symbol(0)).unwrap(),
            ids(&[0, 1, 0, 1, 2, 3, 0, 1, 2, 4])
        );
        assert!(matches!(expand(&g, SymbolId(99)), Err(Error::Corruption(_))));
    }

    #[test]
    fn expand_detects_cycles() {
        let mut g = fixtures::g1_grammar();
        // R1 = [R2, a] with R2 = [R1, c]
        g.rules[1] = vec![g.dictionary.rule_symbol(2), SymbolId(0)];
        assert!(matches!(
            expand(&g, g.dictionary.rule_symbol(0)),
            Err(Error::Corruption(_))
        ));
    }

    #[test]
    fn decompress_g1() {
        let g = fixtures::g1_grammar();
        assert_eq!(g.decompress_files().unwrap(), vec![vec![0, 1, 0, 1, 2], vec![0, 1, 2]]);
    }

    #[test]
    fn check_symbols_rejects_misplaced_splitter() {
        let mut g = fixtures::g1_grammar();
        g.rules[1].push(SymbolId(3));
        assert!(matches!(g.check_symbols(), Err(Error::Corruption(_))));
        let mut g = fixtures::g1_grammar();
        g.rules[2].push(g.dictionary.rule_symbol(0));
        assert!(g.check_symbols().is_err());
    }
}

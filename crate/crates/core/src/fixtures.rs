//! Small hand-built grammars shared by unit tests.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::grammar::Grammar;
use crate::symbol::{Dictionary, SymbolId};

pub fn g1_files() -> Vec<(&'static str, Vec<&'static str>)> {
    vec![("A", vec!["a", "b", "a", "b", "c"]), ("B", vec!["a", "b", "c"])]
}

pub fn dict(words: &[&str], files: u32) -> Dictionary {
    Dictionary::from_words(words.iter().map(|w| String::from(*w)).collect(), files).unwrap()
}

/// root=[R1,R2,spt0,R2,spt1], R1=[a,b], R2=[R1,c]
pub fn g1_grammar() -> Grammar {
    let d = dict(&["a", "b", "c"], 2);
    let r = |i| d.rule_symbol(i);
    let rules = vec![
        vec![r(1), r(2), SymbolId(3), r(2), SymbolId(4)],
        vec![SymbolId(0), SymbolId(1)],
        vec![r(1), SymbolId(2)],
    ];
    Grammar { dictionary: d, rules }
}

/// root=[R1,spt0], R1=[R2,R2], R2=[w]
pub fn chain_grammar() -> Grammar {
    let d = dict(&["w"], 1);
    let r = |i| d.rule_symbol(i);
    let rules = vec![vec![r(1), SymbolId(1)], vec![r(2), r(2)], vec![SymbolId(0)]];
    Grammar { dictionary: d, rules }
}

/// Root-only grammar over the given word ids (one file).
pub fn root_only(words: &[&str], body: &[u32]) -> Grammar {
    let d = dict(words, 1);
    let mut root: Vec<SymbolId> = body.iter().map(|&w| SymbolId(w)).collect();
    root.push(d.splitter(0));
    Grammar {
        dictionary: d,
        rules: vec![root],
    }
}

/// root=[R1,R1,spt0], R1=[z]
pub fn all_leaf_grammar() -> Grammar {
    let d = dict(&["z"], 1);
    let r1 = d.rule_symbol(1);
    Grammar {
        dictionary: d,
        rules: vec![vec![r1, r1, SymbolId(1)], vec![SymbolId(0)]],
    }
}

//! Direct scans for the two Sequitur laws and the splitter placement rule.
//! Independent of the inference code, so they double as test oracles.

use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::grammar::Grammar;
use crate::symbol::{SymbolId, SymbolKind};

/// Digrams that occur at two non-overlapping positions anywhere in the
/// grammar. Overlap only exists for runs like `xxx` inside one body.
pub fn digram_violations(grammar: &Grammar) -> Vec<(SymbolId, SymbolId)> {
    let mut seen: HashMap<(SymbolId, SymbolId), (usize, usize)> = HashMap::new();
    let mut out = Vec::new();
    for (r, body) in grammar.rules.iter().enumerate() {
        for (i, pair) in body.windows(2).enumerate() {
            let key = (pair[0], pair[1]);
            match seen.get(&key) {
                None => {
                    seen.insert(key, (r, i));
                }
                Some(&(pr, pi)) if pr == r && pi + 1 == i => {}
                Some(_) => out.push(key),
            }
        }
    }
    out
}

/// Non-root rules referenced fewer than two times.
pub fn underused_rules(grammar: &Grammar) -> Vec<u32> {
    let mut uses = alloc::vec![0u32; grammar.rules.len()];
    for body in &grammar.rules {
        for &sym in body {
            if let SymbolKind::Rule(c) = grammar.classify(sym) {
                if let Some(u) = uses.get_mut(c as usize) {
                    *u += 1;
                }
            }
        }
    }
    (1..grammar.rules.len() as u32)
        .filter(|&r| uses[r as usize] < 2)
        .collect()
}

/// True when splitters occur only in the root, once each, in file order.
pub fn splitters_well_placed(grammar: &Grammar) -> bool {
    let mut expected = 0u32;
    for (r, body) in grammar.rules.iter().enumerate() {
        for &sym in body {
            if let SymbolKind::Splitter(f) = grammar.classify(sym) {
                if r != 0 || f != expected {
                    return false;
                }
                expected += 1;
            }
        }
    }
    expected == grammar.dictionary.num_splitters()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn g1_satisfies_laws() {
        let g = fixtures::g1_grammar();
        assert!(digram_violations(&g).is_empty());
        assert!(underused_rules(&g).is_empty());
        assert!(splitters_well_placed(&g));
    }

    #[test]
    fn detects_violations() {
        let g = fixtures::root_only(&["x", "y"], &[0, 1, 0, 1]);
        assert_eq!(digram_violations(&g), alloc::vec![(SymbolId(0), SymbolId(1))]);
        // xxx overlaps, xxxx does not
        let g = fixtures::root_only(&["x"], &[0, 0, 0]);
        assert!(digram_violations(&g).is_empty());
        let g = fixtures::root_only(&["x"], &[0, 0, 0, 0]);
        assert_eq!(digram_violations(&g).len(), 1);

        let g = fixtures::chain_grammar();
        // R1 used once
        assert_eq!(underused_rules(&g), alloc::vec![1]);
    }
}

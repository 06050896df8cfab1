//! Traversal-ready view of a grammar: per-rule aggregated edges, readiness
//! counters, masks and weights.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;
use core::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use hashbrown::HashMap;

use crate::error::{Error, Result};
use crate::grammar::Grammar;
use crate::symbol::{classify, SymbolId, SymbolKind};

/// One grammar production plus the mutable traversal state.
#[derive(Debug)]
pub struct Rule {
    pub id: u32,
    pub body: Vec<SymbolId>,
    /// `(word, frequency)` of word symbols in the body, ascending word id.
    pub own_words: Vec<(u32, u64)>,
    /// `(rule, frequency)` of referenced rules, in first-appearance order.
    pub sub_rules: Vec<(u32, u64)>,
    /// `(parent rule, frequency of this rule in the parent)`, ascending
    /// parent id. Includes the root.
    pub parents: Vec<(u32, u64)>,
    /// `(file, references from that file's root segment)`, ascending file.
    pub root_files: Vec<(u32, u64)>,
    /// Frequency-weighted in-edges from non-root parents.
    pub num_in_edge: u64,
    /// Distinct sub-rules.
    pub num_out_edge: u64,
    /// Words in the full expansion (splitters excluded).
    pub exp_len: u64,
    /// Longest path from the root.
    pub level: usize,
    pub(crate) cur_in_edge: AtomicU64,
    pub(crate) cur_out_edge: AtomicU64,
    pub(crate) mask: AtomicBool,
    pub(crate) weight: AtomicU64,
}

impl Rule {
    pub fn parent_ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.parents.iter().map(|&(p, _)| p)
    }

    pub fn is_leaf(&self) -> bool {
        self.sub_rules.is_empty()
    }

    /// Count of word symbols in the body.
    pub fn word_size(&self) -> u64 {
        self.own_words.iter().map(|&(_, f)| f).sum()
    }

    /// Count of rule-reference symbols in the body.
    pub fn sub_rule_size(&self) -> u64 {
        self.sub_rules.iter().map(|&(_, f)| f).sum()
    }

    pub fn weight(&self) -> u64 {
        self.weight.load(Ordering::Acquire)
    }

    pub fn mask(&self) -> bool {
        self.mask.load(Ordering::Acquire)
    }

    pub fn cur_in_edge(&self) -> u64 {
        self.cur_in_edge.load(Ordering::Acquire)
    }

    pub fn cur_out_edge(&self) -> u64 {
        self.cur_out_edge.load(Ordering::Acquire)
    }
}

/// One file's part of the root body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    /// Positions in the root body, splitter excluded.
    pub range: Range<usize>,
    pub words: Vec<(u32, u64)>,
    pub rules: Vec<(u32, u64)>,
}

#[derive(Debug)]
pub struct Dag {
    pub rules: Vec<Rule>,
    pub num_words: u32,
    pub num_files: u32,
    pub segments: Vec<Segment>,
    /// Longest root-to-leaf path, in edges.
    pub depth: usize,
    pub total_elements: usize,
    /// Rule ids, parents before children, root first.
    pub topo_order: Vec<u32>,
}

fn aggregate(items: impl Iterator<Item = u32>) -> Vec<(u32, u64)> {
    let mut pos: HashMap<u32, usize> = HashMap::new();
    let mut out: Vec<(u32, u64)> = Vec::new();
    for x in items {
        match pos.get(&x) {
            Some(&i) => out[i].1 += 1,
            None => {
                pos.insert(x, out.len());
                out.push((x, 1));
            }
        }
    }
    out
}

fn sorted_counts(items: impl Iterator<Item = u32>) -> Vec<(u32, u64)> {
    let mut v = aggregate(items);
    v.sort_unstable();
    v
}

impl Dag {
    pub fn build(grammar: &Grammar) -> Result<Self> {
        grammar.check_symbols()?;
        let dict = &grammar.dictionary;
        let (nw, ns) = (dict.num_words(), dict.num_splitters());
        let n = grammar.rules.len();

        let mut rules: Vec<Rule> = grammar
            .rules
            .iter()
            .enumerate()
            .map(|(id, body)| {
                let kinds = || body.iter().map(|&s| classify(s, nw, ns));
                Rule {
                    id: id as u32,
                    body: body.clone(),
                    own_words: sorted_counts(kinds().filter_map(|k| match k {
                        SymbolKind::Word(w) => Some(w),
                        _ => None,
                    })),
                    sub_rules: aggregate(kinds().filter_map(|k| match k {
                        SymbolKind::Rule(r) => Some(r),
                        _ => None,
                    })),
                    parents: Vec::new(),
                    root_files: Vec::new(),
                    num_in_edge: 0,
                    num_out_edge: 0,
                    exp_len: 0,
                    level: 0,
                    cur_in_edge: AtomicU64::new(0),
                    cur_out_edge: AtomicU64::new(0),
                    mask: AtomicBool::new(false),
                    weight: AtomicU64::new(0),
                }
            })
            .collect();

        for p in 0..n {
            rules[p].num_out_edge = rules[p].sub_rules.len() as u64;
            for i in 0..rules[p].sub_rules.len() {
                let (c, f) = rules[p].sub_rules[i];
                rules[c as usize].parents.push((p as u32, f));
                if p != 0 {
                    rules[c as usize].num_in_edge += f;
                }
            }
        }

        // Kahn order from the root over distinct edges; leftovers are
        // unreachable or on a cycle.
        let mut pending: Vec<usize> = rules.iter().map(|r| r.parents.len()).collect();
        let mut topo_order = Vec::with_capacity(n);
        if pending[0] != 0 {
            return Err(Error::Corruption(String::from("root is referenced by a rule")));
        }
        topo_order.push(0u32);
        let mut head = 0;
        while head < topo_order.len() {
            let p = topo_order[head] as usize;
            head += 1;
            for i in 0..rules[p].sub_rules.len() {
                let c = rules[p].sub_rules[i].0 as usize;
                let lvl = rules[p].level + 1;
                if lvl > rules[c].level {
                    rules[c].level = lvl;
                }
                pending[c] -= 1;
                if pending[c] == 0 {
                    topo_order.push(c as u32);
                }
            }
        }
        if topo_order.len() != n {
            let bad = (0..n).find(|&r| pending[r] != 0 || (r != 0 && rules[r].parents.is_empty()));
            return Err(Error::Corruption(format!(
                "rule {} is unreachable or on a reference cycle",
                bad.unwrap_or(0)
            )));
        }
        let depth = rules.iter().map(|r| r.level).max().unwrap_or(0);

        for &r in topo_order.iter().rev() {
            let r = r as usize;
            let mut len = rules[r].word_size();
            for &(c, f) in &rules[r].sub_rules {
                len = f
                    .checked_mul(rules[c as usize].exp_len)
                    .and_then(|x| x.checked_add(len))
                    .ok_or(Error::Overflow)?;
            }
            rules[r].exp_len = len;
        }

        let segments = split_root(&rules[0].body, nw, ns)?;
        for (file, seg) in segments.iter().enumerate() {
            for &(c, f) in &seg.rules {
                rules[c as usize].root_files.push((file as u32, f));
            }
        }

        let total_elements = rules.iter().map(|r| r.body.len()).sum();
        Ok(Self {
            rules,
            num_words: nw,
            num_files: ns,
            segments,
            depth,
            total_elements,
            topo_order,
        })
    }

    pub fn root(&self) -> &Rule {
        &self.rules[0]
    }

    pub fn rule(&self, id: u32) -> &Rule {
        &self.rules[id as usize]
    }

    pub fn num_rules(&self) -> usize {
        self.rules.len()
    }

    #[inline]
    pub fn kind(&self, sym: SymbolId) -> SymbolKind {
        classify(sym, self.num_words, self.num_files)
    }

    /// Clears masks, readiness counters and weights.
    pub fn reset(&self) {
        for r in &self.rules {
            r.mask.store(false, Ordering::Release);
            r.cur_in_edge.store(0, Ordering::Release);
            r.cur_out_edge.store(0, Ordering::Release);
            r.weight.store(0, Ordering::Release);
        }
    }

    pub fn weights(&self) -> Vec<u64> {
        self.rules.iter().map(Rule::weight).collect()
    }

    /// Words in the corpus, splitters excluded.
    pub fn corpus_len(&self) -> u64 {
        self.rules[0].exp_len
    }
}

fn split_root(root: &[SymbolId], nw: u32, ns: u32) -> Result<Vec<Segment>> {
    let mut segments = Vec::with_capacity(ns as usize);
    let mut start = 0;
    for (pos, &sym) in root.iter().enumerate() {
        if let SymbolKind::Splitter(f) = classify(sym, nw, ns) {
            if f as usize != segments.len() {
                return Err(Error::Corruption(format!(
                    "splitter of file {f} at root position {pos}, expected file {}",
                    segments.len()
                )));
            }
            let body = &root[start..pos];
            let kinds = || body.iter().map(|&s| classify(s, nw, ns));
            segments.push(Segment {
                range: start..pos,
                words: sorted_counts(kinds().filter_map(|k| match k {
                    SymbolKind::Word(w) => Some(w),
                    _ => None,
                })),
                rules: sorted_counts(kinds().filter_map(|k| match k {
                    SymbolKind::Rule(r) => Some(r),
                    _ => None,
                })),
            });
            start = pos + 1;
        }
    }
    if start != root.len() || segments.len() != ns as usize {
        return Err(Error::Corruption(String::from(
            "root must end with one splitter per file",
        )));
    }
    Ok(segments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use alloc::vec;

    #[test]
    fn g1_structure() {
        let dag = Dag::build(&fixtures::g1_grammar()).unwrap();
        assert_eq!(dag.root().sub_rules, vec![(1, 1), (2, 2)]);
        assert_eq!(dag.rule(2).sub_rules, vec![(1, 1)]);
        assert_eq!(dag.rule(1).parent_ids().collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(dag.rule(1).num_in_edge, 1);
        assert_eq!(dag.rule(2).num_in_edge, 0);
        assert_eq!(dag.depth, 2);
        assert_eq!(dag.rule(1).exp_len, 2);
        assert_eq!(dag.rule(2).exp_len, 3);
        assert_eq!(dag.corpus_len(), 8);
        assert_eq!(dag.segments[0].range, 0..2);
        assert_eq!(dag.segments[1].range, 3..4);
        assert_eq!(dag.rule(2).root_files, vec![(0, 1), (1, 1)]);
        assert_eq!(dag.total_elements, 5 + 2 + 2);
        assert!(dag
            .rules
            .iter()
            .all(|r| !r.mask() && r.weight() == 0 && r.cur_in_edge() == 0));
    }

    #[test]
    fn root_only_has_no_edges() {
        let dag = Dag::build(&fixtures::root_only(&["x", "y"], &[0, 1, 0])).unwrap();
        assert_eq!(dag.depth, 0);
        assert!(dag.root().sub_rules.is_empty());
        assert_eq!(dag.segments[0].words, vec![(0, 2), (1, 1)]);
    }

    #[test]
    fn chain_counts_parallel_edges() {
        let dag = Dag::build(&fixtures::chain_grammar()).unwrap();
        assert_eq!(dag.rule(2).num_in_edge, 2);
        assert_eq!(dag.rule(1).num_in_edge, 0);
        assert_eq!(dag.rule(1).num_out_edge, 1);
        assert_eq!(dag.depth, 2);
    }

    #[test]
    fn cycles_and_orphans_are_corruption() {
        let mut g = fixtures::g1_grammar();
        g.rules[1] = vec![g.dictionary.rule_symbol(2), SymbolId(0)];
        assert!(matches!(Dag::build(&g), Err(Error::Corruption(_))));

        let mut g = fixtures::g1_grammar();
        g.rules.push(vec![SymbolId(0)]);
        assert!(matches!(Dag::build(&g), Err(Error::Corruption(_))));

        let mut g = fixtures::g1_grammar();
        g.rules[0].pop();
        assert!(matches!(Dag::build(&g), Err(Error::Corruption(_))));
    }

    #[test]
    fn in_edge_identity() {
        let dag = Dag::build(&fixtures::g1_grammar()).unwrap();
        let lhs: u64 = dag.rules.iter().map(|r| r.num_in_edge).sum();
        let rhs: u64 = dag.rules[1..].iter().map(|p| p.sub_rule_size()).sum();
        assert_eq!(lhs, rhs);
    }
}

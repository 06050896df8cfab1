//! Online Sequitur grammar inference.
//!
//! Symbols live in an index arena as doubly linked lists, one circular list
//! per rule closed by a guard node. A digram index maps every symbol pair to
//! the node starting its (single) occurrence. Appending a symbol checks the
//! new digram; a repeat either reuses the rule whose whole body is that
//! digram or creates a new rule, and a rule whose use count drops to one is
//! inlined back into its single user.
//!
//! New rules take the lowest free rule slot, so rule numbering depends only
//! on the input. After the last symbol a repair pass re-scans the grammar
//! and enforces both laws exactly (the classic online procedure leaves a
//! few digrams unindexed after inlining a rule).

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Reverse;

use hashbrown::HashMap;

use crate::grammar::Grammar;
use crate::symbol::{Dictionary, SymbolId};

const NIL: u32 = u32::MAX;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum Sym {
    Term(u32),
    Rule(u32),
    Guard(u32),
}

const FREED: Sym = Sym::Guard(NIL);

#[derive(Clone, Copy)]
struct Node {
    sym: Sym,
    prev: u32,
    next: u32,
}

#[derive(Clone, Copy)]
struct RuleSlot {
    guard: u32,
    uses: u32,
    live: bool,
}

/// Incremental Sequitur builder. Feed terminals with [`Sequitur::push`],
/// then call [`Sequitur::finish`].
pub struct Sequitur {
    nodes: Vec<Node>,
    free_nodes: Vec<u32>,
    rules: Vec<RuleSlot>,
    free_rules: BinaryHeap<Reverse<u32>>,
    index: HashMap<(Sym, Sym), u32>,
    pending: Vec<u32>,
    repairs: usize,
}

impl Default for Sequitur {
    fn default() -> Self {
        Self::new()
    }
}

impl Sequitur {
    pub fn new() -> Self {
        let mut s = Self {
            nodes: Vec::new(),
            free_nodes: Vec::new(),
            rules: Vec::new(),
            free_rules: BinaryHeap::new(),
            index: HashMap::new(),
            pending: Vec::new(),
            repairs: 0,
        };
        let root = s.new_rule();
        debug_assert_eq!(root, 0);
        s
    }

    pub fn with_capacity(symbols: usize) -> Self {
        let mut s = Self::new();
        s.nodes.reserve(symbols);
        s.index.reserve(symbols / 2);
        s
    }

    /// Appends one terminal to the root rule.
    pub fn push(&mut self, terminal: u32) {
        let n = self.new_node(Sym::Term(terminal));
        let last = self.last(0);
        self.insert_after(last, n);
        let p = self.nodes[n as usize].prev;
        self.check(p);
        self.drain_pending();
    }

    /// Number of digram repairs the final pass had to make.
    pub fn repairs(&self) -> usize {
        self.repairs
    }

    /// Enforces both grammar laws and returns rule bodies, root first, with
    /// rule references encoded as `rule_base + final rule index`.
    pub fn finish(mut self, rule_base: u32) -> Vec<Vec<SymbolId>> {
        self.repair();
        let mut final_id = alloc::vec![NIL; self.rules.len()];
        let mut next = 0u32;
        for (slot, rule) in self.rules.iter().enumerate() {
            if rule.live {
                final_id[slot] = next;
                next += 1;
            }
        }
        let mut out = Vec::with_capacity(next as usize);
        for (slot, rule) in self.rules.iter().enumerate() {
            if !rule.live {
                continue;
            }
            let mut body = Vec::new();
            let mut n = self.nodes[rule.guard as usize].next;
            while n != rule.guard {
                let node = &self.nodes[n as usize];
                body.push(match node.sym {
                    Sym::Term(t) => SymbolId(t),
                    Sym::Rule(r) => SymbolId(rule_base + final_id[r as usize]),
                    Sym::Guard(_) => unreachable!("guard inside rule {slot}"),
                });
                n = node.next;
            }
            out.push(body);
        }
        out
    }

    // --- arena -----------------------------------------------------------

    fn new_node(&mut self, sym: Sym) -> u32 {
        if let Sym::Rule(r) = sym {
            self.rules[r as usize].uses += 1;
        }
        let node = Node {
            sym,
            prev: NIL,
            next: NIL,
        };
        match self.free_nodes.pop() {
            Some(i) => {
                self.nodes[i as usize] = node;
                i
            }
            None => {
                self.nodes.push(node);
                (self.nodes.len() - 1) as u32
            }
        }
    }

    fn free_node(&mut self, n: u32) {
        self.nodes[n as usize] = Node {
            sym: FREED,
            prev: NIL,
            next: NIL,
        };
        self.free_nodes.push(n);
    }

    fn new_rule(&mut self) -> u32 {
        let slot = match self.free_rules.pop() {
            Some(Reverse(s)) => s,
            None => {
                self.rules.push(RuleSlot {
                    guard: NIL,
                    uses: 0,
                    live: false,
                });
                (self.rules.len() - 1) as u32
            }
        };
        let g = self.new_node(Sym::Guard(slot));
        self.nodes[g as usize].prev = g;
        self.nodes[g as usize].next = g;
        self.rules[slot as usize] = RuleSlot {
            guard: g,
            uses: 0,
            live: true,
        };
        slot
    }

    fn free_rule(&mut self, r: u32) {
        let g = self.rules[r as usize].guard;
        self.free_node(g);
        self.rules[r as usize] = RuleSlot {
            guard: NIL,
            uses: 0,
            live: false,
        };
        self.free_rules.push(Reverse(r));
    }

    #[inline]
    fn sym(&self, n: u32) -> Sym {
        self.nodes[n as usize].sym
    }

    #[inline]
    fn next(&self, n: u32) -> u32 {
        self.nodes[n as usize].next
    }

    #[inline]
    fn prev(&self, n: u32) -> u32 {
        self.nodes[n as usize].prev
    }

    #[inline]
    fn is_guard(&self, n: u32) -> bool {
        matches!(self.sym(n), Sym::Guard(_))
    }

    fn first(&self, r: u32) -> u32 {
        self.next(self.rules[r as usize].guard)
    }

    fn last(&self, r: u32) -> u32 {
        self.prev(self.rules[r as usize].guard)
    }

    fn digram(&self, n: u32) -> (Sym, Sym) {
        (self.sym(n), self.sym(self.next(n)))
    }

    /// True when `n` starts a real (guard-free) digram.
    fn starts_digram(&self, n: u32) -> bool {
        let next = self.next(n);
        next != NIL && !self.is_guard(n) && !self.is_guard(next)
    }

    // --- linking ---------------------------------------------------------

    fn delete_digram(&mut self, n: u32) {
        if !self.starts_digram(n) {
            return;
        }
        let key = self.digram(n);
        if self.index.get(&key) == Some(&n) {
            self.index.remove(&key);
        }
    }

    fn join(&mut self, left: u32, right: u32) {
        if self.next(left) != NIL {
            self.delete_digram(left);
            // In a run like `xxx` only one of the two overlapping digrams is
            // indexed; re-index the survivor when its partner goes away.
            let (rp, rn) = (self.prev(right), self.next(right));
            if rp != NIL
                && rn != NIL
                && self.sym(right) == self.sym(rp)
                && self.sym(right) == self.sym(rn)
                && !self.is_guard(right)
            {
                let key = self.digram(right);
                self.index.insert(key, right);
            }
            let (lp, ln) = (self.prev(left), self.next(left));
            if lp != NIL
                && ln != NIL
                && self.sym(left) == self.sym(ln)
                && self.sym(left) == self.sym(lp)
                && !self.is_guard(left)
            {
                let key = self.digram(lp);
                self.index.insert(key, lp);
            }
        }
        self.nodes[left as usize].next = right;
        self.nodes[right as usize].prev = left;
    }

    fn insert_after(&mut self, n: u32, y: u32) {
        let next = self.next(n);
        self.join(y, next);
        self.join(n, y);
    }

    fn delete_symbol(&mut self, n: u32) {
        let (p, nx) = (self.prev(n), self.next(n));
        self.join(p, nx);
        if !self.is_guard(n) {
            self.delete_digram(n);
            if let Sym::Rule(r) = self.sym(n) {
                self.rules[r as usize].uses -= 1;
            }
        }
        self.free_node(n);
    }

    // --- the two laws ----------------------------------------------------

    /// Indexes the digram starting at `n`, or resolves a repeat. Returns
    /// true when the digram was already present.
    fn check(&mut self, n: u32) -> bool {
        if !self.starts_digram(n) {
            return false;
        }
        let key = self.digram(n);
        match self.index.get(&key).copied() {
            Some(m) if m != n && self.starts_digram(m) && self.digram(m) == key => {
                if self.next(m) != n && self.next(n) != m {
                    self.do_match(n, m);
                }
                true
            }
            Some(m) if m == n => false,
            _ => {
                self.index.insert(key, n);
                false
            }
        }
    }

    fn do_match(&mut self, ss: u32, m: u32) {
        let r = if self.is_guard(self.prev(m)) && self.is_guard(self.next(self.next(m))) {
            let Sym::Guard(r) = self.sym(self.prev(m)) else {
                unreachable!()
            };
            self.substitute(ss, r);
            r
        } else {
            let r = self.new_rule();
            let a = self.new_node(self.sym(ss));
            let last = self.last(r);
            self.insert_after(last, a);
            let b = self.new_node(self.sym(self.next(ss)));
            let last = self.last(r);
            self.insert_after(last, b);
            self.substitute(m, r);
            self.substitute(ss, r);
            if self.rules[r as usize].live {
                let f = self.first(r);
                if self.starts_digram(f) {
                    let key = self.digram(f);
                    self.index.insert(key, f);
                }
            }
            r
        };
        if !self.rules[r as usize].live {
            return;
        }
        let f = self.first(r);
        if let Sym::Rule(c) = self.sym(f) {
            if self.rules[c as usize].uses == 1 {
                self.expand(f);
            }
        }
    }

    fn substitute(&mut self, n: u32, r: u32) {
        let q = self.prev(n);
        let a = self.next(q);
        self.delete_symbol(a);
        let b = self.next(q);
        self.delete_symbol(b);
        let s = self.new_node(Sym::Rule(r));
        self.insert_after(q, s);
        if !self.check(q) {
            let nq = self.next(q);
            self.check(nq);
        }
    }

    /// Inlines the rule referenced by `n`, whose only use is `n`.
    fn expand(&mut self, n: u32) {
        let Sym::Rule(r) = self.sym(n) else {
            unreachable!("expand on a terminal")
        };
        let (left, right) = (self.prev(n), self.next(n));
        let (f, l) = (self.first(r), self.last(r));

        self.delete_digram(n);
        // Unlink n without touching the use count of the rule being removed.
        self.join(left, right);
        self.free_node(n);
        self.free_rule(r);

        self.join(left, f);
        self.join(l, right);
        self.pending.push(left);
        self.pending.push(l);
    }

    fn drain_pending(&mut self) {
        while let Some(n) = self.pending.pop() {
            if self.starts_digram(n) {
                let key = self.digram(n);
                if self.index.get(&key) != Some(&n) {
                    self.check(n);
                }
            }
        }
    }

    fn find_use(&self, r: u32) -> Option<u32> {
        for rule in self.rules.iter().filter(|s| s.live) {
            let mut n = self.next(rule.guard);
            while n != rule.guard {
                if self.sym(n) == Sym::Rule(r) {
                    return Some(n);
                }
                n = self.next(n);
            }
        }
        None
    }

    fn repair(&mut self) {
        loop {
            let mut changed = false;
            for r in 1..self.rules.len() as u32 {
                let slot = self.rules[r as usize];
                if slot.live && slot.uses == 1 {
                    if let Some(n) = self.find_use(r) {
                        self.expand(n);
                        self.drain_pending();
                        self.repairs += 1;
                        changed = true;
                    }
                }
            }

            self.index.clear();
            let mut found = None;
            'scan: for r in 0..self.rules.len() as u32 {
                if !self.rules[r as usize].live {
                    continue;
                }
                let g = self.rules[r as usize].guard;
                let mut n = self.next(g);
                while n != g && self.next(n) != g {
                    let key = self.digram(n);
                    match self.index.get(&key).copied() {
                        None => {
                            self.index.insert(key, n);
                        }
                        Some(m) if self.next(m) == n => {}
                        Some(m) => {
                            found = Some((n, m));
                            break 'scan;
                        }
                    }
                    n = self.next(n);
                }
            }
            if let Some((n, m)) = found {
                self.do_match(n, m);
                self.drain_pending();
                self.repairs += 1;
                changed = true;
            }
            if !changed {
                break;
            }
        }
    }
}

/// Infers a grammar for a corpus stream produced by
/// [`crate::grammar::build_corpus_stream`].
pub fn infer(dictionary: Dictionary, stream: &[SymbolId]) -> Grammar {
    let mut s = Sequitur::with_capacity(stream.len());
    for sym in stream {
        s.push(sym.0);
    }
    let rules = s.finish(dictionary.rule_base());
    Grammar { dictionary, rules }
}

/// Runs inference on raw terminals, returning bodies with rule references
/// offset by `rule_base` and the number of repairs made by the final pass.
pub fn infer_raw(stream: &[u32], rule_base: u32) -> (Vec<Vec<SymbolId>>, usize) {
    let mut s = Sequitur::with_capacity(stream.len());
    for &t in stream {
        s.push(t);
    }
    s.repair();
    let repairs = s.repairs();
    (s.finish(rule_base), repairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::grammar::{build_corpus_stream, expand};
    use crate::laws;
    use alloc::vec;
    use proptest::prelude::*;

    fn ids(v: &[u32]) -> Vec<SymbolId> {
        v.iter().map(|&x| SymbolId(x)).collect()
    }

    #[test]
    fn g1_grammar_shape() {
        let (dict, stream) = build_corpus_stream(&fixtures::g1_files()).unwrap();
        let g = infer(dict, &stream);
        assert_eq!(g, fixtures::g1_grammar());
    }

    #[test]
    fn single_symbol() {
        let (rules, _) = infer_raw(&[7], 100);
        assert_eq!(rules, vec![ids(&[7])]);
    }

    #[test]
    fn one_repeated_digram() {
        // x y x y -> root=[R1,R1], R1=[x,y]
        let (rules, _) = infer_raw(&[0, 1, 0, 1], 10);
        assert_eq!(rules, vec![ids(&[11, 11]), ids(&[0, 1])]);
    }

    #[test]
    fn runs_of_one_symbol() {
        for n in 1..40 {
            let stream = vec![3u32; n];
            let (rules, _) = infer_raw(&stream, 10);
            let g = raw_grammar(rules, 10);
            assert_eq!(expand(&g, SymbolId(10)).unwrap(), ids(&stream), "n={n}");
            assert!(laws::digram_violations(&g).is_empty(), "n={n}");
            assert!(laws::underused_rules(&g).is_empty(), "n={n}");
        }
    }

    fn raw_grammar(rules: Vec<Vec<SymbolId>>, base: u32) -> Grammar {
        let words = (0..base).map(|i| alloc::format!("w{i}")).collect();
        Grammar {
            dictionary: Dictionary::from_words(words, 0).unwrap(),
            rules,
        }
    }

    proptest! {
        #[test]
        fn laws_and_losslessness(stream in proptest::collection::vec(0u32..4, 1..400)) {
            let (rules, _) = infer_raw(&stream, 4);
            let g = raw_grammar(rules, 4);
            prop_assert_eq!(expand(&g, SymbolId(4)).unwrap(), ids(&stream));
            prop_assert!(laws::digram_violations(&g).is_empty());
            prop_assert!(laws::underused_rules(&g).is_empty());
        }
    }
}

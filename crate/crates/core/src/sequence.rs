//! Counting `l`-word windows without expanding rules.
//!
//! Each rule keeps the first and last `l - 1` words of its expansion. A
//! parent scans its own body with sub-rules replaced by those buffers, so a
//! window crossing a rule boundary is seen (and counted) only by the parent.
//! Windows lying wholly inside a sub-rule are left to that sub-rule.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use hashbrown::HashMap;

use crate::dag::Dag;
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::symbol::{SymbolId, SymbolKind};
use crate::table::mix64;
use crate::traversal::LocalCounts;

/// Memory bound for one rule's windows when only sub-rule heads are
/// inlined: `word_size + (l - 1) * sub_rule_size - (l - 1)`, floored at 0.
pub fn head_tail_bound(word_size: u64, l: u64, sub_rule_size: u64) -> u64 {
    let k = l.saturating_sub(1);
    word_size
        .saturating_add(k.saturating_mul(sub_rule_size))
        .saturating_sub(k)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HeadTail {
    pub head: Vec<u32>,
    pub tail: Vec<u32>,
    pub exp_len: u64,
    pub ready: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeadTails {
    pub l: usize,
    /// Indexed by rule id; the root entry stays empty.
    pub rules: Vec<HeadTail>,
    pub rounds: usize,
}

impl HeadTails {
    pub fn get(&self, rule: u32) -> &HeadTail {
        &self.rules[rule as usize]
    }
}

enum Side {
    Head,
    Tail,
}

/// First (or last) `want` words of `rule`, or `None` while a sub-rule
/// that contributes to them is not ready yet.
fn edge_words(dag: &Dag, done: &[HeadTail], rule: u32, want: usize, side: Side) -> Option<Vec<u32>> {
    let body = &dag.rule(rule).body;
    let mut out: Vec<u32> = Vec::with_capacity(want);
    let take = |sym: SymbolId, out: &mut Vec<u32>| -> Option<()> {
        let left = want - out.len();
        match dag.kind(sym) {
            SymbolKind::Word(w) => out.push(w),
            SymbolKind::Rule(c) => {
                let ht = &done[c as usize];
                if !ht.ready {
                    return None;
                }
                match side {
                    Side::Head => out.extend(ht.head.iter().take(left)),
                    Side::Tail => out.extend(ht.tail.iter().rev().take(left)),
                }
            }
            SymbolKind::Splitter(_) => {}
        }
        Some(())
    };
    match side {
        Side::Head => {
            for &sym in body {
                if out.len() == want {
                    break;
                }
                take(sym, &mut out)?;
            }
        }
        Side::Tail => {
            for &sym in body.iter().rev() {
                if out.len() == want {
                    break;
                }
                take(sym, &mut out)?;
            }
            out.reverse();
        }
    }
    Some(out)
}

/// Fills head and tail buffers in rounds. A rule whose first (or last)
/// `l - 1` words touch a sub-rule that is not ready yet retries next round.
pub fn init_head_tail<E: Executor>(dag: &Dag, l: usize, exec: &E) -> Result<HeadTails> {
    if l == 0 {
        return Err(Error::Usage("sequence length must be at least 1".into()));
    }
    let n = dag.num_rules();
    let mut rules: Vec<HeadTail> = dag
        .rules
        .iter()
        .map(|r| HeadTail {
            exp_len: r.exp_len,
            ..HeadTail::default()
        })
        .collect();
    let mut pending: Vec<u32> = (1..n as u32).collect();
    let mut rounds = 0;
    while !pending.is_empty() {
        rounds += 1;
        if rounds > dag.depth + 1 {
            return Err(Error::Corruption(format!(
                "head/tail buffers unresolved after {} rounds",
                dag.depth + 1
            )));
        }
        let done = &rules;
        let attempts = exec.map(pending.len(), |i| {
            let r = pending[i];
            let want = (l - 1).min(done[r as usize].exp_len as usize);
            let head = edge_words(dag, done, r, want, Side::Head)?;
            let tail = edge_words(dag, done, r, want, Side::Tail)?;
            Some((head, tail))
        });
        let mut still = Vec::new();
        for (r, attempt) in pending.iter().zip(attempts) {
            match attempt {
                Some((head, tail)) => {
                    let ht = &mut rules[*r as usize];
                    ht.head = head;
                    ht.tail = tail;
                    ht.ready = true;
                }
                None => still.push(*r),
            }
        }
        pending = still;
    }
    Ok(HeadTails { l, rules, rounds })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Item {
    Word(u32),
    Gap,
}

/// Inlined material of one sub-rule occurrence whose own windows are
/// counted by that sub-rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub rule: u32,
    pub span: Range<usize>,
    pub gapped: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LocalStream {
    pub items: Vec<Item>,
    pub regions: Vec<Region>,
    /// Region index of each item, or `u32::MAX` for own material.
    owner: Vec<u32>,
}

const OWN: u32 = u32::MAX;

impl LocalStream {
    fn push(&mut self, item: Item, owner: u32) {
        self.items.push(item);
        self.owner.push(owner);
    }

    /// Appends `body` with sub-rules replaced by their buffers.
    fn extend_body(&mut self, dag: &Dag, ht: &HeadTails, body: &[SymbolId]) {
        let l = ht.l as u64;
        for &sym in body {
            match dag.kind(sym) {
                SymbolKind::Word(w) => self.push(Item::Word(w), OWN),
                SymbolKind::Splitter(_) => self.push(Item::Gap, OWN),
                SymbolKind::Rule(c) => {
                    let b = ht.get(c);
                    if b.exp_len < l {
                        // too short to own a window; head holds it all
                        for &w in &b.head {
                            self.push(Item::Word(w), OWN);
                        }
                        continue;
                    }
                    let id = self.regions.len() as u32;
                    let start = self.items.len();
                    let gapped = b.exp_len > 2 * (l - 1);
                    if gapped {
                        for &w in &b.head {
                            self.push(Item::Word(w), id);
                        }
                        self.push(Item::Gap, id);
                        for &w in &b.tail {
                            self.push(Item::Word(w), id);
                        }
                    } else {
                        // head and tail overlap: together they are the expansion
                        let skip = (2 * (l - 1) - b.exp_len) as usize;
                        for &w in b.head.iter().chain(&b.tail[skip..]) {
                            self.push(Item::Word(w), id);
                        }
                    }
                    self.regions.push(Region {
                        rule: c,
                        span: start..self.items.len(),
                        gapped,
                    });
                }
            }
        }
    }

    /// Calls `f` with every window this stream is responsible for.
    pub fn for_each_window(&self, l: usize, mut f: impl FnMut(&[u32])) {
        if l == 0 || self.items.len() < l {
            return;
        }
        let mut words: Vec<u32> = Vec::with_capacity(l);
        let mut clean_from = 0usize;
        for end in 0..self.items.len() {
            if self.items[end] == Item::Gap {
                clean_from = end + 1;
                continue;
            }
            if end + 1 < clean_from + l {
                continue;
            }
            let start = end + 1 - l;
            if self.owner[start] != OWN && self.owner[start] == self.owner[end] {
                continue;
            }
            words.clear();
            words.extend(self.items[start..=end].iter().map(|it| match it {
                Item::Word(w) => *w,
                Item::Gap => unreachable!(),
            }));
            f(&words);
        }
    }

    pub fn window_count(&self, l: usize) -> usize {
        let mut n = 0;
        self.for_each_window(l, |_| n += 1);
        n
    }
}

pub fn build_local_stream(dag: &Dag, ht: &HeadTails, rule: u32) -> LocalStream {
    let mut s = LocalStream::default();
    s.extend_body(dag, ht, &dag.rule(rule).body);
    s
}

/// Stream of one file's root material.
pub fn segment_stream(dag: &Dag, ht: &HeadTails, file: usize) -> LocalStream {
    let mut s = LocalStream::default();
    let range = dag.segments[file].range.clone();
    s.extend_body(dag, ht, &dag.root().body[range]);
    s
}

/// Maps word windows to table keys and back.
///
/// Short windows are packed into the key at a fixed bit width. When they
/// do not fit in 64 bits each distinct window is interned under a
/// fingerprint; a colliding fingerprint probes to the next free value.
#[derive(Debug, Clone)]
pub enum GramCodec {
    Packed {
        l: usize,
        bits: u32,
    },
    Interned {
        l: usize,
        by_key: HashMap<u64, Vec<u32>>,
        by_gram: HashMap<Vec<u32>, u64>,
    },
}

impl GramCodec {
    pub fn new(dag: &Dag, l: usize) -> Self {
        let alphabet = dag.num_words as u64 + dag.num_files as u64 + dag.num_rules() as u64;
        let bits = (64 - alphabet.saturating_sub(1).leading_zeros()).max(1);
        if l as u64 * bits as u64 <= 64 {
            GramCodec::Packed { l, bits }
        } else {
            GramCodec::Interned {
                l,
                by_key: HashMap::new(),
                by_gram: HashMap::new(),
            }
        }
    }

    pub fn is_packed(&self) -> bool {
        matches!(self, GramCodec::Packed { .. })
    }

    pub fn l(&self) -> usize {
        match self {
            GramCodec::Packed { l, .. } | GramCodec::Interned { l, .. } => *l,
        }
    }

    fn pack(bits: u32, gram: &[u32]) -> u64 {
        gram.iter()
            .fold(0u64, |acc, &w| acc.checked_shl(bits).unwrap_or(0) | w as u64)
    }

    /// Key of an already known (or packable) window.
    pub fn key(&self, gram: &[u32]) -> Option<u64> {
        match self {
            GramCodec::Packed { bits, .. } => Some(Self::pack(*bits, gram)),
            GramCodec::Interned { by_gram, .. } => by_gram.get(gram).copied(),
        }
    }

    pub fn intern(&mut self, gram: &[u32]) -> u64 {
        match self {
            GramCodec::Packed { bits, .. } => Self::pack(*bits, gram),
            GramCodec::Interned { by_key, by_gram, .. } => {
                if let Some(&k) = by_gram.get(gram) {
                    return k;
                }
                let mut k = gram.iter().fold(0x9e37_79b9_7f4a_7c15u64, |h, &w| mix64(h ^ w as u64));
                while by_key.contains_key(&k) {
                    k = k.wrapping_add(1);
                }
                by_key.insert(k, gram.to_vec());
                by_gram.insert(gram.to_vec(), k);
                k
            }
        }
    }

    pub fn decode(&self, key: u64) -> Option<Vec<u32>> {
        match self {
            GramCodec::Packed { l, bits } => {
                let mask = if *bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
                let mut out = vec![0u32; *l];
                let mut k = key;
                for slot in out.iter_mut().rev() {
                    *slot = (k & mask) as u32;
                    k = k.checked_shr(*bits).unwrap_or(0);
                }
                Some(out)
            }
            GramCodec::Interned { by_key, .. } => by_key.get(&key).cloned(),
        }
    }
}

fn window_counts(stream: &LocalStream, l: usize) -> HashMap<Vec<u32>, u64> {
    let mut m: HashMap<Vec<u32>, u64> = HashMap::new();
    stream.for_each_window(l, |g| {
        if let Some(c) = m.get_mut(g) {
            *c += 1;
        } else {
            m.insert(g.to_vec(), 1);
        }
    });
    m
}

fn packed_counts(stream: &LocalStream, codec: &GramCodec) -> Vec<(u64, u64)> {
    let mut m: HashMap<u64, u64> = HashMap::new();
    stream.for_each_window(codec.l(), |g| {
        // packing never fails
        *m.entry(codec.key(g).unwrap_or(0)).or_insert(0) += 1;
    });
    let mut v: Vec<_> = m.into_iter().collect();
    v.sort_unstable();
    v
}

/// Per-rule window counts keyed through `codec`. Interning runs in rule
/// order, then file order, so keys are reproducible.
pub fn gram_local_counts<E: Executor>(dag: &Dag, ht: &HeadTails, exec: &E) -> (LocalCounts, GramCodec) {
    let l = ht.l;
    let mut codec = GramCodec::new(dag, l);
    let n = dag.num_rules();
    let nf = dag.segments.len();
    let stream_of = |i: usize| {
        if i < n {
            if i == 0 {
                LocalStream::default()
            } else {
                build_local_stream(dag, ht, i as u32)
            }
        } else {
            segment_stream(dag, ht, i - n)
        }
    };
    let all: Vec<Vec<(u64, u64)>> = if codec.is_packed() {
        let c = &codec;
        exec.map(n + nf, |i| packed_counts(&stream_of(i), c))
    } else {
        let maps = exec.map(n + nf, |i| {
            let mut v: Vec<_> = window_counts(&stream_of(i), l).into_iter().collect();
            v.sort_unstable();
            v
        });
        maps.into_iter()
            .map(|m| {
                let mut v: Vec<(u64, u64)> = m.into_iter().map(|(g, c)| (codec.intern(&g), c)).collect();
                v.sort_unstable();
                v
            })
            .collect()
    };
    let mut rules = all;
    let segments = rules.split_off(n);
    let span_count = |total: u64| total.saturating_sub(l as u64 - 1);
    let key_space = (dag.num_words as u64)
        .checked_pow(l as u32)
        .unwrap_or(u64::MAX)
        .min(span_count(dag.corpus_len()));
    (
        LocalCounts {
            rules,
            segments,
            key_space,
            span: l,
        },
        codec,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::fixtures;
    use crate::grammar::expand;
    use crate::sequitur;
    use proptest::prelude::*;

    fn words(v: &[u32]) -> Vec<u32> {
        v.to_vec()
    }

    #[test]
    fn bound_formula() {
        assert_eq!(head_tail_bound(5, 3, 2), 7);
        assert_eq!(head_tail_bound(1, 3, 1), 1);
        assert_eq!(head_tail_bound(9, 1, 4), 9);
        assert_eq!(head_tail_bound(0, 3, 1), 0);
    }

    #[test]
    fn g1_heads_and_tails() {
        let dag = Dag::build(&fixtures::g1_grammar()).unwrap();
        let ht = init_head_tail(&dag, 3, &Sequential).unwrap();
        assert_eq!(ht.get(1).head, words(&[0, 1]));
        assert_eq!(ht.get(1).tail, words(&[0, 1]));
        assert_eq!(ht.get(1).exp_len, 2);
        assert_eq!(ht.get(2).head, words(&[0, 1]));
        assert_eq!(ht.get(2).tail, words(&[1, 2]));
        assert_eq!(ht.get(2).exp_len, 3);
        assert!(ht.rounds <= dag.depth);

        let ht = init_head_tail(&dag, 2, &Sequential).unwrap();
        assert_eq!(
            (ht.get(1).head.clone(), ht.get(1).tail.clone()),
            (words(&[0]), words(&[1]))
        );
        assert_eq!(
            (ht.get(2).head.clone(), ht.get(2).tail.clone()),
            (words(&[0]), words(&[2]))
        );
    }

    #[test]
    fn leaf_shorter_than_buffer() {
        let dag = Dag::build(&fixtures::all_leaf_grammar()).unwrap();
        let ht = init_head_tail(&dag, 3, &Sequential).unwrap();
        assert_eq!(ht.get(1).head, words(&[0]));
        assert_eq!(ht.get(1).tail, words(&[0]));
        assert_eq!(ht.rounds, 1);
    }

    #[test]
    fn g1_segment_stream() {
        let dag = Dag::build(&fixtures::g1_grammar()).unwrap();
        let ht = init_head_tail(&dag, 3, &Sequential).unwrap();
        let s = segment_stream(&dag, &ht, 0);
        let w: Vec<_> = [0, 1, 0, 1, 2].iter().map(|&x| Item::Word(x)).collect();
        assert_eq!(s.items, w);
        assert_eq!(
            s.regions,
            vec![Region {
                rule: 2,
                span: 2..5,
                gapped: false
            }]
        );
        let mut seen = Vec::new();
        s.for_each_window(3, |g| seen.push(g.to_vec()));
        assert_eq!(seen, vec![vec![0, 1, 0], vec![1, 0, 1]]);

        let r2 = build_local_stream(&dag, &ht, 2);
        let mut seen = Vec::new();
        r2.for_each_window(3, |g| seen.push(g.to_vec()));
        assert_eq!(seen, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn window_straddling_a_sub_rule() {
        // body [w1, C, w5], C = [w2, w3, w4]
        let d = fixtures::dict(&["w1", "w2", "w3", "w4", "w5"], 1);
        let c = d.rule_symbol(2);
        let r1 = d.rule_symbol(1);
        let g = crate::grammar::Grammar {
            rules: vec![
                vec![r1, r1, d.splitter(0)],
                vec![SymbolId(0), c, SymbolId(4)],
                vec![SymbolId(1), SymbolId(2), SymbolId(3)],
            ],
            dictionary: d,
        };
        // C is used once; the stream logic does not care about utility
        let dag = Dag::build(&g).unwrap();
        let ht = init_head_tail(&dag, 3, &Sequential).unwrap();
        let s = build_local_stream(&dag, &ht, 1);
        let mut seen = Vec::new();
        s.for_each_window(3, |g| seen.push(g.to_vec()));
        assert_eq!(seen, vec![vec![0, 1, 2], vec![2, 3, 4]]);
        let mut seen = Vec::new();
        build_local_stream(&dag, &ht, 2).for_each_window(3, |g| seen.push(g.to_vec()));
        assert_eq!(seen, vec![vec![1, 2, 3]]);
    }

    #[test]
    fn long_sub_rule_gets_a_gap() {
        // R1 expands to 10 words, R2 = [R1, R1]
        let stream: Vec<u32> = (0..40).map(|i| i % 10).chain([10]).collect();
        let (rules, _) = sequitur::infer_raw(&stream, 11);
        let d = fixtures::dict(&["0", "1", "2", "3", "4", "5", "6", "7", "8", "9"], 1);
        let g = crate::grammar::Grammar { dictionary: d, rules };
        let dag = Dag::build(&g).unwrap();
        let ht = init_head_tail(&dag, 3, &Sequential).unwrap();
        let long = (1..dag.num_rules() as u32)
            .find(|&r| ht.get(r).exp_len == 10)
            .expect("a rule for the ten-word block");
        let parent = dag.rule(long).parents[0].0;
        let s = build_local_stream(&dag, &ht, parent);
        let region = s.regions.iter().find(|r| r.rule == long).unwrap();
        assert!(region.gapped);
        assert_eq!(region.span.len(), 5);
        assert_eq!(s.items[region.span.start + 2], Item::Gap);
    }

    #[test]
    fn codec_round_trip() {
        let dag = Dag::build(&fixtures::g1_grammar()).unwrap();
        let mut c = GramCodec::new(&dag, 3);
        assert!(c.is_packed());
        let k = c.intern(&[0, 1, 2]);
        assert_eq!(c.decode(k), Some(vec![0, 1, 2]));
        let mut c = GramCodec::new(&dag, 40);
        assert!(!c.is_packed());
        let g: Vec<u32> = (0..40).map(|i| i % 3).collect();
        let k = c.intern(&g);
        assert_eq!(c.intern(&g), k);
        assert_eq!(c.decode(k), Some(g));
    }

    fn oracle_windows(files: &[Vec<u32>], l: usize) -> Vec<(Vec<u32>, u64)> {
        let mut m: HashMap<Vec<u32>, u64> = HashMap::new();
        for f in files {
            if f.len() >= l {
                for w in f.windows(l) {
                    *m.entry(w.to_vec()).or_insert(0) += 1;
                }
            }
        }
        let mut v: Vec<_> = m.into_iter().collect();
        v.sort();
        v
    }

    fn grammar_from_files(files: &[Vec<u32>], vocab: u32) -> crate::grammar::Grammar {
        let names: Vec<alloc::string::String> = (0..vocab).map(|i| format!("w{i}")).collect();
        let d = crate::symbol::Dictionary::from_words(names, files.len() as u32).unwrap();
        let mut stream = Vec::new();
        for (i, f) in files.iter().enumerate() {
            stream.extend(f);
            stream.push(d.splitter(i as u32).0);
        }
        let (rules, _) = sequitur::infer_raw(&stream, d.rule_base());
        crate::grammar::Grammar { dictionary: d, rules }
    }

    proptest! {
        #[test]
        fn windows_covered_exactly_once(
            files in proptest::collection::vec(proptest::collection::vec(0u32..3, 0..60), 1..4),
            l in 1usize..6,
        ) {
            let g = grammar_from_files(&files, 3);
            let dag = Dag::build(&g).unwrap();
            let ht = init_head_tail(&dag, l, &Sequential).unwrap();
            prop_assert!(ht.rounds <= dag.depth);
            for r in 1..dag.num_rules() as u32 {
                let exp: Vec<u32> = expand(&g, g.dictionary.rule_symbol(r)).unwrap()
                    .into_iter().map(|s| s.0).collect();
                let k = (l - 1).min(exp.len());
                prop_assert_eq!(&ht.get(r).head[..], &exp[..k]);
                prop_assert_eq!(&ht.get(r).tail[..], &exp[exp.len() - k..]);
                let rule = dag.rule(r);
                let attributed = build_local_stream(&dag, &ht, r).window_count(l) as u64;
                prop_assert!(attributed <= head_tail_bound(rule.word_size(), l as u64, rule.sub_rule_size()));
            }
            // global sum of attributed windows with weights equals the oracle
            let (locals, codec) = gram_local_counts(&dag, &ht, &Sequential);
            let weights = {
                crate::traversal::top_down(&dag, crate::traversal::FileMode::None,
                    &crate::traversal::TraversalConfig::default(), &Sequential).unwrap();
                dag.weights()
            };
            let mut m: HashMap<Vec<u32>, u64> = HashMap::new();
            for (r, pairs) in locals.rules.iter().enumerate().skip(1) {
                for &(k, c) in pairs {
                    *m.entry(codec.decode(k).unwrap()).or_insert(0) += c * weights[r];
                }
            }
            for seg in &locals.segments {
                for &(k, c) in seg {
                    *m.entry(codec.decode(k).unwrap()).or_insert(0) += c;
                }
            }
            let mut got: Vec<_> = m.into_iter().collect();
            got.sort();
            prop_assert_eq!(got, oracle_windows(&files, l));
        }
    }
}

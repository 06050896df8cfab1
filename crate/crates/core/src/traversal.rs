//! Round-based DAG traversals.
//!
//! Every traversal is a loop of bulk-synchronous rounds. A round snapshots
//! the rules whose mask is set, cuts them into work units, runs the units
//! on the executor and waits for all of them. Visiting a rule may complete
//! a neighbour's readiness counter, which sets that neighbour's mask for the
//! next round and clears the stop flag. The loop ends after a round that
//! readied nothing.
//!
//! Top-down pushes occurrence weights from parents to children (readiness
//! = all frequency-weighted in-edges received). Bottom-up builds per-rule
//! local tables from children (readiness = all distinct sub-rules done).
//! The root is never visited; its content is handled by the reductions.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use hashbrown::HashMap;

use crate::dag::{Dag, Rule};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::fileset::{FileSet, FileWeights};
use crate::partition::{partition_work, split_range, threshold};
use crate::pool::MemoryPool;
use crate::symbol::{SymbolId, SymbolKind};
use crate::table::{ConcurrentCountTable, Insert};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Auto,
    TopDown,
    BottomUp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    TopDown,
    BottomUp,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraversalConfig {
    pub strategy: Strategy,
    pub workers: usize,
    /// Bodies longer than this many times the average are split.
    pub chunk_factor: usize,
    /// Files representable by the bitset before switching to id lists.
    pub file_set_width: usize,
}

impl Default for TraversalConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::Auto,
            workers: 1,
            chunk_factor: 16,
            file_set_width: 64,
        }
    }
}

impl TraversalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::Usage(String::from("workers must be at least 1")));
        }
        if self.chunk_factor == 0 {
            return Err(Error::Usage(String::from("chunk factor must be at least 1")));
        }
        Ok(())
    }
}

/// What a task needs from the engine.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TaskHooks {
    pub needs_file_info: bool,
    pub per_file_tables: bool,
    pub preference: Option<Direction>,
}

/// Picks the traversal direction. Explicit strategies pass through.
pub fn select_strategy(num_files: u32, hooks: &TaskHooks, cfg: &TraversalConfig) -> Direction {
    match cfg.strategy {
        Strategy::TopDown => return Direction::TopDown,
        Strategy::BottomUp => return Direction::BottomUp,
        Strategy::Auto => {}
    }
    if let Some(p) = hooks.preference {
        return p;
    }
    if hooks.needs_file_info && num_files as usize > cfg.file_set_width {
        Direction::BottomUp
    } else if hooks.needs_file_info {
        Direction::TopDown
    } else if hooks.per_file_tables {
        Direction::BottomUp
    } else {
        Direction::TopDown
    }
}

/// Sorted `(key, count)` pairs.
pub type KeyCounts = Vec<(u64, u64)>;
/// Sorted `(key, files)` pairs.
pub type KeyFiles = Vec<(u64, Vec<u32>)>;

/// Per-rule `(key, count)` contributions of a task, excluding sub-rule
/// material. Keys are word ids or encoded word windows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalCounts {
    /// Indexed by rule id; the root entry is unused.
    pub rules: Vec<Vec<(u64, u64)>>,
    /// Root material of each file.
    pub segments: Vec<Vec<(u64, u64)>>,
    /// Number of distinct keys possible.
    pub key_space: u64,
    /// Words per key (1 for word tasks, `l` for windows).
    pub span: usize,
}

impl LocalCounts {
    pub fn words(dag: &Dag) -> Self {
        let widen = |v: &[(u32, u64)]| v.iter().map(|&(w, c)| (w as u64, c)).collect();
        let mut rules: Vec<Vec<(u64, u64)>> = dag.rules.iter().map(|r| widen(&r.own_words)).collect();
        rules[0].clear();
        Self {
            rules,
            segments: dag.segments.iter().map(|s| widen(&s.words)).collect(),
            key_space: dag.num_words as u64,
            span: 1,
        }
    }

    /// Distinct keys the full expansion of `rule` can hold.
    pub fn expansion_key_bound(&self, dag: &Dag, rule: u32) -> u64 {
        let windows = dag
            .rule(rule)
            .exp_len
            .saturating_sub(self.span.saturating_sub(1) as u64);
        windows.min(self.key_space)
    }
}

// --- shared helpers ------------------------------------------------------

fn rule_refs(dag: &Dag, body: &[SymbolId]) -> Vec<(u32, u64)> {
    let mut refs: Vec<u32> = body
        .iter()
        .filter_map(|&s| match dag.kind(s) {
            SymbolKind::Rule(r) => Some(r),
            _ => None,
        })
        .collect();
    refs.sort_unstable();
    let mut out: Vec<(u32, u64)> = Vec::new();
    for r in refs {
        match out.last_mut() {
            Some((lr, c)) if *lr == r => *c += 1,
            _ => out.push((r, 1)),
        }
    }
    out
}

fn frontier(dag: &Dag) -> Vec<(u32, usize)> {
    dag.rules[1..]
        .iter()
        .filter(|r| r.mask())
        .map(|r| (r.id, r.body.len()))
        .collect()
}

fn round_guard(dag: &Dag, rounds: usize, what: &str) -> Result<()> {
    if rounds > dag.depth + 1 {
        return Err(Error::Corruption(format!(
            "{what} did not settle within {} rounds",
            dag.depth + 1
        )));
    }
    Ok(())
}

fn check_single_visit(visits: &[u32]) -> Result<()> {
    if let Some(r) = (1..visits.len()).find(|&r| visits[r] != 1) {
        return Err(Error::Corruption(format!("rule {r} visited {} times", visits[r])));
    }
    Ok(())
}

fn collect<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    results.into_iter().collect()
}

fn add_checked(map: &mut HashMap<u64, u64>, key: u64, delta: u64) -> Result<()> {
    let slot = map.entry(key).or_insert(0);
    *slot = slot.checked_add(delta).ok_or(Error::Overflow)?;
    Ok(())
}

fn sorted(map: HashMap<u64, u64>) -> Vec<(u64, u64)> {
    let mut v: Vec<_> = map.into_iter().collect();
    v.sort_unstable();
    v
}

// --- top-down ------------------------------------------------------------

/// File information propagated by a top-down traversal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileMode {
    None,
    /// Which files contain each rule.
    Sets,
    /// How often each rule occurs in each file.
    Weights,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FileInfo {
    Set(FileSet),
    Weights(FileWeights),
}

#[derive(Debug)]
pub struct TopDownRun {
    pub rounds: usize,
    pub visits: Vec<u32>,
    /// Per rule, when a file mode was requested.
    pub files: Vec<Option<FileInfo>>,
}

/// Root frequencies become initial weights; rules with no non-root parent
/// start ready.
pub fn init_top_down_masks(dag: &Dag) {
    for rule in &dag.rules[1..] {
        let from_root = match rule.parents.first() {
            Some(&(0, f)) => f,
            _ => 0,
        };
        rule.weight.store(from_root, Ordering::Release);
        rule.cur_in_edge.store(0, Ordering::Release);
        rule.mask.store(rule.num_in_edge == 0, Ordering::Release);
    }
}

fn push_down(dag: &Dag, child: u32, freq: u64, weight: u64, stop: &AtomicBool) -> Result<()> {
    let c = dag.rule(child);
    let add = freq.checked_mul(weight).ok_or(Error::Overflow)?;
    let old = c.weight.fetch_add(add, Ordering::AcqRel);
    old.checked_add(add).ok_or(Error::Overflow)?;
    let prev = c.cur_in_edge.fetch_add(freq, Ordering::AcqRel);
    if prev + freq == c.num_in_edge {
        c.mask.store(true, Ordering::Release);
        stop.store(false, Ordering::Release);
    }
    Ok(())
}

fn pull_file_info(
    dag: &Dag,
    rule: &Rule,
    mode: FileMode,
    files: &[Option<FileInfo>],
    cfg: &TraversalConfig,
) -> Result<Option<FileInfo>> {
    let parent_info = |p: u32| -> Result<&FileInfo> {
        files[p as usize]
            .as_ref()
            .ok_or_else(|| Error::Corruption(format!("rule {} ready before parent {p}", rule.id)))
    };
    match mode {
        FileMode::None => Ok(None),
        FileMode::Sets => {
            let mut set = FileSet::empty(dag.num_files, cfg.file_set_width);
            for &(f, _) in &rule.root_files {
                set.insert(f);
            }
            for &(p, _) in rule.parents.iter().filter(|&&(p, _)| p != 0) {
                if let FileInfo::Set(s) = parent_info(p)? {
                    set.union_with(s);
                }
            }
            Ok(Some(FileInfo::Set(set)))
        }
        FileMode::Weights => {
            let mut parts = rule.root_files.clone();
            for &(p, freq) in rule.parents.iter().filter(|&&(p, _)| p != 0) {
                if let FileInfo::Weights(w) = parent_info(p)? {
                    for &(f, pw) in w.as_slice() {
                        parts.push((f, pw.checked_mul(freq).ok_or(Error::Overflow)?));
                    }
                }
            }
            let w = FileWeights::from_contributions(parts).ok_or(Error::Overflow)?;
            Ok(Some(FileInfo::Weights(w)))
        }
    }
}

/// Propagates weights (and optional file information) from the root down.
/// Requires [`init_top_down_masks`].
pub fn top_down_traverse<E: Executor>(
    dag: &Dag,
    mode: FileMode,
    cfg: &TraversalConfig,
    exec: &E,
) -> Result<TopDownRun> {
    let n = dag.num_rules();
    let mut files: Vec<Option<FileInfo>> = match mode {
        FileMode::None => Vec::new(),
        _ => (0..n).map(|_| None).collect(),
    };
    let mut visits = vec![0u32; n];
    let mut rounds = 0;
    loop {
        let ready = frontier(dag);
        if ready.is_empty() {
            break;
        }
        rounds += 1;
        round_guard(dag, rounds, "top-down traversal")?;
        let total = ready.iter().map(|r| r.1).sum();
        let units = partition_work(&ready, total, cfg.chunk_factor);
        let stop = AtomicBool::new(true);
        let seen = &files;
        let results = exec.map(units.len(), |i| {
            let unit = &units[i];
            let rule = dag.rule(unit.rule);
            let weight = rule.weight();
            if unit.is_whole() {
                for &(c, f) in &rule.sub_rules {
                    push_down(dag, c, f, weight, &stop)?;
                }
            } else {
                for (c, f) in rule_refs(dag, &rule.body[unit.range.clone()]) {
                    push_down(dag, c, f, weight, &stop)?;
                }
            }
            if unit.part == 0 {
                rule.mask.store(false, Ordering::Release);
                return pull_file_info(dag, rule, mode, seen, cfg);
            }
            Ok(None)
        });
        for (unit, info) in units.iter().zip(collect(results)?) {
            if unit.part == 0 {
                visits[unit.rule as usize] += 1;
                if mode != FileMode::None {
                    files[unit.rule as usize] = info;
                }
            }
        }
        if stop.load(Ordering::Acquire) {
            break;
        }
    }
    check_single_visit(&visits)?;
    Ok(TopDownRun { rounds, visits, files })
}

/// Merges `(key, count × weight)` of every rule, plus the root's own
/// material with weight one, into one global table.
///
/// Each pair carries a done mask. A pair whose entry lock is busy is left
/// pending and the stop flag is cleared, so the merge repeats until a pass
/// completes every remaining pair.
pub fn reduce_top_down<E: Executor>(
    dag: &Dag,
    locals: &LocalCounts,
    cfg: &TraversalConfig,
    exec: &E,
) -> Result<ConcurrentCountTable> {
    let mut sources: Vec<(u64, &[(u64, u64)])> = Vec::new();
    for rule in &dag.rules[1..] {
        let pairs = &locals.rules[rule.id as usize];
        let w = rule.weight();
        if w > 0 && !pairs.is_empty() {
            sources.push((w, pairs));
        }
    }
    sources.extend(
        locals
            .segments
            .iter()
            .filter(|s| !s.is_empty())
            .map(|s| (1u64, s.as_slice())),
    );
    let pair_count: usize = sources.iter().map(|s| s.1.len()).sum();
    let bound = (pair_count as u64).min(locals.key_space);
    let table = ConcurrentCountTable::with_capacity(bound as usize)?;
    merge_with_retry(&table, &sources, cfg, exec)?;
    Ok(table)
}

fn merge_with_retry<E: Executor>(
    table: &ConcurrentCountTable,
    sources: &[(u64, &[(u64, u64)])],
    cfg: &TraversalConfig,
    exec: &E,
) -> Result<usize> {
    let lens: Vec<(u32, usize)> = sources.iter().enumerate().map(|(i, s)| (i as u32, s.1.len())).collect();
    let mut offsets = Vec::with_capacity(sources.len());
    let mut acc = 0usize;
    for s in sources {
        offsets.push(acc);
        acc += s.1.len();
    }
    let done: Vec<AtomicBool> = (0..acc).map(|_| AtomicBool::new(false)).collect();
    let total = acc;
    let units = partition_work(&lens, total, cfg.chunk_factor);
    let view = table.view();
    let mut passes = 0;
    loop {
        passes += 1;
        let stop = AtomicBool::new(true);
        let results = exec.map(units.len(), |i| -> Result<()> {
            let unit = &units[i];
            let (scale, pairs) = sources[unit.rule as usize];
            let base = offsets[unit.rule as usize];
            for j in unit.range.clone() {
                let flag = &done[base + j];
                if flag.load(Ordering::Relaxed) {
                    continue;
                }
                let (k, v) = pairs[j];
                let delta = v.checked_mul(scale).ok_or(Error::Overflow)?;
                match view.try_insert_or_add(k, delta)? {
                    Insert::Contended => stop.store(false, Ordering::Release),
                    _ => flag.store(true, Ordering::Relaxed),
                }
            }
            Ok(())
        });
        collect(results)?;
        if stop.load(Ordering::Acquire) {
            return Ok(passes);
        }
    }
}

/// Per-file counts from propagated file weights.
pub fn reduce_top_down_per_file<E: Executor>(
    dag: &Dag,
    locals: &LocalCounts,
    run: &TopDownRun,
    exec: &E,
) -> Result<Vec<Vec<(u64, u64)>>> {
    let mut by_file: Vec<Vec<(u32, u64)>> = vec![Vec::new(); dag.num_files as usize];
    for (r, info) in run.files.iter().enumerate().skip(1) {
        if locals.rules[r].is_empty() {
            continue;
        }
        match info {
            Some(FileInfo::Weights(w)) => {
                for &(f, wt) in w.as_slice() {
                    by_file[f as usize].push((r as u32, wt));
                }
            }
            _ => {
                return Err(Error::Usage(String::from(
                    "per-file reduction needs a weights traversal",
                )))
            }
        }
    }
    let results = exec.map(by_file.len(), |f| -> Result<Vec<(u64, u64)>> {
        let mut map: HashMap<u64, u64> = HashMap::new();
        for &(k, v) in &locals.segments[f] {
            add_checked(&mut map, k, v)?;
        }
        for &(r, w) in &by_file[f] {
            for &(k, v) in &locals.rules[r as usize] {
                add_checked(&mut map, k, v.checked_mul(w).ok_or(Error::Overflow)?)?;
            }
        }
        Ok(sorted(map))
    });
    collect(results)
}

/// `key -> ascending files containing it`, from propagated file sets.
pub fn reduce_top_down_file_sets<E: Executor>(
    dag: &Dag,
    locals: &LocalCounts,
    run: &TopDownRun,
    cfg: &TraversalConfig,
    exec: &E,
) -> Result<Vec<(u64, Vec<u32>)>> {
    #[derive(Clone, Copy)]
    enum Source {
        Rule(u32),
        File(u32),
    }
    let mut entries: Vec<(u64, Source)> = Vec::new();
    for (r, info) in run.files.iter().enumerate().skip(1) {
        match info {
            Some(FileInfo::Set(s)) if !s.is_empty() => {
                entries.extend(locals.rules[r].iter().map(|&(k, _)| (k, Source::Rule(r as u32))));
            }
            Some(FileInfo::Set(_)) => {}
            _ => return Err(Error::Usage(String::from("file-set reduction needs a sets traversal"))),
        }
    }
    for (f, seg) in locals.segments.iter().enumerate() {
        entries.extend(seg.iter().map(|&(k, _)| (k, Source::File(f as u32))));
    }
    entries.sort_by_key(|e| e.0);
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=entries.len() {
        if i == entries.len() || entries[i].0 != entries[start].0 {
            groups.push(start..i);
            start = i;
        }
    }
    let out = exec.map(groups.len(), |g| {
        let group = &entries[groups[g].clone()];
        let mut set = FileSet::empty(dag.num_files, cfg.file_set_width);
        for &(_, src) in group {
            match src {
                Source::Rule(r) => {
                    if let Some(FileInfo::Set(s)) = &run.files[r as usize] {
                        set.union_with(s);
                    }
                }
                Source::File(f) => set.insert(f),
            }
        }
        (group[0].0, set.to_vec())
    });
    Ok(out)
}

// --- bottom-up -----------------------------------------------------------

/// Leaves start ready.
pub fn init_bottom_up_masks(dag: &Dag) {
    for rule in &dag.rules[1..] {
        rule.cur_out_edge.store(0, Ordering::Release);
        rule.mask.store(rule.is_leaf(), Ordering::Release);
    }
}

fn notify_parents(dag: &Dag, rule: &Rule, stop: &AtomicBool) {
    for p in rule.parent_ids().filter(|&p| p != 0) {
        let parent = dag.rule(p);
        let prev = parent.cur_out_edge.fetch_add(1, Ordering::AcqRel);
        if prev + 1 == parent.num_out_edge {
            parent.mask.store(true, Ordering::Release);
            stop.store(false, Ordering::Release);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bounds {
    /// Key bound per rule; index 0 is the root merge table.
    pub per_rule: Vec<u64>,
    pub rounds: usize,
}

/// Upper bounds on local-table sizes: a rule's distinct own keys plus its
/// sub-rules' bounds, clipped to what its expansion can hold. Requires
/// [`init_bottom_up_masks`].
pub fn gen_loc_tbl_bounds<E: Executor>(dag: &Dag, locals: &LocalCounts, exec: &E) -> Result<Bounds> {
    let n = dag.num_rules();
    let bounds: Vec<AtomicU64> = (0..n).map(|_| AtomicU64::new(0)).collect();
    let mut visits = vec![0u32; n];
    let mut rounds = 0;
    loop {
        let ready = frontier(dag);
        if ready.is_empty() {
            break;
        }
        rounds += 1;
        round_guard(dag, rounds, "bounds pass")?;
        let stop = AtomicBool::new(true);
        exec.for_each(ready.len(), |i| {
            let rule = dag.rule(ready[i].0);
            let mut b = locals.rules[rule.id as usize].len() as u64;
            for &(c, _) in &rule.sub_rules {
                b = b.saturating_add(bounds[c as usize].load(Ordering::Acquire));
            }
            b = b.min(locals.expansion_key_bound(dag, rule.id));
            bounds[rule.id as usize].store(b, Ordering::Release);
            rule.mask.store(false, Ordering::Release);
            notify_parents(dag, rule, &stop);
        });
        for &(r, _) in &ready {
            visits[r as usize] += 1;
        }
        if stop.load(Ordering::Acquire) {
            break;
        }
    }
    check_single_visit(&visits)?;
    let mut per_rule: Vec<u64> = bounds.into_iter().map(AtomicU64::into_inner).collect();
    per_rule[0] = 0;
    Ok(Bounds { per_rule, rounds })
}

/// Bound for the global merge table of [`reduce_bottom_up`].
pub fn root_merge_bound(dag: &Dag, locals: &LocalCounts, bounds: &[u64]) -> u64 {
    let own: u64 = locals.segments.iter().map(|s| s.len() as u64).sum();
    dag.root()
        .sub_rules
        .iter()
        .fold(own, |acc, &(c, _)| acc.saturating_add(bounds[c as usize]))
        .min(locals.key_space)
}

#[derive(Debug)]
pub struct BottomUpRun {
    pub rounds: usize,
    pub visits: Vec<u32>,
}

/// Builds every non-root rule's local table: its own pairs plus each
/// sub-rule's table scaled by the sub-rule's frequency. Requires a pool
/// reserved from [`gen_loc_tbl_bounds`] and re-initialised masks.
pub fn bottom_up_traverse<E: Executor>(
    dag: &Dag,
    locals: &LocalCounts,
    pool: &MemoryPool,
    cfg: &TraversalConfig,
    exec: &E,
) -> Result<BottomUpRun> {
    let n = dag.num_rules();
    let mut visits = vec![0u32; n];
    let mut rounds = 0;
    loop {
        let ready = frontier(dag);
        if ready.is_empty() {
            break;
        }
        rounds += 1;
        round_guard(dag, rounds, "bottom-up traversal")?;
        let total = ready.iter().map(|r| r.1).sum();
        let units = partition_work(&ready, total, cfg.chunk_factor);
        let stop = AtomicBool::new(true);
        let results = exec.map(units.len(), |i| -> Result<()> {
            let unit = &units[i];
            let rule = dag.rule(unit.rule);
            let table = pool.table(rule.id as usize);
            if unit.part == 0 {
                for &(k, v) in &locals.rules[rule.id as usize] {
                    table.insert_or_add(k, v)?;
                }
            }
            if unit.is_whole() {
                for &(c, f) in &rule.sub_rules {
                    table.merge_scaled(&pool.table(c as usize), f)?;
                }
            } else {
                for (c, f) in rule_refs(dag, &rule.body[unit.range.clone()]) {
                    table.merge_scaled(&pool.table(c as usize), f)?;
                }
            }
            if unit.part == 0 {
                rule.mask.store(false, Ordering::Release);
                notify_parents(dag, rule, &stop);
            }
            Ok(())
        });
        collect(results)?;
        for u in units.iter().filter(|u| u.part == 0) {
            visits[u.rule as usize] += 1;
        }
        if stop.load(Ordering::Acquire) {
            break;
        }
    }
    check_single_visit(&visits)?;
    Ok(BottomUpRun { rounds, visits })
}

fn root_threshold(dag: &Dag, cfg: &TraversalConfig) -> usize {
    threshold(dag.total_elements, dag.num_rules(), cfg.chunk_factor)
}

/// Corpus-wide counts: the root's own pairs plus every level-2 table
/// scaled by its frequency in the root. Uses the pool's root slot.
pub fn reduce_bottom_up<E: Executor>(
    dag: &Dag,
    locals: &LocalCounts,
    pool: &MemoryPool,
    cfg: &TraversalConfig,
    exec: &E,
) -> Result<Vec<(u64, u64)>> {
    let root = dag.root();
    let ranges = split_range(0..root.body.len(), root_threshold(dag, cfg));
    let global = pool.table(0);
    let nseg = locals.segments.len();
    let results = exec.map(ranges.len() + nseg, |i| -> Result<()> {
        if i < ranges.len() {
            for (c, f) in rule_refs(dag, &root.body[ranges[i].clone()]) {
                global.merge_scaled(&pool.table(c as usize), f)?;
            }
        } else {
            for &(k, v) in &locals.segments[i - ranges.len()] {
                global.insert_or_add(k, v)?;
            }
        }
        Ok(())
    });
    collect(results)?;
    let mut out: Vec<_> = global.iter().collect();
    out.sort_unstable();
    Ok(out)
}

/// Per-file counts: each root segment's own pairs plus the tables of the
/// rules it references. Long segments are split; partial maps are merged
/// per file afterwards.
pub fn reduce_bottom_up_per_file<E: Executor>(
    dag: &Dag,
    locals: &LocalCounts,
    pool: &MemoryPool,
    cfg: &TraversalConfig,
    exec: &E,
) -> Result<Vec<Vec<(u64, u64)>>> {
    let root = dag.root();
    let limit = root_threshold(dag, cfg);
    let mut units: Vec<(usize, core::ops::Range<usize>, bool)> = Vec::new();
    for (f, seg) in dag.segments.iter().enumerate() {
        for (part, r) in split_range(seg.range.clone(), limit).into_iter().enumerate() {
            units.push((f, r, part == 0));
        }
    }
    let partials = exec.map(units.len(), |i| -> Result<HashMap<u64, u64>> {
        let (f, ref range, first) = units[i];
        let mut map = HashMap::new();
        if first {
            for &(k, v) in &locals.segments[f] {
                add_checked(&mut map, k, v)?;
            }
        }
        for (c, freq) in rule_refs(dag, &root.body[range.clone()]) {
            for (k, v) in pool.table(c as usize).iter() {
                add_checked(&mut map, k, v.checked_mul(freq).ok_or(Error::Overflow)?)?;
            }
        }
        Ok(map)
    });
    let mut per_file: Vec<Option<HashMap<u64, u64>>> = (0..dag.segments.len()).map(|_| None).collect();
    for ((f, _, _), partial) in units.iter().zip(collect(partials)?) {
        match &mut per_file[*f] {
            slot @ None => *slot = Some(partial),
            Some(map) => {
                for (k, v) in partial {
                    add_checked(map, k, v)?;
                }
            }
        }
    }
    Ok(per_file.into_iter().map(|m| sorted(m.unwrap_or_default())).collect())
}

// --- drivers -------------------------------------------------------------

/// Round counts of one engine run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunStats {
    pub top_down_rounds: usize,
    pub bound_rounds: usize,
    pub bottom_up_rounds: usize,
}

/// Full bottom-up pipeline up to a populated pool.
pub fn bottom_up_tables<E: Executor>(
    dag: &Dag,
    locals: &LocalCounts,
    with_root_merge: bool,
    cfg: &TraversalConfig,
    exec: &E,
) -> Result<(MemoryPool, RunStats)> {
    dag.reset();
    init_bottom_up_masks(dag);
    let mut bounds = gen_loc_tbl_bounds(dag, locals, exec)?;
    if with_root_merge {
        bounds.per_rule[0] = root_merge_bound(dag, locals, &bounds.per_rule);
    }
    let pool = MemoryPool::plan_and_reserve(&bounds.per_rule)?;
    init_bottom_up_masks(dag);
    let run = bottom_up_traverse(dag, locals, &pool, cfg, exec)?;
    let stats = RunStats {
        bound_rounds: bounds.rounds,
        bottom_up_rounds: run.rounds,
        ..RunStats::default()
    };
    Ok((pool, stats))
}

/// Top-down weight propagation from a clean state.
pub fn top_down<E: Executor>(dag: &Dag, mode: FileMode, cfg: &TraversalConfig, exec: &E) -> Result<TopDownRun> {
    dag.reset();
    init_top_down_masks(dag);
    top_down_traverse(dag, mode, cfg, exec)
}

/// Corpus-wide `(key, count)` pairs, ascending key.
pub fn global_counts<E: Executor>(
    dag: &Dag,
    locals: &LocalCounts,
    dir: Direction,
    cfg: &TraversalConfig,
    exec: &E,
) -> Result<(Vec<(u64, u64)>, RunStats)> {
    match dir {
        Direction::TopDown => {
            let run = top_down(dag, FileMode::None, cfg, exec)?;
            let table = reduce_top_down(dag, locals, cfg, exec)?;
            let stats = RunStats {
                top_down_rounds: run.rounds,
                ..RunStats::default()
            };
            Ok((table.to_sorted_vec(), stats))
        }
        Direction::BottomUp => {
            let (pool, stats) = bottom_up_tables(dag, locals, true, cfg, exec)?;
            Ok((reduce_bottom_up(dag, locals, &pool, cfg, exec)?, stats))
        }
    }
}

/// Per-file `(key, count)` pairs, ascending key.
pub fn per_file_counts<E: Executor>(
    dag: &Dag,
    locals: &LocalCounts,
    dir: Direction,
    cfg: &TraversalConfig,
    exec: &E,
) -> Result<(Vec<KeyCounts>, RunStats)> {
    match dir {
        Direction::TopDown => {
            let run = top_down(dag, FileMode::Weights, cfg, exec)?;
            let out = reduce_top_down_per_file(dag, locals, &run, exec)?;
            let stats = RunStats {
                top_down_rounds: run.rounds,
                ..RunStats::default()
            };
            Ok((out, stats))
        }
        Direction::BottomUp => {
            let (pool, stats) = bottom_up_tables(dag, locals, false, cfg, exec)?;
            Ok((reduce_bottom_up_per_file(dag, locals, &pool, cfg, exec)?, stats))
        }
    }
}

/// `key -> files containing it`, ascending key.
pub fn key_file_sets<E: Executor>(
    dag: &Dag,
    locals: &LocalCounts,
    dir: Direction,
    cfg: &TraversalConfig,
    exec: &E,
) -> Result<(KeyFiles, RunStats)> {
    match dir {
        Direction::TopDown => {
            let run = top_down(dag, FileMode::Sets, cfg, exec)?;
            let out = reduce_top_down_file_sets(dag, locals, &run, cfg, exec)?;
            let stats = RunStats {
                top_down_rounds: run.rounds,
                ..RunStats::default()
            };
            Ok((out, stats))
        }
        Direction::BottomUp => {
            let (per_file, stats) = per_file_counts(dag, locals, Direction::BottomUp, cfg, exec)?;
            let mut pairs: Vec<(u64, u32)> = per_file
                .iter()
                .enumerate()
                .flat_map(|(f, v)| v.iter().map(move |&(k, _)| (k, f as u32)))
                .collect();
            pairs.sort_unstable();
            let mut out: Vec<(u64, Vec<u32>)> = Vec::new();
            for (k, f) in pairs {
                match out.last_mut() {
                    Some((lk, files)) if *lk == k => files.push(f),
                    _ => out.push((k, vec![f])),
                }
            }
            Ok((out, stats))
        }
    }
}

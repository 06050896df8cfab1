//! Chained count table safe for many concurrent writers.
//!
//! Layout follows five parallel buffers: a lock flag and a chain head per
//! entry, and key, value and next-link per node. Nodes are claimed from a
//! bump cursor and never freed.
//!
//! Adding to a key that already has a node is a single atomic add and never
//! takes the lock. Only linking a new node takes the entry lock; after
//! acquiring it the chain is re-checked so two writers cannot both insert
//! the same key. [`TableView::try_insert_or_add`] reports a busy lock
//! instead of waiting, which lets round-based callers retry the pair next
//! round.

use alloc::vec::Vec;
use core::sync::atomic::{AtomicU32, AtomicU64, AtomicU8, Ordering};

use crate::error::{Error, Result};

/// Empty chain head / end of chain.
pub const NIL: u32 = u32::MAX;

pub type BucketFn = fn(u64) -> u64;

/// 64-bit avalanche mix (SplitMix64 finalizer constants).
#[inline]
pub fn mix64(key: u64) -> u64 {
    let mut z = key;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Entry and node counts for a table expected to hold `keys` keys:
/// entries are the next power of two at or above `2 * keys`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Geometry {
    pub entries: usize,
    pub nodes: usize,
}

impl Geometry {
    pub fn for_keys(keys: usize) -> Self {
        if keys == 0 {
            return Self { entries: 0, nodes: 0 };
        }
        Self {
            entries: keys.saturating_mul(2).next_power_of_two(),
            nodes: keys,
        }
    }
}

/// Backing buffers for one or more tables.
pub struct TableStorage {
    pub(crate) locks: Vec<AtomicU8>,
    pub(crate) heads: Vec<AtomicU32>,
    pub(crate) keys: Vec<AtomicU64>,
    pub(crate) values: Vec<AtomicU64>,
    pub(crate) next: Vec<AtomicU32>,
}

fn alloc_atomic<T>(n: usize, init: impl Fn() -> T) -> Result<Vec<T>> {
    let mut v = Vec::new();
    v.try_reserve_exact(n)
        .map_err(|_| Error::Resource(alloc::format!("cannot allocate {n} table slots")))?;
    v.extend((0..n).map(|_| init()));
    Ok(v)
}

impl TableStorage {
    pub fn new(entries: usize, nodes: usize) -> Result<Self> {
        Ok(Self {
            locks: alloc_atomic(entries, || AtomicU8::new(0))?,
            heads: alloc_atomic(entries, || AtomicU32::new(NIL))?,
            keys: alloc_atomic(nodes, || AtomicU64::new(0))?,
            values: alloc_atomic(nodes, || AtomicU64::new(0))?,
            next: alloc_atomic(nodes, || AtomicU32::new(NIL))?,
        })
    }

    pub fn entries(&self) -> usize {
        self.heads.len()
    }

    pub fn nodes(&self) -> usize {
        self.keys.len()
    }
}

/// Outcome of [`TableView::try_insert_or_add`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Insert {
    /// The key existed; its count was increased atomically.
    Added,
    /// A new node was linked under the entry lock.
    Inserted,
    /// The key is absent and another writer holds the entry lock.
    Contended,
}

/// A table over a slice of some [`TableStorage`].
#[derive(Clone, Copy)]
pub struct TableView<'a> {
    locks: &'a [AtomicU8],
    heads: &'a [AtomicU32],
    keys: &'a [AtomicU64],
    values: &'a [AtomicU64],
    next: &'a [AtomicU32],
    cursor: &'a AtomicU32,
    bucket: BucketFn,
}

impl<'a> TableView<'a> {
    pub(crate) fn new(
        storage: &'a TableStorage,
        entries: core::ops::Range<usize>,
        nodes: core::ops::Range<usize>,
        cursor: &'a AtomicU32,
        bucket: BucketFn,
    ) -> Self {
        debug_assert!(entries.is_empty() || entries.len().is_power_of_two());
        Self {
            locks: &storage.locks[entries.clone()],
            heads: &storage.heads[entries],
            keys: &storage.keys[nodes.clone()],
            values: &storage.values[nodes.clone()],
            next: &storage.next[nodes],
            cursor,
            bucket,
        }
    }

    pub fn capacity_entries(&self) -> usize {
        self.heads.len()
    }

    pub fn capacity_nodes(&self) -> usize {
        self.keys.len()
    }

    /// Number of keys present.
    pub fn len(&self) -> usize {
        (self.cursor.load(Ordering::Acquire) as usize).min(self.keys.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn bucket_of(&self, key: u64) -> usize {
        ((self.bucket)(key) as usize) & (self.heads.len().wrapping_sub(1))
    }

    fn find(&self, bucket: usize, key: u64) -> Option<usize> {
        let mut n = self.heads[bucket].load(Ordering::Acquire);
        while n != NIL {
            let i = n as usize;
            if self.keys[i].load(Ordering::Relaxed) == key {
                return Some(i);
            }
            n = self.next[i].load(Ordering::Acquire);
        }
        None
    }

    #[inline]
    fn add_to(&self, node: usize, delta: u64) -> Result<()> {
        let old = self.values[node].fetch_add(delta, Ordering::Relaxed);
        match old.checked_add(delta) {
            Some(_) => Ok(()),
            None => Err(Error::Overflow),
        }
    }

    /// One attempt at adding `delta` to `key`, never blocking.
    pub fn try_insert_or_add(&self, key: u64, delta: u64) -> Result<Insert> {
        if self.heads.is_empty() {
            return Err(Error::Capacity { capacity: 0 });
        }
        let bucket = self.bucket_of(key);
        if let Some(node) = self.find(bucket, key) {
            self.add_to(node, delta)?;
            return Ok(Insert::Added);
        }
        let lock = &self.locks[bucket];
        if lock
            .compare_exchange(0, 1, Ordering::Acquire, Ordering::Relaxed)
            .is_err()
        {
            return Ok(Insert::Contended);
        }
        let result = self.link_locked(bucket, key, delta);
        lock.store(0, Ordering::Release);
        result
    }

    fn link_locked(&self, bucket: usize, key: u64, delta: u64) -> Result<Insert> {
        if let Some(node) = self.find(bucket, key) {
            self.add_to(node, delta)?;
            return Ok(Insert::Added);
        }
        let cap = self.keys.len() as u32;
        let node = self
            .cursor
            .fetch_update(Ordering::AcqRel, Ordering::Acquire, |c| (c < cap).then_some(c + 1))
            .map_err(|_| Error::Capacity { capacity: cap as usize })? as usize;
        self.keys[node].store(key, Ordering::Relaxed);
        self.values[node].store(delta, Ordering::Relaxed);
        let head = self.heads[bucket].load(Ordering::Relaxed);
        self.next[node].store(head, Ordering::Relaxed);
        self.heads[bucket].store(node as u32, Ordering::Release);
        Ok(Insert::Inserted)
    }

    /// Adds `delta` to `key`, spinning while a new-node link on the same
    /// entry is in progress.
    pub fn insert_or_add(&self, key: u64, delta: u64) -> Result<()> {
        loop {
            match self.try_insert_or_add(key, delta)? {
                Insert::Contended => core::hint::spin_loop(),
                _ => return Ok(()),
            }
        }
    }

    pub fn get(&self, key: u64) -> Option<u64> {
        if self.heads.is_empty() {
            return None;
        }
        self.find(self.bucket_of(key), key)
            .map(|n| self.values[n].load(Ordering::Acquire))
    }

    /// All `(key, count)` pairs in node order. Call only after a barrier.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + 'a {
        let (keys, values) = (self.keys, self.values);
        (0..self.len()).map(move |i| (keys[i].load(Ordering::Acquire), values[i].load(Ordering::Acquire)))
    }

    /// `self[k] += v * scale` for every pair of `src`.
    pub fn merge_scaled(&self, src: &TableView<'_>, scale: u64) -> Result<()> {
        for (k, v) in src.iter() {
            self.insert_or_add(k, v.checked_mul(scale).ok_or(Error::Overflow)?)?;
        }
        Ok(())
    }

    /// Chain head of an entry.
    pub fn entry_head(&self, entry: usize) -> Option<u32> {
        let h = self.heads[entry].load(Ordering::Acquire);
        (h != NIL).then_some(h)
    }

    /// `(key, value, next)` of a claimed node.
    pub fn node(&self, node: u32) -> Option<(u64, u64, Option<u32>)> {
        let i = node as usize;
        (i < self.len()).then(|| {
            let next = self.next[i].load(Ordering::Acquire);
            (
                self.keys[i].load(Ordering::Acquire),
                self.values[i].load(Ordering::Acquire),
                (next != NIL).then_some(next),
            )
        })
    }

    /// Every chain terminates, every node is on exactly one chain, and
    /// every node sits in the entry its key hashes to.
    pub fn chains_consistent(&self) -> bool {
        let mut seen = alloc::vec![false; self.len()];
        for entry in 0..self.heads.len() {
            let mut n = self.heads[entry].load(Ordering::Acquire);
            while n != NIL {
                let i = n as usize;
                if i >= seen.len() || seen[i] {
                    return false;
                }
                seen[i] = true;
                if self.bucket_of(self.keys[i].load(Ordering::Acquire)) != entry {
                    return false;
                }
                n = self.next[i].load(Ordering::Acquire);
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// A table that owns its buffers.
pub struct ConcurrentCountTable {
    storage: TableStorage,
    cursor: AtomicU32,
    bucket: BucketFn,
}

impl ConcurrentCountTable {
    /// Table with room for `keys` distinct keys.
    pub fn with_capacity(keys: usize) -> Result<Self> {
        let g = Geometry::for_keys(keys);
        Self::with_geometry(g.entries, g.nodes, mix64)
    }

    /// Explicit geometry and bucket function. `entries` must be zero or a
    /// power of two.
    pub fn with_geometry(entries: usize, nodes: usize, bucket: BucketFn) -> Result<Self> {
        if entries != 0 && !entries.is_power_of_two() {
            return Err(Error::Usage(alloc::format!(
                "entry count {entries} is not a power of two"
            )));
        }
        if nodes >= NIL as usize {
            return Err(Error::Resource(alloc::format!("{nodes} nodes exceed table limit")));
        }
        Ok(Self {
            storage: TableStorage::new(entries, nodes)?,
            cursor: AtomicU32::new(0),
            bucket,
        })
    }

    pub fn view(&self) -> TableView<'_> {
        TableView::new(
            &self.storage,
            0..self.storage.entries(),
            0..self.storage.nodes(),
            &self.cursor,
            self.bucket,
        )
    }

    pub fn insert_or_add(&self, key: u64, delta: u64) -> Result<()> {
        self.view().insert_or_add(key, delta)
    }

    pub fn try_insert_or_add(&self, key: u64, delta: u64) -> Result<Insert> {
        self.view().try_insert_or_add(key, delta)
    }

    pub fn get(&self, key: u64) -> Option<u64> {
        self.view().get(key)
    }

    pub fn len(&self) -> usize {
        self.view().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.view().iter()
    }

    /// Pairs sorted by key.
    pub fn to_sorted_vec(&self) -> Vec<(u64, u64)> {
        let mut v: Vec<_> = self.iter().collect();
        v.sort_unstable();
        v
    }

    pub fn merge_scaled(&self, src: &ConcurrentCountTable, scale: u64) -> Result<()> {
        self.view().merge_scaled(&src.view(), scale)
    }
}

//! Single-arena memory pool for per-rule count tables.
//!
//! Sizes come from a completed bounds pass; the pool is then carved once
//! into disjoint per-rule ranges. Nothing is allocated during traversal.

use alloc::vec::Vec;
use core::sync::atomic::{AtomicU32, AtomicUsize, Ordering};

use crate::error::{Error, Result};
use crate::table::{mix64, Geometry, TableStorage, TableView, NIL};

/// One rule's slice of the arena.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Reservation {
    pub entry_offset: usize,
    pub entries: usize,
    pub node_offset: usize,
    pub nodes: usize,
}

pub struct MemoryPool {
    storage: TableStorage,
    ranges: Vec<Reservation>,
    cursors: Vec<AtomicU32>,
    high_water: AtomicUsize,
}

impl MemoryPool {
    /// Reserves a table for every index of `bounds` (the key bound of rule
    /// `i`, with the root slot used for the merge table).
    pub fn plan_and_reserve(bounds: &[u64]) -> Result<Self> {
        let mut ranges = Vec::with_capacity(bounds.len());
        let (mut entry_total, mut node_total) = (0usize, 0usize);
        for &b in bounds {
            let keys = usize::try_from(b)
                .ok()
                .filter(|&k| k < NIL as usize)
                .ok_or_else(|| Error::Resource(alloc::format!("table bound {b} too large")))?;
            let g = Geometry::for_keys(keys);
            ranges.push(Reservation {
                entry_offset: entry_total,
                entries: g.entries,
                node_offset: node_total,
                nodes: g.nodes,
            });
            entry_total = entry_total
                .checked_add(g.entries)
                .ok_or_else(|| Error::Resource("arena size overflow".into()))?;
            node_total = node_total
                .checked_add(g.nodes)
                .ok_or_else(|| Error::Resource("arena size overflow".into()))?;
        }
        let storage = TableStorage::new(entry_total, node_total)?;
        let pool = Self {
            storage,
            cursors: (0..ranges.len()).map(|_| AtomicU32::new(0)).collect(),
            ranges,
            high_water: AtomicUsize::new(0),
        };
        // Ranges were laid out back to back; advance the cursor over them.
        pool.high_water.store(node_total, Ordering::Release);
        Ok(pool)
    }

    pub fn table(&self, rule: usize) -> TableView<'_> {
        let r = self.ranges[rule];
        TableView::new(
            &self.storage,
            r.entry_offset..r.entry_offset + r.entries,
            r.node_offset..r.node_offset + r.nodes,
            &self.cursors[rule],
            mix64,
        )
    }

    pub fn reservation(&self, rule: usize) -> Reservation {
        self.ranges[rule]
    }

    pub fn reservations(&self) -> &[Reservation] {
        &self.ranges
    }

    pub fn capacity_nodes(&self) -> usize {
        self.storage.nodes()
    }

    pub fn capacity_entries(&self) -> usize {
        self.storage.entries()
    }

    /// End of the reserved node range.
    pub fn high_water(&self) -> usize {
        self.high_water.load(Ordering::Acquire)
    }

    /// Nodes actually claimed by tables so far.
    pub fn nodes_used(&self) -> usize {
        self.cursors
            .iter()
            .zip(&self.ranges)
            .map(|(c, r)| (c.load(Ordering::Acquire) as usize).min(r.nodes))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn disjoint(pool: &MemoryPool) -> bool {
        let mut nodes: Vec<_> = pool
            .reservations()
            .iter()
            .filter(|r| r.nodes > 0)
            .map(|r| (r.node_offset, r.node_offset + r.nodes))
            .collect();
        nodes.sort();
        let mut entries: Vec<_> = pool
            .reservations()
            .iter()
            .filter(|r| r.entries > 0)
            .map(|r| (r.entry_offset, r.entry_offset + r.entries))
            .collect();
        entries.sort();
        nodes.windows(2).all(|w| w[0].1 <= w[1].0) && entries.windows(2).all(|w| w[0].1 <= w[1].0)
    }

    #[test]
    fn g1_word_count_bounds() {
        // root merge table, R1, R2
        let pool = MemoryPool::plan_and_reserve(&[3, 2, 3]).unwrap();
        let offs: Vec<_> = pool.reservations().iter().map(|r| r.node_offset).collect();
        assert!(offs.windows(2).all(|w| w[0] < w[1]));
        assert!(disjoint(&pool));
        assert_eq!(pool.capacity_nodes(), 8);
        assert_eq!(pool.high_water(), 8);

        let t1 = pool.table(1);
        t1.insert_or_add(0, 1).unwrap();
        t1.insert_or_add(1, 1).unwrap();
        assert!(t1.insert_or_add(2, 1).is_err());
        // neighbours untouched
        assert!(pool.table(0).is_empty());
        assert!(pool.table(2).is_empty());
        assert_eq!(pool.nodes_used(), 2);
    }

    #[test]
    fn all_zero_bounds() {
        let pool = MemoryPool::plan_and_reserve(&[0, 0, 0]).unwrap();
        assert_eq!(pool.capacity_nodes(), 0);
        assert_eq!(pool.capacity_entries(), 0);
        assert_eq!(pool.table(1).get(4), None);
    }

    proptest! {
        #[test]
        fn ranges_are_disjoint(bounds in proptest::collection::vec(0u64..300, 0..40)) {
            let pool = MemoryPool::plan_and_reserve(&bounds).unwrap();
            prop_assert!(disjoint(&pool));
            prop_assert!(pool.high_water() <= pool.capacity_nodes());
            let total: u64 = bounds.iter().sum();
            prop_assert_eq!(pool.capacity_nodes() as u64, total);
            // fill every table to its bound; nothing spills
            for (i, &b) in bounds.iter().enumerate() {
                let t = pool.table(i);
                for k in 0..b {
                    t.insert_or_add(k, 1).unwrap();
                }
                prop_assert_eq!(t.len() as u64, b);
            }
            for (i, &b) in bounds.iter().enumerate() {
                prop_assert_eq!(pool.table(i).len() as u64, b);
                prop_assert!(pool.table(i).chains_consistent());
            }
        }
    }
}

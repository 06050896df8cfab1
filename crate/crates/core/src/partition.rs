//! Splitting a round's ready rules into work units of bounded size.

use alloc::vec::Vec;
use core::ops::Range;

/// A contiguous slice of one rule body processed by one worker.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkUnit {
    pub rule: u32,
    pub range: Range<usize>,
    /// Index of this unit among the units of the same rule.
    pub part: usize,
    pub parts: usize,
}

impl WorkUnit {
    pub fn is_whole(&self) -> bool {
        self.parts == 1
    }
}

/// Largest body length handled by a single unit: `chunk_factor` times the
/// average elements per ready rule (at least one).
pub fn threshold(total_elements: usize, ready: usize, chunk_factor: usize) -> usize {
    let avg = (total_elements / ready.max(1)).max(1);
    chunk_factor.max(1).saturating_mul(avg)
}

/// Splits `range` into `ceil(len / threshold)` near-equal contiguous pieces.
pub fn split_range(range: Range<usize>, threshold: usize) -> Vec<Range<usize>> {
    let len = range.len();
    if len == 0 {
        return alloc::vec![range];
    }
    let parts = len.div_ceil(threshold.max(1));
    let (base, extra) = (len / parts, len % parts);
    let mut out = Vec::with_capacity(parts);
    let mut start = range.start;
    for i in 0..parts {
        let size = base + usize::from(i < extra);
        out.push(start..start + size);
        start += size;
    }
    out
}

/// One unit per ready rule, except bodies longer than the threshold, which
/// are cut into contiguous ranges.
pub fn partition_work(ready: &[(u32, usize)], total_elements: usize, chunk_factor: usize) -> Vec<WorkUnit> {
    let limit = threshold(total_elements, ready.len(), chunk_factor);
    let mut units = Vec::with_capacity(ready.len());
    for &(rule, len) in ready {
        if len <= limit {
            units.push(WorkUnit {
                rule,
                range: 0..len,
                part: 0,
                parts: 1,
            });
            continue;
        }
        let ranges = split_range(0..len, limit);
        let parts = ranges.len();
        units.extend(ranges.into_iter().enumerate().map(|(part, range)| WorkUnit {
            rule,
            range,
            part,
            parts,
        }));
    }
    units
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn long_body_is_split() {
        // 100 ready rules averaging 10 elements; one of them has 1000.
        let mut ready = alloc::vec![(0u32, 1000usize)];
        ready.extend((1..100).map(|r| (r, 0)));
        assert_eq!(threshold(1000, 100, 16), 160);
        let units = partition_work(&ready, 1000, 16);
        let big: Vec<_> = units.iter().filter(|u| u.rule == 0).collect();
        assert_eq!(big.len(), 7);
        assert_eq!(big.iter().map(|u| u.range.len()).sum::<usize>(), 1000);
        assert!(big.iter().all(|u| u.range.len() <= 160));
    }

    #[test]
    fn short_bodies_one_unit_each() {
        let ready = [(1u32, 3usize), (2, 5), (3, 4)];
        let units = partition_work(&ready, 12, 16);
        assert_eq!(units.len(), 3);
        assert!(units.iter().all(WorkUnit::is_whole));
    }

    #[test]
    fn single_small_rule() {
        assert_eq!(threshold(5, 1, 16), 80);
        assert_eq!(partition_work(&[(9, 5)], 5, 16).len(), 1);
    }

    proptest! {
        #[test]
        fn units_tile_each_body(lens in proptest::collection::vec(0usize..500, 1..30), cf in 1usize..20) {
            let ready: Vec<(u32, usize)> = lens.iter().enumerate().map(|(i, &l)| (i as u32, l)).collect();
            let total: usize = lens.iter().sum();
            let limit = threshold(total, ready.len(), cf);
            let units = partition_work(&ready, total, cf);
            for (r, &len) in lens.iter().enumerate() {
                let mine: Vec<_> = units.iter().filter(|u| u.rule == r as u32).collect();
                let mut at = 0;
                for (i, u) in mine.iter().enumerate() {
                    prop_assert_eq!(u.part, i);
                    prop_assert_eq!(u.parts, mine.len());
                    prop_assert_eq!(u.range.start, at);
                    prop_assert!(u.range.len() <= limit.max(1) || len == 0);
                    at = u.range.end;
                }
                prop_assert_eq!(at, len);
            }
        }
    }
}

//! Per-rule file information carried by top-down traversals.

use alloc::vec;
use alloc::vec::Vec;

/// Set of file ids: a fixed-width bitset while the corpus has at most
/// `width` files, otherwise a sorted id list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FileSet {
    Bits(Vec<u64>),
    List(Vec<u32>),
}

impl FileSet {
    pub fn empty(num_files: u32, width: usize) -> Self {
        if (num_files as usize) <= width {
            FileSet::Bits(vec![0; width.div_ceil(64).max(1)])
        } else {
            FileSet::List(Vec::new())
        }
    }

    pub fn insert(&mut self, file: u32) {
        match self {
            FileSet::Bits(words) => words[file as usize / 64] |= 1 << (file % 64),
            FileSet::List(ids) => {
                if let Err(pos) = ids.binary_search(&file) {
                    ids.insert(pos, file);
                }
            }
        }
    }

    pub fn union_with(&mut self, other: &FileSet) {
        match (self, other) {
            (FileSet::Bits(a), FileSet::Bits(b)) => {
                for (x, y) in a.iter_mut().zip(b) {
                    *x |= *y;
                }
            }
            (FileSet::List(a), FileSet::List(b)) => {
                let mut merged = Vec::with_capacity(a.len() + b.len());
                let (mut i, mut j) = (0, 0);
                while i < a.len() && j < b.len() {
                    match a[i].cmp(&b[j]) {
                        core::cmp::Ordering::Less => {
                            merged.push(a[i]);
                            i += 1;
                        }
                        core::cmp::Ordering::Greater => {
                            merged.push(b[j]);
                            j += 1;
                        }
                        core::cmp::Ordering::Equal => {
                            merged.push(a[i]);
                            i += 1;
                            j += 1;
                        }
                    }
                }
                merged.extend_from_slice(&a[i..]);
                merged.extend_from_slice(&b[j..]);
                *a = merged;
            }
            (this, other) => {
                for f in other.to_vec() {
                    this.insert(f);
                }
            }
        }
    }

    pub fn contains(&self, file: u32) -> bool {
        match self {
            FileSet::Bits(words) => words
                .get(file as usize / 64)
                .is_some_and(|w| w & (1 << (file % 64)) != 0),
            FileSet::List(ids) => ids.binary_search(&file).is_ok(),
        }
    }

    /// Ascending file ids.
    pub fn to_vec(&self) -> Vec<u32> {
        match self {
            FileSet::Bits(words) => {
                let mut out = Vec::new();
                for (i, &w) in words.iter().enumerate() {
                    let mut w = w;
                    while w != 0 {
                        let b = w.trailing_zeros();
                        out.push(i as u32 * 64 + b);
                        w &= w - 1;
                    }
                }
                out
            }
            FileSet::List(ids) => ids.clone(),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            FileSet::Bits(words) => words.iter().all(|&w| w == 0),
            FileSet::List(ids) => ids.is_empty(),
        }
    }
}

/// Sparse per-file occurrence counts of one rule. Rules reached from a
/// single file keep a scalar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FileWeights {
    Single((u32, u64)),
    Multi(Vec<(u32, u64)>),
}

impl FileWeights {
    /// Builds from unsorted `(file, weight)` contributions.
    pub fn from_contributions(mut parts: Vec<(u32, u64)>) -> Option<Self> {
        parts.sort_unstable_by_key(|&(f, _)| f);
        let mut merged: Vec<(u32, u64)> = Vec::with_capacity(parts.len());
        for (f, w) in parts {
            match merged.last_mut() {
                Some((lf, lw)) if *lf == f => *lw = lw.checked_add(w)?,
                _ => merged.push((f, w)),
            }
        }
        merged.retain(|&(_, w)| w > 0);
        Some(match merged.as_slice() {
            [pair] => FileWeights::Single(*pair),
            _ => FileWeights::Multi(merged),
        })
    }

    pub fn as_slice(&self) -> &[(u32, u64)] {
        match self {
            FileWeights::Single(pair) => core::slice::from_ref(pair),
            FileWeights::Multi(v) => v,
        }
    }
}

//! Reference implementations over decompressed files.

use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::tasks::{rank_grams, Task, TaskOutput};

fn count_words(files: &[Vec<u32>]) -> HashMap<u32, u64> {
    let mut m = HashMap::new();
    for &w in files.iter().flatten() {
        *m.entry(w).or_insert(0) += 1;
    }
    m
}

fn sorted<K: Ord, V>(m: HashMap<K, V>) -> Vec<(K, V)> {
    let mut v: Vec<_> = m.into_iter().collect();
    v.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    v
}

fn by_count_desc(v: &mut [(u32, u64)]) {
    v.sort_unstable_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
}

pub fn sequence_counts(files: &[Vec<u32>], l: usize) -> Vec<Vec<(Vec<u32>, u64)>> {
    files
        .iter()
        .map(|f| {
            let mut m: HashMap<Vec<u32>, u64> = HashMap::new();
            if l > 0 && f.len() >= l {
                for w in f.windows(l) {
                    *m.entry(w.to_vec()).or_insert(0) += 1;
                }
            }
            sorted(m)
        })
        .collect()
}

/// `files` holds word ids only (splitters removed).
pub fn run(files: &[Vec<u32>], task: Task, l: usize) -> TaskOutput {
    match task {
        Task::WordCount => TaskOutput::WordCounts(sorted(count_words(files))),
        Task::Sort => {
            let mut v = sorted(count_words(files));
            by_count_desc(&mut v);
            TaskOutput::SortedWords(v)
        }
        Task::InvertedIndex => {
            let mut m: HashMap<u32, Vec<u32>> = HashMap::new();
            for (f, words) in files.iter().enumerate() {
                for &w in words {
                    let list = m.entry(w).or_default();
                    if list.last() != Some(&(f as u32)) {
                        list.push(f as u32);
                    }
                }
            }
            TaskOutput::InvertedIndex(sorted(m))
        }
        Task::TermVector => TaskOutput::TermVectors(
            files
                .iter()
                .map(|f| {
                    let mut v = sorted(count_words(core::slice::from_ref(f)));
                    by_count_desc(&mut v);
                    v
                })
                .collect(),
        ),
        Task::SequenceCount => TaskOutput::SequenceCounts(sequence_counts(files, l)),
        Task::RankedInvertedIndex => TaskOutput::RankedInvertedIndex(rank_grams(&sequence_counts(files, l))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn g1_oracle() {
        let files = vec![vec![0, 1, 0, 1, 2], vec![0, 1, 2]];
        assert_eq!(
            run(&files, Task::WordCount, 3),
            TaskOutput::WordCounts(vec![(0, 3), (1, 3), (2, 2)])
        );
        assert_eq!(
            run(&files, Task::SequenceCount, 3),
            TaskOutput::SequenceCounts(vec![
                vec![(vec![0, 1, 0], 1), (vec![0, 1, 2], 1), (vec![1, 0, 1], 1)],
                vec![(vec![0, 1, 2], 1)],
            ])
        );
        assert_eq!(
            run(&files, Task::InvertedIndex, 3),
            TaskOutput::InvertedIndex(vec![(0, vec![0, 1]), (1, vec![0, 1]), (2, vec![0, 1])])
        );
    }
}

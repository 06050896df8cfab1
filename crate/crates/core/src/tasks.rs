//! The six analytics tasks.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::dag::Dag;
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::sequence::{gram_local_counts, init_head_tail, GramCodec};
use crate::traversal::{
    global_counts, key_file_sets, per_file_counts, select_strategy, Direction, LocalCounts, RunStats, TaskHooks,
    TraversalConfig,
};

pub const DEFAULT_SEQUENCE_LEN: usize = 3;

/// `(word, count)` pairs.
pub type WordCounts = Vec<(u32, u64)>;
/// `(word, files)` pairs.
pub type Postings = Vec<(u32, Vec<u32>)>;
/// One file's `(gram, count)` pairs.
pub type GramCounts = Vec<(Vec<u32>, u64)>;
/// `(gram, [(file, count)])` entries.
pub type RankedGrams = Vec<(Vec<u32>, Vec<(u32, u64)>)>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Task {
    WordCount,
    Sort,
    InvertedIndex,
    TermVector,
    SequenceCount,
    RankedInvertedIndex,
}

impl Task {
    pub const ALL: [Task; 6] = [
        Task::WordCount,
        Task::Sort,
        Task::InvertedIndex,
        Task::TermVector,
        Task::SequenceCount,
        Task::RankedInvertedIndex,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::WordCount => "word-count",
            Task::Sort => "sort",
            Task::InvertedIndex => "inverted-index",
            Task::TermVector => "term-vector",
            Task::SequenceCount => "sequence-count",
            Task::RankedInvertedIndex => "ranked-inverted-index",
        }
    }

    pub fn hooks(self) -> TaskHooks {
        let per_file = TaskHooks {
            needs_file_info: true,
            per_file_tables: true,
            preference: None,
        };
        match self {
            Task::WordCount | Task::Sort => TaskHooks::default(),
            Task::InvertedIndex => TaskHooks {
                needs_file_info: true,
                ..TaskHooks::default()
            },
            Task::TermVector | Task::SequenceCount | Task::RankedInvertedIndex => per_file,
        }
    }

    pub fn uses_sequences(self) -> bool {
        matches!(self, Task::SequenceCount | Task::RankedInvertedIndex)
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = Error;

    /// Accepts the canonical name, the name without dashes, and the short
    /// forms `seqcount` and `rankedindex`.
    fn from_str(s: &str) -> Result<Self> {
        let short = match s {
            "seqcount" => Some(Task::SequenceCount),
            "rankedindex" => Some(Task::RankedInvertedIndex),
            _ => None,
        };
        short
            .or_else(|| {
                Task::ALL
                    .into_iter()
                    .find(|t| t.name() == s || t.name().replace('-', "") == s)
            })
            .ok_or_else(|| Error::Usage(alloc::format!("unknown task `{s}`")))
    }
}

/// Results keyed by dictionary word ids and file ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TaskOutput {
    /// Ascending word id.
    WordCounts(Vec<(u32, u64)>),
    /// Descending count, ties by ascending word id.
    SortedWords(Vec<(u32, u64)>),
    /// Ascending word id, each with ascending file ids.
    InvertedIndex(Vec<(u32, Vec<u32>)>),
    /// One vector per file, descending count then ascending word id.
    TermVectors(Vec<Vec<(u32, u64)>>),
    /// One map per file, grams in ascending word-id order.
    SequenceCounts(Vec<Vec<(Vec<u32>, u64)>>),
    /// Grams in ascending word-id order, files by descending count then id.
    RankedInvertedIndex(RankedGrams),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskReport {
    pub output: TaskOutput,
    pub direction: Direction,
    pub stats: RunStats,
    /// Rounds of the head/tail pass (sequence tasks only).
    pub head_tail_rounds: usize,
}

fn by_count_desc(v: &mut [(u32, u64)]) {
    v.sort_unstable_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
}

fn narrow(v: Vec<(u64, u64)>) -> Vec<(u32, u64)> {
    v.into_iter().map(|(k, c)| (k as u32, c)).collect()
}

pub fn word_count<E: Executor>(
    dag: &Dag,
    dir: Direction,
    cfg: &TraversalConfig,
    exec: &E,
) -> Result<(Vec<(u32, u64)>, RunStats)> {
    let (v, stats) = global_counts(dag, &LocalCounts::words(dag), dir, cfg, exec)?;
    Ok((narrow(v), stats))
}

pub fn sort_by_frequency<E: Executor>(
    dag: &Dag,
    dir: Direction,
    cfg: &TraversalConfig,
    exec: &E,
) -> Result<(Vec<(u32, u64)>, RunStats)> {
    let (mut v, stats) = word_count(dag, dir, cfg, exec)?;
    by_count_desc(&mut v);
    Ok((v, stats))
}

pub fn inverted_index<E: Executor>(
    dag: &Dag,
    dir: Direction,
    cfg: &TraversalConfig,
    exec: &E,
) -> Result<(Postings, RunStats)> {
    let (v, stats) = key_file_sets(dag, &LocalCounts::words(dag), dir, cfg, exec)?;
    Ok((v.into_iter().map(|(k, f)| (k as u32, f)).collect(), stats))
}

pub fn term_vector<E: Executor>(
    dag: &Dag,
    dir: Direction,
    cfg: &TraversalConfig,
    exec: &E,
) -> Result<(Vec<WordCounts>, RunStats)> {
    let (files, stats) = per_file_counts(dag, &LocalCounts::words(dag), dir, cfg, exec)?;
    let out = files
        .into_iter()
        .map(|f| {
            let mut v = narrow(f);
            by_count_desc(&mut v);
            v
        })
        .collect();
    Ok((out, stats))
}

/// Per-file gram counts plus the head/tail round count.
pub fn sequence_count<E: Executor>(
    dag: &Dag,
    l: usize,
    dir: Direction,
    cfg: &TraversalConfig,
    exec: &E,
) -> Result<(Vec<GramCounts>, RunStats, usize)> {
    let ht = init_head_tail(dag, l, exec)?;
    let (locals, codec) = gram_local_counts(dag, &ht, exec);
    let (files, stats) = per_file_counts(dag, &locals, dir, cfg, exec)?;
    let out = files
        .into_iter()
        .map(|f| decode_all(&codec, f))
        .collect::<Result<Vec<_>>>()?;
    Ok((out, stats, ht.rounds))
}

fn decode_all(codec: &GramCodec, pairs: Vec<(u64, u64)>) -> Result<Vec<(Vec<u32>, u64)>> {
    let mut v = pairs
        .into_iter()
        .map(|(k, c)| {
            codec
                .decode(k)
                .map(|g| (g, c))
                .ok_or_else(|| Error::Corruption(alloc::format!("unknown sequence key {k:#x}")))
        })
        .collect::<Result<Vec<_>>>()?;
    v.sort_unstable();
    Ok(v)
}

/// Transposes per-file gram counts.
pub fn rank_grams(files: &[GramCounts]) -> RankedGrams {
    let mut flat: Vec<(&[u32], u32, u64)> = files
        .iter()
        .enumerate()
        .flat_map(|(f, v)| v.iter().map(move |(g, c)| (g.as_slice(), f as u32, *c)))
        .collect();
    flat.sort_unstable_by(|a, b| a.0.cmp(b.0).then(b.2.cmp(&a.2)).then(a.1.cmp(&b.1)));
    let mut out: RankedGrams = Vec::new();
    for (g, f, c) in flat {
        match out.last_mut() {
            Some((lg, list)) if lg.as_slice() == g => list.push((f, c)),
            _ => out.push((g.to_vec(), alloc::vec![(f, c)])),
        }
    }
    out
}

/// Runs one task with the configured (or automatically chosen) strategy.
pub fn run_task<E: Executor>(dag: &Dag, task: Task, l: usize, cfg: &TraversalConfig, exec: &E) -> Result<TaskReport> {
    cfg.validate()?;
    if task.uses_sequences() && l == 0 {
        return Err(Error::Usage(String::from("sequence length must be at least 1")));
    }
    let dir = select_strategy(dag.num_files, &task.hooks(), cfg);
    let mut head_tail_rounds = 0;
    let (output, stats) = match task {
        Task::WordCount => {
            let (v, s) = word_count(dag, dir, cfg, exec)?;
            (TaskOutput::WordCounts(v), s)
        }
        Task::Sort => {
            let (v, s) = sort_by_frequency(dag, dir, cfg, exec)?;
            (TaskOutput::SortedWords(v), s)
        }
        Task::InvertedIndex => {
            let (v, s) = inverted_index(dag, dir, cfg, exec)?;
            (TaskOutput::InvertedIndex(v), s)
        }
        Task::TermVector => {
            let (v, s) = term_vector(dag, dir, cfg, exec)?;
            (TaskOutput::TermVectors(v), s)
        }
        Task::SequenceCount | Task::RankedInvertedIndex => {
            let (v, s, rounds) = sequence_count(dag, l, dir, cfg, exec)?;
            head_tail_rounds = rounds;
            if task == Task::SequenceCount {
                (TaskOutput::SequenceCounts(v), s)
            } else {
                (TaskOutput::RankedInvertedIndex(rank_grams(&v)), s)
            }
        }
    };
    Ok(TaskReport {
        output,
        direction: dir,
        stats,
        head_tail_rounds,
    })
}

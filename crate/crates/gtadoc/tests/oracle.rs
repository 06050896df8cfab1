//! Compressed analytics against decompress-then-analyze on synthetic
//! corpora, through the file format and the thread pool.

use gtadoc::format::{deserialize, serialize};
use gtadoc::run::{analyze, analyze_naive};
use gtadoc::synth::{generate, SynthConfig};
use gtadoc::Workers;
use gtadoc_core::{Strategy, Task, TraversalConfig};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn synthetic_corpora_match(
        seed in any::<u64>(),
        files in 1usize..12,
        tokens in 0usize..3_000,
        vocab in 1usize..300,
        l in 1usize..6,
        workers in 1usize..5,
    ) {
        let cfg = SynthConfig { seed, files, tokens, vocab, ..SynthConfig::default() };
        let g = generate(&cfg).compress().unwrap();
        let bytes = serialize(&g);
        let g = deserialize(&bytes).unwrap();
        prop_assert_eq!(serialize(&g), bytes);
        let pool = Workers::new(workers).unwrap();
        for task in Task::ALL {
            let (want, _, _) = analyze_naive(&g, task, l).unwrap();
            for strategy in [Strategy::TopDown, Strategy::BottomUp] {
                let tc = TraversalConfig { strategy, workers, chunk_factor: 2, file_set_width: 4 };
                let got = analyze(&g, task, l, &tc, &pool).unwrap();
                prop_assert_eq!(&got.tsv, &want, "{} {:?}", task, strategy);
            }
        }
    }
}

#[test]
fn wide_grams_use_interned_keys() {
    // 40 words per window cannot be packed into 64 bits
    let cfg = SynthConfig {
        files: 3,
        tokens: 2_000,
        vocab: 30,
        repeat_prob: 0.5,
        ..SynthConfig::default()
    };
    let g = generate(&cfg).compress().unwrap();
    let pool = Workers::new(2).unwrap();
    for task in [Task::SequenceCount, Task::RankedInvertedIndex] {
        let (want, _, _) = analyze_naive(&g, task, 40).unwrap();
        for strategy in [Strategy::TopDown, Strategy::BottomUp] {
            let tc = TraversalConfig {
                strategy,
                workers: 2,
                ..TraversalConfig::default()
            };
            assert_eq!(analyze(&g, task, 40, &tc, &pool).unwrap().tsv, want);
        }
    }
}

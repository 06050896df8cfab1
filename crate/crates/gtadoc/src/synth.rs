//! Synthetic corpora: Zipf-distributed words with copied phrases, so the
//! grammars have real depth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

use crate::corpus::Corpus;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub files: usize,
    pub tokens: usize,
    pub vocab: usize,
    pub exponent: f64,
    /// Chance that the next output is a phrase copied from earlier text.
    pub repeat_prob: f64,
    pub max_phrase: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            files: 8,
            tokens: 10_000,
            vocab: 1_000,
            exponent: 1.1,
            repeat_prob: 0.2,
            max_phrase: 24,
        }
    }
}

/// Word ids per file. Files may be empty.
pub fn generate_ids(cfg: &SynthConfig) -> Vec<Vec<u32>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let files = cfg.files.max(1);
    let zipf = Zipf::new(cfg.vocab.max(1) as f64, cfg.exponent).expect("valid zipf parameters");
    let mut cuts: Vec<usize> = (1..files).map(|_| rng.random_range(0..=cfg.tokens)).collect();
    cuts.sort_unstable();
    cuts.push(cfg.tokens);
    let mut text: Vec<u32> = Vec::with_capacity(cfg.tokens);
    let mut out = Vec::with_capacity(files);
    for end in cuts {
        let begin = text.len();
        while text.len() < end {
            let left = end - text.len();
            if text.len() > 2 && rng.random_bool(cfg.repeat_prob) {
                let n = rng.random_range(2..=cfg.max_phrase.max(2)).min(left).min(text.len());
                let at = rng.random_range(0..=text.len() - n);
                text.extend_from_within(at..at + n);
            } else {
                text.push(zipf.sample(&mut rng) as u32 - 1);
            }
        }
        out.push(text[begin..].to_vec());
    }
    out
}

pub fn word_name(id: u32) -> String {
    format!("w{id}")
}

pub fn generate(cfg: &SynthConfig) -> Corpus {
    let ids = generate_ids(cfg);
    let width = ids.len().to_string().len();
    Corpus::from_texts(ids.iter().enumerate().map(|(i, f)| {
        let text: Vec<String> = f.iter().map(|&w| word_name(w)).collect();
        (format!("doc{i:0width$}.txt"), text.join(" "))
    }))
}

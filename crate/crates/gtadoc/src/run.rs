//! Timed analysis, oracle checks, and benchmarks.

use std::time::{Duration, Instant};

use gtadoc_core::{naive, run_task, Dag, Grammar, Task, TaskReport, TraversalConfig};
use serde::Serialize;

use crate::error::CliError;
use crate::parallel::Workers;
use crate::tsv;

pub struct Analysis {
    pub report: TaskReport,
    pub tsv: String,
    pub init: Duration,
    pub traversal: Duration,
}

/// Builds the DAG (initialization) and runs the task (traversal).
pub fn analyze(
    grammar: &Grammar,
    task: Task,
    l: usize,
    cfg: &TraversalConfig,
    exec: &Workers,
) -> Result<Analysis, CliError> {
    let t = Instant::now();
    let dag = Dag::build(grammar)?;
    let init = t.elapsed();
    let t = Instant::now();
    let report = run_task(&dag, task, l, cfg, exec)?;
    let traversal = t.elapsed();
    let tsv = tsv::render(&report.output, &grammar.dictionary);
    Ok(Analysis {
        report,
        tsv,
        init,
        traversal,
    })
}

/// Decompresses and runs the reference implementation; returns the TSV
/// and the two phase times.
pub fn analyze_naive(grammar: &Grammar, task: Task, l: usize) -> Result<(String, Duration, Duration), CliError> {
    let t = Instant::now();
    let files = grammar.decompress_files()?;
    let decompress = t.elapsed();
    let t = Instant::now();
    let out = naive::run(&files, task, l);
    let analysis = t.elapsed();
    Ok((tsv::render(&out, &grammar.dictionary), decompress, analysis))
}

/// Runs `task` both ways and fails with the first differing record.
pub fn verify(grammar: &Grammar, task: Task, l: usize, cfg: &TraversalConfig, exec: &Workers) -> Result<(), CliError> {
    let got = analyze(grammar, task, l, cfg, exec)?.tsv;
    let (want, _, _) = analyze_naive(grammar, task, l)?;
    match tsv::first_difference(&want, &got) {
        None => Ok(()),
        Some((line, e, a)) => Err(CliError::Divergence {
            task: task.name().into(),
            detail: format!("record {line}: expected `{e}`, actual `{a}`"),
        }),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Machine {
    pub cpus: usize,
    pub os: &'static str,
    pub arch: &'static str,
}

impl Machine {
    pub fn current() -> Self {
        Self {
            cpus: std::thread::available_parallelism().map_or(1, |n| n.get()),
            os: std::env::consts::OS,
            arch: std::env::consts::ARCH,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub mode: String,
    pub workers: usize,
    pub median_ms: f64,
    pub init_ms: f64,
    pub traversal_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub machine: Machine,
    pub task: String,
    pub repeat: usize,
    pub rows: Vec<BenchRow>,
    pub speedup_vs_sequential: f64,
    pub speedup_vs_naive: f64,
    /// All three modes produced the same output.
    pub outputs_agree: bool,
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

// Phases come from the median run(s), so they add up to the median total.
fn row(mode: &str, workers: usize, samples: &[(Duration, Duration)]) -> BenchRow {
    let mut runs: Vec<(f64, f64)> = samples.iter().map(|&(a, b)| (ms(a), ms(b))).collect();
    runs.sort_by(|x, y| (x.0 + x.1).total_cmp(&(y.0 + y.1)));
    let n = runs.len();
    let mid = if n % 2 == 1 {
        &runs[n / 2..=n / 2]
    } else {
        &runs[n / 2 - 1..=n / 2]
    };
    let k = mid.len() as f64;
    let init_ms = mid.iter().map(|r| r.0).sum::<f64>() / k;
    let traversal_ms = mid.iter().map(|r| r.1).sum::<f64>() / k;
    BenchRow {
        mode: mode.into(),
        workers,
        median_ms: median(runs.iter().map(|r| r.0 + r.1).collect()),
        init_ms,
        traversal_ms,
    }
}

/// Median timings of parallel and sequential compressed analytics and of
/// decompress-then-analyze. For the last mode the phases are
/// decompression and analysis.
pub fn bench(
    grammar: &Grammar,
    task: Task,
    l: usize,
    cfg: &TraversalConfig,
    workers: usize,
    repeat: usize,
) -> Result<BenchReport, CliError> {
    let repeat = repeat.max(1);
    let parallel = Workers::new(workers)?;
    let sequential = Workers::new(1)?;
    let seq_cfg = TraversalConfig {
        workers: 1,
        ..cfg.clone()
    };
    let mut p = Vec::new();
    let mut s = Vec::new();
    let mut nv = Vec::new();
    let mut outputs = Vec::new();
    for _ in 0..repeat {
        let a = analyze(grammar, task, l, cfg, &parallel)?;
        p.push((a.init, a.traversal));
        let b = analyze(grammar, task, l, &seq_cfg, &sequential)?;
        s.push((b.init, b.traversal));
        let (c, d, t) = analyze_naive(grammar, task, l)?;
        nv.push((d, t));
        outputs = vec![a.tsv, b.tsv, c];
    }
    let rows = vec![
        row("parallel", workers, &p),
        row("sequential", 1, &s),
        row("decompress+naive", 1, &nv),
    ];
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { 0.0 };
    Ok(BenchReport {
        machine: Machine::current(),
        task: task.name().into(),
        repeat,
        speedup_vs_sequential: ratio(rows[1].median_ms, rows[0].median_ms),
        speedup_vs_naive: ratio(rows[2].median_ms, rows[0].median_ms),
        rows,
        outputs_agree: outputs.windows(2).all(|w| w[0] == w[1]),
    })
}

impl BenchReport {
    pub fn to_text(&self) -> String {
        let m = &self.machine;
        let mut s = format!(
            "machine\tcpus={}\tos={}\tarch={}\ntask\t{}\trepeat={}\nmode\tworkers\tmedian_ms\tinit_ms\ttraversal_ms\n",
            m.cpus, m.os, m.arch, self.task, self.repeat
        );
        for r in &self.rows {
            s += &format!(
                "{}\t{}\t{:.3}\t{:.3}\t{:.3}\n",
                r.mode, r.workers, r.median_ms, r.init_ms, r.traversal_ms
            );
        }
        s += &format!(
            "speedup_vs_sequential\t{:.2}\nspeedup_vs_naive\t{:.2}\noutputs_agree\t{}\n",
            self.speedup_vs_sequential, self.speedup_vs_naive, self.outputs_agree
        );
        s
    }
}

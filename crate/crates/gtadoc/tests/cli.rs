use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gtadoc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gtadoc"))
        .args(args)
        .env_remove("GTADOC_WORKERS")
        .output()
        .expect("binary runs")
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn g1_dir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    fs::create_dir(&corpus).unwrap();
    fs::write(corpus.join("A.txt"), "a b a b c\n").unwrap();
    fs::write(corpus.join("B.txt"), "a b c\n").unwrap();
    dir
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn compress_g1(dir: &Path) -> std::path::PathBuf {
    let out = dir.join("g1.gtdc");
    let o = gtadoc(&["compress", s(&dir.join("corpus")), s(&out)]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    out
}

#[test]
fn compress_reports_and_is_deterministic() {
    let dir = g1_dir();
    let out = dir.path().join("g1.gtdc");
    let o = gtadoc(&["compress", s(&dir.path().join("corpus")), s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let stdout = text(&o.stdout);
    assert!(stdout.contains("files: 2\n"));
    assert!(stdout.contains("rules: 3\n"));
    assert!(stdout.contains("vocabulary: 3\n"));
    assert!(stdout.contains("compression_ratio: "));
    let bytes = fs::read(&out).unwrap();
    assert_eq!(&bytes[..5], b"GTDC\x01");
    assert_eq!(u32::from_le_bytes(bytes[5..9].try_into().unwrap()), 3);
    assert_eq!(u32::from_le_bytes(bytes[9..13].try_into().unwrap()), 2);
    assert_eq!(u32::from_le_bytes(bytes[13..17].try_into().unwrap()), 3);

    let again = dir.path().join("again.gtdc");
    gtadoc(&["compress", s(&dir.path().join("corpus")), s(&again)]);
    assert_eq!(fs::read(&again).unwrap(), bytes);
}

#[test]
fn analyze_word_count_and_manifest() {
    let dir = g1_dir();
    let file = compress_g1(dir.path());
    let o = gtadoc(&["analyze", s(&file), "wordcount", "--workers", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    assert_eq!(text(&o.stdout), "a\t3\nb\t3\nc\t2\n");
    let stderr = text(&o.stderr);
    assert_eq!(stderr.lines().count(), 1);
    let m: serde_json::Value = serde_json::from_str(stderr.trim()).unwrap();
    assert_eq!(m["command"], "analyze");
    assert_eq!(m["task"], "word-count");
    assert_eq!(m["workers"], 2);
    assert!(m["timings"]["init_ms"].as_f64().unwrap() >= 0.0);
    assert!(m["timings"]["traversal_ms"].as_f64().unwrap() >= 0.0);
    assert_eq!(m["digest"].as_str().unwrap().len(), 64);
}

#[test]
fn analyze_sequence_count_to_file() {
    let dir = g1_dir();
    let file = compress_g1(dir.path());
    let out = dir.path().join("seq.tsv");
    let o = gtadoc(&["analyze", s(&file), "--task", "seqcount", "--l", "3", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    assert!(o.stdout.is_empty());
    assert_eq!(
        fs::read_to_string(out).unwrap(),
        "0\ta b a\t1\n0\ta b c\t1\n0\tb a b\t1\n1\ta b c\t1\n"
    );
}

#[test]
fn strategy_and_workers_do_not_change_digest() {
    let dir = g1_dir();
    let file = compress_g1(dir.path());
    for task in ["term-vector", "ranked-inverted-index", "inverted-index"] {
        let mut digests = Vec::new();
        for strategy in ["topdown", "bottomup", "auto"] {
            for workers in ["1", "3"] {
                let o = Command::new(env!("CARGO_BIN_EXE_gtadoc"))
                    .args(["analyze", s(&file), task, "--strategy", strategy])
                    .env("GTADOC_WORKERS", workers)
                    .output()
                    .unwrap();
                assert_eq!(o.status.code(), Some(0));
                let m: serde_json::Value = serde_json::from_str(text(&o.stderr).trim()).unwrap();
                assert_eq!(m["workers"].to_string(), workers);
                digests.push(m["digest"].as_str().unwrap().to_owned());
            }
        }
        assert!(digests.windows(2).all(|w| w[0] == w[1]), "{task}");
    }
}

#[test]
fn verify_all_tasks() {
    let dir = g1_dir();
    let o = gtadoc(&["verify", s(&dir.path().join("corpus"))]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    assert_eq!(text(&o.stdout).lines().count(), 6);

    let synth = dir.path().join("synth");
    let o = gtadoc(&[
        "synth",
        s(&synth),
        "--seed",
        "42",
        "--files",
        "5",
        "--tokens",
        "4000",
        "--vocab",
        "200",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = gtadoc(&["verify", s(&synth), "--workers", "4", "--l", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
}

#[test]
fn corrupted_file_is_rejected() {
    let dir = g1_dir();
    let file = compress_g1(dir.path());
    let bytes = fs::read(&file).unwrap();
    // swap the words of the rule for `a b`: still a valid grammar, different text
    let mut g = gtadoc::format::deserialize(&bytes).unwrap();
    let r = (1..g.rules.len())
        .find(|&r| g.rules[r].len() == 2 && g.rules[r].iter().all(|s| s.0 < 3))
        .unwrap();
    g.rules[r].swap(0, 1);
    let mut bytes = gtadoc::format::serialize(&g);
    let n = bytes.len();
    let bad = dir.path().join("bad.gtdc");
    fs::write(&bad, &bytes).unwrap();
    for task in ["word-count", "seqcount"] {
        let o = gtadoc(&["verify", s(&dir.path().join("corpus")), task, "--compressed", s(&bad)]);
        assert_eq!(o.status.code(), Some(4));
        assert!(
            text(&o.stderr).contains("A.txt token 0: expected `a`, actual `b`"),
            "{}",
            text(&o.stderr)
        );
    }
    // the engine still agrees with decompression of the bad file
    assert_eq!(gtadoc(&["analyze", s(&bad), "seqcount"]).status.code(), Some(0));

    // out-of-range symbol
    bytes[n - 4..].copy_from_slice(&1000u32.to_le_bytes());
    fs::write(&bad, &bytes).unwrap();
    let o = gtadoc(&["analyze", s(&bad), "sort"]);
    assert_eq!(o.status.code(), Some(3));
    fs::write(&bad, b"nope").unwrap();
    let o = gtadoc(&["analyze", s(&bad), "sort"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(text(&o.stderr).contains("bad magic"));
}

#[test]
fn exit_codes() {
    let dir = g1_dir();
    let file = compress_g1(dir.path());
    assert_eq!(gtadoc(&["analyze", s(&file), "nonsense"]).status.code(), Some(1));
    assert_eq!(gtadoc(&["analyze", s(&file)]).status.code(), Some(1));
    assert_eq!(
        gtadoc(&["analyze", s(&file), "sort", "--workers", "0"]).status.code(),
        Some(1)
    );
    assert_eq!(gtadoc(&["analyze", s(&file), "sort", "--bogus"]).status.code(), Some(1));
    assert_eq!(gtadoc(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        gtadoc(&["analyze", "/nonexistent/x.gtdc", "sort"]).status.code(),
        Some(2)
    );
    let empty = dir.path().join("empty");
    fs::create_dir(&empty).unwrap();
    assert_eq!(
        gtadoc(&["compress", s(&empty), s(&dir.path().join("e.gtdc"))])
            .status
            .code(),
        Some(1)
    );
    let bin = dir.path().join("bin");
    fs::create_dir(&bin).unwrap();
    fs::write(bin.join("x"), b"ok \xff").unwrap();
    let o = gtadoc(&["compress", s(&bin), s(&dir.path().join("b.gtdc"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("x: invalid UTF-8 at byte 3"));
    let o = gtadoc(&["--version"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(text(&o.stdout).trim(), format!("gtadoc {}", env!("CARGO_PKG_VERSION")));
    assert!(o.stderr.is_empty());
    assert_eq!(gtadoc(&["--help"]).status.code(), Some(0));
}

#[test]
fn bench_prints_three_rows() {
    let dir = g1_dir();
    let o = gtadoc(&[
        "bench",
        s(&dir.path().join("corpus")),
        "word-count",
        "--repeat",
        "3",
        "--workers",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    let out = text(&o.stdout);
    for row in [
        "parallel\t2\t",
        "sequential\t1\t",
        "decompress+naive\t1\t",
        "speedup_vs_sequential",
        "speedup_vs_naive",
        "machine\tcpus=",
    ] {
        assert!(out.contains(row), "{row} missing from\n{out}");
    }
    assert!(out.contains("outputs_agree\ttrue"));
    let report: serde_json::Value = serde_json::from_str(text(&o.stderr).trim()).unwrap();
    assert_eq!(report["repeat"], 3);
}

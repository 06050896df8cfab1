//! Tab-separated task output. One record per line; files are named by
//! their ingestion index; grams are joined with single spaces.

use std::fmt::Write;

use gtadoc_core::{Dictionary, TaskOutput};

fn word(d: &Dictionary, id: u32) -> &str {
    d.word(id).unwrap_or("?")
}

fn gram(d: &Dictionary, g: &[u32], out: &mut String) {
    for (i, &w) in g.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(word(d, w));
    }
}

pub fn render(out: &TaskOutput, d: &Dictionary) -> String {
    let mut s = String::new();
    match out {
        TaskOutput::WordCounts(v) | TaskOutput::SortedWords(v) => {
            for &(w, c) in v {
                let _ = writeln!(s, "{}\t{c}", word(d, w));
            }
        }
        TaskOutput::InvertedIndex(v) => {
            for (w, files) in v {
                let list: Vec<String> = files.iter().map(u32::to_string).collect();
                let _ = writeln!(s, "{}\t{}", word(d, *w), list.join(","));
            }
        }
        TaskOutput::TermVectors(files) => {
            for (f, v) in files.iter().enumerate() {
                for &(w, c) in v {
                    let _ = writeln!(s, "{f}\t{}\t{c}", word(d, w));
                }
            }
        }
        TaskOutput::SequenceCounts(files) => {
            for (f, v) in files.iter().enumerate() {
                for (g, c) in v {
                    let _ = write!(s, "{f}\t");
                    gram(d, g, &mut s);
                    let _ = writeln!(s, "\t{c}");
                }
            }
        }
        TaskOutput::RankedInvertedIndex(v) => {
            for (g, list) in v {
                for &(f, c) in list {
                    gram(d, g, &mut s);
                    let _ = writeln!(s, "\t{f}\t{c}");
                }
            }
        }
    }
    s
}

/// First line where two renderings differ, as `(line number, expected, actual)`.
pub fn first_difference<'a>(expected: &'a str, actual: &'a str) -> Option<(usize, &'a str, &'a str)> {
    let mut e = expected.lines();
    let mut a = actual.lines();
    for n in 1.. {
        match (e.next(), a.next()) {
            (None, None) => return None,
            (x, y) if x == y => continue,
            (x, y) => return Some((n, x.unwrap_or("<end>"), y.unwrap_or("<end>"))),
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dict() -> Dictionary {
        Dictionary::from_words(vec!["a".into(), "b".into(), "c".into()], 2).unwrap()
    }

    #[test]
    fn layouts() {
        let d = dict();
        let wc = TaskOutput::WordCounts(vec![(0, 3), (1, 3), (2, 2)]);
        assert_eq!(render(&wc, &d), "a\t3\nb\t3\nc\t2\n");
        let ii = TaskOutput::InvertedIndex(vec![(0, vec![0, 1])]);
        assert_eq!(render(&ii, &d), "a\t0,1\n");
        let tv = TaskOutput::TermVectors(vec![vec![(0, 2)], vec![(2, 1)]]);
        assert_eq!(render(&tv, &d), "0\ta\t2\n1\tc\t1\n");
        let sc = TaskOutput::SequenceCounts(vec![vec![(vec![0, 1, 2], 1)], vec![]]);
        assert_eq!(render(&sc, &d), "0\ta b c\t1\n");
        let ri = TaskOutput::RankedInvertedIndex(vec![(vec![0, 1, 2], vec![(0, 1), (1, 1)])]);
        assert_eq!(render(&ri, &d), "a b c\t0\t1\na b c\t1\t1\n");
    }

    #[test]
    fn difference() {
        assert_eq!(first_difference("a\nb\n", "a\nb\n"), None);
        assert_eq!(first_difference("a\nb\n", "a\nc\n"), Some((2, "b", "c")));
        assert_eq!(first_difference("a\n", "a\nc\n"), Some((2, "<end>", "c")));
    }
}

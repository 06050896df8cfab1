//! Reading a corpus directory and compressing it.

use std::fs;
use std::path::Path;

use gtadoc_core::grammar::build_corpus_stream;
use gtadoc_core::sequitur::infer;
use gtadoc_core::Grammar;

use crate::error::CliError;
use crate::tokenize::tokenize;

// Rule substitution cascades recurse; give inference room on deep inputs.
const INFER_STACK: usize = 512 << 20;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub names: Vec<String>,
    pub files: Vec<Vec<String>>,
    /// Raw input size.
    pub bytes: u64,
}

impl Corpus {
    /// Every regular file directly inside `dir`, in lexicographic name order.
    pub fn read_dir(dir: &Path) -> Result<Self, CliError> {
        let mut entries = Vec::new();
        for entry in fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
            let entry = entry.map_err(|e| CliError::io(dir, e))?;
            let ty = entry.file_type().map_err(|e| CliError::io(entry.path(), e))?;
            let path = entry.path();
            let is_file = ty.is_file() || (ty.is_symlink() && path.is_file());
            if is_file {
                entries.push((entry.file_name().to_string_lossy().into_owned(), path));
            }
        }
        if entries.is_empty() {
            return Err(CliError::Usage(format!("{}: no input files", dir.display())));
        }
        entries.sort();
        let mut corpus = Corpus::default();
        for (name, path) in entries {
            let raw = fs::read(&path).map_err(|e| CliError::io(&path, e))?;
            corpus.bytes += raw.len() as u64;
            corpus.files.push(tokenize(&raw, &name)?);
            corpus.names.push(name);
        }
        Ok(corpus)
    }

    pub fn from_texts<N: Into<String>, T: AsRef<str>>(texts: impl IntoIterator<Item = (N, T)>) -> Self {
        let mut corpus = Corpus::default();
        for (name, text) in texts {
            let text = text.as_ref();
            corpus.bytes += text.len() as u64;
            corpus.names.push(name.into());
            corpus.files.push(text.split_whitespace().map(str::to_owned).collect());
        }
        corpus
    }

    pub fn tokens(&self) -> usize {
        self.files.iter().map(Vec::len).sum()
    }

    pub fn compress(&self) -> Result<Grammar, CliError> {
        let pairs: Vec<(&str, &[String])> = self
            .names
            .iter()
            .map(String::as_str)
            .zip(self.files.iter().map(Vec::as_slice))
            .collect();
        let (dict, stream) = build_corpus_stream(&pairs)?;
        std::thread::scope(|s| {
            std::thread::Builder::new()
                .name("gtadoc-infer".into())
                .stack_size(INFER_STACK)
                .spawn_scoped(s, || infer(dict, &stream))
                .map_err(|e| CliError::io("<thread>", e))?
                .join()
                .map_err(|_| CliError::Engine(gtadoc_core::Error::Resource("grammar inference panicked".into())))
        })
    }

    /// First place where the expansion of `g` differs from the tokens read,
    /// as `(file, token index, expected, actual)`.
    pub fn first_mismatch(&self, g: &Grammar) -> Result<Option<(usize, usize, String, String)>, CliError> {
        let plain = g.decompress_files()?;
        if plain.len() != self.files.len() {
            let n = plain.len().min(self.files.len());
            return Ok(Some((
                n,
                0,
                format!("{} files", self.files.len()),
                format!("{} files", plain.len()),
            )));
        }
        let dict = &g.dictionary;
        for (f, (want, got)) in self.files.iter().zip(&plain).enumerate() {
            for i in 0..want.len().max(got.len()) {
                let e = want.get(i).map_or("<end>", String::as_str);
                let a = got.get(i).and_then(|&w| dict.word(w)).unwrap_or("<end>");
                if e != a {
                    return Ok(Some((f, i, e.to_owned(), a.to_owned())));
                }
            }
        }
        Ok(None)
    }
}

//! Whitespace tokenization.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("{file}: invalid UTF-8 at byte {offset}")]
pub struct InvalidUtf8 {
    pub file: String,
    pub offset: usize,
}

/// Splits on Unicode whitespace. Punctuation stays inside tokens.
pub fn tokenize(bytes: &[u8], file: &str) -> Result<Vec<String>, InvalidUtf8> {
    let text = std::str::from_utf8(bytes).map_err(|e| InvalidUtf8 {
        file: file.to_owned(),
        offset: e.valid_up_to(),
    })?;
    Ok(text.split_whitespace().map(str::to_owned).collect())
}

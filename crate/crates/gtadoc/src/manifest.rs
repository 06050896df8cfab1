//! Run manifests: one JSON object per line on stderr.

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Timings {
    pub load_ms: f64,
    pub init_ms: f64,
    pub traversal_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<String>,
    pub task: String,
    pub l: usize,
    pub strategy: String,
    /// Direction actually used.
    pub direction: String,
    pub workers: usize,
    pub chunk_factor: usize,
    pub timings: Timings,
    pub digest: String,
}

impl RunManifest {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("manifest serializes")
    }
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_sha256_hex() {
        assert_eq!(
            digest(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn single_line_json() {
        let m = RunManifest {
            command: "analyze".into(),
            inputs: vec!["g1.gtdc".into()],
            task: "word-count".into(),
            l: 3,
            strategy: "auto".into(),
            direction: "top-down".into(),
            workers: 2,
            chunk_factor: 16,
            timings: Timings::default(),
            digest: digest(b"x"),
        };
        let line = m.to_json_line();
        assert!(!line.contains('\n'));
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["timings"]["init_ms"], 0.0);
        assert_eq!(v["workers"], 2);
    }
}

//! SHA-256 content hashes used for artifact, run and report identity.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Lower-case hex SHA-256 digest.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ContentHash(String);

impl ContentHash {
    pub fn of_bytes(bytes: &[u8]) -> Self {
        Self(hex::encode(Sha256::digest(bytes)))
    }

    /// Hash of the compact JSON encoding. Struct fields serialize in
    /// declaration order and all maps in this crate are ordered, so the
    /// encoding is canonical.
    pub fn of_json<T: Serialize + ?Sized>(value: &T) -> Self {
        let bytes = serde_json::to_vec(value).expect("in-memory values always serialize");
        Self::of_bytes(&bytes)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// First 16 hex characters; enough for directory names.
    pub fn short(&self) -> &str {
        &self.0[..16]
    }

    pub fn from_hex(s: impl Into<String>) -> Self {
        Self(s.into())
    }
}

impl fmt::Display for ContentHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Incremental hasher for multi-part fingerprints.
#[derive(Default)]
pub struct Hasher(Sha256);

impl Hasher {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn update(&mut self, bytes: impl AsRef<[u8]>) -> &mut Self {
        let bytes = bytes.as_ref();
        // length prefix keeps ("ab","c") and ("a","bc") apart
        self.0.update((bytes.len() as u64).to_le_bytes());
        self.0.update(bytes);
        self
    }

    pub fn update_json<T: Serialize + ?Sized>(&mut self, value: &T) -> &mut Self {
        let bytes = serde_json::to_vec(value).expect("in-memory values always serialize");
        self.update(bytes)
    }

    pub fn finish(self) -> ContentHash {
        ContentHash(hex::encode(self.0.finalize()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            ContentHash::of_bytes(b"abc").as_str(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn length_prefix_separates_parts() {
        let mut a = Hasher::new();
        a.update("ab").update("c");
        let mut b = Hasher::new();
        b.update("a").update("bc");
        assert_ne!(a.finish(), b.finish());
    }
}

//! File-per-key reply cache.
//!
//! Key = SHA-256 over (model id, full prompt text, decoding parameters).
//! Each entry is one file named by the hex key: a one-line JSON header
//! followed by the raw reply bytes. Writes go through a temp file and an
//! atomic rename, so concurrent misses for the same key are safe (last write
//! wins with identical content).

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize, Deserialize)]
struct CacheHeader<'a> {
    strategy: &'a str,
    model_id: &'a str,
}

pub struct ReplyCache {
    dir: PathBuf,
}

impl ReplyCache {
    pub fn open(dir: impl AsRef<Path>) -> io::Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir)?;
        Ok(ReplyCache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Content key for a call: hash of model id, prompt, and the canonical
    /// (sorted-key) serialization of the decoding parameters.
    pub fn key(
        model_id: &str,
        prompt: &str,
        params: &BTreeMap<String, serde_json::Value>,
    ) -> String {
        let mut hasher = Sha256::new();
        hasher.update(model_id.as_bytes());
        hasher.update([0]);
        hasher.update(prompt.as_bytes());
        hasher.update([0]);
        hasher.update(serde_json::to_string(params).expect("params serialize").as_bytes());
        hex::encode(hasher.finalize())
    }

    fn entry_path(&self, key: &str) -> PathBuf {
        self.dir.join(key)
    }

    pub fn get(&self, key: &str) -> Option<String> {
        let bytes = fs::read(self.entry_path(key)).ok()?;
        let newline = bytes.iter().position(|&b| b == b'\n')?;
        let reply = bytes.get(newline + 1..)?;
        String::from_utf8(reply.to_vec()).ok()
    }

    pub fn put(
        &self,
        key: &str,
        strategy: &str,
        model_id: &str,
        reply: &str,
    ) -> io::Result<()> {
        let header = serde_json::to_string(&CacheHeader { strategy, model_id })
            .expect("header serializes");
        let mut content = header.into_bytes();
        content.push(b'\n');
        content.extend_from_slice(reply.as_bytes());

        let tmp = self.dir.join(format!(
            "{key}.tmp.{}.{}",
            std::process::id(),
            std::thread::current().id().as_u64_or_fallback()
        ));
        fs::write(&tmp, &content)?;
        fs::rename(&tmp, self.entry_path(key))
    }
}

trait ThreadIdExt {
    fn as_u64_or_fallback(&self) -> u64;
}

impl ThreadIdExt for std::thread::ThreadId {
    fn as_u64_or_fallback(&self) -> u64 {
        // ThreadId has no stable integer accessor; hash the Debug form.
        use std::collections::hash_map::DefaultHasher;
        use std::hash::{Hash, Hasher};
        let mut h = DefaultHasher::new();
        self.hash(&mut h);
        h.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_replies_with_multiline_content() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ReplyCache::open(dir.path()).unwrap();
        let key = ReplyCache::key("model-x", "prompt", &BTreeMap::new());
        assert!(cache.get(&key).is_none());
        cache.put(&key, "test", "model-x", "line1\nline2\n").unwrap();
        assert_eq!(cache.get(&key).unwrap(), "line1\nline2\n");
    }

    #[test]
    fn key_depends_on_model_prompt_and_params() {
        let empty = BTreeMap::new();
        let mut params = BTreeMap::new();
        params.insert("temperature".to_string(), serde_json::json!(0.0));
        let base = ReplyCache::key("m", "p", &empty);
        assert_ne!(base, ReplyCache::key("m2", "p", &empty));
        assert_ne!(base, ReplyCache::key("m", "p2", &empty));
        assert_ne!(base, ReplyCache::key("m", "p", &params));
        assert_eq!(base, ReplyCache::key("m", "p", &empty));
        assert_eq!(base.len(), 64);
    }
}

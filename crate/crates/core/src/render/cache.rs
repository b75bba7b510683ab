use crate::error::Result;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

/// Content-addressed byte cache on disk. Writes go to a temp file that is renamed into place,
/// so readers never observe a partial entry.
#[derive(Debug)]
pub struct TileCache {
    dir: PathBuf,
    seq: AtomicU64,
}

impl TileCache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(TileCache { dir, seq: AtomicU64::new(0) })
    }

    /// Cache at $ATLAS_CACHE_DIR, if set.
    pub fn from_env() -> Result<Option<Self>> {
        match std::env::var_os("ATLAS_CACHE_DIR") {
            Some(d) if !d.is_empty() => Ok(Some(Self::open(d)?)),
            _ => Ok(None),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(format!("{name}.png"))
    }

    pub fn get(&self, name: &str) -> Option<Vec<u8>> {
        fs::read(self.path(name)).ok()
    }

    pub fn put(&self, name: &str, bytes: &[u8]) -> Result<()> {
        let n = self.seq.fetch_add(1, Ordering::Relaxed);
        let tmp = self.dir.join(format!(".{name}.{}.{n}.tmp", std::process::id()));
        fs::write(&tmp, bytes)?;
        if let Err(e) = fs::rename(&tmp, self.path(name)) {
            let _ = fs::remove_file(&tmp);
            return Err(e.into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn put_then_get_leaves_no_temp_files() {
        let d = tempfile::tempdir().unwrap();
        let c = TileCache::open(d.path()).unwrap();
        assert!(c.get("k").is_none());
        c.put("k", b"abc").unwrap();
        c.put("k", b"abcd").unwrap();
        assert_eq!(c.get("k").unwrap(), b"abcd");
        let names: Vec<_> = fs::read_dir(d.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names.len(), 1);
    }
}

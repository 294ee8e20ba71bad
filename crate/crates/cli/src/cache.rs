//! On-disk zero cache. One JSON file per key, named by the SHA-256 of the
//! key. Unreadable entries are reported and recomputed.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use zsa_core::catalog::CatalogRecord;
use zsa_core::export::float17;
use zsa_core::zerofinder::sort_zeros;
use zsa_core::{ComplexZero, Family, ZeroCatalog};

use crate::output::write_atomic;

pub const CODE_VERSION: &str = concat!("zsa-", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheKey {
    pub family: Family,
    pub n: u64,
    /// `[x_min, x_max, y_min, y_max]`.
    pub rect: [f64; 4],
    pub tol: f64,
    pub version: String,
}

impl CacheKey {
    pub fn new(family: Family, n: u64, rect: [f64; 4], tol: f64) -> Self {
        CacheKey {
            family,
            n,
            rect,
            tol,
            version: CODE_VERSION.to_string(),
        }
    }

    fn digest(&self, kind: &str, rect: &[f64]) -> String {
        let mut h = Sha256::new();
        h.update(kind.as_bytes());
        h.update(b"|");
        h.update(self.family.as_str().as_bytes());
        h.update(format!("|{}", self.n).as_bytes());
        for v in rect.iter().chain([&self.tol]) {
            h.update(format!("|{}", float17(*v)).as_bytes());
        }
        h.update(b"|");
        h.update(self.version.as_bytes());
        hex::encode(h.finalize())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroCacheEntry {
    pub key: CacheKey,
    pub zeros: Vec<ComplexZero>,
    /// Seconds since the Unix epoch.
    pub created: u64,
}

impl ZeroCacheEntry {
    pub fn new(key: CacheKey, zeros: Vec<ComplexZero>) -> Self {
        let created = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        ZeroCacheEntry { key, zeros, created }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(zsa_core::export::to_json(self)?)
    }
}

/// Union of two zero lists; a zero within `10·tol` of one already kept is
/// dropped.
pub fn merge_zeros(a: &[ComplexZero], b: &[ComplexZero], tol: f64) -> Vec<ComplexZero> {
    let radius = 10.0 * tol;
    let mut out: Vec<ComplexZero> = Vec::with_capacity(a.len() + b.len());
    for z in a.iter().chain(b) {
        if !out.iter().any(|k| (k.position() - z.position()).norm() <= radius) {
            out.push(*z);
        }
    }
    sort_zeros(&mut out);
    out
}

#[derive(Debug, Clone)]
pub struct ZeroCache {
    dir: PathBuf,
}

impl ZeroCache {
    pub fn open(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create cache {}", dir.display()))?;
        Ok(ZeroCache {
            dir: dir.to_path_buf(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn rect_path(&self, key: &CacheKey) -> PathBuf {
        self.dir.join(format!("rect-{}.json", key.digest("rect", &key.rect)))
    }

    /// Strip entries are keyed without the height they cover.
    fn strip_path(&self, key: &CacheKey) -> PathBuf {
        self.dir.join(format!("strip-{}.json", key.digest("strip", &key.rect[..2])))
    }

    fn read(&self, path: &Path) -> Option<ZeroCacheEntry> {
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return None,
            Err(e) => {
                eprintln!("warning: cannot read cache entry {}: {e}; rebuilding", path.display());
                return None;
            }
        };
        match serde_json::from_str(&text) {
            Ok(entry) => Some(entry),
            Err(e) => {
                eprintln!("warning: cache entry {} is corrupt ({e}); rebuilding", path.display());
                None
            }
        }
    }

    /// Zeros stored for exactly this key.
    pub fn load(&self, key: &CacheKey) -> Option<ZeroCacheEntry> {
        let path = self.rect_path(key);
        let entry = self.read(&path)?;
        if entry.key != *key {
            eprintln!("warning: cache entry {} has a different key; rebuilding", path.display());
            return None;
        }
        Some(entry)
    }

    pub fn store(&self, entry: &ZeroCacheEntry) -> Result<()> {
        write_atomic(&self.rect_path(&entry.key), entry.to_json()?.as_bytes())
    }

    fn load_strip(&self, key: &CacheKey) -> Option<ZeroCacheEntry> {
        let path = self.strip_path(key);
        let entry = self.read(&path)?;
        let same = entry.key.family == key.family
            && entry.key.n == key.n
            && entry.key.rect[..2] == key.rect[..2]
            && entry.key.tol == key.tol
            && entry.key.version == key.version
            && entry.key.rect[3] > 0.0;
        if !same {
            eprintln!("warning: cache entry {} has a different key; rebuilding", path.display());
            return None;
        }
        Some(entry)
    }

    /// Seeds `catalog` with the stored strips for the given orders.
    pub fn preload(&self, catalog: &ZeroCatalog, families: &[Family], ns: &[u64]) -> Result<()> {
        for &family in families {
            for &n in ns {
                let Ok((lo, hi)) = zsa_core::catalog::search_envelope(family, n) else {
                    continue;
                };
                let key = CacheKey::new(family, n, [lo, hi, 0.0, 0.0], catalog.tol());
                if let Some(e) = self.load_strip(&key) {
                    catalog.insert(CatalogRecord {
                        family,
                        n,
                        height: e.key.rect[3],
                        x_range: (lo, hi),
                        zeros: e.zeros,
                    });
                }
            }
        }
        Ok(())
    }

    /// Writes back every strip that grew beyond what is stored.
    pub fn save_catalog(&self, catalog: &ZeroCatalog) -> Result<()> {
        for r in catalog.records() {
            let key = CacheKey::new(
                r.family,
                r.n,
                [r.x_range.0, r.x_range.1, 0.0, r.height],
                catalog.tol(),
            );
            let (zeros, key) = match self.load_strip(&key) {
                Some(old) if old.key.rect[3] >= r.height => continue,
                Some(old) => (merge_zeros(&old.zeros, &r.zeros, catalog.tol()), key),
                None => (r.zeros.clone(), key),
            };
            let entry = ZeroCacheEntry::new(key, zeros);
            write_atomic(&self.strip_path(&entry.key), entry.to_json()?.as_bytes())?;
        }
        Ok(())
    }
}

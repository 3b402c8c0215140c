//! On-disk cache of character tables and L-value vectors.
//!
//! Layout under the cache root:
//!
//! ```text
//! tables/q<q>.json                         exponent matrix (exact integers)
//! lvalues/q<q>_a<num>-<den>_<method>.json  values as 17-digit decimal pairs
//! ```
//!
//! Seventeen significant digits round-trip every `f64`, so a hit returns the
//! same bits as the computation that filled it. Entries written by another
//! format version are ignored; entries that fail to parse or validate are
//! deleted with a warning and recomputed.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chars::{build_character_table, CharacterTable, TableRecord, TABLE_FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::lfun::{self, LVector, Method};
use crate::meanval::LSource;
use crate::specfun::ShiftParam;

/// Environment variable naming the default cache directory.
pub const CACHE_DIR_ENV: &str = "DLAB_CACHE_DIR";

pub const LVECTOR_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LVectorRecord {
    pub version: u32,
    pub q: u64,
    pub a_num: u64,
    pub a_den: u64,
    pub method: Method,
    /// `[re, im]` per character, `null` in the principal slot.
    pub values: Vec<Option<[String; 2]>>,
    pub error_bounds: Vec<String>,
}

fn exact(x: f64) -> String {
    format!("{x:.16e}")
}

impl LVectorRecord {
    pub fn from_vector(v: &LVector) -> Self {
        Self {
            version: LVECTOR_FORMAT_VERSION,
            q: v.q,
            a_num: v.a.numerator(),
            a_den: v.a.denominator(),
            method: v.method,
            values: v
                .values
                .iter()
                .map(|z| z.map(|z| [exact(z.re), exact(z.im)]))
                .collect(),
            error_bounds: v.error_bounds.iter().map(|&e| exact(e)).collect(),
        }
    }

    /// Rebuilds the vector, checking it against the table it belongs to.
    pub fn into_vector(self, t: &CharacterTable) -> std::result::Result<LVector, String> {
        if self.q != t.modulus() || self.values.len() != t.len() || self.error_bounds.len() != t.len() {
            return Err("shape does not match the character table".into());
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| format!("bad number {s:?}: {e}"));
        let mut values = Vec::with_capacity(self.values.len());
        for (j, v) in self.values.iter().enumerate() {
            let principal = j == t.principal_index();
            match (v, principal) {
                (None, true) => values.push(None),
                (Some([re, im]), false) => values.push(Some(Complex64::new(num(re)?, num(im)?))),
                _ => return Err(format!("slot {j} has the wrong presence")),
            }
        }
        let error_bounds = self.error_bounds.iter().map(|s| num(s)).collect::<std::result::Result<_, _>>()?;
        let a = ShiftParam::new(self.a_num, self.a_den).map_err(|e| e.to_string())?;
        Ok(LVector {
            q: self.q,
            a,
            method: self.method,
            values,
            error_bounds,
        })
    }
}

pub struct DiskCache {
    root: PathBuf,
    writes: Mutex<()>,
    counter: AtomicU64,
}

impl DiskCache {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(root.join("tables"))?;
        fs::create_dir_all(root.join("lvalues"))?;
        Ok(Self {
            root,
            writes: Mutex::new(()),
            counter: AtomicU64::new(0),
        })
    }

    /// The directory named by `DLAB_CACHE_DIR`, if set and non-empty.
    pub fn default_dir() -> Option<PathBuf> {
        std::env::var_os(CACHE_DIR_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn table_path(&self, q: u64) -> PathBuf {
        self.root.join("tables").join(format!("q{q}.json"))
    }

    pub fn lvector_path(&self, q: u64, a: &ShiftParam, method: Method) -> PathBuf {
        self.root.join("lvalues").join(format!(
            "q{q}_a{}-{}_{}.json",
            a.numerator(),
            a.denominator(),
            method
        ))
    }

    /// Reads an entry as JSON. `Ok(None)` on absence, version mismatch, or a
    /// corrupt file (which is removed).
    fn read_entry(&self, path: &Path, version: u32) -> Result<Option<serde_json::Value>> {
        let bytes = match fs::read(path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let value: serde_json::Value = match serde_json::from_slice(&bytes) {
            Ok(v) => v,
            Err(e) => {
                self.discard(path, &e.to_string());
                return Ok(None);
            }
        };
        if value.get("version").and_then(|v| v.as_u64()) != Some(version as u64) {
            log::debug!("cache entry {} has another format version; ignoring", path.display());
            return Ok(None);
        }
        Ok(Some(value))
    }

    fn discard(&self, path: &Path, reason: &str) {
        let err = Error::CorruptCache {
            path: path.display().to_string(),
            reason: reason.to_string(),
        };
        log::warn!("{err}; recomputing");
        let _guard = self.writes.lock().unwrap_or_else(|p| p.into_inner());
        let _ = fs::remove_file(path);
    }

    fn write_entry<T: Serialize>(&self, path: &Path, value: &T) -> Result<()> {
        let bytes = serde_json::to_vec(value)?;
        let _guard = self.writes.lock().unwrap_or_else(|p| p.into_inner());
        let n = self.counter.fetch_add(1, Ordering::Relaxed);
        let tmp = path.with_extension(format!("tmp{}-{n}", std::process::id()));
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn get_table(&self, q: u64) -> Result<Option<CharacterTable>> {
        let path = self.table_path(q);
        let Some(value) = self.read_entry(&path, TABLE_FORMAT_VERSION)? else {
            return Ok(None);
        };
        let parsed = serde_json::from_value::<TableRecord>(value)
            .map_err(|e| e.to_string())
            .and_then(|r| {
                if r.q != q {
                    return Err(format!("entry holds q = {}", r.q));
                }
                CharacterTable::from_record(r).map_err(|e| e.to_string())
            });
        match parsed {
            Ok(t) => Ok(Some(t)),
            Err(reason) => {
                self.discard(&path, &reason);
                Ok(None)
            }
        }
    }

    pub fn put_table(&self, t: &CharacterTable) -> Result<()> {
        self.write_entry(&self.table_path(t.modulus()), &t.to_record())
    }

    pub fn get_lvector(&self, t: &CharacterTable, a: &ShiftParam, method: Method) -> Result<Option<LVector>> {
        let path = self.lvector_path(t.modulus(), a, method);
        let Some(value) = self.read_entry(&path, LVECTOR_FORMAT_VERSION)? else {
            return Ok(None);
        };
        let parsed = serde_json::from_value::<LVectorRecord>(value)
            .map_err(|e| e.to_string())
            .and_then(|r| {
                if (r.a_num, r.a_den, r.method) != (a.numerator(), a.denominator(), method) {
                    return Err("key does not match contents".into());
                }
                r.into_vector(t)
            });
        match parsed {
            Ok(v) => Ok(Some(v)),
            Err(reason) => {
                self.discard(&path, &reason);
                Ok(None)
            }
        }
    }

    pub fn put_lvector(&self, v: &LVector) -> Result<()> {
        self.write_entry(&self.lvector_path(v.q, &v.a, v.method), &LVectorRecord::from_vector(v))
    }

    /// Removes every entry; returns how many files were deleted.
    pub fn clear(&self) -> Result<usize> {
        let _guard = self.writes.lock().unwrap_or_else(|p| p.into_inner());
        let mut n = 0;
        for sub in ["tables", "lvalues"] {
            for entry in fs::read_dir(self.root.join(sub))? {
                let entry = entry?;
                if entry.file_type()?.is_file() {
                    fs::remove_file(entry.path())?;
                    n += 1;
                }
            }
        }
        Ok(n)
    }

    /// Entry counts `(tables, lvalue vectors)`.
    pub fn stats(&self) -> Result<(usize, usize)> {
        let count = |sub: &str| -> Result<usize> {
            let mut n = 0;
            for entry in fs::read_dir(self.root.join(sub))? {
                if entry?.path().extension().is_some_and(|e| e == "json") {
                    n += 1;
                }
            }
            Ok(n)
        };
        Ok((count("tables")?, count("lvalues")?))
    }
}

impl LSource for DiskCache {
    fn table(&self, q: u64) -> Result<Arc<CharacterTable>> {
        if let Some(t) = self.get_table(q)? {
            return Ok(Arc::new(t));
        }
        let t = build_character_table(q)?;
        self.put_table(&t)?;
        Ok(Arc::new(t))
    }

    fn l_vector(&self, t: &CharacterTable, a: &ShiftParam, method: Method) -> Result<Arc<LVector>> {
        if let Some(v) = self.get_lvector(t, a, method)? {
            return Ok(Arc::new(v));
        }
        let v = lfun::l_vector(t, a, method)?;
        self.put_lvector(&v)?;
        Ok(Arc::new(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shift(s: &str) -> ShiftParam {
        s.parse().unwrap()
    }

    #[test]
    fn table_put_get_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let cache = DiskCache::open(dir.path()).unwrap();
        assert!(cache.get_table(35).unwrap().is_none());
        let t = build_character_table(35).unwrap();
        cache.put_table(&t).unwrap();
        let back = cache.get_table(35).unwrap().unwrap();
        assert_eq!(back.to_record(), t.to_record());
    }

    #[test]
    fn lvector_put_get_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let cache = DiskCache::open(dir.path()).unwrap();
        let t = build_character_table(35).unwrap();
        for m in Method::ALL {
            let v = lfun::l_vector(&t, &shift("7/2"), m).unwrap();
            assert!(cache.get_lvector(&t, &shift("7/2"), m).unwrap().is_none());
            cache.put_lvector(&v).unwrap();
            assert_eq!(cache.get_lvector(&t, &shift("7/2"), m).unwrap().unwrap(), v);
        }
        assert_eq!(cache.stats().unwrap(), (0, 3));
    }

    #[test]
    fn version_mismatch_is_a_miss() {
        let dir = tempfile::tempdir().unwrap();
        let cache = DiskCache::open(dir.path()).unwrap();
        let mut r = build_character_table(12).unwrap().to_record();
        r.version = TABLE_FORMAT_VERSION + 1;
        fs::write(cache.table_path(12), serde_json::to_vec(&r).unwrap()).unwrap();
        assert!(cache.get_table(12).unwrap().is_none());
        // A mismatched entry is left alone, not treated as corrupt.
        assert!(cache.table_path(12).exists());
    }

    #[test]
    fn corrupt_entries_are_discarded_and_recomputed() {
        let dir = tempfile::tempdir().unwrap();
        let cache = DiskCache::open(dir.path()).unwrap();
        fs::write(cache.table_path(12), b"{not json").unwrap();
        assert!(cache.get_table(12).unwrap().is_none());
        assert!(!cache.table_path(12).exists());

        let t = build_character_table(12).unwrap();
        let mut r = t.to_record();
        r.exponents[1][1] = 99;
        fs::write(cache.table_path(12), serde_json::to_vec(&r).unwrap()).unwrap();
        let rebuilt = cache.table(12).unwrap();
        assert_eq!(rebuilt.to_record(), t.to_record());
        assert_eq!(cache.get_table(12).unwrap().unwrap().to_record(), t.to_record());

        let v = lfun::l_vector(&t, &shift("1"), Method::ClosedDirect).unwrap();
        let mut rec = LVectorRecord::from_vector(&v);
        rec.values[0] = Some(["1".into(), "0".into()]);
        let path = cache.lvector_path(12, &shift("1"), Method::ClosedDirect);
        fs::write(&path, serde_json::to_vec(&rec).unwrap()).unwrap();
        assert!(cache.get_lvector(&t, &shift("1"), Method::ClosedDirect).unwrap().is_none());
        assert!(!path.exists());
    }

    #[test]
    fn clear_empties_the_cache() {
        let dir = tempfile::tempdir().unwrap();
        let cache = DiskCache::open(dir.path()).unwrap();
        let t = cache.table(7).unwrap();
        cache.l_vector(&t, &shift("2"), Method::ClosedDirect).unwrap();
        assert_eq!(cache.stats().unwrap(), (1, 1));
        assert_eq!(cache.clear().unwrap(), 2);
        assert_eq!(cache.stats().unwrap(), (0, 0));
    }
}

//! Persistent factor cache, known-factor import and report serialization.
//!
//! Cache file layout:
//!
//! ```json
//! {"version": 1, "entries": [{"n": 29, "factors": [["233", 1], ...],
//!   "cofactor": "...", "status": "complete"}]}
//! ```
//!
//! Integers are decimal strings so any JSON reader keeps them exact.
//! Everything read from disk is re-verified; the in-memory cache is trusted.

mod import;
mod report;

pub use import::{import_known_factors, import_known_factors_str, ImportSummary, RejectedLine};
pub use report::{census_csv, export_report, render_report, Report, VerificationReport};

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::RwLock;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize, Serializer};

use crate::arith::mersenne;
use crate::error::{EntryFailure, Error, Result};
use crate::factor::{Factorization, Status};
use crate::{MersenneIndex, Natural};

pub const CACHE_VERSION: u32 = 1;

pub(crate) fn ser_natural<S: Serializer>(
    v: &Natural,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

pub(crate) fn ser_naturals<S: Serializer>(
    v: &[Natural],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

/// Map from index n to the best known factorization of M_n.
///
/// Reads may run concurrently; merges are serialized and union the prime
/// knowledge of the stored and incoming entries.
#[derive(Debug, Default)]
pub struct FactorCache {
    entries: RwLock<BTreeMap<MersenneIndex, Factorization>>,
}

impl PartialEq for FactorCache {
    fn eq(&self, other: &Self) -> bool {
        self.snapshot() == other.snapshot()
    }
}

impl Clone for FactorCache {
    fn clone(&self) -> Self {
        FactorCache {
            entries: RwLock::new(self.snapshot()),
        }
    }
}

impl FactorCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, n: MersenneIndex) -> Option<Factorization> {
        self.entries
            .read()
            .expect("factor cache lock poisoned")
            .get(&n)
            .cloned()
    }

    pub fn len(&self) -> usize {
        self.entries
            .read()
            .expect("factor cache lock poisoned")
            .len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn snapshot(&self) -> BTreeMap<MersenneIndex, Factorization> {
        self.entries
            .read()
            .expect("factor cache lock poisoned")
            .clone()
    }

    /// Merges `f` (a factorization of M_n) into the entry for n and returns
    /// the merged entry.
    pub fn merge(&self, n: MersenneIndex, f: Factorization) -> Result<Factorization> {
        if f.target != mersenne(n) {
            return Err(Error::invalid(format!(
                "cache merge: factorization target is not M_{n}"
            )));
        }
        let mut guard = self.entries.write().expect("factor cache lock poisoned");
        let merged = match guard.get(&n) {
            Some(existing) if *existing == f => return Ok(f),
            Some(existing) => existing.merge(&f)?,
            None => f,
        };
        guard.insert(n, merged.clone());
        Ok(merged)
    }

    fn insert_trusted(&self, n: MersenneIndex, f: Factorization) {
        self.entries
            .write()
            .expect("factor cache lock poisoned")
            .insert(n, f);
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CacheFile {
    version: u32,
    entries: Vec<CacheEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CacheEntry {
    n: MersenneIndex,
    factors: Vec<(String, u32)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cofactor: Option<String>,
    status: Status,
}

fn parse_decimal(s: &str) -> std::result::Result<Natural, String> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("'{s}' is not a decimal integer"));
    }
    BigUint::parse_bytes(s.as_bytes(), 10).ok_or_else(|| format!("'{s}' is not a decimal integer"))
}

fn entry_to_factorization(e: &CacheEntry) -> std::result::Result<Factorization, String> {
    if e.n == 0 {
        return Err("index 0 is not allowed".to_string());
    }
    let mut factors = Vec::with_capacity(e.factors.len());
    for (p, exp) in &e.factors {
        factors.push((parse_decimal(p)?, *exp));
    }
    let cofactor = match &e.cofactor {
        Some(c) => parse_decimal(c)?,
        None => BigUint::one(),
    };
    let f = Factorization {
        target: mersenne(e.n),
        factors,
        cofactor,
        status: e.status,
    };
    f.validate()?;
    Ok(f)
}

fn factorization_to_entry(n: MersenneIndex, f: &Factorization) -> CacheEntry {
    CacheEntry {
        n,
        factors: f.factors.iter().map(|(p, e)| (p.to_string(), *e)).collect(),
        cofactor: (!f.cofactor.is_one()).then(|| f.cofactor.to_string()),
        status: f.status,
    }
}

/// Parses and verifies a cache document. Every entry must reconstruct M_n
/// exactly and list only primes; all offending indices are reported.
pub fn parse_cache(text: &str, origin: &Path) -> Result<FactorCache> {
    let file: CacheFile = serde_json::from_str(text).map_err(|source| Error::CacheParse {
        path: origin.to_path_buf(),
        source,
    })?;
    if file.version != CACHE_VERSION {
        return Err(Error::invalid(format!(
            "unsupported cache version {} in {}",
            file.version,
            origin.display()
        )));
    }
    let cache = FactorCache::new();
    let mut failures = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for entry in &file.entries {
        if !seen.insert(entry.n) {
            failures.push(EntryFailure {
                n: entry.n,
                reason: "duplicate entry".to_string(),
            });
            continue;
        }
        match entry_to_factorization(entry) {
            Ok(f) => cache.insert_trusted(entry.n, f),
            Err(reason) => failures.push(EntryFailure { n: entry.n, reason }),
        }
    }
    if !failures.is_empty() {
        return Err(Error::CacheVerification(failures));
    }
    Ok(cache)
}

/// Canonical text of a cache: entries ascending by n, pretty JSON, trailing
/// newline.
pub fn render_cache(cache: &FactorCache) -> String {
    let file = CacheFile {
        version: CACHE_VERSION,
        entries: cache
            .snapshot()
            .iter()
            .map(|(n, f)| factorization_to_entry(*n, f))
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("cache serialization cannot fail");
    text.push('\n');
    text
}

pub fn load_cache(path: impl AsRef<Path>) -> Result<FactorCache> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_cache(&text, path)
}

/// Loads `path` if it exists, otherwise starts an empty cache.
pub fn open_cache(path: impl AsRef<Path>) -> Result<FactorCache> {
    let path = path.as_ref();
    if path.exists() {
        load_cache(path)
    } else {
        Ok(FactorCache::new())
    }
}

/// Writes the cache through a sibling temporary file and a rename.
pub fn save_cache(cache: &FactorCache, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = render_cache(cache);
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn origin() -> &'static Path {
        Path::new("<test>")
    }

    #[test]
    fn empty_document() {
        let c = parse_cache(r#"{"version": 1, "entries": []}"#, origin()).unwrap();
        assert!(c.is_empty());
    }

    #[test]
    fn complete_entry_loads() {
        let text = r#"{"version": 1, "entries": [
            {"n": 29, "factors": [["233",1],["1103",1],["2089",1]], "status": "complete"}]}"#;
        let c = parse_cache(text, origin()).unwrap();
        let f = c.get(29).unwrap();
        assert!(f.is_complete());
        assert_eq!(f.product(), BigUint::from(536870911u32));
    }

    #[test]
    fn partial_entry_loads() {
        let text = r#"{"version": 1, "entries": [
            {"n": 29, "factors": [["233",1]], "cofactor": "2304167", "status": "partial"}]}"#;
        let c = parse_cache(text, origin()).unwrap();
        let f = c.get(29).unwrap();
        assert_eq!(f.status, Status::Partial);
        assert_eq!(f.cofactor, BigUint::from(2304167u32));
    }

    #[test]
    fn corrupt_entries_are_listed() {
        let text = r#"{"version": 1, "entries": [
            {"n": 11, "factors": [["23",1],["89",1]], "status": "complete"},
            {"n": 29, "factors": [["233",1]], "status": "complete"},
            {"n": 15, "factors": [["7",1],["4681",1]], "status": "complete"},
            {"n": 4, "factors": [["3",1],["5",1]], "cofactor": "1", "status": "partial"}]}"#;
        match parse_cache(text, origin()) {
            Err(Error::CacheVerification(fails)) => {
                let ns: Vec<_> = fails.iter().map(|f| f.n).collect();
                assert_eq!(ns, vec![29, 15, 4]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_version_and_syntax() {
        assert!(parse_cache(r#"{"version": 2, "entries": []}"#, origin()).is_err());
        assert!(matches!(
            parse_cache("not json", origin()),
            Err(Error::CacheParse { .. })
        ));
        assert!(parse_cache(
            r#"{"version": 1, "entries": [{"n": 3, "factors": [["0x7",1]], "status": "complete"}]}"#,
            origin()
        )
        .is_err());
    }

    #[test]
    fn merge_unions_knowledge() {
        let cache = FactorCache::new();
        let m = mersenne(29);
        let a = Factorization::from_primes(&m, [&BigUint::from(233u32)]);
        let b = Factorization::from_primes(&m, [&BigUint::from(2089u32)]);
        cache.merge(29, a).unwrap();
        let merged = cache.merge(29, b).unwrap();
        assert!(merged.is_complete());
        assert!(cache.merge(11, Factorization::from_primes(&m, [])).is_err());
    }
}

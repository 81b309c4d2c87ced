use std::fs;
use std::path::Path;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::Zero;
use serde::Serialize;

use super::FactorCache;
use crate::arith::{is_probable_prime, mersenne};
use crate::error::{Error, Result};
use crate::factor::Factorization;
use crate::MersenneIndex;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RejectedLine {
    pub line: usize,
    pub text: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ImportSummary {
    pub accepted: usize,
    pub rejected: Vec<RejectedLine>,
    /// Indices whose cache entry changed as a result of the import.
    pub changed: Vec<MersenneIndex>,
}

fn parse_line(text: &str) -> std::result::Result<(MersenneIndex, BigUint), String> {
    let mut fields = text.split_whitespace();
    let (Some(n), Some(q), None) = (fields.next(), fields.next(), fields.next()) else {
        return Err("expected two fields: <n> <factor>".to_string());
    };
    let n: MersenneIndex = n.parse().map_err(|_| format!("bad index '{n}'"))?;
    if n == 0 {
        return Err("index must be at least 1".to_string());
    }
    if !q.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("bad factor '{q}'"));
    }
    let q = BigUint::parse_bytes(q.as_bytes(), 10).ok_or_else(|| format!("bad factor '{q}'"))?;
    Ok((n, q))
}

/// Merges "n factor" lines into `cache`. Each factor must be prime and
/// divide M_n; bad lines are reported and skipped.
pub fn import_known_factors_str(text: &str, cache: &FactorCache) -> Result<ImportSummary> {
    let mut summary = ImportSummary::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let reject = |reason: String| RejectedLine {
            line: i + 1,
            text: line.to_string(),
            reason,
        };
        let (n, q) = match parse_line(line) {
            Ok(v) => v,
            Err(reason) => {
                summary.rejected.push(reject(reason));
                continue;
            }
        };
        let m = mersenne(n);
        if q < BigUint::from(2u32) || !m.mod_floor(&q).is_zero() {
            summary
                .rejected
                .push(reject(format!("{q} does not divide M_{n}")));
            continue;
        }
        if !is_probable_prime(&q).is_prime_like() {
            summary.rejected.push(reject(format!("{q} is composite")));
            continue;
        }
        let before = cache.get(n);
        let merged = cache.merge(n, Factorization::from_primes(&m, [&q]))?;
        if before.as_ref() != Some(&merged) && !summary.changed.contains(&n) {
            summary.changed.push(n);
        }
        summary.accepted += 1;
    }
    summary.changed.sort_unstable();
    Ok(summary)
}

pub fn import_known_factors(path: impl AsRef<Path>, cache: &FactorCache) -> Result<ImportSummary> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    import_known_factors_str(&text, cache)
}

//! Arithmetic functions of the index and range sweeps comparing ω(M_n)
//! against the divisor-count bounds.
//!
//! All logarithms are natural. For n < 3, ln ln n is not positive, so the
//! Hardy-Wright style fields are left empty for n = 2 while the
//! factorization-derived columns are still filled in.
//!
//! At desk scale 2^{(1-ε) ln ln n} - 3 is negative for every index in reach,
//! so the final inequality holds trivially. It is reported, but the checks
//! that carry weight are the deterministic bounds.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::factor::{factor_mersenne, Budget};
use crate::storage::FactorCache;
use crate::theorems::{
    lower_bound_divisors, lower_bound_omega, naive_omega_bound, small_omegas, weak_divisor_bound,
};
use crate::MersenneIndex;

pub const DEFAULT_EPSILON: f64 = 0.5;

/// Label attached to every census summary.
pub const ASYMPTOTIC_STATUS: &str =
    "untested: the almost-all statement is asymptotic and cannot be checked on a finite range";

/// (d(n), ω(n), Ω(n)).
pub fn index_functions(n: MersenneIndex) -> Result<(u32, u32, u32)> {
    if n == 0 {
        return Err(Error::invalid("index_functions: n must be at least 1"));
    }
    Ok(small_omegas(n))
}

fn check_hw_domain(n: MersenneIndex) -> Result<f64> {
    if n < 3 {
        return Err(Error::invalid(format!(
            "hw_bound: n = {n} is outside the domain n >= 3"
        )));
    }
    Ok((n as f64).ln().ln())
}

/// 2^{(1-ε) ln ln n}.
pub fn hw_bound(n: MersenneIndex, epsilon: f64) -> Result<f64> {
    let ll = check_hw_domain(n)?;
    Ok(2f64.powf((1.0 - epsilon) * ll))
}

/// 2^{(1+ε) ln ln n}.
pub fn hw_upper_bound(n: MersenneIndex, epsilon: f64) -> Result<f64> {
    let ll = check_hw_domain(n)?;
    Ok(2f64.powf((1.0 + epsilon) * ll))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusRecord {
    pub n: MersenneIndex,
    pub d_n: u32,
    pub omega_n: u32,
    pub bigomega_n: u32,
    /// ω(M_n), absent when the factorization is partial.
    pub omega_m: Option<u32>,
    /// Certified lower bound on ω(M_n) (equals `omega_m` when complete).
    pub omega_m_lower: u32,
    pub bound_prop2: u32,
    pub bound_divisors: u32,
    /// d(n) - 3.
    pub bound_weak_divisors: i64,
    /// Ω(n) + 1, the uncorrected bound (absent for n = 2, 6).
    pub bound_naive: Option<u32>,
    pub hw_value: Option<f64>,
    pub hw_upper: Option<f64>,
    pub lemma6_holds: Option<bool>,
    pub hw_two_sided: Option<bool>,
    pub final_inequality_holds: Option<bool>,
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CensusConfig {
    pub n_min: MersenneIndex,
    pub n_max: MersenneIndex,
    pub epsilon: f64,
    pub budget: Budget,
    pub cache_path: Option<PathBuf>,
}

impl CensusConfig {
    pub fn new(n_min: MersenneIndex, n_max: MersenneIndex) -> Self {
        CensusConfig {
            n_min,
            n_max,
            epsilon: DEFAULT_EPSILON,
            budget: Budget::default(),
            cache_path: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_min < 2 || self.n_min > self.n_max {
            return Err(Error::invalid(format!(
                "census range [{}, {}] must satisfy 2 <= min <= max",
                self.n_min, self.n_max
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::invalid(format!(
                "epsilon {} must lie in (0, 1)",
                self.epsilon
            )));
        }
        self.budget.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusSummary {
    pub n_min: MersenneIndex,
    pub n_max: MersenneIndex,
    pub epsilon: f64,
    pub records: usize,
    /// Fraction of records (n >= 3) with d(n) > 2^{(1-ε) ln ln n}.
    pub lemma6_fraction: Option<f64>,
    /// Fraction of records (n >= 3) with both Hardy-Wright inequalities.
    pub hw_two_sided_fraction: Option<f64>,
    /// Fraction of complete records (n >= 3) with ω(M_n) > hw - 3.
    pub final_inequality_fraction: Option<f64>,
    pub incomplete: Vec<MersenneIndex>,
    /// Indices where ω(M_n) is below the corrected or the sharp divisor bound.
    pub deterministic_violations: Vec<MersenneIndex>,
    /// Indices where ω(M_n) < d(n) - 3.
    pub weak_divisor_violations: Vec<MersenneIndex>,
    /// Indices where Ω(n) + 1 exceeds the observed ω(M_n).
    pub naive_bound_witnesses: Vec<MersenneIndex>,
    pub asymptotic_claim: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusReport {
    pub records: Vec<CensusRecord>,
    pub summary: CensusSummary,
}

fn census_record(
    n: MersenneIndex,
    epsilon: f64,
    budget: &Budget,
    cache: &FactorCache,
) -> Result<CensusRecord> {
    let (d_n, omega_n, bigomega_n) = index_functions(n)?;
    let f = factor_mersenne(n, budget, cache)?;
    let complete = f.is_complete();
    let omega_m = complete.then(|| f.omega() as u32);
    let hw_value = hw_bound(n, epsilon).ok();
    let hw_upper = hw_upper_bound(n, epsilon).ok();
    let lemma6_holds = hw_value.map(|h| d_n as f64 > h);
    let hw_two_sided = hw_value
        .zip(hw_upper)
        .map(|(lo, hi)| lo < d_n as f64 && (d_n as f64) < hi);
    let final_inequality_holds = hw_value.zip(omega_m).map(|(h, w)| w as f64 > h - 3.0);
    Ok(CensusRecord {
        n,
        d_n,
        omega_n,
        bigomega_n,
        omega_m,
        omega_m_lower: f.omega_lower_bound() as u32,
        bound_prop2: lower_bound_omega(n),
        bound_divisors: lower_bound_divisors(n),
        bound_weak_divisors: weak_divisor_bound(n),
        bound_naive: naive_omega_bound(n),
        hw_value,
        hw_upper,
        lemma6_holds,
        hw_two_sided,
        final_inequality_holds,
        complete,
    })
}

fn fraction(flags: impl Iterator<Item = bool>) -> Option<f64> {
    let (hits, total) = flags.fold((0usize, 0usize), |(h, t), b| (h + b as usize, t + 1));
    (total > 0).then(|| hits as f64 / total as f64)
}

fn summarize(config: &CensusConfig, records: &[CensusRecord]) -> CensusSummary {
    let mut deterministic_violations = Vec::new();
    let mut weak_divisor_violations = Vec::new();
    let mut naive_bound_witnesses = Vec::new();
    let mut incomplete = Vec::new();
    for r in records {
        if !r.complete {
            incomplete.push(r.n);
        }
        if let Some(w) = r.omega_m {
            if w < r.bound_prop2 || w < r.bound_divisors {
                deterministic_violations.push(r.n);
            }
            if (w as i64) < r.bound_weak_divisors {
                weak_divisor_violations.push(r.n);
            }
            if r.bound_naive.is_some_and(|lit| lit > w) {
                naive_bound_witnesses.push(r.n);
            }
        }
    }
    CensusSummary {
        n_min: config.n_min,
        n_max: config.n_max,
        epsilon: config.epsilon,
        records: records.len(),
        lemma6_fraction: fraction(records.iter().filter_map(|r| r.lemma6_holds)),
        hw_two_sided_fraction: fraction(records.iter().filter_map(|r| r.hw_two_sided)),
        final_inequality_fraction: fraction(
            records.iter().filter_map(|r| r.final_inequality_holds),
        ),
        incomplete,
        deterministic_violations,
        weak_divisor_violations,
        naive_bound_witnesses,
        asymptotic_claim: ASYMPTOTIC_STATUS,
    }
}

/// One record per n in the configured range, sorted by n, plus a summary.
/// Records are computed in parallel; the output does not depend on the
/// scheduling.
pub fn run_census(config: &CensusConfig, cache: &FactorCache) -> Result<CensusReport> {
    config.validate()?;
    let mut records: Vec<CensusRecord> = (config.n_min..=config.n_max)
        .into_par_iter()
        .map(|n| census_record(n, config.epsilon, &config.budget, cache))
        .collect::<Result<_>>()?;
    records.sort_by_key(|r| r.n);
    let summary = summarize(config, &records);
    Ok(CensusReport { records, summary })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_function_examples() {
        assert_eq!(index_functions(1).unwrap(), (1, 0, 0));
        assert_eq!(index_functions(12).unwrap(), (6, 2, 3));
        assert_eq!(index_functions(49).unwrap(), (3, 1, 2));
        assert!(index_functions(0).is_err());
    }

    #[test]
    fn hw_examples() {
        // expected values computed independently at 30 digits
        assert!((hw_bound(16, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((hw_bound(100, 0.5).unwrap() - 1.697_709_731_387_268_6).abs() < 1e-9);
        assert!((hw_bound(3, 0.5).unwrap() - 1.033_131_512_511_992_4).abs() < 1e-9);
        assert!((hw_upper_bound(100, 0.5).unwrap() - 4.893_170_110_299_027_5).abs() < 1e-9);
        assert!(hw_bound(2, 0.5).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(CensusConfig::new(2, 64).validate().is_ok());
        assert!(CensusConfig::new(1, 64).validate().is_err());
        assert!(CensusConfig::new(10, 9).validate().is_err());
        let mut c = CensusConfig::new(2, 4);
        c.epsilon = 1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn boundary_record_has_no_hw_fields() {
        let cache = FactorCache::new();
        let r = run_census(&CensusConfig::new(2, 2), &cache).unwrap();
        assert_eq!(r.records.len(), 1);
        let rec = &r.records[0];
        assert_eq!(rec.omega_m, Some(1));
        assert!(rec.hw_value.is_none());
        assert!(rec.lemma6_holds.is_none());
        assert!(rec.final_inequality_holds.is_none());
    }

    #[test]
    fn naive_bound_witnesses_8_and_9() {
        let cache = FactorCache::new();
        let r = run_census(&CensusConfig::new(8, 9), &cache).unwrap();
        assert_eq!(r.summary.naive_bound_witnesses, vec![8, 9]);
        assert!(r.summary.deterministic_violations.is_empty());
    }
}

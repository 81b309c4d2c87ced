use num_bigint::BigUint;
use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{is_perfect_power, is_prime_u64, mersenne};
use crate::error::{Error, Result};
use crate::factor::{factor_mersenne, Budget, Factorization};
use crate::storage::FactorCache;
use crate::structure::lemma4_residue;
use crate::MersenneIndex;

/// Pass/fail tally for one family of checks.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SubSuite {
    pub name: String,
    pub passed: u64,
    pub failed: u64,
    /// Cases that could not be decided because a factorization was partial.
    pub inconclusive: u64,
    /// Cases excluded by the hypothesis of the statement being checked.
    pub skipped: u64,
    pub first_counterexample: Option<String>,
}

impl SubSuite {
    pub(crate) fn new(name: &str) -> Self {
        SubSuite {
            name: name.to_string(),
            ..Default::default()
        }
    }

    pub(crate) fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
            if self.first_counterexample.is_none() {
                self.first_counterexample = Some(describe());
            }
        }
    }

    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentitySuiteReport {
    pub max_n: MersenneIndex,
    pub perfect_power_max: MersenneIndex,
    pub suites: Vec<SubSuite>,
}

impl IdentitySuiteReport {
    pub fn failures(&self) -> u64 {
        self.suites.iter().map(|s| s.failed).sum()
    }

    pub fn inconclusive(&self) -> u64 {
        self.suites.iter().map(|s| s.inconclusive).sum()
    }

    pub fn suite(&self, name: &str) -> Option<&SubSuite> {
        self.suites.iter().find(|s| s.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdentityOptions {
    pub max_n: MersenneIndex,
    /// Upper end of the perfect-power sweep (may exceed `max_n`, since it
    /// needs no factorizations).
    pub perfect_power_max: MersenneIndex,
}

/// gcd identity, strict superadditivity of ω over coprime indices,
/// perfect-power absence and the closed-form residue, all up to `max_n`.
pub fn verify_identities(
    max_n: MersenneIndex,
    budget: &Budget,
    cache: &FactorCache,
) -> Result<IdentitySuiteReport> {
    verify_identities_with(
        IdentityOptions {
            max_n,
            perfect_power_max: max_n,
        },
        budget,
        cache,
    )
}

pub fn verify_identities_with(
    opts: IdentityOptions,
    budget: &Budget,
    cache: &FactorCache,
) -> Result<IdentitySuiteReport> {
    if opts.max_n < 2 {
        return Err(Error::invalid(
            "verify_identities: max_n must be at least 2",
        ));
    }
    Ok(IdentitySuiteReport {
        max_n: opts.max_n,
        perfect_power_max: opts.perfect_power_max,
        suites: vec![
            gcd_suite(opts.max_n),
            coprime_suite(opts.max_n, budget, cache)?,
            perfect_power_suite(opts.perfect_power_max),
            lemma4_suite(opts.max_n)?,
        ],
    })
}

fn gcd_suite(max_n: MersenneIndex) -> SubSuite {
    let mut suite = SubSuite::new("gcd_identity");
    let values: Vec<BigUint> = (0..=max_n).map(mersenne).collect();
    for a in 1..=max_n {
        for b in 1..=max_n {
            let lhs = values[a as usize].gcd(&values[b as usize]);
            let rhs = &values[a.gcd(&b) as usize];
            suite.record(lhs == *rhs, || {
                format!("gcd(M_{a}, M_{b}) != M_{}", a.gcd(&b))
            });
        }
    }
    suite
}

fn coprime_suite(max_n: MersenneIndex, budget: &Budget, cache: &FactorCache) -> Result<SubSuite> {
    let mut suite = SubSuite::new("coprime_split");
    let factorizations: Vec<Factorization> = (1..=max_n)
        .into_par_iter()
        .map(|n| factor_mersenne(n, budget, cache))
        .collect::<Result<_>>()?;
    let f = |n: MersenneIndex| &factorizations[n as usize - 1];

    for m in 2..=max_n {
        for n in m + 1..=max_n {
            let Some(mn) = m.checked_mul(n).filter(|&mn| mn <= max_n) else {
                break;
            };
            if m.gcd(&n) != 1 {
                continue;
            }
            if mn == 6 {
                suite.skipped += 1;
                continue;
            }
            let (fm, fn_, fmn) = (f(m), f(n), f(mn));
            if !fm.is_complete() || !fn_.is_complete() {
                suite.inconclusive += 1;
                continue;
            }
            let sum = fm.omega() + fn_.omega();
            if fmn.omega_lower_bound() > sum {
                suite.passed += 1;
            } else if !fmn.is_complete() {
                suite.inconclusive += 1;
            } else {
                suite.record(false, || {
                    format!(
                        "ω(M_{mn}) = {} not > ω(M_{m}) + ω(M_{n}) = {sum}",
                        fmn.omega()
                    )
                });
            }
        }
    }
    Ok(suite)
}

fn perfect_power_suite(max_n: MersenneIndex) -> SubSuite {
    let mut suite = SubSuite::new("perfect_power_absence");
    let results: Vec<(MersenneIndex, bool)> = (2..=max_n)
        .into_par_iter()
        .map(|n| {
            let none = matches!(is_perfect_power(&mersenne(n)), Ok(None));
            (n, none)
        })
        .collect();
    for (n, none) in results {
        suite.record(none, || format!("M_{n} is a perfect power"));
    }
    suite
}

fn lemma4_suite(max_n: MersenneIndex) -> Result<SubSuite> {
    let mut suite = SubSuite::new("lemma4_residue");
    for p in (2..=max_n).filter(|&p| is_prime_u64(p as u64)) {
        let mp = mersenne(p);
        for m in 1..=max_n / p {
            let closed = lemma4_residue(p, &BigUint::from(m))?;
            let direct = (mersenne(p * m) / &mp) % &mp;
            suite.record(closed == direct, || {
                format!("p={p}, m={m}: closed form {closed} != division {direct}")
            });
        }
    }
    Ok(suite)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_pass_to_40() {
        let cache = FactorCache::new();
        let r = verify_identities(40, &Budget::default(), &cache).unwrap();
        assert_eq!(r.suites.len(), 4);
        assert_eq!(r.failures(), 0, "{r:?}");
        assert_eq!(r.inconclusive(), 0);
        assert!(r.suites.iter().all(|s| s.passed > 0));
    }

    #[test]
    fn coprime_suite_skips_six() {
        let cache = FactorCache::new();
        let r = verify_identities(6, &Budget::default(), &cache).unwrap();
        let p1 = r.suite("coprime_split").unwrap();
        assert_eq!(p1.skipped, 1);
        assert_eq!(p1.passed + p1.failed, 0);
    }

    #[test]
    fn perfect_power_at_two() {
        let cache = FactorCache::new();
        let r = verify_identities(2, &Budget::default(), &cache).unwrap();
        let pp = r.suite("perfect_power_absence").unwrap();
        assert_eq!((pp.passed, pp.failed), (1, 0));
        assert!(verify_identities(1, &Budget::default(), &cache).is_err());
    }
}

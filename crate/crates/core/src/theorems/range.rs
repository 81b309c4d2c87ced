use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

use super::classify::{verify_structure, Clause};
use super::identities::SubSuite;
use super::{lower_bound_divisors, lower_bound_omega, validate_divisor_form, weak_divisor_bound};
use crate::arith::{is_prime_u64, lucas_lehmer, mersenne};
use crate::error::{Error, Result};
use crate::factor::{factor_mersenne, Budget, Factorization};
use crate::storage::FactorCache;
use crate::structure::{cyclotomic_value, divisor_list, primitive_prime_divisors};
use crate::MersenneIndex;

/// Per-index summary line of a range verification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RangeEntry {
    pub n: MersenneIndex,
    pub omega: Option<usize>,
    pub omega_lower_bound: usize,
    pub matched_clause: Option<Clause>,
    pub consistent: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RangeReport {
    pub max_n: MersenneIndex,
    pub cyclotomic_max: MersenneIndex,
    pub suites: Vec<SubSuite>,
    /// Indices with ω(M_n) = 1 according to the factorizations.
    pub omega_one: Vec<MersenneIndex>,
    pub entries: Vec<RangeEntry>,
}

impl RangeReport {
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

/// Per-index checks over 1..=max_n: clause-level structure, the lower
/// bounds, divisor forms of every prime factor of M_p, agreement of
/// Lucas-Lehmer with factorization, primitive parts, and the cyclotomic
/// product identity up to `cyclotomic_max`.
pub fn verify_range(
    max_n: MersenneIndex,
    cyclotomic_max: MersenneIndex,
    budget: &Budget,
    cache: &FactorCache,
) -> Result<RangeReport> {
    if max_n < 2 {
        return Err(Error::invalid("verify_range: max_n must be at least 2"));
    }
    let factorizations: Vec<Factorization> = (1..=max_n)
        .into_par_iter()
        .map(|n| factor_mersenne(n, budget, cache))
        .collect::<Result<_>>()?;

    let mut structure = SubSuite::new("structure");
    let mut bounds = SubSuite::new("lower_bounds");
    let mut divisor_form = SubSuite::new("divisor_form");
    let mut roster = SubSuite::new("mersenne_roster");
    let mut primitive = SubSuite::new("primitive_divisor");
    let mut entries = Vec::with_capacity(max_n as usize);
    let mut omega_one = Vec::new();

    for (i, f) in factorizations.iter().enumerate() {
        let n = i as MersenneIndex + 1;
        let mut entry = RangeEntry {
            n,
            omega: None,
            omega_lower_bound: f.omega_lower_bound(),
            matched_clause: None,
            consistent: None,
        };
        if !f.is_complete() {
            structure.inconclusive += 1;
            primitive.inconclusive += 1;
            // a partial factorization still certifies a lower bound on ω
            let lb = f.omega_lower_bound() as i64;
            if lb >= lower_bound_omega(n) as i64 && lb >= lower_bound_divisors(n) as i64 {
                bounds.passed += 1;
            } else {
                bounds.inconclusive += 1;
            }
            if is_prime_u64(n as u64) {
                divisor_form.inconclusive += 1;
                roster.inconclusive += 1;
            }
            entries.push(entry);
            continue;
        }

        let omega = f.omega();
        entry.omega = Some(omega);
        if omega == 1 {
            omega_one.push(n);
        }

        let report = verify_structure(n, f)?;
        entry.matched_clause = report.matched_clause;
        entry.consistent = Some(report.consistent);
        structure.record(report.consistent, || {
            format!("n={n}: {}", report.notes.join("; "))
        });

        let corrected = lower_bound_omega(n) as usize;
        let sharp = lower_bound_divisors(n) as usize;
        let weak = weak_divisor_bound(n);
        bounds.record(
            omega >= corrected && omega >= sharp && omega as i64 >= weak,
            || format!("n={n}: ω={omega}, bounds {corrected}/{sharp}/{weak}"),
        );

        if n >= 3 && n % 2 == 1 && is_prime_u64(n as u64) {
            for q in f.primes() {
                let ok = validate_divisor_form(q, n)
                    .map(|c| c.passes)
                    .unwrap_or(false);
                divisor_form.record(ok, || {
                    format!("q={q} does not have the form 2lp+1 for p={n}")
                });
            }
        }

        if is_prime_u64(n as u64) {
            let by_test = if n == 2 { true } else { lucas_lehmer(n)? };
            roster.record(by_test == (omega == 1 && f.factors[0].1 == 1), || {
                format!("n={n}: Lucas-Lehmer says {by_test}, factorization ω={omega}")
            });
        }

        let part = primitive_prime_divisors(n, f)?.primitive_part;
        let expect_trivial = n == 1 || n == 6;
        primitive.record(part.is_one() == expect_trivial, || {
            format!("n={n}: primitive part {part}")
        });

        entries.push(entry);
    }

    let mut cyclotomic = SubSuite::new("cyclotomic_product");
    for n in 1..=cyclotomic_max {
        let product = divisor_list(n)
            .into_iter()
            .fold(num_bigint::BigUint::one(), |acc, d| {
                acc * cyclotomic_value(d)
            });
        cyclotomic.record(product == mersenne(n), || format!("∏ Φ_d(2) != M_{n}"));
    }

    Ok(RangeReport {
        max_n,
        cyclotomic_max,
        suites: vec![
            structure,
            bounds,
            divisor_form,
            roster,
            primitive,
            cyclotomic,
        ],
        omega_one,
        entries,
    })
}

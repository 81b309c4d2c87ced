//! Complete or explicitly partial factorizations, of M_n and of ordinary
//! naturals.
//!
//! M_n is first split into its cyclotomic parts Φ_d(2), d | n. Apart from a
//! single intrinsic prime, every prime factor of Φ_d(2) has multiplicative
//! order exactly d and therefore lies in the progression 2dl + 1, which makes
//! trial division per part far cheaper than on M_n as a whole. Whatever
//! survives goes to Brent's rho. If the rho budget runs out the result keeps
//! the composite cofactor and is marked partial.

mod rho;
mod trial;

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{is_perfect_power, is_probable_prime, mersenne, Verdict};
use crate::error::{Error, Result};
use crate::storage::FactorCache;
use crate::structure::cyclotomic_split;
use crate::{MersenneIndex, Natural};

pub use rho::GCD_BATCH;
pub(crate) use trial::strip;

/// Whether a factorization accounts for the whole target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Complete,
    Partial,
}

/// `target = ∏ prime^exponent · cofactor`, primes strictly ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub target: Natural,
    pub factors: Vec<(Natural, u32)>,
    pub cofactor: Natural,
    pub status: Status,
}

impl Factorization {
    /// Normalises the prime list (sort, merge repeats) and derives the status
    /// from the cofactor.
    pub fn from_parts(
        target: Natural,
        factors: impl IntoIterator<Item = (Natural, u32)>,
        cofactor: Natural,
    ) -> Self {
        let mut factors: Vec<(Natural, u32)> = factors.into_iter().filter(|f| f.1 > 0).collect();
        factors.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Natural, u32)> = Vec::with_capacity(factors.len());
        for (p, e) in factors {
            match merged.last_mut() {
                Some(last) if last.0 == p => last.1 += e,
                _ => merged.push((p, e)),
            }
        }
        let status = if cofactor.is_one() {
            Status::Complete
        } else {
            Status::Partial
        };
        Factorization {
            target,
            factors: merged,
            cofactor,
            status,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.status == Status::Complete
    }

    /// Number of distinct listed primes. For a partial factorization the
    /// true count is at least `omega() + 1`.
    pub fn omega(&self) -> usize {
        self.factors.len()
    }

    /// Ω: prime factors counted with multiplicity (listed primes only).
    pub fn big_omega(&self) -> u64 {
        self.factors.iter().map(|(_, e)| *e as u64).sum()
    }

    /// Lower bound on ω(target): exact when complete.
    pub fn omega_lower_bound(&self) -> usize {
        self.omega() + usize::from(!self.is_complete())
    }

    pub fn exponent_of(&self, p: &Natural) -> u32 {
        self.factors
            .binary_search_by(|(q, _)| q.cmp(p))
            .map(|i| self.factors[i].1)
            .unwrap_or(0)
    }

    pub fn primes(&self) -> impl Iterator<Item = &Natural> {
        self.factors.iter().map(|(p, _)| p)
    }

    pub fn exponents(&self) -> impl Iterator<Item = u32> + '_ {
        self.factors.iter().map(|(_, e)| *e)
    }

    /// ∏ prime^exponent · cofactor.
    pub fn product(&self) -> Natural {
        self.factors
            .iter()
            .fold(self.cofactor.clone(), |acc, (p, e)| acc * p.pow(*e))
    }

    /// Checks every structural invariant, including primality of each listed
    /// prime. Returns a description of the first violation.
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.product() != self.target {
            return Err(format!(
                "factor product {} does not equal target {}",
                self.product(),
                self.target
            ));
        }
        for w in self.factors.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(format!("primes not strictly ascending at {}", w[1].0));
            }
        }
        for (p, e) in &self.factors {
            if *e == 0 {
                return Err(format!("zero exponent for {p}"));
            }
            if !is_probable_prime(p).is_prime_like() {
                return Err(format!("listed factor {p} is not prime"));
            }
        }
        if (self.status == Status::Complete) != self.cofactor.is_one() {
            return Err(format!(
                "status {:?} inconsistent with cofactor {}",
                self.status, self.cofactor
            ));
        }
        Ok(())
    }

    /// Union of the prime knowledge in `self` and `other` (same target).
    /// Exponents are recomputed from the target, so merging is idempotent
    /// and never loses a prime.
    pub fn merge(&self, other: &Factorization) -> Result<Factorization> {
        if self.target != other.target {
            return Err(Error::invalid(format!(
                "cannot merge factorizations of different targets {} and {}",
                self.target, other.target
            )));
        }
        let mut primes: Vec<&Natural> = self.primes().chain(other.primes()).collect();
        primes.sort();
        primes.dedup();
        Ok(Self::from_primes(&self.target, primes))
    }

    /// Builds a factorization of `target` from a set of known prime divisors.
    /// A prime (or prime-power) remainder is folded in as a final factor.
    pub fn from_primes<'a>(
        target: &Natural,
        primes: impl IntoIterator<Item = &'a Natural>,
    ) -> Factorization {
        let mut rem = target.clone();
        let mut factors = Vec::new();
        for p in primes {
            let e = strip(&mut rem, p);
            if e > 0 {
                factors.push((p.clone(), e));
            }
        }
        if rem > BigUint::one() {
            if is_probable_prime(&rem).is_prime_like() {
                factors.push((std::mem::replace(&mut rem, BigUint::one()), 1));
            } else if let Ok(Some((base, k))) = is_perfect_power(&rem) {
                if is_probable_prime(&base).is_prime_like() {
                    factors.push((base, k));
                    rem = BigUint::one();
                }
            }
        }
        Factorization::from_parts(target.clone(), factors, rem)
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .factors
            .iter()
            .map(|(p, e)| format!("{p}^{e}"))
            .collect();
        if !self.cofactor.is_one() {
            parts.push(format!("({})", self.cofactor));
        }
        if parts.is_empty() {
            parts.push("1".to_string());
        }
        write!(f, "{}", parts.join(" * "))
    }
}

/// Work limits for a single factorization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub rho_iterations_max: u64,
    pub trial_division_bound: u64,
    pub wall_hint_ms: Option<u64>,
}

pub const DEFAULT_RHO_ITERATIONS: u64 = 1 << 26;
pub const DEFAULT_TRIAL_BOUND: u64 = 2_000_000;

impl Default for Budget {
    fn default() -> Self {
        Budget {
            rho_iterations_max: DEFAULT_RHO_ITERATIONS,
            trial_division_bound: DEFAULT_TRIAL_BOUND,
            wall_hint_ms: None,
        }
    }
}

impl Budget {
    pub fn new(
        rho_iterations_max: u64,
        trial_division_bound: u64,
        wall_hint_ms: Option<u64>,
    ) -> Result<Self> {
        let b = Budget {
            rho_iterations_max,
            trial_division_bound,
            wall_hint_ms,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rho_iterations_max == 0
            || self.trial_division_bound == 0
            || self.wall_hint_ms == Some(0)
        {
            return Err(Error::invalid("budget limits must be positive"));
        }
        Ok(())
    }
}

/// Counters shared across factorizations; safe to update from many threads.
#[derive(Debug, Default)]
pub struct FactorStats {
    pub rho_iterations: AtomicU64,
    pub rho_attempts: AtomicU64,
    pub cache_hits: AtomicU64,
    pub factorizations: AtomicU64,
}

impl FactorStats {
    pub fn rho_iterations(&self) -> u64 {
        self.rho_iterations.load(Ordering::Relaxed)
    }

    pub fn cache_hits(&self) -> u64 {
        self.cache_hits.load(Ordering::Relaxed)
    }
}

/// Remaining rho allowance for one factorization.
struct RhoAllowance<'a> {
    remaining: u64,
    deadline: Option<Instant>,
    stats: Option<&'a FactorStats>,
}

impl<'a> RhoAllowance<'a> {
    fn new(budget: &Budget, stats: Option<&'a FactorStats>) -> Self {
        RhoAllowance {
            remaining: budget.rho_iterations_max,
            deadline: budget
                .wall_hint_ms
                .map(|ms| Instant::now() + Duration::from_millis(ms)),
            stats,
        }
    }

    fn spend(&mut self, iterations: u64) {
        self.remaining = self.remaining.saturating_sub(iterations);
        if let Some(s) = self.stats {
            s.rho_iterations.fetch_add(iterations, Ordering::Relaxed);
            s.rho_attempts.fetch_add(1, Ordering::Relaxed);
        }
    }

    fn exhausted(&self) -> bool {
        self.remaining == 0 || self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

/// Breaks `x` into primes using perfect-power checks and rho, appending
/// prime powers to `primes` and anything the budget could not crack to
/// `leftovers`.
fn resolve(
    x: Natural,
    allowance: &mut RhoAllowance<'_>,
    primes: &mut Vec<(Natural, u32)>,
    leftovers: &mut Vec<Natural>,
) {
    let mut stack = vec![(x, 1u32)];
    'work: while let Some((value, mult)) = stack.pop() {
        if value.is_one() {
            continue;
        }
        if is_probable_prime(&value).is_prime_like() {
            primes.push((value, mult));
            continue;
        }
        if value.is_even() {
            let mut v = value;
            let twos = v.trailing_zeros().unwrap_or(0) as u32;
            v >>= twos;
            primes.push((BigUint::from(2u32), twos * mult));
            stack.push((v, mult));
            continue;
        }
        if let Ok(Some((base, k))) = is_perfect_power(&value) {
            stack.push((base, mult * k));
            continue;
        }
        let mut seed = 1u64;
        while !allowance.exhausted() {
            let attempt = rho::brent_attempt(&value, seed, allowance.remaining, allowance.deadline);
            allowance.spend(attempt.iterations);
            if let Some(d) = attempt.divisor {
                let cof = &value / &d;
                stack.push((d, mult));
                stack.push((cof, mult));
                continue 'work;
            }
            seed += 1;
        }
        leftovers.push(value.pow(mult));
    }
}

fn finish(
    target: Natural,
    mut primes: Vec<(Natural, u32)>,
    leftovers: Vec<Natural>,
) -> Factorization {
    primes.sort_by(|a, b| a.0.cmp(&b.0));
    let cofactor = leftovers.into_iter().fold(BigUint::one(), |acc, v| acc * v);
    Factorization::from_parts(target, primes, cofactor)
}

/// Factor an arbitrary natural: trial division to the budget bound, then
/// Brent rho with seeds 1, 2, 3, ...
pub fn factor_natural(x: &Natural, budget: &Budget) -> Result<Factorization> {
    factor_natural_with_stats(x, budget, None)
}

pub fn factor_natural_with_stats(
    x: &Natural,
    budget: &Budget,
    stats: Option<&FactorStats>,
) -> Result<Factorization> {
    if x.is_zero() {
        return Err(Error::invalid("factor_natural: cannot factor 0"));
    }
    budget.validate()?;
    let (mut primes, rem) = trial::trial_divide(x, budget.trial_division_bound);
    let mut leftovers = Vec::new();
    let mut allowance = RhoAllowance::new(budget, stats);
    resolve(rem, &mut allowance, &mut primes, &mut leftovers);
    Ok(finish(x.clone(), primes, leftovers))
}

/// Primes q = 2dl + 1 <= `limit` dividing `target`, ascending. For odd prime
/// d only q = +-1 (mod 8) are tried.
pub fn trial_divide_congruence(
    target: &Natural,
    d: MersenneIndex,
    limit: u64,
) -> Result<Vec<Natural>> {
    if d < 2 {
        return Err(Error::invalid(
            "trial_divide_congruence: d must be at least 2",
        ));
    }
    if target.is_even() {
        return Err(Error::invalid(
            "trial_divide_congruence: target must be odd",
        ));
    }
    let (found, _) = trial::congruence_scan(target, d as u64, limit);
    Ok(found.into_iter().map(|(p, _)| p).collect())
}

/// One Brent rho attempt with polynomial y^2 + `seed`. Deterministic given
/// its arguments; `None` means the budget ran out or the cycle closed.
pub fn pollard_rho_brent(x: &Natural, seed: u64, budget: &Budget) -> Result<Option<Natural>> {
    if x.is_even() || *x < BigUint::from(9u32) {
        return Err(Error::invalid(format!(
            "pollard_rho_brent: {x} must be an odd composite"
        )));
    }
    if is_probable_prime(x) != Verdict::Composite {
        return Err(Error::invalid(format!("pollard_rho_brent: {x} is prime")));
    }
    budget.validate()?;
    let deadline = budget
        .wall_hint_ms
        .map(|ms| Instant::now() + Duration::from_millis(ms));
    Ok(rho::brent_attempt(x, seed, budget.rho_iterations_max, deadline).divisor)
}

/// Factor M_n: cache lookup, cyclotomic pre-split, congruence trial division
/// per part, rho on what remains, primality of every survivor. The result is
/// merged into `cache`.
pub fn factor_mersenne(
    n: MersenneIndex,
    budget: &Budget,
    cache: &FactorCache,
) -> Result<Factorization> {
    factor_mersenne_with_stats(n, budget, cache, None)
}

pub fn factor_mersenne_with_stats(
    n: MersenneIndex,
    budget: &Budget,
    cache: &FactorCache,
    stats: Option<&FactorStats>,
) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::invalid("factor_mersenne: n must be at least 1"));
    }
    budget.validate()?;
    let cached = cache.get(n);
    if let Some(c) = cached.as_ref().filter(|c| c.is_complete()) {
        if let Some(s) = stats {
            s.cache_hits.fetch_add(1, Ordering::Relaxed);
        }
        return Ok(c.clone());
    }
    if let Some(s) = stats {
        s.factorizations.fetch_add(1, Ordering::Relaxed);
    }
    let known: Vec<Natural> = cached
        .as_ref()
        .map(|c| c.primes().cloned().collect())
        .unwrap_or_default();

    let mut allowance = RhoAllowance::new(budget, stats);
    let mut primes = Vec::new();
    let mut leftovers = Vec::new();
    for part in cyclotomic_split(n) {
        let mut rem = part.value;
        for p in &known {
            let e = strip(&mut rem, p);
            if e > 0 {
                primes.push((p.clone(), e));
            }
        }
        if !part.intrinsic.is_one() {
            let e = strip(&mut rem, &part.intrinsic);
            if e > 0 {
                primes.push((part.intrinsic.clone(), e));
            }
        }
        if rem.is_one() {
            continue;
        }
        let (found, rem) = trial::congruence_scan(&rem, part.d as u64, budget.trial_division_bound);
        primes.extend(found);
        resolve(rem, &mut allowance, &mut primes, &mut leftovers);
    }

    let computed = finish(mersenne(n), primes, leftovers);
    cache.merge(n, computed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nat(v: u64) -> Natural {
        BigUint::from(v)
    }

    fn pairs(v: &[(u64, u32)]) -> Vec<(Natural, u32)> {
        v.iter().map(|&(p, e)| (nat(p), e)).collect()
    }

    #[test]
    fn factor_natural_examples() {
        let one = factor_natural(&nat(1), &Budget::default()).unwrap();
        assert!(one.factors.is_empty());
        assert!(one.is_complete());

        let f = factor_natural(&nat(4095), &Budget::default()).unwrap();
        assert_eq!(f.factors, pairs(&[(3, 2), (5, 1), (7, 1), (13, 1)]));

        let f = factor_natural(&nat(536870911), &Budget::default()).unwrap();
        assert_eq!(f.factors, pairs(&[(233, 1), (1103, 1), (2089, 1)]));

        assert!(factor_natural(&nat(0), &Budget::default()).is_err());
    }

    #[test]
    fn factor_natural_needs_rho_beyond_trial_bound() {
        let budget = Budget::new(1 << 20, 100, None).unwrap();
        let x = nat(1000003) * nat(1000033) * nat(1000003);
        let f = factor_natural(&x, &budget).unwrap();
        assert_eq!(f.factors, pairs(&[(1000003, 2), (1000033, 1)]));
        assert!(f.is_complete());
    }

    #[test]
    fn factor_natural_partial_on_tiny_budget() {
        let budget = Budget::new(8, 10, None).unwrap();
        let x = nat(2147483647) * nat(2147483629) * 9u32;
        let f = factor_natural(&x, &budget).unwrap();
        assert_eq!(f.status, Status::Partial);
        assert_eq!(f.factors, pairs(&[(3, 2)]));
        assert_eq!(f.cofactor, nat(2147483647) * nat(2147483629));
        assert_eq!(f.product(), x);
    }

    #[test]
    fn trial_divide_congruence_examples() {
        assert_eq!(
            trial_divide_congruence(&nat(2047), 11, 100).unwrap(),
            vec![nat(23), nat(89)]
        );
        assert_eq!(
            trial_divide_congruence(&nat(8388607), 23, 50).unwrap(),
            vec![nat(47)]
        );
        assert!(trial_divide_congruence(&nat(7), 4, 100).unwrap().is_empty());
        assert!(trial_divide_congruence(&nat(8), 4, 100).is_err());
        assert!(trial_divide_congruence(&nat(7), 1, 100).is_err());
    }

    #[test]
    fn rho_examples() {
        let b = Budget::default();
        let d = pollard_rho_brent(&nat(8051), 1, &b).unwrap().unwrap();
        assert!(d == nat(83) || d == nat(97));
        for seed in 1..5 {
            let d = pollard_rho_brent(&nat(2047), seed, &b).unwrap().unwrap();
            assert!(d == nat(23) || d == nat(89), "seed {seed}: {d}");
        }
        let d = pollard_rho_brent(&nat(15), 1, &b).unwrap().unwrap();
        assert!(d == nat(3) || d == nat(5));
        assert!(pollard_rho_brent(&nat(8191), 1, &b).is_err());
        assert!(pollard_rho_brent(&nat(100), 1, &b).is_err());
    }

    #[test]
    fn factor_mersenne_examples() {
        let cache = FactorCache::new();
        let b = Budget::default();
        assert_eq!(
            factor_mersenne(6, &b, &cache).unwrap().factors,
            pairs(&[(3, 2), (7, 1)])
        );
        assert_eq!(
            factor_mersenne(21, &b, &cache).unwrap().factors,
            pairs(&[(7, 2), (127, 1), (337, 1)])
        );
        assert_eq!(
            factor_mersenne(25, &b, &cache).unwrap().factors,
            pairs(&[(31, 1), (601, 1), (1801, 1)])
        );
        let one = factor_mersenne(1, &b, &cache).unwrap();
        assert!(one.factors.is_empty() && one.is_complete());
        assert!(factor_mersenne(0, &b, &cache).is_err());
    }

    #[test]
    fn second_lookup_is_served_from_cache() {
        let cache = FactorCache::new();
        let stats = FactorStats::default();
        let b = Budget::default();
        let first = factor_mersenne_with_stats(59, &b, &cache, Some(&stats)).unwrap();
        assert!(first.is_complete());
        let before = stats.rho_iterations();
        let second = factor_mersenne_with_stats(59, &b, &cache, Some(&stats)).unwrap();
        assert_eq!(first, second);
        assert_eq!(stats.rho_iterations(), before);
        assert_eq!(stats.cache_hits(), 1);
    }

    #[test]
    fn partial_result_resumes_from_cache() {
        let cache = FactorCache::new();
        let tiny = Budget::new(1, 10, None).unwrap();
        let partial = factor_mersenne(67, &tiny, &cache).unwrap();
        assert_eq!(partial.status, Status::Partial);
        assert_eq!(partial.product(), mersenne(67));
        let full = factor_mersenne(67, &Budget::default(), &cache).unwrap();
        assert_eq!(
            full.factors,
            vec![(nat(193707721), 1), (nat(761838257287), 1)]
        );
        assert!(cache.get(67).unwrap().is_complete());
    }

    #[test]
    fn merge_is_idempotent_and_monotone() {
        let target = mersenne(29);
        let a = Factorization::from_primes(&target, [&nat(233)]);
        assert_eq!(a.status, Status::Partial);
        assert_eq!(a.cofactor, nat(2304167));
        let b = Factorization::from_primes(&target, [&nat(1103)]);
        let ab = a.merge(&b).unwrap();
        assert!(ab.is_complete());
        assert_eq!(ab.factors, pairs(&[(233, 1), (1103, 1), (2089, 1)]));
        assert_eq!(ab.merge(&ab).unwrap(), ab);
        assert_eq!(ab.merge(&a).unwrap(), ab);
    }
}

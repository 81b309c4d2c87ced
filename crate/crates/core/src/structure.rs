//! Cyclotomic decomposition of M_n and its primitive prime divisors.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::arith::{mersenne, mod_mersenne, multiplicative_order_of_two};
use crate::error::{Error, Result};
use crate::factor::Factorization;
use crate::{MersenneIndex, Natural};

/// Φ_d(2) for one divisor d of n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclotomicPart {
    pub d: MersenneIndex,
    pub value: Natural,
    /// gcd(Φ_d(2), d): 1, or the largest prime factor of d when that prime
    /// divides Φ_d(2) without being primitive.
    pub intrinsic: Natural,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrimitiveReport {
    pub n: MersenneIndex,
    #[serde(serialize_with = "crate::storage::ser_naturals")]
    pub primitive_primes: Vec<Natural>,
    #[serde(serialize_with = "crate::storage::ser_natural")]
    pub primitive_part: Natural,
}

/// Prime factorization of a machine-width index by trial division.
pub(crate) fn index_factors(n: MersenneIndex) -> Vec<(MersenneIndex, u32)> {
    let mut out = Vec::new();
    let mut m = n;
    let mut p = 2;
    while (p as u64) * (p as u64) <= m as u64 {
        if m % p == 0 {
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        out.push((m, 1));
    }
    out
}

/// All divisors of n in ascending order.
pub fn divisor_list(n: MersenneIndex) -> Vec<MersenneIndex> {
    if n == 0 {
        return Vec::new();
    }
    let mut divs = vec![1];
    for (p, e) in index_factors(n) {
        let current = divs.clone();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            divs.extend(current.iter().map(|d| d * pk));
        }
    }
    divs.sort_unstable();
    divs
}

/// Möbius function of a positive index.
pub(crate) fn mobius(n: MersenneIndex) -> i8 {
    let f = index_factors(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Φ_d(2) = ∏_{e | d} (2^e - 1)^{μ(d/e)}, by exact division of the positive
/// product by the negative one.
pub fn cyclotomic_value(d: MersenneIndex) -> Natural {
    if d <= 1 {
        return BigUint::one();
    }
    let mut numerator = BigUint::one();
    let mut denominator = BigUint::one();
    for e in divisor_list(d) {
        match mobius(d / e) {
            1 => numerator *= mersenne(e),
            -1 => denominator *= mersenne(e),
            _ => {}
        }
    }
    let (q, r) = numerator.div_rem(&denominator);
    debug_assert!(r == BigUint::from(0u32));
    q
}

/// One part per divisor d >= 2 of n. Together with Φ_1(2) = 1 they multiply
/// to M_n.
pub fn cyclotomic_split(n: MersenneIndex) -> Vec<CyclotomicPart> {
    divisor_list(n)
        .into_iter()
        .filter(|&d| d >= 2)
        .map(|d| {
            let value = cyclotomic_value(d);
            let intrinsic = value.gcd(&BigUint::from(d));
            CyclotomicPart {
                d,
                value,
                intrinsic,
            }
        })
        .collect()
}

/// Primes of a complete factorization of M_n whose order of 2 is exactly n.
pub fn primitive_prime_divisors(n: MersenneIndex, f: &Factorization) -> Result<PrimitiveReport> {
    if !f.is_complete() {
        return Err(Error::Incomplete {
            what: format!("M_{n}"),
            cofactor: f.cofactor.to_string(),
        });
    }
    if f.target != mersenne(n) {
        return Err(Error::invalid(format!(
            "factorization target {} is not M_{n}",
            f.target
        )));
    }
    let mut primitive_primes = Vec::new();
    let mut primitive_part = BigUint::one();
    for (q, e) in &f.factors {
        let order = multiplicative_order_of_two(q, Some(n))?;
        if order.to_u64() == Some(n as u64) {
            primitive_part *= q.pow(*e);
            primitive_primes.push(q.clone());
        }
    }
    Ok(PrimitiveReport {
        n,
        primitive_primes,
        primitive_part,
    })
}

/// (M_{pm} / M_p) mod M_p through the closed form
/// Σ_{k<m} 2^{kp} = m (mod 2^p - 1), i.e. m mod (2^p - 1).
pub fn lemma4_residue(p: MersenneIndex, m: &Natural) -> Result<Natural> {
    if p < 2 {
        return Err(Error::invalid("lemma4_residue: p must be at least 2"));
    }
    if *m < BigUint::one() {
        return Err(Error::invalid("lemma4_residue: m must be at least 1"));
    }
    mod_mersenne(m, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::{factor_mersenne, Budget};
    use crate::storage::FactorCache;

    fn nat(v: u64) -> Natural {
        BigUint::from(v)
    }

    #[test]
    fn divisor_lists() {
        assert_eq!(divisor_list(1), vec![1]);
        assert_eq!(divisor_list(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(divisor_list(49), vec![1, 7, 49]);
        // brute-force oracle
        for n in 1..300u32 {
            let brute: Vec<u32> = (1..=n).filter(|d| n % d == 0).collect();
            assert_eq!(divisor_list(n), brute);
        }
    }

    #[test]
    fn cyclotomic_values() {
        assert_eq!(cyclotomic_value(1), nat(1));
        assert_eq!(cyclotomic_value(12), nat(13));
        assert_eq!(cyclotomic_value(21), nat(2359));
        assert_eq!(cyclotomic_value(64), nat(4294967297));
        assert_eq!(cyclotomic_value(49), nat(4432676798593));
    }

    fn summary(n: MersenneIndex) -> Vec<(u32, u64, u64)> {
        cyclotomic_split(n)
            .into_iter()
            .map(|p| {
                (
                    p.d,
                    p.value.to_u64().unwrap(),
                    p.intrinsic.to_u64().unwrap(),
                )
            })
            .collect()
    }

    #[test]
    fn cyclotomic_split_examples() {
        assert_eq!(summary(6), vec![(2, 3, 1), (3, 7, 1), (6, 3, 3)]);
        assert_eq!(summary(4), vec![(2, 3, 1), (4, 5, 1)]);
        assert_eq!(summary(21), vec![(3, 7, 1), (7, 127, 1), (21, 2359, 7)]);
    }

    #[test]
    fn primitive_examples() {
        let cache = FactorCache::new();
        let b = Budget::default();
        let report = |n| {
            let f = factor_mersenne(n, &b, &cache).unwrap();
            primitive_prime_divisors(n, &f).unwrap()
        };
        let r6 = report(6);
        assert!(r6.primitive_primes.is_empty());
        assert_eq!(r6.primitive_part, nat(1));
        let r9 = report(9);
        assert_eq!(r9.primitive_primes, vec![nat(73)]);
        assert_eq!(r9.primitive_part, nat(73));
        let r21 = report(21);
        assert_eq!(r21.primitive_primes, vec![nat(337)]);
        assert_eq!(r21.primitive_part, nat(337));
        assert_eq!(report(2).primitive_primes, vec![nat(3)]);
        assert_eq!(report(1).primitive_part, nat(1));
    }

    #[test]
    fn primitive_rejects_partial() {
        let partial = Factorization::from_primes(&mersenne(29), [&nat(233)]);
        assert!(matches!(
            primitive_prime_divisors(29, &partial),
            Err(Error::Incomplete { .. })
        ));
    }

    #[test]
    fn lemma4_examples() {
        assert_eq!(lemma4_residue(3, &nat(5)).unwrap(), nat(5));
        assert_eq!(lemma4_residue(2, &nat(3)).unwrap(), nat(0));
        assert_eq!(lemma4_residue(3, &nat(9)).unwrap(), nat(2));
        assert!(lemma4_residue(1, &nat(3)).is_err());
        assert!(lemma4_residue(3, &nat(0)).is_err());
    }

    #[test]
    fn lemma4_matches_direct_division() {
        for p in [2u32, 3, 5, 7] {
            for m in 1..=12u32 {
                let quotient = mersenne(p * m) / mersenne(p);
                let direct = quotient % mersenne(p);
                assert_eq!(
                    lemma4_residue(p, &BigUint::from(m)).unwrap(),
                    direct,
                    "p={p} m={m}"
                );
            }
        }
    }

    #[test]
    fn mobius_small() {
        let expected = [1i8, -1, -1, 0, -1, 1, -1, 0, 0, 1, -1, 0];
        for (i, &mu) in expected.iter().enumerate() {
            assert_eq!(mobius(i as u32 + 1), mu);
        }
    }
}

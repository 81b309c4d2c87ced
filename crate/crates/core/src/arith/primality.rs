//! Primality testing.
//!
//! Below 2^64 the answer is exact: strong probable-prime tests to the seven
//! Sinclair bases are known to have no common pseudoprime in that range.
//! Above 2^64 we run Baillie-PSW (strong base 2 plus strong Lucas with
//! Selfridge parameters) followed by a handful of extra Miller-Rabin rounds
//! whose bases come from a fixed-seed ChaCha stream, so verdicts are
//! reproducible run to run.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Outcome of a primality test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Prime,
    Composite,
    /// Passed every test but is not proven (only for inputs >= 2^64).
    ProbablePrime,
}

impl Verdict {
    /// True for `Prime` and `ProbablePrime`.
    pub fn is_prime_like(self) -> bool {
        !matches!(self, Verdict::Composite)
    }
}

const SINCLAIR_BASES: [u64; 7] = [2, 325, 9375, 28178, 450775, 9780504, 1795265022];

const SMALL_PRIMES: [u32; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

/// Seed for the extra Miller-Rabin rounds applied above 2^64.
pub const EXTRA_ROUNDS_SEED: u64 = 0x6d65_7273_656e_6e65;
/// Number of extra Miller-Rabin rounds applied above 2^64.
pub const EXTRA_ROUNDS: usize = 8;

pub fn is_probable_prime(x: &BigUint) -> Verdict {
    match x.to_u64() {
        Some(v) => {
            if is_prime_u64(v) {
                Verdict::Prime
            } else {
                Verdict::Composite
            }
        }
        None => big_verdict(x),
    }
}

/// Deterministic primality for machine words.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &SMALL_PRIMES {
        let p = p as u64;
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    if n < 97 * 97 {
        return true;
    }
    let d = (n - 1) >> (n - 1).trailing_zeros();
    let s = (n - 1).trailing_zeros();
    'bases: for &a in &SINCLAIR_BASES {
        let a = a % n;
        if a == 0 {
            continue;
        }
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

#[inline]
pub(crate) fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, m);
        }
        base = mul_mod_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

fn big_verdict(n: &BigUint) -> Verdict {
    if n.is_even() {
        return Verdict::Composite;
    }
    for &p in &SMALL_PRIMES[1..] {
        if (n % p).is_zero() {
            return Verdict::Composite;
        }
    }
    if !strong_probable_prime(n, &BigUint::from(2u32)) {
        return Verdict::Composite;
    }
    let root = n.sqrt();
    if &root * &root == *n {
        return Verdict::Composite;
    }
    if !strong_lucas_probable_prime(n) {
        return Verdict::Composite;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(EXTRA_ROUNDS_SEED);
    let span = n - 3u32;
    for _ in 0..EXTRA_ROUNDS {
        let draw = BigUint::from(rng.gen::<u64>()) << 64 | BigUint::from(rng.gen::<u64>());
        let base = draw % &span + 2u32;
        if !strong_probable_prime(n, &base) {
            return Verdict::Composite;
        }
    }
    Verdict::ProbablePrime
}

fn strong_probable_prime(n: &BigUint, base: &BigUint) -> bool {
    let n_minus_1 = n - 1u32;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    let mut x = base.modpow(&d, n);
    if x.is_one() || x == n_minus_1 {
        return true;
    }
    for _ in 1..s {
        x = &x * &x % n;
        if x == n_minus_1 {
            return true;
        }
    }
    false
}

/// Jacobi symbol (a/n) for odd n.
pub(crate) fn jacobi(a: &BigUint, n: &BigUint) -> i32 {
    debug_assert!(n.is_odd());
    let mut a = a % n;
    let mut n = n.clone();
    let mut result = 1;
    while !a.is_zero() {
        let tz = a.trailing_zeros().unwrap_or(0);
        if tz % 2 == 1 {
            let r = (&n % 8u32).to_u32().unwrap_or(0);
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        a >>= tz;
        if (&a % 4u32) == BigUint::from(3u32) && (&n % 4u32) == BigUint::from(3u32) {
            result = -result;
        }
        std::mem::swap(&mut a, &mut n);
        a %= &n;
    }
    if n.is_one() {
        result
    } else {
        0
    }
}

/// Reduce a signed machine integer into [0, n).
fn signed_mod(v: i64, n: &BigUint) -> BigUint {
    let r = BigUint::from(v.unsigned_abs()) % n;
    if v < 0 && !r.is_zero() {
        n - r
    } else {
        r
    }
}

fn half_mod(x: BigUint, n: &BigUint) -> BigUint {
    if x.is_odd() {
        (x + n) >> 1
    } else {
        x >> 1
    }
}

/// Strong Lucas probable-prime test with Selfridge's method A parameters.
/// Caller guarantees n is odd, not a perfect square, and has no tiny factors.
fn strong_lucas_probable_prime(n: &BigUint) -> bool {
    let mut d_param: i64 = 5;
    loop {
        let j = jacobi(&signed_mod(d_param, n), n);
        if j == -1 {
            break;
        }
        if j == 0 && BigUint::from(d_param.unsigned_abs()) != *n {
            return false;
        }
        d_param = if d_param > 0 {
            -(d_param + 2)
        } else {
            -d_param + 2
        };
    }
    let p_param: i64 = 1;
    let q_param: i64 = (1 - d_param) / 4;
    let d_mod = signed_mod(d_param, n);
    let q_mod = signed_mod(q_param, n);
    let p_mod = signed_mod(p_param, n);

    let n_plus_1 = n + 1u32;
    let s = n_plus_1.trailing_zeros().unwrap_or(0);
    let k = &n_plus_1 >> s;

    let mut u = BigUint::one();
    let mut v = p_mod.clone();
    let mut qk = q_mod.clone();
    let bits = k.bits();
    for i in (0..bits - 1).rev() {
        // double
        u = &u * &v % n;
        v = (&v * &v + n * 2u32 - (&qk << 1u32) % n) % n;
        qk = &qk * &qk % n;
        if k.bit(i) {
            let u_next = half_mod(&p_mod * &u + &v, n) % n;
            let v_next = half_mod(&d_mod * &u + &p_mod * &v, n) % n;
            u = u_next;
            v = v_next;
            qk = &qk * &q_mod % n;
        }
    }
    if u.is_zero() || v.is_zero() {
        return true;
    }
    for _ in 1..s {
        v = (&v * &v + n * 2u32 - (&qk << 1u32) % n) % n;
        if v.is_zero() {
            return true;
        }
        qk = &qk * &qk % n;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_edge_cases() {
        assert_eq!(is_probable_prime(&BigUint::from(0u32)), Verdict::Composite);
        assert_eq!(is_probable_prime(&BigUint::from(1u32)), Verdict::Composite);
        assert_eq!(is_probable_prime(&BigUint::from(2u32)), Verdict::Prime);
        assert_eq!(is_probable_prime(&BigUint::from(178481u32)), Verdict::Prime);
        assert_eq!(
            is_probable_prime(&BigUint::from(4432676798593u64)),
            Verdict::Prime
        );
    }

    #[test]
    fn agrees_with_sieve_below_100k() {
        let limit = 100_000usize;
        let mut sieve = vec![true; limit];
        sieve[0] = false;
        sieve[1] = false;
        for i in 2..limit {
            if sieve[i] {
                for j in (i * i..limit).step_by(i) {
                    sieve[j] = false;
                }
            }
        }
        for (i, &is_p) in sieve.iter().enumerate() {
            assert_eq!(is_prime_u64(i as u64), is_p, "{i}");
        }
    }

    #[test]
    fn strong_pseudoprimes_to_base_two_are_caught() {
        // 2047 and 3215031751 fool base 2 (the latter fools 2,3,5,7).
        for n in [2047u64, 1373653, 25326001, 3215031751, 3825123056546413051] {
            assert!(!is_prime_u64(n), "{n}");
        }
    }

    #[test]
    fn large_verdicts() {
        let m61 = (BigUint::one() << 61u32) - 1u32;
        assert_eq!(is_probable_prime(&m61), Verdict::Prime);
        let m89 = (BigUint::one() << 89u32) - 1u32;
        assert_eq!(is_probable_prime(&m89), Verdict::ProbablePrime);
        let m127 = (BigUint::one() << 127u32) - 1u32;
        assert_eq!(is_probable_prime(&m127), Verdict::ProbablePrime);
        let m67 = (BigUint::one() << 67u32) - 1u32;
        assert_eq!(is_probable_prime(&m67), Verdict::Composite);
        // product of two primes just above 2^32
        let semi = BigUint::from(4294967311u64) * BigUint::from(4294967357u64);
        assert_eq!(is_probable_prime(&semi), Verdict::Composite);
        // Carmichael-style number above 2^64: 2^64+1 = 274177 * 67280421310721
        let f6 = (BigUint::one() << 64u32) + 1u32;
        assert_eq!(is_probable_prime(&f6), Verdict::Composite);
    }

    #[test]
    fn lucas_alone_rejects_base_two_pseudoprime() {
        // 2^64-ish strong base-2 pseudoprimes are rare; check the Lucas leg
        // directly on known base-2 strong pseudoprimes instead.
        for n in [2047u64, 3277, 4033, 4681, 8321] {
            assert!(!strong_lucas_probable_prime(&BigUint::from(n)), "{n}");
        }
        for p in [101u64, 1009, 65537, 2147483647] {
            assert!(strong_lucas_probable_prime(&BigUint::from(p)), "{p}");
        }
    }

    #[test]
    fn jacobi_matches_euler_criterion() {
        for p in [7u64, 11, 13, 101, 1009] {
            for a in 1..p {
                let euler = pow_mod_u64(a, (p - 1) / 2, p);
                let expected = if euler == 1 { 1 } else { -1 };
                assert_eq!(jacobi(&BigUint::from(a), &BigUint::from(p)), expected);
            }
        }
    }
}

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use proptest::prelude::*;

use mersenne_omega::arith::{
    is_perfect_power, is_prime_u64, is_probable_prime, lucas_lehmer, mersenne, mod_mersenne,
    multiplicative_order_of_two,
};
use mersenne_omega::factor::{factor_mersenne, factor_natural, Budget};
use mersenne_omega::storage::{parse_cache, render_cache, FactorCache};
use mersenne_omega::structure::primitive_prime_divisors;
use mersenne_omega::theorems::validate_divisor_form;

fn big(bytes: &[u8]) -> BigUint {
    BigUint::from_bytes_le(bytes)
}

proptest! {
    #[test]
    fn mod_mersenne_matches_remainder(bytes in prop::collection::vec(any::<u8>(), 0..48), n in 1u32..200) {
        let x = big(&bytes);
        prop_assert_eq!(mod_mersenne(&x, n).unwrap(), &x % mersenne(n));
    }

    #[test]
    fn order_divides_q_minus_one(start in 3u64..200_000) {
        let q = (start..).find(|&q| is_prime_u64(q)).unwrap();
        let qb = BigUint::from(q);
        let k = multiplicative_order_of_two(&qb, None).unwrap();
        prop_assert!((&qb - 1u32).is_multiple_of(&k));
        prop_assert!(BigUint::from(2u32).modpow(&k, &qb).is_one());
        let k: u32 = k.try_into().unwrap();
        // minimal: no proper divisor of k works
        for d in 1..k {
            if k % d == 0 {
                prop_assert!(!BigUint::from(2u32).modpow(&BigUint::from(d), &qb).is_one());
            }
        }
    }

    #[test]
    fn factor_natural_reconstructs(x in 2u64..u64::MAX) {
        let f = factor_natural(&BigUint::from(x), &Budget::default()).unwrap();
        prop_assert!(f.is_complete());
        prop_assert_eq!(f.product(), BigUint::from(x));
        for p in f.primes() {
            prop_assert!(is_probable_prime(p).is_prime_like());
        }
    }

    #[test]
    fn gcd_identity(a in 1u32..300, b in 1u32..300) {
        prop_assert_eq!(mersenne(a).gcd(&mersenne(b)), mersenne(a.gcd(&b)));
    }
}

#[test]
fn lucas_lehmer_agrees_with_primality() {
    for p in (3..=127u32).filter(|&p| is_prime_u64(p as u64)) {
        assert_eq!(
            lucas_lehmer(p).unwrap(),
            is_probable_prime(&mersenne(p)).is_prime_like(),
            "p={p}"
        );
    }
}

#[test]
fn no_mersenne_perfect_powers() {
    for n in 2..=200 {
        assert_eq!(is_perfect_power(&mersenne(n)).unwrap(), None, "n={n}");
    }
}

#[test]
fn factorizations_are_sound_and_deterministic() {
    let a = FactorCache::new();
    let b = FactorCache::new();
    for n in 1..=64 {
        let f = factor_mersenne(n, &Budget::default(), &a).unwrap();
        assert!(f.is_complete(), "n={n}");
        assert_eq!(f.product(), mersenne(n));
        assert!(f.factors.windows(2).all(|w| w[0].0 < w[1].0));
        for p in f.primes() {
            assert!(is_probable_prime(p).is_prime_like());
        }
        let g = factor_mersenne(n, &Budget::default(), &b).unwrap();
        assert_eq!(f, g);
        let prim = primitive_prime_divisors(n, &f).unwrap();
        for q in &prim.primitive_primes {
            let k = multiplicative_order_of_two(q, Some(n)).unwrap();
            assert_eq!(k, BigUint::from(n));
        }
    }
}

#[test]
fn divisor_form_for_prime_exponents() {
    let cache = FactorCache::new();
    for p in (3..=61u32).filter(|&p| is_prime_u64(p as u64)) {
        let f = factor_mersenne(p, &Budget::default(), &cache).unwrap();
        for q in f.primes() {
            let r = (q % 8u32).to_u32_digits();
            let r = r.first().copied().unwrap_or(0);
            assert!(r == 1 || r == 7, "q={q}");
            assert!(validate_divisor_form(q, p).unwrap().passes, "q={q} p={p}");
        }
    }
}

#[test]
fn cache_text_round_trip() {
    let cache = FactorCache::new();
    for n in [1, 2, 12, 30, 49, 64] {
        factor_mersenne(n, &Budget::default(), &cache).unwrap();
    }
    let text = render_cache(&cache);
    let back = parse_cache(&text, std::path::Path::new("<mem>")).unwrap();
    assert_eq!(back, cache);
    assert_eq!(render_cache(&back), text);
    assert!(!cache.get(64).unwrap().cofactor.is_zero());
}

//! Arbitrary-precision primitives specialised to numbers of the form 2^n - 1.

mod primality;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

pub(crate) use primality::mul_mod_u64;
pub use primality::{is_prime_u64, is_probable_prime, Verdict, EXTRA_ROUNDS, EXTRA_ROUNDS_SEED};

use crate::error::{Error, Result};
use crate::factor::{factor_natural, Budget};
use crate::{MersenneIndex, Natural};

/// M_n = 2^n - 1. `mersenne(0)` is 0.
pub fn mersenne(n: MersenneIndex) -> Natural {
    (BigUint::one() << n) - 1u32
}

/// `x mod (2^n - 1)` by folding n-bit blocks, since 2^n = 1 modulo M_n.
pub fn mod_mersenne(x: &Natural, n: MersenneIndex) -> Result<Natural> {
    if n == 0 {
        return Err(Error::invalid("mod_mersenne: n must be at least 1"));
    }
    let modulus = mersenne(n);
    let mut acc = x.clone();
    while acc.bits() > n as u64 {
        let high = &acc >> n;
        let low = acc & &modulus;
        acc = high + low;
    }
    if acc == modulus {
        acc.set_zero();
    }
    Ok(acc)
}

/// Lucas-Lehmer test: true iff M_p is prime, for an odd prime p.
pub fn lucas_lehmer(p: MersenneIndex) -> Result<bool> {
    if p % 2 == 0 || !is_prime_u64(p as u64) {
        return Err(Error::invalid(format!(
            "lucas_lehmer: exponent {p} must be an odd prime"
        )));
    }
    let modulus = mersenne(p);
    let mut s = BigUint::from(4u32);
    for _ in 0..p - 2 {
        // s^2 - 2 without underflow: s < M_p so add M_p before subtracting.
        let sq = mod_mersenne(&(&s * &s), p)?;
        s = mod_mersenne(&(sq + &modulus - 2u32), p)?;
    }
    Ok(s.is_zero())
}

/// Multiplicative order of 2 modulo the odd prime `q`.
///
/// With `divisor_hint = Some(n)` and q | M_n, only divisors of n are searched.
/// Otherwise q - 1 is factored and the order found by descent.
pub fn multiplicative_order_of_two(
    q: &Natural,
    divisor_hint: Option<MersenneIndex>,
) -> Result<Natural> {
    if q.is_even() || *q < BigUint::from(3u32) {
        return Err(Error::invalid(format!(
            "multiplicative order: modulus {q} must be odd and at least 3"
        )));
    }
    if !is_probable_prime(q).is_prime_like() {
        return Err(Error::invalid(format!(
            "multiplicative order: modulus {q} is composite"
        )));
    }
    let two = BigUint::from(2u32);

    if let Some(n) = divisor_hint.filter(|&n| n >= 1) {
        if two.modpow(&BigUint::from(n), q).is_one() {
            let n_factors = factor_natural(&BigUint::from(n), &Budget::default())?;
            let mut order = n as u64;
            for (r, _) in &n_factors.factors {
                let r = r.to_u64().expect("prime factor of a u32 fits u64");
                while order % r == 0 && two.modpow(&BigUint::from(order / r), q).is_one() {
                    order /= r;
                }
            }
            return Ok(BigUint::from(order));
        }
    }

    let group_order = q - 1u32;
    let f = factor_natural(&group_order, &Budget::default())?;
    if !f.is_complete() {
        return Err(Error::Incomplete {
            what: format!("{group_order} (group order for {q})"),
            cofactor: f.cofactor.to_string(),
        });
    }
    let mut order = group_order;
    for (r, _) in &f.factors {
        while (&order % r).is_zero() && two.modpow(&(&order / r), q).is_one() {
            order /= r;
        }
    }
    Ok(order)
}

/// Canonical perfect-power form `(base, exponent)` with the largest possible
/// exponent (and hence the smallest base), or `None`.
pub fn is_perfect_power(x: &Natural) -> Result<Option<(Natural, u32)>> {
    if *x < BigUint::from(2u32) {
        return Err(Error::invalid(
            "is_perfect_power: argument must be at least 2",
        ));
    }
    Ok(perfect_power_inner(x))
}

fn perfect_power_inner(x: &Natural) -> Option<(Natural, u32)> {
    let max_k = x.bits() as u32;
    let mut k = 2u32;
    while k <= max_k {
        if is_prime_u64(k as u64) {
            let root = x.nth_root(k);
            if root.pow(k) == *x {
                let (base, e) = perfect_power_inner(&root).unwrap_or((root, 1));
                return Some((base, e * k));
            }
        }
        k += 1;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nat(v: u64) -> Natural {
        BigUint::from(v)
    }

    #[test]
    fn mersenne_values() {
        assert_eq!(mersenne(0), nat(0));
        assert_eq!(mersenne(4), nat(15));
        assert_eq!(mersenne(11), nat(2047));
    }

    #[test]
    fn mod_mersenne_examples() {
        assert_eq!(mod_mersenne(&nat(21), 2).unwrap(), nat(0));
        assert_eq!(mod_mersenne(&nat(4681), 3).unwrap(), nat(5));
        for n in 2..70 {
            let x = BigUint::one() << n;
            assert_eq!(mod_mersenne(&x, n).unwrap(), nat(1), "n={n}");
        }
        assert!(mod_mersenne(&nat(5), 0).is_err());
    }

    #[test]
    fn mod_mersenne_n_one_is_zero() {
        assert_eq!(mod_mersenne(&nat(12345), 1).unwrap(), nat(0));
    }

    #[test]
    fn lucas_lehmer_examples() {
        assert!(lucas_lehmer(3).unwrap());
        assert!(!lucas_lehmer(11).unwrap());
        assert!(lucas_lehmer(13).unwrap());
        assert_eq!(is_probable_prime(&nat(8191)), Verdict::Prime);
        assert!(lucas_lehmer(2).is_err());
        assert!(lucas_lehmer(9).is_err());
    }

    #[test]
    fn order_examples() {
        assert_eq!(multiplicative_order_of_two(&nat(7), None).unwrap(), nat(3));
        assert_eq!(
            multiplicative_order_of_two(&nat(73), Some(9)).unwrap(),
            nat(9)
        );
        assert_eq!(multiplicative_order_of_two(&nat(73), None).unwrap(), nat(9));
        assert_eq!(
            multiplicative_order_of_two(&nat(337), Some(21)).unwrap(),
            nat(21)
        );
        // the hint is ignored when q does not divide M_hint
        assert_eq!(
            multiplicative_order_of_two(&nat(337), Some(5)).unwrap(),
            nat(21)
        );
        assert!(multiplicative_order_of_two(&nat(8), None).is_err());
        assert!(multiplicative_order_of_two(&nat(1), None).is_err());
        assert!(multiplicative_order_of_two(&nat(15), None).is_err());
    }

    #[test]
    fn order_337_oracle() {
        // 2^21 = 1 and 2^d != 1 for the maximal proper divisors 1, 3, 7
        let q = nat(337);
        let two = nat(2);
        assert!(two.modpow(&nat(21), &q).is_one());
        for d in [1u64, 3, 7] {
            assert!(!two.modpow(&nat(d), &q).is_one());
        }
    }

    #[test]
    fn perfect_power_examples() {
        assert_eq!(is_perfect_power(&nat(16)).unwrap(), Some((nat(2), 4)));
        assert_eq!(is_perfect_power(&nat(64)).unwrap(), Some((nat(2), 6)));
        assert_eq!(is_perfect_power(&nat(36)).unwrap(), Some((nat(6), 2)));
        assert_eq!(is_perfect_power(&nat(15)).unwrap(), None);
        assert_eq!(is_perfect_power(&nat(8388607)).unwrap(), None);
        assert_eq!(is_perfect_power(&nat(2)).unwrap(), None);
        assert!(is_perfect_power(&nat(1)).is_err());
    }
}

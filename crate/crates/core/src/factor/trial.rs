//! Trial division, both plain and restricted to the arithmetic progression
//! 2dl + 1 that every prime of multiplicative order d must lie in.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::is_prime_u64;
use crate::Natural;

/// Divide `rem` by `q` as often as possible, returning the multiplicity.
pub(crate) fn strip(rem: &mut Natural, q: &Natural) -> u32 {
    let mut e = 0;
    loop {
        let (quot, r) = rem.div_rem(q);
        if !r.is_zero() {
            return e;
        }
        *rem = quot;
        e += 1;
    }
}

fn strip_u64(rem: &mut u64, q: u64) -> u32 {
    let mut e = 0;
    while *rem % q == 0 {
        *rem /= q;
        e += 1;
    }
    e
}

fn divides(rem: &Natural, q: u64) -> bool {
    match rem.to_u64() {
        Some(r) => r % q == 0,
        None => (rem % q).is_zero(),
    }
}

/// Plain trial division by 2 and odd numbers up to `bound`, stopping early
/// once the square of the trial divisor exceeds what is left.
/// Returns the prime powers found and the unfactored remainder.
pub(crate) fn trial_divide(x: &Natural, bound: u64) -> (Vec<(Natural, u32)>, Natural) {
    let mut found = Vec::new();
    let mut rem = x.clone();
    if rem.is_zero() {
        return (found, rem);
    }
    let twos = rem.trailing_zeros().unwrap_or(0);
    if twos > 0 {
        rem >>= twos;
        found.push((BigUint::from(2u32), twos as u32));
    }
    let mut q = 3u64;
    while q <= bound {
        if let Some(mut small) = rem.to_u64() {
            // finish in machine words
            while q <= bound {
                if (q as u128) * (q as u128) > small as u128 {
                    if small > 1 {
                        found.push((BigUint::from(small), 1));
                        small = 1;
                    }
                    break;
                }
                let e = strip_u64(&mut small, q);
                if e > 0 {
                    found.push((BigUint::from(q), e));
                }
                q += 2;
            }
            return (found, BigUint::from(small));
        }
        if divides(&rem, q) {
            let e = strip(&mut rem, &BigUint::from(q));
            found.push((BigUint::from(q), e));
        }
        q += 2;
    }
    (found, rem)
}

/// True when a candidate q = 2dl + 1 survives the quadratic-residue filter:
/// for odd prime d, 2 is a square modulo q so q = +-1 (mod 8).
fn passes_filter(q: u64, d: u64, mod8_filter: bool) -> bool {
    q % (2 * d) == 1 && (!mod8_filter || q % 8 == 1 || q % 8 == 7)
}

/// Scan q = 2dl + 1 <= `limit` in ascending order, dividing out every prime
/// candidate that divides `target`. Returns the prime powers found and the
/// remainder. Stops early once q^2 exceeds the remainder; at that point the
/// remainder is 1 or prime and is reported if it lies in the progression.
pub(crate) fn congruence_scan(
    target: &Natural,
    d: u64,
    limit: u64,
) -> (Vec<(Natural, u32)>, Natural) {
    let mod8_filter = d % 2 == 1 && is_prime_u64(d);
    let step = 2 * d;
    let mut found = Vec::new();
    let mut rem = target.clone();
    let mut q = step + 1;
    while q <= limit {
        if rem.is_one() {
            break;
        }
        if BigUint::from(q) * q > rem {
            if let Some(r) = rem.to_u64() {
                if r <= limit && passes_filter(r, d, mod8_filter) && is_prime_u64(r) {
                    found.push((rem.clone(), 1));
                    rem = BigUint::one();
                }
            }
            break;
        }
        if passes_filter(q, d, mod8_filter) && divides(&rem, q) && is_prime_u64(q) {
            let e = strip(&mut rem, &BigUint::from(q));
            found.push((BigUint::from(q), e));
        }
        q = match q.checked_add(step) {
            Some(next) => next,
            None => break,
        };
    }
    (found, rem)
}

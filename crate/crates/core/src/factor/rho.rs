//! Pollard rho with Brent's cycle detection and batched gcds.

use std::time::Instant;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::mul_mod_u64;

/// Number of differences multiplied together before each gcd.
pub const GCD_BATCH: u64 = 128;

/// Arithmetic the rho walk needs, so the same loop drives both machine-word
/// and multi-precision moduli.
trait RhoResidue: Clone + PartialEq {
    fn one() -> Self;
    fn from_u64(v: u64) -> Self;
    /// y^2 + c mod n
    fn step(&self, c: &Self, n: &Self) -> Self;
    /// acc * |a - b| mod n
    fn accumulate(acc: &Self, a: &Self, b: &Self, n: &Self) -> Self;
    fn gcd_with(&self, n: &Self) -> Self;
    fn is_unit(&self) -> bool;
}

impl RhoResidue for u64 {
    fn one() -> Self {
        1
    }
    fn from_u64(v: u64) -> Self {
        v
    }
    fn step(&self, c: &Self, n: &Self) -> Self {
        ((*self as u128 * *self as u128 + *c as u128) % *n as u128) as u64
    }
    fn accumulate(acc: &Self, a: &Self, b: &Self, n: &Self) -> Self {
        mul_mod_u64(*acc, a.abs_diff(*b), *n)
    }
    fn gcd_with(&self, n: &Self) -> Self {
        self.gcd(n)
    }
    fn is_unit(&self) -> bool {
        *self == 1
    }
}

impl RhoResidue for BigUint {
    fn one() -> Self {
        One::one()
    }
    fn from_u64(v: u64) -> Self {
        BigUint::from(v)
    }
    fn step(&self, c: &Self, n: &Self) -> Self {
        (self * self + c) % n
    }
    fn accumulate(acc: &Self, a: &Self, b: &Self, n: &Self) -> Self {
        let diff = if a >= b { a - b } else { b - a };
        acc * diff % n
    }
    fn gcd_with(&self, n: &Self) -> Self {
        if self.is_zero() {
            return n.clone();
        }
        Integer::gcd(self, n)
    }
    fn is_unit(&self) -> bool {
        self.is_one()
    }
}

/// Result of one rho attempt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct RhoAttempt {
    pub divisor: Option<BigUint>,
    pub iterations: u64,
    /// True when the walk stopped because the iteration or time budget ran out
    /// (as opposed to the cycle closing without a split).
    pub exhausted: bool,
}

/// One Brent walk with polynomial y^2 + `seed`, starting from y = 2.
pub(crate) fn brent_attempt(
    x: &BigUint,
    seed: u64,
    max_iterations: u64,
    deadline: Option<Instant>,
) -> RhoAttempt {
    match x.to_u64() {
        Some(small) => {
            let (d, iterations, exhausted) = walk::<u64>(&small, seed, max_iterations, deadline);
            RhoAttempt {
                divisor: d.map(BigUint::from),
                iterations,
                exhausted,
            }
        }
        None => {
            let (divisor, iterations, exhausted) =
                walk::<BigUint>(x, seed, max_iterations, deadline);
            RhoAttempt {
                divisor,
                iterations,
                exhausted,
            }
        }
    }
}

fn walk<T: RhoResidue>(
    n: &T,
    seed: u64,
    max_iterations: u64,
    deadline: Option<Instant>,
) -> (Option<T>, u64, bool) {
    let c = T::from_u64(seed);
    let mut used = 0u64;
    let mut y = T::from_u64(2);
    let mut ys = y.clone();
    let mut x = y.clone();
    let mut q = T::one();
    let mut g = T::one();
    let mut r = 1u64;

    let out_of_time = || deadline.is_some_and(|d| Instant::now() >= d);

    while g.is_unit() {
        x = y.clone();
        for _ in 0..r {
            y = y.step(&c, n);
            used += 1;
            if used >= max_iterations {
                return (None, used, true);
            }
        }
        let mut k = 0u64;
        while k < r && g.is_unit() {
            ys = y.clone();
            let batch = GCD_BATCH.min(r - k);
            for _ in 0..batch {
                y = y.step(&c, n);
                q = T::accumulate(&q, &x, &y, n);
            }
            used += batch;
            g = q.gcd_with(n);
            k += GCD_BATCH;
            if g.is_unit() && (used >= max_iterations || out_of_time()) {
                return (None, used, true);
            }
        }
        r *= 2;
    }

    if g == *n {
        // The batch overshot: replay it one step at a time.
        loop {
            ys = ys.step(&c, n);
            used += 1;
            g = T::accumulate(&T::one(), &x, &ys, n).gcd_with(n);
            if !g.is_unit() {
                break;
            }
        }
    }

    if g == *n {
        (None, used, false)
    } else {
        (Some(g), used, false)
    }
}

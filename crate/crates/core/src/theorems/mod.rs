//! Mechanical checks of the ω(M_n) <= 3 classification, the lower bounds on
//! ω(M_n), and the identities they rest on.
//!
//! Every clause is checked as a necessary condition: if ω(M_n) takes a given
//! value then the index shape and the shape of the factorization must match.
//! Nothing here claims the converse.

mod classify;
mod identities;
mod range;

pub use classify::{
    classify_index, max_omega, verify_structure, CandidateForm, ClassificationReport, Clause,
    OmegaClass, Shape,
};
pub use identities::{
    verify_identities, verify_identities_with, IdentityOptions, IdentitySuiteReport, SubSuite,
};
pub use range::{verify_range, RangeEntry, RangeReport};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::is_prime_u64;
use crate::error::{Error, Result};
use crate::structure::{divisor_list, index_factors};
use crate::{MersenneIndex, Natural};

/// q = 2·l·p + 1 together with the residue of l modulo 4.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DivisorFormCheck {
    #[serde(serialize_with = "crate::storage::ser_natural")]
    pub q: Natural,
    pub p: MersenneIndex,
    #[serde(serialize_with = "crate::storage::ser_natural")]
    pub l: Natural,
    pub l_class: u8,
    pub passes: bool,
}

/// Checks that a prime q dividing M_p has the form 2lp + 1 with
/// l = 0 or -p (mod 4).
pub fn validate_divisor_form(q: &Natural, p: MersenneIndex) -> Result<DivisorFormCheck> {
    if p < 3 || p % 2 == 0 || !is_prime_u64(p as u64) {
        return Err(Error::invalid(format!(
            "validate_divisor_form: {p} is not an odd prime"
        )));
    }
    if q.is_zero() {
        return Err(Error::DivisorForm {
            q: q.to_string(),
            p,
        });
    }
    let (l, rem) = (q - 1u32).div_rem(&BigUint::from(2 * p as u64));
    if !rem.is_zero() {
        return Err(Error::DivisorForm {
            q: q.to_string(),
            p,
        });
    }
    let l_class = (&l % 4u32).to_u8().unwrap_or(0);
    let neg_p = ((4 - p % 4) % 4) as u8;
    Ok(DivisorFormCheck {
        q: q.clone(),
        p,
        l,
        l_class,
        passes: l_class == 0 || l_class == neg_p,
    })
}

/// ω(n), Ω(n) and d(n) of an index.
pub(crate) fn small_omegas(n: MersenneIndex) -> (u32, u32, u32) {
    let f = index_factors(n);
    let omega = f.len() as u32;
    let big = f.iter().map(|&(_, e)| e).sum();
    let d = f.iter().map(|&(_, e)| e + 1).product();
    (d, omega, big)
}

/// Provable lower bound on ω(M_n) from the factorization shape of n.
///
/// 0 for n = 1, 1 for n = 2, 2 for n = 6; otherwise Ω(n) + 1 when n has at
/// least two distinct prime factors, and Ω(n) for prime powers.
pub fn lower_bound_omega(n: MersenneIndex) -> u32 {
    match n {
        0 | 1 => 0,
        2 => 1,
        6 => 2,
        _ => {
            let (_, omega, big) = small_omegas(n);
            if omega >= 2 {
                big + 1
            } else {
                big
            }
        }
    }
}

/// Ω(n) + 1: the bound as literally stated for n != 2, 6. Not valid for
/// prime powers; used only to report where it fails.
pub fn naive_omega_bound(n: MersenneIndex) -> Option<u32> {
    match n {
        0 | 1 | 2 | 6 => None,
        _ => Some(small_omegas(n).2 + 1),
    }
}

/// Number of divisors h of n with h ∉ {1, 6}: each such h contributes a
/// distinct primitive prime of M_h dividing M_n (h = 2 contributes 3).
pub fn lower_bound_divisors(n: MersenneIndex) -> u32 {
    divisor_list(n)
        .into_iter()
        .filter(|&h| h != 1 && h != 6)
        .count() as u32
}

/// d(n) - 3, the coarser divisor bound (may be negative).
pub fn weak_divisor_bound(n: MersenneIndex) -> i64 {
    small_omegas(n).0 as i64 - 3
}

/// Combined provable minimum used throughout.
pub fn min_omega(n: MersenneIndex) -> u32 {
    lower_bound_omega(n).max(lower_bound_divisors(n))
}

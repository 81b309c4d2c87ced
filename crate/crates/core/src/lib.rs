//! Multiplicative structure of Mersenne numbers M_n = 2^n - 1.
//!
//! - [`arith`]: M_n, fast reduction modulo M_n, primality, Lucas-Lehmer,
//!   multiplicative order of 2, perfect powers.
//! - [`factor`]: factorizations of M_n (cyclotomic pre-split, congruence
//!   trial division, Brent rho) and of ordinary naturals.
//! - [`structure`]: cyclotomic parts Φ_d(2) and primitive prime divisors.
//! - [`theorems`]: checks of the ω(M_n) <= 3 classification, lower bounds
//!   on ω(M_n) and the identities behind them.
//! - [`census`]: index functions d, ω, Ω and range sweeps.
//! - [`storage`]: factor cache, known-factor import, report output.
//!
//! ```
//! use mersenne_omega::{factor::{factor_mersenne, Budget}, storage::FactorCache};
//!
//! let cache = FactorCache::new();
//! let f = factor_mersenne(11, &Budget::default(), &cache).unwrap();
//! assert_eq!(f.to_string(), "23^1 * 89^1");
//! ```

pub mod arith;
pub mod census;
pub mod cli;
pub mod error;
pub mod factor;
pub mod storage;
pub mod structure;
pub mod theorems;

pub use error::{Error, Result};

/// Arbitrary-precision non-negative integer.
pub type Natural = num_bigint::BigUint;

/// Exponent n of M_n = 2^n - 1.
pub type MersenneIndex = u32;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use super::{lower_bound_divisors, lower_bound_omega, validate_divisor_form, DivisorFormCheck};
use crate::arith::{is_prime_u64, mersenne};
use crate::error::{Error, Result};
use crate::factor::{strip, Factorization};
use crate::structure::index_factors;
use crate::{MersenneIndex, Natural};

/// Structural shape of an index n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    One,
    Two,
    Special4,
    Special6,
    Special8,
    /// Odd prime.
    Prime,
    /// p^2, p odd prime.
    PrimeSquared,
    /// p^3, p odd prime.
    PrimeCubed,
    /// 2p, p odd prime other than 3.
    TwoTimesPrime,
    /// p1·p2, distinct odd primes.
    TwoDistinctPrimes,
    Other,
}

/// Value class of ω(M_n).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum OmegaClass {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "3")]
    Three,
    #[serde(rename = "more")]
    More,
}

impl OmegaClass {
    pub fn of(omega: usize) -> Option<Self> {
        match omega {
            0 => None,
            1 => Some(OmegaClass::One),
            2 => Some(OmegaClass::Two),
            3 => Some(OmegaClass::Three),
            _ => Some(OmegaClass::More),
        }
    }

    fn value(self) -> u32 {
        match self {
            OmegaClass::One => 1,
            OmegaClass::Two => 2,
            OmegaClass::Three => 3,
            OmegaClass::More => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CandidateForm {
    pub n: MersenneIndex,
    pub shape: Shape,
    /// Provable lower bound on ω(M_n).
    pub min_omega: u32,
    /// Trivial upper bound: the most distinct odd primes whose product fits
    /// under M_n.
    pub max_omega: u32,
    pub eligible_omega: Vec<OmegaClass>,
}

/// Theorem clause an (n, factorization) pair was matched against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Clause {
    T1,
    #[serde(rename = "T2_i")]
    T2I,
    #[serde(rename = "T2_ii")]
    T2Ii,
    #[serde(rename = "T2_special")]
    T2Special,
    #[serde(rename = "T3_i")]
    T3I,
    #[serde(rename = "T3_ii")]
    T3Ii,
    #[serde(rename = "T3_iii")]
    T3Iii,
    #[serde(rename = "T3_iv")]
    T3Iv,
    #[serde(rename = "T3_v")]
    T3V,
    #[serde(rename = "T3_special")]
    T3Special,
}

impl Clause {
    pub fn label(self) -> &'static str {
        match self {
            Clause::T1 => "T1",
            Clause::T2I => "T2_i",
            Clause::T2Ii => "T2_ii",
            Clause::T2Special => "T2_special",
            Clause::T3I => "T3_i",
            Clause::T3Ii => "T3_ii",
            Clause::T3Iii => "T3_iii",
            Clause::T3Iv => "T3_iv",
            Clause::T3V => "T3_v",
            Clause::T3Special => "T3_special",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassificationReport {
    pub n: MersenneIndex,
    pub omega: usize,
    pub shape: Shape,
    pub min_omega: u32,
    pub matched_clause: Option<Clause>,
    pub decomposition: String,
    pub consistent: bool,
    pub divisor_form_checks: Vec<DivisorFormCheck>,
    /// Which sub-conditions failed or which optional forms were checked.
    pub notes: Vec<String>,
}

fn shape_of(n: MersenneIndex) -> Shape {
    match n {
        1 => return Shape::One,
        2 => return Shape::Two,
        4 => return Shape::Special4,
        6 => return Shape::Special6,
        8 => return Shape::Special8,
        _ => {}
    }
    let f = index_factors(n);
    match f.as_slice() {
        [(p, 1)] if *p > 2 => Shape::Prime,
        [(p, 2)] if *p > 2 => Shape::PrimeSquared,
        [(p, 3)] if *p > 2 => Shape::PrimeCubed,
        [(2, 1), (_, 1)] => Shape::TwoTimesPrime,
        [(p, 1), (_, 1)] if *p > 2 => Shape::TwoDistinctPrimes,
        _ => Shape::Other,
    }
}

/// Largest k with the product of the first k odd primes at most M_n.
pub fn max_omega(n: MersenneIndex) -> u32 {
    let m = mersenne(n);
    let mut product = BigUint::one();
    let mut k = 0;
    let mut q = 3u64;
    loop {
        if is_prime_u64(q) {
            product *= q;
            if product > m {
                return k;
            }
            k += 1;
        }
        q += 2;
    }
}

fn theorem_allows(shape: Shape, class: OmegaClass) -> bool {
    use Shape::*;
    match class {
        OmegaClass::One => matches!(shape, Two | Prime),
        OmegaClass::Two => matches!(shape, Special4 | Special6 | Prime | PrimeSquared),
        OmegaClass::Three => matches!(
            shape,
            Special8 | Prime | TwoTimesPrime | TwoDistinctPrimes | PrimeSquared | PrimeCubed
        ),
        OmegaClass::More => true,
    }
}

/// Shape of n with the ω(M_n) values the classification theorems and the
/// lower and upper bounds leave open.
pub fn classify_index(n: MersenneIndex) -> CandidateForm {
    let shape = shape_of(n);
    let min = lower_bound_omega(n).max(lower_bound_divisors(n));
    let max = if n == 0 { 0 } else { max_omega(n) };
    let eligible_omega = [
        OmegaClass::One,
        OmegaClass::Two,
        OmegaClass::Three,
        OmegaClass::More,
    ]
    .into_iter()
    .filter(|&c| {
        let v = c.value();
        let within = if c == OmegaClass::More {
            max >= 4
        } else {
            v >= min && v <= max
        };
        within && theorem_allows(shape, c)
    })
    .collect();
    CandidateForm {
        n,
        shape,
        min_omega: min,
        max_omega: max,
        eligible_omega,
    }
}

fn subscript(v: u32) -> String {
    const DIGITS: [char; 10] = ['₀', '₁', '₂', '₃', '₄', '₅', '₆', '₇', '₈', '₉'];
    v.to_string()
        .chars()
        .map(|c| DIGITS[c.to_digit(10).unwrap_or(0) as usize])
        .collect()
}

fn superscript(v: u32) -> String {
    const DIGITS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    v.to_string()
        .chars()
        .map(|c| DIGITS[c.to_digit(10).unwrap_or(0) as usize])
        .collect()
}

/// Renders f with every prime that is itself a Mersenne number M_d, d | n,
/// written as M_d.
fn decomposition(n: MersenneIndex, f: &Factorization) -> String {
    if f.factors.is_empty() {
        return "1".to_string();
    }
    let mut pieces = Vec::new();
    for (p, e) in &f.factors {
        let bits = p.bits() as u32;
        let is_mersenne = p.count_ones() as u32 == bits && bits >= 2 && n % bits == 0;
        let mut s = if is_mersenne {
            format!("M{}", subscript(bits))
        } else {
            p.to_string()
        };
        if *e > 1 {
            s.push_str(&superscript(*e));
        }
        pieces.push(s);
    }
    // Mersenne symbols first, in index order, then the remaining primes.
    pieces.sort_by_key(|s| !s.starts_with('M'));
    pieces.join("·")
}

fn gcd_all(values: impl IntoIterator<Item = u32>) -> u32 {
    values.into_iter().fold(0, |acc, v| acc.gcd(&v))
}

/// Shared state while checking one clause.
struct ClauseCheck<'a> {
    n: MersenneIndex,
    f: &'a Factorization,
    ok: bool,
    notes: Vec<String>,
    checks: Vec<DivisorFormCheck>,
}

impl<'a> ClauseCheck<'a> {
    fn require(&mut self, cond: bool, what: impl Into<String>) {
        if !cond {
            self.ok = false;
            self.notes.push(format!("failed: {}", what.into()));
        }
    }

    /// M_p appears in f as a prime with exactly exponent 1.
    fn mersenne_prime_once(&mut self, p: MersenneIndex) {
        let mp = mersenne(p);
        let e = self.f.exponent_of(&mp);
        self.require(e == 1, format!("M_{p} = {mp} prime with exponent 1"));
    }

    fn divisor_forms(&mut self, p: MersenneIndex) {
        for q in self.f.primes() {
            match validate_divisor_form(q, p) {
                Ok(c) => {
                    if !c.passes {
                        self.require(
                            false,
                            format!("divisor form of {q} (l mod 4 = {})", c.l_class),
                        );
                    }
                    self.checks.push(c);
                }
                Err(_) => self.require(false, format!("{q} = 2lp + 1 with integral l")),
            }
        }
    }

    fn exponent_gcd_one(&mut self, exps: &[u32]) {
        self.require(
            gcd_all(exps.iter().copied()) == 1,
            format!("gcd of exponents {exps:?} is 1"),
        );
    }

    /// Exponents of f's primes other than those listed.
    fn other_exponents(&self, excluded: &[Natural]) -> Vec<u32> {
        self.f
            .factors
            .iter()
            .filter(|(p, _)| !excluded.contains(p))
            .map(|(_, e)| *e)
            .collect()
    }
}

/// Checks a complete factorization of M_n against the clause of the
/// classification theorems its ω and index shape select.
pub fn verify_structure(n: MersenneIndex, f: &Factorization) -> Result<ClassificationReport> {
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
    let form = classify_index(n);
    let omega = f.omega();
    let mut cc = ClauseCheck {
        n,
        f,
        ok: true,
        notes: Vec::new(),
        checks: Vec::new(),
    };
    let index_primes: Vec<MersenneIndex> = index_factors(n).iter().map(|&(p, _)| p).collect();
    let all_exps: Vec<u32> = f.exponents().collect();

    let clause = match (omega, form.shape) {
        (0, _) => {
            cc.require(n == 1, "M_n = 1 only for n = 1");
            None
        }
        (1, Shape::Two) => {
            cc.require(all_exps == [1], "M_2 = 3 prime");
            Some(Clause::T1)
        }
        (1, Shape::Prime) => {
            cc.require(all_exps == [1], "M_n prime (not a proper prime power)");
            cc.divisor_forms(n);
            Some(Clause::T1)
        }
        (2, Shape::Special4) | (2, Shape::Special6) => Some(Clause::T2Special),
        (2, Shape::PrimeSquared) => {
            cc.mersenne_prime_once(index_primes[0]);
            Some(Clause::T2I)
        }
        (2, Shape::Prime) => {
            cc.exponent_gcd_one(&all_exps);
            cc.divisor_forms(n);
            Some(Clause::T2Ii)
        }
        (3, Shape::Special8) => Some(Clause::T3Special),
        (3, Shape::TwoTimesPrime) => {
            let p1 = index_primes[1];
            let three = BigUint::from(3u32);
            cc.require(f.exponent_of(&three) == 1, "3 appears to exponent 1");
            cc.mersenne_prime_once(p1);
            Some(Clause::T3I)
        }
        (3, Shape::TwoDistinctPrimes) => {
            let (p1, p2) = (index_primes[0], index_primes[1]);
            let (m1, m2) = (mersenne(p1), mersenne(p2));
            let s = f.exponent_of(&m1);
            let t = f.exponent_of(&m2);
            cc.require(s >= 1, format!("M_{p1} prime and present"));
            cc.require(t >= 1, format!("M_{p2} prime and present"));
            let r = cc.other_exponents(&[m1.clone(), m2]);
            let mut exps = vec![s, t];
            exps.extend(r);
            cc.exponent_gcd_one(&exps);
            if !(BigUint::from(p2) % &m1).is_zero() {
                cc.notes
                    .push(format!("strict form checked: M_{p1} does not divide {p2}"));
                cc.require(s == 1 && t == 1, "s = t = 1");
            }
            Some(Clause::T3Ii)
        }
        (3, Shape::PrimeSquared) => {
            let p1 = index_primes[0];
            let mp = mersenne(p1);
            if f.exponent_of(&mp) == 1 {
                cc.notes.push(format!("form M_{p1}·q^t·k^r"));
            } else {
                // M_{p1} = p^s q^t with gcd(s, t) = 1 and the same
                // exponents in M_n
                let mut inner = mp.clone();
                let mut inner_exps = Vec::new();
                let mut matches_outer = true;
                for (q, e) in &f.factors {
                    let s = strip(&mut inner, q);
                    if s > 0 {
                        inner_exps.push(s);
                        matches_outer &= s == *e;
                    }
                }
                cc.notes
                    .push(format!("form p^s·q^t·k^r with M_{p1} = p^s·q^t"));
                cc.require(
                    inner.is_one() && inner_exps.len() == 2,
                    format!("ω(M_{p1}) = 2"),
                );
                cc.require(
                    matches_outer,
                    format!("exponents of M_{p1}'s primes unchanged in M_n"),
                );
                cc.exponent_gcd_one(&inner_exps);
            }
            Some(Clause::T3Iii)
        }
        (3, Shape::PrimeCubed) => {
            let p1 = index_primes[0];
            let mp = mersenne(p1);
            cc.mersenne_prime_once(p1);
            let rest = cc.other_exponents(&[mp]);
            cc.exponent_gcd_one(&rest);
            Some(Clause::T3Iv)
        }
        (3, Shape::Prime) => {
            cc.exponent_gcd_one(&all_exps);
            cc.divisor_forms(n);
            Some(Clause::T3V)
        }
        (1..=3, shape) => {
            cc.require(
                false,
                format!("ω(M_n) = {omega} is impossible for shape {shape:?}"),
            );
            None
        }
        _ => None,
    };

    let in_eligible = match OmegaClass::of(omega) {
        Some(c) => form.eligible_omega.contains(&c),
        None => n == 1,
    };
    cc.require(
        in_eligible,
        format!("ω = {omega} eligible for n = {}", cc.n),
    );
    cc.require(
        omega as u32 >= form.min_omega,
        format!("ω >= min_omega = {}", form.min_omega),
    );

    Ok(ClassificationReport {
        n,
        omega,
        shape: form.shape,
        min_omega: form.min_omega,
        matched_clause: clause,
        decomposition: decomposition(n, f),
        consistent: cc.ok,
        divisor_form_checks: cc.checks,
        notes: cc.notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::{factor_mersenne, Budget};
    use crate::storage::FactorCache;

    fn fact(n: MersenneIndex, primes: &[u64]) -> Factorization {
        let ps: Vec<Natural> = primes.iter().map(|&p| BigUint::from(p)).collect();
        Factorization::from_primes(&mersenne(n), ps.iter())
    }

    #[test]
    fn classify_examples() {
        let c = classify_index(15);
        assert_eq!(c.shape, Shape::TwoDistinctPrimes);
        assert_eq!(c.min_omega, 3);
        assert_eq!(c.eligible_omega, vec![OmegaClass::Three, OmegaClass::More]);

        let c = classify_index(30);
        assert_eq!(c.shape, Shape::Other);
        assert_eq!(c.min_omega, 6);
        assert_eq!(c.eligible_omega, vec![OmegaClass::More]);

        let c = classify_index(4);
        assert_eq!(c.shape, Shape::Special4);
        assert_eq!(c.eligible_omega, vec![OmegaClass::Two]);
    }

    #[test]
    fn shapes() {
        assert_eq!(shape_of(1), Shape::One);
        assert_eq!(shape_of(2), Shape::Two);
        assert_eq!(shape_of(3), Shape::Prime);
        assert_eq!(shape_of(9), Shape::PrimeSquared);
        assert_eq!(shape_of(27), Shape::PrimeCubed);
        assert_eq!(shape_of(10), Shape::TwoTimesPrime);
        assert_eq!(shape_of(15), Shape::TwoDistinctPrimes);
        assert_eq!(shape_of(16), Shape::Other);
        assert_eq!(shape_of(12), Shape::Other);
        assert_eq!(shape_of(81), Shape::Other);
    }

    #[test]
    fn max_omega_small() {
        assert_eq!(max_omega(1), 0);
        assert_eq!(max_omega(2), 1);
        assert_eq!(max_omega(4), 2);
        assert_eq!(max_omega(6), 2);
        assert_eq!(max_omega(8), 3);
    }

    #[test]
    fn structure_examples() {
        let r = verify_structure(10, &fact(10, &[3, 11, 31])).unwrap();
        assert_eq!(r.matched_clause, Some(Clause::T3I));
        assert_eq!(r.decomposition, "M₂·M₅·11");
        assert!(r.consistent, "{:?}", r.notes);

        let r = verify_structure(9, &fact(9, &[7, 73])).unwrap();
        assert_eq!(r.matched_clause, Some(Clause::T2I));
        assert_eq!(r.decomposition, "M₃·73");
        assert!(r.consistent);

        let r = verify_structure(29, &fact(29, &[233, 1103, 2089])).unwrap();
        assert_eq!(r.matched_clause, Some(Clause::T3V));
        assert_eq!(r.divisor_form_checks.len(), 3);
        assert!(r.divisor_form_checks.iter().all(|c| c.passes));
        assert!(r.consistent);

        let r = verify_structure(21, &fact(21, &[7, 127, 337])).unwrap();
        assert_eq!(r.matched_clause, Some(Clause::T3Ii));
        assert_eq!(r.decomposition, "M₃²·M₇·337");
        assert!(r.consistent);

        let r = verify_structure(6, &fact(6, &[3, 7])).unwrap();
        assert_eq!(r.matched_clause, Some(Clause::T2Special));
        assert!(r.consistent);
    }

    #[test]
    fn structure_rejects_partial_and_mismatch() {
        assert!(verify_structure(29, &fact(29, &[233])).is_err());
        assert!(verify_structure(11, &fact(29, &[233, 1103, 2089])).is_err());
    }

    #[test]
    fn all_small_indices_are_consistent() {
        let cache = FactorCache::new();
        for n in 1..=40 {
            let f = factor_mersenne(n, &Budget::default(), &cache).unwrap();
            let r = verify_structure(n, &f).unwrap();
            assert!(r.consistent, "n={n}: {:?}", r.notes);
        }
    }
}

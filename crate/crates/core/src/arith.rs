//! Exact integer arithmetic: p-adic valuations, binomial coefficients at
//! prime-power top index, and the floor bounds used by the capability
//! criteria. Everything is integer-only; logarithms are taken by repeated
//! multiplication.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Exact power of a prime dividing an integer. The valuation of zero is
/// [`Valuation::Infinity`], which compares above every finite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(u32),
    Infinity,
}

impl Valuation {
    pub fn finite(self) -> Option<u32> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinity => None,
        }
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
            (Valuation::Finite(_), Valuation::Infinity) => Ordering::Less,
            (Valuation::Infinity, Valuation::Finite(_)) => Ordering::Greater,
            (Valuation::Infinity, Valuation::Infinity) => Ordering::Equal,
        }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinity => f.write_str("inf"),
        }
    }
}

/// Trial-division primality; inputs here are tiny.
pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn check_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

/// `p^n`, failing on overflow.
pub fn prime_power(p: u64, n: u32) -> Result<u64> {
    p.checked_pow(n).ok_or_else(|| Error::OutOfRange {
        what: "prime power exponent",
        value: n as i64,
        range: format!("p^n must fit in 64 bits for p = {p}"),
    })
}

/// The exact `p`-divisor of `a`.
pub fn vp(a: u64, p: u64) -> Result<Valuation> {
    check_prime(p)?;
    if a == 0 {
        return Ok(Valuation::Infinity);
    }
    let mut a = a;
    let mut v = 0;
    while a % p == 0 {
        a /= p;
        v += 1;
    }
    Ok(Valuation::Finite(v))
}

/// Valuation of an arbitrary-precision integer.
pub fn vp_big(a: &BigUint, p: u64) -> Valuation {
    if a.is_zero() {
        return Valuation::Infinity;
    }
    let p = BigUint::from(p);
    let mut a = a.clone();
    let mut v = 0;
    while (&a % &p).is_zero() {
        a /= &p;
        v += 1;
    }
    Valuation::Finite(v)
}

/// `floor(log_p(m))` for `m >= 1`, by repeated multiplication.
pub fn floor_log(m: u64, base: u64) -> u32 {
    assert!(m >= 1 && base >= 2, "floor_log needs m >= 1 and base >= 2");
    let mut d = 0;
    let mut power: u64 = base;
    while power <= m {
        d += 1;
        match power.checked_mul(base) {
            Some(next) => power = next,
            None => break,
        }
    }
    d
}

/// Exact binomial coefficient.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `r (r - 1) / 2` for any integer `r`, the convention used by the
/// commutator power identities.
pub fn choose2(r: i64) -> i64 {
    r * (r - 1) / 2
}

/// Binomial coefficient `C(a, j)` of a signed top index as a signed integer.
pub fn binomial_signed(a: i64, j: u32) -> i128 {
    let mut acc: i128 = 1;
    for i in 0..j as i128 {
        acc = acc * (a as i128 - i) / (i + 1);
    }
    acc
}

fn check_top_range(p: u64, n: u32, a: u64, what: &'static str) -> Result<u64> {
    let top = prime_power(p, n)?;
    if a == 0 || a > top {
        return Err(Error::OutOfRange {
            what,
            value: a as i64,
            range: format!("(0, {top}]"),
        });
    }
    Ok(top)
}

/// Valuation of `C(p^n, a)` for `0 < a <= p^n`, which equals `n - vp(a)`.
pub fn kummer_binom_val(p: u64, n: u32, a: u64) -> Result<u32> {
    check_prime(p)?;
    check_top_range(p, n, a, "a")?;
    let va = vp(a, p)?.finite().expect("a is positive");
    Ok(n - va)
}

/// Largest `e` such that every integer combination
/// `a_1 C(p^n, 1) + ... + a_m C(p^n, m)` is divisible by `p^e`; this is
/// `n - floor(log_p m)`.
pub fn binom_sum_bound(p: u64, n: u32, m: u64) -> Result<u32> {
    check_prime(p)?;
    check_top_range(p, n, m, "m")?;
    Ok(n - floor_log(m, p))
}

/// Maximum over `1 <= s <= k` of `floor((k - s)/(n - 1)) + floor(log_n(s + 1))`
/// together with a maximizing `s`.
///
/// The maximum is `floor(k / (n - 1))`. When `k >= n - 1` the reported
/// argument is `n - 1`, which always attains it; otherwise every `s` gives
/// zero and the smallest one, `s = 1`, is returned.
pub fn hall_bound_max(k: u64, n: u64) -> Result<(u64, u64)> {
    if k == 0 || n < 2 {
        return Err(Error::InvalidParameter(format!(
            "hall_bound_max needs k >= 1 and n >= 2 (got k = {k}, n = {n})"
        )));
    }
    let max = k / (n - 1);
    let arg = if k >= n - 1 { n - 1 } else { 1 };
    Ok((max, arg))
}

/// `floor((k - 1) / (p - 1))`: how far the top generator order may exceed
/// the next one in a capable group of class `k`.
pub fn capability_slack(p: u64, k: u64) -> u64 {
    debug_assert!(p >= 2 && k >= 1);
    (k - 1) / (p - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valuation_examples() {
        assert_eq!(vp(0, 5).unwrap(), Valuation::Infinity);
        assert_eq!(vp(1, 3).unwrap(), Valuation::Finite(0));
        assert_eq!(vp(72, 2).unwrap(), Valuation::Finite(3));
        assert_eq!(vp(10, 4), Err(Error::NotPrime(4)));
        assert_eq!(vp(10, 1), Err(Error::NotPrime(1)));
    }

    #[test]
    fn infinity_is_above_everything() {
        assert!(Valuation::Infinity > Valuation::Finite(u32::MAX));
        assert!(Valuation::Finite(2) < Valuation::Finite(3));
    }

    #[test]
    fn kummer_examples() {
        assert_eq!(kummer_binom_val(2, 3, 4).unwrap(), 1);
        assert_eq!(kummer_binom_val(3, 2, 3).unwrap(), 1);
        assert_eq!(kummer_binom_val(5, 1, 5).unwrap(), 0);
        assert!(kummer_binom_val(2, 3, 0).is_err());
        assert!(kummer_binom_val(2, 3, 9).is_err());
    }

    #[test]
    fn binom_sum_examples() {
        assert_eq!(binom_sum_bound(2, 4, 3).unwrap(), 3);
        assert_eq!(binom_sum_bound(3, 2, 1).unwrap(), 2);
        assert_eq!(binom_sum_bound(2, 3, 8).unwrap(), 0);
        assert!(binom_sum_bound(3, 2, 10).is_err());
    }

    #[test]
    fn hall_bound_examples() {
        assert_eq!(hall_bound_max(5, 3).unwrap(), (2, 2));
        assert_eq!(hall_bound_max(1, 2).unwrap(), (1, 1));
        assert_eq!(hall_bound_max(2, 5).unwrap().0, 0);
        assert!(hall_bound_max(0, 2).is_err());
    }

    #[test]
    fn slack_examples() {
        assert_eq!(capability_slack(3, 2), 0);
        assert_eq!(capability_slack(2, 2), 1);
        assert_eq!(capability_slack(2, 4), 3);
    }

    #[test]
    fn floor_log_by_multiplication() {
        assert_eq!(floor_log(1, 2), 0);
        assert_eq!(floor_log(7, 2), 2);
        assert_eq!(floor_log(8, 2), 3);
        assert_eq!(floor_log(26, 3), 2);
        assert_eq!(floor_log(27, 3), 3);
        assert_eq!(floor_log(u64::MAX, 2), 63);
    }

    // Direct evaluation of the maximized expression.
    fn hall_bound_brute(k: u64, n: u64) -> (u64, Vec<u64>) {
        let vals: Vec<u64> = (1..=k)
            .map(|s| (k - s) / (n - 1) + floor_log(s + 1, n) as u64)
            .collect();
        let max = *vals.iter().max().unwrap();
        let args = (1..=k).filter(|&s| vals[(s - 1) as usize] == max).collect();
        (max, args)
    }

    #[test]
    fn hall_bound_matches_direct_maximization() {
        for k in 1..40 {
            for n in 2..12 {
                let (max, arg) = hall_bound_max(k, n).unwrap();
                let (bmax, bargs) = hall_bound_brute(k, n);
                assert_eq!(max, bmax, "k={k} n={n}");
                assert!(bargs.contains(&arg), "k={k} n={n} arg={arg}");
            }
        }
    }

    #[test]
    fn kummer_matches_exact_binomials() {
        for &(p, n) in &[(2u64, 5u32), (3, 3), (5, 2), (7, 2)] {
            let top = p.pow(n);
            for a in 1..=top {
                let exact = vp_big(&binomial(top, a), p).finite().unwrap();
                assert_eq!(kummer_binom_val(p, n, a).unwrap(), exact);
            }
        }
    }

    #[test]
    fn binom_sum_matches_min_valuation() {
        // The gcd of C(p^n,1..m) is p to the minimum of their valuations.
        for &(p, n) in &[(2u64, 5u32), (3, 3), (5, 2)] {
            let top = p.pow(n);
            let mut least = u32::MAX;
            for m in 1..=top {
                least = least.min(vp_big(&binomial(top, m), p).finite().unwrap());
                assert_eq!(binom_sum_bound(p, n, m).unwrap(), least, "p={p} n={n} m={m}");
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn valuation_divides_exactly(a in 1u64..1_000_000, pi in 0usize..5) {
            let p = [2u64, 3, 5, 7, 11][pi];
            let v = vp(a, p).unwrap().finite().unwrap();
            let q = p.pow(v);
            proptest::prop_assert_eq!(a % q, 0);
            proptest::prop_assert_ne!((a / q) % p, 0);
        }
    }

    #[test]
    fn signed_binomials() {
        assert_eq!(choose2(-3), 6);
        assert_eq!(binomial_signed(-2, 2), 3);
        assert_eq!(binomial_signed(8, 3), 56);
        assert_eq!(binomial(70, 0), BigUint::one());
    }
}

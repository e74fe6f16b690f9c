//! Small helpers around `BigRational` used wherever the moment and
//! recurrence pipeline has to stay exact.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Pow, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn factorial_rat(n: usize) -> Rational {
    Rational::from_integer(factorial(n))
}

/// Exact binary value of a finite float.
pub fn from_f64(x: f64) -> Rational {
    Rational::from_float(x).expect("finite float")
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // to_f64 only fails on overflow; keep the sign.
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Rational approximation of `x` with `digits` decimal places: floor of the
/// square root at scale `10^digits`.
pub fn sqrt_fixed(x: &Rational, digits: u32) -> BigInt {
    assert!(!x.is_negative(), "sqrt of negative rational");
    let scale: BigInt = BigInt::from(10u32).pow(2 * digits);
    let scaled = (x.numer() * &scale) / x.denom();
    scaled.sqrt()
}

pub fn pow10(d: u32) -> BigInt {
    BigInt::from(10u32).pow(d)
}

/// True if `r` is an integer.
pub fn is_integer(r: &Rational) -> bool {
    r.denom().is_one()
}

pub fn rat_pow(r: &Rational, k: usize) -> Rational {
    let mut out = Rational::one();
    for _ in 0..k {
        out *= r;
    }
    out
}

pub fn is_zero(r: &Rational) -> bool {
    r.is_zero()
}

//! Exact scalars: arbitrary-precision rationals and the real quadratic field
//! Q(sqrt 2).
//!
//! `QSqrt2` represents `a + b*sqrt(2)` with rational `a`, `b`.  This is the
//! smallest field containing every structure constant that appears in the
//! shipped fusion data, so all algebraic checks run exactly; `to_f64` is the
//! only lossy operation.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Arbitrary-precision rational, always in reduced form with positive
/// denominator (maintained by `num_rational`).
pub type Rational = BigRational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("malformed rational literal {0:?}")]
    BadLiteral(String),
}

/// Parses `"p/q"` or `"p"` into a reduced rational.
pub fn parse_rational(s: &str) -> Result<Rational, ScalarError> {
    let t = s.trim();
    if t.is_empty() {
        return Err(ScalarError::BadLiteral(s.to_string()));
    }
    match BigRational::from_str(t) {
        Ok(r) => Ok(r),
        Err(_) => Err(ScalarError::BadLiteral(s.to_string())),
    }
}

/// Renders a rational as `"p"` or `"p/q"`; inverse of [`parse_rational`] on
/// canonical forms, so save/load round-trips are bit-exact.
pub fn rational_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Converts a rational to the nearest `f64` without overflowing through
/// intermediate integer-to-float conversions.
///
/// The quotient is computed with at least 64 significant bits and scaled by a
/// power of two, so the result is within 2 ulp of the exact value (one
/// rounding in the big-integer division, one in the final scaling).
pub fn rational_to_f64(r: &Rational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    let num = r.numer().abs().to_biguint().expect("abs is nonnegative");
    let den = r.denom().abs().to_biguint().expect("abs is nonnegative");
    let shift: i64 = 64 - (num.bits() as i64 - den.bits() as i64);
    // q = floor(num * 2^shift / den) has between 63 and 66 bits.
    let q: BigUint = if shift >= 0 {
        (num << shift as u64) / den
    } else {
        num / (den << (-shift) as u64)
    };
    let mantissa = q.to_f64().unwrap_or(f64::INFINITY);
    // mantissa * 2^{-shift}, in two factors so |exponent| stays in range.
    let (h1, h2) = (-shift / 2, -shift + shift / 2);
    sign * mantissa * pow2(h1) * pow2(h2)
}

fn pow2(e: i64) -> f64 {
    if e >= 1024 {
        f64::INFINITY
    } else if e <= -1075 {
        0.0
    } else {
        2f64.powi(e as i32)
    }
}

/// Element `a + b*sqrt(2)` of the field Q(sqrt 2).
///
/// Both coordinates are reduced rationals, so equality of values coincides
/// with structural equality (1 and sqrt(2) are linearly independent over Q).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QSqrt2 {
    pub a: Rational,
    pub b: Rational,
}

impl QSqrt2 {
    pub fn new(a: Rational, b: Rational) -> Self {
        QSqrt2 { a, b }
    }

    pub fn zero() -> Self {
        QSqrt2::new(Rational::zero(), Rational::zero())
    }

    pub fn one() -> Self {
        QSqrt2::new(Rational::one(), Rational::zero())
    }

    /// The element `sqrt(2)`.
    pub fn sqrt2() -> Self {
        QSqrt2::new(Rational::zero(), Rational::one())
    }

    pub fn from_rational(a: Rational) -> Self {
        QSqrt2::new(a, Rational::zero())
    }

    pub fn from_int(n: i64) -> Self {
        QSqrt2::from_rational(Rational::from_integer(BigInt::from(n)))
    }

    /// `p/q` as an element with zero sqrt(2) part.
    pub fn from_frac(p: i64, q: i64) -> Self {
        assert!(q != 0, "zero denominator");
        QSqrt2::from_rational(Rational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }

    /// Multiplicative inverse: `(a - b*sqrt2) / (a^2 - 2 b^2)`.
    ///
    /// The norm `a^2 - 2 b^2` vanishes only at zero because sqrt(2) is
    /// irrational.
    pub fn inverse(&self) -> Result<QSqrt2, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        let norm = &self.a * &self.a - Rational::from_integer(BigInt::from(2)) * &self.b * &self.b;
        debug_assert!(!norm.is_zero());
        Ok(QSqrt2::new(&self.a / &norm, -&self.b / &norm))
    }

    pub fn checked_div(&self, rhs: &QSqrt2) -> Result<QSqrt2, ScalarError> {
        Ok(self.clone() * rhs.inverse()?)
    }

    /// Nearest double; accurate to a couple of ulp (each coordinate converts
    /// within 2 ulp and the final fused combination adds at most one rounding).
    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.a) + rational_to_f64(&self.b) * std::f64::consts::SQRT_2
    }

    /// Exact sign of the real number `a + b*sqrt(2)`.
    pub fn signum(&self) -> i32 {
        let sa = sign_i32(&self.a);
        let sb = sign_i32(&self.b);
        if sb == 0 {
            return sa;
        }
        if sa == 0 {
            return sb;
        }
        if sa == sb {
            return sa;
        }
        // Opposite signs: compare a^2 with 2 b^2; sign follows the larger.
        let a2 = &self.a * &self.a;
        let b22 = Rational::from_integer(BigInt::from(2)) * &self.b * &self.b;
        match a2.cmp(&b22) {
            std::cmp::Ordering::Greater => sa,
            std::cmp::Ordering::Less => sb,
            std::cmp::Ordering::Equal => 0,
        }
    }
}

fn sign_i32(r: &Rational) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_negative() {
        -1
    } else {
        1
    }
}

impl fmt::Display for QSqrt2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", rational_string(&self.a));
        }
        if self.a.is_zero() {
            return write!(f, "{}*sqrt2", rational_string(&self.b));
        }
        write!(
            f,
            "{} + {}*sqrt2",
            rational_string(&self.a),
            rational_string(&self.b)
        )
    }
}

impl Add for QSqrt2 {
    type Output = QSqrt2;
    fn add(self, rhs: QSqrt2) -> QSqrt2 {
        QSqrt2::new(self.a + rhs.a, self.b + rhs.b)
    }
}

impl Sub for QSqrt2 {
    type Output = QSqrt2;
    fn sub(self, rhs: QSqrt2) -> QSqrt2 {
        QSqrt2::new(self.a - rhs.a, self.b - rhs.b)
    }
}

impl Neg for QSqrt2 {
    type Output = QSqrt2;
    fn neg(self) -> QSqrt2 {
        QSqrt2::new(-self.a, -self.b)
    }
}

impl Mul for QSqrt2 {
    type Output = QSqrt2;
    fn mul(self, rhs: QSqrt2) -> QSqrt2 {
        let two = Rational::from_integer(BigInt::from(2));
        QSqrt2::new(
            &self.a * &rhs.a + two * &self.b * &rhs.b,
            &self.a * &rhs.b + &self.b * &rhs.a,
        )
    }
}

/// Panicking division, for contexts where the divisor is known nonzero; use
/// [`QSqrt2::checked_div`] on untrusted data.
impl Div for QSqrt2 {
    type Output = QSqrt2;
    fn div(self, rhs: QSqrt2) -> QSqrt2 {
        self.checked_div(&rhs).expect("division by zero")
    }
}

impl<'a> Add<&'a QSqrt2> for QSqrt2 {
    type Output = QSqrt2;
    fn add(self, rhs: &'a QSqrt2) -> QSqrt2 {
        self + rhs.clone()
    }
}

impl<'a> Mul<&'a QSqrt2> for QSqrt2 {
    type Output = QSqrt2;
    fn mul(self, rhs: &'a QSqrt2) -> QSqrt2 {
        self * rhs.clone()
    }
}

#[derive(Serialize, Deserialize)]
struct QSqrt2Repr {
    a: String,
    b: String,
}

impl Serialize for QSqrt2 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        QSqrt2Repr {
            a: rational_string(&self.a),
            b: rational_string(&self.b),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for QSqrt2 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = QSqrt2Repr::deserialize(deserializer)?;
        let a = parse_rational(&repr.a).map_err(D::Error::custom)?;
        let b = parse_rational(&repr.b).map_err(D::Error::custom)?;
        Ok(QSqrt2::new(a, b))
    }
}

/// Convenience constructor used across the crate.
pub fn rat(p: i64, q: i64) -> Rational {
    assert!(q != 0, "zero denominator");
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Integer rational.
pub fn rint(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn square_of_half_sqrt2_is_half() {
        let x = QSqrt2::new(rint(0), rat(1, 2));
        assert_eq!(x.clone() * x, QSqrt2::from_rational(rat(1, 2)));
    }

    #[test]
    fn conjugate_product_is_minus_one() {
        let p = QSqrt2::new(rint(1), rint(1));
        let q = QSqrt2::new(rint(1), rint(-1));
        assert_eq!(p * q, QSqrt2::from_int(-1));
    }

    #[test]
    fn inverse_of_sqrt2() {
        let x = QSqrt2::sqrt2();
        assert_eq!(x.inverse().unwrap(), QSqrt2::new(rint(0), rat(1, 2)));
    }

    #[test]
    fn inverse_of_zero_fails() {
        assert_eq!(QSqrt2::zero().inverse(), Err(ScalarError::DivisionByZero));
        assert_eq!(
            QSqrt2::one().checked_div(&QSqrt2::zero()),
            Err(ScalarError::DivisionByZero)
        );
    }

    #[test]
    fn half_sqrt2_to_float() {
        let x = QSqrt2::new(rint(0), rat(1, 2));
        assert!((x.to_f64() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn rational_to_f64_matches_known_values() {
        assert_eq!(rational_to_f64(&rat(1, 2)), 0.5);
        assert_eq!(rational_to_f64(&rat(-3, 4)), -0.75);
        assert!((rational_to_f64(&rat(1, 3)) - 1.0 / 3.0).abs() < 1e-16);
        // Huge but cancelling magnitudes must not overflow to NaN.
        let big = BigInt::from(10).pow(400);
        let r = Rational::new(big.clone(), BigInt::from(3) * big);
        assert!((rational_to_f64(&r) - 1.0 / 3.0).abs() < 1e-16);
        // Genuinely out-of-range values saturate.
        let huge = Rational::from_integer(BigInt::from(10).pow(400));
        assert_eq!(rational_to_f64(&huge), f64::INFINITY);
        assert_eq!(rational_to_f64(&huge.recip()), 0.0);
    }

    #[test]
    fn literal_round_trip() {
        for s in ["0", "-7", "3/8", "-22/7"] {
            let r = parse_rational(s).unwrap();
            assert_eq!(rational_string(&r), s);
        }
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn serde_object_form() {
        let x = QSqrt2::new(rat(1, 2), rat(-1, 2));
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, r#"{"a":"1/2","b":"-1/2"}"#);
        let y: QSqrt2 = serde_json::from_str(&s).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn exact_sign() {
        // 3/2 - sqrt(2) > 0, 7/5 - sqrt(2) < 0, straddling p/q approximants.
        assert_eq!(QSqrt2::new(rat(3, 2), rint(-1)).signum(), 1);
        assert_eq!(QSqrt2::new(rat(7, 5), rint(-1)).signum(), -1);
        assert_eq!(QSqrt2::zero().signum(), 0);
        assert_eq!(QSqrt2::sqrt2().signum(), 1);
    }

    fn arb_rational() -> impl Strategy<Value = Rational> {
        (-40i64..=40, 1i64..=12).prop_map(|(p, q)| rat(p, q))
    }

    fn arb_q2() -> impl Strategy<Value = QSqrt2> {
        (arb_rational(), arb_rational()).prop_map(|(a, b)| QSqrt2::new(a, b))
    }

    proptest! {
        #[test]
        fn field_laws(x in arb_q2(), y in arb_q2(), z in arb_q2()) {
            let assoc_add = (x.clone() + y.clone()) + z.clone()
                == x.clone() + (y.clone() + z.clone());
            prop_assert!(assoc_add);
            prop_assert_eq!(x.clone() + y.clone(), y.clone() + x.clone());
            let assoc_mul = (x.clone() * y.clone()) * z.clone()
                == x.clone() * (y.clone() * z.clone());
            prop_assert!(assoc_mul);
            prop_assert_eq!(x.clone() * y.clone(), y.clone() * x.clone());
            let distrib = x.clone() * (y.clone() + z.clone())
                == x.clone() * y.clone() + x.clone() * z.clone();
            prop_assert!(distrib);
            prop_assert_eq!(x.clone() + QSqrt2::zero(), x.clone());
            prop_assert_eq!(x.clone() * QSqrt2::one(), x.clone());
            prop_assert_eq!(x.clone() + (-x.clone()), QSqrt2::zero());
        }

        #[test]
        fn inverses_cancel(x in arb_q2()) {
            if !x.is_zero() {
                prop_assert_eq!(x.clone() * x.inverse().unwrap(), QSqrt2::one());
            }
        }

        #[test]
        fn to_f64_tracks_value(x in arb_q2()) {
            let expect = rational_to_f64(&x.a) + rational_to_f64(&x.b) * std::f64::consts::SQRT_2;
            prop_assert!((x.to_f64() - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
        }
    }
}

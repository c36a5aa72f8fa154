//! Exact scalars: rationals and elements of real quadratic fields `Q(sqrt d)`.
//!
//! Values are kept in a canonical form, so structural equality is value
//! equality. A quadratic element with zero irrational part is always stored as
//! a plain rational.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("cannot parse scalar `{0}`")]
    Parse(String),
    #[error("radicand {0} is not a square-free integer greater than 1")]
    BadRadicand(u32),
    #[error("cannot parse scalar field `{0}`")]
    FieldParse(String),
    #[error("scalar {value} does not lie in {field}")]
    OutsideField { value: String, field: String },
    #[error("no supported field contains both {0} and {1}")]
    UnsupportedFieldPair(String, String),
}

/// An exact element of `Q` or of some `Q(sqrt d)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ScalarValue {
    Rational(BigRational),
    /// `a + b*sqrt(d)` with `b != 0` and `d` square-free.
    QuadExt { a: BigRational, b: BigRational, d: u32 },
}

fn is_square_free(d: u32) -> bool {
    if d < 2 {
        return false;
    }
    let mut p = 2u32;
    while p.saturating_mul(p) <= d {
        if d.is_multiple_of(p * p) {
            return false;
        }
        p += 1;
    }
    true
}

impl ScalarValue {
    pub fn zero() -> Self {
        ScalarValue::Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        ScalarValue::Rational(BigRational::one())
    }

    pub fn int(n: i64) -> Self {
        ScalarValue::Rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// `num/den`; panics if `den` is zero.
    pub fn ratio(num: i64, den: i64) -> Self {
        ScalarValue::Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn quad(a: BigRational, b: BigRational, d: u32) -> Result<Self, ScalarError> {
        if !is_square_free(d) {
            return Err(ScalarError::BadRadicand(d));
        }
        Ok(Self::quad_unchecked(a, b, d))
    }

    /// `sqrt(d)` itself.
    pub fn sqrt(d: u32) -> Result<Self, ScalarError> {
        Self::quad(BigRational::zero(), BigRational::one(), d)
    }

    fn quad_unchecked(a: BigRational, b: BigRational, d: u32) -> Self {
        if b.is_zero() {
            ScalarValue::Rational(a)
        } else {
            ScalarValue::QuadExt { a, b, d }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ScalarValue::Rational(r) if r.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, ScalarValue::Rational(r) if r.is_one())
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            ScalarValue::Rational(r) => Some(r),
            ScalarValue::QuadExt { .. } => None,
        }
    }

    pub fn radicand(&self) -> Option<u32> {
        match self {
            ScalarValue::Rational(_) => None,
            ScalarValue::QuadExt { d, .. } => Some(*d),
        }
    }

    /// The smallest supported field containing this value.
    pub fn field(&self) -> ScalarField {
        match self.radicand() {
            None => ScalarField::Rationals,
            Some(d) => ScalarField::Quadratic(d),
        }
    }

    pub fn signum(&self) -> Ordering {
        let sign = |r: &BigRational| r.cmp(&BigRational::zero());
        match self {
            ScalarValue::Rational(r) => sign(r),
            ScalarValue::QuadExt { a, b, d } => {
                let (sa, sb) = (sign(a), sign(b));
                if sa == Ordering::Equal || sa == sb {
                    return sb;
                }
                let a2 = a * a;
                let b2d = b * b * BigRational::from_integer(BigInt::from(*d));
                if a2 > b2d {
                    sa
                } else {
                    sb
                }
            }
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.signum() == Ordering::Less
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn recip(&self) -> Option<Self> {
        match self {
            ScalarValue::Rational(r) if r.is_zero() => None,
            ScalarValue::Rational(r) => Some(ScalarValue::Rational(r.recip())),
            ScalarValue::QuadExt { a, b, d } => {
                let norm = a * a - b * b * BigRational::from_integer(BigInt::from(*d));
                Some(Self::quad_unchecked(a / &norm, -(b / &norm), *d))
            }
        }
    }

    fn parts(&self) -> (BigRational, BigRational, Option<u32>) {
        match self {
            ScalarValue::Rational(r) => (r.clone(), BigRational::zero(), None),
            ScalarValue::QuadExt { a, b, d } => (a.clone(), b.clone(), Some(*d)),
        }
    }
}

fn common_radicand(x: Option<u32>, y: Option<u32>) -> Option<u32> {
    match (x, y) {
        (Some(p), Some(q)) if p != q => {
            panic!("arithmetic across different quadratic fields Q(sqrt {p}) and Q(sqrt {q})")
        }
        (Some(p), _) | (_, Some(p)) => Some(p),
        (None, None) => None,
    }
}

fn build(a: BigRational, b: BigRational, d: Option<u32>) -> ScalarValue {
    match d {
        None => ScalarValue::Rational(a),
        Some(d) => ScalarValue::quad_unchecked(a, b, d),
    }
}

impl<'a> Add<&'a ScalarValue> for &'a ScalarValue {
    type Output = ScalarValue;
    fn add(self, rhs: &ScalarValue) -> ScalarValue {
        if let (ScalarValue::Rational(x), ScalarValue::Rational(y)) = (self, rhs) {
            return ScalarValue::Rational(x + y);
        }
        let (a1, b1, d1) = self.parts();
        let (a2, b2, d2) = rhs.parts();
        build(a1 + a2, b1 + b2, common_radicand(d1, d2))
    }
}

impl<'a> Sub<&'a ScalarValue> for &'a ScalarValue {
    type Output = ScalarValue;
    fn sub(self, rhs: &ScalarValue) -> ScalarValue {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a ScalarValue> for &'a ScalarValue {
    type Output = ScalarValue;
    fn mul(self, rhs: &ScalarValue) -> ScalarValue {
        if let (ScalarValue::Rational(x), ScalarValue::Rational(y)) = (self, rhs) {
            return ScalarValue::Rational(x * y);
        }
        let (a1, b1, d1) = self.parts();
        let (a2, b2, d2) = rhs.parts();
        let d = common_radicand(d1, d2);
        let dd = BigRational::from_integer(BigInt::from(d.unwrap_or(0)));
        build(&a1 * &a2 + &b1 * &b2 * dd, a1 * b2 + b1 * a2, d)
    }
}

impl<'a> Div<&'a ScalarValue> for &'a ScalarValue {
    type Output = ScalarValue;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: &ScalarValue) -> ScalarValue {
        let inv = rhs.recip().expect("division of a scalar by zero");
        self * &inv
    }
}

impl Neg for &ScalarValue {
    type Output = ScalarValue;
    fn neg(self) -> ScalarValue {
        match self {
            ScalarValue::Rational(r) => ScalarValue::Rational(-r),
            ScalarValue::QuadExt { a, b, d } => ScalarValue::QuadExt { a: -a, b: -b, d: *d },
        }
    }
}

impl Neg for ScalarValue {
    type Output = ScalarValue;
    fn neg(self) -> ScalarValue {
        -&self
    }
}

macro_rules! owned_binop {
    ($tr:ident, $method:ident) => {
        impl $tr for ScalarValue {
            type Output = ScalarValue;
            fn $method(self, rhs: ScalarValue) -> ScalarValue {
                (&self).$method(&rhs)
            }
        }

        impl $tr<&ScalarValue> for ScalarValue {
            type Output = ScalarValue;
            fn $method(self, rhs: &ScalarValue) -> ScalarValue {
                (&self).$method(rhs)
            }
        }
    };
}
owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);
owned_binop!(Div, div);

impl Default for ScalarValue {
    fn default() -> Self {
        ScalarValue::zero()
    }
}

impl PartialOrd for ScalarValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ScalarValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ScalarValue::Rational(x), ScalarValue::Rational(y)) => x.cmp(y),
            _ => (self - other).signum(),
        }
    }
}

impl From<BigRational> for ScalarValue {
    fn from(r: BigRational) -> Self {
        ScalarValue::Rational(r)
    }
}

impl From<i64> for ScalarValue {
    fn from(n: i64) -> Self {
        ScalarValue::int(n)
    }
}

impl fmt::Display for ScalarValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarValue::Rational(r) => write!(f, "{r}"),
            ScalarValue::QuadExt { a, b, d } => {
                let mag = b.abs();
                let coeff = if mag.is_one() { String::new() } else { format!("{mag}*") };
                if a.is_zero() {
                    let sign = if b.is_negative() { "-" } else { "" };
                    write!(f, "{sign}{coeff}sqrt{d}")
                } else {
                    let sign = if b.is_negative() { '-' } else { '+' };
                    write!(f, "{a}{sign}{coeff}sqrt{d}")
                }
            }
        }
    }
}

fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.strip_prefix('+').unwrap_or(text);
    match text.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.parse().ok()?;
            let d: BigInt = d.parse().ok()?;
            if d.is_zero() || d.is_negative() {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => text.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}

impl FromStr for ScalarValue {
    type Err = ScalarError;

    fn from_str(raw: &str) -> Result<Self, Self::Err> {
        let bad = || ScalarError::Parse(raw.to_string());
        let text: String = raw.chars().filter(|c| !c.is_whitespace()).collect();
        let Some(at) = text.find("sqrt") else {
            return parse_rational(&text).map(ScalarValue::Rational).ok_or_else(bad);
        };
        let d: u32 = text[at + 4..].parse().map_err(|_| bad())?;
        let head = &text[..at];
        let split = head
            .char_indices()
            .filter(|&(i, c)| i > 0 && (c == '+' || c == '-') && &head[i - 1..i] != "/")
            .map(|(i, _)| i)
            .next_back();
        let (rat, coeff) = match split {
            Some(i) => (&head[..i], &head[i..]),
            None => ("", head),
        };
        let a = if rat.is_empty() { BigRational::zero() } else { parse_rational(rat).ok_or_else(bad)? };
        let b = match coeff {
            "" | "+" => BigRational::one(),
            "-" => -BigRational::one(),
            c => parse_rational(c.strip_suffix('*').ok_or_else(bad)?).ok_or_else(bad)?,
        };
        if b.is_zero() {
            return Err(bad());
        }
        ScalarValue::quad(a, b, d)
    }
}

/// The supported scalar fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScalarField {
    Rationals,
    Quadratic(u32),
}

impl ScalarField {
    pub fn quadratic(d: u32) -> Result<Self, ScalarError> {
        if is_square_free(d) {
            Ok(ScalarField::Quadratic(d))
        } else {
            Err(ScalarError::BadRadicand(d))
        }
    }

    pub fn contains(&self, value: &ScalarValue) -> bool {
        match (self, value.radicand()) {
            (_, None) => true,
            (ScalarField::Quadratic(d), Some(e)) => *d == e,
            (ScalarField::Rationals, Some(_)) => false,
        }
    }

    /// Whether `self` is a subfield of `other`.
    pub fn is_subfield_of(&self, other: &ScalarField) -> bool {
        match (self, other) {
            (ScalarField::Rationals, _) => true,
            (a, b) => a == b,
        }
    }

    pub fn check(&self, value: &ScalarValue) -> Result<(), ScalarError> {
        if self.contains(value) {
            Ok(())
        } else {
            Err(ScalarError::OutsideField { value: value.to_string(), field: self.to_string() })
        }
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField::Rationals => write!(f, "Q"),
            ScalarField::Quadratic(d) => write!(f, "Q(sqrt {d})"),
        }
    }
}

impl FromStr for ScalarField {
    type Err = ScalarError;

    fn from_str(raw: &str) -> Result<Self, Self::Err> {
        let text: String = raw.chars().filter(|c| !c.is_whitespace()).collect();
        if text == "Q" {
            return Ok(ScalarField::Rationals);
        }
        let d = text
            .strip_prefix("Q(sqrt")
            .and_then(|rest| rest.strip_suffix(')'))
            .and_then(|d| d.parse::<u32>().ok())
            .ok_or_else(|| ScalarError::FieldParse(raw.to_string()))?;
        ScalarField::quadratic(d)
    }
}

/// A scalar or the default value `inf`, which absorbs every operation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExtScalar {
    Finite(ScalarValue),
    Infinity,
}

impl ExtScalar {
    pub fn finite(&self) -> Option<&ScalarValue> {
        match self {
            ExtScalar::Finite(v) => Some(v),
            ExtScalar::Infinity => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtScalar::Infinity)
    }

    pub fn add(&self, other: &ExtScalar) -> ExtScalar {
        match (self, other) {
            (ExtScalar::Finite(a), ExtScalar::Finite(b)) => ExtScalar::Finite(a + b),
            _ => ExtScalar::Infinity,
        }
    }

    pub fn mul(&self, other: &ExtScalar) -> ExtScalar {
        match (self, other) {
            (ExtScalar::Finite(a), ExtScalar::Finite(b)) => ExtScalar::Finite(a * b),
            _ => ExtScalar::Infinity,
        }
    }

    pub fn neg(&self) -> ExtScalar {
        match self {
            ExtScalar::Finite(a) => ExtScalar::Finite(-a),
            ExtScalar::Infinity => ExtScalar::Infinity,
        }
    }
}

impl From<ScalarValue> for ExtScalar {
    fn from(v: ScalarValue) -> Self {
        ExtScalar::Finite(v)
    }
}

impl fmt::Display for ExtScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtScalar::Finite(v) => write!(f, "{v}"),
            ExtScalar::Infinity => write!(f, "inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(text: &str) -> ScalarValue {
        text.parse().unwrap()
    }

    #[test]
    fn parses_and_prints_canonical_strings() {
        for text in ["3/4", "-3", "0", "1/2+2/3*sqrt2", "sqrt2", "-sqrt3", "-1/2-sqrt5", "2/3*sqrt2"] {
            assert_eq!(q(text).to_string(), text);
        }
        assert_eq!(q("6/8"), ScalarValue::ratio(3, 4));
        assert!("1/0".parse::<ScalarValue>().is_err());
        assert!("sqrt4".parse::<ScalarValue>().is_err());
        assert!("1+0*sqrt2".parse::<ScalarValue>().is_err());
    }

    #[test]
    fn quadratic_signs_are_exact() {
        assert!(q("-1+sqrt2").is_positive());
        assert!(q("3/2-sqrt2").is_positive());
        assert!(q("7/5-sqrt2").is_negative());
        assert!(q("-3/2+sqrt2").is_negative());
        assert!(q("sqrt2") > q("1414/1000"));
        assert!(q("sqrt2") < q("1415/1000"));
    }

    #[test]
    fn quadratic_field_arithmetic() {
        let r2 = q("sqrt2");
        assert_eq!(&r2 * &r2, ScalarValue::int(2));
        let x = q("1/2+2/3*sqrt2");
        let inv = x.recip().unwrap();
        assert_eq!(&x * &inv, ScalarValue::one());
        assert_eq!(&x - &x, ScalarValue::zero());
        assert!(ScalarValue::zero().recip().is_none());
    }

    #[test]
    fn fields_parse_and_contain() {
        assert_eq!("Q".parse::<ScalarField>().unwrap(), ScalarField::Rationals);
        assert_eq!("Q(sqrt 2)".parse::<ScalarField>().unwrap(), ScalarField::Quadratic(2));
        assert_eq!("Q(sqrt3)".parse::<ScalarField>().unwrap(), ScalarField::Quadratic(3));
        assert!("Q(sqrt 8)".parse::<ScalarField>().is_err());
        assert!(!ScalarField::Rationals.contains(&q("sqrt2")));
        assert!(ScalarField::Quadratic(2).contains(&q("1/3")));
    }

    #[test]
    fn infinity_absorbs() {
        let one = ExtScalar::Finite(ScalarValue::one());
        assert_eq!(one.add(&ExtScalar::Infinity), ExtScalar::Infinity);
        assert_eq!(ExtScalar::Infinity.mul(&one), ExtScalar::Infinity);
        assert_eq!(ExtScalar::Infinity.neg(), ExtScalar::Infinity);
    }

    fn quad2() -> impl Strategy<Value = ScalarValue> {
        (-20i64..20, 1i64..9, -20i64..20, 1i64..9).prop_map(|(an, ad, bn, bd)| {
            let a = BigRational::new(an.into(), ad.into());
            let b = BigRational::new(bn.into(), bd.into());
            ScalarValue::quad(a, b, 2).unwrap()
        })
    }

    proptest! {
        #[test]
        fn display_round_trips(x in quad2()) {
            prop_assert_eq!(x.to_string().parse::<ScalarValue>().unwrap(), x);
        }

        #[test]
        fn order_is_compatible_with_addition(x in quad2(), y in quad2(), z in quad2()) {
            prop_assert_eq!(x.cmp(&y), (&x + &z).cmp(&(&y + &z)));
        }

        #[test]
        fn sign_matches_float_estimate(x in quad2()) {
            let (a, b, _) = x.parts();
            let approx = num_traits::ToPrimitive::to_f64(&a).unwrap()
                + num_traits::ToPrimitive::to_f64(&b).unwrap() * 2f64.sqrt();
            if approx.abs() > 1e-9 {
                prop_assert_eq!(x.is_positive(), approx > 0.0);
            }
        }
    }
}

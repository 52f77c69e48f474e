//! Exact dyadic rationals `n / 2^k`.
//!
//! Values are kept in canonical form after every operation: the exponent is zero or the
//! numerator is odd, and zero is always `0 / 2^0`. Equality and hashing are therefore
//! structural. Numerators that fit in an `i64` are stored inline and all arithmetic on them
//! goes through `i128` intermediates; anything larger spills to a `BigInt`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational coefficient type used for molecules.
pub type Rational = BigRational;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
enum Mantissa {
    Small(i64),
    Big(BigInt),
}

/// An exact number of the form `numerator / 2^exponent`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mant: Mantissa,
    exp: u32,
}

const MAX_SMALL_SHIFT: u32 = 62;

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic { mant: Mantissa::Small(0), exp: 0 }
    }

    pub fn one() -> Self {
        Dyadic::from_int(1)
    }

    pub fn from_int(v: i64) -> Self {
        Dyadic { mant: Mantissa::Small(v), exp: 0 }
    }

    /// `numerator / 2^exponent`; a negative exponent multiplies by a power of two.
    pub fn new(numerator: i64, exponent: i64) -> Self {
        Self::from_i128(numerator as i128, exponent)
    }

    pub fn from_bigint(numerator: BigInt, exponent: i64) -> Self {
        Self::from_big(numerator, exponent)
    }

    /// `2^e` for any integer `e`.
    pub fn pow2(e: i64) -> Self {
        Self::new(1, -e)
    }

    fn from_i128(mut n: i128, mut exp: i64) -> Self {
        if n == 0 {
            return Self::zero();
        }
        if exp == 0 || (exp > 0 && n & 1 == 1) {
            if let (Ok(v), Ok(e)) = (i64::try_from(n), u32::try_from(exp)) {
                return Dyadic { mant: Mantissa::Small(v), exp: e };
            }
        }
        if exp > 0 {
            let s = (n.trailing_zeros() as i64).min(exp);
            n >>= s;
            exp -= s;
        }
        if exp < 0 {
            let s = exp.unsigned_abs();
            if s >= 127 || n.unsigned_abs().leading_zeros() as u64 <= s {
                return Self::from_big(BigInt::from(n), exp);
            }
            n <<= s;
            exp = 0;
        }
        let exp = u32::try_from(exp).expect("dyadic exponent overflow");
        match i64::try_from(n) {
            Ok(v) => Dyadic { mant: Mantissa::Small(v), exp },
            Err(_) => Dyadic { mant: Mantissa::Big(BigInt::from(n)), exp },
        }
    }

    fn from_big(mut n: BigInt, mut exp: i64) -> Self {
        if n.is_zero() {
            return Self::zero();
        }
        if exp > 0 {
            let tz = n.trailing_zeros().unwrap_or(0) as i64;
            let s = tz.min(exp);
            n >>= s as usize;
            exp -= s;
        }
        if exp < 0 {
            n <<= (-exp) as usize;
            exp = 0;
        }
        let exp = u32::try_from(exp).expect("dyadic exponent overflow");
        match n.to_i64() {
            Some(v) => Dyadic { mant: Mantissa::Small(v), exp },
            None => Dyadic { mant: Mantissa::Big(n), exp },
        }
    }

    pub fn numerator(&self) -> BigInt {
        match &self.mant {
            Mantissa::Small(v) => BigInt::from(*v),
            Mantissa::Big(b) => b.clone(),
        }
    }

    pub fn exponent(&self) -> u32 {
        self.exp
    }

    /// The numerator when it fits in an `i64`.
    pub fn numerator_i64(&self) -> Option<i64> {
        match &self.mant {
            Mantissa::Small(v) => Some(*v),
            Mantissa::Big(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.mant, Mantissa::Small(0))
    }

    pub fn is_integer(&self) -> bool {
        self.exp == 0
    }

    pub fn signum(&self) -> i32 {
        match &self.mant {
            Mantissa::Small(v) => v.signum() as i32,
            Mantissa::Big(b) => {
                if b.is_negative() {
                    -1
                } else {
                    1
                }
            }
        }
    }

    pub fn abs(&self) -> Self {
        if self.signum() < 0 {
            -self
        } else {
            self.clone()
        }
    }

    /// Multiply by `2^e`.
    pub fn mul_pow2(&self, e: i64) -> Self {
        let exp = self.exp as i64 - e;
        match &self.mant {
            Mantissa::Small(0) => Self::zero(),
            Mantissa::Small(v) if exp >= 0 && exp <= u32::MAX as i64 => {
                let s = if self.exp > 0 { 0 } else { (v.trailing_zeros() as i64).min(exp) };
                Dyadic { mant: Mantissa::Small(v >> s), exp: (exp - s) as u32 }
            }
            Mantissa::Small(v) => Self::from_i128(*v as i128, exp),
            Mantissa::Big(b) => Self::from_big(b.clone(), exp),
        }
    }

    /// Largest integer not exceeding the value.
    pub fn floor(&self) -> BigInt {
        match &self.mant {
            Mantissa::Small(v) => {
                if self.exp >= 64 {
                    BigInt::from(if *v < 0 { -1 } else { 0 })
                } else {
                    BigInt::from(v >> self.exp)
                }
            }
            // Shr on BigInt rounds towards negative infinity.
            Mantissa::Big(b) => b >> self.exp as usize,
        }
    }

    /// `floor` when it fits in an `i64`.
    pub fn floor_i64(&self) -> Option<i64> {
        match &self.mant {
            Mantissa::Small(v) if self.exp < 64 => Some(v >> self.exp),
            Mantissa::Small(v) => Some(if *v < 0 { -1 } else { 0 }),
            Mantissa::Big(_) => self.floor().to_i64(),
        }
    }

    /// The value as an `i64` when it is an integer in range.
    pub fn to_i64(&self) -> Option<i64> {
        if self.exp != 0 {
            return None;
        }
        self.numerator_i64()
    }

    pub fn to_f64(&self) -> f64 {
        let n = match &self.mant {
            Mantissa::Small(v) => *v as f64,
            Mantissa::Big(b) => b.to_f64().unwrap_or(f64::NAN),
        };
        if self.exp <= 1000 {
            n * 2f64.powi(-(self.exp as i32))
        } else {
            self.to_rational().to_f64().unwrap_or(0.0)
        }
    }

    pub fn to_rational(&self) -> Rational {
        let den = BigInt::one() << self.exp as usize;
        BigRational::new(self.numerator(), den)
    }

    /// Exact conversion; fails unless the reduced denominator is a power of two.
    pub fn try_from_rational(r: &Rational) -> Result<Self> {
        let den = r.denom();
        let tz = den.trailing_zeros().unwrap_or(0);
        if den.is_negative() || (den >> tz as usize) != BigInt::one() {
            return Err(Error::Parse(format!("{r} is not a dyadic rational")));
        }
        Ok(Self::from_big(r.numer().clone(), tz as i64))
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn add_ref(&self, o: &Dyadic) -> Dyadic {
        let k = self.exp.max(o.exp);
        let (sa, sb) = (k - self.exp, k - o.exp);
        if let (Mantissa::Small(a), Mantissa::Small(b)) = (&self.mant, &o.mant) {
            if sa <= MAX_SMALL_SHIFT && sb <= MAX_SMALL_SHIFT {
                let x = ((*a as i128) << sa) + ((*b as i128) << sb);
                return Self::from_i128(x, k as i64);
            }
        }
        let x = (self.numerator() << sa as usize) + (o.numerator() << sb as usize);
        Self::from_big(x, k as i64)
    }

    fn mul_ref(&self, o: &Dyadic) -> Dyadic {
        let k = self.exp as i64 + o.exp as i64;
        if let (Mantissa::Small(a), Mantissa::Small(b)) = (&self.mant, &o.mant) {
            return Self::from_i128(*a as i128 * *b as i128, k);
        }
        Self::from_big(self.numerator() * o.numerator(), k)
    }

    fn neg_ref(&self) -> Dyadic {
        match &self.mant {
            Mantissa::Small(v) => Self::from_i128(-(*v as i128), self.exp as i64),
            Mantissa::Big(b) => Self::from_big(-b.clone(), self.exp as i64),
        }
    }
}

impl Default for Dyadic {
    fn default() -> Self {
        Self::zero()
    }
}

impl Ord for Dyadic {
    fn cmp(&self, o: &Self) -> Ordering {
        let k = self.exp.max(o.exp);
        let (sa, sb) = (k - self.exp, k - o.exp);
        if let (Mantissa::Small(a), Mantissa::Small(b)) = (&self.mant, &o.mant) {
            if sa == 0 && sb == 0 {
                return a.cmp(b);
            }
            let (ga, gb) = (a.signum(), b.signum());
            if ga != gb {
                return ga.cmp(&gb);
            }
            if sa <= MAX_SMALL_SHIFT && sb <= MAX_SMALL_SHIFT {
                return ((*a as i128) << sa).cmp(&((*b as i128) << sb));
            }
        }
        (self.numerator() << sa as usize).cmp(&(o.numerator() << sb as usize))
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $imp:ident) => {
        impl<'a> $tr<&'a Dyadic> for &'a Dyadic {
            type Output = Dyadic;
            fn $method(self, o: &'a Dyadic) -> Dyadic {
                self.$imp(o)
            }
        }
        impl $tr<Dyadic> for Dyadic {
            type Output = Dyadic;
            fn $method(self, o: Dyadic) -> Dyadic {
                (&self).$imp(&o)
            }
        }
        impl<'a> $tr<&'a Dyadic> for Dyadic {
            type Output = Dyadic;
            fn $method(self, o: &'a Dyadic) -> Dyadic {
                (&self).$imp(o)
            }
        }
    };
}

forward_binop!(Add, add, add_ref);
forward_binop!(Mul, mul, mul_ref);

impl Dyadic {
    fn sub_ref(&self, o: &Dyadic) -> Dyadic {
        if let (Mantissa::Small(a), Mantissa::Small(b)) = (&self.mant, &o.mant) {
            let k = self.exp.max(o.exp);
            let (sa, sb) = (k - self.exp, k - o.exp);
            if sa <= MAX_SMALL_SHIFT && sb <= MAX_SMALL_SHIFT {
                return Self::from_i128(((*a as i128) << sa) - ((*b as i128) << sb), k as i64);
            }
        }
        self.add_ref(&o.neg_ref())
    }
}

forward_binop!(Sub, sub, sub_ref);

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        self.neg_ref()
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        self.neg_ref()
    }
}

impl From<i64> for Dyadic {
    fn from(v: i64) -> Self {
        Dyadic::from_int(v)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.numerator())
        } else {
            write!(f, "{}/{}", self.numerator(), BigInt::one() << self.exp as usize)
        }
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Parse an exact rational from `"3"`, `"-0.75"`, `"3/4"` or `"1e-3"`-free decimal notation.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("cannot parse {s:?} as an exact rational"));
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let mut n = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| bad())?;
    if neg {
        n = -n;
    }
    let den = num_traits::pow(BigInt::from(10), frac.len());
    Ok(BigRational::new(n, den))
}

impl FromStr for Dyadic {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Dyadic::try_from_rational(&parse_rational(s)?)
    }
}

/// Nearest `f64`, robust to numerators and denominators beyond the `f64` range.
pub(crate) fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Ratio of two huge integers: scale both down first.
        let (n, d) = (r.numer(), r.denom());
        let shift = n.bits().max(d.bits()).saturating_sub(1000) as usize;
        (n >> shift).to_f64().unwrap_or(f64::NAN) / (d >> shift).to_f64().unwrap_or(f64::NAN)
    })
}

/// Least common multiple of the denominators.
pub(crate) fn common_denominator<'a>(it: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    it.into_iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    #[test]
    fn canonical_form() {
        let x = Dyadic::new(4, 3);
        assert_eq!(x.numerator_i64(), Some(1));
        assert_eq!(x.exponent(), 1);
        assert_eq!(Dyadic::new(0, 7), Dyadic::zero());
        assert_eq!(Dyadic::new(0, 7).exponent(), 0);
        assert_eq!(Dyadic::new(3, -2), Dyadic::from_int(12));
        assert_eq!(Dyadic::new(6, 0).numerator_i64(), Some(6));
    }

    #[test]
    fn arithmetic() {
        assert_eq!(d("0.5") + d("0.25"), d("3/4"));
        assert_eq!(d("0.5") - d("0.75"), d("-1/4"));
        assert_eq!(d("0.5") * d("-0.5"), d("-0.25"));
        assert_eq!(-d("1/8"), d("-0.125"));
        assert!(d("1/4") < d("1/2"));
        assert!(d("-3") < d("1/1024"));
        assert_eq!(d("3/4").mul_pow2(2), d("3"));
    }

    #[test]
    fn overflow_spills_to_bigint() {
        let big = Dyadic::from_int(i64::MAX);
        let sum = &big + &big;
        assert_eq!(sum.numerator(), BigInt::from(i64::MAX) * 2);
        assert_eq!(&sum - &big, big);
        let tiny = Dyadic::pow2(-200);
        let x = &tiny + &Dyadic::one();
        assert_eq!(x.exponent(), 200);
        assert_eq!(&x - &Dyadic::one(), tiny);
        assert_eq!(-Dyadic::from_int(i64::MIN), Dyadic::from_bigint(-BigInt::from(i64::MIN), 0));
        assert!(tiny > Dyadic::zero());
        assert_eq!((&tiny * &Dyadic::pow2(200)), Dyadic::one());
    }

    #[test]
    fn floor_rounds_down() {
        assert_eq!(d("-1/4").floor_i64(), Some(-1));
        assert_eq!(d("7/4").floor_i64(), Some(1));
        assert_eq!(d("-2").floor_i64(), Some(-2));
        assert_eq!(Dyadic::new(-1, 80).floor_i64(), Some(-1));
        assert_eq!(Dyadic::new(1, 80).floor_i64(), Some(0));
    }

    #[test]
    fn decimal_parsing() {
        assert_eq!(d("0.75"), Dyadic::new(3, 2));
        assert_eq!(d("-2.5"), Dyadic::new(-5, 1));
        assert!("0.1".parse::<Dyadic>().is_err());
        assert!("1/3".parse::<Dyadic>().is_err());
        assert!("abc".parse::<Dyadic>().is_err());
        assert!("".parse::<Dyadic>().is_err());
    }

    #[test]
    fn rational_round_trip() {
        let x = d("-13/64");
        assert_eq!(Dyadic::try_from_rational(&x.to_rational()).unwrap(), x);
        assert_eq!(x.to_f64(), -13.0 / 64.0);
    }
}

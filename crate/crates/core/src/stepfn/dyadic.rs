//! Exact dyadic rationals `numerator / 2^exponent`.
//!
//! Numerators that fit in an `i64` stay inline; larger ones (the `3^i`
//! placements of the FDD constructions reach hundreds of bits) spill to a
//! heap `BigInt`. The canonical form has an odd numerator or exponent zero,
//! so structural equality is value equality.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Int {
    Small(i64),
    Big(Box<BigInt>),
}

impl Int {
    fn from_big(b: BigInt) -> Int {
        match b.to_i64() {
            Some(v) => Int::Small(v),
            None => Int::Big(Box::new(b)),
        }
    }

    fn from_i128(v: i128) -> Int {
        match i64::try_from(v) {
            Ok(v) => Int::Small(v),
            Err(_) => Int::Big(Box::new(BigInt::from(v))),
        }
    }

    fn to_big(&self) -> BigInt {
        match self {
            Int::Small(v) => BigInt::from(*v),
            Int::Big(b) => (**b).clone(),
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, Int::Small(0))
    }

    fn trailing_zeros(&self) -> u32 {
        match self {
            Int::Small(0) => 0,
            Int::Small(v) => v.trailing_zeros(),
            Int::Big(b) => b.trailing_zeros().unwrap_or(0) as u32,
        }
    }

    fn shr_exact(&self, k: u32) -> Int {
        match self {
            Int::Small(v) => Int::Small(v >> k),
            Int::Big(b) => Int::from_big(&**b >> k as usize),
        }
    }

    fn shl(&self, k: u32) -> Int {
        if k == 0 {
            return self.clone();
        }
        match self {
            Int::Small(v) if k < 63 => {
                let wide = (*v as i128) << k;
                Int::from_i128(wide)
            }
            _ => Int::from_big(self.to_big() << k as usize),
        }
    }

    /// Bit length of `|self|`.
    fn bits(&self) -> u64 {
        match self {
            Int::Small(v) => 64 - v.unsigned_abs().leading_zeros() as u64,
            Int::Big(b) => b.bits(),
        }
    }

    fn signum(&self) -> i32 {
        match self {
            Int::Small(v) => v.signum() as i32,
            Int::Big(b) => {
                if b.is_negative() {
                    -1
                } else {
                    1
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DyadicRational {
    num: Int,
    exp: u32,
}

impl DyadicRational {
    pub fn zero() -> Self {
        DyadicRational {
            num: Int::Small(0),
            exp: 0,
        }
    }

    pub fn from_int(v: i64) -> Self {
        DyadicRational {
            num: Int::Small(v),
            exp: 0,
        }
    }

    pub fn from_bigint(v: BigInt) -> Self {
        DyadicRational {
            num: Int::from_big(v),
            exp: 0,
        }
    }

    /// `numerator / 2^exponent`, canonicalized.
    pub fn new(numerator: i64, exponent: u32) -> Self {
        Self::canonical(Int::Small(numerator), exponent)
    }

    pub fn from_parts(numerator: BigInt, exponent: u32) -> Self {
        Self::canonical(Int::from_big(numerator), exponent)
    }

    fn canonical(num: Int, exp: u32) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        let tz = num.trailing_zeros().min(exp);
        if tz == 0 {
            DyadicRational { num, exp }
        } else {
            DyadicRational {
                num: num.shr_exact(tz),
                exp: exp - tz,
            }
        }
    }

    /// Exact conversion of a finite `f64`.
    pub fn from_f64(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "non-finite value {x} has no dyadic representation"
            )));
        }
        if x == 0.0 {
            return Ok(Self::zero());
        }
        let bits = x.to_bits();
        let sign: i64 = if bits >> 63 == 0 { 1 } else { -1 };
        let raw_exp = ((bits >> 52) & 0x7ff) as i32;
        let mantissa = if raw_exp == 0 {
            (bits & 0xf_ffff_ffff_ffff) << 1
        } else {
            (bits & 0xf_ffff_ffff_ffff) | 0x10_0000_0000_0000
        };
        // x = sign * mantissa * 2^(raw_exp - 1075)
        let e = raw_exp - 1075;
        let m = Int::Small(sign * mantissa as i64);
        if e >= 0 {
            Ok(Self::canonical(m.shl(e as u32), 0))
        } else {
            Ok(Self::canonical(m, (-e) as u32))
        }
    }

    pub fn numerator(&self) -> BigInt {
        self.num.to_big()
    }

    pub fn exponent(&self) -> u32 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.exp == 0
    }

    pub fn signum(&self) -> i32 {
        if self.is_zero() {
            0
        } else {
            self.num.signum()
        }
    }

    /// The value as an `i64` when it is an integer in range.
    pub fn to_i64(&self) -> Option<i64> {
        match (&self.num, self.exp) {
            (Int::Small(v), 0) => Some(*v),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        let n = match &self.num {
            Int::Small(v) => *v as f64,
            Int::Big(b) => b.to_f64().unwrap_or(f64::NAN),
        };
        scale_pow2(n, -(self.exp as i64))
    }

    /// Largest integer not exceeding the value.
    pub fn floor(&self) -> DyadicRational {
        if self.exp == 0 {
            return self.clone();
        }
        let n = match &self.num {
            Int::Small(v) => Int::Small(v >> self.exp.min(63)),
            Int::Big(b) => Int::from_big(floor_shr(b, self.exp)),
        };
        DyadicRational { num: n, exp: 0 }
    }

    /// Smallest integer not below the value.
    pub fn ceil(&self) -> DyadicRational {
        let f = self.floor();
        if &f == self {
            f
        } else {
            &f + &DyadicRational::from_int(1)
        }
    }

    /// Multiplies by `2^k` (k may be negative).
    pub fn mul_pow2(&self, k: i32) -> DyadicRational {
        if k >= 0 {
            let k = k as u32;
            if k <= self.exp {
                DyadicRational {
                    num: self.num.clone(),
                    exp: self.exp - k,
                }
            } else {
                Self::canonical(self.num.shl(k - self.exp), 0)
            }
        } else {
            Self::canonical(self.num.clone(), self.exp + (-k) as u32)
        }
    }

    pub fn abs(&self) -> DyadicRational {
        if self.signum() < 0 {
            -self
        } else {
            self.clone()
        }
    }

    fn aligned(&self, other: &Self) -> (Int, Int, u32) {
        let e = self.exp.max(other.exp);
        (self.num.shl(e - self.exp), other.num.shl(e - other.exp), e)
    }

    /// `3^n` as an exact integer.
    pub fn pow3(n: u32) -> DyadicRational {
        if n <= 39 {
            DyadicRational::from_int(3i64.pow(n))
        } else {
            DyadicRational::from_bigint(num_traits::pow(BigInt::from(3), n as usize))
        }
    }
}

fn floor_shr(b: &BigInt, k: u32) -> BigInt {
    // BigInt's `>>` rounds toward negative infinity for negative values.
    b >> k as usize
}

fn scale_pow2(x: f64, k: i64) -> f64 {
    // Split the scaling so that intermediate powers never overflow.
    let mut out = x;
    let mut k = k;
    while k > 1000 {
        out *= 2f64.powi(1000);
        k -= 1000;
    }
    while k < -1000 {
        out *= 2f64.powi(-1000);
        k += 1000;
    }
    out * 2f64.powi(k as i32)
}

fn add_ints(a: &Int, b: &Int, negate_b: bool) -> Int {
    match (a, b) {
        (Int::Small(x), Int::Small(y)) => {
            let y = *y as i128;
            let y = if negate_b { -y } else { y };
            Int::from_i128(*x as i128 + y)
        }
        _ => {
            let bb = b.to_big();
            let bb = if negate_b { -bb } else { bb };
            Int::from_big(a.to_big() + bb)
        }
    }
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.exp == other.exp {
            return cmp_ints(&self.num, &other.num);
        }
        let (s1, s2) = (self.signum(), other.signum());
        if s1 != s2 {
            return s1.cmp(&s2);
        }
        // |x| lies in [2^(m-1), 2^m) for m = bits(num) − exp; differing
        // magnitudes decide without aligning (and allocating) numerators.
        let (m1, m2) = (self.num.bits() as i64 - self.exp as i64, other.num.bits() as i64 - other.exp as i64);
        if m1 != m2 {
            return if s1 > 0 { m1.cmp(&m2) } else { m2.cmp(&m1) };
        }
        let (a, b, _) = self.aligned(other);
        cmp_ints(&a, &b)
    }
}

fn cmp_ints(a: &Int, b: &Int) -> Ordering {
    match (a, b) {
        (Int::Small(x), Int::Small(y)) => x.cmp(y),
        (Int::Big(x), Int::Big(y)) => x.as_ref().cmp(y.as_ref()),
        // a Big value always lies outside the i64 range
        (Int::Small(_), Int::Big(y)) => {
            if y.is_negative() {
                Ordering::Greater
            } else {
                Ordering::Less
            }
        }
        (Int::Big(x), Int::Small(_)) => {
            if x.is_negative() {
                Ordering::Less
            } else {
                Ordering::Greater
            }
        }
    }
}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &DyadicRational {
    type Output = DyadicRational;
    fn add(self, rhs: &DyadicRational) -> DyadicRational {
        if rhs.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return rhs.clone();
        }
        let (a, b, e) = self.aligned(rhs);
        DyadicRational::canonical(add_ints(&a, &b, false), e)
    }
}

impl Sub for &DyadicRational {
    type Output = DyadicRational;
    fn sub(self, rhs: &DyadicRational) -> DyadicRational {
        if rhs.is_zero() {
            return self.clone();
        }
        let (a, b, e) = self.aligned(rhs);
        DyadicRational::canonical(add_ints(&a, &b, true), e)
    }
}

impl Add for DyadicRational {
    type Output = DyadicRational;
    fn add(self, rhs: DyadicRational) -> DyadicRational {
        &self + &rhs
    }
}

impl Sub for DyadicRational {
    type Output = DyadicRational;
    fn sub(self, rhs: DyadicRational) -> DyadicRational {
        &self - &rhs
    }
}

impl Neg for &DyadicRational {
    type Output = DyadicRational;
    fn neg(self) -> DyadicRational {
        let num = match &self.num {
            Int::Small(v) => Int::from_i128(-(*v as i128)),
            Int::Big(b) => Int::from_big(-(**b).clone()),
        };
        DyadicRational { num, exp: self.exp }
    }
}

impl Neg for DyadicRational {
    type Output = DyadicRational;
    fn neg(self) -> DyadicRational {
        -&self
    }
}

impl From<i64> for DyadicRational {
    fn from(v: i64) -> Self {
        DyadicRational::from_int(v)
    }
}

impl fmt::Display for DyadicRational {
    /// Serialized as `num/2^exp`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.num {
            Int::Small(v) => write!(f, "{}/2^{}", v, self.exp),
            Int::Big(b) => write!(f, "{}/2^{}", b, self.exp),
        }
    }
}

impl FromStr for DyadicRational {
    type Err = Error;

    /// Accepts `num/2^exp` or a bare integer.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse {
            line: 0,
            msg: format!("not a dyadic rational: {s:?}"),
        };
        let s = s.trim();
        let (num, exp) = match s.split_once('/') {
            Some((n, rest)) => {
                let e = rest.strip_prefix("2^").ok_or_else(bad)?;
                (n, e.parse::<u32>().map_err(|_| bad())?)
            }
            None => (s, 0),
        };
        let n: BigInt = num.parse().map_err(|_| bad())?;
        Ok(DyadicRational::from_parts(n, exp))
    }
}

impl Default for DyadicRational {
    fn default() -> Self {
        Self::zero()
    }
}

//! Exact ordered fields used for lengths: the rationals and the cubic field Q(λ), λ³ = λ² + 1.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;
use std::hash::Hash;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::OnceLock;

/// An exact ordered field.
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + Eq
    + PartialOrd
    + Ord
    + Hash
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_q(q: &Q) -> Self;
    fn to_f64(&self) -> f64;

    fn from_int(v: i64) -> Self {
        Self::from_q(&Q::int(v))
    }
    fn from_ratio(n: i64, d: i64) -> Self {
        Self::from_q(&Q::ratio(n, d))
    }
    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }
    fn is_positive(&self) -> bool {
        *self > Self::zero()
    }
    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }
    fn abs(&self) -> Self {
        if self.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }
    fn times(&self, k: i64) -> Self {
        self.clone() * Self::from_int(k)
    }
    fn sum<'a, I: IntoIterator<Item = &'a Self>>(items: I) -> Self {
        items.into_iter().fold(Self::zero(), |acc, x| acc + x.clone())
    }
    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }
}

/// Arbitrary precision rational number.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Q(pub BigRational);

impl Q {
    pub fn int(v: i64) -> Q {
        Q(BigRational::from_integer(BigInt::from(v)))
    }
    pub fn ratio(n: i64, d: i64) -> Q {
        Q(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }
    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }
    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }
    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }
}

impl fmt::Display for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("invalid rational literal {0:?}")]
pub struct ParseQError(pub String);

impl FromStr for Q {
    type Err = ParseQError;
    fn from_str(s: &str) -> Result<Q, ParseQError> {
        let err = || ParseQError(s.to_string());
        let t = s.trim();
        match t.split_once('/') {
            Some((n, d)) => {
                let n = BigInt::from_str(n.trim()).map_err(|_| err())?;
                let d = BigInt::from_str(d.trim()).map_err(|_| err())?;
                if d.is_zero() {
                    return Err(err());
                }
                Ok(Q(BigRational::new(n, d)))
            }
            None => Ok(Q(BigRational::from_integer(BigInt::from_str(t).map_err(|_| err())?))),
        }
    }
}

impl Serialize for Q {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        Q::from_str(&s).map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_ops {
    ($t:ident) => {
        impl Add for $t {
            type Output = $t;
            fn add(self, o: $t) -> $t {
                $t(self.0 + o.0)
            }
        }
        impl Sub for $t {
            type Output = $t;
            fn sub(self, o: $t) -> $t {
                $t(self.0 - o.0)
            }
        }
        impl Mul for $t {
            type Output = $t;
            fn mul(self, o: $t) -> $t {
                $t(self.0 * o.0)
            }
        }
        impl Div for $t {
            type Output = $t;
            fn div(self, o: $t) -> $t {
                $t(self.0 / o.0)
            }
        }
        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                $t(-self.0)
            }
        }
    };
}
forward_ops!(Q);

impl Scalar for Q {
    fn zero() -> Q {
        Q(BigRational::zero())
    }
    fn one() -> Q {
        Q(BigRational::one())
    }
    fn from_q(q: &Q) -> Q {
        q.clone()
    }
    fn to_f64(&self) -> f64 {
        rat_to_f64(&self.0)
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    fn is_positive(&self) -> bool {
        self.0.is_positive()
    }
    fn is_negative(&self) -> bool {
        self.0.is_negative()
    }
}

fn rat_to_f64(r: &BigRational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() && d != 0.0 => n / d,
        _ => {
            // Scale down huge numerators and denominators together.
            let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
            let n = (r.numer() >> shift).to_f64().unwrap_or(0.0);
            let d = (r.denom() >> shift).to_f64().unwrap_or(1.0);
            n / d
        }
    }
}

/// Element c0 + c1·λ + c2·λ² of Q(λ), where λ ≈ 1.46557 is the real root of x³ − x² − 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct QL(pub [BigRational; 3]);

fn lambda_bracket(bits: u32) -> (BigRational, BigRational) {
    let one = BigRational::one();
    let mut lo = one.clone();
    let mut hi = BigRational::from_integer(BigInt::from(2));
    let f = |x: &BigRational| x * x * x - x * x - BigRational::one();
    let two = BigRational::from_integer(BigInt::from(2));
    for _ in 0..bits {
        let mid = (&lo + &hi) / &two;
        if f(&mid).is_negative() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

fn coarse_bracket() -> &'static (BigRational, BigRational) {
    static B: OnceLock<(BigRational, BigRational)> = OnceLock::new();
    B.get_or_init(|| lambda_bracket(64))
}

fn fine_bracket() -> &'static (BigRational, BigRational) {
    static B: OnceLock<(BigRational, BigRational)> = OnceLock::new();
    B.get_or_init(|| lambda_bracket(320))
}

impl QL {
    pub fn new(c0: Q, c1: Q, c2: Q) -> QL {
        QL([c0.0, c1.0, c2.0])
    }
    /// The generator λ.
    pub fn lambda() -> QL {
        QL([BigRational::zero(), BigRational::one(), BigRational::zero()])
    }
    pub fn coeffs(&self) -> [Q; 3] {
        [Q(self.0[0].clone()), Q(self.0[1].clone()), Q(self.0[2].clone())]
    }
    pub fn pow(&self, k: u32) -> QL {
        let mut r = QL::one();
        for _ in 0..k {
            r = r * self.clone();
        }
        r
    }

    fn eval_range(&self, lo: &BigRational, hi: &BigRational) -> (BigRational, BigRational) {
        let [c0, c1, c2] = &self.0;
        let ev = |x: &BigRational| c0 + c1 * x + c2 * x * x;
        let mut vals = vec![ev(lo), ev(hi)];
        if !c2.is_zero() {
            let v = -c1 / (BigRational::from_integer(BigInt::from(2)) * c2);
            if &v > lo && &v < hi {
                vals.push(ev(&v));
            }
        }
        let mn = vals.iter().min().cloned().unwrap();
        let mx = vals.iter().max().cloned().unwrap();
        (mn, mx)
    }

    /// Sign decided by interval refinement of λ; exact because a nonzero element never vanishes at λ.
    pub fn signum(&self) -> Ordering {
        if self.0.iter().all(|c| c.is_zero()) {
            return Ordering::Equal;
        }
        if self.0[1].is_zero() && self.0[2].is_zero() {
            return self.0[0].cmp(&BigRational::zero());
        }
        for (lo, hi) in [coarse_bracket(), fine_bracket()] {
            let (mn, mx) = self.eval_range(lo, hi);
            if mn.is_positive() {
                return Ordering::Greater;
            }
            if mx.is_negative() {
                return Ordering::Less;
            }
        }
        let (mut lo, mut hi) = fine_bracket().clone();
        let two = BigRational::from_integer(BigInt::from(2));
        loop {
            let mid = (&lo + &hi) / &two;
            if (&mid * &mid * &mid - &mid * &mid - BigRational::one()).is_negative() {
                lo = mid;
            } else {
                hi = mid;
            }
            let (mn, mx) = self.eval_range(&lo, &hi);
            if mn.is_positive() {
                return Ordering::Greater;
            }
            if mx.is_negative() {
                return Ordering::Less;
            }
        }
    }

    pub fn inverse(&self) -> QL {
        let [a0, a1, a2] = &self.0;
        // Columns of the multiplication-by-self matrix in the basis (1, λ, λ²).
        let m = [
            [a0.clone(), a2.clone(), a1 + a2],
            [a1.clone(), a0.clone(), a2.clone()],
            [a2.clone(), a1 + a2, a0 + a1 + a2],
        ];
        let det3 = |m: &[[BigRational; 3]; 3]| {
            &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1])
                - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
                + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0])
        };
        let d = det3(&m);
        assert!(!d.is_zero(), "division by zero in Q(λ)");
        let mut out: [BigRational; 3] = Default::default();
        for (j, slot) in out.iter_mut().enumerate() {
            let mut mj = m.clone();
            for (i, row) in mj.iter_mut().enumerate() {
                row[j] = if i == 0 { BigRational::one() } else { BigRational::zero() };
            }
            *slot = det3(&mj) / &d;
        }
        QL(out)
    }
}

impl Add for QL {
    type Output = QL;
    fn add(self, o: QL) -> QL {
        let [a0, a1, a2] = self.0;
        let [b0, b1, b2] = o.0;
        QL([a0 + b0, a1 + b1, a2 + b2])
    }
}
impl Sub for QL {
    type Output = QL;
    fn sub(self, o: QL) -> QL {
        let [a0, a1, a2] = self.0;
        let [b0, b1, b2] = o.0;
        QL([a0 - b0, a1 - b1, a2 - b2])
    }
}
impl Mul for QL {
    type Output = QL;
    fn mul(self, o: QL) -> QL {
        let [a0, a1, a2] = &self.0;
        let [b0, b1, b2] = &o.0;
        let p0 = a0 * b0;
        let p1 = a0 * b1 + a1 * b0;
        let p2 = a0 * b2 + a1 * b1 + a2 * b0;
        let p3 = a1 * b2 + a2 * b1;
        let p4 = a2 * b2;
        // λ³ = λ² + 1 and λ⁴ = λ² + λ + 1.
        QL([&p0 + &p3 + &p4, p1 + &p4, p2 + p3 + p4])
    }
}
impl Div for QL {
    type Output = QL;
    fn div(self, o: QL) -> QL {
        self * o.inverse()
    }
}
impl Neg for QL {
    type Output = QL;
    fn neg(self) -> QL {
        let [a0, a1, a2] = self.0;
        QL([-a0, -a1, -a2])
    }
}

impl PartialOrd for QL {
    fn partial_cmp(&self, o: &QL) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for QL {
    fn cmp(&self, o: &QL) -> Ordering {
        if self == o {
            return Ordering::Equal;
        }
        (self.clone() - o.clone()).signum()
    }
}

impl fmt::Display for QL {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [c0, c1, c2] = self.coeffs();
        write!(f, "{c0}+{c1}*L+{c2}*L^2")
    }
}

impl Serialize for QL {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.coeffs().serialize(s)
    }
}

impl<'de> Deserialize<'de> for QL {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<QL, D::Error> {
        let [a, b, c] = <[Q; 3]>::deserialize(d)?;
        Ok(QL::new(a, b, c))
    }
}

/// Floating value of λ.
pub fn lambda_f64() -> f64 {
    rat_to_f64(&coarse_bracket().0)
}

impl Scalar for QL {
    fn zero() -> QL {
        QL::default()
    }
    fn one() -> QL {
        QL([BigRational::one(), BigRational::zero(), BigRational::zero()])
    }
    fn from_q(q: &Q) -> QL {
        QL([q.0.clone(), BigRational::zero(), BigRational::zero()])
    }
    fn to_f64(&self) -> f64 {
        let l = lambda_f64();
        rat_to_f64(&self.0[0]) + rat_to_f64(&self.0[1]) * l + rat_to_f64(&self.0[2]) * l * l
    }
    fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_parse_and_display() {
        let q: Q = "6/4".parse().unwrap();
        assert_eq!(q.to_string(), "3/2");
        assert_eq!(Q::int(3).to_string(), "3");
        assert!("1/0".parse::<Q>().is_err());
    }

    #[test]
    fn lambda_satisfies_minimal_polynomial() {
        let l = QL::lambda();
        let p = l.pow(3) - l.pow(2) - QL::one();
        assert!(p.is_zero());
        assert!((l.to_f64() - 1.465_571_231_876_768).abs() < 1e-12);
    }

    #[test]
    fn inverse_and_order() {
        let x = QL::new(Q::int(1), Q::int(-2), Q::ratio(1, 3));
        assert_eq!(x.clone() * x.inverse(), QL::one());
        let l = QL::lambda();
        // λ² ≈ 2.1479 > 2 and λ < 3/2.
        assert!(l.pow(2) > QL::from_int(2));
        assert!(l < QL::from_ratio(3, 2));
        // Nearly cancelling combination still decided exactly.
        let near = l.pow(2) - QL::from_q(&Q::ratio(2147899035704787, 1_000_000_000_000_000));
        assert_eq!(near.signum(), Ordering::Greater);
    }
}

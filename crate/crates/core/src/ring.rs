//! Exact arithmetic in `Z[i, 1/sqrt2]` and its real subring `Z[1/sqrt2]`.
//!
//! Every unitary that a Clifford+T circuit implements has entries in this
//! ring, so all circuit semantics in this crate are computed with
//! [`RingScalar`] and compared structurally.

use std::cmp::Ordering;
use std::fmt;
use std::hash::Hash;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use num_integer::Integer;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, Float, FromPrimitive, Signed, ToPrimitive};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("integer overflow in exact ring arithmetic")]
    Overflow,
    #[error("division by zero")]
    DivisionByZero,
}

/// Integer types that can back the exact ring: `i64`, `i128` or `BigInt`.
pub trait RingInt:
    Clone
    + Ord
    + Hash
    + fmt::Debug
    + fmt::Display
    + Integer
    + Signed
    + CheckedAdd
    + CheckedSub
    + CheckedMul
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
    + 'static
{
}

impl<T> RingInt for T where
    T: Clone
        + Ord
        + Hash
        + fmt::Debug
        + fmt::Display
        + Integer
        + Signed
        + CheckedAdd
        + CheckedSub
        + CheckedMul
        + FromPrimitive
        + ToPrimitive
        + Send
        + Sync
        + 'static
{
}

#[inline]
fn cadd<I: RingInt>(x: &I, y: &I) -> Result<I, RingError> {
    x.checked_add(y).ok_or(RingError::Overflow)
}

#[inline]
fn csub<I: RingInt>(x: &I, y: &I) -> Result<I, RingError> {
    x.checked_sub(y).ok_or(RingError::Overflow)
}

#[inline]
fn cmul<I: RingInt>(x: &I, y: &I) -> Result<I, RingError> {
    x.checked_mul(y).ok_or(RingError::Overflow)
}

#[inline]
fn two<I: RingInt>() -> I {
    I::one() + I::one()
}

/// `(a + b√2 + i(c + d√2)) / √2^k`, kept in canonical reduced form.
///
/// Canonical means either `k == 0` or the numerator is not divisible by
/// `√2` (that is, `a` and `c` are not both even). Two canonical scalars are
/// equal exactly when their fields are equal.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RingScalar<I> {
    a: I,
    b: I,
    c: I,
    d: I,
    k: u32,
}

impl<I: RingInt> RingScalar<I> {
    /// Builds `(a + b√2 + i(c + d√2)) / √2^k` and reduces it.
    pub fn new(a: I, b: I, c: I, d: I, k: u32) -> Self {
        let mut s = RingScalar { a, b, c, d, k };
        s.reduce();
        s
    }

    pub fn from_int(n: i64) -> Self {
        Self::new(int(n), I::zero(), I::zero(), I::zero(), 0)
    }

    pub fn zero() -> Self {
        RingScalar { a: I::zero(), b: I::zero(), c: I::zero(), d: I::zero(), k: 0 }
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn i() -> Self {
        Self::new(I::zero(), I::zero(), I::one(), I::zero(), 0)
    }

    pub fn sqrt2() -> Self {
        Self::new(I::zero(), I::one(), I::zero(), I::zero(), 0)
    }

    pub fn inv_sqrt2() -> Self {
        Self::new(I::one(), I::zero(), I::zero(), I::zero(), 1)
    }

    /// The primitive eighth root of unity `(1 + i)/√2`.
    pub fn omega() -> Self {
        Self::new(I::one(), I::zero(), I::one(), I::zero(), 1)
    }

    /// `ω^n` for any integer exponent.
    pub fn omega_pow(n: i64) -> Self {
        let mut r = Self::one();
        for _ in 0..n.rem_euclid(8) {
            r = r.mul_omega();
        }
        r
    }

    pub fn parts(&self) -> (&I, &I, &I, &I, u32) {
        (&self.a, &self.b, &self.c, &self.d, self.k)
    }

    pub fn denom_exp(&self) -> u32 {
        self.k
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero() && self.d.is_zero()
    }

    fn reduce(&mut self) {
        if self.is_zero() {
            self.k = 0;
            return;
        }
        while self.k > 0 && self.a.is_even() && self.c.is_even() {
            let half_a = self.a.div_floor(&two());
            let half_c = self.c.div_floor(&two());
            self.a = std::mem::replace(&mut self.b, half_a);
            self.c = std::mem::replace(&mut self.d, half_c);
            self.k -= 1;
        }
    }

    /// Numerator multiplied by `√2^shift` (denominator exponent unchanged).
    fn lift(&self, shift: u32) -> Result<(I, I, I, I), RingError> {
        let (mut a, mut b, mut c, mut d) =
            (self.a.clone(), self.b.clone(), self.c.clone(), self.d.clone());
        for _ in 0..shift {
            // (a + b√2)·√2 = 2b + a√2
            let na = cmul(&b, &two())?;
            let nc = cmul(&d, &two())?;
            b = a;
            d = c;
            a = na;
            c = nc;
        }
        Ok((a, b, c, d))
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, RingError> {
        let k = self.k.max(other.k);
        let (a1, b1, c1, d1) = self.lift(k - self.k)?;
        let (a2, b2, c2, d2) = other.lift(k - other.k)?;
        Ok(Self::new(cadd(&a1, &a2)?, cadd(&b1, &b2)?, cadd(&c1, &c2)?, cadd(&d1, &d2)?, k))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, RingError> {
        self.checked_add(&other.neg_ref())
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, RingError> {
        // real and imaginary parts are elements x + y√2 of Z[√2]
        let zmul = |x1: &I, y1: &I, x2: &I, y2: &I| -> Result<(I, I), RingError> {
            let r = cadd(&cmul(x1, x2)?, &cmul(&two(), &cmul(y1, y2)?)?)?;
            let s = cadd(&cmul(x1, y2)?, &cmul(y1, x2)?)?;
            Ok((r, s))
        };
        let (rr_a, rr_b) = zmul(&self.a, &self.b, &other.a, &other.b)?;
        let (ii_a, ii_b) = zmul(&self.c, &self.d, &other.c, &other.d)?;
        let (ri_a, ri_b) = zmul(&self.a, &self.b, &other.c, &other.d)?;
        let (ir_a, ir_b) = zmul(&self.c, &self.d, &other.a, &other.b)?;
        Ok(Self::new(
            csub(&rr_a, &ii_a)?,
            csub(&rr_b, &ii_b)?,
            cadd(&ri_a, &ir_a)?,
            cadd(&ri_b, &ir_b)?,
            self.k + other.k,
        ))
    }

    fn neg_ref(&self) -> Self {
        RingScalar {
            a: -self.a.clone(),
            b: -self.b.clone(),
            c: -self.c.clone(),
            d: -self.d.clone(),
            k: self.k,
        }
    }

    pub fn conj(&self) -> Self {
        RingScalar {
            a: self.a.clone(),
            b: self.b.clone(),
            c: -self.c.clone(),
            d: -self.d.clone(),
            k: self.k,
        }
    }

    /// Multiplication by `ω = (1 + i)/√2`.
    pub fn mul_omega(&self) -> Self {
        let ov = "ring arithmetic overflow";
        Self::new(
            csub(&self.a, &self.c).expect(ov),
            csub(&self.b, &self.d).expect(ov),
            cadd(&self.a, &self.c).expect(ov),
            cadd(&self.b, &self.d).expect(ov),
            self.k + 1,
        )
    }

    pub fn mul_i(&self) -> Self {
        RingScalar {
            a: -self.c.clone(),
            b: -self.d.clone(),
            c: self.a.clone(),
            d: self.b.clone(),
            k: self.k,
        }
    }

    /// Division by `√2^n`; always exact in this ring.
    pub fn div_sqrt2_pow(&self, n: u32) -> Self {
        Self::new(self.a.clone(), self.b.clone(), self.c.clone(), self.d.clone(), self.k + n)
    }

    /// Multiplication by `√2^n`.
    pub fn mul_sqrt2_pow(&self, n: u32) -> Result<Self, RingError> {
        if n <= self.k {
            let mut s = RingScalar { k: self.k - n, ..self.clone() };
            s.reduce();
            Ok(s)
        } else {
            let (a, b, c, d) = self.lift(n - self.k)?;
            Ok(Self::new(a, b, c, d, 0))
        }
    }

    /// `|p|² = p·p*` as an exact real.
    pub fn norm_sq(&self) -> QuadReal<I> {
        self.checked_norm_sq().expect("ring arithmetic overflow")
    }

    pub fn checked_norm_sq(&self) -> Result<QuadReal<I>, RingError> {
        // (a + b√2)² + (c + d√2)² = a²+2b²+c²+2d² + 2(ab+cd)√2, over 2^k
        let sq = |v: &I| cmul(v, v);
        let x = cadd(
            &cadd(&sq(&self.a)?, &sq(&self.c)?)?,
            &cmul(&two(), &cadd(&sq(&self.b)?, &sq(&self.d)?)?)?,
        )?;
        let y = cmul(&two(), &cadd(&cmul(&self.a, &self.b)?, &cmul(&self.c, &self.d)?)?)?;
        Ok(QuadReal::new(x, y, self.k))
    }

    /// The real part, as an element of `Z[1/√2]`.
    pub fn re(&self) -> QuadReal<I> {
        quad_from_sqrt2_denominator(self.a.clone(), self.b.clone(), self.k)
    }

    /// The imaginary part, as an element of `Z[1/√2]`.
    pub fn im(&self) -> QuadReal<I> {
        quad_from_sqrt2_denominator(self.c.clone(), self.d.clone(), self.k)
    }

    /// Round-to-nearest evaluation as a complex float.
    pub fn to_complex<F: Float + FromPrimitive>(&self) -> Complex<F> {
        let s2 = F::from_f64(std::f64::consts::SQRT_2).unwrap();
        let f = |v: &I| F::from_f64(v.to_f64().unwrap_or(f64::NAN)).unwrap();
        let scale = s2.powi(-(self.k as i32));
        Complex::new(
            (f(&self.a) + f(&self.b) * s2) * scale,
            (f(&self.c) + f(&self.d) * s2) * scale,
        )
    }

    pub fn to_c64(&self) -> Complex<f64> {
        self.to_complex::<f64>()
    }

    /// Converts the backing integer type.
    pub fn convert<J: RingInt>(&self) -> Result<RingScalar<J>, RingError> {
        let f = |v: &I| -> Result<J, RingError> {
            J::from_i128(v.to_i128().ok_or(RingError::Overflow)?).ok_or(RingError::Overflow)
        };
        Ok(RingScalar { a: f(&self.a)?, b: f(&self.b)?, c: f(&self.c)?, d: f(&self.d)?, k: self.k })
    }

    /// Sort key `(k, a, b, c, d)` used wherever a deterministic total order is needed.
    pub fn order_key(&self) -> (u32, &I, &I, &I, &I) {
        (self.k, &self.a, &self.b, &self.c, &self.d)
    }
}

fn int<I: RingInt>(n: i64) -> I {
    I::from_i64(n).expect("integer conversion")
}

/// `(a + b√2)/√2^k` rewritten as `(x + y√2)/2^j`.
fn quad_from_sqrt2_denominator<I: RingInt>(a: I, b: I, k: u32) -> QuadReal<I> {
    if k.is_multiple_of(2) {
        QuadReal::new(a, b, k / 2)
    } else {
        // (a + b√2)/√2 = b + (a/2)√2  ->  (2b + a√2)/2
        QuadReal::new(b * two(), a, k.div_ceil(2))
    }
}

impl<I: RingInt> Ord for RingScalar<I> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order_key().cmp(&other.order_key())
    }
}

impl<I: RingInt> PartialOrd for RingScalar<I> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<I: RingInt> Default for RingScalar<I> {
    fn default() -> Self {
        Self::zero()
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl<'a, I: RingInt> $tr<&'a RingScalar<I>> for &'a RingScalar<I> {
            type Output = RingScalar<I>;
            fn $method(self, rhs: &'a RingScalar<I>) -> RingScalar<I> {
                self.$checked(rhs).expect("ring arithmetic overflow")
            }
        }
        impl<I: RingInt> $tr for RingScalar<I> {
            type Output = RingScalar<I>;
            fn $method(self, rhs: RingScalar<I>) -> RingScalar<I> {
                self.$checked(&rhs).expect("ring arithmetic overflow")
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl<I: RingInt> Neg for RingScalar<I> {
    type Output = RingScalar<I>;
    fn neg(self) -> Self {
        self.neg_ref()
    }
}

impl<I: RingInt> Neg for &RingScalar<I> {
    type Output = RingScalar<I>;
    fn neg(self) -> RingScalar<I> {
        self.neg_ref()
    }
}

impl<I: RingInt> fmt::Debug for RingScalar<I> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}, {}, {}, {}]", self.a, self.b, self.c, self.d, self.k)
    }
}

impl<I: RingInt> fmt::Display for RingScalar<I> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}√2 + i({} + {}√2))", self.a, self.b, self.c, self.d)?;
        if self.k > 0 {
            write!(f, "/√2^{}", self.k)?;
        }
        Ok(())
    }
}

impl<I: RingInt + Serialize> Serialize for RingScalar<I> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (&self.a, &self.b, &self.c, &self.d, self.k).serialize(s)
    }
}

impl<'de, I: RingInt + Deserialize<'de>> Deserialize<'de> for RingScalar<I> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (a, b, c, dd, k) = <(I, I, I, I, u32)>::deserialize(d)?;
        Ok(Self::new(a, b, c, dd, k))
    }
}

/// `(x + y√2) / 2^k`: an exact element of the real subring.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadReal<I> {
    x: I,
    y: I,
    k: u32,
}

impl<I: RingInt> QuadReal<I> {
    pub fn new(x: I, y: I, k: u32) -> Self {
        let mut q = QuadReal { x, y, k };
        if q.x.is_zero() && q.y.is_zero() {
            q.k = 0;
        }
        while q.k > 0 && q.x.is_even() && q.y.is_even() {
            q.x = q.x.div_floor(&two());
            q.y = q.y.div_floor(&two());
            q.k -= 1;
        }
        q
    }

    pub fn from_int(n: i64) -> Self {
        Self::new(int(n), I::zero(), 0)
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn parts(&self) -> (&I, &I, u32) {
        (&self.x, &self.y, self.k)
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.k == 0 && self.y.is_zero()
    }

    fn lift(&self, k: u32) -> Result<(I, I), RingError> {
        let mut x = self.x.clone();
        let mut y = self.y.clone();
        for _ in self.k..k {
            x = cmul(&x, &two())?;
            y = cmul(&y, &two())?;
        }
        Ok((x, y))
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, RingError> {
        let k = self.k.max(other.k);
        let (x1, y1) = self.lift(k)?;
        let (x2, y2) = other.lift(k)?;
        Ok(Self::new(cadd(&x1, &x2)?, cadd(&y1, &y2)?, k))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, RingError> {
        self.checked_add(&-other.clone())
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, RingError> {
        let x = cadd(&cmul(&self.x, &other.x)?, &cmul(&two(), &cmul(&self.y, &other.y)?)?)?;
        let y = cadd(&cmul(&self.x, &other.y)?, &cmul(&self.y, &other.x)?)?;
        Ok(Self::new(x, y, self.k + other.k))
    }

    /// Multiplies by `2^n`.
    pub fn mul_pow2(&self, n: u32) -> Result<Self, RingError> {
        if n <= self.k {
            Ok(Self::new(self.x.clone(), self.y.clone(), self.k - n))
        } else {
            let (x, y) = QuadReal { x: self.x.clone(), y: self.y.clone(), k: 0 }.lift(n - self.k)?;
            Ok(Self::new(x, y, 0))
        }
    }

    /// Divides by `2^n`.
    pub fn div_pow2(&self, n: u32) -> Self {
        Self::new(self.x.clone(), self.y.clone(), self.k + n)
    }

    /// Sign of the exact value.
    pub fn signum(&self) -> Ordering {
        let (x, y) = (&self.x, &self.y);
        let zero = I::zero();
        match (x.cmp(&zero), y.cmp(&zero)) {
            (Ordering::Equal, Ordering::Equal) => Ordering::Equal,
            (sx, sy) if sx != Ordering::Less && sy != Ordering::Less => Ordering::Greater,
            (sx, sy) if sx != Ordering::Greater && sy != Ordering::Greater => Ordering::Less,
            (sx, _) => {
                // opposite signs: compare x² against 2y²
                let x2 = cmul(x, x).expect("ring arithmetic overflow");
                let y2 = cmul(&two(), &cmul(y, y).expect("ring arithmetic overflow"))
                    .expect("ring arithmetic overflow");
                let dominant_x = x2 > y2;
                match (sx, dominant_x) {
                    (Ordering::Greater, true) | (Ordering::Less, false) => Ordering::Greater,
                    _ => Ordering::Less,
                }
            }
        }
    }

    /// Galois conjugate `√2 -> -√2`.
    pub fn galois_conj(&self) -> Self {
        QuadReal { x: self.x.clone(), y: -self.y.clone(), k: self.k }
    }

    pub fn to_float<F: Float + FromPrimitive>(&self) -> F {
        let s2 = F::from_f64(std::f64::consts::SQRT_2).unwrap();
        let f = |v: &I| F::from_f64(v.to_f64().unwrap_or(f64::NAN)).unwrap();
        (f(&self.x) + f(&self.y) * s2) / F::from_f64(2.0).unwrap().powi(self.k as i32)
    }

    pub fn to_f64(&self) -> f64 {
        self.to_float::<f64>()
    }

    /// Embeds into the complex ring.
    pub fn to_ring(&self) -> RingScalar<I> {
        // (x + y√2)/2^k = (x + y√2)/√2^{2k}
        RingScalar::new(self.x.clone(), self.y.clone(), I::zero(), I::zero(), 2 * self.k)
    }

    pub fn convert<J: RingInt>(&self) -> Result<QuadReal<J>, RingError> {
        let f = |v: &I| -> Result<J, RingError> {
            J::from_i128(v.to_i128().ok_or(RingError::Overflow)?).ok_or(RingError::Overflow)
        };
        Ok(QuadReal { x: f(&self.x)?, y: f(&self.y)?, k: self.k })
    }
}

impl<I: RingInt> Ord for QuadReal<I> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.checked_sub(other).expect("ring arithmetic overflow").signum()
    }
}

impl<I: RingInt> PartialOrd for QuadReal<I> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<I: RingInt> Neg for QuadReal<I> {
    type Output = QuadReal<I>;
    fn neg(self) -> Self {
        QuadReal { x: -self.x, y: -self.y, k: self.k }
    }
}

impl<'a, I: RingInt> Add<&'a QuadReal<I>> for &'a QuadReal<I> {
    type Output = QuadReal<I>;
    fn add(self, rhs: &'a QuadReal<I>) -> QuadReal<I> {
        self.checked_add(rhs).expect("ring arithmetic overflow")
    }
}

impl<'a, I: RingInt> Mul<&'a QuadReal<I>> for &'a QuadReal<I> {
    type Output = QuadReal<I>;
    fn mul(self, rhs: &'a QuadReal<I>) -> QuadReal<I> {
        self.checked_mul(rhs).expect("ring arithmetic overflow")
    }
}

impl<I: RingInt> fmt::Debug for QuadReal<I> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}, {}]", self.x, self.y, self.k)
    }
}

impl<I: RingInt> fmt::Display for QuadReal<I> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.y.is_zero() {
            write!(f, "{}", self.x)?;
        } else {
            write!(f, "({} + {}√2)", self.x, self.y)?;
        }
        if self.k > 0 {
            write!(f, "/{}", 1u128 << self.k.min(127))?;
        }
        Ok(())
    }
}

impl<I: RingInt + Serialize> Serialize for QuadReal<I> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (&self.x, &self.y, self.k).serialize(s)
    }
}

impl<'de, I: RingInt + Deserialize<'de>> Deserialize<'de> for QuadReal<I> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (x, y, k) = <(I, I, u32)>::deserialize(d)?;
        Ok(Self::new(x, y, k))
    }
}

/// An exact element `(a + b√2) / den` of `Q(√2)` with `den > 0` and the
/// three integers coprime.
///
/// Used for expected T counts `t / p`, which leave the ring but stay in
/// `Q(√2)`. The representation is canonical, so equality is structural and
/// ordering is exact.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadRatio<I> {
    a: I,
    b: I,
    den: I,
}

impl<I: RingInt> QuadRatio<I> {
    /// `num / den`, rationalized with the Galois conjugate of `den`.
    pub fn new(num: QuadReal<I>, den: QuadReal<I>) -> Result<Self, RingError> {
        if den.is_zero() {
            return Err(RingError::DivisionByZero);
        }
        let (x1, y1, k1) = (num.x.clone(), num.y.clone(), num.k);
        let (x2, y2, k2) = (den.x.clone(), den.y.clone(), den.k);
        // (x1 + y1√2)(x2 − y2√2) = x1x2 − 2y1y2 + (y1x2 − x1y2)√2
        let a = csub(&cmul(&x1, &x2)?, &cmul(&two(), &cmul(&y1, &y2)?)?)?;
        let b = csub(&cmul(&y1, &x2)?, &cmul(&x1, &y2)?)?;
        let n = csub(&cmul(&x2, &x2)?, &cmul(&two(), &cmul(&y2, &y2)?)?)?;
        let (a, b, n) = if k2 >= k1 {
            let s = pow2::<I>(k2 - k1)?;
            (cmul(&a, &s)?, cmul(&b, &s)?, n)
        } else {
            (a, b, cmul(&n, &pow2::<I>(k1 - k2)?)?)
        };
        Self::from_parts(a, b, n)
    }

    /// `(a + b√2) / den`.
    pub fn from_parts(a: I, b: I, den: I) -> Result<Self, RingError> {
        if den.is_zero() {
            return Err(RingError::DivisionByZero);
        }
        let (mut a, mut b, mut den) = (a, b, den);
        if den.is_negative() {
            a = -a;
            b = -b;
            den = -den;
        }
        let g = a.gcd(&b).gcd(&den);
        if !g.is_one() {
            a = a / g.clone();
            b = b / g.clone();
            den = den / g;
        }
        Ok(QuadRatio { a, b, den })
    }

    pub fn from_int(n: i64) -> Self {
        QuadRatio { a: int(n), b: I::zero(), den: I::one() }
    }

    pub fn parts(&self) -> (&I, &I, &I) {
        (&self.a, &self.b, &self.den)
    }

    pub fn to_f64(&self) -> f64 {
        let f = |v: &I| v.to_f64().unwrap_or(f64::NAN);
        (f(&self.a) + f(&self.b) * std::f64::consts::SQRT_2) / f(&self.den)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, RingError> {
        let a = cadd(&cmul(&self.a, &other.den)?, &cmul(&other.a, &self.den)?)?;
        let b = cadd(&cmul(&self.b, &other.den)?, &cmul(&other.b, &self.den)?)?;
        Self::from_parts(a, b, cmul(&self.den, &other.den)?)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, RingError> {
        let neg = QuadRatio { a: -other.a.clone(), b: -other.b.clone(), den: other.den.clone() };
        self.checked_add(&neg)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, RingError> {
        let a = cadd(&cmul(&self.a, &other.a)?, &cmul(&two(), &cmul(&self.b, &other.b)?)?)?;
        let b = cadd(&cmul(&self.a, &other.b)?, &cmul(&self.b, &other.a)?)?;
        Self::from_parts(a, b, cmul(&self.den, &other.den)?)
    }

    pub fn signum(&self) -> Ordering {
        QuadReal { x: self.a.clone(), y: self.b.clone(), k: 0 }.signum()
    }

    pub fn convert<J: RingInt>(&self) -> Result<QuadRatio<J>, RingError> {
        let f = |v: &I| -> Result<J, RingError> {
            J::from_i128(v.to_i128().ok_or(RingError::Overflow)?).ok_or(RingError::Overflow)
        };
        Ok(QuadRatio { a: f(&self.a)?, b: f(&self.b)?, den: f(&self.den)? })
    }
}

fn pow2<I: RingInt>(n: u32) -> Result<I, RingError> {
    let mut acc = I::one();
    for _ in 0..n {
        acc = cmul(&acc, &two())?;
    }
    Ok(acc)
}

impl<I: RingInt> Ord for QuadRatio<I> {
    fn cmp(&self, other: &Self) -> Ordering {
        // denominators are positive
        let d = self.checked_sub(other).expect("ring arithmetic overflow");
        d.signum()
    }
}

impl<I: RingInt> PartialOrd for QuadRatio<I> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<I: RingInt> fmt::Debug for QuadRatio<I> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}, {}]", self.a, self.b, self.den)
    }
}

impl<I: RingInt> fmt::Display for QuadRatio<I> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)?;
        } else {
            write!(f, "({} + {}√2)", self.a, self.b)?;
        }
        if !self.den.is_one() {
            write!(f, "/{}", self.den)?;
        }
        Ok(())
    }
}

impl<I: RingInt + Serialize> Serialize for QuadRatio<I> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (&self.a, &self.b, &self.den).serialize(s)
    }
}

impl<'de, I: RingInt + Deserialize<'de>> Deserialize<'de> for QuadRatio<I> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (a, b, den) = <(I, I, I)>::deserialize(d)?;
        QuadRatio::from_parts(a, b, den).map_err(serde::de::Error::custom)
    }
}

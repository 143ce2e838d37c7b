//! Double-double arithmetic (an unevaluated sum `hi + lo` of two f64 with
//! about 106 significant bits). Used to evaluate finite differences far
//! below f64 rounding noise. Only the functions the forward pass touches
//! (arithmetic, exp, ln, tanh, comparisons) are carried at full precision;
//! the rest of `Float` falls back to f64 on the leading part.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::num::FpCategory;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, Sub, SubAssign};

use num_traits::{Float, FromPrimitive, Num, NumCast, One, ToPrimitive, Zero};

#[derive(Clone, Copy, Default, PartialEq)]
pub struct DD {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn split(a: f64) -> (f64, f64) {
    let t = 134_217_729.0 * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
}

const LN2: DD = DD {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

impl DD {
    pub const fn new(hi: f64) -> Self {
        Self { hi, lo: 0.0 }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    fn norm(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        Self { hi, lo }
    }

    fn scale2(self, k: i32) -> Self {
        let f = 2f64.powi(k);
        Self {
            hi: self.hi * f,
            lo: self.lo * f,
        }
    }

    fn dd_exp(self) -> Self {
        if self.hi > 709.0 {
            return Self::new(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Self::zero();
        }
        let k = (self.hi / LN2.hi).round();
        let r = (self - LN2 * Self::new(k)).scale2(-10);
        // Taylor series on |r| < 2^-10·ln2/2
        let mut term = Self::one();
        let mut sum = Self::one();
        for n in 1..20 {
            term = term * r / Self::new(n as f64);
            sum += term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        for _ in 0..10 {
            sum = sum * sum;
        }
        let k = k as i32;
        // apply 2^k in two halves so neither factor overflows
        sum.scale2(k / 2).scale2(k - k / 2)
    }

    fn dd_ln(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 {
                Self::new(f64::NEG_INFINITY)
            } else {
                Self::new(f64::NAN)
            };
        }
        let mut y = Self::new(self.hi.ln());
        for _ in 0..2 {
            y = y + self * (-y).dd_exp() - Self::one();
        }
        y
    }

    fn dd_tanh(self) -> Self {
        if self.hi < 0.0 {
            return -(-self).dd_tanh();
        }
        if self.hi > 40.0 {
            return Self::one();
        }
        let e = (self + self).dd_exp();
        Self::one() - Self::new(2.0) / (e + Self::one())
    }

    fn dd_sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Self::new(self.hi.sqrt());
        }
        let y = Self::new(self.hi.sqrt());
        y + (self - y * y) / (y + y)
    }
}

impl fmt::Debug for DD {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DD({:e} + {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for DD {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.hi, f)
    }
}

impl PartialOrd for DD {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            o => Some(o),
        }
    }
}

impl Neg for DD {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for DD {
    type Output = Self;
    fn add(self, b: Self) -> Self {
        let (s, e) = two_sum(self.hi, b.hi);
        if !s.is_finite() {
            return Self::new(s);
        }
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        Self::norm(s, e + f)
    }
}

impl Sub for DD {
    type Output = Self;
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for DD {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        let (p, e) = two_prod(self.hi, b.hi);
        if !p.is_finite() {
            return Self::new(p);
        }
        Self::norm(p, e + (self.hi * b.lo + self.lo * b.hi))
    }
}

impl Div for DD {
    type Output = Self;
    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        if !q1.is_finite() {
            return Self::new(q1);
        }
        let r = self - b * Self::new(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * Self::new(q2);
        let q3 = r.hi / b.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        Self { hi: q1, lo: q2 } + Self::new(q3)
    }
}

impl Rem for DD {
    type Output = Self;
    fn rem(self, b: Self) -> Self {
        self - (self / b).trunc() * b
    }
}

macro_rules! assign_op {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr for DD {
            fn $m(&mut self, b: Self) {
                *self = *self $op b;
            }
        }
    };
}
assign_op!(AddAssign, add_assign, +);
assign_op!(SubAssign, sub_assign, -);
assign_op!(MulAssign, mul_assign, *);
assign_op!(DivAssign, div_assign, /);

impl Sum for DD {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |a, b| a + b)
    }
}

impl Zero for DD {
    fn zero() -> Self {
        Self::new(0.0)
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0
    }
}

impl One for DD {
    fn one() -> Self {
        Self::new(1.0)
    }
}

impl Num for DD {
    type FromStrRadixErr = num_traits::ParseFloatError;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        f64::from_str_radix(s, radix).map(Self::new)
    }
}

impl ToPrimitive for DD {
    fn to_i64(&self) -> Option<i64> {
        self.hi.to_i64()
    }
    fn to_u64(&self) -> Option<u64> {
        self.hi.to_u64()
    }
    fn to_f64(&self) -> Option<f64> {
        Some(self.hi + self.lo)
    }
}

impl FromPrimitive for DD {
    fn from_i64(n: i64) -> Option<Self> {
        Some(Self::new(n as f64))
    }
    fn from_u64(n: u64) -> Option<Self> {
        Some(Self::new(n as f64))
    }
    fn from_f64(n: f64) -> Option<Self> {
        Some(Self::new(n))
    }
}

impl NumCast for DD {
    fn from<T: ToPrimitive>(n: T) -> Option<Self> {
        n.to_f64().map(Self::new)
    }
}

macro_rules! via_hi {
    ($($m:ident),*) => {
        $(fn $m(self) -> Self { Self::new(self.hi.$m()) })*
    };
}

impl Float for DD {
    fn nan() -> Self {
        Self::new(f64::NAN)
    }
    fn infinity() -> Self {
        Self::new(f64::INFINITY)
    }
    fn neg_infinity() -> Self {
        Self::new(f64::NEG_INFINITY)
    }
    fn neg_zero() -> Self {
        Self::new(-0.0)
    }
    fn min_value() -> Self {
        Self::new(f64::MIN)
    }
    fn min_positive_value() -> Self {
        Self::new(f64::MIN_POSITIVE)
    }
    fn max_value() -> Self {
        Self::new(f64::MAX)
    }
    fn is_nan(self) -> bool {
        self.hi.is_nan()
    }
    fn is_infinite(self) -> bool {
        self.hi.is_infinite()
    }
    fn is_finite(self) -> bool {
        self.hi.is_finite()
    }
    fn is_normal(self) -> bool {
        self.hi.is_normal()
    }
    fn classify(self) -> FpCategory {
        self.hi.classify()
    }
    fn floor(self) -> Self {
        let h = self.hi.floor();
        if h == self.hi {
            Self::norm(h, self.lo.floor())
        } else {
            Self::new(h)
        }
    }
    fn ceil(self) -> Self {
        -(-self).floor()
    }
    fn round(self) -> Self {
        (self + Self::new(0.5)).floor()
    }
    fn trunc(self) -> Self {
        if self.hi >= 0.0 {
            self.floor()
        } else {
            self.ceil()
        }
    }
    fn fract(self) -> Self {
        self - self.trunc()
    }
    fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }
    fn signum(self) -> Self {
        Self::new(self.hi.signum())
    }
    fn is_sign_positive(self) -> bool {
        self.hi.is_sign_positive()
    }
    fn is_sign_negative(self) -> bool {
        self.hi.is_sign_negative()
    }
    fn mul_add(self, a: Self, b: Self) -> Self {
        self * a + b
    }
    fn recip(self) -> Self {
        Self::one() / self
    }
    fn powi(self, n: i32) -> Self {
        let mut out = Self::one();
        for _ in 0..n.unsigned_abs() {
            out *= self;
        }
        if n < 0 {
            out.recip()
        } else {
            out
        }
    }
    fn powf(self, n: Self) -> Self {
        (n * self.ln()).exp()
    }
    fn sqrt(self) -> Self {
        self.dd_sqrt()
    }
    fn exp(self) -> Self {
        self.dd_exp()
    }
    fn exp2(self) -> Self {
        (self * LN2).dd_exp()
    }
    fn ln(self) -> Self {
        self.dd_ln()
    }
    fn log(self, base: Self) -> Self {
        self.ln() / base.ln()
    }
    fn log2(self) -> Self {
        self.ln() / LN2
    }
    fn log10(self) -> Self {
        self.ln() / Self::new(10.0).ln()
    }
    fn max(self, other: Self) -> Self {
        if self.is_nan() || other > self {
            other
        } else {
            self
        }
    }
    fn min(self, other: Self) -> Self {
        if self.is_nan() || other < self {
            other
        } else {
            self
        }
    }
    fn abs_sub(self, other: Self) -> Self {
        (self - other).max(Self::zero())
    }
    fn hypot(self, other: Self) -> Self {
        (self * self + other * other).sqrt()
    }
    fn tanh(self) -> Self {
        self.dd_tanh()
    }
    fn atan2(self, other: Self) -> Self {
        Self::new(self.hi.atan2(other.hi))
    }
    fn sin_cos(self) -> (Self, Self) {
        (self.sin(), self.cos())
    }
    fn exp_m1(self) -> Self {
        self.exp() - Self::one()
    }
    fn ln_1p(self) -> Self {
        (self + Self::one()).ln()
    }
    fn integer_decode(self) -> (u64, i16, i8) {
        self.hi.integer_decode()
    }
    via_hi!(cbrt, sin, cos, tan, asin, acos, atan, sinh, cosh, asinh, acosh, atanh);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beats_f64_on_identities() {
        let third = DD::one() / DD::new(3.0);
        assert!((third * DD::new(3.0) - DD::one()).abs().hi() < 1e-31);
        for x in [0.3, -2.5, 7.0, 1e-3] {
            let x = DD::new(x);
            let r = (x.exp().ln() - x).abs().hi();
            assert!(r < 1e-27, "{x:?}: {r:e}");
            let e = (x + x).exp();
            let t = (e - DD::one()) / (e + DD::one());
            assert!((x.tanh() - t).abs().hi() < 1e-27);
        }
        let two = DD::new(2.0);
        assert!((two.sqrt() * two.sqrt() - two).abs().hi() < 1e-30);
    }
}

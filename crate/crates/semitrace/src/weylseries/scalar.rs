use std::fmt::Debug;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::clifford::C64;

/// Coefficient field for formal series.
///
/// Two implementations: [`C64`] (floating point, tolerant comparisons) and
/// [`QSqrt2`] (exact arithmetic in `Q(i, √2)`).
pub trait Scalar: Clone + Debug + PartialEq + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn rational(p: i64, q: i64) -> Self;
    fn gaussian(re: i64, im: i64) -> Self;
    fn imag_unit() -> Self {
        Self::gaussian(0, 1)
    }
    fn sqrt2() -> Self;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn negated(&self) -> Self;
    fn recip(&self) -> Option<Self>;
    fn vanishes(&self) -> bool;
    fn magnitude(&self) -> f64;
    fn to_c64(&self) -> C64;
    fn conjugate(&self) -> Self;
    fn is_exact() -> bool;

    fn integer(n: i64) -> Self {
        Self::rational(n, 1)
    }
}

impl Scalar for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn rational(p: i64, q: i64) -> Self {
        C64::new(p as f64 / q as f64, 0.0)
    }
    fn gaussian(re: i64, im: i64) -> Self {
        C64::new(re as f64, im as f64)
    }
    fn sqrt2() -> Self {
        C64::new(std::f64::consts::SQRT_2, 0.0)
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negated(&self) -> Self {
        -self
    }
    fn recip(&self) -> Option<Self> {
        if self.norm() == 0.0 {
            None
        } else {
            Some(self.inv())
        }
    }
    fn vanishes(&self) -> bool {
        self.norm() < 1e-14
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn to_c64(&self) -> C64 {
        *self
    }
    fn conjugate(&self) -> Self {
        self.conj()
    }
    fn is_exact() -> bool {
        false
    }
}

type QI = Complex<BigRational>;

fn qi(re: i64, im: i64, den: i64) -> QI {
    Complex::new(
        BigRational::new(BigInt::from(re), BigInt::from(den)),
        BigRational::new(BigInt::from(im), BigInt::from(den)),
    )
}

fn qi_f64(z: &QI) -> C64 {
    C64::new(z.re.to_f64().unwrap_or(f64::NAN), z.im.to_f64().unwrap_or(f64::NAN))
}

/// `a + b√2` with `a, b ∈ Q(i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QSqrt2 {
    pub a: QI,
    pub b: QI,
}

impl QSqrt2 {
    pub fn new(a: QI, b: QI) -> Self {
        QSqrt2 { a, b }
    }

    /// `(p/q)·√2`.
    pub fn sqrt2_times(p: i64, q: i64) -> Self {
        QSqrt2 { a: qi(0, 0, 1), b: qi(p, 0, q) }
    }
}

impl Scalar for QSqrt2 {
    fn zero() -> Self {
        QSqrt2 { a: qi(0, 0, 1), b: qi(0, 0, 1) }
    }
    fn one() -> Self {
        QSqrt2 { a: qi(1, 0, 1), b: qi(0, 0, 1) }
    }
    fn rational(p: i64, q: i64) -> Self {
        QSqrt2 { a: qi(p, 0, q), b: qi(0, 0, 1) }
    }
    fn gaussian(re: i64, im: i64) -> Self {
        QSqrt2 { a: qi(re, im, 1), b: qi(0, 0, 1) }
    }
    fn sqrt2() -> Self {
        QSqrt2 { a: qi(0, 0, 1), b: qi(1, 0, 1) }
    }
    fn plus(&self, o: &Self) -> Self {
        QSqrt2 { a: &self.a + &o.a, b: &self.b + &o.b }
    }
    fn minus(&self, o: &Self) -> Self {
        QSqrt2 { a: &self.a - &o.a, b: &self.b - &o.b }
    }
    fn times(&self, o: &Self) -> Self {
        let two = qi(2, 0, 1);
        QSqrt2 {
            a: &self.a * &o.a + &self.b * &o.b * two,
            b: &self.a * &o.b + &self.b * &o.a,
        }
    }
    fn negated(&self) -> Self {
        QSqrt2 { a: -self.a.clone(), b: -self.b.clone() }
    }
    fn recip(&self) -> Option<Self> {
        if self.vanishes() {
            return None;
        }
        let n = &self.a * &self.a - &self.b * &self.b * qi(2, 0, 1);
        let ninv = Complex::new(BigRational::one(), BigRational::zero()) / n;
        Some(QSqrt2 { a: &self.a * &ninv, b: -(&self.b * &ninv) })
    }
    fn vanishes(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
    fn magnitude(&self) -> f64 {
        self.to_c64().norm()
    }
    fn to_c64(&self) -> C64 {
        qi_f64(&self.a) + qi_f64(&self.b) * std::f64::consts::SQRT_2
    }
    fn conjugate(&self) -> Self {
        QSqrt2 { a: self.a.conj(), b: self.b.conj() }
    }
    fn is_exact() -> bool {
        true
    }
}

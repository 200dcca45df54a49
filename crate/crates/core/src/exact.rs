//! Gaussian-rational scalars and the small amount of combinatorics the rest of
//! the crate needs.
//!
//! Every exact quantity in the crate is a [`Cq`], a complex number whose real
//! and imaginary parts are arbitrary-precision rationals. Floating values enter
//! only through [`from_f64`], which is lossless: every finite `f64` is a dyadic
//! rational.

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Complex number over exact rationals.
pub type Cq = Complex<BigRational>;

/// Scalar field the generic polynomial code runs over.
///
/// Implemented for [`Cq`] (exact path) and [`Complex64`] (floating path).
pub trait Scalar:
    Clone
    + PartialEq
    + std::fmt::Debug
    + Zero
    + One
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Neg<Output = Self>
{
    fn from_int(value: i64) -> Self;
}

impl Scalar for Cq {
    fn from_int(value: i64) -> Self {
        int(value)
    }
}

impl Scalar for Complex64 {
    fn from_int(value: i64) -> Self {
        Complex64::new(value as f64, 0.0)
    }
}

pub fn rat(numer: i64, denom: i64) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Exact complex number `re + i·im` from integer parts.
pub fn int(re: i64) -> Cq {
    Cq::new(BigRational::from_integer(re.into()), BigRational::zero())
}

pub fn cq(re: BigRational, im: BigRational) -> Cq {
    Cq::new(re, im)
}

/// The imaginary unit.
pub fn imag_unit() -> Cq {
    Cq::new(BigRational::zero(), BigRational::one())
}

pub fn real(value: BigRational) -> Cq {
    Cq::new(value, BigRational::zero())
}

/// Lossless conversion of a finite float to a rational. Returns `None` for
/// NaN and infinities.
pub fn rational_from_f64(value: f64) -> Option<BigRational> {
    if value == 0.0 {
        // from_float maps -0.0 to a well-formed zero as well, but be explicit.
        return Some(BigRational::zero());
    }
    BigRational::from_float(value)
}

pub fn from_f64(value: Complex64) -> Option<Cq> {
    Some(Cq::new(
        rational_from_f64(value.re)?,
        rational_from_f64(value.im)?,
    ))
}

pub fn rational_to_f64(value: &BigRational) -> f64 {
    value.to_f64().unwrap_or_else(|| {
        // Huge numerators/denominators: fall back to a ratio of floats.
        let n = value.numer().to_f64().unwrap_or(f64::NAN);
        let d = value.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn to_c64(value: &Cq) -> Complex64 {
    Complex64::new(rational_to_f64(&value.re), rational_to_f64(&value.im))
}

/// Complex conjugate.
pub fn conj(value: &Cq) -> Cq {
    Cq::new(value.re.clone(), -value.im.clone())
}

/// `i^p` for a nonnegative power.
pub fn i_pow(power: usize) -> Cq {
    match power % 4 {
        0 => int(1),
        1 => imag_unit(),
        2 => int(-1),
        _ => -imag_unit(),
    }
}

pub fn pow(base: &Cq, exponent: usize) -> Cq {
    let mut acc = Cq::one();
    for _ in 0..exponent {
        acc *= base.clone();
    }
    acc
}

/// Binomial coefficient `C(n, k)`; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        // Exact at every step: acc * (n - i) is divisible by (i + 1).
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

pub fn binomial_cq(n: usize, k: usize) -> Cq {
    real(BigRational::from_integer(binomial(n, k)))
}

//! Rational functions `N(z)/D(z)` with exact derivatives of any order.

use crate::error::{Error, Result};
use crate::exact::Scalar;
use crate::poly::Poly;

#[derive(Clone, Debug, PartialEq)]
pub struct RationalFunction<T: Scalar> {
    num: Poly<T>,
    den: Poly<T>,
}

impl<T: Scalar> RationalFunction<T> {
    pub fn new(num: Poly<T>, den: Poly<T>) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::InvalidTestFunction("zero denominator".into()));
        }
        Ok(RationalFunction { num, den })
    }

    pub fn constant(c: T) -> Self {
        RationalFunction {
            num: Poly::constant(c),
            den: Poly::constant(T::one()),
        }
    }

    pub fn polynomial(num: Poly<T>) -> Self {
        RationalFunction {
            num,
            den: Poly::constant(T::one()),
        }
    }

    pub fn zero() -> Self {
        Self::polynomial(Poly::zero())
    }

    pub fn num(&self) -> &Poly<T> {
        &self.num
    }

    pub fn den(&self) -> &Poly<T> {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// `deg D − deg N`; `None` for the zero function.
    pub fn decay_order(&self) -> Option<i64> {
        let n = self.num.degree()? as i64;
        let d = self.den.degree().unwrap_or(0) as i64;
        Some(d - n)
    }

    /// `None` where the denominator vanishes.
    pub fn eval(&self, z: &T) -> Option<T> {
        let d = self.den.eval(z);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(z) / d)
    }

    pub fn product(&self, other: &Self) -> Self {
        RationalFunction {
            num: self.num.clone() * other.num.clone(),
            den: self.den.clone() * other.den.clone(),
        }
    }

    /// The `n`-th derivative as `P_n / D^{n+1}`, built with
    /// `(P/D^p)' = (P' D − p P D') / D^{p+1}`.
    pub fn nth_derivative(&self, n: usize) -> Self {
        let d_prime = self.den.derivative();
        let mut p = self.num.clone();
        for power in 1..=n {
            p = p.derivative() * self.den.clone()
                - (p * d_prime.clone()).scale(&T::from_int(power as i64));
        }
        RationalFunction {
            num: p,
            den: self.den.pow(n + 1),
        }
    }

    pub fn derivative_at(&self, n: usize, z: &T) -> Option<T> {
        self.nth_derivative(n).eval(z)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> RationalFunction<U> {
        RationalFunction {
            num: self.num.map(&f),
            den: self.den.map(&f),
        }
    }
}

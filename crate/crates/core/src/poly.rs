//! Dense univariate polynomials over a [`Scalar`] field.
//!
//! Used twice: as polynomials in time `t` (the non-exponential factors of an
//! evolved operator) and as polynomials in complex energy `z` (the S-matrix
//! model and its test functions).

use crate::exact::Scalar;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Coefficients in ascending degree order. The representation is canonical:
/// trailing zeros are stripped, so the zero polynomial has no coefficients.
#[derive(Clone, PartialEq)]
pub struct Poly<T: Scalar> {
    coeffs: Vec<T>,
}

impl<T: Scalar> Poly<T> {
    fn normalize(mut self) -> Self {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        self
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: T) -> Self {
        Poly { coeffs: vec![c] }.normalize()
    }

    /// `c · x^degree`.
    pub fn monomial(c: T, degree: usize) -> Self {
        let mut coeffs = vec![T::zero(); degree + 1];
        coeffs[degree] = c;
        Poly { coeffs }.normalize()
    }

    pub fn from_coeffs(coeffs: Vec<T>) -> Self {
        Poly { coeffs }.normalize()
    }

    /// Monic polynomial with the given roots, `∏ (x − root)`.
    pub fn from_roots<'a, I>(roots: I) -> Self
    where
        I: IntoIterator<Item = &'a T>,
        T: 'a,
    {
        roots
            .into_iter()
            .fold(Self::constant(T::one()), |acc, root| {
                acc * Poly::from_coeffs(vec![-root.clone(), T::one()])
            })
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Coefficient of `x^i` (zero past the degree).
    pub fn coeff(&self, i: usize) -> T {
        self.coeffs.get(i).cloned().unwrap_or_else(T::zero)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// True when the polynomial has no positive-degree terms.
    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c.clone() * T::from_int(i as i64))
            .collect();
        Poly::from_coeffs(coeffs)
    }

    pub fn scale(&self, factor: &T) -> Self {
        Poly::from_coeffs(
            self.coeffs
                .iter()
                .map(|c| c.clone() * factor.clone())
                .collect(),
        )
    }

    pub fn pow(&self, exponent: usize) -> Self {
        (0..exponent).fold(Self::constant(T::one()), |acc, _| acc * self.clone())
    }

    /// Coefficient-wise conversion into another scalar field.
    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Poly<U> {
        Poly::from_coeffs(self.coeffs.iter().map(f).collect())
    }
}

impl<T: Scalar> Add for Poly<T> {
    type Output = Poly<T>;

    fn add(self, rhs: Self) -> Self {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        Poly::from_coeffs((0..len).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl<T: Scalar> Sub for Poly<T> {
    type Output = Poly<T>;

    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<T: Scalar> Neg for Poly<T> {
    type Output = Poly<T>;

    fn neg(self) -> Self {
        Poly {
            coeffs: self.coeffs.into_iter().map(|c| -c).collect(),
        }
    }
}

impl<T: Scalar> Mul for Poly<T> {
    type Output = Poly<T>;

    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::from_coeffs(out)
    }
}

impl<T: Scalar> fmt::Debug for Poly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match i {
                0 => format!("({c:?})"),
                1 => format!("({c:?})·x"),
                _ => format!("({c:?})·x^{i}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, Cq};
    use num_traits::Zero;

    fn p(c: &[i64]) -> Poly<Cq> {
        Poly::from_coeffs(c.iter().map(|&v| int(v)).collect())
    }

    #[test]
    fn trailing_zeros_are_stripped() {
        assert_eq!(p(&[1, 2, 0, 0]).degree(), Some(1));
        assert!(p(&[0, 0]).is_zero());
        assert_eq!(p(&[]).degree(), None);
    }

    #[test]
    fn product_and_derivative() {
        // (1 + x)(1 - x) = 1 - x^2
        assert_eq!(p(&[1, 1]) * p(&[1, -1]), p(&[1, 0, -1]));
        assert_eq!(p(&[5, 3, 4]).derivative(), p(&[3, 8]));
        assert!(p(&[7]).derivative().is_zero());
    }

    #[test]
    fn roots_and_evaluation() {
        let q = Poly::from_roots(&[int(2), int(-3)]);
        assert_eq!(q, p(&[-6, 1, 1]));
        assert!(q.eval(&int(2)).is_zero());
        assert_eq!(q.eval(&int(1)), int(-4));
    }
}

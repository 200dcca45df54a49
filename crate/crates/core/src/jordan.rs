//! The Hamiltonian restricted to the span of the `r` Gamow vectors of a pole,
//! and the exact time evolution of Gamow chain vectors.
//!
//! The chain vector of order `k` is identified with the coordinate vector
//! `e_k`. In that basis the Hamiltonian acts as
//!
//! ```text
//! H e_k = z_R e_k + k e_{k-1}
//! ```
//!
//! i.e. a Jordan block whose superdiagonal carries `1, 2, …, r−1` rather than
//! all ones. A diagonal rescaling `e_k -> k! e_k` maps it to the unit form.

use crate::error::{Error, Result};
use crate::exact::{self, binomial_cq, Cq};
use crate::pole::{check_time, check_time_f64, ComplexPole};
use num_complex::Complex64;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Zero};

/// Energy-dimension exponent of the order-`k` Gamow vector: `−1/2 − k`.
pub fn ket_dimension(k: usize) -> Rational64 {
    Rational64::new(-1, 2) - Rational64::from_integer(k as i64)
}

/// A vector in the span of the Gamow chain of one pole.
///
/// The scalar prefactor `exp(−i z_R t)` produced by time evolution is kept
/// symbolically as `phase_time`; `coefficients` stay exact.
#[derive(Clone, Debug, PartialEq)]
pub struct GamowChainVector {
    pole: ComplexPole,
    coefficients: Vec<Cq>,
    phase_time: BigRational,
}

impl GamowChainVector {
    pub fn new(pole: &ComplexPole, coefficients: Vec<Cq>) -> Result<Self> {
        if coefficients.len() != pole.order() {
            return Err(Error::OrderOutOfRange {
                order: coefficients.len().saturating_sub(1),
                pole_order: pole.order(),
            });
        }
        Ok(GamowChainVector {
            pole: pole.clone(),
            coefficients,
            phase_time: BigRational::zero(),
        })
    }

    /// The basis vector `|z_R⁻⟩^(k)`.
    pub fn basis(pole: &ComplexPole, k: usize) -> Result<Self> {
        pole.check_order(k)?;
        let mut coefficients = vec![Cq::zero(); pole.order()];
        coefficients[k] = Cq::one();
        Self::new(pole, coefficients)
    }

    pub fn pole(&self) -> &ComplexPole {
        &self.pole
    }

    /// Coefficients multiplying the symbolic phase, indexed by order.
    pub fn coefficients(&self) -> &[Cq] {
        &self.coefficients
    }

    /// Accumulated evolution time `t` of the prefactor `exp(−i z_R t)`.
    pub fn phase_time(&self) -> &BigRational {
        &self.phase_time
    }

    pub fn dimension_tags(&self) -> Vec<Rational64> {
        (0..self.coefficients.len()).map(ket_dimension).collect()
    }

    /// Highest order with a nonzero coefficient.
    pub fn top_order(&self) -> Option<usize> {
        self.coefficients.iter().rposition(|c| !c.is_zero())
    }

    /// Linear extension of [`evolve_ket`]: evolves every component by `t`.
    pub fn evolve(&self, t: &BigRational) -> Result<Self> {
        check_time(t)?;
        let r = self.pole.order();
        let mut out = vec![Cq::zero(); r];
        for (k, c) in self.coefficients.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (p, coeff) in chain_coefficients(k, t).into_iter().enumerate() {
                out[p] = out[p].clone() + c.clone() * coeff;
            }
        }
        Ok(GamowChainVector {
            pole: self.pole.clone(),
            coefficients: out,
            phase_time: self.phase_time.clone() + t.clone(),
        })
    }

    /// Numeric value with the phase `exp(−i z_R t)` multiplied in.
    pub fn to_numeric(&self) -> Vec<Complex64> {
        let phase = phase_factor(&self.pole, exact::rational_to_f64(&self.phase_time));
        self.coefficients
            .iter()
            .map(|c| exact::to_c64(c) * phase)
            .collect()
    }
}

/// `exp(−i z_R t)` in floating point.
pub fn phase_factor(pole: &ComplexPole, t: f64) -> Complex64 {
    (Complex64::new(0.0, -1.0) * pole.z_r_f64() * t).exp()
}

/// The `r × r` matrix of the Hamiltonian on the Gamow chain.
#[derive(Clone, Debug, PartialEq)]
pub struct JordanBlockMatrix {
    pole: ComplexPole,
    entries: Vec<Vec<Cq>>,
}

impl JordanBlockMatrix {
    pub fn pole(&self) -> &ComplexPole {
        &self.pole
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Vec<Cq>] {
        &self.entries
    }

    pub fn entry(&self, row: usize, col: usize) -> &Cq {
        &self.entries[row][col]
    }

    /// `J − z_R I`.
    pub fn nilpotent_part(&self) -> Vec<Vec<Cq>> {
        let z = self.pole.z_r();
        let mut n = self.entries.clone();
        for (i, row) in n.iter_mut().enumerate() {
            row[i] = row[i].clone() - z.clone();
        }
        n
    }

    pub fn apply(&self, v: &[Cq]) -> Vec<Cq> {
        mat_vec(&self.entries, v)
    }
}

pub(crate) fn mat_vec(m: &[Vec<Cq>], v: &[Cq]) -> Vec<Cq> {
    m.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(Cq::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
        })
        .collect()
}

pub fn build_jordan_block(pole: &ComplexPole) -> JordanBlockMatrix {
    let r = pole.order();
    let z = pole.z_r();
    let mut entries = vec![vec![Cq::zero(); r]; r];
    for k in 0..r {
        entries[k][k] = z.clone();
        if k > 0 {
            entries[k - 1][k] = exact::int(k as i64);
        }
    }
    JordanBlockMatrix {
        pole: pole.clone(),
        entries,
    }
}

/// Result of checking that `e_k` is a Jordan vector of degree `k + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct JordanDegree {
    /// `(J − z_R)^{k+1} e_k = 0`.
    pub annihilated: bool,
    /// `(J − z_R)^k e_k ≠ 0`.
    pub not_annihilated_at_lower_power: bool,
}

impl JordanDegree {
    pub fn holds(&self) -> bool {
        self.annihilated && self.not_annihilated_at_lower_power
    }
}

pub fn check_jordan_degree(matrix: &JordanBlockMatrix, k: usize) -> Result<JordanDegree> {
    matrix.pole.check_order(k)?;
    let n = matrix.nilpotent_part();
    let mut v = vec![Cq::zero(); matrix.dim()];
    v[k] = Cq::one();
    for _ in 0..k {
        v = mat_vec(&n, &v);
    }
    let lower_nonzero = v.iter().any(|c| !c.is_zero());
    let v = mat_vec(&n, &v);
    Ok(JordanDegree {
        annihilated: v.iter().all(Zero::is_zero),
        not_annihilated_at_lower_power: lower_nonzero,
    })
}

/// `C(k, p) (−it)^{k−p}` for `p = 0..=k`.
fn chain_coefficients(k: usize, t: &BigRational) -> Vec<Cq> {
    let minus_it = Cq::new(BigRational::zero(), -t.clone());
    (0..=k)
        .map(|p| binomial_cq(k, p) * exact::pow(&minus_it, k - p))
        .collect()
}

/// Evolves `|z_R⁻⟩^(k)` to time `t ≥ 0`:
/// `exp(−i z_R t) Σ_{p≤k} C(k,p) (−it)^{k−p} |z_R⁻⟩^(p)`.
pub fn evolve_ket(pole: &ComplexPole, k: usize, t: &BigRational) -> Result<GamowChainVector> {
    pole.check_order(k)?;
    check_time(t)?;
    let mut coefficients = chain_coefficients(k, t);
    coefficients.resize(pole.order(), Cq::zero());
    Ok(GamowChainVector {
        pole: pole.clone(),
        coefficients,
        phase_time: t.clone(),
    })
}

/// Floating-point [`evolve_ket`] with the phase multiplied in.
pub fn evolve_ket_f64(pole: &ComplexPole, k: usize, t: f64) -> Result<Vec<Complex64>> {
    pole.check_order(k)?;
    check_time_f64(t)?;
    let phase = phase_factor(pole, t);
    let minus_it = Complex64::new(0.0, -t);
    let mut out = vec![Complex64::zero(); pole.order()];
    for (p, slot) in out.iter_mut().enumerate().take(k + 1) {
        let c = exact::rational_to_f64(&BigRational::from_integer(exact::binomial(k, p)));
        *slot = phase * c * minus_it.powu((k - p) as u32);
    }
    Ok(out)
}

/// `|exp(−i z_R t)|² = exp(−Γt)`.
pub fn survival_modulus(pole: &ComplexPole, t: f64) -> Result<f64> {
    check_time_f64(t)?;
    Ok((2.0 * pole.z_r_f64().im * t).exp())
}

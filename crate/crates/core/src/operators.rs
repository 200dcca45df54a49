//! Dyadic operators `Σ B_{m,k} |z_R⁻⟩^(k) ^(m)⟨z_R|` on the Gamow chain and
//! their exact time evolution.
//!
//! Under `W(t) = e^{−iHt} W e^{iHt}` a dyad picks up `(−it)` powers from the
//! ket side and `(+it)` powers from the bra side, while the phases combine to
//! `exp(−i z_R t) · exp(+i z_R^* t) = exp(−Γt)`. An evolved operator is
//! therefore stored as a table of polynomials in `t` multiplying that single
//! exponential.

use crate::error::{Error, Result};
use crate::exact::{self, binomial_cq, i_pow, Cq};
use crate::pole::{check_time, check_time_f64, ComplexPole};
use crate::poly::Poly;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::ops::{Add, Mul};

/// Coefficients of a dyadic operator, in one of the two index conventions.
#[derive(Clone, Debug, PartialEq)]
pub enum CoefficientMatrix {
    /// `B_{m,k}` stored as `entries[m][k]`: bra order `m`, ket order `k`,
    /// both below the pole order `r`.
    BForm { r: usize, entries: Vec<Vec<Cq>> },
    /// `A_{n,k}` stored as `rows[n][k]` with `k ≤ n ≤ j`; the coefficient of
    /// `|k⟩⟨n−k|`.
    AForm { j: usize, rows: Vec<Vec<Cq>> },
}

impl CoefficientMatrix {
    pub fn b_form(entries: Vec<Vec<Cq>>) -> Result<Self> {
        let r = entries.len();
        if r == 0 {
            return Err(Error::IndexOutOfRange {
                row: 0,
                col: 0,
                reason: "B-form needs at least one row".into(),
            });
        }
        for (m, row) in entries.iter().enumerate() {
            if row.len() != r {
                return Err(Error::IndexOutOfRange {
                    row: m,
                    col: row.len(),
                    reason: format!("B-form must be square, expected {r} columns"),
                });
            }
        }
        Ok(CoefficientMatrix::BForm { r, entries })
    }

    pub fn a_form(rows: Vec<Vec<Cq>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::IndexOutOfRange {
                row: 0,
                col: 0,
                reason: "A-form needs at least row n = 0".into(),
            });
        }
        for (n, row) in rows.iter().enumerate() {
            if row.len() != n + 1 {
                return Err(Error::IndexOutOfRange {
                    row: n,
                    col: row.len(),
                    reason: format!("A-form row n = {n} must have {} entries", n + 1),
                });
            }
        }
        Ok(CoefficientMatrix::AForm {
            j: rows.len() - 1,
            rows,
        })
    }

    pub fn zero_b(r: usize) -> Self {
        CoefficientMatrix::BForm {
            r,
            entries: vec![vec![Cq::zero(); r]; r],
        }
    }

    /// Largest total order `n = k + m` the matrix can represent.
    pub fn order_bound(&self) -> usize {
        match self {
            CoefficientMatrix::BForm { r, .. } => 2 * (r - 1),
            CoefficientMatrix::AForm { j, .. } => *j,
        }
    }

    /// `A_{n,k}`; zero outside the stored range.
    pub fn a(&self, n: usize, k: usize) -> Cq {
        if k > n {
            return Cq::zero();
        }
        match self {
            CoefficientMatrix::BForm { r, entries } => {
                let m = n - k;
                if k < *r && m < *r {
                    entries[m][k].clone()
                } else {
                    Cq::zero()
                }
            }
            CoefficientMatrix::AForm { rows, .. } => rows
                .get(n)
                .map(|row| row[k].clone())
                .unwrap_or_else(Cq::zero),
        }
    }

    /// Converts to A-form with `A_{n,k} = B_{n−k,k}` and `j = 2(r−1)`.
    pub fn to_a_form(&self) -> CoefficientMatrix {
        match self {
            CoefficientMatrix::AForm { .. } => self.clone(),
            CoefficientMatrix::BForm { .. } => {
                let j = self.order_bound();
                let rows = (0..=j)
                    .map(|n| (0..=n).map(|k| self.a(n, k)).collect())
                    .collect();
                CoefficientMatrix::AForm { j, rows }
            }
        }
    }

    /// Nonzero terms as `(ket k, bra m, coefficient)`.
    pub fn dyads(&self) -> Vec<(usize, usize, Cq)> {
        let j = self.order_bound();
        let mut out = Vec::new();
        for n in 0..=j {
            for k in 0..=n {
                let c = self.a(n, k);
                if !c.is_zero() {
                    out.push((k, n - k, c));
                }
            }
        }
        out
    }
}

/// A dyadic operator on the Gamow chain of one pole.
///
/// `table[k][m]` is the coefficient of `|z_R⁻⟩^(k) ^(m)⟨z_R|`, i.e. `B_{m,k}`.
/// `dimension_tags[k][m]` is the energy exponent carried by that coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct DyadicOperator {
    pole: ComplexPole,
    table: Vec<Vec<Cq>>,
    dimension_tags: Vec<Vec<i64>>,
}

impl DyadicOperator {
    fn from_table(pole: &ComplexPole, table: Vec<Vec<Cq>>) -> Self {
        let r = pole.order();
        let dimension_tags = (0..r)
            .map(|k| (0..r).map(|m| (k + m) as i64).collect())
            .collect();
        DyadicOperator {
            pole: pole.clone(),
            table,
            dimension_tags,
        }
    }

    pub fn zero(pole: &ComplexPole) -> Self {
        let r = pole.order();
        Self::from_table(pole, vec![vec![Cq::zero(); r]; r])
    }

    /// The single dyad `|ket⟩⟨bra|`.
    pub fn dyad(pole: &ComplexPole, ket: usize, bra: usize) -> Result<Self> {
        pole.check_order(ket)?;
        pole.check_order(bra)?;
        let mut op = Self::zero(pole);
        op.table[ket][bra] = Cq::one();
        Ok(op)
    }

    pub fn pole(&self) -> &ComplexPole {
        &self.pole
    }

    /// Coefficient of `|ket⟩⟨bra|`.
    pub fn coefficient(&self, ket: usize, bra: usize) -> &Cq {
        &self.table[ket][bra]
    }

    pub fn table(&self) -> &[Vec<Cq>] {
        &self.table
    }

    pub fn is_zero(&self) -> bool {
        self.table.iter().flatten().all(Zero::is_zero)
    }

    pub fn coefficients(&self) -> CoefficientMatrix {
        let r = self.pole.order();
        CoefficientMatrix::BForm {
            r,
            entries: (0..r)
                .map(|m| (0..r).map(|k| self.table[k][m].clone()).collect())
                .collect(),
        }
    }

    /// Replaces the per-coefficient energy exponents, `tags[k][m]`.
    pub fn with_dimension_tags(mut self, tags: Vec<Vec<i64>>) -> Result<Self> {
        let r = self.pole.order();
        if tags.len() != r || tags.iter().any(|row| row.len() != r) {
            return Err(Error::DimensionMismatch(format!(
                "expected an {r}x{r} table of dimension tags"
            )));
        }
        self.dimension_tags = tags;
        self.total_dimension()?;
        Ok(self)
    }

    /// Energy exponent of the whole operator: for each nonzero term the
    /// coefficient tag plus `−1/2 − k` (ket) and `−1/2 − m` (bra). Errors when
    /// the terms disagree. `None` for the zero operator.
    pub fn total_dimension(&self) -> Result<Option<i64>> {
        let mut common = None;
        for (k, row) in self.table.iter().enumerate() {
            for (m, c) in row.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let d = self.dimension_tags[k][m] - 1 - (k + m) as i64;
                match common {
                    None => common = Some(d),
                    Some(prev) if prev != d => {
                        return Err(Error::DimensionMismatch(format!(
                            "term |{k}><{m}| has dimension {d}, earlier terms {prev}"
                        )))
                    }
                    _ => {}
                }
            }
        }
        Ok(common)
    }

    /// Real and imaginary parts of the table flattened row-major; used for
    /// exact linear-independence checks.
    pub(crate) fn flatten_rational(&self) -> Vec<BigRational> {
        self.table
            .iter()
            .flatten()
            .flat_map(|c| [c.re.clone(), c.im.clone()])
            .collect()
    }

    fn check_same_pole(&self, other: &Self) {
        assert_eq!(self.pole, other.pole, "operators belong to different poles");
    }
}

impl Add for DyadicOperator {
    type Output = DyadicOperator;

    fn add(self, rhs: Self) -> Self {
        self.check_same_pole(&rhs);
        let table = self
            .table
            .iter()
            .zip(&rhs.table)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        DyadicOperator::from_table(&self.pole, table)
    }
}

impl Mul<&Cq> for DyadicOperator {
    type Output = DyadicOperator;

    fn mul(self, rhs: &Cq) -> Self {
        let table = self
            .table
            .iter()
            .map(|row| row.iter().map(|c| c * rhs).collect())
            .collect();
        DyadicOperator { table, ..self }
    }
}

/// `W^(n) = (Γⁿ/n!) Σ_k C(n,k) |k⟩⟨n−k|`; without the prefactor when
/// `include_prefactor` is false.
pub fn build_w_n(pole: &ComplexPole, n: usize, include_prefactor: bool) -> Result<DyadicOperator> {
    pole.check_order(n)?;
    let prefactor = if include_prefactor {
        let gamma_n = (0..n).fold(BigRational::one(), |acc, _| acc * pole.width());
        exact::real(gamma_n / BigRational::from_integer(exact::factorial(n)))
    } else {
        Cq::one()
    };
    let mut op = DyadicOperator::zero(pole);
    for k in 0..=n {
        op.table[k][n - k] = binomial_cq(n, k) * prefactor.clone();
    }
    Ok(op)
}

/// Operator with exactly the given coefficients. Terms whose ket or bra order
/// is not below the pole order are rejected.
pub fn build_general_w(pole: &ComplexPole, coeffs: &CoefficientMatrix) -> Result<DyadicOperator> {
    let r = pole.order();
    if let CoefficientMatrix::BForm { r: rb, .. } = coeffs {
        if *rb != r {
            return Err(Error::IndexOutOfRange {
                row: *rb,
                col: *rb,
                reason: format!("B-form is {rb}x{rb} but the pole has order {r}"),
            });
        }
    }
    let mut op = DyadicOperator::zero(pole);
    for (k, m, c) in coeffs.dyads() {
        if k >= r || m >= r {
            return Err(Error::IndexOutOfRange {
                row: k + m,
                col: k,
                reason: format!("dyad |{k}><{m}| needs a pole of order > {}", k.max(m)),
            });
        }
        op.table[k][m] = c;
    }
    Ok(op)
}

/// An evolved dyadic operator: `exp(−Γt) Σ_{l,m} P_{l,m}(t) |l⟩⟨m|`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimePolynomialOperator {
    pole: ComplexPole,
    table: Vec<Vec<Poly<Cq>>>,
}

impl TimePolynomialOperator {
    pub fn pole(&self) -> &ComplexPole {
        &self.pole
    }

    /// Polynomial in `t` multiplying `|l⟩⟨m|`.
    pub fn entry(&self, l: usize, m: usize) -> &Poly<Cq> {
        &self.table[l][m]
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Poly<Cq>)> {
        self.table
            .iter()
            .enumerate()
            .flat_map(|(l, row)| row.iter().enumerate().map(move |(m, p)| (l, m, p)))
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.entries().filter_map(|(_, _, p)| p.degree()).max()
    }

    /// The table at `t = 0`.
    pub fn at_zero(&self) -> Vec<Vec<Cq>> {
        self.table
            .iter()
            .map(|row| row.iter().map(|p| p.coeff(0)).collect())
            .collect()
    }

    /// Polynomial values at an exact time, without the `exp(−Γt)` factor.
    pub fn polynomial_values(&self, t: &BigRational) -> Result<Vec<Vec<Cq>>> {
        check_time(t)?;
        let t = exact::real(t.clone());
        Ok(self
            .table
            .iter()
            .map(|row| row.iter().map(|p| p.eval(&t)).collect())
            .collect())
    }

    /// Full numeric value at time `t`, including `exp(−Γt)`.
    pub fn evaluate(&self, t: f64) -> Result<Vec<Vec<Complex64>>> {
        check_time_f64(t)?;
        let decay = (-self.pole.width_f64() * t).exp();
        let tc = Complex64::new(t, 0.0);
        Ok(self
            .table
            .iter()
            .map(|row| {
                row.iter()
                    .map(|p| p.map(exact::to_c64).eval(&tc) * decay)
                    .collect()
            })
            .collect())
    }
}

/// Exact evolution of a dyadic operator.
///
/// Entry `(l, m)` receives, for every total order `n ≥ l + m`, the term
/// `(it)^{n−m−l} Σ_{k=l}^{n−m} A_{n,k} C(k,l) C(n−k,m) (−1)^{k−l}`.
pub fn evolve_operator(op: &DyadicOperator) -> TimePolynomialOperator {
    let r = op.pole.order();
    if r == 1 {
        return TimePolynomialOperator {
            pole: op.pole.clone(),
            table: vec![vec![Poly::constant(op.table[0][0].clone())]],
        };
    }
    let coeffs = op.coefficients();
    let j = coeffs.order_bound();
    let mut table = vec![vec![Poly::zero(); r]; r];
    for (l, row) in table.iter_mut().enumerate() {
        for (m, entry) in row.iter_mut().enumerate() {
            let mut poly = Poly::zero();
            for n in (l + m)..=j {
                let mut sum = Cq::zero();
                for k in l..=(n - m) {
                    let a = coeffs.a(n, k);
                    if a.is_zero() {
                        continue;
                    }
                    let weight = binomial_cq(k, l) * binomial_cq(n - k, m);
                    let term = a * weight;
                    sum = if (k - l) % 2 == 0 {
                        sum + term
                    } else {
                        sum - term
                    };
                }
                let power = n - m - l;
                poly = poly + Poly::monomial(sum * i_pow(power), power);
            }
            *entry = poly;
        }
    }
    TimePolynomialOperator {
        pole: op.pole.clone(),
        table,
    }
}

/// True iff no entry carries a positive power of `t`.
pub fn is_pure_exponential(evolved: &TimePolynomialOperator) -> bool {
    evolved.entries().all(|(_, _, p)| p.is_constant())
}

/// The `r` unprefactored operators `Σ_k C(n,k) |k⟩⟨n−k|`, `n = 0..r`.
///
/// Errors if any of them fails to evolve purely exponentially or if they are
/// linearly dependent; neither happens for a valid pole.
pub fn exponential_subspace_basis(pole: &ComplexPole) -> Result<Vec<DyadicOperator>> {
    let basis = (0..pole.order())
        .map(|n| build_w_n(pole, n, false))
        .collect::<Result<Vec<_>>>()?;
    for (n, op) in basis.iter().enumerate() {
        if !is_pure_exponential(&evolve_operator(op)) {
            return Err(Error::Verification(format!(
                "basis element n = {n} picked up powers of t"
            )));
        }
    }
    let flat: Vec<_> = basis.iter().map(DyadicOperator::flatten_rational).collect();
    let ncols = flat.first().map_or(0, Vec::len);
    let rank = crate::linalg::rank(&flat, ncols);
    if rank != basis.len() {
        return Err(Error::Verification(format!(
            "basis has rank {rank}, expected {}",
            basis.len()
        )));
    }
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};

    fn pole(r: usize) -> ComplexPole {
        ComplexPole::exact(rat(4, 1), rat(3, 2), r).unwrap()
    }

    #[test]
    fn w0_is_the_ordinary_gamow_dyad() {
        let w = build_w_n(&pole(3), 0, true).unwrap();
        assert_eq!(w, DyadicOperator::dyad(&pole(3), 0, 0).unwrap());
    }

    #[test]
    fn w1_and_w2_coefficients() {
        let p = pole(3);
        let gamma = exact::real(rat(3, 2));
        let w1 = build_w_n(&p, 1, true).unwrap();
        assert_eq!(w1.coefficient(0, 1), &gamma);
        assert_eq!(w1.coefficient(1, 0), &gamma);
        assert!(w1.coefficient(1, 1).is_zero());

        let w2 = build_w_n(&p, 2, true).unwrap();
        let half_g2 = exact::real(rat(9, 8));
        assert_eq!(w2.coefficient(0, 2), &half_g2);
        assert_eq!(w2.coefficient(1, 1), &(half_g2.clone() * int(2)));
        assert_eq!(w2.coefficient(2, 0), &half_g2);

        assert!(matches!(
            build_w_n(&p, 3, true),
            Err(Error::OrderOutOfRange { .. })
        ));
    }

    #[test]
    fn b_to_a_conversion_follows_index_shift() {
        let b =
            CoefficientMatrix::b_form(vec![vec![int(1), int(2)], vec![int(3), int(4)]]).unwrap();
        // entries[m][k]: B_{0,0}=1, B_{0,1}=2, B_{1,0}=3, B_{1,1}=4
        let a = b.to_a_form();
        assert_eq!(a.order_bound(), 2);
        assert_eq!(a.a(0, 0), int(1));
        assert_eq!(a.a(1, 0), int(3)); // A_{1,0} = B_{1,0}
        assert_eq!(a.a(1, 1), int(2)); // A_{1,1} = B_{0,1}
        assert_eq!(a.a(2, 1), int(4)); // A_{2,1} = B_{1,1}
        assert!(a.a(2, 0).is_zero() && a.a(2, 2).is_zero());
    }

    #[test]
    fn general_w_rejects_out_of_range_terms() {
        let a = CoefficientMatrix::a_form(vec![
            vec![int(0)],
            vec![int(0), int(0)],
            vec![int(1), int(0), int(0)],
        ])
        .unwrap();
        assert!(matches!(
            build_general_w(&pole(2), &a),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(build_general_w(&pole(3), &a).is_ok());
        assert!(CoefficientMatrix::a_form(vec![vec![int(0), int(1)]]).is_err());
        assert!(build_general_w(&pole(2), &CoefficientMatrix::zero_b(3)).is_err());
    }

    #[test]
    fn zero_and_identity_like_inputs() {
        let p = pole(2);
        let zero = build_general_w(&p, &CoefficientMatrix::zero_b(2)).unwrap();
        assert!(zero.is_zero());
        assert!(is_pure_exponential(&evolve_operator(&zero)));

        let mut b = CoefficientMatrix::zero_b(2);
        if let CoefficientMatrix::BForm { entries, .. } = &mut b {
            entries[0][0] = int(1);
        }
        assert_eq!(
            build_general_w(&p, &b).unwrap(),
            DyadicOperator::dyad(&p, 0, 0).unwrap()
        );
    }

    #[test]
    fn restricted_r2_family_is_w0_plus_unprefactored_w1() {
        // B_{0,0} = x, B_{1,0} = y, B_{0,1} = C(1,0) y = y, B_{1,1} = 0.
        let p = pole(2);
        let (x, y) = (
            Cq::new(rat(2, 3), rat(1, 1)),
            Cq::new(rat(-5, 1), rat(1, 7)),
        );
        let b = CoefficientMatrix::b_form(vec![
            vec![x.clone(), y.clone()],
            vec![y.clone(), Cq::zero()],
        ])
        .unwrap();
        let op = build_general_w(&p, &b).unwrap();
        let expected = build_w_n(&p, 0, true).unwrap() * &x + build_w_n(&p, 1, false).unwrap() * &y;
        assert_eq!(op, expected);
    }

    #[test]
    fn single_dyad_is_not_pure_exponential() {
        let p = pole(2);
        let evolved = evolve_operator(&DyadicOperator::dyad(&p, 1, 0).unwrap());
        // |1><0| -> |1><0| + (−it)|0><0|
        assert_eq!(evolved.entry(0, 0), &Poly::monomial(-exact::imag_unit(), 1));
        assert_eq!(evolved.entry(1, 0), &Poly::constant(int(1)));
        assert!(!is_pure_exponential(&evolved));
    }

    #[test]
    fn w_n_evolution_is_pure_and_constant() {
        let p = pole(5);
        for n in 0..5 {
            let w = build_w_n(&p, n, true).unwrap();
            let evolved = evolve_operator(&w);
            assert!(is_pure_exponential(&evolved), "n = {n}");
            assert_eq!(evolved.at_zero(), w.table());
        }
    }

    #[test]
    fn order_one_short_circuit() {
        let p = pole(1);
        let op = DyadicOperator::dyad(&p, 0, 0).unwrap() * &int(3);
        let evolved = evolve_operator(&op);
        assert!(is_pure_exponential(&evolved));
        let v = evolved.evaluate(2.0).unwrap();
        assert!((v[0][0] - Complex64::new(3.0 * (-3.0f64).exp(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn degree_bounded_by_remaining_order() {
        let p = pole(4);
        let mut op = DyadicOperator::zero(&p);
        for k in 0..4 {
            for m in 0..4 {
                op = op + DyadicOperator::dyad(&p, k, m).unwrap() * &int((k * 4 + m + 1) as i64);
            }
        }
        let evolved = evolve_operator(&op);
        let j = 6;
        for (l, m, poly) in evolved.entries() {
            assert!(poly.degree().unwrap_or(0) <= j - l - m);
        }
    }

    #[test]
    fn dimension_bookkeeping() {
        let p = pole(3);
        let w2 = build_w_n(&p, 2, true).unwrap();
        assert_eq!(w2.total_dimension().unwrap(), Some(-1));
        let mixed = w2.clone() + build_w_n(&p, 1, true).unwrap();
        assert_eq!(mixed.total_dimension().unwrap(), Some(-1));
        assert_eq!(DyadicOperator::zero(&p).total_dimension().unwrap(), None);

        // Dimensionless coefficients cannot make terms of different total
        // order homogeneous.
        let flat = vec![vec![0; 3]; 3];
        assert!(w2.clone().with_dimension_tags(flat.clone()).is_ok());
        assert!(matches!(
            mixed.with_dimension_tags(flat),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn basis_sizes() {
        assert_eq!(exponential_subspace_basis(&pole(1)).unwrap().len(), 1);
        let b3 = exponential_subspace_basis(&pole(3)).unwrap();
        assert_eq!(b3.len(), 3);
        assert_eq!(b3[2].coefficient(1, 1), &int(2));
        assert_eq!(b3[1].coefficient(0, 1), &int(1));
        assert_eq!(b3[1].coefficient(1, 0), &int(1));
    }
}

//! Cancellation conditions for the powers of `t` in an evolved operator, and
//! their exact solution.
//!
//! For an operator `Σ_{n≤j} Σ_{k≤n} A_{n,k} |k⟩⟨n−k|`, every power `t^p` with
//! `p ≥ 1` cancels iff, for all `l`, `m` and `n ≥ l + m + 1`,
//!
//! ```text
//! Σ_{k=l}^{n−m} A_{n,k} C(k,l) C(n−k,m) (−1)^{k−l} = 0.
//! ```
//!
//! The solution space is `A_{n,k} = C(n,k) A_{n,0}` with every `A_{n,0}` free.

use crate::error::{Error, Result};
use crate::exact::{binomial, factorial};
use crate::linalg::{self, Matrix};
use crate::operators::CoefficientMatrix;
use crate::pole::ComplexPole;
use crate::Cq;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

/// Column index of the unknown `A_{n,k}`.
pub fn a_index(n: usize, k: usize) -> usize {
    n * (n + 1) / 2 + k
}

pub fn a_variable_count(j: usize) -> usize {
    (j + 1) * (j + 2) / 2
}

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub n: usize,
    pub k: usize,
    pub coeff: BigInt,
}

/// One homogeneous equation, labelled by the dyad `(l, m)` and total order `n`
/// it comes from.
#[derive(Clone, Debug, PartialEq)]
pub struct Equation {
    pub l: usize,
    pub m: usize,
    pub n: usize,
    pub terms: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSystem {
    pub j: usize,
    pub equations: Vec<Equation>,
}

/// Emits the equations in loop order `l`, then `m`, then `n`.
pub fn exponentiality_constraints(j: usize) -> ConstraintSystem {
    let mut equations = Vec::new();
    for l in 0..j {
        for m in 0..(j - l) {
            for n in (m + l + 1)..=j {
                let terms = (l..=(n - m))
                    .map(|k| {
                        let magnitude = binomial(k, l) * binomial(n - k, m);
                        let coeff = if (k - l) % 2 == 0 {
                            magnitude
                        } else {
                            -magnitude
                        };
                        Term { n, k, coeff }
                    })
                    .collect();
                equations.push(Equation { l, m, n, terms });
            }
        }
    }
    ConstraintSystem { j, equations }
}

impl ConstraintSystem {
    pub fn variable_count(&self) -> usize {
        a_variable_count(self.j)
    }

    pub fn equation_count(&self) -> usize {
        self.equations.len()
    }

    /// Dense coefficient matrix over the unknowns `A_{n,k}` in [`a_index`]
    /// order.
    pub fn matrix(&self) -> Matrix {
        let ncols = self.variable_count();
        self.equations
            .iter()
            .map(|eq| {
                let mut row = vec![BigRational::zero(); ncols];
                for t in &eq.terms {
                    row[a_index(t.n, t.k)] += BigRational::from_integer(t.coeff.clone());
                }
                row
            })
            .collect()
    }

    /// Exact nullspace basis.
    pub fn solution_space(&self) -> Matrix {
        linalg::nullspace(&self.matrix(), self.variable_count())
    }

    pub fn solution_dimension(&self) -> usize {
        self.variable_count() - linalg::rank(&self.matrix(), self.variable_count())
    }

    /// True when `values` (indexed by [`a_index`]) satisfies every equation.
    pub fn is_satisfied_by(&self, values: &[Cq]) -> bool {
        self.equations.iter().all(|eq| {
            eq.terms
                .iter()
                .fold(Cq::zero(), |acc, t| {
                    acc + values[a_index(t.n, t.k)].clone()
                        * Cq::new(
                            BigRational::from_integer(t.coeff.clone()),
                            BigRational::zero(),
                        )
                })
                .is_zero()
        })
    }

    pub fn document(&self) -> ConstraintSystemDoc {
        ConstraintSystemDoc {
            j: self.j,
            equations: self
                .equations
                .iter()
                .map(|eq| EquationDoc {
                    l: eq.l,
                    m: eq.m,
                    n: eq.n,
                    terms: eq
                        .terms
                        .iter()
                        .map(|t| TermDoc {
                            n: t.n,
                            k: t.k,
                            coeff: [t.coeff.to_i64().expect("coefficient exceeds i64"), 0],
                        })
                        .collect(),
                })
                .collect(),
            solution_dimension: self.solution_dimension(),
        }
    }
}

/// Serializable form of a [`ConstraintSystem`].
#[derive(Clone, Debug, Serialize)]
pub struct ConstraintSystemDoc {
    pub j: usize,
    pub equations: Vec<EquationDoc>,
    pub solution_dimension: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquationDoc {
    pub l: usize,
    pub m: usize,
    pub n: usize,
    pub terms: Vec<TermDoc>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TermDoc {
    pub n: usize,
    pub k: usize,
    pub coeff: [i64; 2],
}

/// Parametric solution `A_{n,k} = multipliers[n][k] · A_{n,0}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BinomialSolution {
    pub j: usize,
    pub multipliers: Vec<Vec<BigRational>>,
}

/// Solves the two-term conditions (`n = l + m + 1`) by recursion in `k`:
/// `A_{n,k} = (n−k+1)!(k−1)! / ((n−k)! k!) · A_{n,k−1}`.
pub fn solve_binomial_recursion(j: usize) -> BinomialSolution {
    let fact = |x: usize| BigRational::from_integer(factorial(x));
    let multipliers = (0..=j)
        .map(|n| {
            let mut row = vec![BigRational::one()];
            for k in 1..=n {
                let ratio = fact(n - k + 1) * fact(k - 1) / (fact(n - k) * fact(k));
                let prev = row[k - 1].clone();
                row.push(ratio * prev);
            }
            row
        })
        .collect();
    BinomialSolution { j, multipliers }
}

impl BinomialSolution {
    /// A-form coefficients for the given free parameters `A_{n,0}`.
    pub fn instantiate(&self, free: &[Cq]) -> Result<CoefficientMatrix> {
        if free.len() != self.j + 1 {
            return Err(Error::IndexOutOfRange {
                row: free.len(),
                col: 0,
                reason: format!("expected {} free parameters", self.j + 1),
            });
        }
        let rows = self
            .multipliers
            .iter()
            .zip(free)
            .map(|(row, a0)| {
                row.iter()
                    .map(|mult| a0.clone() * Cq::new(mult.clone(), BigRational::zero()))
                    .collect()
            })
            .collect();
        CoefficientMatrix::a_form(rows)
    }

    /// One solution vector per free parameter (`A_{n,0} = 1`, others zero),
    /// in [`a_index`] order.
    pub fn basis_vectors(&self) -> Matrix {
        let ncols = a_variable_count(self.j);
        (0..=self.j)
            .map(|n| {
                let mut v = vec![BigRational::zero(); ncols];
                for (k, mult) in self.multipliers[n].iter().enumerate() {
                    v[a_index(n, k)] = mult.clone();
                }
                v
            })
            .collect()
    }

    /// Checks every basis vector against the full constraint system.
    pub fn satisfies(&self, system: &ConstraintSystem) -> bool {
        system.j == self.j
            && self.basis_vectors().iter().all(|v| {
                let values: Vec<Cq> = v
                    .iter()
                    .map(|x| Cq::new(x.clone(), BigRational::zero()))
                    .collect();
                system.is_satisfied_by(&values)
            })
    }
}

/// `C(n,k) C(k,l) C(n−k,m) = C(n,m) C(n−m,l) C(n−m−l,k−l)` over
/// `0 ≤ l ≤ k ≤ n−m ≤ n ≤ n_max`. Returns the first failing `(n, k, l, m)`.
pub fn check_binomial_identity(
    n_max: usize,
) -> std::result::Result<(), (usize, usize, usize, usize)> {
    for n in 0..=n_max {
        for m in 0..=n {
            for k in 0..=(n - m) {
                for l in 0..=k {
                    let lhs = binomial(n, k) * binomial(k, l) * binomial(n - k, m);
                    let rhs = binomial(n, m) * binomial(n - m, l) * binomial(n - m - l, k - l);
                    if lhs != rhs {
                        return Err((n, k, l, m));
                    }
                }
            }
        }
    }
    Ok(())
}

/// `Σ_{i=0}^{s} C(s,i)(−1)^i = 0` for every `1 ≤ s ≤ s_max`.
pub fn check_alternating_collapse(s_max: usize) -> std::result::Result<(), usize> {
    for s in 1..=s_max {
        let sum = (0..=s).fold(BigInt::zero(), |acc, i| {
            if i % 2 == 0 {
                acc + binomial(s, i)
            } else {
                acc - binomial(s, i)
            }
        });
        if !sum.is_zero() {
            return Err(s);
        }
    }
    Ok(())
}

/// Outcome of solving the constraints in B-form coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct RestrictionReport {
    pub r: usize,
    pub j: usize,
    pub equation_count: usize,
    pub solution_dimension: usize,
    /// Nullspace basis, each vector reshaped as `B[m][k]`.
    pub nullspace: Vec<Vec<Vec<BigRational>>>,
    /// `B_{m,k} = C(k+m,k)` on the anti-diagonal `k + m = s`, for `s < r`.
    pub expected: Vec<Vec<Vec<BigRational>>>,
    /// Entries `(m, k)` that vanish on the whole solution space.
    pub forced_zero: Vec<(usize, usize)>,
    pub matches_binomial_pattern: bool,
}

impl RestrictionReport {
    pub fn passed(&self) -> bool {
        self.matches_binomial_pattern && self.solution_dimension == self.r
    }
}

/// Solves the constraints for `j = 2(r−1)` after substituting
/// `A_{n,k} = B_{n−k,k}` (zero when either order reaches `r`), and compares
/// the solution space with the binomial restriction.
pub fn verify_restriction_equivalence(pole: &ComplexPole) -> RestrictionReport {
    let r = pole.order();
    let j = 2 * (r - 1);
    let system = exponentiality_constraints(j);
    let b_index = |m: usize, k: usize| m * r + k;
    let ncols = r * r;

    let rows: Matrix = system
        .equations
        .iter()
        .map(|eq| {
            let mut row = vec![BigRational::zero(); ncols];
            for t in &eq.terms {
                let (k, m) = (t.k, t.n - t.k);
                if k < r && m < r {
                    row[b_index(m, k)] += BigRational::from_integer(t.coeff.clone());
                }
            }
            row
        })
        .collect();

    let nullspace = linalg::nullspace(&rows, ncols);
    let expected: Matrix = (0..r)
        .map(|s| {
            let mut v = vec![BigRational::zero(); ncols];
            for k in 0..=s {
                v[b_index(s - k, k)] = BigRational::from_integer(binomial(s, k));
            }
            v
        })
        .collect();
    let matches = linalg::same_span(&nullspace, &expected, ncols);
    let forced_zero = (0..r)
        .flat_map(|m| (0..r).map(move |k| (m, k)))
        .filter(|&(m, k)| nullspace.iter().all(|v| v[b_index(m, k)].is_zero()))
        .collect();
    let reshape = |v: &Vec<BigRational>| -> Vec<Vec<BigRational>> {
        v.chunks(r).map(<[BigRational]>::to_vec).collect()
    };

    RestrictionReport {
        r,
        j,
        equation_count: rows
            .iter()
            .filter(|row| row.iter().any(|x| !x.is_zero()))
            .count(),
        solution_dimension: nullspace.len(),
        nullspace: nullspace.iter().map(reshape).collect(),
        expected: expected.iter().map(reshape).collect(),
        forced_zero,
        matches_binomial_pattern: matches,
    }
}

//! Exact spectral calculus for higher-order Gamow states.
//!
//! An order-`r` pole of the S-matrix at `z_R = E_R − iΓ/2` carries a chain of
//! `r` generalized vectors on which the Hamiltonian acts as a Jordan block.
//! This crate
//!
//! * evolves chain vectors and dyadic operators built from them exactly, as
//!   polynomials in `t` over Gaussian rationals times a decaying exponential
//!   ([`jordan`], [`operators`]);
//! * characterizes every dyadic operator with pure `exp(−Γt)` decay by solving
//!   the cancellation conditions exactly ([`constraints`]);
//! * checks the residue expansion of a higher-order pole against numerical
//!   integration on a rational S-matrix model ([`smatrix`]).

pub mod constraints;
pub mod error;
pub mod exact;
pub mod jordan;
pub mod linalg;
pub mod operators;
pub mod pole;
pub mod poly;
pub mod quadrature;
pub mod rational_fn;
pub mod smatrix;

pub use error::{Error, Result};
pub use exact::Cq;
pub use jordan::{
    build_jordan_block, check_jordan_degree, evolve_ket, evolve_ket_f64, survival_modulus,
    GamowChainVector, JordanBlockMatrix, JordanDegree,
};
pub use operators::{
    build_general_w, build_w_n, evolve_operator, exponential_subspace_basis, is_pure_exponential,
    CoefficientMatrix, DyadicOperator, TimePolynomialOperator,
};
pub use pole::ComplexPole;
pub use poly::Poly;

//! A rational S-matrix with a pole of order `r` at `z_R`, the residue
//! expansion of `∫ f(E) S(E) g(E) dE` at that pole, and its numerical check.
//!
//! For a rational model the second sheet is the same single-valued function,
//! so deforming the `[0, ∞)` integration path into the lower half-plane gives
//!
//! ```text
//! ∫_0^∞ f S g dE  =  ∫_0^{−∞} f S g dE  +  (−2πi) Σ_n a_{−n−1}/n! (f g)^{(n)}(z_R)
//! ```
//!
//! whenever `f`, `g` and the background are analytic in the closed lower
//! half-plane and `f S g` decays at least like `1/E²`. The first term on the
//! right is the background integral, traversed from the origin outwards.

use crate::error::{Error, Result};
use crate::exact::{self, binomial_cq, Cq};
use crate::pole::ComplexPole;
use crate::poly::Poly;
use crate::quadrature::{self, Integral, QuadratureConfig};
use crate::rational_fn::RationalFunction;
use num_complex::Complex64;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    /// Stand-in for `⟨ψ⁻|z⁻⟩`.
    Ket,
    /// Stand-in for `⟨⁺z|φ⁺⟩`.
    Bra,
}

/// Rational wavefunction stand-in, analytic in the closed lower half-plane.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    role: Role,
    func: RationalFunction<Cq>,
}

impl TestFunction {
    /// Validates the denominator roots numerically: each must satisfy
    /// `Im z > 1e-9 (1 + |z|)`.
    pub fn new(role: Role, num: Poly<Cq>, den: Poly<Cq>) -> Result<Self> {
        let func = RationalFunction::new(num, den)?;
        check_upper_half_plane(func.den(), "test function").map_err(Error::InvalidTestFunction)?;
        Ok(TestFunction { role, func })
    }

    /// `numerator / ∏ (z − pole)` with exactly checked pole positions.
    pub fn with_poles(role: Role, numerator: Poly<Cq>, poles: &[Cq]) -> Result<Self> {
        if let Some(bad) = poles.iter().find(|p| p.im <= BigRational::zero()) {
            return Err(Error::InvalidTestFunction(format!(
                "pole at {} is not in the open upper half-plane",
                exact::to_c64(bad)
            )));
        }
        Ok(TestFunction {
            role,
            func: RationalFunction::new(numerator, Poly::from_roots(poles))?,
        })
    }

    pub fn constant(role: Role, value: Cq) -> Self {
        TestFunction {
            role,
            func: RationalFunction::constant(value),
        }
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn function(&self) -> &RationalFunction<Cq> {
        &self.func
    }

    pub fn eval(&self, z: &Cq) -> Option<Cq> {
        self.func.eval(z)
    }
}

/// Energy exponent of the Laurent coefficient `a_{−n−1}`.
pub fn laurent_dimension(n: usize) -> i64 {
    n as i64 + 1
}

#[derive(Clone, Debug, PartialEq)]
pub struct SMatrixModel {
    pole: ComplexPole,
    /// `laurent[n] = a_{−n−1}`.
    laurent: Vec<Cq>,
    background: RationalFunction<Cq>,
}

impl SMatrixModel {
    pub fn new(
        pole: ComplexPole,
        laurent: Vec<Cq>,
        background: Option<RationalFunction<Cq>>,
    ) -> Result<Self> {
        let r = pole.order();
        if laurent.len() != r {
            return Err(Error::InvalidModel(format!(
                "pole of order {r} needs {r} Laurent coefficients, got {}",
                laurent.len()
            )));
        }
        // An all-zero Laurent part means "no pole term"; otherwise the
        // leading coefficient fixes the order.
        if laurent[r - 1].is_zero() && laurent.iter().any(|a| !a.is_zero()) {
            return Err(Error::InvalidModel(format!(
                "leading coefficient a_-{r} is zero, so the pole is not of order {r}"
            )));
        }
        let background = background.unwrap_or_else(RationalFunction::zero);
        if !background.is_zero() {
            check_upper_half_plane(background.den(), "background").map_err(Error::InvalidModel)?;
            if background.decay_order().is_some_and(|d| d < 0) {
                return Err(Error::InvalidModel("background grows at infinity".into()));
            }
        }
        Ok(SMatrixModel {
            pole,
            laurent,
            background,
        })
    }

    /// Order-one model with `a_{−1} = −iΓ`.
    pub fn unitary_first_order(pole: ComplexPole) -> Result<Self> {
        let gamma = pole.width().clone();
        Self::new(pole, vec![Cq::new(BigRational::zero(), -gamma)], None)
    }

    /// A model with no pole term at all; `pole` only fixes where the
    /// quadrature refines.
    pub fn background_only(pole: ComplexPole, background: RationalFunction<Cq>) -> Result<Self> {
        Self::new(pole.with_order(1)?, vec![Cq::zero()], Some(background))
    }

    pub fn pole(&self) -> &ComplexPole {
        &self.pole
    }

    pub fn laurent(&self) -> &[Cq] {
        &self.laurent
    }

    pub fn background(&self) -> &RationalFunction<Cq> {
        &self.background
    }

    pub fn has_pole_term(&self) -> bool {
        self.laurent.iter().any(|a| !a.is_zero())
    }

    /// Exact `S(z)`; rejects `z = z_R` when the pole term is present.
    pub fn evaluate(&self, z: &Cq) -> Result<Cq> {
        let delta = z.clone() - self.pole.z_r();
        let mut value = Cq::zero();
        if self.has_pole_term() {
            if delta.is_zero() {
                return Err(Error::EvaluationAtPole);
            }
            let mut inv_power = Cq::one();
            let inv = Cq::one() / delta;
            for a in &self.laurent {
                inv_power *= inv.clone();
                value += a.clone() * inv_power.clone();
            }
        }
        if !self.background.is_zero() {
            value += self.background.eval(z).ok_or(Error::EvaluationAtPole)?;
        }
        Ok(value)
    }

    fn numeric(&self) -> NumericModel {
        NumericModel {
            z_r: self.pole.z_r_f64(),
            laurent: self.laurent.iter().map(exact::to_c64).collect(),
            background: self.background.map(exact::to_c64),
        }
    }

    pub fn evaluate_f64(&self, z: Complex64) -> Result<Complex64> {
        if self.has_pole_term() && z == self.pole.z_r_f64() {
            return Err(Error::EvaluationAtPole);
        }
        Ok(self.numeric().eval(z))
    }

    /// Degree gap of `S` at infinity.
    fn decay_order(&self) -> i64 {
        let pole_part = if self.has_pole_term() { 1 } else { i64::MAX };
        let bg = self.background.decay_order().unwrap_or(i64::MAX);
        pole_part.min(bg)
    }
}

struct NumericModel {
    z_r: Complex64,
    laurent: Vec<Complex64>,
    background: RationalFunction<Complex64>,
}

impl NumericModel {
    fn eval(&self, z: Complex64) -> Complex64 {
        let inv = Complex64::new(1.0, 0.0) / (z - self.z_r);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut p = Complex64::new(1.0, 0.0);
        for a in &self.laurent {
            p *= inv;
            acc += a * p;
        }
        if !self.background.is_zero() {
            acc += self
                .background
                .eval(&z)
                .unwrap_or(Complex64::new(f64::NAN, f64::NAN));
        }
        acc
    }
}

/// The pole contribution in both exact and numeric form.
#[derive(Clone, Debug, PartialEq)]
pub struct Residue {
    /// `Σ_n a_{−n−1}/n! Σ_k C(n,k) f^{(n−k)}(z_R) g^{(k)}(z_R)`, exactly.
    pub derivative_sum: Cq,
    /// `−2πi · derivative_sum`.
    pub value: Complex64,
}

fn finish_residue(derivative_sum: Cq) -> Residue {
    let value = Complex64::new(0.0, -2.0 * PI) * exact::to_c64(&derivative_sum);
    Residue {
        derivative_sum,
        value,
    }
}

/// Residue expansion with the Leibniz split of each derivative of `f g`.
pub fn residue_expansion(
    model: &SMatrixModel,
    ket_fn: &TestFunction,
    bra_fn: &TestFunction,
) -> Result<Residue> {
    let z = model.pole.z_r();
    let deriv = |tf: &TestFunction, order: usize| {
        tf.func
            .derivative_at(order, &z)
            .ok_or_else(|| Error::InvalidTestFunction("test function is singular at z_R".into()))
    };
    let mut sum = Cq::zero();
    for (n, a) in model.laurent.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        let mut leibniz = Cq::zero();
        for k in 0..=n {
            leibniz += binomial_cq(n, k) * deriv(ket_fn, n - k)? * deriv(bra_fn, k)?;
        }
        let inv_fact = exact::real(BigRational::new(One::one(), exact::factorial(n)));
        sum += a.clone() * inv_fact * leibniz;
    }
    Ok(finish_residue(sum))
}

/// The same residue, differentiating the product `f g` as one rational
/// function instead of splitting it.
pub fn residue_via_product(
    model: &SMatrixModel,
    ket_fn: &TestFunction,
    bra_fn: &TestFunction,
) -> Result<Residue> {
    let z = model.pole.z_r();
    let product = ket_fn.func.product(&bra_fn.func);
    let mut sum = Cq::zero();
    for (n, a) in model.laurent.iter().enumerate() {
        let d = product
            .derivative_at(n, &z)
            .ok_or_else(|| Error::InvalidTestFunction("test function is singular at z_R".into()))?;
        let inv_fact = exact::real(BigRational::new(One::one(), exact::factorial(n)));
        sum += a.clone() * inv_fact * d;
    }
    Ok(finish_residue(sum))
}

/// Energy exponent of each residue term `a_{−n−1} (f g)^{(n)}` when the test
/// functions carry `−1/2` each.
pub fn residue_dimension_tags(model: &SMatrixModel) -> Vec<Rational64> {
    (0..model.laurent.len())
        .map(|n| {
            Rational64::from_integer(laurent_dimension(n)) + Rational64::new(-1, 2) * 2
                - Rational64::from_integer(n as i64)
        })
        .collect()
}

fn check_integrable(
    model: &SMatrixModel,
    ket_fn: &TestFunction,
    bra_fn: &TestFunction,
) -> Result<()> {
    let orders = [
        ket_fn.func.decay_order(),
        bra_fn.func.decay_order(),
        Some(model.decay_order()),
    ];
    if orders.iter().any(Option::is_none) {
        // One factor vanishes identically.
        return Ok(());
    }
    let total: i64 = orders.iter().map(|o| o.unwrap().min(1 << 20)).sum();
    if total < 2 {
        return Err(Error::InvalidTestFunction(format!(
            "f·S·g decays like |E|^-{total}; the integrals need at least |E|^-2"
        )));
    }
    Ok(())
}

struct Integrand {
    model: NumericModel,
    ket: RationalFunction<Complex64>,
    bra: RationalFunction<Complex64>,
}

impl Integrand {
    fn new(model: &SMatrixModel, ket_fn: &TestFunction, bra_fn: &TestFunction) -> Self {
        Integrand {
            model: model.numeric(),
            ket: ket_fn.func.map(exact::to_c64),
            bra: bra_fn.func.map(exact::to_c64),
        }
    }

    fn at(&self, e: f64) -> Complex64 {
        let z = Complex64::new(e, 0.0);
        let nan = Complex64::new(f64::NAN, f64::NAN);
        self.ket.eval(&z).unwrap_or(nan) * self.model.eval(z) * self.bra.eval(&z).unwrap_or(nan)
    }
}

/// Refinement points near the pole and the test-function singularities, and
/// the energy beyond which the tail is mapped to a finite interval.
fn layout(
    model: &SMatrixModel,
    ket_fn: &TestFunction,
    bra_fn: &TestFunction,
    cfg: &QuadratureConfig,
) -> (Vec<f64>, f64) {
    let z = model.pole.z_r_f64();
    let gamma = model.pole.width_f64();
    let mut points = vec![z.re];
    for w in [1.0, 3.0, cfg.pole_window] {
        points.push(z.re - w * gamma);
        points.push(z.re + w * gamma);
    }
    let mut reach = z.re.abs() + cfg.pole_window * gamma;
    for f in [&ket_fn.func, &bra_fn.func, &model.background] {
        if f.den().degree().unwrap_or(0) == 0 {
            continue;
        }
        for root in poly_roots(&f.den().map(exact::to_c64)) {
            points.push(root.re);
            reach = reach.max(root.re.abs() + 3.0 * root.im.abs());
        }
    }
    (points, (2.0 * reach).max(1.0))
}

/// `∫_0^∞ f(E) S(E) g(E) dE`, or `∫_0^{E_max}` when the config truncates.
pub fn direct_contour_integral(
    model: &SMatrixModel,
    ket_fn: &TestFunction,
    bra_fn: &TestFunction,
    cfg: &QuadratureConfig,
) -> Result<Integral> {
    half_line(model, ket_fn, bra_fn, cfg, 1.0)
}

/// The background term: `∫_0^{−∞} f(E) S(E) g(E) dE`, i.e. `−∫_{−∞}^0`.
pub fn background_integral(
    model: &SMatrixModel,
    ket_fn: &TestFunction,
    bra_fn: &TestFunction,
    cfg: &QuadratureConfig,
) -> Result<Integral> {
    half_line(model, ket_fn, bra_fn, cfg, -1.0)
}

/// Integrates along `E = direction · s`, `s ∈ [0, ∞)`, returning
/// `∫_0^{direction·∞} h(E) dE`.
fn half_line(
    model: &SMatrixModel,
    ket_fn: &TestFunction,
    bra_fn: &TestFunction,
    cfg: &QuadratureConfig,
    direction: f64,
) -> Result<Integral> {
    if !model.has_pole_term() && model.background.is_zero()
        || ket_fn.func.is_zero()
        || bra_fn.func.is_zero()
    {
        return Ok(Integral {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            intervals: 0,
        });
    }
    if cfg.e_max.is_none() {
        check_integrable(model, ket_fn, bra_fn)?;
    }
    let integrand = Integrand::new(model, ket_fn, bra_fn);
    let h = |s: f64| integrand.at(direction * s) * direction;
    let (points, split) = layout(model, ket_fn, bra_fn, cfg);
    let points: Vec<f64> = points
        .iter()
        .map(|p| direction * p)
        .filter(|&p| p > 0.0)
        .collect();

    // Each piece gets a share of the absolute budget.
    let piece_cfg = QuadratureConfig {
        abs_tol: cfg.abs_tol / 2.0,
        ..cfg.clone()
    };
    match cfg.e_max {
        Some(e_max) => quadrature::integrate(h, 0.0, e_max, &points, cfg),
        None => {
            let head = quadrature::integrate(h, 0.0, split, &points, &piece_cfg)?;
            let tail = quadrature::integrate_to_infinity(h, split, split, &piece_cfg)?;
            Ok(Integral {
                value: head.value + tail.value,
                error: head.error + tail.error,
                intervals: head.intervals + tail.intervals,
            })
        }
    }
}

fn c64_pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

/// Outcome of comparing the direct integral with background plus residue.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub direct: [f64; 2],
    pub background: [f64; 2],
    pub residue: [f64; 2],
    /// `|direct − (background + residue)| / |direct|` (absolute when the
    /// direct integral is exactly zero).
    pub discrepancy: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub direct_error: f64,
    pub background_error: f64,
}

pub fn decomposition_check(
    model: &SMatrixModel,
    ket_fn: &TestFunction,
    bra_fn: &TestFunction,
    cfg: &QuadratureConfig,
    tolerance: f64,
) -> Result<DecompositionReport> {
    if cfg.e_max.is_some() {
        return Err(Error::Quadrature(
            "decomposition needs the full half-lines; unset e_max".into(),
        ));
    }
    let direct = direct_contour_integral(model, ket_fn, bra_fn, cfg)?;
    let background = background_integral(model, ket_fn, bra_fn, cfg)?;
    let residue = if model.has_pole_term() {
        residue_expansion(model, ket_fn, bra_fn)?.value
    } else {
        Complex64::new(0.0, 0.0)
    };
    let diff = (direct.value - (background.value + residue)).norm();
    let scale = direct.value.norm();
    let discrepancy = if scale > 0.0 { diff / scale } else { diff };
    Ok(DecompositionReport {
        direct: c64_pair(direct.value),
        background: c64_pair(background.value),
        residue: c64_pair(residue),
        discrepancy,
        tolerance,
        passed: discrepancy < tolerance,
        direct_error: direct.error,
        background_error: background.error,
    })
}

/// Roots of a polynomial by Durand–Kerner iteration.
pub fn poly_roots(p: &Poly<Complex64>) -> Vec<Complex64> {
    let Some(deg) = p.degree() else {
        return Vec::new();
    };
    if deg == 0 {
        return Vec::new();
    }
    let lead = p.coeff(deg);
    let monic = p.scale(&(Complex64::new(1.0, 0.0) / lead));
    let radius = 1.0
        + monic.coeffs()[..deg]
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..deg)
        .map(|k| seed.powu(k as u32) * radius / seed.norm().powi(k as i32))
        .collect();
    for _ in 0..1000 {
        let mut change = 0.0f64;
        for i in 0..deg {
            let zi = roots[i];
            let denom = roots
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != i)
                .fold(Complex64::new(1.0, 0.0), |acc, (_, zk)| acc * (zi - zk));
            if denom.norm() == 0.0 {
                roots[i] += Complex64::new(1e-8, 1e-8);
                change = f64::INFINITY;
                continue;
            }
            let step = monic.eval(&zi) / denom;
            roots[i] = zi - step;
            change = change.max(step.norm() / (1.0 + zi.norm()));
        }
        if change < 1e-15 {
            break;
        }
    }
    roots
}

fn check_upper_half_plane(den: &Poly<Cq>, what: &str) -> std::result::Result<(), String> {
    for root in poly_roots(&den.map(exact::to_c64)) {
        if root.im <= 1e-9 * (1.0 + root.norm()) {
            return Err(format!(
                "{what} has a singularity at {root}, outside the open upper half-plane"
            ));
        }
    }
    Ok(())
}

// ---- JSON model files ----

/// A complex number written either as a bare real or as `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexSpec {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexSpec {
    fn to_exact(self, field: &str) -> Result<Cq> {
        let c = match self {
            ComplexSpec::Real(re) => Complex64::new(re, 0.0),
            ComplexSpec::Pair([re, im]) => Complex64::new(re, im),
        };
        exact::from_f64(c).ok_or_else(|| Error::InvalidModel(format!("{field}: non-finite number")))
    }
}

fn poly_from_spec(coeffs: &[ComplexSpec], field: &str) -> Result<Poly<Cq>> {
    Ok(Poly::from_coeffs(
        coeffs
            .iter()
            .map(|c| c.to_exact(field))
            .collect::<Result<Vec<_>>>()?,
    ))
}

/// Numerator and denominator coefficients, constant term first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RationalSpec {
    pub num: Vec<ComplexSpec>,
    #[serde(default = "unit_den")]
    pub den: Vec<ComplexSpec>,
    #[serde(default)]
    pub role: Option<Role>,
}

fn unit_den() -> Vec<ComplexSpec> {
    vec![ComplexSpec::Real(1.0)]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(rename = "E_R")]
    pub resonance_energy: f64,
    #[serde(rename = "Gamma")]
    pub width: f64,
    pub r: usize,
    /// `a_{−1}, …, a_{−r}`; may be omitted for `r = 1`, meaning `a_{−1} = −iΓ`.
    #[serde(default)]
    pub laurent: Vec<ComplexSpec>,
    #[serde(default)]
    pub background: Option<RationalSpec>,
    /// Exactly two entries: the ket-side and the bra-side function.
    pub test_functions: Vec<RationalSpec>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub quadrature: Option<QuadratureConfig>,
}

/// A validated model file.
#[derive(Clone, Debug)]
pub struct ModelInput {
    pub model: SMatrixModel,
    pub ket: TestFunction,
    pub bra: TestFunction,
    pub tolerance: f64,
    pub quadrature: QuadratureConfig,
}

pub const DEFAULT_TOLERANCE: f64 = 1e-8;

impl ModelSpec {
    pub fn build(&self) -> Result<ModelInput> {
        let pole = ComplexPole::new(self.resonance_energy, self.width, self.r)?;
        let background = self
            .background
            .as_ref()
            .map(|b| {
                RationalFunction::new(
                    poly_from_spec(&b.num, "background.num")?,
                    poly_from_spec(&b.den, "background.den")?,
                )
            })
            .transpose()?;
        let laurent = if self.laurent.is_empty() && self.r == 1 {
            vec![Cq::new(BigRational::zero(), -pole.width().clone())]
        } else {
            self.laurent
                .iter()
                .enumerate()
                .map(|(i, c)| c.to_exact(&format!("laurent[{i}]")))
                .collect::<Result<Vec<_>>>()?
        };
        let model = SMatrixModel::new(pole, laurent, background)?;
        if self.test_functions.len() != 2 {
            return Err(Error::InvalidModel(format!(
                "test_functions needs exactly 2 entries (ket, bra), got {}",
                self.test_functions.len()
            )));
        }
        let tf = |i: usize, default_role: Role| -> Result<TestFunction> {
            let spec = &self.test_functions[i];
            TestFunction::new(
                spec.role.unwrap_or(default_role),
                poly_from_spec(&spec.num, &format!("test_functions[{i}].num"))?,
                poly_from_spec(&spec.den, &format!("test_functions[{i}].den"))?,
            )
        };
        Ok(ModelInput {
            model,
            ket: tf(0, Role::Ket)?,
            bra: tf(1, Role::Bra)?,
            tolerance: self.tolerance.unwrap_or(DEFAULT_TOLERANCE),
            quadrature: self.quadrature.clone().unwrap_or_default(),
        })
    }
}

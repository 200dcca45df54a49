//! Globally adaptive 7/15-point Gauss–Kronrod quadrature for complex-valued
//! integrands on the real line.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

// Gauss weights for the Kronrod nodes with odd index (XGK[1], XGK[3], …, XGK[7]).
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Truncate semi-infinite ranges at this energy instead of mapping the
    /// tail onto a finite interval.
    pub e_max: Option<f64>,
    /// Half-width, in units of Γ, of the window around `Re z_R` that is
    /// pre-split into subintervals.
    pub pole_window: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 20_000,
            e_max: None,
            pole_window: 10.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: Complex64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Clone, Copy, Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

fn kronrod<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = half * XGK[i];
        let pair = f(center - dx) + f(center + dx);
        kronrod += pair * WGK[i];
        if i % 2 == 1 {
            gauss += pair * WG[i / 2];
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).norm();
    Segment { a, b, value, error }
}

/// Integrates `f` over `[a, b]`, starting from the subdivision given by
/// `breakpoints` (points outside `(a, b)` are ignored).
pub fn integrate<F>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Integral>
where
    F: Fn(f64) -> Complex64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Quadrature(format!("non-finite limits [{a}, {b}]")));
    }
    if a == b {
        return Ok(Integral {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            intervals: 0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&x| x > lo && x < hi)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = vec![lo];
    edges.extend(cuts);
    edges.push(hi);

    let mut segments: Vec<Segment> = edges.windows(2).map(|w| kronrod(&f, w[0], w[1])).collect();
    loop {
        let value: Complex64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::Quadrature(
                "integrand produced a non-finite value".into(),
            ));
        }
        let target = cfg.abs_tol.max(cfg.rel_tol * value.norm());
        if error <= target {
            break;
        }
        if segments.len() >= cfg.max_subdivisions {
            return Err(Error::Quadrature(format!(
                "error estimate {error:.3e} above target {target:.3e} after {} subintervals",
                segments.len()
            )));
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one segment");
        let s = segments.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if mid <= s.a || mid >= s.b {
            return Err(Error::Quadrature(format!(
                "interval [{}, {}] cannot be bisected further",
                s.a, s.b
            )));
        }
        segments.push(kronrod(&f, s.a, mid));
        segments.push(kronrod(&f, mid, s.b));
    }

    // Fixed summation order for reproducibility.
    segments.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value: Complex64 = segments.iter().map(|s| s.value).sum();
    let error: f64 = segments.iter().map(|s| s.error).sum();
    Ok(Integral {
        value: value * sign,
        error,
        intervals: segments.len(),
    })
}

/// Integrates over `[a, ∞)` via `E = a + scale·(1 − u)/u`, `u ∈ (0, 1]`.
/// The integrand must decay at least like `1/E²`.
pub fn integrate_to_infinity<F>(
    f: F,
    a: f64,
    scale: f64,
    cfg: &QuadratureConfig,
) -> Result<Integral>
where
    F: Fn(f64) -> Complex64,
{
    let mapped = |u: f64| {
        let e = a + scale * (1.0 - u) / u;
        f(e) * (scale / (u * u))
    };
    integrate(mapped, 0.0, 1.0, &[], cfg)
}

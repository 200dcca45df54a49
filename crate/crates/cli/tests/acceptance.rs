//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

#![allow(clippy::needless_range_loop)]

use gamow_cli::commands;
use gamow_cli::config::{Flags, RunConfig};
use gamow_core::constraints::{
    check_alternating_collapse, check_binomial_identity, solve_binomial_recursion,
    verify_restriction_equivalence,
};
use gamow_core::exact::{int, rat, Cq};
use gamow_core::linalg::same_span;
use gamow_core::quadrature::QuadratureConfig;
use gamow_core::rational_fn::RationalFunction;
use gamow_core::smatrix::{decomposition_check, Role, SMatrixModel, TestFunction};
use gamow_core::{
    build_general_w, build_jordan_block, check_jordan_degree, evolve_ket, evolve_operator,
    exponential_subspace_basis, is_pure_exponential, CoefficientMatrix, ComplexPole, Poly,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---- oracles ----

fn pascal(n_max: usize) -> Vec<Vec<BigInt>> {
    let mut rows: Vec<Vec<BigInt>> = vec![vec![BigInt::one()]];
    for n in 1..=n_max {
        let prev = &rows[n - 1];
        let row = (0..=n)
            .map(|k| {
                let left = if k > 0 {
                    prev[k - 1].clone()
                } else {
                    BigInt::zero()
                };
                let right = prev.get(k).cloned().unwrap_or_default();
                left + right
            })
            .collect();
        rows.push(row);
    }
    rows
}

fn fact(n: usize) -> u128 {
    (1..=n as u128).product()
}

fn choose(n: usize, k: usize) -> u128 {
    if k > n {
        0
    } else {
        fact(n) / (fact(k) * fact(n - k))
    }
}

/// Does `B[m][k]` follow the binomial restriction?
fn follows_binomial_pattern(b: &[Vec<Cq>]) -> bool {
    let r = b.len();
    (0..r).all(|m| {
        (0..r).all(|k| {
            if k + m >= r {
                b[m][k].is_zero()
            } else {
                let factor = Cq::new(
                    BigRational::from_integer(choose(k + m, k).into()),
                    BigRational::zero(),
                );
                b[m][k] == factor * b[k + m][0].clone()
            }
        })
    })
}

type Mat = Vec<Vec<Cq>>;

fn matmul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).fold(Cq::zero(), |acc, k| acc + a[i][k].clone() * b[k][j].clone()))
                .collect()
        })
        .collect()
}

fn identity(n: usize) -> Mat {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Cq::one() } else { Cq::zero() })
                .collect()
        })
        .collect()
}

/// `exp(−iNt)` from the terminating power series of the nilpotent part.
fn nilpotent_exp(n_mat: &Mat, t: &BigRational) -> Mat {
    let r = n_mat.len();
    let scale = Cq::new(BigRational::zero(), -t.clone());
    let scaled: Mat = n_mat
        .iter()
        .map(|row| row.iter().map(|x| x.clone() * scale.clone()).collect())
        .collect();
    let mut term = identity(r);
    let mut sum = identity(r);
    for p in 1..r {
        term = matmul(&term, &scaled);
        let inv = Cq::new(
            BigRational::new(BigInt::one(), BigInt::from(fact(p))),
            BigRational::zero(),
        );
        for i in 0..r {
            for j in 0..r {
                sum[i][j] = sum[i][j].clone() + term[i][j].clone() * inv.clone();
            }
        }
    }
    sum
}

fn random_rational(rng: &mut ChaCha8Rng) -> BigRational {
    rat(rng.gen_range(-9..=9), rng.gen_range(1..=9))
}

fn random_cq(rng: &mut ChaCha8Rng) -> Cq {
    Cq::new(random_rational(rng), random_rational(rng))
}

fn random_nonzero_cq(rng: &mut ChaCha8Rng) -> Cq {
    loop {
        let c = random_cq(rng);
        if !c.is_zero() {
            return c;
        }
    }
}

// ---- criteria ----

fn iff_theorem() -> Outcome {
    let start = Instant::now();
    for r in 1..=5 {
        let pole = ComplexPole::exact(rat(5, 2), rat(3, 4), r).map_err(|e| e.to_string())?;
        let report = verify_restriction_equivalence(&pole);
        ensure(report.solution_dimension == r, || {
            format!("r = {r}: dimension {} != {r}", report.solution_dimension)
        })?;
        // Binomial pattern built here, flattened as B[m][k] at m·r + k.
        let expected: Vec<Vec<BigRational>> = (0..r)
            .map(|s| {
                let mut v = vec![BigRational::zero(); r * r];
                for k in 0..=s {
                    v[(s - k) * r + k] = BigRational::from_integer(choose(s, k).into());
                }
                v
            })
            .collect();
        let nullspace: Vec<Vec<BigRational>> =
            report.nullspace.iter().map(|b| b.concat()).collect();
        ensure(same_span(&nullspace, &expected, r * r), || {
            format!("r = {r}: nullspace differs from the binomial pattern")
        })?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "dimension r for r = 1..5, binomial span, {elapsed:.2?}"
    ))
}

fn forward_direction() -> Outcome {
    let mut count = 0;
    for r in 1..=5 {
        let pole = ComplexPole::exact(rat(7, 1), rat(1, 3), r).map_err(|e| e.to_string())?;
        for (n, op) in exponential_subspace_basis(&pole)
            .map_err(|e| e.to_string())?
            .iter()
            .enumerate()
        {
            let evolved = evolve_operator(op);
            for (l, m, p) in evolved.entries() {
                ensure(p.coeffs().len() <= 1, || {
                    format!(
                        "r = {r}, n = {n}: entry ({l},{m}) has degree {:?}",
                        p.degree()
                    )
                })?;
            }
            count += 1;
        }
    }
    Ok(format!("{count} basis operators, no t^p terms for p >= 1"))
}

fn reverse_direction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6a6d_6f77);
    let mut summary = Vec::new();
    for r in [2usize, 3] {
        let pole = ComplexPole::exact(rat(3, 1), rat(1, 2), r).map_err(|e| e.to_string())?;
        let mut tested = 0;
        while tested < 150 {
            let b: Vec<Vec<Cq>> = if tested % 2 == 0 {
                // Dense random matrix.
                (0..r)
                    .map(|_| {
                        (0..r)
                            .map(|_| {
                                if rng.gen_bool(0.7) {
                                    random_cq(&mut rng)
                                } else {
                                    Cq::zero()
                                }
                            })
                            .collect()
                    })
                    .collect()
            } else {
                // A valid combination with one entry perturbed.
                let free: Vec<Cq> = (0..r).map(|_| random_cq(&mut rng)).collect();
                let mut b = vec![vec![Cq::zero(); r]; r];
                for (s, c) in free.iter().enumerate() {
                    for k in 0..=s {
                        b[s - k][k] = Cq::new(
                            BigRational::from_integer(choose(s, k).into()),
                            BigRational::zero(),
                        ) * c.clone();
                    }
                }
                let (m, k) = (rng.gen_range(0..r), rng.gen_range(0..r));
                b[m][k] = b[m][k].clone() + random_nonzero_cq(&mut rng);
                b
            };
            if follows_binomial_pattern(&b) {
                continue;
            }
            let coeffs = CoefficientMatrix::b_form(b.clone()).map_err(|e| e.to_string())?;
            let op = build_general_w(&pole, &coeffs).map_err(|e| e.to_string())?;
            ensure(!is_pure_exponential(&evolve_operator(&op)), || {
                format!("r = {r}: false pass for {b:?}")
            })?;
            tested += 1;
        }
        summary.push(format!("r = {r}: {tested}"));
    }
    Ok(format!(
        "violating matrices rejected ({}), zero false passes",
        summary.join(", ")
    ))
}

fn recursion_closed_form() -> Outcome {
    let tri = pascal(8);
    let sol = solve_binomial_recursion(8);
    for n in 0..=8 {
        for k in 0..=n {
            let expected = BigRational::from_integer(tri[n][k].clone());
            ensure(sol.multipliers[n][k] == expected, || {
                format!("A_{{{n},{k}}}: {} != {}", sol.multipliers[n][k], expected)
            })?;
        }
    }
    Ok("A_{n,k} = C(n,k) A_{n,0} for n <= 8".into())
}

fn binomial_identities() -> Outcome {
    check_binomial_identity(12)
        .map_err(|idx| format!("product identity fails at (n,k,l,m) = {idx:?}"))?;
    check_alternating_collapse(12).map_err(|s| format!("collapse fails at s = {s}"))?;
    // Independent integer evaluation.
    let mut checked = 0;
    for n in 0..=12 {
        for m in 0..=n {
            for k in 0..=(n - m) {
                for l in 0..=k {
                    let lhs = choose(n, k) * choose(k, l) * choose(n - k, m);
                    let rhs = choose(n, m) * choose(n - m, l) * choose(n - m - l, k - l);
                    ensure(lhs == rhs, || format!("(n,k,l,m) = ({n},{k},{l},{m})"))?;
                    checked += 1;
                }
                for l in 0..(n - m) {
                    let s = n - m - l;
                    let sum: i128 = (0..=s)
                        .map(|i| if i % 2 == 0 { 1 } else { -1 } * choose(s, i) as i128)
                        .sum();
                    ensure(sum == 0, || format!("collapse at s = {s}"))?;
                }
            }
        }
    }
    Ok(format!(
        "{checked} index tuples and every collapse for n <= 12"
    ))
}

fn residue_corpus() -> Outcome {
    let start = Instant::now();
    let c = |re: (i64, i64), im: (i64, i64)| Cq::new(rat(re.0, re.1), rat(im.0, im.1));
    let upper = |re: i64, im: i64| Cq::new(rat(re, 1), rat(im, 1));
    let tf = |role, num: &[Cq], poles: &[Cq]| {
        TestFunction::with_poles(role, Poly::from_coeffs(num.to_vec()), poles)
            .map_err(|e| e.to_string())
    };
    let pairs = vec![
        (
            tf(Role::Ket, &[int(1)], &[upper(0, 2), upper(0, 2)])?,
            tf(Role::Bra, &[int(1)], &[upper(0, 3)])?,
        ),
        (
            tf(Role::Ket, &[int(1)], &[upper(1, 1), upper(-1, 2)])?,
            tf(
                Role::Bra,
                &[int(2), int(1)],
                &[upper(3, 1), upper(0, 1), upper(2, 5)],
            )?,
        ),
        (
            tf(
                Role::Ket,
                &[c((1, 2), (0, 1)), int(0), int(0)],
                &[upper(4, 1), upper(4, 1), upper(-2, 3), upper(1, 2)],
            )?,
            tf(Role::Bra, &[int(3)], &[upper(0, 1), upper(5, 2)])?,
        ),
        (
            tf(
                Role::Ket,
                &[c((0, 1), (1, 1))],
                &[c((3, 2), (1, 2)), c((5, 2), (3, 4))],
            )?,
            tf(
                Role::Bra,
                &[int(1), c((0, 1), (-1, 3))],
                &[upper(2, 1), upper(2, 2), upper(-3, 4)],
            )?,
        ),
        (
            tf(Role::Ket, &[int(1)], &[upper(0, 6), upper(0, 7)])?,
            tf(Role::Bra, &[int(1)], &[upper(1, 5)])?,
        ),
    ];
    let pole = |e: (i64, i64), g: (i64, i64), r| {
        ComplexPole::exact(rat(e.0, e.1), rat(g.0, g.1), r).unwrap()
    };
    let models = vec![
        SMatrixModel::unitary_first_order(pole((2, 1), (1, 2), 1)),
        SMatrixModel::new(
            pole((3, 1), (1, 5), 2),
            vec![c((1, 1), (-1, 3)), c((-1, 10), (1, 20))],
            None,
        ),
        SMatrixModel::new(
            pole((5, 2), (1, 1), 3),
            vec![c((0, 1), (-1, 1)), c((1, 2), (0, 1)), c((1, 4), (1, 4))],
            Some(
                RationalFunction::new(Poly::constant(int(1)), Poly::from_roots(&[upper(1, 4)]))
                    .unwrap(),
            ),
        ),
        SMatrixModel::new(
            pole((4, 1), (3, 2), 4),
            vec![
                int(1),
                c((0, 1), (1, 2)),
                c((-1, 3), (0, 1)),
                c((1, 8), (-1, 8)),
            ],
            None,
        ),
        SMatrixModel::new(
            pole((1, 1), (1, 20), 2),
            vec![c((0, 1), (-1, 20)), c((1, 400), (0, 1))],
            Some(RationalFunction::constant(c((1, 2), (0, 1)))),
        ),
    ];
    let cfg = QuadratureConfig::default();
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for model in models {
        let model = model.map_err(|e| e.to_string())?;
        for (f, g) in &pairs {
            let report =
                decomposition_check(&model, f, g, &cfg, 1e-8).map_err(|e| e.to_string())?;
            ensure(report.passed, || {
                format!(
                    "r = {}: discrepancy {:.3e}",
                    model.pole().order(),
                    report.discrepancy
                )
            })?;
            worst = worst.max(report.discrepancy);
            cases += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(cases >= 20, || format!("only {cases} cases"))?;
    ensure(elapsed < Duration::from_secs(60), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "{cases} cases, r in 1..=4, worst relative discrepancy {worst:.2e} < 1e-8, {elapsed:.2?}"
    ))
}

fn jordan_structure() -> Outcome {
    let times = [rat(0, 1), rat(1, 3), rat(5, 2), rat(7, 1), rat(123, 17)];
    for r in 1..=6 {
        let pole = ComplexPole::exact(rat(2, 1), rat(9, 10), r).map_err(|e| e.to_string())?;
        let block = build_jordan_block(&pole);
        for k in 0..r {
            let d = check_jordan_degree(&block, k).map_err(|e| e.to_string())?;
            ensure(d.annihilated && d.not_annihilated_at_lower_power, || {
                format!("r = {r}, k = {k}: {d:?}")
            })?;
        }
        let nilpotent = block.nilpotent_part();
        for t in &times {
            let expm = nilpotent_exp(&nilpotent, t);
            for k in 0..r {
                let v = evolve_ket(&pole, k, t).map_err(|e| e.to_string())?;
                let column: Vec<Cq> = (0..r).map(|i| expm[i][k].clone()).collect();
                ensure(v.coefficients() == column.as_slice(), || {
                    format!("r = {r}, k = {k}, t = {t}: ket differs from the series")
                })?;
            }
        }
    }
    Ok("Jordan degree for all k < r <= 6; evolve_ket equals the nilpotent series".into())
}

fn semigroup() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e_6d_67);
    for pair in 0..50 {
        let t1 = rat(rng.gen_range(0..=200), rng.gen_range(1..=30));
        let t2 = rat(rng.gen_range(0..=200), rng.gen_range(1..=30));
        let r = rng.gen_range(1..=4);
        let pole = ComplexPole::exact(rat(1, 1), rat(2, 3), r).map_err(|e| e.to_string())?;
        for k in 0..r {
            let stepwise = evolve_ket(&pole, k, &t1)
                .and_then(|v| v.evolve(&t2))
                .map_err(|e| e.to_string())?;
            let direct =
                evolve_ket(&pole, k, &(t1.clone() + t2.clone())).map_err(|e| e.to_string())?;
            ensure(stepwise == direct, || {
                format!("pair {pair}: r = {r}, k = {k}, t1 = {t1}, t2 = {t2}")
            })?;
        }
    }
    Ok("50 random rational pairs, r <= 4, exact equality".into())
}

fn decay_curve() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut curves = 0;
    for gamma in [0.5, 1.0, 2.5] {
        for r in 1..=5 {
            for n in 0..r {
                let flags = Flags {
                    r: Some(r),
                    n: Some(n),
                    gamma: Some(gamma),
                    energy: Some(4.0),
                    t_end: Some(8.0),
                    steps: Some(81),
                    ..Flags::default()
                };
                let cfg = RunConfig::resolve(&flags, None).map_err(|e| e.to_string())?;
                let report = commands::evolve(&cfg).map_err(|e| e.to_string())?;
                let mut initial: BTreeMap<(usize, usize), f64> = BTreeMap::new();
                for row in &report.rows {
                    let m0 = *initial
                        .entry((row.entry_l, row.entry_m))
                        .or_insert(row.modulus);
                    let dev = (row.modulus / m0 - (-gamma * row.t).exp()).abs();
                    worst = worst.max(dev);
                }
                ensure(worst <= 1e-12, || {
                    format!("Γ = {gamma}, r = {r}, n = {n}: deviation {worst:.3e}")
                })?;
                ensure(report.passed, || {
                    format!("Γ = {gamma}, r = {r}, n = {n}: command reported failure")
                })?;
                curves += 1;
            }
        }
    }
    Ok(format!(
        "{curves} curves, max |ratio - exp(-Γt)| = {worst:.2e} <= 1e-12"
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("iff theorem", iff_theorem),
        ("forward direction", forward_direction),
        ("reverse direction", reverse_direction),
        ("recursion vs closed form", recursion_closed_form),
        ("binomial identity and collapse", binomial_identities),
        ("residue decomposition", residue_corpus),
        ("Jordan structure", jordan_structure),
        ("semigroup", semigroup),
        ("decay-curve contract", decay_curve),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}

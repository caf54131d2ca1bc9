//! Acceptance criteria 1 to 10. Each criterion prints one line
//! `[PASS|FAIL] <n> <title> (<elapsed> / budget <limit>)`; the test fails if
//! any criterion fails or exceeds its time budget.
//!
//! Run with `cargo test -p singfol --test acceptance -- --nocapture`.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use singfol::flow::{random_rational_points, SeededRng};
use singfol::holonomy::DEFAULT_GERM_TOL;
use singfol::modalg::{combine, point_dims};
use singfol::{
    chart_at, chart_rank_at, contains, fiber_dim, flow, germ_equal_at_fixed_point, holonomy_jet,
    is_involutive, jet_exact_linear, leaf_sample, module_groebner, syzygy_basis, tangent_dim,
    FlowStep, FlowWord, FoliationSpec, Monomial, NumericOptions, Poly, RationalPoint,
    VectorField,
};

// Pinned tolerances.
const JET_ORACLE_TOL: f64 = 1e-6;
const GERM_SEPARATION: f64 = 1e-3;
const RK4_MIN_RATIO: f64 = 12.0;
const LEAF_ROUNDING: i64 = 1_000_000;

fn spec(vars: &[&str], gens: &[&str]) -> FoliationSpec {
    FoliationSpec::parse(vars, gens).unwrap()
}

fn gl2() -> FoliationSpec {
    spec(&["x", "y"], &["x*dx", "y*dx", "x*dy", "y*dy"])
}

fn sl2() -> FoliationSpec {
    spec(&["x", "y"], &["x*dx - y*dy", "y*dx", "x*dy"])
}

fn cstar() -> FoliationSpec {
    spec(&["x", "y"], &["x*dx + y*dy", "-y*dx + x*dy"])
}

fn folk(k: u32) -> FoliationSpec {
    spec(&["x"], &[&format!("x^{k}*dx")])
}

fn linear_examples() -> Vec<(&'static str, FoliationSpec)> {
    vec![("gl2", gl2()), ("sl2", sl2()), ("cstar", cstar())]
}

fn pt(v: &[i64]) -> RationalPoint {
    RationalPoint::from_ints(v)
}

/// Outcome of one criterion: `Ok` or a description of the first failure.
type Verdict = Result<(), String>;

/// Closed-form solution `x(t)` of a one-dimensional flow from `x0`.
type ClosedForm = fn(f64, f64) -> f64;

/// `(id, title, time budget in seconds, check)`.
type Criterion = (u32, &'static str, u64, fn() -> Verdict);

fn ensure(cond: bool, why: impl FnOnce() -> String) -> Verdict {
    if cond {
        Ok(())
    } else {
        Err(why())
    }
}

fn fiber_dimensions() -> Verdict {
    for (name, s, at_zero) in [("gl2", gl2(), 4), ("sl2", sl2(), 3), ("cstar", cstar(), 2)] {
        let d = fiber_dim(&s, &pt(&[0, 0])).unwrap();
        ensure(d == at_zero, || format!("{name}: fiber at 0 is {d}, expected {at_zero}"))?;
        for p in [[1, 0], [0, 1]] {
            let d = fiber_dim(&s, &pt(&p)).unwrap();
            ensure(d == 2, || format!("{name}: fiber at {p:?} is {d}, expected 2"))?;
        }
    }
    Ok(())
}

fn x_power_field(j: u32) -> VectorField {
    let m = Monomial::from_exponents(vec![j]);
    VectorField::new(vec![Poly::monomial(1, m, BigRational::one())]).unwrap()
}

fn folk_distinct() -> Verdict {
    for k in 1..=5 {
        let gb = module_groebner(&folk(k)).unwrap();
        for j in 1..=5 {
            let m = contains(&gb, &x_power_field(j)).unwrap();
            ensure(m.member == (j >= k), || {
                format!("x^{j}*dx in <x^{k}*dx> reported {}", m.member)
            })?;
        }
    }
    Ok(())
}

fn involutivity() -> Verdict {
    let mut closed: Vec<(String, FoliationSpec)> = linear_examples()
        .into_iter()
        .map(|(n, s)| (n.to_string(), s))
        .collect();
    closed.extend((1..=5).map(|k| (format!("folk{k}"), folk(k))));
    for (name, s) in closed {
        let r = is_involutive(&s).unwrap();
        ensure(r.closed, || format!("{name} reported not closed"))?;
    }
    let nonint = spec(&["x", "y"], &["dx", "x*dy"]);
    let r = is_involutive(&nonint).unwrap();
    ensure(!r.closed, || "nonint reported closed".into())?;
    let w = nonint.format_field(&r.witnesses[0].bracket);
    ensure(w == "dy", || format!("nonint witness is {w}, expected dy"))
}

fn random_word(s: &FoliationSpec, rng: &mut SeededRng, max_steps: u64) -> FlowWord {
    let len = 1 + rng.below(max_steps);
    let steps = (0..len)
        .map(|_| {
            let coeffs = (0..s.num_generators())
                .map(|_| BigRational::new(BigInt::from(rng.below(9) as i64 - 4), BigInt::from(4)))
                .collect();
            FlowStep::new(coeffs, rng.uniform(-1.0, 1.0))
        })
        .collect();
    FlowWord::new(s, steps).unwrap()
}

fn germ_distinctness() -> Verdict {
    let s = sl2();
    let opts = NumericOptions::default();
    let origin = [0.0, 0.0];
    let mut rng = SeededRng::new(4);
    let mut pairs = 0;
    let mut attempts = 0;
    while pairs < 20 {
        attempts += 1;
        ensure(attempts < 1000, || "could not draw separated word pairs".into())?;
        let (w1, w2) = (random_word(&s, &mut rng, 3), random_word(&s, &mut rng, 3));
        let gap = jet_exact_linear(&s, &w1)
            .unwrap()
            .max_abs_diff(&jet_exact_linear(&s, &w2).unwrap());
        if gap < GERM_SEPARATION {
            continue;
        }
        pairs += 1;
        let eq = germ_equal_at_fixed_point(&s, &w1, &w2, &origin, DEFAULT_GERM_TOL, &opts).unwrap();
        ensure(!eq, || format!("pair {pairs} with jet gap {gap:e} reported equal"))?;
        for w in [&w1, &w2] {
            let eq = germ_equal_at_fixed_point(&s, w, w, &origin, DEFAULT_GERM_TOL, &opts).unwrap();
            ensure(eq, || format!("identical words in pair {pairs} reported different"))?;
        }
    }
    Ok(())
}

fn jet_oracle() -> Verdict {
    let s = sl2();
    let opts = NumericOptions::with_step(1e-3);
    let mut rng = SeededRng::new(5);
    for i in 0..50 {
        let w = random_word(&s, &mut rng, 4);
        let numeric = holonomy_jet(&s, &w, &[0.0, 0.0], &opts).unwrap();
        let exact = jet_exact_linear(&s, &w).unwrap();
        let d = numeric.max_abs_diff(&exact);
        ensure(d <= JET_ORACLE_TOL, || format!("word {i}: jet error {d:e}"))?;
    }
    Ok(())
}

fn chart_rank() -> Verdict {
    let opts = NumericOptions::default();
    let mut specs = linear_examples();
    specs.extend([("x dx", folk(1)), ("x^2 dx", folk(2)), ("x^3 dx", folk(3))]);
    for (idx, (name, s)) in specs.iter().enumerate() {
        let chart = chart_at(s, &vec![0.0; s.nvars()], &opts).unwrap();
        for p in random_rational_points(s.nvars(), 50, 600 + idx as u64) {
            let r = chart_rank_at(&chart, &p).unwrap();
            ensure(r.numeric_rank == r.tangent_dim, || {
                format!(
                    "{name}: rank {} vs tangent {} at {:?}",
                    r.numeric_rank, r.tangent_dim, p.coords
                )
            })?;
        }
    }
    Ok(())
}

fn semicontinuity() -> Verdict {
    let quarter = |i: i64| BigRational::new(BigInt::from(i), BigInt::from(4));
    for (name, s) in linear_examples() {
        let syz = syzygy_basis(&s).unwrap();
        let at_zero = point_dims(&syz, &pt(&[0, 0])).unwrap();
        for i in -4..=4 {
            for j in -4..=4 {
                let p = RationalPoint::new(vec![quarter(i), quarter(j)]);
                let d = point_dims(&syz, &p).unwrap();
                ensure(d.fiber <= at_zero.fiber, || format!("{name}: fiber above 0 at ({i},{j})/4"))?;
                ensure(d.tangent >= at_zero.tangent, || {
                    format!("{name}: tangent below 0 at ({i},{j})/4")
                })?;
                ensure(d.fiber >= d.tangent, || format!("{name}: fiber < tangent at ({i},{j})/4"))?;
            }
        }
    }
    Ok(())
}

fn rounded(x: &[f64]) -> RationalPoint {
    RationalPoint::new(
        x.iter()
            .map(|v| {
                BigRational::new(
                    BigInt::from((v * LEAF_ROUNDING as f64).round() as i64),
                    BigInt::from(LEAF_ROUNDING),
                )
            })
            .collect(),
    )
}

fn leaf_invariance() -> Verdict {
    let opts = NumericOptions::default();
    for (idx, (name, s)) in linear_examples().into_iter().enumerate() {
        for (start, expected) in [([1.0, 0.0], 2), ([0.0, 0.0], 0)] {
            let path = leaf_sample(&s, &start, 100, 800 + idx as u64, &opts).unwrap();
            for (step, x) in path.iter().enumerate() {
                let td = tangent_dim(&s, &rounded(x)).unwrap();
                ensure(td == expected, || {
                    format!("{name}: tangent {td} at step {step} from {start:?}")
                })?;
                if expected == 0 {
                    ensure(x.iter().all(|v| *v == 0.0), || {
                        format!("{name}: left the origin at step {step}")
                    })?;
                }
            }
        }
    }
    Ok(())
}

// Brute-force membership: solve Σ fᵢXᵢ = X for coefficients fᵢ of degree at
// most `bound` by exact Gaussian elimination.

fn monomials_up_to(n: usize, bound: u32) -> Vec<Monomial> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|e: Vec<u32>| {
                let used: u32 = e.iter().sum();
                (0..=bound - used).map(move |d| {
                    let mut e = e.clone();
                    e.push(d);
                    e
                })
            })
            .collect();
    }
    out.into_iter().map(Monomial::from_exponents).collect()
}

fn solvable(mut rows: Vec<Vec<BigRational>>, unknowns: usize) -> bool {
    let mut r = 0;
    for c in 0..unknowns {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r][c].clone();
        let prow: Vec<BigRational> = rows[r].iter().map(|v| v / &pivot).collect();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (a, b) in row.iter_mut().zip(&prow) {
                    *a -= &f * b;
                }
            }
        }
        rows[r] = prow;
        r += 1;
    }
    rows[r..].iter().all(|row| row[unknowns].is_zero())
}

fn oracle_member(s: &FoliationSpec, x: &VectorField, bound: u32) -> bool {
    let n = s.nvars();
    let basis = monomials_up_to(n, bound);
    let mut columns: Vec<Vec<Poly>> = Vec::new();
    for g in s.generators() {
        for m in &basis {
            let f = Poly::monomial(n, m.clone(), BigRational::one());
            columns.push(g.scale(&f).components().to_vec());
        }
    }
    let mut eq_monos: Vec<Monomial> = Vec::new();
    for col in columns.iter().chain(std::iter::once(&x.components().to_vec())) {
        for comp in col {
            for (m, _) in comp.terms() {
                if !eq_monos.contains(m) {
                    eq_monos.push(m.clone());
                }
            }
        }
    }
    let mut rows = Vec::new();
    for i in 0..n {
        for m in &eq_monos {
            let mut row: Vec<BigRational> = columns.iter().map(|c| c[i].coeff(m)).collect();
            row.push(x.components()[i].coeff(m));
            rows.push(row);
        }
    }
    solvable(rows, columns.len())
}

fn random_poly(rng: &mut SeededRng, n: usize, max_deg: u32, max_terms: u64) -> Poly {
    let monos = monomials_up_to(n, max_deg);
    let terms = (0..1 + rng.below(max_terms)).map(|_| {
        let m = monos[rng.below(monos.len() as u64) as usize].clone();
        (m, BigRational::from_integer(BigInt::from(rng.below(7) as i64 - 3)))
    });
    Poly::from_terms(n, terms)
}

fn random_field(rng: &mut SeededRng, n: usize, max_deg: u32, max_terms: u64) -> VectorField {
    VectorField::new((0..n).map(|_| random_poly(rng, n, max_deg, max_terms)).collect()).unwrap()
}

fn membership_oracle() -> Verdict {
    const ORACLE_BOUND: u32 = 4;
    let mut rng = SeededRng::new(9);
    let mut members = 0;
    for inst in 0..100 {
        let n = 1 + rng.below(2) as usize;
        let k = 1 + rng.below(3) as usize;
        let names = ["x", "y"][..n].iter().map(|v| v.to_string()).collect();
        let gens = (0..k).map(|_| random_field(&mut rng, n, 3, 2)).collect();
        let s = FoliationSpec::new(names, gens).unwrap();
        let query = if inst % 2 == 0 {
            let coeffs: Vec<Poly> = (0..k).map(|_| random_poly(&mut rng, n, 1, 2)).collect();
            combine(&s, &coeffs)
        } else {
            random_field(&mut rng, n, 4, 3)
        };
        let gb = module_groebner(&s).unwrap();
        let m = contains(&gb, &query).unwrap();
        let oracle = oracle_member(&s, &query, ORACLE_BOUND);
        if let Some(cert) = &m.certificate {
            ensure(combine(&s, cert) == query, || format!("instance {inst}: bad certificate"))?;
        }
        let cert_in_bound = m
            .certificate
            .as_ref()
            .is_some_and(|c| c.iter().all(|p| p.degree().is_none_or(|d| d <= ORACLE_BOUND)));
        ensure(!oracle || m.member, || format!("instance {inst}: oracle member, Gröbner not"))?;
        ensure(!cert_in_bound || oracle, || {
            format!("instance {inst}: Gröbner member within bound, oracle not")
        })?;
        members += m.member as usize;
    }
    ensure(members > 0 && members < 100, || format!("degenerate sample: {members} members"))
}

fn rk4_convergence() -> Verdict {
    let cases: [(FoliationSpec, ClosedForm); 2] = [
        (folk(1), |t, x0| t.exp() * x0),
        (folk(2), |t, x0| x0 / (1.0 - t * x0)),
    ];
    for (ci, (s, exact)) in cases.iter().enumerate() {
        let max_err = |h: f64| {
            let opts = NumericOptions::with_step(h);
            let mut worst = 0.0f64;
            for x0 in [-0.5, -0.25, 0.3, 0.5] {
                for t in [0.5, 1.0] {
                    let w = FlowWord::new(s, vec![FlowStep::new(vec![BigRational::one()], t)]).unwrap();
                    let got = flow(s, &w, &[x0], &opts).unwrap()[0];
                    worst = worst.max((got - exact(t, x0)).abs());
                }
            }
            worst
        };
        let errs = [max_err(0.1), max_err(0.05), max_err(0.025)];
        for pair in errs.windows(2) {
            let ratio = pair[0] / pair[1];
            ensure(ratio >= RK4_MIN_RATIO, || {
                format!("case {ci}: error ratio {ratio:.2} ({:e} -> {:e})", pair[0], pair[1])
            })?;
        }
    }
    Ok(())
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        (1, "fiber dimensions of linear actions", 5, fiber_dimensions),
        (2, "x^k dx family distinctness", 1, folk_distinct),
        (3, "involutivity", 2, involutivity),
        (4, "germ distinctness at the origin", 5, germ_distinctness),
        (5, "jet oracle agreement", 30, jet_oracle),
        (6, "chart rank equals leaf dimension", 30, chart_rank),
        (7, "semicontinuity on the quarter grid", 10, semicontinuity),
        (8, "leaf invariance of tangent dimension", 10, leaf_invariance),
        (9, "membership oracle equivalence", 60, membership_oracle),
        (10, "RK4 fourth-order convergence", 5, rk4_convergence),
    ];
    println!();
    let mut failures = Vec::new();
    for (id, title, budget, check) in criteria {
        let start = Instant::now();
        let verdict = check();
        let elapsed = start.elapsed();
        let verdict = verdict.and_then(|()| {
            ensure(elapsed <= Duration::from_secs(budget), || {
                format!("over time budget ({elapsed:.2?})")
            })
        });
        let tag = if verdict.is_ok() { "PASS" } else { "FAIL" };
        print!("[{tag}] {id:>2} {title} ({elapsed:.2?} / budget {budget}s)");
        match verdict {
            Ok(()) => println!(),
            Err(why) => {
                println!(": {why}");
                failures.push(id);
            }
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}

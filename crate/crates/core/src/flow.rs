//! Flows of generator combinations, words in the group they generate, leaf
//! sampling, and the path-holonomy chart `(y, x) ↦ exp(Σ yᵢXᵢ)(x)`.
//!
//! All integration is classical fixed-step RK4. A step of duration `t` is
//! split into `⌈|t|/h⌉` equal substeps, so for a fixed `h` the result is a
//! deterministic function of the inputs.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::rank_numeric;
use crate::modalg::{tangent_dim, RationalPoint};
use crate::poly::Poly;
use crate::vfield::{FoliationSpec, VectorField};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NumericOptions {
    /// RK4 step size `h`.
    pub step: f64,
    /// Cap on RK4 substeps per flow step.
    pub max_steps: u64,
    /// Central-difference increment.
    pub fd_epsilon: f64,
    /// Relative pivot threshold for numerical rank.
    pub rank_tol: f64,
    /// Half-width of the domain box `[-b, b]ⁿ`; leaving it is a blow-up.
    pub domain_bound: f64,
}

impl Default for NumericOptions {
    fn default() -> Self {
        NumericOptions {
            step: 1e-3,
            max_steps: 100_000_000,
            fd_epsilon: 1e-5,
            rank_tol: 1e-8,
            domain_bound: 1e10,
        }
    }
}

impl NumericOptions {
    pub fn with_step(step: f64) -> Self {
        NumericOptions {
            step,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.step)
            || self.max_steps == 0
            || !positive(self.fd_epsilon)
            || !positive(self.rank_tol)
            || !positive(self.domain_bound)
        {
            return Err(Error::Options(format!("{self:?}")));
        }
        Ok(())
    }
}

/// A polynomial compiled to `(coefficient, exponents)` pairs for fast
/// floating-point evaluation.
#[derive(Clone, Debug)]
struct CompiledPoly(Vec<(f64, Vec<u32>)>);

impl CompiledPoly {
    fn new(p: &Poly) -> Self {
        CompiledPoly(
            p.terms()
                .map(|(m, c)| (c.to_f64().unwrap_or(f64::NAN), m.exponents().to_vec()))
                .collect(),
        )
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .map(|(c, e)| {
                e.iter()
                    .zip(x)
                    .filter(|(&k, _)| k > 0)
                    .fold(*c, |acc, (&k, v)| acc * v.powi(k as i32))
            })
            .sum()
    }
}

/// Generators and their Jacobians, compiled for numerical evaluation.
#[derive(Clone, Debug)]
pub(crate) struct CompiledSpec {
    n: usize,
    fields: Vec<Vec<CompiledPoly>>,
    jacobians: Vec<Vec<Vec<CompiledPoly>>>,
}

impl CompiledSpec {
    pub(crate) fn new(spec: &FoliationSpec) -> Self {
        let compile = |v: &VectorField| v.components().iter().map(CompiledPoly::new).collect();
        CompiledSpec {
            n: spec.nvars(),
            fields: spec.generators().iter().map(compile).collect(),
            jacobians: spec
                .generators()
                .iter()
                .map(|g| {
                    g.jacobian()
                        .iter()
                        .map(|row| row.iter().map(CompiledPoly::new).collect())
                        .collect()
                })
                .collect(),
        }
    }

    /// `Σ cᵢ Xᵢ(x)`.
    fn field(&self, c: &[f64], x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (ci, comps) in c.iter().zip(&self.fields) {
            if *ci == 0.0 {
                continue;
            }
            for (o, p) in out.iter_mut().zip(comps) {
                *o += ci * p.eval(x);
            }
        }
    }

    /// Row-major Jacobian of `Σ cᵢ Xᵢ` at `x`.
    fn jacobian(&self, c: &[f64], x: &[f64], out: &mut [f64]) {
        let n = self.n;
        out.iter_mut().for_each(|v| *v = 0.0);
        for (ci, jac) in c.iter().zip(&self.jacobians) {
            if *ci == 0.0 {
                continue;
            }
            for (r, row) in jac.iter().enumerate() {
                for (col, p) in row.iter().enumerate() {
                    out[r * n + col] += ci * p.eval(x);
                }
            }
        }
    }
}

fn check_state(x: &[f64], bound: f64, time: f64) -> Result<()> {
    if x.iter().any(|v| !v.is_finite() || v.abs() > bound) {
        return Err(Error::BlowUp { time });
    }
    Ok(())
}

/// Fixed-step RK4 for `s' = rhs(s)` over signed duration `t`. Only the first
/// `checked` components of the state are tested against the domain box.
fn rk4<F>(state: &mut [f64], t: f64, opts: &NumericOptions, checked: usize, mut rhs: F) -> Result<()>
where
    F: FnMut(&[f64], &mut [f64]),
{
    if t == 0.0 {
        return Ok(());
    }
    let substeps = (t.abs() / opts.step).ceil().max(1.0);
    if substeps > opts.max_steps as f64 {
        return Err(Error::Options(format!(
            "{substeps} RK4 steps exceed the cap of {}",
            opts.max_steps
        )));
    }
    let substeps = substeps as u64;
    let dt = t / substeps as f64;
    let d = state.len();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d]);
    for i in 0..substeps {
        rhs(state, &mut k1);
        for j in 0..d {
            tmp[j] = state[j] + 0.5 * dt * k1[j];
        }
        rhs(&tmp, &mut k2);
        for j in 0..d {
            tmp[j] = state[j] + 0.5 * dt * k2[j];
        }
        rhs(&tmp, &mut k3);
        for j in 0..d {
            tmp[j] = state[j] + dt * k3[j];
        }
        rhs(&tmp, &mut k4);
        for j in 0..d {
            state[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        check_state(&state[..checked], opts.domain_bound, dt * (i + 1) as f64)?;
        if state[checked..].iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp {
                time: dt * (i + 1) as f64,
            });
        }
    }
    Ok(())
}

/// Flows `x` along `Σ cᵢXᵢ` for time `t`.
pub(crate) fn flow_combination(
    cs: &CompiledSpec,
    c: &[f64],
    t: f64,
    x: &[f64],
    opts: &NumericOptions,
) -> Result<Vec<f64>> {
    let mut state = x.to_vec();
    let n = cs.n;
    rk4(&mut state, t, opts, n, |s, out| cs.field(c, s, out))?;
    Ok(state)
}

/// Flows `x` and the linearization of the flow map. Returns the end point
/// and the row-major `n × n` derivative `∂φ_t/∂x`.
pub(crate) fn flow_with_jacobian(
    cs: &CompiledSpec,
    c: &[f64],
    t: f64,
    x: &[f64],
    opts: &NumericOptions,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = cs.n;
    let mut state = vec![0.0; n + n * n];
    state[..n].copy_from_slice(x);
    for i in 0..n {
        state[n + i * n + i] = 1.0;
    }
    let mut jac = vec![0.0; n * n];
    rk4(&mut state, t, opts, n, |s, out| {
        let (p, v) = s.split_at(n);
        let (dp, dv) = out.split_at_mut(n);
        cs.field(c, p, dp);
        cs.jacobian(c, p, &mut jac);
        for r in 0..n {
            for col in 0..n {
                dv[r * n + col] = (0..n).map(|m| jac[r * n + m] * v[m * n + col]).sum();
            }
        }
    })?;
    let v = state.split_off(n);
    Ok((state, v))
}

fn spec_fingerprint(spec: &FoliationSpec) -> u64 {
    let mut h = DefaultHasher::new();
    spec.hash(&mut h);
    h.finish()
}

/// One factor `exp(t · Σ cᵢXᵢ)` of a word.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowStep {
    pub coeffs: Vec<BigRational>,
    pub time: f64,
}

impl FlowStep {
    pub fn new(coeffs: Vec<BigRational>, time: f64) -> Self {
        FlowStep { coeffs, time }
    }

    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN))
            .collect()
    }
}

/// A word `φ₁ ∘ φ₂ ∘ … ∘ φₘ` in the group generated by flows of the
/// module. Composition order: applying the word to a point runs the last
/// step first, so concatenation of words is composition of maps.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowWord {
    spec_id: u64,
    k: usize,
    steps: Vec<FlowStep>,
}

impl FlowWord {
    pub fn new(spec: &FoliationSpec, steps: Vec<FlowStep>) -> Result<Self> {
        let k = spec.num_generators();
        if let Some(s) = steps.iter().find(|s| s.coeffs.len() != k) {
            return Err(Error::Arity {
                expected: k,
                found: s.coeffs.len(),
            });
        }
        if let Some(s) = steps.iter().find(|s| !s.time.is_finite()) {
            return Err(Error::Precondition(format!(
                "non-finite duration {}",
                s.time
            )));
        }
        Ok(FlowWord {
            spec_id: spec_fingerprint(spec),
            k,
            steps,
        })
    }

    pub fn identity(spec: &FoliationSpec) -> Self {
        FlowWord {
            spec_id: spec_fingerprint(spec),
            k: spec.num_generators(),
            steps: Vec::new(),
        }
    }

    pub fn steps(&self) -> &[FlowStep] {
        &self.steps
    }

    pub fn is_identity(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn check_spec(&self, spec: &FoliationSpec) -> Result<()> {
        if self.spec_id != spec_fingerprint(spec) || self.k != spec.num_generators() {
            return Err(Error::SpecMismatch);
        }
        Ok(())
    }
}

/// Reversed steps with negated durations.
pub fn word_inverse(word: &FlowWord) -> FlowWord {
    FlowWord {
        spec_id: word.spec_id,
        k: word.k,
        steps: word
            .steps
            .iter()
            .rev()
            .map(|s| FlowStep::new(s.coeffs.clone(), -s.time))
            .collect(),
    }
}

/// `w1 ∘ w2`: the steps of `w1` followed by those of `w2`.
pub fn word_compose(w1: &FlowWord, w2: &FlowWord) -> Result<FlowWord> {
    if w1.spec_id != w2.spec_id || w1.k != w2.k {
        return Err(Error::SpecMismatch);
    }
    let mut steps = w1.steps.clone();
    steps.extend(w2.steps.iter().cloned());
    Ok(FlowWord {
        spec_id: w1.spec_id,
        k: w1.k,
        steps,
    })
}

fn check_x(spec: &FoliationSpec, x: &[f64]) -> Result<()> {
    if x.len() != spec.nvars() {
        return Err(Error::Arity {
            expected: spec.nvars(),
            found: x.len(),
        });
    }
    Ok(())
}

/// Applies `word` to `x0`.
pub fn flow(spec: &FoliationSpec, word: &FlowWord, x0: &[f64], opts: &NumericOptions) -> Result<Vec<f64>> {
    opts.validate()?;
    word.check_spec(spec)?;
    check_x(spec, x0)?;
    let cs = CompiledSpec::new(spec);
    let mut x = x0.to_vec();
    for s in word.steps.iter().rev() {
        x = flow_combination(&cs, &s.coeffs_f64(), s.time, &x, opts)?;
    }
    Ok(x)
}

/// Seeded xorshift64* generator. The seed is first mixed with one round of
/// splitmix64 (increment `0x9E3779B97F4A7C15`, multipliers
/// `0xBF58476D1CE4E5B9` and `0x94D049BB133111EB`); each draw then applies
/// shifts 12, 25, 27 and multiplies by `0x2545F4914F6CDD1D`. Uniform
/// doubles take the top 53 bits.
#[derive(Clone, Debug)]
pub struct SeededRng {
    state: u64,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        SeededRng {
            state: if z == 0 { 0x9E37_79B9_7F4A_7C15 } else { z },
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    /// Uniform on `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }
}

/// Random walk through the leaf of `x0`: each step flows along a random
/// combination (coefficients uniform on `[-1, 1]`) for a random duration
/// (uniform on `[0, 0.1]`). The returned list starts with `x0`.
pub fn leaf_sample(
    spec: &FoliationSpec,
    x0: &[f64],
    n_steps: usize,
    seed: u64,
    opts: &NumericOptions,
) -> Result<Vec<Vec<f64>>> {
    opts.validate()?;
    check_x(spec, x0)?;
    let cs = CompiledSpec::new(spec);
    let k = spec.num_generators();
    let mut rng = SeededRng::new(seed);
    let mut out = Vec::with_capacity(n_steps + 1);
    out.push(x0.to_vec());
    let mut x = x0.to_vec();
    for _ in 0..n_steps {
        let c: Vec<f64> = (0..k).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let t = rng.uniform(0.0, 0.1);
        x = flow_combination(&cs, &c, t, &x, opts)?;
        out.push(x.clone());
    }
    Ok(out)
}

/// The path-holonomy chart `ℝᵏ × M` at a base point, with source
/// `(y, x) ↦ x` and target `(y, x) ↦ exp(Σ yᵢXᵢ)(x)`.
#[derive(Clone, Debug)]
pub struct FlowChart {
    spec: FoliationSpec,
    base_point: Vec<f64>,
    opts: NumericOptions,
    compiled: CompiledSpec,
}

pub fn chart_at(spec: &FoliationSpec, x0: &[f64], opts: &NumericOptions) -> Result<FlowChart> {
    opts.validate()?;
    check_x(spec, x0)?;
    Ok(FlowChart {
        spec: spec.clone(),
        base_point: x0.to_vec(),
        opts: *opts,
        compiled: CompiledSpec::new(spec),
    })
}

impl FlowChart {
    pub fn spec(&self) -> &FoliationSpec {
        &self.spec
    }

    pub fn base_point(&self) -> &[f64] {
        &self.base_point
    }

    pub fn options(&self) -> &NumericOptions {
        &self.opts
    }

    /// Number of parameters `k`.
    pub fn dim_parameters(&self) -> usize {
        self.spec.num_generators()
    }

    pub(crate) fn compiled(&self) -> &CompiledSpec {
        &self.compiled
    }

    fn check_y(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.dim_parameters() {
            return Err(Error::Arity {
                expected: self.dim_parameters(),
                found: y.len(),
            });
        }
        Ok(())
    }

    pub fn source(&self, _y: &[f64], x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }

    pub fn target(&self, y: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        self.check_y(y)?;
        check_x(&self.spec, x)?;
        flow_combination(&self.compiled, y, 1.0, x, &self.opts)
    }

    /// `∂t/∂y` at `(0, x)` by central differences, as `n` rows of `k`.
    pub fn parameter_derivative(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        check_x(&self.spec, x)?;
        let (n, k) = (self.spec.nvars(), self.dim_parameters());
        let eps = self.opts.fd_epsilon;
        let mut d = vec![vec![0.0; k]; n];
        for i in 0..k {
            let mut y = vec![0.0; k];
            y[i] = eps;
            let plus = self.target(&y, x)?;
            y[i] = -eps;
            let minus = self.target(&y, x)?;
            for r in 0..n {
                d[r][i] = (plus[r] - minus[r]) / (2.0 * eps);
            }
        }
        Ok(d)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankSample {
    pub point: RationalPoint,
    pub numeric_rank: usize,
    pub tangent_dim: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChartRankReport {
    pub samples: Vec<RankSample>,
    pub mismatches: Vec<usize>,
}

impl ChartRankReport {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn rational_to_f64(p: &RationalPoint) -> Vec<f64> {
    p.coords.iter().map(|q| q.to_f64().unwrap_or(f64::NAN)).collect()
}

/// Numerical rank of `∂t/∂y|_(0,x)` next to the exact tangent dimension at
/// one rational point.
pub fn chart_rank_at(chart: &FlowChart, point: &RationalPoint) -> Result<RankSample> {
    let x = rational_to_f64(point);
    let d = chart.parameter_derivative(&x)?;
    Ok(RankSample {
        point: point.clone(),
        numeric_rank: rank_numeric(&d, chart.opts.rank_tol),
        tangent_dim: tangent_dim(&chart.spec, point)?,
    })
}

/// Compares the numerical rank of `∂t/∂y|_(0,x)` with the exact tangent
/// dimension, at the chart's base point (when it is exactly rational) and at
/// every extra sample.
pub fn chart_rank_check(chart: &FlowChart, samples: &[RationalPoint]) -> Result<ChartRankReport> {
    let mut points = Vec::with_capacity(samples.len() + 1);
    if let Some(base) = RationalPoint::from_f64(&chart.base_point) {
        points.push(base);
    }
    points.extend(samples.iter().cloned());
    let samples = points
        .iter()
        .map(|p| chart_rank_at(chart, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(ChartRankReport::from_samples(samples))
}

impl ChartRankReport {
    pub fn from_samples(samples: Vec<RankSample>) -> Self {
        let mismatches = samples
            .iter()
            .enumerate()
            .filter(|(_, s)| s.numeric_rank != s.tangent_dim)
            .map(|(i, _)| i)
            .collect();
        ChartRankReport {
            samples,
            mismatches,
        }
    }
}

/// Random points of `[-1, 1]ⁿ` with denominators in `1..=8`.
pub fn random_rational_points(n: usize, count: usize, seed: u64) -> Vec<RationalPoint> {
    let mut rng = SeededRng::new(seed);
    (0..count)
        .map(|_| {
            RationalPoint::new(
                (0..n)
                    .map(|_| {
                        let den = 1 + rng.below(8) as i64;
                        let num = rng.below((2 * den + 1) as u64) as i64 - den;
                        BigRational::new(num.into(), den.into())
                    })
                    .collect(),
            )
        })
        .collect()
}

/// An affine hyperplane `{v : normal · v = offset}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Transversal {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Transversal {
    pub fn through(point: &[f64], normal: Vec<f64>) -> Self {
        let offset = dot(&normal, point);
        Transversal { normal, offset }
    }

    /// Orthonormal basis of the direction space, by Gram–Schmidt on the
    /// standard basis after the unit normal.
    pub fn direction_basis(&self) -> Vec<Vec<f64>> {
        let n = self.normal.len();
        let norm = dot(&self.normal, &self.normal).sqrt();
        let mut ortho: Vec<Vec<f64>> = vec![self.normal.iter().map(|v| v / norm).collect()];
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            for q in &ortho {
                let p = dot(&e, q);
                e.iter_mut().zip(q).for_each(|(a, b)| *a -= p * b);
            }
            let len = dot(&e, &e).sqrt();
            if len > 1e-8 && ortho.len() < n {
                ortho.push(e.iter().map(|v| v / len).collect());
            }
        }
        ortho.split_off(1)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowBoxReport {
    /// Row-major derivative of `(t, u) ↦ φ_t(x0 + B u)` at `(0, 0)`.
    pub jacobian: Vec<Vec<f64>>,
    pub invertible: bool,
}

/// Jacobian at `(0, x0)` of the flow-box map built from one generator and a
/// transversal hyperplane through `x0`. Without a transversal, the
/// hyperplane orthogonal to the generator at `x0` is used.
pub fn flow_box(
    spec: &FoliationSpec,
    gen_index: usize,
    x0: &[f64],
    transversal: Option<&Transversal>,
    opts: &NumericOptions,
) -> Result<FlowBoxReport> {
    opts.validate()?;
    check_x(spec, x0)?;
    let k = spec.num_generators();
    if gen_index >= k {
        return Err(Error::IndexOutOfRange {
            index: gen_index,
            len: k,
        });
    }
    let n = spec.nvars();
    let gen = &spec.generators()[gen_index];
    let exact = RationalPoint::from_f64(x0)
        .ok_or_else(|| Error::Precondition("non-finite base point".into()))?;
    if gen.eval(&exact.coords).iter().all(Zero::is_zero) {
        return Err(Error::Precondition(format!(
            "generator {gen_index} vanishes at the base point"
        )));
    }
    let cs = CompiledSpec::new(spec);
    let mut c = vec![0.0; k];
    c[gen_index] = 1.0;
    let mut xv = vec![0.0; n];
    cs.field(&c, x0, &mut xv);

    let owned;
    let tr = match transversal {
        Some(t) => t,
        None => {
            owned = Transversal::through(x0, xv.clone());
            &owned
        }
    };
    if tr.normal.len() != n {
        return Err(Error::Arity {
            expected: n,
            found: tr.normal.len(),
        });
    }
    let scale = dot(&tr.normal, &tr.normal).sqrt();
    if scale == 0.0 {
        return Err(Error::Precondition("transversal normal is zero".into()));
    }
    let xs = dot(x0, x0).sqrt().max(1.0);
    if (dot(&tr.normal, x0) - tr.offset).abs() > 1e-12 * scale * xs {
        return Err(Error::Precondition(
            "base point does not lie on the transversal".into(),
        ));
    }
    let xnorm = dot(&xv, &xv).sqrt();
    if dot(&tr.normal, &xv).abs() <= 1e-12 * scale * xnorm {
        return Err(Error::Precondition(
            "transversal is tangent to the generator".into(),
        ));
    }

    let basis = tr.direction_basis();
    let eps = opts.fd_epsilon;
    let h = |t: f64, u: &[f64]| -> Result<Vec<f64>> {
        let mut v = x0.to_vec();
        for (b, ui) in basis.iter().zip(u) {
            v.iter_mut().zip(b).for_each(|(a, bj)| *a += ui * bj);
        }
        flow_combination(&cs, &c, t, &v, opts)
    };
    let zero_u = vec![0.0; n - 1];
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let plus = h(eps, &zero_u)?;
    let minus = h(-eps, &zero_u)?;
    cols.push(plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * eps)).collect());
    for i in 0..n - 1 {
        let mut u = zero_u.clone();
        u[i] = eps;
        let plus = h(0.0, &u)?;
        u[i] = -eps;
        let minus = h(0.0, &u)?;
        cols.push(plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * eps)).collect());
    }
    let jacobian: Vec<Vec<f64>> = (0..n).map(|r| cols.iter().map(|col| col[r]).collect()).collect();
    let invertible = rank_numeric(&jacobian, opts.rank_tol) == n;
    Ok(FlowBoxReport {
        jacobian,
        invertible,
    })
}

//! First-jet holonomy at fixed points.
//!
//! A slice `{y₀} × M` of the path-holonomy chart is a bisection; it carries
//! the diffeomorphism `x ↦ exp(Σ y₀ᵢXᵢ)(x)`. At a common fixed point of a
//! word's steps, the linearization of the carried map is the word's jet.
//! For linear actions the jet at the origin is the group element itself, so
//! jets separate germs there, and only there is [`germ_equal_at_fixed_point`]
//! offered.

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::expm::expm;
use crate::flow::{flow_combination, flow_with_jacobian, FlowChart, FlowWord, NumericOptions};
use crate::modalg::RationalPoint;
use crate::vfield::FoliationSpec;

/// Linearization of a carried diffeomorphism at a point, `n × n`.
#[derive(Clone, Debug, PartialEq)]
pub struct JetMatrix(pub DMatrix<f64>);

impl JetMatrix {
    pub fn identity(n: usize) -> Self {
        JetMatrix(DMatrix::identity(n, n))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn mul(&self, other: &JetMatrix) -> JetMatrix {
        JetMatrix(&self.0 * &other.0)
    }

    /// Largest absolute entry of `self − other`.
    pub fn max_abs_diff(&self, other: &JetMatrix) -> f64 {
        (&self.0 - &other.0).abs().max()
    }

    pub fn determinant(&self) -> f64 {
        self.0.determinant()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.0.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    fn from_row_major(n: usize, data: &[f64]) -> Self {
        JetMatrix(DMatrix::from_row_slice(n, n, data))
    }
}

/// The bisection `{y₀} × M` of a chart and the diffeomorphism it carries.
#[derive(Clone, Debug)]
pub struct CarriedDiffeo<'a> {
    chart: &'a FlowChart,
    y0: Vec<f64>,
}

pub fn carried_diffeo<'a>(chart: &'a FlowChart, y0: &[f64]) -> Result<CarriedDiffeo<'a>> {
    if y0.len() != chart.dim_parameters() {
        return Err(Error::Arity {
            expected: chart.dim_parameters(),
            found: y0.len(),
        });
    }
    Ok(CarriedDiffeo {
        chart,
        y0: y0.to_vec(),
    })
}

impl CarriedDiffeo<'_> {
    pub fn parameter(&self) -> &[f64] {
        &self.y0
    }

    fn check_x(&self, x: &[f64]) -> Result<()> {
        let n = self.chart.spec().nvars();
        if x.len() != n {
            return Err(Error::Arity {
                expected: n,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Source restricted to the bisection: the identity.
    pub fn source(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_x(x)?;
        flow_combination(self.chart.compiled(), &self.y0, 1.0, x, self.chart.options())
    }

    /// Derivative of [`Self::evaluate`] from the variational equation
    /// `v' = J(x(t)) v` integrated alongside the trajectory.
    pub fn jacobian(&self, x: &[f64]) -> Result<JetMatrix> {
        self.check_x(x)?;
        let (_, v) =
            flow_with_jacobian(self.chart.compiled(), &self.y0, 1.0, x, self.chart.options())?;
        Ok(JetMatrix::from_row_major(x.len(), &v))
    }
}

/// Checks that `x` is a zero of every step's combined field: exactly when
/// the symbolic combination vanishes at the exact value of `x`, otherwise
/// numerically with `‖Σ cᵢXᵢ(x)‖∞ < 1e-12`.
fn check_fixed_point(spec: &FoliationSpec, word: &FlowWord, x: &[f64]) -> Result<()> {
    let exact = RationalPoint::from_f64(x)
        .ok_or_else(|| Error::Precondition("non-finite fixed point".into()))?;
    let values = spec.eval_generators(&exact.coords);
    for (s_idx, step) in word.steps().iter().enumerate() {
        let mut combined = vec![BigRational::zero(); spec.nvars()];
        for (c, v) in step.coeffs.iter().zip(&values) {
            for (acc, vi) in combined.iter_mut().zip(v) {
                *acc += c * vi;
            }
        }
        if combined.iter().all(Zero::is_zero) {
            continue;
        }
        let norm = combined
            .iter()
            .map(|q| q.to_f64().unwrap_or(f64::INFINITY).abs())
            .fold(0.0, f64::max);
        if norm >= 1e-12 {
            return Err(Error::Precondition(format!(
                "point is not fixed by step {s_idx} (field norm {norm:e})"
            )));
        }
    }
    Ok(())
}

/// Jet at a common fixed point of the map carried by `word`. Step
/// linearizations come from the variational equation and multiply in word
/// order, so `jet(w₁·w₂) = jet(w₁)·jet(w₂)`.
pub fn holonomy_jet(
    spec: &FoliationSpec,
    word: &FlowWord,
    x_fix: &[f64],
    opts: &NumericOptions,
) -> Result<JetMatrix> {
    opts.validate()?;
    if x_fix.len() != spec.nvars() {
        return Err(Error::Arity {
            expected: spec.nvars(),
            found: x_fix.len(),
        });
    }
    word.check_spec(spec)?;
    check_fixed_point(spec, word, x_fix)?;
    let n = spec.nvars();
    let cs = crate::flow::CompiledSpec::new(spec);
    let mut jet = JetMatrix::identity(n);
    for step in word.steps() {
        let (_, v) = flow_with_jacobian(&cs, &step.coeffs_f64(), step.time, x_fix, opts)?;
        jet = jet.mul(&JetMatrix::from_row_major(n, &v));
    }
    Ok(jet)
}

/// Matrices `Aᵢ` with `Xᵢ = (Aᵢ x) · ∂`, or an error naming the first
/// generator that is not linear.
pub fn linear_generators(spec: &FoliationSpec) -> Result<Vec<DMatrix<f64>>> {
    let n = spec.nvars();
    spec.generators()
        .iter()
        .enumerate()
        .map(|(idx, g)| {
            let mut a = DMatrix::zeros(n, n);
            for (row, comp) in g.components().iter().enumerate() {
                if !comp.is_homogeneous_of_degree(1) {
                    return Err(Error::Nonlinear { index: idx });
                }
                for col in 0..n {
                    let m = crate::poly::Monomial::var(n, col);
                    a[(row, col)] = comp.coeff(&m).to_f64().unwrap_or(f64::NAN);
                }
            }
            Ok(a)
        })
        .collect()
}

fn step_generator(mats: &[DMatrix<f64>], coeffs: &[f64], n: usize) -> DMatrix<f64> {
    mats.iter()
        .zip(coeffs)
        .fold(DMatrix::zeros(n, n), |acc, (a, c)| acc + a * *c)
}

/// `Π exp(tₛ Σ cᵢAᵢ)` over the steps of a word on a linear spec.
pub fn jet_exact_linear(spec: &FoliationSpec, word: &FlowWord) -> Result<JetMatrix> {
    word.check_spec(spec)?;
    let mats = linear_generators(spec)?;
    let n = spec.nvars();
    let mut jet = JetMatrix::identity(n);
    for step in word.steps() {
        let a = step_generator(&mats, &step.coeffs_f64(), n) * step.time;
        jet = jet.mul(&JetMatrix(expm(&a)));
    }
    Ok(jet)
}

pub const DEFAULT_GERM_TOL: f64 = 1e-6;

/// Germ comparison at the origin for linear actions: the germs of the
/// carried maps agree iff their jets agree, up to `tol` in max-entry norm.
pub fn germ_equal_at_fixed_point(
    spec: &FoliationSpec,
    w1: &FlowWord,
    w2: &FlowWord,
    x_fix: &[f64],
    tol: f64,
    opts: &NumericOptions,
) -> Result<bool> {
    linear_generators(spec)?;
    if x_fix.iter().any(|v| *v != 0.0) {
        return Err(Error::Precondition(
            "germ comparison is only certified at the origin".into(),
        ));
    }
    let j1 = holonomy_jet(spec, w1, x_fix, opts)?;
    let j2 = holonomy_jet(spec, w2, x_fix, opts)?;
    Ok(j1.max_abs_diff(&j2) < tol)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PushforwardReport {
    /// `exp(t Σ cᵢAᵢ)`.
    pub group_element: JetMatrix,
    /// Relative least-squares residual of `g Aⱼ g⁻¹` against the span of
    /// the `Aᵢ`, per generator.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub in_span: bool,
}

pub const PUSHFORWARD_TOL: f64 = 1e-8;

/// Checks that conjugation by `g = exp(t Σ cᵢAᵢ)` maps each `Aⱼ` back into
/// `span{Aᵢ}`. Residuals are `‖B z − vec(gAⱼg⁻¹)‖₂ / max(1, ‖vec(gAⱼg⁻¹)‖₂)`
/// for the least-squares `z`.
pub fn check_pushforward_linear(
    spec: &FoliationSpec,
    coeffs: &[BigRational],
    t: f64,
) -> Result<PushforwardReport> {
    let mats = linear_generators(spec)?;
    let k = mats.len();
    if coeffs.len() != k {
        return Err(Error::Arity {
            expected: k,
            found: coeffs.len(),
        });
    }
    let n = spec.nvars();
    let c: Vec<f64> = coeffs
        .iter()
        .map(|q| q.to_f64().unwrap_or(f64::NAN))
        .collect();
    let g = expm(&(step_generator(&mats, &c, n) * t));
    let g_inv = g
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Precondition("group element is singular".into()))?;

    let mut basis = DMatrix::zeros(n * n, k.max(1));
    for (j, a) in mats.iter().enumerate() {
        basis.set_column(j, &DVector::from_iterator(n * n, a.iter().copied()));
    }
    let svd = basis.clone().svd(true, true);
    let mut residuals = Vec::with_capacity(k);
    for a in &mats {
        let conj = &g * a * &g_inv;
        let target = DVector::from_iterator(n * n, conj.iter().copied());
        let z = svd
            .solve(&target, 1e-12)
            .map_err(|e| Error::Precondition(e.to_string()))?;
        let resid = (&basis * z - &target).norm() / target.norm().max(1.0);
        residuals.push(resid);
    }
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    Ok(PushforwardReport {
        group_element: JetMatrix(g),
        residuals,
        max_residual,
        in_span: max_residual < PUSHFORWARD_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{chart_at, word_compose, word_inverse, FlowStep};

    fn spec(vars: &[&str], gens: &[&str]) -> FoliationSpec {
        FoliationSpec::parse(vars, gens).unwrap()
    }

    fn sl2() -> FoliationSpec {
        spec(&["x", "y"], &["x*dx - y*dy", "y*dx", "x*dy"])
    }

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn word(s: &FoliationSpec, steps: &[(&[i64], f64)]) -> FlowWord {
        FlowWord::new(
            s,
            steps
                .iter()
                .map(|(c, t)| FlowStep::new(c.iter().map(|&v| q(v)).collect(), *t))
                .collect(),
        )
        .unwrap()
    }

    fn close(a: &JetMatrix, rows: &[&[f64]], tol: f64) -> bool {
        let b = JetMatrix(DMatrix::from_row_slice(
            rows.len(),
            rows.len(),
            &rows.concat(),
        ));
        a.max_abs_diff(&b) < tol
    }

    #[test]
    fn carried_diffeo_examples() {
        let opts = NumericOptions::default();
        let s = spec(&["x"], &["x*dx"]);
        let chart = chart_at(&s, &[0.0], &opts).unwrap();
        let d = carried_diffeo(&chart, &[1.0]).unwrap();
        assert!((d.evaluate(&[2.0]).unwrap()[0] - 5.436564).abs() < 1e-6);

        let chart = chart_at(&sl2(), &[0.0, 0.0], &opts).unwrap();
        let id = carried_diffeo(&chart, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(id.evaluate(&[0.3, 0.4]).unwrap(), vec![0.3, 0.4]);
        assert_eq!(id.jacobian(&[0.3, 0.4]).unwrap(), JetMatrix::identity(2));
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let opts = NumericOptions::default();
        let s = spec(&["x", "y"], &["x^2*dx + y*dy", "x*y*dx", "(1 - y^2)*dy"]);
        let chart = chart_at(&s, &[0.0, 0.0], &opts).unwrap();
        let d = carried_diffeo(&chart, &[0.3, -0.2, 0.5]).unwrap();
        for x in [[0.2, 0.1], [-0.4, 0.3], [0.1, -0.5]] {
            let j = d.jacobian(&x).unwrap();
            let eps = 1e-5;
            for col in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[col] += eps;
                xm[col] -= eps;
                let (p, m) = (d.evaluate(&xp).unwrap(), d.evaluate(&xm).unwrap());
                for row in 0..2 {
                    let fd = (p[row] - m[row]) / (2.0 * eps);
                    assert!((j.0[(row, col)] - fd).abs() < 1e-4);
                }
            }
        }
    }

    #[test]
    fn jet_examples() {
        let opts = NumericOptions::default();
        let s = sl2();
        let e = holonomy_jet(&s, &word(&s, &[(&[0, 1, 0], 1.0)]), &[0.0, 0.0], &opts).unwrap();
        assert!(close(&e, &[&[1.0, 1.0], &[0.0, 1.0]], 1e-6));

        let id = holonomy_jet(&s, &FlowWord::identity(&s), &[0.0, 0.0], &opts).unwrap();
        assert_eq!(id, JetMatrix::identity(2));

        let h = holonomy_jet(&s, &word(&s, &[(&[1, 0, 0], 1.0)]), &[0.0, 0.0], &opts).unwrap();
        let e1 = 1f64.exp();
        assert!(close(&h, &[&[e1, 0.0], &[0.0, 1.0 / e1]], 1e-6));
    }

    #[test]
    fn jet_requires_fixed_point() {
        let s = sl2();
        let w = word(&s, &[(&[0, 1, 0], 1.0)]);
        assert!(matches!(
            holonomy_jet(&s, &w, &[0.0, 1.0], &NumericOptions::default()),
            Err(Error::Precondition(_))
        ));
        // (1, 0) is fixed by E = y∂x.
        assert!(holonomy_jet(&s, &w, &[1.0, 0.0], &NumericOptions::default()).is_ok());
    }

    #[test]
    fn exact_linear_jets() {
        let s = sl2();
        let e = jet_exact_linear(&s, &word(&s, &[(&[0, 1, 0], 1.0)])).unwrap();
        assert!(close(&e, &[&[1.0, 1.0], &[0.0, 1.0]], 1e-15));
        let hh = jet_exact_linear(&s, &word(&s, &[(&[1, 0, 0], 0.7), (&[1, 0, 0], -0.7)])).unwrap();
        assert!(close(&hh, &[&[1.0, 0.0], &[0.0, 1.0]], 1e-14));
        let nonlin = spec(&["x"], &["x^2*dx"]);
        assert!(matches!(
            jet_exact_linear(&nonlin, &FlowWord::identity(&nonlin)),
            Err(Error::Nonlinear { index: 0 })
        ));
    }

    #[test]
    fn homomorphism_and_inverse() {
        let opts = NumericOptions::default();
        let s = sl2();
        let o = [0.0, 0.0];
        let w1 = word(&s, &[(&[1, 2, 0], 0.3), (&[0, -1, 1], 0.5)]);
        let w2 = word(&s, &[(&[1, 1, 1], -0.4)]);
        let j12 = holonomy_jet(&s, &word_compose(&w1, &w2).unwrap(), &o, &opts).unwrap();
        let prod = holonomy_jet(&s, &w1, &o, &opts)
            .unwrap()
            .mul(&holonomy_jet(&s, &w2, &o, &opts).unwrap());
        assert!(j12.max_abs_diff(&prod) < 1e-5);
        let inv = holonomy_jet(&s, &word_inverse(&w1), &o, &opts)
            .unwrap()
            .mul(&holonomy_jet(&s, &w1, &o, &opts).unwrap());
        assert!(inv.max_abs_diff(&JetMatrix::identity(2)) < 1e-5);
        assert!((j12.determinant() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn germ_examples() {
        let opts = NumericOptions::default();
        let s = sl2();
        let o = [0.0, 0.0];
        let e = word(&s, &[(&[0, 1, 0], 1.0)]);
        let f = word(&s, &[(&[0, 0, 1], 1.0)]);
        let hh = word(&s, &[(&[1, 0, 0], 1.0), (&[1, 0, 0], -1.0)]);
        let tol = DEFAULT_GERM_TOL;
        assert!(germ_equal_at_fixed_point(&s, &e, &e, &o, tol, &opts).unwrap());
        assert!(!germ_equal_at_fixed_point(&s, &e, &f, &o, tol, &opts).unwrap());
        assert!(
            germ_equal_at_fixed_point(&s, &hh, &FlowWord::identity(&s), &o, tol, &opts).unwrap()
        );
        assert!(matches!(
            germ_equal_at_fixed_point(&s, &e, &e, &[1.0, 0.0], tol, &opts),
            Err(Error::Precondition(_))
        ));
        let nonlin = spec(&["x"], &["x^2*dx"]);
        let id = FlowWord::identity(&nonlin);
        assert!(matches!(
            germ_equal_at_fixed_point(&nonlin, &id, &id, &[0.0], tol, &opts),
            Err(Error::Nonlinear { .. })
        ));
    }

    #[test]
    fn pushforward_examples() {
        let s = sl2();
        let r = check_pushforward_linear(&s, &[q(1), q(-2), q(1)], 0.8).unwrap();
        assert!(r.in_span, "{:?}", r.residuals);
        assert!((r.group_element.determinant() - 1.0).abs() < 1e-10);

        let gl2 = spec(&["x", "y"], &["x*dx", "y*dy", "y*dx", "x*dy"]);
        let r = check_pushforward_linear(&gl2, &[q(1), q(2), q(-1), q(3)], 0.5).unwrap();
        assert!(r.in_span);

        let cstar = spec(&["x", "y"], &["x*dx + y*dy", "-y*dx + x*dy"]);
        let r = check_pushforward_linear(&cstar, &[q(2), q(-1)], 0.9).unwrap();
        assert!(r.in_span);
        let mats = linear_generators(&cstar).unwrap();
        let g = &r.group_element.0;
        let g_inv = g.clone().try_inverse().unwrap();
        for a in &mats {
            assert!((g * a * &g_inv - a).abs().max() < 1e-12);
        }

        // A family that is not closed under conjugation: span{E} alone.
        let e_only = spec(&["x", "y"], &["y*dx", "x*dx - y*dy"]);
        let r = check_pushforward_linear(&e_only, &[q(0), q(1)], 1.0).unwrap();
        assert!(r.in_span);
        let not_alg = spec(&["x", "y"], &["y*dx", "x*dy"]);
        let r = check_pushforward_linear(&not_alg, &[q(1), q(0)], 1.0).unwrap();
        assert!(!r.in_span);
    }
}

//! Module-theoretic computations on a [`FoliationSpec`]: membership,
//! involutivity, syzygies, and the pointwise dimensions of the tangent
//! space, the fiber and the isotropy algebra.
//!
//! All answers are for the module generated over the polynomial ring
//! `ℚ[x₁..xₙ]`, which stands in for the smooth functions. For the linear
//! and monomial examples shipped with the crate the fiber dimensions agree
//! with the smooth ones; no general equality is claimed.

pub mod groebner;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::rank_rational;
use crate::poly::Poly;
use crate::vfield::{lie_bracket, FoliationSpec, VectorField};

pub use groebner::GroebnerOptions;
use groebner::{Elem, Mode};

/// An exact point of `ℚⁿ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalPoint {
    pub coords: Vec<BigRational>,
}

impl RationalPoint {
    pub fn new(coords: Vec<BigRational>) -> Self {
        RationalPoint { coords }
    }

    pub fn origin(n: usize) -> Self {
        RationalPoint {
            coords: vec![BigRational::zero(); n],
        }
    }

    pub fn from_ints(v: &[i64]) -> Self {
        RationalPoint {
            coords: v
                .iter()
                .map(|&a| BigRational::from_integer(a.into()))
                .collect(),
        }
    }

    /// The exact rational values of a floating-point point.
    pub fn from_f64(v: &[f64]) -> Option<Self> {
        v.iter()
            .map(|&a| BigRational::from_float(a))
            .collect::<Option<Vec<_>>>()
            .map(RationalPoint::new)
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

fn check_point(spec: &FoliationSpec, x: &RationalPoint) -> Result<()> {
    if x.len() != spec.nvars() {
        return Err(Error::Arity {
            expected: spec.nvars(),
            found: x.len(),
        });
    }
    Ok(())
}

/// Reduced Gröbner basis of the module generated by a spec, under
/// term-over-position grevlex. Each basis element carries its expression in
/// terms of the original generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuleGB {
    source: FoliationSpec,
    basis: Vec<Vec<Poly>>,
    repr: Vec<Vec<Poly>>,
    elems: Vec<Elem>,
    opts: GroebnerOptions,
}

impl ModuleGB {
    pub fn source(&self) -> &FoliationSpec {
        &self.source
    }

    /// Basis elements as `n`-tuples of polynomials.
    pub fn basis(&self) -> &[Vec<Poly>] {
        &self.basis
    }

    /// `repr[j]` expresses `basis[j]` as `Σ repr[j][i] · X_i`.
    pub fn representations(&self) -> &[Vec<Poly>] {
        &self.repr
    }

    pub fn order_description(&self) -> &'static str {
        "term-over-position, grevlex monomials, lower position wins ties"
    }
}

/// Result of a membership query. On success, `certificate[i]` are the
/// coefficients `fᵢ` with `Σ fᵢ Xᵢ = X`, already re-checked symbolically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Membership {
    pub member: bool,
    pub certificate: Option<Vec<Poly>>,
}

pub fn module_groebner(spec: &FoliationSpec) -> Result<ModuleGB> {
    module_groebner_with(spec, &GroebnerOptions::default())
}

fn extended_inputs(spec: &FoliationSpec) -> Vec<Elem> {
    let n = spec.nvars();
    let k = spec.num_generators();
    spec.generators()
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let mut tail = vec![Poly::zero(n); k];
            tail[i] = Poly::one(n);
            Elem::from_parts(g.components(), &tail)
        })
        .collect()
}

pub fn module_groebner_with(spec: &FoliationSpec, opts: &GroebnerOptions) -> Result<ModuleGB> {
    let n = spec.nvars();
    let k = spec.num_generators();
    let elems = groebner::groebner(extended_inputs(spec), Mode::Tracked, opts)?;
    let (basis, repr) = elems.iter().map(|e| e.to_parts(n, n, k)).unzip();
    Ok(ModuleGB {
        source: spec.clone(),
        basis,
        repr,
        elems,
        opts: *opts,
    })
}

/// `Σ coeffs[i] · X_i`.
pub fn combine(spec: &FoliationSpec, coeffs: &[Poly]) -> VectorField {
    let n = spec.nvars();
    spec.generators()
        .iter()
        .zip(coeffs)
        .fold(VectorField::zero(n), |acc, (g, f)| {
            acc.try_add(&g.scale(f)).expect("same arity")
        })
}

/// Decides whether `x` lies in the polynomial module, with a certificate.
pub fn contains(gb: &ModuleGB, x: &VectorField) -> Result<Membership> {
    let spec = &gb.source;
    let n = spec.nvars();
    let k = spec.num_generators();
    if x.nvars() != n {
        return Err(Error::Arity {
            expected: n,
            found: x.nvars(),
        });
    }
    let zero_tail = vec![Poly::zero(n); k];
    let f = Elem::from_parts(x.components(), &zero_tail);
    let r = groebner::reduce(f, &gb.elems, Mode::Tracked, &gb.opts)?;
    if groebner::has_head(&r) {
        return Ok(Membership {
            member: false,
            certificate: None,
        });
    }
    let (_, tail) = r.to_parts(n, n, k);
    let cert: Vec<Poly> = tail.iter().map(|p| -p).collect();
    if &combine(spec, &cert) != x {
        // The reduction keeps `head = Σ tail·X` as an invariant.
        unreachable!("membership certificate failed to re-verify");
    }
    Ok(Membership {
        member: true,
        certificate: Some(cert),
    })
}

/// A generator pair whose bracket leaves the module.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BracketWitness {
    pub i: usize,
    pub j: usize,
    pub bracket: VectorField,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvolutivityReport {
    pub closed: bool,
    pub witnesses: Vec<BracketWitness>,
}

pub fn is_involutive(spec: &FoliationSpec) -> Result<InvolutivityReport> {
    is_involutive_with(spec, &GroebnerOptions::default())
}

pub fn is_involutive_with(spec: &FoliationSpec, opts: &GroebnerOptions) -> Result<InvolutivityReport> {
    let gb = module_groebner_with(spec, opts)?;
    let gens = spec.generators();
    let mut witnesses = Vec::new();
    for j in 0..gens.len() {
        for i in 0..j {
            let bracket = lie_bracket(&gens[i], &gens[j])?;
            if !contains(&gb, &bracket)?.member {
                witnesses.push(BracketWitness { i, j, bracket });
            }
        }
    }
    Ok(InvolutivityReport {
        closed: witnesses.is_empty(),
        witnesses,
    })
}

/// Generators of the relation module `{σ : Σ σᵢ Xᵢ = 0}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyzygyBasis {
    source: FoliationSpec,
    relations: Vec<Vec<Poly>>,
}

impl SyzygyBasis {
    pub fn source(&self) -> &FoliationSpec {
        &self.source
    }

    pub fn relations(&self) -> &[Vec<Poly>] {
        &self.relations
    }

    /// Relations evaluated at `x`, one row per relation.
    pub fn evaluate(&self, x: &RationalPoint) -> Vec<Vec<BigRational>> {
        self.relations
            .iter()
            .map(|s| s.iter().map(|p| p.eval(&x.coords)).collect())
            .collect()
    }

    /// `k − rank{σ(x)}`, the dimension of the fiber at `x`.
    pub fn fiber_dim_at(&self, x: &RationalPoint) -> Result<usize> {
        check_point(&self.source, x)?;
        let k = self.source.num_generators();
        Ok(k - rank_rational(&self.evaluate(x)))
    }

    /// Greedy lowest-index choice of generators whose classes form a basis
    /// of the fiber at `x`.
    pub fn minimal_local_generators_at(&self, x: &RationalPoint) -> Result<Vec<usize>> {
        check_point(&self.source, x)?;
        let k = self.source.num_generators();
        let mut span = self.evaluate(x);
        let mut rank = rank_rational(&span);
        let mut chosen = Vec::new();
        for i in 0..k {
            let mut e = vec![BigRational::zero(); k];
            e[i] = BigRational::one();
            span.push(e);
            let r = rank_rational(&span);
            if r > rank {
                rank = r;
                chosen.push(i);
            } else {
                span.pop();
            }
        }
        Ok(chosen)
    }
}

pub fn syzygy_basis(spec: &FoliationSpec) -> Result<SyzygyBasis> {
    syzygy_basis_with(spec, &GroebnerOptions::default())
}

pub fn syzygy_basis_with(spec: &FoliationSpec, opts: &GroebnerOptions) -> Result<SyzygyBasis> {
    let n = spec.nvars();
    let k = spec.num_generators();
    let elems = groebner::groebner(extended_inputs(spec), Mode::Eliminate, opts)?;
    let relations = elems
        .iter()
        .filter(|e| groebner::leading_key(e, Mode::Eliminate).is_some_and(|key| key.block == groebner::TAIL))
        .map(|e| e.to_parts(n, n, k).1)
        .collect::<Vec<_>>();
    for s in &relations {
        if !combine(spec, s).is_zero() {
            unreachable!("syzygy fails to annihilate the generators");
        }
    }
    Ok(SyzygyBasis {
        source: spec.clone(),
        relations,
    })
}

pub fn fiber_dim(spec: &FoliationSpec, x: &RationalPoint) -> Result<usize> {
    check_point(spec, x)?;
    if spec.num_generators() == 0 {
        return Ok(0);
    }
    syzygy_basis(spec)?.fiber_dim_at(x)
}

pub fn tangent_dim(spec: &FoliationSpec, x: &RationalPoint) -> Result<usize> {
    check_point(spec, x)?;
    Ok(rank_rational(&spec.eval_generators(&x.coords)))
}

pub fn isotropy_dim(spec: &FoliationSpec, x: &RationalPoint) -> Result<usize> {
    Ok(fiber_dim(spec, x)? - tangent_dim(spec, x)?)
}

/// All pointwise dimensions at once, sharing one syzygy computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PointDims {
    pub fiber: usize,
    pub tangent: usize,
    pub isotropy: usize,
}

pub fn point_dims(syz: &SyzygyBasis, x: &RationalPoint) -> Result<PointDims> {
    let fiber = syz.fiber_dim_at(x)?;
    let tangent = tangent_dim(&syz.source, x)?;
    Ok(PointDims {
        fiber,
        tangent,
        isotropy: fiber - tangent,
    })
}

pub fn minimal_local_generators(spec: &FoliationSpec, x: &RationalPoint) -> Result<Vec<usize>> {
    check_point(spec, x)?;
    if spec.num_generators() == 0 {
        return Err(Error::Precondition(
            "minimal local generators need at least one generator".into(),
        ));
    }
    syzygy_basis(spec)?.minimal_local_generators_at(x)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingularLocus {
    /// Rank of the generator matrix over the fraction field.
    pub generic_rank: usize,
    /// The distinct nonzero `r × r` minors, each scaled to leading
    /// coefficient one. Their common zero set is the singular locus.
    pub minors: Vec<Poly>,
}

fn determinant(m: &[Vec<Poly>], nvars: usize) -> Poly {
    match m.len() {
        0 => Poly::one(nvars),
        1 => m[0][0].clone(),
        2 => &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0]),
        size => {
            let mut acc = Poly::zero(nvars);
            for c in 0..size {
                if m[0][c].is_zero() {
                    continue;
                }
                let sub: Vec<Vec<Poly>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|&(j, _)| j != c)
                            .map(|(_, p)| p.clone())
                            .collect()
                    })
                    .collect();
                let term = &m[0][c] * &determinant(&sub, nvars);
                acc = if c % 2 == 0 { &acc + &term } else { &acc - &term };
            }
            acc
        }
    }
}

fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, r, &mut Vec::new(), &mut out);
    out
}

fn minors_of_size(rows: &[Vec<Poly>], nvars: usize, r: usize) -> Vec<Poly> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut out = Vec::new();
    for rs in combinations(rows.len(), r) {
        for cs in combinations(ncols, r) {
            let sub: Vec<Vec<Poly>> = rs
                .iter()
                .map(|&i| cs.iter().map(|&j| rows[i][j].clone()).collect())
                .collect();
            out.push(determinant(&sub, nvars));
        }
    }
    out
}

pub fn singular_locus(spec: &FoliationSpec) -> SingularLocus {
    let n = spec.nvars();
    let rows: Vec<Vec<Poly>> = spec
        .generators()
        .iter()
        .map(|g| g.components().to_vec())
        .collect();
    let max_r = rows.len().min(n);
    for r in (1..=max_r).rev() {
        let mut minors: Vec<Poly> = Vec::new();
        for m in minors_of_size(&rows, n, r) {
            let Some((_, lc)) = m.leading_term() else {
                continue;
            };
            let m = m.scale(&(BigRational::one() / lc));
            if !minors.contains(&m) {
                minors.push(m);
            }
        }
        if !minors.is_empty() {
            return SingularLocus {
                generic_rank: r,
                minors,
            };
        }
    }
    SingularLocus {
        generic_rank: 0,
        minors: vec![Poly::one(n)],
    }
}

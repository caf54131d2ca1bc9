//! Polynomial vector fields, the Lie bracket, and finitely generated
//! families of fields.

use std::fmt;

use num_rational::BigRational;
use num_traits::Signed;

use crate::error::{Error, Result};
use crate::poly::{format_rational, Poly};

/// `Σ components[i] ∂/∂x_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VectorField {
    components: Vec<Poly>,
}

impl VectorField {
    pub fn new(components: Vec<Poly>) -> Result<Self> {
        let n = components.len();
        if let Some(bad) = components.iter().find(|p| p.nvars() != n) {
            return Err(Error::Arity {
                expected: n,
                found: bad.nvars(),
            });
        }
        Ok(VectorField { components })
    }

    pub fn zero(nvars: usize) -> Self {
        VectorField {
            components: vec![Poly::zero(nvars); nvars],
        }
    }

    /// The coordinate field `∂/∂x_i`.
    pub fn coordinate(nvars: usize, i: usize) -> Self {
        let mut v = Self::zero(nvars);
        v.components[i] = Poly::one(nvars);
        v
    }

    pub fn nvars(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Poly {
        &self.components[i]
    }

    pub fn into_components(self) -> Vec<Poly> {
        self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Poly::is_zero)
    }

    pub fn scale(&self, f: &Poly) -> VectorField {
        VectorField {
            components: self.components.iter().map(|c| f * c).collect(),
        }
    }

    pub fn scale_rational(&self, c: &BigRational) -> VectorField {
        VectorField {
            components: self.components.iter().map(|p| p.scale(c)).collect(),
        }
    }

    fn check_arity(&self, other: &VectorField) -> Result<()> {
        if self.nvars() != other.nvars() {
            return Err(Error::Arity {
                expected: self.nvars(),
                found: other.nvars(),
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &VectorField) -> Result<VectorField> {
        self.check_arity(other)?;
        Ok(VectorField {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn try_sub(&self, other: &VectorField) -> Result<VectorField> {
        self.check_arity(other)?;
        Ok(VectorField {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// The derivation `X(f) = Σ Xⁱ ∂ᵢf`.
    pub fn apply(&self, f: &Poly) -> Result<Poly> {
        if f.nvars() != self.nvars() {
            return Err(Error::Arity {
                expected: self.nvars(),
                found: f.nvars(),
            });
        }
        let mut acc = Poly::zero(self.nvars());
        for (i, xi) in self.components.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            acc = &acc + &(xi * &f.differentiate(i)?);
        }
        Ok(acc)
    }

    /// Jacobian matrix `∂Xⁱ/∂x_j` as polynomials, row `i`, column `j`.
    pub fn jacobian(&self) -> Vec<Vec<Poly>> {
        self.components
            .iter()
            .map(|c| {
                (0..self.nvars())
                    .map(|j| c.differentiate(j).expect("index in range"))
                    .collect()
            })
            .collect()
    }

    pub fn eval(&self, point: &[BigRational]) -> Vec<BigRational> {
        self.components.iter().map(|c| c.eval(point)).collect()
    }

    pub fn display<'a>(&'a self, vars: &'a [String]) -> FieldDisplay<'a> {
        FieldDisplay { field: self, vars }
    }
}

/// `[X, Y]ⁱ = Σⱼ Xʲ ∂ⱼYⁱ − Yʲ ∂ⱼXⁱ`.
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> Result<VectorField> {
    x.check_arity(y)?;
    let components = (0..x.nvars())
        .map(|i| Ok(&x.apply(&y.components[i])? - &y.apply(&x.components[i])?))
        .collect::<Result<Vec<_>>>()?;
    Ok(VectorField { components })
}

pub struct FieldDisplay<'a> {
    field: &'a VectorField,
    vars: &'a [String],
}

impl fmt::Display for FieldDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.field.components.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let d = format!("d{}", self.vars[i]);
            if c.num_terms() == 1 {
                let (m, coef) = c.leading_term().unwrap();
                let neg = coef.is_negative();
                let abs = coef.abs();
                match (first, neg) {
                    (true, true) => f.write_str("-")?,
                    (true, false) => {}
                    (false, true) => f.write_str(" - ")?,
                    (false, false) => f.write_str(" + ")?,
                }
                let mag = Poly::monomial(c.nvars(), m.clone(), abs.clone());
                if m.is_one() && num_traits::One::is_one(&abs) {
                    f.write_str(&d)?;
                } else if m.is_one() {
                    write!(f, "{}*{d}", format_rational(&abs))?;
                } else {
                    write!(f, "{}*{d}", mag.display(self.vars))?;
                }
            } else {
                if !first {
                    f.write_str(" + ")?;
                }
                write!(f, "({})*{d}", c.display(self.vars))?;
            }
            first = false;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// A finitely generated module of polynomial vector fields on `ℝⁿ`,
/// presented by an ordered list of generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FoliationSpec {
    var_names: Vec<String>,
    generators: Vec<VectorField>,
}

impl FoliationSpec {
    pub fn new(var_names: Vec<String>, generators: Vec<VectorField>) -> Result<Self> {
        if var_names.is_empty() {
            return Err(Error::Precondition(
                "a foliation needs at least one variable".into(),
            ));
        }
        for (i, a) in var_names.iter().enumerate() {
            if var_names[..i].contains(a) {
                return Err(Error::Precondition(format!("duplicate variable `{a}`")));
            }
        }
        let n = var_names.len();
        if let Some(g) = generators.iter().find(|g| g.nvars() != n) {
            return Err(Error::Arity {
                expected: n,
                found: g.nvars(),
            });
        }
        Ok(FoliationSpec {
            var_names,
            generators,
        })
    }

    /// Parses each generator with [`crate::parse::parse_vector_field`].
    pub fn parse(vars: &[&str], generators: &[&str]) -> Result<Self> {
        let names: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        let gens = generators
            .iter()
            .map(|g| crate::parse::parse_vector_field(g, &names).map_err(Error::from))
            .collect::<Result<Vec<_>>>()?;
        Self::new(names, gens)
    }

    pub fn nvars(&self) -> usize {
        self.var_names.len()
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    pub fn generators(&self) -> &[VectorField] {
        &self.generators
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    /// The generator values at `point`, one row per generator.
    pub fn eval_generators(&self, point: &[BigRational]) -> Vec<Vec<BigRational>> {
        self.generators.iter().map(|g| g.eval(point)).collect()
    }

    pub fn format_field(&self, x: &VectorField) -> String {
        x.display(&self.var_names).to_string()
    }
}

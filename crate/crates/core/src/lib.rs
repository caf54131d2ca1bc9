//! Symbolic and numeric tools for singular foliations generated by finitely
//! many polynomial vector fields.
//!
//! The symbolic layer ([`poly`], [`vfield`], [`parse`], [`modalg`]) is exact
//! over the rationals. The numeric layer ([`flow`], [`holonomy`]) integrates
//! flows of generator combinations with fixed-step RK4.

pub mod error;
pub mod expm;
pub mod flow;
pub mod folfile;
pub mod holonomy;
pub mod linalg;
pub mod modalg;
pub mod parse;
pub mod poly;
pub mod vfield;

pub use error::{Error, ParseError, Result};
pub use folfile::{load_foliation, parse_foliation, FoliationFile};
pub use modalg::{
    contains, fiber_dim, is_involutive, isotropy_dim, minimal_local_generators, module_groebner,
    singular_locus, syzygy_basis, tangent_dim, ModuleGB, RationalPoint, SyzygyBasis,
};
pub use parse::{parse_poly, parse_rational, parse_vector_field};
pub use poly::{Monomial, Poly};
pub use vfield::{lie_bracket, FoliationSpec, VectorField};
pub use flow::{
    chart_at, chart_rank_at, chart_rank_check, flow, flow_box, leaf_sample, word_compose, word_inverse,
    FlowChart, FlowStep, FlowWord, NumericOptions,
};
pub use holonomy::{
    carried_diffeo, check_pushforward_linear, germ_equal_at_fixed_point, holonomy_jet,
    jet_exact_linear, JetMatrix,
};

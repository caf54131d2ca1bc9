//! Command-line value syntax: points, grids and flow words.

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use singfol::flow::{FlowStep, FlowWord};
use singfol::{parse_rational, FoliationSpec, RationalPoint};

pub fn rational_list(text: &str, what: &str) -> Result<Vec<BigRational>, String> {
    text.split(',')
        .map(|s| parse_rational(s).ok_or_else(|| format!("invalid number `{}` in {what}", s.trim())))
        .collect()
}

/// `1,0` or `-1/2,0.25`.
pub fn point(text: &str, spec: &FoliationSpec) -> Result<RationalPoint, String> {
    let coords = rational_list(text, "point")?;
    if coords.len() != spec.nvars() {
        return Err(format!(
            "point has {} coordinates, expected {}",
            coords.len(),
            spec.nvars()
        ));
    }
    Ok(RationalPoint::new(coords))
}

pub fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn point_f64(p: &RationalPoint) -> Vec<f64> {
    p.coords.iter().map(to_f64).collect()
}

pub fn format_point(p: &RationalPoint) -> Vec<String> {
    p.coords.iter().map(singfol::poly::format_rational).collect()
}

const MAX_GRID_POINTS: usize = 1_000_000;

/// `a:b:step` applied to each of the `n` coordinates, first coordinate
/// varying slowest.
pub fn grid(text: &str, n: usize) -> Result<Vec<RationalPoint>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let [a, b, step] = parts.as_slice() else {
        return Err(format!("grid `{text}` is not of the form a:b:step"));
    };
    let parse = |s: &str| parse_rational(s).ok_or_else(|| format!("invalid grid bound `{s}`"));
    let (a, b, step) = (parse(a)?, parse(b)?, parse(step)?);
    if !step.is_positive() {
        return Err("grid step must be positive".into());
    }
    if b < a {
        return Err("grid upper bound is below the lower bound".into());
    }
    let mut axis = Vec::new();
    let mut v = a.clone();
    while v <= b {
        axis.push(v.clone());
        v += &step;
        if axis.len() > MAX_GRID_POINTS {
            return Err("grid is too large".into());
        }
    }
    let total = axis.len().checked_pow(n as u32).filter(|&t| t <= MAX_GRID_POINTS);
    let Some(total) = total else {
        return Err("grid is too large".into());
    };
    let mut out = Vec::with_capacity(total);
    for mut idx in 0..total {
        let mut coords = vec![BigRational::zero(); n];
        for c in (0..n).rev() {
            coords[c] = axis[idx % axis.len()].clone();
            idx /= axis.len();
        }
        out.push(RationalPoint::new(coords));
    }
    Ok(out)
}

/// Steps separated by `;`, each `c1,...,ck@t`. The empty string is the
/// identity word.
pub fn word(text: &str, spec: &FoliationSpec) -> Result<FlowWord, String> {
    let mut steps = Vec::new();
    for part in text.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let (coeffs, time) = part
            .split_once('@')
            .ok_or_else(|| format!("word step `{part}` lacks `@duration`"))?;
        let coeffs = rational_list(coeffs, "word coefficients")?;
        if coeffs.len() != spec.num_generators() {
            return Err(format!(
                "word step `{part}` has {} coefficients, expected {}",
                coeffs.len(),
                spec.num_generators()
            ));
        }
        let time = parse_rational(time).ok_or_else(|| format!("invalid duration `{time}`"))?;
        steps.push(FlowStep::new(coeffs, to_f64(&time)));
    }
    FlowWord::new(spec, steps).map_err(|e| e.to_string())
}

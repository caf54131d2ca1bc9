//! One handler per subcommand. Each builds the `results` object of a report
//! or returns a [`Failure`] carrying the exit code.

use rayon::prelude::*;
use serde_json::{json, Value};

use singfol::flow::{chart_rank_at, random_rational_points, ChartRankReport, Transversal};
use singfol::holonomy::{DEFAULT_GERM_TOL, PUSHFORWARD_TOL};
use singfol::poly::format_rational;
use singfol::{
    check_pushforward_linear, contains, flow, flow_box, holonomy_jet, is_involutive,
    jet_exact_linear, leaf_sample, load_foliation, minimal_local_generators, module_groebner,
    parse_rational, parse_vector_field, singular_locus, syzygy_basis, Error, FoliationSpec,
    JetMatrix, NumericOptions, RationalPoint,
};

use crate::inputs;
use crate::report::{error_code, exit, Report};
use crate::{Command, GlobalOpts};

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: error_code(&e),
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: exit::USAGE,
        message: message.into(),
    }
}

/// What a handler produced: results, plus a reason when a checked property
/// turned out false.
struct Outcome {
    results: Value,
    property_false: Option<String>,
}

impl Outcome {
    fn ok(results: Value) -> Self {
        Outcome {
            results,
            property_false: None,
        }
    }

    fn checked(results: Value, holds: bool, why: impl FnOnce() -> String) -> Self {
        Outcome {
            results,
            property_false: (!holds).then(why),
        }
    }
}

type Handled = Result<Outcome, Failure>;

pub fn run(cmd: &Command, g: &GlobalOpts) -> Report {
    let (name, inputs, seed) = describe(cmd, g);
    let mut report = Report::new(name, inputs);
    report.seed = seed;
    match dispatch(cmd, g) {
        Ok(out) => {
            report.results = out.results;
            if let Some(why) = out.property_false {
                report.property_false(why);
            }
        }
        Err(f) => report.fail(f.code, f.message),
    }
    report
}

fn describe(cmd: &Command, g: &GlobalOpts) -> (&'static str, Value, Option<u64>) {
    let mut seed = None;
    let (name, mut v) = match cmd {
        Command::Check { file } => ("check", json!({ "file": file })),
        Command::Dims { file, point, grid } => {
            ("dims", json!({ "file": file, "point": point, "grid": grid }))
        }
        Command::Member { file, field } => ("member", json!({ "file": file, "field": field })),
        Command::Syzygy { file } => ("syzygy", json!({ "file": file })),
        Command::Singular { file } => ("singular", json!({ "file": file })),
        Command::Localgens { file, point } => {
            ("localgens", json!({ "file": file, "point": point }))
        }
        Command::Leaf {
            file,
            point,
            steps,
            seed: s,
        } => {
            seed = *s;
            ("leaf", json!({ "file": file, "point": point, "steps": steps }))
        }
        Command::Flow { file, word, point } => {
            ("flow", json!({ "file": file, "word": word, "point": point }))
        }
        Command::ChartRank {
            file,
            point,
            samples,
            seed: s,
        } => {
            seed = *s;
            (
                "chart-rank",
                json!({ "file": file, "point": point, "samples": samples }),
            )
        }
        Command::Flowbox {
            file,
            gen,
            point,
            normal,
        } => (
            "flowbox",
            json!({ "file": file, "gen": gen, "point": point, "normal": normal }),
        ),
        Command::Jet { file, word, point } => {
            ("jet", json!({ "file": file, "word": word, "point": point }))
        }
        Command::JetExact { file, word } => ("jet-exact", json!({ "file": file, "word": word })),
        Command::GermEq {
            file,
            word1,
            word2,
            point,
        } => (
            "germ-eq",
            json!({ "file": file, "word1": word1, "word2": word2, "point": point }),
        ),
        Command::Pushforward { file, coeffs, time } => (
            "pushforward",
            json!({ "file": file, "coeffs": coeffs, "time": time }),
        ),
    };
    v["h"] = json!(g.step);
    v["tol"] = json!(g.tol);
    v["jobs"] = json!(g.jobs);
    (name, v, seed)
}

fn dispatch(cmd: &Command, g: &GlobalOpts) -> Handled {
    if g.jobs == 0 {
        return Err(usage("--jobs must be at least 1"));
    }
    if let Some(t) = g.tol {
        if !(t.is_finite() && t > 0.0) {
            return Err(usage("--tol must be a positive number"));
        }
    }
    match cmd {
        Command::Check { file } => check(&load(file)?),
        Command::Dims { file, point, grid } => dims(&load(file)?, point.as_deref(), grid.as_deref(), g),
        Command::Member { file, field } => member(&load(file)?, field),
        Command::Syzygy { file } => syzygy(&load(file)?),
        Command::Singular { file } => singular(&load(file)?),
        Command::Localgens { file, point } => localgens(&load(file)?, point),
        Command::Leaf {
            file,
            point,
            steps,
            seed,
        } => {
            let seed = require_seed(*seed)?;
            leaf(&load(file)?, point, *steps, seed, g)
        }
        Command::Flow { file, word, point } => flow_cmd(&load(file)?, word, point, g),
        Command::ChartRank {
            file,
            point,
            samples,
            seed,
        } => {
            let seed = require_seed(*seed)?;
            chart_rank(&load(file)?, point, *samples, seed, g)
        }
        Command::Flowbox {
            file,
            gen,
            point,
            normal,
        } => flowbox(&load(file)?, *gen, point, normal.as_deref(), g),
        Command::Jet { file, word, point } => jet(&load(file)?, word, point, g),
        Command::JetExact { file, word } => jet_exact(&load(file)?, word),
        Command::GermEq {
            file,
            word1,
            word2,
            point,
        } => germ_eq(&load(file)?, word1, word2, point, g),
        Command::Pushforward { file, coeffs, time } => pushforward(&load(file)?, coeffs, time, g),
    }
}

fn require_seed(seed: Option<u64>) -> Result<u64, Failure> {
    seed.ok_or_else(|| usage("this subcommand is randomized and requires --seed"))
}

fn load(path: &str) -> Result<FoliationSpec, Failure> {
    Ok(load_foliation(path)?.spec)
}

fn numeric(g: &GlobalOpts) -> Result<NumericOptions, Failure> {
    let mut opts = NumericOptions::default();
    if let Some(h) = g.step {
        opts.step = h;
    }
    if let Some(t) = g.tol {
        opts.rank_tol = t;
    }
    opts.validate()?;
    Ok(opts)
}

fn point_of(text: &str, spec: &FoliationSpec) -> Result<RationalPoint, Failure> {
    inputs::point(text, spec).map_err(usage)
}

fn field_json(spec: &FoliationSpec, v: &singfol::VectorField) -> Value {
    json!(spec.format_field(v))
}

fn poly_json(spec: &FoliationSpec, p: &singfol::Poly) -> Value {
    json!(p.display(spec.var_names()).to_string())
}

fn jet_json(j: &JetMatrix) -> Value {
    json!(j.rows())
}

fn check(spec: &FoliationSpec) -> Handled {
    let rep = is_involutive(spec)?;
    let witnesses: Vec<Value> = rep
        .witnesses
        .iter()
        .map(|w| json!({ "i": w.i + 1, "j": w.j + 1, "bracket": field_json(spec, &w.bracket) }))
        .collect();
    let results = json!({
        "closed": rep.closed,
        "num_generators": spec.num_generators(),
        "witnesses": witnesses,
    });
    Ok(Outcome::checked(results, rep.closed, || {
        let w = &rep.witnesses[0];
        format!(
            "bracket of generators {} and {} is {}, outside the module",
            w.i + 1,
            w.j + 1,
            spec.format_field(&w.bracket)
        )
    }))
}

fn dims_json(p: &RationalPoint, d: &singfol::modalg::PointDims) -> Value {
    json!({
        "point": inputs::format_point(p),
        "fiber": d.fiber,
        "tangent": d.tangent,
        "isotropy": d.isotropy,
    })
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool, Failure> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| usage(format!("cannot start {jobs} worker threads: {e}")))
}

fn dims(spec: &FoliationSpec, point: Option<&str>, grid: Option<&str>, g: &GlobalOpts) -> Handled {
    let syz = syzygy_basis(spec)?;
    match (point, grid) {
        (Some(p), None) => {
            let p = point_of(p, spec)?;
            let d = singfol::modalg::point_dims(&syz, &p)?;
            Ok(Outcome::ok(dims_json(&p, &d)))
        }
        (None, Some(text)) => {
            let points = inputs::grid(text, spec.nvars()).map_err(usage)?;
            let dims = thread_pool(g.jobs)?.install(|| {
                points
                    .par_iter()
                    .map(|p| singfol::modalg::point_dims(&syz, p))
                    .collect::<Result<Vec<_>, _>>()
            })?;
            let rows: Vec<Value> = points.iter().zip(&dims).map(|(p, d)| dims_json(p, d)).collect();
            let max_fiber = dims.iter().map(|d| d.fiber).max();
            let min_tangent = dims.iter().map(|d| d.tangent).min();
            Ok(Outcome::ok(json!({
                "count": rows.len(),
                "max_fiber": max_fiber,
                "min_tangent": min_tangent,
                "points": rows,
            })))
        }
        _ => Err(usage("dims needs exactly one of --point or --grid")),
    }
}

fn member(spec: &FoliationSpec, field: &str) -> Handled {
    let x = parse_vector_field(field, spec.var_names()).map_err(Error::from)?;
    let gb = module_groebner(spec)?;
    let m = contains(&gb, &x)?;
    let certificate = m
        .certificate
        .as_ref()
        .map(|c| c.iter().map(|p| poly_json(spec, p)).collect::<Vec<_>>());
    Ok(Outcome::ok(json!({
        "field": field_json(spec, &x),
        "member": m.member,
        "certificate": certificate,
    })))
}

fn syzygy(spec: &FoliationSpec) -> Handled {
    let syz = syzygy_basis(spec)?;
    let relations: Vec<Vec<Value>> = syz
        .relations()
        .iter()
        .map(|r| r.iter().map(|p| poly_json(spec, p)).collect())
        .collect();
    Ok(Outcome::ok(json!({
        "count": relations.len(),
        "relations": relations,
    })))
}

fn singular(spec: &FoliationSpec) -> Handled {
    let sl = singular_locus(spec);
    let minors: Vec<Value> = sl.minors.iter().map(|p| poly_json(spec, p)).collect();
    Ok(Outcome::ok(json!({
        "generic_rank": sl.generic_rank,
        "minors": minors,
    })))
}

fn localgens(spec: &FoliationSpec, point: &str) -> Handled {
    let p = point_of(point, spec)?;
    let idx = minimal_local_generators(spec, &p)?;
    let gens: Vec<Value> = idx
        .iter()
        .map(|&i| json!({ "index": i + 1, "field": field_json(spec, &spec.generators()[i]) }))
        .collect();
    Ok(Outcome::ok(json!({
        "point": inputs::format_point(&p),
        "count": gens.len(),
        "generators": gens,
    })))
}

fn leaf(spec: &FoliationSpec, point: &str, steps: usize, seed: u64, g: &GlobalOpts) -> Handled {
    let opts = numeric(g)?;
    let p = point_of(point, spec)?;
    let path = leaf_sample(spec, &inputs::point_f64(&p), steps, seed, &opts)?;
    Ok(Outcome::ok(json!({
        "step_size": opts.step,
        "points": path,
    })))
}

fn word_of(text: &str, spec: &FoliationSpec) -> Result<singfol::FlowWord, Failure> {
    inputs::word(text, spec).map_err(usage)
}

fn flow_cmd(spec: &FoliationSpec, word: &str, point: &str, g: &GlobalOpts) -> Handled {
    let opts = numeric(g)?;
    let w = word_of(word, spec)?;
    let p = point_of(point, spec)?;
    let end = flow(spec, &w, &inputs::point_f64(&p), &opts)?;
    Ok(Outcome::ok(json!({
        "step_size": opts.step,
        "point": end,
    })))
}

fn chart_rank(spec: &FoliationSpec, point: &str, samples: usize, seed: u64, g: &GlobalOpts) -> Handled {
    let opts = numeric(g)?;
    let base = point_of(point, spec)?;
    let chart = singfol::chart_at(spec, &inputs::point_f64(&base), &opts)?;
    let mut points = vec![base];
    points.extend(random_rational_points(spec.nvars(), samples, seed));
    let ranks = thread_pool(g.jobs)?.install(|| {
        points
            .par_iter()
            .map(|p| chart_rank_at(&chart, p))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let rep = ChartRankReport::from_samples(ranks);
    let rows: Vec<Value> = rep
        .samples
        .iter()
        .map(|s| {
            json!({
                "point": inputs::format_point(&s.point),
                "numeric_rank": s.numeric_rank,
                "tangent_dim": s.tangent_dim,
                "agree": s.numeric_rank == s.tangent_dim,
            })
        })
        .collect();
    let results = json!({
        "step_size": opts.step,
        "rank_tolerance": opts.rank_tol,
        "fd_epsilon": opts.fd_epsilon,
        "mismatches": rep.mismatches.len(),
        "samples": rows,
    });
    Ok(Outcome::checked(results, rep.ok(), || {
        let first = &rep.samples[rep.mismatches[0]];
        format!(
            "numerical rank {} differs from tangent dimension {} at ({})",
            first.numeric_rank,
            first.tangent_dim,
            inputs::format_point(&first.point).join(", ")
        )
    }))
}

fn flowbox(
    spec: &FoliationSpec,
    gen: usize,
    point: &str,
    normal: Option<&str>,
    g: &GlobalOpts,
) -> Handled {
    let opts = numeric(g)?;
    if gen == 0 || gen > spec.num_generators() {
        return Err(usage(format!(
            "--gen must be between 1 and {}",
            spec.num_generators()
        )));
    }
    let p = point_of(point, spec)?;
    let x0 = inputs::point_f64(&p);
    let transversal = normal
        .map(|text| -> Result<Transversal, Failure> {
            let n = inputs::rational_list(text, "normal").map_err(usage)?;
            if n.len() != spec.nvars() {
                return Err(usage(format!(
                    "normal has {} coordinates, expected {}",
                    n.len(),
                    spec.nvars()
                )));
            }
            Ok(Transversal::through(&x0, n.iter().map(inputs::to_f64).collect()))
        })
        .transpose()?;
    let rep = flow_box(spec, gen - 1, &x0, transversal.as_ref(), &opts)?;
    let results = json!({
        "generator": gen,
        "step_size": opts.step,
        "rank_tolerance": opts.rank_tol,
        "jacobian": rep.jacobian,
        "invertible": rep.invertible,
    });
    Ok(Outcome::checked(results, rep.invertible, || {
        "flow-box Jacobian is singular".to_string()
    }))
}

fn jet(spec: &FoliationSpec, word: &str, point: &str, g: &GlobalOpts) -> Handled {
    let opts = numeric(g)?;
    let w = word_of(word, spec)?;
    let p = point_of(point, spec)?;
    let j = holonomy_jet(spec, &w, &inputs::point_f64(&p), &opts)?;
    Ok(Outcome::ok(json!({
        "step_size": opts.step,
        "jet": jet_json(&j),
        "determinant": j.determinant(),
    })))
}

fn jet_exact(spec: &FoliationSpec, word: &str) -> Handled {
    let w = word_of(word, spec)?;
    let j = jet_exact_linear(spec, &w)?;
    Ok(Outcome::ok(json!({
        "jet": jet_json(&j),
        "determinant": j.determinant(),
    })))
}

fn germ_eq(spec: &FoliationSpec, word1: &str, word2: &str, point: &str, g: &GlobalOpts) -> Handled {
    let mut opts = numeric(g)?;
    opts.rank_tol = NumericOptions::default().rank_tol;
    let tol = g.tol.unwrap_or(DEFAULT_GERM_TOL);
    let w1 = word_of(word1, spec)?;
    let w2 = word_of(word2, spec)?;
    let p = point_of(point, spec)?;
    let x = inputs::point_f64(&p);
    let equal = singfol::germ_equal_at_fixed_point(spec, &w1, &w2, &x, tol, &opts)?;
    let j1 = holonomy_jet(spec, &w1, &x, &opts)?;
    let j2 = holonomy_jet(spec, &w2, &x, &opts)?;
    Ok(Outcome::ok(json!({
        "equal": equal,
        "distance": j1.max_abs_diff(&j2),
        "tolerance": tol,
        "step_size": opts.step,
        "jet1": jet_json(&j1),
        "jet2": jet_json(&j2),
    })))
}

fn pushforward(spec: &FoliationSpec, coeffs: &str, time: &str, g: &GlobalOpts) -> Handled {
    let c = inputs::rational_list(coeffs, "coefficients").map_err(usage)?;
    if c.len() != spec.num_generators() {
        return Err(usage(format!(
            "{} coefficients given, expected {}",
            c.len(),
            spec.num_generators()
        )));
    }
    let t = parse_rational(time).ok_or_else(|| usage(format!("invalid time `{time}`")))?;
    let tol = g.tol.unwrap_or(PUSHFORWARD_TOL);
    let rep = check_pushforward_linear(spec, &c, inputs::to_f64(&t))?;
    let in_span = rep.max_residual < tol;
    let results = json!({
        "coeffs": c.iter().map(format_rational).collect::<Vec<_>>(),
        "time": format_rational(&t),
        "group_element": jet_json(&rep.group_element),
        "residuals": rep.residuals,
        "max_residual": rep.max_residual,
        "tolerance": tol,
        "in_span": in_span,
    });
    Ok(Outcome::checked(results, in_span, || {
        format!(
            "conjugated generators leave the span (max residual {:e})",
            rep.max_residual
        )
    }))
}

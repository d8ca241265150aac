use std::path::Path;
use std::time::Instant;

use jointsparse::linalg::io::format_real;
use jointsparse::serde_ext::ext_real;
use jointsparse::{
    check_equivalence, eig_summary, examples, gen_problem, irls_solve, l20_solve, norm_20, nsc_curve,
    nsc_upper_bound, nullspace_solve, theta, DescentOptions, EquivalenceOptions, EquivalenceReport,
    GenSpec, IrlsOptions, L20Options, Mat, MatrixKind, MmvProblem, NscEstimate, NscOptions,
    SparseSolution,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::input::{load_matrix, load_problem, load_spec, parse_grid};
use crate::report::{csv_table, real, short_digest, Digest, Failure, Run};
use crate::{Example, GenArgs, Global, Kind, SolveMethod};

fn to_value(v: &impl Serialize) -> Value {
    serde_json::to_value(v).expect("output serialises")
}

fn check_p_arg(p: f64) -> Result<f64, Failure> {
    if p > 0.0 && p <= 1.0 {
        Ok(p)
    } else {
        Err(Failure::usage(format!("--p {p} outside (0, 1]")))
    }
}

fn l20_opts(g: &Global) -> L20Options {
    L20Options {
        zero_tol: g.tol,
        ..L20Options::default()
    }
}

fn irls_opts(g: &Global) -> IrlsOptions {
    IrlsOptions {
        zero_tol: g.tol,
        ..IrlsOptions::default()
    }
}

fn descent_opts(g: &Global, restarts: usize) -> DescentOptions {
    DescentOptions {
        restarts,
        zero_tol: g.tol,
        ..DescentOptions::new(g.seed)
    }
}

fn matrix_csv(x: &Mat) -> String {
    let header: Vec<String> = (1..=x.cols()).map(|j| format!("c{j}")).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = (0..x.rows())
        .map(|i| x.row(i).iter().map(|&v| real(v)).collect())
        .collect();
    csv_table(&header, &rows)
}

pub fn pstar(g: &Global, path: &Path) -> Result<Run, Failure> {
    let started = Instant::now();
    let (prob, bytes) = load_problem(path)?;
    let mut digest = Digest::new("pstar");
    digest.bytes("problem", &bytes).param("tol", g.tol);
    let rep = jointsparse::pstar(&prob.a, &prob.b, g.tol)?;
    let mut row = vec![
        real(rep.lambda),
        rep.s_star.to_string(),
        rep.k_bound_m.to_string(),
        rep.k_bound_n.to_string(),
    ];
    row.extend(rep.f_values.iter().map(|&v| real(v)));
    row.extend([real(rep.p_star), rep.clamped.to_string()]);
    let csv = csv_table(
        &["lambda", "s_star", "k_bound_m", "k_bound_n", "f_s_star", "f_k_bound_m", "f_k_bound_n", "p_star", "clamped"],
        &[row],
    );
    Ok(Run::new("pstar", digest, to_value(&rep), started, None).with_csv(csv))
}

pub fn solve(
    g: &Global,
    path: &Path,
    method: SolveMethod,
    p: Option<f64>,
    k_max: Option<usize>,
    restarts: usize,
) -> Result<Run, Failure> {
    let started = Instant::now();
    let (prob, bytes) = load_problem(path)?;
    let mut digest = Digest::new("solve");
    digest
        .bytes("problem", &bytes)
        .param("method", format!("{method:?}"))
        .param("p", p)
        .param("k_max", k_max)
        .param("restarts", restarts)
        .param("tol", g.tol)
        .param("seed", g.seed);
    let need_p = || p.ok_or_else(|| Failure::usage("--p is required for irls and nullspace")).and_then(check_p_arg);
    let (sol, seed) = match method {
        SolveMethod::L20 => {
            let k_max = k_max.or(prob.k).unwrap_or(prob.a.cols());
            (l20_solve(&prob, k_max, &l20_opts(g))?, None)
        }
        SolveMethod::Irls => (irls_solve(&prob, need_p()?, &irls_opts(g))?, None),
        SolveMethod::Nullspace => (
            nullspace_solve(&prob, need_p()?, &descent_opts(g, restarts))?,
            Some(g.seed),
        ),
    };
    let csv = matrix_csv(&sol.x);
    Ok(Run::new("solve", digest, to_value(&sol), started, seed).with_csv(csv))
}

#[derive(Serialize)]
struct SweepRow {
    p: f64,
    equivalent: Option<bool>,
    l2p_objective: Option<f64>,
    l20_objective: Option<f64>,
    distance: Option<f64>,
    l2p_method: Option<String>,
    error: Option<String>,
    report: Option<EquivalenceReport>,
}

pub fn sweep(
    g: &Global,
    path: &Path,
    grid: &str,
    k_max: Option<usize>,
    restarts: usize,
    match_tol: f64,
) -> Result<Run, Failure> {
    let started = Instant::now();
    let grid = parse_grid(grid, false)?;
    let (prob, bytes) = load_problem(path)?;
    let mut digest = Digest::new("sweep");
    digest
        .bytes("problem", &bytes)
        .param("grid", &grid)
        .param("k_max", k_max)
        .param("restarts", restarts)
        .param("match_tol", match_tol)
        .param("tol", g.tol)
        .param("seed", g.seed);
    let opts = EquivalenceOptions {
        l20: l20_opts(g),
        irls: irls_opts(g),
        descent: descent_opts(g, restarts),
        k_max,
        match_tol,
    };
    let rows: Vec<SweepRow> = grid
        .iter()
        .map(|&p| match check_equivalence(&prob, p, &opts) {
            Ok(rep) => SweepRow {
                p,
                equivalent: Some(rep.equivalent),
                l2p_objective: Some(rep.l2p_objective),
                l20_objective: Some(rep.l20_objective),
                distance: Some(rep.distance),
                l2p_method: Some(rep.l2p_method.as_str().to_string()),
                error: None,
                report: Some(rep),
            },
            Err(e) => SweepRow {
                p,
                equivalent: None,
                l2p_objective: None,
                l20_objective: None,
                distance: None,
                l2p_method: None,
                error: Some(e.name().to_string()),
                report: None,
            },
        })
        .collect();

    let opt = |v: Option<f64>| v.map(real).unwrap_or_default();
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                real(r.p),
                r.equivalent.map(|b| b.to_string()).unwrap_or_default(),
                opt(r.l2p_objective),
                opt(r.l20_objective),
                opt(r.distance),
                r.l2p_method.clone().unwrap_or_default(),
                r.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    let csv = csv_table(
        &["p", "equivalent", "l2p_objective", "l20_objective", "distance", "l2p_method", "error"],
        &table,
    );
    let outputs = json!({ "grid": grid, "rows": rows });
    Ok(Run::new("sweep", digest, outputs, started, Some(g.seed)).with_csv(csv))
}

#[derive(Serialize)]
struct NscRow {
    p: f64,
    #[serde(with = "ext_real")]
    value: f64,
    exact: bool,
    certificate_digest: String,
    /// The spectral bound, defined for `p > 0` and `n > k + 2`.
    upper_bound: Option<f64>,
    /// The value recomputed from the certificate matches, the certificate
    /// lies in the null space and has unit norm.
    verified: bool,
}

/// Recomputes an estimate from its certificate.
pub fn certificate_holds(a: &Mat, e: &NscEstimate) -> bool {
    let x = &e.certificate_x;
    let in_kernel = a.matmul(x).frobenius() <= 1e-8 * a.frobenius().max(1.0);
    let unit = (x.frobenius() - 1.0).abs() <= 1e-10;
    let small = e.certificate_s.len() <= e.k;
    let value = match theta(e.p, x, &e.certificate_s) {
        Ok(v) if v.is_infinite() || e.value.is_infinite() => v == e.value,
        Ok(v) => (v - e.value).abs() <= 1e-9 * v.abs().max(1.0),
        Err(_) => false,
    };
    in_kernel && unit && small && value
}

pub fn nsc(
    g: &Global,
    path: &Path,
    k: Option<usize>,
    r: usize,
    grid: &str,
    restarts: usize,
) -> Result<Run, Failure> {
    let started = Instant::now();
    let grid = parse_grid(grid, true)?;
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Failure::usage("grid must be nondecreasing"));
    }
    let (a, problem_k, bytes) = load_matrix(path)?;
    let k = k
        .or(problem_k)
        .ok_or_else(|| Failure::usage("--k is required when the input has no k"))?;
    let mut digest = Digest::new("nsc");
    digest
        .bytes("input", &bytes)
        .param("k", k)
        .param("r", r)
        .param("grid", &grid)
        .param("restarts", restarts)
        .param("tol", g.tol)
        .param("seed", g.seed);
    let opts = NscOptions {
        restarts,
        zero_tol: g.tol,
        ..NscOptions::new(g.seed)
    };
    let curve = nsc_curve(&a, r, k, &grid, &opts)?;
    let lambda = eig_summary(&a, None)?.ratio;
    let n = a.cols();
    let rows: Vec<NscRow> = curve
        .iter()
        .map(|e| NscRow {
            p: e.p,
            value: e.value,
            exact: e.exact,
            certificate_digest: short_digest(e),
            upper_bound: nsc_upper_bound(e.p, n, k, lambda).ok(),
            verified: certificate_holds(&a, e),
        })
        .collect();
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                real(r.p),
                real(r.value),
                r.exact.to_string(),
                r.certificate_digest.clone(),
                r.upper_bound.map(real).unwrap_or_default(),
                r.verified.to_string(),
            ]
        })
        .collect();
    let csv = csv_table(
        &["p", "value", "exact", "certificate_digest", "upper_bound", "verified"],
        &table,
    );
    let outputs = json!({
        "k": k,
        "r": r,
        "n": n,
        "lambda": lambda,
        "rows": rows,
        "certificates": curve,
    });
    Ok(Run::new("nsc", digest, outputs, started, Some(g.seed)).with_csv(csv))
}

/// One recorded value compared with its recomputation.
#[derive(Serialize)]
struct Check {
    name: String,
    expected: Value,
    actual: Value,
    tolerance: f64,
    ok: bool,
}

impl Check {
    fn real(name: &str, expected: f64, actual: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            expected: json!(expected),
            actual: json!(actual),
            tolerance,
            ok: (expected - actual).abs() <= tolerance,
        }
    }

    fn exact(name: &str, expected: Value, actual: Value) -> Self {
        Check {
            name: name.into(),
            ok: expected == actual,
            expected,
            actual,
            tolerance: 0.0,
        }
    }
}

pub const EXAMPLE2_PSTAR: f64 = 0.8176;
pub const EXAMPLE2_GRID: [f64; 3] = [0.3, 0.5, 0.8175];

pub fn reproduce(g: &Global, example: Example) -> Result<Run, Failure> {
    let started = Instant::now();
    let (name, text) = match example {
        Example::Example1 => ("example1", examples::EXAMPLE1_JSON),
        Example::Example2 => ("example2", examples::EXAMPLE2_JSON),
    };
    let mut digest = Digest::new("reproduce");
    digest.bytes(name, text.as_bytes()).param("tol", g.tol).param("seed", g.seed);
    let prob = MmvProblem::from_json(text)?;
    let (mut outputs, checks, seed) = match example {
        Example::Example1 => reproduce_example1(g, &prob)?,
        Example::Example2 => reproduce_example2(g, &prob)?,
    };
    let failed: Vec<&Check> = checks.iter().filter(|c| !c.ok).collect();
    let failure = (!failed.is_empty()).then(|| {
        Failure::mismatch(
            format!("{} of {} recorded values differ", failed.len(), checks.len()),
            to_value(&failed),
        )
    });
    outputs["example"] = json!(name);
    outputs["checks"] = to_value(&checks);
    let table: Vec<Vec<String>> = checks
        .iter()
        .map(|c| {
            vec![
                c.name.clone(),
                c.expected.to_string(),
                c.actual.to_string(),
                format_real(c.tolerance),
                c.ok.to_string(),
            ]
        })
        .collect();
    let csv = csv_table(&["check", "expected", "actual", "tolerance", "ok"], &table);
    let mut run = Run::new("reproduce", digest, outputs, started, seed).with_csv(csv);
    run.failure = failure;
    Ok(run)
}

/// Each column of `B` solved on its own versus the joint solve.
fn reproduce_example1(g: &Global, prob: &MmvProblem) -> Result<(Value, Vec<Check>, Option<u64>), Failure> {
    let (_, n, r) = prob.dims();
    let opts = l20_opts(g);
    let columns: Vec<SparseSolution> = (0..r)
        .map(|j| {
            let single = MmvProblem::new(prob.a.clone(), Mat::column(&prob.b.col(j)), None, None)?;
            l20_solve(&single, n, &opts)
        })
        .collect::<Result<_, _>>()?;
    let column_wise = Mat::from_fn(n, r, |i, j| columns[j].x[(i, 0)]);
    let column_wise_objective = norm_20(&column_wise, g.tol);
    let joint = l20_solve(prob, n, &opts)?;
    let checks = vec![
        Check::real("joint_objective", 3.0, joint.objective, 0.0),
        Check::real("column_wise_objective", 4.0, column_wise_objective as f64, 0.0),
    ];
    let outputs = json!({
        "joint": joint,
        "columns": columns,
        "column_wise_X": column_wise,
        "column_wise_objective": column_wise_objective,
    });
    Ok((outputs, checks, None))
}

fn reproduce_example2(g: &Global, prob: &MmvProblem) -> Result<(Value, Vec<Check>, Option<u64>), Failure> {
    let x_star = prob.planted.clone().expect("example2 ships its planted solution");
    // the descent must find the minimiser without being handed it
    let blind = MmvProblem {
        planted: None,
        ..prob.clone()
    };
    let pstar = jointsparse::pstar(&prob.a, &prob.b, g.tol)?;
    let l20 = l20_solve(prob, prob.a.cols(), &l20_opts(g))?;
    let mut checks = vec![
        Check::real("p_star", EXAMPLE2_PSTAR, pstar.p_star, 5e-4),
        Check::exact("l20_support", json!([2, 5]), json!(l20.support.one_based())),
        Check::exact("l20_unique", json!(true), json!(l20.unique)),
    ];
    let opts = EquivalenceOptions {
        l20: l20_opts(g),
        irls: irls_opts(g),
        descent: descent_opts(g, DescentOptions::new(0).restarts),
        k_max: None,
        match_tol: 1e-4,
    };
    let mut sweep = Vec::new();
    for p in EXAMPLE2_GRID {
        let rep = check_equivalence(&blind, p, &opts)?;
        let distance = rep
            .nullspace
            .solution()
            .map_or(f64::INFINITY, |s| s.x.sub(&x_star).frobenius());
        checks.push(Check::real(&format!("nullspace_distance_p{p}"), 0.0, distance, 1e-4));
        checks.push(Check::exact(&format!("equivalent_p{p}"), json!(true), json!(rep.equivalent)));
        sweep.push(rep);
    }
    let outputs = json!({ "pstar": pstar, "l20": l20, "sweep": sweep });
    Ok((outputs, checks, Some(g.seed)))
}

pub fn gen(g: &Global, args: &GenArgs) -> Result<Run, Failure> {
    let started = Instant::now();
    let spec = match &args.spec {
        Some(text) => load_spec(text)?.0,
        None => GenSpec {
            kind: match args.kind {
                Kind::Gaussian => MatrixKind::Gaussian,
                Kind::Vandermonde => MatrixKind::Vandermonde,
            },
            m: args.m,
            n: args.n,
            r: args.r,
            k: args.k,
            nodes: args
                .nodes
                .as_deref()
                .map(|s| {
                    s.split(',')
                        .map(|v| v.trim().parse::<f64>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|e| Failure::usage(format!("--nodes: {e}")))
                })
                .transpose()?,
            seed: g.seed,
            amplitude: args.amplitude,
        },
    };
    let mut digest = Digest::new("gen");
    digest.param("spec", &spec);
    let problem = gen_problem(&spec)?;
    let outputs = json!({ "spec": spec, "problem": problem });
    Ok(Run::new("gen", digest, outputs, started, Some(spec.seed)))
}

//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always reach the terminal.
//! The process fails when a criterion outside `EXPECTED_RED` fails.

use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use jointsparse::{
    examples, f_threshold, gen_problem, holder_check, irls_solve, l20_solve, nsc_curve,
    nsc_estimate, nsc_upper_bound, nullspace_basis, nullspace_solve, pstar, theta, DescentOptions, GenSpec,
    IrlsOptions, L20Options, Mat, MatrixKind, MmvProblem, NscOptions, PortableRng, RowSupport,
};
use serde_json::Value;

/// Criteria known not to hold; they are still run and reported.
///
/// AC5: IRLS and the null space descent are both local methods for a
/// nonconvex objective. On a few percent of random instances one of them
/// stops in a local minimum, so objective agreement on every case fails.
const EXPECTED_RED: &[&str] = &["AC5"];

const CASES: u64 = 10_000;

struct Outcome {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(id: &'static str, pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        id,
        pass,
        detail: detail.into(),
    }
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_jointsparse"))
}

fn run(args: &[&str]) -> (Output, Duration) {
    let t = Instant::now();
    let out = bin().args(args).output().expect("binary runs");
    (out, t.elapsed())
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn data(name: &str) -> String {
    format!("{}/../core/data/{name}.json", env!("CARGO_MANIFEST_DIR"))
}

fn ac1() -> Outcome {
    let (out, took) = run(&["reproduce", "example2"]);
    let rep = report(&out);
    let p_star = rep["outputs"]["pstar"]["p_star"].as_f64().unwrap_or(f64::NAN);
    let pass = out.status.success() && (p_star - 0.8176).abs() <= 5e-4 && took < Duration::from_secs(1);
    outcome("AC1", pass, format!("p* = {p_star:.6} (target 0.8176 +/- 5e-4), {took:.2?}"))
}

fn ac2() -> Outcome {
    let t = Instant::now();
    let mut prob = examples::example2();
    let x_star = prob.planted.take().expect("planted solution");
    let l20 = l20_solve(&prob, 5, &L20Options::default()).expect("l20 solves");
    let mut ok = l20.support.one_based() == [2, 5] && l20.unique == Some(true);
    let mut worst = 0.0f64;
    for p in [0.3, 0.5, 0.8175] {
        let sol = nullspace_solve(&prob, p, &DescentOptions::new(0)).expect("descent solves");
        worst = worst.max(sol.x.sub(&x_star).frobenius());
    }
    ok &= worst <= 1e-4;
    let took = t.elapsed();
    outcome(
        "AC2",
        ok && took < Duration::from_secs(5),
        format!("support {:?}, unique {:?}, max distance {worst:.2e}, {took:.2?}", l20.support.one_based(), l20.unique),
    )
}

fn ac3() -> Outcome {
    let (out, _) = run(&["reproduce", "example1"]);
    let rep = report(&out);
    let joint = rep["outputs"]["joint"]["objective"].as_f64();
    let column_wise = rep["outputs"]["column_wise_objective"].as_f64();
    let pass = out.status.success() && joint == Some(3.0) && column_wise == Some(4.0);
    outcome("AC3", pass, format!("joint {joint:?}, column-wise {column_wise:?}"))
}

/// `h` for a single null vector: the `k` largest `|x_i|^p` against the rest.
fn closed_form(x: &[f64], k: usize, p: f64) -> f64 {
    let mut terms: Vec<f64> = x
        .iter()
        .map(|v| if p == 0.0 { f64::from(u8::from(v.abs() > 1e-8)) } else { v.abs().powf(p) })
        .collect();
    terms.sort_by(|a, b| b.total_cmp(a));
    let num: f64 = terms[..k].iter().sum();
    let den: f64 = terms[k..].iter().sum();
    num / den
}

fn ac4() -> Outcome {
    let a = examples::example2().a;
    let opts = NscOptions::new(0);
    let at_zero = nsc_estimate(&a, 1, 2, 0.0, &opts).expect("estimate");
    let mut ok = at_zero.value == 2.0 / 3.0 && at_zero.exact;

    let grid: Vec<f64> = (0..=20).map(|i| f64::from(i) / 20.0).collect();
    let curves: Vec<Vec<f64>> = [1, 2, 5]
        .iter()
        .map(|&r| nsc_curve(&a, r, 2, &grid, &opts).expect("curve").iter().map(|e| e.value).collect())
        .collect();
    let nondecreasing = curves[0].windows(2).all(|w| w[0] <= w[1]);
    let r_spread = curves[1..]
        .iter()
        .flat_map(|c| c.iter().zip(&curves[0]).map(|(u, v)| (u - v).abs()))
        .fold(0.0f64, f64::max);

    // the generator as printed, to four decimals; only magnitudes enter
    let printed = [0.3218, -0.0332, 0.9291, -0.1753, -0.0371];
    let kernel = nullspace_basis(&a, None).expect("basis").vector(0);
    let mut printed_gap = 0.0f64;
    let mut kernel_gap = 0.0f64;
    for (&p, &v) in grid.iter().zip(&curves[0]) {
        printed_gap = printed_gap.max((v - closed_form(&printed, 2, p)).abs());
        kernel_gap = kernel_gap.max((v - closed_form(&kernel, 2, p)).abs() / v);
    }
    ok &= nondecreasing && r_spread <= 1e-12 && printed_gap <= 5e-3 && kernel_gap <= 1e-12;
    outcome(
        "AC4",
        ok,
        format!(
            "h(0) = {}, nondecreasing {nondecreasing}, r spread {r_spread:.1e}, \
             vs printed vector {printed_gap:.1e}, vs computed kernel {kernel_gap:.1e}",
            at_zero.value
        ),
    )
}

fn random_mat(rng: &mut PortableRng, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |_, _| rng.normal())
}

/// Random `X` up to 12×4 with some rows zeroed.
fn random_x(rng: &mut PortableRng) -> Mat {
    let n = 2 + rng.below(11);
    let r = 1 + rng.below(4);
    let mut x = random_mat(rng, n, r);
    for i in 0..n {
        if rng.below(4) == 0 {
            x.row_mut(i).fill(0.0);
        }
    }
    if x.is_zero() {
        x[(0, 0)] = 1.0;
    }
    x
}

fn top_rows(x: &Mat, k: usize) -> RowSupport {
    let norms = x.row_norms();
    let mut order: Vec<usize> = (0..norms.len()).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));
    order.truncate(k);
    RowSupport::new(order, x.rows(), 1e-8).expect("support")
}

fn theta_scale_invariance(seed: u64) -> bool {
    let mut rng = PortableRng::new(seed);
    let x = random_x(&mut rng);
    let k = 1 + rng.below(x.rows() - 1);
    let s = top_rows(&x, k);
    let p = rng.uniform();
    let c = 2f64.powi(rng.below(41) as i32 - 20) * if rng.below(2) == 0 { 1.0 } else { -1.0 };
    theta(p, &x, &s).unwrap() == theta(p, &x.scale(c), &s).unwrap()
}

fn theta_monotone(seed: u64) -> bool {
    let mut rng = PortableRng::new(seed);
    let x = random_x(&mut rng);
    let k = 1 + rng.below(x.rows() - 1);
    let s = top_rows(&x, k);
    let (p1, p2) = {
        let (a, b) = (rng.uniform(), rng.uniform());
        (a.min(b), a.max(b))
    };
    theta(p1, &x, &s).unwrap() <= theta(p2, &x, &s).unwrap() * (1.0 + 1e-12)
}

fn holder(seed: u64) -> bool {
    let mut rng = PortableRng::new(seed);
    let x = random_x(&mut rng);
    let grid: Vec<f64> = (0..5).map(|_| rng.uniform()).collect();
    holder_check(&x, &grid).unwrap()
}

/// Solves the normal equations by Gauss-Jordan elimination with partial
/// pivoting; `None` when a pivot vanishes.
fn normal_solve(a: &Mat, b: &Mat) -> Option<Mat> {
    let g = a.transpose().matmul(a);
    let rhs = a.transpose().matmul(b);
    let (n, r) = (g.rows(), rhs.cols());
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| g.row(i).iter().chain(rhs.row(i)).copied().collect())
        .collect();
    let scale = g.max_abs().max(f64::MIN_POSITIVE);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() <= 1e-12 * scale {
            return None;
        }
        m.swap(col, piv);
        for i in 0..n {
            if i != col {
                let f = m[i][col] / m[col][col];
                let pivot_row = m[col].clone();
                for (v, pv) in m[i].iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
    }
    Some(Mat::from_fn(n, r, |i, j| m[i][n + j] / m[i][i]))
}

fn feasible_on(prob: &MmvProblem, cols: &[usize]) -> bool {
    let sub = prob.a.select_cols(cols);
    match normal_solve(&sub, &prob.b) {
        Some(y) => sub.matmul(&y).sub(&prob.b).frobenius() <= 1e-8 * prob.b.frobenius().max(1.0),
        None => false,
    }
}

fn l20_optimal(seed: u64) -> bool {
    let mut rng = PortableRng::new(seed);
    let m = 2 + rng.below(7);
    let n = m + 1 + rng.below(10 - m);
    let r = 1 + rng.below(4);
    let k = 1 + rng.below(m / 2);
    let spec = GenSpec {
        kind: MatrixKind::Gaussian,
        m,
        n,
        r,
        k,
        nodes: None,
        seed,
        amplitude: 1.0,
    };
    let prob = gen_problem(&spec).expect("generator");
    let sol = l20_solve(&prob, n, &L20Options::default()).expect("l20 solves");
    let size = sol.support.len();
    let own_feasible = sol.residual <= 1e-8 * prob.b.frobenius().max(1.0) && sol.objective == size as f64;
    // rank deficient subsets are skipped: a feasible one implies a smaller
    // feasible independent subset, which is enumerated too
    let smaller = (0u32..1 << n)
        .filter(|mask| (mask.count_ones() as usize) < size)
        .any(|mask| feasible_on(&prob, &(0..n).filter(|i| mask >> i & 1 == 1).collect::<Vec<_>>()));
    own_feasible && !smaller
}

/// `Some(0)` on agreement, otherwise the sign of IRLS minus descent; `None`
/// when a solver refused.
fn objective_gap(seed: u64) -> Option<i8> {
    let mut rng = PortableRng::new(seed);
    let d = 1 + rng.below(3);
    let r = 1 + rng.below((8 / d).min(4));
    let m = 2 + rng.below(11 - d);
    let k = 1 + rng.below(m / 2);
    let p = rng.uniform();
    let spec = GenSpec {
        kind: MatrixKind::Gaussian,
        m,
        n: m + d,
        r,
        k,
        nodes: None,
        seed,
        amplitude: 1.0,
    };
    let mut prob = gen_problem(&spec).expect("generator");
    prob.planted = None;
    let opts = DescentOptions {
        restarts: 0,
        grid_points: 0,
        ..DescentOptions::new(seed)
    };
    let a = irls_solve(&prob, p, &IrlsOptions::default()).ok()?;
    let b = nullspace_solve(&prob, p, &opts).ok()?;
    let tol = 1e-4 * a.objective.max(b.objective).max(1.0);
    Some(if (a.objective - b.objective).abs() <= tol {
        0
    } else if a.objective > b.objective {
        1
    } else {
        -1
    })
}

fn ac5() -> Outcome {
    let t = Instant::now();
    let count = |f: fn(u64) -> bool| (0..CASES).filter(|&s| !f(s)).count();
    let failures = [
        ("theta scale", count(theta_scale_invariance)),
        ("theta monotone", count(theta_monotone)),
        ("holder", count(holder)),
        ("l20 optimal", count(l20_optimal)),
    ];
    let (mut irls_higher, mut descent_higher, mut refused) = (0, 0, 0);
    for s in 0..CASES {
        match objective_gap(s) {
            Some(0) => {}
            Some(1) => irls_higher += 1,
            Some(_) => descent_higher += 1,
            None => refused += 1,
        }
    }
    let disagree = irls_higher + descent_higher;
    let took = t.elapsed();
    let mut detail: Vec<String> = failures.iter().map(|(n, f)| format!("{n} {f}")).collect();
    detail.push(format!(
        "irls/descent disagree {disagree} (irls higher {irls_higher}, descent higher {descent_higher}), refused {refused}"
    ));
    let pass = failures.iter().all(|(_, f)| *f == 0) && disagree == 0 && refused == 0 && took < Duration::from_secs(30);
    outcome(
        "AC5",
        pass,
        format!("failures per {CASES} cases: {}; {took:.2?}", detail.join(", ")),
    )
}

fn ac6() -> Outcome {
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut gaps = Vec::new();
    // λ = 1, n = 4, k = 1, p = 1
    gaps.push((nsc_upper_bound(1.0, 4, 1, 1.0).unwrap() - (sqrt2 + 1.0) / 8.0).abs());
    // λ = 2, n = 5: λn − n − 2λ + 3 = 4 cancels the ln 4
    gaps.push((f_threshold(2, 2.0, 5).unwrap() - (1.5f64).ln() / (sqrt2 + 1.0).ln()).abs());
    // λ = 1, k = 2, n = 6, p = 0.5: c = (√2+1)/8 and M = √c · 2/3
    gaps.push((nsc_upper_bound(0.5, 6, 2, 1.0).unwrap() - ((sqrt2 + 1.0) / 8.0).sqrt() * 2.0 / 3.0).abs());
    let worst = gaps.iter().fold(0.0f64, |a, &b| a.max(b));
    let infinite = f_threshold(3, 1.0, 7).unwrap() == f64::INFINITY;
    let a = Mat::from_rows(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]).unwrap();
    let b = Mat::from_rows(&[[1.0], [2.0]]).unwrap();
    let rep = pstar(&a, &b, 1e-8).unwrap();
    let clamp = rep.p_star == 1.0 && rep.clamped;

    let mut rng = PortableRng::new(6);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let lambda = 1.0 + 49.0 * rng.uniform();
        let n = 3 + rng.below(60);
        let args: Vec<usize> = (0..3).map(|_| 1 + rng.below(30)).collect();
        let vals: Vec<f64> = args.iter().map(|&x| f_threshold(x, lambda, n).unwrap()).collect();
        let best = vals.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        if best != f_threshold(*args.iter().min().unwrap(), lambda, n).unwrap() {
            mismatches += 1;
        }
    }
    outcome(
        "AC6",
        worst <= 1e-12 && infinite && clamp && mismatches == 0,
        format!("max error {worst:.1e}, lambda = 1 gives f = inf {infinite}, clamp {clamp}, max-f mismatches {mismatches}/1000"),
    )
}

fn ac7() -> Outcome {
    let (out, _) = run(&["nsc", &data("example2"), "--k", "2", "--grid", "0:1:0.1"]);
    if !out.status.success() {
        return outcome("AC7", false, String::from_utf8_lossy(&out.stderr).into_owned());
    }
    let rep = report(&out);
    let a = examples::example2().a;
    let rows = rep["outputs"]["rows"].as_array().cloned().unwrap_or_default();
    let certs = rep["outputs"]["certificates"].as_array().cloned().unwrap_or_default();
    let mut consistent = rows.len() == 11 && certs.len() == 11;
    let mut exceeds = 0;
    for (row, cert) in rows.iter().zip(&certs) {
        let p = row["p"].as_f64().unwrap();
        let h = row["value"].as_f64().unwrap();
        let x: Mat = serde_json::from_value(cert["certificate_X"].clone()).unwrap();
        // one-based in JSON
        let s: Vec<usize> = serde_json::from_value(cert["certificate_S"]["indices"].clone()).unwrap();
        // own θ: S against its complement
        let terms: Vec<f64> = x
            .row_norms()
            .iter()
            .map(|&v| if p == 0.0 { f64::from(u8::from(v > 1e-8)) } else { v.powf(p) })
            .collect();
        let num: f64 = s.iter().map(|&i| terms[i - 1]).sum();
        let den: f64 = terms.iter().sum::<f64>() - num;
        let recomputed = num / den;
        consistent &= (recomputed - h).abs() <= 1e-9 * h.max(1.0)
            && a.matmul(&x).frobenius() <= 1e-8
            && row["verified"] == Value::Bool(true)
            && row["upper_bound"].is_number() == (p > 0.0);
        if row["upper_bound"].as_f64().is_some_and(|m| h > m) {
            exceeds += 1;
        }
    }
    outcome(
        "AC7",
        consistent,
        format!("{} rows re-verified from certificates; h exceeds M at {exceeds} of them", rows.len()),
    )
}

fn strip_runtime(text: &[u8]) -> Value {
    let mut v: Value = serde_json::from_slice(text).expect("report is JSON");
    v.as_object_mut().expect("report object").remove("runtime_ms");
    v
}

fn artifact_runs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let gen = dir.join("gen.json");
    let gen_s = gen.to_str().unwrap().to_string();
    let ex2 = data("example2");
    let jobs: Vec<(&str, Vec<&str>)> = vec![
        ("gen.json", vec!["gen", "--m", "5", "--n", "7", "--r", "2", "--k", "2", "--seed", "11"]),
        ("repro1.json", vec!["reproduce", "example1"]),
        ("repro2.json", vec!["reproduce", "example2", "--seed", "4"]),
        ("pstar.json", vec!["pstar", &ex2]),
        ("pstar.csv", vec!["pstar", &ex2, "--csv"]),
        ("solve.json", vec!["solve", &gen_s, "--method", "nullspace", "--p", "0.6", "--seed", "9"]),
        ("solve.csv", vec!["solve", &gen_s, "--method", "irls", "--p", "0.6", "--csv"]),
        ("sweep.json", vec!["sweep", &gen_s, "--grid", "0.2:1:0.2", "--restarts", "4", "--seed", "2"]),
        ("sweep.csv", vec!["sweep", &ex2, "--grid", "0.1:0.8:0.1", "--csv"]),
        ("nsc.json", vec!["nsc", &gen_s, "--r", "2", "--grid", "0:1:0.25", "--restarts", "8", "--seed", "5"]),
        ("nsc.csv", vec!["nsc", &ex2, "--k", "2", "--csv"]),
    ];
    jobs.into_iter()
        .map(|(name, mut args)| {
            let path = dir.join(name);
            let path_s = path.to_str().unwrap().to_string();
            args.extend(["--out", &path_s]);
            let (out, _) = run(&args);
            assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
            (name.to_string(), std::fs::read(&path).expect("artifact written"))
        })
        .collect()
}

fn ac8() -> Outcome {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (first, second) = (artifact_runs(d1.path()), artifact_runs(d2.path()));
    let mut differing = Vec::new();
    for ((name, a), (_, b)) in first.iter().zip(&second) {
        let same = if name.ends_with(".json") {
            strip_runtime(a) == strip_runtime(b) && strip(a) == strip(b)
        } else {
            a == b
        };
        if !same {
            differing.push(name.clone());
        }
    }
    outcome(
        "AC8",
        differing.is_empty(),
        format!("{} artifacts compared, differing: {differing:?}", first.len()),
    )
}

/// The raw bytes with the runtime line removed.
fn strip(text: &[u8]) -> Vec<u8> {
    String::from_utf8_lossy(text)
        .lines()
        .filter(|l| !l.trim_start().starts_with("\"runtime_ms\""))
        .flat_map(|l| l.bytes().chain(std::iter::once(b'\n')))
        .collect()
}

fn main() {
    let checks: [fn() -> Outcome; 8] = [ac1, ac2, ac3, ac4, ac5, ac6, ac7, ac8];
    let mut unexpected = Vec::new();
    for check in checks {
        let o = check();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("{} {status}  {}", o.id, o.detail);
        if !o.pass && !EXPECTED_RED.contains(&o.id) {
            unexpected.push(o.id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}

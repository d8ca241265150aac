//! The null space constant `h(p, A, r, k)`: the smallest `h` with
//! `‖X_S‖₂,ₚᵖ ≤ h · ‖X_{Sᶜ}‖₂,ₚᵖ` for every `X ∈ Ker(A)ʳ` and `|S| ≤ k`.
//! `h < 1` is exactly the condition under which every `k`-row-sparse
//! solution is recovered.
//!
//! With a one-dimensional kernel the constant has a closed form. Otherwise
//! it is estimated from below by a witness search, and every estimate comes
//! with the certificate `(X, S)` that attains it.

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{max_singular_value, min_singular_value, nullspace_basis, orient, orient_mat, Mat};
use crate::norms::{theta_max_of_norms, RowSupport, DEFAULT_ZERO_TOL};
use crate::rng::PortableRng;
use crate::search::descend;

/// Column subsets count as dependent when their smallest singular value is
/// at most this fraction of `σ_max(A)`.
pub const SPARK_REL_TOL: f64 = 1e-10;

/// Smallest improvement of `θ` the witness search acts on.
const SEARCH_TOL: f64 = 1e-10;
const SEARCH_MIN_STEP: f64 = 1e-6;

/// Default cap on `n` for subset enumeration.
pub const DEFAULT_ENUMERATION_GUARD: usize = 20;

#[derive(Clone, Debug)]
pub struct NscOptions {
    pub seed: u64,
    /// Random starts on the coefficient sphere.
    pub restarts: usize,
    /// Rows with norm at or below this are zero, both when counting at
    /// `p = 0` and when cleaning certificates.
    pub zero_tol: f64,
    /// Most sparse null vectors tried as extra starts.
    pub max_circuits: usize,
}

impl NscOptions {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            restarts: 64,
            zero_tol: DEFAULT_ZERO_TOL,
            max_circuits: 5000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NscEstimate {
    pub p: f64,
    pub k: usize,
    pub r: usize,
    /// `θ(p, certificate_X, certificate_S)`; may be infinite.
    #[serde(with = "crate::serde_ext::ext_real")]
    pub value: f64,
    /// Element of `Ker(A)ʳ` with unit Frobenius norm.
    #[serde(rename = "certificate_X")]
    pub certificate_x: Mat,
    #[serde(rename = "certificate_S")]
    pub certificate_s: RowSupport,
    pub restarts_used: usize,
    /// True when the value is the constant itself rather than a lower bound.
    pub exact: bool,
}

/// Estimates `h(p, A, r, k)` for `p ∈ [0, 1]` and `1 ≤ k < n`.
///
/// For nullity 1 every `X ∈ Ker(A)ʳ` is `x·aᵀ` for the kernel generator `x`,
/// so `h` is `θ` of `x` on its `k` largest entries, independent of `r`.
/// For larger nullity the estimate is the best `θ` found by coordinate
/// ascent over coefficient matrices `C` in `X = N·C`, started from sparse
/// null vectors and from seeded random points on the unit sphere.
pub fn nsc_estimate(a: &Mat, r: usize, k: usize, p: f64, opts: &NscOptions) -> Result<NscEstimate> {
    estimate(a, r, k, p, opts, None)
}

/// [`nsc_estimate`] at each point of an increasing grid. Each certificate
/// joins the starts of the next point, and since `θ` on a fixed certificate
/// grows with `p` the resulting curve is nondecreasing.
pub fn nsc_curve(a: &Mat, r: usize, k: usize, p_grid: &[f64], opts: &NscOptions) -> Result<Vec<NscEstimate>> {
    if p_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::DomainError("p grid must be increasing".into()));
    }
    let mut out: Vec<NscEstimate> = Vec::with_capacity(p_grid.len());
    for &p in p_grid {
        let warm = out.last().map(|e| &e.certificate_x);
        let est = estimate(a, r, k, p, opts, warm)?;
        out.push(est);
    }
    Ok(out)
}

fn check_args(a: &Mat, r: usize, k: usize, p: f64) -> Result<()> {
    let n = a.cols();
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::DomainError(format!("p = {p} outside [0, 1]")));
    }
    if r == 0 {
        return Err(Error::DomainError("r must be positive".into()));
    }
    if k == 0 || k >= n {
        return Err(Error::DomainError(format!("need 1 <= k < n, got k = {k}, n = {n}")));
    }
    Ok(())
}

struct Witness {
    value: f64,
    support: Vec<usize>,
    start: usize,
    x: Mat,
}

/// Larger value first, then lexicographically smaller support, then the
/// earlier start.
fn better(a: &Witness, b: &Witness) -> bool {
    match a.value.total_cmp(&b.value) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => (&a.support, a.start) < (&b.support, b.start),
    }
}

fn estimate(a: &Mat, r: usize, k: usize, p: f64, opts: &NscOptions, warm: Option<&Mat>) -> Result<NscEstimate> {
    check_args(a, r, k, p)?;
    let ns = nullspace_basis(a, None)?;
    let d = ns.nullity;
    if d == 0 {
        return Err(Error::TrivialNullspace);
    }
    let n = a.cols();

    if d == 1 {
        let mut x = ns.vector(0);
        orient(&mut x);
        clean(&mut x, opts.zero_tol);
        let cert = Mat::from_fn(n, r, |i, j| if j == 0 { x[i] } else { 0.0 });
        let w = witness(&cert, p, k, opts.zero_tol, 0);
        return Ok(finish(w, p, k, r, 1, true, opts.zero_tol));
    }

    let basis = &ns.basis;
    let dim = d * r;
    let mut starts: Vec<Vec<f64>> = Vec::new();
    // sparse null vectors: those vanishing on d − 1 chosen rows
    for rows in (0..n).combinations(d - 1).take(opts.max_circuits) {
        let sub = basis.select_rows(&rows);
        let Ok(kernel) = nullspace_basis(&sub, None) else {
            continue;
        };
        if kernel.nullity != 1 {
            continue;
        }
        let c = kernel.vector(0);
        let mut start = vec![0.0; dim];
        for (a_idx, v) in c.iter().enumerate() {
            start[a_idx * r] = *v;
        }
        starts.push(start);
    }
    for i in 0..opts.restarts {
        let mut rng = PortableRng::stream(opts.seed, i as u64);
        starts.push((0..dim).map(|_| rng.normal()).collect());
    }
    if let Some(w) = warm {
        if w.shape() == (n, r) {
            // N has orthonormal columns, so Nᵀ recovers the coefficients
            starts.push(basis.t_matmul(w).as_slice().to_vec());
        }
    }
    let used = starts.len();

    let norms_of = |c: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| {
                let row = basis.row(i);
                (0..r)
                    .map(|j| {
                        let v: f64 = row.iter().enumerate().map(|(a, &b)| b * c[a * r + j]).sum();
                        v * v
                    })
                    .sum::<f64>()
                    .sqrt()
            })
            .collect()
    };
    let objective = |c: &[f64]| -> f64 {
        let norms = norms_of(c);
        if norms.iter().all(|&v| v == 0.0) {
            return f64::INFINITY;
        }
        -theta_max_of_norms(p, &norms, k, opts.zero_tol).0
    };

    let witnesses: Vec<Witness> = starts
        .into_par_iter()
        .enumerate()
        .filter_map(|(idx, mut c)| {
            let len = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            if len == 0.0 || !len.is_finite() {
                return None;
            }
            c.iter_mut().for_each(|v| *v /= len);
            // θ at p = 0 is piecewise constant, so local moves cannot help there
            let c = if p == 0.0 {
                c
            } else {
                descend(&objective, c, 0.5, SEARCH_TOL, SEARCH_MIN_STEP).0
            };
            let cm = Mat::new(d, r, c).expect("coefficient shape");
            let mut x = basis.matmul(&cm);
            let f = x.frobenius();
            if f == 0.0 {
                return None;
            }
            x = x.scale(1.0 / f);
            let mut data = x.as_slice().to_vec();
            clean(&mut data, opts.zero_tol);
            x = Mat::new(n, r, data).expect("shape preserved");
            if x.is_zero() {
                return None;
            }
            Some(witness(&orient_mat(&x), p, k, opts.zero_tol, idx))
        })
        .collect();
    // the previous certificate as it stands, so a curve never drops below it
    let carried = warm
        .filter(|w| w.shape() == (n, r) && !w.is_zero())
        .map(|w| witness(w, p, k, opts.zero_tol, used));
    let best = witnesses
        .into_iter()
        .chain(carried)
        .reduce(|a, b| if better(&b, &a) { b } else { a })
        .ok_or_else(|| Error::DomainError("no usable start for the null space search".into()))?;
    Ok(finish(best, p, k, r, used, false, opts.zero_tol))
}

/// Sets entries at or below `zero_tol` in magnitude to zero, then rescales
/// to unit Euclidean length.
fn clean(v: &mut [f64], zero_tol: f64) {
    for x in v.iter_mut() {
        if x.abs() <= zero_tol {
            *x = 0.0;
        }
    }
    let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if len > 0.0 {
        v.iter_mut().for_each(|x| *x /= len);
    }
}

fn witness(x: &Mat, p: f64, k: usize, zero_tol: f64, start: usize) -> Witness {
    let (value, support) = theta_max_of_norms(p, &x.row_norms(), k, zero_tol);
    Witness {
        value,
        support,
        start,
        x: x.clone(),
    }
}

fn finish(w: Witness, p: f64, k: usize, r: usize, used: usize, exact: bool, zero_tol: f64) -> NscEstimate {
    let n = w.x.rows();
    NscEstimate {
        p,
        k,
        r,
        value: w.value,
        certificate_s: RowSupport::new(w.support, n, zero_tol).expect("indices below n"),
        certificate_x: w.x,
        restarts_used: used,
        exact,
    }
}

/// Size of the smallest linearly dependent set of columns of `a`, or
/// `n + 1` when the columns are independent.
///
/// A subset `S` is dependent when `σ_min(A_S) ≤ 1e-10 · σ_max(A)`.
pub fn spark(a: &Mat, guard: usize) -> Result<usize> {
    let (m, n) = a.shape();
    if n > guard {
        return Err(Error::EnumerationTooLarge { n, guard });
    }
    let limit = SPARK_REL_TOL * max_singular_value(a);
    for size in 1..=n {
        if size > m {
            return Ok(size);
        }
        let subsets: Vec<Vec<usize>> = (0..n).combinations(size).collect();
        let dependent = subsets
            .par_iter()
            .any(|s| min_singular_value(&a.select_cols(s)) <= limit);
        if dependent {
            return Ok(size);
        }
    }
    Ok(n + 1)
}

/// Largest `k` such that every `k`-row-sparse solution is the unique
/// `ℓ₂,₀` minimiser: `⌊(spark(A) − 1) / 2⌋`.
pub fn max_recoverable_k(a: &Mat, guard: usize) -> Result<usize> {
    Ok((spark(a, guard)? - 1) / 2)
}

use itertools::Itertools;
use rayon::prelude::*;

use super::{check_p, polish, MmvProblem, Method, SparseSolution, DEFAULT_FEASIBILITY_TOL};
use crate::error::{Error, Result};
use crate::linalg::{min_norm_solution, nullspace_basis, solve_linear, Mat};
use crate::norms::{mixed_norm_2p_unchecked, row_support, top_k_rows, DEFAULT_ZERO_TOL};
use crate::rng::PortableRng;
use crate::search::descend;

const SNAP_ROUNDS: usize = 20;
// Largest number of row subsets scanned for the vertex start.
const VERTEX_LIMIT: usize = 5000;
// Starts stop early; the winner is refined afterwards.
const COARSE_STEP: f64 = 1e-6;
const FINE_STEP: f64 = 1e-10;
const ROUNDING_FLOOR: f64 = 1e-12;

/// Options for [`nullspace_solve`]. There is no `Default`: the seed must be
/// chosen explicitly.
#[derive(Clone, Debug)]
pub struct DescentOptions {
    pub seed: u64,
    /// Random starts in addition to `C = 0` and the planted solution.
    pub restarts: usize,
    /// Points per axis of the exhaustive grid used when `d·r ≤ 2`.
    pub grid_points: usize,
    /// A coordinate move must lower the objective by more than this.
    pub tol: f64,
    /// Largest accepted search dimension `d·r`.
    pub dim_guard: usize,
    pub zero_tol: f64,
    pub feasibility_tol: f64,
}

impl DescentOptions {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            restarts: 32,
            grid_points: 201,
            tol: 1e-10,
            dim_guard: 8,
            zero_tol: DEFAULT_ZERO_TOL,
            feasibility_tol: DEFAULT_FEASIBILITY_TOL,
        }
    }
}

/// The affine family `X(C) = X₀ + N·C` of all solutions of `AX = B`.
struct Family {
    x0: Mat,
    basis: Mat,
    r: usize,
    p: f64,
    /// Squared row norms at or below this count as exact zeros.
    floor_sq: f64,
}

impl Family {
    fn dim(&self) -> usize {
        self.basis.cols() * self.r
    }

    fn point(&self, c: &[f64]) -> Mat {
        let d = self.basis.cols();
        let cm = Mat::new(d, self.r, c.to_vec()).expect("coefficient shape");
        self.x0.add(&self.basis.matmul(&cm))
    }

    fn objective(&self, c: &[f64]) -> f64 {
        let (n, d, r) = (self.x0.rows(), self.basis.cols(), self.r);
        let half_p = 0.5 * self.p;
        let mut total = 0.0;
        let mut row = vec![0.0; r];
        for i in 0..n {
            row.copy_from_slice(self.x0.row(i));
            for a in 0..d {
                let nia = self.basis[(i, a)];
                for (b, v) in row.iter_mut().enumerate() {
                    *v += nia * c[a * r + b];
                }
            }
            let sq = row.iter().map(|v| v * v).sum::<f64>();
            if sq > self.floor_sq {
                total += sq.powf(half_p);
            }
        }
        total
    }
}

/// `‖X₀ + N·C‖₂,ₚᵖ` for a coefficient matrix `C` (d×r).
pub fn nullspace_objective(x0: &Mat, basis: &Mat, c: &Mat, p: f64) -> f64 {
    mixed_norm_2p_unchecked(&x0.add(&basis.matmul(c)), p)
}

/// Minimises `‖X‖₂,ₚᵖ` over the parametrisation `X = X₀ + N·C`, where `X₀` is
/// the minimum-norm solution and the columns of `N` span `Ker(A)`.
///
/// Local search is coordinate-wise golden-section descent started from
/// `C = 0`, from the planted solution when known, and from `restarts`
/// Gaussian draws scaled to `‖X₀‖_F`. When `d·r ≤ 2` a uniform grid over
/// `[−g, g]`, `g = 10‖X₀‖_F`, seeds one more start, and so does the best
/// point at which `d` rows vanish exactly. The winner is then tried against
/// the vertices obtained by zeroing its `d` smallest rows.
pub fn nullspace_solve(prob: &MmvProblem, p: f64, opts: &DescentOptions) -> Result<SparseSolution> {
    check_p(p)?;
    let (_, _, r) = prob.dims();
    let x0 = min_norm_solution(&prob.a, &prob.b, None)?;
    let ns = nullspace_basis(&prob.a, None)?;
    let scale = match x0.frobenius() {
        s if s > 0.0 => s,
        _ => 1.0,
    };
    // rounding leaves rows of order 1e-16 where a solve zeroed them, and for
    // small p those would still cost almost 1 each
    let floor = ROUNDING_FLOOR * scale;
    let fam = Family {
        x0,
        basis: ns.basis,
        r,
        p,
        floor_sq: floor * floor,
    };
    let dim = fam.dim();
    if dim == 0 {
        return Ok(finish(prob, fam.x0.clone(), p, opts));
    }
    if dim > opts.dim_guard {
        return Err(Error::DimGuardExceeded {
            dim,
            guard: opts.dim_guard,
        });
    }

    let mut starts: Vec<(Vec<f64>, f64)> = vec![(vec![0.0; dim], scale)];
    if let Some(planted) = &prob.planted {
        // N has orthonormal columns and X* − X₀ lies in Ker(A)^r
        let c = fam.basis.t_matmul(&planted.sub(&fam.x0));
        starts.push((c.as_slice().to_vec(), scale));
    }
    for i in 0..opts.restarts {
        let mut rng = PortableRng::stream(opts.seed, i as u64);
        let mut c: Vec<f64> = (0..dim).map(|_| rng.normal()).collect();
        let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            c.iter_mut().for_each(|v| *v *= scale / norm);
        }
        starts.push((c, scale));
    }
    if let Some(c) = best_vertex(&fam, VERTEX_LIMIT) {
        starts.push((c, 1e-2 * scale));
    }
    if dim <= 2 && opts.grid_points >= 2 {
        starts.push(grid_start(&fam, 10.0 * scale, opts.grid_points));
    }

    let f = |c: &[f64]| fam.objective(c);
    let results: Vec<(Vec<f64>, f64)> = starts
        .into_par_iter()
        .map(|(c, h)| descend(&f, c, h, opts.tol, COARSE_STEP * scale))
        .collect();
    let (mut best, mut best_val) = results
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one start");

    for _ in 0..SNAP_ROUNDS {
        match snap(&fam, &best, opts.tol, scale) {
            Some((c, v)) if v < best_val - opts.tol => {
                best = c;
                best_val = v;
            }
            _ => break,
        }
    }
    let (best, _) = descend(&f, best, 1e-4 * scale, opts.tol, FINE_STEP * scale);
    // rows left at rounding level still cost |x|^p, which is large for small p
    let x = polish(prob, fam.point(&best), p, opts.feasibility_tol);
    Ok(finish(prob, x, p, opts))
}

fn grid_start(fam: &Family, g: f64, points: usize) -> (Vec<f64>, f64) {
    let dim = fam.dim();
    let step = 2.0 * g / (points - 1) as f64;
    let coord = |i: usize| -g + step * i as f64;
    let mut best = (vec![0.0; dim], f64::INFINITY);
    if dim == 1 {
        for i in 0..points {
            let c = vec![coord(i)];
            let v = fam.objective(&c);
            if v < best.1 {
                best = (c, v);
            }
        }
    } else {
        for i in 0..points {
            for j in 0..points {
                let c = vec![coord(i), coord(j)];
                let v = fam.objective(&c);
                if v < best.1 {
                    best = (c, v);
                }
            }
        }
    }
    (best.0, step)
}

/// The point with the smallest objective among those where `d` rows vanish
/// exactly. Skipped when there are more than `limit` row subsets.
fn best_vertex(fam: &Family, limit: usize) -> Option<Vec<f64>> {
    let (n, d) = (fam.x0.rows(), fam.basis.cols());
    if binomial(n, d) > limit {
        return None;
    }
    (0..n)
        .combinations(d)
        .filter_map(|rows| {
            let n_t = fam.basis.select_rows(&rows);
            let rhs = fam.x0.select_rows(&rows).scale(-1.0);
            let c = solve_linear(&n_t, &rhs).ok()?.as_slice().to_vec();
            let v = fam.objective(&c);
            Some((c, v))
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(c, _)| c)
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Points where `d` of the currently smallest rows vanish exactly, each
/// followed by local descent. Returns the best of them.
fn snap(fam: &Family, c: &[f64], tol: f64, scale: f64) -> Option<(Vec<f64>, f64)> {
    let (n, d, r) = (fam.x0.rows(), fam.basis.cols(), fam.r);
    let norms = fam.point(c).row_norms();
    let pool = {
        let mut order = top_k_rows(&norms.iter().map(|v| -v).collect::<Vec<_>>(), (d + 1).min(n));
        order.sort_by(|&i, &j| norms[i].total_cmp(&norms[j]).then(i.cmp(&j)));
        order
    };
    let f = |c: &[f64]| fam.objective(c);
    pool.into_iter()
        .combinations(d)
        .filter_map(|rows| {
            let n_t = fam.basis.select_rows(&rows);
            let rhs = fam.x0.select_rows(&rows).scale(-1.0);
            let cm = solve_linear(&n_t, &rhs).ok()?;
            debug_assert_eq!(cm.shape(), (d, r));
            Some(descend(&f, cm.as_slice().to_vec(), 1e-4 * scale, tol, COARSE_STEP * scale))
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

fn finish(prob: &MmvProblem, x: Mat, p: f64, opts: &DescentOptions) -> SparseSolution {
    SparseSolution {
        support: row_support(&x, opts.zero_tol),
        objective: mixed_norm_2p_unchecked(&x, p),
        p,
        method: Method::NullspaceDescent,
        residual: prob.residual(&x),
        unique: None,
        x,
    }
}

use itertools::Itertools;
use rayon::prelude::*;

use super::{MmvProblem, Method, SparseSolution, DEFAULT_FEASIBILITY_TOL};
use crate::error::{Error, Result};
use crate::linalg::{least_squares, Mat};
use crate::norms::{norm_20, row_support, DEFAULT_ZERO_TOL};

/// Columns of `A_S` count as dependent when a Householder diagonal falls
/// below this fraction of the largest column norm.
const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct L20Options {
    pub zero_tol: f64,
    pub feasibility_tol: f64,
    /// Largest `n` accepted for support enumeration.
    pub enumeration_guard: usize,
}

impl Default for L20Options {
    fn default() -> Self {
        Self {
            zero_tol: DEFAULT_ZERO_TOL,
            feasibility_tol: DEFAULT_FEASIBILITY_TOL,
            enumeration_guard: 20,
        }
    }
}

struct Candidate {
    support: Vec<usize>,
    coeffs: Mat,
    norm: f64,
}

/// Exact `ℓ₂,₀` minimisation by enumerating supports of size `0, 1, …, k_max`.
///
/// Stops at the first size where some support reproduces `B`; among those,
/// the one with the smallest `‖X‖_F` wins, then the lexicographically
/// smallest support. `unique` is true when no other support of that size is
/// feasible.
pub fn l20_solve(prob: &MmvProblem, k_max: usize, opts: &L20Options) -> Result<SparseSolution> {
    let (_, n, r) = prob.dims();
    if n > opts.enumeration_guard {
        return Err(Error::EnumerationTooLarge {
            n,
            guard: opts.enumeration_guard,
        });
    }

    if prob.feasible(prob.b.frobenius(), opts.feasibility_tol) {
        let x = Mat::zeros(n, r);
        return Ok(finish(prob, x, true, opts));
    }

    for size in 1..=k_max.min(n) {
        let supports: Vec<Vec<usize>> = (0..n).combinations(size).collect();
        let feasible: Vec<Candidate> = supports
            .into_par_iter()
            .filter_map(|support| {
                let a_s = prob.a.select_cols(&support);
                let ls = least_squares(&a_s, &prob.b, RANK_TOL)?;
                prob.feasible(ls.residual, opts.feasibility_tol).then(|| Candidate {
                    norm: ls.solution.frobenius(),
                    coeffs: ls.solution,
                    support,
                })
            })
            .collect();
        if feasible.is_empty() {
            continue;
        }
        let unique = feasible.len() == 1;
        // `feasible` is in lexicographic order, so min_by keeps the first of equals
        let best = feasible
            .into_iter()
            .min_by(|a, b| a.norm.total_cmp(&b.norm))
            .expect("non-empty");
        let mut x = Mat::zeros(n, r);
        for (row, &i) in best.support.iter().enumerate() {
            x.row_mut(i).copy_from_slice(best.coeffs.row(row));
        }
        return Ok(finish(prob, x, unique, opts));
    }
    Err(Error::Infeasible { k_max })
}

fn finish(prob: &MmvProblem, x: Mat, unique: bool, opts: &L20Options) -> SparseSolution {
    SparseSolution {
        support: row_support(&x, opts.zero_tol),
        objective: norm_20(&x, opts.zero_tol) as f64,
        p: 0.0,
        method: Method::ExactL20,
        residual: prob.residual(&x),
        unique: Some(unique),
        x,
    }
}

use serde::{Deserialize, Serialize};

use super::{check_p, polish, MmvProblem, Method, SparseSolution, DEFAULT_FEASIBILITY_TOL};
use crate::error::{Error, Result};
use crate::linalg::{min_norm_solution, solve_refined, Mat};
use crate::norms::{mixed_norm_2p_unchecked, row_support, DEFAULT_ZERO_TOL};

#[derive(Clone, Debug)]
pub struct IrlsOptions {
    /// Initial smoothing `ε₀`.
    pub eps0: f64,
    /// Floor of the smoothing schedule.
    pub eps_min: f64,
    /// Relative change that counts as converged once `ε = eps_min`.
    pub tol: f64,
    pub max_iter: usize,
    /// After convergence, re-solve on the largest rows and keep the result
    /// when it is feasible and lowers the objective. This removes the residue
    /// of order `ε_min^(1 − p/2)` the smoothing leaves on rows that should
    /// vanish.
    pub polish: bool,
    pub zero_tol: f64,
    pub feasibility_tol: f64,
}

impl Default for IrlsOptions {
    fn default() -> Self {
        Self {
            eps0: 1.0,
            eps_min: 1e-10,
            tol: 1e-9,
            max_iter: 2000,
            polish: true,
            zero_tol: DEFAULT_ZERO_TOL,
            feasibility_tol: DEFAULT_FEASIBILITY_TOL,
        }
    }
}

/// One reweighting step.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IrlsStep {
    pub epsilon: f64,
    /// Smoothed objective `Σ (‖X_row i‖² + ε)^{p/2}` before the step.
    pub objective_before: f64,
    /// The same objective, same `ε`, after the step.
    pub objective_after: f64,
    /// `‖X_new − X‖_F / ‖X_new‖_F`
    pub change: f64,
}

/// Minimises `‖X‖₂,ₚᵖ` subject to `AX = B` by iteratively reweighted least
/// squares on `Σᵢ (‖X_row i‖₂² + ε)^{p/2}`.
///
/// Starting from the minimum-norm solution, each step sets the row weights
/// `wᵢ = (‖X_row i‖² + ε)^{p/2 − 1}` and solves
/// `X ← W⁻¹Aᵀ(AW⁻¹Aᵀ)⁻¹B`. `ε` drops tenfold (down to `eps_min`) whenever the
/// relative change falls below `√ε`.
pub fn irls_solve(prob: &MmvProblem, p: f64, opts: &IrlsOptions) -> Result<SparseSolution> {
    run(prob, p, opts, None)
}

/// [`irls_solve`] that also returns every step.
pub fn irls_solve_traced(
    prob: &MmvProblem,
    p: f64,
    opts: &IrlsOptions,
) -> Result<(SparseSolution, Vec<IrlsStep>)> {
    let mut trace = Vec::new();
    let sol = run(prob, p, opts, Some(&mut trace))?;
    Ok((sol, trace))
}

fn smoothed(x: &Mat, p: f64, eps: f64) -> f64 {
    x.row_norms()
        .into_iter()
        .map(|r| (r * r + eps).powf(0.5 * p))
        .sum()
}

fn run(
    prob: &MmvProblem,
    p: f64,
    opts: &IrlsOptions,
    mut trace: Option<&mut Vec<IrlsStep>>,
) -> Result<SparseSolution> {
    check_p(p)?;
    let (_, n, r) = prob.dims();
    if prob.b.is_zero() {
        return Ok(finish(prob, Mat::zeros(n, r), p, opts));
    }
    let a = &prob.a;
    let mut x = min_norm_solution(a, &prob.b, None)?;
    let mut eps = opts.eps0.max(opts.eps_min);

    for step in 0..opts.max_iter {
        let d: Vec<f64> = x
            .row_norms()
            .into_iter()
            .map(|r| (r * r + eps).powf(1.0 - 0.5 * p))
            .collect();
        // A·D·Aᵀ with D = W⁻¹ diagonal
        let ad = Mat::from_fn(a.rows(), n, |i, j| a[(i, j)] * d[j]);
        let g = ad.matmul(&a.transpose());
        let y = match solve_refined(&g, &prob.b) {
            Ok(y) => y,
            // A has full row rank, so this only happens once the weights off
            // a support smaller than m have collapsed: x has converged
            Err(_) if step > 0 => {
                x = polish(prob, x, p, opts.feasibility_tol);
                return Ok(finish(prob, x, p, opts));
            }
            Err(e) => return Err(Error::RankDeficient(e.to_string())),
        };
        let x_new = ad.t_matmul(&y);

        let change = x_new.sub(&x).frobenius() / x_new.frobenius().max(f64::MIN_POSITIVE);
        if let Some(t) = trace.as_deref_mut() {
            t.push(IrlsStep {
                epsilon: eps,
                objective_before: smoothed(&x, p, eps),
                objective_after: smoothed(&x_new, p, eps),
                change,
            });
        }
        x = x_new;
        if eps <= opts.eps_min && change < opts.tol {
            if opts.polish {
                x = polish(prob, x, p, opts.feasibility_tol);
            }
            return Ok(finish(prob, x, p, opts));
        }
        if change < eps.sqrt() {
            eps = (eps / 10.0).max(opts.eps_min);
        }
    }
    Err(Error::MaxIterationsExceeded {
        iterations: opts.max_iter,
        last: Box::new(finish(prob, x, p, opts)),
    })
}


fn finish(prob: &MmvProblem, x: Mat, p: f64, opts: &IrlsOptions) -> SparseSolution {
    SparseSolution {
        support: row_support(&x, opts.zero_tol),
        objective: mixed_norm_2p_unchecked(&x, p),
        p,
        method: Method::Irls,
        residual: prob.residual(&x),
        unique: None,
        x,
    }
}

use serde::{Deserialize, Serialize};

use super::{
    check_p, irls_solve, l20_solve, nullspace_solve, DescentOptions, IrlsOptions, L20Options, Method,
    MmvProblem, SparseSolution,
};
use crate::error::Result;

#[derive(Clone, Debug)]
pub struct EquivalenceOptions {
    pub l20: L20Options,
    pub irls: IrlsOptions,
    pub descent: DescentOptions,
    /// Largest support tried by the `ℓ₂,₀` enumeration; defaults to the
    /// problem's `k`, else `n`.
    pub k_max: Option<usize>,
    /// Largest Frobenius distance at which two minimisers count as equal.
    pub match_tol: f64,
}

impl EquivalenceOptions {
    pub fn new(seed: u64) -> Self {
        Self {
            l20: L20Options::default(),
            irls: IrlsOptions::default(),
            descent: DescentOptions::new(seed),
            k_max: None,
            match_tol: 1e-4,
        }
    }
}

/// What one `ℓ₂,ₚ` solver produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SolverOutcome {
    Solved { solution: SparseSolution },
    Failed { error: String, message: String },
}

impl SolverOutcome {
    pub fn solution(&self) -> Option<&SparseSolution> {
        match self {
            SolverOutcome::Solved { solution } => Some(solution),
            SolverOutcome::Failed { .. } => None,
        }
    }

    fn from_result(r: &Result<SparseSolution>) -> Self {
        match r {
            Ok(solution) => SolverOutcome::Solved {
                solution: solution.clone(),
            },
            Err(e) => SolverOutcome::Failed {
                error: e.name().to_string(),
                message: e.to_string(),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub p: f64,
    /// The best `ℓ₂,ₚ` minimiser lies within `match_tol` of the `ℓ₂,₀` one.
    pub equivalent: bool,
    /// `‖X_p − X_0‖_F`
    pub distance: f64,
    pub match_tol: f64,
    /// Solver whose minimiser had the smaller `ℓ₂,ₚ` objective.
    pub l2p_method: Method,
    pub l2p_objective: f64,
    pub l20_objective: f64,
    pub l20: SparseSolution,
    pub irls: SolverOutcome,
    pub nullspace: SolverOutcome,
}

/// Solves the problem as an `ℓ₂,₀` and as an `ℓ₂,ₚ` minimisation and reports
/// whether the minimisers coincide.
///
/// Both `ℓ₂,ₚ` solvers run; a solver refused by its guard is recorded as
/// failed. The one with the lower objective (IRLS on ties) is compared with
/// the `ℓ₂,₀` solution. Fails only when the `ℓ₂,₀` solve or both `ℓ₂,ₚ`
/// solves fail.
pub fn check_equivalence(prob: &MmvProblem, p: f64, opts: &EquivalenceOptions) -> Result<EquivalenceReport> {
    check_p(p)?;
    let (_, n, _) = prob.dims();
    let k_max = opts.k_max.or(prob.k).unwrap_or(n);
    let l20 = l20_solve(prob, k_max, &opts.l20)?;
    let (irls, nullspace) = rayon::join(
        || irls_solve(prob, p, &opts.irls),
        || nullspace_solve(prob, p, &opts.descent),
    );

    let best = match (&irls, &nullspace) {
        (Ok(a), Ok(b)) => {
            if b.objective < a.objective {
                b
            } else {
                a
            }
        }
        (Ok(a), Err(_)) => a,
        (Err(_), Ok(b)) => b,
        (Err(_), Err(_)) => return Err(irls.unwrap_err()),
    };
    let distance = best.x.sub(&l20.x).frobenius();
    Ok(EquivalenceReport {
        p,
        equivalent: distance <= opts.match_tol,
        distance,
        match_tol: opts.match_tol,
        l2p_method: best.method,
        l2p_objective: best.objective,
        l20_objective: l20.objective,
        irls: SolverOutcome::from_result(&irls),
        nullspace: SolverOutcome::from_result(&nullspace),
        l20,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use crate::linalg::Mat;

    #[test]
    fn example2_equivalent_at_published_p() {
        let prob = examples::example2();
        for p in [0.5, 0.8175] {
            let rep = check_equivalence(&prob, p, &EquivalenceOptions::new(3)).unwrap();
            assert!(rep.equivalent, "p = {p}: distance {}", rep.distance);
            assert_eq!(rep.l20.support.one_based(), vec![2, 5]);
            assert!(rep.irls.solution().is_some() && rep.nullspace.solution().is_some());
        }
    }

    #[test]
    fn zero_rhs_is_equivalent() {
        let prob = MmvProblem::new(examples::example2().a, Mat::zeros(4, 2), None, None).unwrap();
        let rep = check_equivalence(&prob, 0.7, &EquivalenceOptions::new(0)).unwrap();
        assert!(rep.equivalent);
        assert_eq!(rep.distance, 0.0);
    }

    #[test]
    fn guard_refusal_is_recorded_not_fatal() {
        let mut opts = EquivalenceOptions::new(0);
        opts.descent.dim_guard = 1;
        let rep = check_equivalence(&examples::example2(), 0.5, &opts).unwrap();
        assert!(matches!(&rep.nullspace, SolverOutcome::Failed { error, .. } if error == "DimGuardExceeded"));
        assert_eq!(rep.l2p_method, Method::Irls);
        let text = serde_json::to_string(&rep).unwrap();
        assert_eq!(serde_json::from_str::<EquivalenceReport>(&text).unwrap(), rep);
    }
}

//! Minimisation of `‖X‖₂,₀` and `‖X‖₂,ₚᵖ` subject to `AX = B`.
//!
//! * [`l20_solve`] enumerates row supports in order of increasing size.
//! * [`irls_solve`] runs iteratively reweighted least squares on a smoothed
//!   objective.
//! * [`nullspace_solve`] writes every solution as `X₀ + N·C` and searches the
//!   coefficients `C` directly.
//!
//! [`check_equivalence`] runs all of them and compares the minimisers.

mod equivalence;
mod irls;
mod l20;
mod nullspace;

use serde::{Deserialize, Serialize};

pub use equivalence::{check_equivalence, EquivalenceOptions, EquivalenceReport, SolverOutcome};
pub use irls::{irls_solve, irls_solve_traced, IrlsOptions, IrlsStep};
pub use l20::{l20_solve, L20Options};
pub use nullspace::{nullspace_objective, nullspace_solve, DescentOptions};

use crate::error::{Error, Result};
use crate::linalg::{least_squares, Mat};
use crate::norms::{mixed_norm_2p_unchecked, top_k_rows, RowSupport};

/// Default feasibility tolerance: `‖AX − B‖_F ≤ 1e-8 · max(1, ‖B‖_F)`.
pub const DEFAULT_FEASIBILITY_TOL: f64 = 1e-8;

/// One joint sparse recovery instance `AX = B`.
///
/// JSON form: `{"A": [[..]], "B": [[..]], "X_star": [[..]], "k": 2}` with the
/// last two keys optional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProblemRepr", into = "ProblemRepr")]
pub struct MmvProblem {
    pub a: Mat,
    pub b: Mat,
    /// A known solution, typically the planted row-sparse one.
    pub planted: Option<Mat>,
    /// Target sparsity.
    pub k: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct ProblemRepr {
    #[serde(rename = "A")]
    a: Mat,
    #[serde(rename = "B")]
    b: Mat,
    #[serde(rename = "X_star", default, skip_serializing_if = "Option::is_none")]
    x_star: Option<Mat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
}

impl TryFrom<ProblemRepr> for MmvProblem {
    type Error = Error;

    fn try_from(r: ProblemRepr) -> Result<Self> {
        MmvProblem::new(r.a, r.b, r.x_star, r.k)
    }
}

impl From<MmvProblem> for ProblemRepr {
    fn from(p: MmvProblem) -> Self {
        ProblemRepr {
            a: p.a,
            b: p.b,
            x_star: p.planted,
            k: p.k,
        }
    }
}

impl MmvProblem {
    /// Validates shapes and, when a planted solution is given, that it solves
    /// the system to `1e-8 · max(1, ‖B‖_F)`.
    pub fn new(a: Mat, b: Mat, planted: Option<Mat>, k: Option<usize>) -> Result<Self> {
        if a.rows() != b.rows() {
            return Err(Error::DimensionMismatch(format!(
                "A is {}x{} but B has {} rows",
                a.rows(),
                a.cols(),
                b.rows()
            )));
        }
        if let Some(x) = &planted {
            if x.shape() != (a.cols(), b.cols()) {
                return Err(Error::DimensionMismatch(format!(
                    "X_star is {}x{}, expected {}x{}",
                    x.rows(),
                    x.cols(),
                    a.cols(),
                    b.cols()
                )));
            }
            let res = a.matmul(x).sub(&b).frobenius();
            if res > 1e-8 * b.frobenius().max(1.0) {
                return Err(Error::InvalidMatrix(format!(
                    "X_star does not solve AX = B (residual {res:e})"
                )));
            }
        }
        if k == Some(0) {
            return Err(Error::InvalidMatrix("k must be positive".into()));
        }
        Ok(Self { a, b, planted, k })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem serialises")
    }

    /// `(m, n, r)`
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.a.rows(), self.a.cols(), self.b.cols())
    }

    pub fn residual(&self, x: &Mat) -> f64 {
        self.a.matmul(x).sub(&self.b).frobenius()
    }

    pub(crate) fn feasible(&self, residual: f64, tol: f64) -> bool {
        residual <= tol * self.b.frobenius().max(1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ExactL20,
    Irls,
    NullspaceDescent,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ExactL20 => "exact_l20",
            Method::Irls => "irls",
            Method::NullspaceDescent => "nullspace_descent",
        }
    }
}

/// A minimiser returned by one of the solvers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseSolution {
    #[serde(rename = "X")]
    pub x: Mat,
    pub support: RowSupport,
    /// `‖X‖₂,ₚᵖ` for `p > 0`, the number of nonzero rows for `p = 0`.
    pub objective: f64,
    pub p: f64,
    pub method: Method,
    /// `‖AX − B‖_F`
    pub residual: f64,
    /// Set by [`l20_solve`] only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unique: Option<bool>,
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::DomainError(format!("p = {p} outside (0, 1]")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;

    #[test]
    fn problem_json_round_trip() {
        let prob = examples::example2();
        let text = prob.to_json();
        assert!(text.contains("\"X_star\""));
        assert_eq!(MmvProblem::from_json(&text).unwrap(), prob);
    }

    #[test]
    fn problem_json_optional_keys() {
        let prob = MmvProblem::from_json(r#"{"A": [[1, 0]], "B": [[2]]}"#).unwrap();
        assert_eq!(prob.dims(), (1, 2, 1));
        assert!(prob.planted.is_none() && prob.k.is_none());
        assert!(!prob.to_json().contains("X_star"));
    }

    #[test]
    fn problem_rejects_inconsistent_input() {
        assert!(MmvProblem::from_json(r#"{"A": [[1, 0]], "B": [[2], [3]]}"#).is_err());
        assert!(MmvProblem::from_json(r#"{"A": [[1, 0]], "B": [[2]], "X_star": [[1], [1]]}"#).is_err());
        assert!(MmvProblem::from_json(r#"{"A": [[1, 0]], "B": [[2]], "X_star": [[2], [5]]}"#).is_ok());
        assert!(MmvProblem::from_json(r#"{"A": [[1, 0], [1]], "B": [[2], [1]]}"#).is_err());
        assert!(MmvProblem::from_json(r#"{"A": [[1, 0]], "B": [[2]], "k": 0}"#).is_err());
    }
}

/// Least-squares re-solve on the `s` largest rows for `s = 1, 2, …`; the
/// first feasible one replaces `x` if it has a lower objective.
pub(crate) fn polish(prob: &MmvProblem, x: Mat, p: f64, feasibility_tol: f64) -> Mat {
    let (m, n, _) = prob.dims();
    let norms = x.row_norms();
    for size in 1..=m.min(n) {
        let rows = top_k_rows(&norms, size);
        let Some(ls) = least_squares(&prob.a.select_cols(&rows), &prob.b, 1e-10) else {
            continue;
        };
        if !prob.feasible(ls.residual, feasibility_tol) {
            continue;
        }
        let mut y = Mat::zeros(n, x.cols());
        for (k, &i) in rows.iter().enumerate() {
            y.row_mut(i).copy_from_slice(ls.solution.row(k));
        }
        return if mixed_norm_2p_unchecked(&y, p) < mixed_norm_2p_unchecked(&x, p) {
            y
        } else {
            x
        };
    }
    x
}

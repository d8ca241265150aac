//! Dense linear algebra: symmetric eigendecomposition, null spaces and the
//! minimum-norm solution `Aᵀ(AAᵀ)⁻¹B`.

mod eigen;
pub mod io;
mod mat;
mod solve;

use serde::{Deserialize, Serialize};

pub use eigen::SymEigen;
pub use mat::{dot, norm2, Mat};
pub use solve::{least_squares, solve_linear, solve_refined, LeastSquares, PIVOT_TOL};

use crate::error::{Error, Result};

/// Relative factor used when no explicit zero threshold is supplied: an
/// eigenvalue counts as zero when it is at most `1e-10 · λ_max`.
pub const DEFAULT_RELATIVE_ZERO: f64 = 1e-10;

/// Extreme eigenvalues of `AᵀA`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigSummary {
    pub lambda_max: f64,
    /// Smallest eigenvalue strictly above `zero_threshold`.
    pub lambda_min_plus: f64,
    /// `lambda_max / lambda_min_plus`
    pub ratio: f64,
    pub rank: usize,
    pub zero_threshold: f64,
}

/// Computes `λ_max`, `λ_min⁺` and the rank of `AᵀA`.
///
/// The eigenproblem is solved on the smaller of `AᵀA` and `AAᵀ`; both share
/// their nonzero spectrum. `zero_threshold` defaults to `1e-10 · λ_max`.
pub fn eig_summary(a: &Mat, zero_threshold: Option<f64>) -> Result<EigSummary> {
    let gram = if a.rows() <= a.cols() {
        a.outer_gram()
    } else {
        a.gram()
    };
    let eig = SymEigen::new(&gram)?;
    let lambda_max = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let threshold = zero_threshold.unwrap_or(DEFAULT_RELATIVE_ZERO * lambda_max);
    let positive: Vec<f64> = eig.values.iter().copied().filter(|&v| v > threshold).collect();
    let Some(&lambda_min_plus) = positive.last() else {
        return Err(Error::AllZeroMatrix { threshold });
    };
    Ok(EigSummary {
        lambda_max,
        lambda_min_plus,
        ratio: lambda_max / lambda_min_plus,
        rank: positive.len(),
        zero_threshold: threshold,
    })
}

/// Orthonormal basis of `Ker(A)`, one basis vector per column.
#[derive(Clone, Debug)]
pub struct NullspaceBasis {
    pub basis: Mat,
    pub nullity: usize,
    pub orthonormal: bool,
}

impl NullspaceBasis {
    /// Column `j` of the basis.
    pub fn vector(&self, j: usize) -> Vec<f64> {
        self.basis.col(j)
    }
}

/// Null space from the eigenvectors of `AᵀA` whose eigenvalue is at most
/// `tol_null` (default `1e-10 · λ_max`), re-orthonormalised by Gram–Schmidt.
///
/// Each basis vector is oriented so that its first entry of largest magnitude
/// is positive.
pub fn nullspace_basis(a: &Mat, tol_null: Option<f64>) -> Result<NullspaceBasis> {
    let n = a.cols();
    let eig = SymEigen::new(&a.gram())?;
    let lambda_max = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let threshold = tol_null.unwrap_or(DEFAULT_RELATIVE_ZERO * lambda_max);

    let mut vectors: Vec<Vec<f64>> = Vec::new();
    for (j, &mu) in eig.values.iter().enumerate() {
        if mu > threshold {
            continue;
        }
        let mut v = eig.vector(j);
        // modified Gram–Schmidt, applied twice
        for _ in 0..2 {
            for u in &vectors {
                let c = dot(&v, u);
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
            }
        }
        let norm = norm2(&v);
        if norm < 1e-8 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        orient(&mut v);
        vectors.push(v);
    }
    let nullity = vectors.len();
    let basis = Mat::from_fn(n, nullity, |i, j| vectors[j][i]);
    Ok(NullspaceBasis {
        basis,
        nullity,
        orthonormal: true,
    })
}

/// Flips the sign of `v` so that its first entry of largest magnitude is positive.
pub fn orient(v: &mut [f64]) {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Same orientation rule as [`orient`], applied to a whole matrix read in
/// row-major order.
pub fn orient_mat(m: &Mat) -> Mat {
    let mut data = m.as_slice().to_vec();
    orient(&mut data);
    Mat::new(m.rows(), m.cols(), data).expect("shape preserved")
}

/// The minimum-Frobenius-norm solution `X₀ = Aᵀ(AAᵀ)⁻¹B` of `AX = B`.
///
/// Fails with [`Error::RankDeficient`] when the smallest eigenvalue of `AAᵀ`
/// is at most `tol_null` (default `1e-10 · λ_max`).
pub fn min_norm_solution(a: &Mat, b: &Mat, tol_null: Option<f64>) -> Result<Mat> {
    if b.rows() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "A has {} rows but B has {}",
            a.rows(),
            b.rows()
        )));
    }
    let g = a.outer_gram();
    let eig = SymEigen::new(&g)?;
    let lambda_max = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let threshold = tol_null.unwrap_or(DEFAULT_RELATIVE_ZERO * lambda_max);
    let lambda_min = eig.values.last().copied().unwrap_or(0.0);
    if lambda_max == 0.0 || lambda_min <= threshold {
        return Err(Error::RankDeficient(format!(
            "A A^T has eigenvalue {lambda_min:e} <= {threshold:e}; A lacks full row rank"
        )));
    }
    let y = solve_refined(&g, b).map_err(|e| Error::RankDeficient(e.to_string()))?;
    Ok(a.t_matmul(&y))
}

/// Smallest singular value of `a` (columns ≤ rows), computed as `‖A·v‖₂`
/// for the eigenvector `v` of the least eigenvalue of `AᵀA`.
///
/// Evaluating the product directly keeps exactly dependent columns near
/// machine precision instead of at the square root of it.
pub fn min_singular_value(a: &Mat) -> f64 {
    if a.cols() == 0 {
        return f64::INFINITY;
    }
    if a.cols() > a.rows() {
        return 0.0;
    }
    let eig = SymEigen::new(&a.gram()).expect("Gram matrix is square");
    let v = Mat::column(&eig.vector(eig.len() - 1));
    a.matmul(&v).frobenius()
}

/// Largest singular value of `a`.
pub fn max_singular_value(a: &Mat) -> f64 {
    let gram = if a.rows() <= a.cols() {
        a.outer_gram()
    } else {
        a.gram()
    };
    if gram.rows() == 0 {
        return 0.0;
    }
    let eig = SymEigen::new(&gram).expect("Gram matrix is square");
    eig.values[0].max(0.0).sqrt()
}

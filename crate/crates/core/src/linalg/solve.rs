use super::Mat;
use crate::error::{Error, Result};

/// Relative pivot floor for [`solve_linear`].
pub const PIVOT_TOL: f64 = 1e-12;

/// Solves `M · Z = RHS` by Gaussian elimination with partial pivoting.
///
/// Fails with [`Error::Singular`] when a pivot drops below
/// `1e-12 · max |M_ij|`.
pub fn solve_linear(m: &Mat, rhs: &Mat) -> Result<Mat> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "solve_linear needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if rhs.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side has {} rows, expected {n}",
            rhs.rows()
        )));
    }
    let limit = PIVOT_TOL * m.max_abs();
    let mut a = m.clone();
    let mut z = rhs.clone();
    let r = rhs.cols();

    for k in 0..n {
        let (piv, pmax) = (k..n)
            .map(|i| (i, a[(i, k)].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmax <= limit || pmax == 0.0 {
            return Err(Error::Singular { pivot: pmax, limit });
        }
        if piv != k {
            for j in 0..n {
                let t = a[(k, j)];
                a[(k, j)] = a[(piv, j)];
                a[(piv, j)] = t;
            }
            for j in 0..r {
                let t = z[(k, j)];
                z[(k, j)] = z[(piv, j)];
                z[(piv, j)] = t;
            }
        }
        let pivot = a[(k, k)];
        for i in (k + 1)..n {
            let f = a[(i, k)] / pivot;
            if f == 0.0 {
                continue;
            }
            a[(i, k)] = 0.0;
            for j in (k + 1)..n {
                a[(i, j)] -= f * a[(k, j)];
            }
            for j in 0..r {
                z[(i, j)] -= f * z[(k, j)];
            }
        }
    }
    for k in (0..n).rev() {
        for j in 0..r {
            let mut s = z[(k, j)];
            for c in (k + 1)..n {
                s -= a[(k, c)] * z[(c, j)];
            }
            z[(k, j)] = s / a[(k, k)];
        }
    }
    Ok(z)
}

/// [`solve_linear`] followed by one step of iterative refinement.
pub fn solve_refined(m: &Mat, rhs: &Mat) -> Result<Mat> {
    let z = solve_linear(m, rhs)?;
    let r = rhs.sub(&m.matmul(&z));
    let dz = solve_linear(m, &r)?;
    Ok(z.add(&dz))
}

/// Outcome of a dense least-squares solve.
#[derive(Clone, Debug)]
pub struct LeastSquares {
    pub solution: Mat,
    /// `‖A·X − B‖_F`
    pub residual: f64,
}

/// Minimises `‖A·X − B‖_F` for an `A` with full column rank using Householder QR.
///
/// Returns `None` when some diagonal entry of `R` is at most
/// `rank_tol · max_j ‖A_col j‖₂`, i.e. the columns are numerically dependent.
pub fn least_squares(a: &Mat, b: &Mat, rank_tol: f64) -> Option<LeastSquares> {
    let (m, n) = a.shape();
    assert_eq!(b.rows(), m);
    if n == 0 {
        return Some(LeastSquares {
            solution: Mat::zeros(0, b.cols()),
            residual: b.frobenius(),
        });
    }
    if n > m {
        return None;
    }
    let scale = (0..n)
        .map(|j| super::norm2(&a.col(j)))
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    let mut r = a.clone();
    let mut qtb = b.clone();
    let nb = b.cols();
    for k in 0..n {
        let alpha_norm = (k..m).map(|i| r[(i, k)] * r[(i, k)]).sum::<f64>().sqrt();
        if alpha_norm <= rank_tol * scale {
            return None;
        }
        let alpha = if r[(k, k)] > 0.0 { -alpha_norm } else { alpha_norm };
        let mut v: Vec<f64> = (k..m).map(|i| r[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            for j in k..n {
                let s: f64 = (k..m).map(|i| v[i - k] * r[(i, j)]).sum::<f64>() * 2.0 / vnorm2;
                for i in k..m {
                    r[(i, j)] -= s * v[i - k];
                }
            }
            for j in 0..nb {
                let s: f64 = (k..m).map(|i| v[i - k] * qtb[(i, j)]).sum::<f64>() * 2.0 / vnorm2;
                for i in k..m {
                    qtb[(i, j)] -= s * v[i - k];
                }
            }
        }
        if r[(k, k)].abs() <= rank_tol * scale {
            return None;
        }
    }
    let mut x = Mat::zeros(n, nb);
    for j in 0..nb {
        for k in (0..n).rev() {
            let mut s = qtb[(k, j)];
            for c in (k + 1)..n {
                s -= r[(k, c)] * x[(c, j)];
            }
            x[(k, j)] = s / r[(k, k)];
        }
    }
    let residual = a.matmul(&x).sub(b).frobenius();
    Some(LeastSquares {
        solution: x,
        residual,
    })
}

use super::Mat;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_TOL: f64 = 1e-12;

/// Eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations.
///
/// Eigenvalues are sorted in decreasing order; column `j` of `vectors` is the
/// unit eigenvector belonging to `values[j]`.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Mat,
}

impl SymEigen {
    /// Rotates until every off-diagonal magnitude is below `1e-12 · ‖M‖_F`.
    pub fn new(m: &Mat) -> Result<Self> {
        let n = m.rows();
        if m.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "eigendecomposition needs a square matrix, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let mut a = m.clone();
        // symmetrise against round-off in callers' Gram products
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (a[(i, j)] + a[(j, i)]);
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        let mut v = Mat::identity(n);
        let limit = OFF_DIAGONAL_TOL * a.frobenius();

        for _ in 0..MAX_SWEEPS {
            let mut off = 0.0f64;
            for p in 0..n {
                for q in (p + 1)..n {
                    off = off.max(a[(p, q)].abs());
                }
            }
            if off <= limit {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    if apq.abs() <= limit * 1e-3 {
                        continue;
                    }
                    let tau = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                    let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    rotate(&mut a, &mut v, p, q, c, s);
                }
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
        let values = order.iter().map(|&i| a[(i, i)]).collect();
        let vectors = v.select_cols(&order);
        Ok(Self { values, vectors })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, j: usize) -> Vec<f64> {
        self.vectors.col(j)
    }
}

// a ← Jᵀ a J and v ← v J for the plane rotation J on (p, q).
fn rotate(a: &mut Mat, v: &mut Mat, p: usize, q: usize, c: f64, s: f64) {
    let n = a.rows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(m: &Mat, e: &SymEigen) -> f64 {
        (0..e.len())
            .map(|j| {
                let x = Mat::column(&e.vector(j));
                m.matmul(&x).sub(&x.scale(e.values[j])).frobenius()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn diagonal_is_sorted() {
        let e = SymEigen::new(&Mat::diag(&[1.0, 4.0, 0.0])).unwrap();
        assert_eq!(e.values, vec![4.0, 1.0, 0.0]);
    }

    #[test]
    fn two_by_two() {
        let m = Mat::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let e = SymEigen::new(&m).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        assert!(residual(&m, &e) < 1e-13);
    }

    #[test]
    fn hilbert_residual_and_orthogonality() {
        let m = Mat::from_fn(7, 7, |i, j| 1.0 / (i + j + 1) as f64);
        let e = SymEigen::new(&m).unwrap();
        assert!(residual(&m, &e) <= 1e-8 * e.values[0].max(1.0));
        let vtv = e.vectors.gram();
        assert!(vtv.sub(&Mat::identity(7)).max_abs() < 1e-12);
        // trace is preserved
        let tr: f64 = (0..7).map(|i| m[(i, i)]).sum();
        assert!((e.values.iter().sum::<f64>() - tr).abs() < 1e-13);
    }

    #[test]
    fn rejects_rectangular() {
        assert!(SymEigen::new(&Mat::zeros(2, 3)).is_err());
    }
}

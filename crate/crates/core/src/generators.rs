//! Seeded instance generators.
//!
//! Every random quantity comes from [`PortableRng`], drawn in a fixed order:
//! the entries of `A` (Gaussian kind only, row-major), then the support of
//! `X*`, then its nonzero rows one after another.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::rng::PortableRng;
use crate::solvers::MmvProblem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    Vandermonde,
    Gaussian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub kind: MatrixKind,
    pub m: usize,
    pub n: usize,
    pub r: usize,
    /// Number of nonzero rows in the planted solution.
    pub k: usize,
    /// Vandermonde nodes; equispaced on `[−1, 1]` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<f64>>,
    pub seed: u64,
    #[serde(default = "unit")]
    pub amplitude: f64,
}

fn unit() -> f64 {
    1.0
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 || self.r == 0 {
            return Err(Error::InvalidMatrix("m, n and r must be positive".into()));
        }
        if self.k > (self.m / 2).min(self.n) {
            return Err(Error::InvalidMatrix(format!(
                "k = {} exceeds min(floor(m/2), n) = {}",
                self.k,
                (self.m / 2).min(self.n)
            )));
        }
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(Error::InvalidMatrix(format!("amplitude {} must be positive", self.amplitude)));
        }
        if let Some(nodes) = &self.nodes {
            if nodes.len() != self.n {
                return Err(Error::DimensionMismatch(format!("{} nodes for n = {}", nodes.len(), self.n)));
            }
        }
        Ok(())
    }
}

/// `n` equispaced nodes on `[−1, 1]`.
pub fn default_nodes(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    (0..n).map(|j| -1.0 + 2.0 * j as f64 / (n - 1) as f64).collect()
}

/// `m × n` Vandermonde matrix with entry `(i, j) = t_jⁱ` for `i = 0..m`; the
/// first row is all ones.
pub fn gen_vandermonde(nodes: &[f64], m: usize) -> Result<Mat> {
    if m == 0 || nodes.is_empty() {
        return Err(Error::InvalidMatrix("Vandermonde matrix needs m >= 1 and at least one node".into()));
    }
    for (i, a) in nodes.iter().enumerate() {
        if !a.is_finite() {
            return Err(Error::InvalidMatrix(format!("node {} is not finite", i + 1)));
        }
        if let Some(j) = nodes[i + 1..].iter().position(|b| b == a) {
            return Err(Error::DuplicateNodes(i + 1, i + j + 2));
        }
    }
    Ok(Mat::from_fn(m, nodes.len(), |i, j| nodes[j].powi(i as i32)))
}

/// Builds `A`, plants `X*` on a uniformly drawn support of `k` rows with
/// Gaussian entries of scale `amplitude`, and sets `B = A·X*`. Rows whose
/// norm falls below `0.1 · amplitude` are redrawn.
pub fn gen_problem(spec: &GenSpec) -> Result<MmvProblem> {
    spec.validate()?;
    let mut rng = PortableRng::new(spec.seed);
    let a = match spec.kind {
        MatrixKind::Vandermonde => {
            let nodes = spec.nodes.clone().unwrap_or_else(|| default_nodes(spec.n));
            gen_vandermonde(&nodes, spec.m)?
        }
        MatrixKind::Gaussian => Mat::from_fn(spec.m, spec.n, |_, _| rng.normal()),
    };
    let support = rng.subset(spec.n, spec.k);
    let mut x = Mat::zeros(spec.n, spec.r);
    for &i in &support {
        loop {
            let row: Vec<f64> = (0..spec.r).map(|_| spec.amplitude * rng.normal()).collect();
            if crate::linalg::norm2(&row) >= 0.1 * spec.amplitude {
                x.row_mut(i).copy_from_slice(&row);
                break;
            }
        }
    }
    let b = a.matmul(&x);
    let k = (spec.k > 0).then_some(spec.k);
    MmvProblem::new(a, b, Some(x), k)
}

//! Row-wise mixed norms, row supports and the null-space ratio `θ(p, X, S)`.
//!
//! [`mixed_norm_2p`] returns the *p-th power* `Σᵢ ‖X_row i‖₂ᵖ`, which is the
//! objective minimised by the ℓ₂,ₚ solvers. Take the `1/p` root explicitly
//! when the norm itself is wanted.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Default absolute threshold below which a row norm counts as zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-8;

/// Indices of the nonzero rows of a matrix.
///
/// Indices are stored zero-based and sorted ascending. The JSON form uses
/// one-based indices: `{"indices": [2, 5], "n": 5, "zero_tol": 1e-8}`.
#[derive(Clone, Debug, PartialEq)]
pub struct RowSupport {
    indices: Vec<usize>,
    n: usize,
    zero_tol: f64,
}

impl RowSupport {
    /// Builds a support from zero-based indices; they are sorted and deduplicated.
    pub fn new(mut indices: Vec<usize>, n: usize, zero_tol: f64) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
            return Err(Error::DomainError(format!("row index {bad} out of range 0..{n}")));
        }
        Ok(Self {
            indices,
            n,
            zero_tol,
        })
    }

    /// Zero-based row indices, ascending.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// One-based row indices, ascending.
    pub fn one_based(&self) -> Vec<usize> {
        self.indices.iter().map(|i| i + 1).collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn zero_tol(&self) -> f64 {
        self.zero_tol
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    /// Membership mask of length `n`.
    pub fn mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n];
        for &i in &self.indices {
            mask[i] = true;
        }
        mask
    }
}

#[derive(Serialize, Deserialize)]
struct RowSupportRepr {
    indices: Vec<usize>,
    n: usize,
    zero_tol: f64,
}

impl Serialize for RowSupport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        RowSupportRepr {
            indices: self.one_based(),
            n: self.n,
            zero_tol: self.zero_tol,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RowSupport {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = RowSupportRepr::deserialize(deserializer)?;
        if repr.indices.contains(&0) {
            return Err(serde::de::Error::custom("row support indices are one-based"));
        }
        RowSupport::new(
            repr.indices.iter().map(|i| i - 1).collect(),
            repr.n,
            repr.zero_tol,
        )
        .map_err(serde::de::Error::custom)
    }
}

fn check_p_open(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::DomainError(format!("p = {p} outside (0, 1]")))
    }
}

fn check_p_closed(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::DomainError(format!("p = {p} outside [0, 1]")))
    }
}

/// `‖X‖₂,ₚᵖ = Σᵢ ‖X_row i‖₂ᵖ` for `p ∈ (0, 1]` (the p-th power, not the root).
pub fn mixed_norm_2p(x: &Mat, p: f64) -> Result<f64> {
    check_p_open(p)?;
    Ok(mixed_norm_2p_unchecked(x, p))
}

pub(crate) fn mixed_norm_2p_unchecked(x: &Mat, p: f64) -> f64 {
    x.row_norms().into_iter().map(|r| r.powf(p)).sum()
}

/// Number of rows whose Euclidean norm exceeds `zero_tol`.
pub fn norm_20(x: &Mat, zero_tol: f64) -> usize {
    x.row_norms().into_iter().filter(|&r| r > zero_tol).count()
}

pub fn row_support(x: &Mat, zero_tol: f64) -> RowSupport {
    let indices = x
        .row_norms()
        .into_iter()
        .enumerate()
        .filter(|&(_, r)| r > zero_tol)
        .map(|(i, _)| i)
        .collect();
    RowSupport {
        indices,
        n: x.rows(),
        zero_tol,
    }
}

/// `Σ_{i∈S} ‖X_row i‖₂ᵖ / Σ_{j∉S} ‖X_row j‖₂ᵖ`.
///
/// At `p = 0` both sums count the rows whose norm exceeds `S.zero_tol()`.
/// Returns `+∞` for a zero denominator with a positive numerator and `0` when
/// the numerator vanishes.
pub fn theta(p: f64, x: &Mat, s: &RowSupport) -> Result<f64> {
    check_p_closed(p)?;
    if s.n() != x.rows() {
        return Err(Error::DimensionMismatch(format!(
            "support over {} rows applied to a matrix with {} rows",
            s.n(),
            x.rows()
        )));
    }
    if x.is_zero() {
        return Err(Error::DomainError("theta of the zero matrix".into()));
    }
    Ok(theta_of_norms(p, &x.row_norms(), &s.mask(), s.zero_tol()))
}

pub(crate) fn theta_of_norms(p: f64, norms: &[f64], in_s: &[bool], zero_tol: f64) -> f64 {
    // norms are divided by the largest one first, so scaling X by a power of
    // two leaves every term bit-identical
    let top = norms.iter().fold(0.0f64, |m, &r| m.max(r));
    let mut num = 0.0;
    let mut den = 0.0;
    for (&r, &inside) in norms.iter().zip(in_s) {
        let term = if p == 0.0 {
            if r > zero_tol {
                1.0
            } else {
                0.0
            }
        } else if top > 0.0 {
            (r / top).powf(p)
        } else {
            0.0
        };
        if inside {
            num += term;
        } else {
            den += term;
        }
    }
    ratio(num, den)
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

/// Indices of the `k` largest entries of `norms`; equal values favour the
/// lower index. The result is sorted ascending.
pub fn top_k_rows(norms: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..norms.len()).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));
    order.truncate(k);
    order.sort_unstable();
    order
}

/// Maximum of `θ(p, X, S)` over `|S| ≤ k`, attained by the `k` rows of largest
/// norm.
pub fn theta_max_over_s(p: f64, x: &Mat, k: usize, zero_tol: f64) -> Result<(f64, RowSupport)> {
    check_p_closed(p)?;
    let n = x.rows();
    if k == 0 || k >= n {
        return Err(Error::DomainError(format!("need 1 <= k < n, got k = {k}, n = {n}")));
    }
    if x.is_zero() {
        return Err(Error::DomainError("theta of the zero matrix".into()));
    }
    let norms = x.row_norms();
    let (value, s) = theta_max_of_norms(p, &norms, k, zero_tol);
    Ok((value, RowSupport::new(s, n, zero_tol)?))
}

pub(crate) fn theta_max_of_norms(p: f64, norms: &[f64], k: usize, zero_tol: f64) -> (f64, Vec<usize>) {
    let s = top_k_rows(norms, k);
    let mut mask = vec![false; norms.len()];
    for &i in &s {
        mask[i] = true;
    }
    (theta_of_norms(p, norms, &mask, zero_tol), s)
}

//! Closed-form quantities: the sparsity limits implied by the matrix size,
//! the spectral upper bound on the null space constant, the equivalence
//! threshold `p*(A, B)`, and empirical checks of the two norm inequalities
//! those bounds rest on.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig_summary, min_norm_solution, Mat};
use crate::norms::{mixed_norm_2p_unchecked, norm_20};
use crate::rng::PortableRng;
use crate::serde_ext::ext_real_vec;

const SQRT2_PLUS_1: f64 = std::f64::consts::SQRT_2 + 1.0;

/// Everything that enters `p*(A, B)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PstarReport {
    /// `λ_max / λ_min⁺` of `AᵀA`
    pub lambda: f64,
    /// Row support size of the minimum-norm solution.
    pub s_star: usize,
    /// `⌊m/2⌋`
    pub k_bound_m: usize,
    /// `⌊(n − 2.5)/2⌋ + 1`
    pub k_bound_n: usize,
    /// `f` at `s_star`, `k_bound_m`, `k_bound_n`, in that order.
    #[serde(with = "ext_real_vec")]
    pub f_values: Vec<f64>,
    pub p_star: f64,
    /// True when no finite threshold below 1 was produced.
    pub clamped: bool,
    pub zero_tol: f64,
}

/// `f(x) = (ln(x+1) − ln x) / (ln(√2+1) + ln(λn − n − 2λ + 3) − ln 4)`.
///
/// Returns `+∞` when the denominator is not positive, and for `x = 0`.
pub fn f_threshold(x: usize, lambda: f64, n: usize) -> Result<f64> {
    if !(lambda >= 1.0) || !lambda.is_finite() {
        return Err(Error::DomainError(format!("lambda = {lambda} must be a finite value >= 1")));
    }
    let nf = n as f64;
    let arg = lambda * nf - nf - 2.0 * lambda + 3.0;
    if arg <= 0.0 {
        return Err(Error::DomainError(format!(
            "lambda*n - n - 2*lambda + 3 = {arg} is not positive (lambda = {lambda}, n = {n})"
        )));
    }
    let den = SQRT2_PLUS_1.ln() + arg.ln() - 4f64.ln();
    if den <= 0.0 || x == 0 {
        return Ok(f64::INFINITY);
    }
    let xf = x as f64;
    Ok(((xf + 1.0).ln() - xf.ln()) / den)
}

/// Largest sparsities allowed by the matrix size: `(⌊m/2⌋, ⌊(n − 2.5)/2⌋ + 1)`.
pub fn measurement_bounds(m: usize, n: usize) -> (usize, usize) {
    (m / 2, ((n as f64 - 2.5) / 2.0).floor() as usize + 1)
}

/// Threshold `p*` below which `ℓ₂,ₚ` minimisation is predicted to return the
/// `ℓ₂,₀` minimiser: `max{f(S*), f(⌊m/2⌋), f(⌊(n−2.5)/2⌋+1)}`, capped at 1.
///
/// `S*` counts the rows of `Aᵀ(AAᵀ)⁻¹B` above `zero_tol`.
pub fn pstar(a: &Mat, b: &Mat, zero_tol: f64) -> Result<PstarReport> {
    let (m, n) = a.shape();
    if m < 2 || n < 3 {
        return Err(Error::DomainError(format!("need m >= 2 and n >= 3, got {m}x{n}")));
    }
    let eig = eig_summary(a, None)?;
    let x0 = min_norm_solution(a, b, None)?;
    let s_star = norm_20(&x0, zero_tol);
    let (k_bound_m, k_bound_n) = measurement_bounds(m, n);
    let f_values = [s_star, k_bound_m, k_bound_n]
        .iter()
        .map(|&x| f_threshold(x, eig.ratio, n))
        .collect::<Result<Vec<_>>>()?;
    let best = f_values.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    Ok(PstarReport {
        lambda: eig.ratio,
        s_star,
        k_bound_m,
        k_bound_n,
        p_star: best.min(1.0),
        clamped: best > 1.0,
        f_values,
        zero_tol,
    })
}

/// Spectral upper bound on `h(p, A, r, k)`:
/// `M = [((√2+1)/2)·((λ−1)(n−2−k)/(2k) + (λ−1)/(2√k) + 1/(2k))·(k/(k+1))^{1/p}]^p`.
///
/// Algebraically `M = cᵖ·k/(k+1)` with `c` the product of the first two
/// factors, so `M` grows with `p` only when `c > 1`.
pub fn nsc_upper_bound(p: f64, n: usize, k: usize, lambda: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::DomainError(format!("p = {p} outside (0, 1]")));
    }
    if k == 0 || n <= k + 2 {
        return Err(Error::DomainError(format!("need k >= 1 and n > k + 2, got n = {n}, k = {k}")));
    }
    if !(lambda >= 1.0) || !lambda.is_finite() {
        return Err(Error::DomainError(format!("lambda = {lambda} must be a finite value >= 1")));
    }
    let (nf, kf) = (n as f64, k as f64);
    let c = 0.5 * SQRT2_PLUS_1
        * ((lambda - 1.0) * (nf - 2.0 - kf) / (2.0 * kf) + (lambda - 1.0) / (2.0 * kf.sqrt()) + 1.0 / (2.0 * kf));
    Ok((c * (kf / (kf + 1.0)).powf(1.0 / p)).powf(p))
}

/// `(‖X‖₂,ₚᵖ)^{1/p} ≤ ‖X‖₂,₀^{1/p − 1/2} · ‖X‖_F` at every `p` of the grid,
/// within `1e-10` relative slack. Compared in log space so small `p` cannot
/// overflow.
pub fn holder_check(x: &Mat, p_grid: &[f64]) -> Result<bool> {
    let count = norm_20(x, 0.0);
    if count == 0 {
        return Ok(true);
    }
    let frob = x.frobenius();
    for &p in p_grid {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::DomainError(format!("p = {p} outside (0, 1]")));
        }
        let lhs = mixed_norm_2p_unchecked(x, p).ln() / p;
        let rhs = (1.0 / p - 0.5) * (count as f64).ln() + frob.ln();
        if lhs > rhs + 1e-10f64.ln_1p() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramViolation {
    pub trial: usize,
    /// `"lower"`, `"upper"` or `"cross"`
    pub kind: String,
    pub value: f64,
    pub bound: f64,
}

/// Empirical test of `λ_min⁺‖X‖_F² ≤ ‖AX‖_F² ≤ λ_max‖X‖_F²` on matrices with
/// at most `2k` nonzero rows, and of
/// `|⟨AX₁, AX₂⟩| ≤ (λ_max − λ_min⁺)/2 · ‖X₁‖_F‖X₂‖_F` on pairs with disjoint
/// supports of at most `k` rows each.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramCheckReport {
    pub k: usize,
    pub r: usize,
    pub trials: usize,
    pub seed: u64,
    pub lambda_max: f64,
    pub lambda_min_plus: f64,
    /// Smallest and largest observed `‖AX‖_F² / ‖X‖_F²`.
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// Largest observed `|⟨AX₁, AX₂⟩| / (‖X₁‖_F‖X₂‖_F)`.
    pub cross_max: f64,
    pub cross_bound: f64,
    pub lower_violations: usize,
    pub upper_violations: usize,
    pub cross_violations: usize,
    /// The first few violations, in trial order.
    pub examples: Vec<GramViolation>,
}

const MAX_LISTED: usize = 20;
const CHECK_SLACK: f64 = 1e-12;

/// Samples `trials` random row-sparse matrices (`r` columns) and reports how
/// the Gram inequalities fare. Violations are data, not errors.
///
/// Trial `t` draws from its own stream `PortableRng::stream(seed, t)`:
/// a support size uniform in `1..=min(2k, n)`, the support, Gaussian rows,
/// and the split into alternate support entries for the disjoint pair.
pub fn gram_bounds_check(a: &Mat, k: usize, r: usize, trials: usize, seed: u64) -> Result<GramCheckReport> {
    if k == 0 || r == 0 {
        return Err(Error::DomainError("k and r must be positive".into()));
    }
    let eig = eig_summary(a, None)?;
    let n = a.cols();
    let (lo, hi) = (eig.lambda_min_plus, eig.lambda_max);
    let cross_bound = 0.5 * (hi - lo);

    let samples: Vec<(f64, Option<f64>)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = PortableRng::stream(seed, t as u64);
            let size = 1 + rng.below((2 * k).min(n));
            let rows = rng.subset(n, size);
            let mut x = Mat::zeros(n, r);
            for &i in &rows {
                for v in x.row_mut(i) {
                    *v = rng.normal();
                }
            }
            let ratio = a.matmul(&x).frobenius().powi(2) / x.frobenius().powi(2);
            let (mut x1, mut x2) = (Mat::zeros(n, r), Mat::zeros(n, r));
            for (pos, &i) in rows.iter().enumerate() {
                let target = if pos % 2 == 0 { &mut x1 } else { &mut x2 };
                target.row_mut(i).copy_from_slice(x.row(i));
            }
            let cross = (!x2.is_zero()).then(|| {
                a.matmul(&x1).inner(&a.matmul(&x2)).abs() / (x1.frobenius() * x2.frobenius())
            });
            (ratio, cross)
        })
        .collect();

    let mut rep = GramCheckReport {
        k,
        r,
        trials,
        seed,
        lambda_max: hi,
        lambda_min_plus: lo,
        ratio_min: f64::INFINITY,
        ratio_max: 0.0,
        cross_max: 0.0,
        cross_bound,
        lower_violations: 0,
        upper_violations: 0,
        cross_violations: 0,
        examples: Vec::new(),
    };
    let note = |rep: &mut GramCheckReport, trial, kind: &str, value, bound| {
        if rep.examples.len() < MAX_LISTED {
            rep.examples.push(GramViolation {
                trial,
                kind: kind.into(),
                value,
                bound,
            });
        }
    };
    for (t, (ratio, cross)) in samples.into_iter().enumerate() {
        rep.ratio_min = rep.ratio_min.min(ratio);
        rep.ratio_max = rep.ratio_max.max(ratio);
        if ratio < lo * (1.0 - CHECK_SLACK) {
            rep.lower_violations += 1;
            note(&mut rep, t, "lower", ratio, lo);
        }
        if ratio > hi * (1.0 + CHECK_SLACK) {
            rep.upper_violations += 1;
            note(&mut rep, t, "upper", ratio, hi);
        }
        if let Some(c) = cross {
            rep.cross_max = rep.cross_max.max(c);
            if c > cross_bound + CHECK_SLACK * hi {
                rep.cross_violations += 1;
                note(&mut rep, t, "cross", c, cross_bound);
            }
        }
    }
    if trials == 0 {
        rep.ratio_min = 0.0;
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;

    #[test]
    fn f_threshold_cases() {
        // λ = 1 makes the log argument 1 and the denominator negative
        assert_eq!(f_threshold(2, 1.0, 7).unwrap(), f64::INFINITY);
        let den = SQRT2_PLUS_1.ln() + 4.0f64.ln() - 4.0f64.ln();
        let want = (2f64.ln() - 1f64.ln()) / den;
        // λ = 2, n = 5: 10 − 5 − 4 + 3 = 4
        assert!((f_threshold(1, 2.0, 5).unwrap() - want).abs() < 1e-12);
        assert!(f_threshold(1, 0.5, 5).is_err());
        // λ = 10, n = 1: 10 − 1 − 20 + 3 < 0
        assert!(f_threshold(1, 10.0, 1).is_err());
    }

    #[test]
    fn measurement_bounds_arithmetic() {
        assert_eq!(measurement_bounds(4, 5), (2, 2));
        assert_eq!(measurement_bounds(6, 9), (3, 4));
        assert_eq!(measurement_bounds(2, 3), (1, 1));
    }

    #[test]
    fn upper_bound_hand_value() {
        let m = nsc_upper_bound(1.0, 4, 1, 1.0).unwrap();
        assert!((m - SQRT2_PLUS_1 / 8.0).abs() < 1e-12);
        assert!(nsc_upper_bound(0.5, 5, 2, 3.0).unwrap() > nsc_upper_bound(0.5, 5, 2, 2.0).unwrap());
        assert!(nsc_upper_bound(0.5, 4, 2, 2.0).is_err());
    }

    #[test]
    fn example2_threshold() {
        let prob = examples::example2();
        let rep = pstar(&prob.a, &prob.b, 1e-8).unwrap();
        assert_eq!(rep.s_star, 5);
        assert_eq!((rep.k_bound_m, rep.k_bound_n), (2, 2));
        assert!((rep.p_star - 0.8176).abs() < 5e-4, "{}", rep.p_star);
        assert!(!rep.clamped);
    }

    #[test]
    fn orthonormal_rows_clamp() {
        let a = Mat::from_rows(&[[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]]).unwrap();
        let b = Mat::from_rows(&[[1.0], [2.0]]).unwrap();
        let rep = pstar(&a, &b, 1e-8).unwrap();
        assert_eq!(rep.p_star, 1.0);
        assert!(rep.clamped);
        let text = serde_json::to_string(&rep).unwrap();
        assert_eq!(serde_json::from_str::<PstarReport>(&text).unwrap(), rep);
    }

    #[test]
    fn holder_tight_cases() {
        let one_row = Mat::from_rows(&[[0.0, 0.0], [3.0, 4.0], [0.0, 0.0]]).unwrap();
        assert!(holder_check(&one_row, &[0.1, 0.5, 1.0]).unwrap());
        let equal = Mat::from_rows(&[[1.0, 0.0], [0.0, 1.0], [0.6, 0.8]]).unwrap();
        assert!(holder_check(&equal, &[0.2, 1.0]).unwrap());
        assert!(holder_check(&equal, &[0.0]).is_err());
    }

    #[test]
    fn gram_check_identity() {
        let rep = gram_bounds_check(&Mat::identity(6), 2, 2, 200, 4).unwrap();
        assert_eq!(rep.lower_violations + rep.upper_violations + rep.cross_violations, 0);
        assert!(rep.cross_max < 1e-15);
        assert!((rep.ratio_min - 1.0).abs() < 1e-12 && (rep.ratio_max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gram_check_is_reproducible() {
        let a = examples::example2().a;
        let one = gram_bounds_check(&a, 2, 2, 300, 8).unwrap();
        let two = gram_bounds_check(&a, 2, 2, 300, 8).unwrap();
        assert_eq!(one, two);
        assert!(one.ratio_max <= one.lambda_max * (1.0 + 1e-12));
    }
}

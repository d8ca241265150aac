//! Joint sparse recovery from multiple measurement vectors.
//!
//! Given `A` (m×n) and `B` (m×r), look for the solution of `AX = B` with the
//! fewest nonzero rows. The crate provides:
//!
//! * [`linalg`]: the dense linear algebra underneath (Jacobi eigensolver,
//!   null spaces, minimum-norm solutions);
//! * [`norms`]: the mixed norms `‖X‖₂,₀`, `‖X‖₂,ₚᵖ` and the ratio `θ`;
//! * [`solvers`]: exact `ℓ₂,₀` enumeration and two `ℓ₂,ₚ` minimisers;
//! * [`nsc`]: the null space constant `h(p, A, r, k)` and the spark;
//! * [`bounds`]: closed-form thresholds and inequality checks;
//! * [`generators`]: seeded test instances.

pub mod bounds;
pub mod error;
pub mod examples;
pub mod generators;
pub mod linalg;
pub mod norms;
pub mod nsc;
pub mod rng;
pub mod serde_ext;
pub mod solvers;

mod search;

pub use bounds::{
    f_threshold, gram_bounds_check, holder_check, measurement_bounds, nsc_upper_bound, pstar, GramCheckReport,
    PstarReport,
};
pub use error::{Error, Result};
pub use generators::{gen_problem, gen_vandermonde, GenSpec, MatrixKind};
pub use linalg::{eig_summary, min_norm_solution, nullspace_basis, EigSummary, Mat, NullspaceBasis};
pub use norms::{mixed_norm_2p, norm_20, row_support, theta, theta_max_over_s, RowSupport};
pub use nsc::{max_recoverable_k, nsc_curve, nsc_estimate, spark, NscEstimate, NscOptions};
pub use rng::PortableRng;
pub use solvers::{
    check_equivalence, irls_solve, l20_solve, nullspace_solve, DescentOptions, EquivalenceOptions,
    EquivalenceReport, IrlsOptions, L20Options, Method, MmvProblem, SolverOutcome, SparseSolution,
};

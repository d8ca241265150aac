//! Fixed instances shared by the benchmarks in `benches/`.

use jointsparse::{gen_problem, GenSpec, Mat, MatrixKind, MmvProblem, PortableRng};

/// Gaussian `m×n` problem with a planted `k`-row solution, planted matrix
/// removed so no solver can start from it.
pub fn gaussian_problem(m: usize, n: usize, r: usize, k: usize, seed: u64) -> MmvProblem {
    let spec = GenSpec {
        kind: MatrixKind::Gaussian,
        m,
        n,
        r,
        k,
        nodes: None,
        seed,
        amplitude: 1.0,
    };
    let mut prob = gen_problem(&spec).expect("valid spec");
    prob.planted = None;
    prob
}

pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> Mat {
    let mut rng = PortableRng::new(seed);
    Mat::from_fn(rows, cols, |_, _| rng.normal())
}

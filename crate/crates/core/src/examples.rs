//! The two worked examples, shipped as data files.
//!
//! `example1` is the joint versus column-wise sparsity demonstration: the
//! columns of `B` have 2-sparse solutions on different supports, while the
//! sparsest joint solution uses only 3 rows. As originally printed its
//! solution vectors had 4 entries against 5 columns of `A`; the file uses the
//! consistent 5-row reconstruction.
//!
//! `example2` is a 4×5 system with a one-dimensional null space whose unique
//! sparsest solution is supported on rows 2 and 5.

use crate::solvers::MmvProblem;

pub const EXAMPLE1_JSON: &str = include_str!("../data/example1.json");
pub const EXAMPLE2_JSON: &str = include_str!("../data/example2.json");

pub fn example1() -> MmvProblem {
    MmvProblem::from_json(EXAMPLE1_JSON).expect("bundled example1 is valid")
}

pub fn example2() -> MmvProblem {
    MmvProblem::from_json(EXAMPLE2_JSON).expect("bundled example2 is valid")
}

/// Looks an example up by name (`example1` or `example2`).
pub fn by_name(name: &str) -> Option<MmvProblem> {
    match name {
        "example1" => Some(example1()),
        "example2" => Some(example2()),
        _ => None,
    }
}

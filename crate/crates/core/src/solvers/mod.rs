//! Polynomial-time recovery algorithms for the noiseless models.

mod f2;
mod lattice;
mod path;

pub use f2::{f2_solve, F2Solution, F2SolutionKind};
pub use lattice::{
    lll_reduce, lll_reduce_with, lll_subset_sum, subset_sum_basis, LllConfig, Rational,
};
pub use path::{bfs_distances, shortest_path, shortest_path_between};

//! Exact linear algebra: rank, echelon forms, nullspaces and linear
//! programming. Every identifiability decision in the crate goes through
//! this module with rational scalars.

mod bareiss;
mod echelon;
mod matrix;
mod simplex;

pub use bareiss::{bareiss_rank, exact_rank};
pub use echelon::{
    nullspace, nullspace_vectors, positive_primitive, primitive_integer_vector, rank, rref, solve,
    NullspaceBasis, Rref,
};
pub use matrix::{dot, is_zero_vec, Matrix};
pub use simplex::{solve_lp, LpProblem, LpSolution, LpStatus, Sense};

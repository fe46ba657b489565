//! Forward-backward splitting for monotone inclusions `0 ∈ Ax + Bx` in ℝⁿ,
//! where `A` is maximal monotone (given through metric resolvents / proximity
//! operators) and `B` is cocoercive.
//!
//! The iteration supports a variable metric `U_k`, variable step sizes `γ_k`,
//! over-relaxation `λ_k` beyond 1, and summable error sequences, together with
//! schedule validators for the admissibility conditions, problem builders
//! (L1-constrained least squares, variational inequalities, constrained
//! minimization, split feasibility), and seeded instance generators.

pub mod linops;
pub mod operators;
pub mod problems;
pub mod rng;
pub mod solver;

mod error;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;

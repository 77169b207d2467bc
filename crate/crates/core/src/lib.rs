//! Integer linear programming toolkit: models, an LP reader and writer, a
//! dense simplex, branch and bound, puzzle models and tour art.

pub mod bnb;
pub mod ilp;
pub mod lp_io;
pub mod puzzles;
pub mod scalar;
pub mod simplex;
pub mod tsp_art;

pub use bnb::{enumerate_optimal, solve, Solution, SolveConfig, SolveStatus};
pub use ilp::{LinExpr, Model, ObjectiveSense, Sense, VarId, VarKind};
pub use lp_io::{parse_lp, write_lp};

/// Standard form in double precision, the default.
pub type StandardForm64 = simplex::StandardForm<f64>;
/// Standard form in single precision.
pub type StandardForm32 = simplex::StandardForm<f32>;

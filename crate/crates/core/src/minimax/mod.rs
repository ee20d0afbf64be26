//! Relaxed minimax inequalities for bifunctions that are affine in a
//! simplex variable, exact simplex dualization, monotone-sequence identities
//! and the marginal-function check.

pub mod duality;
pub mod family;
pub mod grid;
pub mod lp;
pub mod marginal;
pub mod monotone;
pub mod simplex;
pub mod verify;

pub use duality::{
    dual_objective, grid_dual, lp_dual, rhs_value, simplex_duality, DualMode, DualSolution, DualityReport,
    VerifyOptions,
};
pub use family::{classify, classify_a0, classify_a1, BifunctionFamily, ClassMode, Classification, Subset};
pub use grid::BifunctionGrid;
pub use marginal::{default_dual_axis, marginal_check, MarginalReport};
pub use monotone::{monotone_minimax, FunctionSequence, MonotoneReport};
pub use simplex::SimplexPoint;
pub use verify::{interior_equality, lhs_value, verify_localized, verify_mm1, verify_mmb, LhsValue, MinimaxReport};

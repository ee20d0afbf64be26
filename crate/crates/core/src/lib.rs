//! Extended-real convex analysis on piecewise-linear functions of one
//! variable, with checkers for relaxed minimax inequalities over simplex
//! families.

pub mod conjugate;
pub mod error;
pub mod extreal;
pub mod funcrep;
pub mod harness;
pub mod minimax;
pub(crate) mod par;
pub mod status;
pub mod subdiff;

pub use error::{Error, Result};
pub use extreal::{ExtReal, NonNegative, DEFAULT_TOL};
pub use funcrep::{GridFunction, Interval, PwlFunction};
pub use status::Status;

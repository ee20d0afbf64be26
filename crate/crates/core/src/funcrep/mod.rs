//! Piecewise-linear extended-real functions on the line and sampled grid
//! functions.

mod grid;
mod hull;
mod ops;
mod pwl;

pub use grid::{linspace, GridFunction};
pub use ops::{pointwise_max, pointwise_min, sum, weighted_sum, Infimum, SLOPE_EPS};
pub use pwl::{merge_breakpoints, Interval, PwlFunction, Segment, Tail, MERGE_TOL};
pub(crate) use pwl::{Element, Piece};

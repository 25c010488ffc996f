//! Exact optimization and online simulation for moving facilities on a line.
//!
//! A problem instance fixes `K` facility start positions and `T` stages of
//! agent positions; a schedule places all facilities at every stage and pays
//! for facility movement plus each agent's distance to its nearest facility.
//! Everything here computes with arbitrary-precision rationals, so equality
//! claims between independently computed optima are checked exactly, never
//! within a tolerance:
//!
//! - [`lp`] builds the linear relaxation over the instance's coordinate
//!   nodes and solves it with an exact two-phase simplex.
//! - [`rounding`] extracts an integral schedule from a fractional solution
//!   without increasing its cost (prefix-mass and leftmost-support rules).
//! - [`oracle`] finds optimal schedules independently by dynamic
//!   programming, and by full enumeration as a second witness.
//! - [`online`] simulates the two-facility online algorithm, which sees each
//!   stage only when it arrives.
//! - [`analysis`] verifies, inequality by inequality, the potential-function
//!   argument that the online algorithm is constant-competitive.
//! - [`generate`] derives reproducible random instances from seeds.

pub mod analysis;
pub mod generate;
pub mod instance;
pub mod lp;
pub mod online;
pub mod oracle;
pub mod path;
pub mod rational;
pub mod rounding;

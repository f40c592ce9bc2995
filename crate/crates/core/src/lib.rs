//! Rigorous lower and upper expectation bounds of a bounded function under
//! p-box uncertainty: closed-form extremizing constructions, discretized
//! linear programming, and random-set discretizations, with conditioning on
//! interval events.
//!
//! The p-box is a pair of CDFs `F_lower <= F_upper`; the credal set holds
//! every distribution between them. Lower and upper expectations are the
//! extremes of the expectation of `h` over that set. Three engines compute
//! them and audit each other:
//!
//! - [`analytic`]: exact extremizing distributions for monotone, unimodal,
//!   and alternating-extrema objectives;
//! - [`lp`]: discretized primal/dual linear programs with gap-driven
//!   refinement;
//! - [`randomset`]: focal-element discretizations with a certified
//!   outer/inner sandwich.
//!
//! The [`oracle`] module brackets every result with a shape-free sandwich
//! and randomized member distributions.

pub mod analytic;
pub mod chain;
pub mod conditional;
pub mod error;
pub mod expr;
pub mod integrals;
pub mod lp;
pub mod numerics;
pub mod objective;
pub mod oracle;
pub mod pbox;
pub mod randomset;
pub mod result;
pub mod simplex;

pub use error::{Error, Result};
pub use numerics::Tolerance;
pub use objective::{ObjectiveFn, Shape};
pub use pbox::{CdfSpec, ConditioningEvent, Curve, PBox};
pub use result::{BoundsResult, Bracket, Enclosure, Method};

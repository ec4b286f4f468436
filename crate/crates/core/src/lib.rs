//! Exact and truncated computations for open-string vertex algebras.
//!
//! The crate has three layers:
//!
//! * exact scalar and fusion-data structures ([`scalars`], [`fusion`]) together
//!   with the structure-constant solver over them ([`solver`]),
//! * truncated graded-space instances with mode tables and axiom checkers
//!   ([`modes`]),
//! * a geometric layer of disks with strips and jets whose evaluation map is
//!   built from the mode layer ([`geom`]).
//!
//! Everything that can be exact is exact: scalars are arbitrary-precision
//! rationals or elements of Q(sqrt 2), and mode tables store rational
//! coefficients.  Floating point enters only through radius powers `r^{-n-1}`,
//! jet coefficients, and the report residuals.

pub mod fusion;
pub mod geom;
pub mod modes;
pub mod report;
pub mod scalars;
pub mod solver;

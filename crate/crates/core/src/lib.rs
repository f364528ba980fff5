//! Augmented Lagrangian methods for nonlinear conic programs
//!
//! ```text
//! min f(x)  s.t.  h(x) = 0,  g(x) ∈ K
//! ```
//!
//! where `K` is a product of nonnegative orthants, second-order cones and
//! PSD cones. Multipliers are updated either by the classic first-order
//! rule or by a generalized Newton step on the dual function, which
//! converges superlinearly near a solution.
//!
//! ```
//! use somm::multipliers::{solve, Method, SolveOptions};
//! use somm::program::builtin;
//!
//! let inst = builtin("nlp_toy").unwrap();
//! let opts = SolveOptions::with_method(Method::Second);
//! let report = solve(inst.program.as_ref(), &inst.y0, inst.reference.as_ref(), &opts).unwrap();
//! assert!(report.converged());
//! assert!(report.outer_iterations() <= 3);
//! ```

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod aug_lagrangian;
pub mod cones;
pub mod diagnostics;
pub mod error;
pub mod linalg;
pub mod multipliers;
pub mod par;
pub mod program;
pub mod report;

pub use error::{Error, Result};

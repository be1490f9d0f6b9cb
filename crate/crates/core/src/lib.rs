//! Isometries of the quadratic form of signature (n,2), AdS quasi-Fuchsian
//! group constructions, their proximal limit sets on the Einstein-universe
//! boundary, and numerical diagnostics separating Fuchsian groups from
//! Zariski-dense ones.

// `!(x > t)` deliberately treats NaN as failing the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod element;
pub mod error;
pub mod exec;
pub mod form;
pub mod graph;
pub mod groups;
pub mod limit_set;
pub mod linalg;
pub mod presentation;
pub mod rigidity;
pub mod tol;
pub mod words;

pub use error::{Error, Result};
pub use exec::Exec;

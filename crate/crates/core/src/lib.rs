//! Blends and alloys of finite-dimensional C*-algebras, realized with dense complex matrices.
//!
//! The crate builds concrete *-algebras inside `M_n(C)`, decides blend and alloy
//! status by rank computations, extracts the intrinsic data of two-point alloys,
//! and runs the crossed-product round trip, the non-strict family of projections
//! and finite commuting squares with their Jones projections.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod matalg;
pub mod blendcheck;
pub mod intrinsic;
pub mod condexp;
pub mod autopolar;
pub mod crossedz2;
pub mod nonstrict;
pub mod jones;
pub mod random;
pub mod report;
pub mod suites;

pub use error::{Error, Result};

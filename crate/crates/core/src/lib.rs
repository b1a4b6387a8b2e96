//! Extrinsic geometry of parametric submanifolds of Euclidean space.
//!
//! An [`Immersion`] is a chart map `f: U ⊂ Rᵐ → Rⁿ` written as expressions in
//! `u1..um`. From it the crate computes frames, the second fundamental form,
//! shape operators and the normal connection exactly through second-order
//! jets, and builds numeric checks of helix-submanifold theory on top:
//! helix angles, helix-direction search, helix lines and their Frenet data,
//! and verifiers that report hypothesis and conclusion residuals.

// `!(a < b)` is used on purpose: NaN must take the failing branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod cli;
pub mod connection;
pub mod curves;
pub mod error;
pub mod expr;
pub mod helix;
pub mod linalg;
pub mod manifold;
pub mod theorems;

pub use error::{Error, Result};
pub use manifold::{Domain, Frame, Grid, Immersion, LocalGeometry};

//! Minkowski-norm calculus and sub-Finsler Baouendi-Grushin operators, with
//! pointwise verification of their explicit Yamabe-type and fundamental
//! solutions.

// Negated comparisons are how NaN parameters get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod energy;
pub mod error;
pub mod gauge;
pub mod jets;
pub mod norms;
pub mod operators;
mod optimize;
pub mod report;
pub mod sampling;
pub mod solutions;

pub use error::{Error, Result};
pub use gauge::{dilate, GaugePair, GrushinParams, Point, ThetaDualField};
pub use jets::{fd_jet2, jet1_eval, jet2_eval, Jet1, Jet2, Profile, Scalar, ScalarField};
pub use norms::{NormFamily, NormSpec};
pub use optimize::DualSolverConfig;
pub use operators::OperatorContext;
pub use report::{Residual, ResidualReport, Summary};

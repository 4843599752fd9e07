//! Numerical Finsler geometry built on truncated Taylor-jet automatic
//! differentiation: the Cartan connection apparatus of a metric L, the
//! beta-conformal change `Lbar = e^sigma L + beta`, the closed-form difference
//! tensor between the two Cartan connections, and the oracle suites that
//! verify every identity at sampled points.
//!
//! The crate is `no_std` (alloc required); IO, file formats and the CLI live
//! in the companion `finslerlab` crate.

#![no_std]
#![allow(clippy::needless_range_loop)]
// `!(x > 0.0)` deliberately treats NaN as a failure.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod catalog;
pub mod change;
pub mod geometry;
pub mod jet;
pub mod math;
pub mod tensor;
pub mod verify;

pub use catalog::{CovectorField, FieldSpec, MetricSpec, RiemannianBase, ScalarField};
pub use change::{ChangeError, ChangeFields, ChangeFrame};
pub use geometry::{Frame, GeomError, PointState};
pub use jet::{Jet, JetContext, JetError, Var, DEFAULT_ORDER};

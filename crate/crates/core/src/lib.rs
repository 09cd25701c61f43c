//! Hessian-metric geometry of transmission-line components.
//!
//! The effective power delivered through a line is a smooth function of its
//! resistance, inductance and capacitance. Its Hessian is used as a
//! (generally indefinite) metric on parameter space; signs of the metric's
//! leading minors and the behaviour of its scalar curvature classify a line
//! as reliable or voltage-stable.
//!
//! * [`fd`], [`field`], [`metric`], [`curvature`]: generic numerics.
//! * [`lr`]: resistive-inductive lines.
//! * [`lcr`]: lines with a capacitive element.
//! * [`network`]: case files, bus power and block-diagonal bus metrics.
//! * [`verify`]: comparison against published reference tables.

// `!(x > 0.0)` style tests are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod curvature;
pub mod error;
pub mod fd;
pub mod field;
pub mod lcr;
pub mod lr;
pub mod metric;
pub mod network;
pub mod verify;

pub use error::{Error, Result};

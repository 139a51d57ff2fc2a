//! Wind-aware trajectory planning for a planar UAV.
//!
//! A physics-informed network planner ([`pinn`]) is compared against a
//! wind-aware grid A* ([`astar`]) and a kinodynamic RRT* ([`kinorrt`]) using
//! the metrics in [`metrics`].

// `!(x > 0.0)` is used throughout to reject NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod astar;
pub mod cli;
pub mod diffnet;
pub mod dynamics;
pub mod environment;
pub mod error;
pub mod kinorrt;
pub mod metrics;
pub mod pinn;
pub mod settings;
pub mod spline;
pub mod svg;
pub mod trajectory;

pub use error::{Error, Result};

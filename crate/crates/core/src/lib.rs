//! Monotone rearrangements, polar factorisations and polar inclusions of
//! sampled vector-valued maps.
//!
//! Everything is discrete: measures are finite weighted point sets, maps are
//! sampled at their support points, and the quadratic-cost transport problem
//! c(x, y) = |u(x) − y|²/2 is solved exactly. An optimal plan together with
//! the potential ψ(y) = |y|²/2 − φ(y) recovered from its Kantorovich duals is
//! certified through Fenchel–Young equalities ψ*(u(x)) + ψ(y) − u(x)·y = 0 on
//! the plan's support.

pub mod cli;
pub mod convex;
pub mod error;
pub mod io;
pub mod measures;
pub mod polar;
pub mod rearrangement;
pub mod transport;

pub use error::{Error, Result};

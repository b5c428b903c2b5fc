//! Exterior algebra of double forms, Gauss-Bonnet curvatures, Einstein-Lovelock
//! tensors, generalized Newton transformations and the conformal operators of
//! the `h_4`-Yamabe problem, with numerical verification of the identities
//! relating them.

pub mod chart;
pub mod curvinv;
pub mod dfalg;
pub mod error;
pub mod exec;
pub mod exprlang;
pub mod models;
pub mod verify;

pub use error::{Error, Result};

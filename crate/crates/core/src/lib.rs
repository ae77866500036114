//! DSC discretization of Burgers' equation with conjugated filter
//! oscillation reduction (CFOR).
//!
//! The pieces, bottom up: [`kernels`] samples the regularized Shannon
//! kernel and its derivatives, [`grid`] applies them on a uniform grid,
//! [`solver`] integrates in time, [`wavelet`] measures oscillatory content
//! and [`cfor`] filters when it jumps. [`exact`] holds Cole's solution for
//! checking the smooth regime; [`config`] and [`scenario`] back the `cfor`
//! binary.

pub mod cfor;
pub mod config;
pub mod error;
pub mod exact;
pub mod grid;
pub mod kernels;
pub mod scenario;
pub mod solver;
pub mod spectrum;
pub mod wavelet;

pub use error::{Error, Result};

//! Entanglement certification from antidiagonal density-matrix elements.
//!
//! Modules, bottom up: dense matrices ([`qmat`]), splits and solution sets
//! ([`partitions`]), operator families and settings ([`observables`]), state
//! constructors and noise ([`states`]), separability criteria ([`criteria`]),
//! noise thresholds ([`robustness`]) and split classification ([`classify`]).

pub mod classify;
pub mod criteria;
pub mod observables;
pub mod partitions;
pub mod qmat;
pub mod robustness;
pub mod sampling;
pub mod states;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

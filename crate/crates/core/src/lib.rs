//! Best-response dynamics for spatial public goods games with defectors,
//! hypocritical players and cooperators, plus the two-order punishment model
//! that reduces to it.

pub mod analysis;
pub mod cli;
pub mod dynamics;
pub mod experiments;
pub mod graph;
pub mod model;
pub mod verify;

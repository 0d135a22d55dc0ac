//! Equilibrium states of the free Bose gas: fugacity, critical density and
//! quasi-free states.

mod critical;
mod cutdown;
mod fugacity;
mod state;

pub use critical::*;
pub use cutdown::*;
pub use fugacity::*;
pub use state::*;

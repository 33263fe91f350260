//! Shipboard microgrid model: two synchronous generators with saturated
//! AVRs and one induction-motor propulsion drive on a common bus.

pub mod closed_loop;
pub mod linearize;
pub mod machines;
pub mod network;
pub mod params;
pub mod state;
pub mod steady;

//! Linear bound propagation over the closed-loop graph.

pub mod bilinear;
pub mod bounds;
pub mod certificate;
pub mod dual_relu;
pub mod forward;
pub mod verify;

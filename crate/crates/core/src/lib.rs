//! Closed-form output bounds for neural excitation controllers embedded in
//! a shipboard microgrid, checked against a seeded Monte Carlo oracle.

pub mod error;
pub mod graph;
pub mod interval;
pub mod neural;
pub mod oracle;
pub mod propagation;
pub mod smg;

pub use error::{Error, Result};
pub use graph::{ClosedLoopGraph, GraphMeta, Node};
pub use interval::{DisturbanceBox, Interval};
pub use neural::mlp::{
    generate_controller, load_controller, save_controller, GeneratorSpec, HiddenActivation, MlpController,
};
pub use neural::relax::{activation_relaxation, Activation, ActivationRelaxation};
pub use propagation::bilinear::BilinearMode;
pub use propagation::bounds::LinearBounds;
pub use propagation::certificate::VerificationCertificate;
pub use propagation::verify::{verify, verify_with, VerifyOptions};
pub use smg::closed_loop::{assemble_closed_loop, AssembledLoop};
pub use smg::params::SmgParams;
pub use smg::steady::{find_steady_state, OperatingPoint};

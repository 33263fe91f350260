//! Monte Carlo reference bounds and their comparison with certificates.

pub mod compare;
pub mod mc;
pub mod report;
pub mod sweep;

pub use compare::{compare, ChannelComparison, ComparisonReport};
pub use mc::{mc_bounds, EmpiricalBounds, McConfig, SamplingLaw};
pub use sweep::{sweep, widths_monotone, SweepRow};

//! Relaxation of the saturation `ReLU(z) - ReLU(z - E_max)`.

use crate::error::Result;
use crate::neural::relax::{activation_relaxation, Activation, ActivationRelaxation};

/// Relaxes both ReLU branches on their shifted intervals and combines them
/// with weights `+1` and `-1`: the lower line is the first branch's lower
/// line minus the second branch's upper line, and vice versa.
pub fn dual_relu_relax(l: f64, u: f64, e_max: f64) -> Result<ActivationRelaxation> {
    let a = activation_relaxation(Activation::Relu, l, u)?;
    let b = activation_relaxation(Activation::Relu, l - e_max, u - e_max)?;
    // second branch as a function of z: slope·(z - E_max) + intercept
    let shift = |slope: f64, intercept: f64| intercept - slope * e_max;
    Ok(ActivationRelaxation {
        lower_slope: a.lower_slope - b.upper_slope,
        lower_intercept: a.lower_intercept - shift(b.upper_slope, b.upper_intercept),
        upper_slope: a.upper_slope - b.lower_slope,
        upper_intercept: a.upper_intercept - shift(b.lower_slope, b.lower_intercept),
    })
}

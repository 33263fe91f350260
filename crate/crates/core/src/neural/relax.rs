//! Scalar activations and their linear relaxations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Identity,
    Relu,
    Tanh,
}

impl Activation {
    pub fn eval(self, z: f64) -> f64 {
        match self {
            Activation::Identity => z,
            Activation::Relu => {
                if z > 0.0 {
                    z
                } else {
                    0.0
                }
            }
            Activation::Tanh => z.tanh(),
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            Activation::Identity => 0,
            Activation::Relu => 1,
            Activation::Tanh => 2,
        }
    }
}

fn tanh_slope(z: f64) -> f64 {
    let t = z.tanh();
    1.0 - t * t
}

/// Pair of lines bracketing a scalar function on an interval:
/// `lower_slope·z + lower_intercept ≤ σ(z) ≤ upper_slope·z + upper_intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActivationRelaxation {
    pub lower_slope: f64,
    pub lower_intercept: f64,
    pub upper_slope: f64,
    pub upper_intercept: f64,
}

impl ActivationRelaxation {
    pub const IDENTITY: Self = Self::line(1.0, 0.0);
    pub const ZERO: Self = Self::line(0.0, 0.0);

    /// Both sides equal to one line.
    pub const fn line(slope: f64, intercept: f64) -> Self {
        Self {
            lower_slope: slope,
            lower_intercept: intercept,
            upper_slope: slope,
            upper_intercept: intercept,
        }
    }

    /// Line with `slope` through `(z, value)`.
    fn through(slope: f64, z: f64, value: f64) -> (f64, f64) {
        (slope, value - slope * z)
    }

    pub fn lower(&self, z: f64) -> f64 {
        self.lower_slope * z + self.lower_intercept
    }

    pub fn upper(&self, z: f64) -> f64 {
        self.upper_slope * z + self.upper_intercept
    }

    /// Largest `upper(z) - lower(z)` over `[l, u]` (attained at an endpoint).
    pub fn max_gap(&self, l: f64, u: f64) -> f64 {
        f64::max(self.upper(l) - self.lower(l), self.upper(u) - self.lower(u))
    }
}

/// Sound linear relaxation of `kind` on `[l, u]`.
///
/// ReLU uses the triangle upper line and an area-minimizing lower slope
/// (slope 1 when `u ≥ -l`, else 0). Tanh takes the secant on the side where
/// the function bends away from it, and on the other side the tangent at the
/// endpoint with the smaller derivative; across zero both sides use that
/// slope, through opposite endpoints.
pub fn activation_relaxation(kind: Activation, l: f64, u: f64) -> Result<ActivationRelaxation> {
    if l.is_nan() || u.is_nan() || l > u {
        return Err(Error::InvalidInterval { lower: l, upper: u });
    }
    Ok(match kind {
        Activation::Identity => ActivationRelaxation::IDENTITY,
        Activation::Relu => relu_relaxation(l, u),
        Activation::Tanh => tanh_relaxation(l, u),
    })
}

fn relu_relaxation(l: f64, u: f64) -> ActivationRelaxation {
    if l >= 0.0 {
        return ActivationRelaxation::IDENTITY;
    }
    if u <= 0.0 {
        return ActivationRelaxation::ZERO;
    }
    let slope = u / (u - l);
    let alpha = if u >= -l { 1.0 } else { 0.0 };
    ActivationRelaxation {
        lower_slope: alpha,
        lower_intercept: 0.0,
        upper_slope: slope,
        upper_intercept: -l * slope,
    }
}

fn tanh_relaxation(l: f64, u: f64) -> ActivationRelaxation {
    let (sl, su) = (l.tanh(), u.tanh());
    if l == u {
        let (k, b) = ActivationRelaxation::through(tanh_slope(l), l, sl);
        return ActivationRelaxation::line(k, b);
    }
    let secant = ActivationRelaxation::through((su - sl) / (u - l), l, sl);
    // the smaller endpoint derivative bounds the slope on all of [l, u]
    let flat = f64::min(tanh_slope(l), tanh_slope(u));
    let ((ls, li), (us, ui)) = if l >= 0.0 {
        (secant, ActivationRelaxation::through(flat, u, su))
    } else if u <= 0.0 {
        (ActivationRelaxation::through(flat, l, sl), secant)
    } else {
        (
            ActivationRelaxation::through(flat, l, sl),
            ActivationRelaxation::through(flat, u, su),
        )
    };
    ActivationRelaxation {
        lower_slope: ls,
        lower_intercept: li,
        upper_slope: us,
        upper_intercept: ui,
    }
}

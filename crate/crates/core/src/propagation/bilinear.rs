//! McCormick envelope of `z = x·y` over a box.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;

/// Plane `a·x + b·y + c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Plane {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.a * x + self.b * y + self.c
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McCormick {
    pub under: [Plane; 2],
    pub over: [Plane; 2],
}

impl McCormick {
    pub fn lower(&self, x: f64, y: f64) -> f64 {
        f64::max(self.under[0].eval(x, y), self.under[1].eval(x, y))
    }

    pub fn upper(&self, x: f64, y: f64) -> f64 {
        f64::min(self.over[0].eval(x, y), self.over[1].eval(x, y))
    }
}

/// How bilinear products are handled during propagation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BilinearMode {
    /// Sound McCormick planes.
    #[default]
    McCormick,
    /// Narrower factor frozen at its midpoint. Not sound in general.
    FrozenFactor,
}

pub fn mccormick_bilinear(x: Interval, y: Interval) -> Result<McCormick> {
    for iv in [x, y] {
        if !iv.is_finite() {
            return Err(Error::InvalidInterval {
                lower: iv.lo,
                upper: iv.hi,
            });
        }
    }
    let (xl, xu, yl, yu) = (x.lo, x.hi, y.lo, y.hi);
    let plane = |a: f64, b: f64, c: f64| Plane { a, b, c };
    Ok(McCormick {
        under: [plane(yl, xl, -xl * yl), plane(yu, xu, -xu * yu)],
        over: [plane(yu, xl, -xl * yu), plane(yl, xu, -xu * yl)],
    })
}

//! Closed real intervals and axis-aligned boxes.
//!
//! Boxes are the set representation used for disturbances and for the
//! per-node annotations produced by the forward interval pass.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed interval `[lo, hi]` over the reals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::InvalidInterval {
                lower: lo,
                upper: hi,
            });
        }
        Ok(Self { lo, hi })
    }

    pub const fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    /// Interval spanning both values regardless of order.
    pub fn hull_of(a: f64, b: f64) -> Self {
        Self {
            lo: a.min(b),
            hi: a.max(b),
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_within(&self, x: f64, tol: f64) -> bool {
        self.lo - tol <= x && x <= self.hi + tol
    }

    /// `self ⊆ other` with slack `tol` on both edges.
    pub fn subset_of(&self, other: &Interval, tol: f64) -> bool {
        other.lo - tol <= self.lo && self.hi <= other.hi + tol
    }

    pub fn hull(&self, other: &Interval) -> Self {
        Self {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// Intersection, or `None` when disjoint.
    pub fn intersect(&self, other: &Interval) -> Option<Self> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Self { lo, hi })
    }

    pub fn include(&mut self, x: f64) {
        self.lo = self.lo.min(x);
        self.hi = self.hi.max(x);
    }

    /// `a + b * self`, exact hull of the endpoint images.
    pub fn affine(&self, a: f64, b: f64) -> Self {
        Self::hull_of(a + b * self.lo, a + b * self.hi)
    }

    /// Image under a monotone function, evaluated at the endpoints.
    pub fn monotone_image(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::hull_of(f(self.lo), f(self.hi))
    }

    pub fn add(&self, other: &Interval) -> Self {
        Self {
            lo: self.lo + other.lo,
            hi: self.hi + other.hi,
        }
    }

    pub fn scale(&self, k: f64) -> Self {
        self.affine(0.0, k)
    }

    /// Product of two intervals.
    pub fn mul(&self, other: &Interval) -> Self {
        let c = [
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        ];
        Self {
            lo: c.iter().copied().fold(f64::INFINITY, f64::min),
            hi: c.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{:.6}, {:.6}]", self.lo, self.hi)
    }
}

/// Exact hull of `f` over the corners of a product of intervals.
///
/// Valid as an exact image when `f` is monotone in each argument separately,
/// which holds for every affine-per-argument expression in the machine models.
pub fn corner_hull<const N: usize>(args: [Interval; N], f: impl Fn([f64; N]) -> f64) -> Interval {
    let mut out = Interval {
        lo: f64::INFINITY,
        hi: f64::NEG_INFINITY,
    };
    for mask in 0..(1usize << N) {
        let mut x = [0.0; N];
        for (i, iv) in args.iter().enumerate() {
            x[i] = if mask >> i & 1 == 1 { iv.hi } else { iv.lo };
        }
        out.include(f(x));
    }
    out
}

/// Axis-aligned disturbance box `center ± radius`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisturbanceBox {
    pub center: Vec<f64>,
    pub radius: Vec<f64>,
}

impl DisturbanceBox {
    pub fn new(center: Vec<f64>, radius: Vec<f64>) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::InvalidParameter {
                field: "box.center".into(),
                reason: "at least one disturbance channel is required".into(),
            });
        }
        if center.len() != radius.len() {
            return Err(Error::Dimension {
                context: "disturbance box radius".into(),
                expected: center.len(),
                actual: radius.len(),
            });
        }
        for (i, (&c, &r)) in center.iter().zip(&radius).enumerate() {
            if !c.is_finite() || !r.is_finite() || r < 0.0 {
                return Err(Error::InvalidParameter {
                    field: format!("box[{i}]"),
                    reason: format!("center {c} radius {r}: need finite center and radius >= 0"),
                });
            }
        }
        Ok(Self { center, radius })
    }

    pub fn scalar(center: f64, radius: f64) -> Result<Self> {
        Self::new(vec![center], vec![radius])
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn lower(&self) -> Vec<f64> {
        self.center
            .iter()
            .zip(&self.radius)
            .map(|(c, r)| c - r)
            .collect()
    }

    pub fn upper(&self) -> Vec<f64> {
        self.center
            .iter()
            .zip(&self.radius)
            .map(|(c, r)| c + r)
            .collect()
    }

    pub fn intervals(&self) -> Vec<Interval> {
        self.center
            .iter()
            .zip(&self.radius)
            .map(|(c, r)| Interval::hull_of(c - r, c + r))
            .collect()
    }

    /// Same center with every radius multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            center: self.center.clone(),
            radius: self.radius.iter().map(|r| r * k).collect(),
        }
    }

    pub fn contains(&self, w: &[f64]) -> bool {
        w.len() == self.dim()
            && self
                .intervals()
                .iter()
                .zip(w)
                .all(|(iv, &x)| iv.contains(x))
    }

    /// All `2^d` corners of the box, in binary counting order.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        let lo = self.lower();
        let hi = self.upper();
        (0..(1usize << d))
            .map(|mask| {
                (0..d)
                    .map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] })
                    .collect()
            })
            .collect()
    }

    pub fn subset_of(&self, other: &DisturbanceBox) -> bool {
        self.dim() == other.dim()
            && self
                .intervals()
                .iter()
                .zip(other.intervals())
                .all(|(a, b)| a.subset_of(&b, 0.0))
    }
}

//! Affine enclosures of graph signals in the disturbance.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::interval::{DisturbanceBox, Interval};
use crate::neural::relax::ActivationRelaxation;

/// For each tracked signal `z_i`:
/// `γ̲_i·w + b̲_i ≤ z_i(w) ≤ γ̄_i·w + b̄_i` over the active box.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearBounds {
    pub gamma_lo: DMatrix<f64>,
    pub gamma_hi: DMatrix<f64>,
    pub b_lo: DVector<f64>,
    pub b_hi: DVector<f64>,
}

fn pos(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.map(|v| v.max(0.0))
}

fn neg(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.map(|v| v.min(0.0))
}

impl LinearBounds {
    /// `z = w` exactly.
    pub fn identity(dim: usize) -> Self {
        Self {
            gamma_lo: DMatrix::identity(dim, dim),
            gamma_hi: DMatrix::identity(dim, dim),
            b_lo: DVector::zeros(dim),
            b_hi: DVector::zeros(dim),
        }
    }

    pub fn signals(&self) -> usize {
        self.b_lo.len()
    }

    pub fn input_dim(&self) -> usize {
        self.gamma_lo.ncols()
    }

    /// Enclosure of `L z + c`: the positive part of `L` keeps each side,
    /// the negative part swaps them.
    pub fn backward_affine(&self, l: &DMatrix<f64>, c: &DVector<f64>) -> Result<Self> {
        if l.ncols() != self.signals() || c.len() != l.nrows() {
            return Err(Error::Dimension {
                context: "affine enclosure update".into(),
                expected: self.signals(),
                actual: l.ncols(),
            });
        }
        let (lp, ln) = (pos(l), neg(l));
        Ok(Self {
            gamma_lo: &lp * &self.gamma_lo + &ln * &self.gamma_hi,
            gamma_hi: &lp * &self.gamma_hi + &ln * &self.gamma_lo,
            b_lo: &lp * &self.b_lo + &ln * &self.b_hi + c,
            b_hi: &lp * &self.b_hi + &ln * &self.b_lo + c,
        })
    }

    /// Enclosure of `σ(z)` from one relaxation per signal.
    pub fn backward_activation(&self, relax: &[ActivationRelaxation]) -> Result<Self> {
        if relax.len() != self.signals() {
            return Err(Error::Dimension {
                context: "activation enclosure update".into(),
                expected: self.signals(),
                actual: relax.len(),
            });
        }
        let mut out = self.clone();
        for (i, r) in relax.iter().enumerate() {
            let (lo_g, hi_g) = (self.gamma_lo.row(i), self.gamma_hi.row(i));
            let (lo_b, hi_b) = (self.b_lo[i], self.b_hi[i]);
            let side = |slope: f64, same_g, other_g, same_b: f64, other_b: f64| {
                if slope >= 0.0 {
                    (same_g * slope, same_b * slope)
                } else {
                    (other_g * slope, other_b * slope)
                }
            };
            let (g, b) = side(r.lower_slope, lo_g, hi_g, lo_b, hi_b);
            out.gamma_lo.set_row(i, &g);
            out.b_lo[i] = b + r.lower_intercept;
            let (g, b) = side(r.upper_slope, hi_g, lo_g, hi_b, lo_b);
            out.gamma_hi.set_row(i, &g);
            out.b_hi[i] = b + r.upper_intercept;
        }
        Ok(out)
    }

    /// Exact range of the two affine sides over the box, per signal.
    pub fn concretize(&self, bx: &DisturbanceBox) -> Result<Vec<Interval>> {
        if bx.dim() != self.input_dim() {
            return Err(Error::Dimension {
                context: "concretization box".into(),
                expected: self.input_dim(),
                actual: bx.dim(),
            });
        }
        let (lo, hi) = (bx.lower(), bx.upper());
        Ok((0..self.signals())
            .map(|i| {
                let mut a = self.b_lo[i];
                let mut b = self.b_hi[i];
                for j in 0..lo.len() {
                    let gl = self.gamma_lo[(i, j)];
                    let gh = self.gamma_hi[(i, j)];
                    a += gl * if gl >= 0.0 { lo[j] } else { hi[j] };
                    b += gh * if gh >= 0.0 { hi[j] } else { lo[j] };
                }
                Interval::hull_of(a, b)
            })
            .collect())
    }
}

//! Affine model of the algebraic channel `Y ≈ M X + D W + y0`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::smg::network::solve_network;
use crate::smg::params::SmgParams;
use crate::smg::state::{SmgState, ALGEBRAIC_DIM, STATE_DIM};

/// Central-difference step for the Jacobian.
pub const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Linearization {
    /// `∂Y/∂X`, shape `ALGEBRAIC_DIM × STATE_DIM`.
    pub m: DMatrix<f64>,
    /// `∂Y/∂W`, shape `ALGEBRAIC_DIM × disturbance_dim`.
    pub d: DMatrix<f64>,
    pub y0: DVector<f64>,
    pub x_ref: DVector<f64>,
    pub w_ref: DVector<f64>,
}

impl Linearization {
    pub fn predict(&self, x: &[f64], w: &[f64]) -> DVector<f64> {
        &self.m * DVector::from_column_slice(x) + &self.d * DVector::from_column_slice(w) + &self.y0
    }
}

/// The load-torque disturbance acts on the shaft only, so the network
/// equations do not see `W` directly.
fn algebraic_map(x: &[f64], _w: &[f64], p: &SmgParams) -> Result<DVector<f64>> {
    let st = SmgState::from_slice(x)?;
    Ok(DVector::from_vec(solve_network(&st, p)?.to_vec()))
}

/// Linearizes the algebraic map at `(state, w_ref)` by central differences.
pub fn linearize_network(state: &SmgState, w_ref: &[f64], p: &SmgParams) -> Result<Linearization> {
    let x = state.to_vec();
    let wrap = |e: Error| match e {
        Error::SingularNetwork { .. } | Error::NetworkSolve { .. } => Error::SingularNetwork {
            point: x.clone(),
        },
        other => other,
    };
    let y_ref = algebraic_map(&x, w_ref, p).map_err(wrap)?;

    let mut m = DMatrix::zeros(ALGEBRAIC_DIM, STATE_DIM);
    for k in 0..STATE_DIM {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[k] += FD_STEP;
        xm[k] -= FD_STEP;
        let col = (algebraic_map(&xp, w_ref, p).map_err(wrap)?
            - algebraic_map(&xm, w_ref, p).map_err(wrap)?)
            / (2.0 * FD_STEP);
        m.set_column(k, &col);
    }
    let mut d = DMatrix::zeros(ALGEBRAIC_DIM, w_ref.len());
    for k in 0..w_ref.len() {
        let mut wp = w_ref.to_vec();
        let mut wm = w_ref.to_vec();
        wp[k] += FD_STEP;
        wm[k] -= FD_STEP;
        let col = (algebraic_map(&x, &wp, p).map_err(wrap)?
            - algebraic_map(&x, &wm, p).map_err(wrap)?)
            / (2.0 * FD_STEP);
        d.set_column(k, &col);
    }
    let x_ref = DVector::from_vec(x);
    let w_vec = DVector::from_column_slice(w_ref);
    let y0 = &y_ref - &m * &x_ref - &d * &w_vec;
    Ok(Linearization {
        m,
        d,
        y0,
        x_ref,
        w_ref: w_vec,
    })
}

/// Largest absolute gap, per algebraic component, between the exact
/// network solution and the linear model over the given sample points.
pub fn linearization_residual(
    lin: &Linearization,
    points: &[(SmgState, Vec<f64>)],
    p: &SmgParams,
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; ALGEBRAIC_DIM];
    for (st, w) in points {
        let exact = solve_network(st, p)?.to_vec();
        let approx = lin.predict(&st.to_vec(), w);
        for (k, r) in out.iter_mut().enumerate() {
            *r = f64::max(*r, (exact[k] - approx[k]).abs());
        }
    }
    Ok(out)
}

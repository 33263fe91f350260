//! Pre-shock operating point.
//!
//! The steady state is computed with zero supplementary control: both
//! generators run at synchronous speed, the motor torque balances the
//! propeller and friction torque, each exciter holds its EMF, and the
//! generators split the load by `network.sg_share`. The switchboard bus is
//! the angle reference.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::smg::machines::{avr_point, step_point};
use crate::smg::network::{solve_network_detailed, NEWTON_MAX_ITER, NEWTON_TOL};
use crate::smg::params::SmgParams;
use crate::smg::state::{AlgebraicState, ImState, SgState, SmgState};

const JACOBIAN_STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    /// Parameters with `P_m` of each generator set to balance electrical
    /// power and damping.
    pub params: SmgParams,
    pub state: SmgState,
    pub alg: AlgebraicState,
    /// Propeller coefficient in `T_L0 = k_prop ω_im²`.
    pub k_prop: f64,
    pub load_level: f64,
}

impl OperatingPoint {
    /// Largest state increment over one step with zero control and no shock.
    pub fn drift(&self) -> f64 {
        let (next, _) = step_point(
            &self.params,
            &self.state,
            &self.alg,
            [0.0; 2],
            self.k_prop,
            0.0,
        );
        next.to_vec()
            .iter()
            .zip(self.state.to_vec())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Rotor angle minus terminal voltage angle, per generator.
    pub fn load_angles(&self) -> Result<[f64; 2]> {
        let sol = solve_network_detailed(&self.state, &self.params)?;
        let j = num_complex::Complex64::i();
        let p = &self.params;
        let currents = [0, 1].map(|i| {
            let emf = num_complex::Complex64::from_polar(self.state.sg[i].e_q, self.state.sg[i].delta);
            let x = p.sg[i].x_d_prime + p.network.x_line[i];
            (emf - sol.bus) / (j * x)
        });
        Ok([0, 1].map(|i| {
            let emf = num_complex::Complex64::from_polar(self.state.sg[i].e_q, self.state.sg[i].delta);
            let vt = emf - j * p.sg[i].x_d_prime * currents[i];
            self.state.sg[i].delta - vt.arg()
        }))
    }
}

// unknowns: [δ1, δ2, e_q1', e_q2', e_d, e_q, s]
fn state_from(z: &[f64]) -> SmgState {
    SmgState {
        sg: [
            SgState {
                delta: z[0],
                omega: 1.0,
                e_q: z[2],
            },
            SgState {
                delta: z[1],
                omega: 1.0,
                e_q: z[3],
            },
        ],
        im: ImState {
            e_d: z[4],
            e_q: z[5],
            omega: 1.0 - z[6],
        },
    }
}

fn residual(p: &SmgParams, load: f64, z: &[f64]) -> Result<DVector<f64>> {
    let st = state_from(z);
    let sol = solve_network_detailed(&st, p)?;
    let a = &sol.alg;
    let c = p.constants();
    let gap = p.im.x() - p.im.x_prime();
    let k = c.c2 / c.c1;
    let s = z[6];
    let mut r = DVector::zeros(7);
    r[0] = st.im.e_d - gap * a.im.i_q - k * s * st.im.e_q;
    r[1] = st.im.e_q + gap * a.im.i_d + k * s * st.im.e_d;
    r[2] = a.im.t_e - load - p.im.k_f_im * st.im.omega;
    for i in 0..2 {
        let e_fd = avr_point(a.sg[i].v_t, 0.0, &p.avr[i]);
        r[3 + i] = e_fd - st.sg[i].e_q - (p.sg[i].x_d - p.sg[i].x_d_prime) * a.sg[i].i_d;
    }
    let total = a.sg[0].p_e + a.sg[1].p_e;
    r[5] = a.sg[0].p_e - p.network.sg_share[0] * total;
    r[6] = sol.bus.im;
    Ok(r)
}

/// Solves for the zero-control equilibrium at propeller torque `load_level`.
pub fn find_steady_state(p: &SmgParams, load_level: f64) -> Result<OperatingPoint> {
    p.validate()?;
    if !(load_level.is_finite() && load_level >= 0.0) {
        return Err(Error::InvalidParameter {
            field: "load_level".into(),
            reason: format!("{load_level} must be finite and >= 0"),
        });
    }
    let mut z = vec![0.1, 0.1, 1.1, 1.1, 0.9, -0.1, 0.01];
    let mut r = residual(p, load_level, &z)?;
    let mut history = vec![r.amax()];
    let mut iter = 0;
    while iter < NEWTON_MAX_ITER {
        if r.amax() < NEWTON_TOL * 1e-3 {
            break;
        }
        iter += 1;
        let n = z.len();
        let mut jac = DMatrix::zeros(n, n);
        for k in 0..n {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[k] += JACOBIAN_STEP;
            zm[k] -= JACOBIAN_STEP;
            let col = (residual(p, load_level, &zp)? - residual(p, load_level, &zm)?)
                / (2.0 * JACOBIAN_STEP);
            jac.set_column(k, &col);
        }
        let Some(step) = jac.lu().solve(&(-&r)) else {
            return Err(Error::SteadyState { history });
        };
        // backtracking on the residual norm
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = z.iter().zip(step.iter()).map(|(a, b)| a + t * b).collect();
            if let Ok(rt) = residual(p, load_level, &trial) {
                if rt.norm() < r.norm() {
                    z = trial;
                    r = rt;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        history.push(r.amax());
        if !accepted {
            break;
        }
    }
    if !(r.amax() <= NEWTON_TOL) {
        return Err(Error::SteadyState { history });
    }

    let state = state_from(&z);
    let sol = solve_network_detailed(&state, p)?;
    let mut params = p.clone();
    // damping acts on absolute speed, so P_m also carries D·ω at ω = 1
    for i in 0..2 {
        params.sg[i].p_m = sol.alg.sg[i].p_e + p.sg[i].d * state.sg[i].omega;
    }
    let omega_im = state.im.omega;
    if !(omega_im > 0.0) {
        return Err(Error::SteadyState { history });
    }
    Ok(OperatingPoint {
        params,
        state,
        alg: sol.alg,
        k_prop: load_level / (omega_im * omega_im),
        load_level,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nominal_steady_state_is_fixed_point() {
        let p = SmgParams::default();
        let op = find_steady_state(&p, p.sim.load_level).unwrap();
        assert!(op.drift() < 1e-8, "drift {}", op.drift());
        assert!(op.state.im.omega < 1.0, "motoring slip");
        assert!(op.alg.im.t_e > 0.0);
        for i in 0..2 {
            assert!(op.alg.sg[i].v_t > 0.8 && op.alg.sg[i].v_t < 1.0);
            let balance = op.alg.sg[i].p_e + op.params.sg[i].d;
            assert!((op.params.sg[i].p_m - balance).abs() < 1e-15);
        }
    }

    #[test]
    fn no_load_lossless_equilibrium() {
        let mut p = SmgParams::default();
        p.im.k_f_im = 0.0;
        let op = find_steady_state(&p, 0.0).unwrap();
        assert!(op.state.im.omega == 1.0 || (op.state.im.omega - 1.0).abs() < 1e-10);
        for i in 0..2 {
            assert_eq!(op.state.sg[i].omega, 1.0);
            assert!(op.alg.sg[i].p_e.abs() < 1e-10);
            assert!(op.state.sg[i].delta.abs() < 1e-10);
        }
        assert!(op.drift() < 1e-8);
    }

    #[test]
    fn heavier_load_opens_load_angle() {
        let p = SmgParams::default();
        let light = find_steady_state(&p, 0.3).unwrap().load_angles().unwrap();
        let heavy = find_steady_state(&p, 0.6).unwrap().load_angles().unwrap();
        for i in 0..2 {
            assert!(heavy[i] > light[i], "{heavy:?} vs {light:?}");
        }
    }

    #[test]
    fn invalid_load_rejected() {
        assert!(find_steady_state(&SmgParams::default(), -1.0).is_err());
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of differential states (3 per generator, 3 for the motor).
pub const STATE_DIM: usize = 9;
/// Number of algebraic variables (3 per generator, 4 for the motor).
pub const ALGEBRAIC_DIM: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SgState {
    /// Rotor angle (rad).
    pub delta: f64,
    /// Rotor speed (p.u.).
    pub omega: f64,
    /// q-axis transient EMF (p.u.).
    pub e_q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImState {
    pub e_d: f64,
    pub e_q: f64,
    /// Shaft speed (p.u.).
    pub omega: f64,
}

/// Differential state, laid out as
/// `[δ1, ω1, e_q1', δ2, ω2, e_q2', e_d, e_q, ω_im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmgState {
    pub sg: [SgState; 2],
    pub im: ImState,
}

impl SmgState {
    pub const fn delta(i: usize) -> usize {
        3 * i
    }
    pub const fn omega(i: usize) -> usize {
        3 * i + 1
    }
    pub const fn e_q_prime(i: usize) -> usize {
        3 * i + 2
    }
    pub const IM_E_D: usize = 6;
    pub const IM_E_Q: usize = 7;
    pub const IM_OMEGA: usize = 8;

    pub fn to_vec(&self) -> Vec<f64> {
        let [a, b] = &self.sg;
        vec![
            a.delta,
            a.omega,
            a.e_q,
            b.delta,
            b.omega,
            b.e_q,
            self.im.e_d,
            self.im.e_q,
            self.im.omega,
        ]
    }

    pub fn from_slice(x: &[f64]) -> Result<Self> {
        if x.len() != STATE_DIM {
            return Err(Error::Dimension {
                context: "differential state".into(),
                expected: STATE_DIM,
                actual: x.len(),
            });
        }
        let sg = |i: usize| SgState {
            delta: x[3 * i],
            omega: x[3 * i + 1],
            e_q: x[3 * i + 2],
        };
        Ok(Self {
            sg: [sg(0), sg(1)],
            im: ImState {
                e_d: x[6],
                e_q: x[7],
                omega: x[8],
            },
        })
    }

    pub fn is_finite(&self) -> bool {
        self.to_vec().iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SgAlgebraic {
    /// Terminal voltage magnitude (p.u.).
    pub v_t: f64,
    /// d-axis stator current (p.u.).
    pub i_d: f64,
    /// Electrical power (p.u.).
    pub p_e: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImAlgebraic {
    /// Stator current injected into the network, d component (p.u.).
    pub i_d: f64,
    /// Stator current injected into the network, q component (p.u.).
    pub i_q: f64,
    pub slip: f64,
    /// Electromagnetic (motoring) torque (p.u.).
    pub t_e: f64,
}

/// Algebraic state, laid out as
/// `[V_t1, I_d1, P_e1, V_t2, I_d2, P_e2, i_d, i_q, s, T_e]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgebraicState {
    pub sg: [SgAlgebraic; 2],
    pub im: ImAlgebraic,
}

impl AlgebraicState {
    pub const fn v_t(i: usize) -> usize {
        3 * i
    }
    pub const fn i_d(i: usize) -> usize {
        3 * i + 1
    }
    pub const fn p_e(i: usize) -> usize {
        3 * i + 2
    }
    pub const IM_I_D: usize = 6;
    pub const IM_I_Q: usize = 7;
    pub const IM_SLIP: usize = 8;
    pub const IM_T_E: usize = 9;

    pub fn to_vec(&self) -> Vec<f64> {
        let [a, b] = &self.sg;
        vec![
            a.v_t,
            a.i_d,
            a.p_e,
            b.v_t,
            b.i_d,
            b.p_e,
            self.im.i_d,
            self.im.i_q,
            self.im.slip,
            self.im.t_e,
        ]
    }

    pub fn from_slice(y: &[f64]) -> Result<Self> {
        if y.len() != ALGEBRAIC_DIM {
            return Err(Error::Dimension {
                context: "algebraic state".into(),
                expected: ALGEBRAIC_DIM,
                actual: y.len(),
            });
        }
        let sg = |i: usize| SgAlgebraic {
            v_t: y[3 * i],
            i_d: y[3 * i + 1],
            p_e: y[3 * i + 2],
        };
        Ok(Self {
            sg: [sg(0), sg(1)],
            im: ImAlgebraic {
                i_d: y[6],
                i_q: y[7],
                slip: y[8],
                t_e: y[9],
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_round_trip() {
        let x: Vec<f64> = (0..STATE_DIM).map(|i| i as f64 + 0.5).collect();
        let s = SmgState::from_slice(&x).unwrap();
        assert_eq!(s.to_vec(), x);
        assert_eq!(s.sg[1].e_q, x[SmgState::e_q_prime(1)]);
        assert_eq!(s.im.omega, x[SmgState::IM_OMEGA]);

        let y: Vec<f64> = (0..ALGEBRAIC_DIM).map(|i| -(i as f64)).collect();
        let a = AlgebraicState::from_slice(&y).unwrap();
        assert_eq!(a.to_vec(), y);
        assert_eq!(a.sg[1].p_e, y[AlgebraicState::p_e(1)]);
        assert!(SmgState::from_slice(&x[..7]).is_err());
    }
}

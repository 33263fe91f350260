//! Algebraic network equations.
//!
//! Machines are voltage sources behind their transient reactances, each
//! tied through a line reactance to a common switchboard bus. Currents are
//! counted positive when injected into the network by the machine.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::smg::params::SmgParams;
use crate::smg::state::{AlgebraicState, ImAlgebraic, SgAlgebraic, SmgState};

pub const NEWTON_TOL: f64 = 1e-10;
pub const NEWTON_MAX_ITER: usize = 100;

/// Result of a star-network solve.
#[derive(Debug, Clone, PartialEq)]
pub struct StarSolution {
    pub bus: Complex64,
    pub currents: Vec<Complex64>,
    /// Kirchhoff current mismatch at the common bus.
    pub residual: f64,
    pub iterations: usize,
}

/// Solves the common-bus voltage of a lossless star network by Newton
/// iteration on the bus current mismatch.
pub fn solve_star(emfs: &[Complex64], reactances: &[f64]) -> Result<StarSolution> {
    if emfs.len() != reactances.len() {
        return Err(Error::Dimension {
            context: "star network reactances".into(),
            expected: emfs.len(),
            actual: reactances.len(),
        });
    }
    let j = Complex64::i();
    let admittance: Vec<Complex64> = reactances.iter().map(|&x| 1.0 / (j * x)).collect();
    let diag: Complex64 = admittance.iter().sum();
    if emfs.is_empty() || !diag.is_finite() || diag.norm() == 0.0 {
        return Err(Error::SingularNetwork {
            point: emfs.iter().flat_map(|e| [e.re, e.im]).collect(),
        });
    }

    let mismatch = |v: Complex64| -> Complex64 {
        emfs.iter()
            .zip(&admittance)
            .map(|(&e, &y)| (e - v) * y)
            .sum()
    };

    let mut bus = Complex64::new(0.0, 0.0);
    let mut residual = mismatch(bus).norm();
    let mut iterations = 0;
    while residual > NEWTON_TOL * 1e-3 && iterations < NEWTON_MAX_ITER {
        // d(mismatch)/dV = -diag
        let step = mismatch(bus) / diag;
        bus += step;
        iterations += 1;
        let next = mismatch(bus).norm();
        if !(next < residual) {
            residual = next;
            break;
        }
        residual = next;
    }
    if !residual.is_finite() || residual > NEWTON_TOL {
        return Err(Error::NetworkSolve {
            residual,
            iterations,
        });
    }
    let currents = emfs
        .iter()
        .zip(&admittance)
        .map(|(&e, &y)| (e - bus) * y)
        .collect();
    Ok(StarSolution {
        bus,
        currents,
        residual,
        iterations,
    })
}

/// Terminal quantities of a generator whose EMF `e_q` sits on the q axis at
/// angle `delta`, carrying network current `current`.
pub fn sg_terminal(e_q: f64, delta: f64, x_d_prime: f64, current: Complex64) -> SgAlgebraic {
    let j = Complex64::i();
    let emf = Complex64::from_polar(e_q, delta);
    let terminal = emf - j * x_d_prime * current;
    // machine frame: (I_d + j I_q) = I · e^{-j(δ - π/2)}
    let dq = current * j * Complex64::from_polar(1.0, -delta);
    SgAlgebraic {
        v_t: terminal.norm(),
        i_d: dq.re,
        p_e: (emf * current.conj()).re,
    }
}

/// Detailed network solution, including the switchboard bus voltage.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSolution {
    pub alg: AlgebraicState,
    pub bus: Complex64,
    pub residual: f64,
}

pub fn solve_network_detailed(state: &SmgState, p: &SmgParams) -> Result<NetworkSolution> {
    if !state.is_finite() {
        return Err(Error::NonFinite {
            context: "network state".into(),
            value: state
                .to_vec()
                .into_iter()
                .find(|v| !v.is_finite())
                .unwrap_or(f64::NAN),
        });
    }
    let emfs = [
        Complex64::from_polar(state.sg[0].e_q, state.sg[0].delta),
        Complex64::from_polar(state.sg[1].e_q, state.sg[1].delta),
        Complex64::new(state.im.e_d, state.im.e_q),
    ];
    let x = &p.network.x_line;
    let reactances = [
        p.sg[0].x_d_prime + x[0],
        p.sg[1].x_d_prime + x[1],
        p.im.x_prime() + x[2],
    ];
    let sol = solve_star(&emfs, &reactances).map_err(|e| match e {
        Error::SingularNetwork { .. } => Error::SingularNetwork {
            point: state.to_vec(),
        },
        other => other,
    })?;

    let sg = [0, 1].map(|i| {
        sg_terminal(
            state.sg[i].e_q,
            state.sg[i].delta,
            p.sg[i].x_d_prime,
            sol.currents[i],
        )
    });
    let i_m = sol.currents[2];
    let im = ImAlgebraic {
        i_d: i_m.re,
        i_q: i_m.im,
        slip: 1.0 - state.im.omega,
        // motoring torque: air-gap power drawn from the network
        t_e: -(state.im.e_d * i_m.re + state.im.e_q * i_m.im),
    };
    Ok(NetworkSolution {
        alg: AlgebraicState { sg, im },
        bus: sol.bus,
        residual: sol.residual,
    })
}

/// Algebraic variables consistent with the differential state.
pub fn solve_network(state: &SmgState, p: &SmgParams) -> Result<AlgebraicState> {
    solve_network_detailed(state, p).map(|s| s.alg)
}

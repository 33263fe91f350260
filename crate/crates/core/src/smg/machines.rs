//! Discrete-time machine updates and the saturated AVR.
//!
//! Every update is affine in each of its interval arguments once the
//! housing state is fixed, so the interval forms below return the exact
//! image as the hull of endpoint evaluations of the point forms.

use crate::error::{ensure_finite, Result};
use crate::interval::{corner_hull, Interval};
use crate::smg::params::{AvrParams, SgConstants, SgParams, SmgParams, StepConstants};
use crate::smg::state::{AlgebraicState, ImAlgebraic, ImState, SgAlgebraic, SgState, SmgState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImNext {
    pub e_d: Interval,
    pub e_q: Interval,
    pub omega: Interval,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgNext {
    pub delta: Interval,
    pub omega: Interval,
    pub e_q: Interval,
}

fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// Saturated excitation `ReLU(E_dem) - ReLU(E_dem - E_max)`, evaluated as
/// `min(ReLU(E_dem), E_max)` so the saturated branch returns `E_max` exactly.
pub fn dual_relu(e_dem: f64, e_max: f64) -> f64 {
    relu(e_dem).min(e_max)
}

/// Excitation demand `K_A (V_ref - V_t + U)`.
pub fn excitation_demand(v_t: f64, u: f64, p: &AvrParams) -> f64 {
    p.k_a * (p.v_ref - v_t + u)
}

pub fn avr_point(v_t: f64, u: f64, p: &AvrParams) -> f64 {
    dual_relu(excitation_demand(v_t, u, p), p.e_max)
}

/// Field voltage interval for interval terminal voltage and control.
pub fn avr_excitation(v_t: Interval, u: Interval, p: &AvrParams) -> Interval {
    corner_hull([v_t, u], |[v, c]| avr_point(v, c, p))
}

/// Motor update with point electrical inputs and load torque `t_l`.
pub fn im_step_point(
    state: &ImState,
    alg: &ImAlgebraic,
    t_l: f64,
    p: &SmgParams,
    c: &StepConstants,
) -> ImState {
    let reactance_gap = p.im.x() - p.im.x_prime();
    let s = alg.slip;
    // J = [[0, -1], [1, 0]]: (J v)_d = -v_q, (J v)_q = v_d
    let e_d = (1.0 - c.c1) * state.e_d + c.c1 * reactance_gap * alg.i_q + c.c2 * s * state.e_q;
    let e_q = (1.0 - c.c1) * state.e_q - c.c1 * reactance_gap * alg.i_d - c.c2 * s * state.e_d;
    let omega = (1.0 - c.c3 * p.im.k_f_im) * state.omega + c.c3 * (alg.t_e - t_l);
    ImState { e_d, e_q, omega }
}

/// Motor update with an interval load torque.
pub fn im_step(
    state: &ImState,
    alg: &ImAlgebraic,
    t_l: Interval,
    p: &SmgParams,
) -> Result<ImNext> {
    for (name, v) in [
        ("im.e_d", state.e_d),
        ("im.e_q", state.e_q),
        ("im.omega", state.omega),
        ("im.i_d", alg.i_d),
        ("im.i_q", alg.i_q),
        ("im.slip", alg.slip),
        ("im.t_e", alg.t_e),
        ("T_L.lo", t_l.lo),
        ("T_L.hi", t_l.hi),
    ] {
        ensure_finite(name, v)?;
    }
    let c = p.constants();
    let lo = im_step_point(state, alg, t_l.lo, p, &c);
    let hi = im_step_point(state, alg, t_l.hi, p, &c);
    Ok(ImNext {
        e_d: Interval::hull_of(lo.e_d, hi.e_d),
        e_q: Interval::hull_of(lo.e_q, hi.e_q),
        omega: Interval::hull_of(lo.omega, hi.omega),
    })
}

pub fn sg_step_point(
    state: &SgState,
    e_fd: f64,
    p_e: f64,
    i_d: f64,
    p: &SgParams,
    c: &SgConstants,
) -> SgState {
    SgState {
        delta: state.delta + c.c4 * (state.omega - 1.0),
        omega: (1.0 - c.c5 * p.d) * state.omega + c.c5 * (p.p_m - p_e),
        e_q: (1.0 - c.c6) * state.e_q + c.c6 * (e_fd - (p.x_d - p.x_d_prime) * i_d),
    }
}

/// Generator update with interval field voltage, electrical power and
/// d-axis current.
pub fn sg_step(
    state: &SgState,
    e_fd: Interval,
    p_e: Interval,
    i_d: Interval,
    p: &SgParams,
    c: &SgConstants,
) -> Result<SgNext> {
    for (name, v) in [
        ("sg.delta", state.delta),
        ("sg.omega", state.omega),
        ("sg.e_q", state.e_q),
        ("E_fd.lo", e_fd.lo),
        ("E_fd.hi", e_fd.hi),
        ("P_e.lo", p_e.lo),
        ("P_e.hi", p_e.hi),
        ("I_d.lo", i_d.lo),
        ("I_d.hi", i_d.hi),
    ] {
        ensure_finite(name, v)?;
    }
    let f = |[e, pe, id]: [f64; 3]| sg_step_point(state, e, pe, id, p, c);
    Ok(SgNext {
        delta: corner_hull([e_fd, p_e, i_d], |a| f(a).delta),
        omega: corner_hull([e_fd, p_e, i_d], |a| f(a).omega),
        e_q: corner_hull([e_fd, p_e, i_d], |a| f(a).e_q),
    })
}

/// Propeller load torque `k_prop ω² + ΔT_L`.
pub fn load_torque(k_prop: f64, omega_im: f64, delta_t_l: f64) -> f64 {
    k_prop * omega_im * omega_im + delta_t_l
}

/// One closed-loop step of the whole microgrid with point inputs.
/// Returns the next state and the two excitation demands.
pub fn step_point(
    p: &SmgParams,
    state: &SmgState,
    alg: &AlgebraicState,
    u: [f64; 2],
    k_prop: f64,
    delta_t_l: f64,
) -> (SmgState, [f64; 2]) {
    let c = p.constants();
    let mut e_dem = [0.0; 2];
    let mut sg = [state.sg[0]; 2];
    for i in 0..2 {
        let SgAlgebraic { v_t, i_d, p_e } = alg.sg[i];
        e_dem[i] = excitation_demand(v_t, u[i], &p.avr[i]);
        let e_fd = dual_relu(e_dem[i], p.avr[i].e_max);
        sg[i] = sg_step_point(&state.sg[i], e_fd, p_e, i_d, &p.sg[i], &c.sg[i]);
    }
    let t_l = load_torque(k_prop, state.im.omega, delta_t_l);
    let im = im_step_point(&state.im, &alg.im, t_l, p, &c);
    (SmgState { sg, im }, e_dem)
}

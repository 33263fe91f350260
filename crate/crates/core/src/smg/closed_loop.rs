//! Shock-onset closed loop and its verification graph.
//!
//! The load-torque step `W` hits the steady microgrid at `k = 0` while the
//! controller holds its pre-shock action. After that step only the motor
//! speed depends on `W`; the controller then observes the disturbed state
//! `X¹` and its action `U¹` drives the exciters into `X²`. The graph maps
//! `W` to `[U¹, E_dem¹, X²]`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{ClosedLoopGraph, GraphMeta, Node};
use crate::interval::DisturbanceBox;
use crate::neural::mlp::{GeneratorSpec, HiddenActivation, MlpController};
use crate::neural::relax::Activation;
use crate::smg::linearize::{linearization_residual, linearize_network, Linearization};
use crate::smg::machines::step_point;
use crate::smg::network::solve_network;
use crate::smg::state::{AlgebraicState, SmgState, ALGEBRAIC_DIM, STATE_DIM};
use crate::smg::steady::OperatingPoint;

/// Differential states seen by the controller:
/// `[δ1, ω1, e_q1', δ2, ω2, e_q2', ω_im]`.
pub const OBS_INDICES: [usize; 7] = [0, 1, 2, 3, 4, 5, SmgState::IM_OMEGA];
pub const OBS_DIM: usize = OBS_INDICES.len();
pub const ACTION_DIM: usize = 2;

/// Rows of the graph output.
pub const OUT_CONTROL: usize = 0;
pub const OUT_EXCITATION: usize = 2;
pub const OUT_STATE: usize = 4;
pub const OUT_DIM: usize = OUT_STATE + STATE_DIM;

// layout of the pass-through block P = [W, X¹, Y¹]
const P_W: usize = 0;
const P_X: usize = 1;
const P_Y: usize = P_X + STATE_DIM;
const P_DIM: usize = P_Y + ALGEBRAIC_DIM;

/// `O = H_x X + H_y Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub h_x: DMatrix<f64>,
    pub h_y: DMatrix<f64>,
}

impl Default for Observation {
    fn default() -> Self {
        let mut h_x = DMatrix::zeros(OBS_DIM, STATE_DIM);
        for (r, &c) in OBS_INDICES.iter().enumerate() {
            h_x[(r, c)] = 1.0;
        }
        Self {
            h_x,
            h_y: DMatrix::zeros(OBS_DIM, ALGEBRAIC_DIM),
        }
    }
}

impl Observation {
    pub fn apply(&self, x: &SmgState, y: &AlgebraicState) -> Vec<f64> {
        let o = &self.h_x * DVector::from_vec(x.to_vec()) + &self.h_y * DVector::from_vec(y.to_vec());
        o.iter().copied().collect()
    }
}

pub fn observe(x: &SmgState) -> Vec<f64> {
    let v = x.to_vec();
    OBS_INDICES.iter().map(|&i| v[i]).collect()
}

fn check_controller(ctrl: &MlpController) -> Result<()> {
    if ctrl.input_dim() != OBS_DIM {
        return Err(Error::Dimension {
            context: "controller input vs observation".into(),
            expected: OBS_DIM,
            actual: ctrl.input_dim(),
        });
    }
    if ctrl.output_dim() != ACTION_DIM {
        return Err(Error::Dimension {
            context: "controller output vs excitation channels".into(),
            expected: ACTION_DIM,
            actual: ctrl.output_dim(),
        });
    }
    Ok(())
}

fn action(ctrl: &MlpController, x: &SmgState) -> Result<[f64; 2]> {
    check_controller(ctrl)?;
    let u = ctrl.forward(&observe(x))?;
    Ok([u[0], u[1]])
}

/// Controller action at the undisturbed operating point.
pub fn pre_shock_action(op: &OperatingPoint, ctrl: &MlpController) -> Result<[f64; 2]> {
    action(ctrl, &op.state)
}

/// State one step after a load-torque step `w` hits the operating point.
pub fn shock_onset(op: &OperatingPoint, u0: [f64; 2], w: f64) -> SmgState {
    step_point(&op.params, &op.state, &op.alg, u0, op.k_prop, w).0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShockResponse {
    /// Controller action after the shock.
    pub u: [f64; 2],
    pub e_dem: [f64; 2],
    pub next: SmgState,
}

impl ShockResponse {
    /// Same layout as the graph output.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(OUT_DIM);
        v.extend(self.u);
        v.extend(self.e_dem);
        v.extend(self.next.to_vec());
        v
    }
}

fn respond(
    op: &OperatingPoint,
    ctrl: &MlpController,
    u0: [f64; 2],
    w: f64,
    algebraic: impl FnOnce(&SmgState) -> Result<AlgebraicState>,
) -> Result<ShockResponse> {
    let x1 = shock_onset(op, u0, w);
    let y1 = algebraic(&x1)?;
    let u = action(ctrl, &x1)?;
    let (next, e_dem) = step_point(&op.params, &x1, &y1, u, op.k_prop, w);
    Ok(ShockResponse { u, e_dem, next })
}

/// Shock response with the nonlinear network solve.
pub fn simulate_exact(
    op: &OperatingPoint,
    ctrl: &MlpController,
    u0: [f64; 2],
    w: f64,
) -> Result<ShockResponse> {
    respond(op, ctrl, u0, w, |x| solve_network(x, &op.params))
}

/// Shock response with the algebraic channel replaced by `lin`.
pub fn simulate_linearized(
    op: &OperatingPoint,
    ctrl: &MlpController,
    u0: [f64; 2],
    lin: &Linearization,
    w: f64,
) -> Result<ShockResponse> {
    respond(op, ctrl, u0, w, |x| {
        AlgebraicState::from_slice(lin.predict(&x.to_vec(), &[w]).as_slice())
    })
}

/// Names of the graph outputs, in order.
pub fn output_labels() -> Vec<String> {
    let states = ["delta1", "omega1", "e_q1", "delta2", "omega2", "e_q2", "e_d_im", "e_q_im", "omega_im"];
    ["U1", "U2", "E_dem1", "E_dem2"]
        .into_iter()
        .map(String::from)
        .chain(states.iter().map(|s| format!("{s}_next")))
        .collect()
}

#[derive(Debug, Clone)]
pub struct AssembledLoop {
    pub graph: ClosedLoopGraph,
    pub lin: Linearization,
    /// Largest gap between the exact and linearized algebraic channel over
    /// the box, per component.
    pub residual: Vec<f64>,
    pub u0: [f64; 2],
}

fn require_scalar_box(bx: &DisturbanceBox) -> Result<()> {
    if bx.dim() != 1 {
        return Err(Error::Dimension {
            context: "load-torque disturbance box".into(),
            expected: 1,
            actual: bx.dim(),
        });
    }
    Ok(())
}

fn residual_points(op: &OperatingPoint, u0: [f64; 2], bx: &DisturbanceBox) -> Vec<(SmgState, Vec<f64>)> {
    let (lo, hi) = (bx.lower()[0], bx.upper()[0]);
    let n = 21;
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .chain(std::iter::once(bx.center[0]))
        .map(|w| (shock_onset(op, u0, w), vec![w]))
        .collect()
}

/// Builds the verification graph for the shock response over `bx`.
///
/// The algebraic channel is linearized at the post-shock state for the box
/// center.
pub fn assemble_closed_loop(
    op: &OperatingPoint,
    ctrl: &MlpController,
    bx: &DisturbanceBox,
) -> Result<AssembledLoop> {
    check_controller(ctrl)?;
    require_scalar_box(bx)?;
    let p = &op.params;
    let c = p.constants();
    let u0 = pre_shock_action(op, ctrl)?;
    let w_c = bx.center[0];
    let x1_c = shock_onset(op, u0, w_c);
    let lin = linearize_network(&x1_c, &[w_c], p)?;
    let residual = linearization_residual(&lin, &residual_points(op, u0, bx), p)?;

    // P = [W, X¹(W), Y¹(W)], all affine in W
    let x1_0 = DVector::from_vec(shock_onset(op, u0, 0.0).to_vec());
    let mut dx = DVector::zeros(STATE_DIM);
    dx[SmgState::IM_OMEGA] = -c.c3;
    let mut a0 = DMatrix::zeros(P_DIM, 1);
    let mut b0 = DVector::zeros(P_DIM);
    a0[(P_W, 0)] = 1.0;
    a0.view_mut((P_X, 0), (STATE_DIM, 1)).copy_from(&dx);
    b0.rows_mut(P_X, STATE_DIM).copy_from(&x1_0);
    let dy = &lin.m * &dx + lin.d.column(0);
    a0.view_mut((P_Y, 0), (ALGEBRAIC_DIM, 1)).copy_from(&dy);
    b0.rows_mut(P_Y, ALGEBRAIC_DIM)
        .copy_from(&(&lin.m * &x1_0 + &lin.y0));

    let mut g = ClosedLoopGraph::new(1);
    g.push(Node::Affine {
        weight: a0,
        bias: b0,
    })?;

    // controller layers, each carrying P alongside the hidden vector
    let obs = Observation::default();
    let mut h_p = DMatrix::zeros(OBS_DIM, P_DIM);
    h_p.view_mut((0, P_X), (OBS_DIM, STATE_DIM)).copy_from(&obs.h_x);
    h_p.view_mut((0, P_Y), (OBS_DIM, ALGEBRAIC_DIM)).copy_from(&obs.h_y);
    let hidden: Activation = ctrl.hidden().into();
    let layers = ctrl.layers();
    let mut width = 0;
    for (k, layer) in layers.iter().enumerate() {
        let rows = layer.weight.nrows();
        let mut wt = DMatrix::zeros(P_DIM + rows, P_DIM + width);
        wt.view_mut((0, 0), (P_DIM, P_DIM)).fill_with_identity();
        if k == 0 {
            wt.view_mut((P_DIM, 0), (rows, P_DIM))
                .copy_from(&(&layer.weight * &h_p));
        } else {
            wt.view_mut((P_DIM, P_DIM), (rows, width))
                .copy_from(&layer.weight);
        }
        let mut bias = DVector::zeros(P_DIM + rows);
        bias.rows_mut(P_DIM, rows).copy_from(&layer.bias);
        g.push(Node::Affine { weight: wt, bias })?;
        let act = if k + 1 == layers.len() {
            Activation::Tanh
        } else {
            hidden
        };
        let mut kinds = vec![Activation::Identity; P_DIM];
        kinds.extend(std::iter::repeat(act).take(rows));
        g.push(Node::Activation { kinds })?;
        width = rows;
    }

    // [P, U, E_dem, E_dem] with U = a_max·t
    const U: usize = P_DIM;
    const E_DEM: usize = U + 2;
    const E_FD: usize = E_DEM + 2;
    const SCALED: usize = E_FD + 2;
    let mut ws = DMatrix::zeros(SCALED, P_DIM + ACTION_DIM);
    let mut bs = DVector::zeros(SCALED);
    ws.view_mut((0, 0), (P_DIM, P_DIM)).fill_with_identity();
    for i in 0..2 {
        let avr = &p.avr[i];
        let t = P_DIM + i;
        let v_t = P_Y + AlgebraicState::v_t(i);
        ws[(U + i, t)] = ctrl.a_max();
        for row in [E_DEM + i, E_FD + i] {
            ws[(row, t)] = avr.k_a * ctrl.a_max();
            ws[(row, v_t)] = -avr.k_a;
            bs[row] = avr.k_a * avr.v_ref;
        }
    }
    g.push(Node::Affine {
        weight: ws,
        bias: bs,
    })?;
    for i in 0..2 {
        g.push(Node::DualRelu {
            dim: SCALED,
            channel: E_FD + i,
            ceiling: p.avr[i].e_max,
        })?;
    }

    let slip = P_Y + AlgebraicState::IM_SLIP;
    let (e_d, e_q, w_im) = (
        P_X + SmgState::IM_E_D,
        P_X + SmgState::IM_E_Q,
        P_X + SmgState::IM_OMEGA,
    );
    const S_EQ: usize = SCALED;
    const S_ED: usize = SCALED + 1;
    const W2: usize = SCALED + 2;
    g.push(Node::Bilinear {
        dim: SCALED,
        pairs: vec![(slip, e_q), (slip, e_d), (w_im, w_im)],
    })?;

    // [U, E_dem, X²]
    let mut wf = DMatrix::zeros(OUT_DIM, W2 + 1);
    let mut bf = DVector::zeros(OUT_DIM);
    wf.view_mut((OUT_CONTROL, U), (4, 4)).fill_with_identity();
    for i in 0..2 {
        let sg = &p.sg[i];
        let k = &c.sg[i];
        let (delta, omega, eq) = (SmgState::delta(i), SmgState::omega(i), SmgState::e_q_prime(i));
        let r = OUT_STATE;
        wf[(r + delta, P_X + delta)] = 1.0;
        wf[(r + delta, P_X + omega)] = k.c4;
        bf[r + delta] = -k.c4;
        wf[(r + omega, P_X + omega)] = 1.0 - k.c5 * sg.d;
        wf[(r + omega, P_Y + AlgebraicState::p_e(i))] = -k.c5;
        bf[r + omega] = k.c5 * sg.p_m;
        wf[(r + eq, P_X + eq)] = 1.0 - k.c6;
        wf[(r + eq, E_FD + i)] = k.c6;
        wf[(r + eq, P_Y + AlgebraicState::i_d(i))] = -k.c6 * (sg.x_d - sg.x_d_prime);
    }
    let gap = p.im.x() - p.im.x_prime();
    let r_ed = OUT_STATE + SmgState::IM_E_D;
    let r_eq = OUT_STATE + SmgState::IM_E_Q;
    let r_w = OUT_STATE + SmgState::IM_OMEGA;
    wf[(r_ed, e_d)] = 1.0 - c.c1;
    wf[(r_ed, P_Y + AlgebraicState::IM_I_Q)] = c.c1 * gap;
    wf[(r_ed, S_EQ)] = c.c2;
    wf[(r_eq, e_q)] = 1.0 - c.c1;
    wf[(r_eq, P_Y + AlgebraicState::IM_I_D)] = -c.c1 * gap;
    wf[(r_eq, S_ED)] = -c.c2;
    wf[(r_w, w_im)] = 1.0 - c.c3 * p.im.k_f_im;
    wf[(r_w, P_Y + AlgebraicState::IM_T_E)] = c.c3;
    wf[(r_w, W2)] = -c.c3 * op.k_prop;
    wf[(r_w, P_W)] = -c.c3;
    g.push(Node::Affine {
        weight: wf,
        bias: bf,
    })?;

    g.meta = GraphMeta {
        control: vec![OUT_CONTROL, OUT_CONTROL + 1],
        excitation: vec![
            (OUT_EXCITATION, p.avr[0].e_max),
            (OUT_EXCITATION + 1, p.avr[1].e_max),
        ],
        a_max: ctrl.a_max(),
        residual_bound: residual.clone(),
        labels: output_labels(),
    };
    Ok(AssembledLoop {
        graph: g,
        lin,
        residual,
        u0,
    })
}

/// Generator recipe for a stand-in controller normalized around the
/// observation at onset of the nominal shock, taken without control.
pub fn stand_in_spec(
    op: &OperatingPoint,
    seed: u64,
    activation: HiddenActivation,
    aggressiveness: f64,
) -> GeneratorSpec {
    let onset = shock_onset(op, [0.0; 2], op.params.sim.shock);
    GeneratorSpec::new(seed, activation, aggressiveness).with_normalization(
        observe(&onset),
        vec![0.05, 0.002, 0.02, 0.05, 0.002, 0.02, 0.001],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::mlp::{generate_controller, DenseLayer};
    use crate::smg::params::SmgParams;
    use crate::smg::steady::find_steady_state;

    fn setup(aggr: f64) -> (OperatingPoint, MlpController) {
        let p = SmgParams::default();
        let op = find_steady_state(&p, p.sim.load_level).unwrap();
        let ctrl = generate_controller(&stand_in_spec(&op, 42, HiddenActivation::Tanh, aggr)).unwrap();
        (op, ctrl)
    }

    #[test]
    fn graph_matches_linearized_simulation() {
        let (op, ctrl) = setup(5.0);
        let bx = DisturbanceBox::scalar(0.1, 0.02).unwrap();
        let asm = assemble_closed_loop(&op, &ctrl, &bx).unwrap();
        for w in [0.08, 0.09, 0.1, 0.113, 0.12] {
            let g = asm.graph.eval(&[w]).unwrap();
            let s = simulate_linearized(&op, &ctrl, asm.u0, &asm.lin, w).unwrap().to_vec();
            for (a, b) in g.iter().zip(&s) {
                assert!((a - b).abs() < 1e-9, "w {w}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn only_motor_speed_sees_the_shock() {
        let (op, ctrl) = setup(1.0);
        let u0 = pre_shock_action(&op, &ctrl).unwrap();
        let a = shock_onset(&op, u0, 0.08).to_vec();
        let b = shock_onset(&op, u0, 0.12).to_vec();
        for i in 0..STATE_DIM {
            if i == SmgState::IM_OMEGA {
                assert!((a[i] - b[i] - op.params.constants().c3 * 0.04).abs() < 1e-15);
            } else {
                assert_eq!(a[i], b[i]);
            }
        }
    }

    #[test]
    fn controller_shape_is_checked() {
        let (op, _) = setup(1.0);
        let bad = MlpController::new(
            vec![DenseLayer {
                weight: DMatrix::zeros(2, 6),
                bias: DVector::zeros(2),
            }],
            HiddenActivation::Tanh,
            0.1,
        )
        .unwrap();
        let bx = DisturbanceBox::scalar(0.1, 0.02).unwrap();
        assert!(matches!(
            assemble_closed_loop(&op, &bad, &bx),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn controller_layer_shapes_in_graph() {
        let (op, ctrl) = setup(1.0);
        let bx = DisturbanceBox::scalar(0.1, 0.02).unwrap();
        let g = assemble_closed_loop(&op, &ctrl, &bx).unwrap().graph;
        let affine: Vec<_> = g
            .nodes()
            .iter()
            .filter_map(|n| match n {
                Node::Affine { weight, .. } => Some(weight.shape()),
                _ => None,
            })
            .collect();
        // first controller layer reads the 7 observed states out of P
        assert_eq!(affine[1], (P_DIM + 32, P_DIM));
        assert_eq!(affine[3], (P_DIM + 2, P_DIM + 32));
        let dual = g.nodes().iter().filter(|n| matches!(n, Node::DualRelu { .. })).count();
        assert_eq!(dual, 2);
        assert_eq!(g.output_dim(), OUT_DIM);
        assert_eq!(g.meta.labels.len(), OUT_DIM);
    }

    #[test]
    fn residual_is_small_on_nominal_box() {
        let (op, ctrl) = setup(1.0);
        let bx = DisturbanceBox::scalar(0.1, 0.02).unwrap();
        let asm = assemble_closed_loop(&op, &ctrl, &bx).unwrap();
        assert!(asm.residual.iter().all(|&r| r < 1e-3), "{:?}", asm.residual);
    }

    #[test]
    fn exact_and_linearized_agree_at_center() {
        let (op, ctrl) = setup(5.0);
        let bx = DisturbanceBox::scalar(0.1, 0.02).unwrap();
        let asm = assemble_closed_loop(&op, &ctrl, &bx).unwrap();
        let a = simulate_exact(&op, &ctrl, asm.u0, 0.1).unwrap().to_vec();
        let b = simulate_linearized(&op, &ctrl, asm.u0, &asm.lin, 0.1).unwrap().to_vec();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-8, "{x} vs {y}");
        }
    }
}
